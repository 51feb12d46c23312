//! Rational-hyperplane slicing of sphere point sets.
//!
//! For an integer normal `b`, the planes `b·x = t`, `t ∈ ℤ`, partition the
//! lattice points of the sphere into buckets. The largest bucket over a sweep
//! of normals is a certified *lower* bound for the maximal rational-hyperplane
//! section of the sphere; the per-normal largest bucket times the number of
//! planes meeting a segment's slab is an exact upper bound for the segment
//! count, which [`check_lemma1`] verifies.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{plane_offset, segment_height, Direction, Segment};
use crate::interval::{ceil_scaled_sqrt, floor_scaled_sqrt, floor_sqrt_ratio};
use crate::lattice::{count_segment, SegmentCount, SpherePointSet};

/// Default cap on the number of candidate normals a sweep may enumerate.
pub const DEFAULT_SWEEP_BUDGET: u64 = 10_000_000;

/// Cap on stored witnesses in a [`KappaEstimate`]; the sweep keeps the first
/// ones in candidate order.
pub const MAX_KAPPA_WITNESSES: usize = 64;

/// Histogram of a sphere point set over the planes `b·x = t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceHistogram {
    normal: Vec<i64>,
    buckets: BTreeMap<i64, u64>,
    was_normalized: bool,
}

impl SliceHistogram {
    /// The primitive normal actually used.
    pub fn normal(&self) -> &[i64] {
        &self.normal
    }

    /// Ascending map `t → |{x : b·x = t}|`.
    pub fn buckets(&self) -> &BTreeMap<i64, u64> {
        &self.buckets
    }

    /// True when the input normal had to be divided by its gcd.
    pub fn was_normalized(&self) -> bool {
        self.was_normalized
    }

    pub fn total(&self) -> u64 {
        self.buckets.values().sum()
    }

    /// Largest bucket count; 0 for an empty sphere.
    pub fn max_bucket(&self) -> u64 {
        self.buckets.values().copied().max().unwrap_or(0)
    }

    /// Offsets achieving [`Self::max_bucket`], ascending.
    pub fn argmax_offsets(&self) -> Vec<i64> {
        let m = self.max_bucket();
        self.buckets
            .iter()
            .filter(|(_, &c)| c == m && m > 0)
            .map(|(&t, _)| t)
            .collect()
    }

    /// CSV rows `normal,t,count` with the normal's coordinates joined by `;`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "normal,t,count")?;
        let label: Vec<String> = self.normal.iter().map(|c| c.to_string()).collect();
        let label = label.join(";");
        for (t, c) in &self.buckets {
            writeln!(w, "{label},{t},{c}")?;
        }
        Ok(())
    }
}

/// Groups the points of `pts` by `b·x`. A non-primitive `b` is normalized
/// (flagged on the histogram); a zero `b` is rejected.
pub fn slice(pts: &SpherePointSet, b: &[i64]) -> Result<SliceHistogram> {
    if b.len() != pts.sphere().dim() {
        return Err(Error::DimensionMismatch {
            expected: pts.sphere().dim(),
            got: b.len(),
        });
    }
    if b.iter().all(|&c| c == 0) {
        return Err(Error::ZeroVector);
    }
    let g = b.iter().fold(0i64, |acc, &c| acc.gcd(&c));
    let normal: Vec<i64> = b.iter().map(|&c| c / g).collect();
    let was_normalized = g != 1;
    let mut buckets: BTreeMap<i64, u64> = BTreeMap::new();
    for p in pts.iter() {
        let t: i128 = normal
            .iter()
            .zip(&p.coords)
            .map(|(&bi, &xi)| bi as i128 * xi as i128)
            .sum();
        let t = i64::try_from(t).map_err(|_| Error::Overflow("slice offset"))?;
        *buckets.entry(t).or_insert(0) += 1;
    }
    Ok(SliceHistogram {
        normal,
        buckets,
        was_normalized,
    })
}

fn norm_sq_big(b: &[i64]) -> BigInt {
    b.iter().map(|&c| BigInt::from(c) * BigInt::from(c)).sum()
}

/// Number of integers `t` for which the plane `b·x = t` meets the closed slab
/// spanned by the two base hyperplanes, `λ1 ≤ t/|b| ≤ λ2` (with `λ_i = c_i/√n`
/// and `c_inner = None` meaning the slab extends to the antipode).
pub(crate) fn slices_in_slab(
    n: u64,
    b_norm_sq: &BigInt,
    c_outer: &BigRational,
    c_inner: Option<&BigRational>,
) -> u64 {
    // t ≥ c_outer·√(B/n) and t ≤ c_inner·√(B/n); the scaled radicand B/n is
    // rational, so both endpoints round exactly.
    let ratio = BigRational::new(b_norm_sq.clone(), BigInt::from(n));
    let t_lo = ceil_scaled_sqrt(c_outer, &ratio);
    let t_hi = match c_inner {
        Some(c) => floor_scaled_sqrt(c, &ratio),
        // Cauchy–Schwarz: |t| ≤ √(B·n)
        None => floor_sqrt_ratio(&BigRational::from_integer(b_norm_sq * BigInt::from(n))),
    };
    if t_hi < t_lo {
        0
    } else {
        (t_hi - t_lo + BigInt::one()).to_u64().unwrap_or(u64::MAX)
    }
}

/// Number of integer offsets whose plane meets the segment's slab; always at
/// most `1 + ⌊|b|·h⌋`.
pub fn count_slices_hit(seg: &Segment) -> Result<u64> {
    let b = match seg.direction() {
        Direction::Rational { b } => b,
        Direction::Real { .. } => return Err(Error::RationalDirectionRequired),
    };
    let n = seg.sphere().n();
    let c1 = plane_offset(seg.sphere(), seg.rho1())?;
    let c2 = plane_offset(seg.sphere(), seg.rho2())?;
    Ok(slices_in_slab(n, &norm_sq_big(b), &c1, Some(&c2)))
}

/// `⌊|b|·h⌋` computed exactly from `B = b·b` and `h² = (rho1−rho2)²/(4n)`.
pub(crate) fn floor_norm_times_height(b_norm_sq: &BigInt, h_sq: &BigRational) -> BigInt {
    floor_sqrt_ratio(&(BigRational::from_integer(b_norm_sq.clone()) * h_sq))
}

pub(crate) fn ceil_norm_times_height(b_norm_sq: &BigInt, h_sq: &BigRational) -> BigInt {
    let prod = BigRational::from_integer(b_norm_sq.clone()) * h_sq;
    let f = floor_sqrt_ratio(&prod);
    if BigRational::from_integer(&f * &f) == prod {
        f
    } else {
        f + BigInt::one()
    }
}

/// Sweep result: a certified lower bound for the maximal number of sphere
/// lattice points on a single rational hyperplane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaEstimate {
    /// Max bucket count over the sweep. A lower bound for the true maximum,
    /// which ranges over all rational hyperplanes.
    pub value: u64,
    /// `(normal, offset)` pairs achieving `value`, in sweep order, at most
    /// [`MAX_KAPPA_WITNESSES`] of them.
    pub witnesses: Vec<(Vec<i64>, i64)>,
    /// The sweep covered every primitive normal with `|b| ≤ candidate_bound`.
    pub candidate_bound: u64,
}

/// All primitive vectors with positive leading nonzero coordinate and
/// `b·b ≤ max_norm²`, in lexicographic order.
fn primitive_normals(d: usize, max_norm: u64) -> Vec<Vec<i64>> {
    let bound = max_norm as i64;
    let cap = (max_norm * max_norm) as i64;
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fn rec(i: usize, d: usize, cap: i64, bound: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == d {
            let g = cur.iter().fold(0i64, |acc, &c| acc.gcd(&c));
            if g == 1 {
                if let Some(first) = cur.iter().find(|&&c| c != 0) {
                    if *first > 0 {
                        out.push(cur.clone());
                    }
                }
            }
            return;
        }
        let used: i64 = cur[..i].iter().map(|&c| c * c).sum();
        for x in -bound..=bound {
            if used + x * x <= cap {
                cur[i] = x;
                rec(i + 1, d, cap, bound, cur, out);
            }
        }
        cur[i] = 0;
    }
    rec(0, d, cap, bound, &mut cur, &mut out);
    out
}

/// Sweeps every primitive normal with `|b| ≤ max_normal_norm` and reports the
/// largest bucket seen, with witnesses. Uses the default sweep budget.
pub fn kappa_estimate(pts: &SpherePointSet, max_normal_norm: u64) -> Result<KappaEstimate> {
    kappa_estimate_with_budget(pts, max_normal_norm, DEFAULT_SWEEP_BUDGET)
}

pub fn kappa_estimate_with_budget(
    pts: &SpherePointSet,
    max_normal_norm: u64,
    budget: u64,
) -> Result<KappaEstimate> {
    if max_normal_norm < 1 {
        return Err(Error::OutOfRange {
            what: "max normal norm",
            details: "need at least 1".into(),
        });
    }
    let d = pts.sphere().dim() as u32;
    let projected = (2 * max_normal_norm + 1).checked_pow(d).unwrap_or(u64::MAX);
    if projected > budget {
        return Err(Error::BudgetExceeded {
            what: "normal sweep",
            projected,
            budget,
        });
    }
    let candidates = primitive_normals(pts.sphere().dim(), max_normal_norm);
    let per_candidate: Vec<(u64, Vec<i64>, Vec<i64>)> = candidates
        .into_par_iter()
        .map(|b| {
            let hist = slice(pts, &b).expect("candidate normals are valid");
            let m = hist.max_bucket();
            let ts = hist.argmax_offsets();
            (m, b, ts)
        })
        .collect();
    let value = per_candidate.iter().map(|(m, _, _)| *m).max().unwrap_or(0);
    let mut witnesses = Vec::new();
    if value > 0 {
        'outer: for (m, b, ts) in &per_candidate {
            if *m == value {
                for &t in ts {
                    if witnesses.len() >= MAX_KAPPA_WITNESSES {
                        break 'outer;
                    }
                    witnesses.push((b.clone(), t));
                }
            }
        }
    }
    Ok(KappaEstimate {
        value,
        witnesses,
        candidate_bound: max_normal_norm,
    })
}

/// Outcome of checking a segment count against its slice bound.
#[derive(Clone, Debug)]
pub struct Lemma1Report {
    pub count: SegmentCount,
    /// Largest bucket for the segment's own normal.
    pub kappa_b: u64,
    /// Sweep value of the estimate handed in.
    pub kappa_global: u64,
    pub slices_hit: u64,
    /// `1 + ⌊|b|h⌋`: the exact plane-count bound.
    pub planes_bound: u64,
    /// `kappa_b · (1 + ⌈|b|h⌉)`.
    pub bound_b: u64,
    /// `kappa_global · (1 + ⌈|b|h⌉)`.
    pub bound_global: u64,
    pub holds_b: bool,
    pub holds_global: bool,
}

/// Checks `count ≤ κ_b·(1 + ⌈|b|h⌉)` for a rational-direction segment, using
/// the per-normal slice maximum as `κ_b` (a valid strengthening) and also
/// reporting against the global sweep estimate.
pub fn check_lemma1(
    seg: &Segment,
    pts: &SpherePointSet,
    kappa: &KappaEstimate,
) -> Result<Lemma1Report> {
    let b = match seg.direction() {
        Direction::Rational { b } => b.clone(),
        Direction::Real { .. } => return Err(Error::RationalDirectionRequired),
    };
    let bb = norm_sq_big(&b);
    let bound_big = BigInt::from(kappa.candidate_bound) * BigInt::from(kappa.candidate_bound);
    if bb > bound_big {
        return Err(Error::Invalid(format!(
            "kappa sweep bound {} does not cover |b|² = {}",
            kappa.candidate_bound, bb
        )));
    }
    let hist = slice(pts, &b)?;
    let kappa_b = hist.max_bucket();
    let count = count_segment(seg, pts);
    let slices_hit = count_slices_hit(seg)?;
    let h_sq = segment_height(seg).squared;
    let planes_bound = 1 + floor_norm_times_height(&bb, &h_sq)
        .to_u64()
        .ok_or(Error::Overflow("planes bound"))?;
    let ceil_bh = ceil_norm_times_height(&bb, &h_sq)
        .to_u64()
        .ok_or(Error::Overflow("|b|h"))?;
    let bound_b = kappa_b
        .checked_mul(1 + ceil_bh)
        .ok_or(Error::Overflow("lemma bound"))?;
    let bound_global = kappa
        .value
        .checked_mul(1 + ceil_bh)
        .ok_or(Error::Overflow("lemma bound"))?;
    Ok(Lemma1Report {
        count,
        kappa_b,
        kappa_global: kappa.value,
        slices_hit,
        planes_bound,
        bound_b,
        bound_global,
        holds_b: count.hi() <= bound_b,
        holds_global: count.hi() <= bound_global,
    })
}
