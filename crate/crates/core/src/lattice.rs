//! Enumeration of integer points on a sphere and exact membership tests for
//! caps and segments.
//!
//! Enumeration is a recursive coordinate descent over the remaining squared
//! budget, with the final two coordinates resolved through a sieve-built
//! two-square table. Membership for rational directions is decided exactly by
//! sign analysis and squaring; float directions get a tri-state verdict with a
//! declared tolerance, never a silent coercion.

use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{plane_offset, Cap, Direction, Segment, SphereSpec};
use crate::interval::rat_u64;

/// Default cap on the projected search volume of an enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 400_000_000;

/// Absolute tolerance of the float membership path (2^-30).
pub const REAL_MEMBERSHIP_TOLERANCE: f64 = 1.0 / 1_073_741_824.0;

/// A point of `ℤ^d`; attached to a sphere through [`SpherePointSet`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
}

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn norm_sq(&self) -> u64 {
        self.coords
            .iter()
            .map(|&c| (c as i128 * c as i128) as u64)
            .sum()
    }

    /// gcd of the coordinates; 0 only for the origin.
    pub fn content(&self) -> i64 {
        self.coords
            .iter()
            .fold(0i64, |acc, &c| num_integer::gcd(acc, c))
    }
}

/// All lattice points on a sphere, lexicographically sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpherePointSet {
    sphere: SphereSpec,
    points: Vec<LatticePoint>,
}

impl SpherePointSet {
    /// Validates, sorts, and deduplicates.
    pub fn from_points(sphere: SphereSpec, mut points: Vec<LatticePoint>) -> Result<Self> {
        for p in &points {
            if p.coords.len() != sphere.dim() {
                return Err(Error::DimensionMismatch {
                    expected: sphere.dim(),
                    got: p.coords.len(),
                });
            }
            if p.norm_sq() != sphere.n() {
                return Err(Error::Invalid(format!(
                    "point {:?} is not on the sphere of squared radius {}",
                    p.coords,
                    sphere.n()
                )));
            }
        }
        points.sort();
        points.dedup();
        Ok(Self { sphere, points })
    }

    pub fn sphere(&self) -> &SphereSpec {
        &self.sphere
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }
}

pub(crate) fn isqrt_u64(m: u64) -> u64 {
    let mut s = (m as f64).sqrt() as u64;
    while (s + 1) as u128 * (s + 1) as u128 <= m as u128 {
        s += 1;
    }
    while s as u128 * s as u128 > m as u128 {
        s -= 1;
    }
    s
}

/// Rough count of lattice points the coordinate descent will visit:
/// the volume of the `(d−2)`-ball of radius `√n`, plus the two-square table.
pub fn projected_search_volume(sphere: &SphereSpec) -> u64 {
    let r = (sphere.n() as f64).sqrt();
    let k = sphere.dim() - 2;
    let mut volumes = vec![1.0, 2.0 * r];
    for j in 2..=k.max(1) {
        let prev = volumes[j - 2];
        volumes.push(prev * 2.0 * std::f64::consts::PI * r * r / j as f64);
    }
    let ball = volumes[k] * 1.5 + 1.0;
    let table = if sphere.dim() >= 3 {
        sphere.n()
    } else {
        isqrt_u64(sphere.n())
    };
    if !ball.is_finite() || ball >= u64::MAX as f64 {
        return u64::MAX;
    }
    (ball as u64).saturating_add(table)
}

/// All canonical representations `m = x² + y²` with `0 ≤ x ≤ y`, for every
/// `m ≤ n`, built by a single sieve pass.
fn two_square_table(n: u64) -> Vec<Vec<(i64, i64)>> {
    let mut table = vec![Vec::new(); n as usize + 1];
    let r = isqrt_u64(n);
    for x in 0..=r {
        let x2 = x * x;
        if x2 > n {
            break;
        }
        let ymax = isqrt_u64(n - x2);
        for y in x..=ymax {
            table[(x2 + y * y) as usize].push((x as i64, y as i64));
        }
    }
    table
}

/// Expands a canonical pair `0 ≤ x ≤ y` to all sign/order variants.
fn push_two_square_variants(x: i64, y: i64, mut emit: impl FnMut(i64, i64)) {
    if x == 0 && y == 0 {
        emit(0, 0);
    } else if x == 0 {
        emit(0, y);
        emit(0, -y);
        emit(y, 0);
        emit(-y, 0);
    } else if x == y {
        emit(x, y);
        emit(x, -y);
        emit(-x, y);
        emit(-x, -y);
    } else {
        emit(x, y);
        emit(x, -y);
        emit(-x, y);
        emit(-x, -y);
        emit(y, x);
        emit(y, -x);
        emit(-y, x);
        emit(-y, -x);
    }
}

fn descend(
    prefix: &mut Vec<i64>,
    rem: u64,
    depth_left: usize,
    table: &[Vec<(i64, i64)>],
    out: &mut Vec<LatticePoint>,
) {
    if depth_left == 0 {
        for &(x, y) in &table[rem as usize] {
            push_two_square_variants(x, y, |a, b| {
                let mut coords = prefix.clone();
                coords.push(a);
                coords.push(b);
                out.push(LatticePoint::new(coords));
            });
        }
        return;
    }
    let bound = isqrt_u64(rem) as i64;
    for x in -bound..=bound {
        prefix.push(x);
        descend(prefix, rem - (x * x) as u64, depth_left - 1, table, out);
        prefix.pop();
    }
}

/// Enumerates `{x ∈ ℤ^d : |x|² = n}` with the default budget.
pub fn enumerate_sphere(sphere: &SphereSpec) -> Result<SpherePointSet> {
    enumerate_sphere_with_budget(sphere, DEFAULT_ENUM_BUDGET)
}

/// Enumerates with an explicit budget on the projected search volume; fails
/// with [`Error::BudgetExceeded`] instead of attempting an oversized sweep.
pub fn enumerate_sphere_with_budget(sphere: &SphereSpec, budget: u64) -> Result<SpherePointSet> {
    let projected = projected_search_volume(sphere);
    if projected > budget {
        return Err(Error::BudgetExceeded {
            what: "sphere enumeration",
            projected,
            budget,
        });
    }
    let n = sphere.n();
    let d = sphere.dim();
    let mut points: Vec<LatticePoint> = if d == 2 {
        let mut out = Vec::new();
        for x in 0..=isqrt_u64(n) {
            let x2 = x * x;
            let rest = n - x2;
            let y = isqrt_u64(rest);
            if y * y == rest && x <= y {
                push_two_square_variants(x as i64, y as i64, |a, b| {
                    out.push(LatticePoint::new(vec![a, b]));
                });
            }
        }
        out
    } else {
        let table = two_square_table(n);
        let bound = isqrt_u64(n) as i64;
        // parallel over the first coordinate; deterministic after the sort
        (-bound..=bound)
            .into_par_iter()
            .map(|x0| {
                let mut local = Vec::new();
                let mut prefix = vec![x0];
                descend(&mut prefix, n - (x0 * x0) as u64, d - 3, &table, &mut local);
                local
            })
            .reduce(Vec::new, |mut acc, mut v| {
                acc.append(&mut v);
                acc
            })
    };
    points.sort();
    points.dedup();
    Ok(SpherePointSet {
        sphere: *sphere,
        points,
    })
}

/// Tri-state membership verdict. `Uncertain` can only arise on the float
/// path, when the test value lands within tolerance of the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    In,
    Out,
    Uncertain,
}

impl Verdict {
    fn negate(self) -> Self {
        match self {
            Verdict::In => Verdict::Out,
            Verdict::Out => Verdict::In,
            Verdict::Uncertain => Verdict::Uncertain,
        }
    }

    fn and(self, other: Self) -> Self {
        match (self, other) {
            (Verdict::Out, _) | (_, Verdict::Out) => Verdict::Out,
            (Verdict::In, Verdict::In) => Verdict::In,
            _ => Verdict::Uncertain,
        }
    }
}

/// Exact predicate `b·x / |b| ≥ c / √n`, decided by sign analysis and
/// squaring: with `t = b·x`, `B = b·b`, the test is
/// `[t ≥ 0 ∧ (c ≤ 0 ∨ t²n ≥ Bc²)] ∨ [t < 0 ∧ c < 0 ∧ t²n ≤ Bc²]`.
pub(crate) fn exact_halfspace_contains(b: &[i64], n: u64, c: &BigRational, x: &[i64]) -> bool {
    let t: i128 = b
        .iter()
        .zip(x)
        .map(|(&bi, &xi)| bi as i128 * xi as i128)
        .sum();
    let bb: i128 = b.iter().map(|&bi| bi as i128 * bi as i128).sum();
    let t_big = BigInt::from(t);
    let lhs = BigRational::from_integer(&t_big * &t_big * BigInt::from(n));
    let rhs = BigRational::from_integer(BigInt::from(bb)) * c * c;
    if t >= 0 {
        !c.is_positive() || lhs >= rhs
    } else {
        c.is_negative() && lhs <= rhs
    }
}

fn float_halfspace_verdict(v: &[f64], n: u64, c: &BigRational, x: &[i64]) -> Verdict {
    let lhs: f64 = v.iter().zip(x).map(|(&vi, &xi)| vi * xi as f64).sum();
    let lambda = c.to_f64().unwrap_or(f64::NAN) / (n as f64).sqrt();
    if (lhs - lambda).abs() <= REAL_MEMBERSHIP_TOLERANCE {
        Verdict::Uncertain
    } else if lhs > lambda {
        Verdict::In
    } else {
        Verdict::Out
    }
}

/// Membership of a sphere point in a cap.
///
/// The point must lie on the cap's sphere. Rational directions are decided
/// exactly; float directions give a tri-state verdict at
/// [`REAL_MEMBERSHIP_TOLERANCE`].
pub fn cap_contains(cap: &Cap, x: &LatticePoint) -> Verdict {
    debug_assert_eq!(
        x.norm_sq(),
        cap.sphere().n(),
        "point not on the cap's sphere"
    );
    let n = cap.sphere().n();
    let c = plane_offset(cap.sphere(), cap.rho()).expect("cap rho validated");
    match cap.direction() {
        Direction::Rational { b } => {
            if exact_halfspace_contains(b, n, &c, &x.coords) {
                Verdict::In
            } else {
                Verdict::Out
            }
        }
        Direction::Real { v, .. } => float_halfspace_verdict(v, n, &c, &x.coords),
    }
}

/// Membership in a segment: inside the outer cap and outside the inner one.
pub fn segment_contains(seg: &Segment, x: &LatticePoint) -> Verdict {
    let outer = cap_contains(&seg.outer_cap(), x);
    let inner = cap_contains(&seg.inner_cap(), x);
    outer.and(inner.negate())
}

/// The halfspace predicate with a rational (not necessarily integer) normal:
/// the same sign-and-squaring decision, all quantities rational.
pub(crate) fn exact_halfspace_contains_rational(
    u: &[BigRational],
    n: u64,
    c: &BigRational,
    x: &[i64],
) -> bool {
    let t: BigRational = u
        .iter()
        .zip(x)
        .map(|(ui, &xi)| ui * BigRational::from_integer(BigInt::from(xi)))
        .sum();
    let uu: BigRational = u.iter().map(|ui| ui * ui).sum();
    let lhs = &t * &t * rat_u64(n);
    let rhs = uu * c * c;
    if !t.is_negative() {
        !c.is_positive() || lhs >= rhs
    } else {
        c.is_negative() && lhs <= rhs
    }
}

/// Exact segment membership through the direction's exact rational vector.
///
/// For `Rational` directions this agrees with the tri-state path. For `Real`
/// directions it decides membership of the direction the floats (and mask)
/// represent exactly, resolving the boundary cases the tolerance path flags
/// as uncertain.
pub fn segment_contains_exact(seg: &Segment, x: &LatticePoint) -> bool {
    let n = seg.sphere().n();
    let u = seg.direction().exact_vector();
    let c1 = plane_offset(seg.sphere(), seg.rho1()).expect("rho1 validated");
    let c2 = plane_offset(seg.sphere(), seg.rho2()).expect("rho2 validated");
    exact_halfspace_contains_rational(&u, n, &c1, &x.coords)
        && !exact_halfspace_contains_rational(&u, n, &c2, &x.coords)
}

/// Result of counting sphere points in a segment: exact, or an interval when
/// any float-path verdict was uncertain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentCount {
    Exact(u64),
    Interval { lo: u64, hi: u64 },
}

impl SegmentCount {
    pub fn lo(&self) -> u64 {
        match *self {
            SegmentCount::Exact(c) => c,
            SegmentCount::Interval { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> u64 {
        match *self {
            SegmentCount::Exact(c) => c,
            SegmentCount::Interval { hi, .. } => hi,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SegmentCount::Exact(_))
    }
}

/// Counts the points of `pts` lying in `seg`.
pub fn count_segment(seg: &Segment, pts: &SpherePointSet) -> SegmentCount {
    assert_eq!(
        seg.sphere(),
        pts.sphere(),
        "point set enumerated for a different sphere"
    );
    let mut certain = 0u64;
    let mut uncertain = 0u64;
    for p in pts.iter() {
        match segment_contains(seg, p) {
            Verdict::In => certain += 1,
            Verdict::Uncertain => uncertain += 1,
            Verdict::Out => {}
        }
    }
    if uncertain == 0 {
        SegmentCount::Exact(certain)
    } else {
        SegmentCount::Interval {
            lo: certain,
            hi: certain + uncertain,
        }
    }
}

/// Per-point verdicts in point-set order.
pub fn segment_verdicts(seg: &Segment, pts: &SpherePointSet) -> Vec<Verdict> {
    assert_eq!(seg.sphere(), pts.sphere());
    pts.iter().map(|p| segment_contains(seg, p)).collect()
}

/// Writes the line-based text format: header `d n count`, then one point per
/// line as space-separated integers.
pub fn write_point_set<W: Write>(set: &SpherePointSet, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "{} {} {}",
        set.sphere().dim(),
        set.sphere().n(),
        set.len()
    )?;
    for p in set.iter() {
        let line: Vec<String> = p.coords.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Parses the text format written by [`write_point_set`].
pub fn read_point_set<R: BufRead>(r: R) -> Result<SpherePointSet> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Invalid("empty point-set file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Invalid("header must be `d n count`".into()));
    }
    let d: usize = fields[0]
        .parse()
        .map_err(|_| Error::Invalid("bad dimension in header".into()))?;
    let n: u64 = fields[1]
        .parse()
        .map_err(|_| Error::Invalid("bad squared radius in header".into()))?;
    let count: usize = fields[2]
        .parse()
        .map_err(|_| Error::Invalid("bad count in header".into()))?;
    let sphere = SphereSpec::new(d, n)?;
    let mut points = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let coords: std::result::Result<Vec<i64>, _> =
            line.split_whitespace().map(str::parse).collect();
        let coords = coords.map_err(|_| Error::Invalid(format!("bad point line: {line}")))?;
        points.push(LatticePoint::new(coords));
    }
    if points.len() != count {
        return Err(Error::Invalid(format!(
            "header count {count} does not match {} points",
            points.len()
        )));
    }
    SpherePointSet::from_points(sphere, points)
}
