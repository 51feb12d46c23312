//! Covering a segment by one of integer direction, and the end-to-end bound
//! pipeline.
//!
//! Given a segment `S` of direction `β` and an integer vector `a`, the
//! covering segment `S′` has direction `a`, outer squared radius enlarged and
//! inner squared radius shrunk by terms in `s̄ ≥ sin(φ/2)` (half the chord
//! between the unit directions), so that `S ⊆ S′` is guaranteed. Both radius
//! formulas are monotone in `sin(φ/2)` in the direction that keeps the
//! containment valid, so replacing the irrational sine by a certified rational
//! upper bound preserves it, and every later count stays exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::diophantine::{
    approx_direction, approx_direction_rational_quotients, rats_from_ints, unit_chord_upper_bound,
    DirectionApproximation,
};
use crate::error::{Error, Result};
use crate::geometry::{angle_from_radius, Segment};
use crate::interval::{rat_int, rat_u64, round_up_dyadic, sqrt_bounds};
use crate::lattice::{
    segment_contains_exact, segment_verdicts, LatticePoint, SegmentCount, SpherePointSet, Verdict,
};
use crate::slicing::{ceil_norm_times_height, floor_norm_times_height, slice, slices_in_slab};

/// A segment of integer direction `a` containing the original segment.
///
/// `inner_empty` marks the case where the shrunken inner radius would be
/// negative: the inner cap is then empty (not a zero-radius point cap, which
/// could wrongly exclude a lattice apex), and `S′` is the whole outer cap.
#[derive(Clone, Debug)]
pub struct CoveringSegment {
    original: Segment,
    a: Vec<i64>,
    sin_half_phi_upper: BigRational,
    rho1_prime: BigRational,
    rho2_prime: BigRational,
    inner_empty: bool,
}

impl CoveringSegment {
    pub fn original(&self) -> &Segment {
        &self.original
    }

    /// Primitive integer direction of the covering.
    pub fn a(&self) -> &[i64] {
        &self.a
    }

    /// Certified rational upper bound on `sin(φ/2)`.
    pub fn sin_half_phi_upper(&self) -> &BigRational {
        &self.sin_half_phi_upper
    }

    pub fn rho1_prime(&self) -> &BigRational {
        &self.rho1_prime
    }

    pub fn rho2_prime(&self) -> &BigRational {
        &self.rho2_prime
    }

    pub fn inner_empty(&self) -> bool {
        self.inner_empty
    }

    /// Exact membership of a sphere point in the covering segment.
    pub fn contains(&self, x: &LatticePoint) -> bool {
        self.membership().contains(x)
    }

    /// Precomputes the exact membership predicate; use this when testing many
    /// points against the same covering.
    pub fn membership(&self) -> CoveringMembership {
        let n = self.original.sphere().n();
        let bb = self.norm_sq_big();
        let c1 = rat_u64(n) - &self.rho1_prime / rat_int(2);
        let outer = HalfspaceTest::new(n, &bb, &c1);
        let inner = if self.inner_empty {
            None
        } else {
            let c2 = rat_u64(n) - &self.rho2_prime / rat_int(2);
            Some(HalfspaceTest::new(n, &bb, &c2))
        };
        CoveringMembership {
            a: self.a.clone(),
            outer,
            inner,
        }
    }

    /// Number of points of `pts` in the covering segment.
    pub fn count(&self, pts: &SpherePointSet) -> u64 {
        assert_eq!(self.original.sphere(), pts.sphere());
        let tester = self.membership();
        pts.iter().filter(|p| tester.contains(p)).count() as u64
    }

    /// Number of integer offsets whose plane meets the covering slab.
    pub fn slices_hit(&self) -> u64 {
        let n = self.original.sphere().n();
        let c1 = rat_u64(n) - &self.rho1_prime / rat_int(2);
        let c2 = rat_u64(n) - &self.rho2_prime / rat_int(2);
        let bb = self.norm_sq_big();
        let inner = if self.inner_empty { None } else { Some(&c2) };
        slices_in_slab(n, &bb, &c1, inner)
    }

    /// Squared height `h′² = (rho1′ − rho2′)²/(4n)`, exact.
    pub fn height_sq(&self) -> BigRational {
        let diff = &self.rho1_prime - &self.rho2_prime;
        &diff * &diff / rat_u64(4 * self.original.sphere().n())
    }

    pub(crate) fn norm_sq_big(&self) -> BigInt {
        self.a
            .iter()
            .map(|&c| BigInt::from(c) * BigInt::from(c))
            .sum()
    }
}

/// One cap test `a·x/|a| ≥ c/√n` with its squared comparison precomputed:
/// per point only the integer dot product and one big-integer comparison
/// remain.
#[derive(Clone, Debug)]
struct HalfspaceTest {
    n: u64,
    c_nonpositive: bool,
    c_negative: bool,
    /// `(b·b)·c²`
    rhs: BigRational,
}

impl HalfspaceTest {
    fn new(n: u64, bb: &BigInt, c: &BigRational) -> Self {
        HalfspaceTest {
            n,
            c_nonpositive: !c.is_positive(),
            c_negative: c.is_negative(),
            rhs: BigRational::from_integer(bb.clone()) * c * c,
        }
    }

    fn contains(&self, t: i128) -> bool {
        if t >= 0 && self.c_nonpositive {
            return true;
        }
        if t < 0 && !self.c_negative {
            return false;
        }
        let t_big = BigInt::from(t);
        let lhs = BigRational::from_integer(&t_big * &t_big * BigInt::from(self.n));
        if t >= 0 {
            lhs >= self.rhs
        } else {
            lhs <= self.rhs
        }
    }
}

/// Reusable exact membership predicate for a covering segment.
#[derive(Clone, Debug)]
pub struct CoveringMembership {
    a: Vec<i64>,
    outer: HalfspaceTest,
    inner: Option<HalfspaceTest>,
}

impl CoveringMembership {
    pub fn contains(&self, x: &LatticePoint) -> bool {
        let t: i128 = self
            .a
            .iter()
            .zip(&x.coords)
            .map(|(&ai, &xi)| ai as i128 * xi as i128)
            .sum();
        self.outer.contains(t) && self.inner.as_ref().is_none_or(|inner| !inner.contains(t))
    }
}

/// Exact covering radii for a given certified bound `s̄ ≥ sin(φ/2)`:
/// the outer squared radius is rounded up, the inner one down (clamped), and
/// the inner cap becomes empty when `rho2 < 4n·s̄²`.
pub(crate) fn covering_radii(
    n: u64,
    rho1: &BigRational,
    rho2: &BigRational,
    sbar: &BigRational,
) -> (BigRational, BigRational, bool) {
    let n_rat = rat_u64(n);
    let four = rat_int(4);
    let sbar_sq_4n = &four * &n_rat * sbar * sbar;

    // rho1′ = rho1 + 4√(n·rho1)·s̄ + 4n·s̄², rounded up via the sqrt upper
    // bound and clamped at the whole-sphere radius 4n. Coarse dyadic
    // rounding (still upward) keeps the denominators small for the many
    // membership tests downstream.
    let root1_up = round_up_dyadic(&sqrt_bounds(&(&n_rat * rho1), 128).1, 60);
    let mut rho1_prime = rho1 + &four * root1_up * sbar + &sbar_sq_4n;
    let rho_max = &four * &n_rat;
    if rho1_prime > rho_max {
        rho1_prime = rho_max;
    }

    // inner cap: empty when even the exact shrunken radius is negative
    if *rho2 < sbar_sq_4n {
        return (rho1_prime, BigRational::zero(), true);
    }
    let root2_up = round_up_dyadic(&sqrt_bounds(&(&n_rat * rho2), 128).1, 60);
    let mut rho2_prime = rho2 + &sbar_sq_4n - &four * root2_up * sbar;
    if rho2_prime.is_negative() {
        rho2_prime = BigRational::zero();
    }
    debug_assert!(rho2_prime <= *rho2);
    (rho1_prime, rho2_prime, false)
}

/// Builds the covering segment of direction `a` (normalized to primitive).
pub fn build_covering(seg: &Segment, a: &[i64]) -> Result<CoveringSegment> {
    if a.len() != seg.sphere().dim() {
        return Err(Error::DimensionMismatch {
            expected: seg.sphere().dim(),
            got: a.len(),
        });
    }
    if a.iter().all(|&c| c == 0) {
        return Err(Error::ZeroVector);
    }
    let g = a.iter().fold(0i64, |acc, &c| num_integer::gcd(acc, c));
    let a: Vec<i64> = a.iter().map(|&c| c / g).collect();

    let u = seg.direction().exact_vector();
    let sbar = unit_chord_upper_bound(&u, &rats_from_ints(&a)) / rat_int(2);
    let (rho1_prime, rho2_prime, inner_empty) =
        covering_radii(seg.sphere().n(), seg.rho1(), seg.rho2(), &sbar);
    Ok(CoveringSegment {
        original: seg.clone(),
        a,
        sin_half_phi_upper: sbar,
        rho1_prime,
        rho2_prime,
        inner_empty,
    })
}

/// Height of a covering segment with the reporting ratio against
/// `R(θ + φ)`.
#[derive(Clone, Debug)]
pub struct CoveringHeight {
    /// `h′ = numerator/√n` with `numerator = (rho1′ − rho2′)/2`, exact.
    pub numerator: BigRational,
    pub n: u64,
    pub approx: f64,
    /// `h′ / (R·(θ + φ_upper))`, for empirical-constant reports only.
    pub ratio_r_theta_phi: f64,
}

/// Exact height pair for the covering plus the float comparison ratio.
pub fn height_bound(cov: &CoveringSegment) -> CoveringHeight {
    let n = cov.original().sphere().n();
    let numerator = (cov.rho1_prime() - cov.rho2_prime()) / rat_int(2);
    let approx = cov.height_sq().to_f64().map(f64::sqrt).unwrap_or(f64::NAN);
    let theta = cov.original().opening_angle();
    let phi = phi_upper_f64(cov.sin_half_phi_upper());
    let denom = (n as f64).sqrt() * (theta + phi);
    let ratio = if denom > 0.0 {
        approx / denom
    } else {
        f64::INFINITY
    };
    CoveringHeight {
        numerator,
        n,
        approx,
        ratio_r_theta_phi: ratio,
    }
}

pub(crate) fn phi_upper_f64(sbar: &BigRational) -> f64 {
    let s = sbar.to_f64().unwrap_or(1.0).min(1.0);
    2.0 * s.asin()
}

/// Which approximation route the pipeline takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxMode {
    Generic,
    RationalQuotients,
}

/// Everything the pipeline measured for one segment instance. The exact
/// chain `count(S) ≤ count(S′) ≤ κ_b·slices_hit ≤ bound_value` is verified
/// with exact arithmetic; `holds_exact_chain` must be true on every run.
#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub d: usize,
    pub n: u64,
    /// Segment opening angle `θ1 − θ2`.
    pub theta: f64,
    /// Inner cap opening angle `θ2`.
    pub theta_inner: f64,
    pub mode: ApproxMode,
    /// Declared rational quotients (`None` in generic mode).
    pub s: Option<usize>,
    pub h_param: u64,
    /// Primitive covering direction.
    pub a: Vec<i64>,
    pub abs_a: f64,
    pub sin_half_phi_upper: BigRational,
    pub phi_upper: f64,
    pub count_s: SegmentCount,
    pub count_sprime: u64,
    pub slices_hit: u64,
    pub kappa_b: u64,
    /// `1 + ⌊|a|·h′⌋`, the exact plane bound the slab count must respect.
    pub planes_bound: u64,
    /// `κ_b · (1 + ⌈|a|·h′⌉)`.
    pub bound_value: u64,
    /// `count(S) / (κ_b·(1 + R·θ^(1/d)))` (or the `1/(d−s)` exponent in
    /// rational-quotients mode); `0` when the sphere is empty.
    pub ratio_thm: f64,
    pub containment_ok: bool,
    pub holds_exact_chain: bool,
    pub rho1_prime: BigRational,
    pub rho2_prime: BigRational,
    pub inner_empty: bool,
    pub approx: Option<DirectionApproximation>,
}

/// Runs the full chain for one segment: pick `H` from the opening angle,
/// approximate the direction (or use it directly when it is exactly
/// rational), build the covering, slice by its normal, and verify the exact
/// counting chain.
pub fn bound_pipeline(
    seg: &Segment,
    pts: &SpherePointSet,
    mode: ApproxMode,
) -> Result<PipelineReport> {
    bound_pipeline_with_h(seg, pts, mode, None)
}

/// [`bound_pipeline`] with an explicit `H` instead of the angle-derived one.
pub fn bound_pipeline_with_h(
    seg: &Segment,
    pts: &SpherePointSet,
    mode: ApproxMode,
    h_override: Option<u64>,
) -> Result<PipelineReport> {
    if seg.sphere() != pts.sphere() {
        return Err(Error::Invalid(
            "point set enumerated for a different sphere".into(),
        ));
    }
    let d = seg.sphere().dim();
    let n = seg.sphere().n();
    let theta_outer = angle_from_radius(seg.sphere(), seg.rho1())?;
    let theta_inner = angle_from_radius(seg.sphere(), seg.rho2())?;
    let theta = (theta_outer - theta_inner).max(1e-12);

    let exact_dir = seg.direction().exact_integer_direction();
    let mask_len = seg.direction().mask().map_or(0, |m| m.len());

    // route selection: an exactly-known integer direction needs no
    // approximation at all; otherwise the mode picks the construction and the
    // exponent in H = ⌈θ^(−1/exp)⌉.
    let (h_param, s_decl, approx) = match mode {
        ApproxMode::RationalQuotients => {
            if exact_dir.is_some() {
                // s = d−1: the rescaled direction is fully rational
                (1u64, Some(d - 1), None)
            } else {
                if mask_len < 2 {
                    return Err(Error::Invalid(
                        "rational-quotients mode needs a mask of size s+1 >= 2".into(),
                    ));
                }
                let s = mask_len - 1;
                let h = match h_override {
                    Some(h) => h.max(1),
                    None => choose_h(theta, (d - s) as f64)?,
                };
                let ap = approx_direction_rational_quotients(seg.direction(), h)?;
                (h, Some(s), Some(ap))
            }
        }
        ApproxMode::Generic => {
            if exact_dir.is_some() {
                (1u64, None, None)
            } else {
                let h = match h_override {
                    Some(h) => h.max(1),
                    None => choose_h(theta, d as f64)?,
                };
                let ap = approx_direction(seg.direction(), h)?;
                (h, None, Some(ap))
            }
        }
    };
    let a_input: Vec<i64> = match (&approx, &exact_dir) {
        (Some(ap), _) => ap.a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => unreachable!("route selection always yields a direction"),
    };

    let cov = build_covering(seg, &a_input)?;
    let hist = slice(pts, cov.a())?;
    let kappa_b = hist.max_bucket();

    // tolerance verdicts first; boundary hits are resolved exactly through
    // the direction's rational vector, so the count and the containment check
    // both act on true membership
    let verdicts = segment_verdicts(seg, pts);
    let tester = cov.membership();
    let mut count_in = 0u64;
    let mut containment_ok = true;
    let mut count_sprime = 0u64;
    for (p, v) in pts.iter().zip(&verdicts) {
        let in_cov = tester.contains(p);
        if in_cov {
            count_sprime += 1;
        }
        let in_seg = match v {
            Verdict::In => true,
            Verdict::Out => false,
            Verdict::Uncertain => segment_contains_exact(seg, p),
        };
        if in_seg {
            count_in += 1;
            if !in_cov {
                containment_ok = false;
            }
        }
    }
    let count_s = SegmentCount::Exact(count_in);

    let slices_hit = cov.slices_hit();
    let bb = cov.norm_sq_big();
    let h_sq = cov.height_sq();
    let planes_bound = 1 + floor_norm_times_height(&bb, &h_sq)
        .to_u64()
        .ok_or(Error::Overflow("planes bound"))?;
    let ceil_ah = ceil_norm_times_height(&bb, &h_sq)
        .to_u64()
        .ok_or(Error::Overflow("|a|h'"))?;
    let bound_value = kappa_b
        .checked_mul(1 + ceil_ah)
        .ok_or(Error::Overflow("bound value"))?;

    let kappa_times_slices = kappa_b
        .checked_mul(slices_hit)
        .ok_or(Error::Overflow("kappa·slices"))?;
    let holds_exact_chain = containment_ok
        && count_s.hi() <= count_sprime
        && count_sprime <= kappa_times_slices
        && slices_hit <= planes_bound
        && kappa_times_slices <= bound_value;

    let exponent = match mode {
        ApproxMode::Generic => d as f64,
        ApproxMode::RationalQuotients => (d - s_decl.unwrap_or(0)) as f64,
    };
    let denom = kappa_b as f64 * (1.0 + (n as f64).sqrt() * theta.powf(1.0 / exponent));
    let ratio_thm = if kappa_b == 0 {
        0.0
    } else {
        count_s.hi() as f64 / denom
    };

    let abs_a = (cov.a().iter().map(|&c| c as f64 * c as f64).sum::<f64>()).sqrt();

    Ok(PipelineReport {
        d,
        n,
        theta,
        theta_inner,
        mode,
        s: s_decl,
        h_param,
        a: cov.a().to_vec(),
        abs_a,
        sin_half_phi_upper: cov.sin_half_phi_upper().clone(),
        phi_upper: phi_upper_f64(cov.sin_half_phi_upper()),
        count_s,
        count_sprime,
        slices_hit,
        kappa_b,
        planes_bound,
        bound_value,
        ratio_thm,
        containment_ok,
        holds_exact_chain,
        rho1_prime: cov.rho1_prime().clone(),
        rho2_prime: cov.rho2_prime().clone(),
        inner_empty: cov.inner_empty(),
        approx,
    })
}

fn choose_h(theta: f64, exponent: f64) -> Result<u64> {
    let raw = theta.powf(-1.0 / exponent);
    if !raw.is_finite() {
        return Err(Error::OutOfRange {
            what: "H parameter",
            details: format!("theta = {theta} gives a non-finite H"),
        });
    }
    Ok((raw.ceil() as u64).max(1))
}
