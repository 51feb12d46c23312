//! Simultaneous rational approximation of directions by integer vectors.
//!
//! The search is the classical one: for targets `ξ_1..ξ_m` and a quality
//! parameter `H`, some `q ≤ H^m` satisfies `|ξ_i − p_i/q| ≤ 1/(qH)` with
//! `p_i = round(q·ξ_i)`; we return the smallest such `q`. On top of that sit
//! the two direction-approximation constructions: the generic one (divide by
//! the largest coordinate) and the rational-quotients one (declared rational
//! coordinates are hit exactly, only the rest are approximated). Every bound
//! they return is re-verified with exact interval arithmetic before the value
//! leaves the constructor.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{mask_scale, Direction};
use crate::interval::{rat_int, rat_u64, round_up_dyadic, sqrt_bounds, RatInterval};

/// Cap on the `q` range an exact-arithmetic search may walk.
pub const DIRICHLET_SEARCH_BUDGET: u64 = 200_000_000;

const EXACT_SEARCH_BUDGET: u64 = 4_000_000;

/// Fixed-point scale of the fast prefilter.
const FP_SHIFT: u32 = 64;

pub(crate) fn rats_from_ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&c| rat_int(c)).collect()
}

pub(crate) fn dot_rat(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq_rat(a: &[BigRational]) -> BigRational {
    a.iter().map(|x| x * x).sum()
}

/// Exact test that `a` and `b` span the same ray from the origin.
pub(crate) fn parallel_same_direction(a: &[BigRational], b: &[BigRational]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if &a[i] * &b[j] != &a[j] * &b[i] {
                return false;
            }
        }
    }
    dot_rat(a, b).is_positive() || (a.iter().all(Zero::is_zero) && b.iter().all(Zero::is_zero))
}

/// Interval bracketing `|α/|α| − β/|β||` for nonzero rational vectors.
pub(crate) fn unit_chord_interval(alpha: &[BigRational], beta: &[BigRational]) -> RatInterval {
    if parallel_same_direction(alpha, beta) {
        return RatInterval::zero();
    }
    let s = dot_rat(alpha, beta);
    let p = norm_sq_rat(alpha) * norm_sq_rat(beta);
    let (pl, ph) = sqrt_bounds(&p, 160);
    let norms = RatInterval::new(pl, ph);
    // chord² = 2 − 2·s/(|α||β|)
    let ratio = RatInterval::point(s).div(&norms);
    let chord_sq = RatInterval::point(rat_int(2)).sub(&ratio.mul_rat(&rat_int(2)));
    let lo = if chord_sq.lo().is_negative() {
        BigRational::zero()
    } else {
        chord_sq.lo().clone()
    };
    let hi = if chord_sq.hi().is_negative() {
        BigRational::zero()
    } else {
        chord_sq.hi().clone()
    };
    RatInterval::new(lo, hi).sqrt(160)
}

/// Certified rational upper bound on the chord `|α/|α| − β/|β||`, clamped to
/// the trivial bound 2 and rounded up to a dyadic of moderate size.
pub fn unit_chord_upper_bound(alpha: &[BigRational], beta: &[BigRational]) -> BigRational {
    let hi = unit_chord_interval(alpha, beta).hi().clone();
    if hi.is_zero() {
        return hi;
    }
    let rounded = round_up_dyadic(&hi, 60);
    rounded.min(rat_int(2))
}

/// Result of a simultaneous-approximation search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletResult {
    /// Common denominator, `1 ≤ q ≤ H^m`, smallest qualifying.
    pub q: u64,
    /// Numerators, `p_i = round(q·ξ_i)`, ties rounded away from zero.
    pub p: Vec<BigInt>,
    /// Quality parameter used by the search.
    pub h: u64,
}

fn round_half_away(r: &BigRational) -> BigInt {
    r.round().to_integer()
}

/// Exact check of the certificate `max_i |ξ_i − p_i/q| ≤ 1/(qH)` plus the
/// range `1 ≤ q ≤ H^m`; independent of the search path.
pub fn verify_dirichlet(targets: &[RatInterval], res: &DirichletResult) -> bool {
    if res.q < 1 {
        return false;
    }
    match res.h.checked_pow(targets.len() as u32) {
        Some(qmax) if res.q <= qmax => {}
        _ => return false,
    }
    let q = rat_u64(res.q);
    let thr = RatInterval::point(BigRational::new(
        BigInt::one(),
        BigInt::from(res.q) * BigInt::from(res.h),
    ));
    targets.iter().zip(&res.p).all(|(xi, p)| {
        let approx = RatInterval::point(BigRational::new(p.clone(), BigInt::from(res.q)));
        let diff = xi.sub(&approx);
        let abs_hi = diff.hi().abs().max(diff.lo().abs());
        RatInterval::point(abs_hi).certainly_le(&thr) && {
            let _ = &q;
            true
        }
    })
}

enum QVerdict {
    Pass(Vec<BigInt>),
    Fail,
}

fn exact_q_check(targets: &[RatInterval], q: u64, h: u64) -> Result<QVerdict> {
    let q_rat = rat_u64(q);
    let thr = BigRational::new(BigInt::one(), BigInt::from(q) * BigInt::from(h));
    let mut ps = Vec::with_capacity(targets.len());
    for xi in targets {
        let scaled_lo = xi.lo() * &q_rat;
        let scaled_hi = xi.hi() * &q_rat;
        let p_lo = round_half_away(&scaled_lo);
        let p_hi = round_half_away(&scaled_hi);
        if p_lo != p_hi {
            return Err(Error::Precision);
        }
        let p = p_lo;
        let p_over_q = BigRational::new(p.clone(), BigInt::from(q));
        let d_lo = xi.lo() - &p_over_q;
        let d_hi = xi.hi() - &p_over_q;
        let abs_hi = d_lo.abs().max(d_hi.abs());
        let abs_lo = if d_lo.is_negative() && d_hi.is_positive() {
            BigRational::zero()
        } else {
            d_lo.abs().min(d_hi.abs())
        };
        if abs_hi <= thr {
            ps.push(p);
        } else if abs_lo > thr {
            return Ok(QVerdict::Fail);
        } else {
            return Err(Error::Precision);
        }
    }
    Ok(QVerdict::Pass(ps))
}

/// Fixed-point images `⌊ξ·2^64⌋` when every target is a point with
/// `|ξ| ≤ 2^24`.
fn fixed_point_targets(targets: &[RatInterval]) -> Option<Vec<i128>> {
    let cap = rat_int(1 << 24);
    let mut out = Vec::with_capacity(targets.len());
    for xi in targets {
        if !xi.is_point() || xi.lo().abs() > cap {
            return None;
        }
        let scaled = (xi.lo().numer() << FP_SHIFT) / xi.lo().denom();
        out.push(scaled.to_i128()?);
    }
    Some(out)
}

/// Smallest `q ≤ H^m` whose nearest-integer numerators satisfy the
/// certificate; existence inside the range is a theorem, so exhaustion only
/// signals an internal fault.
///
/// Targets wider than the decision margin raise [`Error::Precision`]; the
/// caller supplies tighter inputs. Point targets always decide.
pub fn dirichlet_approx(targets: &[RatInterval], h: u64) -> Result<DirichletResult> {
    if targets.is_empty() {
        return Err(Error::Invalid("need at least one target".into()));
    }
    if h < 1 {
        return Err(Error::OutOfRange {
            what: "quality parameter H",
            details: "need H >= 1".into(),
        });
    }
    let qmax = h.checked_pow(targets.len() as u32).unwrap_or(u64::MAX);
    let fixed = fixed_point_targets(targets);
    let budget = if fixed.is_some() {
        DIRICHLET_SEARCH_BUDGET
    } else {
        EXACT_SEARCH_BUDGET
    };
    if qmax > budget {
        return Err(Error::BudgetExceeded {
            what: "Dirichlet q search",
            projected: qmax,
            budget,
        });
    }
    let scale: i128 = 1i128 << FP_SHIFT;
    for q in 1..=qmax {
        if let Some(xs) = &fixed {
            // prefilter on |qξ − p| ≤ 1/H in scaled units: skip q when some
            // distance certainly exceeds the threshold (the fixed-point image
            // of qξ is within q+1 of the true value)
            let thr = scale / h as i128 + q as i128 + 1;
            let near = xs.iter().all(|&x| {
                let frac = (x * q as i128).rem_euclid(scale);
                frac.min(scale - frac) <= thr
            });
            if !near {
                continue;
            }
        }
        match exact_q_check(targets, q, h)? {
            QVerdict::Pass(p) => {
                let res = DirichletResult { q, p, h };
                debug_assert!(verify_dirichlet(targets, &res));
                return Ok(res);
            }
            QVerdict::Fail => {}
        }
    }
    Err(Error::Certification(
        "no admissible q in the guaranteed range".into(),
    ))
}

/// Outcome of the certified normalized-difference inequality
/// `|α/|α| − β/|β|| ≤ 2|α−β|/|α|`.
#[derive(Clone, Debug)]
pub struct NormalizedDiffCheck {
    pub lhs: RatInterval,
    pub rhs: RatInterval,
    /// True only when the inequality provably holds.
    pub holds: bool,
}

pub fn normalized_difference_bound(
    alpha: &[BigRational],
    beta: &[BigRational],
) -> Result<NormalizedDiffCheck> {
    if alpha.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: beta.len(),
        });
    }
    if alpha.iter().all(Zero::is_zero) || beta.iter().all(Zero::is_zero) {
        return Err(Error::ZeroVector);
    }
    let lhs = unit_chord_interval(alpha, beta);
    let diff: Vec<BigRational> = alpha.iter().zip(beta).map(|(a, b)| a - b).collect();
    let diff_norm_sq = norm_sq_rat(&diff);
    let (dl, dh) = sqrt_bounds(&diff_norm_sq, 160);
    let (al, ah) = sqrt_bounds(&norm_sq_rat(alpha), 160);
    let rhs = RatInterval::new(dl, dh)
        .mul_rat(&rat_int(2))
        .div(&RatInterval::new(al, ah));
    let holds = lhs.certainly_le(&rhs) || (lhs.hi().is_zero() && !rhs.lo().is_negative());
    Ok(NormalizedDiffCheck { lhs, rhs, holds })
}

/// Extra data carried by the rational-quotients construction.
#[derive(Clone, Debug)]
pub struct RationalQuotientsInfo {
    /// Number of rational quotients (mask size − 1).
    pub s: usize,
    /// Product of the reduced denominators of the declared fractions.
    pub modulus: BigInt,
    /// Certified bracket of `|k|`, the scale making the declared coordinates
    /// exact.
    pub k_abs_lo: BigRational,
    pub k_abs_hi: BigRational,
}

/// An integer vector approximating a direction, with certified bounds.
#[derive(Clone, Debug)]
pub struct DirectionApproximation {
    pub a: Vec<i64>,
    /// Denominator the search produced (`a` carries it at the pivot
    /// coordinate in the generic construction).
    pub q: u64,
    pub h: u64,
    /// Exponent `e` in the certified form `|a| ≤ C1·H^e`.
    pub exponent: u32,
    /// `C1`, a rational upper bound on the construction's norm constant.
    pub norm_constant: BigRational,
    /// `C1·H^e`, verified to dominate `|a|`.
    pub norm_bound: BigRational,
    /// `C2` in the certified angle form `C2/(|a|·H)`.
    pub angle_constant: BigRational,
    /// `C2/(|a|·H)` evaluated outward: a certified upper bound on
    /// `|β − a/|a||`.
    pub angle_bound: BigRational,
    /// Direct certified upper bound on `|β − a/|a||` (tighter than
    /// `angle_bound`; zero exactly when `a` is parallel to the direction).
    pub chord_upper: BigRational,
    pub rq: Option<RationalQuotientsInfo>,
}

fn bigints_to_i64(v: Vec<BigInt>) -> Result<Vec<i64>> {
    v.into_iter()
        .map(|c| c.to_i64().ok_or(Error::Overflow("approximation vector")))
        .collect()
}

/// Generic direction approximation: divide by the largest coordinate, run the
/// simultaneous search on the `d−1` quotients, and certify
/// `|a| ≤ √(4d−3)·H^(d−1)` and `|β − a/|a|| ≤ 2√((d−1)(4d−3))/(|a|H)`.
pub fn approx_direction(dir: &Direction, h: u64) -> Result<DirectionApproximation> {
    let d = dir.dim();
    let u = dir.exact_vector();
    // pivot: largest |u_i|, lowest index on ties
    let mut j = 0;
    for i in 1..d {
        if u[i].abs() > u[j].abs() {
            j = i;
        }
    }
    if u[j].is_zero() {
        return Err(Error::ZeroVector);
    }
    let targets: Vec<RatInterval> = (0..d)
        .filter(|&i| i != j)
        .map(|i| RatInterval::point(&u[i] / &u[j]))
        .collect();
    let res = dirichlet_approx(&targets, h)?;
    let mut a_big = vec![BigInt::zero(); d];
    a_big[j] = BigInt::from(res.q);
    for (slot, p) in (0..d).filter(|&i| i != j).zip(&res.p) {
        a_big[slot] = p.clone();
    }
    if u[j].is_negative() {
        for c in &mut a_big {
            *c = -&*c;
        }
    }
    let norm_sq: BigInt = a_big.iter().map(|c| c * c).sum();
    let q_big = BigInt::from(res.q);
    let factor = BigInt::from(4 * d as i64 - 3);
    if norm_sq > &factor * &q_big * &q_big {
        return Err(Error::Certification(format!(
            "|a|² = {norm_sq} exceeds (4d−3)q²"
        )));
    }
    let a = bigints_to_i64(a_big)?;

    let e = (d - 1) as u32;
    let h_pow = BigRational::from_integer(BigInt::from(h).pow(e));
    let factor_rat = BigRational::from_integer(factor);
    let norm_constant = sqrt_bounds(&factor_rat, 80).1;
    let norm_bound = &norm_constant * &h_pow;
    if BigRational::from_integer(norm_sq.clone()) > &norm_bound * &norm_bound {
        return Err(Error::Certification("norm bound C1·H^e failed".into()));
    }

    let u_rats = u;
    let a_rats = rats_from_ints(&a);
    let chord_upper = unit_chord_upper_bound(&u_rats, &a_rats);
    let angle_factor = rat_int((d as i64 - 1) * (4 * d as i64 - 3));
    let (af_lo, af_hi) = sqrt_bounds(&angle_factor, 80);
    let (an_lo, an_hi) = sqrt_bounds(&BigRational::from_integer(norm_sq), 160);
    let h_rat = rat_u64(h);
    // sound side: chord ≤ 2·√((d−1)(4d−3))/(|a|H) checked against the lower
    // evaluation of the right-hand side
    let rhs_lo = rat_int(2) * af_lo / (&an_hi * &h_rat);
    if chord_upper > rhs_lo {
        return Err(Error::Certification("angle bound failed".into()));
    }
    let angle_constant = rat_int(2) * af_hi;
    let angle_bound = &angle_constant / (&an_lo * &h_rat);

    Ok(DirectionApproximation {
        a,
        q: res.q,
        h,
        exponent: e,
        norm_constant,
        norm_bound,
        angle_constant,
        angle_bound,
        chord_upper,
        rq: None,
    })
}

/// Rational-quotients variant: the masked coordinates of a rescaled direction
/// are exact fractions and enter the vector verbatim; only the remaining
/// `d−1−s` quotients are approximated, so the search range drops to
/// `H^(d−1−s)`. Certifies `|a| ≤ (1+|k|)·d·m·H^(d−1−s)` and
/// `|β − a/|a|| ≤ 2(1+|k|)·d·m·√(d−1−s)/(|k|·|a|·H)`.
pub fn approx_direction_rational_quotients(
    dir: &Direction,
    h: u64,
) -> Result<DirectionApproximation> {
    let d = dir.dim();
    let (v, mask) = match dir {
        Direction::Real { v, mask } => (v, mask),
        Direction::Rational { .. } => {
            return Err(Error::Invalid(
                "direction is already rational: use it directly, no approximation needed".into(),
            ))
        }
    };
    if mask.len() < 2 {
        return Err(Error::OutOfRange {
            what: "rational quotient count",
            details: "mask must declare at least two coordinates (s >= 1)".into(),
        });
    }
    if mask.len() >= d {
        return Err(Error::OutOfRange {
            what: "rational quotient count",
            details: "mask covers every coordinate (s = d−1): use the exact integer direction"
                .into(),
        });
    }
    let s = mask.len() - 1;
    let u = dir.exact_vector();
    let mut sigma = mask_scale(v, mask).unwrap_or_else(BigRational::one);
    let mut fractions: Vec<(usize, BigRational)> =
        mask.iter().map(|(&i, f)| (i, f.clone())).collect();
    if sigma.is_negative() {
        sigma = -sigma;
        for (_, f) in &mut fractions {
            *f = -&*f;
        }
    }

    let unmasked: Vec<usize> = (0..d).filter(|i| !mask.contains_key(i)).collect();
    let targets: Vec<RatInterval> = unmasked
        .iter()
        .map(|&i| RatInterval::point(&sigma * &u[i]))
        .collect();
    let res = dirichlet_approx(&targets, h)?;

    let modulus: BigInt = fractions.iter().map(|(_, f)| f.denom().clone()).product();
    let q_big = BigInt::from(res.q) * &modulus;
    let mut a_big = vec![BigInt::zero(); d];
    for (i, f) in &fractions {
        let scaled = BigRational::from_integer(q_big.clone()) * f;
        debug_assert!(scaled.is_integer());
        a_big[*i] = scaled.to_integer();
    }
    for (slot, p) in unmasked.iter().zip(&res.p) {
        a_big[*slot] = &modulus * p;
    }
    let norm_sq: BigInt = a_big.iter().map(|c| c * c).sum();
    let a = bigints_to_i64(a_big)?;

    // |k| = σ·|u|
    let k_sq = &sigma * &sigma * norm_sq_rat(&u);
    let (k_lo, k_hi) = sqrt_bounds(&k_sq, 128);
    let d_rat = rat_int(d as i64);
    let q_rat = BigRational::from_integer(q_big);
    let cert_norm = (BigRational::one() + &k_lo) * &d_rat * &q_rat;
    if BigRational::from_integer(norm_sq.clone()) > &cert_norm * &cert_norm {
        return Err(Error::Certification("|a| ≤ (1+|k|)dq failed".into()));
    }

    let e = (d - 1 - s) as u32;
    let m_rat = BigRational::from_integer(modulus.clone());
    let h_pow = BigRational::from_integer(BigInt::from(h).pow(e));
    let norm_constant = (BigRational::one() + &k_hi) * &d_rat * &m_rat;
    let norm_bound = &norm_constant * &h_pow;
    if BigRational::from_integer(norm_sq.clone()) > &norm_bound * &norm_bound {
        return Err(Error::Certification("norm bound C1·H^e failed".into()));
    }

    let u_rats = u;
    let a_rats = rats_from_ints(&a);
    let chord_upper = unit_chord_upper_bound(&u_rats, &a_rats);
    let (root_lo, root_hi) = sqrt_bounds(&rat_int(e as i64), 80);
    let (an_lo, an_hi) = sqrt_bounds(&BigRational::from_integer(norm_sq), 160);
    let h_rat = rat_u64(h);
    let rhs_lo = rat_int(2) * &d_rat * &m_rat * root_lo * (BigRational::one() + &k_hi)
        / (&k_hi * &an_hi * &h_rat);
    if chord_upper > rhs_lo {
        return Err(Error::Certification(
            "rational-quotients angle bound failed".into(),
        ));
    }
    let angle_constant =
        rat_int(2) * &d_rat * &m_rat * root_hi * (BigRational::one() + &k_lo) / &k_lo;
    let angle_bound = &angle_constant / (&an_lo * &h_rat);

    Ok(DirectionApproximation {
        a,
        q: res
            .q
            .checked_mul(modulus.to_u64().ok_or(Error::Overflow("modulus"))?)
            .ok_or(Error::Overflow("q·m"))?,
        h,
        exponent: e,
        norm_constant,
        norm_bound,
        angle_constant,
        angle_bound,
        chord_upper,
        rq: Some(RationalQuotientsInfo {
            s,
            modulus,
            k_abs_lo: k_lo,
            k_abs_hi: k_hi,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn points(vals: &[f64]) -> Vec<RatInterval> {
        vals.iter()
            .map(|&v| RatInterval::from_f64(v).unwrap())
            .collect()
    }

    #[test]
    fn dirichlet_exact_half() {
        let targets = vec![RatInterval::point(rat(1, 2))];
        let res = dirichlet_approx(&targets, 10).unwrap();
        assert_eq!(res.q, 2);
        assert_eq!(res.p, vec![BigInt::one()]);
        assert!(verify_dirichlet(&targets, &res));
    }

    #[test]
    fn dirichlet_golden_ratio() {
        let targets = points(&[1.618_033_988_749_894_9]);
        let res = dirichlet_approx(&targets, 3).unwrap();
        assert_eq!(res.q, 2);
        assert_eq!(res.p, vec![BigInt::from(3)]);
    }

    #[test]
    fn dirichlet_zeros() {
        let targets = vec![RatInterval::zero(); 3];
        let res = dirichlet_approx(&targets, 7).unwrap();
        assert_eq!(res.q, 1);
        assert!(res.p.iter().all(Zero::is_zero));
    }

    #[test]
    fn dirichlet_rejects_wide_intervals() {
        // an interval straddling a rounding boundary cannot be certified
        let targets = vec![RatInterval::new(rat(49, 100), rat(51, 100))];
        assert!(matches!(
            dirichlet_approx(&targets, 4),
            Err(Error::Precision)
        ));
    }

    #[test]
    fn dirichlet_budget() {
        let targets = points(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        assert!(matches!(
            dirichlet_approx(&targets, 64),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn normalized_difference_examples() {
        // equal vectors: equality at zero
        let a = vec![rat(2, 1), rat(3, 1)];
        let c = normalized_difference_bound(&a, &a).unwrap();
        assert!(c.holds);
        assert!(c.lhs.hi().is_zero());

        // orthogonal unit vectors: √2 ≤ 2√2
        let e1 = vec![rat(1, 1), rat(0, 1)];
        let e2 = vec![rat(0, 1), rat(1, 1)];
        let c = normalized_difference_bound(&e1, &e2).unwrap();
        assert!(c.holds);
        let two = rat(2, 1);
        assert!(c.lhs.hi() * c.lhs.hi() <= &two + rat(1, 1000));
        assert!(c.rhs.lo() * c.rhs.lo() >= rat(8, 1) - rat(1, 100));

        // parallel vectors: 0 ≤ 2
        let b = vec![rat(6, 1), rat(8, 1)];
        let a34 = vec![rat(3, 1), rat(4, 1)];
        let c = normalized_difference_bound(&a34, &b).unwrap();
        assert!(c.holds);
        assert!(c.lhs.hi().is_zero());
        assert_eq!(c.rhs.lo(), &rat(2, 1));

        assert!(normalized_difference_bound(&[rat(0, 1), rat(0, 1)], &e1).is_err());
    }

    #[test]
    fn approx_axis_direction() {
        let dir = Direction::real(vec![1.0, 0.0, 0.0]).unwrap();
        let ap = approx_direction(&dir, 8).unwrap();
        assert_eq!(ap.a, vec![1, 0, 0]);
        assert_eq!(ap.q, 1);
        assert!(ap.chord_upper.is_zero());
    }

    #[test]
    fn approx_diagonal_hits_exactly() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let dir = Direction::real(vec![c, c]).unwrap();
        let ap = approx_direction(&dir, 5).unwrap();
        assert_eq!(ap.a, vec![1, 1]);
        assert_eq!(ap.q, 1);
        assert!(ap.chord_upper.is_zero());
    }

    #[test]
    fn approx_sqrt2_over_sqrt3() {
        // β = (1, √2)/√3; the search transcript gives q = 3, a = (2, 3)
        let b0 = 1.0 / 3.0f64.sqrt();
        let b1 = 2.0f64.sqrt() / 3.0f64.sqrt();
        let dir = Direction::real_normalized(vec![b0, b1]).unwrap();
        let ap = approx_direction(&dir, 4).unwrap();
        assert_eq!(ap.a, vec![2, 3]);
        assert_eq!(ap.q, 3);
        assert!(!ap.chord_upper.is_zero());
        assert!(ap.chord_upper <= ap.angle_bound);
    }

    #[test]
    fn approx_integer_direction_parallel_zero_angle() {
        // direction exactly proportional to (3,4), declared via the mask
        // (the bare floats 0.6, 0.8 are not exactly in ratio 3:4)
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(3, 5));
        mask.insert(1, rat(4, 5));
        let dir = Direction::real_with_mask(vec![0.6, 0.8], mask).unwrap();
        let ap = approx_direction(&dir, 6).unwrap();
        assert_eq!(ap.a, vec![3, 4]);
        assert!(ap.chord_upper.is_zero());
        assert!(ap.angle_bound.is_positive());

        // without the mask the ratio is off by float rounding: still a = (3,4)
        // but with a tiny positive certified angle
        let bare = Direction::real(vec![0.6, 0.8]).unwrap();
        let ap = approx_direction(&bare, 6).unwrap();
        assert_eq!(ap.a, vec![3, 4]);
        assert!(ap.chord_upper.is_positive());
        assert!(ap.chord_upper < rat(1, 1 << 40));
    }

    #[test]
    fn approx_sign_equivariance() {
        let dir = Direction::real_normalized(vec![0.3, -1.2, 0.7]).unwrap();
        let neg = match &dir {
            Direction::Real { v, .. } => Direction::real(v.iter().map(|c| -c).collect()).unwrap(),
            _ => unreachable!(),
        };
        let ap = approx_direction(&dir, 9).unwrap();
        let an = approx_direction(&neg, 9).unwrap();
        let flipped: Vec<i64> = ap.a.iter().map(|c| -c).collect();
        assert_eq!(an.a, flipped);
        assert_eq!(an.q, ap.q);
    }

    #[test]
    fn rq_construction_d3() {
        // direction ∝ (1, 1, √2)/2, declared fractions (1, 1)
        let v = vec![0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2];
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(1, 1));
        mask.insert(1, rat(1, 1));
        let dir = Direction::real_with_mask(v, mask).unwrap();
        let ap = approx_direction_rational_quotients(&dir, 5).unwrap();
        // smallest q': |√2 − 3/2| ≈ 0.0858 ≤ 1/10
        assert_eq!(ap.a, vec![2, 2, 3]);
        let rq = ap.rq.as_ref().unwrap();
        assert_eq!(rq.s, 1);
        assert_eq!(rq.modulus, BigInt::one());
        assert!(ap.chord_upper <= ap.angle_bound);
    }

    #[test]
    fn rq_construction_d4_with_modulus() {
        // rescaled direction (1/2, 1/3, 1, ~√2): modulus 6, q = 2·6
        let w = vec![0.5, 1.0 / 3.0, 1.0, std::f64::consts::SQRT_2];
        let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        let v: Vec<f64> = w.iter().map(|c| c / norm).collect();
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(1, 2));
        mask.insert(1, rat(1, 3));
        mask.insert(2, rat(1, 1));
        let dir = Direction::real_with_mask(v, mask).unwrap();
        let ap = approx_direction_rational_quotients(&dir, 5).unwrap();
        assert_eq!(ap.a, vec![6, 4, 12, 18]);
        let rq = ap.rq.as_ref().unwrap();
        assert_eq!(rq.s, 2);
        assert_eq!(rq.modulus, BigInt::from(6));
        assert!(ap.exponent == 1);
    }

    #[test]
    fn rq_exact_block_gives_zero_angle() {
        // fractions (1, 1) and the remaining quotient also rational: a ∥ β
        let n = (1.0f64 + 1.0 + 4.0).sqrt();
        let v = vec![1.0 / n, 1.0 / n, 2.0 / n];
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(1, 1));
        mask.insert(1, rat(1, 1));
        let dir = Direction::real_with_mask(v, mask).unwrap();
        let ap = approx_direction_rational_quotients(&dir, 4).unwrap();
        assert!(ap.chord_upper.is_zero());
        assert_eq!(ap.a, vec![1, 1, 2]);
    }

    #[test]
    fn rq_rejects_bad_mask_sizes() {
        let v = vec![0.6, 0.8, 0.0];
        let dir = Direction::real_normalized(vec![0.6, 0.8, 0.0]).unwrap();
        drop(dir);
        let mut small = BTreeMap::new();
        small.insert(0, rat(3, 5));
        let dir = Direction::real_with_mask(v.clone(), small).unwrap();
        assert!(approx_direction_rational_quotients(&dir, 3).is_err());
    }
}
