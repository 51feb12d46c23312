//! Exact rational interval arithmetic with directed rounding.
//!
//! Every certified inequality in this crate reduces to comparisons between
//! rationals and square roots of rationals. Intervals with [`BigRational`]
//! endpoints make those comparisons sound: square roots are bracketed to a
//! requested number of fractional bits, all other operations are exact, and a
//! [`RatInterval::certainly_le`] verdict is therefore a proof.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits carried by square-root brackets unless a caller asks
/// otherwise.
pub const DEFAULT_SQRT_BITS: u32 = 128;

pub(crate) fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub(crate) fn rat_u64(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Largest integer `k` with `k² ≤ r`. Requires `r ≥ 0`.
pub fn floor_sqrt_ratio(r: &BigRational) -> BigInt {
    assert!(!r.is_negative(), "floor_sqrt_ratio needs r >= 0");
    let one = BigInt::one();
    // floor(√⌊r⌋) is within one of floor(√r); fix up with exact comparisons.
    let mut k = (r.numer() / r.denom()).sqrt();
    while (&k + &one) * (&k + &one) * r.denom() <= *r.numer() {
        k += &one;
    }
    while !k.is_zero() && &k * &k * r.denom() > *r.numer() {
        k -= &one;
    }
    k
}

/// `[lo, hi]` with `lo² ≤ r ≤ hi²` and `hi − lo ≤ 2^-bits`.
///
/// Exact when `r` is the square of a rational.
pub fn sqrt_bounds(r: &BigRational, bits: u32) -> (BigRational, BigRational) {
    assert!(!r.is_negative(), "sqrt_bounds needs r >= 0");
    if r.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    // √(p/q) = √(p·q)/q; bracket the integer square root of the scaled value.
    let scaled: BigInt = (r.numer() * r.denom()) << (2 * bits as usize);
    let s = scaled.sqrt();
    let den: BigInt = r.denom().clone() << (bits as usize);
    let lo = BigRational::new(s.clone(), den.clone());
    if &s * &s == scaled {
        return (lo.clone(), lo);
    }
    let hi = BigRational::new(s + BigInt::one(), den);
    (lo, hi)
}

/// `⌊r⌋` as an integer (toward negative infinity).
pub fn floor_ratio(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// `⌈r⌉` as an integer (toward positive infinity).
pub fn ceil_ratio(r: &BigRational) -> BigInt {
    r.numer().div_ceil(r.denom())
}

/// Smallest multiple of `2^-bits` that is ≥ `r`.
pub fn round_up_dyadic(r: &BigRational, bits: u32) -> BigRational {
    let den: BigInt = BigInt::one() << (bits as usize);
    let scaled = r * BigRational::from_integer(den.clone());
    BigRational::new(ceil_ratio(&scaled), den)
}

/// Largest multiple of `2^-bits` that is ≤ `r`.
pub fn round_down_dyadic(r: &BigRational, bits: u32) -> BigRational {
    let den: BigInt = BigInt::one() << (bits as usize);
    let scaled = r * BigRational::from_integer(den.clone());
    BigRational::new(floor_ratio(&scaled), den)
}

/// Exact `⌊c·√m⌋` for rational `c` and rational `m ≥ 0`.
pub fn floor_scaled_sqrt(c: &BigRational, m: &BigRational) -> BigInt {
    assert!(!m.is_negative());
    if c.is_zero() || m.is_zero() {
        return BigInt::zero();
    }
    let sq = c * c * m;
    let f = floor_sqrt_ratio(&sq);
    if c.is_positive() {
        f
    } else {
        // floor(−y) = −ceil(y); y is an integer exactly when y² = ⌊y⌋².
        let exact = BigRational::from_integer(&f * &f) == sq;
        if exact {
            -f
        } else {
            -(f + BigInt::one())
        }
    }
}

/// Exact `⌈c·√m⌉` for rational `c` and rational `m ≥ 0`.
pub fn ceil_scaled_sqrt(c: &BigRational, m: &BigRational) -> BigInt {
    assert!(!m.is_negative());
    if c.is_zero() || m.is_zero() {
        return BigInt::zero();
    }
    let sq = c * c * m;
    let f = floor_sqrt_ratio(&sq);
    if c.is_positive() {
        let exact = BigRational::from_integer(&f * &f) == sq;
        if exact {
            f
        } else {
            f + BigInt::one()
        }
    } else {
        -f
    }
}

/// A closed interval with exact rational endpoints, `lo ≤ hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        Self {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    /// Exact value of a finite float (every finite `f64` is rational).
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self::point)
    }

    pub fn from_int(v: i64) -> Self {
        Self::point(rat_int(v))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let products = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Self::new(lo, hi)
    }

    pub fn mul_rat(&self, r: &BigRational) -> Self {
        if r.is_negative() {
            Self::new(&self.hi * r, &self.lo * r)
        } else {
            Self::new(&self.lo * r, &self.hi * r)
        }
    }

    /// Division; `o` must not contain zero.
    pub fn div(&self, o: &Self) -> Self {
        assert!(
            o.lo.is_positive() || o.hi.is_negative(),
            "interval division by an interval containing zero"
        );
        let recip = Self::new(self::recip(&o.hi), self::recip(&o.lo));
        self.mul(&recip)
    }

    /// Square root bracket; requires `lo ≥ 0`.
    pub fn sqrt(&self, bits: u32) -> Self {
        assert!(!self.lo.is_negative(), "sqrt of an interval below zero");
        let (lo, _) = sqrt_bounds(&self.lo, bits);
        let (_, hi) = sqrt_bounds(&self.hi, bits);
        Self::new(lo, hi)
    }

    /// True only when `self ≤ o` holds for every pair of represented values.
    pub fn certainly_le(&self, o: &Self) -> bool {
        self.hi <= o.lo
    }

    pub fn certainly_lt(&self, o: &Self) -> bool {
        self.hi < o.lo
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn to_f64(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / rat_int(2);
        mid.to_f64().unwrap_or(f64::NAN)
    }
}

fn recip(r: &BigRational) -> BigRational {
    BigRational::new(r.denom().clone(), r.numer().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn floor_sqrt_ratio_exact_and_inexact() {
        assert_eq!(floor_sqrt_ratio(&rat(49, 1)), BigInt::from(7));
        assert_eq!(floor_sqrt_ratio(&rat(50, 1)), BigInt::from(7));
        assert_eq!(floor_sqrt_ratio(&rat(1, 2)), BigInt::from(0));
        assert_eq!(floor_sqrt_ratio(&rat(9, 4)), BigInt::from(1));
        assert_eq!(floor_sqrt_ratio(&rat(0, 1)), BigInt::from(0));
    }

    #[test]
    fn sqrt_bounds_bracket_and_width() {
        let (lo, hi) = sqrt_bounds(&rat(2, 1), 64);
        assert!(&lo * &lo <= rat(2, 1));
        assert!(&hi * &hi >= rat(2, 1));
        assert!(&hi - &lo <= rat(1, 1) / BigRational::from_integer(BigInt::one() << 64));
    }

    #[test]
    fn sqrt_bounds_detects_perfect_squares() {
        let (lo, hi) = sqrt_bounds(&rat(4, 9), 32);
        assert_eq!(lo, rat(2, 3));
        assert_eq!(hi, rat(2, 3));
    }

    #[test]
    fn scaled_sqrt_floor_ceil_signs() {
        // 3·√2 = 4.24…, −3·√2 = −4.24…
        assert_eq!(floor_scaled_sqrt(&rat(3, 1), &rat(2, 1)), BigInt::from(4));
        assert_eq!(ceil_scaled_sqrt(&rat(3, 1), &rat(2, 1)), BigInt::from(5));
        assert_eq!(floor_scaled_sqrt(&rat(-3, 1), &rat(2, 1)), BigInt::from(-5));
        assert_eq!(ceil_scaled_sqrt(&rat(-3, 1), &rat(2, 1)), BigInt::from(-4));
        // exact case: 3·√4 = 6
        assert_eq!(floor_scaled_sqrt(&rat(3, 1), &rat(4, 1)), BigInt::from(6));
        assert_eq!(ceil_scaled_sqrt(&rat(3, 1), &rat(4, 1)), BigInt::from(6));
        assert_eq!(ceil_scaled_sqrt(&rat(-3, 1), &rat(4, 1)), BigInt::from(-6));
    }

    #[test]
    fn dyadic_rounding_directions() {
        let r = rat(1, 3);
        let up = round_up_dyadic(&r, 8);
        let down = round_down_dyadic(&r, 8);
        assert!(down <= r && r <= up);
        assert!(&up - &down <= rat(1, 256));
    }

    #[test]
    fn interval_mul_sign_cases() {
        let a = RatInterval::new(rat(-2, 1), rat(3, 1));
        let b = RatInterval::new(rat(-5, 1), rat(-1, 1));
        let p = a.mul(&b);
        assert_eq!(p.lo(), &rat(-15, 1));
        assert_eq!(p.hi(), &rat(10, 1));
    }

    #[test]
    fn interval_div_and_compare() {
        let a = RatInterval::new(rat(1, 1), rat(2, 1));
        let b = RatInterval::new(rat(4, 1), rat(5, 1));
        let q = a.div(&b);
        assert_eq!(q.lo(), &rat(1, 5));
        assert_eq!(q.hi(), &rat(1, 2));
        assert!(q.certainly_le(&RatInterval::point(rat(1, 2))));
        assert!(!q.certainly_le(&RatInterval::point(rat(1, 3))));
    }
}
