//! Spheres, directions, caps, and segments.
//!
//! The canonical parameterization is by exact rational *squared* radii: the
//! sphere stores its squared radius `n` (so `R = √n` may be irrational), a cap
//! stores `ρ = r²`, and every derived quantity that must stay exact — base
//! hyperplane offsets, segment heights — is carried as a rational numerator
//! over `√n`. Opening angles are a float convenience layer on top.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::{rat_int, rat_u64};

/// `|v·v − 1| ≤ 2^-39`, the squared form of a `2^-40` unit-norm tolerance.
fn unit_norm_sq_tolerance() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(1u64) << 39)
}

fn mask_value_tolerance() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(1u64) << 40)
}

/// A sphere `{x ∈ ℝ^d : |x|² = n}` with integer squared radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SphereSpec {
    d: usize,
    n: u64,
}

impl SphereSpec {
    pub fn new(d: usize, n: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(Self { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Squared radius.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn radius(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    pub(crate) fn n_rat(&self) -> BigRational {
        rat_u64(self.n)
    }

    /// The largest admissible squared cap radius, `(2R)² = 4n`.
    pub fn rho_max(&self) -> BigRational {
        rat_u64(4 * self.n)
    }
}

/// The direction of a cap or segment: the unit vector from the origin to the
/// cap's apex.
///
/// `Rational` directions are primitive integer vectors and admit exact
/// membership predicates. `Real` directions are float vectors (unit within
/// `2^-40`) together with an optional *rational mask*: a set of coordinates
/// declared exactly rational under a common rescaling of the direction, each
/// with its declared fraction. The mask fractions must be proportional to the
/// float entries within `2^-40`; they pin down the exact rational content that
/// the rational-quotients approximation route consumes.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    Rational {
        b: Vec<i64>,
    },
    Real {
        v: Vec<f64>,
        mask: BTreeMap<usize, BigRational>,
    },
}

impl Direction {
    /// Integer direction; normalized to a primitive vector.
    pub fn rational(b: Vec<i64>) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::DimensionTooSmall(b.len()));
        }
        if b.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let g = b.iter().fold(0i64, |acc, &c| acc.gcd(&c));
        let b = b.into_iter().map(|c| c / g).collect();
        Ok(Self::Rational { b })
    }

    /// Float direction with no declared rational coordinates.
    pub fn real(v: Vec<f64>) -> Result<Self> {
        Self::real_with_mask(v, BTreeMap::new())
    }

    /// Float direction with declared rational content.
    pub fn real_with_mask(v: Vec<f64>, mask: BTreeMap<usize, BigRational>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::DimensionTooSmall(v.len()));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid(
                "direction coordinates must be finite".into(),
            ));
        }
        let dir = Self::Real { v, mask };
        dir.validate_real()?;
        Ok(dir)
    }

    /// Normalizes an arbitrary nonzero float vector first.
    pub fn real_normalized(w: Vec<f64>) -> Result<Self> {
        let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroVector);
        }
        Self::real(w.into_iter().map(|c| c / norm).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Rational { b } => b.len(),
            Self::Real { v, .. } => v.len(),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Self::Rational { .. })
    }

    pub fn mask(&self) -> Option<&BTreeMap<usize, BigRational>> {
        match self {
            Self::Rational { .. } => None,
            Self::Real { mask, .. } => Some(mask),
        }
    }

    /// The exact rational vector this direction stands for, up to positive
    /// scale.
    ///
    /// For `Rational` it is the integer vector itself. For `Real` it is the
    /// float coordinates read exactly, with masked coordinates replaced by the
    /// anchored values derived from the declared fractions (so those
    /// coordinates are exactly proportional to their fractions).
    pub fn exact_vector(&self) -> Vec<BigRational> {
        match self {
            Self::Rational { b } => b.iter().map(|&c| rat_int(c)).collect(),
            Self::Real { v, mask } => {
                let mut u: Vec<BigRational> = v
                    .iter()
                    .map(|&c| BigRational::from_float(c).expect("finite by construction"))
                    .collect();
                if let Some(sigma) = mask_scale(v, mask) {
                    for (&i, f) in mask {
                        u[i] = f / &sigma;
                    }
                } else {
                    // all declared fractions are zero: coordinates exactly 0
                    for &i in mask.keys() {
                        u[i] = BigRational::zero();
                    }
                }
                u
            }
        }
    }

    /// The primitive integer vector proportional to this direction, when one
    /// is exactly known: always for `Rational`, and for `Real` when the mask
    /// covers every coordinate.
    pub fn exact_integer_direction(&self) -> Option<Vec<i64>> {
        match self {
            Self::Rational { b } => Some(b.clone()),
            Self::Real { v, mask } => {
                if mask.len() != v.len() {
                    return None;
                }
                let u = self.exact_vector();
                let mut lcm = BigInt::from(1);
                for c in &u {
                    lcm = lcm.lcm(c.denom());
                }
                let ints: Vec<BigInt> = u
                    .iter()
                    .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
                    .collect();
                let mut g = BigInt::zero();
                for c in &ints {
                    g = g.gcd(c);
                }
                if g.is_zero() {
                    return None;
                }
                ints.iter().map(|c| (c / &g).to_i64()).collect()
            }
        }
    }

    /// Float coordinates of the (approximately) unit direction vector.
    pub fn unit_f64(&self) -> Vec<f64> {
        match self {
            Self::Rational { b } => {
                let norm = b
                    .iter()
                    .map(|&c| (c as f64) * (c as f64))
                    .sum::<f64>()
                    .sqrt();
                b.iter().map(|&c| c as f64 / norm).collect()
            }
            Self::Real { v, .. } => v.clone(),
        }
    }

    /// Exact squared norm of [`Self::exact_vector`].
    pub fn norm_sq_exact(&self) -> BigRational {
        self.exact_vector().iter().map(|c| c * c).sum()
    }

    fn validate_real(&self) -> Result<()> {
        let (v, mask) = match self {
            Self::Real { v, mask } => (v, mask),
            Self::Rational { .. } => return Ok(()),
        };
        let d = v.len();
        for &i in mask.keys() {
            if i >= d {
                return Err(Error::MaskMismatch(format!(
                    "mask index {i} out of range for dimension {d}"
                )));
            }
        }
        let tol = mask_value_tolerance();
        match mask_scale(v, mask) {
            Some(sigma) => {
                for (&i, f) in mask {
                    let vi = BigRational::from_float(v[i]).expect("finite");
                    let diff = (f / &sigma - vi).abs();
                    if diff > tol {
                        return Err(Error::MaskMismatch(format!(
                            "declared fraction at index {i} is not proportional to the float entry"
                        )));
                    }
                }
            }
            None => {
                for (&i, f) in mask {
                    if !f.is_zero() {
                        return Err(Error::MaskMismatch(
                            "anchor coordinate for the mask scale is zero".into(),
                        ));
                    }
                    if v[i].abs() > 9.094947017729282e-13 {
                        // 2^-40
                        return Err(Error::MaskMismatch(format!(
                            "coordinate {i} declared zero but float entry is {}",
                            v[i]
                        )));
                    }
                }
            }
        }
        let norm_sq = self.norm_sq_exact();
        let err = (norm_sq - BigRational::from_integer(BigInt::from(1))).abs();
        if err > unit_norm_sq_tolerance() {
            return Err(Error::NotUnit(format!(
                "|v|² deviates from 1 by about {:.3e}",
                err.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(())
    }
}

/// Scale `σ` with `fraction_i = σ · v_i` at the anchor coordinate, taken from
/// the first masked coordinate with a nonzero fraction. `None` when every
/// declared fraction is zero.
pub(crate) fn mask_scale(v: &[f64], mask: &BTreeMap<usize, BigRational>) -> Option<BigRational> {
    for (&i, f) in mask {
        if !f.is_zero() {
            let vi = BigRational::from_float(v[i])?;
            if vi.is_zero() {
                return None;
            }
            return Some(f / vi);
        }
    }
    None
}

/// A spherical cap: the sphere intersected with a closed ball of squared
/// radius `rho` centered at the apex `R·β`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cap {
    sphere: SphereSpec,
    direction: Direction,
    rho: BigRational,
}

impl Cap {
    pub fn new(sphere: SphereSpec, direction: Direction, rho: BigRational) -> Result<Self> {
        if direction.dim() != sphere.dim() {
            return Err(Error::DimensionMismatch {
                expected: sphere.dim(),
                got: direction.dim(),
            });
        }
        if rho.is_negative() || rho > sphere.rho_max() {
            return Err(Error::OutOfRange {
                what: "squared cap radius",
                details: format!("need 0 <= rho <= 4n = {}", 4 * sphere.n()),
            });
        }
        Ok(Self {
            sphere,
            direction,
            rho,
        })
    }

    pub fn sphere(&self) -> &SphereSpec {
        &self.sphere
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn rho(&self) -> &BigRational {
        &self.rho
    }
}

/// A spherical segment: the outer cap minus the inner cap of the same
/// direction, `rho1 > rho2`.
///
/// Membership is closed on the outer boundary and open on the inner one,
/// because caps are closed balls and the segment is their set difference. A
/// degenerate inner cap `rho2 = 0` is allowed (it removes at most the apex).
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    sphere: SphereSpec,
    direction: Direction,
    rho1: BigRational,
    rho2: BigRational,
}

impl Segment {
    pub fn new(
        sphere: SphereSpec,
        direction: Direction,
        rho1: BigRational,
        rho2: BigRational,
    ) -> Result<Self> {
        if direction.dim() != sphere.dim() {
            return Err(Error::DimensionMismatch {
                expected: sphere.dim(),
                got: direction.dim(),
            });
        }
        if rho2.is_negative() || rho1 <= rho2 || rho1 > sphere.rho_max() {
            return Err(Error::OutOfRange {
                what: "segment squared radii",
                details: format!("need 0 <= rho2 < rho1 <= 4n = {}", 4 * sphere.n()),
            });
        }
        Ok(Self {
            sphere,
            direction,
            rho1,
            rho2,
        })
    }

    pub fn sphere(&self) -> &SphereSpec {
        &self.sphere
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn rho1(&self) -> &BigRational {
        &self.rho1
    }

    pub fn rho2(&self) -> &BigRational {
        &self.rho2
    }

    pub fn outer_cap(&self) -> Cap {
        Cap {
            sphere: self.sphere,
            direction: self.direction.clone(),
            rho: self.rho1.clone(),
        }
    }

    pub fn inner_cap(&self) -> Cap {
        Cap {
            sphere: self.sphere,
            direction: self.direction.clone(),
            rho: self.rho2.clone(),
        }
    }

    /// Opening angle `θ1 − θ2` in radians (float convenience).
    pub fn opening_angle(&self) -> f64 {
        let t1 = angle_from_radius(&self.sphere, &self.rho1).expect("rho1 in range");
        let t2 = angle_from_radius(&self.sphere, &self.rho2).expect("rho2 in range");
        t1 - t2
    }
}

/// Exact height of a segment: value `h = (rho1 − rho2)/(2R)`, carried as the
/// exact rational `h²` plus a float approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentHeight {
    pub squared: BigRational,
    pub approx: f64,
}

/// Squared cap radius for an opening angle: `(2R sin(θ/4))² = 4n·sin²(θ/4)`.
pub fn radius_from_angle(sphere: &SphereSpec, theta: f64) -> Result<f64> {
    if !(0.0..=2.0 * std::f64::consts::PI).contains(&theta) {
        return Err(Error::OutOfRange {
            what: "opening angle",
            details: format!("need 0 <= theta <= 2π, got {theta}"),
        });
    }
    let s = (theta / 4.0).sin();
    Ok(4.0 * sphere.n() as f64 * s * s)
}

/// Opening angle for a squared cap radius; inverse of [`radius_from_angle`].
pub fn angle_from_radius(sphere: &SphereSpec, rho: &BigRational) -> Result<f64> {
    if rho.is_negative() || *rho > sphere.rho_max() {
        return Err(Error::OutOfRange {
            what: "squared cap radius",
            details: format!("need 0 <= rho <= 4n = {}", 4 * sphere.n()),
        });
    }
    // θ = 4·asin(√(rho/4n)), computed as atan2 of the two legs: well
    // conditioned at both endpoints.
    let rho_f = rho.to_f64().unwrap_or(0.0);
    let rest = (sphere.rho_max() - rho).to_f64().unwrap_or(0.0);
    Ok(4.0 * rho_f.sqrt().atan2(rest.sqrt()))
}

/// Height of a segment, `h = (rho1 − rho2)/(2R)`; `h² = (rho1 − rho2)²/(4n)`
/// is exact even when `R` is irrational.
pub fn segment_height(seg: &Segment) -> SegmentHeight {
    let diff = seg.rho1() - seg.rho2();
    let squared = &diff * &diff / rat_u64(4 * seg.sphere().n());
    let approx = squared.to_f64().map(f64::sqrt).unwrap_or(f64::NAN);
    SegmentHeight { squared, approx }
}

/// Squared radius of the base `(d−2)`-sphere of a cap: `rho − rho²/(4n)`.
pub fn base_radius_squared(sphere: &SphereSpec, rho: &BigRational) -> Result<BigRational> {
    if rho.is_negative() || *rho > sphere.rho_max() {
        return Err(Error::OutOfRange {
            what: "squared cap radius",
            details: format!("need 0 <= rho <= 4n = {}", 4 * sphere.n()),
        });
    }
    if sphere.n() == 0 {
        return Ok(BigRational::zero());
    }
    Ok(rho - rho * rho / rat_u64(4 * sphere.n()))
}

/// Scaled offset `c = n − rho/2` of the cap's base hyperplane `β·x = c/√n`.
///
/// Working with `c` keeps every membership predicate rational.
pub fn plane_offset(sphere: &SphereSpec, rho: &BigRational) -> Result<BigRational> {
    if rho.is_negative() || *rho > sphere.rho_max() {
        return Err(Error::OutOfRange {
            what: "squared cap radius",
            details: format!("need 0 <= rho <= 4n = {}", 4 * sphere.n()),
        });
    }
    Ok(sphere.n_rat() - rho / rat_int(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn sphere(d: usize, n: u64) -> SphereSpec {
        SphereSpec::new(d, n).unwrap()
    }

    #[test]
    fn radius_from_angle_endpoints() {
        let s1 = sphere(2, 1);
        assert_eq!(radius_from_angle(&s1, 0.0).unwrap(), 0.0);
        let s4 = sphere(2, 4);
        let r = radius_from_angle(&s4, PI).unwrap();
        assert!((r - 8.0).abs() < 1e-12);
        let s25 = sphere(2, 25);
        let r = radius_from_angle(&s25, 2.0 * PI).unwrap();
        assert!((r - 100.0).abs() < 1e-12);
        assert!(radius_from_angle(&s25, -0.1).is_err());
        assert!(radius_from_angle(&s25, 7.0).is_err());
    }

    #[test]
    fn angle_from_radius_known_values() {
        let s = sphere(2, 1);
        assert_eq!(angle_from_radius(&s, &rat(0, 1)).unwrap(), 0.0);
        let s4 = sphere(2, 4);
        let t = angle_from_radius(&s4, &rat(8, 1)).unwrap();
        assert!((t - PI).abs() < 1e-12);
        // sin(θ/4) = 1/2 forces θ = 2π/3
        let s9 = sphere(2, 9);
        let t = angle_from_radius(&s9, &rat(9, 1)).unwrap();
        assert!((t - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(angle_from_radius(&s9, &rat(37, 1)).is_err());
    }

    #[test]
    fn segment_height_examples() {
        let s = sphere(2, 25);
        let dir = Direction::rational(vec![1, 0]).unwrap();
        let seg = Segment::new(s, dir.clone(), rat(100, 1), rat(0, 1)).unwrap();
        let h = segment_height(&seg);
        assert_eq!(h.squared, rat(100, 1));
        assert!((h.approx - 10.0).abs() < 1e-12);

        let s4 = sphere(2, 4);
        let dir4 = Direction::rational(vec![1, 0]).unwrap();
        let seg = Segment::new(s4, dir4, rat(8, 1), rat(2, 1)).unwrap();
        let h = segment_height(&seg);
        assert_eq!(h.squared, rat(36, 16));
        assert!((h.approx - 1.5).abs() < 1e-12);
    }

    #[test]
    fn base_radius_squared_examples() {
        let s = sphere(2, 4);
        assert_eq!(base_radius_squared(&s, &rat(0, 1)).unwrap(), rat(0, 1));
        assert_eq!(base_radius_squared(&s, &rat(16, 1)).unwrap(), rat(0, 1));
        assert_eq!(base_radius_squared(&s, &rat(8, 1)).unwrap(), rat(4, 1));
    }

    #[test]
    fn plane_offset_examples() {
        let s = sphere(2, 25);
        assert_eq!(plane_offset(&s, &rat(0, 1)).unwrap(), rat(25, 1));
        assert_eq!(plane_offset(&s, &rat(50, 1)).unwrap(), rat(0, 1));
        assert_eq!(plane_offset(&s, &rat(10, 1)).unwrap(), rat(20, 1));
    }

    #[test]
    fn height_agrees_with_offset_difference() {
        // h² from the radii equals (λ1 − λ2)²/n from the plane offsets, exactly.
        let s = sphere(3, 7);
        let dir = Direction::rational(vec![1, 1, 1]).unwrap();
        let seg = Segment::new(s, dir, rat(19, 3), rat(5, 4)).unwrap();
        let h = segment_height(&seg);
        let c1 = plane_offset(&s, seg.rho1()).unwrap();
        let c2 = plane_offset(&s, seg.rho2()).unwrap();
        let diff = &c1 - &c2;
        assert_eq!(h.squared, &diff * &diff / rat(7, 1));
    }

    #[test]
    fn segment_rejects_bad_radii() {
        let s = sphere(2, 25);
        let dir = Direction::rational(vec![1, 0]).unwrap();
        assert!(Segment::new(s, dir.clone(), rat(10, 1), rat(10, 1)).is_err());
        assert!(Segment::new(s, dir.clone(), rat(101, 1), rat(0, 1)).is_err());
        assert!(Segment::new(s, dir, rat(10, 1), rat(-1, 1)).is_err());
    }

    #[test]
    fn direction_rational_normalizes_gcd() {
        let d = Direction::rational(vec![2, 4, -6]).unwrap();
        assert_eq!(d, Direction::Rational { b: vec![1, 2, -3] });
        assert!(Direction::rational(vec![0, 0]).is_err());
    }

    #[test]
    fn direction_real_validation() {
        assert!(Direction::real(vec![0.6, 0.8]).is_ok());
        assert!(Direction::real(vec![0.6, 0.9]).is_err());
        let d = Direction::real_normalized(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.dim(), 3);
    }

    #[test]
    fn direction_mask_accepts_scaled_fractions() {
        // β = (1,1,√2)/2 with the declared fractions of 2β being (1, 1).
        let v = vec![0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2];
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(1, 1));
        mask.insert(1, rat(1, 1));
        let d = Direction::real_with_mask(v, mask).unwrap();
        let u = d.exact_vector();
        assert_eq!(u[0], rat(1, 2));
        assert_eq!(u[1], rat(1, 2));
    }

    #[test]
    fn direction_mask_rejects_inconsistent_fractions() {
        let v = vec![0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2];
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(1, 1));
        mask.insert(1, rat(1, 3));
        assert!(Direction::real_with_mask(v, mask).is_err());
    }

    #[test]
    fn full_mask_yields_integer_direction() {
        let v = vec![0.6, 0.8];
        let mut mask = BTreeMap::new();
        mask.insert(0, rat(3, 1));
        mask.insert(1, rat(4, 1));
        let d = Direction::real_with_mask(v, mask).unwrap();
        assert_eq!(d.exact_integer_direction(), Some(vec![3, 4]));
    }

    proptest! {
        #[test]
        fn angle_radius_round_trip(theta in 1e-6f64..6.22) {
            let s = sphere(3, 17);
            let rho = radius_from_angle(&s, theta).unwrap();
            let rho_rat = BigRational::from_float(rho).unwrap();
            let back = angle_from_radius(&s, &rho_rat).unwrap();
            let rel = ((back - theta) / theta).abs();
            prop_assert!(rel <= 9.1e-13, "rel err {rel}");
        }

        #[test]
        fn radius_from_angle_strictly_increasing(
            t1 in 0.0f64..6.22,
            gap in 1e-6f64..0.05,
        ) {
            let s = sphere(2, 25);
            let t2 = (t1 + gap).min(6.27);
            let r1 = radius_from_angle(&s, t1).unwrap();
            let r2 = radius_from_angle(&s, t2).unwrap();
            prop_assert!(r1 < r2);
        }

        #[test]
        fn base_radius_symmetry_and_max(num in 0i64..10_000) {
            // symmetric under rho ↦ 4n − rho, maximal at rho = 2n with value n
            let s = sphere(4, 25);
            let rho = rat(num, 100);
            let mirrored = s.rho_max() - &rho;
            let k1 = base_radius_squared(&s, &rho).unwrap();
            let k2 = base_radius_squared(&s, &mirrored).unwrap();
            prop_assert_eq!(&k1, &k2);
            prop_assert!(k1 <= rat(25, 1));
            let kmax = base_radius_squared(&s, &rat(50, 1)).unwrap();
            prop_assert_eq!(kmax, rat(25, 1));
        }
    }
}
