//! Truncated power series (jets) in the boundary-distance variable, the
//! radial action of the operator algebra on them, the catalog of model
//! geometries with their mean-curvature jets, and the boundary invariants
//! `B_k` with the pointwise flow expansion coefficients.
//!
//! Orientation convention, fixed once: the distance `rho` is measured from
//! the boundary inward and the normal points inward, so the equidistant of a
//! ball of radius `R` at depth `rho` is a sphere of radius `R - rho`. Every
//! catalog curvature function then satisfies the Riccati law
//! `g' = g^2 + kappa` along `rho` (`kappa` = ambient curvature), with
//! `eta = (dim - 1) g`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::coeffring::{PiCoefficient, Rational};
use crate::ncalgebra::{AlgebraError, Generator, Operator};
use crate::schemes::SchemeCache;

/// Extra truncation orders kept beyond the acting operator's degree.
pub const JET_ORDER_MARGIN: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum JetError {
    #[error("jet order {have} is insufficient (need at least {needed})")]
    InsufficientOrder { needed: usize, have: usize },
    #[error("cannot differentiate a jet of order zero")]
    DerivativeUnderflow,
    #[error("eta jet order {have} must meet the function jet order {needed}")]
    EtaOrder { needed: usize, have: usize },
}

#[derive(Debug, Error)]
pub enum RadialError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invariant index must satisfy k >= 2, got {0}")]
    IndexTooSmall(u64),
    #[error("invalid geometry: {0}")]
    BadGeometry(String),
    #[error("boundary-value routes disagree at k={k}: direct {direct}, barred {barred}")]
    RouteMismatch {
        k: u64,
        direct: String,
        barred: String,
    },
}

/// Scalar ring required by jet arithmetic.
pub trait JetScalar: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_usize(n: usize) -> Self;
    fn div_usize(&self, n: usize) -> Self;
}

/// Conversion from the operator coefficient ring; exact for
/// [`PiCoefficient`] targets, numeric for floats.
pub trait FromPi {
    fn from_pi(c: &PiCoefficient) -> Self;
}

impl JetScalar for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn is_zero(&self) -> bool {
        <Rational as Zero>::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn from_usize(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn div_usize(&self, n: usize) -> Self {
        self / Rational::from_integer(BigInt::from(n))
    }
}

impl JetScalar for PiCoefficient {
    fn zero() -> Self {
        PiCoefficient::zero()
    }
    fn one() -> Self {
        PiCoefficient::one()
    }
    fn is_zero(&self) -> bool {
        PiCoefficient::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        PiCoefficient::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        PiCoefficient::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        PiCoefficient::mul(self, other)
    }
    fn neg(&self) -> Self {
        PiCoefficient::neg(self)
    }
    fn from_usize(n: usize) -> Self {
        PiCoefficient::from_integer(n as i64)
    }
    fn div_usize(&self, n: usize) -> Self {
        self.scale(&Rational::new(BigInt::one(), BigInt::from(n)))
    }
}

impl FromPi for PiCoefficient {
    fn from_pi(c: &PiCoefficient) -> Self {
        c.clone()
    }
}

impl JetScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
    fn div_usize(&self, n: usize) -> Self {
        self / n as f64
    }
}

impl FromPi for f64 {
    fn from_pi(c: &PiCoefficient) -> Self {
        c.to_f64()
    }
}

/// Truncated Taylor series in the boundary-distance variable: coefficients
/// for `rho^0 .. rho^order`. Arithmetic truncates to the shorter operand
/// and differentiation drops one order, so the order of a result always
/// reflects what is actually known.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S> {
    coeffs: Vec<S>,
}

impl<S: JetScalar> Jet<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a jet has at least its value");
        Self { coeffs }
    }

    pub fn constant(value: S, order: usize) -> Self {
        let mut coeffs = vec![S::zero(); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> &S {
        &self.coeffs[k]
    }

    pub fn coefficients(&self) -> &[S] {
        &self.coeffs
    }

    /// Value at `rho = 0`.
    pub fn eval0(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order());
        Self {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        Self {
            coeffs: (0..n)
                .map(|k| self.coeffs[k].add(&other.coeffs[k]))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        Self {
            coeffs: (0..n)
                .map(|k| self.coeffs[k].sub(&other.coeffs[k]))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                let mut acc = S::zero();
                for i in 0..=k {
                    acc = acc.add(&self.coeffs[i].mul(&other.coeffs[k - i]));
                }
                acc
            })
            .collect();
        Self { coeffs }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn derivative(&self) -> Result<Self, JetError> {
        if self.order() == 0 {
            return Err(JetError::DerivativeUnderflow);
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.mul(&S::from_usize(k)))
                .collect(),
        })
    }

    pub fn map<T: JetScalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// Jet of a single principal curvature obeying `g' = g^2 + kappa` with
/// `g(0) = initial`; `kappa` is the ambient sectional curvature (+1 sphere,
/// 0 euclidean, -1 hyperbolic).
pub fn riccati_curvature_jet<S: JetScalar>(initial: S, kappa: i64, order: usize) -> Jet<S> {
    let mut g = Vec::with_capacity(order + 1);
    g.push(initial);
    for m in 0..order {
        let mut acc = S::zero();
        for i in 0..=m {
            acc = acc.add(&g[i].mul(&g[m - i]));
        }
        if m == 0 {
            let k = match kappa {
                1 => S::one(),
                0 => S::zero(),
                -1 => S::one().neg(),
                _ => panic!("ambient curvature must be -1, 0 or 1"),
            };
            acc = acc.add(&k);
        }
        g.push(acc.div_usize(m + 1));
    }
    Jet::new(g)
}

/// A model domain whose boundary-distance geometry is radial.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialGeometry {
    /// Unit segment; `eta` vanishes identically.
    Interval,
    /// Ball of rational radius in flat space; the `eta` jet is exact.
    EuclideanBall { dim: u32, radius: Rational },
    /// Geodesic cap of radius `theta0` in the unit sphere.
    SphericalCap { dim: u32, theta0: f64 },
    /// Ball of radius `radius` in hyperbolic space.
    HyperbolicBall { dim: u32, radius: f64 },
}

impl RadialGeometry {
    pub fn dim(&self) -> u32 {
        match self {
            RadialGeometry::Interval => 1,
            RadialGeometry::EuclideanBall { dim, .. }
            | RadialGeometry::SphericalCap { dim, .. }
            | RadialGeometry::HyperbolicBall { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<(), RadialError> {
        let bad = |msg: String| Err(RadialError::BadGeometry(msg));
        match self {
            RadialGeometry::Interval => Ok(()),
            RadialGeometry::EuclideanBall { dim, radius } => {
                if *dim < 2 {
                    return bad(format!("ball dimension must be >= 2, got {dim}"));
                }
                if !radius.is_positive() {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                Ok(())
            }
            RadialGeometry::SphericalCap { dim, theta0 } => {
                if *dim < 2 {
                    return bad(format!("cap dimension must be >= 2, got {dim}"));
                }
                if !(*theta0 > 0.0 && *theta0 < std::f64::consts::PI) {
                    return bad(format!("cap radius must lie in (0, pi), got {theta0}"));
                }
                Ok(())
            }
            RadialGeometry::HyperbolicBall { dim, radius } => {
                if *dim < 2 {
                    return bad(format!("ball dimension must be >= 2, got {dim}"));
                }
                if radius.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                Ok(())
            }
        }
    }

    /// Exact rational `eta` jet, available for the interval and for
    /// euclidean balls (where the boundary curvature `1/R` is rational).
    pub fn eta_jet_exact(&self, order: usize) -> Option<Jet<Rational>> {
        match self {
            RadialGeometry::Interval => Some(Jet::constant(<Rational as Zero>::zero(), order)),
            RadialGeometry::EuclideanBall { dim, radius } => {
                let c = <Rational as One>::one() / radius.clone();
                let g = riccati_curvature_jet(c, 0, order);
                Some(g.scale(&Rational::from_integer(BigInt::from(*dim - 1))))
            }
            _ => None,
        }
    }

    /// Double-precision `eta` jet; available for every catalog geometry.
    pub fn eta_jet_f64(&self, order: usize) -> Jet<f64> {
        match self {
            RadialGeometry::Interval => Jet::constant(0.0, order),
            RadialGeometry::EuclideanBall { dim, radius } => {
                let c = 1.0 / radius.to_f64().expect("finite radius");
                riccati_curvature_jet(c, 0, order).scale(&f64::from(*dim - 1))
            }
            RadialGeometry::SphericalCap { dim, theta0 } => {
                let c = theta0.cos() / theta0.sin();
                riccati_curvature_jet(c, 1, order).scale(&f64::from(*dim - 1))
            }
            RadialGeometry::HyperbolicBall { dim, radius } => {
                let c = radius.cosh() / radius.sinh();
                riccati_curvature_jet(c, -1, order).scale(&f64::from(*dim - 1))
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            RadialGeometry::Interval | RadialGeometry::EuclideanBall { .. }
        )
    }
}

impl fmt::Display for RadialGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialGeometry::Interval => write!(f, "interval"),
            RadialGeometry::EuclideanBall { dim, radius } => write!(f, "ball:{dim}:{radius}"),
            RadialGeometry::SphericalCap { dim, theta0 } => write!(f, "cap:{dim}:{theta0}"),
            RadialGeometry::HyperbolicBall { dim, radius } => {
                write!(f, "hyperbolic:{dim}:{radius}")
            }
        }
    }
}

/// Applies an operator to a radial jet, word by word and letter by letter
/// (rightmost letter first): `N f = 2 f' - eta f` and the radial Laplacian
/// `f -> -f'' + eta f'`. The tangential part annihilates radial functions,
/// so this is the full action on jets.
///
/// Requires `f.order() >= op.max_degree()` (each letter consumes its degree
/// in truncation order) and an `eta` jet at least as long as `f`.
pub fn apply_radial_operator<S: JetScalar + FromPi>(
    op: &Operator,
    f: &Jet<S>,
    eta: &Jet<S>,
) -> Result<Jet<S>, JetError> {
    let deg = op.max_degree();
    if f.order() < deg {
        return Err(JetError::InsufficientOrder {
            needed: deg,
            have: f.order(),
        });
    }
    if eta.order() < f.order() {
        return Err(JetError::EtaOrder {
            needed: f.order(),
            have: eta.order(),
        });
    }
    let target = f.order() - deg;
    let two = S::from_usize(2);
    let mut out = Jet::constant(S::zero(), target);
    for (word, coeff) in op.terms() {
        let mut acc = f.clone();
        for g in word.letters().iter().rev() {
            acc = match g {
                Generator::N => acc.derivative()?.scale(&two).sub(&eta.mul(&acc)),
                Generator::Lap => {
                    let d1 = acc.derivative()?;
                    let d2 = d1.derivative()?;
                    d2.neg().add(&eta.mul(&d1))
                }
            };
        }
        out = out.add(&acc.scale(&S::from_pi(coeff)));
    }
    Ok(out)
}

/// A boundary invariant value: exact when the geometry jet is exact.
#[derive(Debug, Clone, PartialEq)]
pub enum BValue {
    Exact(PiCoefficient),
    Approx(f64),
}

impl BValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            BValue::Exact(c) => c.to_f64(),
            BValue::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&PiCoefficient> {
        match self {
            BValue::Exact(c) => Some(c),
            BValue::Approx(_) => None,
        }
    }

    pub fn scale_rational(&self, q: &Rational) -> BValue {
        match self {
            BValue::Exact(c) => BValue::Exact(c.scale(q)),
            BValue::Approx(v) => BValue::Approx(v * q.to_f64().unwrap_or(f64::NAN)),
        }
    }
}

impl fmt::Display for BValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BValue::Exact(c) => write!(f, "{c}"),
            BValue::Approx(v) => write!(f, "{v:.15e}"),
        }
    }
}

fn float_routes_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// The boundary invariant `B_k` for `k >= 2`, with the jet truncated
/// `margin` orders past the operator degree.
///
/// Two evaluation paths are run and compared on every call: the operator
/// applied to the constant function, and minus its bar component applied to
/// `eta`. These agree as an operator identity, so a mismatch flags a defect
/// in the bar split or the jet action rather than in the geometry.
pub fn compute_b_with_margin(
    k: u64,
    geometry: &RadialGeometry,
    cache: &mut SchemeCache,
    margin: usize,
) -> Result<BValue, RadialError> {
    if k < 2 {
        return Err(RadialError::IndexTooSmall(k));
    }
    geometry.validate()?;
    let d = cache.compute_d(k);
    let bar_d = d.bar_part()?;
    let order = (k as usize - 1) + margin;

    if let Some(eta_q) = geometry.eta_jet_exact(order) {
        let eta = eta_q.map(|q| PiCoefficient::from_rational(q.clone()));
        let one = Jet::constant(PiCoefficient::one(), order);
        let direct = apply_radial_operator(&d, &one, &eta)?.eval0().clone();
        let barred = apply_radial_operator(&bar_d, &eta, &eta)?.eval0().neg();
        if direct != barred {
            return Err(RadialError::RouteMismatch {
                k,
                direct: direct.to_string(),
                barred: barred.to_string(),
            });
        }
        Ok(BValue::Exact(direct))
    } else {
        let eta = geometry.eta_jet_f64(order);
        let one = Jet::constant(1.0, order);
        let direct = *apply_radial_operator(&d, &one, &eta)?.eval0();
        let barred = -*apply_radial_operator(&bar_d, &eta, &eta)?.eval0();
        if !float_routes_agree(direct, barred) {
            return Err(RadialError::RouteMismatch {
                k,
                direct: direct.to_string(),
                barred: barred.to_string(),
            });
        }
        Ok(BValue::Approx(direct))
    }
}

/// `B_k` at the default truncation margin.
pub fn compute_b(
    k: u64,
    geometry: &RadialGeometry,
    cache: &mut SchemeCache,
) -> Result<BValue, RadialError> {
    compute_b_with_margin(k, geometry, cache, JET_ORDER_MARGIN)
}

/// Coefficients of the pointwise flow expansion in powers `t^(k/2)`.
#[derive(Debug, Clone)]
pub struct FlowAsymptotics {
    /// Coefficient of the `1/sqrt(t)` leading term (`1/sqrt(pi)`, for every
    /// geometry).
    pub leading: PiCoefficient,
    /// `coefficients[k]` multiplies `t^(k/2)` and equals `(1 + k/2) B_{k+2}`.
    pub coefficients: Vec<BValue>,
}

/// The flow expansion coefficients for `t^(k/2)`, `k = 0..=max_power`.
pub fn flow_asymptotics(
    geometry: &RadialGeometry,
    max_power: u64,
    cache: &mut SchemeCache,
) -> Result<FlowAsymptotics, RadialError> {
    let mut coefficients = Vec::with_capacity(max_power as usize + 1);
    for k in 0..=max_power {
        let b = compute_b(k + 2, geometry, cache)?;
        let factor = Rational::new(BigInt::from(k + 2), BigInt::from(2));
        coefficients.push(b.scale_rational(&factor));
    }
    Ok(FlowAsymptotics {
        leading: PiCoefficient::pi_power(-1),
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::rat;
    use crate::ncalgebra::Word;
    use proptest::prelude::*;

    fn ball3(num: i64, den: i64) -> RadialGeometry {
        RadialGeometry::EuclideanBall {
            dim: 3,
            radius: rat(num, den),
        }
    }

    #[test]
    fn jets_and_geometries_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Jet<Rational>>();
        assert_send_sync::<Jet<PiCoefficient>>();
        assert_send_sync::<Jet<f64>>();
        assert_send_sync::<RadialGeometry>();
        assert_send_sync::<BValue>();
    }

    #[test]
    fn euclidean_eta_jet_is_geometric_series() {
        // eta = 2/(1 - rho) for the unit 3-ball.
        let jet = ball3(1, 1).eta_jet_exact(5).unwrap();
        for k in 0..=5 {
            assert_eq!(jet.coefficient(k), &rat(2, 1), "k={k}");
        }
        // Radius 2: eta = 1/(1 - rho/2) = sum rho^k/2^k.
        let jet = ball3(2, 1).eta_jet_exact(4).unwrap();
        for k in 0..=4 {
            assert_eq!(jet.coefficient(k), &rat(1, 1 << k), "k={k}");
        }
    }

    #[test]
    fn generators_on_constant_one() {
        let order = 6;
        let geometry = ball3(1, 1);
        let eta = geometry
            .eta_jet_exact(order)
            .unwrap()
            .map(|q| PiCoefficient::from_rational(q.clone()));
        let one = Jet::constant(PiCoefficient::one(), order);
        // N 1 = -eta
        let n1 = apply_radial_operator(&Operator::generator(Generator::N), &one, &eta).unwrap();
        assert_eq!(n1, eta.truncate(order - 1).neg());
        // Lap 1 = 0
        let l1 = apply_radial_operator(&Operator::generator(Generator::Lap), &one, &eta).unwrap();
        assert!(l1.coefficients().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn b2_b3_for_unit_3ball() {
        let mut cache = SchemeCache::new();
        let b2 = compute_b(2, &ball3(1, 1), &mut cache).unwrap();
        assert_eq!(b2, BValue::Exact(PiCoefficient::from_rational(rat(-1, 1))));
        let b3 = compute_b(3, &ball3(1, 1), &mut cache).unwrap();
        assert_eq!(b3, BValue::Exact(PiCoefficient::zero()));
    }

    #[test]
    fn euclidean_3ball_nullity() {
        let mut cache = SchemeCache::new();
        for geometry in [ball3(1, 1), ball3(7, 3), ball3(5, 11)] {
            let b2 = compute_b(2, &geometry, &mut cache).unwrap();
            let radius = match &geometry {
                RadialGeometry::EuclideanBall { radius, .. } => radius.clone(),
                _ => unreachable!(),
            };
            assert_eq!(
                b2,
                BValue::Exact(PiCoefficient::from_rational(-radius.recip()))
            );
            for k in 3..=10 {
                let b = compute_b(k, &geometry, &mut cache).unwrap();
                assert_eq!(
                    b,
                    BValue::Exact(PiCoefficient::zero()),
                    "B_{k} at {geometry}"
                );
            }
        }
    }

    #[test]
    fn truncation_stability() {
        let mut cache = SchemeCache::new();
        let geometry = ball3(7, 3);
        for k in 2..=8 {
            let lo = compute_b_with_margin(k, &geometry, &mut cache, JET_ORDER_MARGIN).unwrap();
            let hi = compute_b_with_margin(k, &geometry, &mut cache, JET_ORDER_MARGIN + 5).unwrap();
            assert_eq!(lo, hi, "exact geometry, k={k}");
        }
        let cap = RadialGeometry::SphericalCap {
            dim: 3,
            theta0: std::f64::consts::FRAC_PI_3,
        };
        for k in 2..=8 {
            let lo = compute_b_with_margin(k, &cap, &mut cache, JET_ORDER_MARGIN)
                .unwrap()
                .to_f64();
            let hi = compute_b_with_margin(k, &cap, &mut cache, JET_ORDER_MARGIN + 5)
                .unwrap()
                .to_f64();
            assert!((lo - hi).abs() <= 1e-12 * lo.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn cap_b2_is_minus_cot() {
        let mut cache = SchemeCache::new();
        for theta0 in [
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
            2.0 * std::f64::consts::FRAC_PI_3,
        ] {
            let cap = RadialGeometry::SphericalCap { dim: 3, theta0 };
            let b2 = compute_b(2, &cap, &mut cache).unwrap().to_f64();
            let expected = -theta0.cos() / theta0.sin();
            assert!((b2 - expected).abs() < 1e-12, "theta0={theta0}");
        }
    }

    #[test]
    fn hyperbolic_ball_mean_curvature() {
        let mut cache = SchemeCache::new();
        let geo = RadialGeometry::HyperbolicBall {
            dim: 3,
            radius: 1.0,
        };
        let b2 = compute_b(2, &geo, &mut cache).unwrap().to_f64();
        let coth = 1.0f64.cosh() / 1.0f64.sinh();
        assert!((b2 + coth).abs() < 1e-12, "B_2 = {b2}");
    }

    /// `compute_b` verifies the direct and barred routes against each other
    /// internally, so a clean run here is the route-agreement check.
    #[test]
    fn route_agreement_to_k12_on_every_kind() {
        let mut cache = SchemeCache::new();
        let geometries = [
            RadialGeometry::Interval,
            ball3(5, 4),
            RadialGeometry::SphericalCap {
                dim: 4,
                theta0: 0.9,
            },
            RadialGeometry::HyperbolicBall {
                dim: 3,
                radius: 0.7,
            },
        ];
        for geo in &geometries {
            for k in 2..=12 {
                compute_b(k, geo, &mut cache).unwrap_or_else(|e| {
                    panic!("route disagreement at k={k}, {geo}: {e}");
                });
            }
        }
    }

    #[test]
    fn interval_flow_coefficients_vanish() {
        let mut cache = SchemeCache::new();
        let flow = flow_asymptotics(&RadialGeometry::Interval, 8, &mut cache).unwrap();
        assert_eq!(flow.leading, PiCoefficient::pi_power(-1));
        for (k, c) in flow.coefficients.iter().enumerate() {
            assert_eq!(c, &BValue::Exact(PiCoefficient::zero()), "k={k}");
        }
    }

    #[test]
    fn ball_flow_constant_term() {
        let mut cache = SchemeCache::new();
        let flow = flow_asymptotics(&ball3(1, 1), 6, &mut cache).unwrap();
        assert_eq!(
            flow.coefficients[0],
            BValue::Exact(PiCoefficient::from_rational(rat(-1, 1)))
        );
        for c in &flow.coefficients[1..] {
            assert_eq!(c, &BValue::Exact(PiCoefficient::zero()));
        }
    }

    #[test]
    fn insufficient_order_is_an_error() {
        let geometry = ball3(1, 1);
        let eta = geometry
            .eta_jet_exact(1)
            .unwrap()
            .map(|q| PiCoefficient::from_rational(q.clone()));
        let one = Jet::constant(PiCoefficient::one(), 1);
        let op = Operator::generator(Generator::Lap); // degree 2 > order 1
        assert_eq!(
            apply_radial_operator(&op, &one, &eta).unwrap_err(),
            JetError::InsufficientOrder { needed: 2, have: 1 }
        );
    }

    prop_compose! {
        fn arb_homogeneous_word(max_len: usize)(letters in proptest::collection::vec(
            prop_oneof![Just(Generator::N), Just(Generator::Lap)], 0..max_len))
            -> Word {
            Word::new(letters)
        }
    }

    proptest! {
        /// With eta = 0 every homogeneous operator acts as its weight times
        /// the pure derivative of matching order.
        #[test]
        fn interval_degeneration(
            word in arb_homogeneous_word(5),
            scale_num in -6i64..7,
            poly in proptest::collection::vec(-5i64..6, 1..6),
        ) {
            let op = Operator::from_term(
                word.clone(),
                PiCoefficient::from_rational(rat(scale_num, 3)),
            );
            let deg = word.degree();
            let order = deg + 3;
            let eta = Jet::constant(PiCoefficient::zero(), order);
            let f = Jet::new(
                (0..=order)
                    .map(|k| PiCoefficient::from_integer(*poly.get(k).unwrap_or(&0)))
                    .collect(),
            );
            let lhs = apply_radial_operator(&op, &f, &eta).unwrap();
            // weight(op) * f^(deg)
            let mut fd = f.clone();
            for _ in 0..deg {
                fd = fd.derivative().unwrap();
            }
            let rhs = fd.scale(&op.weight());
            // A zero coefficient collapses op to the zero operator of degree
            // 0, which legitimately preserves more truncation order than the
            // word's derivative; compare on the common prefix.
            let common = lhs.order().min(rhs.order());
            prop_assert_eq!(lhs.truncate(common), rhs.truncate(common));
        }
    }
}
