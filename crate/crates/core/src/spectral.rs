//! Independent numerical oracles: Dirichlet eigenfunction series for the
//! unit interval, the flat 3-ball and the geodesic cap of the 3-sphere,
//! heat-content and heat-flow evaluation from them, and extraction of
//! small-time asymptotic coefficients for comparison with the symbolic
//! pipeline.
//!
//! Series sums use Neumaier-compensated accumulation so the fit error is
//! dominated by the asymptotic-basis truncation, not by rounding. Sine
//! Fourier coefficients of polynomials are closed forms (integration by
//! parts), never quadrature.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::coeffring::{PiCoefficient, Rational};
use crate::poly::Poly;
use crate::radialgeom::{compute_b, RadialGeometry};
use crate::schemes::{ScalarWeights, SchemeCache, SchemeError};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
    #[error("polynomial degree {0} exceeds the supported limit of 10")]
    PolynomialDegree(usize),
    #[error("test function must vanish at both endpoints: {0}")]
    BoundaryCondition(String),
    #[error("need at least {need} samples, got {have}")]
    NotEnoughSamples { have: usize, need: usize },
    #[error("basis powers must be strictly ascending")]
    BadPowers,
    #[error("least-squares system is ill-conditioned (estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Radial(#[from] crate::radialgeom::RadialError),
}

/// Neumaier-compensated accumulator: the running error term recovers the
/// low-order bits lost by straight summation.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Closed-form sine Fourier data of a polynomial on `[0, L]`:
/// `int_0^L p(x) sin(j pi x / L) dx
///    = sum_m (-1)^m [p^(2m)(0) - (-1)^j p^(2m)(L)] (L/(j pi))^(2m+1)`.
#[derive(Debug, Clone)]
struct SineCoeffs {
    /// `(-1)^m p^(2m)(0)` as floats.
    at_zero: Vec<f64>,
    /// `(-1)^m p^(2m)(L)` as floats.
    at_length: Vec<f64>,
    length: f64,
}

impl SineCoeffs {
    fn new(phi: &Poly, length: &Rational) -> Self {
        let mut at_zero = Vec::new();
        let mut at_length = Vec::new();
        let mut deriv = phi.clone();
        let mut sign = 1.0f64;
        let zero = <Rational as Zero>::zero();
        loop {
            at_zero.push(sign * deriv.eval(&zero).to_f64().unwrap());
            at_length.push(sign * deriv.eval(length).to_f64().unwrap());
            if deriv.degree().is_none_or(|d| d < 2) {
                break;
            }
            deriv = deriv.derivative_n(2);
            sign = -sign;
        }
        Self {
            at_zero,
            at_length,
            length: length.to_f64().unwrap(),
        }
    }

    fn eval(&self, j: u64) -> f64 {
        let r = self.length / (j as f64 * std::f64::consts::PI);
        let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        let mut rpow = r;
        for (u, v) in self.at_zero.iter().zip(&self.at_length) {
            acc += (u - parity * v) * rpow;
            rpow *= r * r;
        }
        acc
    }

    fn magnitude_bound(&self) -> f64 {
        let r = self.length / std::f64::consts::PI;
        let rmax = r.max(1.0);
        self.at_zero
            .iter()
            .zip(&self.at_length)
            .enumerate()
            .map(|(m, (u, v))| (u.abs() + v.abs()) * rmax.powi(2 * m as i32 + 1))
            .sum()
    }
}

fn check_time(t: f64) -> Result<(), SpectralError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::NonPositiveTime(t))
    }
}

/// Heat content `H_phi(t)` on the interval `[0, L]` with initial data `phi`
/// and zero boundary values, by the sine eigenfunction series. The series
/// is truncated once the geometric tail falls below `10^-(precision+2)`.
pub fn heat_content_interval(
    phi: &Poly,
    length: &Rational,
    t: f64,
    precision: u32,
) -> Result<f64, SpectralError> {
    check_time(t)?;
    if let Some(d) = phi.degree() {
        if d > 10 {
            return Err(SpectralError::PolynomialDegree(d));
        }
    }
    let coeffs = SineCoeffs::new(phi, length);
    let unit = SineCoeffs::new(&Poly::one(), length);
    let l = length.to_f64().unwrap();
    let cap = 2.0 / l * coeffs.magnitude_bound() * unit.magnitude_bound();
    let threshold = 10f64.powi(-(precision as i32) - 2);
    let mut acc = Neumaier::default();
    for j in 1..=100_000_000u64 {
        let lambda = (j as f64 * std::f64::consts::PI / l).powi(2);
        acc.add((-lambda * t).exp() * (2.0 / l) * coeffs.eval(j) * unit.eval(j));
        let next = ((j + 1) as f64 * std::f64::consts::PI / l).powi(2);
        let gap = (next - lambda) * t;
        if cap * (-next * t).exp() * (1.0 + 1.0 / gap) < threshold {
            break;
        }
    }
    Ok(acc.value())
}

/// An explicit Dirichlet eigenpair family for a model domain. Eigenvalues
/// and series coefficients are closed forms; `heat_flow` sums the inward
/// normal derivative series for unit initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenSeriesModel {
    Interval { length: Rational },
    Ball3 { radius: f64 },
    Cap3 { theta0: f64 },
}

impl EigenSeriesModel {
    pub fn validate(&self) -> Result<(), SpectralError> {
        match self {
            EigenSeriesModel::Interval { length } => {
                if length.is_positive() {
                    Ok(())
                } else {
                    Err(SpectralError::BadParameter(format!(
                        "interval length must be positive, got {length}"
                    )))
                }
            }
            EigenSeriesModel::Ball3 { radius } => {
                if *radius > 0.0 {
                    Ok(())
                } else {
                    Err(SpectralError::BadParameter(format!(
                        "ball radius must be positive, got {radius}"
                    )))
                }
            }
            EigenSeriesModel::Cap3 { theta0 } => {
                if *theta0 > 0.0 && *theta0 < std::f64::consts::PI {
                    Ok(())
                } else {
                    Err(SpectralError::BadParameter(format!(
                        "cap radius must lie in (0, pi), got {theta0}"
                    )))
                }
            }
        }
    }

    /// The `j`-th Dirichlet eigenvalue of the radial problem, `j >= 1`.
    pub fn eigenvalue(&self, j: u64) -> f64 {
        let j = j as f64;
        match self {
            EigenSeriesModel::Interval { length } => {
                (j * std::f64::consts::PI / length.to_f64().unwrap()).powi(2)
            }
            EigenSeriesModel::Ball3 { radius } => (j * std::f64::consts::PI / radius).powi(2),
            EigenSeriesModel::Cap3 { theta0 } => (j * std::f64::consts::PI / theta0).powi(2) - 1.0,
        }
    }

    /// Coefficient of `exp(-lambda_j t)` in the boundary heat-flow series
    /// for unit initial data.
    pub fn flow_coefficient(&self, j: u64) -> f64 {
        match self {
            EigenSeriesModel::Interval { length } => {
                if j % 2 == 1 {
                    4.0 / length.to_f64().unwrap()
                } else {
                    0.0
                }
            }
            EigenSeriesModel::Ball3 { radius } => 2.0 / radius,
            EigenSeriesModel::Cap3 { theta0 } => {
                let mu2 = (j as f64 * std::f64::consts::PI / theta0).powi(2);
                (2.0 / theta0) * mu2 / (mu2 - 1.0)
            }
        }
    }

    /// Coefficient of `exp(-lambda_j t)` in the total heat content series
    /// for unit initial data.
    pub fn unit_content_coefficient(&self, j: u64) -> f64 {
        let pi = std::f64::consts::PI;
        match self {
            EigenSeriesModel::Interval { length } => {
                let l = length.to_f64().unwrap();
                if j % 2 == 1 {
                    8.0 * l / (j as f64 * pi).powi(2)
                } else {
                    0.0
                }
            }
            EigenSeriesModel::Ball3 { radius } => {
                8.0 * radius.powi(3) / (pi * (j as f64) * (j as f64))
            }
            EigenSeriesModel::Cap3 { theta0 } => {
                let mu = j as f64 * pi / theta0;
                let b = (2.0 / theta0) * theta0.sin() * mu / (mu * mu - 1.0);
                2.0 * pi * theta0 * b * b
            }
        }
    }

    fn series(&self, t: f64, precision: u32, which: fn(&Self, u64) -> f64) -> f64 {
        let threshold = 10f64.powi(-(precision as i32) - 2);
        let mut acc = Neumaier::default();
        let mut coeff_bound = 0.0f64;
        for j in 1..=100_000_000u64 {
            let c = which(self, j);
            coeff_bound = coeff_bound.max(c.abs());
            acc.add(c * (-self.eigenvalue(j) * t).exp());
            // Tail bound: coefficients are uniformly bounded and the decay
            // ratio between consecutive terms is exp(-gap * t), so the tail
            // is below the next term times 1/(1 - e^(-gap t)) <= 1 + 1/(gap t).
            let next = self.eigenvalue(j + 1);
            let gap = (next - self.eigenvalue(j)) * t;
            let tail = coeff_bound * (-next * t).exp() * (1.0 + 1.0 / gap);
            if tail < threshold {
                break;
            }
        }
        acc.value()
    }

    /// The boundary heat flow at time `t` (a single number: the models are
    /// radial, so the flow is constant on the boundary).
    pub fn heat_flow(&self, t: f64, precision: u32) -> Result<f64, SpectralError> {
        self.validate()?;
        check_time(t)?;
        Ok(self.series(t, precision, Self::flow_coefficient))
    }

    /// The total heat content at time `t` for unit initial data.
    pub fn unit_heat_content(&self, t: f64, precision: u32) -> Result<f64, SpectralError> {
        self.validate()?;
        check_time(t)?;
        Ok(self.series(t, precision, Self::unit_content_coefficient))
    }
}

/// Flow series for the flat 3-ball: `(2/R) sum_j exp(-(j pi / R)^2 t)`.
pub fn heat_flow_ball3(radius: f64, t: f64, precision: u32) -> Result<f64, SpectralError> {
    EigenSeriesModel::Ball3 { radius }.heat_flow(t, precision)
}

/// Flow series for the geodesic cap of the unit 3-sphere.
pub fn heat_flow_cap3(theta0: f64, t: f64, precision: u32) -> Result<f64, SpectralError> {
    EigenSeriesModel::Cap3 { theta0 }.heat_flow(t, precision)
}

/// Flow series for the interval.
pub fn heat_flow_interval(length: &Rational, t: f64, precision: u32) -> Result<f64, SpectralError> {
    EigenSeriesModel::Interval {
        length: length.clone(),
    }
    .heat_flow(t, precision)
}

/// Exact `beta_k(phi)` on the interval: the operator acts as its weight
/// times the `(k-1)`-st normal derivative, and the boundary integral is the
/// two-endpoint sum with the inward orientation (`+d/dx` at 0, `-d/dx`
/// at `L`), giving
/// `w(D_k) [phi^(k-1)(0) + (-1)^(k-1) phi^(k-1)(L)]`.
pub fn symbolic_beta_interval(
    phi: &Poly,
    length: &Rational,
    k: u64,
    weights: &mut ScalarWeights,
) -> PiCoefficient {
    assert!(k >= 1);
    let m = (k - 1) as usize;
    let deriv = phi.derivative_n(m);
    let at_zero = deriv.eval(&<Rational as Zero>::zero());
    let mut at_length = deriv.eval(length);
    if (k - 1) % 2 == 1 {
        at_length = -at_length;
    }
    weights.weight_d(k).scale(&(at_zero + at_length))
}

/// One verified instance of the two-step descent
/// `beta_{j+2}(phi) = -(2/(j+2)) beta_j(lap phi)` for `phi` vanishing at
/// both endpoints.
#[derive(Debug, Clone)]
pub struct DownTwoRow {
    pub j: u64,
    pub lhs: PiCoefficient,
    pub rhs: PiCoefficient,
    pub pass: bool,
}

/// Checks the descent identity exactly for `j = 1..=max_j`. The Laplacian
/// here is the geometer's one, so `lap phi = -phi''`.
pub fn verify_down_two(
    phi: &Poly,
    length: &Rational,
    max_j: u64,
    weights: &mut ScalarWeights,
) -> Result<Vec<DownTwoRow>, SpectralError> {
    let zero = <Rational as Zero>::zero();
    if !phi.eval(&zero).is_zero() || !phi.eval(length).is_zero() {
        return Err(SpectralError::BoundaryCondition(format!(
            "phi(0) = {}, phi(L) = {}",
            phi.eval(&zero),
            phi.eval(length)
        )));
    }
    let lap_phi = phi.derivative_n(2).neg();
    let mut rows = Vec::new();
    for j in 1..=max_j {
        let lhs = symbolic_beta_interval(phi, length, j + 2, weights);
        let scale = -Rational::new(BigInt::from(2), BigInt::from(j + 2));
        let rhs = symbolic_beta_interval(&lap_phi, length, j, weights).scale(&scale);
        let pass = lhs == rhs;
        rows.push(DownTwoRow { j, lhs, rhs, pass });
    }
    Ok(rows)
}

/// The default sampling grid: 24 geometric points `t_i = 1e-2 * 2^-i`.
pub fn default_time_grid() -> Vec<f64> {
    (0..24).map(|i| 1e-2 * 0.5f64.powi(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Per-power Richardson elimination with subtraction, lowest power
    /// first; conditioning is isolated per coefficient.
    Peeling,
    /// Column-scaled Householder least squares over the whole basis.
    LeastSquares,
}

/// Result of an asymptotic-coefficient extraction.
#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub powers: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// Root-mean-square of the residual over the samples after removing
    /// the fitted basis.
    pub residual_rms: f64,
    /// Ratio of extreme diagonal entries of the triangular factor; only
    /// present for the least-squares method.
    pub condition_estimate: Option<f64>,
}

const RICHARDSON_LEVELS: usize = 4;
const CONDITION_LIMIT: f64 = 1e12;

fn richardson_estimate(ts: &[f64], z: &[f64], gaps: &[f64]) -> f64 {
    let mut table = z.to_vec();
    for gap in gaps {
        let mut next = Vec::with_capacity(table.len() - 1);
        for i in 0..table.len() - 1 {
            let q = (ts[i + 1] / ts[i]).powf(*gap);
            next.push((table[i + 1] - q * table[i]) / (1.0 - q));
        }
        table = next;
    }
    // Most stable consecutive pair wins; deep windows can be dominated by
    // rounding noise once the signal falls below machine precision.
    let mut best = 0;
    let mut best_gap = f64::INFINITY;
    for i in 0..table.len() - 1 {
        let g = (table[i + 1] - table[i]).abs();
        if g < best_gap {
            best_gap = g;
            best = i;
        }
    }
    table[best + 1]
}

fn peel(samples: &[(f64, f64)], powers: &[f64]) -> Vec<f64> {
    let ts: Vec<f64> = samples.iter().map(|&(t, _)| t).collect();
    let mut residual: Vec<f64> = samples.iter().map(|&(_, y)| y).collect();
    let mut coefficients = Vec::with_capacity(powers.len());
    for (m, &p) in powers.iter().enumerate() {
        let z: Vec<f64> = residual
            .iter()
            .zip(&ts)
            .map(|(y, t)| y / t.powf(p))
            .collect();
        let mut gaps: Vec<f64> = powers[m + 1..].iter().map(|q| q - p).collect();
        let mut last = gaps.last().copied().unwrap_or(0.0);
        while gaps.len() < RICHARDSON_LEVELS {
            last += 0.5;
            gaps.push(last);
        }
        gaps.truncate(RICHARDSON_LEVELS);
        let c = richardson_estimate(&ts, &z, &gaps);
        coefficients.push(c);
        for (y, t) in residual.iter_mut().zip(&ts) {
            *y -= c * t.powf(p);
        }
    }
    coefficients
}

fn least_squares(samples: &[(f64, f64)], powers: &[f64]) -> Result<(Vec<f64>, f64), SpectralError> {
    let n = samples.len();
    let m = powers.len();
    let mut a: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(t, _)| powers.iter().map(|&p| t.powf(p)).collect())
        .collect();
    let mut b: Vec<f64> = samples.iter().map(|&(_, y)| y).collect();
    // Column scaling keeps the condition estimate meaningful for the wildly
    // different magnitudes of t^p over the grid.
    let scales: Vec<f64> = (0..m)
        .map(|c| a.iter().map(|row| row[c] * row[c]).sum::<f64>().sqrt())
        .collect();
    for row in &mut a {
        for (c, s) in scales.iter().enumerate() {
            row[c] /= s;
        }
    }
    // Householder QR applied to (A | b).
    for c in 0..m {
        let norm = (c..n).map(|i| a[i][c] * a[i][c]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(SpectralError::IllConditioned {
                estimate: f64::INFINITY,
            });
        }
        let alpha = if a[c][c] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (c..n).map(|i| a[i][c]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in c..m {
                let dot: f64 = (c..n).map(|i| v[i - c] * a[i][col]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in c..n {
                    a[i][col] -= f * v[i - c];
                }
            }
            let dot: f64 = (c..n).map(|i| v[i - c] * b[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in c..n {
                b[i] -= f * v[i - c];
            }
        }
        a[c][c] = alpha;
    }
    let diag: Vec<f64> = (0..m).map(|c| a[c][c].abs()).collect();
    let condition = diag.iter().cloned().fold(0.0, f64::max)
        / diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(SpectralError::IllConditioned {
            estimate: condition,
        });
    }
    let mut y = vec![0.0; m];
    for c in (0..m).rev() {
        let mut acc = b[c];
        for col in c + 1..m {
            acc -= a[c][col] * y[col];
        }
        y[c] = acc / a[c][c];
    }
    let coefficients = y.iter().zip(&scales).map(|(v, s)| v / s).collect();
    Ok((coefficients, condition))
}

/// Extracts the coefficients of `sum_m c_m t^(p_m)` from samples on a
/// geometric grid. Powers must be strictly ascending.
pub fn extract_asymptotics(
    samples: &[(f64, f64)],
    powers: &[f64],
    method: FitMethod,
) -> Result<AsymptoticFit, SpectralError> {
    let need = powers.len() + RICHARDSON_LEVELS + 1;
    if samples.len() < need {
        return Err(SpectralError::NotEnoughSamples {
            have: samples.len(),
            need,
        });
    }
    if powers.is_empty() || powers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectralError::BadPowers);
    }
    for &(t, _) in samples {
        check_time(t)?;
    }
    let (coefficients, condition_estimate) = match method {
        FitMethod::Peeling => (peel(samples, powers), None),
        FitMethod::LeastSquares => {
            let (c, cond) = least_squares(samples, powers)?;
            (c, Some(cond))
        }
    };
    let mut sq = 0.0;
    for &(t, y) in samples {
        let fit: f64 = coefficients
            .iter()
            .zip(powers)
            .map(|(c, p)| c * t.powf(*p))
            .sum();
        sq += (y - fit) * (y - fit);
    }
    Ok(AsymptoticFit {
        powers: powers.to_vec(),
        coefficients,
        residual_rms: (sq / samples.len() as f64).sqrt(),
        condition_estimate,
    })
}

/// Deviation relative to the expected scale, falling back to absolute
/// deviation when the expectation is below unit size.
pub fn relative_deviation(computed: f64, expected: f64) -> f64 {
    (computed - expected).abs() / expected.abs().max(1.0)
}

/// One extracted-vs-symbolic comparison row.
#[derive(Debug, Clone)]
pub struct BetaRow {
    pub phi_label: String,
    pub k: u64,
    pub symbolic: PiCoefficient,
    pub extracted: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Samples of `mass - H_phi(t)` (the pure expansion tail) over the default
/// grid; also the raw material for external plotting dumps.
pub fn content_deficit_samples(
    phi: &Poly,
    precision: u32,
) -> Result<Vec<(f64, f64)>, SpectralError> {
    let length = <Rational as One>::one();
    let mass = phi.integrate(&length).to_f64().unwrap();
    default_time_grid()
        .par_iter()
        .map(|&t| Ok((t, mass - heat_content_interval(phi, &length, t, precision)?)))
        .collect()
}

/// Samples of `flow(t) - 1/sqrt(pi t)` over the default grid.
pub fn flow_deficit_samples(
    model: &EigenSeriesModel,
    precision: u32,
) -> Result<Vec<(f64, f64)>, SpectralError> {
    default_time_grid()
        .par_iter()
        .map(|&t| {
            let flow = model.heat_flow(t, precision)?;
            Ok((t, flow - 1.0 / (std::f64::consts::PI * t).sqrt()))
        })
        .collect()
}

/// Extraction of `beta_1..beta_4` for one interval test polynomial,
/// compared against the exact symbolic values.
pub fn interval_beta_cross_check(
    phi: &Poly,
    phi_label: &str,
    precision: u32,
    weights: &mut ScalarWeights,
) -> Result<Vec<BetaRow>, SpectralError> {
    let length = <Rational as One>::one();
    let samples = content_deficit_samples(phi, precision)?;
    let fit = extract_asymptotics(&samples, &[0.5, 1.0, 1.5, 2.0], FitMethod::Peeling)?;
    let mut rows = Vec::new();
    for k in 1..=4u64 {
        let symbolic = symbolic_beta_interval(phi, &length, k, weights);
        let extracted = fit.coefficients[k as usize - 1];
        let abs_deviation = (extracted - symbolic.to_f64()).abs();
        let rel_deviation = relative_deviation(extracted, symbolic.to_f64());
        let tolerance = if k <= 3 { 1e-3 } else { 1e-2 };
        rows.push(BetaRow {
            phi_label: phi_label.to_string(),
            k,
            symbolic,
            extracted,
            abs_deviation,
            rel_deviation,
            tolerance,
            pass: rel_deviation <= tolerance,
        });
    }
    Ok(rows)
}

/// One flow-expansion constant-coefficient comparison row.
#[derive(Debug, Clone)]
pub struct FlowConstRow {
    pub model: String,
    pub expected: f64,
    pub extracted: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Extracts the constant coefficient of `flow(t) - 1/sqrt(pi t)` and
/// compares it with `expected` (absolute tolerance).
pub fn flow_constant_cross_check(
    model: &EigenSeriesModel,
    label: &str,
    expected: f64,
    tolerance: f64,
    precision: u32,
) -> Result<FlowConstRow, SpectralError> {
    let samples = flow_deficit_samples(model, precision)?;
    let fit = extract_asymptotics(&samples, &[0.0, 0.5, 1.0, 1.5, 2.0], FitMethod::Peeling)?;
    let extracted = fit.coefficients[0];
    let abs_deviation = (extracted - expected).abs();
    Ok(FlowConstRow {
        model: label.to_string(),
        expected,
        extracted,
        abs_deviation,
        rel_deviation: relative_deviation(extracted, expected),
        tolerance,
        pass: abs_deviation <= tolerance,
    })
}

/// Leading-term check: the `t -> 0` limit of `sqrt(t) * flow(t)` must be
/// `1/sqrt(pi)` for every model.
#[derive(Debug, Clone)]
pub struct LeadingRow {
    pub model: String,
    pub value: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// Extracts the limit of `sqrt(t) * flow(t)` over the default grid. A raw
/// evaluation at any fixed small time carries the next-order correction
/// `|B_2| sqrt(t)`, which dwarfs the 1e-6 target whenever `B_2` is nonzero,
/// so the limit is taken by the same peeling extrapolation used everywhere
/// else.
pub fn leading_flow_check(
    model: &EigenSeriesModel,
    label: &str,
    precision: u32,
) -> Result<LeadingRow, SpectralError> {
    let grid = default_time_grid();
    let samples: Result<Vec<(f64, f64)>, SpectralError> = grid
        .par_iter()
        .map(|&t| Ok((t, model.heat_flow(t, precision)? * t.sqrt())))
        .collect();
    let fit = extract_asymptotics(&samples?, &[0.0, 0.5, 1.0, 1.5, 2.0], FitMethod::Peeling)?;
    let value = fit.coefficients[0];
    let target = 1.0 / std::f64::consts::PI.sqrt();
    let deviation = (value - target).abs();
    Ok(LeadingRow {
        model: label.to_string(),
        value,
        deviation,
        pass: deviation <= 1e-6,
    })
}

/// The three interval test polynomials used throughout the cross checks.
pub fn standard_test_polynomials() -> Vec<(String, Poly)> {
    vec![
        ("x(1-x)".to_string(), Poly::from_i64(&[0, 1, -1])),
        ("x^2(1-x)^2".to_string(), Poly::from_i64(&[0, 0, 1, -2, 1])),
        ("x(1-x)(1-2x)".to_string(), Poly::from_i64(&[0, 1, -3, 2])),
    ]
}

/// Full spectral cross-check: interval beta extraction for the three test
/// polynomials, ball/cap constant flow coefficients against both the
/// closed-form values and the jet-pipeline invariants, the descent identity,
/// and the universal leading flow term.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub beta_rows: Vec<BetaRow>,
    pub flow_rows: Vec<FlowConstRow>,
    pub leading_rows: Vec<LeadingRow>,
    pub down_two_rows: Vec<(String, Vec<DownTwoRow>)>,
}

impl SpectralReport {
    pub fn all_pass(&self) -> bool {
        self.beta_rows.iter().all(|r| r.pass)
            && self.flow_rows.iter().all(|r| r.pass)
            && self.leading_rows.iter().all(|r| r.pass)
            && self
                .down_two_rows
                .iter()
                .all(|(_, rows)| rows.iter().all(|r| r.pass))
    }
}

pub fn standard_cross_check(
    precision: u32,
    weights: &mut ScalarWeights,
    cache: &mut SchemeCache,
) -> Result<SpectralReport, SpectralError> {
    let mut beta_rows = Vec::new();
    let mut down_two_rows = Vec::new();
    for (label, phi) in standard_test_polynomials() {
        beta_rows.extend(interval_beta_cross_check(&phi, &label, precision, weights)?);
        let rows = verify_down_two(&phi, &<Rational as One>::one(), 4, weights)?;
        down_two_rows.push((label, rows));
    }

    let mut flow_rows = Vec::new();
    for radius in [1.0f64, 2.0] {
        let model = EigenSeriesModel::Ball3 { radius };
        flow_rows.push(flow_constant_cross_check(
            &model,
            &format!("ball3 R={radius}"),
            -1.0 / radius,
            1e-6,
            precision,
        )?);
    }
    let caps = [
        ("cap3 theta0=pi/4", std::f64::consts::FRAC_PI_4),
        ("cap3 theta0=pi/2", std::f64::consts::FRAC_PI_2),
        ("cap3 theta0=2pi/3", 2.0 * std::f64::consts::FRAC_PI_3),
    ];
    for (label, theta0) in caps {
        let model = EigenSeriesModel::Cap3 { theta0 };
        let expected = -theta0.cos() / theta0.sin();
        flow_rows.push(flow_constant_cross_check(
            &model, label, expected, 1e-2, precision,
        )?);
        // Same coefficient against the jet pipeline's B_2.
        let geometry = RadialGeometry::SphericalCap { dim: 3, theta0 };
        let b2 = compute_b(2, &geometry, cache)?.to_f64();
        flow_rows.push(flow_constant_cross_check(
            &model,
            &format!("{label} vs jets"),
            b2,
            1e-2,
            precision,
        )?);
    }

    let leading_models = [
        (
            "interval".to_string(),
            EigenSeriesModel::Interval {
                length: <Rational as One>::one(),
            },
        ),
        (
            "ball3 R=1".to_string(),
            EigenSeriesModel::Ball3 { radius: 1.0 },
        ),
        (
            "cap3 theta0=pi/2".to_string(),
            EigenSeriesModel::Cap3 {
                theta0: std::f64::consts::FRAC_PI_2,
            },
        ),
    ];
    let leading_rows = leading_models
        .iter()
        .map(|(label, model)| leading_flow_check(model, label, precision))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SpectralReport {
        beta_rows,
        flow_rows,
        leading_rows,
        down_two_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::rat;

    fn phi_x_1mx() -> Poly {
        Poly::from_i64(&[0, 1, -1])
    }

    #[test]
    fn heat_content_limits() {
        let one = <Rational as One>::one();
        // t -> 0: content approaches the mass 1/6.
        let h = heat_content_interval(&phi_x_1mx(), &one, 1e-8, 30).unwrap();
        assert!((h - 1.0 / 6.0).abs() < 1e-3, "h={h}");
        // small-t slope: H ~ 1/6 - 2t (beta_1 = 0, beta_2 = 2).
        let t = 1e-5;
        let h = heat_content_interval(&phi_x_1mx(), &one, t, 30).unwrap();
        let slope = (1.0 / 6.0 - h) / t;
        assert!((slope - 2.0).abs() < 2e-2, "slope={slope}");
        assert!(heat_content_interval(&phi_x_1mx(), &one, 0.0, 30).is_err());
    }

    #[test]
    fn unit_content_series_is_classical() {
        // phi = 1 on [0,1]: H(t) = sum over odd j of 8/(j pi)^2 e^{-j^2 pi^2 t}.
        let one = <Rational as One>::one();
        let t = 3e-3;
        let via_poly = heat_content_interval(&Poly::one(), &one, t, 30).unwrap();
        let model = EigenSeriesModel::Interval { length: one };
        let via_model = model.unit_heat_content(t, 30).unwrap();
        assert!((via_poly - via_model).abs() < 1e-14);
        let mut direct = 0.0;
        for j in (1..200u64).step_by(2) {
            let jp = j as f64 * std::f64::consts::PI;
            direct += 8.0 / (jp * jp) * (-jp * jp * t).exp();
        }
        assert!((via_poly - direct).abs() < 1e-13);
    }

    /// Composite Simpson quadrature, independent of the closed forms.
    fn simpson_sine_integral(phi: &Poly, j: u64, panels: usize) -> f64 {
        let h = 1.0 / panels as f64;
        let f = |x: f64| phi.eval_f64(x) * (j as f64 * std::f64::consts::PI * x).sin();
        let mut acc = f(0.0) + f(1.0);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn sine_coefficients_match_quadrature() {
        let one = <Rational as One>::one();
        for phi in [phi_x_1mx(), Poly::from_i64(&[0, 0, 1, -2, 1])] {
            let closed = SineCoeffs::new(&phi, &one);
            for j in [1u64, 2, 5, 8] {
                let numeric = simpson_sine_integral(&phi, j, 4000);
                assert!(
                    (closed.eval(j) - numeric).abs() < 1e-10,
                    "j={j}: {} vs {numeric}",
                    closed.eval(j)
                );
            }
        }
    }

    #[test]
    fn symbolic_beta_examples() {
        let mut sw = ScalarWeights::new(6).unwrap();
        let one = <Rational as One>::one();
        let b2 = symbolic_beta_interval(&phi_x_1mx(), &one, 2, &mut sw);
        assert_eq!(b2, PiCoefficient::from_rational(rat(2, 1)));
        let b3 = symbolic_beta_interval(&phi_x_1mx(), &one, 3, &mut sw);
        assert_eq!(b3, PiCoefficient::term(rat(-16, 3), -1));
        // Constants have no boundary derivatives past k = 1.
        for k in 2..=6 {
            assert!(symbolic_beta_interval(&Poly::one(), &one, k, &mut sw).is_zero());
        }
    }

    /// Taylor jet of `phi` in the inward distance variable based at one of
    /// the two endpoints of `[0, L]`.
    fn endpoint_jet(
        phi: &Poly,
        length: &Rational,
        at_right: bool,
        order: usize,
    ) -> crate::radialgeom::Jet<PiCoefficient> {
        let base = if at_right {
            length.clone()
        } else {
            <Rational as Zero>::zero()
        };
        let coeffs = (0..=order)
            .map(|m| {
                let mut value = phi.derivative_n(m).eval(&base)
                    / Rational::from_integer(crate::coeffring::factorial(m as u64));
                if at_right && m % 2 == 1 {
                    value = -value;
                }
                PiCoefficient::from_rational(value)
            })
            .collect();
        crate::radialgeom::Jet::new(coeffs)
    }

    /// Independent route for the boundary coefficients: apply the operator
    /// itself to the endpoint jets (with vanishing mean curvature) and sum
    /// the two boundary values; must reproduce the weight formula exactly.
    #[test]
    fn symbolic_beta_matches_direct_operator_action() {
        use crate::radialgeom::{apply_radial_operator, Jet};
        let mut sw = ScalarWeights::new(6).unwrap();
        let mut cache = crate::schemes::SchemeCache::new();
        let one = <Rational as One>::one();
        for (label, phi) in standard_test_polynomials() {
            for k in 1..=6u64 {
                let d = cache.compute_d(k);
                let order = k as usize + 3;
                let eta = Jet::constant(PiCoefficient::zero(), order);
                let left = endpoint_jet(&phi, &one, false, order);
                let right = endpoint_jet(&phi, &one, true, order);
                let direct = apply_radial_operator(&d, &left, &eta)
                    .unwrap()
                    .eval0()
                    .add(apply_radial_operator(&d, &right, &eta).unwrap().eval0());
                let formula = symbolic_beta_interval(&phi, &one, k, &mut sw);
                assert_eq!(direct, formula, "{label}, k={k}");
            }
        }
    }

    #[test]
    fn down_two_identity() {
        let mut sw = ScalarWeights::new(8).unwrap();
        let one = <Rational as One>::one();
        for (label, phi) in standard_test_polynomials() {
            let rows = verify_down_two(&phi, &one, 4, &mut sw).unwrap();
            assert!(rows.iter().all(|r| r.pass), "{label}");
        }
        // beta_3(x(1-x)) both routes equal -16/(3 sqrt(pi)).
        let rows = verify_down_two(&phi_x_1mx(), &one, 1, &mut sw).unwrap();
        assert_eq!(rows[0].lhs, PiCoefficient::term(rat(-16, 3), -1));
        // Hypothesis enforcement.
        assert!(verify_down_two(&Poly::one(), &one, 2, &mut sw).is_err());
    }

    #[test]
    fn synthetic_extraction_recovers_exact_basis() {
        let samples: Vec<(f64, f64)> = default_time_grid()
            .into_iter()
            .map(|t| (t, 3.0 * t.sqrt() - 5.0 * t))
            .collect();
        for method in [FitMethod::Peeling, FitMethod::LeastSquares] {
            let fit = extract_asymptotics(&samples, &[0.5, 1.0], method).unwrap();
            assert!((fit.coefficients[0] - 3.0).abs() < 1e-10, "{method:?}");
            assert!((fit.coefficients[1] + 5.0).abs() < 1e-10, "{method:?}");
        }
    }

    #[test]
    fn extraction_input_validation() {
        let samples: Vec<(f64, f64)> = default_time_grid().into_iter().map(|t| (t, t)).collect();
        assert!(matches!(
            extract_asymptotics(&samples[..4], &[0.5], FitMethod::Peeling),
            Err(SpectralError::NotEnoughSamples { .. })
        ));
        assert!(matches!(
            extract_asymptotics(&samples, &[1.0, 0.5], FitMethod::Peeling),
            Err(SpectralError::BadPowers)
        ));
        // A nearly repeated power makes the design singular.
        assert!(matches!(
            extract_asymptotics(&samples, &[0.5, 0.5 + 1e-15], FitMethod::LeastSquares),
            Err(SpectralError::IllConditioned { .. })
        ));
    }

    #[test]
    fn ball3_flow_closed_form_value() {
        let flow = heat_flow_ball3(1.0, 0.01, 30).unwrap();
        let closed = 1.0 / (0.01 * std::f64::consts::PI).sqrt() - 1.0;
        assert!((flow - closed).abs() < 1e-12, "{flow} vs {closed}");
        assert!((flow - 4.641895835477563).abs() < 1e-9);
        // Decay at large time.
        assert!(heat_flow_ball3(1.0, 50.0, 30).unwrap() < 1e-200);
        // Scaling law: flow(2R, 4t) = flow(R, t) / 2.
        let a = heat_flow_ball3(2.0, 0.04, 30).unwrap();
        let b = heat_flow_ball3(1.0, 0.01, 30).unwrap() / 2.0;
        assert!((a - b).abs() < 1e-14 * b.abs());
        assert!(heat_flow_ball3(-1.0, 0.01, 30).is_err());
        assert!(heat_flow_ball3(1.0, -0.01, 30).is_err());
    }

    #[test]
    fn cap3_flow_sanity() {
        assert!(heat_flow_cap3(3.5, 0.01, 30).is_err());
        // Hemisphere: constant term vanishes, so flow ~ leading term.
        let t = 1e-4;
        let flow = heat_flow_cap3(std::f64::consts::FRAC_PI_2, t, 30).unwrap();
        let leading = 1.0 / (std::f64::consts::PI * t).sqrt();
        assert!((flow - leading).abs() < 2e-2 * leading.abs().max(1.0));
        // Quarter cap: flow - leading approaches -cot(pi/4) = -1.
        let flow = heat_flow_cap3(std::f64::consts::FRAC_PI_4, 1e-5, 30).unwrap();
        let leading = 1.0 / (std::f64::consts::PI * 1e-5).sqrt();
        assert!((flow - leading + 1.0).abs() < 1e-2);
    }

    #[test]
    fn cap3_content_approaches_volume() {
        let theta0 = 2.0 * std::f64::consts::FRAC_PI_3;
        let model = EigenSeriesModel::Cap3 { theta0 };
        let content = model.unit_heat_content(1e-8, 30).unwrap();
        let volume =
            2.0 * std::f64::consts::PI * theta0 - std::f64::consts::PI * (2.0 * theta0).sin();
        assert!((content - volume).abs() < 5e-3, "{content} vs {volume}");
    }

    #[test]
    fn series_truncation_is_stable() {
        // Raising the precision (deeper truncation) must not move the value
        // beyond the advertised tail bound of the looser run.
        let model = EigenSeriesModel::Ball3 { radius: 1.0 };
        for &t in &[1e-2, 1e-5, 1e-8] {
            let loose = model.heat_flow(t, 12).unwrap();
            let tight = model.heat_flow(t, 30).unwrap();
            assert!((loose - tight).abs() <= 1e-12, "t={t}");
        }
    }

    #[test]
    fn interval_flow_leading_term() {
        let one = <Rational as One>::one();
        let t = 1e-6;
        let flow = heat_flow_interval(&one, t, 30).unwrap();
        let target = 1.0 / (std::f64::consts::PI * t).sqrt();
        assert!((flow * t.sqrt() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-6);
        assert!((flow - target).abs() < 1e-3 * target);
    }
}
