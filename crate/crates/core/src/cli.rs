//! Command-line front end: emit the operator table, run the verification
//! suites, compute geometry flow coefficients, and run the spectral
//! cross-checks. Output is deterministic byte-for-byte for a fixed
//! configuration: no timestamps, no map-iteration order, and parallel work
//! is collected in input order.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeffring::{PiCoefficient, Rational};
use crate::combinatorics::{
    self, bareiss_det, closed_alpha, closed_beta_nm1, det_poly_check, hankel_transform_product,
    hankel_window_det, laplace_row_check, matrix_a, matrix_a_prime, ortho_eval_at4, ortho_poly,
    recurrence_alpha, recurrence_beta, tu_sum_check, vectorial_products, TuTable,
};
use crate::ncalgebra::reference;
use crate::radialgeom::{compute_b, flow_asymptotics, BValue, RadialGeometry};
use crate::report::{self, CheckLine, ReportFormat};
use crate::schemes::{
    closed_weight_alpha_bar, closed_weight_d, closed_weight_d_bar, closed_weight_z_bar,
    ScalarWeights, SchemeCache,
};
use crate::spectral::{self, SpectralReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid geometry spec `{spec}`: {message}")]
    Geometry { spec: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Table(#[from] combinatorics::TableError),
    #[error(transparent)]
    Scheme(#[from] crate::schemes::SchemeError),
    #[error(transparent)]
    Algebra(#[from] crate::ncalgebra::AlgebraError),
    #[error(transparent)]
    Radial(#[from] crate::radialgeom::RadialError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Aligned, human-readable text.
    Table,
    /// Line-delimited JSON records.
    Records,
}

impl From<OutputFormat> for ReportFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Table => ReportFormat::Table,
            OutputFormat::Records => ReportFormat::Records,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hcops",
    version,
    about = "Exact heat-content operators, identity suites and spectral oracles"
)]
pub struct Cli {
    /// Report output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// Target significant digits for series evaluation.
    #[arg(long, global = true, env = "HCOPS_PRECISION", default_value_t = 30)]
    pub precision: u32,

    /// Worker threads for independent checks (0 uses the rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the heat-content operators D_1..D_max-order in canonical form.
    EmitOperators {
        #[arg(long, default_value_t = 6)]
        max_order: u64,
    },
    /// Verify the weight closed forms: scalar route to --max-order, full
    /// operator route (including the table rows and bar-scheme agreement)
    /// to --operator-depth. The alpha/Z weights are checked against the
    /// closed forms through the integer-table route up to --max-alpha and
    /// additionally rebuilt as whole operators up to --alpha-operator-depth
    /// (the depth the full operator identities already exercise; raising it
    /// grows the operators exponentially).
    VerifyWeights {
        #[arg(long, default_value_t = 25)]
        max_order: u64,
        #[arg(long, default_value_t = 12)]
        operator_depth: u64,
        #[arg(long, default_value_t = 10)]
        max_alpha: u64,
        #[arg(long, default_value_t = 6)]
        alpha_operator_depth: u64,
    },
    /// Verify the integer table identities: boundary values, weighted sums,
    /// the two matrix identities, and the operator cross-link.
    VerifyTu {
        #[arg(long, default_value_t = 30)]
        max_n: u64,
        #[arg(long, default_value_t = 20)]
        vectorial_n: u64,
        #[arg(long, default_value_t = 8)]
        cross_n: u64,
    },
    /// Verify Hankel determinants, the cofactor-row identity, and the
    /// Hankel-transform product formula.
    VerifyHankel {
        #[arg(long, default_value_t = 20)]
        max_n: u64,
        #[arg(long, default_value_t = 10)]
        laplace_n: u64,
        #[arg(long, default_value_t = 8)]
        transform_k: u64,
        #[arg(long, default_value_t = 8)]
        transform_n: u64,
    },
    /// Verify the orthogonal polynomials: evaluations at 4, the
    /// quotient-difference recurrence data, and the determinant route.
    VerifyOrtho {
        #[arg(long, default_value_t = 40)]
        max_n: u64,
        #[arg(long, default_value_t = 8)]
        det_n: u64,
    },
    /// Boundary flow expansion coefficients for a model geometry
    /// (spec: interval | ball:DIM:RADIUS | cap:DIM:ANGLE | hyperbolic:DIM:RADIUS).
    FlowCoeffs {
        #[arg(long)]
        geometry: String,
        #[arg(long, default_value_t = 8)]
        max_power: u64,
    },
    /// Run the spectral oracles against the symbolic pipeline.
    SpectralCheck {
        /// Write the raw (t, value) sample tables used by the fits into
        /// this directory, one plain-text file per series.
        #[arg(long)]
        dump_samples: Option<std::path::PathBuf>,
    },
    /// Run every verification suite at its default depth.
    VerifyAll,
}

/// Parses `p/q`, an integer, or a decimal string into an exact rational.
pub fn parse_exact_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.trim_start().starts_with('-');
        let int: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        let frac: BigInt = frac_part.parse().ok()?;
        let den = BigInt::from(10).pow(frac_part.len() as u32);
        let mut value =
            Rational::new(int.magnitude().clone().into(), BigInt::one()) + Rational::new(frac, den);
        if negative {
            value = -value;
        }
        return Some(value);
    }
    let int: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(int))
}

/// Parses an angle: `pi`, `pi/4`, `2pi/3`, or a plain rational/decimal
/// value in radians.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(idx) = s.find("pi") {
        let coeff_str = &s[..idx];
        let coeff = if coeff_str.is_empty() {
            1.0
        } else {
            coeff_str.parse::<f64>().ok()?
        };
        let rest = &s[idx + 2..];
        let den = if rest.is_empty() {
            1.0
        } else {
            rest.strip_prefix('/')?.parse::<f64>().ok()?
        };
        Some(coeff * std::f64::consts::PI / den)
    } else {
        parse_exact_rational(s).and_then(|r| num_traits::ToPrimitive::to_f64(&r))
    }
}

/// Parses the geometry mini-grammar `kind:dimension:radius`.
pub fn parse_geometry(spec: &str) -> Result<RadialGeometry, CliError> {
    let err = |message: &str| CliError::Geometry {
        spec: spec.to_string(),
        message: message.to_string(),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let geometry = match parts.as_slice() {
        ["interval"] => RadialGeometry::Interval,
        ["ball", dim, radius] => RadialGeometry::EuclideanBall {
            dim: dim
                .parse()
                .map_err(|_| err("dimension must be an integer"))?,
            radius: parse_exact_rational(radius)
                .ok_or_else(|| err("radius must be rational or decimal"))?,
        },
        ["cap", dim, angle] => RadialGeometry::SphericalCap {
            dim: dim
                .parse()
                .map_err(|_| err("dimension must be an integer"))?,
            theta0: parse_angle(angle)
                .ok_or_else(|| err("angle must be a pi multiple, rational or decimal"))?,
        },
        ["hyperbolic", dim, radius] => RadialGeometry::HyperbolicBall {
            dim: dim
                .parse()
                .map_err(|_| err("dimension must be an integer"))?,
            radius: parse_angle(radius).ok_or_else(|| err("radius must be rational or decimal"))?,
        },
        _ => {
            return Err(err(
                "expected interval | ball:D:R | cap:D:A | hyperbolic:D:R",
            ))
        }
    };
    geometry.validate()?;
    Ok(geometry)
}

fn fmt_int_vec(v: &[BigInt]) -> String {
    let mut s = String::from("(");
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&x.to_string());
    }
    s.push(')');
    s
}

fn unit_last_vec(len: usize, last: i64) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); len];
    v[len - 1] = BigInt::from(last);
    v
}

/// The weight suite: closed forms against the scalar route everywhere, plus
/// the full operator route (table rows, bar consistency, purity) at the
/// shallower depth where whole operators stay small.
pub fn weight_suite(
    max_order: u64,
    operator_depth: u64,
    max_alpha: u64,
    alpha_operator_depth: u64,
) -> Result<Vec<CheckLine>, CliError> {
    let suite = "weights";
    let mut lines = Vec::new();
    let mut cache = SchemeCache::new();
    let mut sw = ScalarWeights::new((max_order / 2 + 2).max(max_alpha + 1))?;

    for (i, expected) in reference::d_table().iter().enumerate() {
        let k = i as u64 + 1;
        if k > operator_depth {
            break;
        }
        let computed = cache.compute_d(k);
        lines.push(CheckLine::equality(
            suite,
            format!("table D_{k}"),
            expected,
            &computed,
        ));
    }

    for k in 1..=max_order {
        lines.push(CheckLine::equality(
            suite,
            format!("w(D_{k}) scalar"),
            &closed_weight_d(k),
            &sw.weight_d(k),
        ));
        if k >= 2 {
            lines.push(CheckLine::equality(
                suite,
                format!("w(barD_{k}) scalar"),
                &closed_weight_d_bar(k).expect("k >= 2"),
                &sw.weight_d_bar(k)?,
            ));
        }
    }

    for k in 1..=operator_depth {
        let d = cache.compute_d(k);
        lines.push(CheckLine::equality(
            suite,
            format!("w(D_{k}) operator"),
            &closed_weight_d(k),
            &d.weight(),
        ));
        let expected_power = if k % 2 == 0 { 0i64 } else { -1 };
        let pure = d
            .terms()
            .all(|(_, c)| c.half_powers() == vec![expected_power]);
        lines.push(CheckLine::new(
            suite,
            format!("purity D_{k}"),
            format!("all powers {expected_power}"),
            if pure {
                "pure".to_string()
            } else {
                "mixed".to_string()
            },
            pure,
        ));
        if k >= 2 {
            let bar = d.bar_part()?;
            lines.push(CheckLine::equality(
                suite,
                format!("w(barD_{k}) operator"),
                &closed_weight_d_bar(k).expect("k >= 2"),
                &bar.weight(),
            ));
            lines.push(CheckLine::equality(
                suite,
                format!("bar-scheme D_{k}"),
                &bar,
                &cache.bar_d_via_recurrence(k)?,
            ));
        }
    }

    for n in 0..=max_alpha {
        let closed = closed_weight_alpha_bar(n);
        lines.push(CheckLine::equality(
            suite,
            format!("w(bar alpha_{n}) table-route"),
            &closed,
            &sw.weight_alpha_bar(n)?,
        ));
        if n <= alpha_operator_depth {
            let operator = cache
                .compute_alpha(n)
                .bar_part()?
                .weight()
                .as_rational()
                .expect("alpha weights are rational");
            lines.push(CheckLine::equality(
                suite,
                format!("w(bar alpha_{n}) operator"),
                &closed,
                &operator,
            ));
        }
    }
    for n in 2..=max_alpha + 1 {
        let closed = closed_weight_z_bar(n);
        lines.push(CheckLine::equality(
            suite,
            format!("w(bar Z_{n}) table-route"),
            &closed,
            &sw.weight_z_bar(n)?,
        ));
        if n <= alpha_operator_depth + 1 {
            let operator = cache
                .compute_z(n)
                .bar_part()?
                .weight()
                .as_rational()
                .expect("Z weights are rational");
            lines.push(CheckLine::equality(
                suite,
                format!("w(bar Z_{n}) operator"),
                &closed,
                &operator,
            ));
        }
    }
    Ok(lines)
}

/// The integer table suite.
pub fn tu_suite(max_n: u64, vectorial_n: u64, cross_n: u64) -> Result<Vec<CheckLine>, CliError> {
    let suite = "tu";
    let mut lines = Vec::new();
    let table = TuTable::build(max_n.max(vectorial_n).max(cross_n))?;

    for n in 1..=max_n {
        let sign = if n % 2 == 1 { 1 } else { -1 };
        let boundary_expected = format!(
            "T_nn=-1 U_n(n+1)=-1 T_n0={} U_n0={}",
            sign * 4 * n as i64,
            sign * 4 * (2 * n as i64 - 1)
        );
        let boundary_computed = format!(
            "T_nn={} U_n(n+1)={} T_n0={} U_n0={}",
            table.t(n as i64, n as i64),
            table.u(n as i64, n as i64 + 1),
            table.t(n as i64, 0),
            table.u(n as i64, 0)
        );
        let pass = table.t(n as i64, n as i64) == BigInt::from(-1)
            && table.u(n as i64, n as i64 + 1) == BigInt::from(-1)
            && table.t(n as i64, 0) == BigInt::from(sign * 4 * n as i64)
            && table.u(n as i64, 0) == BigInt::from(sign * 4 * (2 * n as i64 - 1));
        lines.push(CheckLine::new(
            suite,
            format!("boundary n={n}"),
            boundary_expected,
            boundary_computed,
            pass,
        ));
        let (st, su) = tu_sum_check(&table, n);
        lines.push(CheckLine::new(
            suite,
            format!("sum-T n={n}"),
            "1",
            st.to_string(),
            st == BigInt::one(),
        ));
        lines.push(CheckLine::new(
            suite,
            format!("sum-U n={n}"),
            "3",
            su.to_string(),
            su == BigInt::from(3),
        ));
    }

    // The products double as the table export: each line carries the full
    // row vector next to the matrix product.
    for n in 1..=vectorial_n {
        let (at, bu) = vectorial_products(&table, n);
        let expect_t = unit_last_vec(n as usize + 1, 1);
        let expect_u = unit_last_vec(n as usize + 1, 3);
        lines.push(CheckLine::new(
            suite,
            format!("vectorial-T n={n}"),
            fmt_int_vec(&expect_t),
            format!(
                "{} for T={}",
                fmt_int_vec(&at),
                fmt_int_vec(&table.t_vec(n))
            ),
            at == expect_t,
        ));
        lines.push(CheckLine::new(
            suite,
            format!("vectorial-U n={n}"),
            fmt_int_vec(&expect_u),
            format!(
                "{} for U={}",
                fmt_int_vec(&bu),
                fmt_int_vec(&table.u_vec(n))
            ),
            bu == expect_u,
        ));
    }

    let mut cache = SchemeCache::new();
    for n in 0..=cross_n as i64 {
        for j in 0..=cross_n as i64 {
            // Both routes to the rescaled operators must coincide.
            let direct = cache.compute_pq(n, j);
            let scaled = cache.pq_from_rs(n, j);
            lines.push(CheckLine::new(
                suite,
                format!("change-of-vars n={n} j={j}"),
                "P/Q match the rescaled R/S entries",
                if direct == scaled {
                    "equal"
                } else {
                    "different"
                }
                .to_string(),
                direct == scaled,
            ));
            if n == 0 && j == 0 {
                continue; // P_00 is a pure identity multiple: no bar split
            }
            let (p, q) = direct;
            let wp = p.bar_part()?.weight();
            let wq = q.bar_part()?.weight();
            let expected = format!("T={} U={}", table.t(n, j), table.u(n, j));
            let computed = format!("w(barP)={wp} w(barQ)={wq}");
            let pass = wp.as_rational() == Some(Rational::from_integer(table.t(n, j)))
                && wq.as_rational() == Some(Rational::from_integer(table.u(n, j)));
            lines.push(CheckLine::new(
                suite,
                format!("cross-link n={n} j={j}"),
                expected,
                computed,
                pass,
            ));
        }
    }
    Ok(lines)
}

/// The Hankel determinant suite.
pub fn hankel_suite(
    max_n: u64,
    laplace_n: u64,
    transform_k: u64,
    transform_n: u64,
) -> Vec<CheckLine> {
    use rayon::prelude::*;
    let suite = "hankel";
    // Dets at distinct n are independent; collect keeps input order, so the
    // report stays byte-stable regardless of completion order.
    let mut lines: Vec<CheckLine> = (1..=max_n)
        .into_par_iter()
        .flat_map(|n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            let det = bareiss_det(matrix_a(n));
            let line_a = CheckLine::new(
                suite,
                format!("det-A n={n}"),
                BigInt::from(sign).to_string(),
                det.to_string(),
                det == BigInt::from(sign),
            );
            let expected = BigInt::from(sign * (n as i64 + 1));
            let det = bareiss_det(matrix_a_prime(n));
            let line_b = CheckLine::new(
                suite,
                format!("det-A' n={n}"),
                expected.to_string(),
                det.to_string(),
                det == expected,
            );
            vec![line_a, line_b]
        })
        .collect();
    lines.par_extend((1..=laplace_n).into_par_iter().map(|n| {
        let value = laplace_row_check(n);
        CheckLine::new(
            suite,
            format!("cofactor-row n={n}"),
            "1",
            value.to_string(),
            value == BigInt::one(),
        )
    }));
    for n in 1..=transform_n {
        let d0 = hankel_window_det(0, n);
        lines.push(CheckLine::new(
            suite,
            format!("transform k=0 n={n}"),
            "1",
            d0.to_string(),
            d0 == BigInt::one(),
        ));
        let d1 = hankel_window_det(1, n);
        let expected = BigInt::from(2 * n + 1);
        lines.push(CheckLine::new(
            suite,
            format!("transform k=1 n={n}"),
            expected.to_string(),
            d1.to_string(),
            d1 == expected,
        ));
        for k in 2..=transform_k {
            let det = hankel_window_det(k, n);
            let product = hankel_transform_product(k, n);
            let pass = product.is_integer() && product.numer() == &det;
            lines.push(CheckLine::new(
                suite,
                format!("transform k={k} n={n}"),
                product.to_string(),
                det.to_string(),
                pass,
            ));
        }
    }
    lines
}

/// The orthogonal-polynomial suite.
pub fn ortho_suite(max_n: u64, det_n: u64) -> Vec<CheckLine> {
    let suite = "ortho";
    let mut lines = Vec::new();
    for n in 0..=max_n {
        for (tag, shifted) in [("t", false), ("t1", true)] {
            let poly = ortho_poly(n, shifted);
            let shape_ok = poly.is_monic() && poly.degree() == Some(n as usize);
            lines.push(CheckLine::new(
                suite,
                format!("monic-degree {tag} n={n}"),
                format!("monic, degree {n}"),
                format!(
                    "leading {}, degree {:?}",
                    poly.leading().cloned().unwrap_or_else(Rational::zero),
                    poly.degree()
                ),
                shape_ok,
            ));
        }
        let expected = Rational::one();
        let value = ortho_eval_at4(n, false);
        lines.push(CheckLine::new(
            suite,
            format!("eval4 t n={n}"),
            expected.to_string(),
            value.to_string(),
            value == expected,
        ));
        let expected = Rational::new(BigInt::from(n + 1), BigInt::from(2 * n + 1));
        let value = ortho_eval_at4(n, true);
        lines.push(CheckLine::new(
            suite,
            format!("eval4 t1 n={n}"),
            expected.to_string(),
            value.to_string(),
            value == expected,
        ));
    }
    for n in 2..=max_n.max(2) {
        for (tag, k) in [("plain", 0u8), ("shifted", 1)] {
            lines.push(CheckLine::equality(
                suite,
                format!("qd-alpha {tag} n={n}"),
                &closed_alpha(k, n),
                &recurrence_alpha(k, n),
            ));
            lines.push(CheckLine::equality(
                suite,
                format!("qd-beta {tag} n={n}"),
                &closed_beta_nm1(k, n),
                &recurrence_beta(k, n - 1),
            ));
        }
    }
    for n in 0..=det_n {
        for (tag, shifted) in [("plain", false), ("shifted", true)] {
            let pass = det_poly_check(n, shifted);
            lines.push(CheckLine::new(
                suite,
                format!("det-poly {tag} n={n}"),
                "determinant equals recurrence route",
                if pass { "equal" } else { "different" },
                pass,
            ));
        }
    }
    lines
}

/// Deterministic pseudo-random rational radii for the geometry suite
/// (splitmix64; fixed seed so output is byte-stable).
pub fn deterministic_radii(count: usize) -> Vec<Rational> {
    fn next(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut state = 0x5EED_0001_u64;
    (0..count)
        .map(|_| {
            let num = next(&mut state) % 37 + 1;
            let den = next(&mut state) % 19 + 1;
            Rational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect()
}

/// Whole-pipeline geometry suite: for euclidean 3-balls of rational radius
/// the flow expansion terminates after the constant term, exactly.
pub fn geometry_suite(max_k: u64) -> Result<Vec<CheckLine>, CliError> {
    let suite = "geometry";
    let mut lines = Vec::new();
    let mut cache = SchemeCache::new();
    for radius in deterministic_radii(3) {
        let geometry = RadialGeometry::EuclideanBall {
            dim: 3,
            radius: radius.clone(),
        };
        let b2 = compute_b(2, &geometry, &mut cache)?;
        let expected = BValue::Exact(PiCoefficient::from_rational(-radius.recip()));
        lines.push(CheckLine::new(
            suite,
            format!("B_2 ball:3:{radius}"),
            expected.to_string(),
            b2.to_string(),
            b2 == expected,
        ));
        for k in 3..=max_k {
            let b = compute_b(k, &geometry, &mut cache)?;
            let zero = BValue::Exact(PiCoefficient::zero());
            lines.push(CheckLine::new(
                suite,
                format!("B_{k} ball:3:{radius}"),
                "0",
                b.to_string(),
                b == zero,
            ));
        }
    }
    Ok(lines)
}

/// Converts a spectral cross-check report into check lines.
pub fn spectral_lines(report: &SpectralReport) -> Vec<CheckLine> {
    let suite = "spectral";
    let mut lines = Vec::new();
    for row in &report.beta_rows {
        lines.push(CheckLine::new(
            suite,
            format!("beta_{} {}", row.k, row.phi_label),
            row.symbolic.to_string(),
            format!(
                "{:.9e} (abs {:.2e}, rel {:.2e}, tol {:.0e})",
                row.extracted, row.abs_deviation, row.rel_deviation, row.tolerance
            ),
            row.pass,
        ));
    }
    for row in &report.flow_rows {
        lines.push(CheckLine::new(
            suite,
            format!("flow-const {}", row.model),
            format!("{:.9e}", row.expected),
            format!(
                "{:.9e} (abs {:.2e}, rel {:.2e}, tol {:.0e})",
                row.extracted, row.abs_deviation, row.rel_deviation, row.tolerance
            ),
            row.pass,
        ));
    }
    for row in &report.leading_rows {
        lines.push(CheckLine::new(
            suite,
            format!("flow-leading {}", row.model),
            "1/sqrt(pi)",
            format!("{:.9e} (dev {:.2e})", row.value, row.deviation),
            row.pass,
        ));
    }
    for (label, rows) in &report.down_two_rows {
        for row in rows {
            lines.push(CheckLine::new(
                suite,
                format!("descent j={} {}", row.j, label),
                row.lhs.to_string(),
                row.rhs.to_string(),
                row.pass,
            ));
        }
    }
    lines
}

/// Writes the raw sample tables behind the spectral fits as plain text
/// (`# label` header, then one `t value` pair per line), for external
/// plotting.
fn dump_sample_tables(dir: &std::path::Path, precision: u32) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut tables: Vec<(String, String, Vec<(f64, f64)>)> = Vec::new();
    for (i, (label, phi)) in spectral::standard_test_polynomials().iter().enumerate() {
        tables.push((
            format!("content_phi{}.txt", i + 1),
            format!("mass - heat content, phi = {label}"),
            spectral::content_deficit_samples(phi, precision)?,
        ));
    }
    let models: Vec<(String, String, spectral::EigenSeriesModel)> = vec![
        (
            "flow_ball3_r1.txt".into(),
            "flow - leading term, ball3 R=1".into(),
            spectral::EigenSeriesModel::Ball3 { radius: 1.0 },
        ),
        (
            "flow_ball3_r2.txt".into(),
            "flow - leading term, ball3 R=2".into(),
            spectral::EigenSeriesModel::Ball3 { radius: 2.0 },
        ),
        (
            "flow_cap3_pi4.txt".into(),
            "flow - leading term, cap3 theta0=pi/4".into(),
            spectral::EigenSeriesModel::Cap3 {
                theta0: std::f64::consts::FRAC_PI_4,
            },
        ),
        (
            "flow_cap3_pi2.txt".into(),
            "flow - leading term, cap3 theta0=pi/2".into(),
            spectral::EigenSeriesModel::Cap3 {
                theta0: std::f64::consts::FRAC_PI_2,
            },
        ),
        (
            "flow_cap3_2pi3.txt".into(),
            "flow - leading term, cap3 theta0=2pi/3".into(),
            spectral::EigenSeriesModel::Cap3 {
                theta0: 2.0 * std::f64::consts::FRAC_PI_3,
            },
        ),
    ];
    for (file, label, model) in models {
        tables.push((
            file,
            label,
            spectral::flow_deficit_samples(&model, precision)?,
        ));
    }
    for (file, label, samples) in tables {
        let mut text = format!("# {label}\n");
        for (t, v) in samples {
            text.push_str(&format!("{t:.17e} {v:.17e}\n"));
        }
        std::fs::write(dir.join(file), text)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OperatorRecord {
    operator: String,
    terms: Vec<crate::ncalgebra::OperatorTermRecord>,
}

fn emit_operators(
    max_order: u64,
    format: ReportFormat,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let mut cache = SchemeCache::new();
    for k in 1..=max_order {
        let d = cache.compute_d(k);
        match format {
            ReportFormat::Table => writeln!(out, "D_{k} = {d}")?,
            ReportFormat::Records => {
                let record = OperatorRecord {
                    operator: format!("D_{k}"),
                    terms: d.to_records(),
                };
                serde_json::to_writer(&mut *out, &record)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn flow_value_text(v: &BValue, precision: u32) -> String {
    match v {
        BValue::Exact(c) => c.to_string(),
        BValue::Approx(x) => format!("{:.*e}", precision.min(16) as usize, x),
    }
}

fn emit_flow_coeffs(
    spec: &str,
    max_power: u64,
    precision: u32,
    format: ReportFormat,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let geometry = parse_geometry(spec)?;
    let mut cache = SchemeCache::new();
    let flow = flow_asymptotics(&geometry, max_power, &mut cache)?;
    match format {
        ReportFormat::Table => {
            writeln!(out, "geometry {geometry}")?;
            writeln!(out, "t^(-1/2): {}", flow.leading)?;
            for (k, c) in flow.coefficients.iter().enumerate() {
                writeln!(out, "t^({k}/2): {}", flow_value_text(c, precision))?;
            }
        }
        ReportFormat::Records => {
            #[derive(Serialize)]
            struct FlowRecord {
                geometry: String,
                power_num: i64,
                value: String,
                exact: bool,
            }
            let mut records = vec![FlowRecord {
                geometry: geometry.to_string(),
                power_num: -1,
                value: flow.leading.to_string(),
                exact: true,
            }];
            for (k, c) in flow.coefficients.iter().enumerate() {
                records.push(FlowRecord {
                    geometry: geometry.to_string(),
                    power_num: k as i64,
                    value: flow_value_text(c, precision),
                    exact: c.as_exact().is_some(),
                });
            }
            for r in records {
                serde_json::to_writer(&mut *out, &r)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn render_report(
    lines: &[CheckLine],
    format: ReportFormat,
    out: &mut impl Write,
) -> Result<bool, CliError> {
    report::render(lines, format, out)?;
    if format == ReportFormat::Table {
        report::render_summary(lines, out)?;
    }
    let pass = report::all_pass(lines);
    if let Some(failure) = report::first_failure(lines) {
        eprintln!(
            "first failure: suite={} check={} expected={} computed={}",
            failure.suite, failure.check, failure.expected, failure.computed
        );
    }
    Ok(pass)
}

/// Executes the requested command, writing the report to `out`. Returns
/// whether every check passed (commands without checks return true).
pub fn run(cli: &Cli, out: &mut impl Write) -> Result<bool, CliError> {
    let format: ReportFormat = cli.format.into();
    match &cli.command {
        Command::EmitOperators { max_order } => {
            emit_operators(*max_order, format, out)?;
            Ok(true)
        }
        Command::VerifyWeights {
            max_order,
            operator_depth,
            max_alpha,
            alpha_operator_depth,
        } => {
            let lines = weight_suite(
                *max_order,
                *operator_depth,
                *max_alpha,
                *alpha_operator_depth,
            )?;
            render_report(&lines, format, out)
        }
        Command::VerifyTu {
            max_n,
            vectorial_n,
            cross_n,
        } => {
            let lines = tu_suite(*max_n, *vectorial_n, *cross_n)?;
            render_report(&lines, format, out)
        }
        Command::VerifyHankel {
            max_n,
            laplace_n,
            transform_k,
            transform_n,
        } => {
            let lines = hankel_suite(*max_n, *laplace_n, *transform_k, *transform_n);
            render_report(&lines, format, out)
        }
        Command::VerifyOrtho { max_n, det_n } => {
            let lines = ortho_suite(*max_n, *det_n);
            render_report(&lines, format, out)
        }
        Command::FlowCoeffs {
            geometry,
            max_power,
        } => {
            emit_flow_coeffs(geometry, *max_power, cli.precision, format, out)?;
            Ok(true)
        }
        Command::SpectralCheck { dump_samples } => {
            if let Some(dir) = dump_samples {
                dump_sample_tables(dir, cli.precision)?;
            }
            let mut cache = SchemeCache::new();
            let mut sw = ScalarWeights::new(8)?;
            let report = spectral::standard_cross_check(cli.precision, &mut sw, &mut cache)?;
            let lines = spectral_lines(&report);
            render_report(&lines, format, out)
        }
        Command::VerifyAll => {
            let mut lines = weight_suite(25, 12, 10, 6)?;
            lines.extend(tu_suite(30, 20, 8)?);
            lines.extend(hankel_suite(20, 10, 8, 8));
            lines.extend(ortho_suite(40, 8));
            lines.extend(geometry_suite(10)?);
            let mut cache = SchemeCache::new();
            let mut sw = ScalarWeights::new(8)?;
            let report = spectral::standard_cross_check(cli.precision, &mut sw, &mut cache)?;
            lines.extend(spectral_lines(&report));
            render_report(&lines, format, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::rat;

    #[test]
    fn rational_and_angle_parsing() {
        assert_eq!(parse_exact_rational("7/3"), Some(rat(7, 3)));
        assert_eq!(parse_exact_rational("4"), Some(rat(4, 1)));
        assert_eq!(parse_exact_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_exact_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_exact_rational("1/0"), None);
        assert_eq!(parse_exact_rational("x"), None);

        assert!((parse_angle("pi/4").unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert!((parse_angle("0.5").unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn geometry_specs() {
        assert_eq!(
            parse_geometry("interval").unwrap(),
            RadialGeometry::Interval
        );
        assert_eq!(
            parse_geometry("ball:3:1").unwrap(),
            RadialGeometry::EuclideanBall {
                dim: 3,
                radius: rat(1, 1)
            }
        );
        assert!(parse_geometry("ball:3:0").is_err());
        assert!(parse_geometry("cap:3:pi").is_err()); // boundary angle excluded
        assert!(parse_geometry("torus:3:1").is_err());
    }

    #[test]
    fn emit_operators_is_byte_stable_and_correct() {
        let cli = Cli {
            format: OutputFormat::Table,
            precision: 30,
            jobs: 0,
            command: Command::EmitOperators { max_order: 6 },
        };
        let mut first = Vec::new();
        run(&cli, &mut first).unwrap();
        let mut second = Vec::new();
        run(&cli, &mut second).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.contains("D_2 = 1/2 * [N]"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn small_suites_pass() {
        let lines = tu_suite(4, 3, 2).unwrap();
        assert!(report::all_pass(&lines));
        let lines = hankel_suite(4, 3, 3, 3);
        assert!(report::all_pass(&lines));
        let lines = ortho_suite(6, 3);
        assert!(report::all_pass(&lines));
        let lines = weight_suite(8, 6, 3, 3).unwrap();
        assert!(report::all_pass(&lines));
        let lines = geometry_suite(5).unwrap();
        assert!(report::all_pass(&lines));
    }
}
