//! Exact integer and rational verification kernels: the `T/U` tables, Hankel
//! matrices with fraction-free determinants, orthogonal polynomials via
//! three-term recurrences and via polynomial determinants, the
//! quotient-difference coefficients, Newton's identities, and the
//! shape-operator trace recursion.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeffring::{factorial, Rational};
use crate::poly::Poly;
use crate::radialgeom::{riccati_curvature_jet, Jet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("T/U boundary violation at n={n}: {detail}")]
    Boundary { n: u64, detail: String },
    #[error("value outside the stated support at (n={n}, j={j}): {value}")]
    Support { n: u64, j: u64, value: BigInt },
}

/// `a_n = binom(2n-1, n)` for `n >= 1`: 1, 3, 10, 35, 126, 462, 1716, ...
pub fn a_seq(n: u64) -> BigInt {
    assert!(n >= 1, "a_n starts at n = 1");
    binomial(BigInt::from(2 * n - 1), BigInt::from(n))
}

/// The same sequence with offset zero: `c_m = binom(2m+1, m) = a_{m+1}`.
pub fn c_seq(m: u64) -> BigInt {
    binomial(BigInt::from(2 * m + 1), BigInt::from(m))
}

/// The doubly indexed integer tables `T_{nj}`, `U_{nj}`.
///
/// Rows are built by the two-term recursion
/// `T_{nj} = -3 T_{n-1,j} + U_{n-1,j}`,
/// `U_{nj} = -4 T_{n-1,j} + U_{n-1,j} + T_{n,j-1}`,
/// seeded with `(T_01, U_01) = (0, -1)` and `(T_10, U_10) = (4, 4)`; entries
/// with a negative index are zero. Construction verifies the boundary values
/// `T_nn = U_{n,n+1} = -1`, `T_n0 = (-1)^(n+1) 4n`, `U_n0 = (-1)^(n+1) 4(2n-1)`
/// and that nothing survives outside `0 <= j <= n` (resp. `n+1`).
#[derive(Debug, Clone)]
pub struct TuTable {
    max_n: u64,
    /// Row n holds T_{n,0..=n}.
    t_rows: Vec<Vec<BigInt>>,
    /// Row n holds U_{n,0..=n+1}.
    u_rows: Vec<Vec<BigInt>>,
}

impl TuTable {
    pub fn build(max_n: u64) -> Result<Self, TableError> {
        let width = max_n as usize + 3;
        let zero = BigInt::zero();
        let mut t_prev = vec![BigInt::zero(); width];
        let mut u_prev = vec![BigInt::zero(); width];
        u_prev[1] = BigInt::from(-1); // U_{01}; T_{01} stays 0
        let mut t_rows = vec![t_prev[..1].to_vec()];
        let mut u_rows = vec![u_prev[..2].to_vec()];

        for n in 1..=max_n {
            let mut t_row = vec![BigInt::zero(); width];
            let mut u_row = vec![BigInt::zero(); width];
            for j in 0..width {
                if n == 1 && j == 0 {
                    t_row[0] = BigInt::from(4);
                    u_row[0] = BigInt::from(4);
                    continue;
                }
                t_row[j] = -3 * &t_prev[j] + &u_prev[j];
                let left = if j > 0 { &t_row[j - 1] } else { &zero };
                u_row[j] = -4 * &t_prev[j] + &u_prev[j] + left;
            }

            let boundary_err = |detail: String| TableError::Boundary { n, detail };
            if t_row[n as usize] != BigInt::from(-1) {
                return Err(boundary_err(format!("T_nn = {}", t_row[n as usize])));
            }
            if u_row[n as usize + 1] != BigInt::from(-1) {
                return Err(boundary_err(format!(
                    "U_(n,n+1) = {}",
                    u_row[n as usize + 1]
                )));
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            if t_row[0] != BigInt::from(sign * 4 * n as i64) {
                return Err(boundary_err(format!("T_n0 = {}", t_row[0])));
            }
            if u_row[0] != BigInt::from(sign * 4 * (2 * n as i64 - 1)) {
                return Err(boundary_err(format!("U_n0 = {}", u_row[0])));
            }
            for j in (n as usize + 1)..width {
                if !t_row[j].is_zero() {
                    return Err(TableError::Support {
                        n,
                        j: j as u64,
                        value: t_row[j].clone(),
                    });
                }
            }
            for j in (n as usize + 2)..width {
                if !u_row[j].is_zero() {
                    return Err(TableError::Support {
                        n,
                        j: j as u64,
                        value: u_row[j].clone(),
                    });
                }
            }

            t_rows.push(t_row[..=n as usize].to_vec());
            u_rows.push(u_row[..=n as usize + 1].to_vec());
            t_prev = t_row;
            u_prev = u_row;
        }

        Ok(Self {
            max_n,
            t_rows,
            u_rows,
        })
    }

    pub fn max_n(&self) -> u64 {
        self.max_n
    }

    pub fn t(&self, n: i64, j: i64) -> BigInt {
        if n < 0 || j < 0 {
            return BigInt::zero();
        }
        self.t_rows
            .get(n as usize)
            .and_then(|row| row.get(j as usize))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn u(&self, n: i64, j: i64) -> BigInt {
        if n < 0 || j < 0 {
            return BigInt::zero();
        }
        self.u_rows
            .get(n as usize)
            .and_then(|row| row.get(j as usize))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// The vector `(T_{n0}, ..., T_{nn})`.
    pub fn t_vec(&self, n: u64) -> Vec<BigInt> {
        self.t_rows[n as usize].clone()
    }

    /// The vector `(U_{n0}, ..., U_{n,n+1})`.
    pub fn u_vec(&self, n: u64) -> Vec<BigInt> {
        self.u_rows[n as usize].clone()
    }
}

/// The two weighted sums `(sum_j a_{n+j} T_{nj}, sum_j a_{n+j} U_{nj})`,
/// which must evaluate to `(1, 3)` for every `n >= 1`.
pub fn tu_sum_check(table: &TuTable, n: u64) -> (BigInt, BigInt) {
    let mut sum_t = BigInt::zero();
    for j in 0..=n {
        sum_t += a_seq(n + j) * table.t(n as i64, j as i64);
    }
    let mut sum_u = BigInt::zero();
    for j in 0..=n + 1 {
        sum_u += a_seq(n + j) * table.u(n as i64, j as i64);
    }
    (sum_t, sum_u)
}

/// Exact determinant of a square integer matrix by Bareiss fraction-free
/// elimination; every division performed is exact.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut sign = 1i64;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// The `(n+1) x (n+1)` matrix with first row `(1, 4, ..., 4^n)` and row `i`
/// equal to `(a_i, ..., a_{i+n})`.
pub fn matrix_a(n: u64) -> Vec<Vec<BigInt>> {
    let size = n as usize + 1;
    let mut rows = Vec::with_capacity(size);
    rows.push((0..size).map(|j| BigInt::from(4).pow(j as u32)).collect());
    for i in 1..size as u64 {
        rows.push((0..size as u64).map(|j| a_seq(i + j)).collect());
    }
    rows
}

/// Same as [`matrix_a`] but with the sequence rows shifted to start at `a_2`.
pub fn matrix_a_prime(n: u64) -> Vec<Vec<BigInt>> {
    let size = n as usize + 1;
    let mut rows = Vec::with_capacity(size);
    rows.push((0..size).map(|j| BigInt::from(4).pow(j as u32)).collect());
    for i in 1..size as u64 {
        rows.push((0..size as u64).map(|j| a_seq(i + 1 + j)).collect());
    }
    rows
}

/// The `n x n` minor obtained from `A_n` by deleting the last row and the
/// column containing `4^j`.
pub fn matrix_b_minor(n: u64, j: u64) -> Vec<Vec<BigInt>> {
    matrix_a(n)
        .into_iter()
        .take(n as usize)
        .map(|row| {
            row.into_iter()
                .enumerate()
                .filter_map(|(col, v)| (col != j as usize).then_some(v))
                .collect()
        })
        .collect()
}

/// Products `A_n * T_n` and `B_{n+1} * U_n`; the suites require the results
/// `(0, ..., 0, 1)` and `(0, ..., 0, 3)` respectively.
pub fn vectorial_products(table: &TuTable, n: u64) -> (Vec<BigInt>, Vec<BigInt>) {
    let t = table.t_vec(n);
    let at = matrix_a(n)
        .iter()
        .map(|row| row.iter().zip(&t).map(|(a, b)| a * b).sum())
        .collect();
    let u = table.u_vec(n);
    let b_rows: Vec<Vec<BigInt>> = matrix_a(n + 1).into_iter().take(n as usize + 1).collect();
    let bu = b_rows
        .iter()
        .map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum())
        .collect();
    (at, bu)
}

/// The alternating cofactor sum `sum_j (-1)^j a_{n+j} det B_n^(j)`, equal to
/// 1 for every `n >= 1` (Laplace expansion of `det A_n` along its last row).
pub fn laplace_row_check(n: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 0..=n {
        let term = a_seq(n + j) * bareiss_det(matrix_b_minor(n, j));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Determinant of the `n x n` Hankel window of the shifted sequence
/// `c_k, c_{k+1}, ...`, entry `(i, j) = c_{k+i+j}`.
pub fn hankel_window_det(k: u64, n: u64) -> BigInt {
    let m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| c_seq(k + i + j)).collect())
        .collect();
    bareiss_det(m)
}

/// The closed product form of the shifted Hankel determinant for `k >= 2`:
/// `prod_{1 <= i <= j <= k} (i + j - 1 + 2n) / (i + j - 1)`. The exact
/// rational product is returned; the suites assert it is an integer equal to
/// the determinant.
pub fn hankel_transform_product(k: u64, n: u64) -> Rational {
    assert!(k >= 2);
    let mut acc = Rational::one();
    for i in 1..=k {
        for j in i..=k {
            let num = BigInt::from(i + j - 1 + 2 * n);
            let den = BigInt::from(i + j - 1);
            acc *= Rational::new(num, den);
        }
    }
    acc
}

/// Quotient-difference pair `(q_n^(k), e_n^(k))` of the continued-fraction
/// expansion attached to the sequence `c_m`; `k` selects the plain (0) or
/// once-shifted (1) sequence.
pub fn qd_coefficients(k: u8, n: u64) -> (Rational, Rational) {
    assert!(k <= 1, "only the k = 0 and k = 1 expansions are tabulated");
    assert!(n >= 1);
    let (n, k) = (n as i64, k as i64);
    let q = Rational::new(
        BigInt::from((2 * n + 2 * k) * (2 * n + 2 * k + 1)),
        BigInt::from((2 * n + k - 1) * (2 * n + k)),
    );
    let e = Rational::new(
        BigInt::from((2 * n - 1) * (2 * n)),
        BigInt::from((2 * n + k) * (2 * n + k + 1)),
    );
    (q, e)
}

/// Recurrence coefficient `alpha_n^(k)`, built from the quotient-difference
/// data (`alpha_1 = q_1`, `alpha_{n+1} = q_{n+1} + e_n`) rather than from
/// any closed form.
pub fn recurrence_alpha(k: u8, n: u64) -> Rational {
    assert!(n >= 1);
    if n == 1 {
        qd_coefficients(k, 1).0
    } else {
        let (q, _) = qd_coefficients(k, n);
        let (_, e) = qd_coefficients(k, n - 1);
        q + e
    }
}

/// Recurrence coefficient `beta_n^(k) = q_n^(k) * e_n^(k)`.
pub fn recurrence_beta(k: u8, n: u64) -> Rational {
    let (q, e) = qd_coefficients(k, n);
    q * e
}

/// Closed form of `alpha_n^(k)` used as an assertion target: `alpha_n = 2`
/// and `alpha_n^(1) = 2 + 4/((2n+1)(2n-1))` for `n >= 2`.
pub fn closed_alpha(k: u8, n: u64) -> Rational {
    assert!(n >= 2);
    let two = Rational::from_integer(2.into());
    match k {
        0 => two,
        1 => {
            let n = n as i64;
            two + Rational::new(BigInt::from(4), BigInt::from((2 * n + 1) * (2 * n - 1)))
        }
        _ => unreachable!(),
    }
}

/// Closed form of `beta_{n-1}^(k)`: 1, resp. `(2n-3)(2n+1)/(2n-1)^2`,
/// for `n >= 2`.
pub fn closed_beta_nm1(k: u8, n: u64) -> Rational {
    assert!(n >= 2);
    match k {
        0 => Rational::one(),
        1 => {
            let n = n as i64;
            Rational::new(
                BigInt::from((2 * n - 3) * (2 * n + 1)),
                BigInt::from((2 * n - 1) * (2 * n - 1)),
            )
        }
        _ => unreachable!(),
    }
}

/// The monic orthogonal polynomial `t_n` (or `t_n^(1)` when `shifted`),
/// produced by the three-term recurrence with quotient-difference data.
pub fn ortho_poly(n: u64, shifted: bool) -> Poly {
    let k = u8::from(shifted);
    let mut prev = Poly::one();
    if n == 0 {
        return prev;
    }
    let mut cur = Poly::x().sub(&Poly::constant(recurrence_alpha(k, 1)));
    for m in 2..=n {
        let next = Poly::x()
            .sub(&Poly::constant(recurrence_alpha(k, m)))
            .mul(&cur)
            .sub(&prev.scale(&recurrence_beta(k, m - 1)));
        prev = cur;
        cur = next;
    }
    cur
}

/// Evaluation at `x = 4`; the closed forms are `t_n(4) = 1` and
/// `t_n^(1)(4) = (n+1)/(2n+1)`.
pub fn ortho_eval_at4(n: u64, shifted: bool) -> Rational {
    ortho_poly(n, shifted).eval(&Rational::from_integer(4.into()))
}

/// The polynomial `P_n(x)` defined by the `(n+1) x (n+1)` determinant whose
/// first row is `(1, x, ..., x^n)` and whose remaining rows are Hankel rows
/// of the `c` sequence (shifted by one when `shifted`). The determinant is
/// linear in the first row, so it expands into `n+1` integer minors.
pub fn det_poly(n: u64, shifted: bool) -> Poly {
    let size = n as usize + 1;
    let offset = u64::from(shifted);
    let mut coeffs = Vec::with_capacity(size);
    for col in 0..size {
        let minor: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                (0..size as u64)
                    .filter(|&j| j != col as u64)
                    .map(|j| c_seq(offset + i + j))
                    .collect()
            })
            .collect();
        let mut c = bareiss_det(minor);
        if col % 2 == 1 {
            c = -c;
        }
        coeffs.push(Rational::from_integer(c));
    }
    Poly::new(coeffs)
}

/// Checks the determinant route against the recurrence route:
/// `P_n = (-1)^n t_n` and `P_n^(1) = (-1)^n (2n+1) t_n^(1)`.
pub fn det_poly_check(n: u64, shifted: bool) -> bool {
    let det = det_poly(n, shifted);
    let mut scale = Rational::from_integer(if shifted {
        (2 * n as i64 + 1).into()
    } else {
        BigInt::one()
    });
    if n % 2 == 1 {
        scale = -scale;
    }
    det == ortho_poly(n, shifted).scale(&scale)
}

/// Elementary symmetric functions `E_1..E_m` from the power sums
/// `p_1..p_m` via `k E_k = sum_{i=1}^k (-1)^(i-1) E_{k-i} p_i`.
pub fn newton_elementary(power_sums: &[Rational]) -> Vec<Rational> {
    let m = power_sums.len();
    let mut e = vec![Rational::one()]; // E_0
    for k in 1..=m {
        let mut acc = Rational::zero();
        for i in 1..=k {
            let term = &e[k - i] * &power_sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / Rational::from_integer((k as i64).into()));
    }
    e.remove(0);
    e
}

/// Inverse of [`newton_elementary`]: recovers `p_1..p_m` from `E_1..E_m`.
pub fn power_sums_from_elementary(elementary: &[Rational]) -> Vec<Rational> {
    let m = elementary.len();
    let e = |j: usize| -> Rational {
        if j == 0 {
            Rational::one()
        } else {
            elementary[j - 1].clone()
        }
    };
    let mut p: Vec<Rational> = Vec::with_capacity(m);
    for k in 1..=m {
        let mut acc = Rational::from_integer((k as i64).into()) * e(k);
        for i in 1..k {
            let term = e(k - i) * &p[i - 1];
            if i % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        // k E_k = sum (-1)^(i-1) E_{k-i} p_i; the i = k term is (-1)^(k-1) p_k.
        if k % 2 == 0 {
            acc = -acc;
        }
        p.push(acc);
    }
    p
}

/// Integer coefficients `c_{m,j}` with
/// `d^m eta / d nu^m = sum_j c_{m,j} tr(S^j)` for equidistants in the unit
/// sphere, from `eta = tr S` and the derivation rule
/// `d tr(S^j)/d nu = j tr(S^{j+1}) + j tr(S^{j-1})`. Index `j` runs to
/// `m + 1` and `tr(S^0)` counts the principal curvatures.
pub fn trace_derivative_coefficients(m: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); m + 2];
    c[1] = BigInt::one();
    for _ in 0..m {
        let mut next = vec![BigInt::zero(); m + 2];
        for (j, coeff) in c.iter().enumerate().skip(1) {
            if coeff.is_zero() {
                continue;
            }
            let scaled = coeff * BigInt::from(j);
            if j + 1 < next.len() {
                next[j + 1] += &scaled;
            }
            next[j - 1] += &scaled;
        }
        c = next;
    }
    c
}

/// Cross-checks the trace expansion of the normal derivatives of `eta`
/// against the curvature jets of the spherical model: every principal
/// curvature evolves by `g' = g^2 + 1` along the inward normal, so both
/// sides are exactly computable for rational initial curvatures.
pub fn sphere_trace_jet_check(max_m: usize, curvatures: &[Rational]) -> Result<(), String> {
    let order = max_m + 1;
    let jets: Vec<Jet<Rational>> = curvatures
        .iter()
        .map(|c| riccati_curvature_jet(c.clone(), 1, order))
        .collect();
    let mut eta = Jet::constant(Rational::zero(), order);
    for j in &jets {
        eta = eta.add(j);
    }
    for m in 0..=max_m {
        let coeffs = trace_derivative_coefficients(m);
        if coeffs[m + 1] != factorial(m as u64) {
            return Err(format!(
                "leading trace coefficient at m={m} is {}, expected {}",
                coeffs[m + 1],
                factorial(m as u64)
            ));
        }
        let lhs = eta.coefficient(m).clone() * Rational::from_integer(factorial(m as u64));
        let mut rhs = Rational::zero();
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let trace: Rational = curvatures
                .iter()
                .map(|k| {
                    let mut p = Rational::one();
                    for _ in 0..j {
                        p *= k;
                    }
                    p
                })
                .sum();
            rhs += Rational::from_integer(c.clone()) * trace;
        }
        if lhs != rhs {
            return Err(format!("m={m}: jet route {lhs} vs trace route {rhs}"));
        }
    }
    Ok(())
}

/// Sanity identity behind the sequence definition:
/// `binom(2n-1, n) = 2^(n-1) (2n-1)!! / n!`.
pub fn a_seq_closed_forms_agree(n: u64) -> bool {
    let lhs = a_seq(n);
    let dfact = crate::coeffring::double_factorial(2 * n as i64 - 1).expect("n >= 1");
    let num = (BigInt::one() << (n - 1)) * dfact;
    let den = factorial(n);
    (&num % &den).is_zero() && lhs == num / den
}
