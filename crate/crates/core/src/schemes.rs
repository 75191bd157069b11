//! The recursion engine: the two-parameter operator families `R/S` and
//! `P/Q`, the intermediate sums `Z_n` and `alpha_n`, and the heat-content
//! operators `D_k`, all over exact coefficients. Also the scalar weight
//! route, which reproduces every weight identity without materializing any
//! operator, so it scales far past the operator route.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::coeffring::{
    brace_factor, double_factorial, factorial, gamma_half, PiCoefficient, Rational,
};
use crate::combinatorics::{a_seq, TableError, TuTable};
use crate::ncalgebra::{AlgebraError, Generator, Operator};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("scalar weight table built to n={max}, but n={requested} was requested")]
    WeightDepth { max: u64, requested: u64 },
}

/// Memoized store for every operator family. Built under exclusive access;
/// clone-free reads are available through the `*_cached` accessors once a
/// [`SchemeCache::warmup`] (or any compute call) has filled the entries.
pub struct SchemeCache {
    r: HashMap<(i64, i64), Operator>,
    s: HashMap<(i64, i64), Operator>,
    p: HashMap<(i64, i64), Operator>,
    q: HashMap<(i64, i64), Operator>,
    z: HashMap<u64, Operator>,
    alpha: HashMap<u64, Operator>,
    d: HashMap<u64, Operator>,
    // fixed building blocks of the recursions
    gen_n: Operator,
    gen_lap: Operator,
    neg_n2_plus_lap: Operator,
    lap_n: Operator,
}

impl Default for SchemeCache {
    fn default() -> Self {
        Self::new()
    }
}

impl SchemeCache {
    pub fn new() -> Self {
        let gen_n = Operator::generator(Generator::N);
        let gen_lap = Operator::generator(Generator::Lap);
        let neg_n2_plus_lap = gen_n.mul(&gen_n).add(&gen_lap).neg();
        let lap_n = gen_lap.mul(&gen_n);
        let mut r = HashMap::new();
        let mut s = HashMap::new();
        r.insert((0, 0), Operator::identity());
        s.insert((0, 0), Operator::zero());
        let mut p = HashMap::new();
        let mut q = HashMap::new();
        p.insert(
            (0, 0),
            Operator::identity().scale_rational(&Rational::from_integer((-2).into())),
        );
        q.insert((0, 0), Operator::zero());
        Self {
            r,
            s,
            p,
            q,
            z: HashMap::new(),
            alpha: HashMap::new(),
            d: HashMap::new(),
            gen_n,
            gen_lap,
            neg_n2_plus_lap,
            lap_n,
        }
    }

    fn r_get(&self, k: i64, j: i64) -> Operator {
        if k < 0 || j < 0 {
            return Operator::zero();
        }
        self.r.get(&(k, j)).cloned().expect("R entry filled")
    }

    fn s_get(&self, k: i64, j: i64) -> Operator {
        if k < 0 || j < 0 {
            return Operator::zero();
        }
        self.s.get(&(k, j)).cloned().expect("S entry filled")
    }

    /// Fills `R`/`S` up to the requested cell. Cells are produced following
    /// the dependency order (increasing `k` within each diagonal), and only
    /// cells actually reachable from the request are computed: entries on
    /// diagonal `k - j = d` have degree `2d`, so touching unneeded cells of
    /// a higher diagonal would be exponentially wasteful.
    fn ensure_rs(&mut self, k: i64, j: i64) {
        let mut stack = vec![(k, j)];
        while let Some(&(k, j)) = stack.last() {
            if k < 0 || j < 0 || self.r.contains_key(&(k, j)) {
                stack.pop();
                continue;
            }
            let deps = [(k - 1, j), (k - 1, j - 1)];
            let missing: Vec<(i64, i64)> = deps
                .iter()
                .copied()
                .filter(|&(a, b)| a >= 0 && b >= 0 && !self.r.contains_key(&(a, b)))
                .collect();
            if !missing.is_empty() {
                stack.extend(missing);
                continue;
            }
            let zero = Operator::zero();
            let r_up = if k >= 1 {
                self.r.get(&(k - 1, j)).unwrap_or(&zero)
            } else {
                &zero
            };
            let s_up = if k >= 1 {
                self.s.get(&(k - 1, j)).unwrap_or(&zero)
            } else {
                &zero
            };
            let r_diag = if k >= 1 && j >= 1 {
                self.r.get(&(k - 1, j - 1)).unwrap_or(&zero)
            } else {
                &zero
            };
            let r_new = self
                .neg_n2_plus_lap
                .mul(r_up)
                .add_owned(self.gen_n.mul(s_up));
            let s_new = self
                .lap_n
                .mul(r_up)
                .sub_owned(self.gen_lap.mul(s_up))
                .add_owned(self.gen_n.mul(r_diag));
            self.r.insert((k, j), r_new);
            self.s.insert((k, j), s_new);
            stack.pop();
        }
    }

    /// The pair `(R_kj, S_kj)` of the three-line scheme with `R_00 = I`,
    /// `S_00 = 0` and zero at any negative index.
    pub fn compute_rs(&mut self, k: i64, j: i64) -> (Operator, Operator) {
        self.ensure_rs(k, j);
        (self.r_get(k, j), self.s_get(k, j))
    }

    /// `Z_n` for `n >= 1`: the brace-weighted sum over the `R` diagonal.
    /// `Z_1 = 2 I`.
    pub fn compute_z(&mut self, n: u64) -> Operator {
        assert!(n >= 1, "Z_n starts at n = 1");
        if let Some(z) = self.z.get(&n) {
            return z.clone();
        }
        let m = n - 1;
        let mut acc = Operator::zero();
        for j in 0..=m {
            let c = brace_factor(m + 1, j as i64 - 1).expect("a+b >= 0 inside the Z sum");
            let (r, _) = self.compute_rs((m + j) as i64, j as i64);
            acc = acc.add_owned(r.scale_rational(&c));
        }
        self.z.insert(n, acc.clone());
        acc
    }

    /// `alpha_n` for `n >= 0`: the brace-weighted sum over the `S` diagonal.
    /// The sum already yields `alpha_0 = N/2` without special-casing.
    pub fn compute_alpha(&mut self, n: u64) -> Operator {
        if let Some(a) = self.alpha.get(&n) {
            return a.clone();
        }
        let mut acc = Operator::zero();
        for j in 0..=n + 1 {
            let c = brace_factor(n, j as i64).expect("non-negative arguments");
            let (_, s) = self.compute_rs((n + j) as i64, j as i64);
            acc = acc.add_owned(s.scale_rational(&c));
        }
        self.alpha.insert(n, acc.clone());
        acc
    }

    /// The heat-content operator `D_k`, `k >= 1`, memoized. The result is
    /// checked to be homogeneous of degree `k - 1` with every coefficient a
    /// pure power of `sqrt(pi)`: power 0 for even `k`, power -1 for odd `k`.
    pub fn compute_d(&mut self, k: u64) -> Operator {
        assert!(k >= 1, "D_k starts at k = 1");
        if let Some(d) = self.d.get(&k) {
            return d.clone();
        }
        let inv_sqrt_pi = PiCoefficient::pi_power(-1);
        let result = if k == 1 {
            Operator::identity().scale(&PiCoefficient::term(Rational::from_integer(2.into()), -1))
        } else if k % 2 == 0 {
            let n = k / 2;
            let inv_nfact = Rational::new(BigInt::one(), factorial(n));
            let mut acc = Operator::zero();
            for i in 1..=n {
                let coeff = gamma_half(i)
                    .mul(&gamma_half(n - i))
                    .scale(&inv_nfact)
                    .mul(&inv_sqrt_pi);
                let term = self.compute_d(2 * i - 1).mul(&self.compute_alpha(n - i));
                acc = acc.add_owned(term.scale(&coeff));
            }
            acc
        } else {
            let n = (k - 1) / 2;
            let inv_gamma = gamma_half(n + 1).recip().expect("single term");
            let mut acc = self.compute_z(n + 1).scale(&inv_sqrt_pi);
            for i in 1..=n {
                let coeff = gamma_half(n - i)
                    .scale(&Rational::from_integer(factorial(i)))
                    .mul(&inv_gamma)
                    .mul(&inv_sqrt_pi);
                let term = self.compute_d(2 * i).mul(&self.compute_alpha(n - i));
                acc = acc.add_owned(term.scale(&coeff));
            }
            acc
        };

        assert_eq!(
            result.homogeneous_degree(),
            Some(k as usize - 1),
            "D_{k} must be homogeneous of degree k-1"
        );
        let expected_power = if k % 2 == 0 { 0 } else { -1 };
        for (_, c) in result.terms() {
            assert_eq!(
                c.half_powers(),
                vec![expected_power],
                "D_{k} coefficient purity"
            );
        }
        self.d.insert(k, result.clone());
        result
    }

    /// The rescaled pair `(P_nj, Q_nj)`, computed by its own recursion
    /// (`P_00 = -2 I`, `Q_00 = 0`), independent of the `R/S` route.
    pub fn compute_pq(&mut self, n: i64, j: i64) -> (Operator, Operator) {
        if n < 0 || j < 0 {
            return (Operator::zero(), Operator::zero());
        }
        let half = Rational::new(BigInt::one(), 2.into());
        let mut stack = vec![(n, j)];
        while let Some(&(n, j)) = stack.last() {
            if n < 0 || j < 0 || self.p.contains_key(&(n, j)) {
                stack.pop();
                continue;
            }
            let deps = [(n - 1, j), (n, j - 1)];
            let missing: Vec<(i64, i64)> = deps
                .iter()
                .copied()
                .filter(|&(a, b)| a >= 0 && b >= 0 && !self.p.contains_key(&(a, b)))
                .collect();
            if !missing.is_empty() {
                stack.extend(missing);
                continue;
            }
            let zero = Operator::zero();
            let p_up = if n > 0 {
                self.p.get(&(n - 1, j)).unwrap_or(&zero)
            } else {
                &zero
            };
            let q_up = if n > 0 {
                self.q.get(&(n - 1, j)).unwrap_or(&zero)
            } else {
                &zero
            };
            let p_left = if j > 0 {
                self.p.get(&(n, j - 1)).unwrap_or(&zero)
            } else {
                &zero
            };
            let p_new = self
                .neg_n2_plus_lap
                .mul(p_up)
                .add_owned(self.gen_n.mul(q_up).scale_rational(&half));
            let q_new = self
                .lap_n
                .mul(p_up)
                .scale_rational(&Rational::from_integer(2.into()))
                .sub_owned(self.gen_lap.mul(q_up))
                .add_owned(self.gen_n.mul(p_left).scale_rational(&half));
            self.p.insert((n, j), p_new);
            self.q.insert((n, j), q_new);
            stack.pop();
        }
        (
            self.p.get(&(n, j)).cloned().unwrap(),
            self.q.get(&(n, j)).cloned().unwrap(),
        )
    }

    /// Rescaling of the `R/S` entries that must reproduce `P/Q`:
    /// `P_nj = -(2/4^j) R_{n+j,j}`, `Q_nj = -(4/4^j) S_{n+j,j}`.
    pub fn pq_from_rs(&mut self, n: i64, j: i64) -> (Operator, Operator) {
        if n < 0 || j < 0 {
            return (Operator::zero(), Operator::zero());
        }
        let (r, s) = self.compute_rs(n + j, j);
        let pow4 = Rational::from_integer(BigInt::from(4).pow(j as u32));
        let p = r.scale_rational(&(Rational::from_integer((-2).into()) / &pow4));
        let q = s.scale_rational(&(Rational::from_integer((-4).into()) / &pow4));
        (p, q)
    }

    /// The flow operator `(1 + k/2) D_{k+2}` for `k >= 0`.
    pub fn tilde_flow_operator(&mut self, k: u64) -> Operator {
        let scale = Rational::new(BigInt::from(k + 2), 2.into());
        self.compute_d(k + 2).scale_rational(&scale)
    }

    /// Runs the barred recurrence directly (bar of the `D` scheme, using the
    /// right-module rule), giving `bar D_k` without ever forming `D_k`.
    /// `bar D_1 = 0`.
    pub fn bar_d_via_recurrence(&mut self, k: u64) -> Result<Operator, AlgebraError> {
        assert!(k >= 1);
        if k == 1 {
            return Ok(Operator::zero());
        }
        let inv_sqrt_pi = PiCoefficient::pi_power(-1);
        if k % 2 == 0 {
            let n = k / 2;
            let inv_nfact = Rational::new(BigInt::one(), factorial(n));
            let mut acc = Operator::zero();
            for i in 1..=n {
                let coeff = gamma_half(i)
                    .mul(&gamma_half(n - i))
                    .scale(&inv_nfact)
                    .mul(&inv_sqrt_pi);
                let bar_alpha = self.compute_alpha(n - i).bar_part()?;
                let term = self.compute_d(2 * i - 1).mul(&bar_alpha);
                acc = acc.add_owned(term.scale(&coeff));
            }
            Ok(acc)
        } else {
            let n = (k - 1) / 2;
            let inv_gamma = gamma_half(n + 1).recip().expect("single term");
            let mut acc = self.compute_z(n + 1).bar_part()?.scale(&inv_sqrt_pi);
            for i in 1..=n {
                let coeff = gamma_half(n - i)
                    .scale(&Rational::from_integer(factorial(i)))
                    .mul(&inv_gamma)
                    .mul(&inv_sqrt_pi);
                let bar_alpha = self.compute_alpha(n - i).bar_part()?;
                let term = self.compute_d(2 * i).mul(&bar_alpha);
                acc = acc.add_owned(term.scale(&coeff));
            }
            Ok(acc)
        }
    }

    /// Precomputes `D_1..D_max_k`; afterwards reads can go through
    /// [`SchemeCache::d_cached`] without mutation.
    pub fn warmup(&mut self, max_k: u64) {
        for k in 1..=max_k {
            self.compute_d(k);
        }
    }

    pub fn d_cached(&self, k: u64) -> Option<&Operator> {
        self.d.get(&k)
    }
}

/// Closed form `w(D_k)`: `1/n!` for `k = 2n`, `1/Gamma(n + 3/2)` for
/// `k = 2n+1`.
pub fn closed_weight_d(k: u64) -> PiCoefficient {
    assert!(k >= 1);
    if k % 2 == 0 {
        let n = k / 2;
        PiCoefficient::from_rational(Rational::new(BigInt::one(), factorial(n)))
    } else {
        let n = (k - 1) / 2;
        gamma_half(n + 1).recip().expect("single term")
    }
}

/// Closed form `w(bar D_k)` for `k >= 2`: `2/(4^n n!)` for `k = 2n` and
/// `(1/sqrt(pi)) / (2^(n-1) (2n+1)!!)` for `k = 2n+1`, `n >= 1`.
pub fn closed_weight_d_bar(k: u64) -> Option<PiCoefficient> {
    if k < 2 {
        return None;
    }
    if k % 2 == 0 {
        let n = k / 2;
        let den = BigInt::from(4).pow(n as u32) * factorial(n);
        Some(PiCoefficient::from_rational(Rational::new(2.into(), den)))
    } else {
        let n = (k - 1) / 2;
        let den = (BigInt::one() << (n - 1)) * double_factorial(2 * n as i64 + 1).unwrap();
        Some(PiCoefficient::term(Rational::new(BigInt::one(), den), -1))
    }
}

/// Closed form `w(bar alpha_n)`: `1/2` at `n = 0`, `-3/(2^(n+1) (2n-1)!!)`
/// for `n >= 1`.
pub fn closed_weight_alpha_bar(n: u64) -> Rational {
    if n == 0 {
        return Rational::new(BigInt::one(), 2.into());
    }
    let den = (BigInt::one() << (n + 1)) * double_factorial(2 * n as i64 - 1).unwrap();
    -Rational::new(3.into(), den)
}

/// Closed form `w(bar Z_n)` for `n >= 2`: with `m = n - 1`,
/// `-1/(2^(m-1) (2m+1)!!)`.
pub fn closed_weight_z_bar(n: u64) -> Rational {
    assert!(n >= 2);
    let m = n - 1;
    let den = (BigInt::one() << (m - 1)) * double_factorial(2 * m as i64 + 1).unwrap();
    -Rational::new(BigInt::one(), den)
}

/// Scalar weight engine. Taking weights is an algebra homomorphism, so every
/// operator recursion collapses to a recursion on scalars; the barred values
/// additionally route through the integer `T/U` table, which keeps this
/// independent of the closed forms it is checked against.
pub struct ScalarWeights {
    tu: TuTable,
    wp: HashMap<(i64, i64), Rational>,
    wq: HashMap<(i64, i64), Rational>,
    wd: HashMap<u64, PiCoefficient>,
}

impl ScalarWeights {
    /// `max_n` bounds the `alpha`/`Z` index reachable from the weight
    /// queries; `weight_d(k)` needs roughly `k/2 + 1`.
    pub fn new(max_n: u64) -> Result<Self, TableError> {
        Ok(Self {
            tu: TuTable::build(max_n + 1)?,
            wp: HashMap::new(),
            wq: HashMap::new(),
            wd: HashMap::new(),
        })
    }

    pub fn tu(&self) -> &TuTable {
        &self.tu
    }

    /// `(w(P_nj), w(Q_nj))` by the weight image of the `P/Q` scheme: the
    /// same recursion as `T/U` but seeded from `w(P_00) = -2`.
    fn wpq(&mut self, n: i64, j: i64) -> (Rational, Rational) {
        let zero = || Rational::from_integer(0.into());
        if n < 0 || j < 0 {
            return (zero(), zero());
        }
        if let (Some(p), Some(q)) = (self.wp.get(&(n, j)), self.wq.get(&(n, j))) {
            return (p.clone(), q.clone());
        }
        if n == 0 && j == 0 {
            let p = Rational::from_integer((-2).into());
            self.wp.insert((0, 0), p.clone());
            self.wq.insert((0, 0), zero());
            return (p, zero());
        }
        let (p_up, q_up) = self.wpq(n - 1, j);
        let (p_left, _) = self.wpq(n, j - 1);
        let p = -Rational::from_integer(3.into()) * &p_up + &q_up;
        let q = -Rational::from_integer(4.into()) * &p_up + &q_up + &p_left;
        self.wp.insert((n, j), p.clone());
        self.wq.insert((n, j), q.clone());
        (p, q)
    }

    /// `w(Z_n)`: 2 at `n = 1`, otherwise the `a`-weighted sum over `w(P)`.
    pub fn weight_z(&mut self, n: u64) -> Rational {
        assert!(n >= 1);
        if n == 1 {
            return Rational::from_integer(2.into());
        }
        let m = n - 1;
        let mut sum = Rational::from_integer(0.into());
        for j in 0..=m {
            sum += Rational::from_integer(a_seq(m + j)) * self.wpq(m as i64, j as i64).0;
        }
        let den = (BigInt::one() << (m - 1)) * double_factorial(2 * m as i64 + 1).unwrap();
        -sum * Rational::new(BigInt::one(), den)
    }

    /// `w(alpha_n)`: 1 at `n = 0`, otherwise the `a`-weighted sum over
    /// `w(Q)`.
    pub fn weight_alpha(&mut self, n: u64) -> Rational {
        if n == 0 {
            return Rational::one();
        }
        let mut sum = Rational::from_integer(0.into());
        for j in 0..=n + 1 {
            sum += Rational::from_integer(a_seq(n + j)) * self.wpq(n as i64, j as i64).1;
        }
        let den = (BigInt::one() << (n + 1)) * double_factorial(2 * n as i64 - 1).unwrap();
        -sum * Rational::new(BigInt::one(), den)
    }

    /// `w(bar Z_n)` for `n >= 2`, from the `T` table sums.
    pub fn weight_z_bar(&self, n: u64) -> Result<Rational, SchemeError> {
        assert!(n >= 2);
        let m = n - 1;
        if m > self.tu.max_n() {
            return Err(SchemeError::WeightDepth {
                max: self.tu.max_n(),
                requested: m,
            });
        }
        let mut sum = Rational::from_integer(0.into());
        for j in 0..=m {
            sum += Rational::from_integer(a_seq(m + j) * self.tu.t(m as i64, j as i64));
        }
        let den = (BigInt::one() << (m - 1)) * double_factorial(2 * m as i64 + 1).unwrap();
        Ok(-sum * Rational::new(BigInt::one(), den))
    }

    /// `w(bar alpha_n)`, from the `U` table sums; `1/2` at `n = 0`.
    pub fn weight_alpha_bar(&self, n: u64) -> Result<Rational, SchemeError> {
        if n == 0 {
            return Ok(Rational::new(BigInt::one(), 2.into()));
        }
        if n > self.tu.max_n() {
            return Err(SchemeError::WeightDepth {
                max: self.tu.max_n(),
                requested: n,
            });
        }
        let mut sum = Rational::from_integer(0.into());
        for j in 0..=n + 1 {
            sum += Rational::from_integer(a_seq(n + j) * self.tu.u(n as i64, j as i64));
        }
        let den = (BigInt::one() << (n + 1)) * double_factorial(2 * n as i64 - 1).unwrap();
        Ok(-sum * Rational::new(BigInt::one(), den))
    }

    /// `w(D_k)` by taking weights through the defining recursion.
    pub fn weight_d(&mut self, k: u64) -> PiCoefficient {
        assert!(k >= 1);
        if let Some(v) = self.wd.get(&k) {
            return v.clone();
        }
        let inv_sqrt_pi = PiCoefficient::pi_power(-1);
        let result = if k == 1 {
            PiCoefficient::term(Rational::from_integer(2.into()), -1)
        } else if k % 2 == 0 {
            let n = k / 2;
            let inv_nfact = Rational::new(BigInt::one(), factorial(n));
            let mut acc = PiCoefficient::zero();
            for i in 1..=n {
                let coeff = gamma_half(i)
                    .mul(&gamma_half(n - i))
                    .scale(&inv_nfact)
                    .mul(&inv_sqrt_pi);
                let term = self.weight_d(2 * i - 1).scale(&self.weight_alpha(n - i));
                acc = acc.add(&term.mul(&coeff));
            }
            acc
        } else {
            let n = (k - 1) / 2;
            let inv_gamma = gamma_half(n + 1).recip().expect("single term");
            let mut acc = inv_sqrt_pi.scale(&self.weight_z(n + 1));
            for i in 1..=n {
                let coeff = gamma_half(n - i)
                    .scale(&Rational::from_integer(factorial(i)))
                    .mul(&inv_gamma)
                    .mul(&inv_sqrt_pi);
                let term = self.weight_d(2 * i).scale(&self.weight_alpha(n - i));
                acc = acc.add(&term.mul(&coeff));
            }
            acc
        };
        self.wd.insert(k, result.clone());
        result
    }

    /// `w(bar D_k)` by taking weights through the barred recurrence, with
    /// the `alpha`/`Z` bar weights supplied by the `T/U` sums.
    pub fn weight_d_bar(&mut self, k: u64) -> Result<PiCoefficient, SchemeError> {
        assert!(k >= 1);
        if k == 1 {
            return Ok(PiCoefficient::zero());
        }
        let inv_sqrt_pi = PiCoefficient::pi_power(-1);
        if k % 2 == 0 {
            let n = k / 2;
            let inv_nfact = Rational::new(BigInt::one(), factorial(n));
            let mut acc = PiCoefficient::zero();
            for i in 1..=n {
                let coeff = gamma_half(i)
                    .mul(&gamma_half(n - i))
                    .scale(&inv_nfact)
                    .mul(&inv_sqrt_pi);
                let term = self
                    .weight_d(2 * i - 1)
                    .scale(&self.weight_alpha_bar(n - i)?);
                acc = acc.add(&term.mul(&coeff));
            }
            Ok(acc)
        } else {
            let n = (k - 1) / 2;
            let inv_gamma = gamma_half(n + 1).recip().expect("single term");
            let mut acc = inv_sqrt_pi.scale(&self.weight_z_bar(n + 1)?);
            for i in 1..=n {
                let coeff = gamma_half(n - i)
                    .scale(&Rational::from_integer(factorial(i)))
                    .mul(&inv_gamma)
                    .mul(&inv_sqrt_pi);
                let term = self.weight_d(2 * i).scale(&self.weight_alpha_bar(n - i)?);
                acc = acc.add(&term.mul(&coeff));
            }
            Ok(acc)
        }
    }
}
