//! Exact scalar arithmetic in the ring of rational Laurent combinations of
//! `sqrt(pi)`, together with the half-integer Gamma and double-factorial
//! helpers that feed the operator recursions.
//!
//! A [`PiCoefficient`] is a finitely supported sum `sum_p q_p * pi^(p/2)`
//! with `q_p` rational and `p` an arbitrary integer. Arithmetic is exact and
//! values are kept in canonical sparse form (no stored zero terms, every
//! rational reduced), so equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar. Always stored reduced with positive denominator.
pub type Rational = BigRational;

/// Shorthand for a rational built from two machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Errors produced by scalar construction and parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffError {
    #[error("double factorial undefined for {0} (needs k >= -1)")]
    DoubleFactorialDomain(i64),
    #[error("brace factor undefined for a={a}, b={b} (needs a >= 0 and a+b >= 0)")]
    BraceDomain { a: i64, b: i64 },
    #[error("cannot invert a coefficient that is not a single nonzero term")]
    NotInvertible,
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

fn parse_err<T>(position: usize, message: impl Into<String>) -> Result<T, CoeffError> {
    Err(CoeffError::Parse {
        position,
        message: message.into(),
    })
}

/// `k!!` with the empty-product conventions `(-1)!! = 0!! = 1`.
pub fn double_factorial(k: i64) -> Result<BigInt, CoeffError> {
    if k < -1 {
        return Err(CoeffError::DoubleFactorialDomain(k));
    }
    let mut acc = BigInt::one();
    let mut m = k;
    while m > 1 {
        acc *= m;
        m -= 2;
    }
    Ok(acc)
}

/// `k!` as a big integer.
pub fn factorial(k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for m in 2..=k {
        acc *= m;
    }
    acc
}

/// A single exact term `q * pi^(p/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiTerm {
    pub half_pi_power: i64,
    pub value: Rational,
}

/// Exact element of the ring `Q[sqrt(pi), 1/sqrt(pi)]`, stored sparsely as a
/// map from the half power `p` to the rational value of the `pi^(p/2)` term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PiCoefficient {
    terms: BTreeMap<i64, Rational>,
}

impl PiCoefficient {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    /// The single term `q * pi^(p/2)`; canonicalizes away `q = 0`.
    pub fn term(q: Rational, half_pi_power: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(half_pi_power, q);
        }
        Self { terms }
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::term(q, 0)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `pi^(p/2)`.
    pub fn pi_power(half_pi_power: i64) -> Self {
        Self::term(Rational::one(), half_pi_power)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the value lies in `Q` (a single `p = 0` term or zero).
    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&p| p == 0)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_rational() {
            return self.terms.get(&0).cloned();
        }
        None
    }

    /// The unique term of a monomial value, if there is exactly one.
    pub fn single_term(&self) -> Option<PiTerm> {
        if self.terms.len() == 1 {
            let (&p, q) = self.terms.iter().next().unwrap();
            Some(PiTerm {
                half_pi_power: p,
                value: q.clone(),
            })
        } else {
            None
        }
    }

    /// The set of half powers with nonzero value, in ascending order.
    pub fn half_powers(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (&p, q) in &other.terms {
            let entry = self.terms.entry(p).or_insert_with(Rational::zero);
            *entry += q;
            if entry.is_zero() {
                self.terms.remove(&p);
            }
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&p, q)| (p, -q.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<i64, Rational> = BTreeMap::new();
        for (&p1, q1) in &self.terms {
            for (&p2, q2) in &other.terms {
                let entry = terms.entry(p1 + p2).or_insert_with(Rational::zero);
                *entry += q1 * q2;
            }
        }
        terms.retain(|_, q| !q.is_zero());
        Self { terms }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.mul(&Self::from_rational(q.clone()))
    }

    /// Multiplicative inverse of a single-term value.
    pub fn recip(&self) -> Result<Self, CoeffError> {
        let t = self.single_term().ok_or(CoeffError::NotInvertible)?;
        if t.value.is_zero() {
            return Err(CoeffError::NotInvertible);
        }
        Ok(Self::term(t.value.recip(), -t.half_pi_power))
    }

    /// Numeric evaluation; `pi^(1/2)` is evaluated in double precision.
    pub fn to_f64(&self) -> f64 {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        self.terms
            .iter()
            .map(|(&p, q)| q.to_f64().unwrap_or(f64::NAN) * sqrt_pi.powi(p as i32))
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = PiTerm> + '_ {
        self.terms.iter().map(|(&p, q)| PiTerm {
            half_pi_power: p,
            value: q.clone(),
        })
    }
}

fn fmt_rational(q: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.denom().is_one() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for PiCoefficient {
    /// Canonical text form: terms `q * pi^(p/2)` in ascending `p`, joined by
    /// ` + `; `p = 0` terms print as bare rationals; the zero value prints
    /// as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&p, q) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            fmt_rational(q, f)?;
            if p != 0 {
                write!(f, " * pi^({}/2)", p)?;
            }
        }
        Ok(())
    }
}

fn parse_rational(s: &str, offset: usize) -> Result<Rational, CoeffError> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num = BigInt::from_str(num_str).map_err(|_| CoeffError::Parse {
        position: offset,
        message: format!("invalid integer `{num_str}`"),
    })?;
    let den = match den_str {
        Some(d) => BigInt::from_str(d).map_err(|_| CoeffError::Parse {
            position: offset,
            message: format!("invalid integer `{d}`"),
        })?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return parse_err(offset, "zero denominator");
    }
    if !den.is_positive() {
        return parse_err(offset, "denominator must be positive");
    }
    Ok(Rational::new(num, den))
}

fn parse_pi_term(s: &str, offset: usize) -> Result<(Rational, i64), CoeffError> {
    match s.split_once('*') {
        None => Ok((parse_rational(s, offset)?, 0)),
        Some((q_str, pi_str)) => {
            let q = parse_rational(q_str, offset)?;
            let pi_str = pi_str.trim();
            let inner = pi_str
                .strip_prefix("pi^(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or(CoeffError::Parse {
                    position: offset + s.len() - pi_str.len(),
                    message: format!("expected `pi^(p/2)`, found `{pi_str}`"),
                })?;
            let p_str = inner.strip_suffix("/2").ok_or(CoeffError::Parse {
                position: offset,
                message: "pi power must be written over 2".into(),
            })?;
            let p: i64 = p_str.parse().map_err(|_| CoeffError::Parse {
                position: offset,
                message: format!("invalid half power `{p_str}`"),
            })?;
            Ok((q, p))
        }
    }
}

impl FromStr for PiCoefficient {
    type Err = CoeffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed == "0" {
            return Ok(Self::zero());
        }
        let mut out = Self::zero();
        let mut offset = 0usize;
        for piece in trimmed.split(" + ") {
            let (q, p) = parse_pi_term(piece, offset)?;
            let term = Self::term(q, p);
            if term.is_zero() {
                return parse_err(offset, "explicit zero term is not canonical");
            }
            out = out.add(&term);
            offset += piece.len() + 3;
        }
        Ok(out)
    }
}

/// `Gamma(k + 1/2) = sqrt(pi) * (2k-1)!! / 2^k`, exactly.
pub fn gamma_half(k: u64) -> PiCoefficient {
    let num = double_factorial(2 * k as i64 - 1).expect("2k-1 >= -1");
    let den = BigInt::one() << k;
    PiCoefficient::term(Rational::new(num, den), 1)
}

/// The brace factor `{a, b} = Gamma(a+b+1/2) / ((a+b)! * Gamma(a+1/2))`.
///
/// The two Gamma values each carry one factor of `sqrt(pi)`, which cancels,
/// so the result is an exact rational. `b = -1` is admitted (it occurs in
/// the defining sums) as long as `a + b >= 0`.
pub fn brace_factor(a: u64, b: i64) -> Result<Rational, CoeffError> {
    let s = a as i64 + b;
    if s < 0 {
        return Err(CoeffError::BraceDomain { a: a as i64, b });
    }
    let s = s as u64;
    // (2s-1)!! * 2^a / (s! * 2^s * (2a-1)!!)
    let num = double_factorial(2 * s as i64 - 1)? * (BigInt::one() << a);
    let den = factorial(s) * (BigInt::one() << s) * double_factorial(2 * a as i64 - 1)?;
    Ok(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt_pi() -> PiCoefficient {
        PiCoefficient::pi_power(1)
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1).unwrap(), BigInt::one());
        assert_eq!(double_factorial(0).unwrap(), BigInt::one());
        assert_eq!(double_factorial(5).unwrap(), BigInt::from(15));
        assert_eq!(double_factorial(6).unwrap(), BigInt::from(48));
        assert!(double_factorial(-2).is_err());
    }

    #[test]
    fn gamma_half_values() {
        assert_eq!(gamma_half(0), sqrt_pi());
        assert_eq!(gamma_half(1), PiCoefficient::term(rat(1, 2), 1));
        assert_eq!(gamma_half(3), PiCoefficient::term(rat(15, 8), 1));
    }

    /// Independent numeric Gamma via a 9-term Lanczos approximation
    /// (g = 7); accurate to ~1e-13 on the half-integer arguments used here.
    fn lanczos_gamma(x: f64) -> f64 {
        const G: f64 = 7.0;
        const C: [f64; 9] = [
            0.99999999999980993,
            676.5203681218851,
            -1259.1392167224028,
            771.32342877765313,
            -176.61502916214059,
            12.507343278686905,
            -0.13857109526572012,
            9.9843695780195716e-6,
            1.5056327351493116e-7,
        ];
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + G + 0.5;
        for (i, &c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }

    #[test]
    fn gamma_half_matches_numeric_gamma() {
        for k in 0..12u64 {
            let exact = gamma_half(k).to_f64();
            let numeric = lanczos_gamma(k as f64 + 0.5);
            assert!(
                (exact - numeric).abs() <= 1e-10 * numeric.abs(),
                "k={k}: exact {exact} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn gamma_half_functional_equation() {
        // Gamma(k + 3/2) = (k + 1/2) Gamma(k + 1/2)
        for k in 0..=50u64 {
            let lhs = gamma_half(k + 1);
            let rhs = gamma_half(k).scale(&(rat(1, 2) + Rational::from_integer(BigInt::from(k))));
            assert_eq!(lhs, rhs, "k={k}");
        }
    }

    #[test]
    fn brace_factor_values() {
        assert_eq!(brace_factor(0, 1).unwrap(), rat(1, 2));
        for n in 1..8u64 {
            assert_eq!(
                brace_factor(n, 0).unwrap(),
                Rational::new(BigInt::one(), factorial(n))
            );
        }
        assert_eq!(brace_factor(1, 1).unwrap(), rat(3, 4));
        // Internal b = -1 case used by the Z sums: {a,-1} = 2/((a-1)!(2a-1)).
        assert_eq!(brace_factor(2, -1).unwrap(), rat(2, 3));
        assert!(brace_factor(0, -1).is_err());
    }

    #[test]
    fn brace_factor_denominator_divides() {
        for a in 0..10u64 {
            for b in 0..10i64 {
                let v = brace_factor(a, b).unwrap();
                let bound = factorial(a + b as u64) * (BigInt::one() << (a + b as u64));
                assert!(
                    (bound.clone() % v.denom()).is_zero(),
                    "a={a} b={b}: {} does not divide {bound}",
                    v.denom()
                );
            }
        }
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..12).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_coeff() -> impl Strategy<Value = PiCoefficient> {
        proptest::collection::vec((arb_rational(), -3i64..4), 0..4).prop_map(|terms| {
            terms
                .into_iter()
                .fold(PiCoefficient::zero(), |acc, (q, p)| {
                    acc.add(&PiCoefficient::term(q, p))
                })
        })
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_coeff(), b in arb_coeff(), c in arb_coeff()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.sub(&a), PiCoefficient::zero());
        }

        #[test]
        fn text_round_trip(a in arb_coeff()) {
            let text = a.to_string();
            let back: PiCoefficient = text.parse().unwrap();
            prop_assert_eq!(back, a);
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(PiCoefficient::zero().to_string(), "0");
        assert_eq!(PiCoefficient::from_rational(rat(1, 2)).to_string(), "1/2");
        assert_eq!(
            PiCoefficient::term(rat(2, 1), -1).to_string(),
            "2 * pi^(-1/2)"
        );
        let mixed = PiCoefficient::from_rational(rat(3, 4)).add(&PiCoefficient::term(rat(1, 2), 1));
        assert_eq!(mixed.to_string(), "3/4 + 1/2 * pi^(1/2)");
        assert_eq!(
            "3/4 + 1/2 * pi^(1/2)".parse::<PiCoefficient>().unwrap(),
            mixed
        );
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!("pi".parse::<PiCoefficient>().is_err());
        assert!("1/0".parse::<PiCoefficient>().is_err());
        assert!("1 * pi^(1/3)".parse::<PiCoefficient>().is_err());
        let err = "1 + x".parse::<PiCoefficient>().unwrap_err();
        match err {
            CoeffError::Parse { position, .. } => assert!(position > 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn recip_of_single_term() {
        let g = gamma_half(2); // 3/4 sqrt(pi)
        let r = g.recip().unwrap();
        assert_eq!(g.mul(&r), PiCoefficient::one());
        assert!(PiCoefficient::zero().recip().is_err());
        let two_terms = PiCoefficient::one().add(&sqrt_pi());
        assert!(two_terms.recip().is_err());
    }
}
