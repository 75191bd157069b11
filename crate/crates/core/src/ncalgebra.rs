//! The free graded algebra on the two generators `N` (degree one) and the
//! Laplacian (degree two): words, operator-valued polynomials with
//! [`PiCoefficient`] coefficients, the bar/tilde decomposition by the final
//! letter of each word, and the weight homomorphism `w(N) = 2, w(Lap) = -1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffring::{CoeffError, PiCoefficient, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("bar/tilde decomposition needs a zero identity component")]
    IdentityComponent,
    #[error("operator parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// One of the two algebra generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    /// Degree one; acts radially as `f -> 2 f' - eta f`.
    N,
    /// Degree two; the Laplacian, acting radially as `f -> -f'' + eta f'`.
    Lap,
}

impl Generator {
    pub fn degree(self) -> usize {
        match self {
            Generator::N => 1,
            Generator::Lap => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Generator::N => 'N',
            Generator::Lap => 'D',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'N' => Some(Generator::N),
            'D' => Some(Generator::Lap),
            _ => None,
        }
    }
}

/// A monomial: a finite (possibly empty) sequence of generators. The empty
/// word is the identity. The total degree is kept alongside the letters so
/// the canonical ordering never rescans the word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Generator>,
    degree: usize,
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(letters: Vec<Generator>) -> Self {
        let degree = letters.iter().map(|g| g.degree()).sum();
        Self { letters, degree }
    }

    pub fn generator(g: Generator) -> Self {
        Self {
            degree: g.degree(),
            letters: vec![g],
        }
    }

    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word {
            letters,
            degree: self.degree + other.degree,
        }
    }

    pub fn last(&self) -> Option<Generator> {
        self.letters.last().copied()
    }

    /// The word with its final letter removed.
    pub fn drop_last(&self) -> Word {
        let mut letters = self.letters.clone();
        let dropped = letters.pop().map_or(0, |g| g.degree());
        Word {
            letters,
            degree: self.degree - dropped,
        }
    }

    /// `2^(#N) * (-1)^(#Lap)` as an integer.
    pub fn weight(&self) -> BigInt {
        let n_count = self.letters.iter().filter(|g| **g == Generator::N).count();
        let l_count = self.letters.len() - n_count;
        let mut w = BigInt::one() << n_count;
        if l_count % 2 == 1 {
            w = -w;
        }
        w
    }

    pub fn text(&self) -> String {
        self.letters.iter().map(|g| g.letter()).collect()
    }
}

impl Ord for Word {
    /// Canonical total order: ascending degree, then lexicographic with
    /// `N < Lap`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, g) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", g.letter())?;
        }
        write!(f, "]")
    }
}

/// Machine-readable form of one operator term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTermRecord {
    /// The word as a string of `N`/`D` letters; empty for the identity.
    pub word: String,
    pub coefficient: PiTermRecord,
}

/// One `q * pi^(p/2)` term with the rational carried as decimal strings, so
/// arbitrary-precision values survive JSON round trips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiTermRecord {
    pub num: String,
    pub den: String,
    pub half_pi_power: i64,
}

/// A finitely supported coefficient map over words, i.e. an element of the
/// free algebra with [`PiCoefficient`] scalars. No zero coefficients are
/// stored, and iteration follows the canonical word order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Operator {
    coeffs: BTreeMap<Word, PiCoefficient>,
}

impl Operator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::from_word(Word::identity())
    }

    pub fn generator(g: Generator) -> Self {
        Self::from_word(Word::generator(g))
    }

    pub fn from_word(word: Word) -> Self {
        Self::from_term(word, PiCoefficient::one())
    }

    pub fn from_term(word: Word, coeff: PiCoefficient) -> Self {
        let mut coeffs = BTreeMap::new();
        if !coeff.is_zero() {
            coeffs.insert(word, coeff);
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, word: &Word) -> PiCoefficient {
        self.coeffs.get(word).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &PiCoefficient)> {
        self.coeffs.iter()
    }

    pub fn word_count(&self) -> usize {
        self.coeffs.len()
    }

    /// The common degree of all stored words, when the operator is
    /// homogeneous (the zero operator reports degree 0).
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut iter = self.coeffs.keys();
        let first = match iter.next() {
            None => return Some(0),
            Some(w) => w.degree(),
        };
        iter.all(|w| w.degree() == first).then_some(first)
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.clone().add_owned(other.clone())
    }

    /// In-place sum, consuming both sides; the workhorse of the recursion
    /// engine, where intermediate operators run to tens of thousands of
    /// terms and a copying `add` would dominate the runtime.
    pub fn add_owned(mut self, other: Self) -> Self {
        for (w, c) in other.coeffs {
            match self.coeffs.entry(w) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    slot.get_mut().add_assign(&c);
                    if slot.get().is_zero() {
                        slot.remove();
                    }
                }
            }
        }
        self
    }

    pub fn sub_owned(self, other: Self) -> Self {
        self.add_owned(other.neg_owned())
    }

    fn neg_owned(mut self) -> Self {
        for c in self.coeffs.values_mut() {
            *c = c.neg();
        }
        self
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(w, c)| (w.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &PiCoefficient) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(w, c)| (w.clone(), c.mul(s)))
                .collect(),
        }
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        self.scale(&PiCoefficient::from_rational(q.clone()))
    }

    /// Bilinear extension of word concatenation.
    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs: BTreeMap<Word, PiCoefficient> = BTreeMap::new();
        for (w1, c1) in &self.coeffs {
            for (w2, c2) in &other.coeffs {
                let word = w1.concat(w2);
                coeffs.entry(word).or_default().add_assign(&c1.mul(c2));
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self { coeffs }
    }

    fn split_by_last(&self, target: Generator) -> Result<Operator, AlgebraError> {
        if self.coeffs.keys().any(|w| w.is_identity()) {
            return Err(AlgebraError::IdentityComponent);
        }
        let mut out = Operator::zero();
        for (w, c) in &self.coeffs {
            if w.last() == Some(target) {
                out = out.add(&Operator::from_term(w.drop_last(), c.clone()));
            }
        }
        Ok(out)
    }

    /// The bar component: words ending in `N`, with the trailing `N`
    /// removed. Defined only for operators with zero identity component,
    /// where `a = bar(a) N + tilde(a) Lap` holds exactly.
    pub fn bar_part(&self) -> Result<Operator, AlgebraError> {
        self.split_by_last(Generator::N)
    }

    /// The tilde component: words ending in the Laplacian, trailing letter
    /// removed.
    pub fn tilde_part(&self) -> Result<Operator, AlgebraError> {
        self.split_by_last(Generator::Lap)
    }

    /// The weight homomorphism `w(I) = 1, w(N) = 2, w(Lap) = -1` extended
    /// linearly over the coefficients.
    pub fn weight(&self) -> PiCoefficient {
        let mut acc = PiCoefficient::zero();
        for (w, c) in &self.coeffs {
            acc = acc.add(&c.scale(&Rational::from_integer(w.weight())));
        }
        acc
    }

    /// Flat record export, one entry per `(word, pi-term)` pair, words in
    /// canonical order and pi powers ascending within a word.
    pub fn to_records(&self) -> Vec<OperatorTermRecord> {
        let mut out = Vec::new();
        for (w, c) in &self.coeffs {
            for t in c.terms() {
                out.push(OperatorTermRecord {
                    word: w.text(),
                    coefficient: PiTermRecord {
                        num: t.value.numer().to_string(),
                        den: t.value.denom().to_string(),
                        half_pi_power: t.half_pi_power,
                    },
                });
            }
        }
        out
    }
}

impl fmt::Display for Operator {
    /// Canonical text form: `coeff * [L1 L2 ...]` terms joined by ` + `,
    /// words in canonical order. A coefficient that is a bare rational
    /// prints unparenthesized; anything else is wrapped in parentheses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_rational() {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})")?;
            }
            write!(f, " * {w}")?;
        }
        Ok(())
    }
}

fn parse_word(s: &str, offset: usize) -> Result<Word, AlgebraError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or(AlgebraError::Parse {
            position: offset,
            message: format!("expected `[...]`, found `{s}`"),
        })?;
    let mut letters = Vec::new();
    for (i, piece) in inner.split_whitespace().enumerate() {
        let mut chars = piece.chars();
        let c = chars.next().unwrap();
        if chars.next().is_some() {
            return Err(AlgebraError::Parse {
                position: offset + 1 + i,
                message: format!("generator must be a single letter, found `{piece}`"),
            });
        }
        let g = Generator::from_letter(c).ok_or(AlgebraError::Parse {
            position: offset + 1 + i,
            message: format!("unknown generator `{c}` (expected N or D)"),
        })?;
        letters.push(g);
    }
    Ok(Word::new(letters))
}

/// Splits on ` + ` at parenthesis depth zero, yielding `(offset, piece)`.
fn split_top_level(s: &str) -> Vec<(usize, &str)> {
    let bytes = s.as_bytes();
    let mut pieces = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut i = 0usize;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth = depth.saturating_sub(1),
            b' ' if depth == 0 && bytes[i..].starts_with(b" + ") => {
                pieces.push((start, &s[start..i]));
                i += 3;
                start = i;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    pieces.push((start, &s[start..]));
    pieces
}

/// Parses the canonical operator text form produced by `Display`.
pub fn parse_operator(s: &str) -> Result<Operator, AlgebraError> {
    let trimmed = s.trim();
    if trimmed == "0" {
        return Ok(Operator::zero());
    }
    let mut out = Operator::zero();
    for (offset, piece) in split_top_level(trimmed) {
        let bracket = piece.rfind('[').ok_or(AlgebraError::Parse {
            position: offset,
            message: "term has no word part `[...]`".into(),
        })?;
        let word = parse_word(piece[bracket..].trim(), offset + bracket)?;
        let coeff_str = piece[..bracket]
            .trim()
            .strip_suffix('*')
            .ok_or(AlgebraError::Parse {
                position: offset,
                message: "expected `coeff * [word]`".into(),
            })?
            .trim();
        let coeff_src = if coeff_str.starts_with('(') && coeff_str.ends_with(')') {
            &coeff_str[1..coeff_str.len() - 1]
        } else {
            coeff_str
        };
        let coeff: PiCoefficient = coeff_src.parse().map_err(|e| match e {
            CoeffError::Parse { position, message } => AlgebraError::Parse {
                position: offset + position,
                message,
            },
            other => AlgebraError::Coeff(other),
        })?;
        out = out.add(&Operator::from_term(word, coeff));
    }
    Ok(out)
}

/// Serializes an operator to its canonical, byte-stable text form.
pub fn serialize_operator(a: &Operator) -> String {
    a.to_string()
}

pub mod reference {
    //! The first six heat-content operators, entered by hand from their
    //! closed forms. Frozen expectations for the recursion engine: the
    //! table-reproduction check compares the computed operators against
    //! these, term by term.

    use super::*;
    use crate::coeffring::rat;

    /// Builds a word from its letter string, e.g. `"ND"`.
    pub fn word(letters: &str) -> Word {
        Word::new(
            letters
                .chars()
                .map(|c| Generator::from_letter(c).expect("N or D"))
                .collect(),
        )
    }

    fn op(terms: &[(&str, Rational, i64)]) -> Operator {
        let mut out = Operator::zero();
        for (w, q, p) in terms {
            out = out.add(&Operator::from_term(
                word(w),
                PiCoefficient::term(q.clone(), *p),
            ));
        }
        out
    }

    pub fn d1() -> Operator {
        op(&[("", rat(2, 1), -1)])
    }

    pub fn d2() -> Operator {
        op(&[("N", rat(1, 2), 0)])
    }

    pub fn d3() -> Operator {
        op(&[("NN", rat(1, 6), -1), ("D", rat(-4, 6), -1)])
    }

    pub fn d4() -> Operator {
        op(&[("DN", rat(-1, 16), 0), ("ND", rat(-3, 16), 0)])
    }

    pub fn d5() -> Operator {
        op(&[
            ("NNNN", rat(-1, 240), -1),
            ("NND", rat(-16, 240), -1),
            ("NDN", rat(-8, 240), -1),
            ("DD", rat(48, 240), -1),
        ])
    }

    pub fn d6() -> Operator {
        op(&[
            ("DNNN", rat(1, 768), 0),
            ("NNND", rat(-1, 768), 0),
            ("NDNN", rat(1, 768), 0),
            ("NNDN", rat(-1, 768), 0),
            ("NDD", rat(40, 768), 0),
            ("DDN", rat(8, 768), 0),
            ("DND", rat(16, 768), 0),
        ])
    }

    /// The table rows `D_1..D_6` in order.
    pub fn d_table() -> Vec<Operator> {
        vec![d1(), d2(), d3(), d4(), d5(), d6()]
    }
}
