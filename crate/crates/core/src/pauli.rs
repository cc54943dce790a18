//! Exact symbolic algebra of n-qubit Pauli strings and their complex linear
//! combinations.
//!
//! Coefficients are Gaussian rationals, so every product, adjoint and
//! expectation in this module is exact. Single-site products follow the
//! cyclic convention `XY = iZ`, `YZ = iX`, `ZX = iY`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

/// Exact complex coefficient with rational real and imaginary parts.
pub type Coeff = Complex<Rational64>;

pub fn coeff(re: i64, im: i64) -> Coeff {
    Complex::new(Rational64::from_integer(re), Rational64::from_integer(im))
}

pub fn coeff_ratio(re: (i64, i64), im: (i64, i64)) -> Coeff {
    Complex::new(Rational64::new(re.0, re.1), Rational64::new(im.0, im.1))
}

pub fn coeff_to_f64(c: &Coeff) -> Complex<f64> {
    Complex::new(ratio_to_f64(&c.re), ratio_to_f64(&c.im))
}

pub fn ratio_to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("dimension mismatch: {left} sites vs {right} sites")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
}

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    /// Product of two letters on the same site, as `(power of i, letter)`.
    pub fn times(self, other: Letter) -> (Phase, Letter) {
        use Letter::*;
        let (power, letter) = match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        };
        (Phase(power), letter)
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// A phase `i^k`, stored as `k mod 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u8) -> Phase {
        Phase(k % 4)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_coeff(self) -> Coeff {
        match self.0 {
            0 => coeff(1, 0),
            1 => coeff(0, 1),
            2 => coeff(-1, 0),
            _ => coeff(0, -1),
        }
    }

    /// Recovers a phase from a unit coefficient in `{±1, ±i}`.
    pub fn from_coeff(c: &Coeff) -> Option<Phase> {
        [Phase::ONE, Phase::I, Phase::MINUS_ONE, Phase::MINUS_I].into_iter().find(|p| p.to_coeff() == *c)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

/// A phase times a tensor product of Pauli letters, one per site.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    pub phase: Phase,
    pub letters: Vec<Letter>,
}

impl PauliString {
    pub fn new(phase: Phase, letters: Vec<Letter>) -> Self {
        Self { phase, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Phase::ONE, vec![Letter::I; n])
    }

    /// `letter` on `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, letter: Letter) -> Self {
        assert!(site < n, "site {site} out of range for {n} sites");
        let mut letters = vec![Letter::I; n];
        letters[site] = letter;
        Self::new(Phase::ONE, letters)
    }

    pub fn num_sites(&self) -> usize {
        self.letters.len()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|l| **l != Letter::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.letters.iter().enumerate().filter(|(_, l)| **l != Letter::I).map(|(i, _)| i).collect()
    }

    pub fn is_identity_letters(&self) -> bool {
        self.letters.iter().all(|l| *l == Letter::I)
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        check_dims(self.num_sites(), other.num_sites())?;
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (p, l) = a.times(*b);
                phase = phase * p;
                l
            })
            .collect();
        Ok(PauliString::new(phase, letters))
    }

    pub fn dagger(&self) -> PauliString {
        PauliString::new(self.phase.conj(), self.letters.clone())
    }

    /// Whether the letter parts commute (phases never matter for this).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anticommuting = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Letter::I && **b != Letter::I && a != b)
            .count();
        anticommuting % 2 == 0
    }

    /// Every `n`-site letter string, in lexicographic order (identity first).
    pub fn all(n: usize) -> Vec<PauliString> {
        let mut out = vec![PauliString::identity(n)];
        for site in 0..n {
            let prev = std::mem::take(&mut out);
            for p in prev {
                for l in Letter::ALL {
                    let mut q = p.clone();
                    q.letters[site] = l;
                    out.push(q);
                }
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parses `"XIZ"`, `"-XIZ"`, `"+iY"`, `"-iZZ"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else {
            (Phase::ONE, s)
        };
        if rest.is_empty() {
            return Err(PauliError::Parse(s.to_string()));
        }
        let letters = rest
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| PauliError::Parse(s.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(PauliString::new(phase, letters))
    }
}

/// A finite complex linear combination of Pauli letter strings.
///
/// Terms with zero coefficient are never stored, so structural equality is
/// operator equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    terms: BTreeMap<Vec<Letter>, Coeff>,
}

impl PauliOperator {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from(PauliString::identity(n))
    }

    pub fn single(n: usize, site: usize, letter: Letter) -> Self {
        Self::from(PauliString::single(n, site, letter))
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (Coeff, PauliString)>,
    {
        let mut op = Self::zero(n);
        for (c, p) in terms {
            check_dims(n, p.num_sites())?;
            op.add_term(c * p.phase.to_coeff(), p.letters);
        }
        Ok(op)
    }

    fn add_term(&mut self, c: Coeff, letters: Vec<Letter>) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(letters) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = *e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Letter>, &Coeff)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, letters: &[Letter]) -> Coeff {
        self.terms.get(letters).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Sites on which at least one term acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&s| self.terms.keys().any(|l| l[s] != Letter::I)).collect()
    }

    /// The operator as a single phased Pauli string, when it is one.
    pub fn as_pauli_string(&self) -> Option<PauliString> {
        if self.terms.len() != 1 {
            return None;
        }
        let (letters, c) = self.terms.iter().next()?;
        Phase::from_coeff(c).map(|p| PauliString::new(p, letters.clone()))
    }

    pub fn scale(&self, c: &Coeff) -> PauliOperator {
        let mut out = Self::zero(self.n);
        for (l, v) in &self.terms {
            out.add_term(*v * *c, l.clone());
        }
        out
    }

    pub fn add(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        check_dims(self.n, other.n)?;
        let mut out = self.clone();
        for (l, c) in &other.terms {
            out.add_term(*c, l.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        self.add(&other.scale(&coeff(-1, 0)))
    }

    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        check_dims(self.n, other.n)?;
        let mut out = Self::zero(self.n);
        for (la, ca) in &self.terms {
            for (lb, cb) in &other.terms {
                let a = PauliString::new(Phase::ONE, la.clone());
                let b = PauliString::new(Phase::ONE, lb.clone());
                let p = a.mul(&b)?;
                out.add_term(*ca * *cb * p.phase.to_coeff(), p.letters);
            }
        }
        Ok(out)
    }

    pub fn dagger(&self) -> PauliOperator {
        let mut out = Self::zero(self.n);
        for (l, c) in &self.terms {
            out.add_term(c.conj(), l.clone());
        }
        out
    }

    pub fn commutator(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn is_hermitian(&self) -> bool {
        self.dagger() == *self
    }
}

impl From<PauliString> for PauliOperator {
    fn from(p: PauliString) -> Self {
        let mut op = PauliOperator::zero(p.num_sites());
        op.add_term(p.phase.to_coeff(), p.letters);
        op
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (letters, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})", format_coeff(c))?;
            for l in letters {
                write!(f, "{}", l.as_char())?;
            }
        }
        Ok(())
    }
}

pub fn format_coeff(c: &Coeff) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => c.re.to_string(),
        (true, false) => format!("{}i", c.im),
        (false, false) => format!("{}{:+}i", c.re, c.im),
    }
}

fn check_dims(left: usize, right: usize) -> Result<(), PauliError> {
    if left == right {
        Ok(())
    } else {
        Err(PauliError::DimensionMismatch { left, right })
    }
}

/// The Heisenberg state: the simultaneous +1 eigenvector of every
/// single-site `Z`, i.e. `|0…0⟩⟨0…0|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeisenbergState {
    n: usize,
}

impl HeisenbergState {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    /// `Tr(o ρ)`, exact. Only strings built from `I` and `Z` have a
    /// non-zero diagonal entry at `|0…0⟩`, and that entry is 1.
    pub fn expectation(&self, o: &PauliOperator) -> Result<Coeff, PauliError> {
        check_dims(o.num_sites(), self.n)?;
        Ok(o.terms()
            .filter(|(l, _)| l.iter().all(|x| matches!(x, Letter::I | Letter::Z)))
            .fold(Coeff::zero(), |acc, (_, c)| acc + *c))
    }
}

pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString, PauliError> {
    a.mul(b)
}

pub fn op_mul(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator, PauliError> {
    a.mul(b)
}

pub fn dagger(a: &PauliOperator) -> PauliOperator {
    a.dagger()
}

pub fn commutator(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator, PauliError> {
    a.commutator(b)
}

pub fn expectation(o: &PauliOperator, s: &HeisenbergState) -> Result<Coeff, PauliError> {
    s.expectation(o)
}
