//! Exact arithmetic over `Q(i)[√2]` and small dense matrices over it.
//!
//! Clifford gates such as the Hadamard have entries `±1/√2`; every entry of
//! every gate used here is `a + b√2` with Gaussian-rational `a`, `b`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::Zero;

use crate::pauli::{coeff, coeff_ratio, coeff_to_f64, Coeff, Letter, PauliOperator, PauliString, Phase};

/// `rational + sqrt2 · √2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    pub rational: Coeff,
    pub sqrt2: Coeff,
}

impl Surd {
    pub fn zero() -> Self {
        Self { rational: Coeff::zero(), sqrt2: Coeff::zero() }
    }

    pub fn one() -> Self {
        Self::from(coeff(1, 0))
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Self { rational: Coeff::zero(), sqrt2: coeff_ratio((1, 2), (0, 1)) }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.sqrt2.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { rational: self.rational.conj(), sqrt2: self.sqrt2.conj() }
    }

    /// The value as a Gaussian rational, if the `√2` part vanishes.
    pub fn as_rational(&self) -> Option<Coeff> {
        self.sqrt2.is_zero().then_some(self.rational)
    }

    pub fn to_c64(&self) -> Complex<f64> {
        coeff_to_f64(&self.rational) + coeff_to_f64(&self.sqrt2) * std::f64::consts::SQRT_2
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        Self { rational: self.rational * *c, sqrt2: self.sqrt2 * *c }
    }
}

impl From<Coeff> for Surd {
    fn from(rational: Coeff) -> Self {
        Self { rational, sqrt2: Coeff::zero() }
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        Surd { rational: self.rational + rhs.rational, sqrt2: self.sqrt2 + rhs.sqrt2 }
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        self + &(-rhs)
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { rational: -self.rational, sqrt2: -self.sqrt2 }
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let two = Complex::new(Rational64::from_integer(2), Rational64::zero());
        Surd {
            rational: self.rational * rhs.rational + two * self.sqrt2 * rhs.sqrt2,
            sqrt2: self.rational * rhs.sqrt2 + self.sqrt2 * rhs.rational,
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::pauli::format_coeff(&self.rational))?;
        if !self.sqrt2.is_zero() {
            write!(f, " + ({})√2", crate::pauli::format_coeff(&self.sqrt2))?;
        }
        Ok(())
    }
}

/// Dense square matrix over [`Surd`], row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    dim: usize,
    entries: Vec<Surd>,
}

impl ExactMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Surd::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Surd::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Surd>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self { dim, entries: rows.into_iter().flatten().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &Surd {
        &self.entries[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Surd) {
        self.entries[r * self.dim + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn mul(&self, rhs: &ExactMatrix) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = rhs.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let v = &out.entries[r * n + c] + &(a * b);
                    out.entries[r * n + c] = v;
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn is_unitary(&self) -> bool {
        self.adjoint().mul(self).is_identity()
    }

    pub fn to_c64(&self) -> nalgebra::DMatrix<Complex<f64>> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c).to_c64())
    }

    /// Embeds a `2^k`-dimensional operator acting on `sites` (in the given
    /// order, first site most significant) into `n` qubits. Site 0 is the
    /// most significant bit of the basis index.
    pub fn embed(local: &ExactMatrix, sites: &[usize], n: usize) -> Self {
        assert_eq!(local.dim, 1 << sites.len(), "local operator size does not match site count");
        let dim = 1usize << n;
        let bit = |index: usize, site: usize| (index >> (n - 1 - site)) & 1;
        let local_index = |index: usize| sites.iter().fold(0, |acc, &s| (acc << 1) | bit(index, s));
        let rest_mask: usize = (0..n).filter(|s| !sites.contains(s)).fold(0, |acc, s| acc | (1 << (n - 1 - s)));
        let mut out = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                if r & rest_mask != c & rest_mask {
                    continue;
                }
                let v = local.get(local_index(r), local_index(c));
                if !v.is_zero() {
                    out.set(r, c, v.clone());
                }
            }
        }
        out
    }

    /// Matrix of a Pauli operator on `n` qubits.
    pub fn from_pauli(op: &PauliOperator) -> Self {
        let n = op.num_sites();
        let dim = 1usize << n;
        let mut out = Self::zeros(dim);
        for (letters, c) in op.terms() {
            for col in 0..dim {
                let (row, phase) = pauli_column(letters, col);
                let v = &out.entries[row * dim + col] + &Surd::from(*c * phase.to_coeff());
                out.entries[row * dim + col] = v;
            }
        }
        out
    }

    /// Exact Pauli decomposition `Σ_Q Tr(Q M)/2^n · Q`. Returns `None` when
    /// some coefficient has a non-vanishing `√2` part.
    pub fn to_pauli(&self, n: usize) -> Option<PauliOperator> {
        assert_eq!(self.dim, 1 << n);
        let norm = coeff_ratio((1, 1 << n), (0, 1));
        let mut terms = Vec::new();
        for q in PauliString::all(n) {
            // Q|k⟩ = phase(k)|k'⟩, so Tr(Q M) = Σ_k phase(k) · M[k][k'].
            let mut tr = Surd::zero();
            for row in 0..self.dim {
                let (col, phase) = pauli_column(&q.letters, row);
                let m = self.get(row, col);
                if !m.is_zero() {
                    tr = &tr + &m.scale(&phase.to_coeff());
                }
            }
            let c = tr.as_rational()?;
            if !c.is_zero() {
                terms.push((c * norm, q));
            }
        }
        Some(PauliOperator::from_terms(n, terms).expect("sizes agree"))
    }
}

/// `P|col⟩ = phase · |row⟩` for a letter string `P`.
fn pauli_column(letters: &[Letter], col: usize) -> (usize, Phase) {
    let n = letters.len();
    let mut row = col;
    let mut phase = Phase::ONE;
    for (site, l) in letters.iter().enumerate() {
        let shift = n - 1 - site;
        let b = (col >> shift) & 1;
        match l {
            Letter::I => {}
            Letter::X => row ^= 1 << shift,
            Letter::Y => {
                row ^= 1 << shift;
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                phase = phase * if b == 0 { Phase::I } else { Phase::MINUS_I };
            }
            Letter::Z => {
                if b == 1 {
                    phase = phase * Phase::MINUS_ONE;
                }
            }
        }
    }
    (row, phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        let s = Surd::inv_sqrt2();
        assert_eq!(&s * &s, Surd::from(coeff_ratio((1, 2), (0, 1))));
    }

    #[test]
    fn pauli_matrices_round_trip() {
        for s in ["XYZ", "-iZIX", "IYI"] {
            let p = PauliOperator::from(s.parse::<PauliString>().unwrap());
            let m = ExactMatrix::from_pauli(&p);
            assert!(m.is_unitary());
            assert_eq!(m.to_pauli(3).unwrap(), p);
        }
    }

    #[test]
    fn matrix_product_matches_pauli_product() {
        let a = PauliOperator::from("ZX".parse::<PauliString>().unwrap());
        let b = PauliOperator::from("XY".parse::<PauliString>().unwrap());
        let m = ExactMatrix::from_pauli(&a).mul(&ExactMatrix::from_pauli(&b));
        assert_eq!(m.to_pauli(2).unwrap(), a.mul(&b).unwrap());
    }

    #[test]
    fn y_matrix_has_expected_entries() {
        let y = ExactMatrix::from_pauli(&PauliOperator::single(1, 0, Letter::Y));
        assert_eq!(*y.get(0, 1), Surd::from(coeff(0, -1)));
        assert_eq!(*y.get(1, 0), Surd::from(coeff(0, 1)));
    }

    #[test]
    fn embedding_respects_site_order() {
        let x = ExactMatrix::from_pauli(&PauliOperator::single(1, 0, Letter::X));
        let embedded = ExactMatrix::embed(&x, &[2], 3);
        assert_eq!(embedded.to_pauli(3).unwrap(), PauliOperator::single(3, 2, Letter::X));
        let xz = ExactMatrix::from_pauli(&PauliOperator::from("XZ".parse::<PauliString>().unwrap()));
        let swapped = ExactMatrix::embed(&xz, &[2, 0], 3);
        assert_eq!(swapped.to_pauli(3).unwrap(), PauliOperator::from("ZIX".parse::<PauliString>().unwrap()));
    }
}
