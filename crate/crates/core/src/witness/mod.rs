//! Two-qubit entanglement witnesses and protocols in which a classical
//! register mediates between qubits `A` and `B`.
//!
//! Two-qubit matrices use the basis `|A⟩⊗|B⟩`, `A` most significant, so
//! index `2a + b`. The partial transpose is taken over `B`.

mod reference;
mod search;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::heisenberg::{pauli_c64, HeisenbergError, C64};
use crate::pauli::Letter;

pub use reference::{entanglement_onset, run_quantum_mediator_reference, EntanglementOnset, QuantumReference};
pub use search::{named_pipelines, sample_final_states, search_classical_protocols, SearchConfig, SearchSummary};

/// Hermiticity, trace and positivity checks, and "perfect" distinctions.
pub const STRUCTURAL_TOLERANCE: f64 = 1e-10;
/// Agreement between the closed-form CHSH value and numeric optimization.
pub const OPTIMIZATION_TOLERANCE: f64 = 1e-6;
/// Total branch probability must stay within this of 1.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Branches lighter than this are dropped rather than renormalized.
const NEGLIGIBLE_WEIGHT: f64 = 1e-15;

pub type Qubit = Matrix2<C64>;
pub type TwoQubit = Matrix4<C64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("trace is {0}, expected 1")]
    NotUnitTrace(f64),
    #[error("instrument is not trace preserving for label {label} (deviation {deviation:.3e})")]
    NotTracePreserving { label: usize, deviation: f64 },
    #[error("instrument has shape {found}, expected {expected} labels")]
    InstrumentShape { expected: usize, found: usize },
    #[error("mediator label {label} out of range for dimension {d}")]
    LabelOutOfRange { label: usize, d: usize },
    #[error("branch probabilities sum to {0}")]
    ProbabilityMismatch(f64),
    #[error("branch probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error(transparent)]
    Simulation(#[from] HeisenbergError),
}

pub fn kron(a: &Qubit, b: &Qubit) -> TwoQubit {
    a.kronecker(b)
}

pub fn pure_density(psi: &Vector4<C64>) -> TwoQubit {
    psi * psi.adjoint()
}

pub fn pure_qubit(psi: &Vector2<C64>) -> Qubit {
    psi * psi.adjoint()
}

/// `(ρ^{T_B})_{(a b),(a' b')} = ρ_{(a b'),(a' b)}`.
pub fn partial_transpose_b(rho: &TwoQubit) -> TwoQubit {
    TwoQubit::from_fn(|r, c| {
        let (a, b, a2, b2) = (r / 2, r % 2, c / 2, c % 2);
        rho[(2 * a + b2, 2 * a2 + b)]
    })
}

/// `tr_B ρ`.
pub fn marginal_a(rho: &TwoQubit) -> Qubit {
    Qubit::from_fn(|a, a2| rho[(2 * a, 2 * a2)] + rho[(2 * a + 1, 2 * a2 + 1)])
}

/// `tr_A ρ`.
pub fn marginal_b(rho: &TwoQubit) -> Qubit {
    Qubit::from_fn(|b, b2| rho[(b, b2)] + rho[(2 + b, 2 + b2)])
}

fn dynamic<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> DMatrix<C64>
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `½ ‖ρ − σ‖₁` for Hermitian matrices of equal size.
pub fn trace_distance(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    0.5 * hermitian_eigenvalues(&(rho - sigma)).iter().map(|x| x.abs()).sum::<f64>()
}

pub fn trace_distance_qubit(rho: &Qubit, sigma: &Qubit) -> f64 {
    trace_distance(&dynamic(rho), &dynamic(sigma))
}

pub fn trace_distance_two_qubit(rho: &TwoQubit, sigma: &TwoQubit) -> f64 {
    trace_distance(&dynamic(rho), &dynamic(sigma))
}

/// Checks Hermiticity, unit trace and positivity within [`STRUCTURAL_TOLERANCE`].
pub fn validate_density(rho: &DMatrix<C64>) -> Result<(), WitnessError> {
    let asym = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > STRUCTURAL_TOLERANCE {
        return Err(WitnessError::NotHermitian(asym));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > STRUCTURAL_TOLERANCE || tr.im.abs() > STRUCTURAL_TOLERANCE {
        return Err(WitnessError::NotUnitTrace(tr.re));
    }
    let min = hermitian_eigenvalues(rho)[0];
    if min < -STRUCTURAL_TOLERANCE {
        return Err(WitnessError::NotPositive(min));
    }
    Ok(())
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^{T_B}`.
pub fn negativity(rho: &TwoQubit) -> Result<f64, WitnessError> {
    validate_density(&dynamic(rho))?;
    let ev = hermitian_eigenvalues(&dynamic(&partial_transpose_b(rho)));
    Ok(ev.iter().filter(|&&x| x < 0.0).fold(0.0, |acc, x| acc - x))
}

/// `T_ij = tr(ρ σ_i ⊗ σ_j)` for `i, j ∈ {x, y, z}`.
pub fn correlation_matrix(rho: &TwoQubit) -> Matrix3<f64> {
    let axes = [Letter::X, Letter::Y, Letter::Z];
    Matrix3::from_fn(|i, j| {
        let op = kron(&pauli_c64(axes[i]), &pauli_c64(axes[j]));
        (rho * op).trace().re
    })
}

/// `2 √(s₁² + s₂²)` with `s₁ ≥ s₂` the largest singular values of `T`.
pub fn chsh_max(rho: &TwoQubit) -> f64 {
    let mut s: Vec<f64> = correlation_matrix(rho).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    2.0 * (s[0] * s[0] + s[1] * s[1]).sqrt()
}

fn spin(theta: f64, phi: f64) -> Qubit {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    pauli_c64(Letter::X) * Complex::from(st * cp)
        + pauli_c64(Letter::Y) * Complex::from(st * sp)
        + pauli_c64(Letter::Z) * Complex::from(ct)
}

/// `⟨A B⟩ + ⟨A B'⟩ + ⟨A' B⟩ − ⟨A' B'⟩` for spin observables along the
/// directions `(θ, φ)` given in order `a, a', b, b'`.
pub fn chsh_value(rho: &TwoQubit, angles: &[f64; 8]) -> f64 {
    let [a, a2, b, b2] = [0, 2, 4, 6].map(|k| spin(angles[k], angles[k + 1]));
    let e = |x: &Qubit, y: &Qubit| (rho * kron(x, y)).trace().re;
    e(&a, &b) + e(&a, &b2) + e(&a2, &b) - e(&a2, &b2)
}

/// Maximizes [`chsh_value`] over measurement directions by seeded
/// multi-start pattern search.
pub fn chsh_by_angles(rho: &TwoQubit, starts: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..starts.max(1) {
        let mut x: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let mut value = chsh_value(rho, &x);
        let mut step = 0.5;
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..8 {
                for delta in [step, -step] {
                    let mut y = x;
                    y[k] += delta;
                    let v = chsh_value(rho, &y);
                    if v > value {
                        x = y;
                        value = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(value);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub negativity: f64,
    pub chsh: f64,
    /// The correlation matrix the CHSH value was computed from, row-major.
    pub correlators: [[f64; 3]; 3],
}

impl EntanglementReport {
    pub fn of(rho: &TwoQubit) -> Result<Self, WitnessError> {
        let t = correlation_matrix(rho);
        Ok(Self {
            negativity: negativity(rho)?,
            chsh: chsh_max(rho),
            correlators: std::array::from_fn(|i| std::array::from_fn(|j| t[(i, j)])),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub label: usize,
    pub rho: TwoQubit,
}

/// A classical `d`-valued mediator correlated with a two-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    d: usize,
    branches: Vec<Branch>,
}

impl HybridState {
    pub fn new(d: usize, branches: Vec<Branch>) -> Result<Self, WitnessError> {
        let mut total = 0.0;
        for b in &branches {
            if !(0.0..=1.0).contains(&b.probability) {
                return Err(WitnessError::BadProbability(b.probability));
            }
            if b.label >= d {
                return Err(WitnessError::LabelOutOfRange { label: b.label, d });
            }
            validate_density(&dynamic(&b.rho))?;
            total += b.probability;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(WitnessError::ProbabilityMismatch(total));
        }
        Ok(Self { d, branches }.merged())
    }

    /// Mediator in `label`, qubits in the product `|a⟩|b⟩`.
    pub fn product(d: usize, label: usize, a: &Vector2<C64>, b: &Vector2<C64>) -> Result<Self, WitnessError> {
        let rho = kron(&pure_qubit(&a.normalize()), &pure_qubit(&b.normalize()));
        Self::new(d, vec![Branch { probability: 1.0, label, rho }])
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn marginal_a(&self) -> Qubit {
        marginal_a(&final_ab_state(self))
    }

    pub fn marginal_b(&self) -> Qubit {
        marginal_b(&final_ab_state(self))
    }

    /// One branch per label, holding the label's conditional state.
    fn merged(self) -> Self {
        let mut by_label: BTreeMap<usize, (f64, TwoQubit)> = BTreeMap::new();
        for b in self.branches {
            if b.probability <= NEGLIGIBLE_WEIGHT {
                continue;
            }
            let entry = by_label.entry(b.label).or_insert((0.0, TwoQubit::zeros()));
            entry.0 += b.probability;
            entry.1 += b.rho * Complex::from(b.probability);
        }
        let branches = by_label
            .into_iter()
            .map(|(label, (p, sum))| Branch { probability: p, label, rho: sum / Complex::from(p) })
            .collect();
        Self { d: self.d, branches }
    }
}

/// Kraus operators `kraus[m][m′]` on one qubit for a register going from
/// label `m` to `m′`; for each `m` the whole family is trace preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    d: usize,
    kraus: Vec<Vec<Vec<Qubit>>>,
}

impl Instrument {
    pub fn new(d: usize, kraus: Vec<Vec<Vec<Qubit>>>) -> Result<Self, WitnessError> {
        if kraus.len() != d {
            return Err(WitnessError::InstrumentShape { expected: d, found: kraus.len() });
        }
        for (m, row) in kraus.iter().enumerate() {
            if row.len() != d {
                return Err(WitnessError::InstrumentShape { expected: d, found: row.len() });
            }
            let sum: Qubit = row.iter().flatten().map(|k| k.adjoint() * k).sum();
            let deviation = (sum - Qubit::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if deviation > STRUCTURAL_TOLERANCE {
                return Err(WitnessError::NotTracePreserving { label: m, deviation });
            }
        }
        Ok(Self { d, kraus })
    }

    pub fn identity(d: usize) -> Self {
        let kraus =
            (0..d).map(|m| (0..d).map(|m2| if m == m2 { vec![Qubit::identity()] } else { vec![] }).collect()).collect();
        Self { d, kraus }
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn kraus(&self, from: usize, to: usize) -> &[Qubit] {
        &self.kraus[from][to]
    }

    fn apply(&self, s: &HybridState, on_a: bool) -> Result<HybridState, WitnessError> {
        if s.d != self.d {
            return Err(WitnessError::InstrumentShape { expected: s.d, found: self.d });
        }
        let mut out = Vec::new();
        for b in &s.branches {
            for (to, ks) in self.kraus[b.label].iter().enumerate() {
                if ks.is_empty() {
                    continue;
                }
                let mut sigma = TwoQubit::zeros();
                for k in ks {
                    let big = if on_a { kron(k, &Qubit::identity()) } else { kron(&Qubit::identity(), k) };
                    sigma += big * b.rho * big.adjoint();
                }
                let weight = sigma.trace().re;
                if weight > NEGLIGIBLE_WEIGHT {
                    out.push(Branch {
                        probability: b.probability * weight,
                        label: to,
                        rho: sigma / Complex::from(weight),
                    });
                }
            }
        }
        Ok(HybridState { d: s.d, branches: out }.merged())
    }
}

/// An interaction between qubit `A` and the register.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalStepA {
    pub instrument: Instrument,
}

/// An interaction between the register and qubit `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalStepB {
    instrument: Instrument,
}

impl LocalStepB {
    /// Channel `channels[m]` (Kraus operators) on `B` when the register
    /// reads `m`, after which the register is set to `update[m]`.
    pub fn conditional(channels: Vec<Vec<Qubit>>, update: Vec<usize>) -> Result<Self, WitnessError> {
        let d = channels.len();
        if update.len() != d {
            return Err(WitnessError::InstrumentShape { expected: d, found: update.len() });
        }
        let mut kraus = vec![vec![Vec::new(); d]; d];
        for (m, (ks, &to)) in channels.into_iter().zip(&update).enumerate() {
            if to >= d {
                return Err(WitnessError::LabelOutOfRange { label: to, d });
            }
            kraus[m][to] = ks;
        }
        Ok(Self { instrument: Instrument::new(d, kraus)? })
    }

    /// A general instrument on `B`, which may also branch the register.
    pub fn instrument(instrument: Instrument) -> Self {
        Self { instrument }
    }

    pub fn identity(d: usize) -> Self {
        Self { instrument: Instrument::identity(d) }
    }

    pub fn as_instrument(&self) -> &Instrument {
        &self.instrument
    }
}

impl LocalStepA {
    pub fn identity(d: usize) -> Self {
        Self { instrument: Instrument::identity(d) }
    }
}

pub fn apply_step_a(s: &HybridState, step: &LocalStepA) -> Result<HybridState, WitnessError> {
    step.instrument.apply(s, true)
}

pub fn apply_step_b(s: &HybridState, step: &LocalStepB) -> Result<HybridState, WitnessError> {
    step.instrument.apply(s, false)
}

/// The two-qubit state with the register forgotten.
pub fn final_ab_state(s: &HybridState) -> TwoQubit {
    s.branches.iter().fold(TwoQubit::zeros(), |acc, b| acc + b.rho * Complex::from(b.probability))
}

pub fn ket(a: f64, b: f64) -> Vector2<C64> {
    Vector2::new(Complex::from(a), Complex::from(b))
}

/// `|0⟩`, `|1⟩`, `|+⟩`, `|−⟩`, `|+i⟩`.
pub fn named_ket(name: &str) -> Option<Vector2<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match name {
        "0" => ket(1.0, 0.0),
        "1" => ket(0.0, 1.0),
        "+" => ket(h, h),
        "-" => ket(h, -h),
        "+i" => Vector2::new(Complex::from(h), Complex::new(0.0, h)),
        _ => return None,
    })
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_state() -> TwoQubit {
    let h = Complex::from(std::f64::consts::FRAC_1_SQRT_2);
    pure_density(&Vector4::new(h, Complex::from(0.0), Complex::from(0.0), h))
}

/// Projective measurement of `A` along `Z`, outcome written into the
/// register.
pub fn measure_z_and_record(d: usize) -> LocalStepA {
    let p0 = pure_qubit(&ket(1.0, 0.0));
    let p1 = pure_qubit(&ket(0.0, 1.0));
    let mut kraus = vec![vec![Vec::new(); d]; d];
    for row in kraus.iter_mut() {
        row[0] = vec![p0];
        row[1] = vec![p1];
    }
    LocalStepA { instrument: Instrument::new(d, kraus).expect("projective measurement") }
}

/// `X` on `B` iff the register reads 1; register unchanged.
pub fn flip_b_if_one(d: usize) -> LocalStepB {
    let channels = (0..d).map(|m| vec![if m == 1 { pauli_c64(Letter::X) } else { Qubit::identity() }]).collect();
    LocalStepB::conditional(channels, (0..d).collect()).expect("unitary channels")
}

#[cfg(test)]
mod tests;
