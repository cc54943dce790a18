//! Heisenberg-picture simulation of the three-qubit mediator protocol.
//!
//! Each system carries a pair of descriptors `(q_x(t), q_z(t))`, Pauli
//! operators on the full `A ⊗ M ⊗ B` algebra. A gate evolves a descriptor by
//! conjugating the corresponding initial generator and substituting the
//! current descriptors for the initial ones, which is the same as
//! `O(t_{n+1}) = U(t_n)† O(t_n) U(t_n)` with `U(t_n)` written in terms of the
//! time-`t_n` descriptors. All of this is exact; floating point only enters
//! through the Schrödinger-picture oracle.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex;
use num_traits::One;
use thiserror::Error;

use crate::exact::{ExactMatrix, Surd};
use crate::pauli::{
    coeff, coeff_to_f64, Coeff, HeisenbergState, Letter, PauliError, PauliOperator, PauliString, Phase,
};

pub type C64 = Complex<f64>;

/// Tolerance for comparisons that involve `√2` in floating point.
pub const PICTURE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeisenbergError {
    #[error("gate {0} is not unitary")]
    NotUnitary(String),
    #[error("gate {0} does not map Pauli operators to Pauli operators with rational coefficients")]
    NonClifford(String),
    #[error("time index {t} out of range (0..={max})")]
    TimeOutOfRange { t: usize, max: usize },
    #[error("observables act on overlapping systems {0:?}")]
    OverlappingSupports(Vec<usize>),
    #[error("gate acts on {gate} qubits but descriptors describe {descriptors}")]
    SizeMismatch { gate: usize, descriptors: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// The three systems of the protocol, in ket order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum System {
    A,
    M,
    B,
}

impl System {
    pub const ALL: [System; 3] = [System::A, System::M, System::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            System::A => "A",
            System::M => "M",
            System::B => "B",
        }
    }

    fn from_index(i: usize) -> Option<System> {
        System::ALL.get(i).copied()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An exact unitary on `n` qubits together with the sites it touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    name: String,
    n: usize,
    matrix: ExactMatrix,
    acts_on: Vec<usize>,
}

impl Gate {
    /// Builds a gate from a local `2^k × 2^k` matrix acting on `sites`.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        sites: &[usize],
        local: &ExactMatrix,
    ) -> Result<Self, HeisenbergError> {
        let name = name.into();
        let matrix = ExactMatrix::embed(local, sites, n);
        if !matrix.is_unitary() {
            return Err(HeisenbergError::NotUnitary(name));
        }
        let mut acts_on = sites.to_vec();
        acts_on.sort_unstable();
        Ok(Self { name, n, matrix, acts_on })
    }

    pub fn identity(n: usize) -> Self {
        Self { name: "id".into(), n, matrix: ExactMatrix::identity(1 << n), acts_on: vec![] }
    }

    pub fn hadamard(n: usize, site: usize) -> Self {
        let h = Surd::inv_sqrt2();
        let local = ExactMatrix::from_rows(vec![vec![h.clone(), h.clone()], vec![h.clone(), -&h]]);
        Self::new(format!("H[{site}]"), n, &[site], &local).expect("Hadamard is unitary")
    }

    /// The phase gate `diag(1, i)`.
    pub fn phase(n: usize, site: usize) -> Self {
        let local =
            ExactMatrix::from_rows(vec![vec![Surd::one(), Surd::zero()], vec![Surd::zero(), Surd::from(coeff(0, 1))]]);
        Self::new(format!("S[{site}]"), n, &[site], &local).expect("S is unitary")
    }

    pub fn pauli(n: usize, site: usize, letter: Letter) -> Self {
        let local = ExactMatrix::from_pauli(&PauliOperator::single(1, 0, letter));
        Self::new(format!("{}[{site}]", letter.as_char()), n, &[site], &local).expect("Pauli matrices are unitary")
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Self {
        let o = Surd::one;
        let z = Surd::zero;
        let local = ExactMatrix::from_rows(vec![
            vec![o(), z(), z(), z()],
            vec![z(), o(), z(), z()],
            vec![z(), z(), z(), o()],
            vec![z(), z(), o(), z()],
        ]);
        Self::new(format!("CNOT[{control}->{target}]"), n, &[control, target], &local).expect("CNOT is unitary")
    }

    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let o = Surd::one;
        let z = Surd::zero;
        let local = ExactMatrix::from_rows(vec![
            vec![o(), z(), z(), z()],
            vec![z(), z(), o(), z()],
            vec![z(), o(), z(), z()],
            vec![z(), z(), z(), o()],
        ]);
        Self::new(format!("SWAP[{a},{b}]"), n, &[a, b], &local).expect("SWAP is unitary")
    }

    /// Applies `gates` in order; the resulting matrix is `g_k ⋯ g_1`.
    pub fn sequence(name: impl Into<String>, gates: &[Gate]) -> Self {
        let n = gates.first().map_or(0, |g| g.n);
        let mut matrix = ExactMatrix::identity(1 << n);
        let mut acts_on = Vec::new();
        for g in gates {
            assert_eq!(g.n, n, "all gates in a sequence must act on the same register");
            matrix = g.matrix.mul(&matrix);
            acts_on.extend_from_slice(&g.acts_on);
        }
        acts_on.sort_unstable();
        acts_on.dedup();
        Self { name: name.into(), n, matrix, acts_on }
    }

    /// The entangling gate between A and M: Hadamard on A, then CNOT A→M.
    pub fn bell_am() -> Self {
        Self::sequence(
            "Bell_AM",
            &[Gate::hadamard(3, System::A.index()), Gate::cnot(3, System::A.index(), System::M.index())],
        )
    }

    pub fn swap_mb() -> Self {
        let mut g = Self::swap(3, System::M.index(), System::B.index());
        g.name = "SWAP_MB".into();
        g
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn acts_on(&self) -> &[usize] {
        &self.acts_on
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    pub fn to_c64(&self) -> DMatrix<C64> {
        self.matrix.to_c64()
    }

    /// `U† P U`.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator, HeisenbergError> {
        self.check_size(p.num_sites())?;
        let m = self.matrix.adjoint().mul(&ExactMatrix::from_pauli(p)).mul(&self.matrix);
        m.to_pauli(self.n).ok_or_else(|| HeisenbergError::NonClifford(self.name.clone()))
    }

    /// `U P U†`, the action on stabilizers of a state evolved by `U`.
    pub fn conjugate_forward(&self, p: &PauliOperator) -> Result<PauliOperator, HeisenbergError> {
        self.check_size(p.num_sites())?;
        let m = self.matrix.mul(&ExactMatrix::from_pauli(p)).mul(&self.matrix.adjoint());
        m.to_pauli(self.n).ok_or_else(|| HeisenbergError::NonClifford(self.name.clone()))
    }

    fn check_size(&self, n: usize) -> Result<(), HeisenbergError> {
        if n == self.n {
            Ok(())
        } else {
            Err(HeisenbergError::SizeMismatch { gate: self.n, descriptors: n })
        }
    }
}

/// The descriptor pairs `(q_x, q_z)` of every system at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorSet {
    x: Vec<PauliOperator>,
    z: Vec<PauliOperator>,
}

impl DescriptorSet {
    /// `q_x = X` and `q_z = Z` on each system's own site.
    pub fn initial(n: usize) -> Self {
        Self {
            x: (0..n).map(|s| PauliOperator::single(n, s, Letter::X)).collect(),
            z: (0..n).map(|s| PauliOperator::single(n, s, Letter::Z)).collect(),
        }
    }

    pub fn num_systems(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self, site: usize) -> &PauliOperator {
        &self.x[site]
    }

    pub fn z(&self, site: usize) -> &PauliOperator {
        &self.z[site]
    }

    pub fn pair(&self, system: System) -> (&PauliOperator, &PauliOperator) {
        (&self.x[system.index()], &self.z[system.index()])
    }

    /// `q_y = -i q_z q_x`, from `q_z q_x = i q_y`.
    pub fn y(&self, site: usize) -> PauliOperator {
        self.z[site].mul(&self.x[site]).expect("descriptors share a register").scale(&coeff(0, -1))
    }

    /// Rewrites an operator given in terms of the initial generators as the
    /// same expression in these descriptors.
    pub fn evolve(&self, op: &PauliOperator) -> Result<PauliOperator, HeisenbergError> {
        let n = self.num_systems();
        if op.num_sites() != n {
            return Err(PauliError::DimensionMismatch { left: op.num_sites(), right: n }.into());
        }
        let mut out = PauliOperator::zero(n);
        for (letters, c) in op.terms() {
            let mut term = PauliOperator::identity(n).scale(c);
            for (site, l) in letters.iter().enumerate() {
                let factor = match l {
                    Letter::I => continue,
                    Letter::X => self.x[site].clone(),
                    Letter::Y => self.y(site),
                    Letter::Z => self.z[site].clone(),
                };
                term = term.mul(&factor)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

/// One Heisenberg step: every descriptor conjugated by `g`.
pub fn apply_gate_heisenberg(d: &DescriptorSet, g: &Gate) -> Result<DescriptorSet, HeisenbergError> {
    let n = d.num_systems();
    g.check_size(n)?;
    if !g.matrix.is_unitary() {
        return Err(HeisenbergError::NotUnitary(g.name.clone()));
    }
    let step = |site: usize, letter: Letter| -> Result<PauliOperator, HeisenbergError> {
        let image = g.conjugate(&PauliOperator::single(n, site, letter))?;
        d.evolve(&image)
    };
    Ok(DescriptorSet {
        x: (0..n).map(|s| step(s, Letter::X)).collect::<Result<_, _>>()?,
        z: (0..n).map(|s| step(s, Letter::Z)).collect::<Result<_, _>>()?,
    })
}

/// A gate schedule together with the descriptors at every time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolTrace {
    schedule: Vec<Gate>,
    descriptors: Vec<DescriptorSet>,
    state: HeisenbergState,
    schrodinger_schedule: Vec<Gate>,
}

impl ProtocolTrace {
    pub fn run(schedule: Vec<Gate>) -> Result<Self, HeisenbergError> {
        let n = schedule.first().map_or(3, Gate::num_qubits);
        let mut descriptors = vec![DescriptorSet::initial(n)];
        for g in &schedule {
            let next = apply_gate_heisenberg(descriptors.last().expect("non-empty"), g)?;
            descriptors.push(next);
        }
        Ok(Self { schrodinger_schedule: schedule.clone(), schedule, descriptors, state: HeisenbergState::new(n) })
    }

    pub fn schedule(&self) -> &[Gate] {
        &self.schedule
    }

    pub fn descriptors(&self, t: usize) -> Result<&DescriptorSet, HeisenbergError> {
        self.check_time(t)?;
        Ok(&self.descriptors[t])
    }

    pub fn heisenberg_state(&self) -> &HeisenbergState {
        &self.state
    }

    pub fn num_sites(&self) -> usize {
        self.state.num_sites()
    }

    /// Index of the last time step.
    pub fn final_time(&self) -> usize {
        self.descriptors.len() - 1
    }

    /// Falsification hook: replaces the gate the Schrödinger oracle applies
    /// at `step`, leaving the Heisenberg descriptors untouched.
    pub fn with_schrodinger_gate(mut self, step: usize, gate: Gate) -> Self {
        self.schrodinger_schedule[step] = gate;
        self
    }

    fn check_time(&self, t: usize) -> Result<(), HeisenbergError> {
        if t < self.descriptors.len() {
            Ok(())
        } else {
            Err(HeisenbergError::TimeOutOfRange { t, max: self.final_time() })
        }
    }

    /// Exact `Tr(O(t) ρ_H)` for an observable given at `t₀`.
    pub fn expectation(&self, t: usize, observable: &PauliOperator) -> Result<Coeff, HeisenbergError> {
        let evolved = self.descriptors(t)?.evolve(observable)?;
        Ok(self.state.expectation(&evolved)?)
    }

    /// Reduced density matrix of two systems at time `t`, rebuilt from the
    /// Heisenberg expectations: `ρ = ¼ Σ ⟨P⊗Q⟩ P⊗Q`. Basis order `|first⟩⊗|second⟩`.
    pub fn reduced_pair(&self, t: usize, first: System, second: System) -> Result<Matrix4<C64>, HeisenbergError> {
        let n = self.num_sites();
        let mut rho = Matrix4::<C64>::zeros();
        for p in Letter::ALL {
            for q in Letter::ALL {
                let mut letters = vec![Letter::I; n];
                letters[first.index()] = p;
                letters[second.index()] = q;
                let e = coeff_to_f64(&self.expectation(t, &PauliString::new(Phase::ONE, letters).into())?);
                rho += pauli_c64(p).kronecker(&pauli_c64(q)) * e;
            }
        }
        Ok(rho * C64::new(0.25, 0.0))
    }

    pub fn reduced_single(&self, t: usize, system: System) -> Result<Matrix2<C64>, HeisenbergError> {
        let n = self.num_sites();
        let mut rho = Matrix2::<C64>::zeros();
        for p in Letter::ALL {
            let e = coeff_to_f64(&self.expectation(t, &PauliOperator::single(n, system.index(), p))?);
            rho += pauli_c64(p) * e;
        }
        Ok(rho * C64::new(0.5, 0.0))
    }
}

pub fn pauli_c64(l: Letter) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match l {
        Letter::I => Matrix2::new(one, o, o, one),
        Letter::X => Matrix2::new(o, one, one, o),
        Letter::Y => Matrix2::new(o, -i, i, o),
        Letter::Z => Matrix2::new(one, o, o, -one),
    }
}

/// Bell gate between A and M at `t₀ → t₁`, then SWAP between M and B.
pub fn run_example_protocol() -> ProtocolTrace {
    ProtocolTrace::run(vec![Gate::bell_am(), Gate::swap_mb()]).expect("example gates are Clifford")
}

/// Schrödinger-picture state at time `t`, starting from `|0…0⟩`.
pub fn schrodinger_state(trace: &ProtocolTrace, t: usize) -> Result<DVector<C64>, HeisenbergError> {
    trace.check_time(t)?;
    let dim = 1 << trace.num_sites();
    let mut psi = DVector::<C64>::zeros(dim);
    psi[0] = C64::one();
    for g in &trace.schrodinger_schedule[..t] {
        psi = g.to_c64() * psi;
    }
    Ok(psi)
}

/// `⟨ψ(t)|P|ψ(t)⟩` computed on the state vector.
pub fn schrodinger_expectation(
    trace: &ProtocolTrace,
    t: usize,
    observable: &PauliOperator,
) -> Result<C64, HeisenbergError> {
    let psi = schrodinger_state(trace, t)?;
    let m = ExactMatrix::from_pauli(observable).to_c64();
    Ok((psi.adjoint() * m * &psi)[(0, 0)])
}

/// `⟨o1(t) o2(t)⟩` against the Heisenberg state, for observables acting on
/// disjoint systems.
pub fn correlation(
    trace: &ProtocolTrace,
    t: usize,
    o1: &PauliOperator,
    o2: &PauliOperator,
) -> Result<f64, HeisenbergError> {
    let s1 = o1.support();
    let overlap: Vec<usize> = o2.support().into_iter().filter(|s| s1.contains(s)).collect();
    if !overlap.is_empty() {
        return Err(HeisenbergError::OverlappingSupports(overlap));
    }
    let d = trace.descriptors(t)?;
    let product = d.evolve(o1)?.mul(&d.evolve(o2)?)?;
    Ok(coeff_to_f64(&trace.state.expectation(&product)?).re)
}

/// Outcome of comparing the two pictures on every Pauli observable.
#[derive(Debug, Clone, PartialEq)]
pub struct PictureEquivalence {
    pub compared: usize,
    pub max_deviation: f64,
    pub first_failure: Option<(usize, String)>,
}

impl PictureEquivalence {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none() && self.max_deviation <= PICTURE_TOLERANCE
    }
}

pub fn verify_picture_equivalence(trace: &ProtocolTrace) -> PictureEquivalence {
    let mut compared = 0;
    let mut max_deviation = 0.0f64;
    let mut first_failure = None;
    let strings = PauliString::all(trace.num_sites());
    for t in 0..=trace.final_time() {
        let psi = schrodinger_state(trace, t).expect("t in range");
        for p in &strings {
            let op = PauliOperator::from(p.clone());
            let heis = coeff_to_f64(&trace.expectation(t, &op).expect("t in range"));
            let m = ExactMatrix::from_pauli(&op).to_c64();
            let schr = (psi.adjoint() * m * &psi)[(0, 0)];
            let dev = (heis - schr).norm();
            compared += 1;
            max_deviation = max_deviation.max(dev);
            if dev > PICTURE_TOLERANCE && first_failure.is_none() {
                first_failure = Some((t, p.to_string()));
            }
        }
    }
    PictureEquivalence { compared, max_deviation, first_failure }
}

/// Locality identities on a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityCheck {
    /// A's descriptors are identical at the last two times.
    pub a_unchanged: bool,
    /// Conjugating `q_x q_z` equals the product of the conjugated descriptors,
    /// one entry per `(step, system)`.
    pub product_preservation: Vec<(usize, System, bool)>,
    /// Systems outside a gate's support keep their descriptors.
    pub spectators_unchanged: bool,
}

impl LocalityCheck {
    pub fn passed(&self) -> bool {
        self.a_unchanged && self.spectators_unchanged && self.product_preservation.iter().all(|p| p.2)
    }
}

pub fn verify_locality_identity(trace: &ProtocolTrace) -> LocalityCheck {
    let last = trace.final_time();
    let a_unchanged =
        last >= 1 && trace.descriptors[last - 1].pair(System::A) == trace.descriptors[last].pair(System::A);
    let n = trace.num_sites();
    let mut product_preservation = Vec::new();
    let mut spectators_unchanged = true;
    for (step, g) in trace.schedule.iter().enumerate() {
        let before = &trace.descriptors[step];
        let after = &trace.descriptors[step + 1];
        for site in 0..n {
            let system = System::from_index(site).unwrap_or(System::B);
            let static_product = PauliOperator::single(n, site, Letter::X)
                .mul(&PauliOperator::single(n, site, Letter::Z))
                .expect("same register");
            let conjugated = g.conjugate(&static_product).and_then(|p| before.evolve(&p)).ok();
            let product = after.x(site).mul(after.z(site)).ok();
            product_preservation.push((step, system, conjugated.is_some() && conjugated == product));
            if !g.acts_on().contains(&site) && (before.x(site) != after.x(site) || before.z(site) != after.z(site)) {
                spectators_unchanged = false;
            }
        }
    }
    LocalityCheck { a_unchanged, product_preservation, spectators_unchanged }
}

/// Every descriptor squares to the identity at every time.
pub fn descriptor_squares_are_identity(trace: &ProtocolTrace) -> bool {
    let n = trace.num_sites();
    let id = PauliOperator::identity(n);
    trace.descriptors.iter().all(|d| {
        (0..n).all(|s| d.x(s).mul(d.x(s)).ok().as_ref() == Some(&id) && d.z(s).mul(d.z(s)).ok().as_ref() == Some(&id))
    })
}

/// Descriptor pairs of every system at every time: `rows[system][t] = (q_x, q_z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorTable {
    pub rows: Vec<Vec<(PauliOperator, PauliOperator)>>,
}

impl DescriptorTable {
    pub fn from_trace(trace: &ProtocolTrace) -> Self {
        let rows = (0..trace.num_sites())
            .map(|s| trace.descriptors.iter().map(|d| (d.x(s).clone(), d.z(s).clone())).collect())
            .collect();
        Self { rows }
    }

    /// Rendered cells, `{q_x, q_z}` as products of initial descriptors.
    pub fn render(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(x, z)| format!("{{{}, {}}}", render_symbolic(x), render_symbolic(z))).collect())
            .collect()
    }
}

impl fmt::Display for DescriptorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.render();
        let width = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(0);
        for (s, row) in cells.iter().enumerate() {
            let name = System::from_index(s).map_or_else(|| s.to_string(), |x| x.name().to_string());
            write!(f, "Q_{name}:")?;
            for (t, cell) in row.iter().enumerate() {
                let sep = if t == 0 { " " } else { " -> " };
                write!(f, "{sep}{cell:<width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Writes an operator as a product of initial descriptors, e.g. `q_zA q_xM`.
pub fn render_symbolic(op: &PauliOperator) -> String {
    if op.is_zero() {
        return "0".into();
    }
    let render_letters = |letters: &[Letter]| {
        let factors: Vec<String> = letters
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != Letter::I)
            .map(|(s, l)| {
                let sys = System::from_index(s).map_or_else(|| s.to_string(), |x| x.name().to_string());
                format!("q_{}{}", l.as_char().to_ascii_lowercase(), sys)
            })
            .collect();
        if factors.is_empty() {
            "id".to_string()
        } else {
            factors.join(" ")
        }
    };
    if let Some(p) = op.as_pauli_string() {
        let sign = match p.phase {
            Phase::ONE => "",
            Phase::MINUS_ONE => "-",
            Phase::I => "i ",
            _ => "-i ",
        };
        return format!("{sign}{}", render_letters(&p.letters));
    }
    op.terms()
        .map(|(l, c)| format!("({}) {}", crate::pauli::format_coeff(c), render_letters(l)))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// The descriptor evolution expected for the Bell/SWAP protocol, each entry
/// written as the product of initial descriptors in the order it is
/// customarily displayed (e.g. `q_zM q_xA`).
pub fn expected_example_table() -> DescriptorTable {
    let q = |l: Letter, s: System| PauliOperator::single(3, s.index(), l);
    let prod = |a: PauliOperator, b: PauliOperator| a.mul(&b).expect("same register");
    use Letter::{X, Z};
    use System::{A, B, M};
    DescriptorTable {
        rows: vec![
            vec![(q(X, A), q(Z, A)), (prod(q(Z, A), q(X, M)), q(X, A)), (prod(q(Z, A), q(X, M)), q(X, A))],
            vec![(q(X, M), q(Z, M)), (q(X, M), prod(q(Z, M), q(X, A))), (q(X, B), q(Z, B))],
            vec![(q(X, B), q(Z, B)), (q(X, B), q(Z, B)), (q(X, M), prod(q(Z, M), q(X, A)))],
        ],
    }
}

/// `|0…0⟩` as a state vector on `n` qubits.
pub fn zero_state(n: usize) -> DVector<C64> {
    let mut psi = DVector::<C64>::zeros(1 << n);
    psi[0] = C64::one();
    psi
}

/// Partial trace of a three-qubit pure state onto two systems, basis order
/// `|first⟩⊗|second⟩`.
pub fn reduce_pure_to_pair(psi: &DVector<C64>, first: System, second: System) -> Matrix4<C64> {
    let n = 3;
    let bit = |i: usize, s: System| (i >> (n - 1 - s.index())) & 1;
    let mut rho = Matrix4::<C64>::zeros();
    for i in 0..8 {
        for j in 0..8 {
            let traced_equal =
                System::ALL.iter().filter(|s| **s != first && **s != second).all(|s| bit(i, *s) == bit(j, *s));
            if !traced_equal {
                continue;
            }
            let r = 2 * bit(i, first) + bit(i, second);
            let c = 2 * bit(j, first) + bit(j, second);
            rho[(r, c)] += psi[i] * psi[j].conj();
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(l: Letter, s: System) -> PauliOperator {
        PauliOperator::single(3, s.index(), l)
    }

    #[test]
    fn bell_gate_evolves_a_as_in_the_table() {
        let d = apply_gate_heisenberg(&DescriptorSet::initial(3), &Gate::bell_am()).unwrap();
        assert_eq!(*d.x(0), q(Letter::Z, System::A).mul(&q(Letter::X, System::M)).unwrap());
        assert_eq!(*d.z(0), q(Letter::X, System::A));
    }

    #[test]
    fn identity_gate_leaves_descriptors() {
        let d0 = DescriptorSet::initial(3);
        assert_eq!(apply_gate_heisenberg(&d0, &Gate::identity(3)).unwrap(), d0);
    }

    #[test]
    fn swap_hands_m_the_former_b_pair() {
        let trace = run_example_protocol();
        let t2 = trace.descriptors(2).unwrap();
        assert_eq!(t2.pair(System::M), (&q(Letter::X, System::B), &q(Letter::Z, System::B)));
    }

    #[test]
    fn trace_matches_expected_table() {
        let trace = run_example_protocol();
        assert_eq!(DescriptorTable::from_trace(&trace), expected_example_table());
    }

    #[test]
    fn trace_cells_from_table() {
        let trace = run_example_protocol();
        let t1 = trace.descriptors(1).unwrap();
        assert_eq!(t1.pair(System::B), (&q(Letter::X, System::B), &q(Letter::Z, System::B)));
        let t2 = trace.descriptors(2).unwrap();
        let zm_xa = q(Letter::Z, System::M).mul(&q(Letter::X, System::A)).unwrap();
        assert_eq!(t2.pair(System::B), (&q(Letter::X, System::M), &zm_xa));
    }

    #[test]
    fn descriptors_match_cumulative_conjugation() {
        // Independent route: U_cum† P U_cum with the full matrix product.
        let trace = run_example_protocol();
        let mut cumulative = Gate::identity(3);
        for t in 1..=trace.final_time() {
            cumulative = Gate::sequence("cum", &[cumulative, trace.schedule()[t - 1].clone()]);
            let d = trace.descriptors(t).unwrap();
            for s in 0..3 {
                assert_eq!(cumulative.conjugate(&PauliOperator::single(3, s, Letter::X)).unwrap(), *d.x(s));
                assert_eq!(cumulative.conjugate(&PauliOperator::single(3, s, Letter::Z)).unwrap(), *d.z(s));
            }
        }
    }

    #[test]
    fn non_unitary_gate_is_rejected() {
        let two = Surd::from(coeff(2, 0));
        let local = ExactMatrix::from_rows(vec![vec![two.clone(), Surd::zero()], vec![Surd::zero(), two]]);
        assert!(matches!(Gate::new("bad", 3, &[0], &local), Err(HeisenbergError::NotUnitary(_))));
    }

    #[test]
    fn schrodinger_states() {
        let trace = run_example_protocol();
        let psi0 = schrodinger_state(&trace, 0).unwrap();
        assert_eq!(psi0, zero_state(3));
        let psi2 = schrodinger_state(&trace, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |B_{+0}⟩_AB |0⟩_M: amplitudes on |000⟩ and |101⟩ (A M B ordering).
        for (i, amp) in psi2.iter().enumerate() {
            let want = if i == 0b000 || i == 0b101 { h } else { 0.0 };
            assert!((amp - C64::new(want, 0.0)).norm() < 1e-12, "index {i}");
        }
        let rho_b = {
            let psi1 = schrodinger_state(&trace, 1).unwrap();
            let rho = reduce_pure_to_pair(&psi1, System::M, System::B);
            // trace out M
            Matrix2::new(
                rho[(0, 0)] + rho[(2, 2)],
                rho[(0, 1)] + rho[(2, 3)],
                rho[(1, 0)] + rho[(3, 2)],
                rho[(1, 1)] + rho[(3, 3)],
            )
        };
        assert!(
            (rho_b - pauli_c64(Letter::I) * C64::new(0.5, 0.0) - pauli_c64(Letter::Z) * C64::new(0.5, 0.0)).norm()
                < 1e-12
        );
        assert!(matches!(schrodinger_state(&trace, 3), Err(HeisenbergError::TimeOutOfRange { t: 3, max: 2 })));
    }

    #[test]
    fn correlations() {
        let trace = run_example_protocol();
        let za = q(Letter::Z, System::A);
        let zb = q(Letter::Z, System::B);
        let xa = q(Letter::X, System::A);
        let xb = q(Letter::X, System::B);
        assert_eq!(correlation(&trace, 2, &za, &zb).unwrap(), 1.0);
        assert_eq!(correlation(&trace, 2, &xa, &xb).unwrap(), 1.0);
        assert_eq!(correlation(&trace, 0, &za, &zb).unwrap(), 1.0);
        let za_only = coeff_to_f64(&trace.expectation(0, &za).unwrap()).re;
        let zb_only = coeff_to_f64(&trace.expectation(0, &zb).unwrap()).re;
        assert_eq!(za_only * zb_only, 1.0);
        assert!(matches!(
            correlation(&trace, 2, &za, &za.mul(&zb).unwrap()),
            Err(HeisenbergError::OverlappingSupports(_))
        ));
    }

    #[test]
    fn pictures_agree() {
        let trace = run_example_protocol();
        let check = verify_picture_equivalence(&trace);
        assert_eq!(check.compared, 3 * 64);
        assert!(check.passed(), "{check:?}");
        let zm = q(Letter::Z, System::M);
        assert_eq!(trace.expectation(2, &zm).unwrap(), coeff(1, 0));
        assert!((schrodinger_expectation(&trace, 2, &zm).unwrap() - C64::one()).norm() < 1e-12);
        for t in 0..=2 {
            assert_eq!(trace.expectation(t, &PauliOperator::identity(3)).unwrap(), coeff(1, 0));
        }
    }

    #[test]
    fn corrupted_gate_breaks_picture_equivalence() {
        let trace = run_example_protocol().with_schrodinger_gate(1, Gate::cnot(3, 1, 2));
        assert!(!verify_picture_equivalence(&trace).passed());
    }

    #[test]
    fn locality_identities_hold() {
        let trace = run_example_protocol();
        let check = verify_locality_identity(&trace);
        assert!(check.passed(), "{check:?}");
        assert_eq!(check.product_preservation.len(), 6);
        assert_eq!(trace.descriptors(1).unwrap().pair(System::B), trace.descriptors(0).unwrap().pair(System::B));
        assert!(descriptor_squares_are_identity(&trace));
    }

    #[test]
    fn reduced_states_from_descriptors_match_state_vector() {
        let trace = run_example_protocol();
        for t in 0..=2 {
            let psi = schrodinger_state(&trace, t).unwrap();
            for (a, b) in [(System::A, System::B), (System::A, System::M), (System::M, System::B)] {
                let heis = trace.reduced_pair(t, a, b).unwrap();
                let schr = reduce_pure_to_pair(&psi, a, b);
                assert!((heis - schr).norm() < 1e-12, "t={t} {a}{b}");
            }
        }
    }

    #[test]
    fn rendering_uses_descriptor_symbols() {
        let trace = run_example_protocol();
        let cells = DescriptorTable::from_trace(&trace).render();
        assert_eq!(cells[0][2], "{q_zA q_xM, q_xA}");
        assert_eq!(cells[1][2], "{q_xB, q_zB}");
        assert_eq!(cells[2][2], "{q_xM, q_xA q_zM}");
        assert_eq!(render_symbolic(&q(Letter::X, System::A).scale(&coeff(-1, 0))), "-q_xA");
    }
}
