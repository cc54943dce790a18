//! Pure stabilizer states of one and two qubits, and the Clifford group
//! acting on them by permutation.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use crate::heisenberg::Gate;
use crate::pauli::{Letter, PauliOperator, PauliString, Phase};

use super::{Dynamics, FiniteTheoryModel, ModelError, StateSet, SubstrateId, Task};

/// Single-qubit stabilizer states, named by their stabilizer `±Z, ±X, ±Y`.
pub const QUBIT_STATES: [&str; 6] = ["z0", "z1", "x+", "x-", "y+", "y-"];

const QUBIT_STABILIZERS: [(Phase, Letter); 6] = [
    (Phase::ONE, Letter::Z),
    (Phase::MINUS_ONE, Letter::Z),
    (Phase::ONE, Letter::X),
    (Phase::MINUS_ONE, Letter::X),
    (Phase::ONE, Letter::Y),
    (Phase::MINUS_ONE, Letter::Y),
];

/// A pure stabilizer state, stored as its full stabilizer group without the
/// identity, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StabilizerState(Vec<PauliString>);

impl StabilizerState {
    /// The group generated by commuting, independent Hermitian strings.
    pub fn from_generators(generators: &[PauliString]) -> Self {
        let n = generators[0].num_sites();
        let mut group = vec![PauliString::identity(n)];
        for g in generators {
            let extra: Vec<PauliString> = group.iter().map(|h| h.mul(g).expect("same size")).collect();
            group.extend(extra);
        }
        group.retain(|p| !p.is_identity_letters());
        group.sort();
        Self(group)
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.0
    }

    fn product(a: &StabilizerState, b: &StabilizerState) -> Self {
        let lift = |p: &PauliString, first: bool| {
            let mut letters = vec![Letter::I; 2];
            letters[if first { 0 } else { 1 }] = p.letters[0];
            PauliString::new(p.phase, letters)
        };
        Self::from_generators(&[lift(&a.0[0], true), lift(&b.0[0], false)])
    }
}

pub struct StabilizerSpace {
    pub states: Vec<StabilizerState>,
    pub labels: Vec<String>,
    /// For two qubits: which state each product `(a, b)` of single-qubit
    /// states is.
    pub products: HashMap<Vec<usize>, usize>,
}

impl StabilizerSpace {
    pub fn index(&self, state: &StabilizerState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

fn single_qubit_states() -> Vec<StabilizerState> {
    QUBIT_STABILIZERS
        .iter()
        .map(|&(phase, l)| StabilizerState::from_generators(&[PauliString::new(phase, vec![l])]))
        .collect()
}

/// Images `U P U†` of every unsigned letter string, for each generator.
fn conjugation_tables(n: usize, gates: &[Gate]) -> Vec<HashMap<Vec<Letter>, PauliString>> {
    gates
        .iter()
        .map(|g| {
            PauliString::all(n)
                .into_iter()
                .map(|p| {
                    let image = g
                        .conjugate_forward(&PauliOperator::from(p.clone()))
                        .expect("Clifford generator")
                        .as_pauli_string()
                        .expect("Clifford maps Pauli strings to Pauli strings");
                    (p.letters, image)
                })
                .collect()
        })
        .collect()
}

fn apply(table: &HashMap<Vec<Letter>, PauliString>, s: &StabilizerState) -> StabilizerState {
    let mut group: Vec<PauliString> =
        s.0.iter()
            .map(|p| {
                let mut image = table[&p.letters].clone();
                image.phase = image.phase * p.phase;
                image
            })
            .collect();
    group.sort();
    StabilizerState(group)
}

/// `H` and `S` on every qubit, and `CNOT 0→1` for two qubits.
pub fn clifford_generators(n: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for site in 0..n {
        gates.push(Gate::hadamard(n, site));
        gates.push(Gate::phase(n, site));
    }
    if n == 2 {
        gates.push(Gate::cnot(2, 0, 1));
    }
    gates
}

fn build_space(n: usize) -> StabilizerSpace {
    assert!(n == 1 || n == 2, "only one- and two-qubit stabilizer spaces are supported");
    let singles = single_qubit_states();
    if n == 1 {
        let labels = QUBIT_STATES.iter().map(|s| s.to_string()).collect();
        return StabilizerSpace { states: singles, labels, products: HashMap::new() };
    }
    let mut states = Vec::new();
    let mut labels = Vec::new();
    let mut products = HashMap::new();
    for (i, a) in singles.iter().enumerate() {
        for (j, b) in singles.iter().enumerate() {
            products.insert(vec![i, j], states.len());
            states.push(StabilizerState::product(a, b));
            labels.push(format!("{},{}", QUBIT_STATES[i], QUBIT_STATES[j]));
        }
    }
    // Entangled states: whatever the generators reach beyond the products.
    let tables = conjugation_tables(2, &clifford_generators(2));
    let mut seen: HashSet<StabilizerState> = states.iter().cloned().collect();
    let mut queue: VecDeque<StabilizerState> = states.iter().cloned().collect();
    let mut entangled = Vec::new();
    while let Some(s) = queue.pop_front() {
        for t in &tables {
            let image = apply(t, &s);
            if seen.insert(image.clone()) {
                entangled.push(image.clone());
                queue.push_back(image);
            }
        }
    }
    entangled.sort();
    for s in entangled {
        labels.push(s.0.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "));
        states.push(s);
    }
    StabilizerSpace { states, labels, products }
}

pub fn stabilizer_space(n: usize) -> &'static StabilizerSpace {
    static ONE: OnceLock<StabilizerSpace> = OnceLock::new();
    static TWO: OnceLock<StabilizerSpace> = OnceLock::new();
    match n {
        1 => ONE.get_or_init(|| build_space(1)),
        2 => TWO.get_or_init(|| build_space(2)),
        _ => panic!("only one- and two-qubit stabilizer spaces are supported"),
    }
}

fn build_group(n: usize) -> Vec<Vec<u16>> {
    let space = stabilizer_space(n);
    let index: HashMap<&StabilizerState, u16> = space.states.iter().enumerate().map(|(i, s)| (s, i as u16)).collect();
    let generators: Vec<Vec<u16>> = conjugation_tables(n, &clifford_generators(n))
        .iter()
        .map(|t| space.states.iter().map(|s| index[&apply(t, s)]).collect())
        .collect();
    let identity: Vec<u16> = (0..space.states.len() as u16).collect();
    let mut seen = HashSet::from([identity.clone()]);
    let mut order = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(p) = queue.pop_front() {
        for g in &generators {
            let q: Vec<u16> = p.iter().map(|&s| g[s as usize]).collect();
            if seen.insert(q.clone()) {
                order.push(q.clone());
                queue.push_back(q);
            }
        }
    }
    order
}

/// Every Clifford unitary's action on the stabilizer states, as state
/// permutations. Unitaries equal up to a global phase act identically, so
/// this has 24 elements for one qubit and 11520 for two.
pub fn clifford_action(n: usize) -> &'static [Vec<u16>] {
    static ONE: OnceLock<Vec<Vec<u16>>> = OnceLock::new();
    static TWO: OnceLock<Vec<Vec<u16>>> = OnceLock::new();
    match n {
        1 => ONE.get_or_init(|| build_group(1)),
        2 => TWO.get_or_init(|| build_group(2)),
        _ => panic!("only one- and two-qubit Clifford groups are supported"),
    }
}

/// Adds the six-state stabilizer qubit.
pub fn add_stabilizer_qubit(model: &mut FiniteTheoryModel, name: &str) -> Result<SubstrateId, ModelError> {
    model.add_substrate(name, &QUBIT_STATES)
}

/// Adds the 60-state two-qubit stabilizer space over `qubit ⊕ qubit`, with
/// the product states embedded as ordered pairs.
pub fn add_stabilizer_pair(
    model: &mut FiniteTheoryModel,
    name: &str,
    first: SubstrateId,
    second: SubstrateId,
) -> Result<SubstrateId, ModelError> {
    for q in [first, second] {
        let sub = model.substrate(q);
        if sub.states != QUBIT_STATES {
            return Err(ModelError::BadGenerator { generator: "stabilizer_pair".into(), substrate: sub.name.clone() });
        }
    }
    let space = stabilizer_space(2);
    model.add_composite(name, &[first, second], space.labels.clone(), space.products.clone())
}

/// Clifford dynamics on a stabilizer qubit (`n = 1`) or pair (`n = 2`).
pub fn add_clifford_dynamics(
    model: &mut FiniteTheoryModel,
    substrate: SubstrateId,
    n: usize,
) -> Result<(), ModelError> {
    let sub = model.substrate(substrate);
    let fits = match n {
        1 => sub.components().is_none() && sub.states == QUBIT_STATES,
        2 => sub.components().is_some() && sub.states == stabilizer_space(2).labels,
        _ => false,
    };
    if !fits {
        return Err(ModelError::BadGenerator { generator: format!("clifford{n}"), substrate: sub.name.clone() });
    }
    model.add_dynamics(substrate, Dynamics::Maps(clifford_action(n).to_vec()))
}

/// Stabilizer qubit `qubit`, its double `qubit2`, the six single-state
/// basis attributes, and the variables `Z`, `X`, `Y`.
pub fn stabilizer_qubit_model() -> FiniteTheoryModel {
    let build = || -> Result<FiniteTheoryModel, ModelError> {
        let mut m = FiniteTheoryModel::new("stabilizer_qubit");
        let q = add_stabilizer_qubit(&mut m, "qubit")?;
        let pair = add_stabilizer_pair(&mut m, "qubit2", q, q)?;
        add_clifford_dynamics(&mut m, q, 1)?;
        add_clifford_dynamics(&mut m, pair, 2)?;
        for s in QUBIT_STATES {
            m.add_basis_attribute(q, s, &[s])?;
        }
        m.add_variable("Z", &["z0", "z1"], Some("z0"))?;
        m.add_variable("X", &["x+", "x-"], Some("x+"))?;
        m.add_variable("Y", &["y+", "y-"], Some("y+"))?;
        Ok(m)
    };
    build().expect("built-in model is valid")
}

/// The measurement task on `qubit ⊕ qubit` whose displayed pairs record the
/// first qubit's `z` attribute in the second, `t₀ = z0`, `t₁ = z1`:
/// `{(z0, t₀) → (z0, t₀), (z1, t₀) → (z1, t₁)}`.
pub fn task_t_m(model: &FiniteTheoryModel, pair: SubstrateId) -> Result<Task, ModelError> {
    let q = model
        .substrate(pair)
        .components()
        .and_then(|c| c.first().copied())
        .ok_or_else(|| ModelError::NotComposite(model.substrate(pair).name.clone()))?;
    let s = |name: &str| model.state_set(q, &[name]);
    let (z0, z1) = (s("z0")?, s("z1")?);
    let cell = |a: StateSet, b: StateSet| model.product_set(pair, &[a, b]);
    Task::new(pair, vec![(cell(z0, z0)?, cell(z0, z0)?), (cell(z1, z0)?, cell(z1, z1)?)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(stabilizer_space(1).states.len(), 6);
        assert_eq!(stabilizer_space(2).states.len(), 60);
        assert_eq!(stabilizer_space(2).products.len(), 36);
        assert_eq!(clifford_action(1).len(), 24);
        assert_eq!(clifford_action(2).len(), 11520);
    }

    #[test]
    fn actions_are_permutations() {
        for p in clifford_action(2).iter().step_by(97) {
            let mut sorted = p.clone();
            sorted.sort();
            assert_eq!(sorted, (0..60).collect::<Vec<u16>>());
        }
    }

    #[test]
    fn bell_state_is_in_the_space() {
        let bell = StabilizerState::from_generators(&["XX".parse().unwrap(), "ZZ".parse().unwrap()]);
        let i = stabilizer_space(2).index(&bell).unwrap();
        assert!(i >= 36);
        assert_eq!(stabilizer_space(2).labels[i], "+XX +ZZ -YY");
    }

    #[test]
    fn hadamard_swaps_z0_and_x_plus() {
        let g = &clifford_action(1);
        let h = g.iter().find(|p| p[0] == 2 && p[2] == 0 && p[1] == 3).unwrap();
        // H sends -Y to +Y.
        assert_eq!(h[5], 4);
    }

    #[test]
    fn t_m_is_possible() {
        let m = stabilizer_qubit_model();
        let pair = m.substrate_id("qubit2").unwrap();
        assert!(super::super::is_possible(&task_t_m(&m, pair).unwrap(), &m));
    }
}
