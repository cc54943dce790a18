//! Finite constructor-theory model checker.
//!
//! A [`FiniteTheoryModel`] declares substrates with finite state sets, the
//! dynamics allowed on each (total maps on the state space), and a basis of
//! attributes over which distinguishability quantifiers range. A task is
//! possible when a single declared map realizes all of its input/output
//! pairs in one shot.

mod checker;
mod nonclassicality;
pub mod stabilizer;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use checker::{
    bar, is_distinguishable, is_information_variable, is_measurement_possible, is_observable,
    is_superinformation_medium, ModelChecker,
};
pub use nonclassicality::{
    check_nonclassicality, ConditionReport, ConditionStatus, JointCorrelators, NonclassicalityEvidence,
};

/// Largest state space a substrate may have.
pub const MAX_STATES: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown substrate {0:?}")]
    UnknownSubstrate(String),
    #[error("duplicate substrate {0:?}")]
    DuplicateSubstrate(String),
    #[error("substrate {substrate:?} has no state {state:?}")]
    UnknownState { substrate: String, state: String },
    #[error("substrate {substrate:?} declares state {state:?} twice")]
    DuplicateState { substrate: String, state: String },
    #[error("substrate {0:?} has no states")]
    EmptySubstrate(String),
    #[error("substrate {substrate:?} has {count} states, more than the supported {MAX_STATES}")]
    TooManyStates { substrate: String, count: usize },
    #[error("attribute {0:?} is empty")]
    EmptyAttribute(String),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("duplicate attribute {0:?}")]
    DuplicateAttribute(String),
    #[error("variable {variable:?}: attributes {first:?} and {second:?} overlap; a variable is a set of disjoint attributes")]
    OverlappingAttributes { variable: String, first: String, second: String },
    #[error("variable {0:?} has no attributes")]
    EmptyVariable(String),
    #[error("variable {variable:?} mixes substrates {first:?} and {second:?}")]
    MixedSubstrates { variable: String, first: String, second: String },
    #[error("variable {variable:?} has no attribute {blank:?} to use as blank")]
    UnknownBlank { variable: String, blank: String },
    #[error("a dynamics map on {substrate:?} is not total: {detail}")]
    MapNotTotal { substrate: String, detail: String },
    #[error("task inputs overlap")]
    OverlappingTaskInputs,
    #[error("{0:?} is not a composite substrate")]
    NotComposite(String),
    #[error("substrate mismatch: expected {expected:?}, found {found:?}")]
    SubstrateMismatch { expected: String, found: String },
    #[error("variable {0:?} has no designated blank attribute")]
    NoBlank(String),
    #[error("no composite substrate pairs {0:?} with a target")]
    MissingComposite(String),
    #[error("attribute {0:?} is not in the declared attribute basis")]
    NotInBasis(String),
    #[error("variables {0:?} and {1:?} share states")]
    NotDisjoint(String, String),
    #[error("variables {t:?} and {v:?} differ in cardinality ({t_len} vs {v_len})")]
    CardinalityMismatch { t: String, v: String, t_len: usize, v_len: usize },
    #[error("{0:?} is not a maximal information observable of the mediator")]
    NotMaximalObservable(String),
    #[error("substrate {substrate:?} has {count} basis attributes; at most {} are supported", checker::MAX_BASIS)]
    BasisTooLarge { substrate: String, count: usize },
    #[error("generator {generator:?} cannot be used on substrate {substrate:?}")]
    BadGenerator { generator: String, substrate: String },
}

/// A set of state indices of one substrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StateSet(u128);

impl StateSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn singleton(i: usize) -> Self {
        Self(1 << i)
    }

    /// `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 128 {
            Self(u128::MAX)
        } else {
            Self((1u128 << n) - 1)
        }
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..128).filter(move |i| bits >> i & 1 == 1)
    }
}

impl FromIterator<usize> for StateSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = Self::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubstrateId(pub usize);

/// How component states sit inside a composite state space.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Embedding {
    /// States are ordered tuples, indexed in mixed radix (first component
    /// most significant).
    Cartesian,
    /// An explicit state space in which only some states are tuples of
    /// component states.
    Explicit(HashMap<Vec<usize>, usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Composite {
    components: Vec<SubstrateId>,
    embedding: Embedding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubstrate {
    pub name: String,
    pub states: Vec<String>,
    composite: Option<Composite>,
}

impl FiniteSubstrate {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn components(&self) -> Option<&[SubstrateId]> {
        self.composite.as_ref().map(|c| c.components.as_slice())
    }

    pub fn is_cartesian(&self) -> bool {
        matches!(self.composite, Some(Composite { embedding: Embedding::Cartesian, .. }))
    }
}

/// A named set of states of one substrate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: String,
    pub substrate: SubstrateId,
    pub members: StateSet,
}

/// A set of pairwise disjoint attributes of one substrate, with an optional
/// designated blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    substrate: SubstrateId,
    attributes: Vec<Attribute>,
    blank: Option<usize>,
}

impl Variable {
    pub fn new(name: impl Into<String>, attributes: Vec<Attribute>, blank: Option<&str>) -> Result<Self, ModelError> {
        let name = name.into();
        let first = attributes.first().ok_or_else(|| ModelError::EmptyVariable(name.clone()))?;
        let substrate = first.substrate;
        for (i, a) in attributes.iter().enumerate() {
            if a.members.is_empty() {
                return Err(ModelError::EmptyAttribute(a.name.clone()));
            }
            if a.substrate != substrate {
                return Err(ModelError::MixedSubstrates {
                    variable: name,
                    first: first.name.clone(),
                    second: a.name.clone(),
                });
            }
            if let Some(b) = attributes[..i].iter().find(|b| !b.members.is_disjoint(a.members)) {
                return Err(ModelError::OverlappingAttributes {
                    variable: name,
                    first: b.name.clone(),
                    second: a.name.clone(),
                });
            }
        }
        let blank = match blank {
            None => None,
            Some(b) => Some(
                attributes
                    .iter()
                    .position(|a| a.name == b)
                    .ok_or_else(|| ModelError::UnknownBlank { variable: name.clone(), blank: b.to_string() })?,
            ),
        };
        Ok(Self { name, substrate, attributes, blank })
    }

    pub fn substrate(&self) -> SubstrateId {
        self.substrate
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn blank(&self) -> Option<&Attribute> {
        self.blank.map(|i| &self.attributes[i])
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn member_sets(&self) -> Vec<StateSet> {
        self.attributes.iter().map(|a| a.members).collect()
    }

    /// Every state in some attribute of the variable.
    pub fn states(&self) -> StateSet {
        self.attributes.iter().fold(StateSet::empty(), |acc, a| acc.union(a.members))
    }

    /// The variable whose attributes are those of both, each attribute kept
    /// once. Fails if the result is not a variable.
    pub fn union(&self, other: &Variable) -> Result<Variable, ModelError> {
        let mut attributes = self.attributes.clone();
        for a in &other.attributes {
            if !attributes.iter().any(|b| b.members == a.members) {
                attributes.push(a.clone());
            }
        }
        Variable::new(format!("{}∪{}", self.name, other.name), attributes, None)
    }
}

/// Ordered input → output attribute pairs on one substrate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub substrate: SubstrateId,
    pairs: Vec<(StateSet, StateSet)>,
}

impl Task {
    pub fn new(substrate: SubstrateId, pairs: Vec<(StateSet, StateSet)>) -> Result<Self, ModelError> {
        for (i, (a, _)) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|(b, _)| !a.is_disjoint(*b)) {
                return Err(ModelError::OverlappingTaskInputs);
            }
        }
        Ok(Self { substrate, pairs })
    }

    pub fn pairs(&self) -> &[(StateSet, StateSet)] {
        &self.pairs
    }
}

/// One declared family of dynamics on a substrate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dynamics {
    /// Every total function on the state space.
    AllFunctions,
    /// An explicit list of total maps, `map[state] = image`.
    Maps(Vec<Vec<u16>>),
}

impl Dynamics {
    /// Whether some map in the family realizes every pair of `task`.
    fn realizes(&self, task: &Task, num_states: usize) -> bool {
        match self {
            Dynamics::AllFunctions => (0..num_states).all(|s| {
                !task
                    .pairs
                    .iter()
                    .filter(|(input, _)| input.contains(s))
                    .fold(StateSet::full(num_states), |acc, (_, out)| acc.intersection(*out))
                    .is_empty()
            }),
            Dynamics::Maps(maps) => maps.iter().any(|m| map_realizes(m, task)),
        }
    }

    fn len(&self, num_states: usize) -> f64 {
        match self {
            Dynamics::AllFunctions => (num_states as f64).powi(num_states as i32),
            Dynamics::Maps(m) => m.len() as f64,
        }
    }
}

fn map_realizes(map: &[u16], task: &Task) -> bool {
    task.pairs.iter().all(|(input, output)| input.iter().all(|s| output.contains(map[s] as usize)))
}

/// Substrates, their dynamics, and the attribute basis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteTheoryModel {
    pub name: String,
    substrates: Vec<FiniteSubstrate>,
    dynamics: Vec<Vec<Dynamics>>,
    basis: Vec<Vec<Attribute>>,
    variables: Vec<Variable>,
}

impl FiniteTheoryModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    fn push_substrate(&mut self, substrate: FiniteSubstrate) -> Result<SubstrateId, ModelError> {
        if self.substrates.iter().any(|s| s.name == substrate.name) {
            return Err(ModelError::DuplicateSubstrate(substrate.name));
        }
        if substrate.states.is_empty() {
            return Err(ModelError::EmptySubstrate(substrate.name));
        }
        if substrate.states.len() > MAX_STATES {
            return Err(ModelError::TooManyStates { substrate: substrate.name, count: substrate.states.len() });
        }
        for (i, s) in substrate.states.iter().enumerate() {
            if substrate.states[..i].contains(s) {
                return Err(ModelError::DuplicateState { substrate: substrate.name.clone(), state: s.clone() });
            }
        }
        self.substrates.push(substrate);
        self.dynamics.push(Vec::new());
        self.basis.push(Vec::new());
        Ok(SubstrateId(self.substrates.len() - 1))
    }

    pub fn add_substrate(&mut self, name: &str, states: &[&str]) -> Result<SubstrateId, ModelError> {
        self.push_substrate(FiniteSubstrate {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
            composite: None,
        })
    }

    /// A composite whose states are all ordered tuples of component states.
    pub fn add_cartesian(&mut self, name: &str, components: &[SubstrateId]) -> Result<SubstrateId, ModelError> {
        let mut labels = vec![String::new()];
        for (k, c) in components.iter().enumerate() {
            let comp = self.substrate(*c);
            labels = labels
                .iter()
                .flat_map(|prefix| {
                    comp.states.iter().map(move |s| if k == 0 { s.clone() } else { format!("{prefix},{s}") })
                })
                .collect();
        }
        self.push_substrate(FiniteSubstrate {
            name: name.into(),
            states: labels,
            composite: Some(Composite { components: components.to_vec(), embedding: Embedding::Cartesian }),
        })
    }

    /// A composite with its own state space; `tuples` says which composite
    /// state each tuple of component states is.
    pub fn add_composite(
        &mut self,
        name: &str,
        components: &[SubstrateId],
        states: Vec<String>,
        tuples: HashMap<Vec<usize>, usize>,
    ) -> Result<SubstrateId, ModelError> {
        self.push_substrate(FiniteSubstrate {
            name: name.into(),
            states,
            composite: Some(Composite { components: components.to_vec(), embedding: Embedding::Explicit(tuples) }),
        })
    }

    pub fn add_dynamics(&mut self, substrate: SubstrateId, dynamics: Dynamics) -> Result<(), ModelError> {
        let sub = self.substrate(substrate);
        if let Dynamics::Maps(maps) = &dynamics {
            let n = sub.num_states();
            for m in maps {
                if m.len() != n || m.iter().any(|&x| x as usize >= n) {
                    return Err(ModelError::MapNotTotal {
                        substrate: sub.name.clone(),
                        detail: format!("map has {} entries for {n} states", m.len()),
                    });
                }
            }
        }
        self.dynamics[substrate.0].push(dynamics);
        Ok(())
    }

    pub fn add_basis_attribute(
        &mut self,
        substrate: SubstrateId,
        name: &str,
        states: &[&str],
    ) -> Result<Attribute, ModelError> {
        let members = self.state_set(substrate, states)?;
        self.add_basis_set(substrate, name, members)
    }

    pub fn add_basis_set(
        &mut self,
        substrate: SubstrateId,
        name: &str,
        members: StateSet,
    ) -> Result<Attribute, ModelError> {
        if members.is_empty() {
            return Err(ModelError::EmptyAttribute(name.into()));
        }
        if self.basis.iter().flatten().any(|a| a.name == name) {
            return Err(ModelError::DuplicateAttribute(name.into()));
        }
        let a = Attribute { name: name.into(), substrate, members };
        self.basis[substrate.0].push(a.clone());
        Ok(a)
    }

    /// Declares a variable over basis attributes.
    pub fn add_variable(
        &mut self,
        name: &str,
        attributes: &[&str],
        blank: Option<&str>,
    ) -> Result<Variable, ModelError> {
        let attrs = attributes.iter().map(|a| self.attribute(a).cloned()).collect::<Result<Vec<_>, _>>()?;
        let v = Variable::new(name, attrs, blank)?;
        self.variables.push(v.clone());
        Ok(v)
    }

    pub fn substrates(&self) -> &[FiniteSubstrate] {
        &self.substrates
    }

    pub fn substrate(&self, id: SubstrateId) -> &FiniteSubstrate {
        &self.substrates[id.0]
    }

    pub fn substrate_id(&self, name: &str) -> Result<SubstrateId, ModelError> {
        self.substrates
            .iter()
            .position(|s| s.name == name)
            .map(SubstrateId)
            .ok_or_else(|| ModelError::UnknownSubstrate(name.into()))
    }

    pub fn dynamics(&self, id: SubstrateId) -> &[Dynamics] {
        &self.dynamics[id.0]
    }

    /// Number of declared maps on a substrate (all-functions counted as `n^n`).
    pub fn dynamics_size(&self, id: SubstrateId) -> f64 {
        let n = self.substrate(id).num_states();
        self.dynamics[id.0].iter().map(|d| d.len(n)).sum()
    }

    pub fn basis(&self, id: SubstrateId) -> &[Attribute] {
        &self.basis[id.0]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn attribute(&self, name: &str) -> Result<&Attribute, ModelError> {
        self.basis.iter().flatten().find(|a| a.name == name).ok_or_else(|| ModelError::UnknownAttribute(name.into()))
    }

    pub fn state_index(&self, substrate: SubstrateId, state: &str) -> Result<usize, ModelError> {
        let sub = self.substrate(substrate);
        sub.states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| ModelError::UnknownState { substrate: sub.name.clone(), state: state.into() })
    }

    pub fn state_set(&self, substrate: SubstrateId, states: &[&str]) -> Result<StateSet, ModelError> {
        states.iter().map(|s| self.state_index(substrate, s)).collect()
    }

    /// The composite state made of the given component states, if the
    /// composite contains that tuple.
    pub fn tuple_state(&self, composite: SubstrateId, parts: &[usize]) -> Result<Option<usize>, ModelError> {
        let sub = self.substrate(composite);
        let comp = sub.composite.as_ref().ok_or_else(|| ModelError::NotComposite(sub.name.clone()))?;
        Ok(match &comp.embedding {
            Embedding::Cartesian => {
                let mut index = 0;
                for (c, &p) in comp.components.iter().zip(parts) {
                    index = index * self.substrate(*c).num_states() + p;
                }
                Some(index)
            }
            Embedding::Explicit(map) => map.get(parts).copied(),
        })
    }

    /// The composite attribute `a₁ × a₂ × …`.
    pub fn product_set(&self, composite: SubstrateId, parts: &[StateSet]) -> Result<StateSet, ModelError> {
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for p in parts {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    p.iter().map(move |s| {
                        let mut t = t.clone();
                        t.push(s);
                        t
                    })
                })
                .collect();
        }
        let mut out = StateSet::empty();
        for t in tuples {
            if let Some(i) = self.tuple_state(composite, &t)? {
                out.insert(i);
            }
        }
        Ok(out)
    }

    /// Composites `S ⊕ T` whose first component is `source`, with their
    /// second component.
    pub fn targets_of(&self, source: SubstrateId) -> Vec<(SubstrateId, SubstrateId)> {
        self.substrates
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s.components() {
                Some([first, second]) if *first == source => Some((SubstrateId(i), *second)),
                _ => None,
            })
            .collect()
    }

    /// The composite `S ⊕ S`, if declared.
    pub fn doubled(&self, source: SubstrateId) -> Option<SubstrateId> {
        self.targets_of(source).into_iter().find(|(_, t)| *t == source).map(|(c, _)| c)
    }

    /// Whether `map` on a Cartesian composite acts on component `which` only,
    /// i.e. has the form `f × id`.
    pub fn is_local_map(&self, composite: SubstrateId, which: usize, map: &[u16]) -> Result<bool, ModelError> {
        let sub = self.substrate(composite);
        let comp = sub.composite.as_ref().ok_or_else(|| ModelError::NotComposite(sub.name.clone()))?;
        if !sub.is_cartesian() {
            return Ok(false);
        }
        let sizes: Vec<usize> = comp.components.iter().map(|c| self.substrate(*c).num_states()).collect();
        let decode = |mut i: usize| {
            let mut parts = vec![0; sizes.len()];
            for k in (0..sizes.len()).rev() {
                parts[k] = i % sizes[k];
                i /= sizes[k];
            }
            parts
        };
        // The image of the active component must depend on that component only.
        let mut f: HashMap<usize, usize> = HashMap::new();
        for (s, &image) in map.iter().enumerate() {
            let before = decode(s);
            let after = decode(image as usize);
            let others_fixed = (0..sizes.len()).filter(|k| *k != which).all(|k| before[k] == after[k]);
            if !others_fixed {
                return Ok(false);
            }
            match f.insert(before[which], after[which]) {
                Some(prev) if prev != after[which] => return Ok(false),
                _ => {}
            }
        }
        Ok(true)
    }

    pub fn attribute_name(&self, substrate: SubstrateId, set: StateSet) -> String {
        if let Some(a) = self.basis(substrate).iter().find(|a| a.members == set) {
            return a.name.clone();
        }
        let sub = self.substrate(substrate);
        let names: Vec<&str> = set.iter().map(|i| sub.states[i].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

impl fmt::Display for FiniteTheoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {}", self.name)?;
        for (i, s) in self.substrates.iter().enumerate() {
            writeln!(
                f,
                "  substrate {} ({} states, {} maps, {} basis attributes)",
                s.name,
                s.num_states(),
                self.dynamics_size(SubstrateId(i)),
                self.basis[i].len()
            )?;
        }
        Ok(())
    }
}

/// `true` iff some declared map on the task's substrate realizes the task.
pub fn is_possible(task: &Task, model: &FiniteTheoryModel) -> bool {
    let n = model.substrate(task.substrate).num_states();
    model.dynamics(task.substrate).iter().any(|d| d.realizes(task, n))
}

/// A classical bit: states `{0, 1}`, every function allowed, doubled as
/// `bit2 = bit × bit`.
pub fn classical_model(name: &str, states: &[&str]) -> Result<FiniteTheoryModel, ModelError> {
    let mut m = FiniteTheoryModel::new(name);
    let s = m.add_substrate("s", states)?;
    let pair = m.add_cartesian("s2", &[s, s])?;
    m.add_dynamics(s, Dynamics::AllFunctions)?;
    m.add_dynamics(pair, Dynamics::AllFunctions)?;
    for st in states {
        m.add_basis_attribute(s, st, &[st])?;
    }
    Ok(m)
}
