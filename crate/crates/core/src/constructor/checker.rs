use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use itertools::Itertools;

use super::{is_possible, Attribute, FiniteTheoryModel, ModelError, StateSet, SubstrateId, Task, Variable};

/// Largest attribute basis the enumeration will walk (`2^n` families).
pub const MAX_BASIS: usize = 20;

type Key = (SubstrateId, Vec<StateSet>);

/// Evaluates predicates over one model, memoizing the expensive
/// enumerations (information variables per substrate, distinguishability).
pub struct ModelChecker<'a> {
    model: &'a FiniteTheoryModel,
    permutable: RefCell<HashMap<Key, bool>>,
    admits: RefCell<HashMap<Key, bool>>,
    distinguishable: RefCell<HashMap<Key, bool>>,
    info_vars: RefCell<HashMap<SubstrateId, Rc<Vec<Vec<StateSet>>>>>,
}

fn key(sub: SubstrateId, sets: &[StateSet]) -> Key {
    let mut v = sets.to_vec();
    v.sort();
    (sub, v)
}

impl<'a> ModelChecker<'a> {
    pub fn new(model: &'a FiniteTheoryModel) -> Self {
        Self {
            model,
            permutable: RefCell::default(),
            admits: RefCell::default(),
            distinguishable: RefCell::default(),
            info_vars: RefCell::default(),
        }
    }

    pub fn model(&self) -> &'a FiniteTheoryModel {
        self.model
    }

    pub fn is_possible(&self, task: &Task) -> bool {
        is_possible(task, self.model)
    }

    fn name(&self, sub: SubstrateId) -> String {
        self.model.substrate(sub).name.clone()
    }

    /// Every permutation task `{x_i → x_σ(i)}` is possible.
    fn all_permutations_possible(&self, sub: SubstrateId, sets: &[StateSet]) -> Result<bool, ModelError> {
        let k = key(sub, sets);
        if let Some(&r) = self.permutable.borrow().get(&k) {
            return Ok(r);
        }
        let mut ok = true;
        for sigma in (0..sets.len()).permutations(sets.len()) {
            let task = Task::new(sub, sets.iter().zip(&sigma).map(|(x, &j)| (*x, sets[j])).collect())?;
            if !self.is_possible(&task) {
                ok = false;
                break;
            }
        }
        self.permutable.borrow_mut().insert(k, ok);
        Ok(ok)
    }

    /// The cloning task `{(x, x₀) → (x, x)}` on `S ⊕ S`.
    fn cloning_possible(&self, sub: SubstrateId, sets: &[StateSet], blank: StateSet) -> Result<bool, ModelError> {
        let pair = self.model.doubled(sub).ok_or_else(|| ModelError::MissingComposite(self.name(sub)))?;
        let mut pairs = Vec::with_capacity(sets.len());
        for x in sets {
            pairs.push((self.model.product_set(pair, &[*x, blank])?, self.model.product_set(pair, &[*x, *x])?));
        }
        Ok(self.is_possible(&Task::new(pair, pairs)?))
    }

    fn information_variable_with_blank(
        &self,
        sub: SubstrateId,
        sets: &[StateSet],
        blank: StateSet,
    ) -> Result<bool, ModelError> {
        Ok(self.cloning_possible(sub, sets, blank)? && self.all_permutations_possible(sub, sets)?)
    }

    /// Cloning with the variable's designated blank, plus every permutation.
    pub fn is_information_variable(&self, x: &Variable) -> Result<bool, ModelError> {
        let blank = x.blank().ok_or_else(|| ModelError::NoBlank(x.name.clone()))?;
        self.information_variable_with_blank(x.substrate(), &x.member_sets(), blank.members)
    }

    /// Whether the attribute sets form an information variable for some
    /// choice of blank among them.
    pub fn admits_information_variable(&self, sub: SubstrateId, sets: &[StateSet]) -> Result<bool, ModelError> {
        let k = key(sub, sets);
        if let Some(&r) = self.admits.borrow().get(&k) {
            return Ok(r);
        }
        let mut ok = false;
        if self.all_permutations_possible(sub, sets)? {
            for b in sets {
                if self.cloning_possible(sub, sets, *b)? {
                    ok = true;
                    break;
                }
            }
        }
        self.admits.borrow_mut().insert(k, ok);
        Ok(ok)
    }

    /// Information variable with the designated blank if there is one,
    /// otherwise with any blank.
    fn is_info(&self, x: &Variable) -> Result<bool, ModelError> {
        match x.blank() {
            Some(_) => self.is_information_variable(x),
            None => self.admits_information_variable(x.substrate(), &x.member_sets()),
        }
    }

    /// All families of pairwise disjoint basis attributes.
    fn basis_families(&self, sub: SubstrateId) -> Result<Vec<Vec<&'a Attribute>>, ModelError> {
        let basis = self.model.basis(sub);
        if basis.len() > MAX_BASIS {
            return Err(ModelError::BasisTooLarge { substrate: self.name(sub), count: basis.len() });
        }
        let mut out = Vec::new();
        for mask in 1u32..(1 << basis.len()) {
            let family: Vec<&Attribute> = (0..basis.len()).filter(|i| mask >> i & 1 == 1).map(|i| &basis[i]).collect();
            let disjoint = family.iter().tuple_combinations().all(|(a, b)| a.members.is_disjoint(b.members));
            if disjoint {
                out.push(family);
            }
        }
        Ok(out)
    }

    /// Every variable that can be formed from the attribute basis.
    pub fn basis_variables(&self, sub: SubstrateId) -> Result<Vec<Variable>, ModelError> {
        self.basis_families(sub)?
            .into_iter()
            .map(|family| {
                let name = format!("{{{}}}", family.iter().map(|a| a.name.as_str()).join(", "));
                Variable::new(name, family.into_iter().cloned().collect(), None)
            })
            .collect()
    }

    /// Information variables over the basis of `sub`. Without a declared
    /// `sub ⊕ sub` no cloning task can be stated, so the list is empty.
    fn information_variables(&self, sub: SubstrateId) -> Result<Rc<Vec<Vec<StateSet>>>, ModelError> {
        if let Some(v) = self.info_vars.borrow().get(&sub) {
            return Ok(Rc::clone(v));
        }
        let mut vars = Vec::new();
        if self.model.doubled(sub).is_some() {
            for family in self.basis_families(sub)? {
                let sets: Vec<StateSet> = family.iter().map(|a| a.members).collect();
                if self.admits_information_variable(sub, &sets)? {
                    vars.push(sets);
                }
            }
        }
        let vars = Rc::new(vars);
        self.info_vars.borrow_mut().insert(sub, Rc::clone(&vars));
        Ok(vars)
    }

    /// Some possible task maps each `x_i` into the attribute `q_σ(i)` of an
    /// information variable, either on `sub` itself or on a declared
    /// target `T` of a composite `sub ⊕ T` (the target starting in a basis
    /// attribute `b`).
    pub fn distinguishable_sets(&self, sub: SubstrateId, sets: &[StateSet]) -> Result<bool, ModelError> {
        if sets.is_empty() {
            return Ok(true);
        }
        let k = key(sub, sets);
        if let Some(&r) = self.distinguishable.borrow().get(&k) {
            return Ok(r);
        }
        let r = self.search_distinguishing_task(sub, sets)?;
        self.distinguishable.borrow_mut().insert(k, r);
        Ok(r)
    }

    fn search_distinguishing_task(&self, sub: SubstrateId, sets: &[StateSet]) -> Result<bool, ModelError> {
        let n = sets.len();
        for q in self.information_variables(sub)?.iter().filter(|q| q.len() == n) {
            for sigma in (0..n).permutations(n) {
                let task = Task::new(sub, sets.iter().zip(&sigma).map(|(x, &j)| (*x, q[j])).collect())?;
                if self.is_possible(&task) {
                    return Ok(true);
                }
            }
        }
        let all = StateSet::full(self.model.substrate(sub).num_states());
        for (composite, target) in self.model.targets_of(sub) {
            for q in self.information_variables(target)?.iter().filter(|q| q.len() == n) {
                for b in self.model.basis(target) {
                    let inputs = sets
                        .iter()
                        .map(|x| self.model.product_set(composite, &[*x, b.members]))
                        .collect::<Result<Vec<_>, _>>()?;
                    if inputs.iter().any(|s| s.is_empty()) {
                        continue;
                    }
                    for sigma in (0..n).permutations(n) {
                        let pairs = inputs
                            .iter()
                            .zip(&sigma)
                            .map(|(input, &j)| Ok((*input, self.model.product_set(composite, &[all, q[j]])?)))
                            .collect::<Result<Vec<_>, ModelError>>()?;
                        if self.is_possible(&Task::new(composite, pairs)?) {
                            return Ok(true);
                        }
                    }
                }
            }
        }
        Ok(false)
    }

    pub fn is_distinguishable(&self, x: &Variable) -> Result<bool, ModelError> {
        self.distinguishable_sets(x.substrate(), &x.member_sets())
    }

    /// Union of the basis attributes distinguishable from `n`.
    pub fn bar_set(&self, sub: SubstrateId, n: StateSet) -> Result<StateSet, ModelError> {
        let mut out = StateSet::empty();
        if n.is_empty() {
            return Ok(out);
        }
        for a in self.model.basis(sub) {
            if a.members.is_disjoint(n) && self.distinguishable_sets(sub, &[n, a.members])? {
                out = out.union(a.members);
            }
        }
        Ok(out)
    }

    pub fn bar(&self, n: &Attribute) -> Result<StateSet, ModelError> {
        if !self.model.basis(n.substrate).contains(n) {
            return Err(ModelError::NotInBasis(n.name.clone()));
        }
        self.bar_set(n.substrate, n.members)
    }

    /// Information variable whose attributes all equal their double bar.
    pub fn is_observable(&self, x: &Variable) -> Result<bool, ModelError> {
        if !self.is_info(x)? {
            return Ok(false);
        }
        for a in x.attributes() {
            let once = self.bar_set(x.substrate(), a.members)?;
            if self.bar_set(x.substrate(), once)? != a.members {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The task `{(x_i, p₀) → (x_i, p_σ(i))}` on some declared `S ⊕ T` for
    /// an information variable `P` of `T` with `p₀ ∈ P`.
    pub fn is_measurement_possible(&self, x: &Variable) -> Result<bool, ModelError> {
        let sub = x.substrate();
        let targets = self.model.targets_of(sub);
        if targets.is_empty() {
            return Err(ModelError::MissingComposite(self.name(sub)));
        }
        let sets = x.member_sets();
        let n = sets.len();
        for (composite, target) in targets {
            for p in self.information_variables(target)?.iter().filter(|p| p.len() == n) {
                for p0 in p {
                    for sigma in (0..n).permutations(n) {
                        let pairs = sets
                            .iter()
                            .zip(&sigma)
                            .map(|(s, &j)| {
                                Ok((
                                    self.model.product_set(composite, &[*s, *p0])?,
                                    self.model.product_set(composite, &[*s, p[j]])?,
                                ))
                            })
                            .collect::<Result<Vec<_>, ModelError>>()?;
                        if self.is_possible(&Task::new(composite, pairs)?) {
                            return Ok(true);
                        }
                    }
                }
            }
        }
        Ok(false)
    }

    /// Both observables, and their union is not an information variable for
    /// any blank.
    pub fn is_superinformation_medium(&self, x: &Variable, z: &Variable) -> Result<bool, ModelError> {
        if x.substrate() != z.substrate() {
            return Err(ModelError::SubstrateMismatch {
                expected: self.name(x.substrate()),
                found: self.name(z.substrate()),
            });
        }
        if !x.states().is_disjoint(z.states()) {
            return Err(ModelError::NotDisjoint(x.name.clone(), z.name.clone()));
        }
        if !self.is_observable(x)? || !self.is_observable(z)? {
            return Ok(false);
        }
        let union = x.union(z)?;
        Ok(!self.admits_information_variable(union.substrate(), &union.member_sets())?)
    }

    /// `t` is an information observable and adding any further disjoint
    /// basis attribute breaks the information-variable property.
    pub fn is_maximal_observable(&self, t: &Variable) -> Result<bool, ModelError> {
        if !self.is_observable(t)? {
            return Ok(false);
        }
        let states = t.states();
        let sets = t.member_sets();
        for a in self.model.basis(t.substrate()) {
            if a.members.is_disjoint(states) {
                let mut bigger = sets.clone();
                bigger.push(a.members);
                if self.admits_information_variable(t.substrate(), &bigger)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn is_information_variable(x: &Variable, model: &FiniteTheoryModel) -> Result<bool, ModelError> {
    ModelChecker::new(model).is_information_variable(x)
}

pub fn is_distinguishable(x: &Variable, model: &FiniteTheoryModel) -> Result<bool, ModelError> {
    ModelChecker::new(model).is_distinguishable(x)
}

pub fn bar(n: &Attribute, model: &FiniteTheoryModel) -> Result<StateSet, ModelError> {
    ModelChecker::new(model).bar(n)
}

pub fn is_observable(x: &Variable, model: &FiniteTheoryModel) -> Result<bool, ModelError> {
    ModelChecker::new(model).is_observable(x)
}

pub fn is_measurement_possible(x: &Variable, model: &FiniteTheoryModel) -> Result<bool, ModelError> {
    ModelChecker::new(model).is_measurement_possible(x)
}

pub fn is_superinformation_medium(model: &FiniteTheoryModel, x: &Variable, z: &Variable) -> Result<bool, ModelError> {
    ModelChecker::new(model).is_superinformation_medium(x, z)
}
