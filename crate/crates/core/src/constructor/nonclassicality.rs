use std::fmt;

use serde::Serialize;

use super::{FiniteTheoryModel, ModelChecker, ModelError, SubstrateId, Variable};

/// Tolerance for "perfectly distinguishable" and for correlators of ±1.
pub const STRUCTURAL_TOLERANCE: f64 = 1e-10;
/// Tolerance for equality of the probes' marginal states.
pub const MARGINAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointCorrelators {
    pub xx: f64,
    pub zz: f64,
}

/// Numbers produced by simulating the entangling protocol with the
/// candidate mediator. Every field is absent for a mediator that produced
/// no entangled pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NonclassicalityEvidence {
    /// Trace distance between the two joint states `e₊₊`, `e₋₊`.
    pub joint_distance: Option<f64>,
    /// Trace distance between the mediator's two conditional states after
    /// the first step.
    pub mediator_distance: Option<f64>,
    /// Trace distance between the first probe's marginals in `e₊₊`, `e₋₊`.
    pub marginal_a_distance: Option<f64>,
    pub marginal_b_distance: Option<f64>,
    /// Joint correlators in `e₊₊` and `e₋₊`.
    pub correlators: Option<[JointCorrelators; 2]>,
}

impl NonclassicalityEvidence {
    pub fn empty() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionStatus {
    Pass,
    Fail,
}

impl ConditionStatus {
    fn from_bool(b: bool) -> Self {
        if b {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Self::Pass
    }
}

impl fmt::Display for ConditionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub conditions: [ConditionStatus; 3],
    /// One line per condition saying what was checked.
    pub details: [String; 3],
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed())
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), |v| format!("{v:.3e}"))
}

impl ModelChecker<'_> {
    /// Evaluates the three non-classicality conditions for mediator
    /// observable `t` and candidate variable `v`.
    pub fn check_nonclassicality(
        &self,
        mediator: SubstrateId,
        t: &Variable,
        v: &Variable,
        evidence: &NonclassicalityEvidence,
    ) -> Result<ConditionReport, ModelError> {
        let model = self.model();
        let name = |s: SubstrateId| model.substrate(s).name.clone();
        for var in [t, v] {
            if var.substrate() != mediator {
                return Err(ModelError::SubstrateMismatch { expected: name(mediator), found: name(var.substrate()) });
            }
        }
        if t.len() != v.len() {
            return Err(ModelError::CardinalityMismatch {
                t: t.name.clone(),
                v: v.name.clone(),
                t_len: t.len(),
                v_len: v.len(),
            });
        }
        if !self.is_maximal_observable(t)? {
            return Err(ModelError::NotMaximalObservable(t.name.clone()));
        }

        let perfect = |d: Option<f64>| d.is_some_and(|d| d >= 1.0 - STRUCTURAL_TOLERANCE);
        let c1 = perfect(evidence.joint_distance) && perfect(evidence.mediator_distance);
        let d1 = format!(
            "joint distance {}, mediator conditional distance {}",
            fmt_opt(evidence.joint_distance),
            fmt_opt(evidence.mediator_distance)
        );

        let outside = v.states().is_disjoint(t.states());
        let union_distinguishable = match v.union(t) {
            Ok(u) => self.distinguishable_sets(mediator, &u.member_sets())?,
            // Overlapping attributes do not form a variable at all.
            Err(_) => false,
        };
        let c2 = outside && !union_distinguishable;
        let d2 = format!("v outside t: {outside}; v ∪ t distinguishable: {union_distinguishable}");

        let local_blind = |d: Option<f64>| d.is_some_and(|d| d <= MARGINAL_TOLERANCE);
        let correlated = evidence.correlators.is_some_and(|[p, m]| {
            (p.zz.abs() - 1.0).abs() <= STRUCTURAL_TOLERANCE
                && (m.zz.abs() - 1.0).abs() <= STRUCTURAL_TOLERANCE
                && p.zz * m.zz < 0.0
        });
        let incompatible = outside && self.is_superinformation_medium(t, v)?;
        let c3 = local_blind(evidence.marginal_a_distance)
            && local_blind(evidence.marginal_b_distance)
            && correlated
            && incompatible;
        let d3 = format!(
            "marginal distances A {} B {}; joint ZZ opposite ±1: {correlated}; t, v incompatible observables: {incompatible}",
            fmt_opt(evidence.marginal_a_distance),
            fmt_opt(evidence.marginal_b_distance)
        );

        Ok(ConditionReport { conditions: [c1, c2, c3].map(ConditionStatus::from_bool), details: [d1, d2, d3] })
    }
}

pub fn check_nonclassicality(
    model: &FiniteTheoryModel,
    mediator: SubstrateId,
    t: &Variable,
    v: &Variable,
    evidence: &NonclassicalityEvidence,
) -> Result<ConditionReport, ModelError> {
    ModelChecker::new(model).check_nonclassicality(mediator, t, v, evidence)
}
