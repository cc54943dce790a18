//! The qubit mediator: the Bell+SWAP protocol and the entangling task
//! whose outputs serve as non-classicality evidence.

use nalgebra::{DVector, Vector2};
use serde::Serialize;

use super::{
    marginal_a, marginal_b, named_ket, negativity, trace_distance_qubit, trace_distance_two_qubit, EntanglementReport,
    Qubit, TwoQubit, WitnessError,
};
use crate::constructor::{JointCorrelators, NonclassicalityEvidence};
use crate::heisenberg::{pauli_c64, reduce_pure_to_pair, run_example_protocol, Gate, ProtocolTrace, System, C64};
use crate::pauli::Letter;

/// Negativity of the reduced states along the example protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementOnset {
    /// `A`–`B` negativity at `t₀, t₁, t₂`.
    pub ab: Vec<f64>,
    /// `A`–`M` negativity at `t₁`.
    pub am_t1: f64,
}

pub fn entanglement_onset(trace: &ProtocolTrace) -> Result<EntanglementOnset, WitnessError> {
    let ab = (0..=trace.final_time())
        .map(|t| negativity(&trace.reduced_pair(t, System::A, System::B)?))
        .collect::<Result<_, _>>()?;
    let am_t1 = negativity(&trace.reduced_pair(1, System::A, System::M)?)?;
    Ok(EntanglementOnset { ab, am_t1 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumReference {
    /// Final `A`–`B` state of the Bell+SWAP protocol.
    pub report: EntanglementReport,
    /// `e₊₊`, `e₋₊`: outputs of the entangling task for `A` in `|+⟩`, `|−⟩`.
    #[serde(skip)]
    pub outputs: [TwoQubit; 2],
    /// The mediator's states after the first step, conditioned on `A`
    /// reading `Z = +1`.
    #[serde(skip)]
    pub mediator_conditionals: [Qubit; 2],
    pub evidence: NonclassicalityEvidence,
}

fn ket3(a: &Vector2<C64>, m: &Vector2<C64>, b: &Vector2<C64>) -> DVector<C64> {
    DVector::from_iterator(8, a.kronecker(m).kronecker(b).iter().copied())
}

fn expectation(rho: &TwoQubit, p: Letter, q: Letter) -> f64 {
    (rho * pauli_c64(p).kronecker(&pauli_c64(q))).trace().re
}

/// `M`'s state after projecting `A` on `|0⟩`, with `B` traced out.
fn mediator_given_a_zero(psi: &DVector<C64>) -> Qubit {
    let mut rho = Qubit::zeros();
    for m in 0..2 {
        for m2 in 0..2 {
            for b in 0..2 {
                rho[(m, m2)] += psi[m * 2 + b] * psi[m2 * 2 + b].conj();
            }
        }
    }
    rho / rho.trace()
}

/// Runs the qubit-mediator protocols and collects the evidence for the
/// non-classicality conditions.
///
/// The first step entangles `A` with `M` (CNOT `A→M`, then `H` on `A`), the
/// second hands `M`'s share to `B` (SWAP `M↔B`, then `H` on `B`). With `M`
/// in `|0⟩` and `B` in `|+⟩`, inputs `A = |±⟩` end in `e₊₊ = Φ⁺` and
/// `e₋₊ = Ψ⁺`.
pub fn run_quantum_mediator_reference() -> Result<QuantumReference, WitnessError> {
    let trace = run_example_protocol();
    let final_ab = trace.reduced_pair(trace.final_time(), System::A, System::B)?;
    let report = EntanglementReport::of(&final_ab)?;

    let t1 = Gate::sequence("T1", &[Gate::cnot(3, 0, 1), Gate::hadamard(3, 0)]).to_c64();
    let t2 = Gate::sequence("T2", &[Gate::swap(3, 1, 2), Gate::hadamard(3, 2)]).to_c64();
    let k = |n: &str| named_ket(n).expect("known ket");

    let mut outputs = [TwoQubit::zeros(); 2];
    let mut conditionals = [Qubit::zeros(); 2];
    for (i, a) in ["+", "-"].iter().enumerate() {
        let after_t1 = &t1 * ket3(&k(a), &k("0"), &k("+"));
        conditionals[i] = mediator_given_a_zero(&after_t1);
        outputs[i] = reduce_pure_to_pair(&(&t2 * after_t1), System::A, System::B);
    }

    let correlators = outputs.map(|e| JointCorrelators {
        xx: expectation(&e, Letter::X, Letter::X),
        zz: expectation(&e, Letter::Z, Letter::Z),
    });
    let evidence = NonclassicalityEvidence {
        joint_distance: Some(trace_distance_two_qubit(&outputs[0], &outputs[1])),
        mediator_distance: Some(trace_distance_qubit(&conditionals[0], &conditionals[1])),
        marginal_a_distance: Some(trace_distance_qubit(&marginal_a(&outputs[0]), &marginal_a(&outputs[1]))),
        marginal_b_distance: Some(trace_distance_qubit(&marginal_b(&outputs[0]), &marginal_b(&outputs[1]))),
        correlators: Some(correlators),
    };
    Ok(QuantumReference { report, outputs, mediator_conditionals: conditionals, evidence })
}
