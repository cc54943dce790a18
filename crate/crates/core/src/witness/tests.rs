use nalgebra::{DMatrix, Vector2};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::search::sampled_steps_for_tests;
use super::*;
use crate::heisenberg::run_example_protocol;

/// Cyclic Jacobi eigenvalues of a real symmetric matrix.
fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Negativity via the real embedding `[[Re, −Im], [Im, Re]]`, whose spectrum
/// is the Hermitian spectrum with every eigenvalue doubled.
fn oracle_negativity(rho: &TwoQubit) -> f64 {
    let mut pt = TwoQubit::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    pt[(2 * a + b, 2 * a2 + b2)] = rho[(2 * a + b2, 2 * a2 + b)];
                }
            }
        }
    }
    let real = DMatrix::from_fn(8, 8, |r, c| {
        let z = pt[(r % 4, c % 4)];
        match (r < 4, c < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    0.5 * jacobi_eigenvalues(real).iter().filter(|&&x| x < 0.0).map(|x| -x).sum::<f64>()
}

fn random_density(rng: &mut ChaCha8Rng) -> TwoQubit {
    let g = TwoQubit::from_fn(|_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rank = rng.random_range(1..=4);
    let mut rho = TwoQubit::zeros();
    for k in 0..rank {
        let v = g.column(k).into_owned();
        rho += v * v.adjoint();
    }
    rho / rho.trace()
}

fn classical_mixture() -> TwoQubit {
    let mut rho = TwoQubit::zeros();
    rho[(0, 0)] = Complex::from(0.5);
    rho[(3, 3)] = Complex::from(0.5);
    rho
}

fn max_abs(m: &TwoQubit) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// Frozen from `oracle_negativity`.
const BELL_NEGATIVITY: f64 = 0.5;
const MIXTURE_NEGATIVITY: f64 = 0.0;

#[test]
fn oracle_values_are_frozen() {
    assert!((oracle_negativity(&bell_state()) - BELL_NEGATIVITY).abs() < 1e-12);
    assert!((oracle_negativity(&classical_mixture()) - MIXTURE_NEGATIVITY).abs() < 1e-12);
}

#[test]
fn negativity_examples() {
    assert!((negativity(&bell_state()).unwrap() - BELL_NEGATIVITY).abs() < 1e-12);
    assert!((negativity(&classical_mixture()).unwrap() - MIXTURE_NEGATIVITY).abs() < 1e-12);
    let product = kron(&pure_qubit(&named_ket("+").unwrap()), &pure_qubit(&named_ket("+i").unwrap()));
    assert!(negativity(&product).unwrap() < 1e-12);
    let ev = hermitian_eigenvalues(&DMatrix::from_fn(4, 4, |r, c| partial_transpose_b(&bell_state())[(r, c)]));
    for (x, want) in ev.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
        assert!((x - want).abs() < 1e-12);
    }
}

#[test]
fn negativity_matches_oracle_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let rho = random_density(&mut rng);
        assert!((negativity(&rho).unwrap() - oracle_negativity(&rho)).abs() < 1e-10);
    }
}

#[test]
fn negativity_rejects_invalid_input() {
    let mut bad = TwoQubit::zeros();
    bad[(0, 0)] = Complex::from(1.5);
    bad[(1, 1)] = Complex::from(-0.5);
    assert!(matches!(negativity(&bad), Err(WitnessError::NotPositive(_))));
    assert!(matches!(negativity(&TwoQubit::zeros()), Err(WitnessError::NotUnitTrace(_))));
    let mut skew = bell_state();
    skew[(0, 1)] = Complex::from(0.3);
    assert!(matches!(negativity(&skew), Err(WitnessError::NotHermitian(_))));
}

#[test]
fn werner_threshold_is_one_third() {
    let werner = |p: f64| bell_state() * Complex::from(p) + TwoQubit::identity() * Complex::from((1.0 - p) / 4.0);
    let min_pt =
        |p: f64| hermitian_eigenvalues(&DMatrix::from_fn(4, 4, |r, c| partial_transpose_b(&werner(p))[(r, c)]))[0];
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if min_pt(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((lo - 1.0 / 3.0).abs() < 1e-6, "{lo}");
    assert!(negativity(&werner(0.3)).unwrap() == 0.0);
    assert!((negativity(&werner(0.5)).unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn chsh_examples() {
    assert!((chsh_max(&bell_state()) - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    assert!((chsh_max(&classical_mixture()) - 2.0).abs() < 1e-12);
    assert!(chsh_max(&(TwoQubit::identity() / Complex::from(4.0))) <= 2.0);
}

#[test]
fn chsh_formula_matches_angle_optimization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let rho = random_density(&mut rng);
        let formula = chsh_max(&rho);
        let optimized = chsh_by_angles(&rho, 6, i);
        assert!((formula - optimized).abs() < OPTIMIZATION_TOLERANCE, "state {i}: {formula} vs {optimized}");
    }
}

#[test]
fn identity_steps_leave_the_state_alone() {
    let s = HybridState::product(3, 1, &named_ket("+").unwrap(), &named_ket("1").unwrap()).unwrap();
    let after = apply_step_b(&apply_step_a(&s, &LocalStepA::identity(3)).unwrap(), &LocalStepB::identity(3)).unwrap();
    assert_eq!(after.branches().len(), 1);
    assert_eq!(after.branches()[0].label, 1);
    assert!(max_abs(&(final_ab_state(&after) - final_ab_state(&s))) < 1e-15);
}

#[test]
fn measuring_plus_splits_evenly_and_leaves_b() {
    let s = HybridState::product(2, 0, &named_ket("+").unwrap(), &named_ket("+i").unwrap()).unwrap();
    let after = apply_step_a(&s, &measure_z_and_record(2)).unwrap();
    let weights: Vec<f64> = after.branches().iter().map(|b| b.probability).collect();
    assert_eq!(weights.len(), 2);
    assert!(weights.iter().all(|w| (w - 0.5).abs() < 1e-12));
    assert!(trace_distance_qubit(&after.marginal_b(), &s.marginal_b()) < 1e-12);
}

#[test]
fn z_copy_encodes_the_measurement_task() {
    for (input, label) in [("0", 0), ("1", 1)] {
        let s = HybridState::product(2, 0, &named_ket(input).unwrap(), &named_ket("0").unwrap()).unwrap();
        let after = apply_step_a(&s, &measure_z_and_record(2)).unwrap();
        assert_eq!(after.branches().len(), 1);
        assert_eq!(after.branches()[0].label, label);
        assert!(max_abs(&(after.branches()[0].rho - s.branches()[0].rho)) < 1e-15);
    }
}

#[test]
fn z_copy_then_conditional_flip_gives_classical_correlation() {
    let s = HybridState::product(2, 0, &named_ket("+").unwrap(), &named_ket("0").unwrap()).unwrap();
    let s = apply_step_a(&s, &measure_z_and_record(2)).unwrap();
    let before_a = s.marginal_a();
    let s = apply_step_b(&s, &flip_b_if_one(2)).unwrap();
    let rho = final_ab_state(&s);
    assert!(max_abs(&(rho - classical_mixture())) < 1e-12);
    assert!(negativity(&rho).unwrap() < 1e-12);
    assert!(trace_distance_qubit(&s.marginal_a(), &before_a) < 1e-12);
}

#[test]
fn invalid_instruments_rejected() {
    let half = Qubit::identity() * Complex::from(0.5);
    assert!(matches!(
        Instrument::new(2, vec![vec![vec![half], vec![]], vec![vec![], vec![Qubit::identity()]]]),
        Err(WitnessError::NotTracePreserving { label: 0, .. })
    ));
    assert!(matches!(Instrument::new(2, vec![vec![vec![], vec![]]]), Err(WitnessError::InstrumentShape { .. })));
    assert!(matches!(
        LocalStepB::conditional(vec![vec![Qubit::identity()], vec![Qubit::identity()]], vec![0, 2]),
        Err(WitnessError::LabelOutOfRange { .. })
    ));
    let s = HybridState::product(2, 0, &named_ket("0").unwrap(), &named_ket("0").unwrap()).unwrap();
    assert!(apply_step_a(&s, &LocalStepA::identity(3)).is_err());
}

#[test]
fn hybrid_state_validation() {
    let rho = bell_state();
    assert!(matches!(
        HybridState::new(2, vec![Branch { probability: 0.7, label: 0, rho }]),
        Err(WitnessError::ProbabilityMismatch(_))
    ));
    assert!(matches!(
        HybridState::new(2, vec![Branch { probability: 1.0, label: 2, rho }]),
        Err(WitnessError::LabelOutOfRange { .. })
    ));
}

#[test]
fn sampled_steps_are_local_and_conserve_probability() {
    let config = SearchConfig { d: 3, steps: 4, grid: 2, samples: 1, seed: 99 };
    for index in 0..50 {
        let (mut s, steps) = sampled_steps_for_tests(&config, index);
        for (i, inst) in steps.into_iter().enumerate() {
            let next = if i % 2 == 0 {
                let next = apply_step_a(&s, &LocalStepA { instrument: inst }).unwrap();
                assert!(trace_distance_qubit(&next.marginal_b(), &s.marginal_b()) < 1e-12);
                next
            } else {
                let next = apply_step_b(&s, &LocalStepB::instrument(inst)).unwrap();
                assert!(trace_distance_qubit(&next.marginal_a(), &s.marginal_a()) < 1e-12);
                next
            };
            assert!((next.total_probability() - 1.0).abs() < PROBABILITY_TOLERANCE);
            s = next;
        }
    }
}

#[test]
fn sampled_classical_outputs_are_ppt() {
    let config = SearchConfig { d: 4, steps: 4, grid: 2, samples: 1, seed: 3 };
    for rho in sample_final_states(&config, 100).unwrap() {
        assert!(negativity(&rho).unwrap() <= STRUCTURAL_TOLERANCE);
        assert!(chsh_max(&rho) <= 2.0 + 1e-8);
    }
}

#[test]
fn small_search_finds_no_entanglement() {
    let config = SearchConfig { d: 2, steps: 2, grid: 2, samples: 300, seed: 1 };
    let summary = search_classical_protocols(config).unwrap();
    assert!(summary.max_negativity <= STRUCTURAL_TOLERANCE);
    assert!(summary.max_chsh <= 2.0 + 1e-8);
    assert_eq!(summary.sampled_pipelines, 300);
    assert_eq!(summary, search_classical_protocols(config).unwrap());
    let names: Vec<&str> = summary.named.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["z_copy_conditional_flip", "mixture_t0_t1", "identity"]);
    for (_, rep) in &summary.named {
        assert!(rep.negativity <= STRUCTURAL_TOLERANCE && rep.chsh <= 2.0 + 1e-8);
    }
}

#[test]
fn search_budgets_validated() {
    let ok = SearchConfig::default();
    for bad in [
        SearchConfig { d: 1, ..ok },
        SearchConfig { d: 5, ..ok },
        SearchConfig { steps: 0, ..ok },
        SearchConfig { steps: 5, ..ok },
        SearchConfig { samples: 0, ..ok },
        SearchConfig { grid: 0, ..ok },
    ] {
        assert!(matches!(search_classical_protocols(bad), Err(WitnessError::InvalidBudget(_))));
    }
}

#[test]
fn quantum_reference_values() {
    let q = run_quantum_mediator_reference().unwrap();
    assert!((q.report.negativity - 0.5).abs() < 1e-10);
    assert!((q.report.chsh - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-10);
    let e = &q.evidence;
    assert!((e.joint_distance.unwrap() - 1.0).abs() < 1e-10);
    assert!((e.mediator_distance.unwrap() - 1.0).abs() < 1e-10);
    assert!(e.marginal_a_distance.unwrap() < 1e-12);
    assert!(e.marginal_b_distance.unwrap() < 1e-12);
    let [pp, mp] = e.correlators.unwrap();
    assert!((pp.zz - 1.0).abs() < 1e-10 && (mp.zz + 1.0).abs() < 1e-10);
    assert!((pp.xx - 1.0).abs() < 1e-10 && (mp.xx - 1.0).abs() < 1e-10);
    // The mediator's conditional states are |+⟩ and |−⟩.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (rho, sign) in q.mediator_conditionals.iter().zip([1.0, -1.0]) {
        let v = Vector2::new(Complex::from(h), Complex::from(sign * h));
        assert!(trace_distance_qubit(rho, &pure_qubit(&v)) < 1e-12);
    }
    let maximally_mixed = Qubit::identity() / Complex::from(2.0);
    assert!(trace_distance_qubit(&marginal_a(&q.outputs[0]), &maximally_mixed) < 1e-12);
}

#[test]
fn onset_of_entanglement() {
    let onset = entanglement_onset(&run_example_protocol()).unwrap();
    for (got, want) in onset.ab.iter().zip([0.0, 0.0, 0.5]) {
        assert!((got - want).abs() < 1e-10);
    }
    assert!((onset.am_t1 - 0.5).abs() < 1e-10);
}
