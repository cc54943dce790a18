use mediator_witness::cli::cmd_check_model;
use mediator_witness::heisenberg::{run_example_protocol, System};
use mediator_witness::model_file::parse_model;
use mediator_witness::report::Status;
use mediator_witness::witness::{
    chsh_max, final_ab_state, named_pipelines, negativity, sample_final_states, search_classical_protocols,
    EntanglementReport, SearchConfig,
};

#[test]
fn final_ab_state_of_the_example_is_maximally_entangled() {
    let trace = run_example_protocol();
    let rho = trace.reduced_pair(trace.final_time(), System::A, System::B).unwrap();
    let r = EntanglementReport::of(&rho).unwrap();
    assert!((r.negativity - 0.5).abs() < 1e-12);
    assert!((r.chsh - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    // M is left unentangled with both probes.
    for other in [System::A, System::B] {
        let am = trace.reduced_pair(trace.final_time(), other, System::M).unwrap();
        assert!(negativity(&am).unwrap() < 1e-12);
    }
}

#[test]
fn named_classical_pipelines_are_separable() {
    for d in 2..=4 {
        for (name, state) in named_pipelines(d).unwrap() {
            let rho = final_ab_state(&state);
            assert!(negativity(&rho).unwrap() <= 1e-10, "{name}");
            assert!(chsh_max(&rho) <= 2.0 + 1e-8, "{name}");
        }
    }
}

#[test]
fn sampled_states_are_reproducible_and_separable() {
    let config = SearchConfig { d: 4, steps: 3, grid: 2, samples: 50, seed: 3 };
    let a = sample_final_states(&config, 50).unwrap();
    let b = sample_final_states(&config, 50).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|rho| negativity(rho).unwrap() <= 1e-10));
}

#[test]
fn one_step_search_covers_the_whole_grid() {
    let summary = search_classical_protocols(SearchConfig { d: 2, steps: 1, grid: 2, samples: 10, seed: 1 }).unwrap();
    assert_eq!(summary.effective_grid, 2);
    assert!(summary.grid_pipelines > 0);
    assert_eq!(summary.sampled_pipelines, 10);
    assert!(summary.max_negativity <= 1e-10);
}

#[test]
fn check_model_marks_blankless_variables_not_run() {
    let text = include_str!("../models/classical_bit.toml").replace("blank = \"zero\"\nexpect = { information_variable = true, distinguishable = true, observable = true, measurement = true }", "");
    let report = cmd_check_model(&parse_model(&text).unwrap());
    assert_eq!(report.entry("model.B.information_variable").unwrap().status, Status::NotRun);
    // Distinguishability only needs some information variable to map onto.
    assert_eq!(report.entry("model.B.distinguishable").unwrap().status, Status::Pass);
    assert!(report.passed());
}
