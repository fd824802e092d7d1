//! Acceptance suite: one test per headline claim, each printing a single
//! pass/fail line (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Tolerances are pinned in the assertions.

use std::f64::consts::PI;

use pco_core::{
    critical_coupling, is_synchronized, run, run_suite, worst_case_state, CycleTopology, Direction,
    NaturalFrequency, PrcSpec, RecordMode, SimulationConfig, TiePolicy, Verdict, WorstCase,
};

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion}: {detail}");
}

fn sim(
    n: usize,
    direction: Direction,
    l: f64,
    initial_kind: WorstCase,
    refractory: Option<(usize, f64)>,
) -> pco_core::RunOutcome {
    let initial = worst_case_state(n, l, initial_kind).expect("worst-case state");
    let mut prc = PrcSpec::new(n, TiePolicy::Advance);
    if let Some((node, r)) = refractory {
        prc = prc.with_refractory(node, r).expect("refractory");
    }
    let topo = CycleTopology::new(n, direction, l).expect("topology");
    let mut cfg =
        SimulationConfig::new(topo, prc, NaturalFrequency::standard(), initial).expect("config");
    cfg.record = RecordMode::Off;
    run(&cfg).expect("run completes")
}

#[test]
fn criterion_1_critical_coupling_values() {
    let bi8 = critical_coupling(8, Direction::Bidirectional).unwrap();
    let uni8 = critical_coupling(8, Direction::Unidirectional).unwrap();
    let uni250 = critical_coupling(250, Direction::Unidirectional).unwrap();
    let bi250 = critical_coupling(250, Direction::Bidirectional).unwrap();
    let ok = (bi8 - 0.83772).abs() <= 5e-6
        && (uni8 - 0.857143).abs() <= 5e-5
        && (uni250 - 0.99598).abs() <= 5e-6
        && (bi250 - 0.99597).abs() <= 5e-6;
    report(
        "1 (critical coupling values)",
        ok,
        &format!("bi8={bi8:.6} uni8={uni8:.6} uni250={uni250:.6} bi250={bi250:.6}"),
    );
}

#[test]
fn criterion_2_bidirectional_dichotomy() {
    let below = sim(8, Direction::Bidirectional, 0.8377, WorstCase::BiUbar, None);
    let above = sim(8, Direction::Bidirectional, 0.8378, WorstCase::BiUbar, None);
    let (above_sync, above_gap) = is_synchronized(&above.final_state, 1e-6);
    let ok = below.verdict == Verdict::ClusteredEquilibrium
        && below.rounds <= 500
        && above.verdict == Verdict::Synchronized
        && above_sync;
    report(
        "2 (bidirectional dichotomy at l* = 0.83772)",
        ok,
        &format!(
            "l=0.8377 -> {:?} (round {:?}), l=0.8378 -> {:?} (max gap {above_gap:.2e}, t_sync {:?})",
            below.verdict, below.detected_round, above.verdict, above.t_sync
        ),
    );
}

#[test]
fn criterion_3_unidirectional_dichotomy() {
    let refr = Some((0usize, PI));
    let below = sim(
        8,
        Direction::Unidirectional,
        0.857,
        WorstCase::UniU1star,
        refr,
    );
    let above = sim(
        8,
        Direction::Unidirectional,
        0.86,
        WorstCase::UniU1star,
        refr,
    );
    let ok =
        below.verdict == Verdict::ClusteredEquilibrium && above.verdict == Verdict::Synchronized;
    report(
        "3 (unidirectional dichotomy at l* = 0.857143, refractory pi on node 1)",
        ok,
        &format!(
            "l=0.857 -> {:?}, l=0.86 -> {:?} (t_sync {:?})",
            below.verdict, above.verdict, above.t_sync
        ),
    );
}

#[test]
fn criterion_4_refractory_rescue_at_full_coupling() {
    let plain = sim(
        8,
        Direction::Unidirectional,
        1.0,
        WorstCase::UniU2Uniform,
        None,
    );
    let rescued = sim(
        8,
        Direction::Unidirectional,
        1.0,
        WorstCase::UniU2Uniform,
        Some((0usize, PI)),
    );
    let exact = rescued.max_gap == 0.0;
    let ok = plain.verdict == Verdict::ClusteredEquilibrium
        && rescued.verdict == Verdict::Synchronized
        && rescued.t_sync.is_some()
        && exact;
    report(
        "4 (refractory rescue at l = 1)",
        ok,
        &format!(
            "no refractory -> {:?} (period {:?}), refractory -> {:?} at t={:?} with max gap {:.1e} (exact: {exact})",
            plain.verdict,
            plain.recurrence_period,
            rescued.verdict,
            rescued.t_sync,
            rescued.max_gap
        ),
    );
}

#[test]
fn criterion_5_solution_structure_properties() {
    let r = run_suite("proposition1", 0x5EED_0001, Some(10_000), None).unwrap();
    report(
        "5 (solution structure over 10^4 randomized runs)",
        r.passed(),
        &r.render().replace('\n', "; "),
    );
}

#[test]
fn criterion_6_semicircle_convergence() {
    let r = run_suite("lemma1", 0x5EED_0002, Some(200), None).unwrap();
    report(
        "6 (200 semicircle initial conditions all synchronize)",
        r.passed(),
        &r.render().replace('\n', "; "),
    );
}

#[test]
fn criterion_7_matrix_oracle_equivalence() {
    let r = run_suite("matrices", 0x5EED_0003, Some(1_000), None).unwrap();
    report(
        "7 (matrix oracle equivalence on 10^3 ordered states)",
        r.passed(),
        &r.render().replace('\n', "; "),
    );
}

#[test]
fn criterion_8_gamma_structure() {
    let r = run_suite("thresholds", 0x5EED_0004, None, Some(8)).unwrap();
    report(
        "8 (equilibrium gap profiles and threshold characterization)",
        r.passed(),
        &r.render().replace('\n', "; "),
    );
}

#[test]
fn criterion_9_critical_coupling_curve() {
    let mut ok = true;
    let mut prev_uni = f64::NEG_INFINITY;
    let mut prev_bi = f64::NEG_INFINITY;
    let mut last = (0.0, 0.0);
    for n in 4..=250usize {
        let uni = critical_coupling(n, Direction::Unidirectional).unwrap();
        let bi = critical_coupling(n, Direction::Bidirectional).unwrap();
        ok &= uni > prev_uni && bi > prev_bi && uni > bi;
        prev_uni = uni;
        prev_bi = bi;
        last = (uni, bi);
    }
    ok &= (last.0 - 0.99598).abs() <= 5e-6 && (last.1 - 0.99597).abs() <= 5e-6;
    report(
        "9 (critical-coupling curve 4..250)",
        ok,
        &format!(
            "monotone increasing, uni > bi pointwise, endpoints uni={:.6} bi={:.6}",
            last.0, last.1
        ),
    );
}
