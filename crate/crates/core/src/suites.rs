//! Seeded randomized verification suites.
//!
//! Each suite hammers one family of structural claims — solution behavior,
//! semicircle convergence, cycle-length geometry, the matrix oracle, and the
//! coupling thresholds — over deterministic pseudo-random inputs and returns
//! a machine-readable pass/fail report. The `verify` CLI subcommand and the
//! acceptance tests both drive these.

use std::f64::consts::{PI, TAU};

use crate::analysis::{
    classify, distance_vector, equilibrium_gamma, transition_matrix, worst_case_state, StateClass,
    WorstCase,
};
use crate::engine::{resolve_cascade, run, CascadeOrder, RecordMode, SimulationConfig, Verdict};
use crate::model::{
    critical_coupling, solve_delta, CycleTopology, DeltaCase, Direction, NaturalFrequency,
    PhaseState, PrcSpec, TiePolicy,
};
use crate::rng::{ordered_ring_phases, random_phases, semicircle_phases, SplitMix64};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One grep-friendly line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            out.push_str(&format!(
                "{}.{}: {} ({})\n",
                self.suite, c.name, status, c.detail
            ));
        }
        out
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn coin_direction(rng: &mut SplitMix64) -> Direction {
    if rng.coin() {
        Direction::Bidirectional
    } else {
        Direction::Unidirectional
    }
}

fn coin_tie(rng: &mut SplitMix64) -> TiePolicy {
    if rng.coin() {
        TiePolicy::Advance
    } else {
        TiePolicy::Delay
    }
}

/// Randomized runs checking the structural solution guarantees: at most `n`
/// jumps per ordinary-time instant, at most one natural period between jump
/// batches, and no phase outside `[0, 2π]`. Violations are counted both via
/// the engine's hard errors and by independently auditing the recorded
/// trajectories.
pub fn proposition1(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = SplitMix64::new(seed);
    let mut run_failures = 0usize;
    let mut batch_violations = 0usize;
    let mut gap_violations = 0usize;
    let mut range_violations = 0usize;
    let mut max_batch_seen = 0usize;

    for _ in 0..trials {
        let n = 4 + rng.below(13);
        let direction = coin_direction(&mut rng);
        let l = rng.unit_positive();
        let mut prc = PrcSpec::new(n, coin_tie(&mut rng));
        if rng.below(4) == 0 {
            let node = rng.below(n);
            let r = rng.uniform(0.0, TAU);
            prc = prc.with_refractory(node, r).expect("valid refractory");
        }
        let initial = PhaseState::at_origin(random_phases(&mut rng, n)).expect("valid state");
        let topo = CycleTopology::new(n, direction, l).expect("valid topology");
        let mut cfg = SimulationConfig::new(topo, prc, NaturalFrequency::standard(), initial)
            .expect("valid config");
        cfg.record = RecordMode::Jumps;
        cfg.max_rounds = 10 + rng.below(15) as u64;

        let outcome = match run(&cfg) {
            Ok(o) => o,
            Err(_) => {
                run_failures += 1;
                continue;
            }
        };

        // independent audit of the recorded hybrid arc
        let mut batch_start: Option<f64> = None;
        let mut batch_len = 0usize;
        let mut prev_batch_t = 0.0f64;
        let bound = TAU / cfg.w.get() + 1e-9;
        for s in outcome.trajectory.samples() {
            if s.phases.iter().any(|&x| !(0.0..=TAU).contains(&x)) {
                range_violations += 1;
            }
            if s.fired.is_empty() {
                continue;
            }
            match batch_start {
                Some(t0) if t0 == s.t => batch_len += 1,
                _ => {
                    if batch_start.is_some() {
                        max_batch_seen = max_batch_seen.max(batch_len);
                    }
                    if let Some(t0) = batch_start {
                        if s.t - t0 > bound {
                            gap_violations += 1;
                        }
                    } else if s.t - prev_batch_t > bound {
                        gap_violations += 1;
                    }
                    prev_batch_t = s.t;
                    batch_start = Some(s.t);
                    batch_len = 1;
                }
            }
            if batch_len > n {
                batch_violations += 1;
            }
        }
        max_batch_seen = max_batch_seen.max(batch_len);
    }

    SuiteReport {
        suite: "proposition1",
        checks: vec![
            check(
                "runs_complete",
                run_failures == 0,
                format!("{trials} runs, {run_failures} engine failures"),
            ),
            check(
                "jumps_per_instant",
                batch_violations == 0,
                format!("{batch_violations} violations, largest batch {max_batch_seen}"),
            ),
            check(
                "inter_firing_gap",
                gap_violations == 0,
                format!("{gap_violations} batches later than one period"),
            ),
            check(
                "phase_range",
                range_violations == 0,
                format!("{range_violations} samples outside [0, 2*pi]"),
            ),
        ],
    }
}

/// Random initial conditions with phase spread below π must synchronize for
/// any coupling in (0, 1], either orientation, and a single refractory
/// period of length at most π.
pub fn lemma1(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = SplitMix64::new(seed);
    let mut failures = Vec::new();
    let mut min_l = f64::INFINITY;
    let mut max_rounds_used = 0u64;

    for trial in 0..trials {
        let n = 4 + rng.below(13);
        let direction = coin_direction(&mut rng);
        let l = rng.unit_positive();
        min_l = min_l.min(l);
        let node = rng.below(n);
        let r = rng.uniform(0.0, PI);
        let prc = PrcSpec::new(n, coin_tie(&mut rng))
            .with_refractory(node, r)
            .expect("r <= pi is valid");
        let initial = PhaseState::at_origin(semicircle_phases(&mut rng, n)).expect("valid state");
        let topo = CycleTopology::new(n, direction, l).expect("valid topology");
        let mut cfg = SimulationConfig::new(topo, prc, NaturalFrequency::standard(), initial)
            .expect("valid config");
        cfg.record = RecordMode::Off;
        // convergence is geometric in l per round; budget generously
        cfg.max_rounds = ((1500.0 / l).ceil() as u64 + 500).min(20_000_000);

        match run(&cfg) {
            Ok(o) if o.verdict == Verdict::Synchronized => {
                max_rounds_used = max_rounds_used.max(o.rounds);
            }
            Ok(o) => failures.push(format!(
                "trial {trial}: {:?} after {} rounds",
                o.verdict, o.rounds
            )),
            Err(e) => failures.push(format!("trial {trial}: engine error {e}")),
        }
    }

    SuiteReport {
        suite: "lemma1",
        checks: vec![check(
            "semicircle_synchronizes",
            failures.is_empty(),
            if failures.is_empty() {
                format!(
                    "{trials} trials synchronized; min l {min_l:.5}, max rounds {max_rounds_used}"
                )
            } else {
                failures.join("; ")
            },
        )],
    }
}

fn clustered_phases(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    let width = rng.uniform(0.05, 1.9 * PI);
    let base = rng.uniform(0.0, TAU - width.min(TAU - 1e-9));
    (0..n).map(|_| base + rng.uniform(0.0, width)).collect()
}

/// Geometry of the distance vector: the short-length witness claim, the
/// extremal-gap structure of the ordered length-2π states, classifier
/// consistency, and monotone cycle length across jump batches.
pub fn lemma2(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = SplitMix64::new(seed);

    // (a) if the cycle length is below 2π, some non-extremal raw gap exceeds
    // π or the extremal raw spread is below π
    let mut witness_failures = 0usize;
    let mut sampled_below = 0usize;
    let mut attempts = 0usize;
    while sampled_below < trials && attempts < trials * 200 {
        attempts += 1;
        let n = 4 + rng.below(9);
        let phases = if rng.coin() {
            random_phases(&mut rng, n)
        } else {
            clustered_phases(&mut rng, n)
        };
        let state = PhaseState::at_origin(phases).expect("valid state");
        let v = distance_vector(&state);
        if v.cycle_length() >= TAU - 1e-9 {
            continue;
        }
        sampled_below += 1;
        let x = state.phases();
        let i_max = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let i_min = x
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let spread_small = (x[i_max] - x[i_min]).abs() < PI;
        let big_interior_gap =
            (0..n).any(|i| i != i_max && i != i_min && (x[i] - x[(i + 1) % n]).abs() > PI);
        if !(spread_small || big_interior_gap) {
            witness_failures += 1;
        }
    }

    // (d) ordered length-2π states: extremal neighbors at raw distance >= π,
    // all other raw gaps <= π, and the classifier places them in the set
    let mut ordered_failures = 0usize;
    for _ in 0..trials {
        let n = 4 + rng.below(9);
        let state = PhaseState::at_origin(ordered_ring_phases(&mut rng, n)).expect("valid state");
        let x = state.phases();
        let tag = classify(&state);
        let in_set = matches!(tag, StateClass::InU1 { .. } | StateClass::InU2 { .. });
        let spread_ok = (x[0] - x[n - 1]).abs() >= PI - 1e-9;
        let gaps_ok = (1..n - 1).all(|i| (x[i] - x[(i + 1) % n]).abs() <= PI + 1e-9);
        if !(in_set && spread_ok && gaps_ok) {
            ordered_failures += 1;
        }
    }

    // classifier consistency on arbitrary states
    let mut classify_failures = 0usize;
    for _ in 0..trials {
        let n = 4 + rng.below(13);
        let state = PhaseState::at_origin(random_phases(&mut rng, n)).expect("valid state");
        let length = distance_vector(&state).cycle_length();
        let consistent = match classify(&state) {
            StateClass::LengthBelow2Pi { length: l2 } => l2 < TAU && (l2 - length).abs() < 1e-12,
            StateClass::LengthAbove2Pi { length: l2 } => l2 > TAU && (l2 - length).abs() < 1e-12,
            StateClass::At2PiOutsideU { .. }
            | StateClass::InU1 { .. }
            | StateClass::InU2 { .. } => (length - TAU).abs() <= 1e-9,
        };
        if !consistent {
            classify_failures += 1;
        }
    }

    // cycle length never increases across a jump batch
    let mut monotone_failures = 0usize;
    for _ in 0..trials {
        let n = 4 + rng.below(13);
        let mut phases = random_phases(&mut rng, n);
        phases[rng.below(n)] = TAU;
        let state = PhaseState::at_origin(phases).expect("valid state");
        let direction = coin_direction(&mut rng);
        let l = rng.unit_positive();
        let mut prc = PrcSpec::new(n, coin_tie(&mut rng));
        if rng.coin() {
            prc = prc
                .with_refractory(rng.below(n), rng.uniform(0.0, PI))
                .expect("valid refractory");
        }
        let topo = CycleTopology::new(n, direction, l).expect("valid topology");
        let before = distance_vector(&state).cycle_length();
        let steps = resolve_cascade(&state, &topo, &prc, CascadeOrder::Ascending)
            .expect("cascade resolves");
        let after = distance_vector(&steps.last().unwrap().state).cycle_length();
        if after > before + 1e-9 {
            monotone_failures += 1;
        }
    }

    SuiteReport {
        suite: "lemma2",
        checks: vec![
            check(
                "short_length_witness",
                witness_failures == 0 && sampled_below == trials,
                format!("{sampled_below} short states, {witness_failures} without a witness"),
            ),
            check(
                "ordered_state_gaps",
                ordered_failures == 0,
                format!("{trials} ordered states, {ordered_failures} violating the gap structure"),
            ),
            check(
                "classifier_consistent",
                classify_failures == 0,
                format!("{trials} states, {classify_failures} inconsistent classifications"),
            ),
            check(
                "length_nonincreasing",
                monotone_failures == 0,
                format!("{trials} cascades, {monotone_failures} length increases"),
            ),
        ],
    }
}

/// The matrix oracle: on ordered states meeting the gap conditions, one
/// firing advances the distance vector exactly as the transition matrix
/// predicts, and every transition matrix is column stochastic.
pub fn matrices(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = SplitMix64::new(seed);

    let mut worst_err = 0.0f64;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < trials && attempts < trials * 500 {
        attempts += 1;
        let n = 4 + rng.below(9);
        let l = rng.uniform(0.05, 1.0);
        let direction = coin_direction(&mut rng);
        let phases = ordered_ring_phases(&mut rng, n);
        let state = PhaseState::at_origin(phases).expect("valid state");
        let v = distance_vector(&state);
        let c = v.components();
        // firing node 0 must keep its neighbors' gaps short of π
        if c[1] + l * c[0] >= PI - 1e-9 {
            continue;
        }
        if direction == Direction::Bidirectional && c[n - 2] + l * c[n - 1] >= PI - 1e-9 {
            continue;
        }
        accepted += 1;
        let topo = CycleTopology::new(n, direction, l).expect("valid topology");
        let prc = PrcSpec::new(n, TiePolicy::Advance);
        let jumped = crate::model::apply_jump(&state, 0, &topo, &prc).expect("node 0 fires");
        let via_state = distance_vector(&jumped);
        let via_matrix = transition_matrix(0, n, l, direction)
            .expect("valid matrix")
            .apply(c);
        for (a, b) in via_state.components().iter().zip(via_matrix) {
            worst_err = worst_err.max((a - b).abs());
        }
    }

    let mut worst_col_err = 0.0f64;
    for _ in 0..trials {
        let n = 4 + rng.below(13);
        let l = rng.unit_positive();
        let firing = rng.below(n);
        let direction = coin_direction(&mut rng);
        let m = transition_matrix(firing, n, l, direction).expect("valid matrix");
        for s in m.column_sums() {
            worst_col_err = worst_col_err.max((s - 1.0).abs());
        }
    }

    SuiteReport {
        suite: "matrices",
        checks: vec![
            check(
                "oracle_equivalence",
                accepted == trials && worst_err < 1e-12,
                format!("{accepted} states, worst deviation {worst_err:.3e}"),
            ),
            check(
                "column_stochastic",
                worst_col_err < 1e-14,
                format!("{trials} matrices, worst column-sum error {worst_col_err:.3e}"),
            ),
        ],
    }
}

fn bisect_boundary<F: FnMut(f64) -> bool>(mut lo: f64, mut hi: f64, mut synced: F) -> (f64, f64) {
    debug_assert!(!synced(lo) && synced(hi));
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if synced(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Threshold behavior: the equilibrium gap profile matches the closed-form
/// base gap across a grid around the critical coupling, its largest entry
/// crosses 1/2 exactly at the threshold, and simulated bisection from the
/// worst-case states lands on the predicted critical couplings.
pub fn thresholds(_seed: u64, n_bisect: usize) -> SuiteReport {
    let mut gamma_failures = Vec::new();
    let mut char_failures = Vec::new();
    let mut points = 0usize;

    for n in [4usize, 8, 16] {
        for direction in [Direction::Bidirectional, Direction::Unidirectional] {
            let ls = critical_coupling(n, direction).expect("n >= 4");
            for offset in [-0.1, -0.01, 0.01, 0.1] {
                let l = ls + offset;
                if !(l > 0.0 && l < 1.0) {
                    continue;
                }
                points += 1;
                let order: Vec<usize> = (0..n).collect();
                let gamma = match equilibrium_gamma(n, l, direction, &order) {
                    Ok(g) => g,
                    Err(e) => {
                        gamma_failures.push(format!("n={n} l={l:.4} {direction:?}: {e}"));
                        continue;
                    }
                };
                let (case, mut expect) = match direction {
                    Direction::Bidirectional => {
                        let d = solve_delta(n, l, DeltaCase::BiWorst).expect("valid");
                        let mut e = vec![d; n];
                        e[0] = (1.0 - l) * d;
                        e[n - 1] = d / (1.0 - l);
                        (DeltaCase::BiWorst, e)
                    }
                    Direction::Unidirectional => {
                        let d = solve_delta(n, l, DeltaCase::UniWorstU1).expect("valid");
                        let mut e = vec![d; n];
                        e[n - 1] = d / (1.0 - l);
                        (DeltaCase::UniWorstU1, e)
                    }
                };
                expect.sort_by(f64::total_cmp);
                let mut got = gamma.clone();
                got.sort_by(f64::total_cmp);
                let err = got
                    .iter()
                    .zip(&expect)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if err >= 1e-9 {
                    gamma_failures
                        .push(format!("n={n} l={l:.4} {case:?}: profile error {err:.2e}"));
                }
                let max_gamma = got.last().copied().unwrap();
                if (max_gamma > 0.5) != (l > ls) {
                    char_failures.push(format!(
                        "n={n} l={l:.4} {direction:?}: max gamma {max_gamma:.6} vs l*={ls:.6}"
                    ));
                }
            }
        }
    }

    let run_from = |which: WorstCase, direction: Direction, refractory: bool| {
        move |l: f64| {
            let initial = worst_case_state(n_bisect, l, which).expect("valid state");
            let mut prc = PrcSpec::new(n_bisect, TiePolicy::Advance);
            if refractory {
                prc = prc.with_refractory(0, PI).expect("valid refractory");
            }
            let topo = CycleTopology::new(n_bisect, direction, l).expect("valid topology");
            let mut cfg = SimulationConfig::new(topo, prc, NaturalFrequency::standard(), initial)
                .expect("valid config");
            cfg.record = RecordMode::Off;
            run(&cfg)
                .map(|o| o.verdict == Verdict::Synchronized)
                .unwrap_or(false)
        }
    };

    let bi_star = critical_coupling(n_bisect, Direction::Bidirectional).expect("n >= 4");
    let (lo, hi) = bisect_boundary(
        (bi_star - 0.05).max(0.01),
        (bi_star + 0.05).min(0.99),
        run_from(WorstCase::BiUbar, Direction::Bidirectional, false),
    );
    let bi_ok = lo <= bi_star && bi_star <= hi && hi - lo < 1e-5;
    let bi_detail = format!("boundary in [{lo:.7}, {hi:.7}], predicted {bi_star:.7}");

    let uni_star = critical_coupling(n_bisect, Direction::Unidirectional).expect("n >= 4");
    let (lo, hi) = bisect_boundary(
        (uni_star - 0.05).max(0.01),
        (uni_star + 0.05).min(0.999),
        run_from(WorstCase::UniU1star, Direction::Unidirectional, true),
    );
    let uni_ok = lo <= uni_star && uni_star <= hi && hi - lo < 1e-5;
    let uni_detail = format!("boundary in [{lo:.7}, {hi:.7}], predicted {uni_star:.7}");

    SuiteReport {
        suite: "thresholds",
        checks: vec![
            check(
                "gamma_profiles",
                gamma_failures.is_empty(),
                if gamma_failures.is_empty() {
                    format!("{points} grid points match the closed-form profile")
                } else {
                    gamma_failures.join("; ")
                },
            ),
            check(
                "max_gamma_characterization",
                char_failures.is_empty(),
                if char_failures.is_empty() {
                    format!("max gamma > 1/2 iff l > l* at all {points} grid points")
                } else {
                    char_failures.join("; ")
                },
            ),
            check("bisection_bi", bi_ok, bi_detail),
            check("bisection_uni_refractory", uni_ok, uni_detail),
        ],
    }
}

/// Convenience: all suite names understood by [`run_suite`].
pub const SUITE_NAMES: [&str; 5] = ["proposition1", "lemma1", "lemma2", "matrices", "thresholds"];

/// Runs a suite by name with its customary trial count (overridable).
pub fn run_suite(
    name: &str,
    seed: u64,
    trials: Option<usize>,
    n: Option<usize>,
) -> Option<SuiteReport> {
    match name {
        "proposition1" => Some(proposition1(seed, trials.unwrap_or(10_000))),
        "lemma1" => Some(lemma1(seed, trials.unwrap_or(200))),
        "lemma2" => Some(lemma2(seed, trials.unwrap_or(500))),
        "matrices" => Some(matrices(seed, trials.unwrap_or(1_000))),
        "thresholds" => Some(thresholds(seed, n.unwrap_or(8))),
        _ => None,
    }
}
