//! Building engine configurations from experiment specs and executing them.

use anyhow::{anyhow, Context, Result};
use pco_core::rng::{random_phases, semicircle_phases};
use pco_core::{
    worst_case_state, CycleTopology, NaturalFrequency, PhaseState, PrcSpec, RecordMode, RunOutcome,
    SimulationConfig, SplitMix64, Verdict, WorstCase,
};

use crate::specfile::{ExperimentSpec, InitKind};

pub fn initial_state(spec: &ExperimentSpec) -> Result<PhaseState> {
    let state = match &spec.init {
        InitKind::Ubar => worst_case_state(spec.n, spec.l, WorstCase::BiUbar)?,
        InitKind::U1star => worst_case_state(spec.n, spec.l, WorstCase::UniU1star)?,
        InitKind::U2Uniform => worst_case_state(spec.n, spec.l, WorstCase::UniU2Uniform)?,
        InitKind::Semicircle => {
            let mut rng = SplitMix64::new(spec.seed);
            PhaseState::at_origin(semicircle_phases(&mut rng, spec.n))?
        }
        InitKind::Random => {
            let mut rng = SplitMix64::new(spec.seed);
            PhaseState::at_origin(random_phases(&mut rng, spec.n))?
        }
        InitKind::Explicit(phases) => PhaseState::at_origin(phases.clone())?,
    };
    Ok(state)
}

pub fn build_config(spec: &ExperimentSpec) -> Result<SimulationConfig> {
    let topology =
        CycleTopology::new(spec.n, spec.direction, spec.l).context("invalid ring parameters")?;
    let mut prc = PrcSpec::new(spec.n, spec.tie);
    for &(node, r) in &spec.refractory {
        prc = prc
            .with_refractory(node, r)
            .with_context(|| format!("refractory on node {}", node + 1))?;
    }
    let w = NaturalFrequency::new(spec.w).context("invalid natural frequency")?;
    let initial = initial_state(spec)?;
    let mut cfg = SimulationConfig::new(topology, prc, w, initial)
        .map_err(|e| anyhow!("invalid configuration: {e}"))?;
    cfg.sync_eps = spec.eps;
    cfg.max_rounds = spec.horizon_rounds;
    cfg.max_time = spec.max_time;
    cfg.cascade_order = spec.cascade_order;
    cfg.seed = match spec.init {
        InitKind::Semicircle | InitKind::Random => Some(spec.seed),
        _ => None,
    };
    cfg.record = if spec.record_every > 0.0 {
        RecordMode::JumpsAndFlow {
            stride: spec.record_every,
        }
    } else {
        RecordMode::Jumps
    };
    cfg.validate()
        .map_err(|e| anyhow!("invalid configuration: {e}"))?;
    Ok(cfg)
}

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Synchronized => "synchronized",
        Verdict::ClusteredEquilibrium => "clustered-equilibrium",
        Verdict::HorizonExhausted => "horizon-exhausted",
    }
}

pub fn summary_line(name: &str, outcome: &RunOutcome, expected: Option<Verdict>) -> String {
    let t_sync = outcome
        .t_sync
        .map(|t| format!("{t:.6}"))
        .unwrap_or_else(|| "-".into());
    let mut line = format!(
        "{name}: verdict={} t_sync={} rounds={} jumps={} max_gap={:.3e}",
        verdict_label(outcome.verdict),
        t_sync,
        outcome.rounds,
        outcome.total_jumps,
        outcome.max_gap,
    );
    if let Some(expected) = expected {
        line.push_str(&format!(
            " expected={} match={}",
            verdict_label(expected),
            expected == outcome.verdict
        ));
    }
    line
}

/// Rebuilds a spec in file syntax; used to echo flag-only runs into outputs.
pub fn synthesize_spec_text(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", spec.name));
    out.push_str(&format!("n = {}\n", spec.n));
    out.push_str(&format!("direction = {}\n", spec.direction.label()));
    out.push_str(&format!("l = {}\n", spec.l));
    out.push_str(&format!("w = {}\n", spec.w));
    match &spec.init {
        InitKind::Explicit(phases) => {
            let joined: Vec<String> = phases.iter().map(|p| format!("{p}")).collect();
            out.push_str(&format!("phases = {}\n", joined.join(", ")));
        }
        other => out.push_str(&format!("init = {}\n", other.label())),
    }
    if !spec.refractory.is_empty() {
        let entries: Vec<String> = spec
            .refractory
            .iter()
            .map(|(node, r)| format!("{}:{}", node + 1, r))
            .collect();
        out.push_str(&format!("refractory = {}\n", entries.join(", ")));
    }
    out.push_str(&format!("tie = {}\n", spec.tie.label()));
    out.push_str(&format!("eps = {}\n", spec.eps));
    out.push_str(&format!("horizon_rounds = {}\n", spec.horizon_rounds));
    if let Some(tmax) = spec.max_time {
        out.push_str(&format!("max_time = {tmax}\n"));
    }
    out.push_str(&format!("record_every = {}\n", spec.record_every));
    out.push_str(&format!("seed = {}\n", spec.seed));
    if let Some(expected) = spec.expected_verdict {
        out.push_str(&format!("expected_verdict = {}\n", verdict_label(expected)));
    }
    out
}
