//! Exact event-driven simulation of the pulse-coupled ring.
//!
//! Flows are analytic (constant phase velocity, so the next firing time is
//! computed in closed form), firings and their cascades resolve at a fixed
//! ordinary time, and the run loop alternates the two while watching for
//! synchronization, clustered equilibria, and the horizon.
//!
//! Runtime assertions mirror the structural guarantees of the model: no more
//! than `n` jumps share an ordinary-time instant, consecutive jump batches
//! are at most one natural period apart, and no phase ever leaves `[0, 2π]`.
//! A violated guarantee is a hard error.

use serde::Serialize;
use std::f64::consts::TAU;
use std::io::Write;
use thiserror::Error;

use crate::analysis::distance_vector;
use crate::model::{
    apply_jump, CycleTopology, ModelError, NaturalFrequency, PhaseState, PrcSpec, FIRING_TOL,
};

/// Default max-gap tolerance below which a state counts as synchronized.
pub const DEFAULT_SYNC_EPS: f64 = 1e-6;

/// Default simulation horizon, in full firing rounds (`n` jumps each).
pub const DEFAULT_HORIZON_ROUNDS: u64 = 500;

/// Componentwise tolerance for recognizing a repeated distance vector at a
/// round boundary.
const ROUND_MATCH_TOL: f64 = 1e-9;

/// How many recent round-boundary distance vectors are kept for recurrence
/// detection. Clustered orbits rotate with short periods, so a small window
/// suffices; anything longer runs into the horizon instead.
const RECURRENCE_WINDOW: usize = 256;

/// Slack allowed past 2π after a flow step before it is treated as a
/// scheduling bug.
const FLOW_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("node {node} is already at the firing threshold")]
    AlreadyAtThreshold { node: usize },
    #[error("no node is at the firing threshold")]
    NoNodeAtThreshold,
    #[error("flow pushed node {node} past 2*pi (phase {phase})")]
    FlowOvershoot { node: usize, phase: f64 },
    #[error("negative flow duration {0}")]
    NegativeFlow(f64),
    #[error("cascade exceeded {n} jumps at a single instant")]
    CascadeOverrun { n: usize },
    #[error("ordinary time between jump batches was {gap}, above the bound {bound}")]
    InterFiringGapExceeded { gap: f64, bound: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trajectory export supports at most 128 nodes, got {0}")]
    MaskTooWide(usize),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl EngineError {
    /// True for errors that signal a broken structural guarantee of the
    /// dynamics rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            EngineError::FlowOvershoot { .. }
                | EngineError::CascadeOverrun { .. }
                | EngineError::InterFiringGapExceeded { .. }
        )
    }
}

/// Order in which simultaneous firings are processed within a cascade batch.
/// The jump map is set-valued over this choice; fixing it makes runs
/// reproducible, and flipping it probes the non-uniqueness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CascadeOrder {
    Ascending,
    Descending,
}

/// What the trajectory records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RecordMode {
    /// No samples at all (fastest; used by the randomized suites).
    Off,
    /// The initial state, every individual jump, and the final state.
    Jumps,
    /// Jumps plus flow samples on a fixed time stride.
    JumpsAndFlow { stride: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationConfig {
    pub topology: CycleTopology,
    pub prc: PrcSpec,
    pub w: NaturalFrequency,
    pub initial: PhaseState,
    /// Max-gap tolerance for declaring synchronization.
    pub sync_eps: f64,
    /// Horizon in full firing rounds.
    pub max_rounds: u64,
    /// Optional horizon in ordinary time.
    pub max_time: Option<f64>,
    pub record: RecordMode,
    pub cascade_order: CascadeOrder,
    /// Provenance only: the seed that generated `initial`, if any.
    pub seed: Option<u64>,
}

impl SimulationConfig {
    pub fn new(
        topology: CycleTopology,
        prc: PrcSpec,
        w: NaturalFrequency,
        initial: PhaseState,
    ) -> Result<Self, EngineError> {
        let cfg = Self {
            topology,
            prc,
            w,
            initial,
            sync_eps: DEFAULT_SYNC_EPS,
            max_rounds: DEFAULT_HORIZON_ROUNDS,
            max_time: None,
            record: RecordMode::Jumps,
            cascade_order: CascadeOrder::Ascending,
            seed: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let n = self.topology.n();
        if self.initial.n() != n {
            return Err(EngineError::InvalidConfig(format!(
                "initial state has {} phases for a ring of {n} nodes",
                self.initial.n()
            )));
        }
        if self.prc.n() != n {
            return Err(EngineError::InvalidConfig(format!(
                "response curve covers {} nodes for a ring of {n}",
                self.prc.n()
            )));
        }
        if self.sync_eps <= 0.0 || self.sync_eps.is_nan() {
            return Err(EngineError::InvalidConfig(format!(
                "sync tolerance {} must be positive",
                self.sync_eps
            )));
        }
        if self.max_rounds == 0 && self.max_time.is_none() {
            return Err(EngineError::InvalidConfig(
                "horizon must allow at least one round or set a max time".into(),
            ));
        }
        if let RecordMode::JumpsAndFlow { stride } = self.record {
            if stride <= 0.0 || stride.is_nan() {
                return Err(EngineError::InvalidConfig(format!(
                    "flow sampling stride {stride} must be positive"
                )));
            }
        }
        if let Some(tmax) = self.max_time {
            if tmax <= 0.0 || tmax.is_nan() {
                return Err(EngineError::InvalidConfig(format!(
                    "max time {tmax} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// One recorded point of a run: hybrid time, phases, and the nodes that fired
/// at this record (empty for flow samples).
#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub j: u64,
    pub phases: Vec<f64>,
    pub fired: Vec<usize>,
}

/// Ordered record of a run over its hybrid time domain, together with the
/// configuration that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct HybridTrajectory {
    config: SimulationConfig,
    samples: Vec<TrajectorySample>,
}

impl HybridTrajectory {
    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    /// Writes the run as CSV: `t,j,x_1,...,x_N,fired_mask`, floats at 17
    /// significant digits, `fired_mask` the decimal value of the bitset with
    /// bit `i-1` set when node `i` fired at the record (0 for flow samples).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<(), EngineError> {
        let n = self.config.topology.n();
        if n > 128 {
            return Err(EngineError::MaskTooWide(n));
        }
        write!(out, "t,j")?;
        for i in 1..=n {
            write!(out, ",x_{i}")?;
        }
        writeln!(out, ",fired_mask")?;
        for s in &self.samples {
            write!(out, "{:.16e},{}", s.t, s.j)?;
            for &x in &s.phases {
                write!(out, ",{x:.16e}")?;
            }
            let mut mask: u128 = 0;
            for &f in &s.fired {
                mask |= 1u128 << f;
            }
            writeln!(out, ",{mask}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, EngineError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Every adjacent gap fell below the sync tolerance.
    Synchronized,
    /// The round map on the distance vector revisited an earlier value at
    /// cycle length 2π: a fixed clustered configuration (or a rotating orbit
    /// of one).
    ClusteredEquilibrium,
    HorizonExhausted,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub verdict: Verdict,
    /// First ordinary time at which the max gap dropped below the tolerance.
    pub t_sync: Option<f64>,
    pub final_state: PhaseState,
    pub trajectory: HybridTrajectory,
    /// Full firing rounds completed.
    pub rounds: u64,
    pub total_jumps: u64,
    /// Round at which the clustered recurrence was detected.
    pub detected_round: Option<u64>,
    /// Rounds between the matching boundaries of the recurrence.
    pub recurrence_period: Option<u64>,
    /// Max gap of the final state.
    pub max_gap: f64,
}

#[derive(Serialize)]
struct OutcomeRecord<'a> {
    verdict: Verdict,
    t_sync: Option<f64>,
    final_t: f64,
    final_j: u64,
    final_phases: &'a [f64],
    max_gap: f64,
    rounds: u64,
    total_jumps: u64,
    detected_round: Option<u64>,
    recurrence_period: Option<u64>,
    config: &'a SimulationConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec_echo: Option<&'a str>,
}

impl RunOutcome {
    pub fn config(&self) -> &SimulationConfig {
        self.trajectory.config()
    }

    /// Structured JSON record of the outcome (verdict, sync time, final
    /// phases, config echo); the trajectory itself stays in the CSV export.
    pub fn to_json(&self, spec_echo: Option<&str>) -> String {
        let record = OutcomeRecord {
            verdict: self.verdict,
            t_sync: self.t_sync,
            final_t: self.final_state.t(),
            final_j: self.final_state.j(),
            final_phases: self.final_state.phases(),
            max_gap: self.max_gap,
            rounds: self.rounds,
            total_jumps: self.total_jumps,
            detected_round: self.detected_round,
            recurrence_period: self.recurrence_period,
            config: self.config(),
            spec_echo,
        };
        serde_json::to_string_pretty(&record).expect("outcome serializes")
    }
}

/// Exact ordinary time until the first firing: `(2π − max phase)/w`.
/// Defined only while no node is at the threshold; always in `(0, 2π/w]`.
pub fn next_fire_time(state: &PhaseState, w: NaturalFrequency) -> Result<f64, EngineError> {
    let (node, max) = state.max_phase();
    if TAU - max <= FIRING_TOL {
        return Err(EngineError::AlreadyAtThreshold { node });
    }
    Ok((TAU - max) / w.get())
}

/// Advances every phase by `w·dt` and ordinary time by `dt`; the jump counter
/// and all pairwise distances are unchanged. Overshooting 2π beyond the
/// firing tolerance is a scheduling bug and errors out.
pub fn flow(state: &PhaseState, dt: f64, w: NaturalFrequency) -> Result<PhaseState, EngineError> {
    if dt < 0.0 {
        return Err(EngineError::NegativeFlow(dt));
    }
    let step = w.get() * dt;
    let mut phases = Vec::with_capacity(state.n());
    for (node, &x) in state.phases().iter().enumerate() {
        let y = x + step;
        if y > TAU + FLOW_TOL {
            return Err(EngineError::FlowOvershoot { node, phase: y });
        }
        phases.push(y.min(TAU));
    }
    Ok(PhaseState::new_unchecked(phases, state.t() + dt, state.j()))
}

/// One jump of a cascade: the node that fired and the state right after.
#[derive(Clone, Debug)]
pub struct CascadeStep {
    pub fired: usize,
    pub state: PhaseState,
}

/// Fires every node at the threshold, in index order per `order`, repeating
/// until no node remains at 2π — nodes driven to exactly 2π by a pulse join
/// the same cascade. At most `n` jumps can occur; exceeding that is an
/// invariant violation.
pub fn resolve_cascade(
    state: &PhaseState,
    topology: &CycleTopology,
    prc: &PrcSpec,
    order: CascadeOrder,
) -> Result<Vec<CascadeStep>, EngineError> {
    let n = state.n();
    let mut steps: Vec<CascadeStep> = Vec::new();
    let mut current = state.clone();
    loop {
        let mut batch = current.nodes_at_threshold();
        if batch.is_empty() {
            if steps.is_empty() {
                return Err(EngineError::NoNodeAtThreshold);
            }
            return Ok(steps);
        }
        if order == CascadeOrder::Descending {
            batch.reverse();
        }
        for node in batch {
            if steps.len() == n {
                return Err(EngineError::CascadeOverrun { n });
            }
            current = apply_jump(&current, node, topology, prc)?;
            steps.push(CascadeStep {
                fired: node,
                state: current.clone(),
            });
        }
    }
}

struct Recorder {
    mode: RecordMode,
    samples: Vec<TrajectorySample>,
    next_flow_sample: f64,
}

impl Recorder {
    fn new(mode: RecordMode, initial: &PhaseState) -> Self {
        let mut rec = Self {
            mode,
            samples: Vec::new(),
            next_flow_sample: 0.0,
        };
        if let RecordMode::JumpsAndFlow { stride } = mode {
            rec.next_flow_sample = initial.t() + stride;
        }
        if !matches!(mode, RecordMode::Off) {
            rec.samples.push(TrajectorySample {
                t: initial.t(),
                j: initial.j(),
                phases: initial.phases().to_vec(),
                fired: Vec::new(),
            });
        }
        rec
    }

    fn jump(&mut self, step: &CascadeStep) {
        if matches!(self.mode, RecordMode::Off) {
            return;
        }
        self.samples.push(TrajectorySample {
            t: step.state.t(),
            j: step.state.j(),
            phases: step.state.phases().to_vec(),
            fired: vec![step.fired],
        });
    }

    /// Emits flow samples covering the open interval before `state` flows by
    /// `dt`; intermediate phases are reconstructed analytically.
    fn flow(&mut self, state: &PhaseState, dt: f64, w: NaturalFrequency) {
        let RecordMode::JumpsAndFlow { stride } = self.mode else {
            return;
        };
        let end = state.t() + dt;
        while self.next_flow_sample < end {
            let ts = self.next_flow_sample;
            let step = w.get() * (ts - state.t());
            let phases: Vec<f64> = state.phases().iter().map(|x| (x + step).min(TAU)).collect();
            self.samples.push(TrajectorySample {
                t: ts,
                j: state.j(),
                phases,
                fired: Vec::new(),
            });
            self.next_flow_sample = ts + stride;
        }
    }

    fn finish(&mut self, state: &PhaseState) {
        if matches!(self.mode, RecordMode::Off) {
            return;
        }
        let duplicate = self
            .samples
            .last()
            .map(|s| s.t == state.t() && s.j == state.j())
            .unwrap_or(false);
        if !duplicate {
            self.samples.push(TrajectorySample {
                t: state.t(),
                j: state.j(),
                phases: state.phases().to_vec(),
                fired: Vec::new(),
            });
        }
    }
}

/// Runs the hybrid system to one of the three verdicts.
///
/// The loop alternates analytic flow with cascade resolution. After every
/// cascade the distance vector is checked against the sync tolerance; at
/// every full-round boundary (`n` jumps) it is checked, when the cycle
/// length equals 2π, against recent boundaries for a recurrence, which is
/// what a clustered (TDMA-like) configuration produces — either as an exact
/// fixed point or as a short rotating orbit.
pub fn run(config: &SimulationConfig) -> Result<RunOutcome, EngineError> {
    config.validate()?;
    let n = config.topology.n();
    let w = config.w;
    let period_bound = TAU / w.get() + FLOW_TOL;

    let mut state = config.initial.clone();
    let mut recorder = Recorder::new(config.record, &state);

    let mut t_sync: Option<f64> = None;
    let mut verdict: Option<Verdict> = None;
    let mut rounds: u64 = 0;
    let mut total_jumps: u64 = 0;
    let mut next_boundary: u64 = n as u64;
    let mut detected_round = None;
    let mut recurrence_period = None;
    let mut last_batch_t = state.t();

    // round-boundary history: (round index, components, cycle length)
    let mut history: Vec<(u64, Vec<f64>, f64)> = Vec::new();
    {
        let v = distance_vector(&state);
        if v.max_component() < config.sync_eps {
            t_sync = Some(state.t());
            verdict = Some(Verdict::Synchronized);
        }
        history.push((0, v.components().to_vec(), v.cycle_length()));
    }

    while verdict.is_none() {
        if !state.nodes_at_threshold().is_empty() {
            let gap = state.t() - last_batch_t;
            if gap > period_bound {
                return Err(EngineError::InterFiringGapExceeded {
                    gap,
                    bound: TAU / w.get(),
                });
            }
            last_batch_t = state.t();

            let steps =
                resolve_cascade(&state, &config.topology, &config.prc, config.cascade_order)?;
            for step in &steps {
                recorder.jump(step);
            }
            total_jumps += steps.len() as u64;
            state = steps.into_iter().last().expect("cascade fired").state;

            let v = distance_vector(&state);
            if v.max_component() < config.sync_eps {
                t_sync = Some(state.t());
                verdict = Some(Verdict::Synchronized);
                break;
            }
            if total_jumps >= next_boundary {
                rounds += 1;
                next_boundary += n as u64;
                let length = v.cycle_length();
                if (length - TAU).abs() <= ROUND_MATCH_TOL {
                    let matched = history.iter().rev().find(|(_, comps, hlen)| {
                        (hlen - length).abs() <= ROUND_MATCH_TOL
                            && comps
                                .iter()
                                .zip(v.components())
                                .all(|(a, b)| (a - b).abs() <= ROUND_MATCH_TOL)
                    });
                    if let Some((round0, _, _)) = matched {
                        detected_round = Some(rounds);
                        recurrence_period = Some(rounds - round0);
                        verdict = Some(Verdict::ClusteredEquilibrium);
                        break;
                    }
                }
                history.push((rounds, v.components().to_vec(), length));
                if history.len() > RECURRENCE_WINDOW {
                    let drop = history.len() - RECURRENCE_WINDOW;
                    history.drain(..drop);
                }
                if rounds >= config.max_rounds {
                    verdict = Some(Verdict::HorizonExhausted);
                    break;
                }
            }
        } else {
            let dt = next_fire_time(&state, w)?;
            debug_assert!(dt <= period_bound);
            if let Some(tmax) = config.max_time {
                if state.t() + dt > tmax {
                    let rest = tmax - state.t();
                    if rest > 0.0 {
                        recorder.flow(&state, rest, w);
                        state = flow(&state, rest, w)?;
                    }
                    verdict = Some(Verdict::HorizonExhausted);
                    break;
                }
            }
            recorder.flow(&state, dt, w);
            state = flow(&state, dt, w)?;
        }
    }

    recorder.finish(&state);
    let max_gap = distance_vector(&state).max_component();
    Ok(RunOutcome {
        verdict: verdict.expect("loop exits with a verdict"),
        t_sync,
        final_state: state,
        trajectory: HybridTrajectory {
            config: config.clone(),
            samples: recorder.samples,
        },
        rounds,
        total_jumps,
        detected_round,
        recurrence_period,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{worst_case_state, WorstCase};
    use crate::model::{Direction, TiePolicy};
    use std::f64::consts::PI;

    const EPS: f64 = 1e-12;

    fn w_std() -> NaturalFrequency {
        NaturalFrequency::standard()
    }

    #[test]
    fn fire_time_full_period() {
        let s = PhaseState::at_origin(vec![0.0; 4]).unwrap();
        assert!((next_fire_time(&s, w_std()).unwrap() - 1.0).abs() < EPS);
    }

    #[test]
    fn fire_time_half_period() {
        let s = PhaseState::at_origin(vec![0.0, PI, 0.1, 0.2]).unwrap();
        assert!((next_fire_time(&s, w_std()).unwrap() - 0.5).abs() < EPS);
    }

    #[test]
    fn fire_time_near_boundary() {
        // just outside the firing tolerance: a tiny positive time remains
        let s = PhaseState::at_origin(vec![0.0, TAU - 2e-9, 0.1, 0.2]).unwrap();
        let dt = next_fire_time(&s, w_std()).unwrap();
        assert!(dt > 0.0 && dt < 1e-9);

        // inside the tolerance counts as already firing
        for phase in [TAU, TAU - 1e-12] {
            let s = PhaseState::at_origin(vec![0.0, phase, 0.1, 0.2]).unwrap();
            assert!(matches!(
                next_fire_time(&s, w_std()),
                Err(EngineError::AlreadyAtThreshold { node: 1 })
            ));
        }
    }

    #[test]
    fn flow_is_linear_and_identity_at_zero() {
        let s = PhaseState::at_origin(vec![0.0, PI, 0.1, 0.2]).unwrap();
        let moved = flow(&s, 0.5, w_std()).unwrap();
        assert!((moved.phases()[0] - PI).abs() < EPS);
        assert!((moved.phases()[1] - TAU).abs() < EPS);
        assert!((moved.t() - 0.5).abs() < EPS);
        assert_eq!(moved.j(), 0);

        let same = flow(&s, 0.0, w_std()).unwrap();
        assert_eq!(same.phases(), s.phases());
    }

    #[test]
    fn flow_preserves_distances() {
        let s = PhaseState::at_origin(vec![0.3, 2.5, 4.0, 5.1]).unwrap();
        let v0 = distance_vector(&s);
        let moved = flow(&s, 0.15, w_std()).unwrap();
        let v1 = distance_vector(&moved);
        for (a, b) in v0.components().iter().zip(v1.components()) {
            assert!((a - b).abs() < EPS);
        }
    }

    #[test]
    fn flow_rejects_overshoot() {
        let s = PhaseState::at_origin(vec![0.0, 6.0, 0.1, 0.2]).unwrap();
        assert!(matches!(
            flow(&s, 1.0, w_std()),
            Err(EngineError::FlowOvershoot { node: 1, .. })
        ));
    }

    #[test]
    fn cascade_single_firing() {
        let topo = CycleTopology::new(4, Direction::Unidirectional, 0.5).unwrap();
        let prc = PrcSpec::new(4, TiePolicy::Advance);
        let s = PhaseState::at_origin(vec![TAU, 1.0, 2.0, 3.0]).unwrap();
        let steps = resolve_cascade(&s, &topo, &prc, CascadeOrder::Ascending).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].fired, 0);
        assert_eq!(steps[0].state.j(), 1);
    }

    #[test]
    fn cascade_absorption_chain() {
        let topo = CycleTopology::new(4, Direction::Unidirectional, 1.0).unwrap();
        let prc = PrcSpec::new(4, TiePolicy::Advance);
        let s = PhaseState::at_origin(vec![TAU, 3.0 * PI / 2.0, 3.0 * PI / 2.0, 1.0]).unwrap();
        let steps = resolve_cascade(&s, &topo, &prc, CascadeOrder::Ascending).unwrap();
        assert_eq!(
            steps.iter().map(|s| s.fired).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        let last = &steps.last().unwrap().state;
        for &x in last.phases() {
            assert!(x.abs() < EPS, "phases collapse: {:?}", last.phases());
        }
        assert_eq!(last.j(), 3);
    }

    #[test]
    fn cascade_all_at_threshold() {
        let topo = CycleTopology::new(5, Direction::Bidirectional, 0.8).unwrap();
        let prc = PrcSpec::new(5, TiePolicy::Advance);
        let s = PhaseState::at_origin(vec![TAU; 5]).unwrap();
        let steps = resolve_cascade(&s, &topo, &prc, CascadeOrder::Ascending).unwrap();
        assert_eq!(steps.len(), 5);
        let last = &steps.last().unwrap().state;
        assert!(last.phases().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cascade_requires_a_firing_node() {
        let topo = CycleTopology::new(4, Direction::Unidirectional, 0.5).unwrap();
        let prc = PrcSpec::new(4, TiePolicy::Advance);
        let s = PhaseState::at_origin(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            resolve_cascade(&s, &topo, &prc, CascadeOrder::Ascending),
            Err(EngineError::NoNodeAtThreshold)
        ));
    }

    #[test]
    fn cascade_descending_order_switch() {
        let topo = CycleTopology::new(4, Direction::Unidirectional, 0.5).unwrap();
        let prc = PrcSpec::new(4, TiePolicy::Advance);
        let s = PhaseState::at_origin(vec![TAU, 1.0, 2.0, TAU]).unwrap();
        let asc = resolve_cascade(&s, &topo, &prc, CascadeOrder::Ascending).unwrap();
        let desc = resolve_cascade(&s, &topo, &prc, CascadeOrder::Descending).unwrap();
        assert_eq!(asc.iter().map(|s| s.fired).collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(desc.iter().map(|s| s.fired).collect::<Vec<_>>(), vec![3, 0]);
    }

    fn quick_config(
        n: usize,
        direction: Direction,
        l: f64,
        initial: PhaseState,
    ) -> SimulationConfig {
        let topo = CycleTopology::new(n, direction, l).unwrap();
        let prc = PrcSpec::new(n, TiePolicy::Advance);
        let mut cfg = SimulationConfig::new(topo, prc, w_std(), initial).unwrap();
        cfg.record = RecordMode::Off;
        cfg
    }

    #[test]
    fn run_detects_immediate_sync() {
        let initial = PhaseState::at_origin(vec![1.0; 4]).unwrap();
        let out = run(&quick_config(4, Direction::Bidirectional, 0.5, initial)).unwrap();
        assert_eq!(out.verdict, Verdict::Synchronized);
        assert_eq!(out.t_sync, Some(0.0));
    }

    #[test]
    fn run_synchronizes_semicircle() {
        let initial = PhaseState::at_origin(vec![0.1, 0.5, 1.2, 2.0]).unwrap();
        let out = run(&quick_config(4, Direction::Unidirectional, 0.6, initial)).unwrap();
        assert_eq!(out.verdict, Verdict::Synchronized);
        assert!(out.t_sync.unwrap() > 0.0);
        assert!(out.max_gap < 1e-6);
    }

    #[test]
    fn run_detects_rotating_cluster_orbit() {
        // uniform ascending spacing at full coupling circulates instead of
        // synchronizing: the recurrence has period n - 1 rounds
        let initial = worst_case_state(8, 1.0, WorstCase::UniU2Uniform).unwrap();
        let out = run(&quick_config(8, Direction::Unidirectional, 1.0, initial)).unwrap();
        assert_eq!(out.verdict, Verdict::ClusteredEquilibrium);
        assert_eq!(out.recurrence_period, Some(7));
    }

    #[test]
    fn run_exhausts_horizon() {
        let initial = worst_case_state(8, 1.0, WorstCase::UniU2Uniform).unwrap();
        let mut cfg = quick_config(8, Direction::Unidirectional, 1.0, initial);
        cfg.max_rounds = 3; // shorter than the orbit period
        let out = run(&cfg).unwrap();
        assert_eq!(out.verdict, Verdict::HorizonExhausted);
        assert_eq!(out.rounds, 3);
    }

    #[test]
    fn two_refractory_nodes_block_synchronization() {
        // two clusters half a turn apart, a refractory node in each:
        // the refractory pair stays half a turn apart forever while the
        // rest bounce between the clusters
        for tie in [TiePolicy::Advance, TiePolicy::Delay] {
            let initial = PhaseState::at_origin(vec![TAU, PI, TAU, PI]).unwrap();
            let topo = CycleTopology::new(4, Direction::Bidirectional, 1.0).unwrap();
            let prc = PrcSpec::new(4, tie)
                .with_refractory(0, PI)
                .unwrap()
                .with_refractory(1, PI)
                .unwrap();
            let mut cfg =
                SimulationConfig::new(topo, prc, w_std(), initial).unwrap();
            cfg.record = RecordMode::Off;
            cfg.max_rounds = 60;
            let out = run(&cfg).unwrap();
            assert_ne!(out.verdict, Verdict::Synchronized, "{tie:?}");
            let x = out.final_state.phases();
            let d = (x[0] - x[1]).abs();
            assert!((d.min(TAU - d) - PI).abs() < 1e-9, "{tie:?}: {x:?}");
        }
    }

    #[test]
    fn verdicts_invariant_under_frequency_scaling() {
        // halving w doubles every time stamp but changes nothing else
        let initial = worst_case_state(8, 0.8378, WorstCase::BiUbar).unwrap();
        let topo = CycleTopology::new(8, Direction::Bidirectional, 0.8378).unwrap();
        let prc = PrcSpec::new(8, TiePolicy::Advance);
        let mut fast =
            SimulationConfig::new(topo, prc, NaturalFrequency::standard(), initial).unwrap();
        fast.record = RecordMode::Off;
        let mut slow = fast.clone();
        slow.w = NaturalFrequency::new(PI).unwrap();
        let fast = run(&fast).unwrap();
        let slow = run(&slow).unwrap();
        assert_eq!(fast.verdict, Verdict::Synchronized);
        assert_eq!(slow.verdict, Verdict::Synchronized);
        assert_eq!(fast.total_jumps, slow.total_jumps);
        let ratio = slow.t_sync.unwrap() / fast.t_sync.unwrap();
        assert!((ratio - 2.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn run_respects_max_time() {
        let initial = PhaseState::at_origin(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let mut cfg = quick_config(4, Direction::Unidirectional, 0.2, initial);
        cfg.max_time = Some(0.25);
        let out = run(&cfg).unwrap();
        assert_eq!(out.verdict, Verdict::HorizonExhausted);
        assert!((out.final_state.t() - 0.25).abs() < EPS);
    }

    #[test]
    fn trajectory_csv_shape_and_determinism() {
        let initial = worst_case_state(4, 0.5, WorstCase::UniU2Uniform).unwrap();
        let mut cfg = quick_config(4, Direction::Unidirectional, 0.5, initial);
        cfg.record = RecordMode::JumpsAndFlow { stride: 0.25 };
        cfg.max_rounds = 2;
        let a = run(&cfg).unwrap().trajectory.to_csv_string().unwrap();
        let b = run(&cfg).unwrap().trajectory.to_csv_string().unwrap();
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next().unwrap(), "t,j,x_1,x_2,x_3,x_4,fired_mask");
        let first = lines.next().unwrap();
        assert!(first.starts_with("0."), "initial sample first: {first}");
        assert!(first.ends_with(",0"));
        // jump rows carry a one-bit mask
        let jump_rows: Vec<&str> = a.lines().skip(1).filter(|l| !l.ends_with(",0")).collect();
        assert!(!jump_rows.is_empty());
        for row in jump_rows {
            let mask: u128 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(mask.count_ones(), 1);
        }
    }

    #[test]
    fn trajectory_hybrid_time_is_ordered() {
        let initial = worst_case_state(4, 0.5, WorstCase::UniU2Uniform).unwrap();
        let mut cfg = quick_config(4, Direction::Bidirectional, 0.5, initial);
        cfg.record = RecordMode::Jumps;
        cfg.max_rounds = 5;
        let out = run(&cfg).unwrap();
        let samples = out.trajectory.samples();
        for pair in samples.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(
                b.t > a.t || (b.t == a.t && b.j >= a.j),
                "lexicographic order violated: ({}, {}) then ({}, {})",
                a.t,
                a.j,
                b.t,
                b.j
            );
        }
    }

    #[test]
    fn tie_policy_changes_outcome_at_exact_tie() {
        // one node exactly opposite the firing node: advance absorbs it,
        // delay resets it
        let topo = CycleTopology::new(4, Direction::Unidirectional, 1.0).unwrap();
        let s = PhaseState::at_origin(vec![TAU, PI, 1.0, 2.0]).unwrap();
        let adv = PrcSpec::new(4, TiePolicy::Advance);
        let steps = resolve_cascade(&s, &topo, &adv, CascadeOrder::Ascending).unwrap();
        assert_eq!(steps.len(), 2, "absorbed neighbor joins the cascade");
        let del = PrcSpec::new(4, TiePolicy::Delay);
        let steps = resolve_cascade(&s, &topo, &del, CascadeOrder::Ascending).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].state.phases()[1], 0.0);
    }
}
