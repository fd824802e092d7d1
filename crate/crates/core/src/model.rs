//! Core domain types for pulse-coupled oscillator networks on cycle graphs.
//!
//! Everything in this module is pure arithmetic with no time evolution: the
//! phase state, the ring topology, the advance-delay phase response curve
//! with optional refractory dead zones, the single-firing jump map, and the
//! closed-form critical-coupling / equilibrium-gap formulas.

use serde::Serialize;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Smallest supported ring. The synchronization results are stated for
/// networks of at least four oscillators and smaller rings are rejected
/// everywhere.
pub const MIN_NODES: usize = 4;

/// A node counts as "at the firing threshold" when its phase is within this
/// distance of 2π. Phases that close are snapped to exactly 2π before the
/// jump map applies, which keeps the jump set well-defined under rounding.
pub const FIRING_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("network needs at least {MIN_NODES} nodes, got {0}")]
    TooFewNodes(usize),
    #[error("phase {0} lies outside [0, 2*pi]")]
    PhaseOutOfRange(f64),
    #[error("coupling strength {0} lies outside (0, 1]")]
    CouplingOutOfRange(f64),
    #[error("node index {node} invalid for a ring of {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("refractory length {0} lies outside [0, 2*pi]")]
    RefractoryOutOfRange(f64),
    #[error("node {node} is at phase {phase}, not at the firing threshold")]
    NotAtFiringThreshold { node: usize, phase: f64 },
    #[error("natural frequency {0} must be positive")]
    NonPositiveFrequency(f64),
    #[error("time {0} must be finite and nonnegative")]
    InvalidTime(f64),
    #[error("coupling l = 1 is degenerate for this construction: the gap vector collapses to a single nonzero entry")]
    DegenerateCoupling,
    #[error("expected {expected} per-node entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Orientation of the ring's sensing edges.
///
/// In the unidirectional case node `i + 1` senses node `i`'s firing, so a
/// pulse from `i` shifts the phase of `i + 1` only. The bidirectional case
/// adds the reversed edges, so both ring neighbors react.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Unidirectional,
    Bidirectional,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Unidirectional => "uni",
            Direction::Bidirectional => "bi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uni" | "unidirectional" => Some(Direction::Unidirectional),
            "bi" | "bidirectional" => Some(Direction::Bidirectional),
            _ => None,
        }
    }
}

/// A ring of `n` oscillators with a common coupling strength `l`.
///
/// Node indices are 0-based throughout the API; command-line front ends map
/// them to 1-based labels. All adjacency weights are either 0 or `l`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CycleTopology {
    n: usize,
    direction: Direction,
    coupling: f64,
}

impl CycleTopology {
    pub fn new(n: usize, direction: Direction, coupling: f64) -> Result<Self, ModelError> {
        if n < MIN_NODES {
            return Err(ModelError::TooFewNodes(n));
        }
        if !(coupling > 0.0 && coupling <= 1.0) {
            return Err(ModelError::CouplingOutOfRange(coupling));
        }
        Ok(Self {
            n,
            direction,
            coupling,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Nodes that sense a pulse from `firing`: the successor on the ring,
    /// plus the predecessor in the bidirectional case.
    pub fn listeners(&self, firing: usize) -> Vec<usize> {
        let next = (firing + 1) % self.n;
        match self.direction {
            Direction::Unidirectional => vec![next],
            Direction::Bidirectional => vec![(firing + self.n - 1) % self.n, next],
        }
    }

    /// Adjacency weight with which node `i` senses node `j`; always 0 or `l`.
    pub fn adjacency(&self, i: usize, j: usize) -> f64 {
        let senses_forward = i == (j + 1) % self.n;
        let senses_backward = j == (i + 1) % self.n;
        let connected = match self.direction {
            Direction::Unidirectional => senses_forward,
            Direction::Bidirectional => senses_forward || senses_backward,
        };
        if connected {
            self.coupling
        } else {
            0.0
        }
    }
}

/// Resolution of the set-valued response at phase exactly π, where the curve
/// admits both a +π advance and a −π delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TiePolicy {
    Advance,
    Delay,
}

impl TiePolicy {
    fn shift(self) -> f64 {
        match self {
            TiePolicy::Advance => PI,
            TiePolicy::Delay => -PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TiePolicy::Advance => "advance",
            TiePolicy::Delay => "delay",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "advance" => Some(TiePolicy::Advance),
            "delay" => Some(TiePolicy::Delay),
            _ => None,
        }
    }
}

/// The advance-delay phase response curve plus per-node refractory periods.
///
/// A pulse received at phase `x` delays by `x` when `x < π`, advances by
/// `2π − x` when `x > π`, and resolves the tie at exactly π via the policy.
/// A node with refractory length `r` ignores pulses while its phase lies in
/// the closed interval `[0, r]`.
#[derive(Clone, Debug, Serialize)]
pub struct PrcSpec {
    tie: TiePolicy,
    refractory: Vec<f64>,
}

impl PrcSpec {
    /// A curve for `n` nodes with no refractory periods.
    pub fn new(n: usize, tie: TiePolicy) -> Self {
        Self {
            tie,
            refractory: vec![0.0; n],
        }
    }

    /// Sets the refractory length of one node (0-based).
    pub fn with_refractory(mut self, node: usize, r: f64) -> Result<Self, ModelError> {
        let n = self.refractory.len();
        if node >= n {
            return Err(ModelError::InvalidNode { node, n });
        }
        if !(0.0..=TAU).contains(&r) {
            return Err(ModelError::RefractoryOutOfRange(r));
        }
        self.refractory[node] = r;
        Ok(self)
    }

    pub fn tie(&self) -> TiePolicy {
        self.tie
    }

    pub fn refractory(&self) -> &[f64] {
        &self.refractory
    }

    pub fn n(&self) -> usize {
        self.refractory.len()
    }
}

/// Common natural frequency, in radians per unit time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NaturalFrequency(f64);

impl NaturalFrequency {
    pub fn new(w: f64) -> Result<Self, ModelError> {
        if !w.is_finite() || w <= 0.0 {
            return Err(ModelError::NonPositiveFrequency(w));
        }
        Ok(Self(w))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// One full revolution per unit time; the value used in all bundled
    /// experiments.
    pub fn standard() -> Self {
        Self(TAU)
    }
}

/// Snapshot of the hybrid state: `n` phases in `[0, 2π]`, ordinary time `t`,
/// and the jump counter `j`.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseState {
    phases: Vec<f64>,
    t: f64,
    j: u64,
}

impl PhaseState {
    pub fn new(phases: Vec<f64>, t: f64, j: u64) -> Result<Self, ModelError> {
        if phases.len() < MIN_NODES {
            return Err(ModelError::TooFewNodes(phases.len()));
        }
        for &x in &phases {
            if !(0.0..=TAU).contains(&x) || !x.is_finite() {
                return Err(ModelError::PhaseOutOfRange(x));
            }
        }
        if !t.is_finite() || t < 0.0 {
            return Err(ModelError::InvalidTime(t));
        }
        Ok(Self { phases, t, j })
    }

    /// A state at hybrid time (0, 0).
    pub fn at_origin(phases: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(phases, 0.0, 0)
    }

    pub(crate) fn new_unchecked(phases: Vec<f64>, t: f64, j: u64) -> Self {
        debug_assert!(phases.iter().all(|x| (0.0..=TAU).contains(x)));
        Self { phases, t, j }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    /// Largest phase and its (first) node index.
    pub fn max_phase(&self) -> (usize, f64) {
        let mut best = (0, self.phases[0]);
        for (i, &x) in self.phases.iter().enumerate().skip(1) {
            if x > best.1 {
                best = (i, x);
            }
        }
        best
    }

    /// Nodes within the firing tolerance of 2π, in ascending index order.
    pub fn nodes_at_threshold(&self) -> Vec<usize> {
        self.phases
            .iter()
            .enumerate()
            .filter(|(_, &x)| TAU - x <= FIRING_TOL)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Per-edge shortest arc lengths between ring neighbors; component `i` is the
/// circle distance between oscillators `i` and `i + 1` (wrapping at `n`).
#[derive(Clone, Debug, Serialize)]
pub struct DistanceVector {
    components: Vec<f64>,
}

impl DistanceVector {
    pub(crate) fn from_components(components: Vec<f64>) -> Self {
        debug_assert!(components.iter().all(|v| (0.0..=PI + 1e-12).contains(v)));
        Self { components }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Cycle length: the sum of all components, in `[0, nπ]`.
    pub fn cycle_length(&self) -> f64 {
        self.components.iter().sum()
    }

    pub fn max_component(&self) -> f64 {
        self.components.iter().cloned().fold(0.0, f64::max)
    }
}

/// Evaluates the phase response of `node` to a pulse received at `phase`.
///
/// The result always lies in `[−phase, 2π − phase]`, so the shifted phase
/// stays on the circle. Inside the node's refractory dead zone the response
/// is identically zero.
pub fn evaluate_prc(phase: f64, spec: &PrcSpec, node: usize) -> Result<f64, ModelError> {
    if node >= spec.n() {
        return Err(ModelError::InvalidNode { node, n: spec.n() });
    }
    if !(0.0..=TAU).contains(&phase) || !phase.is_finite() {
        return Err(ModelError::PhaseOutOfRange(phase));
    }
    if phase <= spec.refractory[node] {
        return Ok(0.0);
    }
    Ok(if phase > PI {
        TAU - phase
    } else if phase < PI {
        -phase
    } else {
        spec.tie.shift()
    })
}

fn saturate(x: f64) -> f64 {
    x.clamp(0.0, TAU)
}

/// Applies one firing of `firing`: its phase resets to 0, every node that
/// senses it shifts by the coupled response (saturated into `[0, 2π]`), and
/// the jump counter increments. Ordinary time is unchanged.
///
/// The firing node must be within the firing tolerance of 2π; it is snapped
/// to exactly 2π before the map applies.
pub fn apply_jump(
    state: &PhaseState,
    firing: usize,
    topology: &CycleTopology,
    prc: &PrcSpec,
) -> Result<PhaseState, ModelError> {
    let n = state.n();
    if n != topology.n() {
        return Err(ModelError::LengthMismatch {
            expected: topology.n(),
            got: n,
        });
    }
    if prc.n() != n {
        return Err(ModelError::LengthMismatch {
            expected: n,
            got: prc.n(),
        });
    }
    if firing >= n {
        return Err(ModelError::InvalidNode { node: firing, n });
    }
    let phase = state.phases[firing];
    if TAU - phase > FIRING_TOL {
        return Err(ModelError::NotAtFiringThreshold {
            node: firing,
            phase,
        });
    }

    let mut phases = state.phases.clone();
    phases[firing] = TAU;
    for j in topology.listeners(firing) {
        if j == firing {
            continue;
        }
        let q = evaluate_prc(phases[j], prc, j)?;
        phases[j] = saturate(phases[j] + topology.coupling() * q);
    }
    phases[firing] = 0.0;
    Ok(PhaseState::new_unchecked(phases, state.t, state.j + 1))
}

/// Critical coupling strength above which the ring synchronizes from every
/// initial condition (with one π-long refractory node in the unidirectional
/// case). Strictly increasing in `n` and approaching 1 as `n` grows.
pub fn critical_coupling(n: usize, direction: Direction) -> Result<f64, ModelError> {
    if n < MIN_NODES {
        return Err(ModelError::TooFewNodes(n));
    }
    let nf = n as f64;
    Ok(match direction {
        // Rationalized form of n/2 - sqrt(n^2 - 4(n-2))/2; avoids the
        // large-n cancellation of the textbook expression.
        Direction::Bidirectional => 2.0 * (nf - 2.0) / (nf + (nf * nf - 4.0 * (nf - 2.0)).sqrt()),
        Direction::Unidirectional => (nf - 2.0) / (nf - 1.0),
    })
}

/// Which worst-case gap equation to solve for the normalized base gap δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DeltaCase {
    /// Bidirectional worst case: (n−2)δ + (1−l)δ + δ/(1−l) = 1.
    BiWorst,
    /// Unidirectional worst case with descending phase order:
    /// (n−1)δ + δ/(1−l) = 1.
    UniWorstU1,
    /// Unidirectional ascending order without refractory:
    /// (n−1)δ + (1−l)δ = 1.
    UniU2NoRefractory,
}

/// Solves the selected linear gap equation for its unique positive root δ.
///
/// The two worst-case constructions reject `l = 1`, where the gap vector
/// degenerates to a single nonzero entry and the equation no longer applies.
pub fn solve_delta(n: usize, l: f64, case: DeltaCase) -> Result<f64, ModelError> {
    if n < MIN_NODES {
        return Err(ModelError::TooFewNodes(n));
    }
    let nf = n as f64;
    match case {
        DeltaCase::BiWorst | DeltaCase::UniWorstU1 => {
            if l == 1.0 {
                return Err(ModelError::DegenerateCoupling);
            }
            if !(l > 0.0 && l < 1.0) {
                return Err(ModelError::CouplingOutOfRange(l));
            }
        }
        DeltaCase::UniU2NoRefractory => {
            if !(l > 0.0 && l <= 1.0) {
                return Err(ModelError::CouplingOutOfRange(l));
            }
        }
    }
    Ok(match case {
        DeltaCase::BiWorst => 1.0 / ((nf - 2.0) + (1.0 - l) + 1.0 / (1.0 - l)),
        DeltaCase::UniWorstU1 => 1.0 / ((nf - 1.0) + 1.0 / (1.0 - l)),
        DeltaCase::UniU2NoRefractory => 1.0 / ((nf - 1.0) + (1.0 - l)),
    })
}
