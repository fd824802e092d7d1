//! Event-driven simulator and analysis toolkit for pulse-coupled oscillator
//! networks on unidirectional and bidirectional cycle graphs.
//!
//! Oscillator phases grow at a shared natural frequency; a node reaching 2π
//! fires a pulse, resets to 0, and shifts the phases of the ring neighbors
//! that sense it through an advance-delay response curve scaled by the
//! coupling strength. The crate provides:
//!
//! - [`model`]: the pure types and maps — phase states, ring topologies, the
//!   response curve with refractory dead zones, the single-firing jump map,
//!   and the closed-form critical couplings and worst-case gap equations;
//! - [`engine`]: exact event-driven simulation with analytic flows, cascade
//!   resolution for simultaneous firings, hybrid-time trajectory recording,
//!   and verdict detection (synchronized / clustered / horizon);
//! - [`analysis`]: distance vectors, cycle-length classification, per-firing
//!   transition matrices, their equilibrium gap profile, and worst-case
//!   initial-condition generators;
//! - [`suites`]: seeded randomized verification suites behind the `verify`
//!   command;
//! - [`rng`]: the documented 64-bit-state pseudo-random stream that makes
//!   every randomized experiment reproducible.

pub mod analysis;
pub mod engine;
pub mod model;
pub mod rng;
pub mod suites;

pub use analysis::{
    classify, distance_vector, equilibrium_gamma, gamma_report, is_synchronized, transition_matrix,
    worst_case_state, AnalysisError, StateClass, TransitionMatrix, WorstCase,
};
pub use engine::{
    flow, next_fire_time, resolve_cascade, run, CascadeOrder, CascadeStep, EngineError,
    HybridTrajectory, RecordMode, RunOutcome, SimulationConfig, TrajectorySample, Verdict,
    DEFAULT_HORIZON_ROUNDS, DEFAULT_SYNC_EPS,
};
pub use model::{
    apply_jump, critical_coupling, evaluate_prc, solve_delta, CycleTopology, DeltaCase, Direction,
    DistanceVector, ModelError, NaturalFrequency, PhaseState, PrcSpec, TiePolicy, FIRING_TOL,
    MIN_NODES,
};
pub use rng::SplitMix64;
pub use suites::{run_suite, CheckResult, SuiteReport, SUITE_NAMES};
