//! Distance-vector analysis of ring states: cycle-length classification,
//! per-firing transition matrices, their equilibrium gap profile, and
//! generators for the worst-case initial conditions at the synchronization
//! threshold.

use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::model::{
    solve_delta, DeltaCase, Direction, DistanceVector, ModelError, PhaseState, MIN_NODES,
};

/// Half-width of the band around 2π inside which a cycle length counts as
/// exactly 2π. The worst-case generators produce length 2π analytically; the
/// band absorbs rounding.
pub const LENGTH_BAND: f64 = 1e-9;

/// Slack for the monotone phase-ordering comparisons in [`classify`].
const ORDER_TOL: f64 = 1e-12;

/// Column agreement required of the iterated round product before its columns
/// are accepted as the equilibrium profile.
const GAMMA_COL_TOL: f64 = 1e-13;

/// The iterated product stops after the equivalent of 2^20 (~10^6) firing
/// rounds; convergence is exponential, so running past this means a bug or a
/// coupling too close to 0.
const GAMMA_MAX_DOUBLINGS: u32 = 20;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "round product did not converge within {rounds} firing rounds (column spread {spread})"
    )]
    GammaNotConverged { rounds: u64, spread: f64 },
    #[error("firing order must visit each node once, stepping by +1 or -1 around the ring")]
    InvalidFiringOrder,
}

/// Computes the distance vector of a state: component `i` is the shortest
/// arc between oscillators `i` and `i + 1`, wrapping at `n`.
pub fn distance_vector(state: &PhaseState) -> DistanceVector {
    let x = state.phases();
    let n = x.len();
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let d = (x[i] - x[(i + 1) % n]).abs();
        components.push(d.min(TAU - d));
    }
    DistanceVector::from_components(components)
}

/// Where a state sits relative to the only obstruction to global
/// synchronization: the monotonically ordered states with cycle length
/// exactly 2π.
///
/// The variants are mutually exclusive and exhaustive (up to the
/// classification tolerance); each carries the witness that justified it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StateClass {
    /// Cycle length strictly below 2π; such states always synchronize.
    LengthBelow2Pi { length: f64 },
    /// Cycle length strictly above 2π; the length keeps decreasing.
    LengthAbove2Pi { length: f64 },
    /// Length 2π but neither monotone ordering holds; the length still
    /// decreases after some firing. Carries the first ordering violations
    /// found for the descending and ascending checks.
    At2PiOutsideU {
        descending_break: usize,
        ascending_break: usize,
    },
    /// Descending phase order (exempting the minimum at the recorded index)
    /// with length 2π.
    InU1 { min_node: usize },
    /// Ascending phase order (exempting the maximum at the recorded index)
    /// with length 2π.
    InU2 { max_node: usize },
}

fn ordering_exceptions(x: &[f64], exempt: usize, descending: bool) -> Option<usize> {
    let n = x.len();
    for i in 0..n {
        if i == exempt {
            continue;
        }
        let a = x[i];
        let b = x[(i + 1) % n];
        let ok = if descending {
            a >= b - ORDER_TOL
        } else {
            a <= b + ORDER_TOL
        };
        if !ok {
            return Some(i);
        }
    }
    None
}

fn extremal_indices(x: &[f64], max: bool) -> Vec<usize> {
    let best = x.iter().cloned().fold(
        if max {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
        |acc, v| {
            if max {
                acc.max(v)
            } else {
                acc.min(v)
            }
        },
    );
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .map(|(i, _)| i)
        .collect()
}

/// Classifies a state by cycle length and, at length 2π, by whether one of
/// the two monotone orderings holds. Ties in the extremal phase are resolved
/// by trying every tied index as the ordering exemption.
pub fn classify(state: &PhaseState) -> StateClass {
    let v = distance_vector(state);
    let length = v.cycle_length();
    if length < TAU - LENGTH_BAND {
        return StateClass::LengthBelow2Pi { length };
    }
    if length > TAU + LENGTH_BAND {
        return StateClass::LengthAbove2Pi { length };
    }
    let x = state.phases();
    let mut desc_break = 0;
    for &m in &extremal_indices(x, false) {
        match ordering_exceptions(x, m, true) {
            None => return StateClass::InU1 { min_node: m },
            Some(i) => desc_break = i,
        }
    }
    let mut asc_break = 0;
    for &m in &extremal_indices(x, true) {
        match ordering_exceptions(x, m, false) {
            None => return StateClass::InU2 { max_node: m },
            Some(i) => asc_break = i,
        }
    }
    StateClass::At2PiOutsideU {
        descending_break: desc_break,
        ascending_break: asc_break,
    }
}

/// The linear map describing how the distance vector transforms when one
/// oscillator fires while the state is monotonically ordered with length 2π.
///
/// Column-stochastic by construction; for `l < 1` every diagonal entry is
/// positive.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    n: usize,
    firing: usize,
    direction: Direction,
    /// Row-major n x n entries.
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn firing(&self) -> usize {
        self.firing
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for r in 0..self.n {
            for (c, s) in sums.iter_mut().enumerate() {
                *s += self.entry(r, c);
            }
        }
        sums
    }

    /// Applies the map to a raw gap vector. The result may leave `[0, π]`;
    /// that unconstrained image is exactly the auxiliary system the
    /// equilibrium analysis iterates.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| {
                v.iter()
                    .enumerate()
                    .map(|(c, &vc)| self.entry(r, c) * vc)
                    .sum()
            })
            .collect()
    }
}

/// Builds the transition matrix for a firing of node `firing` (0-based).
///
/// When node `i` fires, gap `i` contracts to `(1−l)` of itself and spills
/// `l` of itself into gap `i + 1`; in the bidirectional case gap `i − 1`
/// does the same into gap `i − 2`.
pub fn transition_matrix(
    firing: usize,
    n: usize,
    l: f64,
    direction: Direction,
) -> Result<TransitionMatrix, AnalysisError> {
    if n < MIN_NODES {
        return Err(ModelError::TooFewNodes(n).into());
    }
    if firing >= n {
        return Err(ModelError::InvalidNode { node: firing, n }.into());
    }
    if !(l > 0.0 && l <= 1.0) {
        return Err(ModelError::CouplingOutOfRange(l).into());
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
    }
    let mut contract = |col: usize, spill_row: usize| {
        entries[col * n + col] = 1.0 - l;
        entries[spill_row * n + col] = l;
    };
    contract(firing, (firing + 1) % n);
    if direction == Direction::Bidirectional {
        let col = (firing + n - 1) % n;
        contract(col, (col + n - 1) % n);
    }
    Ok(TransitionMatrix {
        n,
        firing,
        direction,
        entries,
    })
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            let arc = a[r * n + k];
            if arc == 0.0 {
                continue;
            }
            for c in 0..n {
                out[r * n + c] += arc * b[k * n + c];
            }
        }
    }
    out
}

fn column_spread(m: &[f64], n: usize) -> f64 {
    let mut spread: f64 = 0.0;
    for r in 0..n {
        let row = &m[r * n..(r + 1) * n];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        spread = spread.max(hi - lo);
    }
    spread
}

fn firing_order_is_valid(order: &[usize], n: usize) -> bool {
    if order.len() != n || order.iter().any(|&i| i >= n) {
        return false;
    }
    let ascending = (0..n).all(|k| order[(k + 1) % n] == (order[k] + 1) % n);
    let descending = (0..n).all(|k| order[(k + 1) % n] == (order[k] + n - 1) % n);
    ascending || descending
}

/// Iterates the full-round product of transition matrices until its columns
/// agree, returning the common column γ (the normalized equilibrium gap
/// profile, with entries summing to 1).
///
/// `firing_order` must visit every node once, stepping by +1 (descending
/// phase order) or −1 (ascending phase order) around the ring. Iteration is
/// by repeated squaring of the round product, capped at the equivalent of
/// ~10^6 rounds.
pub fn equilibrium_gamma(
    n: usize,
    l: f64,
    direction: Direction,
    firing_order: &[usize],
) -> Result<Vec<f64>, AnalysisError> {
    if n < MIN_NODES {
        return Err(ModelError::TooFewNodes(n).into());
    }
    if l == 1.0 {
        return Err(ModelError::DegenerateCoupling.into());
    }
    if !(l > 0.0 && l < 1.0) {
        return Err(ModelError::CouplingOutOfRange(l).into());
    }
    if !firing_order_is_valid(firing_order, n) {
        return Err(AnalysisError::InvalidFiringOrder);
    }

    let mut round = vec![0.0; n * n];
    for i in 0..n {
        round[i * n + i] = 1.0;
    }
    for &f in firing_order {
        let c = transition_matrix(f, n, l, direction)?;
        round = mat_mul(&c.entries, &round, n);
    }

    let mut m = round;
    let mut rounds: u64 = 1;
    for _ in 0..GAMMA_MAX_DOUBLINGS {
        if column_spread(&m, n) < GAMMA_COL_TOL {
            break;
        }
        m = mat_mul(&m, &m, n);
        rounds *= 2;
    }
    let spread = column_spread(&m, n);
    if spread >= GAMMA_COL_TOL {
        return Err(AnalysisError::GammaNotConverged { rounds, spread });
    }
    let gamma: Vec<f64> = (0..n).map(|r| m[r * n]).collect();
    let total: f64 = gamma.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-12, "gamma sums to {total}");
    Ok(gamma)
}

/// Renders the equilibrium gap profile as a report: entries sorted
/// ascending, each labeled with the nearest of the three closed-form levels
/// `(1−l)δ`, `δ`, `δ/(1−l)` and its residual.
pub fn gamma_report(
    n: usize,
    l: f64,
    direction: Direction,
    firing_order: &[usize],
) -> Result<String, AnalysisError> {
    let mut gamma = equilibrium_gamma(n, l, direction, firing_order)?;
    gamma.sort_by(f64::total_cmp);
    let descending = firing_order.len() >= 2 && firing_order[1] == (firing_order[0] + n - 1) % n;
    let case = match (direction, descending) {
        (Direction::Bidirectional, _) => DeltaCase::BiWorst,
        (Direction::Unidirectional, false) => DeltaCase::UniWorstU1,
        (Direction::Unidirectional, true) => DeltaCase::UniU2NoRefractory,
    };
    let d = solve_delta(n, l, case)?;
    let levels = [
        ("(1-l)*delta", (1.0 - l) * d),
        ("delta", d),
        ("delta/(1-l)", d / (1.0 - l)),
    ];
    let mut out = format!(
        "n = {n}, l = {l}, direction = {}, order = {}, delta = {d:.16e}\n",
        direction.label(),
        if descending {
            "descending"
        } else {
            "ascending"
        },
    );
    for (k, &g) in gamma.iter().enumerate() {
        let (label, value) = levels
            .iter()
            .min_by(|a, b| (g - a.1).abs().total_cmp(&(g - b.1).abs()))
            .expect("levels nonempty");
        out.push_str(&format!(
            "gamma[{k}] = {g:.16e}  class={label}  residual={:.3e}\n",
            (g - value).abs()
        ));
    }
    out.push_str(&format!("sum = {:.16e}\n", gamma.iter().sum::<f64>()));
    Ok(out)
}

/// Which worst-case initial condition to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WorstCase {
    /// Clustered equilibrium of the bidirectional ring.
    BiUbar,
    /// Clustered equilibrium of the unidirectional ring, descending order.
    UniU1star,
    /// Equally spaced ascending phases (the coupling-independent member of
    /// the ascending family). Any `l` accepted and ignored.
    UniU2Uniform,
}

/// Builds the worst-case phase state for a ring of `n` nodes at coupling `l`.
///
/// Gaps are the 2π-scaled equilibrium profile laid out in firing order and
/// anchored with the maximal phase at exactly 2π, so a simulation started
/// from the result begins at a firing event. For sub-critical `l` the result
/// is an exact fixed point of the full-round map on the distance vector.
pub fn worst_case_state(n: usize, l: f64, which: WorstCase) -> Result<PhaseState, AnalysisError> {
    if n < MIN_NODES {
        return Err(ModelError::TooFewNodes(n).into());
    }
    let gaps: Vec<f64> = match which {
        WorstCase::BiUbar => {
            let d = solve_delta(n, l, DeltaCase::BiWorst)?;
            // Relative to the node about to fire: its own gap holds the
            // largest entry, the second-to-last the smallest. One firing
            // rotates the profile by one position, which is what makes the
            // state an equilibrium.
            let mut g = vec![d; n];
            g[0] = d / (1.0 - l);
            g[n - 2] = (1.0 - l) * d;
            g.iter().map(|v| v * TAU).collect()
        }
        WorstCase::UniU1star => {
            let d = solve_delta(n, l, DeltaCase::UniWorstU1)?;
            let mut g = vec![d; n];
            g[0] = d / (1.0 - l);
            g.iter().map(|v| v * TAU).collect()
        }
        WorstCase::UniU2Uniform => {
            let mut phases: Vec<f64> = (1..=n).map(|k| k as f64 * TAU / n as f64).collect();
            phases[n - 1] = TAU;
            return Ok(PhaseState::at_origin(phases)?);
        }
    };
    let mut phases = Vec::with_capacity(n);
    let mut x = TAU;
    phases.push(x);
    for g in gaps.iter().take(n - 1) {
        x -= g;
        phases.push(x.max(0.0));
    }
    Ok(PhaseState::at_origin(phases)?)
}

/// True when every adjacent gap is below `eps`, i.e. the state is within
/// `eps` of the synchronization set (0 and 2π identified). Also returns the
/// largest gap.
pub fn is_synchronized(state: &PhaseState, eps: f64) -> (bool, f64) {
    let max_gap = distance_vector(state).max_component();
    (max_gap < eps, max_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_jump, CycleTopology, PrcSpec, TiePolicy};
    use std::f64::consts::PI;

    const EPS: f64 = 1e-12;

    #[test]
    fn distance_vector_basics() {
        let s = PhaseState::at_origin(vec![1.0; 5]).unwrap();
        let v = distance_vector(&s);
        assert!(v.components().iter().all(|&c| c == 0.0));
        assert_eq!(v.cycle_length(), 0.0);

        let s = PhaseState::at_origin(vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]).unwrap();
        let v = distance_vector(&s);
        for &c in v.components() {
            assert!((c - PI / 2.0).abs() < EPS);
        }
        assert!((v.cycle_length() - TAU).abs() < EPS);
    }

    #[test]
    fn distance_wraps_long_way() {
        // adjacent difference of 3π/2 measures as π/2
        let s = PhaseState::at_origin(vec![3.0 * PI / 2.0, 0.0, 0.5, 1.0]).unwrap();
        let v = distance_vector(&s);
        assert!((v.components()[0] - PI / 2.0).abs() < EPS);
    }

    #[test]
    fn classify_quarter_circle() {
        let s = PhaseState::at_origin(vec![0.1, 0.4, 0.7, 1.0]).unwrap();
        assert!(matches!(classify(&s), StateClass::LengthBelow2Pi { .. }));
    }

    #[test]
    fn classify_tdma_orderings() {
        let asc = worst_case_state(8, 0.5, WorstCase::UniU2Uniform).unwrap();
        assert!(matches!(classify(&asc), StateClass::InU2 { max_node: 7 }));

        let desc: Vec<f64> = (0..8).map(|k| TAU - k as f64 * TAU / 8.0).collect();
        let desc = PhaseState::at_origin(desc).unwrap();
        assert!(matches!(classify(&desc), StateClass::InU1 { min_node: 7 }));
    }

    #[test]
    fn classify_above_and_outside() {
        // alternating phases: every gap is π, length 4π > 2π
        let s = PhaseState::at_origin(vec![0.0, PI, 0.0, PI]).unwrap();
        assert!(matches!(classify(&s), StateClass::LengthAbove2Pi { .. }));

        // length 2π but no monotone ordering
        let s = PhaseState::at_origin(vec![0.0, PI / 2.0, 0.0, 3.0 * PI / 2.0]).unwrap();
        let v = distance_vector(&s);
        assert!((v.cycle_length() - TAU).abs() < 1e-12);
        assert!(matches!(classify(&s), StateClass::At2PiOutsideU { .. }));
    }

    #[test]
    fn transition_matrix_column_stochastic() {
        for direction in [Direction::Unidirectional, Direction::Bidirectional] {
            for firing in 0..6 {
                let m = transition_matrix(firing, 6, 0.37, direction).unwrap();
                for s in m.column_sums() {
                    assert!((s - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn transition_matrix_uni_full_absorption() {
        let m = transition_matrix(2, 5, 1.0, Direction::Unidirectional).unwrap();
        // firing gap collapses entirely into its successor
        assert_eq!(m.entry(2, 2), 0.0);
        assert_eq!(m.entry(3, 2), 1.0);
        let v = m.apply(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        assert!((v[2] - 0.0).abs() < EPS);
        assert!((v[3] - 0.7).abs() < EPS);
    }

    #[test]
    fn transition_matrix_bi_pattern() {
        // firing node 2 of a 4-ring at l = 0.5 contracts gaps 1 and 2,
        // spilling into gaps 0 and 3
        let m = transition_matrix(2, 4, 0.5, Direction::Bidirectional).unwrap();
        assert_eq!(m.entry(1, 1), 0.5);
        assert_eq!(m.entry(2, 2), 0.5);
        assert_eq!(m.entry(0, 1), 0.5);
        assert_eq!(m.entry(3, 2), 0.5);
        for s in m.column_sums() {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn transition_matches_jump_on_ordered_state() {
        // descending layout about to fire node 0, gaps small enough that
        // the ordered-state update applies exactly
        let n = 6;
        let l = 0.4;
        let gaps = [0.9, 0.7, 0.8, 1.0, 0.9];
        let mut phases = vec![TAU];
        for g in gaps {
            phases.push(phases.last().unwrap() - g);
        }
        let state = PhaseState::at_origin(phases).unwrap();
        let v = distance_vector(&state);
        for direction in [Direction::Unidirectional, Direction::Bidirectional] {
            let topo = CycleTopology::new(n, direction, l).unwrap();
            let prc = PrcSpec::new(n, TiePolicy::Advance);
            let jumped = apply_jump(&state, 0, &topo, &prc).unwrap();
            let via_state = distance_vector(&jumped);
            let via_matrix = transition_matrix(0, n, l, direction)
                .unwrap()
                .apply(v.components());
            for (a, b) in via_state.components().iter().zip(via_matrix) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn gamma_matches_bi_profile() {
        let n = 8;
        let l = 0.8378;
        let order: Vec<usize> = (0..n).collect();
        let gamma = equilibrium_gamma(n, l, Direction::Bidirectional, &order).unwrap();
        assert!((gamma.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let d = solve_delta(n, l, DeltaCase::BiWorst).unwrap();
        let mut expect = vec![d; n];
        expect[0] = (1.0 - l) * d;
        expect[n - 1] = d / (1.0 - l);
        expect.sort_by(f64::total_cmp);
        let mut got = gamma.clone();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn gamma_matches_uni_profiles() {
        let n = 8;
        let l = 0.86;
        let asc: Vec<usize> = (0..n).collect();
        let gamma = equilibrium_gamma(n, l, Direction::Unidirectional, &asc).unwrap();
        let d = solve_delta(n, l, DeltaCase::UniWorstU1).unwrap();
        let mut expect = vec![d; n];
        expect[n - 1] = d / (1.0 - l);
        expect.sort_by(f64::total_cmp);
        let mut got = gamma;
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }

        // reversed firing order realizes the ascending-family profile
        let desc: Vec<usize> = (0..n).rev().collect();
        let gamma = equilibrium_gamma(n, l, Direction::Unidirectional, &desc).unwrap();
        let d = solve_delta(n, l, DeltaCase::UniU2NoRefractory).unwrap();
        let mut expect = vec![d; n];
        expect[0] = (1.0 - l) * d;
        expect.sort_by(f64::total_cmp);
        let mut got = gamma;
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn gamma_direction_of_travel_equivalence() {
        // the bidirectional profile is the same set of values whichever way
        // the firing order walks the ring
        for l in [0.3, 0.8378, 0.95] {
            let asc: Vec<usize> = (0..8).collect();
            let desc: Vec<usize> = (0..8).rev().collect();
            let mut a = equilibrium_gamma(8, l, Direction::Bidirectional, &asc).unwrap();
            let mut b = equilibrium_gamma(8, l, Direction::Bidirectional, &desc).unwrap();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "l={l}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn gamma_report_classifies_levels() {
        let order: Vec<usize> = (0..8).collect();
        let report = gamma_report(8, 0.8378, Direction::Bidirectional, &order).unwrap();
        assert_eq!(report.matches("class=delta ").count(), 6);
        assert_eq!(report.matches("class=(1-l)*delta").count(), 1);
        assert_eq!(report.matches("class=delta/(1-l)").count(), 1);
        for line in report.lines().filter(|l| l.contains("residual")) {
            let res: f64 = line.rsplit('=').next().unwrap().trim().parse().unwrap();
            assert!(res < 1e-9, "{line}");
        }
        let desc: Vec<usize> = (0..8).rev().collect();
        let report = gamma_report(8, 0.86, Direction::Unidirectional, &desc).unwrap();
        assert!(report.contains("order = descending"));
        assert_eq!(report.matches("class=(1-l)*delta").count(), 1);
    }

    #[test]
    fn gamma_rejects_bad_inputs() {
        let order: Vec<usize> = (0..8).collect();
        assert!(equilibrium_gamma(8, 1.0, Direction::Bidirectional, &order).is_err());
        assert!(
            equilibrium_gamma(8, 0.5, Direction::Bidirectional, &[0, 2, 1, 3, 4, 5, 6, 7]).is_err()
        );
        let rotated = [3, 4, 5, 6, 7, 0, 1, 2];
        assert!(equilibrium_gamma(8, 0.5, Direction::Bidirectional, &rotated).is_ok());
    }

    #[test]
    fn worst_case_classifies_subcritical() {
        let l = 0.8377;
        let s = worst_case_state(8, l, WorstCase::BiUbar).unwrap();
        assert!(matches!(classify(&s), StateClass::InU1 { .. }));
        let v = distance_vector(&s);
        assert!((v.cycle_length() - TAU).abs() < LENGTH_BAND);

        let s = worst_case_state(8, 0.857, WorstCase::UniU1star).unwrap();
        assert!(matches!(classify(&s), StateClass::InU1 { .. }));
    }

    #[test]
    fn worst_case_is_round_fixed_point() {
        // one full firing round returns the same distance vector
        for (which, l, direction) in [
            (WorstCase::BiUbar, 0.8377, Direction::Bidirectional),
            (WorstCase::UniU1star, 0.857, Direction::Unidirectional),
        ] {
            let n = 8;
            let state = worst_case_state(n, l, which).unwrap();
            let v0 = distance_vector(&state);
            let topo = CycleTopology::new(n, direction, l).unwrap();
            let prc = PrcSpec::new(n, TiePolicy::Advance);
            let mut s = state;
            for _ in 0..n {
                // flow to the next firing, then jump
                let (i, max) = s.max_phase();
                let dt = TAU - max;
                let phases: Vec<f64> = s.phases().iter().map(|x| (x + dt).min(TAU)).collect();
                s = PhaseState::new(phases, s.t() + dt, s.j()).unwrap();
                s = apply_jump(&s, i, &topo, &prc).unwrap();
            }
            let v1 = distance_vector(&s);
            for (a, b) in v0.components().iter().zip(v1.components()) {
                assert!((a - b).abs() < 1e-12, "{which:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn worst_case_uniform_spacing() {
        let s = worst_case_state(8, 0.3, WorstCase::UniU2Uniform).unwrap();
        let v = distance_vector(&s);
        for &c in v.components() {
            assert!((c - TAU / 8.0).abs() < EPS);
        }
        assert_eq!(s.phases()[7], TAU);
    }

    #[test]
    fn worst_case_near_unit_coupling_collapses() {
        let s = worst_case_state(8, 1.0 - 1e-9, WorstCase::UniU1star).unwrap();
        // nodes 1..n huddle just above zero while node 0 sits at 2π
        assert_eq!(s.phases()[0], TAU);
        assert!(s.phases()[1] < 1e-6);
        assert!(worst_case_state(8, 1.0, WorstCase::UniU1star).is_err());
    }

    #[test]
    fn synchronized_checks() {
        let s = PhaseState::at_origin(vec![1.3; 6]).unwrap();
        let (ok, gap) = is_synchronized(&s, 1e-6);
        assert!(ok);
        assert_eq!(gap, 0.0);

        let s = PhaseState::at_origin(vec![0.0, TAU, 0.0, TAU]).unwrap();
        let (ok, gap) = is_synchronized(&s, 1e-6);
        assert!(ok, "0 and 2π identified");
        assert_eq!(gap, 0.0);

        let s = worst_case_state(8, 0.5, WorstCase::UniU2Uniform).unwrap();
        let (ok, gap) = is_synchronized(&s, 1e-6);
        assert!(!ok);
        assert!((gap - TAU / 8.0).abs() < EPS);
    }
}
