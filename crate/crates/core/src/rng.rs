//! Deterministic pseudo-random stream for the randomized verification
//! suites and experiment initial conditions.
//!
//! The generator is SplitMix64: one 64-bit word of state, and a stream
//! contract short enough to restate in full so that independent
//! implementations can reproduce every randomized experiment bit for bit:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! All arithmetic is modulo 2^64. Reference vector: from seed 0 the first
//! three outputs are `0xE220A8397B1DCDAF`, `0x6E789E6AA1B965F4`,
//! `0x06C45D188009454F`; from seed 1 they are `0x910A2DEC89025CC1`,
//! `0xBEEB8DA1658EEC67`, `0xF893A2EEFB32555E`.
//!
//! Floats are derived as `(output >> 11) * 2^-53`, uniform on `[0, 1)`.

use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform on `(0, 1]`; used for coupling strengths, which exclude 0.
    pub fn unit_positive(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// Margin keeping sampled spreads strictly below π.
const SPREAD_MARGIN: f64 = 0.999;

/// Phases uniform over `[0, 2π]^n`.
pub fn random_phases(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(0.0, 2.0 * PI)).collect()
}

/// Phases with max pairwise spread strictly below π: a random base in
/// `[0, 2π − s]` plus offsets uniform in `[0, s]` with `s = 0.999π`.
pub fn semicircle_phases(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    let s = SPREAD_MARGIN * PI;
    let base = rng.uniform(0.0, 2.0 * PI - s);
    (0..n).map(|_| base + rng.uniform(0.0, s)).collect()
}

/// A positive gap profile summing to 2π with every gap at most π, laid out
/// descending from an anchor at 2π. Returns the phases. Used to sample the
/// ordered length-2π states.
pub fn ordered_ring_phases(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    loop {
        // exponential spacings normalized to the circle
        let raw: Vec<f64> = (0..n).map(|_| -rng.unit_positive().ln()).collect();
        let total: f64 = raw.iter().sum();
        let gaps: Vec<f64> = raw.iter().map(|g| g / total * 2.0 * PI).collect();
        if gaps.iter().any(|&g| g > PI) {
            continue;
        }
        let mut phases = Vec::with_capacity(n);
        let mut x = 2.0 * PI;
        phases.push(x);
        for g in gaps.iter().take(n - 1) {
            x -= g;
            phases.push(x.max(0.0));
        }
        return phases;
    }
}
