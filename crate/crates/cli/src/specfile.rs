//! Flat key-value experiment spec files.
//!
//! One `key = value` pair per line, `#` starts a comment, keys may appear at
//! most once. The raw text is echoed verbatim into the outcome record so a
//! result file always carries the exact spec that produced it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use pco_core::{CascadeOrder, Direction, TiePolicy, Verdict};

pub fn parse_verdict(s: &str) -> Result<Verdict> {
    Ok(match s {
        "synchronized" => Verdict::Synchronized,
        "clustered-equilibrium" => Verdict::ClusteredEquilibrium,
        "horizon-exhausted" => Verdict::HorizonExhausted,
        other => bail!(
            "unknown verdict '{other}' (synchronized|clustered-equilibrium|horizon-exhausted)"
        ),
    })
}

/// How the initial phases are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum InitKind {
    /// Bidirectional worst-case equilibrium (needs `l < 1`).
    Ubar,
    /// Unidirectional worst-case equilibrium, descending order (needs `l < 1`).
    U1star,
    /// Equally spaced ascending phases.
    U2Uniform,
    /// Seeded random phases with spread below π.
    Semicircle,
    /// Seeded random phases uniform over the whole circle.
    Random,
    /// Explicit phase list (radians).
    Explicit(Vec<f64>),
}

impl InitKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ubar" => InitKind::Ubar,
            "u1star" => InitKind::U1star,
            "u2uniform" => InitKind::U2Uniform,
            "semicircle" => InitKind::Semicircle,
            "random" => InitKind::Random,
            other => bail!("unknown init kind '{other}' (ubar|u1star|u2uniform|semicircle|random)"),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            InitKind::Ubar => "ubar",
            InitKind::U1star => "u1star",
            InitKind::U2Uniform => "u2uniform",
            InitKind::Semicircle => "semicircle",
            InitKind::Random => "random",
            InitKind::Explicit(_) => "explicit",
        }
    }
}

/// Everything a simulation run needs, as read from a spec file and/or flags.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub name: String,
    pub n: usize,
    pub direction: Direction,
    pub l: f64,
    pub w: f64,
    pub init: InitKind,
    /// (0-based node, refractory length)
    pub refractory: Vec<(usize, f64)>,
    pub tie: TiePolicy,
    pub eps: f64,
    pub horizon_rounds: u64,
    pub max_time: Option<f64>,
    /// Flow-sample stride; 0 records jumps only.
    pub record_every: f64,
    pub seed: u64,
    pub cascade_order: CascadeOrder,
    /// Reported against the actual verdict; never changes the exit code.
    pub expected_verdict: Option<Verdict>,
    /// Output directory; the --out flag takes precedence.
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: "run".into(),
            n: 8,
            direction: Direction::Bidirectional,
            l: 0.5,
            w: std::f64::consts::TAU,
            init: InitKind::U2Uniform,
            refractory: Vec::new(),
            tie: TiePolicy::Advance,
            eps: pco_core::DEFAULT_SYNC_EPS,
            horizon_rounds: pco_core::DEFAULT_HORIZON_ROUNDS,
            max_time: None,
            record_every: 0.02,
            seed: 0,
            cascade_order: CascadeOrder::Ascending,
            expected_verdict: None,
            out: None,
        }
    }
}

/// Parses `node:length` with 1-based node labels.
pub fn parse_refractory_entry(s: &str) -> Result<(usize, f64)> {
    let (node, len) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("refractory entry '{s}' is not node:length"))?;
    let node: usize = node.trim().parse().context("refractory node label")?;
    if node == 0 {
        bail!("refractory node labels are 1-based");
    }
    let len: f64 = len.trim().parse().context("refractory length")?;
    Ok((node - 1, len))
}

pub fn parse_spec_text(text: &str) -> Result<ExperimentSpec> {
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        if fields.insert(key, value).is_some() {
            bail!("line {}: duplicate key '{key}'", lineno + 1);
        }
    }

    let mut spec = ExperimentSpec::default();
    let mut explicit_phases: Option<Vec<f64>> = None;
    for (key, value) in fields {
        match key {
            "name" => spec.name = value.to_string(),
            "n" => spec.n = value.parse().context("n")?,
            "direction" => {
                spec.direction = Direction::parse(value)
                    .ok_or_else(|| anyhow!("direction must be uni or bi, got '{value}'"))?
            }
            "l" => spec.l = value.parse().context("l")?,
            "w" => spec.w = value.parse().context("w")?,
            "init" => spec.init = InitKind::parse(value)?,
            "phases" => {
                let phases = value
                    .split(',')
                    .map(|p| p.trim().parse::<f64>().context("phase value"))
                    .collect::<Result<Vec<f64>>>()?;
                explicit_phases = Some(phases);
            }
            "refractory" => {
                spec.refractory = value
                    .split(',')
                    .filter(|e| !e.trim().is_empty())
                    .map(parse_refractory_entry)
                    .collect::<Result<Vec<_>>>()?;
            }
            "tie" => {
                spec.tie = TiePolicy::parse(value)
                    .ok_or_else(|| anyhow!("tie must be advance or delay, got '{value}'"))?
            }
            "eps" => spec.eps = value.parse().context("eps")?,
            "horizon_rounds" => spec.horizon_rounds = value.parse().context("horizon_rounds")?,
            "max_time" => spec.max_time = Some(value.parse().context("max_time")?),
            "record_every" => spec.record_every = value.parse().context("record_every")?,
            "seed" => spec.seed = value.parse().context("seed")?,
            "expected_verdict" => spec.expected_verdict = Some(parse_verdict(value)?),
            "out" => spec.out = Some(PathBuf::from(value)),
            "cascade_order" => {
                spec.cascade_order = match value {
                    "ascending" => CascadeOrder::Ascending,
                    "descending" => CascadeOrder::Descending,
                    other => bail!("cascade_order must be ascending or descending, got '{other}'"),
                }
            }
            other => bail!("unknown key '{other}'"),
        }
    }
    if let Some(phases) = explicit_phases {
        spec.n = phases.len();
        spec.init = InitKind::Explicit(phases);
    }
    Ok(spec)
}
