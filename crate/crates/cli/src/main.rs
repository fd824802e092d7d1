//! `pco`: simulate pulse-coupled oscillator rings, print critical couplings,
//! generate worst-case initial conditions, sweep parameters, and run the
//! randomized verification suites.
//!
//! Exit codes: 0 success, 2 usage error, 3 engine invariant violation,
//! 4 verification failure.

mod runs;
mod specfile;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use pco_core::{
    classify, critical_coupling, distance_vector, run, run_suite, worst_case_state, Direction,
    EngineError, TiePolicy, WorstCase, SUITE_NAMES,
};
use runs::{build_config, summary_line, synthesize_spec_text, verdict_label};
use specfile::{parse_refractory_entry, parse_spec_text, ExperimentSpec, InitKind};

const EXIT_USAGE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pco",
    version,
    about = "Event-driven simulation and analysis of pulse-coupled oscillator rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a spec file and/or flags
    Simulate(SimulateArgs),
    /// Print critical coupling strengths, single or swept over ring sizes
    Critical(CriticalArgs),
    /// Run a named randomized verification suite
    Verify(VerifyArgs),
    /// Generate and print a worst-case initial condition
    WorstCase(WorstCaseArgs),
    /// Print the equilibrium gap profile with its level classification
    Gamma(GammaArgs),
    /// Sweep the coupling strength over a grid of simulations
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Spec file (key = value lines); flags override its fields
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Ring size
    #[arg(long)]
    n: Option<usize>,
    /// uni or bi
    #[arg(long)]
    direction: Option<String>,
    /// Coupling strength in (0, 1]
    #[arg(long)]
    l: Option<f64>,
    /// Natural frequency (radians per unit time)
    #[arg(long)]
    w: Option<f64>,
    /// ubar | u1star | u2uniform | semicircle | random
    #[arg(long)]
    init: Option<String>,
    /// Explicit comma-separated phases (overrides --init and --n)
    #[arg(long)]
    phases: Option<String>,
    /// node:length with 1-based node labels; repeatable
    #[arg(long)]
    refractory: Vec<String>,
    /// advance or delay (response at phase exactly pi)
    #[arg(long)]
    tie: Option<String>,
    /// Synchronization tolerance on the largest gap
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    horizon_rounds: Option<u64>,
    #[arg(long)]
    max_time: Option<f64>,
    /// Flow sampling stride for the trajectory (0 records jumps only)
    #[arg(long)]
    record_every: Option<f64>,
    /// Seed for the random initial conditions
    #[arg(long)]
    seed: Option<u64>,
    /// ascending or descending processing of simultaneous firings
    #[arg(long)]
    cascade_order: Option<String>,
    /// Output directory for the trajectory CSV and outcome JSON
    /// (falls back to the spec's `out`, then the working directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CriticalArgs {
    /// Ring size for a single value
    #[arg(long)]
    n: Option<usize>,
    /// uni or bi (with --n)
    #[arg(long)]
    direction: Option<String>,
    /// Sweep range lo:hi (inclusive), both directions
    #[arg(long)]
    sweep: Option<String>,
    /// Write the sweep as CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// proposition1 | lemma1 | lemma2 | matrices | thresholds
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial count override
    #[arg(long)]
    trials: Option<usize>,
    /// Ring size for the thresholds suite
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct WorstCaseArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: f64,
    /// ubar | u1star | u2uniform
    #[arg(long)]
    which: String,
    /// Emit a JSON record instead of text
    #[arg(long, default_value_t = false)]
    json: bool,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    n: usize,
    /// Coupling strength, strictly below 1
    #[arg(long)]
    l: f64,
    /// uni or bi
    #[arg(long)]
    direction: String,
    /// ascending or descending firing order
    #[arg(long, default_value = "ascending")]
    order: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    /// uni or bi
    #[arg(long)]
    direction: String,
    /// ubar | u1star | u2uniform | semicircle | random
    #[arg(long)]
    init: String,
    #[arg(long)]
    l_from: f64,
    #[arg(long)]
    l_to: f64,
    /// Number of grid points (inclusive endpoints)
    #[arg(long)]
    steps: usize,
    /// node:length, 1-based; repeatable
    #[arg(long)]
    refractory: Vec<String>,
    #[arg(long)]
    tie: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    horizon_rounds: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for independent sweep points
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write results as CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout, ignoring a closed pipe (e.g. piping into `head`).
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(s.as_bytes());
}

fn emitln(s: &str) {
    emit(s);
    emit("\n");
}

/// Error carrying the process exit code it should produce.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            error,
        }
    }

    fn of_engine(error: EngineError) -> Self {
        let code = if error.is_invariant_violation() {
            EXIT_INVARIANT
        } else if matches!(error, EngineError::Io(_)) {
            1
        } else {
            EXIT_USAGE
        };
        Self {
            code,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Critical(args) => cmd_critical(args),
        Command::Verify(args) => cmd_verify(args),
        Command::WorstCase(args) => cmd_worst_case(args),
        Command::Gamma(args) => cmd_gamma(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn parse_direction(s: &str) -> Result<Direction> {
    Direction::parse(s).ok_or_else(|| anyhow!("direction must be uni or bi, got '{s}'"))
}

fn apply_flag_overrides(spec: &mut ExperimentSpec, args: &SimulateArgs) -> Result<()> {
    if let Some(name) = &args.name {
        spec.name = name.clone();
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(d) = &args.direction {
        spec.direction = parse_direction(d)?;
    }
    if let Some(l) = args.l {
        spec.l = l;
    }
    if let Some(w) = args.w {
        spec.w = w;
    }
    if let Some(init) = &args.init {
        spec.init = InitKind::parse(init)?;
    }
    if let Some(phases) = &args.phases {
        let parsed = phases
            .split(',')
            .map(|p| p.trim().parse::<f64>().context("phase value"))
            .collect::<Result<Vec<f64>>>()?;
        spec.n = parsed.len();
        spec.init = InitKind::Explicit(parsed);
    }
    if !args.refractory.is_empty() {
        spec.refractory = args
            .refractory
            .iter()
            .map(|e| parse_refractory_entry(e))
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(tie) = &args.tie {
        spec.tie = TiePolicy::parse(tie).ok_or_else(|| anyhow!("tie must be advance or delay"))?;
    }
    if let Some(eps) = args.eps {
        spec.eps = eps;
    }
    if let Some(h) = args.horizon_rounds {
        spec.horizon_rounds = h;
    }
    if let Some(tmax) = args.max_time {
        spec.max_time = Some(tmax);
    }
    if let Some(stride) = args.record_every {
        spec.record_every = stride;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(order) = &args.cascade_order {
        spec.cascade_order = match order.as_str() {
            "ascending" => pco_core::CascadeOrder::Ascending,
            "descending" => pco_core::CascadeOrder::Descending,
            other => {
                return Err(anyhow!(
                    "cascade_order must be ascending or descending, got '{other}'"
                ))
            }
        };
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let (mut spec, file_echo) = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading spec file {}", path.display()))
                .map_err(Failure::usage)?;
            let spec = parse_spec_text(&text).map_err(Failure::usage)?;
            (spec, Some(text))
        }
        None => (ExperimentSpec::default(), None),
    };
    apply_flag_overrides(&mut spec, &args).map_err(Failure::usage)?;

    let config = build_config(&spec).map_err(Failure::usage)?;
    let outcome = run(&config).map_err(Failure::of_engine)?;

    let out_dir = args
        .out
        .clone()
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))
        .map_err(|e| Failure { code: 1, error: e })?;
    let echo = file_echo.unwrap_or_else(|| synthesize_spec_text(&spec));

    let csv_path = out_dir.join(format!("{}.trajectory.csv", spec.name));
    let mut csv = Vec::new();
    outcome
        .trajectory
        .write_csv(&mut csv)
        .map_err(Failure::of_engine)?;
    fs::write(&csv_path, csv)
        .context("writing trajectory csv")
        .map_err(|e| Failure { code: 1, error: e })?;

    let json_path = out_dir.join(format!("{}.outcome.json", spec.name));
    fs::write(&json_path, outcome.to_json(Some(&echo)))
        .context("writing outcome json")
        .map_err(|e| Failure { code: 1, error: e })?;

    emitln(&summary_line(&spec.name, &outcome, spec.expected_verdict));
    emitln(&format!(
        "wrote {} and {}",
        csv_path.display(),
        json_path.display()
    ));
    Ok(())
}

fn cmd_critical(args: CriticalArgs) -> Result<(), Failure> {
    match (&args.sweep, args.n) {
        (Some(range), _) => {
            let (lo, hi) = range
                .split_once(':')
                .ok_or_else(|| Failure::usage(anyhow!("sweep range must be lo:hi")))?;
            let lo: usize = lo
                .parse()
                .context("sweep lower bound")
                .map_err(Failure::usage)?;
            let hi: usize = hi
                .parse()
                .context("sweep upper bound")
                .map_err(Failure::usage)?;
            if lo < 4 || hi < lo {
                return Err(Failure::usage(anyhow!(
                    "sweep range needs 4 <= lo <= hi, got {lo}:{hi}"
                )));
            }
            let mut out = String::from("n,direction,l_star\n");
            for n in lo..=hi {
                for direction in [Direction::Unidirectional, Direction::Bidirectional] {
                    let l =
                        critical_coupling(n, direction).map_err(|e| Failure::usage(e.into()))?;
                    out.push_str(&format!("{n},{},{l:.16e}\n", direction.label()));
                }
            }
            match &args.out {
                Some(path) => {
                    fs::write(path, out)
                        .context("writing sweep csv")
                        .map_err(|e| Failure { code: 1, error: e })?;
                    emitln(&format!("wrote {}", path.display()));
                }
                None => emit(&out),
            }
            Ok(())
        }
        (None, Some(n)) => {
            let direction = args
                .direction
                .as_deref()
                .ok_or_else(|| Failure::usage(anyhow!("--direction required with --n")))
                .and_then(|d| parse_direction(d).map_err(Failure::usage))?;
            let l = critical_coupling(n, direction).map_err(|e| Failure::usage(e.into()))?;
            emitln(&format!("{l:.16e}"));
            Ok(())
        }
        (None, None) => Err(Failure::usage(anyhow!(
            "need --n with --direction, or --sweep"
        ))),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let report = run_suite(&args.suite, args.seed, args.trials, args.n).ok_or_else(|| {
        Failure::usage(anyhow!(
            "unknown suite '{}'; available: {}",
            args.suite,
            SUITE_NAMES.join(", ")
        ))
    })?;
    emit(&report.render());
    if report.passed() {
        emitln(&format!("{}: all checks passed", report.suite));
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFICATION,
            error: anyhow!("suite '{}' reported failures", report.suite),
        })
    }
}

fn cmd_worst_case(args: WorstCaseArgs) -> Result<(), Failure> {
    let which = match args.which.as_str() {
        "ubar" => WorstCase::BiUbar,
        "u1star" => WorstCase::UniU1star,
        "u2uniform" => WorstCase::UniU2Uniform,
        other => {
            return Err(Failure::usage(anyhow!(
                "unknown worst case '{other}' (ubar|u1star|u2uniform)"
            )))
        }
    };
    let state = worst_case_state(args.n, args.l, which).map_err(|e| Failure::usage(e.into()))?;
    let v = distance_vector(&state);
    let class = classify(&state);
    if args.json {
        let record = serde_json::json!({
            "which": args.which,
            "n": args.n,
            "l": args.l,
            "phases": state.phases(),
            "gaps": v.components(),
            "cycle_length": v.cycle_length(),
            "class": format!("{class:?}"),
        });
        emitln(&serde_json::to_string_pretty(&record).expect("serializes"));
    } else {
        emitln("phases:");
        for (i, x) in state.phases().iter().enumerate() {
            emitln(&format!("  x_{} = {x:.16e}", i + 1));
        }
        emitln("gaps:");
        for (i, g) in v.components().iter().enumerate() {
            emitln(&format!("  v_{} = {g:.16e}", i + 1));
        }
        emitln(&format!("cycle_length = {:.16e}", v.cycle_length()));
        emitln(&format!("class = {class:?}"));
    }
    Ok(())
}

fn cmd_gamma(args: GammaArgs) -> Result<(), Failure> {
    let direction = parse_direction(&args.direction).map_err(Failure::usage)?;
    let order: Vec<usize> = match args.order.as_str() {
        "ascending" => (0..args.n).collect(),
        "descending" => (0..args.n).rev().collect(),
        other => {
            return Err(Failure::usage(anyhow!(
                "order must be ascending or descending, got '{other}'"
            )))
        }
    };
    let report = pco_core::gamma_report(args.n, args.l, direction, &order)
        .map_err(|e| Failure::usage(e.into()))?;
    emit(&report);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.steps < 2 {
        return Err(Failure::usage(anyhow!("--steps must be at least 2")));
    }
    if args.jobs == 0 {
        return Err(Failure::usage(anyhow!("--jobs must be positive")));
    }
    let mut base = ExperimentSpec {
        n: args.n,
        direction: parse_direction(&args.direction).map_err(Failure::usage)?,
        init: InitKind::parse(&args.init).map_err(Failure::usage)?,
        seed: args.seed,
        ..ExperimentSpec::default()
    };
    base.record_every = 0.0;
    if !args.refractory.is_empty() {
        base.refractory = args
            .refractory
            .iter()
            .map(|e| parse_refractory_entry(e))
            .collect::<Result<Vec<_>>>()
            .map_err(Failure::usage)?;
    }
    if let Some(tie) = &args.tie {
        base.tie = TiePolicy::parse(tie)
            .ok_or_else(|| Failure::usage(anyhow!("tie must be advance or delay")))?;
    }
    if let Some(eps) = args.eps {
        base.eps = eps;
    }
    if let Some(h) = args.horizon_rounds {
        base.horizon_rounds = h;
    }

    let couplings: Vec<f64> = (0..args.steps)
        .map(|k| args.l_from + (args.l_to - args.l_from) * k as f64 / (args.steps - 1) as f64)
        .collect();

    let worker = |l: f64| -> Result<String> {
        let mut spec = base.clone();
        spec.l = l;
        let config = build_config(&spec)?;
        let outcome = run(&config)?;
        let t_sync = outcome
            .t_sync
            .map(|t| format!("{t:.16e}"))
            .unwrap_or_default();
        let detected = outcome
            .detected_round
            .map(|r| r.to_string())
            .unwrap_or_default();
        let period = outcome
            .recurrence_period
            .map(|p| p.to_string())
            .unwrap_or_default();
        Ok(format!(
            "{l:.16e},{},{t_sync},{},{},{detected},{period},{:.16e}",
            verdict_label(outcome.verdict),
            outcome.rounds,
            outcome.total_jumps,
            outcome.max_gap
        ))
    };

    let rows: Vec<Result<String>> = if args.jobs == 1 {
        couplings.iter().map(|&l| worker(l)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .context("building worker pool")
            .map_err(|e| Failure { code: 1, error: e })?;
        pool.install(|| {
            use rayon::prelude::*;
            couplings.par_iter().map(|&l| worker(l)).collect()
        })
    };

    let mut out = String::from(
        "l,verdict,t_sync,rounds,total_jumps,detected_round,recurrence_period,max_gap\n",
    );
    for row in rows {
        let row = row.map_err(|e| match e.downcast::<EngineError>() {
            Ok(engine) => Failure::of_engine(engine),
            Err(other) => Failure::usage(other),
        })?;
        out.push_str(&row);
        out.push('\n');
    }
    match &args.out {
        Some(path) => {
            fs::write(path, out)
                .context("writing sweep csv")
                .map_err(|e| Failure { code: 1, error: e })?;
            emitln(&format!("wrote {}", path.display()));
        }
        None => emit(&out),
    }
    Ok(())
}
