//! Scenario-driven front end for `impulse-attain`.
//!
//! The binary `attain` reads a scenario file, runs one computation and
//! writes JSON, CSV or SVG. Exit status: 0 on success, 1 on a failed
//! `check` or an I/O problem, 2 on invalid input, 3 on numerical failure.

pub mod check;
pub mod scenario;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use impulse_attain::attainability::{relaxed_reach, short_impulse_mp, universal_mp, ReachConfig, Relaxation};
use impulse_attain::dynamics::trajectory_eval;
use impulse_attain::geometry::{round_sig, PlanarSet};
use impulse_attain::{Error, FAMeasure, Rat};
use serde_json::{json, Value};

use crate::scenario::Scenario;
use crate::svg::{write_svg, SvgStyle};

/// Significant digits of every float written by the CLI.
pub const DIGITS: usize = 12;
pub const DEFAULT_DIRECTIONS: usize = 360;
pub const DEFAULT_T_GRID: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "attain", version, about = "Reachable and attraction sets of impulse-controlled systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reachable set under ε-relaxed constraints on a uniform control mesh.
    Reach(Opts),
    /// Attraction set of generalized controls.
    Mp(Opts),
    /// Attraction set under the short-impulse constraint family (exact).
    ShortImpulse(Opts),
    /// CSV trajectory of a generalized control.
    Traj(Opts),
    /// Run the library invariant suites on the scenario.
    Check(Opts),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RelaxationArg {
    Full,
    Partial,
}

#[derive(Clone, Debug, Args)]
pub struct Opts {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub mesh: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long = "t-grid")]
    pub t_grid: Option<usize>,
    /// Measure file for `traj`.
    #[arg(long)]
    pub measure: Option<PathBuf>,
    /// Number of equally spaced trajectory samples.
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `partial` keeps the scenario's J coordinates exact.
    #[arg(long, value_enum, default_value_t = RelaxationArg::Full)]
    pub relaxation: RelaxationArg,
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(String),
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_validation() => 2,
            CliError::Lib(_) => 3,
            CliError::Io(_) | CliError::CheckFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::CheckFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Reach(o) => reach(&o),
        Command::Mp(o) => mp(&o),
        Command::ShortImpulse(o) => short_impulse(&o),
        Command::Traj(o) => traj(&o),
        Command::Check(o) => check::run_checks(&o),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn emit_json(out: Option<&Path>, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

fn set_json(set: &PlanarSet<f64>) -> Value {
    serde_json::to_value(set.rounded(DIGITS)).expect("planar sets serialize")
}

fn maybe_svg(opts: &Opts, set: &PlanarSet<f64>) -> CliResult<()> {
    if let Some(path) = &opts.svg {
        write_svg(&set.rounded(DIGITS), &SvgStyle::default(), path)?;
    }
    Ok(())
}

pub(crate) fn reach_config(opts: &Opts, sc: &Scenario) -> CliResult<ReachConfig> {
    let mesh = opts
        .mesh
        .or(sc.params.mesh)
        .ok_or_else(|| Error::Invalid("no mesh given (flag --mesh or scenario `mesh`)".into()))?;
    let epsilon = opts
        .epsilon
        .or(sc.params.epsilon)
        .ok_or_else(|| Error::Invalid("no epsilon given (flag --epsilon or scenario `epsilon`)".into()))?;
    let relaxation = match opts.relaxation {
        RelaxationArg::Full => Relaxation::Full,
        RelaxationArg::Partial => Relaxation::Partial(sc.constraints.exact().to_vec()),
    };
    let cfg = ReachConfig { mesh, epsilon, directions: directions(opts, sc), relaxation, seed: opts.seed };
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn directions(opts: &Opts, sc: &Scenario) -> usize {
    opts.directions.or(sc.params.directions).unwrap_or(DEFAULT_DIRECTIONS)
}

pub(crate) fn t_grid(opts: &Opts, sc: &Scenario) -> usize {
    opts.t_grid.or(sc.params.t_grid).unwrap_or(DEFAULT_T_GRID)
}

fn reach(opts: &Opts) -> CliResult<()> {
    let sc = Scenario::load(&opts.scenario)?;
    let cfg = reach_config(opts, &sc)?;
    let set = relaxed_reach(&sc.system, &sc.constraints, &cfg)?;
    maybe_svg(opts, &set)?;
    emit_json(
        opts.out.as_deref(),
        &json!({
            "command": "reach",
            "mesh": cfg.mesh,
            "epsilon": cfg.epsilon,
            "directions": cfg.directions,
            "relaxation": match opts.relaxation { RelaxationArg::Full => "full", RelaxationArg::Partial => "partial" },
            "feasible": !set.is_empty(),
            "set": set_json(&set),
        }),
    )
}

fn mp(opts: &Opts) -> CliResult<()> {
    let sc = Scenario::load(&opts.scenario)?;
    let (grid, dirs) = (t_grid(opts, &sc), directions(opts, &sc));
    let set = universal_mp(&sc.system, &sc.constraints, grid, dirs)?;
    maybe_svg(opts, &set)?;
    emit_json(
        opts.out.as_deref(),
        &json!({
            "command": "mp",
            "t_grid": grid,
            "directions": dirs,
            "feasible": !set.is_empty(),
            "set": set_json(&set),
        }),
    )
}

fn short_impulse(opts: &Opts) -> CliResult<()> {
    let sc = Scenario::load(&opts.scenario)?;
    let set = short_impulse_mp(&sc.system)?;
    maybe_svg(opts, &set.to_f64())?;
    let exact = serde_json::to_value(&set).expect("planar sets serialize");
    emit_json(opts.out.as_deref(), &json!({ "command": "short-impulse", "set": exact }))
}

fn traj(opts: &Opts) -> CliResult<()> {
    let sc = Scenario::load(&opts.scenario)?;
    let path = opts.measure.as_ref().ok_or_else(|| Error::Invalid("traj needs --measure".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mu: FAMeasure<Rat> = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if opts.samples < 2 {
        return Err(Error::Invalid("traj needs at least two samples".into()).into());
    }
    let (t0, theta0) = (sc.system.t0(), sc.system.theta0());
    let last = (opts.samples - 1) as i64;
    let mut csv = String::from("t,x1,x2\n");
    for k in 0..=last {
        let t = t0 + &((theta0 - t0) * Rat::new(k, last));
        let [x1, x2] = trajectory_eval(&mu, &t, &sc.system)?;
        let f = |x: f64| round_sig(x, DIGITS);
        csv.push_str(&format!("{},{},{}\n", f(t.to_f64()), f(x1.to_f64()), f(x2.to_f64())));
    }
    emit(opts.out.as_deref(), &csv)
}
