//! Batch front-end for `invman-core`: hypothesis checks, manifolds, parameter
//! regions and plot data as `#`-headed text tables.
//!
//! Exit codes: 0 success, 2 configuration error, 3 hypothesis failure,
//! 4 numeric failure.

pub mod commands;
pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{
    cmd_audit, cmd_check, cmd_counterexample, cmd_manifold, cmd_persist, cmd_plotdata, cmd_region,
    intersect_persistence, NodeIntersection,
};
pub use config::{Command, Format, Method, RunConfig};
pub use report::{CommandOutput, Status, Table};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "INVMAN_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl From<invman_core::Error> for CliError {
    fn from(e: invman_core::Error) -> Self {
        use invman_core::Error as E;
        match e {
            E::UnknownSystem(_) | E::ParameterRange { .. } | E::InvalidInput(_) | E::Parse(_) | E::UnboundedA(_) => {
                CliError::Config(e.to_string())
            }
            E::Precondition(_) | E::StandingAssumption(_) | E::Infeasible(_) => CliError::Hypothesis(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

/// Sizes the global worker pool from [`WORKERS_ENV`] when it is set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("{WORKERS_ENV}={v} is not a count")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{WORKERS_ENV} must be at least 1")));
    }
    // a pool that already exists (tests, repeated calls) is left alone
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the configured command.
pub fn execute(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    cfg.validate()?;
    let cmd = cfg.command.ok_or_else(|| CliError::Config("no command given".into()))?;
    match cmd {
        Command::Check => cmd_check(cfg),
        Command::Region => cmd_region(cfg),
        Command::Manifold => cmd_manifold(cfg),
        Command::Audit => cmd_audit(cfg),
        Command::Counterexample => cmd_counterexample(cfg),
        Command::Persist => cmd_persist(cfg),
        Command::Plotdata => cmd_plotdata(cfg),
    }
}

/// Executes and writes the result: the payload (or the full report when there
/// is none) goes to `cfg.output` if set, the report to the returned string.
/// Returns the text for stdout and the exit code.
pub fn run(cfg: &RunConfig) -> (String, i32) {
    match execute(cfg) {
        Ok(out) => {
            let format = cfg.format();
            let code = if out.status == Status::Pass { 0 } else { 3 };
            let text = match &cfg.output {
                Some(path) => {
                    let body = out.payload.clone().unwrap_or_else(|| out.render(format, false));
                    if let Err(e) = std::fs::write(path, body) {
                        let err = CliError::Config(format!("{}: {e}", path.display()));
                        return (format!("# error: {err}\n"), err.exit_code());
                    }
                    out.render(format, false)
                }
                None => out.render(format, true),
            };
            (text, code)
        }
        Err(e) => {
            let cmd = cfg.command.map_or("none", Command::name);
            (format!("# error: {e}\n# summary command={cmd} status=error exit={}\n", e.exit_code()), e.exit_code())
        }
    }
}

/// Command-line flags; every flag overrides the matching config-file field.
#[derive(Debug, Parser)]
#[command(name = "invman", version, about = "Invariant-manifold checks and computations")]
pub struct Cli {
    /// Subcommand (may instead come from the config file).
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub system: Option<String>,
    /// System parameter, repeatable: `--param beta=1.0`.
    #[arg(long = "param", short, value_parser = parse_kv)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub density: Option<usize>,
    /// Grid intervals per z-axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub intervals: Option<Vec<usize>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Orders for `region`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<u32>>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_probe: Option<f64>,
    /// `persist`: intersect the forward and backward graphs.
    #[arg(long)]
    pub intersect: bool,
    /// `plotdata`: β sweep bounds `LO,HI`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub beta_range: Option<Vec<f64>>,
    #[arg(long)]
    pub beta_steps: Option<usize>,
    /// `plotdata`: ω values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub omegas: Option<Vec<f64>>,
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl Cli {
    /// Config file (if any) overlaid with the flags.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            command: self.command,
            system: self.system,
            params: self.params.into_iter().collect::<BTreeMap<_, _>>(),
            density: self.density,
            intervals: self.intervals,
            tol: self.tol,
            output: self.output,
            format: self.format,
            orders: self.orders,
            resolution: self.resolution,
            method: self.method,
            pairs: self.pairs,
            seed: self.seed,
            t_probe: self.t_probe,
            intersect: self.intersect.then_some(true),
            beta_range: self.beta_range.map(|v| (v[0], v[1])),
            beta_steps: self.beta_steps,
            omegas: self.omegas,
        };
        Ok(base.overlay(flags))
    }
}

/// Parses `args`, runs, and returns stdout text with the exit code.
pub fn main_with_args<I, S>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (e.to_string(), code);
        }
    };
    if let Err(e) = init_workers() {
        return (format!("# error: {e}\n"), e.exit_code());
    }
    match cli.into_config() {
        Ok(cfg) => run(&cfg),
        Err(e) => (format!("# error: {e}\n"), e.exit_code()),
    }
}
