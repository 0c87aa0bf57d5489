//! `fracdiff`: forward solves, maximum-principle checks and source
//! inversion for the time-fractional diffusion equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{
    CheckConfig, CounterexampleConfig, EigenKind, GreenConfig, InvertConfig, Method, MlConfig, Principle,
    ProblemConfig, RegChoice, SolveConfig,
};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(fracdiff_core::Error),
    Io(String),
}

impl From<fracdiff_core::Error> for CliError {
    fn from(e: fracdiff_core::Error) -> Self {
        use fracdiff_core::Error::*;
        match e {
            InvalidParameter(_) | GridMismatch { .. } => CliError::Config(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "fracdiff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    show_config: bool,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    eigensystem: Option<String>,
    /// Output file.
    #[arg(long, short)]
    output: Option<String>,
}

impl ProblemArgs {
    fn apply(&self, p: &mut ProblemConfig, output: &mut String) -> Result<(), CliError> {
        set(&mut p.alpha, self.alpha);
        set(&mut p.length, self.length);
        set(&mut p.nx, self.nx);
        set(&mut p.t_final, self.t_final);
        set(&mut p.steps, self.steps);
        if self.modes.is_some() {
            p.modes = self.modes;
        }
        if let Some(e) = &self.eigensystem {
            p.eigensystem = parse_enum::<EigenKind>(e, "eigensystem")?;
        }
        set(output, self.output.clone());
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Mittag-Leffler function E_{α,β}(z).
    Ml {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        z: Option<f64>,
        /// lo:hi:n
        #[arg(long, allow_hyphen_values = true)]
        z_grid: Option<String>,
    },
    /// Solve the forward problem and write u(x, t) as CSV.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// spectral, duhamel or l1
        #[arg(long)]
        method: Option<String>,
    },
    /// Sample the truncated Green function and scan its sign.
    Green {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Check a maximum principle, positivity or zero sets.
    Check {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// weak, strict, zero_set or green
        #[arg(long)]
        principle: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Recover ρ(t) from a single-point trace.
    Invert {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        noise_level: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// none, auto or a fixed weight
        #[arg(long)]
        regularization: Option<String>,
        #[arg(long)]
        zero_data: bool,
    },
    /// Source with g = sin(2πx/L) observed at x = L/2.
    Counterexample {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        problem: ProblemArgs,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn parse_enum<T: DeserializeOwned>(s: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Config(format!("unknown {what} {s:?}")))
}

fn load<T: DeserializeOwned + Default>(args: &ConfigArgs) -> Result<T, CliError> {
    match &args.config {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

fn show<T: Serialize>(cfg: &T) -> Result<Option<serde_json::Value>, CliError> {
    println!("{}", serde_json::to_string_pretty(cfg).expect("config serializes"));
    Ok(None)
}

fn run(cli: Cli) -> Result<Option<serde_json::Value>, CliError> {
    match cli.command {
        Command::Ml {
            cfg,
            alpha,
            beta,
            z,
            z_grid,
        } => {
            let mut c: MlConfig = load(&cfg)?;
            set(&mut c.alpha, alpha);
            set(&mut c.beta, beta);
            if z.is_some() {
                c.z = z;
                c.z_grid = None;
            }
            if z_grid.is_some() {
                c.z_grid = z_grid;
            }
            if cfg.show_config {
                return show(&c);
            }
            commands::ml(&c)
        }
        Command::Solve { cfg, problem, method } => {
            let mut c: SolveConfig = load(&cfg)?;
            problem.apply(&mut c.problem, &mut c.output)?;
            if let Some(m) = method {
                c.method = parse_enum::<Method>(&m, "method")?;
            }
            if cfg.show_config {
                return show(&c);
            }
            commands::solve(&c)
        }
        Command::Green { cfg, problem, x } => {
            let mut c: GreenConfig = load(&cfg)?;
            problem.apply(&mut c.problem, &mut c.output)?;
            set(&mut c.x, x);
            if cfg.show_config {
                return show(&c);
            }
            commands::green(&c)
        }
        Command::Check {
            cfg,
            problem,
            principle,
            tolerance,
        } => {
            let mut c: CheckConfig = load(&cfg)?;
            problem.apply(&mut c.problem, &mut c.output)?;
            if let Some(p) = principle {
                c.principle = parse_enum::<Principle>(&p.replace('-', "_"), "principle")?;
            }
            set(&mut c.tolerance, tolerance);
            if cfg.show_config {
                return show(&c);
            }
            commands::check(&c)
        }
        Command::Invert {
            cfg,
            problem,
            x0,
            noise_level,
            seed,
            regularization,
            zero_data,
        } => {
            let mut c: InvertConfig = load(&cfg)?;
            problem.apply(&mut c.problem, &mut c.output)?;
            set(&mut c.x0, x0);
            set(&mut c.noise_level, noise_level);
            set(&mut c.seed, seed);
            if let Some(r) = regularization {
                c.regularization = match r.parse::<f64>() {
                    Ok(w) => RegChoice::Weight(w),
                    Err(_) => RegChoice::Named(r),
                };
            }
            c.zero_data |= zero_data;
            if cfg.show_config {
                return show(&c);
            }
            commands::invert(&c)
        }
        Command::Counterexample { cfg, problem } => {
            let mut c: CounterexampleConfig = load(&cfg)?;
            problem.apply(&mut c.problem, &mut c.output)?;
            if cfg.show_config {
                return show(&c);
            }
            commands::counterexample(&c)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(summary)) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
