use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod csv;
mod report;
mod verify;

use config::{Overrides, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("verification failed: first failing fixture is {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 1,
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Verification(_) => 4,
        }
    }
}

/// Two-patch SIS epidemic with saturating migration corridors.
#[derive(Debug, Parser)]
#[command(name = "metaepi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate from the initial state; writes trajectory.csv and report.json.
    Simulate(RunArgs),
    /// Closed-form catalog plus Newton search, each point classified; writes report.json.
    Equilibria(RunArgs),
    /// Hopf scan along the [scan] path; writes scan.csv and report.json.
    Scan(RunArgs),
    /// Run the built-in fixture suite.
    Verify,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    tol_abs: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Comma-separated per-component seed values, e.g. `0.5,1.5,5`.
    #[arg(long, value_delimiter = ',')]
    seed_grid: Option<Vec<f64>>,
}

impl RunArgs {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let mut config = ScenarioConfig::load(&self.config)?;
        config.apply(&Overrides {
            rtol: self.tol_rel,
            atol: self.tol_abs,
            t_end: self.t_end,
            seed_grid: self.seed_grid.clone(),
        });
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, report) = match &cli.command {
        Command::Verify => return verify::run(),
        Command::Simulate(args) => (args, commands::simulate(&args.load()?, &args.out)?),
        Command::Equilibria(args) => (args, commands::equilibria(&args.load()?)?),
        Command::Scan(args) => (args, commands::scan(&args.load()?, &args.out)?),
    };
    let path = args.out.join("report.json");
    report.write(&path)?;
    println!("{}", summary(&report));
    println!("report: {}", path.display());
    Ok(())
}

fn point(x: &metaepi::State) -> String {
    x.to_array().map(csv::num).join(", ")
}

fn summary(report: &report::RunReport) -> String {
    if let Some(t) = &report.trajectory {
        let s = &t.final_state;
        let state = match (&t.converged_to, t.oscillation.oscillating) {
            (Some(e), _) => format!("converged, {:?}", e.verdict()),
            (None, true) => "oscillating".to_string(),
            (None, false) => "not converged".to_string(),
        };
        return format!("t = {}: ({}), {state}", csv::num(t.t_end), point(s));
    }
    if let Some(e) = &report.equilibria {
        let lines: Vec<String> = e
            .closed_form
            .iter()
            .chain(&e.numeric)
            .map(|x| {
                format!(
                    "{:?} ({}) feasible={} {:?}",
                    x.equilibrium.identity,
                    point(&x.equilibrium.point),
                    x.equilibrium.feasible,
                    x.verdict()
                )
            })
            .collect();
        return lines.join("\n");
    }
    if let Some(s) = &report.scan {
        let crossings: Vec<String> = s
            .crossings
            .iter()
            .map(|c| format!("{:?} crossing at {} (agreement {})", c.channel, c.value, c.agreement))
            .collect();
        return format!(
            "{} points, {} gaps, {} crossings\n{}",
            s.points,
            s.gaps.len(),
            s.crossings.len(),
            crossings.join("\n")
        );
    }
    String::new()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metaepi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
