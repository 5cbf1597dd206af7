use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use zlab_core::pipeline::{self, RunConfig};
use zlab_core::verify::VerificationReport;

#[derive(Parser, Debug)]
#[command(name = "zlab", version, about = "Mean values of the Riemann zeta function and their error terms")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "ZLAB_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    divisor_limit: Option<u64>,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    c_step: Option<f64>,
    #[arg(long, global = true)]
    quadrature_tol: Option<f64>,
    /// Zeta grid points between checkpoints.
    #[arg(long, global = true)]
    checkpoint_every: Option<usize>,
    /// Verification suite: identities, main-terms or all.
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sieve the divisor function and its prefix sums.
    Sieve,
    /// Sample |zeta(1/2+it)|^2 on [0, t_max], checkpointing as it goes.
    Grid {
        /// Stop after evaluating this many new points; rerun to resume.
        #[arg(long)]
        max_points: Option<usize>,
    },
    /// Integrate E, E*, R and E1 over the zeta grid.
    ErrorTerms {
        /// Also write error_terms.csv.
        #[arg(long)]
        csv: bool,
    },
    /// Run the configured moment scan into moments.csv.
    Moments,
    /// Run a verification suite and write report.csv and report.json.
    Verify,
    /// Write plot.csv with E, E* and R against t.
    ExportPlot {
        /// Keep every n-th grid node.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// sieve, grid, error-terms, moments and verify in sequence.
    Run,
    /// Print the effective configuration as TOML.
    InitConfig,
}

impl Cli {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.divisor_limit {
            cfg.divisor_limit = Some(v);
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.c_step {
            cfg.c_step = v;
        }
        if let Some(v) = self.quadrature_tol {
            cfg.quadrature_tol = v;
        }
        if let Some(v) = self.checkpoint_every {
            cfg.checkpoint_every = v;
        }
        if let Some(v) = &self.suite {
            cfg.suite = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.verify.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(report: &VerificationReport) -> ExitCode {
    for c in &report.checks {
        println!("{:<11} {:<36} {:>14.6e}", c.status.as_str(), c.name, c.measured);
    }
    let failures = report.failures().count();
    println!("{} checks, {failures} failed", report.checks.len());
    ExitCode::from(report.exit_code() as u8)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let cfg = cli.config()?;
    let path = match &cli.command {
        Command::Sieve => pipeline::cmd_sieve(&cfg)?,
        Command::Grid { max_points } => {
            let p = pipeline::cmd_grid_budget(&cfg, max_points.unwrap_or(usize::MAX))?;
            if !p.is_complete() {
                println!("{}/{} points, checkpoint at {}", p.points_done, p.points_total, p.path.display());
                return Ok(ExitCode::SUCCESS);
            }
            p.path
        }
        Command::ErrorTerms { csv } => pipeline::cmd_error_terms(&cfg, *csv)?,
        Command::Moments => pipeline::cmd_moments(&cfg)?,
        Command::ExportPlot { stride } => pipeline::cmd_export_plot(&cfg, (*stride).max(1))?,
        Command::Verify => return Ok(summarize(&pipeline::cmd_verify(&cfg)?)),
        Command::Run => return Ok(summarize(&pipeline::run_all(&cfg)?)),
        Command::InitConfig => {
            print!("{}", cfg.to_toml_string());
            return Ok(ExitCode::SUCCESS);
        }
    };
    println!("{}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
