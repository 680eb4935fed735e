//! Command-line front end: `run`, `sweep` and `bench`.

pub mod bench;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::policies::{PolicyKind, PolicySpec};
use crate::sim::{run_ensemble, sweep_cells, ExperimentConfig};
use config::RawConfig;

#[derive(Debug, Parser)]
#[command(name = "efe-bandits", version, about = "Active inference vs Bayesian bandit agents on Bernoulli bandits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one ensemble and write its trajectory, finals and summary files.
    Run(RunArgs),
    /// Run every cell of a parameter grid (`sweep.<key> = ...` lines in the config).
    Sweep(RunArgs),
    /// Time per-decision cost of each policy.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat key = value config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// stationary, switching_fixed or switching_resample.
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long = "K")]
    pub arms: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    /// aai, gai, bucb, ots, ts, ucb or random.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long = "T")]
    pub horizon: Option<String>,
    #[arg(long = "N")]
    pub runs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// every_trial or log_spaced.
    #[arg(long)]
    pub granularity: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Output file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated policies.
    #[arg(long, default_value = "ucb,bucb,ts,ots,gai,aai")]
    pub policies: String,
    /// Comma-separated arm counts.
    #[arg(long = "K", default_value = "10,20,40,80")]
    pub arms: String,
    #[arg(long = "T", default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl RunArgs {
    pub fn raw_config(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::read(path)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("env", &self.env),
            ("K", &self.arms),
            ("eps", &self.eps),
            ("rho", &self.rho),
            ("policy", &self.policy),
            ("lambda", &self.lambda),
            ("T", &self.horizon),
            ("N", &self.runs),
            ("seed", &self.seed),
            ("granularity", &self.granularity),
            ("name", &self.name),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        Ok(raw)
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// File stem describing a configuration.
pub fn cell_name(cfg: &ExperimentConfig) -> String {
    let mut name = format!(
        "{}_{}_K{}_eps{}",
        cfg.policy.kind.name(),
        cfg.env.mode.name(),
        cfg.env.arms,
        cfg.env.epsilon
    );
    if cfg.env.rho > 0.0 {
        name.push_str(&format!("_rho{}", cfg.env.rho));
    }
    if cfg.policy.kind.uses_lambda() {
        name.push_str(&format!("_lambda{:.4}", cfg.policy.lambda));
    }
    name.push_str(&format!("_T{}_seed{}", cfg.horizon, cfg.master_seed));
    name
}

pub fn cmd_run(args: &RunArgs) -> Result<output::BundlePaths> {
    let raw = args.raw_config()?;
    let cfg = raw.experiment()?;
    let name = raw.name().map(str::to_string).unwrap_or_else(|| cell_name(&cfg));
    let started = unix_now();
    let clock = Instant::now();
    let summary = run_ensemble(&cfg)?;
    let paths = output::write_bundle(&summary, &args.out, &name)?;
    output::write_timing(&args.out, &name, started, clock.elapsed().as_secs_f64())?;
    Ok(paths)
}

/// Resolved sweep cells. Unless lambda was given, each cell takes the
/// default precision for its own policy.
pub fn sweep_configs(raw: &RawConfig) -> Result<Vec<ExperimentConfig>> {
    let grid = raw.grid()?;
    let base = raw.experiment()?;
    let mut cells = sweep_cells(&base, &grid)?;
    if !raw.lambda_explicit() {
        for cell in &mut cells {
            cell.policy.lambda = PolicySpec::default_lambda(cell.policy.kind, cell.env.mode);
        }
    }
    Ok(cells)
}

pub fn cmd_sweep(args: &RunArgs) -> Result<PathBuf> {
    let raw = args.raw_config()?;
    // Every cell is validated before any of them runs.
    let cells = sweep_configs(&raw)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    let mut index = String::from(
        "cell_index,policy,env,K,eps,rho,lambda,T,N,seed,final_mean_regret_rate,final_mean_cum_regret,trajectory\n",
    );
    for cfg in &cells {
        let name = format!("cell{:04}_{}", cfg.cell_index, cell_name(cfg));
        let started = unix_now();
        let clock = Instant::now();
        let summary = run_ensemble(cfg)?;
        let paths = output::write_bundle(&summary, &args.out, &name)?;
        output::write_timing(&args.out, &name, started, clock.elapsed().as_secs_f64())?;
        index.push_str(&format!(
            "{},{},{},{},{:?},{:?},{:?},{},{},{},{},{},{}\n",
            cfg.cell_index,
            cfg.policy.kind.name(),
            cfg.env.mode.name(),
            cfg.env.arms,
            cfg.env.epsilon,
            cfg.env.rho,
            cfg.policy.lambda,
            cfg.horizon,
            cfg.runs,
            cfg.master_seed,
            output::fmt_sig(summary.final_rate().mean),
            output::fmt_sig(summary.final_cumulative().mean),
            file_name(&paths.trajectory),
        ));
    }
    let index_path = args.out.join("index.csv");
    std::fs::write(&index_path, index)
        .map_err(|e| Error::Usage(format!("cannot write {}: {e}", index_path.display())))?;
    Ok(index_path)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String> {
    let kinds = args
        .policies
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PolicyKind::parse)
        .collect::<Result<Vec<_>>>()?;
    let arms = args
        .arms
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::Config(format!("K: cannot parse '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    let rows = bench::run_bench(&kinds, &arms, args.horizon, args.reps, args.seed)?;
    Ok(bench::format_table(&rows))
}

/// Runs the parsed command, printing what it produced.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let paths = cmd_run(args)?;
            println!("wrote {}", paths.trajectory.display());
            println!("wrote {}", paths.finals.display());
            println!("wrote {}", paths.summary.display());
        }
        Command::Sweep(args) => {
            let index = cmd_sweep(args)?;
            println!("wrote {}", index.display());
        }
        Command::Bench(args) => print!("{}", cmd_bench(args)?),
    }
    Ok(())
}
