//! Seeded episode runner, ensemble executor and parameter sweeps.
//!
//! Each run owns two streams derived from `(master_seed, cell, run_index)`,
//! one for the environment and one for the agent. Runs are mapped in
//! parallel (with the `parallel` feature) into a run-indexed buffer and then
//! reduced serially in index order, so summaries never depend on the number
//! of worker threads.

use crate::envs::{EnvConfig, EnvState, StepInfo};
use crate::error::{ensure, Result};
use crate::metrics::{mean_ci, MeanCi, RegretTrace};
use crate::policies::{Agent, Policy, PolicyKind, PolicySpec};
use crate::specfun::{RngStream, Role};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Granularity {
    EveryTrial,
    /// Powers of two and of ten up to the horizon, plus the horizon itself.
    LogSpaced,
}

impl Granularity {
    pub fn name(&self) -> &'static str {
        match self {
            Granularity::EveryTrial => "every_trial",
            Granularity::LogSpaced => "log_spaced",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "every_trial" => Ok(Granularity::EveryTrial),
            "log_spaced" => Ok(Granularity::LogSpaced),
            other => Err(crate::Error::Config(format!("unknown record granularity '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub runs: usize,
    pub master_seed: u64,
    pub granularity: Granularity,
    /// Sweep cell this configuration belongs to; 0 outside sweeps.
    pub cell_index: u64,
}

impl ExperimentConfig {
    pub fn new(env: EnvConfig, policy: PolicySpec, horizon: u64, runs: usize, master_seed: u64) -> Self {
        Self { env, policy, horizon, runs, master_seed, granularity: Granularity::LogSpaced, cell_index: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        PolicySpec::new(self.policy.kind, self.policy.lambda)?;
        ensure!(self.horizon >= 1, Config, "horizon T must be at least 1");
        ensure!(self.runs >= 1, Config, "ensemble size N must be at least 1");
        Ok(())
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        checkpoints(self.horizon, &self.granularity)
    }

    fn streams(&self, run_index: u64) -> (RngStream, RngStream) {
        (
            RngStream::new(self.master_seed, self.cell_index, run_index, Role::Env),
            RngStream::new(self.master_seed, self.cell_index, run_index, Role::Agent),
        )
    }
}

pub fn checkpoints(horizon: u64, granularity: &Granularity) -> Vec<u64> {
    match granularity {
        Granularity::EveryTrial => (1..=horizon).collect(),
        Granularity::LogSpaced => {
            let mut points = Vec::new();
            let mut p = 1u64;
            while p <= horizon {
                points.push(p);
                p *= 2;
            }
            let mut p = 10u64;
            while p <= horizon {
                points.push(p);
                p *= 10;
            }
            points.push(horizon);
            points.sort_unstable();
            points.dedup();
            points
        }
    }
}

/// Full per-trial record of one episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub actions: Vec<usize>,
    pub outcomes: Vec<u8>,
    pub theta_star: Vec<f64>,
    pub theta_chosen: Vec<f64>,
    pub switched: Vec<bool>,
    pub regret: RegretTrace,
}

/// Drives `policy` against a fresh environment for the configured horizon,
/// calling `record` after every trial.
pub fn play<P, F>(cfg: &ExperimentConfig, run_index: u64, policy: &mut P, mut record: F) -> Result<()>
where
    P: Policy + ?Sized,
    F: FnMut(u64, usize, &StepInfo),
{
    let (mut env_rng, mut agent_rng) = cfg.streams(run_index);
    let mut env = EnvState::new(cfg.env, &mut env_rng)?;
    for t in 1..=cfg.horizon {
        let action = policy.choose(&mut agent_rng)?;
        let info = env.step(action, &mut env_rng)?;
        policy.observe(action, info.outcome)?;
        record(t, action, &info);
    }
    Ok(())
}

fn make_agent(cfg: &ExperimentConfig) -> Result<Agent> {
    Agent::new(cfg.policy, cfg.env.arms, cfg.env.rho)
}

/// Environment as initialised for `run_index`, before any trial.
pub fn initial_env(cfg: &ExperimentConfig, run_index: u64) -> Result<EnvState> {
    let (mut env_rng, _) = cfg.streams(run_index);
    EnvState::new(cfg.env, &mut env_rng)
}

pub fn run_episode(cfg: &ExperimentConfig, run_index: u64) -> Result<RunTrace> {
    cfg.validate()?;
    let mut agent = make_agent(cfg)?;
    run_episode_with(cfg, run_index, &mut agent)
}

pub fn run_episode_with<P: Policy + ?Sized>(
    cfg: &ExperimentConfig,
    run_index: u64,
    policy: &mut P,
) -> Result<RunTrace> {
    let n = cfg.horizon as usize;
    let mut trace = RunTrace {
        actions: Vec::with_capacity(n),
        outcomes: Vec::with_capacity(n),
        theta_star: Vec::with_capacity(n),
        theta_chosen: Vec::with_capacity(n),
        switched: Vec::with_capacity(n),
        regret: RegretTrace::with_capacity(n),
    };
    play(cfg, run_index, policy, |_, action, info| {
        trace.actions.push(action);
        trace.outcomes.push(info.outcome);
        trace.theta_star.push(info.theta_star);
        trace.theta_chosen.push(info.theta_chosen);
        trace.switched.push(info.switched);
        trace.regret.push(info.theta_star, info.theta_chosen);
    })?;
    Ok(trace)
}

/// Cumulative regret of one run at each checkpoint.
fn run_checkpointed(cfg: &ExperimentConfig, run_index: u64, points: &[u64]) -> Result<Vec<f64>> {
    let mut agent = make_agent(cfg)?;
    let mut out = Vec::with_capacity(points.len());
    let mut next = 0usize;
    let mut total = 0.0f64;
    play(cfg, run_index, &mut agent, |t, _, info| {
        total += info.theta_star - info.theta_chosen;
        if next < points.len() && points[next] == t {
            out.push(total);
            next += 1;
        }
    })?;
    Ok(out)
}

/// Ensemble mean with an optional 95% interval (absent when N = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci: Option<(f64, f64)>,
}

impl Estimate {
    fn from_samples(samples: &[f64]) -> Self {
        match mean_ci(samples) {
            Ok(MeanCi { mean, low, high }) => Estimate { mean, ci: Some((low, high)) },
            Err(_) => Estimate { mean: samples[0], ci: None },
        }
    }

    pub fn as_mean_ci(&self) -> Option<MeanCi> {
        self.ci.map(|(low, high)| MeanCi { mean: self.mean, low, high })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub config: ExperimentConfig,
    pub checkpoints: Vec<u64>,
    pub regret_rate: Vec<Estimate>,
    pub cumulative_regret: Vec<Estimate>,
    /// Cumulative regret at the horizon, indexed by run.
    pub final_regret: Vec<f64>,
    /// Set when N = 1 and no interval can be formed.
    pub degenerate_ci: bool,
}

impl EnsembleSummary {
    /// Estimates at checkpoint `t`, if `t` is one.
    pub fn at(&self, t: u64) -> Option<(Estimate, Estimate)> {
        let i = self.checkpoints.iter().position(|&c| c == t)?;
        Some((self.regret_rate[i], self.cumulative_regret[i]))
    }

    pub fn final_rate(&self) -> Estimate {
        *self.regret_rate.last().expect("at least one checkpoint")
    }

    pub fn final_cumulative(&self) -> Estimate {
        *self.cumulative_regret.last().expect("at least one checkpoint")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Rayon's current pool; serial when built without `parallel`.
    Parallel,
}

pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleSummary> {
    run_ensemble_with(cfg, Execution::Parallel)
}

pub fn run_ensemble_with(cfg: &ExperimentConfig, exec: Execution) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let points = cfg.checkpoints();
    let per_run = map_runs(cfg.runs, exec, |i| run_checkpointed(cfg, i as u64, &points))?;
    Ok(summarise(cfg, points, &per_run))
}

fn map_runs<T, F>(runs: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..runs).into_par_iter().map(f).collect()
        }
        _ => (0..runs).map(f).collect(),
    }
}

fn summarise(cfg: &ExperimentConfig, points: Vec<u64>, per_run: &[Vec<f64>]) -> EnsembleSummary {
    let mut regret_rate = Vec::with_capacity(points.len());
    let mut cumulative_regret = Vec::with_capacity(points.len());
    let mut column = vec![0.0; per_run.len()];
    let mut rates = vec![0.0; per_run.len()];
    for (j, &t) in points.iter().enumerate() {
        for (i, run) in per_run.iter().enumerate() {
            column[i] = run[j];
            rates[i] = run[j] / t as f64;
        }
        cumulative_regret.push(Estimate::from_samples(&column));
        regret_rate.push(Estimate::from_samples(&rates));
    }
    let final_regret = per_run.iter().map(|r| *r.last().expect("horizon checkpoint")).collect();
    EnsembleSummary {
        config: cfg.clone(),
        checkpoints: points,
        regret_rate,
        cumulative_regret,
        final_regret,
        degenerate_ci: per_run.len() < 2,
    }
}

/// One axis of a sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Arms(Vec<usize>),
    Epsilon(Vec<f64>),
    Rho(Vec<f64>),
    Lambda(Vec<f64>),
    Policy(Vec<PolicyKind>),
    Horizon(Vec<u64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Arms(_) => "K",
            SweepAxis::Epsilon(_) => "epsilon",
            SweepAxis::Rho(_) => "rho",
            SweepAxis::Lambda(_) => "lambda",
            SweepAxis::Policy(_) => "policy",
            SweepAxis::Horizon(_) => "T",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Arms(v) => v.len(),
            SweepAxis::Epsilon(v) | SweepAxis::Rho(v) | SweepAxis::Lambda(v) => v.len(),
            SweepAxis::Policy(v) => v.len(),
            SweepAxis::Horizon(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, i: usize, cfg: &mut ExperimentConfig) {
        match self {
            SweepAxis::Arms(v) => cfg.env.arms = v[i],
            SweepAxis::Epsilon(v) => cfg.env.epsilon = v[i],
            SweepAxis::Rho(v) => cfg.env.rho = v[i],
            SweepAxis::Lambda(v) => cfg.policy.lambda = v[i],
            SweepAxis::Policy(v) => cfg.policy.kind = v[i],
            SweepAxis::Horizon(v) => cfg.horizon = v[i],
        }
    }
}

/// Cartesian product of `grid` over `base`, first axis varying slowest.
/// Cell `i` is seeded as `(master_seed, i, run_index)`.
pub fn sweep_cells(base: &ExperimentConfig, grid: &[SweepAxis]) -> Result<Vec<ExperimentConfig>> {
    ensure!(!grid.is_empty(), Usage, "sweep grid has no parameters");
    for axis in grid {
        ensure!(!axis.is_empty(), Usage, "sweep parameter '{}' has no values", axis.name());
    }
    let total: usize = grid.iter().map(SweepAxis::len).product();
    let mut cells = Vec::with_capacity(total);
    for cell in 0..total {
        let mut cfg = base.clone();
        let mut rem = cell;
        for axis in grid.iter().rev() {
            axis.apply(rem % axis.len(), &mut cfg);
            rem /= axis.len();
        }
        cfg.cell_index = cell as u64;
        cfg.validate()?;
        cells.push(cfg);
    }
    Ok(cells)
}

pub fn run_sweep(base: &ExperimentConfig, grid: &[SweepAxis]) -> Result<Vec<EnsembleSummary>> {
    sweep_cells(base, grid)?.iter().map(run_ensemble).collect()
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvMode;

    fn stationary_cfg(kind: PolicyKind, horizon: u64, runs: usize) -> ExperimentConfig {
        ExperimentConfig::new(
            EnvConfig::stationary(10, 0.1),
            PolicySpec::with_default_lambda(kind, EnvMode::Stationary),
            horizon,
            runs,
            42,
        )
    }

    #[test]
    fn checkpoint_layout() {
        assert_eq!(checkpoints(5, &Granularity::EveryTrial), vec![1, 2, 3, 4, 5]);
        assert_eq!(
            checkpoints(100, &Granularity::LogSpaced),
            vec![1, 2, 4, 8, 10, 16, 32, 64, 100]
        );
        assert_eq!(checkpoints(1, &Granularity::LogSpaced), vec![1]);
    }

    #[test]
    fn episode_is_reproducible() {
        let cfg = stationary_cfg(PolicyKind::Ots, 2000, 1);
        let a = run_episode(&cfg, 3).unwrap();
        let b = run_episode(&cfg, 3).unwrap();
        assert_eq!(a, b);
        let c = run_episode(&cfg, 4).unwrap();
        assert_ne!(a.actions, c.actions);
    }

    #[test]
    fn trace_is_consistent() {
        let cfg = stationary_cfg(PolicyKind::Aai, 500, 1);
        let tr = run_episode(&cfg, 0).unwrap();
        assert_eq!(tr.actions.len(), 500);
        let total = crate::metrics::cumulative_regret(&tr.theta_star, &tr.theta_chosen).unwrap();
        assert!((total - tr.regret.cumulative_at(500)).abs() < 1e-9);
        assert!(tr.regret.increments.iter().all(|&r| r >= 0.0));
        assert!(tr.switched.iter().all(|&s| !s));
    }

    #[test]
    fn single_run_summary_is_degenerate() {
        let cfg = stationary_cfg(PolicyKind::Aai, 300, 1);
        let s = run_ensemble(&cfg).unwrap();
        assert!(s.degenerate_ci);
        assert!(s.cumulative_regret.iter().all(|e| e.ci.is_none()));
        let tr = run_episode(&cfg, 0).unwrap();
        assert_eq!(s.final_regret, vec![tr.regret.cumulative_at(300)]);
        for (j, &t) in s.checkpoints.iter().enumerate() {
            assert_eq!(s.cumulative_regret[j].mean, tr.regret.cumulative_at(t as usize));
        }
    }

    #[test]
    fn checkpoint_rate_matches_cumulative() {
        let cfg = stationary_cfg(PolicyKind::Ts, 1000, 12);
        let s = run_ensemble(&cfg).unwrap();
        for (j, &t) in s.checkpoints.iter().enumerate() {
            let lhs = s.cumulative_regret[j].mean;
            let rhs = t as f64 * s.regret_rate[j].mean;
            assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
        }
        assert_eq!(s.final_regret.len(), 12);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let cfg = stationary_cfg(PolicyKind::Bucb, 400, 16);
        let a = run_ensemble_with(&cfg, Execution::Serial).unwrap();
        let b = run_ensemble_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_product_and_seeding() {
        let base = stationary_cfg(PolicyKind::Aai, 50, 2);
        let grid = [
            SweepAxis::Arms(vec![10, 20, 40, 80]),
            SweepAxis::Epsilon(vec![0.05, 0.1, 0.2]),
        ];
        let cells = sweep_cells(&base, &grid).unwrap();
        assert_eq!(cells.len(), 12);
        assert_eq!((cells[0].env.arms, cells[0].env.epsilon), (10, 0.05));
        assert_eq!((cells[1].env.arms, cells[1].env.epsilon), (10, 0.1));
        assert_eq!((cells[11].env.arms, cells[11].env.epsilon), (80, 0.2));
        assert!(cells.iter().enumerate().all(|(i, c)| c.cell_index == i as u64));

        let single = sweep_cells(&base, &[SweepAxis::Arms(vec![10]), SweepAxis::Epsilon(vec![0.1])]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(sweep_cells(&base, &[]).is_err());
        assert!(sweep_cells(&base, &[SweepAxis::Lambda(vec![])]).is_err());
    }

    #[test]
    fn lambda_grid_design() {
        let lambdas = log_space(0.01, 4.0, 20);
        assert_eq!(lambdas.len(), 20);
        assert!((lambdas[0] - 0.01).abs() < 1e-15 && (lambdas[19] - 4.0).abs() < 1e-12);
        let base = stationary_cfg(PolicyKind::Aai, 20, 2);
        let grid = [SweepAxis::Lambda(lambdas), SweepAxis::Policy(vec![PolicyKind::Aai, PolicyKind::Gai])];
        let s = run_sweep(&base, &grid).unwrap();
        assert_eq!(s.len(), 40);
        assert_eq!(s[1].config.policy.kind, PolicyKind::Gai);
    }

    #[test]
    fn switch_schedules_differ_across_runs() {
        let cfg = ExperimentConfig::new(
            EnvConfig::switching(10, 0.1, 0.01, EnvMode::SwitchingFixed),
            PolicySpec::with_default_lambda(PolicyKind::Aai, EnvMode::SwitchingFixed),
            3000,
            1,
            42,
        );
        let schedule = |run: u64| -> Vec<usize> {
            let tr = run_episode(&cfg, run).unwrap();
            tr.switched.iter().enumerate().filter(|(_, &s)| s).map(|(t, _)| t).collect()
        };
        let schedules: Vec<_> = (0..101).map(schedule).collect();
        for pair in schedules.windows(2) {
            assert_ne!(pair[0], pair[1]);
        }
    }
}
