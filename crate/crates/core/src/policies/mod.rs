//! Action-selection rules. Every rule produces a per-arm score vector that
//! feeds the shared [`select_action`], so tie handling is identical across
//! agents.

mod agent;
mod efe;
mod frequentist;

pub use agent::{Agent, Policy};
pub use efe::{aai_scores, efe_ambiguity, efe_risk, gai_efe};
pub use frequentist::{ucb_indices, FrequentistState, UcbChoice};

pub(crate) use efe::{aai_scores_into, gai_scores_into};

use crate::beliefs::BeliefState;
use crate::envs::EnvMode;
use crate::error::{ensure, Error, Result};
use crate::specfun::{inv_reg_inc_beta_unchecked, sample_beta_unchecked, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    /// Approximate active inference, `argmax 2 lambda mu + 1 / (2 nu)`.
    Aai,
    /// Exact expected free energy minimisation.
    Gai,
    /// Bayesian UCB on the collapsed change-mixture prior.
    Bucb,
    /// Optimistic Thompson sampling.
    Ots,
    Ts,
    /// Classical UCB tuned for Bernoulli rewards.
    Ucb,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::Aai,
        PolicyKind::Gai,
        PolicyKind::Bucb,
        PolicyKind::Ots,
        PolicyKind::Ts,
        PolicyKind::Ucb,
        PolicyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Aai => "aai",
            PolicyKind::Gai => "gai",
            PolicyKind::Bucb => "bucb",
            PolicyKind::Ots => "ots",
            PolicyKind::Ts => "ts",
            PolicyKind::Ucb => "ucb",
            PolicyKind::Random => "random",
        }
    }

    /// Display label used in tables.
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Aai => "A-AI",
            PolicyKind::Gai => "G-AI",
            PolicyKind::Bucb => "B-UCB",
            PolicyKind::Ots => "O-TS",
            PolicyKind::Ts => "TS",
            PolicyKind::Ucb => "UCB",
            PolicyKind::Random => "RC",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm || (norm == "rc" && *k == PolicyKind::Random))
            .ok_or_else(|| Error::Config(format!("unknown policy '{s}'")))
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, PolicyKind::Aai | PolicyKind::Gai)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub lambda: f64,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, lambda: f64) -> Result<Self> {
        ensure!(
            lambda >= 0.0 && lambda.is_finite(),
            Config,
            "lambda must be a finite non-negative number, got {lambda}"
        );
        Ok(Self { kind, lambda })
    }

    /// Preference precision tuned per setting: 0.1 on stationary bandits,
    /// 0.5 for A-AI and 0.25 for G-AI on switching bandits.
    pub fn default_lambda(kind: PolicyKind, mode: EnvMode) -> f64 {
        match (mode, kind) {
            (EnvMode::Stationary, _) => 0.1,
            (_, PolicyKind::Gai) => 0.25,
            _ => 0.5,
        }
    }

    pub fn with_default_lambda(kind: PolicyKind, mode: EnvMode) -> Self {
        Self { kind, lambda: Self::default_lambda(kind, mode) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Quantile level `1 - 1/t` for trial `t`, clamped below one.
#[inline]
pub fn bucb_level(t: u64) -> f64 {
    (1.0 - 1.0 / t as f64).clamp(0.0, 1.0 - 1e-12)
}

/// Bayesian UCB indices: the `1 - 1/t` quantile of each arm's collapsed prior.
pub fn bucb_indices(b: &BeliefState, t: u64) -> Result<Vec<f64>> {
    ensure!(t >= 1, Usage, "trial counter starts at 1");
    let mut out = Vec::with_capacity(b.arms());
    bucb_indices_into(b, t, &mut out)?;
    Ok(out)
}

pub(crate) fn bucb_indices_into(b: &BeliefState, t: u64, out: &mut Vec<f64>) -> Result<()> {
    let z = bucb_level(t);
    out.clear();
    for k in 0..b.arms() {
        let (a, c) = b.collapsed_prior(k);
        out.push(inv_reg_inc_beta_unchecked(z, a, c)?);
    }
    Ok(())
}

/// Thompson samples, one per arm in arm order.
pub fn ts_indices(b: &BeliefState, rng: &mut RngStream) -> Vec<f64> {
    let mut out = Vec::with_capacity(b.arms());
    ts_indices_into(b, rng, &mut out);
    out
}

pub(crate) fn ts_indices_into(b: &BeliefState, rng: &mut RngStream, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..b.arms()).map(|k| sample_beta_unchecked(rng, b.alpha()[k], b.beta()[k])));
}

/// Optimistic Thompson samples, each floored at the arm's predictive mean.
pub fn ots_indices(b: &BeliefState, rng: &mut RngStream) -> Vec<f64> {
    let mut out = Vec::with_capacity(b.arms());
    ots_indices_into(b, rng, &mut out);
    out
}

pub(crate) fn ots_indices_into(b: &BeliefState, rng: &mut RngStream, out: &mut Vec<f64>) {
    ts_indices_into(b, rng, out);
    for (k, v) in out.iter_mut().enumerate() {
        *v = v.max(b.predictive_mean(k));
    }
}

/// Uniformly random arm.
pub fn random_index(arms: usize, rng: &mut RngStream) -> Result<usize> {
    ensure!(arms >= 2, Config, "number of arms K must be at least 2, got {arms}");
    Ok(rng.index(arms))
}

/// Extremal arm of `scores`; exact ties are broken uniformly with `rng`.
/// Draws from `rng` only when a tie occurs.
pub fn select_action(scores: &[f64], rng: &mut RngStream, mode: Extremum) -> Result<usize> {
    ensure!(!scores.is_empty(), Usage, "cannot select from an empty score vector");
    let mut best = scores[0];
    let mut ties = 0usize;
    for &s in scores {
        if !s.is_finite() {
            return Err(Error::Numeric(format!("non-finite action score {s}")));
        }
        let better = match mode {
            Extremum::Max => s > best,
            Extremum::Min => s < best,
        };
        if better {
            best = s;
            ties = 1;
        } else if s == best {
            ties += 1;
        }
    }
    let pick = if ties > 1 { rng.index(ties) } else { 0 };
    let arm = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == best)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("tie index within tie count");
    Ok(arm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{derive_stream, Role};

    fn rng(run: u64) -> RngStream {
        derive_stream(11, run, Role::Agent)
    }

    #[test]
    fn select_basic() {
        let mut r = rng(0);
        assert_eq!(select_action(&[0.1, 0.9, 0.3], &mut r, Extremum::Max).unwrap(), 1);
        assert_eq!(select_action(&[3.0, 1.0, 2.0], &mut r, Extremum::Min).unwrap(), 1);
        assert!(select_action(&[0.1, f64::NAN], &mut r, Extremum::Max).is_err());
        assert!(select_action(&[0.1, f64::INFINITY], &mut r, Extremum::Max).is_err());
        assert!(select_action(&[], &mut r, Extremum::Max).is_err());
    }

    #[test]
    fn ties_are_uniform() {
        let mut r = rng(1);
        let k = 5;
        let n = 100_000;
        let mut counts = vec![0u32; k];
        for _ in 0..n {
            counts[select_action(&[0.5; 5], &mut r, Extremum::Max).unwrap()] += 1;
        }
        let p = 1.0 / k as f64;
        let bound = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - p).abs() < bound);
        }
        // Ties among a subset only pick from that subset.
        for _ in 0..1000 {
            let a = select_action(&[0.2, 0.7, 0.1, 0.7], &mut r, Extremum::Max).unwrap();
            assert!(a == 1 || a == 3);
        }
    }

    #[test]
    fn bucb_examples() {
        let b = BeliefState::from_params(vec![1.0, 2.0], vec![1.0, 1.0], 0.0).unwrap();
        let idx = bucb_indices(&b, 2).unwrap();
        assert!((idx[0] - 0.5).abs() < 1e-10);
        let idx = bucb_indices(&b, 100).unwrap();
        assert!((idx[1] - 0.99f64.sqrt()).abs() < 1e-10);
        assert!((idx[1] - 0.994_987_44).abs() < 1e-8);
        assert_eq!(bucb_indices(&b, 1).unwrap(), vec![0.0, 0.0]);
        assert!(bucb_indices(&b, 0).is_err());
    }

    #[test]
    fn bucb_monotone_in_level() {
        let b = BeliefState::from_params(vec![3.5, 40.0], vec![7.0, 12.0], 0.02).unwrap();
        let mut last = vec![0.0; 2];
        for t in [1, 2, 3, 5, 10, 100, 1000, 100_000, 1_000_000] {
            let idx = bucb_indices(&b, t).unwrap();
            for k in 0..2 {
                assert!(idx[k] >= last[k]);
            }
            last = idx;
        }
    }

    #[test]
    fn ts_support_mean_determinism() {
        let b = BeliefState::from_params(vec![8.0, 1.0], vec![2.0, 1.0], 0.0).unwrap();
        let mut r = rng(2);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let idx = ts_indices(&b, &mut r);
            assert!(idx.iter().all(|&v| v > 0.0 && v < 1.0));
            sum += idx[0];
        }
        assert!((sum / n as f64 - 0.8).abs() < 0.012);
        assert_eq!(ts_indices(&b, &mut rng(3)), ts_indices(&b, &mut rng(3)));
    }

    #[test]
    fn ots_is_floored_and_dominates_ts() {
        let b = BeliefState::from_params(vec![8.0, 1.0, 3.0], vec![2.0, 1.0, 9.0], 0.05).unwrap();
        for run in 0..500 {
            let ts = ts_indices(&b, &mut rng(run));
            let ots = ots_indices(&b, &mut rng(run));
            for k in 0..3 {
                let floor = b.predictive_mean(k);
                assert!(ots[k] >= floor);
                assert!(ots[k] >= ts[k]);
                if ts[k] < floor {
                    assert_eq!(ots[k], floor);
                } else {
                    assert_eq!(ots[k], ts[k]);
                }
            }
        }
    }

    #[test]
    fn ots_golden_trace() {
        // Recorded from seed 11, run 7, agent role.
        let b = BeliefState::new(2, 0.0).unwrap();
        let mut r = rng(7);
        let first = ots_indices(&b, &mut r);
        let second = ots_indices(&b, &mut r);
        assert_eq!(first, vec![0.5, 0.5]);
        assert_eq!(second, vec![0.7182531000348916, 0.5]);
        let mut r = rng(7);
        assert_eq!(ots_indices(&b, &mut r), first);
    }

    #[test]
    fn random_index_frequencies() {
        let mut r = rng(4);
        let n = 100_000;
        let mut counts = [0u32; 10];
        for _ in 0..n {
            counts[random_index(10, &mut r).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.1).abs() < 0.003);
        }
        let a: Vec<_> = (0..20).map(|_| random_index(2, &mut rng(5)).unwrap()).collect();
        let mut r5 = rng(5);
        let b: Vec<_> = (0..20).map(|_| random_index(2, &mut r5).unwrap()).collect();
        assert!(a.iter().all(|&x| x == a[0]));
        assert_eq!(b[0], a[0]);
        assert!(random_index(1, &mut r).is_err());
    }

    #[test]
    fn parse_policy_names() {
        assert_eq!(PolicyKind::parse("A-AI").unwrap(), PolicyKind::Aai);
        assert_eq!(PolicyKind::parse("b_ucb").unwrap(), PolicyKind::Bucb);
        assert_eq!(PolicyKind::parse("RC").unwrap(), PolicyKind::Random);
        assert!(PolicyKind::parse("greedy").is_err());
        assert!(PolicySpec::new(PolicyKind::Aai, -0.1).is_err());
    }

    #[test]
    fn default_lambdas() {
        assert_eq!(PolicySpec::default_lambda(PolicyKind::Aai, EnvMode::Stationary), 0.1);
        assert_eq!(PolicySpec::default_lambda(PolicyKind::Aai, EnvMode::SwitchingFixed), 0.5);
        assert_eq!(PolicySpec::default_lambda(PolicyKind::Gai, EnvMode::SwitchingResample), 0.25);
    }
}
