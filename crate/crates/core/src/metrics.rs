//! Regret, theoretical reference curves and ensemble statistics.

use crate::error::{ensure, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Per-trial regret increments with their running sums.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretTrace {
    pub increments: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn with_capacity(n: usize) -> Self {
        Self { increments: Vec::with_capacity(n), cumulative: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, theta_star: f64, theta_chosen: f64) {
        let inc = theta_star - theta_chosen;
        let total = self.cumulative.last().copied().unwrap_or(0.0) + inc;
        self.increments.push(inc);
        self.cumulative.push(total);
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Cumulative regret over the first `t` trials (1-based).
    pub fn cumulative_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.cumulative[t - 1]
        }
    }

    pub fn rate_at(&self, t: usize) -> f64 {
        self.cumulative_at(t) / t as f64
    }
}

/// `sum_t (theta*_t - theta_{t, a_t})`, regret against the per-trial best arm.
pub fn cumulative_regret(theta_star: &[f64], theta_chosen: &[f64]) -> Result<f64> {
    ensure!(
        theta_star.len() == theta_chosen.len(),
        Usage,
        "trace lengths differ ({} vs {})",
        theta_star.len(),
        theta_chosen.len()
    );
    Ok(theta_star.iter().zip(theta_chosen).map(|(s, c)| s - c).sum())
}

pub fn regret_rate(theta_star: &[f64], theta_chosen: &[f64]) -> Result<f64> {
    ensure!(!theta_star.is_empty(), Usage, "regret rate of an empty trace");
    Ok(cumulative_regret(theta_star, theta_chosen)? / theta_star.len() as f64)
}

fn check_bound_args(arms: usize, epsilon: f64) -> Result<()> {
    ensure!(arms >= 2, Usage, "number of arms K must be at least 2, got {arms}");
    ensure!(epsilon > 0.0 && epsilon < 0.5, Usage, "epsilon must lie in (0, 0.5), got {epsilon}");
    Ok(())
}

/// Asymptotic lower bound `2 eps (K - 1) ln T / ln(1 + 4 eps^2)` on the
/// cumulative regret of the structured bandit. A reference curve only.
pub fn lower_bound(arms: usize, epsilon: f64, horizon: u64) -> Result<f64> {
    check_bound_args(arms, epsilon)?;
    ensure!(horizon >= 1, Usage, "horizon must be at least 1");
    let scale = 2.0 * epsilon * (arms - 1) as f64 / (4.0 * epsilon * epsilon).ln_1p();
    Ok(scale * (horizon as f64).ln())
}

/// Small-epsilon form `(K - 1) ln T / (2 eps)` of [`lower_bound`].
pub fn lower_bound_approx(arms: usize, epsilon: f64, horizon: u64) -> Result<f64> {
    check_bound_args(arms, epsilon)?;
    ensure!(horizon >= 1, Usage, "horizon must be at least 1");
    Ok((arms - 1) as f64 / (2.0 * epsilon) * (horizon as f64).ln())
}

/// `KL(Bern(p) || Bern(q))`.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    ensure!(
        p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0,
        Domain,
        "Bernoulli KL needs p, q in (0, 1), got ({p}, {q})"
    );
    Ok(p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln())
}

/// Expected cumulative regret `T eps (K - 1) / K` of uniform random choice.
pub fn random_upper_bound(arms: usize, epsilon: f64, horizon: u64) -> f64 {
    horizon as f64 * epsilon * (arms as f64 - 1.0) / arms as f64
}

/// Mean with a normal-approximation 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

impl MeanCi {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.high - self.low)
    }

    /// True when the two intervals do not intersect.
    pub fn separated_from(&self, other: &MeanCi) -> bool {
        self.high < other.low || other.high < self.low
    }
}

pub fn mean_ci(samples: &[f64]) -> Result<MeanCi> {
    let n = samples.len();
    ensure!(n >= 2, Usage, "a confidence interval needs at least two samples, got {n}");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = Z_95 * var.sqrt() / (n as f64).sqrt();
    Ok(MeanCi { mean, low: mean - half, high: mean + half })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regret_examples() {
        let star = [0.7, 0.7, 0.7];
        assert_eq!(cumulative_regret(&star, &star).unwrap(), 0.0);
        let r = cumulative_regret(&star, &[0.7, 0.5, 0.5]).unwrap();
        assert!((r - 0.4).abs() < 1e-12);
        // Best arm switches mid-run; the oracle moves with it.
        let r = cumulative_regret(&[0.6, 0.6, 0.9, 0.9], &[0.6, 0.6, 0.6, 0.9]).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
        assert!(cumulative_regret(&[0.6], &[]).is_err());
    }

    #[test]
    fn rate_examples() {
        let star = [0.6; 4];
        assert_eq!(regret_rate(&star, &star).unwrap(), 0.0);
        assert!((regret_rate(&star, &[0.6, 0.5, 0.6, 0.5]).unwrap() - 0.05).abs() < 1e-12);
        assert!((regret_rate(&star, &[0.5; 4]).unwrap() - 0.1).abs() < 1e-12);
        assert!(regret_rate(&[], &[]).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound(10, 0.1, 1).unwrap(), 0.0);
        assert!((lower_bound(10, 0.1, 10_000).unwrap() - 422.700_439_045_181).abs() < 1e-9);
        assert!((lower_bound_approx(10, 0.1, 10_000).unwrap() - 414.465_316_738_928).abs() < 1e-9);
        assert!(lower_bound(1, 0.1, 10).is_err());
        assert!(lower_bound(10, 0.5, 10).is_err());
    }

    #[test]
    fn lower_bound_monotone() {
        let base = lower_bound(10, 0.1, 1000).unwrap();
        assert!(lower_bound(20, 0.1, 1000).unwrap() > base);
        assert!(lower_bound(10, 0.1, 2000).unwrap() > base);
        let mut last = f64::INFINITY;
        for i in 1..50 {
            let v = lower_bound(10, i as f64 * 0.01, 1000).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.3, 0.3).unwrap(), 0.0);
        // Structured pair at eps = 0.1: -1/2 ln(1 - 4 eps^2).
        let structured = -0.5 * (0.96f64).ln();
        let kl = kl_bernoulli(0.5, 0.6).unwrap();
        assert!((kl - structured).abs() < 1e-12);
        assert!((kl - 0.020_410_997_260_127_58).abs() < 1e-12);
        // The 2 eps^2 approximation is within 2.1%.
        assert!(((0.02 - kl) / kl).abs() < 0.021);
        // The reverse orientation is a different number.
        assert!((kl_bernoulli(0.6, 0.5).unwrap() - 0.020_135_513_550_688_86).abs() < 1e-12);
        assert!(kl_bernoulli(0.0, 0.5).is_err());
        assert!(kl_bernoulli(0.5, 1.0).is_err());
    }

    #[test]
    fn random_bound_examples() {
        assert_eq!(random_upper_bound(10, 0.1, 0), 0.0);
        assert!((random_upper_bound(10, 0.1, 100) - 9.0).abs() < 1e-12);
        assert!((random_upper_bound(10, 0.1, 100) / 100.0 - 0.09).abs() < 1e-12);
    }

    #[test]
    fn ci_examples() {
        let c = mean_ci(&[2.5; 7]).unwrap();
        assert_eq!((c.mean, c.low, c.high), (2.5, 2.5, 2.5));
        let c = mean_ci(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.mean, 0.5);
        assert!((c.half_width() - 0.565_803_263_8).abs() < 1e-9);
        assert!(mean_ci(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn kl_is_nonnegative(p in 0.001f64..0.999, q in 0.001f64..0.999) {
            let kl = kl_bernoulli(p, q).unwrap();
            prop_assert!(kl >= -1e-15);
            if (p - q).abs() > 1e-6 {
                prop_assert!(kl > 0.0);
            }
        }

        #[test]
        fn structured_kl_closed_form(eps in 0.001f64..0.499) {
            let kl = kl_bernoulli(0.5, 0.5 + eps).unwrap();
            prop_assert!((kl + 0.5 * (1.0 - 4.0 * eps * eps).ln()).abs() < 1e-12);
        }

        #[test]
        fn structured_regret_bounds(choices in proptest::collection::vec(any::<bool>(), 1..200),
                                    eps in 0.01f64..0.49) {
            let star = vec![0.5 + eps; choices.len()];
            let chosen: Vec<f64> = choices.iter().map(|&opt| if opt { 0.5 + eps } else { 0.5 }).collect();
            let r = cumulative_regret(&star, &chosen).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert_eq!(r == 0.0, choices.iter().all(|&c| c));
            let rate = regret_rate(&star, &chosen).unwrap();
            prop_assert!(rate >= 0.0 && rate <= eps + 1e-12);
        }
    }
}
