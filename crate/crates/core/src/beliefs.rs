//! Per-arm Beta beliefs updated with the variational SMiLe rule.
//!
//! Each trial the chosen arm's outcome gives a Bayes-factor surprise, which
//! with the known change probability yields the posterior probability
//! `gamma` that the environment was reset. Every arm then relaxes toward the
//! reset prior by `gamma` and the chosen arm takes the observation. At
//! `rho = 0` this is plain conjugate counting.

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    alpha0: f64,
    beta0: f64,
    rho: f64,
    gamma_last: f64,
}

impl BeliefState {
    /// Uniform Beta(1, 1) beliefs on every arm.
    pub fn new(arms: usize, rho: f64) -> Result<Self> {
        Self::with_prior(arms, rho, 1.0, 1.0)
    }

    pub fn with_prior(arms: usize, rho: f64, alpha0: f64, beta0: f64) -> Result<Self> {
        ensure!(arms >= 2, Config, "number of arms K must be at least 2, got {arms}");
        ensure!((0.0..1.0).contains(&rho), Config, "rho must lie in [0, 1), got {rho}");
        ensure!(
            alpha0 > 0.0 && beta0 > 0.0,
            Config,
            "reset prior must be positive, got ({alpha0}, {beta0})"
        );
        Ok(Self {
            alpha: vec![alpha0; arms],
            beta: vec![beta0; arms],
            alpha0,
            beta0,
            rho,
            gamma_last: 0.0,
        })
    }

    /// Beliefs from explicit parameters, prior (1, 1).
    pub fn from_params(alpha: Vec<f64>, beta: Vec<f64>, rho: f64) -> Result<Self> {
        ensure!(alpha.len() == beta.len(), Usage, "alpha and beta lengths differ");
        ensure!(alpha.len() >= 2, Config, "number of arms K must be at least 2, got {}", alpha.len());
        ensure!((0.0..1.0).contains(&rho), Config, "rho must lie in [0, 1), got {rho}");
        ensure!(
            alpha.iter().chain(&beta).all(|&v| v > 0.0 && v.is_finite()),
            Domain,
            "Beta parameters must be positive and finite"
        );
        Ok(Self { alpha, beta, alpha0: 1.0, beta0: 1.0, rho, gamma_last: 0.0 })
    }

    pub fn arms(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn prior(&self) -> (f64, f64) {
        (self.alpha0, self.beta0)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma_last(&self) -> f64 {
        self.gamma_last
    }

    /// Posterior mean `mu = alpha / nu` and concentration `nu = alpha + beta`.
    #[inline]
    pub fn posterior_stats(&self, k: usize) -> (f64, f64) {
        let nu = self.alpha[k] + self.beta[k];
        (self.alpha[k] / nu, nu)
    }

    /// One-step predictive mean `mu + rho (1/2 - mu)`.
    #[inline]
    pub fn predictive_mean(&self, k: usize) -> f64 {
        let (mu, _) = self.posterior_stats(k);
        mu + self.rho * (0.5 - mu)
    }

    /// `p(o | change) / p(o | no change)` for the chosen arm.
    pub fn bayes_factor_surprise(&self, k: usize, outcome: u8) -> Result<f64> {
        ensure!(k < self.arms(), Usage, "arm {k} out of range");
        ensure!(outcome <= 1, Usage, "outcome must be 0 or 1, got {outcome}");
        let (mu, _) = self.posterior_stats(k);
        let reset_mu = self.alpha0 / (self.alpha0 + self.beta0);
        let (p_change, p_stay) =
            if outcome == 1 { (reset_mu, mu) } else { (1.0 - reset_mu, 1.0 - mu) };
        if p_stay <= 0.0 {
            return Err(Error::Numeric("posterior predictive of the outcome is zero".into()));
        }
        Ok(p_change / p_stay)
    }

    /// Collapsed one-component approximation of the change-mixture prior.
    #[inline]
    pub fn collapsed_prior(&self, k: usize) -> (f64, f64) {
        let keep = 1.0 - self.rho;
        (keep * self.alpha[k] + self.rho * self.alpha0, keep * self.beta[k] + self.rho * self.beta0)
    }

    /// Variational SMiLe update after observing `outcome` on arm `k`.
    pub fn update(&mut self, k: usize, outcome: u8) -> Result<()> {
        let surprise = self.bayes_factor_surprise(k, outcome)?;
        let gamma = change_posterior(surprise, self.rho);
        self.update_with_gamma(k, outcome, gamma)
    }

    /// The update with an externally supplied change posterior.
    pub fn update_with_gamma(&mut self, k: usize, outcome: u8, gamma: f64) -> Result<()> {
        ensure!(k < self.arms(), Usage, "arm {k} out of range");
        ensure!(outcome <= 1, Usage, "outcome must be 0 or 1, got {outcome}");
        ensure!((0.0..=1.0).contains(&gamma), Domain, "gamma must lie in [0, 1], got {gamma}");
        if gamma > 0.0 {
            let keep = 1.0 - gamma;
            let (ra, rb) = (gamma * self.alpha0, gamma * self.beta0);
            for (a, b) in self.alpha.iter_mut().zip(self.beta.iter_mut()) {
                *a = keep * *a + ra;
                *b = keep * *b + rb;
            }
        }
        if outcome == 1 {
            self.alpha[k] += 1.0;
        } else {
            self.beta[k] += 1.0;
        }
        self.gamma_last = gamma;
        Ok(())
    }
}

/// Posterior change probability `m S / (1 + m S)` with `m = rho / (1 - rho)`.
#[inline]
pub fn change_posterior(surprise: f64, rho: f64) -> f64 {
    let ms = rho / (1.0 - rho) * surprise;
    ms / (1.0 + ms)
}
