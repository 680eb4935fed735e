//! Ground-truth Bernoulli bandits: stationary, switching with a fixed
//! best-arm margin, and switching with reward probabilities redrawn from
//! Uniform(0, 1) at every change point.

use crate::error::{ensure, Result};
use crate::specfun::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvMode {
    Stationary,
    SwitchingFixed,
    SwitchingResample,
}

impl EnvMode {
    pub fn name(self) -> &'static str {
        match self {
            EnvMode::Stationary => "stationary",
            EnvMode::SwitchingFixed => "switching_fixed",
            EnvMode::SwitchingResample => "switching_resample",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(EnvMode::Stationary),
            "switching_fixed" | "switching" | "fixed" => Ok(EnvMode::SwitchingFixed),
            "switching_resample" | "resample" => Ok(EnvMode::SwitchingResample),
            other => Err(crate::Error::Config(format!("unknown environment mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub arms: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub mode: EnvMode,
    pub base_p: f64,
}

impl EnvConfig {
    pub fn stationary(arms: usize, epsilon: f64) -> Self {
        Self { arms, epsilon, rho: 0.0, mode: EnvMode::Stationary, base_p: 0.5 }
    }

    pub fn switching(arms: usize, epsilon: f64, rho: f64, mode: EnvMode) -> Self {
        Self { arms, epsilon, rho, mode, base_p: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.arms >= 2, Config, "number of arms K must be at least 2, got {}", self.arms);
        ensure!(self.rho >= 0.0 && self.rho < 1.0, Config, "rho must lie in [0, 1), got {}", self.rho);
        match self.mode {
            EnvMode::Stationary => {
                ensure!(self.rho == 0.0, Config, "stationary mode requires rho = 0, got {}", self.rho);
            }
            EnvMode::SwitchingFixed | EnvMode::SwitchingResample => {
                ensure!(
                    self.rho > 0.0,
                    Config,
                    "switching modes require rho in (0, 1); use the stationary mode for rho = 0"
                );
            }
        }
        if self.mode != EnvMode::SwitchingResample {
            ensure!(
                self.epsilon > 0.0 && self.epsilon < 0.5,
                Config,
                "epsilon must lie in (0, 0.5), got {}",
                self.epsilon
            );
            ensure!(
                self.base_p > 0.0 && self.base_p + self.epsilon < 1.0,
                Config,
                "base_p + epsilon must lie in (0, 1), got base_p={}",
                self.base_p
            );
        }
        Ok(())
    }
}

/// Per-trial ground truth reported back to the runner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub outcome: u8,
    pub theta_chosen: f64,
    pub theta_star: f64,
    pub switched: bool,
}

/// How the switch indicator of a step is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchDraw {
    /// Bernoulli(rho), the normal dynamics.
    Sampled,
    /// Draw everything as usual but override the indicator. Test hook.
    Forced(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    theta: Vec<f64>,
    k_star: usize,
    t: u64,
    config: EnvConfig,
}

impl EnvState {
    /// Stationary bandit: one arm at `base_p + epsilon`, chosen uniformly.
    pub fn init_stationary(arms: usize, epsilon: f64, rng: &mut RngStream) -> Result<Self> {
        Self::new(EnvConfig::stationary(arms, epsilon), rng)
    }

    pub fn init_switching(
        arms: usize,
        epsilon: f64,
        rho: f64,
        mode: EnvMode,
        rng: &mut RngStream,
    ) -> Result<Self> {
        ensure!(
            mode != EnvMode::Stationary,
            Config,
            "init_switching needs a switching mode"
        );
        Self::new(EnvConfig::switching(arms, epsilon, rho, mode), rng)
    }

    pub fn new(config: EnvConfig, rng: &mut RngStream) -> Result<Self> {
        config.validate()?;
        let mut state = Self { theta: vec![config.base_p; config.arms], k_star: 0, t: 0, config };
        match config.mode {
            EnvMode::Stationary | EnvMode::SwitchingFixed => {
                let best = rng.index(config.arms);
                state.place_best(best);
            }
            EnvMode::SwitchingResample => state.resample(rng),
        }
        Ok(state)
    }

    fn place_best(&mut self, best: usize) {
        self.theta[self.k_star] = self.config.base_p;
        self.theta[best] = self.config.base_p + self.config.epsilon;
        self.k_star = best;
    }

    fn resample(&mut self, rng: &mut RngStream) {
        for theta in &mut self.theta {
            // (0, 1) open: reject the single value 0.
            let mut u = rng.uniform();
            while u == 0.0 {
                u = rng.uniform();
            }
            *theta = u;
        }
        self.k_star = argmax_lowest(&self.theta);
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn k_star(&self) -> usize {
        self.k_star
    }

    pub fn theta_star(&self) -> f64 {
        self.theta[self.k_star]
    }

    /// Number of completed steps.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn arms(&self) -> usize {
        self.config.arms
    }

    pub fn step(&mut self, action: usize, rng: &mut RngStream) -> Result<StepInfo> {
        self.step_with(action, rng, SwitchDraw::Sampled)
    }

    /// One trial. From the second trial on, the switch indicator and the
    /// switch payload (target arm, or K fresh probabilities) are always drawn,
    /// then the outcome. The draw count per trial never depends on `action`.
    pub fn step_with(
        &mut self,
        action: usize,
        rng: &mut RngStream,
        draw: SwitchDraw,
    ) -> Result<StepInfo> {
        let arms = self.config.arms;
        ensure!(action < arms, Usage, "action {action} out of range for {arms} arms");

        let mut switched = false;
        if self.t > 0 {
            let u = rng.uniform();
            switched = match draw {
                SwitchDraw::Sampled => u < self.config.rho,
                SwitchDraw::Forced(j) => j,
            };
            match self.config.mode {
                EnvMode::Stationary | EnvMode::SwitchingFixed => {
                    // Offset in 1..K skips the current best arm.
                    let offset = 1 + rng.index(arms - 1);
                    if switched {
                        let next = (self.k_star + offset) % arms;
                        self.place_best(next);
                    }
                }
                EnvMode::SwitchingResample => {
                    if switched {
                        self.resample(rng);
                    } else {
                        for _ in 0..arms {
                            rng.uniform();
                        }
                    }
                }
            }
        }

        let theta_chosen = self.theta[action];
        let outcome = (rng.uniform() < theta_chosen) as u8;
        self.t += 1;
        Ok(StepInfo { outcome, theta_chosen, theta_star: self.theta_star(), switched })
    }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
