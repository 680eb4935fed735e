//! Flat `key = value` experiment files. Command-line flags are merged over
//! the file values before anything is validated.

use std::collections::BTreeMap;
use std::path::Path;

use crate::envs::{EnvConfig, EnvMode};
use crate::error::{Error, Result};
use crate::policies::{PolicyKind, PolicySpec};
use crate::sim::{log_space, ExperimentConfig, Granularity, SweepAxis};

/// Keys describing a single experiment, in echo order.
pub const EXPERIMENT_KEYS: [&str; 12] =
    ["env", "K", "eps", "rho", "base_p", "policy", "lambda", "T", "N", "seed", "cell", "granularity"];

const SWEEP_PREFIX: &str = "sweep.";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "env" | "mode" => "env",
        "K" | "k" | "arms" => "K",
        "eps" | "epsilon" => "eps",
        "rho" => "rho",
        "base_p" => "base_p",
        "policy" => "policy",
        "lambda" => "lambda",
        "T" | "horizon" => "T",
        "N" | "runs" => "N",
        "seed" | "master_seed" => "seed",
        "cell" | "cell_index" => "cell",
        "granularity" => "granularity",
        "name" => "name",
        _ => return None,
    })
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            // Summary files carry results and metadata next to the config echo.
            if key.starts_with("result.") || key == "version" {
                continue;
            }
            raw.set(key, value)?;
        }
        Ok(raw)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = if let Some(axis) = key.strip_prefix(SWEEP_PREFIX) {
            let canon = canonical_key(axis)
                .filter(|k| matches!(*k, "K" | "eps" | "rho" | "lambda" | "policy" | "T"))
                .ok_or_else(|| Error::Config(format!("'{axis}' cannot be swept")))?;
            format!("{SWEEP_PREFIX}{canon}")
        } else {
            canonical_key(key)
                .ok_or_else(|| Error::Config(format!("unknown config key '{key}'")))?
                .to_string()
        };
        self.entries.insert(key, value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn name(&self) -> Option<&str> {
        self.get("name")
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'"))))
            .transpose()
    }

    pub fn has_sweep(&self) -> bool {
        self.entries.keys().any(|k| k.starts_with(SWEEP_PREFIX))
    }

    /// True when lambda was fixed explicitly, either directly or as an axis.
    pub fn lambda_explicit(&self) -> bool {
        self.get("lambda").is_some() || self.get("sweep.lambda").is_some()
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mode = EnvMode::parse(self.get("env").unwrap_or("stationary"))?;
        let arms = self.number::<usize>("K")?.unwrap_or(10);
        let epsilon = self.number::<f64>("eps")?.unwrap_or(0.1);
        let default_rho = if mode == EnvMode::Stationary { 0.0 } else { 0.01 };
        let rho = self.number::<f64>("rho")?.unwrap_or(default_rho);
        let base_p = self.number::<f64>("base_p")?.unwrap_or(0.5);
        let kind = PolicyKind::parse(self.get("policy").unwrap_or("aai"))?;
        let lambda = self
            .number::<f64>("lambda")?
            .unwrap_or_else(|| PolicySpec::default_lambda(kind, mode));
        let horizon = self.number::<u64>("T")?.unwrap_or(10_000);
        let runs = self.number::<usize>("N")?.unwrap_or(1000);
        let seed = self.number::<u64>("seed")?.unwrap_or(0);
        let granularity = Granularity::parse(self.get("granularity").unwrap_or("log_spaced"))?;

        let env = EnvConfig { arms, epsilon, rho, mode, base_p };
        let policy = PolicySpec::new(kind, lambda)?;
        let mut cfg = ExperimentConfig::new(env, policy, horizon, runs, seed);
        cfg.granularity = granularity;
        cfg.cell_index = self.number::<u64>("cell")?.unwrap_or(0);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Vec<SweepAxis>> {
        let mut axes = Vec::new();
        for key in ["K", "eps", "rho", "lambda", "policy", "T"] {
            let Some(spec) = self.get(&format!("{SWEEP_PREFIX}{key}")) else { continue };
            let axis = match key {
                "K" => SweepAxis::Arms(parse_list(key, spec)?),
                "eps" => SweepAxis::Epsilon(parse_reals(key, spec)?),
                "rho" => SweepAxis::Rho(parse_reals(key, spec)?),
                "lambda" => SweepAxis::Lambda(parse_reals(key, spec)?),
                "T" => SweepAxis::Horizon(parse_list(key, spec)?),
                _ => SweepAxis::Policy(
                    split_list(spec).map(PolicyKind::parse).collect::<Result<Vec<_>>>()?,
                ),
            };
            if axis.is_empty() {
                return Err(Error::Usage(format!("sweep parameter '{key}' has no values")));
            }
            axes.push(axis);
        }
        if axes.is_empty() {
            return Err(Error::Usage("sweep grid has no parameters (add sweep.<key> = ...)".into()));
        }
        Ok(axes)
    }
}

fn split_list(spec: &str) -> impl Iterator<Item = &str> {
    spec.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list<T: std::str::FromStr>(key: &str, spec: &str) -> Result<Vec<T>> {
    split_list(spec)
        .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("sweep.{key}: cannot parse '{v}'"))))
        .collect()
}

/// A comma list, or `logspace(lo, hi, n)`.
fn parse_reals(key: &str, spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if let Some(args) = spec.strip_prefix("logspace(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("sweep.{key}: expected logspace(lo, hi, n), got '{spec}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let n: usize = parts[2].parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > 0.0) {
            return Err(bad());
        }
        return Ok(log_space(lo, hi, n));
    }
    parse_list(key, spec)
}

/// `key=value` lines that rebuild `cfg` when parsed back.
pub fn echo(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    line("env", cfg.env.mode.name().to_string());
    line("K", cfg.env.arms.to_string());
    line("eps", format!("{:?}", cfg.env.epsilon));
    line("rho", format!("{:?}", cfg.env.rho));
    line("base_p", format!("{:?}", cfg.env.base_p));
    line("policy", cfg.policy.kind.name().to_string());
    line("lambda", format!("{:?}", cfg.policy.lambda));
    line("T", cfg.horizon.to_string());
    line("N", cfg.runs.to_string());
    line("seed", cfg.master_seed.to_string());
    line("cell", cfg.cell_index.to_string());
    line("granularity", cfg.granularity.name().to_string());
    out
}
