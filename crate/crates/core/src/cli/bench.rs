//! Per-decision latency of each policy: repeated loops of action selection
//! plus belief update with the outcome held fixed.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{ensure, Result};
use crate::policies::{Agent, Policy, PolicyKind, PolicySpec};
use crate::specfun::{derive_stream, Role};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kind: PolicyKind,
    pub arms: usize,
    /// Median over repetitions of the mean time per decision.
    pub median_ms: f64,
}

pub fn time_decisions(kind: PolicyKind, arms: usize, horizon: u64, reps: usize, seed: u64) -> Result<f64> {
    ensure!(horizon >= 1 && reps >= 1, Usage, "bench needs T >= 1 and at least one repetition");
    let spec = PolicySpec::new(kind, 0.1)?;
    let mut per_decision = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut agent = Agent::new(spec, arms, 0.0)?;
        let mut rng = derive_stream(seed, rep as u64, Role::Agent);
        let start = Instant::now();
        for _ in 0..horizon {
            let arm = agent.choose(&mut rng)?;
            agent.observe(arm, 1)?;
        }
        per_decision.push(start.elapsed().as_secs_f64() * 1e3 / horizon as f64);
    }
    per_decision.sort_by(f64::total_cmp);
    Ok(per_decision[reps / 2])
}

pub fn run_bench(kinds: &[PolicyKind], arms: &[usize], horizon: u64, reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    ensure!(!kinds.is_empty() && !arms.is_empty(), Usage, "bench needs at least one policy and one K");
    for &k in arms {
        ensure!(k >= 2, Config, "number of arms K must be at least 2, got {k}");
    }
    let mut rows = Vec::with_capacity(kinds.len() * arms.len());
    for &kind in kinds {
        for &k in arms {
            rows.push(BenchRow { kind, arms: k, median_ms: time_decisions(kind, k, horizon, reps, seed)? });
        }
    }
    Ok(rows)
}

/// Markdown-style table, one row per policy and one column per K.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut arms: Vec<usize> = rows.iter().map(|r| r.arms).collect();
    arms.sort_unstable();
    arms.dedup();
    let mut kinds: Vec<PolicyKind> = Vec::new();
    for r in rows {
        if !kinds.contains(&r.kind) {
            kinds.push(r.kind);
        }
    }
    let mut out = String::from("| Algorithm |");
    for k in &arms {
        let _ = write!(out, " K={k} |");
    }
    out.push('\n');
    out.push_str("|---|");
    out.push_str(&"---|".repeat(arms.len()));
    out.push('\n');
    for kind in kinds {
        let _ = write!(out, "| {} |", kind.label());
        for &k in &arms {
            match rows.iter().find(|r| r.kind == kind && r.arms == k) {
                Some(r) => {
                    let _ = write!(out, " {:.4} |", r.median_ms);
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}
