//! Result files: trajectory CSV, per-run final regrets, and a key=value
//! summary whose leading block re-creates the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::echo;
use crate::error::{Error, Result};
use crate::sim::{EnsembleSummary, Estimate};

pub const TRAJECTORY_HEADER: &str =
    "trial,mean_regret_rate,rr_ci_low,rr_ci_high,mean_cum_regret,cr_ci_low,cr_ci_high";
pub const FINALS_HEADER: &str = "run_index,final_cum_regret";

/// `x` in plain decimal notation with 10 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.9999999999 -> 10.000000000).
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 10 && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn push_estimate(row: &mut String, e: &Estimate) {
    let _ = write!(row, ",{}", fmt_sig(e.mean));
    match e.ci {
        Some((lo, hi)) => {
            let _ = write!(row, ",{},{}", fmt_sig(lo), fmt_sig(hi));
        }
        None => row.push_str(",,"),
    }
}

pub fn trajectory_csv(summary: &EnsembleSummary) -> String {
    let mut out = String::with_capacity(64 * (summary.checkpoints.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (j, t) in summary.checkpoints.iter().enumerate() {
        out.push_str(&t.to_string());
        push_estimate(&mut out, &summary.regret_rate[j]);
        push_estimate(&mut out, &summary.cumulative_regret[j]);
        out.push('\n');
    }
    out
}

pub fn finals_csv(summary: &EnsembleSummary) -> String {
    let mut out = String::from(FINALS_HEADER);
    out.push('\n');
    for (i, r) in summary.final_regret.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_sig(*r));
    }
    out
}

/// Provenance block followed by headline results. Contains no timestamps,
/// so identical runs give identical files.
pub fn summary_text(summary: &EnsembleSummary) -> String {
    let mut out = String::from("# efe-bandits ensemble summary\n");
    out.push_str(&echo(&summary.config));
    let _ = writeln!(out, "version={}", env!("CARGO_PKG_VERSION"));
    let rate = summary.final_rate();
    let cum = summary.final_cumulative();
    let _ = writeln!(out, "result.final_mean_regret_rate={}", fmt_sig(rate.mean));
    let _ = writeln!(out, "result.final_mean_cum_regret={}", fmt_sig(cum.mean));
    if let Some((lo, hi)) = cum.ci {
        let _ = writeln!(out, "result.final_cum_regret_ci={},{}", fmt_sig(lo), fmt_sig(hi));
    }
    let _ = writeln!(out, "result.degenerate_ci={}", summary.degenerate_ci);
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn write_trajectory_csv(summary: &EnsembleSummary, path: &Path) -> Result<()> {
    write(path, &trajectory_csv(summary))
}

/// Files written for one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePaths {
    pub trajectory: PathBuf,
    pub finals: PathBuf,
    pub summary: PathBuf,
}

/// Writes `<dir>/<name>.csv`, `<name>.finals.csv` and `<name>.summary.txt`.
pub fn write_bundle(summary: &EnsembleSummary, dir: &Path, name: &str) -> Result<BundlePaths> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let paths = BundlePaths {
        trajectory: dir.join(format!("{name}.csv")),
        finals: dir.join(format!("{name}.finals.csv")),
        summary: dir.join(format!("{name}.summary.txt")),
    };
    write(&paths.trajectory, &trajectory_csv(summary))?;
    write(&paths.finals, &finals_csv(summary))?;
    write(&paths.summary, &summary_text(summary))?;
    Ok(paths)
}

/// Wall-clock record kept apart from the deterministic outputs.
pub fn write_timing(dir: &Path, name: &str, started_unix: u64, elapsed_s: f64) -> Result<()> {
    let text = format!("started_unix={started_unix}\nelapsed_seconds={elapsed_s:.3}\n");
    write(&dir.join(format!("{name}.timing.txt")), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.09), "0.09000000000");
        assert_eq!(fmt_sig(422.700439045181), "422.7004390");
        assert_eq!(fmt_sig(1234567890123.0), "1234567890123");
        assert_eq!(fmt_sig(-0.5), "-0.5000000000");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(9.99999999999), "10.00000000");
    }
}
