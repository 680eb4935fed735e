use crate::error::{ensure, Error, Result};

/// Pull counts and empirical success rates for the classical UCB baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequentistState {
    counts: Vec<u64>,
    successes: Vec<u64>,
    /// Trials observed so far.
    t: u64,
}

impl FrequentistState {
    pub fn new(arms: usize) -> Result<Self> {
        ensure!(arms >= 2, Config, "number of arms K must be at least 2, got {arms}");
        Ok(Self { counts: vec![0; arms], successes: vec![0; arms], t: 0 })
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Empirical success rate; `None` for an unpulled arm.
    pub fn mean(&self, k: usize) -> Option<f64> {
        (self.counts[k] > 0).then(|| self.successes[k] as f64 / self.counts[k] as f64)
    }

    pub fn observe(&mut self, k: usize, outcome: u8) -> Result<()> {
        ensure!(k < self.arms(), Usage, "arm {k} out of range");
        ensure!(outcome <= 1, Usage, "outcome must be 0 or 1, got {outcome}");
        self.counts[k] += 1;
        self.successes[k] += outcome as u64;
        self.t += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UcbChoice {
    /// Round-robin initialisation over the first K trials.
    Forced(usize),
    Indices(Vec<f64>),
}

/// Index for the upcoming trial `t = f.t() + 1`:
/// `m + ln t / n + sqrt(m ln t / n)` once every arm has been tried.
pub fn ucb_indices(f: &FrequentistState) -> Result<UcbChoice> {
    let mut out = Vec::with_capacity(f.arms());
    match ucb_indices_into(f, &mut out)? {
        Some(arm) => Ok(UcbChoice::Forced(arm)),
        None => Ok(UcbChoice::Indices(out)),
    }
}

pub(crate) fn ucb_indices_into(f: &FrequentistState, out: &mut Vec<f64>) -> Result<Option<usize>> {
    let t = f.t + 1;
    let arms = f.arms() as u64;
    if t <= arms {
        return Ok(Some((t - 1) as usize));
    }
    let ln_t = (t as f64).ln();
    out.clear();
    for k in 0..f.arms() {
        let n = f.counts[k];
        if n == 0 {
            return Err(Error::Internal(format!("arm {k} unpulled after initialisation")));
        }
        out.push(ucb_index(f.successes[k] as f64 / n as f64, n, ln_t));
    }
    Ok(None)
}

#[inline]
fn ucb_index(mean: f64, n: u64, ln_t: f64) -> f64 {
    let ratio = ln_t / n as f64;
    mean + ratio + (mean * ratio).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(successes: &[u64], counts: &[u64]) -> FrequentistState {
        FrequentistState {
            counts: counts.to_vec(),
            successes: successes.to_vec(),
            t: counts.iter().sum(),
        }
    }

    #[test]
    fn round_robin_start() {
        let mut f = FrequentistState::new(10).unwrap();
        for expected in 0..10 {
            assert_eq!(ucb_indices(&f).unwrap(), UcbChoice::Forced(expected));
            f.observe(expected, 1).unwrap();
        }
        assert!(matches!(ucb_indices(&f).unwrap(), UcbChoice::Indices(_)));
        // Third trial is the third arm (index 2).
        let mut f = FrequentistState::new(10).unwrap();
        f.observe(0, 0).unwrap();
        f.observe(1, 0).unwrap();
        assert_eq!(ucb_indices(&f).unwrap(), UcbChoice::Forced(2));
    }

    #[test]
    fn index_values() {
        assert!((ucb_index(0.5, 10, 100f64.ln()) - 1.440_369_609_817_617).abs() < 1e-12);
        assert!((ucb_index(0.0, 5, 50f64.ln()) - 0.782_404_601_085_629_2).abs() < 1e-12);
    }

    #[test]
    fn index_from_state() {
        // Two arms, t = 100 on the upcoming trial.
        let f = state(&[5, 45], &[10, 89]);
        let UcbChoice::Indices(idx) = ucb_indices(&f).unwrap() else { panic!("forced") };
        assert!((idx[0] - 1.440_369_609_817_617).abs() < 1e-12);
    }

    #[test]
    fn zero_count_after_init_is_internal_error() {
        let f = state(&[0, 3], &[0, 5]);
        assert!(matches!(ucb_indices(&f), Err(Error::Internal(_))));
    }

    #[test]
    fn means_only_when_pulled() {
        let mut f = FrequentistState::new(3).unwrap();
        assert_eq!(f.mean(0), None);
        f.observe(0, 1).unwrap();
        f.observe(0, 0).unwrap();
        assert_eq!(f.mean(0), Some(0.5));
    }
}
