use super::frequentist::ucb_indices_into;
use super::{
    aai_scores_into, bucb_indices_into, gai_scores_into, ots_indices_into, random_index,
    select_action, ts_indices_into, Extremum, FrequentistState, PolicyKind, PolicySpec,
};
use crate::beliefs::BeliefState;
use crate::error::Result;
use crate::specfun::RngStream;

/// Anything that can play a Bernoulli bandit one trial at a time.
pub trait Policy {
    fn choose(&mut self, rng: &mut RngStream) -> Result<usize>;
    fn observe(&mut self, arm: usize, outcome: u8) -> Result<()>;
}

#[derive(Debug, Clone)]
enum Learner {
    Bayes(BeliefState),
    Counts(FrequentistState),
}

/// A policy together with its learner. Bayesian kinds share the SMiLe
/// beliefs; classical UCB keeps pull counts.
#[derive(Debug, Clone)]
pub struct Agent {
    spec: PolicySpec,
    learner: Learner,
    scores: Vec<f64>,
    /// Trials completed.
    trials: u64,
}

impl Agent {
    pub fn new(spec: PolicySpec, arms: usize, rho: f64) -> Result<Self> {
        let learner = match spec.kind {
            PolicyKind::Ucb => Learner::Counts(FrequentistState::new(arms)?),
            _ => Learner::Bayes(BeliefState::new(arms, rho)?),
        };
        Ok(Self { spec, learner, scores: Vec::with_capacity(arms), trials: 0 })
    }

    pub fn spec(&self) -> PolicySpec {
        self.spec
    }

    pub fn beliefs(&self) -> Option<&BeliefState> {
        match &self.learner {
            Learner::Bayes(b) => Some(b),
            Learner::Counts(_) => None,
        }
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }
}

impl Policy for Agent {
    fn choose(&mut self, rng: &mut RngStream) -> Result<usize> {
        let lambda = self.spec.lambda;
        match &self.learner {
            Learner::Counts(f) => match ucb_indices_into(f, &mut self.scores)? {
                Some(arm) => Ok(arm),
                None => select_action(&self.scores, rng, Extremum::Max),
            },
            Learner::Bayes(b) => {
                let mode = match self.spec.kind {
                    PolicyKind::Aai => {
                        aai_scores_into(b, lambda, &mut self.scores);
                        Extremum::Max
                    }
                    PolicyKind::Gai => {
                        gai_scores_into(b, lambda, &mut self.scores);
                        Extremum::Min
                    }
                    PolicyKind::Bucb => {
                        bucb_indices_into(b, self.trials + 1, &mut self.scores)?;
                        Extremum::Max
                    }
                    PolicyKind::Ots => {
                        ots_indices_into(b, rng, &mut self.scores);
                        Extremum::Max
                    }
                    PolicyKind::Ts => {
                        ts_indices_into(b, rng, &mut self.scores);
                        Extremum::Max
                    }
                    PolicyKind::Random => return random_index(b.arms(), rng),
                    PolicyKind::Ucb => unreachable!("UCB uses the count learner"),
                };
                select_action(&self.scores, rng, mode)
            }
        }
    }

    fn observe(&mut self, arm: usize, outcome: u8) -> Result<()> {
        match &mut self.learner {
            Learner::Bayes(b) => b.update(arm, outcome)?,
            Learner::Counts(f) => f.observe(arm, outcome)?,
        }
        self.trials += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{derive_stream, Role};

    #[test]
    fn every_kind_plays() {
        for kind in PolicyKind::ALL {
            let mut agent = Agent::new(PolicySpec::new(kind, 0.1).unwrap(), 4, 0.01).unwrap();
            let mut rng = derive_stream(1, 0, Role::Agent);
            for t in 0..200 {
                let arm = agent.choose(&mut rng).unwrap();
                assert!(arm < 4, "{kind:?}");
                agent.observe(arm, (t % 3 == 0) as u8).unwrap();
            }
            assert_eq!(agent.trials(), 200);
        }
    }

    #[test]
    fn ucb_starts_round_robin() {
        let mut agent = Agent::new(PolicySpec::new(PolicyKind::Ucb, 0.0).unwrap(), 5, 0.0).unwrap();
        let mut rng = derive_stream(1, 0, Role::Agent);
        for expected in 0..5 {
            let arm = agent.choose(&mut rng).unwrap();
            assert_eq!(arm, expected);
            agent.observe(arm, 0).unwrap();
        }
        assert!(agent.beliefs().is_none());
    }
}
