use crate::beliefs::BeliefState;
use crate::specfun::digamma_unchecked as digamma;

/// Approximate active inference scores, `2 lambda mu + 1 / (2 nu)`. Larger is better.
pub fn aai_scores(b: &BeliefState, lambda: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(b.arms());
    aai_scores_into(b, lambda, &mut out);
    out
}

pub(crate) fn aai_scores_into(b: &BeliefState, lambda: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..b.arms()).map(|k| {
        let (mu, nu) = b.posterior_stats(k);
        2.0 * lambda * mu + 0.5 / nu
    }));
}

/// Expected free energy of pulling arm `k`, with every term that is the same
/// for all arms dropped. Smaller is better.
pub fn gai_efe(b: &BeliefState, lambda: f64, k: usize) -> f64 {
    let rho = b.rho();
    let keep = 1.0 - rho;
    let (mu, nu) = b.posterior_stats(k);
    let mu_t = mu + rho * (0.5 - mu);
    let neg_entropy = mu_t * mu_t.ln() + (1.0 - mu_t) * (1.0 - mu_t).ln();
    -2.0 * lambda * keep * mu + neg_entropy
        - keep * (mu * digamma(b.alpha()[k]) + (1.0 - mu) * digamma(b.beta()[k]))
        + keep * (digamma(nu) - 1.0 / nu)
}

pub(crate) fn gai_scores_into(b: &BeliefState, lambda: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..b.arms()).map(|k| gai_efe(b, lambda, k)));
}

/// Risk term: KL divergence from the predicted outcome distribution of arm
/// `k` to the normalised preference `P(o) ∝ exp(lambda (2o - 1))`.
pub fn efe_risk(b: &BeliefState, lambda: f64, k: usize) -> f64 {
    let q1 = b.predictive_mean(k);
    let log_z = (lambda.exp() + (-lambda).exp()).ln();
    let log_p1 = lambda - log_z;
    let log_p0 = -lambda - log_z;
    let mut kl = 0.0;
    for (q, log_p) in [(q1, log_p1), (1.0 - q1, log_p0)] {
        if q > 0.0 {
            kl += q * (q.ln() - log_p);
        }
    }
    kl
}

/// Ambiguity term: expected outcome entropy of arm `k` under the two-component
/// predictive prior (kept beliefs with weight `1 - rho`, reset prior with
/// weight `rho`).
pub fn efe_ambiguity(b: &BeliefState, k: usize) -> f64 {
    let rho = b.rho();
    let (alpha0, beta0) = b.prior();
    (1.0 - rho) * beta_expected_entropy(b.alpha()[k], b.beta()[k])
        + rho * beta_expected_entropy(alpha0, beta0)
}

/// `E[-x ln x - (1-x) ln(1-x)]` for `x ~ Beta(a, b)`, via
/// `E[x ln x] = mu (psi(a + 1) - psi(nu + 1))`.
fn beta_expected_entropy(a: f64, b: f64) -> f64 {
    let nu = a + b;
    let mu = a / nu;
    let psi_nu1 = digamma(nu + 1.0);
    -(mu * (digamma(a + 1.0) - psi_nu1) + (1.0 - mu) * (digamma(b + 1.0) - psi_nu1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beliefs(params: &[(f64, f64)], rho: f64) -> BeliefState {
        let (a, b): (Vec<_>, Vec<_>) = params.iter().cloned().unzip();
        BeliefState::from_params(a, b, rho).unwrap()
    }

    #[test]
    fn aai_examples() {
        let b = beliefs(&[(1.0, 1.0), (10.0, 10.0)], 0.0);
        let s = aai_scores(&b, 0.1);
        assert!((s[0] - 0.35).abs() < 1e-15);
        assert!((s[1] - 0.125).abs() < 1e-15);
        let s0 = aai_scores(&b, 0.0);
        assert_eq!(s0, vec![0.25, 0.025]);
    }

    #[test]
    fn aai_monotonicity() {
        let lambda = 0.3;
        // Increasing mu at fixed nu = 20.
        let b = beliefs(&[(5.0, 15.0), (10.0, 10.0), (15.0, 5.0)], 0.0);
        let s = aai_scores(&b, lambda);
        assert!(s[0] < s[1] && s[1] < s[2]);
        // Increasing nu at fixed mu = 0.5.
        let b = beliefs(&[(2.0, 2.0), (5.0, 5.0), (50.0, 50.0)], 0.0);
        let s = aai_scores(&b, lambda);
        assert!(s[0] > s[1] && s[1] > s[2]);
    }

    #[test]
    fn gai_uniform_arm_value() {
        let b = beliefs(&[(1.0, 1.0), (1.0, 1.0)], 0.0);
        let g = gai_efe(&b, 0.1, 0);
        // -0.1 - ln 2 + [psi(2) - psi(1)] - 1/2, with psi(2) - psi(1) = 1.
        let expected = -0.1 - std::f64::consts::LN_2 + 1.0 - 0.5;
        assert!((g - expected).abs() < 1e-12);
        assert!((g + 0.293_147_180_559_945_3).abs() < 1e-12);
    }

    #[test]
    fn gai_prefers_uncertain_arm_without_preferences() {
        let b = beliefs(&[(1.0, 1.0), (50.0, 50.0)], 0.0);
        assert!(gai_efe(&b, 0.0, 0) < gai_efe(&b, 0.0, 1));
    }

    /// Composite Simpson quadrature of `E[H(x)]` for `x ~ Beta(a, b)`.
    fn quadrature_entropy(a: f64, b: f64) -> f64 {
        let ln_b = crate::specfun::ln_beta(a, b).unwrap();
        let n = 200_000;
        let h = 1.0 / n as f64;
        let f = |x: f64| {
            if x <= 0.0 || x >= 1.0 {
                return 0.0;
            }
            let dens = ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_b).exp();
            dens * (-x * x.ln() - (1.0 - x) * (1.0 - x).ln())
        };
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn expected_entropy_matches_quadrature() {
        for &(a, b) in &[(1.0, 1.0), (2.0, 3.0), (5.0, 7.0), (20.0, 4.0)] {
            let closed = beta_expected_entropy(a, b);
            let quad = quadrature_entropy(a, b);
            assert!((closed - quad).abs() < 1e-8, "({a},{b}): {closed} vs {quad}");
        }
        // Uniform: E[H] = 1/2.
        assert!((beta_expected_entropy(1.0, 1.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn decomposition_agrees_up_to_constant() {
        let params = [(1.0, 1.0), (3.0, 8.0), (40.0, 12.5), (2.5, 1.5), (300.0, 310.0)];
        for &rho in &[0.0, 0.01, 0.2] {
            for &lambda in &[0.0, 0.1, 0.7] {
                let b = beliefs(&params, rho);
                let offset = efe_risk(&b, lambda, 0) + efe_ambiguity(&b, 0) - gai_efe(&b, lambda, 0);
                for k in 1..params.len() {
                    let d = efe_risk(&b, lambda, k) + efe_ambiguity(&b, k) - gai_efe(&b, lambda, k);
                    assert!((d - offset).abs() < 1e-10, "rho={rho} lambda={lambda} k={k}");
                }
            }
        }
    }
}
