use crate::error::{ensure, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    ensure!(x > 0.0 && x.is_finite(), Domain, "ln_gamma requires x > 0, got {x}");
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Lanczos loses accuracy close to the origin; shift by one.
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Remainder of Stirling's series, `ln Γ(x) - [(x - ½) ln x - x + ½ ln 2π]`.
/// Accurate to machine precision for `x >= 10`.
pub(crate) fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0
                + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0))))))
}

/// `ln B(a, b)` for positive `a`, `b`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    ensure!(a > 0.0 && b > 0.0, Domain, "ln_beta requires a, b > 0, got ({a}, {b})");
    Ok(ln_beta_unchecked(a, b))
}

pub(crate) fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    if a >= 10.0 && b >= 10.0 {
        let s = a + b;
        let corr = stirling_correction(a) + stirling_correction(b) - stirling_correction(s);
        (a - 0.5) * (a / s).ln() + (b - 0.5) * (b / s).ln() - 0.5 * s.ln() + HALF_LN_2PI + corr
    } else {
        ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
    }
}

/// Digamma function ψ(x) for `x > 0`.
///
/// Small arguments are lifted with ψ(x) = ψ(x + 1) - 1/x until `x >= 6`,
/// then the asymptotic Bernoulli series is summed through the `x^-14` term.
pub fn digamma(x: f64) -> Result<f64> {
    ensure!(x > 0.0 && x.is_finite(), Domain, "digamma requires x > 0, got {x}");
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 6.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    shift + x.ln() - 0.5 * r - series
}
