use crate::error::{domain, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_lr(a, x)
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn reg_upper_gamma(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(a, x)
}

/// Digamma at a positive integer: `psi(L) = -gamma + sum_{j<L} 1/j`.
pub fn digamma(l: u32) -> Result<f64> {
    if l < 1 {
        return domain("digamma is only defined here for integers L >= 1");
    }
    let harmonic: f64 = (1..l).map(|j| 1.0 / j as f64).sum();
    Ok(harmonic - EULER_GAMMA)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digamma_small_values() {
        assert_eq!(digamma(1).unwrap(), -EULER_GAMMA);
        assert!((digamma(2).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-15);
        assert!(digamma(0).is_err());
    }

    #[test]
    fn digamma_matches_asymptotic_series() {
        // psi(x) ~ ln x - 1/(2x) - sum B_2k / (2k x^2k), shifted up to x = 30
        fn psi_oracle(x: f64) -> f64 {
            let mut shift = 0.0;
            let mut y = x;
            while y < 30.0 {
                shift -= 1.0 / y;
                y += 1.0;
            }
            let y2 = 1.0 / (y * y);
            let series = y2 * (1.0 / 12.0 - y2 * (1.0 / 120.0 - y2 * (1.0 / 252.0 - y2 * (1.0 / 240.0 - y2 / 132.0))));
            shift + y.ln() - 0.5 / y - series
        }
        for l in [3u32, 10, 25] {
            let got = digamma(l).unwrap();
            assert!((got - psi_oracle(l as f64)).abs() < 1e-14, "L = {l}");
            assert!((got - statrs::function::gamma::digamma(l as f64)).abs() < 1e-13);
        }
    }
}
