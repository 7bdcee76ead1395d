//! Log-domain modified Bessel function of the first kind.
//!
//! Two branches:
//!
//! - the ascending power series
//!   `I_v(x) = (x/2)^v / Gamma(v+1) * sum_k (x^2/4)^k / (k! (v+1)_k)`,
//!   accumulated with rescaling so the partial sums never overflow;
//! - the Hadamard expansion
//!   `I_v(x) = e^x / sqrt(2 pi x) * sum_k a_k(v) / (2x)^k * P(1/2 + v + k, 2x)`,
//!   which is absolutely convergent and exact (not merely asymptotic) because
//!   of the incomplete-gamma factors.
//!
//! The Hadamard branch is used for `x >= max(30, 2 v^2)`.

use super::gamma::{ln_gamma, reg_upper_gamma};
use crate::error::{domain, Result};

/// Hard cap on the number of Hadamard terms.
pub const BESSEL_HADAMARD_MAX_TERMS: usize = 40;

const SERIES_MAX_TERMS: usize = 100_000;
const RESCALE_AT: f64 = 1e280;

/// `a_k(v) = (1/2 + v)_k (1/2 - v)_k / k!`.
pub fn pochhammer_coeff(v: f64, k: u32) -> f64 {
    let mut a = 1.0;
    for j in 0..k {
        let j = j as f64;
        a *= (0.5 + v + j) * (0.5 - v + j) / (j + 1.0);
    }
    a
}

/// `ln I_v(x)` for `v >= 0`, `x >= 0`.
pub fn log_bessel_i(v: f64, x: f64) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() {
        return domain(format!("Bessel order must be finite and >= 0, got {v}"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("Bessel argument must be finite and >= 0, got {x}"));
    }
    Ok(ln_bessel_i_unchecked(v, x))
}

/// Branch-selecting evaluation without argument validation.
#[inline]
pub fn ln_bessel_i_unchecked(v: f64, x: f64) -> f64 {
    if x >= crossover(v) {
        log_bessel_i_hadamard(v, x)
    } else {
        log_bessel_i_series(v, x)
    }
}

#[inline]
fn crossover(v: f64) -> f64 {
    f64::max(30.0, 2.0 * v * v)
}

/// Ascending power series, valid for every `x` but slow and lossy for large
/// arguments.
pub fn log_bessel_i_series(v: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if v == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ln_scale = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (v + kf + 1.0));
        sum += term;
        if sum > RESCALE_AT {
            sum /= RESCALE_AT;
            term /= RESCALE_AT;
            ln_scale += RESCALE_AT.ln();
        }
        // past the peak of the terms and negligible
        if kf + 1.0 > 0.5 * x && term < 1e-17 * sum {
            break;
        }
    }
    v * (0.5 * x).ln() - ln_gamma(v + 1.0) + sum.ln() + ln_scale
}

/// Hadamard expansion, intended for large arguments.
pub fn log_bessel_i_hadamard(v: f64, x: f64) -> f64 {
    let y = 2.0 * x;
    let ln_y = y.ln();
    // Q(mu, y) by upward recurrence Q(mu+1, y) = Q(mu, y) + y^mu e^-y / Gamma(mu+1)
    let mut mu = 0.5 + v;
    let mut q = reg_upper_gamma(mu, y);
    let mut a = 1.0;
    let mut inv_pow = 1.0;
    let mut sum = 1.0 - q;
    for k in 1..BESSEL_HADAMARD_MAX_TERMS {
        let kf = (k - 1) as f64;
        a *= (0.5 + v + kf) * (0.5 - v + kf) / (kf + 1.0);
        if a == 0.0 {
            // half-integer order: the expansion terminates
            break;
        }
        q += (mu * ln_y - y - ln_gamma(mu + 1.0)).exp();
        mu += 1.0;
        inv_pow /= y;
        let t = a * inv_pow * (1.0 - q).max(0.0);
        sum += t;
        if t.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn order_zero_at_origin() {
        assert_eq!(log_bessel_i(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(log_bessel_i(1.5, 0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn half_order_closed_form() {
        for &x in &[0.3, 2.0, 12.0, 29.0, 31.0, 80.0, 400.0] {
            let exact = ((2.0 / (PI * x)).sqrt() * x.sinh()).ln();
            let got = log_bessel_i(0.5, x).unwrap();
            assert!(rel(got, exact) < 1e-13, "x = {x}: {got} vs {exact}");
        }
    }

    #[test]
    fn matches_arbitrary_precision_values() {
        // reference values from a 50-digit evaluation
        let cases = [
            (3.0, 700.0, 695.799_266_837_937_2),
            (0.0, 1.0, 0.235_914_358_507_178_65),
            (1.0, 10.0, 7.890_203_834_104_212),
            (7.5, 50.0, 46.560_438_277_819_56),
            (2.5, 1e4, 9_994.475_591_265_807),
            (0.0, 1e8, 99_999_989.870_721_1),
            (1.0, 35.0, 32.292_516_114_453_23),
        ];
        for (v, x, want) in cases {
            let got = log_bessel_i(v, x).unwrap();
            assert!(rel(got, want) < 1e-10, "v = {v}, x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn branches_agree_around_crossover() {
        for &v in &[0.0, 0.5, 1.0, 3.0, 7.5] {
            let c = crossover(v);
            for f in [0.8, 0.9, 1.0, 1.1, 1.25] {
                let x = c * f;
                let s = log_bessel_i_series(v, x);
                let h = log_bessel_i_hadamard(v, x);
                assert!((s - h).abs() < 1e-11, "v = {v}, x = {x}: {s} vs {h}");
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        // I_{v-1}(x) - I_{v+1}(x) = (2v/x) I_v(x)
        for &v in &[1.0, 1.5, 2.0, 3.0, 4.5] {
            for &x in &[0.5, 3.0, 10.0, 25.0, 40.0, 70.0] {
                let lm = log_bessel_i(v - 1.0, x).unwrap();
                let l0 = log_bessel_i(v, x).unwrap();
                let lp = log_bessel_i(v + 1.0, x).unwrap();
                // scale by e^-l0 to stay in range
                let lhs = (lm - l0).exp() - (lp - l0).exp();
                let rhs = 2.0 * v / x;
                assert!(rel(lhs, rhs) < 1e-9, "v = {v}, x = {x}");
            }
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer_coeff(2.3, 0), 1.0);
        assert_eq!(pochhammer_coeff(0.5, 1), 0.0);
        assert_eq!(pochhammer_coeff(1.0, 1), -0.75);
        // a_2(v) = (1/2+v)(3/2+v)(1/2-v)(3/2-v)/2
        let v: f64 = 0.2;
        let direct = (0.5 + v) * (1.5 + v) * (0.5 - v) * (1.5 - v) / 2.0;
        assert!((pochhammer_coeff(v, 2) - direct).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_arguments() {
        assert!(log_bessel_i(-0.1, 1.0).is_err());
        assert!(log_bessel_i(1.0, -1.0).is_err());
    }

    #[test]
    fn finite_for_huge_arguments() {
        for &v in &[0.0, 3.0, 7.0] {
            let l = log_bessel_i(v, 1e8).unwrap();
            assert!(l.is_finite());
        }
    }
}
