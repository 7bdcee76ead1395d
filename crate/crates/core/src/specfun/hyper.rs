//! Confluent hypergeometric function and the generalized Ricean mean.

use super::gamma::{ln_gamma, reg_upper_gamma};
use crate::error::{domain, Result};

/// Arguments `m * snr / 2` at or above this use the Hadamard form of the
/// Ricean mean; below it the Kummer series.
pub const RICEAN_HADAMARD_MIN_ARG: f64 = 80.0;

const HADAMARD_MAX_TERMS: usize = 120;

/// `ln 1F1(a; b; x)` for `a, b > 0` and `x >= 0` by the Kummer series.
///
/// All terms are positive, so the sum is accumulated with rescaling and no
/// cancellation occurs; the cost grows roughly linearly in `x`.
pub fn ln_hyp1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("1F1 series needs a, b > 0 (a = {a}, b = {b})"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("1F1 series needs finite x >= 0, got {x}"));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ln_scale = 0.0;
    let mut k = 0.0;
    loop {
        term *= (a + k) * x / ((b + k) * (k + 1.0));
        sum += term;
        if sum > 1e280 {
            sum *= 1e-280;
            term *= 1e-280;
            ln_scale += 1e280f64.ln();
        }
        k += 1.0;
        if (k > x && term < 1e-17 * sum) || term == 0.0 {
            break;
        }
    }
    Ok(sum.ln() + ln_scale)
}

/// Mean of `R = || u + z / sqrt(snr) ||` with `||u||^2 = m`, `z ~ N(0, I_m)`.
pub fn ricean_mean(m: u32, snr: f64) -> Result<f64> {
    check(m, snr)?;
    let x = m as f64 * snr / 2.0;
    if x < RICEAN_HADAMARD_MIN_ARG {
        Ok(kummer_mean(m, snr))
    } else {
        let (head, tail) = hadamard_parts(m, x);
        Ok((m as f64).sqrt() * (1.0 + head + tail))
    }
}

/// `E[R]/sqrt(m) - 1 - (m-1)/(2 m snr) + (m-1)(m-3)/(8 m^2 snr^2)`, the
/// remainder after the two-term high-SNR expansion, computed without
/// subtracting nearly equal quantities when the Hadamard branch applies.
pub fn ricean_mean_excess(m: u32, snr: f64) -> Result<f64> {
    check(m, snr)?;
    let mf = m as f64;
    let x = mf * snr / 2.0;
    if x < RICEAN_HADAMARD_MIN_ARG {
        let two_term = 1.0 + (mf - 1.0) / (2.0 * mf * snr)
            - (mf - 1.0) * (mf - 3.0) / (8.0 * mf * mf * snr * snr);
        return Ok(kummer_mean(m, snr) / mf.sqrt() - two_term);
    }
    Ok(hadamard_excess(m, x))
}

fn check(m: u32, snr: f64) -> Result<()> {
    if m < 2 {
        return domain(format!("dimension must be >= 2, got {m}"));
    }
    if !(snr > 0.0) || !snr.is_finite() {
        return domain(format!("snr must be positive and finite, got {snr}"));
    }
    Ok(())
}

fn kummer_mean(m: u32, snr: f64) -> f64 {
    let mf = m as f64;
    let a = (mf + 1.0) / 2.0;
    let b = mf / 2.0;
    let x = mf * snr / 2.0;
    let ln_f = ln_hyp1f1(a, b, x).expect("parameters are positive");
    (2.0 / snr).sqrt() * (ln_gamma(a) - ln_gamma(b) + ln_f - x).exp()
}

/// Hadamard form: `E[R] = sqrt(m) * sum_k c_k x^-k P(k - 1/2, x)` with
/// `c_k = ((1-m)/2)_k (-1/2)_k / k!` and `x = m snr / 2`.
///
/// Returns `(sum_{k<=2} ..., sum_{k>=3} ...)` minus one, split so that the
/// two-term remainder is available separately.
fn hadamard_parts(m: u32, x: f64) -> (f64, f64) {
    let terms = hadamard_terms(m, x);
    let head: f64 = terms.iter().take(3).map(|t| t.value).sum::<f64>() - 1.0;
    let tail = pairwise(&terms.iter().skip(3).map(|t| t.value).collect::<Vec<_>>());
    (head, tail)
}

fn hadamard_excess(m: u32, x: f64) -> f64 {
    let terms = hadamard_terms(m, x);
    // the leading three terms contribute c_k x^-k (1 - Q_k); only -c_k x^-k Q_k
    // survives after removing the two-term expansion
    let mut parts: Vec<f64> = terms.iter().take(3).map(|t| -t.coeff * t.q).collect();
    parts.extend(terms.iter().skip(3).map(|t| t.value));
    pairwise(&parts)
}

struct HadamardTerm {
    coeff: f64,
    q: f64,
    value: f64,
}

fn hadamard_terms(m: u32, x: f64) -> Vec<HadamardTerm> {
    let mf = m as f64;
    let ln_x = x.ln();
    // Q(-1/2, x) = Q(1/2, x) - x^{-1/2} e^{-x} / sqrt(pi), Q(1/2, x) = erfc(sqrt x)
    let q_half = reg_upper_gamma(0.5, x);
    let mut q = q_half - (-0.5 * ln_x - x).exp() / std::f64::consts::PI.sqrt();
    let mut mu = -0.5f64;
    let mut c = 1.0;
    let mut out = Vec::with_capacity(16);
    out.push(HadamardTerm { coeff: 1.0, q, value: 1.0 - q });
    for k in 1..HADAMARD_MAX_TERMS {
        let kf = (k - 1) as f64;
        c *= ((1.0 - mf) / 2.0 + kf) * (-0.5 + kf) / (kf + 1.0) / x;
        if k == 1 {
            q = q_half;
        } else {
            q += (mu * ln_x - x - ln_gamma(mu + 1.0)).exp();
        }
        mu += 1.0;
        let value = c * (1.0 - q);
        out.push(HadamardTerm { coeff: c, q, value });
        if c == 0.0 || (k > 2 && value.abs() < 1e-18) {
            break;
        }
    }
    out
}

fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise(&xs[..n / 2]) + pairwise(&xs[n / 2..]),
    }
}
