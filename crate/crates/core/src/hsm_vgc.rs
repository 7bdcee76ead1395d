//! Capacity of the hypersphere-modulated vector Gaussian channel (HSM-VGC):
//! `Y = X + Z` in `R^m`, `||X||_2 = sqrt(m)`, `Z ~ N(0, I_m / snr)`.
//!
//! The uniform input on the sphere achieves capacity, and the capacity is an
//! expectation over `T = ||Y||^2` of a log-Bessel expression. It is estimated
//! by Monte Carlo with `sqrt(T)` as a control variate (its mean is the
//! generalized Ricean mean, known in closed form), which removes the part of
//! the variance that grows with the SNR.

use crate::error::{domain, invalid, Result};
use crate::mc::{self, McConfig, McEstimate};
use crate::specfun::quad::integrate_pieces;
use crate::specfun::{ln_bessel_i_unchecked, ln_gamma, ricean_mean, ricean_mean_excess, NoncentralChi2Scaled};
use crate::LOG2_E;

/// Smallest sample budget accepted by the Monte-Carlo estimators here.
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsmChannel {
    m: u32,
    snr: f64,
}

impl HsmChannel {
    pub fn new(m: u32, snr: f64) -> Result<Self> {
        if m < 2 {
            return invalid(format!("HSM-VGC dimension must be >= 2, got {m}"));
        }
        if !(snr > 0.0) || !snr.is_finite() {
            return domain(format!("snr must be positive and finite, got {snr}"));
        }
        Ok(Self { m, snr })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    fn law(&self) -> NoncentralChi2Scaled {
        NoncentralChi2Scaled::new(self.m, self.snr).expect("validated")
    }

    /// Capacity integrand at `T = t`, in bits.
    fn integrand(&self, t: f64) -> f64 {
        let m = self.m as f64;
        let snr = self.snr;
        let v = m / 2.0 - 1.0;
        let x = (m * t).sqrt() * snr;
        let mut out = v * (snr / 2.0).log2() + m * snr * LOG2_E - ln_gamma(m / 2.0) * LOG2_E;
        if self.m > 2 {
            out += (m - 2.0) / 4.0 * (m * t).log2();
        }
        out - ln_bessel_i_unchecked(v, x) * LOG2_E
    }
}

fn check_samples(mc: &McConfig) -> Result<()> {
    mc.validate()?;
    if mc.samples < MIN_SAMPLES {
        return invalid(format!("need at least {MIN_SAMPLES} Monte-Carlo samples, got {}", mc.samples));
    }
    Ok(())
}

/// Monte-Carlo estimate of the capacity in bits per channel use.
pub fn capacity_exact(ch: &HsmChannel, mc: &McConfig) -> Result<McEstimate> {
    check_samples(mc)?;
    let law = ch.law();
    let mean_r = ricean_mean(ch.m, ch.snr)?;
    let moments = mc::run(mc, |rng| {
        let t = law.sample(rng);
        [ch.integrand(t), t.sqrt() - mean_r]
    });
    Ok(moments.control_variate(mc.seed))
}

/// Capacity by adaptive quadrature against the density of `T`.
pub fn capacity_quadrature(ch: &HsmChannel) -> Result<f64> {
    let law = ch.law();
    let mu = law.mean();
    let sd = law.variance().sqrt();
    let mut breaks = vec![0.0];
    for k in [-12.0, -8.0, -5.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 40.0] {
        let b = mu + k * sd;
        if b > *breaks.last().unwrap() {
            breaks.push(b);
        }
    }
    let f = |t: f64| {
        let p = law.pdf(t);
        if p == 0.0 {
            0.0
        } else {
            p * ch.integrand(t)
        }
    };
    let r = integrate_pieces(f, &breaks, 1e-13, 1e-12);
    if !r.value.is_finite() {
        return domain(format!("quadrature failed for m = {}, snr = {}", ch.m, ch.snr));
    }
    Ok(r.value)
}

/// High-SNR expansion including the `1/snr` term.
pub fn capacity_asymptotic(ch: &HsmChannel) -> f64 {
    let m = ch.m as f64;
    let snr = ch.snr;
    let main = (m - 1.0) / 2.0 * (m * snr / (2.0 * std::f64::consts::E)).log2();
    let constant = (2.0 * std::f64::consts::PI.sqrt()).log2() - ln_gamma(m / 2.0) * LOG2_E;
    main + constant + correction_coefficient(ch.m) * LOG2_E / snr
}

/// Coefficient `m/2 - 7/4 + 5/(4m)` of `log2(e)/snr` in the expansion.
pub fn correction_coefficient(m: u32) -> f64 {
    let m = m as f64;
    m / 2.0 - 1.75 + 1.25 / m
}

/// Gaussian-input bound `(m/2) log2(1 + snr)`.
pub fn capacity_upper_bound(m: u32, snr: f64) -> f64 {
    m as f64 / 2.0 * snr.max(0.0).ln_1p() * LOG2_E
}

/// Capacity slope at zero SNR, bits per unit SNR.
pub fn low_snr_slope(m: u32) -> f64 {
    m as f64 * LOG2_E / 2.0
}

/// Scaled approximation errors of the three expansions behind the
/// asymptotic capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deltas {
    pub delta1: McEstimate,
    pub delta2: McEstimate,
    /// Deterministic.
    pub delta3: f64,
}

/// `Delta1` (Bessel expansion), `Delta2` (expected log-norm) and `Delta3`
/// (Ricean mean), each scaled by the power of `snr` that makes the leading
/// neglected term order `1/snr`.
pub fn diagnostics_delta(ch: &HsmChannel, mc: &McConfig) -> Result<Deltas> {
    check_samples(mc)?;
    let m = ch.m as f64;
    let snr = ch.snr;
    let law = ch.law();
    let v = m / 2.0 - 1.0;
    let mean_t = law.mean();

    let d1 = mc::run(&mc.derive(1), |rng| {
        let t = law.sample(rng);
        let x = (m * t).sqrt() * snr;
        let k = ln_bessel_i_unchecked(v, x) - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln();
        [k * LOG2_E]
    })
    .estimate(0, mc.derive(1).seed);
    let target1 = (-m * m + 4.0 * m - 3.0) / (8.0 * m) * LOG2_E / snr;
    let delta1 = d1.affine(snr, -target1 * snr);

    let var_t = law.variance();
    let d2 = mc::run(&mc.derive(2), |rng| {
        let t = law.sample(rng);
        let c = t - mean_t;
        [(t / m).log2(), c, c * c - var_t]
    })
    .control_variates(mc.derive(2).seed);
    let target2 = (m - 2.0) / m * LOG2_E / snr;
    let delta2 = d2.affine(snr, -target2 * snr);

    let delta3 = m.sqrt() * ricean_mean_excess(ch.m, snr)? * snr * snr;
    Ok(Deltas { delta1, delta2, delta3 })
}
