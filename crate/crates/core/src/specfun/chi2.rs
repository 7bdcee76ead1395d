//! Scaled noncentral and central chi-squared laws.

use rand::Rng;
use rand_distr::StandardNormal;

use super::bessel::ln_bessel_i_unchecked;
use super::gamma::{digamma, ln_gamma};
use crate::error::{domain, invalid, Result};

/// `T = || u + z / sqrt(snr) ||^2` with `||u||^2 = m` and `z ~ N(0, I_m)`.
///
/// This is the squared norm of the scaled output of an `m`-dimensional
/// hypersphere-modulated channel; `snr * T` is noncentral chi-squared with
/// `m` degrees of freedom and noncentrality `m * snr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChi2Scaled {
    m: u32,
    snr: f64,
}

impl NoncentralChi2Scaled {
    pub fn new(m: u32, snr: f64) -> Result<Self> {
        if m < 2 {
            return invalid(format!("degrees of freedom must be >= 2, got {m}"));
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

    pub fn mean(&self) -> f64 {
        let m = self.m as f64;
        m + m / self.snr
    }

    pub fn variance(&self) -> f64 {
        let m = self.m as f64;
        2.0 * (m + 2.0 * m * self.snr) / (self.snr * self.snr)
    }

    /// `ln p_T(t)` with
    /// `p_T(t) = (snr/2) (t/m)^{m/4-1/2} exp(-snr (t+m)/2) I_{m/2-1}(snr sqrt(m t))`.
    pub fn logpdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NEG_INFINITY;
        }
        let m = self.m as f64;
        let snr = self.snr;
        let v = m / 2.0 - 1.0;
        if t == 0.0 {
            return if self.m == 2 {
                (snr / 2.0).ln() - snr * m / 2.0
            } else {
                f64::NEG_INFINITY
            };
        }
        let power = if self.m == 2 { 0.0 } else { (m / 4.0 - 0.5) * (t / m).ln() };
        (snr / 2.0).ln() + power - snr * (t + m) / 2.0 + ln_bessel_i_unchecked(v, snr * (m * t).sqrt())
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.logpdf(t).exp()
    }

    /// Draws `T` by construction, with the mean direction along the first axis.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let scale = 1.0 / self.snr.sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let first = (self.m as f64).sqrt() + scale * z0;
        let mut rest = 0.0;
        for _ in 1..self.m {
            let z: f64 = rng.sample(StandardNormal);
            rest += z * z;
        }
        first * first + rest * scale * scale
    }
}

/// Central chi-squared with `dof` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CentralChi2 {
    dof: u32,
}

impl CentralChi2 {
    pub fn new(dof: u32) -> Result<Self> {
        if dof < 1 {
            return invalid("central chi-squared needs at least one degree of freedom");
        }
        Ok(Self { dof })
    }

    /// The law of `||X||^2 / (E/2)` for `X ~ CN(0, E I_L)`: `2L` degrees of freedom.
    pub fn from_srr(l: u32) -> Result<Self> {
        if l < 1 {
            return invalid("symbol-rate ratio must be >= 1");
        }
        Self::new(2 * l)
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn logpdf(&self, t: f64) -> f64 {
        let k = self.dof as f64;
        if t < 0.0 {
            return f64::NEG_INFINITY;
        }
        if t == 0.0 {
            return match self.dof {
                1 => f64::INFINITY,
                2 => -(2f64.ln()),
                _ => f64::NEG_INFINITY,
            };
        }
        -(k / 2.0) * 2f64.ln() - ln_gamma(k / 2.0) + (k / 2.0 - 1.0) * t.ln() - t / 2.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (0..self.dof)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                z * z
            })
            .sum()
    }

    /// `E[ln T] = ln 2 + psi(dof/2)`; closed form only for even `dof`.
    pub fn expected_ln(&self) -> Result<f64> {
        if self.dof % 2 != 0 {
            return invalid("expected logarithm is provided for even degrees of freedom only");
        }
        Ok(2f64.ln() + digamma(self.dof / 2)?)
    }

    /// `E[1/T] = 1/(dof - 2)`, infinite for `dof <= 2`.
    pub fn expected_inverse(&self) -> f64 {
        if self.dof <= 2 {
            f64::INFINITY
        } else {
            1.0 / (self.dof as f64 - 2.0)
        }
    }
}
