//! Beamforming, capacity upper bounds and low-SNR quantities for the
//! reduced channel `Hcheck`.
//!
//! The beamforming gain `F* = max_phi || Hcheck e^{j phi} ||^2` is computed
//! by cyclic coordinate ascent with restarts. The value returned is always
//! achieved by the returned phases, so it is a certified lower bound on the
//! true optimum; `(n+1) ||Hcheck||_F^2` brackets it from above.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::channel_model::EquivalentChannel;
use crate::error::{invalid, Error, Result};
use crate::mc::stream_rng;
use crate::specfun::quad::gauss_hermite;
use crate::{CMatrix, CVector, Complex64, LOG2_E};

/// Gauss-Hermite order used by [`bipolar_input_mi`].
pub const BIPOLAR_GH_NODES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UqpOptions {
    /// Random initializations on top of the MRT start.
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative objective change below which a run stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for UqpOptions {
    fn default() -> Self {
        Self { restarts: 16, max_iter: 500, tol: 1e-12, seed: 0x0051_7a7e }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UqpSolution {
    /// Phases in `[0, 2 pi)`, last entry fixed to zero.
    pub phi_star: Vec<f64>,
    pub f_star: f64,
    /// Sweeps used by the winning run.
    pub iterations: usize,
    pub restarts_used: usize,
    /// False when the winning run hit `max_iter`.
    pub converged: bool,
}

struct Run {
    phi: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn columns(h: &CMatrix) -> Vec<CVector> {
    (0..h.ncols()).map(|k| h.column(k).into_owned()).collect()
}

fn combine(cols: &[CVector], phi: &[f64]) -> CVector {
    let mut s = CVector::zeros(cols[0].len());
    for (h, &p) in cols.iter().zip(phi) {
        s.axpy(Complex64::from_polar(1.0, p), h, Complex64::new(1.0, 0.0));
    }
    s
}

fn ascend(cols: &[CVector], mut phi: Vec<f64>, max_iter: usize, tol: f64) -> Run {
    let mut value = combine(cols, &phi).norm_squared();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut s = combine(cols, &phi);
        for (k, h) in cols.iter().enumerate() {
            let own = h * Complex64::from_polar(1.0, phi[k]);
            let rest = &s - &own;
            let ip = h.dotc(&rest);
            if ip.norm() > 0.0 {
                phi[k] = ip.arg();
            }
            s = rest + h * Complex64::from_polar(1.0, phi[k]);
        }
        let next = combine(cols, &phi).norm_squared();
        debug_assert!(next >= value * (1.0 - 1e-12) - 1e-300, "coordinate ascent decreased the objective");
        let change = (next - value).abs() / next.max(f64::MIN_POSITIVE);
        value = next.max(value);
        if change < tol {
            converged = true;
            break;
        }
    }
    let value = combine(cols, &phi).norm_squared();
    Run { phi, value, iterations, converged }
}

/// Shifts all phases so the last is zero and wraps into `[0, 2 pi)`.
pub fn gauge_fix(phi: &[f64]) -> Vec<f64> {
    let last = *phi.last().unwrap_or(&0.0);
    phi.iter()
        .map(|p| {
            let w = (p - last).rem_euclid(TAU);
            if w >= TAU {
                0.0
            } else {
                w
            }
        })
        .collect()
}

/// Maximizes `|| Hcheck e^{j phi} ||_2^2` over phase vectors.
pub fn solve_uqp(eq: &EquivalentChannel, opts: &UqpOptions) -> Result<UqpSolution> {
    if eq.frobenius_sq() <= 0.0 {
        return Err(Error::DegenerateChannel("beamforming on an all-zero channel".into()));
    }
    if opts.max_iter == 0 {
        return invalid("max_iter must be >= 1");
    }
    let cols = columns(eq.hcheck());
    let n = cols.len();
    // Hcheck = diag(rho) V1^H, so the strongest left singular direction is e_1.
    let mrt: Vec<f64> = (0..n).map(|k| -eq.hcheck()[(0, k)].arg()).collect();
    let runs: Vec<Run> = (0..=opts.restarts)
        .into_par_iter()
        .map(|r| {
            let init = if r == 0 {
                mrt.clone()
            } else {
                let mut rng = stream_rng(opts.seed, r as u64);
                (0..n).map(|_| rng.random::<f64>() * TAU).collect()
            };
            ascend(&cols, init, opts.max_iter, opts.tol)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one run");
    let phi_star = gauge_fix(&best.phi);
    let f_star = combine(&cols, &phi_star).norm_squared();
    Ok(UqpSolution {
        phi_star,
        f_star,
        iterations: best.iterations,
        restarts_used: opts.restarts + 1,
        converged: best.converged,
    })
}

/// `log2(1 + F* E)`.
pub fn beamforming_rate(f_star: f64, power: f64) -> f64 {
    (f_star * power).ln_1p() * LOG2_E
}

/// Maximum-trace bound `tau log2(1 + E F* / tau)`.
pub fn ub_max_trace(tau: usize, f_star: f64, power: f64) -> f64 {
    let t = tau as f64;
    t * (power * f_star / t).ln_1p() * LOG2_E
}

/// `(n+1) ||Hcheck||_F^2`, an upper bound on `F*`.
pub fn frobenius_relaxation(eq: &EquivalentChannel) -> f64 {
    eq.n_cols() as f64 * eq.frobenius_sq()
}

/// Frobenius-norm bound `tau log2(1 + (n+1) E ||Hcheck||_F^2 / tau)`.
pub fn ub_frobenius(eq: &EquivalentChannel, power: f64) -> f64 {
    ub_max_trace(eq.tau(), frobenius_relaxation(eq), power)
}

/// Second-order small-power expansion of the mutual information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowSnrMiApprox {
    trace_cov: f64,
    trace_cov_sq: f64,
    power: f64,
}

impl LowSnrMiApprox {
    pub fn new(trace_cov: f64, trace_cov_sq: f64, power: f64) -> Result<Self> {
        if !(trace_cov >= 0.0 && trace_cov_sq >= 0.0 && power >= 0.0) {
            return invalid("traces and power must be nonnegative");
        }
        if trace_cov_sq > trace_cov * trace_cov * (1.0 + 1e-12) {
            return invalid(format!("tr(C^2) = {trace_cov_sq} exceeds tr(C)^2 = {}", trace_cov * trace_cov));
        }
        Ok(Self { trace_cov, trace_cov_sq, power })
    }

    pub fn trace_cov(&self) -> f64 {
        self.trace_cov
    }

    pub fn trace_cov_sq(&self) -> f64 {
        self.trace_cov_sq
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// `log2(e) tr(C) E - log2(e)/2 tr(C^2) E^2`.
pub fn mi_low_snr(a: &LowSnrMiApprox) -> f64 {
    LOG2_E * a.trace_cov * a.power - 0.5 * LOG2_E * a.trace_cov_sq * a.power * a.power
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mutual information of `Y = sqrt(F* E) B + N`, `B` uniform on `{-1, +1}`,
/// `N ~ N(0, 1/2)`, in bits.
pub fn bipolar_input_mi(f_star: f64, power: f64) -> f64 {
    let a = (f_star * power).max(0.0).sqrt();
    if a == 0.0 {
        return 0.0;
    }
    let (x, w) = gh_nodes();
    // Given B = +1 the log-likelihood ratio is 4 a y with y = a + N.
    let loss: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * softplus(-4.0 * a * (a + xi))).sum();
    (1.0 - loss * LOG2_E / PI.sqrt()).clamp(0.0, 1.0)
}

fn gh_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    NODES.get_or_init(|| gauss_hermite(BIPOLAR_GH_NODES))
}

/// Capacity `log2(1 + ||h||_1^2 E)` of a rank-one channel `h^T`.
pub fn rank_one_capacity(h: &CVector, power: f64) -> Result<f64> {
    let l1: f64 = h.iter().map(|z| z.norm()).sum();
    if !(l1 > 0.0) {
        return Err(Error::DegenerateChannel("rank-one channel vector is zero".into()));
    }
    Ok(beamforming_rate(l1 * l1, power))
}
