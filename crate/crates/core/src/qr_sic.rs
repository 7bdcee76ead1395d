//! QR-SIC transceiver.
//!
//! With `Hcheck = Q R` the receiver applies `Q^H` and decodes the `tau`
//! triangular sub-channels bottom-up with successive interference
//! cancellation. The last sub-channel collects all elements `k >= tau`; their
//! phases are matched (beamforming) to give the gain `G_tau`. The phases of
//! the first `tau - 1` elements carry independent phase-modulated streams.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use crate::channel_model::{check_permutation, EquivalentChannel};
use crate::error::{invalid, Error, Result};
use crate::hsm_vgc::{capacity_asymptotic, capacity_exact, capacity_quadrature, HsmChannel};
use crate::mc::{self, stream_rng, McConfig, McEstimate};
use crate::specfun::{digamma, ln_gamma, CentralChi2, EULER_GAMMA};
use crate::{CMatrix, Complex64, LOG2_E};

/// Relative size below which a diagonal entry of `R` counts as zero.
pub const PLAN_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QrPlan {
    q: CMatrix,
    r: CMatrix,
    g_tau: f64,
    beamform_phases: Vec<f64>,
}

impl QrPlan {
    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn tau(&self) -> usize {
        self.r.nrows()
    }

    pub fn g_tau(&self) -> f64 {
        self.g_tau
    }

    /// `-arg(r_{tau,k})` for `k = tau..n+1`.
    pub fn beamform_phases(&self) -> &[f64] {
        &self.beamform_phases
    }

    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.tau()).map(|i| self.r[(i, i)].re).collect()
    }

    /// `r_11, ..., r_{tau-1,tau-1}`: gains of the phase-modulated streams.
    pub fn stream_gains(&self) -> Vec<f64> {
        let mut d = self.r_diag();
        d.pop();
        d
    }
}

/// QR factorization with nonnegative real diagonal.
pub fn plan(eq: &EquivalentChannel) -> Result<QrPlan> {
    let h = eq.hcheck();
    let tau = h.nrows();
    if h.ncols() < tau {
        return invalid(format!("channel has {} rows but only {} columns", tau, h.ncols()));
    }
    let qr = h.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let scale = eq.frobenius_sq().sqrt();
    for i in 0..tau {
        let d = r[(i, i)];
        if d.norm() <= PLAN_RANK_TOL * scale {
            return Err(Error::DegenerateChannel(format!(
                "R[{i},{i}] vanishes; reduce the channel to full row rank first"
            )));
        }
        let u = d / d.norm();
        r.row_mut(i).apply(|z| *z *= u.conj());
        q.column_mut(i).apply(|z| *z *= u);
        r[(i, i)] = Complex64::new(r[(i, i)].re, 0.0);
    }
    let tol = 1e-12 * scale.max(1.0);
    let recon = (&q * &r - h).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let unit = (q.adjoint() * &q - CMatrix::identity(tau, tau)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if recon > tol || unit > 1e-12 {
        return Err(Error::Domain(format!("QR invariants violated: |QR - H| = {recon:e}, |Q^H Q - I| = {unit:e}")));
    }
    let last = tau - 1;
    let g_tau = (last..h.ncols()).map(|k| r[(last, k)].norm()).sum();
    let beamform_phases = (last..h.ncols()).map(|k| -r[(last, k)].arg()).collect();
    Ok(QrPlan { q, r, g_tau, beamform_phases })
}

/// `C_S^(2)` tabulated on a uniform grid in `ln snr` and interpolated with a
/// monotone piecewise-cubic Hermite scheme.
#[derive(Debug, Clone)]
pub struct Cs2Table {
    ln_lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Cs2Table {
    pub const LO_DB: f64 = -40.0;
    pub const HI_DB: f64 = 60.0;
    pub const STEP_DB: f64 = 0.25;

    /// Builds the table by quadrature of the capacity expectation.
    pub fn build() -> Self {
        let n = ((Self::HI_DB - Self::LO_DB) / Self::STEP_DB).round() as usize + 1;
        let step = Self::STEP_DB * std::f64::consts::LN_10 / 10.0;
        let ln_lo = Self::LO_DB * std::f64::consts::LN_10 / 10.0;
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let snr = (ln_lo + i as f64 * step).exp();
                capacity_quadrature(&HsmChannel::new(2, snr).expect("positive snr")).expect("quadrature")
            })
            .collect();
        let slopes = pchip_slopes(&values, step);
        Self { ln_lo, step, values, slopes }
    }

    /// Shared instance, built on first use.
    pub fn global() -> &'static Self {
        static TABLE: OnceLock<Cs2Table> = OnceLock::new();
        TABLE.get_or_init(Self::build)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `C_S^(2)(snr)` in bits. Below the grid the capacity is continued
    /// linearly in `snr`; above it the high-SNR expansion is used.
    pub fn eval(&self, snr: f64) -> f64 {
        if !(snr > 0.0) {
            return 0.0;
        }
        let x = (snr.ln() - self.ln_lo) / self.step;
        let last = self.values.len() - 1;
        if x < 0.0 {
            return self.values[0] * snr / self.ln_lo.exp();
        }
        if x >= last as f64 {
            return capacity_asymptotic(&HsmChannel::new(2, snr).expect("positive snr"));
        }
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }
}

/// Fritsch-Carlson derivative estimates on a uniform grid.
fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b > 0.0 {
            d[i] = 2.0 / (1.0 / a + 1.0 / b);
        }
    }
    let end = |d0: f64, d1: f64| {
        let s = (3.0 * d0 - d1) / 2.0;
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(delta[0], delta[1]);
    d[n - 1] = end(delta[n - 2], delta[n - 3]);
    d
}

fn check_rate_args(power: f64, l: u32) -> Result<()> {
    if l < 1 {
        return invalid("symbol-rate ratio L must be >= 1");
    }
    if !(power >= 0.0) || !power.is_finite() {
        return invalid(format!("power must be finite and >= 0, got {power}"));
    }
    Ok(())
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() * LOG2_E
}

/// Gaussian input on the beamformed stream, CPSK on the others.
///
/// Each stream term `E[C_S^(2)(r_ii^2 E T/2)]`, `T ~ chi^2_{2L}`, is a
/// Monte-Carlo average over `T` with `ln T` as control variate.
pub fn rate_gaussian_cpsk(p: &QrPlan, power: f64, l: u32, mc: &McConfig) -> Result<McEstimate> {
    check_rate_args(power, l)?;
    mc.validate()?;
    let head = log2_1p(p.g_tau * p.g_tau * power);
    let gains = p.stream_gains();
    if gains.is_empty() || power == 0.0 {
        return Ok(McEstimate { value: head, stderr: 0.0, samples: 0, seed: mc.seed });
    }
    let table = Cs2Table::global();
    let chi = CentralChi2::from_srr(l)?;
    let mean_ln = chi.expected_ln()?;
    let mut value = head;
    let mut var = 0.0;
    for (i, &r) in gains.iter().enumerate() {
        let cfg = mc.derive(i as u64);
        let scale = r * r * power / 2.0;
        let est = mc::run(&cfg, |rng| {
            let t = chi.sample(rng);
            [table.eval(scale * t), t.ln() - mean_ln]
        })
        .control_variate(cfg.seed);
        value += est.value / l as f64;
        var += (est.stderr / l as f64).powi(2);
    }
    Ok(McEstimate { value, stderr: var.sqrt(), samples: mc.samples, seed: mc.seed })
}

/// High-SNR expansion of one CPSK stream's `E[C_S^(2)]`.
pub fn cpsk_stream_asymptotic(r: f64, power: f64, l: u32) -> Result<f64> {
    let snr = r * r * power;
    let base = 0.5 * (4.0 * PI * snr / E).log2();
    if l == 1 {
        return Ok(base - 0.5 * LOG2_E * EULER_GAMMA);
    }
    Ok(base + 0.5 * LOG2_E * digamma(l)? - LOG2_E / (8.0 * (l as f64 - 1.0) * snr))
}

pub fn rate_gaussian_cpsk_asymptotic(p: &QrPlan, power: f64, l: u32) -> Result<f64> {
    check_rate_args(power, l)?;
    let mut rate = log2_1p(p.g_tau * p.g_tau * power);
    for r in p.stream_gains() {
        rate += cpsk_stream_asymptotic(r, power, l)? / l as f64;
    }
    Ok(rate)
}

/// How the `C_S` terms of the hypersphere/CPSK rate are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsEvaluator {
    MonteCarlo(McConfig),
    Quadrature,
    /// [`Cs2Table`] for two-dimensional terms, quadrature otherwise.
    Table,
    Asymptotic,
}

/// Hypersphere input of dimension `2L` on the beamformed stream, CPSK on
/// the others: `(C_S^(2L)(G^2 E) + sum_i C_S^(2)(r_ii^2 L E)) / L`.
pub fn rate_hypersphere_cpsk(p: &QrPlan, power: f64, l: u32, eval: CsEvaluator) -> Result<McEstimate> {
    check_rate_args(power, l)?;
    if power == 0.0 {
        return Ok(McEstimate::exact(0.0));
    }
    let mut terms = vec![(2 * l, p.g_tau * p.g_tau * power)];
    terms.extend(p.stream_gains().into_iter().map(|r| (2, r * r * l as f64 * power)));
    let lf = l as f64;
    let mut value = 0.0;
    let mut var = 0.0;
    for (i, &(m, snr)) in terms.iter().enumerate() {
        let ch = HsmChannel::new(m, snr)?;
        let est = match eval {
            CsEvaluator::MonteCarlo(mc) => capacity_exact(&ch, &mc.derive(i as u64))?,
            CsEvaluator::Quadrature => McEstimate::exact(capacity_quadrature(&ch)?),
            CsEvaluator::Table if m == 2 => McEstimate::exact(Cs2Table::global().eval(snr)),
            CsEvaluator::Table => McEstimate::exact(capacity_quadrature(&ch)?),
            CsEvaluator::Asymptotic => McEstimate::exact(capacity_asymptotic(&ch)),
        };
        value += est.value / lf;
        var += (est.stderr / lf).powi(2);
    }
    let (samples, seed) = match eval {
        CsEvaluator::MonteCarlo(mc) => (mc.samples, mc.seed),
        _ => (0, 0),
    };
    Ok(McEstimate { value, stderr: var.sqrt(), samples, seed })
}

/// Closed-form high-SNR expansion of the hypersphere/CPSK rate.
pub fn rate_hypersphere_cpsk_asymptotic(p: &QrPlan, power: f64, l: u32) -> Result<f64> {
    check_rate_args(power, l)?;
    let lf = l as f64;
    let g2e = p.g_tau * p.g_tau * power;
    let mut rate = (2.0 * lf - 1.0) / (2.0 * lf) * (lf * g2e / E).log2()
        + (2.0 * PI.sqrt()).log2() / lf
        - ln_gamma(lf) * LOG2_E / lf
        + (1.0 - 7.0 / (4.0 * lf) + 5.0 / (8.0 * lf * lf)) * LOG2_E / g2e;
    for r in p.stream_gains() {
        let s = r * r * power;
        rate += (4.0 * PI * s * lf / E).log2() / (2.0 * lf) - LOG2_E / (8.0 * s * lf * lf);
    }
    Ok(rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    GaussianCpsk,
    HypersphereCpsk,
    Beamforming,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::GaussianCpsk => "gaussian_cpsk",
            Scheme::HypersphereCpsk => "hypersphere_cpsk",
            Scheme::Beamforming => "beamforming",
        }
    }
}

/// Reduced fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Degrees of freedom (pre-log factor) of each scheme.
pub fn dof(scheme: Scheme, tau: usize, l: u32) -> Result<Ratio> {
    if tau < 1 || l < 1 {
        return invalid("dof needs tau >= 1 and L >= 1");
    }
    let (t, l2) = (tau as u64, 2 * l as u64);
    Ok(match scheme {
        Scheme::GaussianCpsk => Ratio::new(l2 + t - 1, l2),
        Scheme::HypersphereCpsk if tau >= 2 => Ratio::new(l2 + t - 2, l2),
        Scheme::HypersphereCpsk | Scheme::Beamforming => Ratio::new(1, 1),
    })
}

/// Cheap high-SNR objective used to rank permutations.
pub fn asymptotic_rate(eq: &EquivalentChannel, power: f64, l: u32, scheme: Scheme) -> Result<f64> {
    match scheme {
        Scheme::GaussianCpsk => rate_gaussian_cpsk_asymptotic(&plan(eq)?, power, l),
        Scheme::HypersphereCpsk => rate_hypersphere_cpsk_asymptotic(&plan(eq)?, power, l),
        Scheme::Beamforming => {
            let sol = crate::capacity_bounds::solve_uqp(eq, &Default::default())?;
            Ok(crate::capacity_bounds::beamforming_rate(sol.f_star, power))
        }
    }
}

fn factorial_at_most(n: usize, budget: usize) -> bool {
    let mut f: usize = 1;
    for k in 2..=n {
        f = match f.checked_mul(k) {
            Some(v) if v <= budget => v,
            _ => return false,
        };
    }
    f <= budget
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Best column permutation for `scheme`, ranked by its asymptotic rate.
///
/// Exhaustive when `(n+1)! <= budget`, otherwise `budget` random
/// permutations plus the identity. Ties go to the lexicographically smallest
/// permutation. The result is never worse than the identity.
pub fn optimize_permutation(
    eq: &EquivalentChannel,
    power: f64,
    l: u32,
    scheme: Scheme,
    budget: usize,
    seed: u64,
) -> Result<(Vec<usize>, f64)> {
    if budget < 1 {
        return invalid("permutation budget must be >= 1");
    }
    check_rate_args(power, l)?;
    let n = eq.n_cols();
    let identity: Vec<usize> = (0..n).collect();
    if scheme == Scheme::Beamforming {
        return Ok((identity.clone(), asymptotic_rate(eq, power, l, scheme)?));
    }
    let candidates = if factorial_at_most(n, budget) {
        all_permutations(n)
    } else {
        let mut c = vec![identity];
        c.extend((0..budget as u64).map(|i| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut stream_rng(seed, i));
            p
        }));
        c
    };
    let scored: Vec<(Vec<usize>, f64)> = candidates
        .into_par_iter()
        .map(|p| {
            check_permutation(&p, n)?;
            let rate = asymptotic_rate(&eq.permute(&p)?, power, l, scheme)?;
            Ok((p, rate))
        })
        .collect::<Result<_>>()?;
    let best = scored
        .into_iter()
        .reduce(|a, b| match b.1.total_cmp(&a.1) {
            Ordering::Greater => b,
            Ordering::Equal if b.0 < a.0 => b,
            _ => a,
        })
        .expect("at least one candidate");
    Ok(best)
}

/// Pre-log of [`rate_hypersphere_cpsk_asymptotic`] and the Gaussian variant,
/// estimated by a finite difference over `log2 E`.
pub fn prelog_estimate(p: &QrPlan, l: u32, scheme: Scheme, e_lo: f64, e_hi: f64) -> Result<f64> {
    let f = |e: f64| match scheme {
        Scheme::GaussianCpsk => rate_gaussian_cpsk_asymptotic(p, e, l),
        Scheme::HypersphereCpsk => rate_hypersphere_cpsk_asymptotic(p, e, l),
        Scheme::Beamforming => Ok(log2_1p(p.g_tau * p.g_tau * e)),
    };
    Ok((f(e_hi)? - f(e_lo)?) / (e_hi / e_lo).log2())
}
