//! Monte-Carlo plumbing.
//!
//! Sample `i` of a run always draws from ChaCha stream `i` under the run
//! seed, so an estimate depends only on `(seed, samples)`; the batch size
//! and the number of worker threads only change the floating-point
//! summation order. Batches are merged in a fixed pairwise tree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub samples: usize,
    pub batch: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { seed: 0x5eed_2022, samples: 1_000_000, batch: 65_536 }
    }
}

impl McConfig {
    pub fn new(seed: u64, samples: usize, batch: usize) -> Result<Self> {
        let cfg = Self { seed, samples, batch };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch < 1 || self.samples < self.batch {
            return invalid(format!(
                "Monte-Carlo config needs samples >= batch >= 1 (samples = {}, batch = {})",
                self.samples, self.batch
            ));
        }
        Ok(())
    }

    /// Same sample budget, seed replaced by a value derived from `(seed, tag)`.
    pub fn derive(&self, tag: u64) -> Self {
        Self { seed: mix64(self.seed ^ mix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))), ..*self }
    }

    pub fn with_samples(&self, samples: usize) -> Self {
        Self { samples, batch: self.batch.min(samples.max(1)), ..*self }
    }

    /// Random stream for sample `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        stream_rng(self.seed, index)
    }
}

/// Counter-based stream: ChaCha8 keyed by `seed`, stream id `index`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0, samples: 0, seed: 0 }
    }

    /// Affine map `a * X + b` of an estimate.
    pub fn affine(self, a: f64, b: f64) -> Self {
        Self { value: a * self.value + b, stderr: a.abs() * self.stderr, ..self }
    }
}

/// Running means and co-moments of an `N`-vector, mergeable across batches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<const N: usize> {
    pub n: u64,
    pub mean: [f64; N],
    pub comoment: [[f64; N]; N],
}

impl<const N: usize> Default for Moments<N> {
    fn default() -> Self {
        Self { n: 0, mean: [0.0; N], comoment: [[0.0; N]; N] }
    }
}

impl<const N: usize> Moments<N> {
    pub fn push(&mut self, x: [f64; N]) {
        self.n += 1;
        let n = self.n as f64;
        let mut delta = [0.0; N];
        for i in 0..N {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        for i in 0..N {
            for j in 0..N {
                self.comoment[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let mut out = Self { n: self.n + other.n, ..Self::default() };
        let mut delta = [0.0; N];
        for i in 0..N {
            delta[i] = other.mean[i] - self.mean[i];
            out.mean[i] = self.mean[i] + delta[i] * nb / n;
        }
        for i in 0..N {
            for j in 0..N {
                out.comoment[i][j] =
                    self.comoment[i][j] + other.comoment[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        out
    }

    pub fn variance(&self, i: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.comoment[i][i] / (self.n as f64 - 1.0)
        }
    }

    /// Plain sample mean of component `i` with its standard error.
    pub fn estimate(&self, i: usize, seed: u64) -> McEstimate {
        McEstimate {
            value: self.mean[i],
            stderr: (self.variance(i) / self.n.max(1) as f64).sqrt(),
            samples: self.n as usize,
            seed,
        }
    }
}

impl<const N: usize> Moments<N> {
    /// Control-variate estimate of `E[X_0]` where `X_1..X_{N-1}` have known
    /// mean zero; coefficients are the sample least-squares regression.
    pub fn control_variates(&self, seed: u64) -> McEstimate {
        let k = N - 1;
        let scc = nalgebra::DMatrix::from_fn(k, k, |i, j| self.comoment[i + 1][j + 1]);
        let sfc = nalgebra::DVector::from_fn(k, |i, _| self.comoment[0][i + 1]);
        let beta = scc.lu().solve(&sfc).filter(|b| b.iter().all(|x| x.is_finite()));
        let beta = beta.unwrap_or_else(|| nalgebra::DVector::zeros(k));
        let value = self.mean[0] - (0..k).map(|i| beta[i] * self.mean[i + 1]).sum::<f64>();
        let n = self.n.max(2) as f64;
        let explained: f64 = (0..k).map(|i| beta[i] * sfc[i]).sum();
        let resid = (self.comoment[0][0] - explained).max(0.0) / (n - 1.0 - k as f64).max(1.0);
        McEstimate { value, stderr: (resid / n).sqrt(), samples: self.n as usize, seed }
    }
}

impl Moments<2> {
    /// [`Moments::control_variates`] with a single control.
    pub fn control_variate(&self, seed: u64) -> McEstimate {
        self.control_variates(seed)
    }
}

/// Runs `f` once per sample (sample `i` on stream `i`) and aggregates.
pub fn run<const N: usize, F>(cfg: &McConfig, f: F) -> Moments<N>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; N] + Sync,
{
    let batches = cfg.samples.div_ceil(cfg.batch.max(1));
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let parts: Vec<Moments<N>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let start = b * cfg.batch;
            let end = (start + cfg.batch).min(cfg.samples);
            let mut acc = Moments::<N>::default();
            for i in start..end {
                let mut rng = base.clone();
                rng.set_stream(i as u64);
                acc.push(f(&mut rng));
            }
            acc
        })
        .collect();
    merge_tree(&parts)
}

fn merge_tree<const N: usize>(parts: &[Moments<N>]) -> Moments<N> {
    match parts.len() {
        0 => Moments::default(),
        1 => parts[0],
        n => merge_tree(&parts[..n / 2]).merge(&merge_tree(&parts[n / 2..])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<[f64; 2]> = (0..1000).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let mut all = Moments::<2>::default();
        xs.iter().for_each(|x| all.push(*x));
        let mut a = Moments::<2>::default();
        let mut b = Moments::<2>::default();
        xs[..377].iter().for_each(|x| a.push(*x));
        xs[377..].iter().for_each(|x| b.push(*x));
        let m = a.merge(&b);
        for i in 0..2 {
            assert!((m.mean[i] - all.mean[i]).abs() < 1e-14);
            for j in 0..2 {
                assert!((m.comoment[i][j] - all.comoment[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn estimate_independent_of_batching() {
        let f = |rng: &mut ChaCha8Rng| [rng.random::<f64>()];
        let a = run(&McConfig::new(9, 10_000, 10_000).unwrap(), f).estimate(0, 9);
        let b = run(&McConfig::new(9, 10_000, 333).unwrap(), f).estimate(0, 9);
        assert!((a.value - b.value).abs() < 1e-14);
        assert!((a.stderr - b.stderr).abs() < 1e-14);
    }

    #[test]
    fn control_variate_removes_linear_noise() {
        // X0 = 3 + 2 U + small, X1 = U - 1/2 (known mean 0)
        let cfg = McConfig::new(1, 20_000, 1000).unwrap();
        let m = run(&cfg, |rng| {
            let u: f64 = rng.random();
            let e: f64 = rng.random::<f64>() - 0.5;
            [3.0 + 2.0 * u + 1e-3 * e, u - 0.5]
        });
        let plain = m.estimate(0, 1);
        let cv = m.control_variate(1);
        assert!((cv.value - 4.0).abs() < 4.0 * cv.stderr + 1e-9);
        assert!(cv.stderr < plain.stderr / 100.0);
    }

    #[test]
    fn stderr_scales_with_sample_count() {
        let f = |rng: &mut ChaCha8Rng| [rng.random::<f64>()];
        let a = run(&McConfig::new(2, 20_000, 1000).unwrap(), f).estimate(0, 2);
        let b = run(&McConfig::new(2, 80_000, 1000).unwrap(), f).estimate(0, 2);
        let ratio = a.stderr / b.stderr;
        assert!((ratio / 2.0 - 1.0).abs() < 0.5 / 2.0, "ratio {ratio}");
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 10, 0).is_err());
        assert!(McConfig::new(0, 10, 11).is_err());
        assert!(McConfig::new(0, 10, 10).is_ok());
    }
}
