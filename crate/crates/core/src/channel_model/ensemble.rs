use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{EquivalentChannel, DEFAULT_RANK_TOL};
use crate::error::{invalid, Result};
use crate::mc::stream_rng;
use crate::{CMatrix, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Scale each realization so that `trace(Hcheck^H Hcheck) = 1`.
    GramTraceOne,
    None,
}

/// Random i.i.d. `CN(0, 1)` channels with an optionally strengthened direct
/// path (last column).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEnsembleSpec {
    pub n_r: usize,
    /// Number of reflective elements; matrices have `n + 1` columns.
    pub n: usize,
    pub srr: u32,
    /// Amplitude gain `10^(los_gain_db / 20)` applied to the direct-path
    /// column before normalization.
    pub los_gain_db: f64,
    pub seed: u64,
    pub normalization: Normalization,
}

impl ChannelEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_r < 1 || self.n < 1 {
            return invalid("ensemble needs n_R >= 1 and n >= 1");
        }
        if self.srr < 1 {
            return invalid("symbol-rate ratio L must be >= 1");
        }
        if !self.los_gain_db.is_finite() {
            return invalid("LOS gain must be finite");
        }
        Ok(())
    }
}

/// The `index`-th pre-normalization draw: `n_R x (n+1)` with the direct-path
/// column scaled by the LOS gain.
pub fn draw_raw(spec: &ChannelEnsembleSpec, index: u64) -> CMatrix {
    let mut rng = stream_rng(spec.seed, index);
    let amp = 10f64.powf(spec.los_gain_db / 20.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // column-major fill keeps the draw order independent of the gain
    let mut m = CMatrix::zeros(spec.n_r, spec.n + 1);
    for c in 0..=spec.n {
        for r in 0..spec.n_r {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(r, c)] = Complex64::new(re * s, im * s);
        }
    }
    let last = spec.n;
    m.column_mut(last).iter_mut().for_each(|z| *z *= amp);
    m
}

/// `count` reduced (and optionally normalized) realizations; realization `i`
/// depends only on `(seed, i)`.
pub fn generate_ensemble(spec: &ChannelEnsembleSpec, count: usize) -> Result<Vec<EquivalentChannel>> {
    spec.validate()?;
    if count < 1 {
        return invalid("ensemble count must be >= 1");
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let eq = EquivalentChannel::from_matrix(&draw_raw(spec, i), DEFAULT_RANK_TOL)?;
            Ok(match spec.normalization {
                Normalization::GramTraceOne => eq.normalized().0,
                Normalization::None => eq,
            })
        })
        .collect()
}
