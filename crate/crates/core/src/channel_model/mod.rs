//! RIS-aided SIMO channel description and the lossless reductions applied
//! before any rate computation.
//!
//! A raw channel `(H, g, d)` is first turned into the augmented matrix
//! `H~ = [H, d] diag(g, 1)`, in which the direct path is an extra reflective
//! element with a fixed unit-modulus coefficient. An SVD then discards the
//! null rows, leaving the `tau x (n+1)` full-row-rank matrix `diag(rho) V1^H`
//! used everywhere else. Both steps preserve `|| H e^{j phi} ||_2` for every
//! phase vector, and with it every rate this crate computes.

mod ensemble;
pub mod io;
pub mod scenarios;

pub use ensemble::{draw_raw, generate_ensemble, ChannelEnsembleSpec, Normalization};

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::{CMatrix, CVector, Complex64};

/// Default relative threshold for counting nonzero singular values.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Raw physical channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    /// RIS-to-receiver gains, `n_R x n`.
    pub h: CMatrix,
    /// Transmitter-to-RIS gains, length `n`.
    pub g: CVector,
    /// Direct path, length `n_R`.
    pub d: CVector,
    /// Symbol-rate-to-reconfiguration-rate ratio.
    pub srr: u32,
}

impl ChannelSpec {
    pub fn new(h: CMatrix, g: CVector, d: CVector, srr: u32) -> Result<Self> {
        let spec = Self { h, g, d, srr };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (nr, n) = self.h.shape();
        if nr == 0 || n == 0 {
            return invalid("channel needs at least one receive antenna and one element");
        }
        if self.g.len() != n {
            return invalid(format!("g has length {} but H has {} columns", self.g.len(), n));
        }
        if self.d.len() != nr {
            return invalid(format!("d has length {} but H has {} rows", self.d.len(), nr));
        }
        if self.srr < 1 {
            return invalid("symbol-rate ratio L must be >= 1");
        }
        Ok(())
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    /// `H~ = [H, d] diag(g, 1)`: column `j < n` is `H[:, j] g_j`, the last
    /// column is `d`.
    pub fn merge_direct_path(&self) -> Result<CMatrix> {
        self.validate()?;
        let (nr, n) = self.h.shape();
        Ok(CMatrix::from_fn(nr, n + 1, |i, j| if j < n { self.h[(i, j)] * self.g[j] } else { self.d[i] }))
    }

    pub fn reduce(&self, tol_rel: f64) -> Result<EquivalentChannel> {
        EquivalentChannel::from_matrix(&self.merge_direct_path()?, tol_rel)
    }
}

/// Full-row-rank purely reflective channel `diag(rho) V1^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    hcheck: CMatrix,
    singular_values: Vec<f64>,
    v1: CMatrix,
}

impl EquivalentChannel {
    /// SVD-reduces an arbitrary `n_R x (n+1)` augmented matrix. Singular
    /// values at or below `tol_rel * sigma_max` are discarded.
    pub fn from_matrix(h_tilde: &CMatrix, tol_rel: f64) -> Result<Self> {
        if h_tilde.is_empty() {
            return invalid("empty channel matrix");
        }
        if h_tilde.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("channel matrix has non-finite entries");
        }
        let svd = h_tilde.clone().svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^H");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let sigma_max = order.first().map(|&i| svd.singular_values[i]).unwrap_or(0.0);
        if !(sigma_max > 0.0) {
            return Err(Error::DegenerateChannel("augmented channel matrix is all zero".into()));
        }
        let kept: Vec<usize> = order
            .into_iter()
            .filter(|&i| svd.singular_values[i] > tol_rel * sigma_max)
            .collect();
        let cols = h_tilde.ncols();
        let tau = kept.len();
        let singular_values: Vec<f64> = kept.iter().map(|&i| svd.singular_values[i]).collect();
        let hcheck = CMatrix::from_fn(tau, cols, |r, c| v_t[(kept[r], c)] * singular_values[r]);
        let v1 = CMatrix::from_fn(cols, tau, |r, c| v_t[(kept[c], r)].conj());
        Ok(Self { hcheck, singular_values, v1 })
    }

    /// Wraps a matrix already known to have full row rank, without
    /// re-diagonalizing its rows. Singular values are recomputed.
    pub fn from_full_row_rank(hcheck: CMatrix, tol_rel: f64) -> Result<Self> {
        let reduced = Self::from_matrix(&hcheck, tol_rel)?;
        if reduced.tau() != hcheck.nrows() {
            return invalid(format!(
                "matrix has {} rows but numerical rank {}",
                hcheck.nrows(),
                reduced.tau()
            ));
        }
        Ok(Self { hcheck, ..reduced })
    }

    pub fn hcheck(&self) -> &CMatrix {
        &self.hcheck
    }

    pub fn tau(&self) -> usize {
        self.hcheck.nrows()
    }

    /// Number of columns, `n + 1`.
    pub fn n_cols(&self) -> usize {
        self.hcheck.ncols()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn v1(&self) -> &CMatrix {
        &self.v1
    }

    pub fn column(&self, k: usize) -> CVector {
        self.hcheck.column(k).into_owned()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.hcheck.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|| Hcheck e^{j phi} ||_2`.
    pub fn beam_norm(&self, phases: &[f64]) -> f64 {
        beam_norm(&self.hcheck, phases)
    }

    /// Column permutation: column `j` of the result is column `perm[j]` of
    /// `self` (zero-based).
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_cols())?;
        let hcheck = CMatrix::from_fn(self.tau(), self.n_cols(), |r, c| self.hcheck[(r, perm[c])]);
        let v1 = CMatrix::from_fn(self.n_cols(), self.tau(), |r, c| self.v1[(perm[r], c)]);
        Ok(Self { hcheck, singular_values: self.singular_values.clone(), v1 })
    }

    /// Scales to unit Gram trace; returns the channel and the applied factor.
    pub fn normalized(&self) -> (Self, f64) {
        let scale = 1.0 / self.frobenius_sq().sqrt();
        let out = Self {
            hcheck: self.hcheck.map(|z| z * scale),
            singular_values: self.singular_values.iter().map(|s| s * scale).collect(),
            v1: self.v1.clone(),
        };
        (out, scale)
    }

    /// Removes numerically zero columns (elements that contribute nothing).
    pub fn drop_zero_columns(&self) -> Result<Self> {
        let norms: Vec<f64> = (0..self.n_cols()).map(|c| self.hcheck.column(c).norm()).collect();
        let cutoff = 1e-13 * norms.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..self.n_cols()).filter(|&c| norms[c] > cutoff).collect();
        let m = CMatrix::from_fn(self.tau(), keep.len(), |r, c| self.hcheck[(r, keep[c])]);
        Self::from_full_row_rank(m, DEFAULT_RANK_TOL)
    }
}

pub fn beam_norm(h: &CMatrix, phases: &[f64]) -> f64 {
    assert_eq!(h.ncols(), phases.len(), "one phase per column");
    let x = CVector::from_iterator(phases.len(), phases.iter().map(|&p| Complex64::from_polar(1.0, p)));
    (h * x).norm()
}

pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return invalid(format!("permutation has length {} but channel has {} columns", perm.len(), n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return invalid(format!("{perm:?} is not a permutation of 0..{n}"));
        }
        seen[p] = true;
    }
    Ok(())
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

/// Singular values of a complex matrix, sorted nonincreasing.
pub fn sorted_singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub(crate) fn ones(n: usize) -> CVector {
    DVector::from_element(n, Complex64::new(1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMatrix {
        CMatrix::from_fn(r, k, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn merge_identity_case() {
        let spec = ChannelSpec::new(
            CMatrix::from_element(1, 1, c(1.0, 0.0)),
            CVector::from_element(1, c(1.0, 0.0)),
            CVector::from_element(1, c(0.0, 0.0)),
            1,
        )
        .unwrap();
        let m = spec.merge_direct_path().unwrap();
        assert_eq!(m, CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn merge_scales_columns() {
        let spec = ChannelSpec::new(
            CMatrix::from_element(1, 1, c(2.0, 0.0)),
            CVector::from_element(1, c(0.0, 3.0)),
            CVector::from_element(1, c(1.0, 0.0)),
            1,
        )
        .unwrap();
        let m = spec.merge_direct_path().unwrap();
        assert_eq!(m, CMatrix::from_row_slice(1, 2, &[c(0.0, 6.0), c(1.0, 0.0)]));
    }

    #[test]
    fn merge_random_entrywise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_matrix(&mut rng, 2, 3);
        let g = random_matrix(&mut rng, 3, 1).column(0).into_owned();
        let d = random_matrix(&mut rng, 2, 1).column(0).into_owned();
        let spec = ChannelSpec::new(h.clone(), g.clone(), d.clone(), 2).unwrap();
        let m = spec.merge_direct_path().unwrap();
        for i in 0..2 {
            for k in 0..3 {
                assert_eq!(m[(i, k)], h[(i, k)] * g[k]);
            }
            assert_eq!(m[(i, 3)], d[i]);
        }
    }

    #[test]
    fn direct_path_is_an_extra_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_matrix(&mut rng, 3, 2);
        let g = random_matrix(&mut rng, 2, 1).column(0).into_owned();
        let d = random_matrix(&mut rng, 3, 1).column(0).into_owned();
        let with_direct = ChannelSpec::new(h.clone(), g.clone(), d.clone(), 1).unwrap();
        let mut h_ext = CMatrix::zeros(3, 3);
        h_ext.view_mut((0, 0), (3, 2)).copy_from(&h);
        h_ext.set_column(2, &d);
        let mut g_ext = CVector::zeros(3);
        g_ext.rows_mut(0, 2).copy_from(&g);
        g_ext[2] = c(1.0, 0.0);
        let as_element = ChannelSpec::new(h_ext, g_ext, CVector::zeros(3), 1).unwrap();
        let a = with_direct.merge_direct_path().unwrap();
        let b = as_element.merge_direct_path().unwrap();
        assert_eq!(a, b.columns(0, 3).into_owned());
        assert!(b.column(3).iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn merge_rejects_mismatched_dimensions() {
        let spec = ChannelSpec {
            h: CMatrix::zeros(2, 3),
            g: CVector::zeros(2),
            d: CVector::zeros(2),
            srr: 1,
        };
        assert!(matches!(spec.merge_direct_path(), Err(Error::InvalidInput(_))));
        let bad_l = ChannelSpec::new(CMatrix::zeros(1, 1), CVector::zeros(1), CVector::zeros(1), 0);
        assert!(bad_l.is_err());
    }

    #[test]
    fn reduce_diagonal() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let eq = EquivalentChannel::from_matrix(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(eq.tau(), 1);
        assert_eq!(eq.n_cols(), 2);
        assert!((eq.hcheck()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert_eq!(eq.hcheck()[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn reduce_rank_one_preserves_frobenius() {
        let row = [c(1.0, 2.0), c(-0.5, 0.25), c(0.0, 3.0)];
        let m = CMatrix::from_fn(2, 3, |_, j| row[j]);
        let eq = EquivalentChannel::from_matrix(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(eq.tau(), 1);
        let fm: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        assert!((eq.frobenius_sq() - fm).abs() < 1e-12);
    }

    #[test]
    fn reduce_preserves_beam_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_matrix(&mut rng, 4, 5);
        let eq = EquivalentChannel::from_matrix(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(eq.tau(), 4);
        for _ in 0..10 {
            let phi: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
            assert!((eq.beam_norm(&phi) - beam_norm(&m, &phi)).abs() < 1e-10);
        }
        // Hcheck = diag(rho) V1^H
        let rebuilt = CMatrix::from_diagonal(&DVector::from_vec(eq.singular_values().to_vec()).map(|s| c(s, 0.0)))
            * eq.v1().adjoint();
        assert!((rebuilt - eq.hcheck()).norm() < 1e-12);
        let s = eq.singular_values();
        assert!(s.windows(2).all(|w| w[0] >= w[1]) && s.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn reduce_rejects_zero_matrix() {
        let err = EquivalentChannel::from_matrix(&CMatrix::zeros(3, 2), DEFAULT_RANK_TOL);
        assert!(matches!(err, Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn permutation_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let eq = EquivalentChannel::from_matrix(&random_matrix(&mut rng, 3, 5), DEFAULT_RANK_TOL).unwrap();
        let id: Vec<usize> = (0..5).collect();
        assert_eq!(eq.permute(&id).unwrap(), eq);
        let perm = vec![3, 0, 4, 2, 1];
        let p = eq.permute(&perm).unwrap();
        let back = p.permute(&inverse_permutation(&perm)).unwrap();
        assert_eq!(back, eq);
        let s0 = sorted_singular_values(eq.hcheck());
        let s1 = sorted_singular_values(p.hcheck());
        for (a, b) in s0.iter().zip(&s1) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(eq.permute(&[0, 0, 1, 2, 3]).is_err());
        assert!(eq.permute(&[0, 1, 2]).is_err());
    }

    #[test]
    fn reduce_and_permute_commute_on_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let m = random_matrix(&mut rng, 4, 3);
        let perm = [2, 0, 1];
        let reduce_then = EquivalentChannel::from_matrix(&m, DEFAULT_RANK_TOL).unwrap().permute(&perm).unwrap();
        let pm = CMatrix::from_fn(4, 3, |r, cc| m[(r, perm[cc])]);
        let permute_then = EquivalentChannel::from_matrix(&pm, DEFAULT_RANK_TOL).unwrap();
        for (a, b) in reduce_then.singular_values().iter().zip(permute_then.singular_values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn drop_zero_columns_keeps_rank() {
        let m = CMatrix::from_row_slice(2, 3, &[c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let eq = EquivalentChannel::from_matrix(&m, DEFAULT_RANK_TOL).unwrap();
        let d = eq.drop_zero_columns().unwrap();
        assert_eq!(d.n_cols(), 2);
        assert!((d.frobenius_sq() - eq.frobenius_sq()).abs() < 1e-14);
    }

    #[test]
    fn normalization_hits_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let eq = EquivalentChannel::from_matrix(&random_matrix(&mut rng, 3, 4), DEFAULT_RANK_TOL).unwrap();
        let (n, s) = eq.normalized();
        assert!((n.frobenius_sq() - 1.0).abs() < 1e-12);
        assert!((s * s * eq.frobenius_sq() - 1.0).abs() < 1e-12);
    }
}
