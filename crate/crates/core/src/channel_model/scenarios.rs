//! Built-in channel matrices.
//!
//! `H1` (4 x 4) and `H2` (6 x 6) are three-decimal transcriptions of
//! published trace-normalized realizations. `H3` and `H4` are derived from
//! `H2` by multiplying the direct-path (last) column by 10, renormalizing,
//! and repeating once more.

use crate::{CMatrix, Complex64};

#[rustfmt::skip]
const H1: [[(f64, f64); 4]; 4] = [
    [(0.040, 0.011), (0.352, 0.175), (0.174, -0.230), (0.073, 0.158)],
    [(0.074, 0.113), (-0.392, -0.113), (-0.289, 0.161), (-0.290, 0.103)],
    [(-0.065, 0.057), (0.387, 0.045), (-0.102, 0.000), (0.082, 0.061)],
    [(-0.041, 0.188), (0.059, -0.164), (-0.048, -0.010), (-0.211, 0.217)],
];

#[rustfmt::skip]
const H2: [[(f64, f64); 6]; 6] = [
    [(0.042, 0.014), (-0.028, -0.034), (0.065, 0.053), (-0.038, 0.052), (-0.195, 0.078), (-0.145, -0.147)],
    [(-0.074, 0.239), (-0.224, 0.079), (-0.195, 0.194), (0.166, -0.099), (0.020, -0.008), (-0.065, -0.083)],
    [(-0.041, 0.041), (0.080, 0.078), (-0.134, -0.043), (0.063, 0.200), (0.108, -0.266), (-0.024, 0.033)],
    [(-0.075, 0.238), (-0.016, -0.288), (-0.059, 0.107), (0.155, -0.004), (-0.039, -0.129), (0.006, -0.131)],
    [(-0.135, -0.095), (0.092, -0.175), (0.014, 0.072), (0.017, 0.216), (-0.071, 0.081), (-0.008, 0.128)],
    [(-0.120, 0.069), (0.036, -0.190), (0.149, -0.139), (-0.087, -0.056), (-0.041, -0.007), (0.081, -0.084)],
];

fn from_rows<const N: usize>(rows: &[[(f64, f64); N]]) -> CMatrix {
    CMatrix::from_fn(rows.len(), N, |r, c| Complex64::new(rows[r][c].0, rows[r][c].1))
}

/// Four-antenna channel with a 4-column reduced matrix.
pub fn h1() -> CMatrix {
    from_rows(&H1)
}

/// Six-antenna channel, weak line of sight.
pub fn h2() -> CMatrix {
    from_rows(&H2)
}

/// Multiplies the last column by `factor` and rescales to unit Gram trace.
pub fn boost_direct_path(m: &CMatrix, factor: f64) -> CMatrix {
    let mut out = m.clone();
    let last = out.ncols() - 1;
    out.column_mut(last).iter_mut().for_each(|z| *z *= factor);
    normalize_trace(&out)
}

pub fn normalize_trace(m: &CMatrix) -> CMatrix {
    let fro = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    m.map(|z| z / fro)
}

/// Moderate line of sight.
pub fn h3() -> CMatrix {
    boost_direct_path(&h2(), 10.0)
}

/// Strong line of sight.
pub fn h4() -> CMatrix {
    boost_direct_path(&h3(), 10.0)
}

pub fn by_name(name: &str) -> Option<CMatrix> {
    match name.to_ascii_lowercase().as_str() {
        "h1" => Some(h1()),
        "h2" => Some(h2()),
        "h3" => Some(h3()),
        "h4" => Some(h4()),
        _ => None,
    }
}
