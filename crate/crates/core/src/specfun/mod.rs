//! Special functions and distributions.
//!
//! Everything that touches a modified Bessel function or a confluent
//! hypergeometric function works in the log domain: the capacity formulas
//! evaluate `I_v` at arguments of order `m * snr`, which overflow `f64`
//! long before the SNR range of interest is exhausted.

mod bessel;
mod chi2;
mod gamma;
mod hyper;
pub mod quad;
mod sphere;

pub use bessel::{
    log_bessel_i, log_bessel_i_hadamard, log_bessel_i_series, pochhammer_coeff,
    ln_bessel_i_unchecked, BESSEL_HADAMARD_MAX_TERMS,
};
pub use chi2::{CentralChi2, NoncentralChi2Scaled};
pub use gamma::{digamma, ln_gamma, reg_lower_gamma, reg_upper_gamma, EULER_GAMMA};
pub use hyper::{ln_hyp1f1, ricean_mean, ricean_mean_excess, RICEAN_HADAMARD_MIN_ARG};
pub use sphere::sample_uniform_sphere;
