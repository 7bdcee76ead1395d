//! Numerical core for capacity analysis of RIS-aided single-input
//! multiple-output Gaussian channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: log-domain Bessel functions, incomplete gamma, confluent
//!   hypergeometric means, (non)central chi-squared laws and samplers,
//!   quadrature rules.
//! - [`mc`]: Monte-Carlo configuration, counter-based random streams and
//!   mergeable moment accumulators.
//! - [`channel_model`]: physical channel description, direct-path merging,
//!   SVD reduction to the full-row-rank purely reflective model, permutations,
//!   random ensembles and the text matrix format.
//! - [`capacity_bounds`]: the unit-modulus beamforming program, capacity upper
//!   bounds, low-SNR quantities and the rank-one capacity.
//! - [`hsm_vgc`]: capacity of the hypersphere-modulated vector Gaussian
//!   channel (exact, asymptotic, bounds, approximation diagnostics).
//! - [`qr_sic`]: the QR-SIC transceiver and its achievable rates.

pub mod capacity_bounds;
pub mod channel_model;
pub mod error;
pub mod hsm_vgc;
pub mod mc;
pub mod qr_sic;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for all channel matrices.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

/// `log2(e)`, the nats-to-bits factor.
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Converts a value in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub use capacity_bounds::{LowSnrMiApprox, UqpOptions, UqpSolution};
pub use channel_model::{ChannelEnsembleSpec, ChannelSpec, EquivalentChannel, Normalization};
pub use hsm_vgc::HsmChannel;
pub use mc::{McConfig, McEstimate};
pub use qr_sic::{QrPlan, Scheme};
