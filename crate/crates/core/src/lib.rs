//! Closed-loop MIMO beamforming link simulator.
//!
//! Two precoding schemes are compared on a flat Rayleigh channel:
//!
//! - SVD precoding, which fully diagonalizes the channel into parallel
//!   subchannels with unequal gains and is detected stream by stream.
//! - Equal-diagonal QR precoding (QRS, also known as the geometric mean
//!   decomposition), which leaves an upper-triangular effective channel whose
//!   diagonal entries all equal the geometric mean of the singular values and
//!   is detected with successive interference cancellation.
//!
//! The crate is organized bottom-up:
//!
//! - [`matcore`]: dense complex matrices, Givens rotations and the SVD.
//! - [`decomp`]: SVD and GMD beamformers, including reduced-stream variants.
//! - [`modem`]: Gray-labelled QAM constellations and the modulation-set catalog.
//! - [`channel`]: seeded random streams, Rayleigh channel draws and AWGN.
//! - [`detect`]: per-subchannel slicing and SIC detection.
//! - [`simkit`]: the Monte Carlo BER engine, envelopes and gap measurement.

// Guards are written as `!(x > 0.0)` so that NaN is rejected with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod decomp;
pub mod detect;
mod error;
pub mod matcore;
pub mod modem;
pub mod simkit;
pub mod tolerance;

pub use error::{Error, Result};
pub use num_complex::Complex64;
