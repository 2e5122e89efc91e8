//! Photon-number-resolved OAM correlations of a partially coherent
//! complex-Gaussian source observed behind angular slits.

// `!(x > 0.0)` is the NaN-rejecting form of the parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlators;
pub mod error;
pub mod fit;
pub mod fock;
pub mod montecarlo;
pub mod numeric;
pub mod output;
pub mod profile;
pub mod source;
pub mod synthesis;

pub use error::{Error, Result};
