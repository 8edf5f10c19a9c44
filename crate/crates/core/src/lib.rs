//! Two-parameter quantum estimation limits for a trapped-particle Sagnac interferometer.
//!
//! The trap frequency `w` and the platform rotation rate `W` are encoded jointly
//! on a GHZ-type spin ensemble. The crate evaluates the generator coefficients,
//! the 2x2 quantum Fisher information matrix, Cramér-Rao bounds, their scaling
//! with particle number, the saturability conditions, and the worked scenarios.
//! An independent truncated Fock-space oracle cross-checks the closed forms.
//!
//! Units: `hbar = 1`; the composite length-mass scale `mu` is an explicit input
//! and frequencies are naturally measured in units of `mu^-2`.

// Guards are written as `!(x > bound)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generators;
pub mod oracle;
pub mod qfim;
pub mod scenarios;
pub mod states;
pub mod time_integrals;

pub use error::{Error, Result};
