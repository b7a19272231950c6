//! Direct sampling imaging of small sound-soft cracks from far-field data.
//!
//! The crate provides
//! - [`specfun`]: Bessel functions `J_n` and the series built from them,
//! - [`scene`]: straight crack geometry,
//! - [`forward`]: a boundary-integral solver producing full-wave far-field data,
//! - [`asymptotic`]: small-crack far-field formulas and closed-form predictions
//!   of every indicator map,
//! - [`imaging`]: the indicator functions, peak extraction, and map comparison,
//! - [`cli`]: the `crackdsm` command-line front end and its file formats.

pub mod asymptotic;
pub mod cli;
pub mod error;
pub mod forward;
pub mod imaging;
pub mod scene;
pub mod specfun;

pub use error::{DsmError, Result};
pub use num_complex::Complex64 as Complex;
