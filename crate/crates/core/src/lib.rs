//! Spectral numerics for semilinear wave equations whose spatial Fourier
//! transform is supported in the half-line `[0, ∞)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] holds the cell-averaged half-line spectrum type, Sobolev
//!   norms and physical-space quadrature.
//! * [`pseudofn`] builds the spectra of `(x + i0)^λ` exactly.
//! * [`products`] is the one-sided convolution (Fourier product), integer
//!   powers, the multiplier-bound calculators and the numerical norm probe.
//! * [`wave`] implements the Duhamel operator, Picard iteration and the
//!   equation residual.
//! * [`geometry`] contains the Lorentz-type boosts that move a stationary
//!   singularity onto a ray off the light cone.
//! * [`diagnostics`] estimates local Sobolev regularity from windowed spectra
//!   and tracks singular rays.
//! * [`radial`] covers the radial pseudofunctions `r^λ` in `n` dimensions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod products;
pub mod pseudofn;
pub mod radial;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{NormValue, SobolevIndex, SpectralFunction, SpectralGrid, Tail};
