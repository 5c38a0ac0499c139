//! The boundary values `(x + i0)^λ` for `λ < 0`.
//!
//! Their transform is `C(λ) ξ_+^{-λ-1}` with
//! `C(λ) = (2π)^{-λ} e^{iλπ/2} / Γ(-λ)`, locally integrable exactly when
//! `λ < 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{gamma, power_law_cell_average};
use crate::spectral::{SobolevIndex, SpectralFunction, SpectralGrid, Tail};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudofunctionKind {
    /// `(x + i0)^λ` on the line.
    XPlusI0,
    /// `r^λ = |x|^λ` on `ℝ^n`.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudofunctionSpec {
    kind: PseudofunctionKind,
    lambda: f64,
    dim: usize,
}

impl PseudofunctionSpec {
    pub fn x_plus_i0(lambda: f64) -> Result<Self> {
        if !(lambda < 0.0) || !lambda.is_finite() {
            return Err(Error::UnsupportedExponent(lambda));
        }
        Ok(Self { kind: PseudofunctionKind::XPlusI0, lambda, dim: 1 })
    }

    /// `r^λ` on `ℝ^n` with `-n < λ < 0` (this range avoids the poles at
    /// `λ = -n - 2k` and the exclusions `λ = 2k`).
    pub fn radial(lambda: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(lambda < 0.0 && lambda > -(dim as f64)) {
            return Err(Error::invalid(format!(
                "radial exponent must satisfy -{dim} < λ < 0, got {lambda}"
            )));
        }
        Ok(Self { kind: PseudofunctionKind::Radial, lambda, dim })
    }

    pub fn kind(&self) -> PseudofunctionKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `C(λ) = (2π)^{-λ} e^{iλπ/2} / Γ(-λ)`.
pub fn xplusi0_coefficient(lambda: f64) -> Result<Complex64> {
    if !(lambda < 0.0) {
        return Err(Error::UnsupportedExponent(lambda));
    }
    let modulus = (2.0 * PI).powf(-lambda) / gamma(-lambda);
    Ok(Complex64::from_polar(modulus, lambda * PI / 2.0))
}

/// Exact cell averages of `C(λ) ξ^{-λ-1}` with the matching analytic tail.
pub fn xplusi0_spectrum(lambda: f64, grid: SpectralGrid) -> Result<SpectralFunction> {
    let coef = xplusi0_coefficient(lambda)?;
    let mu = -lambda - 1.0;
    let dxi = grid.spacing();
    let samples = (0..grid.bins()).map(|k| coef * power_law_cell_average(k, dxi, mu)).collect();
    SpectralFunction::new(grid, samples, Some(Tail { amplitude: coef, exponent: mu }))
}

/// `(x² + ε²)^{λ/2} e^{iλ arg(x + iε)}`, i.e. `(x + iε)^λ` on the principal
/// branch. At `x = 0` its modulus is `ε^λ`, which blows up as `ε → 0`.
pub fn xplusi0_eval(lambda: f64, x: f64, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("ε must be positive, got {eps}")));
    }
    if x.is_nan() {
        return Err(Error::invalid("NaN evaluation point"));
    }
    let modulus = (x * x + eps * eps).powf(lambda / 2.0);
    Ok(Complex64::from_polar(modulus, lambda * eps.atan2(x)))
}

/// The `ε → 0` limit away from the origin: `x^λ` for `x > 0` and
/// `|x|^λ e^{iλπ}` for `x < 0`.
pub fn xplusi0_limit(lambda: f64, x: f64) -> Result<Complex64> {
    if x == 0.0 {
        return Err(Error::SingularPoint(format!("(x + i0)^{lambda} at x = 0")));
    }
    if x.is_nan() {
        return Err(Error::invalid("NaN evaluation point"));
    }
    let phase = if x > 0.0 { 0.0 } else { lambda * PI };
    Ok(Complex64::from_polar(x.abs().powf(lambda), phase))
}

/// Sobolev membership of `(x + i0)^λ` (`n = 1`) or `r^λ` (`n ≥ 2`).
///
/// Local: `s < λ + n/2`. Global: additionally `λ < -n/2`. Both strict.
pub fn sobolev_membership(lambda: f64, s: SobolevIndex, dim: usize, local: bool) -> Result<bool> {
    if !(lambda < 0.0) {
        return Err(Error::UnsupportedExponent(lambda));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let half_n = dim as f64 / 2.0;
    let threshold = s.0 < lambda + half_n;
    Ok(if local { threshold } else { lambda < -half_n && threshold })
}
