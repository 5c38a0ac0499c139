//! Radial power functions `r^λ` on `ℝ^n` and the stationary solutions they
//! give for `∂_t²u − Δu = κ u^p`.
//!
//! Since `Δ r^λ = λ(λ + n − 2) r^{λ−2}` and `(r^λ)^p = r^{λ−2}` when
//! `λ = 2/(1 − p)`, the function `r^λ` solves `−Δu = κ u^p` with
//! `κ = −λ(λ + n − 2)`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::gamma;
use crate::pseudofn::PseudofunctionSpec;

/// `r^λ` on `ℝ^n` with `n ≥ 2` and `−n < λ < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSpec {
    lambda: f64,
    n: usize,
}

impl RadialSpec {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("radial functions need n ≥ 2, got {n}")));
        }
        if !(lambda < 0.0 && lambda > -(n as f64)) {
            return Err(Error::invalid(format!(
                "radial exponent must satisfy -{n} < λ < 0, got {lambda}"
            )));
        }
        Ok(Self { lambda, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pseudofunction(&self) -> PseudofunctionSpec {
        PseudofunctionSpec::radial(self.lambda, self.n).expect("validated range")
    }

    /// `λ(λ + n − 2)`, the coefficient in `Δ r^λ = λ(λ + n − 2) r^{λ−2}`.
    pub fn laplacian_coefficient(&self) -> f64 {
        laplacian_coefficient(self.lambda, self.n)
    }
}

pub fn laplacian_coefficient(lambda: f64, n: usize) -> f64 {
    lambda * (lambda + n as f64 - 2.0)
}

/// `|x|^λ`.
pub fn rlambda_eval(spec: &RadialSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.n {
        return Err(Error::invalid(format!("expected {} coordinates, got {}", spec.n, x.len())));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::SingularPoint(format!("r^{} at the origin", spec.lambda)));
    }
    Ok(r2.powf(spec.lambda / 2.0))
}

/// Radial profile of the transform of `r^λ`:
/// `π^{−λ−n/2} Γ((λ+n)/2) / Γ(−λ/2) · ρ^{−λ−n}`.
pub fn rlambda_ft_profile(spec: &RadialSpec, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("ρ must be positive, got {rho}")));
    }
    let (l, n) = (spec.lambda, spec.n as f64);
    Ok(PI.powf(-l - n / 2.0) * gamma((l + n) / 2.0) / gamma(-l / 2.0) * rho.powf(-l - n))
}

/// Whether the Fourier product of `r^λ` and `r^μ` exists: `λ + μ > −n`.
pub fn product_exists(lambda: f64, mu: f64, n: usize) -> Result<bool> {
    RadialSpec::new(lambda, n)?;
    RadialSpec::new(mu, n)?;
    Ok(lambda + mu > -(n as f64))
}

/// Whether `(r^λ)^p = r^{λp}` holds as distributions: `λp > −n`.
pub fn power_valid(lambda: f64, p: u32, n: usize) -> Result<bool> {
    RadialSpec::new(lambda, n)?;
    Ok(lambda * p as f64 > -(n as f64))
}

/// Largest relative deviation of `r^λ·r^μ` from `r^{λ+μ}` at the given radii.
pub fn pointwise_product_error(lambda: f64, mu: f64, radii: &[f64]) -> Result<f64> {
    radii.iter().try_fold(0.0f64, |acc, &r| {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {r}")));
        }
        let want = r.powf(lambda + mu);
        Ok(acc.max((r.powf(lambda) * r.powf(mu) - want).abs() / want))
    })
}

/// One row of a finite-difference check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRow {
    pub r: f64,
    pub fd_value: f64,
    pub exact_value: f64,
    pub rel_err: f64,
}

/// `u'' + (n−1)u'/r` for `u = r^λ` by centred differences of step `h`.
fn fd_radial_laplacian(lambda: f64, n: usize, r: f64, h: f64) -> f64 {
    let u = |x: f64| x.powf(lambda);
    let (a, c, b) = (u(r - h), u(r), u(r + h));
    (b - 2.0 * c + a) / (h * h) + (n as f64 - 1.0) / r * (b - a) / (2.0 * h)
}

/// Compares the finite-difference Laplacian of `r^λ` at `r` with
/// `λ(λ + n − 2) r^{λ−2}`.
pub fn laplacian_identity_check(spec: &RadialSpec, r: f64, h: f64) -> Result<CheckRow> {
    laplacian_check_any(spec.lambda, spec.n, r, h)
}

/// As [`laplacian_identity_check`] for any `n ≥ 1`; `n = 1` is the second
/// derivative.
pub fn laplacian_check_any(lambda: f64, n: usize, r: f64, h: f64) -> Result<CheckRow> {
    if !(h > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    if !(r > 10.0 * h) {
        return Err(Error::StepTooCoarse { r, h });
    }
    let fd_value = fd_radial_laplacian(lambda, n, r, h);
    let exact_value = laplacian_coefficient(lambda, n) * r.powf(lambda - 2.0);
    Ok(CheckRow { r, fd_value, exact_value, rel_err: rel(fd_value, exact_value) })
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Exponent and coupling of the stationary solution `r^λ` (or `(x + i0)^λ`
/// for `n = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryParams {
    pub p: u32,
    pub n: usize,
    pub lambda: f64,
    /// `−λ(λ + n − 2)`.
    pub kappa: f64,
    /// `−λ(λ − 1)`, the one-dimensional coefficient; differs from `kappa`
    /// for `n ≥ 2`.
    pub kappa_1d_form: f64,
    /// `λp > −n`.
    pub power_valid: bool,
}

/// Smallest `n` with `λ > 2 − n`.
pub fn minimal_dimension(lambda: f64) -> usize {
    (2.0 - lambda).floor() as usize + 1
}

pub fn stationary_params_nd(p: u32, n: usize) -> Result<StationaryParams> {
    if p < 2 {
        return Err(Error::invalid(format!("p must be at least 2, got {p}")));
    }
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let lambda = 2.0 / (1.0 - p as f64);
    if n >= 2 && !(lambda > 2.0 - n as f64) {
        return Err(Error::Infeasible(format!(
            "λ = {lambda} needs λ > 2 − n; the smallest admissible dimension is n = {}",
            minimal_dimension(lambda)
        )));
    }
    Ok(StationaryParams {
        p,
        n,
        lambda,
        kappa: -laplacian_coefficient(lambda, n),
        kappa_1d_form: -lambda * (lambda - 1.0),
        power_valid: lambda * p as f64 > -(n as f64),
    })
}

/// Pointwise residual `|−Δu − κu^p| / |κu^p|` of the stationary solution at
/// each radius, with `Δu` from finite differences of step `h`.
///
/// `fd_value` holds `−Δu` and `exact_value` holds `κu^p`.
pub fn stationary_residual(params: &StationaryParams, radii: &[f64], h: f64) -> Result<Vec<CheckRow>> {
    radii
        .par_iter()
        .map(|&r| {
            let lap = laplacian_check_any(params.lambda, params.n, r, h)?;
            let rhs = params.kappa * r.powf(params.lambda * params.p as f64);
            let lhs = -lap.fd_value;
            Ok(CheckRow { r, fd_value: lhs, exact_value: rhs, rel_err: rel(lhs, rhs) })
        })
        .collect()
}

/// Writes `r,fd_value,exact_value,rel_err`.
pub fn write_check_csv<W: Write>(rows: &[CheckRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "r,fd_value,exact_value,rel_err")?;
    for c in rows {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", c.r, c.fd_value, c.exact_value, c.rel_err)?;
    }
    Ok(())
}

/// Whether `∫_1^∞ ρ^{2(−λ−n)} ⟨ρ⟩^{2s} ρ^{n−1} dρ` converges, decided by the
/// exponent of the integrand at infinity.
pub fn radial_tail_integrable(lambda: f64, s: f64, n: usize) -> bool {
    let nf = n as f64;
    2.0 * (-lambda - nf) + 2.0 * s + nf - 1.0 < -1.0
}
