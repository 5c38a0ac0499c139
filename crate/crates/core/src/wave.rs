//! The Duhamel operator and Picard iteration for `∂_t²u − ∂_x²u = κ u^p`
//! with spectra on the half-line.
//!
//! Per frequency bin the equation is the forced oscillator
//! `∂_t²û + ω²û = κ (û)^{*p}` with `ω = 2πξ`, so
//!
//! ```text
//! (𝓜u)^(ξ,t) = cos(ωt) û_0 + K(t) û_1 + κ ∫_0^t K(t−τ) (û)^{*p}(ξ,τ) dτ,
//! K(s) = sin(ωs)/ω.
//! ```
//!
//! The memory integral interpolates the nonlinearity linearly between
//! stored slices and integrates that interpolant against `K` exactly, so a
//! nonlinearity that is constant in time is integrated without error at any
//! `ωΔt`.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum_by, sinc, GAUSS_LEGENDRE_8};
use crate::products::{power_on_band, rational_to_f64, wellposed_s_min};
use crate::spectral::{NormValue, SpectralFunction, SpectralGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Map from frequency `ξ` to the oscillator frequency `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    /// `ω = 2πξ`, matching the `e^{-2πixξ}` transform.
    #[default]
    Angular,
    /// `ω = ξ`.
    Plain,
}

impl FrequencyConvention {
    pub fn omega(self, xi: f64) -> f64 {
        match self {
            FrequencyConvention::Angular => 2.0 * std::f64::consts::PI * xi,
            FrequencyConvention::Plain => xi,
        }
    }
}

/// `sin(ωs)/ω`, tending to `s` as `ω → 0`.
pub fn sine_kernel(omega: f64, s: f64) -> f64 {
    s * sinc(omega * s)
}

/// Initial position and velocity spectra on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    u0: SpectralFunction,
    u1: SpectralFunction,
}

impl CauchyData {
    pub fn new(u0: SpectralFunction, u1: SpectralFunction) -> Result<Self> {
        u0.grid().ensure_compatible(u1.grid())?;
        Ok(Self { u0, u1 })
    }

    pub fn zero(grid: SpectralGrid) -> Self {
        Self { u0: SpectralFunction::zeros(grid), u1: SpectralFunction::zeros(grid) }
    }

    pub fn u0(&self) -> &SpectralFunction {
        &self.u0
    }

    pub fn u1(&self) -> &SpectralFunction {
        &self.u1
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.u0.grid()
    }

    fn trust_edge(&self) -> f64 {
        self.u0.trust_edge().min(self.u1.trust_edge())
    }
}

/// Spectra at uniformly spaced times `t_j = (j − origin)·Δt`.
///
/// `Δt` may be negative. Times are generated from integer offsets, so grids
/// that are mirror images of each other have bitwise mirrored times.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: SpectralGrid,
    dt: f64,
    origin: usize,
    slices: Vec<SpectralFunction>,
}

impl SpaceTimeField {
    pub fn new(dt: f64, origin: usize, slices: Vec<SpectralFunction>) -> Result<Self> {
        if slices.len() < 3 {
            return Err(Error::invalid(format!(
                "a field needs at least 3 time slices, got {}",
                slices.len()
            )));
        }
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::invalid(format!("time step must be finite and nonzero, got {dt}")));
        }
        if origin >= slices.len() {
            return Err(Error::invalid("time origin outside the slice range"));
        }
        let grid = *slices[0].grid();
        for s in &slices[1..] {
            grid.ensure_compatible(s.grid())?;
        }
        Ok(Self { grid, dt, origin, slices })
    }

    /// Slices at `t = 0, Δt, …, NtΔt`.
    pub fn starting_at_zero(dt: f64, slices: Vec<SpectralFunction>) -> Result<Self> {
        Self::new(dt, 0, slices)
    }

    /// Slices at `t = −T, …, T` with `t = 0` in the middle; needs an odd count.
    pub fn symmetric(dt: f64, slices: Vec<SpectralFunction>) -> Result<Self> {
        if slices.len().is_multiple_of(2) {
            return Err(Error::invalid("a symmetric time grid needs an odd number of slices"));
        }
        let origin = slices.len() / 2;
        Self::new(dt, origin, slices)
    }

    /// The same spectrum at every time.
    pub fn constant(f: &SpectralFunction, dt: f64, steps: usize) -> Result<Self> {
        Self::starting_at_zero(dt, vec![f.clone(); steps + 1])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn steps(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - self.origin as f64) * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.slices.len()).map(|j| self.time(j)).collect()
    }

    pub fn slices(&self) -> &[SpectralFunction] {
        &self.slices
    }

    pub fn slice(&self, j: usize) -> &SpectralFunction {
        &self.slices[j]
    }

    /// Smallest trust edge over all slices.
    pub fn trust_edge(&self) -> f64 {
        self.slices.iter().map(|s| s.trust_edge()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.slices.iter().all(|s| s.samples().iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Sup over time of the `H^s` norm of the slice difference, on the
    /// common trust band.
    pub fn sup_distance(&self, other: &Self, s: f64) -> Result<f64> {
        if self.slices.len() != other.slices.len() {
            return Err(Error::invalid("fields have different numbers of time slices"));
        }
        self.grid.ensure_compatible(&other.grid)?;
        let edge = self.trust_edge().min(other.trust_edge());
        let mut sup = 0.0f64;
        for (a, b) in self.slices.iter().zip(&other.slices) {
            let d = a.sub(b)?.without_tail().with_trust_edge(edge);
            sup = sup.max(finite_norm(&d, s));
        }
        Ok(sup)
    }

    /// Sup over time of `‖u(t)‖_{H^s}` on the trust band.
    pub fn sup_norm(&self, s: f64) -> f64 {
        let edge = self.trust_edge();
        self.slices
            .iter()
            .map(|f| finite_norm(&f.clone().without_tail().with_trust_edge(edge), s))
            .fold(0.0, f64::max)
    }

    /// Keeps every other cell average (pairwise mean) and every other time.
    pub fn restrict(&self) -> Result<Self> {
        if !self.steps().is_multiple_of(2) || !self.origin.is_multiple_of(2) {
            return Err(Error::invalid("restriction needs even step count and origin"));
        }
        let slices =
            self.slices.iter().step_by(2).map(|s| s.coarsen()).collect::<Result<Vec<_>>>()?;
        Self::new(2.0 * self.dt, self.origin / 2, slices)
    }

    /// CSV `t,xi,re,im`, one row per time and trusted cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,xi,re,im")?;
        for (j, s) in self.slices.iter().enumerate() {
            let t = self.time(j);
            for (k, v) in s.samples()[..s.trust_bins()].iter().enumerate() {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    t,
                    self.grid.midpoint(k),
                    v.re,
                    v.im
                )?;
            }
        }
        Ok(())
    }
}

fn finite_norm(f: &SpectralFunction, s: f64) -> f64 {
    match f.sobolev_norm(s) {
        NormValue::Finite(v) => v,
        NormValue::Infinite => f64::INFINITY,
    }
}

/// Band on which `κ u^p` is evaluated: `Ξ/2^{p-1}`, further limited by the
/// inputs.
fn nonlinear_edge(grid: &SpectralGrid, p: u32, input_edge: f64) -> f64 {
    (grid.cutoff() / 2f64.powi(p as i32 - 1)).min(input_edge)
}

/// `u^p` for every slice; runs of equal consecutive slices reuse one power.
fn slice_powers(field: &SpaceTimeField, p: u32, edge: f64) -> Result<Vec<SpectralFunction>> {
    let mut out: Vec<SpectralFunction> = Vec::with_capacity(field.slices.len());
    for (j, s) in field.slices.iter().enumerate() {
        if j > 0 && field.slices[j - 1].samples() == s.samples() {
            let prev = out[j - 1].clone();
            out.push(prev);
        } else {
            out.push(power_on_band(s, p, edge)?);
        }
    }
    Ok(out)
}

/// Product-integration weights for one bin: `far[m-1]` and `near[m-1]` are
/// `(1/h)∫_0^h v K(a+v) dv` and `(1/h)∫_0^h (h−v) K(a+v) dv` with
/// `a = (m−1)h`, `h = |Δt|`. `far` multiplies the node at distance `mh`,
/// `near` the node at distance `(m−1)h`.
fn interval_weights(omega: f64, h: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let mut far = Vec::with_capacity(intervals);
    let mut near = Vec::with_capacity(intervals);
    let oh = omega * h;
    for m in 1..=intervals {
        let a = (m - 1) as f64 * h;
        let b = m as f64 * h;
        if oh < 0.5 {
            let (mut wf, mut wn) = (0.0, 0.0);
            for &(x, w) in GAUSS_LEGENDRE_8.iter() {
                let v = 0.5 * h * (x + 1.0);
                let k = sine_kernel(omega, a + v);
                wf += w * v * k;
                wn += w * (h - v) * k;
            }
            far.push(0.5 * wf);
            near.push(0.5 * wn);
        } else {
            let (sa, sb) = ((omega * a).sin(), (omega * b).sin());
            let (ca, cb) = ((omega * a).cos(), (omega * b).cos());
            let w2 = omega * omega;
            let w3 = w2 * omega;
            far.push((-h * cb / w2 + (sb - sa) / w3) / h);
            near.push((h * ca / w2 - (sb - sa) / w3) / h);
        }
    }
    (far, near)
}

/// `𝓜(field)` with `ω = 2πξ`.
pub fn duhamel_apply(
    field: &SpaceTimeField,
    data: &CauchyData,
    p: u32,
    kappa: f64,
) -> Result<SpaceTimeField> {
    duhamel_apply_with(field, data, p, kappa, FrequencyConvention::Angular)
}

pub fn duhamel_apply_with(
    field: &SpaceTimeField,
    data: &CauchyData,
    p: u32,
    kappa: f64,
    convention: FrequencyConvention,
) -> Result<SpaceTimeField> {
    if p < 2 {
        return Err(Error::invalid(format!("nonlinearity power must be at least 2, got {p}")));
    }
    field.grid.ensure_compatible(data.grid())?;
    let edge = nonlinear_edge(&field.grid, p, field.trust_edge().min(data.trust_edge()));
    let powers = if kappa == 0.0 { None } else { Some(slice_powers(field, p, edge)?) };
    Ok(propagate(field, data, kappa, powers.as_deref(), edge, convention))
}

/// Linear evolution of `data` on the time grid of `like`.
pub fn linear_evolution(
    like: &SpaceTimeField,
    data: &CauchyData,
    convention: FrequencyConvention,
) -> SpaceTimeField {
    propagate(like, data, 0.0, None, data.trust_edge(), convention)
}

fn propagate(
    field: &SpaceTimeField,
    data: &CauchyData,
    kappa: f64,
    powers: Option<&[SpectralFunction]>,
    edge: f64,
    convention: FrequencyConvention,
) -> SpaceTimeField {
    let grid = field.grid;
    let nt = field.slices.len();
    let origin = field.origin;
    let h = field.dt.abs();
    let intervals = origin.max(nt - 1 - origin);
    let (u0, u1) = (data.u0.samples(), data.u1.samples());

    let columns: Vec<Vec<Complex64>> = (0..grid.bins())
        .into_par_iter()
        .map(|b| {
            let omega = convention.omega(grid.midpoint(b));
            let forcing = powers.map(|pw| (pw, interval_weights(omega, h, intervals)));
            (0..nt)
                .map(|k| {
                    let t = field.time(k);
                    let (ta, sign) = (t.abs(), if t < 0.0 { -1.0 } else { 1.0 });
                    let mut v = u0[b] * (omega * ta).cos() + u1[b] * (sign * sine_kernel(omega, ta));
                    if let Some((pw, (far, near))) = &forcing {
                        let n = k.abs_diff(origin);
                        if n > 0 {
                            // node at distance d from t_k sits at index k ∓ d
                            let node = |d: usize| if k > origin { k - d } else { k + d };
                            let integral = pairwise_sum_by(n + 1, ZERO, &|d| {
                                let mut w = 0.0;
                                if d >= 1 {
                                    w += far[d - 1];
                                }
                                if d < n {
                                    w += near[d];
                                }
                                pw[node(d)].samples()[b] * w
                            });
                            v += integral * kappa;
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();

    let slices = (0..nt)
        .map(|k| {
            let samples = columns.iter().map(|c| c[k]).collect();
            SpectralFunction::from_parts(grid, samples, None, edge.min(grid.cutoff()))
        })
        .collect();
    SpaceTimeField { grid, dt: field.dt, origin, slices }
}

/// Equation residual with absolute and relative size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// `max_k ‖D_t²û + ω²û − κ û^{*p}‖_{H^σ}` over interior times.
    pub absolute: f64,
    /// `max_k` of the absolute residual over `‖ω²û‖ + ‖κ û^{*p}‖` at the same
    /// time (0 when both vanish).
    pub relative: f64,
}

pub fn residual(field: &SpaceTimeField, p: u32, kappa: f64, sigma: f64) -> Result<Residual> {
    residual_with(field, p, kappa, sigma, FrequencyConvention::Angular)
}

pub fn residual_with(
    field: &SpaceTimeField,
    p: u32,
    kappa: f64,
    sigma: f64,
    convention: FrequencyConvention,
) -> Result<Residual> {
    let profile = residual_profile(field, p, kappa, sigma, convention)?;
    Ok(profile.iter().fold(Residual { absolute: 0.0, relative: 0.0 }, |acc, (_, r)| Residual {
        absolute: acc.absolute.max(r.absolute),
        relative: acc.relative.max(r.relative),
    }))
}

/// Residual at each interior time `t_k`, `k = 1..Nt−1`.
pub fn residual_profile(
    field: &SpaceTimeField,
    p: u32,
    kappa: f64,
    sigma: f64,
    convention: FrequencyConvention,
) -> Result<Vec<(f64, Residual)>> {
    if field.steps() < 2 {
        return Err(Error::invalid("residual needs at least two time steps"));
    }
    if p < 2 {
        return Err(Error::invalid(format!("nonlinearity power must be at least 2, got {p}")));
    }
    let grid = field.grid;
    let edge = nonlinear_edge(&grid, p, field.trust_edge());
    let powers = slice_powers(field, p, edge)?;
    let inv_dt2 = 1.0 / (field.dt * field.dt);
    let omegas: Vec<f64> = grid.midpoints().iter().map(|&x| convention.omega(x)).collect();
    let mut out = Vec::with_capacity(field.steps() - 1);
    for k in 1..field.steps() {
        let (a, c, n) = (field.slice(k - 1).samples(), field.slice(k).samples(), field.slice(k + 1).samples());
        let pw = powers[k].samples();
        let build = |f: &dyn Fn(usize) -> Complex64| {
            SpectralFunction::from_parts(grid, (0..grid.bins()).map(f).collect(), None, edge)
        };
        let r = build(&|b| (n[b] - c[b] * 2.0 + a[b]) * inv_dt2 + c[b] * omegas[b].powi(2) - pw[b] * kappa);
        let lin = build(&|b| c[b] * omegas[b].powi(2));
        let non = build(&|b| pw[b] * kappa);
        let absolute = finite_norm(&r, sigma);
        let scale = finite_norm(&lin, sigma) + finite_norm(&non, sigma);
        let relative = if absolute > 0.0 { absolute / scale } else { 0.0 };
        out.push((field.time(k), Residual { absolute, relative }));
    }
    Ok(out)
}

/// Largest relative spread `(max − min)/mean` over bins of the staggered
/// per-mode energy `|D_t û|² + ω²|û|²` (a κ = 0 diagnostic).
pub fn mode_energy_drift(field: &SpaceTimeField, convention: FrequencyConvention) -> f64 {
    let grid = field.grid;
    let bins = field.slices.iter().map(|s| s.trust_bins()).min().unwrap_or(0);
    let dt = field.dt;
    (0..bins)
        .into_par_iter()
        .map(|b| {
            let w2 = convention.omega(grid.midpoint(b)).powi(2);
            let energies: Vec<f64> = field
                .slices
                .windows(2)
                .map(|pair| {
                    let (x, y) = (pair[0].samples()[b], pair[1].samples()[b]);
                    ((y - x) / dt).norm_sqr() + w2 * ((y + x) * 0.5).norm_sqr()
                })
                .collect();
            let mean = energies.iter().sum::<f64>() / energies.len() as f64;
            if mean == 0.0 {
                return 0.0;
            }
            let (lo, hi) = energies
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
            (hi - lo) / mean
        })
        .reduce(|| 0.0, f64::max)
}

/// Parameters of a Picard solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub p: u32,
    pub kappa: f64,
    /// Final time; negative values run backwards from `t = 0`.
    pub t_end: f64,
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Sobolev index of the stopping and ball norms.
    pub norm_index: f64,
    pub convention: FrequencyConvention,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            p: 2,
            kappa: 1.0,
            t_end: 0.1,
            steps: 32,
            tol: 1e-8,
            max_iter: 50,
            norm_index: 0.0,
            convention: FrequencyConvention::Angular,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Number of applications of `𝓜`.
    pub iterations: usize,
    /// Successive sup-in-time distances `‖u^{(m)} − u^{(m−1)}‖`.
    pub distances: Vec<f64>,
    /// `distances[m] / distances[m−1]` where the denominator is nonzero.
    pub ratios: Vec<f64>,
    pub converged: bool,
    /// Last successive distance.
    pub final_residual: f64,
    /// `sup_t ‖u(t) − linear part‖_{H^s}`.
    pub ball_distance: f64,
    pub ball_ok: bool,
    /// Every ratio is below 1.
    pub contractive: bool,
    pub norm_index: f64,
    pub warnings: Vec<String>,
}

impl SolveReport {
    /// Flat `key = value` block.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iterations = {}", self.iterations)?;
        writeln!(w, "converged = {}", self.converged)?;
        writeln!(w, "final_residual = {:.16e}", self.final_residual)?;
        writeln!(w, "ball_distance = {:.16e}", self.ball_distance)?;
        writeln!(w, "ball_ok = {}", self.ball_ok)?;
        writeln!(w, "contractive = {}", self.contractive)?;
        writeln!(w, "norm_index = {}", self.norm_index)?;
        let ratios: Vec<String> = self.ratios.iter().map(|r| format!("{r:.6e}")).collect();
        writeln!(w, "ratios = {}", ratios.join(" "))?;
        for warning in &self.warnings {
            writeln!(w, "warning = {warning}")?;
        }
        Ok(())
    }

    /// CSV `iter,ratio`.
    pub fn write_ratios_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,ratio")?;
        for (i, r) in self.ratios.iter().enumerate() {
            writeln!(w, "{},{:.16e}", i + 1, r)?;
        }
        Ok(())
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_text(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

/// Picard iteration `u^{(m+1)} = 𝓜u^{(m)}` from the linear evolution, on
/// `t_j = j·T/Nt`.
///
/// Stops when the sup-in-time `H^s` distance between iterates drops below
/// `tol`. Running out of iterations is reported, not raised; a non-finite
/// slice raises [`Error::Divergence`].
pub fn picard_solve(data: &CauchyData, cfg: &SolveConfig) -> Result<(SpaceTimeField, SolveReport)> {
    if !(cfg.t_end.is_finite() && cfg.t_end != 0.0) {
        return Err(Error::invalid(format!("final time must be finite and nonzero, got {}", cfg.t_end)));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if cfg.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if cfg.steps < 2 {
        return Err(Error::invalid("need at least 2 time steps"));
    }
    if cfg.p < 2 {
        return Err(Error::invalid(format!("nonlinearity power must be at least 2, got {}", cfg.p)));
    }
    let mut warnings = Vec::new();
    let s_min = rational_to_f64(wellposed_s_min(cfg.p)?);
    if cfg.norm_index <= s_min {
        warnings.push(format!(
            "norm index {} is at or below the wellposedness threshold {} for p = {}",
            cfg.norm_index, s_min, cfg.p
        ));
    }

    let dt = cfg.t_end / cfg.steps as f64;
    let template = SpaceTimeField::starting_at_zero(dt, vec![data.u0.clone(); cfg.steps + 1])?;
    let edge = nonlinear_edge(data.grid(), cfg.p, data.trust_edge());
    let linear = linear_evolution(&template, data, cfg.convention);
    let linear = clamp(linear, edge);
    let mut current = linear.clone();
    let mut distances = Vec::new();
    let mut converged = false;
    for iteration in 1..=cfg.max_iter {
        let next = duhamel_apply_with(&current, data, cfg.p, cfg.kappa, cfg.convention)?;
        if !next.is_finite() {
            return Err(Error::Divergence {
                iteration,
                detail: "non-finite spectrum in an iterate".to_string(),
            });
        }
        let d = next.sup_distance(&current, cfg.norm_index)?;
        if !d.is_finite() {
            return Err(Error::Divergence { iteration, detail: format!("iterate distance {d}") });
        }
        distances.push(d);
        current = next;
        if d < cfg.tol {
            converged = true;
            break;
        }
    }
    let ratios: Vec<f64> =
        distances.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let contractive = worst < 1.0;
    if !contractive {
        warnings.push(format!("iteration is not contractive: largest ratio {worst:.3e}"));
    }
    if !converged {
        warnings.push(format!("no convergence within {} iterations", cfg.max_iter));
    }
    let ball_distance = current.sup_distance(&linear, cfg.norm_index)?;
    let report = SolveReport {
        iterations: distances.len(),
        final_residual: *distances.last().unwrap_or(&0.0),
        distances,
        ratios,
        converged,
        ball_distance,
        ball_ok: ball_distance <= 1.0,
        contractive,
        norm_index: cfg.norm_index,
        warnings,
    };
    Ok((current, report))
}

/// `sup_t ‖u_δ(t) − u(t)‖_{H^s} / δ` where `u_δ` solves with `u0 + δ·g` and
/// `g` is rescaled to unit `H^s` norm.
pub fn lipschitz_constant(
    data: &CauchyData,
    cfg: &SolveConfig,
    direction: &SpectralFunction,
    delta: f64,
) -> Result<f64> {
    let unit = match direction.sobolev_norm(cfg.norm_index) {
        NormValue::Finite(n) if n > 0.0 => direction.scale_real(1.0 / n),
        _ => return Err(Error::invalid("perturbation direction needs a finite nonzero norm")),
    };
    let moved = CauchyData::new(data.u0.add(&unit.scale_real(delta))?, data.u1.clone())?;
    let (base, _) = picard_solve(data, cfg)?;
    let (pert, _) = picard_solve(&moved, cfg)?;
    Ok(pert.sup_distance(&base, cfg.norm_index)? / delta)
}

fn clamp(field: SpaceTimeField, edge: f64) -> SpaceTimeField {
    let slices = field.slices.into_iter().map(|s| s.with_trust_edge(edge)).collect();
    SpaceTimeField { slices, ..field }
}
