//! Local regularity from windowed spectra, singular-support scans, and ray
//! fits against the light cone.
//!
//! Near an isolated singularity of type `(x + i0)^λ` the windowed spectrum
//! decays like `|ξ|^{-λ-1}`, and `⟨ξ⟩^s` times that is square integrable
//! exactly when `s < λ + 1/2`. Fitting the decay rate therefore estimates
//! the supremal local Sobolev exponent.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{boost_eval, ray_classify_with_band, BoostedSolution, RayClass};
use crate::numeric::{least_squares, pairwise_sum_by};
use crate::spectral::{japanese_bracket, SpectralGrid};

/// Window support is `[x0 − 5w, x0 + 5w]`.
pub const WINDOW_HALF_WIDTH: f64 = 5.0;
/// Fit band starts at `8/w`.
pub const BAND_LOW: f64 = 8.0;
/// Fit band ends at `Ξ/4`.
pub const BAND_HIGH: f64 = 0.25;
/// Frequencies sampled in the fit band (log-spaced).
pub const FIT_POINTS: usize = 48;
/// Spectra below this fraction of the windowed L¹ norm count as smooth.
pub const SMOOTH_FLOOR: f64 = 1e-13;
/// Half-width of the `OnCone` band around `|c| = 1`.
pub const ON_CONE_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityEstimate {
    pub x0: f64,
    /// `+∞` when the windowed spectrum is numerically zero on the band.
    pub s_est: f64,
    /// Coefficient of determination of the log fit.
    pub fit_quality: f64,
    pub band: (f64, f64),
    /// Mean of `log|F|` over the band (`−∞` for the smooth sentinel).
    pub log_amplitude: f64,
}

impl RegularityEstimate {
    pub fn is_smooth(&self) -> bool {
        self.s_est == f64::INFINITY
    }
}

/// `e^{-u} − e^{-25}(26 − u)` with `u = (x − x0)²/w²`, zero beyond `5w`.
/// Subtracting the tangent line at `u = 25` makes the clamp C¹.
fn window(d: f64, w: f64) -> f64 {
    let u = (d / w).powi(2);
    let edge = WINDOW_HALF_WIDTH * WINDOW_HALF_WIDTH;
    if u >= edge {
        0.0
    } else {
        (-u).exp() - (-edge).exp() * (edge + 1.0 - u)
    }
}

fn fit_band(w: f64, grid: &SpectralGrid) -> Result<(f64, f64)> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::invalid(format!("window width must be positive, got {w}")));
    }
    let band = (BAND_LOW / w, BAND_HIGH * grid.cutoff());
    if band.0 >= band.1 {
        return Err(Error::invalid(format!(
            "empty fit band [{}, {}]: the cutoff must exceed {} for w = {w}",
            band.0,
            band.1,
            BAND_LOW / (BAND_HIGH * w)
        )));
    }
    Ok(band)
}

/// Estimates the local Sobolev exponent of `field` at `x0` with a window of
/// width `w`, using frequencies up to a quarter of the grid cutoff.
pub fn local_exponent<F>(field: &F, x0: f64, w: f64, grid: &SpectralGrid) -> Result<RegularityEstimate>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let band = fit_band(w, grid)?;
    let h = 1.0 / (8.0 * grid.cutoff());
    let half = (WINDOW_HALF_WIDTH * w / h).ceil() as usize;
    let offsets: Vec<f64> = (0..=2 * half).map(|j| (j as f64 - half as f64) * h).collect();
    let samples = offsets
        .iter()
        .map(|&d| Ok(field(x0 + d)? * window(d, w)))
        .collect::<Result<Vec<Complex64>>>()?;
    if samples.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::invalid(format!("non-finite field value near x0 = {x0}")));
    }
    let l1 = h * pairwise_sum_by(samples.len(), 0.0, &|j| samples[j].norm());

    let ratio = band.1 / band.0;
    let freqs: Vec<f64> = (0..FIT_POINTS)
        .map(|i| band.0 * ratio.powf(i as f64 / (FIT_POINTS - 1) as f64))
        .collect();
    let magnitudes: Vec<f64> = freqs
        .iter()
        .map(|&xi| {
            let omega = 2.0 * std::f64::consts::PI * xi;
            let terms: Vec<(Complex64, Complex64)> = offsets
                .iter()
                .zip(&samples)
                .map(|(&d, &g)| {
                    let (s, c) = (omega * d).sin_cos();
                    (g * Complex64::new(c, -s), g * Complex64::new(c, s))
                })
                .collect();
            let zero = Complex64::new(0.0, 0.0);
            let plus = pairwise_sum_by(terms.len(), zero, &|j| terms[j].0);
            let minus = pairwise_sum_by(terms.len(), zero, &|j| terms[j].1);
            h * plus.norm().max(minus.norm())
        })
        .collect();

    let peak = magnitudes.iter().cloned().fold(0.0, f64::max);
    if peak < SMOOTH_FLOOR * l1 || peak == 0.0 {
        return Ok(RegularityEstimate {
            x0,
            s_est: f64::INFINITY,
            fit_quality: 1.0,
            band,
            log_amplitude: f64::NEG_INFINITY,
        });
    }
    let logs: Vec<f64> = magnitudes.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let rows: Vec<Vec<f64>> = freqs
        .iter()
        .map(|&xi| vec![1.0, japanese_bracket(xi).ln(), xi / band.1])
        .collect();
    let coef = least_squares(&rows, &logs)
        .ok_or_else(|| Error::invalid("degenerate exponent fit"))?;
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (row, &y) in rows.iter().zip(&logs) {
        let fit: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
        ss_res += (y - fit).powi(2);
        ss_tot += (y - mean).powi(2);
    }
    let fit_quality = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RegularityEstimate { x0, s_est: -coef[1] - 0.5, fit_quality, band, log_amplitude: mean })
}

/// `local_exponent` at `x0 = a, a + stride, …` up to `b`.
pub fn exponent_profile<F>(
    field: &F,
    range: (f64, f64),
    w: f64,
    stride: f64,
    grid: &SpectralGrid,
) -> Result<Vec<RegularityEstimate>>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    if !(stride > 0.0) {
        return Err(Error::invalid("scan stride must be positive"));
    }
    fit_band(w, grid)?;
    if !(range.1 >= range.0) {
        return Ok(Vec::new());
    }
    let count = ((range.1 - range.0) / stride + 1e-9).floor() as usize + 1;
    (0..count)
        .into_par_iter()
        .map(|i| local_exponent(field, range.0 + i as f64 * stride, w, grid))
        .collect()
}

/// Singular points in `range`: each run of scan points with
/// `s_est < threshold` contributes the position of its amplitude peak,
/// refined by a parabola through the neighbouring log amplitudes.
pub fn singular_set<F>(
    field: &F,
    range: (f64, f64),
    w: f64,
    threshold: f64,
    stride: f64,
    grid: &SpectralGrid,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    if stride > 0.5 * w {
        return Err(Error::invalid(format!("scan stride {stride} exceeds w/2 = {}", 0.5 * w)));
    }
    let profile = exponent_profile(field, range, w, stride, grid)?;
    Ok(peaks_below(&profile, threshold, stride))
}

fn peaks_below(profile: &[RegularityEstimate], threshold: f64, stride: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < profile.len() {
        if profile[i].s_est >= threshold {
            i += 1;
            continue;
        }
        let start = i;
        while i < profile.len() && profile[i].s_est < threshold {
            i += 1;
        }
        let run = &profile[start..i];
        let best = (0..run.len())
            .max_by(|&a, &b| run[a].log_amplitude.total_cmp(&run[b].log_amplitude))
            .expect("nonempty run");
        let mut x = run[best].x0;
        if best > 0 && best + 1 < run.len() {
            let (l, c, r) =
                (run[best - 1].log_amplitude, run[best].log_amplitude, run[best + 1].log_amplitude);
            let curv = l - 2.0 * c + r;
            if curv < 0.0 {
                x += 0.5 * (l - r) / curv * stride;
            }
        }
        out.push(x);
    }
    out
}

/// Writes `x0,s_est,fit_quality`.
pub fn write_profile_csv<W: Write>(profile: &[RegularityEstimate], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x0,s_est,fit_quality")?;
    for e in profile {
        let s = if e.is_smooth() { "inf".to_string() } else { format!("{:.16e}", e.s_est) };
        writeln!(w, "{:.16e},{},{:.16e}", e.x0, s, e.fit_quality)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayEstimate {
    /// Speed with the singular point at `x ≈ −c_est·t + x_at_t0`.
    pub c_est: f64,
    pub x_at_t0: f64,
    /// Root-mean-square deviation of the tracked points from the line.
    pub residual: f64,
    pub classification: RayClass,
    pub points: Vec<(f64, f64)>,
}

impl RayEstimate {
    /// `t,x_sing` rows and a trailing `# c_est,class` summary comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x_sing")?;
        for (t, x) in &self.points {
            writeln!(w, "{t:.16e},{x:.16e}")?;
        }
        writeln!(w, "# c_est,class")?;
        writeln!(w, "# {:.16e},{}", self.c_est, self.classification.as_str())
    }
}

/// Settings for [`track_ray`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSettings {
    pub w: f64,
    /// Regularisation of the evaluated field; defaults to `w/100`.
    pub eps: f64,
    pub range: (f64, f64),
    pub stride: f64,
    pub threshold: f64,
}

impl TrackSettings {
    pub fn new(w: f64, range: (f64, f64)) -> Self {
        Self { w, eps: w / 100.0, range, stride: w / 4.0, threshold: 0.0 }
    }
}

/// Locates the singular point of `boosted` at each time (along the `x_1`
/// axis) and fits a line `x = x_at_t0 − c_est·t` through them.
pub fn track_ray(
    boosted: &BoostedSolution,
    times: &[f64],
    settings: &TrackSettings,
    grid: &SpectralGrid,
) -> Result<RayEstimate> {
    if times.len() < 3 {
        return Err(Error::invalid("ray tracking needs at least 3 times"));
    }
    let dim = boosted.base().dim();
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let field = |x: f64| {
            let mut p = vec![0.0; dim];
            p[0] = x;
            boost_eval(boosted, &p, t, settings.eps)
        };
        let found = singular_set(&field, settings.range, settings.w, settings.threshold, settings.stride, grid)?;
        let x = match found.as_slice() {
            [] => return Err(Error::PartialTrack(t)),
            [x] => *x,
            many => {
                // several candidates: keep the strongest one
                let mut best = (f64::NEG_INFINITY, many[0]);
                for &x in many {
                    let amp = local_exponent(&field, x, settings.w, grid)?.log_amplitude;
                    if amp > best.0 {
                        best = (amp, x);
                    }
                }
                best.1
            }
        };
        points.push((t, x));
    }
    fit_ray(points)
}

/// Least-squares line through `(t, x)` pairs.
pub fn fit_ray(points: Vec<(f64, f64)>) -> Result<RayEstimate> {
    let n = points.len() as f64;
    let tm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let xm = points.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = points.iter().map(|p| (p.0 - tm).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::invalid("ray fit needs distinct times"));
    }
    let stx: f64 = points.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    let slope = stx / stt;
    let intercept = xm - slope * tm;
    let residual =
        (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let c_est = -slope;
    Ok(RayEstimate {
        c_est,
        x_at_t0: intercept,
        residual,
        classification: ray_classify_with_band(c_est, ON_CONE_BAND),
        points,
    })
}
