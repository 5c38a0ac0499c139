//! Half-line spectra on a uniform frequency grid.
//!
//! A [`SpectralFunction`] stores the cell averages of `f̂` over
//! `[kΔξ, (k+1)Δξ]`, `k = 0..N`, optionally followed by an analytic power-law
//! tail `A ξ^a` for `ξ > Ξ`. Nothing below `ξ = 0` is ever stored, so support
//! in `[0, ∞)` holds by construction.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum_by, sinc};

/// Uniform grid on `[0, Ξ]` with `N` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    cutoff: f64,
    bins: usize,
}

impl SpectralGrid {
    /// `bins` must be a power of two no smaller than 8.
    pub fn new(cutoff: f64, bins: usize) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::invalid(format!("cutoff must be positive, got {cutoff}")));
        }
        if bins < 8 {
            return Err(Error::invalid(format!("bins must be at least 8, got {bins}")));
        }
        if !bins.is_power_of_two() {
            return Err(Error::invalid(format!("bins must be a power of two, got {bins}")));
        }
        Ok(Self { cutoff, bins })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn spacing(&self) -> f64 {
        self.cutoff / self.bins as f64
    }

    /// Midpoint of cell `k`.
    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.spacing()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.bins).map(|k| self.midpoint(k)).collect()
    }

    pub fn is_compatible(&self, other: &SpectralGrid) -> bool {
        self.cutoff == other.cutoff && self.bins == other.bins
    }

    pub fn ensure_compatible(&self, other: &SpectralGrid) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.cutoff, self.bins, other.cutoff, other.bins))
        }
    }

    /// Same spacing, twice the cutoff.
    pub fn extended(&self) -> Self {
        Self { cutoff: 2.0 * self.cutoff, bins: 2 * self.bins }
    }

    /// Same cutoff, twice the bins.
    pub fn refined(&self) -> Self {
        Self { cutoff: self.cutoff, bins: 2 * self.bins }
    }
}

/// `⟨ξ⟩ = (1 + ξ²)^{1/2}`.
pub fn japanese_bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// Sobolev exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(pub f64);

impl From<f64> for SobolevIndex {
    fn from(s: f64) -> Self {
        SobolevIndex(s)
    }
}

/// Analytic tail `f̂(ξ) = A ξ^a` beyond the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub amplitude: Complex64,
    pub exponent: f64,
}

/// Outcome of a Sobolev norm evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    Finite(f64),
    /// The analytic tail makes the weighted integral diverge.
    Infinite,
}

impl NormValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, NormValue::Infinite)
    }
}

/// Result of [`SpectralFunction::eval_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalEval {
    pub values: Vec<Complex64>,
    /// Bound on the ignored tail contribution `|∫_Ξ^∞ A ξ^a dξ|`; `None`
    /// without a tail, `Some(inf)` when the tail is not absolutely integrable.
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: SpectralGrid,
    samples: Vec<Complex64>,
    tail: Option<Tail>,
    trust_edge: f64,
}

impl SpectralFunction {
    pub fn new(grid: SpectralGrid, samples: Vec<Complex64>, tail: Option<Tail>) -> Result<Self> {
        if samples.len() != grid.bins() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                grid.bins(),
                samples.len()
            )));
        }
        if let Some(t) = tail {
            if !t.exponent.is_finite() {
                return Err(Error::invalid("tail exponent must be finite"));
            }
            let n = grid.bins();
            let expected = t.amplitude * grid.midpoint(n - 1).powf(t.exponent);
            let scale = t.amplitude.norm() * grid.cutoff().powf(t.exponent);
            if (samples[n - 1] - expected).norm() > 1e-2 * scale {
                return Err(Error::invalid(
                    "tail does not continue the last sample within 1e-2 relative",
                ));
            }
        }
        let cutoff = grid.cutoff();
        Ok(Self { grid, samples, tail, trust_edge: cutoff })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.bins()],
            tail: None,
            trust_edge: grid.cutoff(),
        }
    }

    /// Cell averages from an antiderivative `F` of `f̂`: `(F(b) - F(a)) / Δξ`.
    pub fn from_antiderivative<F>(grid: SpectralGrid, antiderivative: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let dxi = grid.spacing();
        let samples = (0..grid.bins())
            .map(|k| {
                let a = k as f64 * dxi;
                (antiderivative(a + dxi) - antiderivative(a)) / dxi
            })
            .collect();
        Self { grid, samples, tail: None, trust_edge: grid.cutoff() }
    }

    /// Samples taken as midpoint values of `f` (second-order accurate cell
    /// averages for smooth `f`).
    pub fn from_midpoint_values<F>(grid: SpectralGrid, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let samples = (0..grid.bins()).map(|k| f(grid.midpoint(k))).collect();
        Self { grid, samples, tail: None, trust_edge: grid.cutoff() }
    }

    /// Exact cell averages of `1_{[a,b]}`.
    pub fn indicator(grid: SpectralGrid, a: f64, b: f64) -> Self {
        Self::from_antiderivative(grid, |x| Complex64::new(x.clamp(a, b) - a, 0.0))
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn tail(&self) -> Option<Tail> {
        self.tail
    }

    /// Upper end of the frequency band on which the samples are trusted.
    pub fn trust_edge(&self) -> f64 {
        self.trust_edge
    }

    /// Number of leading cells contained in `[0, trust_edge]`.
    pub fn trust_bins(&self) -> usize {
        let n = (self.trust_edge / self.grid.spacing()).floor() as usize;
        n.min(self.grid.bins())
    }

    /// Narrows the trust band to `[0, edge]`; the tail is dropped when the
    /// band no longer reaches the cutoff.
    pub fn with_trust_edge(mut self, edge: f64) -> Self {
        assert!(edge >= 0.0, "trust band must stay inside [0, ∞)");
        self.trust_edge = self.trust_edge.min(edge);
        if self.trust_edge < self.grid.cutoff() {
            self.tail = None;
        }
        self
    }

    pub(crate) fn from_parts(
        grid: SpectralGrid,
        samples: Vec<Complex64>,
        tail: Option<Tail>,
        trust_edge: f64,
    ) -> Self {
        debug_assert_eq!(samples.len(), grid.bins());
        debug_assert!(trust_edge >= 0.0);
        Self { grid, samples, tail, trust_edge }
    }

    pub fn without_tail(mut self) -> Self {
        self.tail = None;
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| v * c).collect(),
            tail: self.tail.map(|t| Tail { amplitude: t.amplitude * c, exponent: t.exponent }),
            trust_edge: self.trust_edge,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.grid.ensure_compatible(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| a + b * sign)
            .collect();
        let tail = match (self.tail, other.tail) {
            (Some(a), Some(b)) if a.exponent == b.exponent => Some(Tail {
                amplitude: a.amplitude + b.amplitude * sign,
                exponent: a.exponent,
            }),
            (Some(a), None) if other.is_zero() => Some(a),
            (None, Some(b)) if self.is_zero() => {
                Some(Tail { amplitude: b.amplitude * sign, exponent: b.exponent })
            }
            _ => None,
        };
        Ok(Self {
            grid: self.grid,
            samples,
            tail,
            trust_edge: self.trust_edge.min(other.trust_edge),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.tail.is_none() && self.samples.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Multiplies each cell by `g(ξ_k)` at its midpoint; drops the tail.
    pub fn modulate<G>(&self, g: G) -> Self
    where
        G: Fn(f64) -> Complex64,
    {
        let samples =
            self.samples.iter().enumerate().map(|(k, &v)| v * g(self.grid.midpoint(k))).collect();
        Self { grid: self.grid, samples, tail: None, trust_edge: self.trust_edge }
    }

    /// Spectrum of the ε-shifted function `f(x + iε)`, i.e. `f̂(ξ) e^{-2πεξ}`.
    pub fn damped(&self, eps: f64) -> Self {
        self.modulate(|xi| Complex64::new((-2.0 * PI * eps * xi).exp(), 0.0))
    }

    /// Averages adjacent cell pairs onto the grid with half the bins.
    pub fn coarsen(&self) -> Result<Self> {
        let grid = SpectralGrid::new(self.grid.cutoff(), self.grid.bins() / 2)?;
        let samples = self.samples.chunks(2).map(|c| (c[0] + c[1]) * 0.5).collect();
        Ok(Self { grid, samples, tail: self.tail, trust_edge: self.trust_edge })
    }

    /// Sobolev norm `‖f‖_{H^s}` over the trust band, plus the analytic tail
    /// when the band reaches the cutoff.
    ///
    /// A tail with `2s + 2a ≥ -1` gives [`NormValue::Infinite`]. The tail
    /// integral expands `⟨ξ⟩^{2s} = ξ^{2s}(1 + ξ^{-2})^s` binomially when
    /// `Ξ > 1`; for `Ξ ≤ 1` only the leading `⟨ξ⟩ ≈ ξ` term is used, which is
    /// off by at most the factor [`tail_correction_bound`].
    pub fn sobolev_norm(&self, s: impl Into<SobolevIndex>) -> NormValue {
        let s = s.into().0;
        let dxi = self.grid.spacing();
        let tail_sq = if self.trust_edge >= self.grid.cutoff() {
            match self.tail {
                Some(t) => match tail_integral(t, s, self.grid.cutoff()) {
                    Some(v) => v,
                    None => return NormValue::Infinite,
                },
                None => 0.0,
            }
        } else {
            0.0
        };
        let n = self.trust_bins();
        let grid = self.grid;
        let samples = &self.samples;
        let body = pairwise_sum_by(n, 0.0, &|k| {
            let xi = grid.midpoint(k);
            samples[k].norm_sqr() * (1.0 + xi * xi).powf(s) * dxi
        });
        NormValue::Finite((body + tail_sq).sqrt())
    }

    /// Inverse transform `∫_0^Ξ f̂(ξ) e^{2πixξ} dξ` of the piecewise-constant
    /// reconstruction, evaluated cell by cell in closed form. The tail is
    /// ignored and reported as a bound.
    pub fn eval_physical(&self, points: &[f64]) -> Result<PhysicalEval> {
        let dxi = self.grid.spacing();
        let limit = 10.0 / dxi;
        for &x in points {
            if x.is_nan() {
                return Err(Error::invalid("NaN evaluation point"));
            }
            if x.abs() > limit {
                return Err(Error::invalid(format!(
                    "|x| = {} exceeds 10/Δξ = {limit}",
                    x.abs()
                )));
            }
        }
        let n = self.trust_bins();
        let values = points
            .par_iter()
            .map(|&x| {
                let envelope = dxi * sinc(PI * x * dxi);
                let sum = pairwise_sum_by(n, Complex64::new(0.0, 0.0), &|k| {
                    self.samples[k] * Complex64::cis(2.0 * PI * x * self.grid.midpoint(k))
                });
                sum * envelope
            })
            .collect();
        let tail_bound = self.tail.map(|t| {
            let e = t.exponent + 1.0;
            if e < 0.0 {
                t.amplitude.norm() * self.grid.cutoff().powf(e) / (-e)
            } else {
                f64::INFINITY
            }
        });
        Ok(PhysicalEval { values, tail_bound })
    }

    /// CSV with header `xi,re,im` (one row per trusted cell midpoint) and an
    /// optional `# tail A_re A_im a` line. Numbers carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,re,im")?;
        let rows = if self.trust_edge < self.grid.cutoff() {
            self.trust_bins()
        } else {
            self.grid.bins()
        };
        for k in 0..rows {
            let v = self.samples[k];
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.grid.midpoint(k), v.re, v.im)?;
        }
        if let Some(t) = self.tail {
            writeln!(w, "# tail {:.16e} {:.16e} {:.16e}", t.amplitude.re, t.amplitude.im, t.exponent)?;
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv) for full-band spectra.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        if header.trim() != "xi,re,im" {
            return Err(Error::Parse(format!("expected header `xi,re,im`, got `{header}`")));
        }
        let mut first_xi = None;
        let mut samples = Vec::new();
        let mut tail = None;
        for line in lines {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# tail") {
                let v = parse_floats(rest.split_whitespace())?;
                if v.len() != 3 {
                    return Err(Error::Parse("tail line needs three numbers".into()));
                }
                tail = Some(Tail { amplitude: Complex64::new(v[0], v[1]), exponent: v[2] });
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let v = parse_floats(line.split(','))?;
            if v.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns in `{line}`")));
            }
            first_xi.get_or_insert(v[0]);
            samples.push(Complex64::new(v[1], v[2]));
        }
        let xi0 = first_xi.ok_or_else(|| Error::Parse("no data rows".into()))?;
        let dxi = 2.0 * xi0;
        let grid = SpectralGrid::new(dxi * samples.len() as f64, samples.len())?;
        Self::new(grid, samples, tail)
    }
}

fn parse_floats<'a>(it: impl Iterator<Item = &'a str>) -> Result<Vec<f64>> {
    it.map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
        .collect()
}

/// Multiplicative error bound `(1 + Ξ^{-2})^{|s|}` of the `⟨ξ⟩ ≈ ξ`
/// substitution in the tail integral.
pub fn tail_correction_bound(s: f64, cutoff: f64) -> f64 {
    (1.0 + cutoff.powi(-2)).powf(s.abs())
}

/// `∫_Ξ^∞ |A|² ξ^{2a} ⟨ξ⟩^{2s} dξ`, or `None` when it diverges.
fn tail_integral(t: Tail, s: f64, cutoff: f64) -> Option<f64> {
    let e = 2.0 * t.exponent + 2.0 * s + 1.0;
    if e >= 0.0 {
        return None;
    }
    let a2 = t.amplitude.norm_sqr();
    if a2 == 0.0 {
        return Some(0.0);
    }
    let leading = cutoff.powf(e) / (-e);
    if cutoff <= 1.0 {
        return Some(a2 * leading);
    }
    // Σ_j binom(s, j) Ξ^{e-2j} / (2j - e)
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..80 {
        let ej = e - 2.0 * j as f64;
        let term = binom * cutoff.powf(ej) / (-ej);
        total += term;
        if term.abs() <= 1e-18 * total.abs() {
            break;
        }
        binom *= (s - j as f64) / (j as f64 + 1.0);
    }
    Some(a2 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_spacing_is_exact() {
        let g = SpectralGrid::new(256.0, 1 << 14).unwrap();
        assert_eq!(g.spacing(), 2f64.powi(-6));
        let g = SpectralGrid::new(1.0, 8).unwrap();
        assert_eq!(g.spacing(), 0.125);
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(matches!(SpectralGrid::new(256.0, 100), Err(Error::InvalidArgument(_))));
        assert!(SpectralGrid::new(0.0, 8).is_err());
        assert!(SpectralGrid::new(-1.0, 8).is_err());
        assert!(SpectralGrid::new(1.0, 4).is_err());
        assert!(SpectralGrid::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn indicator_l2_norm() {
        let g = SpectralGrid::new(2.0, 1 << 10).unwrap();
        let f = SpectralFunction::indicator(g, 0.0, 1.0);
        let n = f.sobolev_norm(0.0).finite().unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_h1_norm_against_closed_form() {
        // ∫_0^1 (1 + ξ²) dξ = 4/3
        let g = SpectralGrid::new(1.0, 1 << 14).unwrap();
        let f = SpectralFunction::indicator(g, 0.0, 1.0);
        let n = f.sobolev_norm(1.0).finite().unwrap();
        assert!((n - (4.0f64 / 3.0).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn constant_tail_with_a_zero_is_infinite_at_s_minus_0_4() {
        let g = SpectralGrid::new(16.0, 64).unwrap();
        let a = c(0.0, -2.0 * PI);
        let f = SpectralFunction::new(g, vec![a; 64], Some(Tail { amplitude: a, exponent: 0.0 }))
            .unwrap();
        assert!(f.sobolev_norm(-0.4).is_infinite());
        assert!(f.sobolev_norm(-0.5).is_infinite());
        assert!(f.sobolev_norm(-0.6).finite().is_some());
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        // ∫_4^∞ ξ^{-2}(1+ξ²)^{0.3} dξ; with v = ξ^{-0.4} the integrand becomes
        // the smooth 2.5 (1 + v^5)^{0.3} on (0, 4^{-0.4}].
        let t = Tail { amplitude: c(1.0, 0.0), exponent: -1.0 };
        let got = tail_integral(t, 0.3, 4.0).unwrap();
        let top = 4f64.powf(-0.4);
        let n = 200_000;
        let h = top / n as f64;
        let reference: f64 = (0..n)
            .map(|i| {
                let v = (i as f64 + 0.5) * h;
                2.5 * (1.0 + v.powi(5)).powf(0.3)
            })
            .sum::<f64>()
            * h;
        assert!(((got - reference) / reference).abs() < 1e-8, "{got} vs {reference}");
    }

    #[test]
    fn tail_continuity_is_checked() {
        let g = SpectralGrid::new(1.0, 8).unwrap();
        let bad = SpectralFunction::new(g, vec![c(1.0, 0.0); 8], Some(Tail { amplitude: c(2.0, 0.0), exponent: 0.0 }));
        assert!(bad.is_err());
    }

    #[test]
    fn eval_indicator_at_zero_and_half() {
        let g = SpectralGrid::new(2.0, 1 << 12).unwrap();
        let f = SpectralFunction::indicator(g, 0.0, 1.0);
        let out = f.eval_physical(&[0.0, 0.5]).unwrap();
        assert!((out.values[0] - c(1.0, 0.0)).norm() < 1e-10);
        // 10^6-point midpoint reference for ∫_0^1 e^{iπξ} dξ
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let mut reference = c(0.0, 0.0);
        for i in 0..n {
            reference += Complex64::cis(PI * (i as f64 + 0.5) * h) * h;
        }
        assert!((out.values[1] - reference).norm() < 1e-10);
        assert!((reference - c(0.0, 2.0 / PI)).norm() < 1e-9);
        assert!(out.tail_bound.is_none());
    }

    #[test]
    fn eval_edge_cases() {
        let g = SpectralGrid::new(1.0, 8).unwrap();
        let z = SpectralFunction::zeros(g);
        assert!(z.eval_physical(&[]).unwrap().values.is_empty());
        assert_eq!(z.eval_physical(&[0.3]).unwrap().values[0], c(0.0, 0.0));
        assert!(z.eval_physical(&[f64::NAN]).is_err());
        assert!(z.eval_physical(&[1e6]).is_err());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = SpectralGrid::new(3.0, 16).unwrap();
        let f = SpectralFunction::from_midpoint_values(g, |x| c((x * 1.7).sin() / 3.0, x.sqrt()));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = SpectralFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);

        let a = c(0.25, -1.0 / 3.0);
        let t = SpectralFunction::new(g, vec![a; 16], Some(Tail { amplitude: a, exponent: 0.0 }))
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(SpectralFunction::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(SpectralFunction::read_csv("a,b,c\n0.5,1,2\n".as_bytes()).is_err());
        assert!(SpectralFunction::read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn coarsen_preserves_cell_integrals() {
        let g = SpectralGrid::new(1.0, 16).unwrap();
        let f = SpectralFunction::from_antiderivative(g, |x| c(x * x * x / 3.0, 0.0));
        let coarse = f.coarsen().unwrap();
        let direct = SpectralFunction::from_antiderivative(*coarse.grid(), |x| c(x * x * x / 3.0, 0.0));
        for (a, b) in coarse.samples().iter().zip(direct.samples()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
