//! Fourier products of half-line spectra and the multiplier bounds that
//! govern them.
//!
//! For spectra supported in `[0, ∞)` the product `u·v = F⁻¹(û * v̂)` only needs
//! the one-sided convolution `∫_0^ξ û(ξ-η) v̂(η) dη`. On the grid both factors
//! are piecewise constant; the convolution of two unit cells is a hat
//! spanning two cells, whose average over each of those cells is `Δξ/2`. So
//! the exact cell average of the product is
//!
//! ```text
//! h_k = Δξ/2 · (S_k + S_{k-1}),   S_m = Σ_{i+j=m} f_i g_j.
//! ```
//!
//! Every product halves the trust band: outputs are only kept on
//! `[0, min(edge_f, edge_g)/2]` and set to zero above it.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{FromPrimitive, Num};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum_by;
use crate::spectral::{NormValue, SpectralFunction, SpectralGrid};

/// Anti-diagonal sums `S_m` for `m in 0..len`, in a summation order that is
/// symmetric in `f` and `g`.
fn antidiagonal_sums(f: &[Complex64], g: &[Complex64], len: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    (0..len)
        .into_par_iter()
        .map(|m| {
            let half = m / 2;
            pairwise_sum_by(half + 1, zero, &|i| {
                let j = m - i;
                if i == j {
                    f[i] * g[i]
                } else {
                    f[i] * g[j] + f[j] * g[i]
                }
            })
        })
        .collect()
}

/// Cell averages of the one-sided convolution on the first `kept` cells; the
/// rest of the `bins`-long output is zero.
fn convolve_band(f: &[Complex64], g: &[Complex64], kept: usize, dxi: f64) -> Vec<Complex64> {
    let sums = antidiagonal_sums(f, g, kept);
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    for k in 0..kept {
        let prev = if k == 0 { Complex64::new(0.0, 0.0) } else { sums[k - 1] };
        out[k] = (sums[k] + prev) * (0.5 * dxi);
    }
    out
}

/// One-sided convolution `f̂ * ĝ` (the Fourier product of `f` and `g`).
pub fn fourier_product(f: &SpectralFunction, g: &SpectralFunction) -> Result<SpectralFunction> {
    f.grid().ensure_compatible(g.grid())?;
    let grid = *f.grid();
    let edge = 0.5 * f.trust_edge().min(g.trust_edge()).min(grid.cutoff());
    let kept = ((edge / grid.spacing()).floor() as usize).min(grid.bins());
    let samples = convolve_band(f.samples(), g.samples(), kept, grid.spacing());
    Ok(SpectralFunction::from_parts(grid, samples, None, edge))
}

/// `f^p` evaluated on `[0, edge]` only, regardless of the trust metadata of
/// `f`. Output cell `k` of a one-sided convolution reads input cells `≤ k`,
/// so the result on `[0, edge]` is exactly as good as `f` on `[0, edge]`.
pub(crate) fn power_on_band(f: &SpectralFunction, p: u32, edge: f64) -> Result<SpectralFunction> {
    if p == 0 {
        return Err(Error::invalid("power needs p ≥ 1"));
    }
    let grid = *f.grid();
    let edge = edge.min(grid.cutoff());
    let kept = ((edge / grid.spacing()).floor() as usize).min(grid.bins());
    let mut acc = f.samples().to_vec();
    for _ in 1..p {
        acc = convolve_band(&acc, f.samples(), kept, grid.spacing());
    }
    if p == 1 {
        acc[kept..].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    }
    Ok(SpectralFunction::from_parts(grid, acc, None, edge))
}

/// `f^p` as a left fold of [`fourier_product`]; the trust band shrinks to
/// `[0, edge/2^{p-1}]`.
pub fn power(f: &SpectralFunction, p: u32) -> Result<SpectralFunction> {
    match p {
        0 => Err(Error::invalid(
            "p = 0 would need the constant 1, which has no half-line grid representation",
        )),
        1 => Ok(f.clone()),
        _ => {
            let mut acc = fourier_product(f, f)?;
            for _ in 2..p {
                acc = fourier_product(&acc, f)?;
            }
            Ok(acc)
        }
    }
}

/// Relative distance `‖a - b‖ / ‖b‖` (unweighted L² over cells) on the
/// common trust band.
pub fn relative_difference(a: &SpectralFunction, b: &SpectralFunction) -> Result<f64> {
    a.grid().ensure_compatible(b.grid())?;
    let n = a.trust_bins().min(b.trust_bins());
    let (xa, xb) = (a.samples(), b.samples());
    let num = pairwise_sum_by(n, 0.0, &|k| (xa[k] - xb[k]).norm_sqr());
    let den = pairwise_sum_by(n, 0.0, &|k| xb[k].norm_sqr());
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}

/// Which bound produced a [`RegularityBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    /// `s1 ≤ 0, s2 ≤ n/2`: `σ < -n/2 + s1 + s2`.
    ProdA,
    /// `s1 ≥ 0`: `σ ≤ s1` and `σ < -n/2 + s2`.
    ProdB,
    /// `u^p`, `s ≤ 0`.
    PowerNeg,
    /// `u^p`, `0 < s ≤ n/2`.
    PowerMid,
    /// `u^p`, `s > n/2` (algebra case).
    PowerAlgebra,
    /// `u^p ∈ H^{s-1}` range for the wave equation.
    WavePower,
}

/// Supremum of admissible `σ`, and whether it is itself admissible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityBound<T> {
    pub sigma_sup: T,
    pub attained: bool,
    pub case: BoundCase,
}

/// Number types the bound calculators work over (`f64`, `Rational64`).
pub trait BoundScalar: Num + PartialOrd + Copy + FromPrimitive {}
impl<T: Num + PartialOrd + Copy + FromPrimitive> BoundScalar for T {}

fn half_dim<T: BoundScalar>(n: u32) -> T {
    T::from_u32(n).expect("dimension fits") / (T::one() + T::one())
}

/// Product bound for `f ∈ H^{s1}_Γ`, `g ∈ H^{s2}_Γ`.
///
/// The inputs are ordered so that the larger index takes the role the
/// hypotheses allow: the smaller one plays `s1` in case (a), the larger one
/// plays `s1` in case (b).
pub fn product_sigma_sup<T: BoundScalar>(s1: T, s2: T, n: u32) -> RegularityBound<T> {
    let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
    let hn = half_dim::<T>(n);
    if lo <= T::zero() && hi <= hn {
        return RegularityBound { sigma_sup: lo + hi - hn, attained: false, case: BoundCase::ProdA };
    }
    // hi ≥ 0 here.
    let strict = lo - hn;
    if hi < strict {
        RegularityBound { sigma_sup: hi, attained: true, case: BoundCase::ProdB }
    } else {
        RegularityBound { sigma_sup: strict, attained: false, case: BoundCase::ProdB }
    }
}

/// Bound for `u^p` with `u ∈ H^s_Γ(ℝ^n)`.
pub fn power_sigma_sup<T: BoundScalar>(s: T, p: u32, n: u32) -> Result<RegularityBound<T>> {
    if p < 2 {
        return Err(Error::invalid(format!("power bound needs p ≥ 2, got {p}")));
    }
    let hn = half_dim::<T>(n);
    let pm1 = T::from_u32(p - 1).expect("p fits");
    let pt = T::from_u32(p).expect("p fits");
    Ok(if s <= T::zero() {
        RegularityBound { sigma_sup: pt * s - hn * pm1, attained: false, case: BoundCase::PowerNeg }
    } else if s <= hn {
        RegularityBound { sigma_sup: pm1 * (s - hn), attained: false, case: BoundCase::PowerMid }
    } else {
        RegularityBound { sigma_sup: s, attained: true, case: BoundCase::PowerAlgebra }
    })
}

/// Strict lower bound on `s` for `u^p ∈ H^{s-1}_Γ(ℝ)` given `u ∈ H^s_Γ(ℝ)`:
/// `-1/2` for `p = 2`, `1/2 - 1/(2p - 4)` for `p ≥ 3`.
pub fn wellposed_s_min(p: u32) -> Result<Rational64> {
    match p {
        0 | 1 => Err(Error::invalid(format!("p must be at least 2, got {p}"))),
        2 => Ok(Rational64::new(-1, 2)),
        _ => Ok(Rational64::new(1, 2) - Rational64::new(1, 2 * p as i64 - 4)),
    }
}

/// Sobolev-embedding exponent `max(1/2 - 1/p, 0)`.
pub fn sobolev_s_min(p: u32) -> Result<Rational64> {
    if p < 2 {
        return Err(Error::invalid(format!("p must be at least 2, got {p}")));
    }
    let v = Rational64::new(1, 2) - Rational64::new(1, p as i64);
    Ok(if v > Rational64::from_integer(0) { v } else { Rational64::from_integer(0) })
}

/// Wellposedness range of `s` for the 1D wave equation as a bound record.
pub fn wave_power_bound(p: u32) -> Result<RegularityBound<Rational64>> {
    Ok(RegularityBound { sigma_sup: wellposed_s_min(p)?, attained: false, case: BoundCase::WavePower })
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeVerdict {
    Bounded,
    Divergent,
    Inconclusive,
    /// An input norm is infinite, so the ratio is undefined.
    InfiniteNorm,
}

impl fmt::Display for ProbeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeVerdict::Bounded => "bounded",
            ProbeVerdict::Divergent => "divergent",
            ProbeVerdict::Inconclusive => "inconclusive",
            ProbeVerdict::InfiniteNorm => "infinite-norm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLevel {
    pub level: usize,
    pub cutoff: f64,
    /// `‖fg‖_{H^σ} / (‖f‖_{H^{s1}} ‖g‖_{H^{s2}})`, `None` for infinite inputs.
    pub ratio: Option<f64>,
    /// Verdict using levels `0..=level`.
    pub verdict: ProbeVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub levels: Vec<ProbeLevel>,
    pub verdict: ProbeVerdict,
}

/// Relative spread below which the ratio counts as settled.
pub const BOUNDED_SPREAD: f64 = 0.05;
/// Per-doubling growth above which the ratio counts as divergent.
pub const DIVERGENT_GROWTH: f64 = 0.15;

fn classify(ratios: &[Option<f64>]) -> ProbeVerdict {
    if ratios.iter().any(Option::is_none) {
        return ProbeVerdict::InfiniteNorm;
    }
    if ratios.len() < 3 {
        return ProbeVerdict::Inconclusive;
    }
    let r: Vec<f64> = ratios[ratios.len() - 3..].iter().map(|x| x.unwrap()).collect();
    let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi <= (1.0 + BOUNDED_SPREAD) * lo {
        ProbeVerdict::Bounded
    } else if r[1] > (1.0 + DIVERGENT_GROWTH) * r[0] && r[2] > (1.0 + DIVERGENT_GROWTH) * r[1] {
        ProbeVerdict::Divergent
    } else {
        ProbeVerdict::Inconclusive
    }
}

/// Measures the multiplier constant of `H^{s1} × H^{s2} → H^σ` while doubling
/// the cutoff at fixed spacing. `make_f`/`make_g` are re-invoked per level.
pub fn norm_probe<F, G>(
    make_f: F,
    make_g: G,
    base: SpectralGrid,
    s1: f64,
    s2: f64,
    sigma: f64,
    refinements: usize,
) -> Result<ProbeReport>
where
    F: Fn(SpectralGrid) -> Result<SpectralFunction>,
    G: Fn(SpectralGrid) -> Result<SpectralFunction>,
{
    let mut grid = base;
    let mut levels = Vec::with_capacity(refinements + 1);
    let mut ratios = Vec::with_capacity(refinements + 1);
    for level in 0..=refinements {
        let f = make_f(grid)?;
        let g = make_g(grid)?;
        let fg = fourier_product(&f, &g)?;
        let ratio = match (f.sobolev_norm(s1), g.sobolev_norm(s2), fg.sobolev_norm(sigma)) {
            (NormValue::Finite(nf), NormValue::Finite(ng), NormValue::Finite(nfg)) => {
                Some(nfg / (nf * ng))
            }
            _ => None,
        };
        ratios.push(ratio);
        levels.push(ProbeLevel { level, cutoff: grid.cutoff(), ratio, verdict: classify(&ratios) });
        grid = grid.extended();
    }
    let verdict = classify(&ratios);
    Ok(ProbeReport { levels, verdict })
}

impl ProbeReport {
    /// CSV `level,cutoff,ratio,verdict`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "level,cutoff,ratio,verdict")?;
        for l in &self.levels {
            let ratio = match l.ratio {
                Some(r) => format!("{r:.16e}"),
                None => "inf".to_string(),
            };
            writeln!(w, "{},{:.16e},{},{}", l.level, l.cutoff, ratio, l.verdict)?;
        }
        Ok(())
    }
}
