//! One function per subcommand. Each validates its inputs, computes, and
//! returns the artifacts to write; nothing touches the disk here.

use std::io::Write;

use conewave::diagnostics::{exponent_profile, singular_set, track_ray, write_profile_csv, TrackSettings};
use conewave::geometry::{boost_eval, boosted_cauchy_data, BoostSpec, BoostedSolution, Regime, Sign};
use conewave::products::{
    fourier_product, norm_probe, power, power_sigma_sup, product_sigma_sup, rational_to_f64, relative_difference,
    sobolev_s_min, wave_power_bound, wellposed_s_min, BoundCase,
};
use conewave::pseudofn::{xplusi0_coefficient, xplusi0_spectrum, PseudofunctionSpec};
use conewave::radial::{laplacian_check_any, stationary_params_nd, stationary_residual, write_check_csv};
use conewave::wave::{
    duhamel_apply_with, mode_energy_drift, picard_solve, residual_profile, residual_with, CauchyData,
    FrequencyConvention, SolveConfig, SpaceTimeField,
};
use conewave::{Complex64, SpectralFunction, SpectralGrid};
use rand::{rngs::StdRng, Rng, SeedableRng};

use crate::config::Config;
use crate::error::CliError;
use crate::output::Artifact;
use crate::plot::{render, PlotKind};

/// Subcommands that run an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Pseudofn,
    Product,
    NormProbe,
    Bounds,
    Solve,
    StationaryCheck,
    Boost,
    Singsupp,
    RayTrack,
    RadialNd,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Pseudofn => "pseudofn",
            Experiment::Product => "product",
            Experiment::NormProbe => "norm-probe",
            Experiment::Bounds => "bounds",
            Experiment::Solve => "solve",
            Experiment::StationaryCheck => "stationary-check",
            Experiment::Boost => "boost",
            Experiment::Singsupp => "singsupp",
            Experiment::RayTrack => "ray-track",
            Experiment::RadialNd => "radial-nd",
        }
    }

    /// Config key that `--lambda` stands for.
    pub fn lambda_key(self) -> Option<&'static str> {
        match self {
            Experiment::Pseudofn => Some("pseudofn.lambda"),
            Experiment::Product => Some("product.lambda"),
            Experiment::NormProbe => Some("probe.lambda"),
            Experiment::Solve => Some("data.lambda"),
            Experiment::Boost | Experiment::Singsupp | Experiment::RayTrack => Some("boost.lambda"),
            _ => None,
        }
    }

    /// Config key that `--p` stands for.
    pub fn p_key(self) -> Option<&'static str> {
        match self {
            Experiment::Product => Some("product.p"),
            Experiment::Bounds => Some("bounds.p"),
            Experiment::Solve => Some("solver.p"),
            Experiment::StationaryCheck => Some("stationary.p"),
            Experiment::RadialNd => Some("radial.p"),
            _ => None,
        }
    }

    fn default_grid(self) -> (f64, usize) {
        match self {
            Experiment::NormProbe => (64.0, 1024),
            Experiment::Solve => (32.0, 1024),
            Experiment::Boost => (64.0, 4096),
            Experiment::Singsupp | Experiment::RayTrack => (2048.0, 4096),
            _ => (256.0, 1 << 16),
        }
    }
}

/// What an experiment produced: artifacts plus lines for standard output.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub messages: Vec<String>,
}

pub fn run(exp: Experiment, cfg: &Config) -> Result<Outcome, CliError> {
    check_formats(cfg)?;
    match exp {
        Experiment::Pseudofn => pseudofn(cfg),
        Experiment::Product => product(cfg),
        Experiment::NormProbe => probe(cfg),
        Experiment::Bounds => bounds(cfg),
        Experiment::Solve => solve(cfg),
        Experiment::StationaryCheck => stationary(cfg),
        Experiment::Boost => boost(cfg),
        Experiment::Singsupp => singsupp(cfg),
        Experiment::RayTrack => ray_track(cfg),
        Experiment::RadialNd => radial_nd(cfg),
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {msg}"))
}

fn check_formats(cfg: &Config) -> Result<(), CliError> {
    for f in &cfg.output.formats {
        if f != "csv" && f != "svg" {
            return Err(invalid("output.formats", format!("unknown format `{f}` (expected csv or svg)")));
        }
    }
    if cfg.output.directory.is_empty() {
        return Err(invalid("output.directory", "must not be empty"));
    }
    Ok(())
}

fn grid(cfg: &Config, exp: Experiment) -> Result<SpectralGrid, CliError> {
    let (c, n) = exp.default_grid();
    let cutoff = cfg.grid.cutoff.unwrap_or(c);
    let bins = cfg.grid.bins.unwrap_or(n);
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(invalid("grid.cutoff", format!("must be positive and finite, got {cutoff}")));
    }
    if bins < 2 {
        return Err(invalid("grid.bins", format!("must be at least 2, got {bins}")));
    }
    SpectralGrid::new(cutoff, bins).map_err(|e| invalid("grid", e))
}

fn negative(key: &str, v: f64) -> Result<(), CliError> {
    if v < 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("exponent must be negative and finite, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn power_at_least_two(key: &str, p: u32) -> Result<(), CliError> {
    if p >= 2 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be at least 2, got {p}")))
    }
}

fn core<T>(module: &'static str, r: conewave::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(module, e))
}

fn spectrum_artifact(name: &str, f: &SpectralFunction, what: &str) -> Result<Artifact, CliError> {
    let summary = format!("{what}, {} bins, trust edge {}", f.grid().bins(), f.trust_edge());
    Artifact::render(name, summary, |w| f.write_csv(w))
}

fn svg_artifact(cfg: &Config, name: &str, csv: &Artifact, kind: PlotKind) -> Result<Artifact, CliError> {
    let svg = render(&csv.bytes, kind, &cfg.hash())?;
    Ok(Artifact::new(name, svg.into_bytes(), format!("{} plot", kind.as_str())))
}

/// Keeps the CSV artifacts if requested and adds the SVG counterparts.
fn finish(cfg: &Config, pairs: Vec<(Artifact, Option<(&str, PlotKind)>)>, messages: Vec<String>) -> Result<Outcome, CliError> {
    let mut artifacts = Vec::new();
    let mut plots = Vec::new();
    for (csv, plot) in pairs {
        if let (true, Some((name, kind))) = (cfg.wants_svg(), plot) {
            plots.push(svg_artifact(cfg, name, &csv, kind)?);
        }
        if cfg.wants_csv() || !csv.name.ends_with(".csv") {
            artifacts.push(csv);
        }
    }
    artifacts.extend(plots);
    Ok(Outcome { artifacts, messages })
}

fn pseudofn(cfg: &Config) -> Result<Outcome, CliError> {
    let lambda = cfg.pseudofn.lambda;
    negative("pseudofn.lambda", lambda)?;
    let g = grid(cfg, Experiment::Pseudofn)?;
    let f = core("pseudofn", xplusi0_spectrum(lambda, g))?;
    let c = core("pseudofn", xplusi0_coefficient(lambda))?;
    let msg = vec![
        format!("C({lambda}) = {:.16e} {:+.16e}i", c.re, c.im),
        format!("(x + i0)^{lambda} lies in H^s_loc exactly for s < {}", lambda + 0.5),
    ];
    let csv = spectrum_artifact("spectrum.csv", &f, &format!("spectrum of (x + i0)^{lambda}"))?;
    finish(cfg, vec![(csv, Some(("spectrum.svg", PlotKind::Spectrum)))], msg)
}

fn product(cfg: &Config) -> Result<Outcome, CliError> {
    let pc = &cfg.product;
    negative("product.lambda", pc.lambda)?;
    if let Some(mu) = pc.mu {
        negative("product.mu", mu)?;
    } else {
        power_at_least_two("product.p", pc.p)?;
    }
    let g = grid(cfg, Experiment::Product)?;
    let f = core("pseudofn", xplusi0_spectrum(pc.lambda, g))?;
    let (out, target, mu, p) = match pc.mu {
        Some(mu) => {
            let h = core("pseudofn", xplusi0_spectrum(mu, g))?;
            (core("products", fourier_product(&f, &h))?, pc.lambda + mu, mu, 2)
        }
        None => (core("products", power(&f, pc.p))?, pc.p as f64 * pc.lambda, pc.lambda, pc.p),
    };
    if out.samples().iter().any(|v| !v.is_finite()) {
        return Err(CliError::numerical("products", "non-finite product spectrum"));
    }
    let reference = core("pseudofn", xplusi0_spectrum(target, g))?;
    let err = core("products", relative_difference(&out, &reference))?;
    let csv = spectrum_artifact("product.csv", &out, "product spectrum")?;
    let check = Artifact::render("product_check.csv", format!("relative error {err:.3e}"), |w| {
        writeln!(w, "lambda,mu,p,target,trust_edge,relative_error")?;
        writeln!(w, "{},{},{},{},{},{:.16e}", pc.lambda, mu, p, target, out.trust_edge(), err)
    })?;
    let msg = vec![format!(
        "relative difference from the spectrum of (x + i0)^{target} on [0, {}]: {err:.3e}",
        out.trust_edge()
    )];
    finish(cfg, vec![(csv, Some(("product.svg", PlotKind::Spectrum))), (check, None)], msg)
}

fn probe(cfg: &Config) -> Result<Outcome, CliError> {
    let pc = &cfg.probe;
    negative("probe.lambda", pc.lambda)?;
    for (k, v) in [("probe.s1", pc.s1), ("probe.s2", pc.s2), ("probe.sigma", pc.sigma)] {
        if !v.is_finite() {
            return Err(invalid(k, "must be finite"));
        }
    }
    if pc.refinements < 2 {
        return Err(invalid("probe.refinements", "needs at least 2 doublings for a verdict"));
    }
    let g = grid(cfg, Experiment::NormProbe)?;
    let make = |grid| xplusi0_spectrum(pc.lambda, grid);
    let report = core("products", norm_probe(make, make, g, pc.s1, pc.s2, pc.sigma, pc.refinements))?;
    let verdict = report.verdict.to_string();
    let csv = Artifact::render("probe.csv", format!("verdict {verdict}"), |w| report.write_csv(w))?;
    let msg = vec![format!("σ = {}: {verdict}", pc.sigma)];
    finish(cfg, vec![(csv, None)], msg)
}

fn case_name(c: BoundCase) -> String {
    format!("{c:?}")
}

fn bounds(cfg: &Config) -> Result<Outcome, CliError> {
    let bc = &cfg.bounds;
    power_at_least_two("bounds.p", bc.p)?;
    if bc.n == 0 {
        return Err(invalid("bounds.n", "dimension must be positive"));
    }
    if bc.s1.is_some() != bc.s2.is_some() {
        return Err(invalid("bounds.s2", "product bounds need both bounds.s1 and bounds.s2"));
    }
    let wp = core("products", wellposed_s_min(bc.p))?;
    let sob = core("products", sobolev_s_min(bc.p))?;
    let wave = core("products", wave_power_bound(bc.p))?;
    let mut rows = vec![
        ("wellposed_s_min".to_string(), wp.to_string(), rational_to_f64(wp), String::new(), String::new()),
        ("s_sob".to_string(), sob.to_string(), rational_to_f64(sob), String::new(), String::new()),
        (
            "wave_power_sigma_sup".to_string(),
            wave.sigma_sup.to_string(),
            rational_to_f64(wave.sigma_sup),
            wave.attained.to_string(),
            case_name(wave.case),
        ),
    ];
    let mut msg = vec![
        format!("wellposed_s_min={}, s_sob={}", rational_to_f64(wp), rational_to_f64(sob)),
        format!("exact: wellposed_s_min={wp}, s_sob={sob}"),
    ];
    if let (Some(s1), Some(s2)) = (bc.s1, bc.s2) {
        let b = product_sigma_sup(s1, s2, bc.n);
        msg.push(format!("product_sigma_sup({s1}, {s2}, n = {}) = {} ({:?})", bc.n, b.sigma_sup, b.case));
        rows.push(("product_sigma_sup".into(), String::new(), b.sigma_sup, b.attained.to_string(), case_name(b.case)));
    }
    if let Some(s) = bc.s {
        let b = core("products", power_sigma_sup(s, bc.p, bc.n))?;
        msg.push(format!("power_sigma_sup({s}, p = {}, n = {}) = {} ({:?})", bc.p, bc.n, b.sigma_sup, b.case));
        rows.push(("power_sigma_sup".into(), String::new(), b.sigma_sup, b.attained.to_string(), case_name(b.case)));
    }
    let csv = Artifact::render("bounds.csv", format!("{} bounds for p = {}", rows.len(), bc.p), |w| {
        writeln!(w, "quantity,exact,value,attained,case")?;
        for (q, exact, v, att, case) in &rows {
            writeln!(w, "{q},{exact},{v},{att},{case}")?;
        }
        Ok(())
    })?;
    finish(cfg, vec![(csv, None)], msg)
}

fn convention(cfg: &Config) -> Result<FrequencyConvention, CliError> {
    match cfg.solver.convention.as_str() {
        "angular" => Ok(FrequencyConvention::Angular),
        "plain" => Ok(FrequencyConvention::Plain),
        other => Err(invalid("solver.convention", format!("unknown convention `{other}` (expected angular or plain)"))),
    }
}

fn initial_data(cfg: &Config, g: SpectralGrid) -> Result<CauchyData, CliError> {
    let d = &cfg.data;
    let u0 = match d.kind.as_str() {
        "exp" => SpectralFunction::from_antiderivative(g, |x| Complex64::new(-(-x).exp(), 0.0)),
        "stationary" => {
            negative("data.lambda", d.lambda)?;
            core("pseudofn", xplusi0_spectrum(d.lambda, g))?
        }
        "zero" => SpectralFunction::zeros(g),
        "indicator" => {
            let [a, b] = d.band;
            if !(a >= 0.0 && b > a && b.is_finite()) {
                return Err(invalid("data.band", format!("need 0 ≤ a < b, got [{a}, {b}]")));
            }
            SpectralFunction::indicator(g, a, b)
        }
        other => {
            return Err(invalid(
                "data.kind",
                format!("unknown kind `{other}` (expected exp, stationary, zero or indicator)"),
            ))
        }
    };
    core("wave", CauchyData::new(u0, SpectralFunction::zeros(g)))
}

fn solve(cfg: &Config) -> Result<Outcome, CliError> {
    let s = &cfg.solver;
    power_at_least_two("solver.p", s.p)?;
    if !s.kappa.is_finite() {
        return Err(invalid("solver.kappa", "must be finite"));
    }
    if !(s.t_end.is_finite() && s.t_end != 0.0) {
        return Err(invalid("solver.T", format!("must be finite and nonzero, got {}", s.t_end)));
    }
    if s.nt < 2 {
        return Err(invalid("solver.nt", format!("need at least 2 time steps, got {}", s.nt)));
    }
    positive("solver.tol", s.tol)?;
    if s.max_iter == 0 {
        return Err(invalid("solver.max_iter", "must be at least 1"));
    }
    if !s.norm_s.is_finite() {
        return Err(invalid("solver.norm_s", "must be finite"));
    }
    let conv = convention(cfg)?;
    let g = grid(cfg, Experiment::Solve)?;
    let data = initial_data(cfg, g)?;
    let mut msg = Vec::new();
    if cfg.data.kind == "stationary" {
        let lambda = cfg.data.lambda;
        let p_match = 1.0 - 2.0 / lambda;
        let k_match = -lambda * (lambda - 1.0);
        if (p_match - s.p as f64).abs() > 1e-12 || (k_match - s.kappa).abs() > 1e-9 * k_match.abs().max(1.0) {
            msg.push(format!(
                "note: (x + i0)^{lambda} is stationary for p = {p_match}, kappa = {k_match}; running p = {}, kappa = {}",
                s.p, s.kappa
            ));
        }
    }
    let sc = SolveConfig {
        p: s.p,
        kappa: s.kappa,
        t_end: s.t_end,
        steps: s.nt,
        tol: s.tol,
        max_iter: s.max_iter,
        norm_index: s.norm_s,
        convention: conv,
    };
    let (field, report) = core("wave", picard_solve(&data, &sc))?;
    let sigma = s.norm_s - 2.0;
    let profile = core("wave", residual_profile(&field, s.p, s.kappa, sigma, conv))?;
    if profile.iter().any(|(_, r)| !(r.absolute.is_finite() && r.relative.is_finite())) {
        return Err(CliError::numerical("wave", "non-finite equation residual"));
    }
    let max_rel = profile.iter().map(|(_, r)| r.relative).fold(0.0, f64::max);
    let max_abs = profile.iter().map(|(_, r)| r.absolute).fold(0.0, f64::max);
    msg.push(format!(
        "{} after {} iterations; max residual {max_rel:.3e} relative, {max_abs:.3e} absolute in H^{sigma}",
        if report.converged { "converged" } else { "not converged" },
        report.iterations
    ));
    for w in &report.warnings {
        msg.push(format!("warning: {w}"));
    }
    let mut pairs = vec![
        (Artifact::render("report.txt", "solve report", |w| report.write_text(w))?, None),
        (Artifact::render("ratios.csv", format!("{} contraction ratios", report.ratios.len()), |w| report.write_ratios_csv(w))?, None),
        (
            Artifact::render("residual.csv", format!("max relative residual {max_rel:.3e}"), |w| {
                writeln!(w, "t,absolute,relative")?;
                for (t, r) in &profile {
                    writeln!(w, "{t:.16e},{:.16e},{:.16e}", r.absolute, r.relative)?;
                }
                Ok(())
            })?,
            None,
        ),
    ];
    if s.kappa == 0.0 {
        let drift = mode_energy_drift(&field, conv);
        let dt = field.dt().abs();
        msg.push(format!("linear energy drift {drift:.3e}, drift/dt² = {:.6e}", drift / (dt * dt)));
        pairs.push((
            Artifact::render("energy.csv", format!("drift/dt² = {:.6e}", drift / (dt * dt)), |w| {
                writeln!(w, "nt,dt,drift,drift_over_dt2")?;
                writeln!(w, "{},{:.16e},{:.16e},{:.16e}", s.nt, dt, drift, drift / (dt * dt))
            })?,
            None,
        ));
    }
    if cfg.output.field {
        let a = Artifact::render("field.csv", format!("{} time slices", field.steps() + 1), |w| field.write_csv(w))?;
        pairs.push((a, Some(("field.svg", PlotKind::SpacetimeHeat))));
    }
    finish(cfg, pairs, msg)
}

fn stationary(cfg: &Config) -> Result<Outcome, CliError> {
    let st = &cfg.stationary;
    power_at_least_two("stationary.p", st.p)?;
    if !(st.t_end.is_finite() && st.t_end != 0.0) {
        return Err(invalid("stationary.T", "must be finite and nonzero"));
    }
    if st.nt < 2 {
        return Err(invalid("stationary.nt", "need at least 2 time steps"));
    }
    if !st.sigma.is_finite() {
        return Err(invalid("stationary.sigma", "must be finite"));
    }
    let params = core("radial", stationary_params_nd(st.p, 1))?;
    let g = grid(cfg, Experiment::StationaryCheck)?;
    let u0 = core("pseudofn", xplusi0_spectrum(params.lambda, g))?;
    let data = core("wave", CauchyData::new(u0.clone(), SpectralFunction::zeros(g)))?;
    let dt = st.t_end / st.nt as f64;
    let field = core("wave", SpaceTimeField::starting_at_zero(dt, vec![u0; st.nt + 1]))?;
    let mut rows = Vec::new();
    for (name, conv) in [("angular", FrequencyConvention::Angular), ("plain", FrequencyConvention::Plain)] {
        let image = core("wave", duhamel_apply_with(&field, &data, st.p, params.kappa, conv))?;
        let edge = image.trust_edge();
        let banded = SpaceTimeField::starting_at_zero(
            dt,
            field.slices().iter().map(|s| s.clone().with_trust_edge(edge)).collect(),
        );
        let banded = core("wave", banded)?;
        let fixed = core("wave", image.sup_distance(&banded, st.sigma))? / banded.sup_norm(st.sigma);
        let res = core("wave", residual_with(&field, st.p, params.kappa, st.sigma, conv))?;
        if !(fixed.is_finite() && res.relative.is_finite()) {
            return Err(CliError::numerical("wave", format!("non-finite fixed-point check ({name})")));
        }
        rows.push((name, fixed, res.absolute, res.relative));
    }
    let mut msg = vec![format!(
        "lambda = {}, kappa = {} (one-dimensional form -λ(λ-1) = {})",
        params.lambda, params.kappa, params.kappa_1d_form
    )];
    for (name, fixed, abs, rel) in &rows {
        msg.push(format!("{name}: |Mu - u|/|u| = {fixed:.3e}, residual {rel:.3e} relative ({abs:.3e} absolute)"));
    }
    msg.push(format!("plain/angular fixed-point ratio {:.3e}", rows[1].1 / rows[0].1));
    let csv = Artifact::render("stationary.csv", format!("fixed-point error {:.3e}", rows[0].1), |w| {
        writeln!(w, "convention,fixed_point_rel,residual_abs,residual_rel")?;
        for (name, fixed, abs, rel) in &rows {
            writeln!(w, "{name},{fixed:.16e},{abs:.16e},{rel:.16e}")?;
        }
        Ok(())
    })?;
    finish(cfg, vec![(csv, None)], msg)
}

fn boosted(cfg: &Config) -> Result<BoostedSolution, CliError> {
    let b = &cfg.boost;
    negative("boost.lambda", b.lambda)?;
    if !b.c.is_finite() || b.c.abs() == 1.0 {
        return Err(invalid("boost.c", format!("must be finite with |c| ≠ 1, got {}", b.c)));
    }
    let sign = match b.sign.as_deref() {
        None => None,
        Some("plus") => Some(Sign::Plus),
        Some("minus") => Some(Sign::Minus),
        Some(other) => return Err(invalid("boost.sign", format!("unknown sign `{other}` (expected plus or minus)"))),
    };
    let spec = match b.regime.as_deref() {
        None => {
            if sign.is_some() && b.c.abs() < 1.0 {
                return Err(invalid("boost.sign", "only outside boosts carry a sign"));
            }
            match sign {
                Some(s) => BoostSpec::outside(b.c.abs(), s),
                None => BoostSpec::new(b.c),
            }
        }
        Some("inside") => {
            if b.c.abs() >= 1.0 {
                return Err(invalid("boost.c", format!("inside boosts need |c| < 1, got {}", b.c)));
            }
            if sign == Some(Sign::Minus) {
                return Err(invalid("boost.sign", "only outside boosts carry a sign"));
            }
            BoostSpec::inside(b.c)
        }
        Some("outside") => {
            if b.c.abs() <= 1.0 {
                return Err(invalid("boost.c", format!("outside boosts need |c| > 1, got {}", b.c)));
            }
            let s = sign.unwrap_or(if b.c < 0.0 { Sign::Minus } else { Sign::Plus });
            BoostSpec::outside(b.c.abs(), s)
        }
        Some(other) => return Err(invalid("boost.regime", format!("unknown regime `{other}` (expected inside or outside)"))),
    };
    let spec = core("geometry", spec)?;
    let base = if b.dim <= 1 {
        core("pseudofn", PseudofunctionSpec::x_plus_i0(b.lambda))?
    } else {
        core("pseudofn", PseudofunctionSpec::radial(b.lambda, b.dim))?
    };
    core("geometry", BoostedSolution::new(base, spec))
}

fn diagnostic_settings(cfg: &Config) -> Result<TrackSettings, CliError> {
    let d = &cfg.diagnostic;
    positive("diagnostic.window", d.window)?;
    let [a, b] = d.range;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(invalid("diagnostic.range", format!("need a < b, got [{a}, {b}]")));
    }
    let mut s = TrackSettings::new(d.window, (a, b));
    if let Some(stride) = d.stride {
        positive("diagnostic.stride", stride)?;
        if stride > 0.5 * d.window {
            return Err(invalid("diagnostic.stride", format!("must not exceed window/2 = {}", 0.5 * d.window)));
        }
        s.stride = stride;
    }
    if let Some(eps) = d.eps {
        positive("diagnostic.eps", eps)?;
        s.eps = eps;
    }
    if !d.threshold.is_finite() {
        return Err(invalid("diagnostic.threshold", "must be finite"));
    }
    s.threshold = d.threshold;
    Ok(s)
}

fn boost(cfg: &Config) -> Result<Outcome, CliError> {
    let b = boosted(cfg)?;
    let spec = b.boost();
    let lambda = cfg.boost.lambda;
    let dim = b.base().dim().max(1);
    let kappa = -lambda * (lambda + dim as f64 - 2.0);
    let init = b.initial_data();
    let summary = format!(
        "c = {}\nregime = {:?}\nsign = {:?}\ntheta = {:.16e}\ndilation = {:.16e}\nvelocity = {:.16e}\nray_speed = {:.16e}\nclass = {}\nnonlinearity_sign_flip = {}\nkappa = {:.16e}\nboosted_kappa = {:.16e}\n",
        spec.c(),
        spec.regime(),
        spec.sign(),
        spec.theta(),
        init.dilation,
        init.velocity,
        spec.ray_speed(),
        spec.classify().as_str(),
        b.nonlinearity_sign_flip(),
        kappa,
        b.boosted_kappa(kappa),
    );
    let mut msg = vec![format!(
        "boost c = {} ({:?}): singular ray x = {}·t, {}; equation coupling {} → {}",
        spec.c(),
        spec.regime(),
        -spec.ray_speed(),
        spec.classify().as_str(),
        kappa,
        b.boosted_kappa(kappa)
    )];
    let mut pairs = vec![(Artifact::new("boost.txt", summary.into_bytes(), "boost summary"), None)];
    let spectral = dim == 1 && !(spec.regime() == Regime::Outside && spec.sign() == Sign::Minus);
    if spectral {
        let g = grid(cfg, Experiment::Boost)?;
        let data = core("geometry", boosted_cauchy_data(&b, g))?;
        pairs.push((spectrum_artifact("u0.csv", data.u0(), "boosted initial value")?, Some(("u0.svg", PlotKind::Spectrum))));
        pairs.push((spectrum_artifact("u1.csv", data.u1(), "boosted initial velocity")?, None));
    } else {
        msg.push("no spectral Cauchy data: the boosted data is not supported on the half-line grid".into());
    }
    finish(cfg, pairs, msg)
}

fn singsupp(cfg: &Config) -> Result<Outcome, CliError> {
    let b = boosted(cfg)?;
    let settings = diagnostic_settings(cfg)?;
    let t = cfg.boost.t;
    if !t.is_finite() {
        return Err(invalid("boost.t", "must be finite"));
    }
    let g = grid(cfg, Experiment::Singsupp)?;
    let dim = b.base().dim().max(1);
    let field = |x: f64| {
        let mut p = vec![0.0; dim];
        p[0] = x;
        boost_eval(&b, &p, t, settings.eps)
    };
    let (w, range) = (settings.w, settings.range);
    let profile = core("diagnostics", exponent_profile(&field, range, w, settings.stride, &g))?;
    let points = core("diagnostics", singular_set(&field, range, w, settings.threshold, settings.stride, &g))?;
    let msg = vec![format!(
        "t = {t}: {} singular point(s) {:?}, expected at x = {}",
        points.len(),
        points,
        b.singular_position(t)
    )];
    let prof = Artifact::render("exponent.csv", format!("{} scan points", profile.len()), |wr| write_profile_csv(&profile, wr))?;
    let sing = Artifact::render("singular.csv", format!("{} singular points", points.len()), |wr| {
        writeln!(wr, "x_sing")?;
        for x in &points {
            writeln!(wr, "{x:.16e}")?;
        }
        Ok(())
    })?;
    finish(cfg, vec![(prof, Some(("exponent.svg", PlotKind::ExponentProfile))), (sing, None)], msg)
}

fn ray_track(cfg: &Config) -> Result<Outcome, CliError> {
    let b = boosted(cfg)?;
    let settings = diagnostic_settings(cfg)?;
    let times = &cfg.diagnostic.times;
    if times.len() < 3 || times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("diagnostic.times", "need at least 3 finite times"));
    }
    let g = grid(cfg, Experiment::RayTrack)?;
    let est = core("diagnostics", track_ray(&b, times, &settings, &g))?;
    let msg = vec![format!(
        "c_est = {:.6} ({}), boost speed {}, rms deviation {:.3e}",
        est.c_est,
        est.classification.as_str(),
        b.boost().ray_speed(),
        est.residual
    )];
    let csv = Artifact::render("ray.csv", format!("c_est {:.6}, {}", est.c_est, est.classification.as_str()), |w| est.write_csv(w))?;
    finish(cfg, vec![(csv, Some(("ray.svg", PlotKind::Ray)))], msg)
}

fn radial_nd(cfg: &Config) -> Result<Outcome, CliError> {
    let r = &cfg.radial;
    power_at_least_two("radial.p", r.p)?;
    if r.n == 0 {
        return Err(invalid("radial.n", "dimension must be positive"));
    }
    if r.samples == 0 {
        return Err(invalid("radial.samples", "must be at least 1"));
    }
    positive("radial.r_min", r.r_min)?;
    positive("radial.h", r.h)?;
    if !(r.r_max.is_finite() && r.r_max > r.r_min) {
        return Err(invalid("radial.r_max", format!("must exceed radial.r_min = {}", r.r_min)));
    }
    if r.r_min <= 10.0 * r.h {
        return Err(invalid("radial.h", format!("too coarse: need r_min > 10h, got r_min = {}, h = {}", r.r_min, r.h)));
    }
    let params = core("radial", stationary_params_nd(r.p, r.n))?;
    let mut rng = StdRng::seed_from_u64(r.seed);
    let mut radii: Vec<f64> = (0..r.samples).map(|_| rng.gen_range(r.r_min..=r.r_max)).collect();
    radii.sort_by(f64::total_cmp);
    let rows = core("radial", stationary_residual(&params, &radii, r.h))?;
    let worst = rows.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    if !worst.is_finite() {
        return Err(CliError::numerical("radial", "non-finite residual"));
    }
    // order check at the smallest radius, where truncation dominates rounding
    let mid = r.r_min;
    let e1 = core("radial", laplacian_check_any(params.lambda, params.n, mid, r.h))?.rel_err;
    let e2 = core("radial", laplacian_check_any(params.lambda, params.n, mid, 0.5 * r.h))?.rel_err;
    let msg = vec![
        format!(
            "p = {}, n = {}: lambda = {}, kappa = -λ(λ+n-2) = {}; one-dimensional form -λ(λ-1) = {}",
            params.p, params.n, params.lambda, params.kappa, params.kappa_1d_form
        ),
        format!("max relative residual {worst:.3e} over {} radii; error ratio h → h/2 at r = {mid:.4}: {:.3}", rows.len(), e1 / e2),
    ];
    let csv = Artifact::render("radial_check.csv", format!("max relative residual {worst:.3e}"), |w| write_check_csv(&rows, w))?;
    finish(cfg, vec![(csv, None)], msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn bounds_print_the_threshold_pair() {
        let out = run(Experiment::Bounds, &cfg()).unwrap();
        assert_eq!(out.messages[0], "wellposed_s_min=0, s_sob=0.16666666666666666");
        let text = String::from_utf8(out.artifacts[0].bytes.clone()).unwrap();
        assert!(text.contains("s_sob,1/6,"), "{text}");
    }

    #[test]
    fn validation_names_the_key() {
        let mut c = cfg();
        c.solver.convention = "radians".into();
        let e = run(Experiment::Solve, &c).unwrap_err().to_string();
        assert!(e.contains("solver.convention"), "{e}");
        let mut c = cfg();
        c.boost.c = 1.0;
        assert!(run(Experiment::RayTrack, &c).unwrap_err().to_string().contains("boost.c"));
        let mut c = cfg();
        c.output.formats = vec!["png".into()];
        assert!(run(Experiment::Bounds, &c).unwrap_err().to_string().contains("output.formats"));
    }

    #[test]
    fn infeasible_dimensions_are_validation_errors() {
        let mut c = cfg();
        c.radial.p = 2;
        c.radial.n = 3;
        let e = run(Experiment::RadialNd, &c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("n = 5"), "{e}");
    }

    #[test]
    fn blow_up_is_a_numerical_failure() {
        let mut c = cfg();
        c.solver.kappa = 1e6;
        c.solver.t_end = 5.0;
        c.grid.cutoff = Some(8.0);
        c.grid.bins = Some(64);
        c.data.kind = "indicator".into();
        c.data.band = [0.0, 4.0];
        let e = run(Experiment::Solve, &c).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
        assert!(e.to_string().contains("wave"));
    }

    #[test]
    fn svg_follows_the_formats() {
        let mut c = cfg();
        c.grid.cutoff = Some(16.0);
        c.grid.bins = Some(256);
        c.output.formats = vec!["svg".into()];
        let out = run(Experiment::Pseudofn, &c).unwrap();
        let names: Vec<_> = out.artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["spectrum.svg"]);
    }
}
