//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p conewave-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use conewave::diagnostics::{local_exponent, track_ray, TrackSettings};
use conewave::geometry::{boost_eval, BoostSpec, BoostedSolution, RayClass, Sign};
use conewave::products::{
    norm_probe, power, product_sigma_sup, sobolev_s_min, wellposed_s_min, ProbeVerdict,
};
use conewave::pseudofn::{xplusi0_spectrum, PseudofunctionSpec};
use conewave::radial::{laplacian_check_any, stationary_params_nd};
use conewave::wave::{
    duhamel_apply_with, linear_evolution, lipschitz_constant, picard_solve, residual_with, CauchyData,
    FrequencyConvention, SolveConfig, SpaceTimeField,
};
use conewave::{Complex64, SpectralFunction, SpectralGrid};
use num_rational::Rational64;
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// `‖a − b‖_{L²} / ‖b‖_{L²}` over the first `bins` cells.
fn rel_l2(a: &[Complex64], b: &[Complex64], bins: usize) -> f64 {
    let num: f64 = (0..bins).map(|k| (a[k] - b[k]).norm_sqr()).sum();
    let den: f64 = (0..bins).map(|k| b[k].norm_sqr()).sum();
    (num / den).sqrt()
}

fn c1_product_identity() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let g = SpectralGrid::new(256.0, 1 << 16).unwrap();
    let dxi = g.spacing();
    let start = Instant::now();
    let (sq1, sq15) = pool.install(|| {
        let a = power(&xplusi0_spectrum(-1.0, g).unwrap(), 2).unwrap();
        let b = power(&xplusi0_spectrum(-1.5, g).unwrap(), 2).unwrap();
        (a, b)
    });
    let secs = start.elapsed().as_secs_f64();
    // closed-form cell averages: C(−2) = −4π² on ξ, C(−3) = 4π³i on ξ²
    let want2: Vec<Complex64> =
        (0..g.bins()).map(|k| Complex64::new(-4.0 * PI * PI * (k as f64 + 0.5) * dxi, 0.0)).collect();
    let want3: Vec<Complex64> = (0..g.bins())
        .map(|k| {
            let k = k as f64;
            Complex64::new(0.0, 4.0 * PI.powi(3) * dxi * dxi * (k * k + k + 1.0 / 3.0))
        })
        .collect();
    let e1 = rel_l2(sq1.samples(), &want2, sq1.trust_bins());
    let e2 = rel_l2(sq15.samples(), &want3, sq15.trust_bins());
    verdict(
        e1 <= 1e-10 && e2 <= 1e-3 && secs <= 60.0,
        format!("spec(-1)^2 vs spec(-2) {e1:.2e}, spec(-1.5)^2 vs spec(-3) {e2:.2e}, {secs:.1} s on one thread"),
    )
}

fn c2_sharp_threshold() -> Verdict {
    let base = SpectralGrid::new(64.0, 1024).unwrap();
    let make = |g| xplusi0_spectrum(-1.0, g);
    let at = |sigma| norm_probe(make, make, base, -0.6, -0.6, sigma, 4).unwrap();
    let lo = at(-1.8);
    let hi = at(-1.2);
    verdict(
        lo.verdict == ProbeVerdict::Bounded && hi.verdict == ProbeVerdict::Divergent,
        format!("sigma = -1.8: {}, sigma = -1.2: {}", lo.verdict, hi.verdict),
    )
}

fn c3_exact_bounds() -> Verdict {
    let r = Rational64::new;
    let mut bad = Vec::new();
    for (p, want) in [(2, r(-1, 2)), (3, r(0, 1)), (4, r(1, 4)), (5, r(1, 3))] {
        let got = wellposed_s_min(p).unwrap();
        if got != want {
            bad.push(format!("wellposed_s_min({p}) = {got}"));
        }
    }
    for (p, want) in [(2, r(0, 1)), (3, r(1, 6))] {
        let got = sobolev_s_min(p).unwrap();
        if got != want {
            bad.push(format!("sobolev_s_min({p}) = {got}"));
        }
    }
    let prod = product_sigma_sup(r(-1, 1), r(-1, 1), 1).sigma_sup;
    if prod != r(-5, 2) {
        bad.push(format!("product_sigma_sup(-1, -1, 1) = {prod}"));
    }
    let detail = if bad.is_empty() { "all seven values exact".to_string() } else { bad.join("; ") };
    verdict(bad.is_empty(), detail)
}

fn c4_stationary_fixed_point() -> Verdict {
    let g = SpectralGrid::new(256.0, 1 << 16).unwrap();
    let (p, kappa, t_end, nt, sigma) = (2, -6.0, 0.5, 64, -2.0);
    let u0 = xplusi0_spectrum(-2.0, g).unwrap();
    // the oracle: 4π²ξ² û₀ = κ û₀^{*2} makes u(t) = u₀ exact
    let data = CauchyData::new(u0.clone(), SpectralFunction::zeros(g)).unwrap();
    let dt = t_end / nt as f64;
    let field = SpaceTimeField::starting_at_zero(dt, vec![u0; nt + 1]).unwrap();
    let check = |conv| {
        let image = duhamel_apply_with(&field, &data, p, kappa, conv).unwrap();
        let edge = image.trust_edge();
        let banded = SpaceTimeField::starting_at_zero(
            dt,
            field.slices().iter().map(|s| s.clone().with_trust_edge(edge)).collect(),
        )
        .unwrap();
        let fixed = image.sup_distance(&banded, sigma).unwrap() / banded.sup_norm(sigma);
        let res = residual_with(&field, p, kappa, sigma, conv).unwrap();
        (fixed, res)
    };
    let (fa, ra) = check(FrequencyConvention::Angular);
    let (fp, rp) = check(FrequencyConvention::Plain);
    let pass = fa <= 1e-3 && ra.relative <= 1e-3 && fp >= 100.0 * 1e-3 && fp >= 100.0 * fa;
    verdict(
        pass,
        format!(
            "|Mu-u|/|u| = {fa:.2e}, residual {:.2e} relative ({:.2e} absolute); with omega = |xi|: {fp:.2e} and {:.2e}",
            ra.relative, ra.absolute, rp.relative
        ),
    )
}

fn exp_data(g: SpectralGrid) -> CauchyData {
    let u0 = SpectralFunction::from_antiderivative(g, |x| Complex64::new(-(-x).exp(), 0.0));
    CauchyData::new(u0, SpectralFunction::zeros(g)).unwrap()
}

fn c5_picard_regime() -> Verdict {
    let coarse = SpectralGrid::new(32.0, 1 << 10).unwrap();
    let fine = SpectralGrid::new(32.0, 1 << 11).unwrap();
    let cfg = SolveConfig { p: 2, kappa: 1.0, t_end: 0.1, steps: 16, ..SolveConfig::default() };
    let (u, report) = picard_solve(&exp_data(coarse), &cfg).unwrap();
    let worst = report.ratios.iter().cloned().fold(0.0, f64::max);
    let fine_cfg = SolveConfig { steps: 32, ..cfg };
    let (uf, _) = picard_solve(&exp_data(fine), &fine_cfg).unwrap();
    let restricted = uf.restrict().unwrap();
    let change = restricted.sup_distance(&u, cfg.norm_index).unwrap() / u.sup_norm(cfg.norm_index);
    let direction = SpectralFunction::indicator(coarse, 0.0, 1.0);
    let l2 = lipschitz_constant(&exp_data(coarse), &cfg, &direction, 1e-2).unwrap();
    let l3 = lipschitz_constant(&exp_data(coarse), &cfg, &direction, 1e-3).unwrap();
    let spread = (l2 / l3 - 1.0).abs();
    let pass = report.converged && report.iterations <= 12 && worst < 0.5 && change < 1e-4 && spread <= 0.25;
    verdict(
        pass,
        format!(
            "{} iterations (converged = {}), max ratio {worst:.3}, refinement change {change:.2e}, Lipschitz {l2:.4} vs {l3:.4}",
            report.iterations, report.converged
        ),
    )
}

fn c6_anomalous_rays() -> Verdict {
    let grid = SpectralGrid::new(2048.0, 4096).unwrap();
    let base = PseudofunctionSpec::x_plus_i0(-2.0).unwrap();
    let settings = TrackSettings::new(0.05, (-2.0, 2.0));
    let times = [-0.5, 0.0, 0.5];
    let inside = BoostedSolution::new(base, BoostSpec::inside(0.5).unwrap()).unwrap();
    let outside = BoostedSolution::new(base, BoostSpec::outside(2.0, Sign::Plus).unwrap()).unwrap();
    let a = track_ray(&inside, &times, &settings, &grid).unwrap();
    let b = track_ray(&outside, &times, &settings, &grid).unwrap();
    let x0 = a.points[1].1;
    let field = |x: f64| boost_eval(&inside, &[x], 0.0, settings.eps);
    let s = local_exponent(&field, x0, settings.w, &grid).unwrap().s_est;
    let pass = (a.c_est - 0.5).abs() <= 0.05
        && a.classification == RayClass::InsideCone
        && (b.c_est - 2.0).abs() <= 0.1
        && b.classification == RayClass::OutsideCone
        && (s + 1.5).abs() <= 0.15;
    verdict(
        pass,
        format!(
            "c = 0.5: c_est {:.4} {}; c = 2: c_est {:.4} {}; s_est at the singular point {s:.4}",
            a.c_est,
            a.classification.as_str(),
            b.c_est,
            b.classification.as_str()
        ),
    )
}

fn c7_radial_residual() -> Verdict {
    let (p, n, h) = (4u32, 3usize, 1e-3);
    let lambda = -2.0 / 3.0;
    let kappa = 2.0 / 9.0;
    let params = stationary_params_nd(p, n).unwrap();
    let params_ok = (params.lambda - lambda).abs() < 1e-15 && (params.kappa - kappa).abs() < 1e-15;
    let mut rng = StdRng::seed_from_u64(7);
    let u = |r: f64| r.powf(lambda);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r: f64 = rng.gen_range(0.1..=10.0);
        let (a, c, b) = (u(r - h), u(r), u(r + h));
        let lap = (b - 2.0 * c + a) / (h * h) + (n as f64 - 1.0) / r * (b - a) / (2.0 * h);
        let rhs = kappa * c.powi(p as i32);
        worst = worst.max((-lap - rhs).abs() / rhs.abs());
    }
    let ratios: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| {
            let e1 = laplacian_check_any(lambda, n, r, 1e-2).unwrap().rel_err;
            let e2 = laplacian_check_any(lambda, n, r, 5e-3).unwrap().rel_err;
            e1 / e2
        })
        .collect();
    let order_ok = ratios.iter().all(|q| (q - 4.0).abs() <= 0.4);
    verdict(
        params_ok && worst <= 1e-3 && order_ok,
        format!(
            "kappa {} (one-dimensional form {}), max residual {worst:.2e}, error ratios {:.3?}",
            params.kappa, params.kappa_1d_form, ratios
        ),
    )
}

fn c8_energy_drift() -> Verdict {
    let g = SpectralGrid::new(4.0, 64).unwrap();
    let data = exp_data(g);
    let drift = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let like = SpaceTimeField::constant(data.u0(), dt, steps).unwrap();
        let f = linear_evolution(&like, &data, FrequencyConvention::Angular);
        // staggered per-mode energy |D_t û|² + ω²|û|² between consecutive slices
        let mut worst: f64 = 0.0;
        for b in 0..g.bins() {
            let w = 2.0 * PI * g.midpoint(b);
            let e: Vec<f64> = (0..steps)
                .map(|j| {
                    let (u0, u1) = (f.slice(j).samples()[b], f.slice(j + 1).samples()[b]);
                    ((u1 - u0) / dt).norm_sqr() + w * w * ((u1 + u0) * 0.5).norm_sqr()
                })
                .collect();
            let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            if mean > 0.0 {
                worst = worst.max((hi - lo) / mean);
            }
        }
        worst / (dt * dt)
    };
    let (c1, c2) = (drift(200), drift(400));
    verdict((c1 / c2 - 1.0).abs() <= 0.2, format!("drift/dt^2 = {c1:.4} at 200 steps, {c2:.4} at 400 steps"))
}

fn run_cli(args: &[&str], dir: &Path, threads: usize) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(args)
        .arg("--output.directory")
        .arg(dir)
        .env("CONEWAVE_THREADS", threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .map(|it| {
            it.filter_map(|e| e.ok())
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
                .collect()
        })
        .unwrap_or_default()
}

fn c9_determinism() -> Verdict {
    let experiments: Vec<Vec<&str>> = vec![
        vec!["product", "--lambda", "-1"],
        vec!["product", "--lambda", "-1.5"],
        vec!["norm-probe", "--probe.sigma", "-1.8"],
        vec!["norm-probe", "--probe.sigma", "-1.2"],
        vec!["bounds", "--p", "2"],
        vec!["bounds", "--p", "5"],
        vec!["stationary-check"],
        vec!["solve", "--solver.nt", "16"],
        vec!["solve", "--solver.kappa", "0", "--grid", "4:64", "--solver.T", "1", "--solver.nt", "200"],
        vec!["ray-track", "--boost.c", "0.5"],
        vec!["ray-track", "--boost.c", "2"],
        vec!["singsupp", "--diagnostic.range", "[-0.5, 0.5]"],
        vec!["radial-nd"],
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut mismatches = Vec::new();
    for (i, args) in experiments.iter().enumerate() {
        let mut seen = Vec::new();
        for threads in [1, 8] {
            let dir = tmp.path().join(format!("{i}-{threads}"));
            if let Err(e) = run_cli(args, &dir, threads) {
                return verdict(false, e);
            }
            seen.push(csv_files(&dir));
        }
        if seen[0].is_empty() || seen[0] != seen[1] {
            mismatches.push(args.join(" "));
        }
        files += seen[0].len();
    }
    let detail = if mismatches.is_empty() {
        format!("{} experiments, {files} CSV files identical with 1 and 8 threads", experiments.len())
    } else {
        format!("differences in: {}", mismatches.join("; "))
    };
    verdict(mismatches.is_empty(), detail)
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("pseudofunction product identity", c1_product_identity),
        ("sharp Sobolev threshold", c2_sharp_threshold),
        ("exact bound calculators", c3_exact_bounds),
        ("stationary Duhamel fixed point", c4_stationary_fixed_point),
        ("Picard wellposedness regime", c5_picard_regime),
        ("anomalous ray detection", c6_anomalous_rays),
        ("nD stationary residual", c7_radial_residual),
        ("linear energy conservation", c8_energy_drift),
        ("determinism across thread counts", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {} {}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
