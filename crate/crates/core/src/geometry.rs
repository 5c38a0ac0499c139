//! Boosts of stationary solutions into moving ones, and where their singular
//! rays sit relative to the light cone.
//!
//! A stationary `u_0` with `−u_0'' = κ u_0^p` gives two families of moving
//! solutions:
//!
//! - inside the cone (`|c| < 1`): `v(x,t) = u_0(x cosh θ + t sinh θ)`,
//!   which solves `v_tt − v_xx = κ v^p`;
//! - outside the cone (`|c| > 1`): `w(x,t) = u_0(±x sinh θ + t cosh θ)`,
//!   which solves `w_tt − w_xx = −κ w^p`.
//!
//! In both cases the argument vanishes on `±x + ct = 0`, so the singular
//! support of `(x + i0)^λ` travels with speed `c`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pseudofn::{xplusi0_eval, xplusi0_limit, xplusi0_spectrum, PseudofunctionKind, PseudofunctionSpec};
use crate::spectral::{SpectralFunction, SpectralGrid};
use crate::wave::{CauchyData, SpaceTimeField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Inside,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayClass {
    InsideCone,
    OnCone,
    OutsideCone,
}

impl RayClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RayClass::InsideCone => "InsideCone",
            RayClass::OnCone => "OnCone",
            RayClass::OutsideCone => "OutsideCone",
        }
    }
}

pub fn ray_classify(c: f64) -> RayClass {
    ray_classify_with_band(c, 0.0)
}

/// Like [`ray_classify`], reporting `OnCone` for `||c| − 1| ≤ band`.
pub fn ray_classify_with_band(c: f64, band: f64) -> RayClass {
    let d = c.abs() - 1.0;
    if d.abs() <= band {
        RayClass::OnCone
    } else if d < 0.0 {
        RayClass::InsideCone
    } else {
        RayClass::OutsideCone
    }
}

/// `θ` with `tanh θ = c` inside the cone and `tanh θ = 1/|c|` outside.
pub fn rapidity(c: f64, regime: Regime) -> Result<f64> {
    if !c.is_finite() || c.abs() == 1.0 {
        return Err(Error::invalid(format!("speed {c} lies on the light cone")));
    }
    match regime {
        Regime::Inside if c.abs() < 1.0 => Ok(c.atanh()),
        Regime::Outside if c.abs() > 1.0 => Ok((1.0 / c.abs()).atanh()),
        _ => Err(Error::invalid(format!("speed {c} does not match regime {regime:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostSpec {
    c: f64,
    regime: Regime,
    sign: Sign,
    theta: f64,
}

impl BoostSpec {
    /// Inside for `|c| < 1`; outside for `|c| > 1`, with `c < −1` stored as
    /// `|c|` and [`Sign::Minus`].
    pub fn new(c: f64) -> Result<Self> {
        if c < -1.0 {
            Self::outside(-c, Sign::Minus)
        } else if c > 1.0 {
            Self::outside(c, Sign::Plus)
        } else {
            Self::inside(c)
        }
    }

    pub fn inside(c: f64) -> Result<Self> {
        let theta = rapidity(c, Regime::Inside)?;
        Ok(Self { c, regime: Regime::Inside, sign: Sign::Plus, theta })
    }

    /// Outside boost with speed `c > 1`.
    pub fn outside(c: f64, sign: Sign) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::invalid(format!("outside boosts take c > 1, got {c}")));
        }
        let theta = rapidity(c, Regime::Outside)?;
        Ok(Self { c, regime: Regime::Outside, sign, theta })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Coefficients `(α, β)` of the moving argument `α x + β t`.
    pub fn argument_coefficients(&self) -> (f64, f64) {
        let (ch, sh) = (self.theta.cosh(), self.theta.sinh());
        match (self.regime, self.sign) {
            (Regime::Inside, _) => (ch, sh),
            (Regime::Outside, Sign::Plus) => (sh, ch),
            (Regime::Outside, Sign::Minus) => (-sh, ch),
        }
    }

    /// Velocity `c_ray` such that the singular point sits at `x = −c_ray t`.
    pub fn ray_speed(&self) -> f64 {
        match (self.regime, self.sign) {
            (Regime::Outside, Sign::Minus) => -self.c,
            _ => self.c,
        }
    }

    pub fn classify(&self) -> RayClass {
        ray_classify(self.c)
    }
}

/// `L(x, t) = (x cosh θ + t sinh θ, x sinh θ + t cosh θ)`; keeps `x² − t²`.
pub fn lorentz_inside(theta: f64, x: f64, t: f64) -> (f64, f64) {
    let (ch, sh) = (theta.cosh(), theta.sinh());
    (x * ch + t * sh, x * sh + t * ch)
}

/// `L'(x, t) = (x sinh θ + t cosh θ, x cosh θ + t sinh θ)`; maps `x² − t²`
/// to `t² − x²`.
pub fn lorentz_outside(theta: f64, x: f64, t: f64) -> (f64, f64) {
    let (ch, sh) = (theta.cosh(), theta.sinh());
    (x * sh + t * ch, x * ch + t * sh)
}

/// `v(x, 0) = u_0(dilation·x)` and `∂_t v(x, 0) = velocity·u_0'(dilation·x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataDescriptor {
    pub dilation: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostedSolution {
    base: PseudofunctionSpec,
    boost: BoostSpec,
}

impl BoostedSolution {
    /// Radial bases only admit inside boosts: outside, the boosted `x_1`
    /// direction changes sign in the d'Alembertian while the others do not.
    pub fn new(base: PseudofunctionSpec, boost: BoostSpec) -> Result<Self> {
        if base.kind() == PseudofunctionKind::Radial && boost.regime == Regime::Outside {
            return Err(Error::invalid(
                "outside boosts of radial solutions do not solve the wave equation for n ≥ 2",
            ));
        }
        Ok(Self { base, boost })
    }

    pub fn base(&self) -> &PseudofunctionSpec {
        &self.base
    }

    pub fn boost(&self) -> &BoostSpec {
        &self.boost
    }

    /// The moving solution solves the equation with `−κ` exactly when the
    /// boost is outside the cone.
    pub fn nonlinearity_sign_flip(&self) -> bool {
        self.boost.regime == Regime::Outside
    }

    /// Coupling of the equation the boosted field solves, given the
    /// stationary coupling `κ`.
    pub fn boosted_kappa(&self, kappa: f64) -> f64 {
        if self.nonlinearity_sign_flip() {
            -kappa
        } else {
            kappa
        }
    }

    pub fn initial_data(&self) -> InitialDataDescriptor {
        let (dilation, velocity) = self.boost.argument_coefficients();
        InitialDataDescriptor { dilation, velocity }
    }

    /// Position of the singular point at time `t`.
    pub fn singular_position(&self, t: f64) -> f64 {
        -self.boost.ray_speed() * t
    }

    /// Boosted argument for the first coordinate.
    fn argument(&self, x1: f64, t: f64) -> f64 {
        let (a, b) = self.boost.argument_coefficients();
        a * x1 + b * t
    }
}

/// Value of the boosted solution at `(x, t)`. `ε > 0` regularises the base;
/// `ε = 0` evaluates the limit and fails on the singular set.
pub fn boost_eval(b: &BoostedSolution, x: &[f64], t: f64, eps: f64) -> Result<Complex64> {
    if x.len() != b.base.dim() {
        return Err(Error::invalid(format!(
            "expected a {}-dimensional point, got {}",
            b.base.dim(),
            x.len()
        )));
    }
    if eps < 0.0 {
        return Err(Error::invalid("ε must be non-negative"));
    }
    let lambda = b.base.lambda();
    let arg = b.argument(x[0], t);
    match b.base.kind() {
        PseudofunctionKind::XPlusI0 => {
            if eps > 0.0 {
                xplusi0_eval(lambda, arg, eps)
            } else {
                xplusi0_limit(lambda, arg)
            }
        }
        PseudofunctionKind::Radial => {
            let r2 = arg * arg + x[1..].iter().map(|v| v * v).sum::<f64>();
            if r2 == 0.0 && eps == 0.0 {
                return Err(Error::SingularPoint(format!("r^{lambda} at the origin")));
            }
            Ok(Complex64::new((r2 + eps * eps).powf(lambda / 2.0), 0.0))
        }
    }
}

fn line_base(b: &BoostedSolution) -> Result<f64> {
    if b.base.kind() != PseudofunctionKind::XPlusI0 {
        return Err(Error::invalid("radial bases have no half-line spectral representation"));
    }
    let (a, _) = b.boost.argument_coefficients();
    if a < 0.0 {
        return Err(Error::invalid(
            "a reflected argument moves the spectrum to (−∞, 0], which the half-line grid cannot hold",
        ));
    }
    Ok(a)
}

/// Spectral Cauchy data of the boosted solution.
///
/// With `(a x + i0)^λ = a^λ (x + i0)^λ` for `a > 0`, the position is
/// `a^λ·spec(λ)` and the velocity `β λ a^{λ−1}·spec(λ−1)`, both exact cell
/// averages.
pub fn boosted_cauchy_data(b: &BoostedSolution, grid: SpectralGrid) -> Result<CauchyData> {
    let a = line_base(b)?;
    let lambda = b.base.lambda();
    let beta = b.initial_data().velocity;
    let u0 = xplusi0_spectrum(lambda, grid)?.scale_real(a.powf(lambda));
    let u1 = if beta == 0.0 {
        SpectralFunction::zeros(grid)
    } else {
        xplusi0_spectrum(lambda - 1.0, grid)?.scale_real(beta * lambda * a.powf(lambda - 1.0))
    };
    CauchyData::new(u0, u1)
}

/// Spectra of the boosted solution at `t_j = j·dt`, `j = 0..=steps`: the
/// translate `a^λ (x + c t + i0)^λ` has transform `a^λ e^{2πi c t ξ}·spec(λ)`.
pub fn boosted_field(b: &BoostedSolution, grid: SpectralGrid, dt: f64, steps: usize) -> Result<SpaceTimeField> {
    boosted_field_from(b, grid, dt, 0, steps)
}

/// As [`boosted_field`] on `t_j = (j − origin)·dt`.
pub fn boosted_field_from(
    b: &BoostedSolution,
    grid: SpectralGrid,
    dt: f64,
    origin: usize,
    steps: usize,
) -> Result<SpaceTimeField> {
    let a = line_base(b)?;
    let base = xplusi0_spectrum(b.base.lambda(), grid)?.scale_real(a.powf(b.base.lambda())).without_tail();
    let shift = b.boost.ray_speed();
    let slices = (0..=steps)
        .map(|j| {
            let t = (j as f64 - origin as f64) * dt;
            base.modulate(|xi| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * shift * t * xi))
        })
        .collect();
    SpaceTimeField::new(dt, origin, slices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::residual;

    #[test]
    fn rapidity_examples() {
        assert_eq!(rapidity(0.0, Regime::Inside).unwrap(), 0.0);
        let th = rapidity(0.6, Regime::Inside).unwrap();
        assert!((th.cosh() - 1.25).abs() < 1e-14 && (th.sinh() - 0.75).abs() < 1e-14);
        assert!(rapidity(1.0, Regime::Inside).is_err());
        assert!(rapidity(-1.0, Regime::Outside).is_err());
        assert!(rapidity(2.0, Regime::Inside).is_err());
        let th = rapidity(2.0, Regime::Outside).unwrap();
        let want = 2.0 / 3f64.sqrt();
        assert!((th.cosh() - want).abs() < 1e-14);
        assert!((th.cosh().powi(2) - th.sinh().powi(2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn speeds_below_minus_one_become_minus_sign() {
        let b = BoostSpec::new(-3.0).unwrap();
        assert_eq!((b.c(), b.sign(), b.regime()), (3.0, Sign::Minus, Regime::Outside));
        assert_eq!(b.ray_speed(), -3.0);
        assert!(BoostSpec::new(1.0).is_err() && BoostSpec::new(-1.0).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(ray_classify(0.5), RayClass::InsideCone);
        assert_eq!(ray_classify(1.0), RayClass::OnCone);
        assert_eq!(ray_classify(-3.0), RayClass::OutsideCone);
        assert_eq!(ray_classify_with_band(1.04, 0.05), RayClass::OnCone);
    }

    #[test]
    fn identity_boost_evaluates_the_base() {
        let base = PseudofunctionSpec::x_plus_i0(-2.0).unwrap();
        let b = BoostedSolution::new(base, BoostSpec::new(0.0).unwrap()).unwrap();
        for t in [-1.0, 0.0, 2.5] {
            let v = boost_eval(&b, &[0.3], t, 1e-3).unwrap();
            assert_eq!(v, xplusi0_eval(-2.0, 0.3, 1e-3).unwrap());
        }
        let d = boosted_cauchy_data(&b, SpectralGrid::new(8.0, 64).unwrap()).unwrap();
        assert!(d.u1().is_zero());
        assert_eq!(d.u0(), &xplusi0_spectrum(-2.0, SpectralGrid::new(8.0, 64).unwrap()).unwrap());
    }

    #[test]
    fn singular_ray_of_an_inside_boost() {
        let base = PseudofunctionSpec::x_plus_i0(-2.0).unwrap();
        let b = BoostedSolution::new(base, BoostSpec::new(0.6).unwrap()).unwrap();
        let (eps, t) = (1e-3, 0.7);
        let v = boost_eval(&b, &[-0.6 * t], t, eps).unwrap();
        assert!((v.norm() - eps.powi(-2)).abs() < 1e-6 * eps.powi(-2));
        assert!(matches!(boost_eval(&b, &[0.0], 0.0, 0.0), Err(Error::SingularPoint(_))));
        assert!((b.singular_position(t) + 0.6 * t).abs() < 1e-15);
    }

    #[test]
    fn radial_boosts() {
        let base = PseudofunctionSpec::radial(-2.0 / 3.0, 3).unwrap();
        let b = BoostedSolution::new(base, BoostSpec::new(0.5).unwrap()).unwrap();
        assert!(matches!(boost_eval(&b, &[-0.25, 0.0, 0.0], 0.5, 0.0), Err(Error::SingularPoint(_))));
        let v = boost_eval(&b, &[1.0, 0.0, 0.0], 0.0, 0.0).unwrap();
        let th = 0.5f64.atanh();
        assert!((v.re - th.cosh().powf(-2.0 / 3.0)).abs() < 1e-14);
        assert!(BoostedSolution::new(base, BoostSpec::new(2.0).unwrap()).is_err());
        assert!(boosted_cauchy_data(&b, SpectralGrid::new(8.0, 64).unwrap()).is_err());
    }

    #[test]
    fn dilated_data_follow_homogeneity() {
        let base = PseudofunctionSpec::x_plus_i0(-2.0).unwrap();
        let b = BoostedSolution::new(base, BoostSpec::new(0.6).unwrap()).unwrap();
        let g = SpectralGrid::new(16.0, 256).unwrap();
        let d = boosted_cauchy_data(&b, g).unwrap();
        let a: f64 = 1.25;
        let plain = xplusi0_spectrum(-2.0, g).unwrap();
        for (x, y) in d.u0().samples().iter().zip(plain.samples()) {
            assert!((x - y * a.powf(-2.0)).norm() <= 1e-10 * y.norm());
        }
        // (a x + i a ε)^λ = a^λ (x + iε)^λ
        for x in [-1.0, -0.1, 0.2, 3.0] {
            let lhs = xplusi0_eval(-2.0, a * x, a * 1e-2).unwrap();
            let rhs = xplusi0_eval(-2.0, x, 1e-2).unwrap() * a.powf(-2.0);
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        }
        // velocity spectrum agrees with the derivative rule 2πiξ·û
        let v = d.u1();
        let beta = 0.75;
        // ∂_t v(x,0) = (β/a)·∂_x[u_0(a x)], and ∂_x ↔ 2πiξ; cell averages of ξ² from ξ³/3
        let coef = crate::pseudofn::xplusi0_coefficient(-2.0).unwrap();
        let dx = SpectralFunction::from_antiderivative(g, |xi| {
            Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (beta / a) * a.powf(-2.0) * coef * xi.powi(3) / 3.0
        });
        for k in 0..g.bins() {
            let want = dx.samples()[k];
            assert!((v.samples()[k] - want).norm() <= 1e-10 * want.norm().max(1.0), "bin {k}");
        }
    }

    #[test]
    fn outside_data_swap_cosh_and_sinh() {
        let base = PseudofunctionSpec::x_plus_i0(-2.0).unwrap();
        let b = BoostedSolution::new(base, BoostSpec::new(2.0).unwrap()).unwrap();
        let th = b.boost().theta();
        let d = b.initial_data();
        assert!((d.dilation - th.sinh()).abs() < 1e-15 && (d.velocity - th.cosh()).abs() < 1e-15);
        let minus = BoostedSolution::new(base, BoostSpec::outside(2.0, Sign::Minus).unwrap()).unwrap();
        assert!(boosted_cauchy_data(&minus, SpectralGrid::new(8.0, 64).unwrap()).is_err());
    }

    #[test]
    fn quadratic_forms() {
        for &(th, x, t) in &[(0.3, 1.2, -0.4), (-1.1, 0.5, 2.0), (2.0, -3.0, 0.7)] {
            let (x1, t1) = lorentz_inside(th, x, t);
            assert!((x1 * x1 - t1 * t1 - (x * x - t * t)).abs() < 1e-12 * (1.0 + x1 * x1));
            let (x2, t2) = lorentz_outside(th, x, t);
            assert!((x2 * x2 - t2 * t2 - (t * t - x * x)).abs() < 1e-12 * (1.0 + x2 * x2));
        }
    }

    #[test]
    fn rapidities_add() {
        for &(c1, c2) in &[(0.3, 0.4), (-0.7, 0.2), (0.9, 0.95)] {
            let c = (c1 + c2) / (1.0 + c1 * c2);
            let sum = rapidity(c1, Regime::Inside).unwrap() + rapidity(c2, Regime::Inside).unwrap();
            assert!((rapidity(c, Regime::Inside).unwrap() - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn boosted_fields_solve_the_right_equation() {
        let g = SpectralGrid::new(16.0, 1 << 11).unwrap();
        let base = PseudofunctionSpec::x_plus_i0(-2.0).unwrap();
        for c in [0.5, 2.0] {
            let b = BoostedSolution::new(base, BoostSpec::new(c).unwrap()).unwrap();
            let f = boosted_field_from(&b, g, 1e-4, 1, 2).unwrap();
            let right = residual(&f, 2, b.boosted_kappa(-6.0), -2.0).unwrap().relative;
            let wrong = residual(&f, 2, -b.boosted_kappa(-6.0), -2.0).unwrap().relative;
            assert!(right < 1e-3, "c={c}: {right}");
            assert!(wrong >= 10.0 * right, "c={c}: {right} vs {wrong}");
        }
    }
}
