//! The limit `μ₀ = lim μ(η)/Θ(η)`, the diffusion coefficient `κ` and the drift corrector.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::limits::{default_lambdas, omega_scaling_limit, LimitProfile, RescaledLimit};
use super::scaling::{diffusion_exponent, regime, scaling_function, theta_of_eta, Regime};
use crate::equilibria::{build_equilibrium, Alpha, Equilibrium, EquilibriumShape, Family, GridSpec, ModelParams};
use crate::error::{KinlimError, Result};
use crate::extrap::wynn_epsilon;
use crate::linalg::Lu;
use crate::operators::{assemble, cutoff, OperatorDisc};
use crate::quad::{integrate, integrate_to_inf, QuadOptions};
use crate::special::{bracket_integral_closed_form, sphere_area, StableDensity};

/// How a coefficient was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMethod {
    ClosedForm,
    Quadrature,
    EigenExtrapolation,
}

/// Macroscopic summary of a model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingLaw {
    pub regime: Regime,
    pub zeta: f64,
    pub alpha: Alpha,
    pub beta: f64,
    pub mu0: f64,
    pub kappa: f64,
    pub method: KappaMethod,
}

impl ScalingLaw {
    /// Time scale `θ(ε)`.
    pub fn theta(&self, eps: f64) -> Result<f64> {
        scaling_function(self.alpha.value(), self.beta, eps)
    }

    /// Eigenvalue scale `Θ(η)`.
    pub fn big_theta(&self, eta: f64) -> Result<f64> {
        theta_of_eta(self.alpha.value(), self.beta, eta)
    }
}

fn opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-300, rel_tol: 1e-12, max_intervals: 8000 }
}

/// `|S^{d-2}| ∫_0^π f(cos t) sin^{d-2} t dt`, the sphere integral of a zonal function.
fn zonal_integral(d: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    if d == 1 {
        return Ok(f(1.0) + f(-1.0));
    }
    let w = |t: f64| f(t.cos()) * t.sin().powi(d as i32 - 2);
    let half = PI / 2.0;
    let a = integrate(w, 0.0, half, opts())?.value;
    let b = integrate(w, half, PI, opts())?.value;
    Ok(sphere_area(d - 1) * (a + b))
}

/// `∫_S |σ·ω|^q dω`.
fn sphere_abs_moment(d: usize, q: f64) -> f64 {
    if d == 1 {
        return 2.0;
    }
    let ln_b = ln_gamma((q + 1.0) / 2.0) + ln_gamma((d as f64 - 1.0) / 2.0) - ln_gamma((q + d as f64) / 2.0);
    sphere_area(d - 1) * ln_b.exp()
}

/// Discrete corrector: solves `LF = -v` with `Σ m_i ⟨v_i⟩^{-β} F_i = 0` and returns `(F, Σ m v F)`.
pub fn diffusive_corrector(op: &OperatorDisc) -> Result<(Vec<f64>, f64)> {
    if op.grid.d != 1 {
        return Err(KinlimError::Unsupported("corrector solve is implemented on one-dimensional grids".into()));
    }
    let n = op.len();
    let v = &op.grid.nodes;
    let mb: Vec<f64> = op.masses.iter().zip(&op.weight_beta).map(|(m, w)| m * w).collect();
    // Bordered system [L 1; m_βᵀ 0] keeps the solve nonsingular.
    let a = faer::Mat::<c64>::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => c64::new(op.matrix[(i, j)], 0.0),
        (true, false) => c64::new(1.0, 0.0),
        (false, true) => c64::new(mb[j], 0.0),
        (false, false) => c64::new(0.0, 0.0),
    });
    let mut rhs: Vec<c64> = v.iter().map(|&x| c64::new(-x, 0.0)).collect();
    rhs.push(c64::new(0.0, 0.0));
    let sol = Lu::new(a.as_ref())?.solve(&rhs);
    let f: Vec<f64> = sol[..n].iter().map(|z| z.re).collect();
    let mu0 = (0..n).map(|i| op.masses[i] * v[i] * f[i]).sum();
    Ok((f, mu0))
}

/// Rescaled limit of a model; the diffusive regime carries the corrector from `op`
/// (or from a default-resolution operator).
pub fn rescaled_limit(params: &ModelParams, op: Option<&OperatorDisc>) -> Result<RescaledLimit> {
    params.require_macro()?;
    let eq = build_equilibrium(params)?;
    if regime(params.alpha.value(), params.beta)? == Regime::Diffusive {
        let owned;
        let op = match op {
            Some(o) => o,
            None => {
                owned = assemble(params, &GridSpec::default())?;
                &owned
            }
        };
        let (f, _) = diffusive_corrector(op)?;
        return Ok(RescaledLimit { d: params.d, beta: params.beta, profile: LimitProfile::Constant, corrector: Some(f) });
    }
    RescaledLimit::for_family(&eq)
}

/// `∫_0^∞ r^{-α} A(r) dr` with `A(r) = ∫_S c ImΦ(r, c) dσ`, graded at 0 and
/// accelerated over oscillation panels when the profile oscillates.
fn fractional_integral(limit: &RescaledLimit, alpha: f64) -> Result<f64> {
    let d = limit.d;
    let beta = limit.beta;
    let ang = |r: f64| -> f64 {
        if d == 1 {
            limit.phi_polar(r, 1.0).im - limit.phi_polar(r, -1.0).im
        } else {
            zonal_integral(d, |c| c * limit.phi_polar(r, c).im).unwrap_or(f64::NAN)
        }
    };
    let f = |r: f64| if r == 0.0 { 0.0 } else { r.powf(-alpha) * ang(r) };
    // ImΦ = O(r^{1+β}) at the origin; r = x^k makes the integrand bounded.
    let p1 = 2.0 + beta - alpha;
    let k = (2.0 / p1).ceil().clamp(1.0, 12.0);
    let head = integrate(|x: f64| f(x.powf(k)) * k * x.powf(k - 1.0), 0.0, 1.0, opts())?.value;
    let tail = match limit.oscillation_knots(1.0, 80) {
        None => integrate_to_inf(f, 1.0, opts())?.value,
        Some(knots) => {
            let mut sum = integrate(f, 1.0, knots[0], opts())?.value;
            let mut partial = Vec::with_capacity(knots.len());
            for w in knots.windows(2) {
                sum += integrate(f, w[0], w[1], opts())?.value;
                partial.push(sum);
            }
            wynn_epsilon(&partial)
        }
    };
    let total = head + tail;
    if !total.is_finite() {
        return Err(KinlimError::NoConvergence("singular quadrature for mu0 is not finite".into()));
    }
    Ok(total)
}

/// `μ₀` from the rescaled limit (generic path, quadrature or corrector solve).
pub fn mu0_value(params: &ModelParams, limit: &RescaledLimit, op: Option<&OperatorDisc>) -> Result<f64> {
    params.require_macro()?;
    let eq = build_equilibrium(params)?;
    let alpha = params.alpha.value();
    let beta = params.beta;
    let c_tail = eq.tail_constant();
    let mu0 = match regime(alpha, beta)? {
        Regime::Diffusive => match op {
            Some(o) => diffusive_corrector(o)?.1,
            None => {
                let o = assemble(params, &GridSpec::default())?;
                diffusive_corrector(&o)?.1
            }
        },
        Regime::Critical => {
            let lambdas = default_lambdas();
            let omega_at = |c: f64| -> f64 {
                let (r, cc) = (1.0, c);
                match omega_scaling_limit(|l| limit.phi_polar(l * r, cc), beta, &lambdas) {
                    Ok(e) => e.value,
                    Err(_) => f64::NAN,
                }
            };
            c_tail / (1.0 + beta) * zonal_integral(params.d, |c| c * omega_at(c))?
        }
        Regime::Fractional | Regime::Alpha0 => c_tail * fractional_integral(limit, alpha)?,
    };
    if !(mu0.is_finite() && mu0 > 0.0) {
        return Err(KinlimError::NoConvergence(format!("mu0 = {mu0} is not positive")));
    }
    Ok(mu0)
}

/// Tail constant and mass of `M` from closed forms, independent of the quadrature in `equilibria`.
fn closed_constants(params: &ModelParams) -> Option<(f64, f64)> {
    let d = params.d;
    match (params.shape, params.alpha) {
        (EquilibriumShape::StableLaw, Alpha::Finite(a)) => Some((StableDensity::new(a).tail_constant(), 1.0)),
        (EquilibriumShape::PowerLaw, Alpha::Finite(a)) => {
            let c = 1.0 / bracket_integral_closed_form(d, a + params.beta);
            let mass = if a > 0.0 { c * bracket_integral_closed_form(d, a) } else { f64::INFINITY };
            Some((c, mass))
        }
        _ => None,
    }
}

/// `∫_0^∞ t^{-γ} sin t dt = Γ(1-γ) cos(πγ/2)`, with the limit `π/2` at `γ = 1`.
fn sine_mellin(gamma_exp: f64) -> f64 {
    if (1.0 - gamma_exp).abs() < 1e-9 {
        PI / 2.0
    } else {
        gamma(1.0 - gamma_exp) * (PI * gamma_exp / 2.0).cos()
    }
}

/// `μ₀` from the closed forms available per family and regime.
pub fn mu0_closed_form(params: &ModelParams) -> Result<Option<f64>> {
    params.require_macro()?;
    let d = params.d;
    let alpha = params.alpha.value();
    let beta = params.beta;
    let reg = regime(alpha, beta)?;
    let sphere = sphere_area(d);
    let gamma_exp = (alpha.max(0.0) + beta) / (1.0 + beta);
    let mu0 = match (params.family, reg) {
        (Family::Scattering { nu0, .. }, Regime::Diffusive) => {
            // F = v/ν with ν(v) = ν₀⟨v⟩^{-β}: μ₀ = ν₀^{-1} ∫ (v·σ)² ⟨v⟩^β M.
            let eq = build_equilibrium(params)?;
            let radial = integrate_to_inf(
                |r: f64| r.powi(d as i32 + 1) * (1.0 + r * r).powf(beta / 2.0) * eq.m_radial(r),
                0.0,
                opts(),
            )?
            .value;
            Some(sphere / d as f64 * radial / nu0)
        }
        (Family::Scattering { nu0, .. }, Regime::Critical) => {
            closed_constants(params).map(|(c, _)| c * sphere / (nu0 * d as f64 * (1.0 + beta)))
        }
        (Family::Scattering { nu0, .. }, Regime::Fractional | Regime::Alpha0) => closed_constants(params).map(|(c, _)| {
            let p = (2.0 + beta - alpha) / (2.0 + 2.0 * beta);
            c * nu0.powf((1.0 - alpha) / (1.0 + beta)) * PI / ((2.0 + 2.0 * beta) * (PI * p).sin())
                * sphere_abs_moment(d, gamma_exp)
        }),
        (Family::LevyFokkerPlanck { s }, Regime::Fractional) if d == 1 => closed_constants(params).map(|(c, mass)| {
            let a = lfp_phase_closed(params, s, c, mass);
            c / (1.0 + beta) * a.powf((alpha - 1.0) / (1.0 + beta)) * 2.0 * sine_mellin(gamma_exp)
        }),
        (Family::LevyFokkerPlanck { s }, Regime::Critical) => closed_constants(params).map(|(c, mass)| {
            let a = lfp_phase_closed(params, s, c, mass);
            c * a * sphere / (d as f64 * (1.0 + beta))
        }),
        (Family::FokkerPlanck, Regime::Critical) => {
            closed_constants(params).map(|(c, _)| c * sphere / (3.0 * d as f64 * (d as f64 + 8.0)))
        }
        _ => None,
    };
    Ok(mu0)
}

fn lfp_phase_closed(params: &ModelParams, s: f64, c_tail: f64, mass: f64) -> f64 {
    2.0 * s * c_tail / (crate::special::frac_laplacian_constant(params.d, s) * mass * (1.0 + params.beta))
}

/// `κ = μ₀/‖M‖` for `α > 0`, `κ = μ₀(1+β)/|S^{d-1}|` for `α = 0`.
pub fn kappa_from_mu0(params: &ModelParams, eq: &Equilibrium, mu0: f64) -> Result<f64> {
    Ok(match regime(params.alpha.value(), params.beta)? {
        Regime::Alpha0 => mu0 * (1.0 + params.beta) / sphere_area(params.d),
        _ => mu0 / eq.mass(),
    })
}

/// `κ` through the generic path: rescaled limit, then quadrature or corrector solve.
pub fn kappa_generic(params: &ModelParams, op: Option<&OperatorDisc>) -> Result<(f64, f64)> {
    let eq = build_equilibrium(params)?;
    let limit = rescaled_limit(params, op)?;
    let mu0 = mu0_value(params, &limit, op)?;
    Ok((mu0, kappa_from_mu0(params, &eq, mu0)?))
}

/// `κ` from the family closed forms, when one exists.
pub fn kappa_closed_form(params: &ModelParams) -> Result<Option<(f64, f64)>> {
    let Some(mu0) = mu0_closed_form(params)? else {
        return Ok(None);
    };
    let kappa = match regime(params.alpha.value(), params.beta)? {
        Regime::Alpha0 => mu0 * (1.0 + params.beta) / sphere_area(params.d),
        _ => match closed_constants(params) {
            Some((_, mass)) => mu0 / mass,
            None => mu0 / build_equilibrium(params)?.mass(),
        },
    };
    Ok(Some((mu0, kappa)))
}

/// Scaling law with the closed-form coefficient when available, the generic one otherwise.
pub fn kappa_value(params: &ModelParams, op: Option<&OperatorDisc>) -> Result<ScalingLaw> {
    let alpha = params.alpha.value();
    let reg = regime(alpha, params.beta)?;
    let zeta = diffusion_exponent(alpha, params.beta)?;
    let (mu0, kappa, method) = match kappa_closed_form(params)? {
        Some((m, k)) => (m, k, KappaMethod::ClosedForm),
        None => {
            let (m, k) = kappa_generic(params, op)?;
            (m, k, KappaMethod::Quadrature)
        }
    };
    Ok(ScalingLaw { regime: reg, zeta, alpha: params.alpha, beta: params.beta, mu0, kappa, method })
}

/// Velocity corrector and whether its defining limit settled.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriftCorrector {
    pub value: f64,
    pub converged: bool,
}

/// `∫_a^b g` with a logarithmic map on `[1, ∞)` pieces so power tails integrate smoothly.
fn integrate_half_line(g: &dyn Fn(f64) -> f64, upper: f64) -> Result<f64> {
    let near = integrate(g, 0.0, 1.0_f64.min(upper), opts())?.value;
    if upper <= 1.0 {
        return Ok(near);
    }
    let h = |x: f64| {
        let v = x.exp();
        g(v) * v
    };
    let far = if upper.is_infinite() {
        integrate_to_inf(h, 0.0, opts())?.value
    } else {
        integrate(h, 0.0, upper.ln(), opts())?.value
    };
    Ok(near + far)
}

fn integrate_line_split(g: &dyn Fn(f64) -> f64, upper: f64) -> Result<f64> {
    let neg = |v: f64| g(-v);
    Ok(integrate_half_line(g, upper)? + integrate_half_line(&neg, upper)?)
}

/// Velocity corrector `v̄_ε` of a one-dimensional, possibly non-centered equilibrium `m`.
pub fn drift_corrector(m: &dyn Fn(f64) -> f64, alpha: f64, beta: f64, eps: f64) -> Result<DriftCorrector> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(KinlimError::InvalidParams(format!("eps must lie in (0, 1), got {eps}")));
    }
    if alpha < 0.0 {
        return Err(KinlimError::InvalidParams("drift corrector needs alpha >= 0".into()));
    }
    if alpha < 1.0 {
        return Ok(DriftCorrector { value: 0.0, converged: true });
    }
    if alpha > 1.0 {
        let first = integrate_line_split(&|v| v * m(v), f64::INFINITY)?;
        let mass = integrate_line_split(m, f64::INFINITY)?;
        return Ok(DriftCorrector { value: first / mass, converged: true });
    }
    // α = 1: the truncated first moment grows like ln R; its slope in ln R is the limit.
    let truncated = |r: f64| -> Result<(f64, f64)> {
        let first = integrate_line_split(&|v: f64| v * cutoff(v.abs() / r) * m(v), 2.0 * r)?;
        let mass = integrate_line_split(&|v: f64| cutoff(v.abs() / r) * m(v), 2.0 * r)?;
        Ok((first, mass))
    };
    let radii: Vec<f64> = (2..=9).map(|k| 10f64.powi(k)).collect();
    let vals = radii.iter().map(|&r| truncated(r)).collect::<Result<Vec<_>>>()?;
    let est: Vec<f64> = (1..radii.len())
        .map(|k| (vals[k].0 - vals[k - 1].0) / (radii[k] / radii[k - 1]).ln() / vals[k].1)
        .collect();
    let last = est[est.len() - 1];
    let prev = est[est.len() - 2];
    let converged = (last - prev).abs() <= 1e-4 * last.abs().max(1e-8);
    Ok(DriftCorrector { value: last * eps.ln().abs() / (1.0 + beta), converged })
}

/// Full scaling law of a model (closed form preferred).
pub fn scaling_law(params: &ModelParams, op: Option<&OperatorDisc>) -> Result<ScalingLaw> {
    kappa_value(params, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::KernelKind;
    use crate::quad::integrate_line;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn scattering_fractional_generic_matches_closed_form() {
        let p = ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).unwrap();
        let (mu_g, k_g) = kappa_generic(&p, None).unwrap();
        let (mu_c, k_c) = kappa_closed_form(&p).unwrap().unwrap();
        assert!(rel(mu_g, mu_c) < 1e-8, "{mu_g} {mu_c}");
        assert!(rel(k_g, k_c) < 1e-8);
        // α = β = 1: κ = 1/2, ‖M‖ = π/2.
        assert!(rel(k_c, 0.5) < 1e-12);
        let eq = build_equilibrium(&p).unwrap();
        assert!(rel(eq.mass(), PI / 2.0) < 1e-9);
    }

    #[test]
    fn scattering_closed_form_against_direct_integral() {
        // κ = c_{α,0} ∫ ν₀|u|^β u²/(ν₀² + |u|^{2β}u²) |u|^{-1-α} du, integrated directly.
        let (alpha, beta, nu0) = (0.7, 0.4, 1.7);
        let p = ModelParams::scattering(1, alpha, beta, nu0, KernelKind::Product).unwrap();
        let c0 = 1.0 / bracket_integral_closed_form(1, alpha);
        let f = |u: f64| {
            let a = u.abs();
            if a == 0.0 {
                return 0.0;
            }
            nu0 * a.powf(beta) * u * u / (nu0 * nu0 + a.powf(2.0 * beta) * u * u) * a.powf(-1.0 - alpha)
        };
        let direct = c0 * integrate_line(f, 0.0, QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_intervals: 8000 }).unwrap().value;
        let (_, k) = kappa_closed_form(&p).unwrap().unwrap();
        assert!(rel(k, direct) < 1e-7, "{k} {direct}");
    }

    #[test]
    fn scattering_higher_dimension_cross_check() {
        for d in [2usize, 3] {
            let p = ModelParams::scattering(d, 1.2, 0.5, 1.0, KernelKind::Product).unwrap();
            let (_, k_g) = kappa_generic(&p, None).unwrap();
            let (_, k_c) = kappa_closed_form(&p).unwrap().unwrap();
            assert!(rel(k_g, k_c) < 1e-7, "d={d}: {k_g} {k_c}");
        }
    }

    #[test]
    fn scattering_critical_cross_check() {
        let p = ModelParams::scattering(1, 3.0, 1.0, 2.0, KernelKind::Product).unwrap();
        let (_, k_g) = kappa_generic(&p, None).unwrap();
        let (_, k_c) = kappa_closed_form(&p).unwrap().unwrap();
        assert!(rel(k_g, k_c) < 1e-8, "{k_g} {k_c}");
    }

    #[test]
    fn lfp_generic_matches_closed_form() {
        let p = ModelParams::levy_fokker_planck(1, 0.75, 1.2).unwrap();
        let (_, k_g) = kappa_generic(&p, None).unwrap();
        let (_, k_c) = kappa_closed_form(&p).unwrap().unwrap();
        assert!(rel(k_g, k_c) < 1e-7, "{k_g} {k_c}");
    }

    #[test]
    fn lfp_stable_law_kappa_is_exact() {
        let p = ModelParams::stable_levy(0.75).unwrap();
        let (_, k_c) = kappa_closed_form(&p).unwrap().unwrap();
        let (_, k_g) = kappa_generic(&p, None).unwrap();
        let exact = 1.5f64.powf(1.5);
        assert!(rel(k_c, exact) < 1e-10, "{k_c}");
        assert!(rel(k_g, exact) < 1e-7, "{k_g}");
    }

    #[test]
    fn fp_critical_cross_check() {
        let p = ModelParams::fokker_planck(1, Alpha::Finite(4.0)).unwrap();
        let (_, k_g) = kappa_generic(&p, None).unwrap();
        let (_, k_c) = kappa_closed_form(&p).unwrap().unwrap();
        assert!(rel(k_g, k_c) < 1e-6, "{k_g} {k_c}");
    }

    #[test]
    fn fp_fractional_uses_quadrature() {
        let p = ModelParams::fokker_planck(1, Alpha::Finite(1.0)).unwrap();
        let law = kappa_value(&p, None).unwrap();
        assert_eq!(law.method, KappaMethod::Quadrature);
        assert!(law.kappa > 0.0 && law.zeta == 1.0);
    }

    #[test]
    fn diffusive_scattering_corrector_matches_closed_form() {
        let p = ModelParams::scattering(1, 5.0, 1.0, 1.0, KernelKind::Product).unwrap();
        let op = assemble(&p, &GridSpec { n: 400, vmax: 1e4, ..GridSpec::default() }).unwrap();
        let (f, mu_g) = diffusive_corrector(&op).unwrap();
        let mu_c = mu0_closed_form(&p).unwrap().unwrap();
        assert!(rel(mu_g, mu_c) < 1e-3, "{mu_g} {mu_c}");
        // The corrector is odd.
        for i in 0..op.len() {
            let j = op.grid.mirror(i);
            assert!((f[i] + f[j]).abs() < 1e-8 * f[i].abs().max(1.0));
        }
    }

    #[test]
    fn alpha_zero_uses_sphere_normalization() {
        let p = ModelParams::scattering(1, 0.0, 1.0, 1.0, KernelKind::Product).unwrap();
        let (mu_g, k_g) = kappa_generic(&p, None).unwrap();
        let (mu_c, k_c) = kappa_closed_form(&p).unwrap().unwrap();
        assert!(rel(mu_g, mu_c) < 1e-8);
        assert!(rel(k_c, mu_c * 2.0 / 2.0) < 1e-15);
        assert!(rel(k_g, k_c) < 1e-8);
    }

    #[test]
    fn mu0_sign_symmetric_in_sigma() {
        // Reflecting σ maps ImΦ(u) to ImΦ(-u); the integral of (u·σ)ImΦ is unchanged.
        let p = ModelParams::scattering(1, 1.5, 0.5, 1.0, KernelKind::Product).unwrap();
        let lim = rescaled_limit(&p, None).unwrap();
        let f = |sigma: f64| {
            integrate_line(
                |u: f64| if u == 0.0 { 0.0 } else { u * sigma * lim.phi(&[u], &[sigma]).im * u.abs().powf(-2.5) },
                0.0,
                opts(),
            )
            .unwrap()
            .value
        };
        assert!(rel(f(1.0), f(-1.0)) < 1e-12);
    }

    #[test]
    fn drift_corrector_cases() {
        let centered = |v: f64| 0.5 * (1.0 + v * v).powf(-1.5);
        assert!(drift_corrector(&centered, 2.0, 0.0, 0.1).unwrap().value.abs() < 1e-12);
        assert_eq!(drift_corrector(&centered, 0.5, 0.0, 0.1).unwrap().value, 0.0);
        // Shifted M(v - a), α = 1.5.
        let a = 0.7;
        let shifted = move |v: f64| (1.0 + (v - a) * (v - a)).powf(-1.25);
        let dc = drift_corrector(&shifted, 1.5, 0.0, 0.1).unwrap();
        assert!((dc.value - a).abs() < 1e-8, "{}", dc.value);
    }

    #[test]
    fn drift_corrector_borderline_asymmetric_tails() {
        // Tails (1 ± 1/2)/(π v²): limit (c₊ - c₋)/∫M = 1/π.
        let m = |v: f64| (1.0 + 0.5 * v.tanh()) / (PI * (1.0 + v * v));
        let eps = 0.01;
        let beta = 1.0;
        let dc = drift_corrector(&m, 1.0, beta, eps).unwrap();
        let expected = (1.0 / PI) * eps.ln().abs() / (1.0 + beta);
        assert!(dc.converged);
        assert!(rel(dc.value, expected) < 1e-4, "{} {expected}", dc.value);
    }

    #[test]
    fn scaling_law_invariants() {
        for p in [
            ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).unwrap(),
            ModelParams::scattering(2, 0.5, 0.0, 1.0, KernelKind::Constant).unwrap(),
            ModelParams::fokker_planck(1, Alpha::Finite(4.0)).unwrap(),
            ModelParams::levy_fokker_planck(1, 0.75, 1.75).unwrap(),
        ] {
            let law = scaling_law(&p, None).unwrap();
            assert!(law.kappa > 0.0 && law.mu0 > 0.0, "{p:?}");
            assert_eq!(law.zeta == 2.0, matches!(law.regime, Regime::Diffusive | Regime::Critical));
        }
    }
}
