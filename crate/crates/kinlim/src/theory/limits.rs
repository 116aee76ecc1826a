//! Limits `Φ = lim Φ_η` of the rescaled fluid mode and the critical profile `Ω`.

use std::sync::Arc;

use faer::c64;

use super::fp_schrodinger::FpProfile;
use crate::equilibria::{normalization_constant, Equilibrium, Family};
use crate::error::{KinlimError, Result};
use crate::extrap::{richardson, Extrapolation};
use crate::special::frac_laplacian_constant;

fn dot(u: &[f64], sigma: &[f64]) -> f64 {
    u.iter().zip(sigma).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Scattering limit `Φ(u) = ν₀ / (ν₀ - i|u|^β (u·σ))`.
pub fn phi_limit_scattering(u: &[f64], sigma: &[f64], nu0: f64, beta: f64) -> c64 {
    let x = norm(u).powf(beta) * dot(u, sigma);
    c64::new(nu0, 0.0) / c64::new(nu0, -x)
}

/// Phase constant `A` of the Lévy-Fokker-Planck limit `Φ(u) = exp(iA|u|^β(u·σ))`.
///
/// The drift behaves like `K|v|^{-β}v` at large `|v|` with
/// `K = C_{d,s}‖M‖ / (2s c)`, `c` the tail constant of `M`, and `A = 1/(K(1+β))`.
pub fn lfp_phase_constant(eq: &Equilibrium, s: f64) -> f64 {
    let beta = eq.params.beta;
    2.0 * s * eq.tail_constant() / (frac_laplacian_constant(eq.params.d, s) * eq.mass() * (1.0 + beta))
}

/// Lévy-Fokker-Planck limit with an explicit phase constant.
pub fn phi_limit_lfp_with_phase(u: &[f64], sigma: &[f64], a: f64, beta: f64) -> c64 {
    let x = norm(u).powf(beta) * dot(u, sigma);
    c64::from_polar(1.0, a * x)
}

/// Lévy-Fokker-Planck limit for the power-law equilibrium with `β = 2s - α`.
pub fn phi_limit_lfp(u: &[f64], sigma: &[f64], s: f64, alpha: f64) -> Result<c64> {
    let d = u.len();
    let beta = 2.0 * s - alpha;
    let c0 = normalization_constant(d, alpha, 0.0)?;
    let a = 2.0 * s * c0 / (frac_laplacian_constant(d, s) * (1.0 + beta));
    Ok(phi_limit_lfp_with_phase(u, sigma, a, beta))
}

/// Family-specific representation of `Φ`.
#[derive(Debug, Clone)]
pub enum LimitProfile {
    /// Diffusive regime: `Φ ≡ 1`, the information sits in the corrector `F`.
    Constant,
    Scattering { nu0: f64 },
    LevyFokkerPlanck { phase: f64 },
    FokkerPlanck(Arc<FpProfile>),
}

/// Rescaled limit `Φ`, the optional critical profile `Ω` and the diffusive corrector `F`.
#[derive(Debug, Clone)]
pub struct RescaledLimit {
    pub d: usize,
    pub beta: f64,
    pub profile: LimitProfile,
    /// Solution of `LF = -(v·σ)` on the operator grid, diffusive regime only.
    pub corrector: Option<Vec<f64>>,
}

impl RescaledLimit {
    /// Builds the profile of `family` for the equilibrium `eq` (not the diffusive corrector).
    pub fn for_family(eq: &Equilibrium) -> Result<Self> {
        let p = &eq.params;
        let profile = match p.family {
            Family::Scattering { nu0, .. } => LimitProfile::Scattering { nu0 },
            Family::LevyFokkerPlanck { s } => LimitProfile::LevyFokkerPlanck { phase: lfp_phase_constant(eq, s) },
            Family::FokkerPlanck => LimitProfile::FokkerPlanck(Arc::new(FpProfile::solve(p.d, p.alpha.value())?)),
        };
        Ok(RescaledLimit { d: p.d, beta: p.beta, profile, corrector: None })
    }

    /// `Φ` at radius `r = |u|` and cosine `c = u·σ/|u|`.
    pub fn phi_polar(&self, r: f64, c: f64) -> c64 {
        let x = r.powf(self.beta) * r * c;
        match &self.profile {
            LimitProfile::Constant => c64::new(1.0, 0.0),
            LimitProfile::Scattering { nu0 } => c64::new(*nu0, 0.0) / c64::new(*nu0, -x),
            LimitProfile::LevyFokkerPlanck { phase } => c64::from_polar(1.0, phase * x),
            // d = 1: the equation depends on u·σ only.
            LimitProfile::FokkerPlanck(p) => p.eval(r * c.signum()),
        }
    }

    /// `Φ(u)` for a velocity `u` and direction `σ`.
    pub fn phi(&self, u: &[f64], sigma: &[f64]) -> c64 {
        let r = norm(u);
        if r == 0.0 {
            return c64::new(1.0, 0.0);
        }
        self.phi_polar(r, dot(u, sigma) / r)
    }

    /// Closed-form `Ω(u)` of the critical regime, when known for the family.
    pub fn omega(&self, u: &[f64], sigma: &[f64]) -> Option<f64> {
        let r = norm(u);
        let us = dot(u, sigma);
        match &self.profile {
            LimitProfile::Constant => None,
            LimitProfile::Scattering { nu0 } => Some(r.powf(self.beta) * us / nu0),
            LimitProfile::LevyFokkerPlanck { phase } => Some(phase * r.powf(self.beta) * us),
            LimitProfile::FokkerPlanck(p) => Some(p.cubic_coefficient().im * r * r * us),
        }
    }

    /// Radii `r_k` with `ImΦ(r_k σ) = 0` beyond `r_min`, for oscillatory profiles.
    pub fn oscillation_knots(&self, r_min: f64, count: usize) -> Option<Vec<f64>> {
        match self.profile {
            LimitProfile::LevyFokkerPlanck { phase } if self.d == 1 => {
                let p = 1.0 + self.beta;
                let k0 = (phase * r_min.powf(p) / std::f64::consts::PI).ceil().max(1.0) as usize;
                Some((k0..k0 + count).map(|k| (k as f64 * std::f64::consts::PI / phase).powf(1.0 / p)).collect())
            }
            _ => None,
        }
    }

    /// Samples `Φ(u σ)` on a one-dimensional grid of signed radii.
    pub fn sample(&self, u_grid: &[f64], sigma: f64) -> Vec<c64> {
        u_grid.iter().map(|&u| self.phi_polar(u.abs(), (u * sigma).signum())).collect()
    }
}

/// Rescaled Fokker-Planck limit for `d = 1`, `α ∈ (0, 4]`.
pub fn phi_fp_solve(d: usize, alpha: f64) -> Result<RescaledLimit> {
    Ok(RescaledLimit {
        d,
        beta: 2.0,
        profile: LimitProfile::FokkerPlanck(Arc::new(FpProfile::solve(d, alpha)?)),
        corrector: None,
    })
}

/// `Ω(σ') = lim_{λ→0} ImΦ(λσ')/λ^{1+β}` by Richardson extrapolation over a geometric `λ` list.
///
/// `phi_on_ray(λ)` must return `Φ(λσ')`.
pub fn omega_scaling_limit(phi_on_ray: impl Fn(f64) -> c64, beta: f64, lambdas: &[f64]) -> Result<Extrapolation> {
    if lambdas.len() < 3 {
        return Err(KinlimError::InvalidParams("omega extrapolation needs at least three lambdas".into()));
    }
    let rho = lambdas[1] / lambdas[0];
    let geometric = lambdas.windows(2).all(|w| w[1] > 0.0 && ((w[1] / w[0]) / rho - 1.0).abs() < 1e-9);
    if !(geometric && rho < 1.0) {
        return Err(KinlimError::InvalidParams("lambdas must be decreasing and geometric".into()));
    }
    let q: Vec<f64> = lambdas.iter().map(|&l| phi_on_ray(l).im / l.powf(1.0 + beta)).collect();
    Ok(richardson(&q, rho))
}

/// Default `λ` sweep for [`omega_scaling_limit`].
pub fn default_lambdas() -> Vec<f64> {
    (0..6).map(|k| 2e-2 * 0.5f64.powi(k)).collect()
}
