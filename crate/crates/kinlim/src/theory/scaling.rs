//! Regimes, diffusion exponent and the scaling functions `Θ(η)` and `θ(ε)`.

use serde::{Deserialize, Serialize};

use crate::error::{KinlimError, Result};

const REGIME_TOL: f64 = 1e-12;

/// Macroscopic regime of a model, fixed by `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `α > 2 + β`, standard diffusion.
    Diffusive,
    /// `α = 2 + β`, diffusion with a logarithmic correction.
    Critical,
    /// `0 < α < 2 + β`, fractional diffusion.
    Fractional,
    /// `α = 0`, infinite-mass equilibrium.
    Alpha0,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Diffusive => "diffusive",
            Regime::Critical => "critical",
            Regime::Fractional => "fractional",
            Regime::Alpha0 => "alpha0",
        }
    }
}

/// Classifies `(α, β)`; `α = +∞` is diffusive.
pub fn regime(alpha: f64, beta: f64) -> Result<Regime> {
    if alpha.is_nan() || !beta.is_finite() {
        return Err(KinlimError::InvalidParams(format!("non-finite exponents alpha = {alpha}, beta = {beta}")));
    }
    if alpha < -REGIME_TOL {
        return Err(KinlimError::InvalidParams(format!("macroscopic limit needs alpha >= 0, got {alpha}")));
    }
    if !(alpha + beta > 0.0) {
        return Err(KinlimError::InvalidParams(format!("alpha + beta must be positive, got {}", alpha + beta)));
    }
    let crit = 2.0 + beta;
    Ok(if alpha.abs() <= REGIME_TOL {
        Regime::Alpha0
    } else if (alpha - crit).abs() <= REGIME_TOL * crit.abs().max(1.0) {
        Regime::Critical
    } else if alpha > crit {
        Regime::Diffusive
    } else {
        Regime::Fractional
    })
}

/// `ζ = min(2, (α + β)/(1 + β))`.
pub fn diffusion_exponent(alpha: f64, beta: f64) -> Result<f64> {
    Ok(match regime(alpha, beta)? {
        Regime::Diffusive | Regime::Critical => 2.0,
        Regime::Fractional | Regime::Alpha0 => (alpha.max(0.0) + beta) / (1.0 + beta),
    })
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(KinlimError::InvalidParams(format!("{name} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

/// `Θ(η)`: `η²`, `η²|ln η|` at `α = 2 + β`, `η^{(α+β)/(1+β)}` below.
pub fn theta_of_eta(alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    check_unit_interval("eta", eta)?;
    Ok(match regime(alpha, beta)? {
        Regime::Diffusive => eta * eta,
        Regime::Critical => eta * eta * eta.ln().abs(),
        Regime::Fractional | Regime::Alpha0 => eta.powf((alpha.max(0.0) + beta) / (1.0 + beta)),
    })
}

/// `θ(ε)`: `ε^ζ`, `ε²|ln ε|` at `α = 2 + β`, `ε^{β/(1+β)}/|ln ε|` at `α = 0`.
pub fn scaling_function(alpha: f64, beta: f64, eps: f64) -> Result<f64> {
    check_unit_interval("eps", eps)?;
    Ok(match regime(alpha, beta)? {
        Regime::Diffusive => eps * eps,
        Regime::Critical => eps * eps * eps.ln().abs(),
        Regime::Fractional => eps.powf((alpha + beta) / (1.0 + beta)),
        Regime::Alpha0 => eps.powf(beta / (1.0 + beta)) / eps.ln().abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exponent_examples() {
        assert_eq!(diffusion_exponent(4.0, 2.0).unwrap(), 2.0);
        assert_eq!(diffusion_exponent(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(diffusion_exponent(3.5, 1.5).unwrap(), 2.0);
        assert_eq!(diffusion_exponent(f64::INFINITY, 0.0).unwrap(), 2.0);
        // Lévy-FP s = 0.75, α = 1.5, β = 0.
        assert!((diffusion_exponent(1.5, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(diffusion_exponent(-0.5, 2.0).is_err());
        assert!(diffusion_exponent(0.5, -0.5).is_err());
    }

    #[test]
    fn big_theta_examples() {
        assert!((theta_of_eta(5.0, 2.0, 0.1).unwrap() - 0.01).abs() < 1e-15);
        assert!((theta_of_eta(4.0, 2.0, 0.1).unwrap() - 0.023_025_850_929_940_46).abs() < 1e-15);
        assert!((theta_of_eta(1.0, 1.0, 0.1).unwrap() - 0.1).abs() < 1e-15);
        assert!(theta_of_eta(1.0, 1.0, 1.0).is_err());
        assert!(theta_of_eta(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn small_theta_examples() {
        assert!((scaling_function(5.0, 2.0, 0.1).unwrap() - 0.01).abs() < 1e-15);
        let e = (-1f64).exp();
        assert!((scaling_function(0.0, 1.0, e).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((scaling_function(4.0, 2.0, 0.1).unwrap() - 0.01 * 10f64.ln()).abs() < 1e-15);
        assert!(scaling_function(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(regime(0.0, 1.0).unwrap(), Regime::Alpha0);
        assert_eq!(regime(3.0, 1.0).unwrap(), Regime::Critical);
        assert_eq!(regime(3.5, 1.0).unwrap(), Regime::Diffusive);
        assert_eq!(regime(1.0, 1.0).unwrap(), Regime::Fractional);
    }

    proptest! {
        #[test]
        fn zeta_in_range_and_two_exactly_above_threshold(alpha in 0.0f64..10.0, beta in -0.9f64..4.0) {
            prop_assume!(alpha + beta > 1e-3);
            let z = diffusion_exponent(alpha, beta).unwrap();
            prop_assert!(z > 0.0 && z <= 2.0);
            prop_assert_eq!(z == 2.0, alpha >= 2.0 + beta - 1e-12);
        }

        #[test]
        fn big_theta_increasing_on_small_eta(alpha in 0.0f64..8.0, beta in -0.9f64..4.0, a in 1e-6f64..0.36, b in 1e-6f64..0.36) {
            prop_assume!(alpha + beta > 1e-3 && (a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(theta_of_eta(alpha, beta, lo).unwrap() < theta_of_eta(alpha, beta, hi).unwrap());
        }
    }
}
