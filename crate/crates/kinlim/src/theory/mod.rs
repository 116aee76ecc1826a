//! Macroscopic theory: regimes, scaling functions, rescaled limits, `μ₀`, `κ`
//! and the drift corrector.

pub mod coefficients;
pub mod fp_schrodinger;
pub mod limits;
pub mod scaling;

pub use coefficients::{
    diffusive_corrector, drift_corrector, kappa_closed_form, kappa_from_mu0, kappa_generic, kappa_value,
    mu0_closed_form, mu0_value, rescaled_limit, scaling_law, DriftCorrector, KappaMethod, ScalingLaw,
};
pub use fp_schrodinger::FpProfile;
pub use limits::{
    default_lambdas, lfp_phase_constant, omega_scaling_limit, phi_fp_solve, phi_limit_lfp, phi_limit_lfp_with_phase,
    phi_limit_scattering, LimitProfile, RescaledLimit,
};
pub use scaling::{diffusion_exponent, regime, scaling_function, theta_of_eta, Regime};
