//! Per-frequency integration of `θ(ε)∂_t ĥ = Lĥ - iε(v·ξ)ĥ`, the weighted density
//! `r̂_ε`, and the comparison against the limiting fractional heat equation.

use std::path::Path;

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{KinlimError, Result};
use crate::fluid_mode::FluidMode;
use crate::linalg::{expm, matvec, CMat};
use crate::macro_solver::{evolve_series, weight_for, MacroField};
use crate::operators::{coercivity_gap, log_log_slope, OperatorDisc};
use crate::theory::{scaling_function, Regime, ScalingLaw};

/// `ĥ(ξ, v)` at one time.
#[derive(Debug, Clone)]
pub struct KineticField {
    pub xi: Vec<f64>,
    pub dxi: Vec<f64>,
    /// `h_hat[k][i]` is the value at `(ξ_k, v_i)`.
    pub h_hat: Vec<Vec<c64>>,
    pub time: f64,
    pub eps: f64,
}

impl KineticField {
    /// Well-prepared data `ĥ(ξ, v) = r̂₀(ξ)`.
    pub fn well_prepared(r0: &MacroField, n: usize, eps: f64) -> Self {
        Self {
            xi: r0.xi.clone(),
            dxi: r0.dxi.clone(),
            h_hat: r0.r_hat.iter().map(|&r| vec![r; n]).collect(),
            time: r0.time,
            eps,
        }
    }
}

/// Output of [`evolve_kinetic`].
#[derive(Debug, Clone)]
pub struct KineticSeries {
    pub eps: f64,
    pub theta: f64,
    pub frames: Vec<KineticField>,
    /// `max_ξ ‖ĥ(t_{k+1}, ξ)‖_M / ‖ĥ(t_k, ξ)‖_M` per step.
    pub step_ratios: Vec<f64>,
}

impl KineticSeries {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }
}

/// Time grid on `[0, T]`: `n_uniform` equal steps, the first one split geometrically `n_geometric` times.
/// All steps are powers of two times the smallest one, so propagators are obtained by squaring.
pub fn default_time_grid(t_end: f64, n_uniform: usize, n_geometric: usize) -> Vec<f64> {
    let h = t_end / n_uniform as f64;
    let mut t = vec![0.0];
    for k in (1..=n_geometric).rev() {
        t.push(h * 0.5f64.powi(k as i32));
    }
    t.extend((1..=n_uniform).map(|k| h * k as f64));
    t
}

fn norm_m(h: &[c64], m: &[f64]) -> f64 {
    h.iter().zip(m).map(|(a, w)| a.norm_sqr() * w).sum::<f64>().sqrt()
}

const ENERGY_ABORT: f64 = 1e-6;

fn evolve_one_xi(op: &OperatorDisc, eps: f64, theta: f64, xi: f64, h0: &[c64], t_grid: &[f64]) -> Result<(Vec<Vec<c64>>, Vec<f64>)> {
    let n = op.len();
    let v = &op.grid.nodes;
    let gen: CMat = Mat::from_fn(n, n, |i, j| {
        let d = if i == j { c64::new(0.0, -eps * xi * v[i]) } else { c64::new(0.0, 0.0) };
        (c64::new(op.matrix[(i, j)], 0.0) + d) / theta
    });
    let mut cache: Vec<(f64, CMat)> = Vec::new();
    let mut out = vec![h0.to_vec()];
    let mut ratios = Vec::with_capacity(t_grid.len() - 1);
    let n0 = norm_m(h0, &op.masses);
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let same = |c: f64| (c - dt).abs() <= 1e-12 * dt;
        let half = |c: f64| (2.0 * c - dt).abs() <= 1e-12 * dt;
        let prop = if let Some(k) = cache.iter().position(|(c, _)| same(*c)) {
            k
        } else {
            let e = match cache.iter().find(|(c, _)| half(*c)) {
                Some((_, e)) => e * e,
                None => {
                    let scaled = Mat::from_fn(n, n, |i, j| gen[(i, j)] * dt);
                    expm(scaled.as_ref())?
                }
            };
            cache.push((dt, e));
            cache.len() - 1
        };
        let prev = out.last().expect("non-empty");
        let next = matvec(cache[prop].1.as_ref(), prev);
        let (a, b) = (norm_m(prev, &op.masses), norm_m(&next, &op.masses));
        ratios.push(if a > 0.0 { b / a } else { 1.0 });
        if n0 > 0.0 && b > (1.0 + ENERGY_ABORT) * n0 {
            return Err(KinlimError::EnergyViolation { t: w[1], ratio: b / n0 });
        }
        out.push(next);
    }
    Ok((out, ratios))
}

/// Integrates each frequency exactly with the matrix exponential of `(L - iε v ξ)/θ`.
pub fn evolve_kinetic_with_theta(op: &OperatorDisc, eps: f64, theta: f64, h0: &KineticField, t_grid: &[f64]) -> Result<KineticSeries> {
    if t_grid.len() < 2 || t_grid[0] != 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(KinlimError::Config("time grid must start at 0 and increase strictly".into()));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(KinlimError::InvalidParams(format!("theta must be positive, got {theta}")));
    }
    if h0.h_hat.iter().any(|h| h.len() != op.len()) {
        return Err(KinlimError::InvalidParams("initial data does not match the velocity grid".into()));
    }
    let per_xi = h0
        .xi
        .par_iter()
        .zip(&h0.h_hat)
        .map(|(&xi, h)| evolve_one_xi(op, eps, theta, xi, h, t_grid))
        .collect::<Result<Vec<_>>>()?;
    let frames = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| KineticField {
            xi: h0.xi.clone(),
            dxi: h0.dxi.clone(),
            h_hat: per_xi.iter().map(|(s, _)| s[k].clone()).collect(),
            time: h0.time + t,
            eps,
        })
        .collect();
    let step_ratios = (0..t_grid.len() - 1).map(|k| per_xi.iter().map(|(_, r)| r[k]).fold(0.0, f64::max)).collect();
    Ok(KineticSeries { eps, theta, frames, step_ratios })
}

/// As [`evolve_kinetic_with_theta`] with `θ = θ(ε)` of the model.
pub fn evolve_kinetic(op: &OperatorDisc, eps: f64, h0: &KineticField, t_grid: &[f64]) -> Result<KineticSeries> {
    let p = &op.eq.params;
    let theta = scaling_function(p.alpha.value(), p.beta, eps)?;
    evolve_kinetic_with_theta(op, eps, theta, h0, t_grid)
}

/// `r̂_ε(ξ) = Σ_i ĥ(ξ, v_i) M_β(v_i) w_i`.
pub fn weighted_density(field: &KineticField, op: &OperatorDisc) -> MacroField {
    let r_hat = field
        .h_hat
        .iter()
        .map(|h| h.iter().zip(&op.masses).zip(&op.weight_beta).map(|((a, m), b)| a * (m * b)).sum())
        .collect();
    MacroField { xi: field.xi.clone(), r_hat, dxi: field.dxi.clone(), time: field.time }
}

/// Macroscopic solution together with the law that produced it.
#[derive(Debug, Clone)]
pub struct MacroSeries {
    pub zeta: f64,
    pub kappa: f64,
    pub frames: Vec<MacroField>,
}

impl MacroSeries {
    pub fn evolve(r0: &MacroField, zeta: f64, kappa: f64, times: &[f64]) -> Result<Self> {
        Ok(Self { zeta, kappa, frames: evolve_series(r0, kappa, zeta, times)? })
    }
}

/// Weighted error `‖ĥ - r̂‖` over time for one `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorCurve {
    pub eps: f64,
    pub times: Vec<f64>,
    /// `e(t)` per time.
    pub errors: Vec<f64>,
    /// `e(t, ξ)` per time and frequency, for the CSV export.
    pub per_xi: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    /// `(∫₀ᵀ e(t)² dt)^{1/2}` by the trapezoid rule.
    pub integrated: f64,
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// `L²_t H^{-ζ}_ξ L²_v(M_β)` distance between the kinetic solution and the macroscopic profile.
pub fn compare_to_macro(kin: &KineticSeries, mac: &MacroSeries, law: &ScalingLaw, op: &OperatorDisc) -> Result<ErrorCurve> {
    if !same(mac.zeta, law.zeta) || !same(mac.kappa, law.kappa) {
        return Err(KinlimError::RegimeMismatch(format!(
            "macro run carries (zeta, kappa) = ({}, {}), expected ({}, {})",
            mac.zeta, mac.kappa, law.zeta, law.kappa
        )));
    }
    if !same(kin.theta, law.theta(kin.eps)?) {
        return Err(KinlimError::RegimeMismatch(format!("kinetic run used theta = {} at eps = {}", kin.theta, kin.eps)));
    }
    if kin.frames.len() != mac.frames.len()
        || kin.frames.iter().zip(&mac.frames).any(|(a, b)| (a.time - b.time).abs() > 1e-12 * (1.0 + a.time.abs()))
    {
        return Err(KinlimError::Config("kinetic and macroscopic time grids differ".into()));
    }
    let p = &op.eq.params;
    let weight = weight_for(p.alpha.value(), p.beta)?;
    let mut errors = Vec::with_capacity(kin.frames.len());
    let mut per_xi = Vec::with_capacity(kin.frames.len());
    for (kf, mf) in kin.frames.iter().zip(&mac.frames) {
        if kf.xi.len() != mf.xi.len() || kf.xi.iter().zip(&mf.xi).any(|(a, b)| a != b) {
            return Err(KinlimError::Config("kinetic and macroscopic frequency grids differ".into()));
        }
        let mut row = Vec::with_capacity(kf.xi.len());
        let mut total = 0.0;
        for k in 0..kf.xi.len() {
            let r = mf.r_hat[k];
            let d2: f64 = kf.h_hat[k]
                .iter()
                .zip(&op.masses)
                .zip(&op.weight_beta)
                .map(|((h, m), b)| (h - r).norm_sqr() * m * b)
                .sum();
            let w = weight.weight(kf.xi[k], law.zeta)?;
            row.push(w * d2.sqrt());
            total += w * w * d2 * kf.dxi[k];
        }
        errors.push(total.sqrt());
        per_xi.push(row);
    }
    let times = kin.times();
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let integrated = trapezoid(&times, &sq).sqrt();
    Ok(ErrorCurve { eps: kin.eps, times, errors, per_xi, xi: kin.frames[0].xi.clone(), integrated })
}

/// Error versus `ε` with a fitted order.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub eps_list: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln ε`.
    pub order: f64,
    /// Errors strictly decrease along the sweep.
    pub monotone: bool,
    pub regime: Regime,
    pub zeta: f64,
    pub kappa: f64,
}

pub fn convergence_report(curves: &[ErrorCurve], law: &ScalingLaw) -> Result<ConvergenceReport> {
    if curves.len() < 2 {
        return Err(KinlimError::Config("a convergence report needs at least two eps values".into()));
    }
    let eps_list: Vec<f64> = curves.iter().map(|c| c.eps).collect();
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(KinlimError::Config("eps list must be decreasing".into()));
    }
    let errors: Vec<f64> = curves.iter().map(|c| c.integrated).collect();
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(KinlimError::NoConvergence("non-finite error".into()));
    }
    Ok(ConvergenceReport {
        order: log_log_slope(&eps_list, &errors),
        monotone: errors.windows(2).all(|w| w[1] < w[0]),
        eps_list,
        errors,
        regime: law.regime,
        zeta: law.zeta,
        kappa: law.kappa,
    })
}

/// Energy monotonicity and the dissipation budget `∫‖h - r‖²_{-β} ≤ θ‖h(0)‖²/(2λ)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyRecord {
    /// Every step satisfies `‖h_{k+1}‖ ≤ (1 + 1e-10)‖h_k‖`.
    pub monotone: bool,
    pub max_step_ratio: f64,
    pub dissipation: f64,
    pub budget: f64,
    pub lambda: f64,
    pub satisfied: bool,
}

pub fn energy_diagnostics(series: &KineticSeries, op: &OperatorDisc) -> Result<EnergyRecord> {
    let lambda = coercivity_gap(op)?;
    energy_diagnostics_with_gap(series, op, lambda)
}

pub fn energy_diagnostics_with_gap(series: &KineticSeries, op: &OperatorDisc, lambda: f64) -> Result<EnergyRecord> {
    let mb: Vec<f64> = op.masses.iter().zip(&op.weight_beta).map(|(m, b)| m * b).collect();
    let total_mb: f64 = mb.iter().sum();
    let defect = |f: &KineticField| -> f64 {
        f.h_hat
            .iter()
            .zip(&f.dxi)
            .map(|(h, dx)| {
                let r: c64 = h.iter().zip(&mb).map(|(a, w)| a * w).sum::<c64>() / total_mb;
                dx * h.iter().zip(&mb).map(|(a, w)| (a - r).norm_sqr() * w).sum::<f64>()
            })
            .sum()
    };
    let d: Vec<f64> = series.frames.iter().map(defect).collect();
    let dissipation = trapezoid(&series.times(), &d);
    let f0 = &series.frames[0];
    let h0_sq: f64 = f0.h_hat.iter().zip(&f0.dxi).map(|(h, dx)| dx * norm_m(h, &op.masses).powi(2)).sum();
    let budget = series.theta * h0_sq / (2.0 * lambda);
    let max_step_ratio = series.step_ratios.iter().copied().fold(0.0, f64::max);
    Ok(EnergyRecord {
        monotone: max_step_ratio <= 1.0 + 1e-10,
        max_step_ratio,
        dissipation,
        budget,
        lambda,
        satisfied: lambda > 0.0 && dissipation <= budget,
    })
}

/// Fitted decay rate of `|⟨ĥ(t, ξ), φ⟩_M|` against the fluid-mode prediction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeDecay {
    pub fitted: f64,
    /// `μ/(θ Re⟨1, φ⟩)`; equals `μ/θ` when `β = 0`.
    pub predicted: f64,
}

/// `mode` must be computed at `η = ε|ξ|`, `σ = sign ξ`.
pub fn mode_projection_decay(series: &KineticSeries, op: &OperatorDisc, xi_index: usize, mode: &FluidMode) -> Result<ModeDecay> {
    let xi = series.frames[0].xi[xi_index];
    if !same(mode.eta, series.eps * xi.abs()) || mode.sigma != xi.signum() {
        return Err(KinlimError::InvalidParams("fluid mode does not match eps |xi| and sign xi".into()));
    }
    let start = series.frames.len() / 2;
    let (t, y): (Vec<f64>, Vec<f64>) = series.frames[start..]
        .iter()
        .map(|f| (f.time, op.inner(&f.h_hat[xi_index], &mode.phi).norm().ln()))
        .unzip();
    let mt = t.iter().sum::<f64>() / t.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sxy: f64 = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    Ok(ModeDecay { fitted: -sxy / sxx, predicted: mode.mu / (series.theta * mode.moment_one.re) })
}

#[derive(Serialize)]
struct ErrorRow {
    t: f64,
    xi: f64,
    error: f64,
}

/// Writes `(t, xi, error)` rows.
pub fn write_error_csv(curve: &ErrorCurve, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (t, row) in curve.times.iter().zip(&curve.per_xi) {
        for (xi, e) in curve.xi.iter().zip(row) {
            w.serialize(ErrorRow { t: *t, xi: *xi, error: *e })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Single-mode convergence study over an `ε` sweep.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub eps_list: Vec<f64>,
    pub xi0: f64,
    pub t_end: f64,
    pub n_uniform: usize,
    pub n_geometric: usize,
}

impl Default for StudySpec {
    fn default() -> Self {
        Self { eps_list: vec![0.2, 0.1, 0.05, 0.025], xi0: 2.0, t_end: 1.0, n_uniform: 32, n_geometric: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub report: ConvergenceReport,
    pub curves: Vec<ErrorCurve>,
    pub energy: Vec<EnergyRecord>,
}

/// Runs kinetic and macroscopic evolutions from `cos(ξ₀x)` data and compares them under `law`.
pub fn convergence_study(op: &OperatorDisc, law: &ScalingLaw, spec: &StudySpec) -> Result<StudyResult> {
    Ok(convergence_study_multi(op, std::slice::from_ref(law), spec)?.remove(0))
}

/// As [`convergence_study`] for several laws sharing `θ`; the kinetic runs are done once.
pub fn convergence_study_multi(op: &OperatorDisc, laws: &[ScalingLaw], spec: &StudySpec) -> Result<Vec<StudyResult>> {
    let first = laws.first().ok_or_else(|| KinlimError::Config("no scaling law given".into()))?;
    let times = default_time_grid(spec.t_end, spec.n_uniform, spec.n_geometric);
    let r0 = MacroField::single_mode(spec.xi0, 1.0);
    let macs = laws.iter().map(|l| MacroSeries::evolve(&r0, l.zeta, l.kappa, &times)).collect::<Result<Vec<_>>>()?;
    let lambda = coercivity_gap(op)?;
    let mut curves: Vec<Vec<ErrorCurve>> = vec![Vec::new(); laws.len()];
    let mut energy = Vec::new();
    for &eps in &spec.eps_list {
        let h0 = KineticField::well_prepared(&r0, op.len(), eps);
        let series = evolve_kinetic_with_theta(op, eps, first.theta(eps)?, &h0, &times)?;
        for ((law, mac), out) in laws.iter().zip(&macs).zip(curves.iter_mut()) {
            out.push(compare_to_macro(&series, mac, law, op)?);
        }
        energy.push(energy_diagnostics_with_gap(&series, op, lambda)?);
    }
    laws.iter()
        .zip(curves)
        .map(|(law, c)| Ok(StudyResult { report: convergence_report(&c, law)?, curves: c, energy: energy.clone() }))
        .collect()
}
