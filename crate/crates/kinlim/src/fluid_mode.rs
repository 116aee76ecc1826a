//! Fluid mode: the eigenpair of `-L* - iη(v·σ)` against the weight `⟨v⟩^{-β}`
//! branching from `(1, 0)`, its continuation in `η`, and branch diagnostics.

use std::path::Path;

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{bracket, Equilibrium};
use crate::error::{KinlimError, Result};
use crate::extrap::{richardson, Extrapolation};
use crate::linalg::{eigen, inf_norm, Lu};
use crate::operators::OperatorDisc;
use crate::special::sphere_area;
use crate::theory::{regime, theta_of_eta, Regime};

/// Iteration controls of the eigen-solver.
#[derive(Debug, Clone, Copy)]
pub struct ModeOptions {
    /// Relative residual `‖Aφ - μBφ‖ / (‖A‖ ‖φ‖)` at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Two candidates with `|μ₂| ≤ ambiguity · |μ₁|` are rejected as ambiguous.
    pub ambiguity: f64,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 400, ambiguity: 1.01 }
    }
}

/// One point `(η, μ(η), φ_η)` of the branch.
#[derive(Debug, Clone)]
pub struct FluidMode {
    pub eta: f64,
    /// `±1` in one dimension; the first basis vector otherwise.
    pub sigma: f64,
    pub mu: f64,
    pub mu_imag: f64,
    /// Nodal values, normalized by `Σ m_i ⟨v_i⟩^{-β} φ_i = 1`.
    pub phi: Vec<c64>,
    /// `‖(-L* - iη(v·σ) - μ⟨v⟩^{-β})φ‖_β`.
    pub residual: f64,
    /// `⟨1, φ_η⟩ = Σ m_i φ_i`.
    pub moment_one: c64,
    /// `‖φ_η - 1‖_{-β}`.
    pub norm_phi_minus_1: f64,
    /// Next candidate eigenvalue of the pencil.
    pub second_mu: c64,
    pub iterations: usize,
}

/// Row of the branch CSV export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeRecord {
    pub eta: f64,
    pub mu: f64,
    pub mu_over_theta: f64,
    pub residual: f64,
    pub norm_phi_minus_1: f64,
    pub moment_one_re: f64,
    pub moment_one_im: f64,
}

fn pencil(op: &OperatorDisc, eta: f64, sigma: f64) -> Mat<c64> {
    let v = &op.grid.nodes;
    Mat::from_fn(op.len(), op.len(), |i, j| {
        let d = if i == j { c64::new(0.0, -eta * sigma * v[i]) } else { c64::new(0.0, 0.0) };
        c64::new(-op.adjoint_matrix[(i, j)], 0.0) + d
    })
}

fn winner(x: &[c64], y: &[c64], w: &[f64]) -> c64 {
    x.iter().zip(y).zip(w).map(|((a, b), m)| a.conj() * b * *m).sum()
}

/// Orthonormalizes the columns of `x` in `Σ w |·|²`, twice for stability.
fn orthonormalize(x: &mut Mat<c64>, w: &[f64]) -> Result<()> {
    let k = x.ncols();
    for _ in 0..2 {
        for j in 0..k {
            let mut col: Vec<c64> = (0..x.nrows()).map(|i| x[(i, j)]).collect();
            for p in 0..j {
                let q: Vec<c64> = (0..x.nrows()).map(|i| x[(i, p)]).collect();
                let c = winner(&q, &col, w);
                for (a, b) in col.iter_mut().zip(&q) {
                    *a -= c * b;
                }
            }
            let nrm = winner(&col, &col, w).re.sqrt();
            if !(nrm > 0.0 && nrm.is_finite()) {
                return Err(KinlimError::NoConvergence("subspace collapsed".into()));
            }
            for i in 0..x.nrows() {
                x[(i, j)] = col[i] / nrm;
            }
        }
    }
    Ok(())
}

fn is_reflection_symmetric(op: &OperatorDisc) -> bool {
    let n = op.len();
    let mirror: Vec<usize> = (0..n).map(|i| op.grid.mirror(i)).collect();
    let scale = inf_norm(op.adjoint_matrix.as_ref()).max(f64::MIN_POSITIVE);
    (0..n).all(|i| {
        (0..n).all(|j| (op.adjoint_matrix[(i, j)] - op.adjoint_matrix[(mirror[i], mirror[j])]).abs() <= 1e-13 * scale)
    })
}

struct RawMode {
    phi: Vec<c64>,
    candidates: Vec<c64>,
    iterations: usize,
}

fn solve_raw(op: &OperatorDisc, a: &Mat<c64>, guess: Option<&[c64]>, opts: &ModeOptions) -> Result<RawMode> {
    let n = op.len();
    let b = &op.weight_beta;
    let w = &op.masses;
    let lu = Lu::new(a.as_ref())?;
    let anorm = inf_norm(a.as_ref());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v = &op.grid.nodes;
    let mut x = Mat::from_fn(n, 3, |i, j| match j {
        0 => guess.map_or(c64::new(1.0, 0.0), |g| g[i]),
        1 => c64::new(0.0, v[i] / bracket(v[i])),
        _ => c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    });
    orthonormalize(&mut x, w)?;
    let mut last_mu = c64::new(f64::INFINITY, 0.0);
    for it in 1..=opts.max_iter {
        let bx = Mat::from_fn(n, 3, |i, j| x[(i, j)] * b[i]);
        let mut y = lu.solve_mat(bx.as_ref());
        orthonormalize(&mut y, w)?;
        let ay = a * &y;
        let small_a = Mat::from_fn(3, 3, |p, q| (0..n).map(|i| y[(i, p)].conj() * ay[(i, q)] * w[i]).sum::<c64>());
        let small_b = Mat::from_fn(3, 3, |p, q| (0..n).map(|i| y[(i, p)].conj() * y[(i, q)] * b[i] * w[i]).sum::<c64>());
        let c = Lu::new(small_b.as_ref())?.solve_mat(small_a.as_ref());
        let (vals, vecs) = eigen(c.as_ref())?;
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&p, &q| vals[p].norm().total_cmp(&vals[q].norm()));
        x = Mat::from_fn(n, 3, |i, j| (0..3).map(|k| y[(i, k)] * vecs[(k, order[j])]).sum());
        orthonormalize(&mut x, w)?;
        let mu = vals[order[0]];
        let phi: Vec<c64> = (0..n).map(|i| (0..3).map(|k| y[(i, k)] * vecs[(k, order[0])]).sum()).collect();
        let aphi: Vec<c64> = (0..n).map(|i| (0..3).map(|k| ay[(i, k)] * vecs[(k, order[0])]).sum()).collect();
        let r: Vec<c64> = (0..n).map(|i| aphi[i] - mu * b[i] * phi[i]).collect();
        let rel = winner(&r, &r, w).re.sqrt() / (anorm * winner(&phi, &phi, w).re.sqrt());
        let num: c64 = (0..n).map(|i| w[i] * v[i] * phi[i]).sum();
        let den: c64 = (0..n).map(|i| w[i] * b[i] * phi[i]).sum();
        let mu_id = num / den;
        let settled = (mu_id - last_mu).norm() <= 1e-12 * mu_id.norm();
        last_mu = mu_id;
        if it >= 2 && rel <= opts.tol && settled {
            let candidates = order.iter().map(|&k| vals[k]).collect();
            return Ok(RawMode { phi, candidates, iterations: it });
        }
    }
    Err(KinlimError::NoConvergence(format!("fluid mode not converged in {} iterations", opts.max_iter)))
}

/// Solves for the fluid mode at `η` with optional warm start.
pub fn solve_mode_with(
    op: &OperatorDisc,
    eta: f64,
    sigma: f64,
    guess: Option<&[c64]>,
    opts: &ModeOptions,
) -> Result<FluidMode> {
    let (mode, _) = solve_mode_checked(op, eta, sigma, guess, opts, true)?;
    Ok(mode)
}

fn solve_mode_checked(
    op: &OperatorDisc,
    eta: f64,
    sigma: f64,
    guess: Option<&[c64]>,
    opts: &ModeOptions,
    reject_ambiguous: bool,
) -> Result<(FluidMode, Vec<c64>)> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(KinlimError::InvalidParams(format!("eta must be positive, got {eta}")));
    }
    if (sigma.abs() - 1.0).abs() > 1e-12 {
        return Err(KinlimError::InvalidParams("sigma must be a unit vector (+1 or -1)".into()));
    }
    let n = op.len();
    let a = pencil(op, eta, sigma);
    let raw = solve_raw(op, &a, guess, opts)?;
    let (mu1, mu2) = (raw.candidates[0], raw.candidates[1]);
    if reject_ambiguous && mu2.norm() <= opts.ambiguity * mu1.norm() {
        return Err(KinlimError::Ambiguous { mu1: mu1.norm(), mu2: mu2.norm() });
    }
    let b = &op.weight_beta;
    let m = &op.masses;
    let norm_c: c64 = (0..n).map(|i| m[i] * b[i] * raw.phi[i]).sum();
    if !(norm_c.norm() > 1e-300) {
        return Err(KinlimError::NoConvergence("fluid mode orthogonal to the normalization functional".into()));
    }
    let mut phi: Vec<c64> = raw.phi.iter().map(|z| z / norm_c).collect();
    if is_reflection_symmetric(op) {
        // φ(-v) = conj φ(v) holds for the exact mode; enforce it to roundoff.
        let src = phi.clone();
        for i in 0..n {
            phi[i] = 0.5 * (src[i] + src[op.grid.mirror(i)].conj());
        }
    }
    // Summing the equation against M kills L*φ, leaving μ Σ m⟨v⟩^{-β}φ = -iη Σ m (v·σ) φ.
    let v = &op.grid.nodes;
    let mu_c = c64::new(0.0, -eta * sigma) * (0..n).map(|i| m[i] * v[i] * phi[i]).sum::<c64>()
        / (0..n).map(|i| m[i] * b[i] * phi[i]).sum::<c64>();
    let aphi = crate::linalg::matvec(a.as_ref(), &phi);
    let r: Vec<c64> = (0..n).map(|i| aphi[i] - mu_c * b[i] * phi[i]).collect();
    let beta = op.beta();
    let residual = op.norm(&r, beta);
    let moment_one = (0..n).map(|i| m[i] * phi[i]).sum();
    let dev: Vec<c64> = phi.iter().map(|z| z - 1.0).collect();
    let norm_phi_minus_1 = op.norm(&dev, -beta);
    let mode = FluidMode {
        eta,
        sigma,
        mu: mu_c.re,
        mu_imag: mu_c.im,
        phi,
        residual,
        moment_one,
        norm_phi_minus_1,
        second_mu: mu2,
        iterations: raw.iterations,
    };
    Ok((mode, raw.candidates))
}

/// Fluid mode at `η` and direction `σ` with default options.
pub fn solve_mode(op: &OperatorDisc, eta: f64, sigma: f64) -> Result<FluidMode> {
    solve_mode_with(op, eta, sigma, None, &ModeOptions::default())
}

/// Largest `η` among `1/2, 1/4, …` whose two smallest candidates differ by a factor ≥ 10.
pub fn adaptive_eta0(op: &OperatorDisc, sigma: f64) -> Result<f64> {
    let opts = ModeOptions::default();
    let mut eta = 0.5;
    for _ in 0..30 {
        let (_, cand) = solve_mode_checked(op, eta, sigma, None, &opts, false)?;
        if cand[1].norm() >= 10.0 * cand[0].norm() {
            return Ok(eta);
        }
        eta *= 0.5;
    }
    Err(KinlimError::NoConvergence("no eta with a separated fluid eigenvalue".into()))
}

/// Modes along a decreasing geometric `η` sweep with fitted constants.
#[derive(Debug, Clone)]
pub struct ModeBranch {
    pub modes: Vec<FluidMode>,
    /// `Θ(η_k)`.
    pub theta: Vec<f64>,
    /// Bracketing constants `r₀ ≤ μ/Θ ≤ r₁`.
    pub r0: f64,
    pub r1: f64,
    /// Richardson extrapolation of `μ/Θ`.
    pub mu0: Extrapolation,
    /// `max ‖φ_η - 1‖²_{-β} / μ(η)` along the branch.
    pub phi_bound: f64,
    /// `μ` decreases along the sweep.
    pub monotone: bool,
    /// `|⟨φ_k, φ_{k+1}⟩|` in the `M_β` inner product, normalized.
    pub overlaps: Vec<f64>,
    pub ratio: f64,
}

impl ModeBranch {
    pub fn records(&self) -> Vec<ModeRecord> {
        self.modes
            .iter()
            .zip(&self.theta)
            .map(|(m, &t)| ModeRecord {
                eta: m.eta,
                mu: m.mu,
                mu_over_theta: m.mu / t,
                residual: m.residual,
                norm_phi_minus_1: m.norm_phi_minus_1,
                moment_one_re: m.moment_one.re,
                moment_one_im: m.moment_one.im,
            })
            .collect()
    }

    pub fn mu_over_theta(&self) -> Vec<f64> {
        self.modes.iter().zip(&self.theta).map(|(m, t)| m.mu / t).collect()
    }
}

/// Checks that `etas` is non-empty, inside `(0, 1)`, decreasing and geometric; returns the ratio.
pub fn check_sweep(etas: &[f64]) -> Result<f64> {
    if etas.is_empty() {
        return Err(KinlimError::Config("empty eta sweep".into()));
    }
    if etas.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(KinlimError::Config("sweep values must lie in (0, 1)".into()));
    }
    if etas.len() == 1 {
        return Ok(0.5);
    }
    let rho = etas[1] / etas[0];
    if !(rho < 1.0) {
        return Err(KinlimError::Config("sweep must be decreasing".into()));
    }
    if etas.windows(2).any(|w| ((w[1] / w[0]) / rho - 1.0).abs() > 1e-6) {
        return Err(KinlimError::Config("sweep must be geometric".into()));
    }
    Ok(rho)
}

fn overlap(op: &OperatorDisc, a: &[c64], b: &[c64]) -> f64 {
    let w: Vec<f64> = op.masses.iter().zip(&op.weight_beta).map(|(m, b)| m * b).collect();
    winner(a, b, &w).norm() / (winner(a, a, &w).re * winner(b, b, &w).re).sqrt()
}

fn finish_branch(op: &OperatorDisc, modes: Vec<FluidMode>, rho: f64) -> Result<ModeBranch> {
    let p = &op.eq.params;
    let alpha = p.alpha.value();
    let theta = modes.iter().map(|m| theta_of_eta(alpha, p.beta, m.eta)).collect::<Result<Vec<f64>>>()?;
    let q: Vec<f64> = modes.iter().zip(&theta).map(|(m, t)| m.mu / t).collect();
    let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overlaps: Vec<f64> = modes.windows(2).map(|w| overlap(op, &w[0].phi, &w[1].phi)).collect();
    let phi_bound = modes.iter().map(|m| m.norm_phi_minus_1.powi(2) / m.mu).fold(0.0, f64::max);
    let monotone = modes.windows(2).all(|w| w[1].mu < w[0].mu);
    Ok(ModeBranch {
        r0: lo * (1.0 - 1e-3),
        r1: hi * (1.0 + 1e-3),
        mu0: richardson(&q, rho),
        theta,
        phi_bound,
        monotone,
        overlaps,
        modes,
        ratio: rho,
    })
}

/// Sequential continuation along `etas` with warm starts and jump detection.
pub fn trace_branch(op: &OperatorDisc, etas: &[f64], sigma: f64) -> Result<ModeBranch> {
    trace_branch_with(op, etas, sigma, &ModeOptions::default())
}

pub fn trace_branch_with(op: &OperatorDisc, etas: &[f64], sigma: f64, opts: &ModeOptions) -> Result<ModeBranch> {
    let rho = check_sweep(etas)?;
    op.eq.params.require_macro()?;
    let mut modes: Vec<FluidMode> = Vec::with_capacity(etas.len());
    for &eta in etas {
        let guess = modes.last().map(|m| m.phi.as_slice());
        let mode = solve_mode_with(op, eta, sigma, guess, opts)?;
        if let Some(prev) = modes.last() {
            let ov = overlap(op, &prev.phi, &mode.phi);
            if ov < 0.5 {
                return Err(KinlimError::BranchJump { eta, overlap: ov });
            }
        }
        modes.push(mode);
    }
    finish_branch(op, modes, rho)
}

/// Independent solves at every `η` in parallel; no state is shared between solves.
pub fn trace_branch_cold(op: &OperatorDisc, etas: &[f64], sigma: f64) -> Result<ModeBranch> {
    let rho = check_sweep(etas)?;
    op.eq.params.require_macro()?;
    let modes = etas.par_iter().map(|&eta| solve_mode(op, eta, sigma)).collect::<Result<Vec<_>>>()?;
    let branch = finish_branch(op, modes, rho)?;
    if let Some((k, &ov)) = branch.overlaps.iter().enumerate().find(|(_, &o)| o < 0.5) {
        return Err(KinlimError::BranchJump { eta: etas[k + 1], overlap: ov });
    }
    Ok(branch)
}

/// Writes the branch table with the columns of [`ModeRecord`].
pub fn write_branch_csv(branch: &ModeBranch, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in branch.records() {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `Φ_η(u) = φ_η(η^{-1/(1+β)} u)` sampled on a `u` grid.
#[derive(Debug, Clone)]
pub struct RescaledMode {
    pub u: Vec<f64>,
    pub phi: Vec<c64>,
    /// `|u|_η = (η^{2/(1+β)} + |u|²)^{1/2}`.
    pub u_eta: Vec<f64>,
}

/// Four-point Lagrange interpolation on sorted nodes.
fn interpolate(nodes: &[f64], values: &[c64], x: f64) -> c64 {
    let n = nodes.len();
    let k = nodes.partition_point(|&v| v < x).clamp(2, n - 2);
    let idx = [k - 2, k - 1, k, k + 1];
    let mut acc = c64::new(0.0, 0.0);
    for &i in &idx {
        let mut l = 1.0;
        for &j in &idx {
            if i != j {
                l *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        acc += values[i] * l;
    }
    acc
}

/// Rescaled mode on `u_grid` (one-dimensional grids).
pub fn rescaled_mode(mode: &FluidMode, op: &OperatorDisc, u_grid: &[f64]) -> Result<RescaledMode> {
    if op.grid.d != 1 {
        return Err(KinlimError::Unsupported("rescaled mode is sampled on one-dimensional grids".into()));
    }
    let beta = op.beta();
    if !(beta > -1.0) {
        return Err(KinlimError::InvalidParams("rescaling needs beta > -1".into()));
    }
    let scale = mode.eta.powf(-1.0 / (1.0 + beta));
    let nodes = &op.grid.nodes;
    let vlim = nodes[nodes.len() - 1];
    let mut phi = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let v = u * scale;
        if v.abs() > vlim {
            return Err(KinlimError::OutOfRange(format!("u = {u} maps to v = {v:.3e} beyond the grid edge {vlim:.3e}")));
        }
        phi.push(interpolate(nodes, &mode.phi, v));
    }
    let e2 = mode.eta.powf(2.0 / (1.0 + beta));
    Ok(RescaledMode {
        u: u_grid.to_vec(),
        phi,
        u_eta: u_grid.iter().map(|u| (e2 + u * u).sqrt()).collect(),
    })
}

/// Extrapolated `⟨1, φ_η⟩` (or `⟨1, φ_η⟩/|ln η|` when `α = 0`) and its predicted limit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentLimit {
    pub estimate: Extrapolation,
    pub expected: f64,
    /// Successive estimates differ by more than 10 %.
    pub unstable: bool,
}

pub fn mode_moment_limit(branch: &ModeBranch, eq: &Equilibrium) -> Result<MomentLimit> {
    let p = &eq.params;
    let reg = regime(p.alpha.value(), p.beta)?;
    let (q, expected): (Vec<f64>, f64) = if reg == Regime::Alpha0 {
        (
            branch.modes.iter().map(|m| m.moment_one.re / m.eta.ln().abs()).collect(),
            sphere_area(p.d) / (1.0 + p.beta),
        )
    } else {
        (branch.modes.iter().map(|m| m.moment_one.re).collect(), eq.mass())
    };
    let estimate = richardson(&q, branch.ratio);
    let unstable = q.windows(2).last().is_some_and(|w| (w[1] - w[0]).abs() > 0.1 * w[1].abs()) || !estimate.stable;
    Ok(MomentLimit { estimate, expected, unstable })
}
