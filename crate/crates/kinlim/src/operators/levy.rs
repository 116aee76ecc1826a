//! Lévy-Fokker-Planck operator `ℒf = Δ^s f + ∇·(U f)` with the drift `U`
//! fixed by `Δ^s M + ∇·(UM) = 0`.
//!
//! The fractional Laplacian is discretized in bond form
//! `(Δ_h f)_i = Σ_j a_ij (f_j - f_i)`. Near the singularity a quadratic
//! interpolant is integrated exactly against `|x|^{-1-2s}`; away from it the
//! kernel is integrated against piecewise-linear hats; beyond the grid the data
//! are extended by their boundary value. The mass-weighted bonds `w_i a_ij` are
//! then symmetrized so that the discrete operator is conservative.

use faer::Mat;
use rayon::prelude::*;

use super::{discrete_adjoint, reflect_symmetrize, OperatorDisc};
use crate::equilibria::{bracket, Equilibrium, Family, VelocityGrid};
use crate::error::{KinlimError, Result};
use crate::quad::gauss_legendre;
use crate::special::frac_laplacian_constant;

/// `∫_a^b (hat_near, hat_far)(y) y^{-1-p} dy` for the linear hats attached to the
/// endpoints at distances `a < b` from the evaluation node.
fn hat_weights(a: f64, b: f64, p: f64, gl: &(Vec<f64>, Vec<f64>)) -> (f64, f64) {
    if b < 2.0 * a {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let (mut wn, mut wf) = (0.0, 0.0);
        for (x, w) in gl.0.iter().zip(&gl.1) {
            let y = c + h * x;
            let k = w * h * y.powf(-1.0 - p);
            wn += k * (b - y);
            wf += k * (y - a);
        }
        (wn / (b - a), wf / (b - a))
    } else {
        let j0 = (a.powf(-p) - b.powf(-p)) / p;
        let j1 = (a.powf(1.0 - p) - b.powf(1.0 - p)) / (p - 1.0);
        ((b * j0 - j1) / (b - a), (j1 - a * j0) / (b - a))
    }
}

/// Symmetrized bond weights `c_ij = c_ji` with `(Δ_h f)_i = Σ_j c_ij (f_j - f_i) / w_i`.
pub fn frac_laplacian_bonds(grid: &VelocityGrid, s: f64) -> Result<Mat<f64>> {
    if grid.d != 1 {
        return Err(KinlimError::Unsupported("fractional Laplacian discretization is one-dimensional".into()));
    }
    if !(s > 0.5 && s < 1.0) {
        return Err(KinlimError::InvalidParams(format!("s = {s} must lie in (1/2, 1)")));
    }
    let n = grid.len();
    let v = &grid.nodes;
    let c = frac_laplacian_constant(1, s);
    let p = 2.0 * s;
    let gl = gauss_legendre(10);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut a = vec![0.0; n];
            // Near part on [v_{i-1}, v_{i+1}].
            if i > 0 && i + 1 < n {
                let hp = v[i + 1] - v[i];
                let hm = v[i] - v[i - 1];
                let i1 = (hp.powf(1.0 - p) - hm.powf(1.0 - p)) / (1.0 - p);
                let i2 = (hp.powf(2.0 - p) + hm.powf(2.0 - p)) / (2.0 - p);
                a[i + 1] += c * (i2 + hm * i1) / (hp * (hp + hm));
                a[i - 1] += c * (i2 - hp * i1) / (hm * (hp + hm));
            } else if i + 1 == n {
                // Even reflection across the last node.
                let hm = v[i] - v[i - 1];
                a[i - 1] += 2.0 * c * hm.powf(-p) / (2.0 - p);
            } else {
                let hp = v[1] - v[0];
                a[1] += 2.0 * c * hp.powf(-p) / (2.0 - p);
            }
            // Far part, right of the node.
            for k in (i + 1)..n.saturating_sub(1) {
                let (da, db) = (v[k] - v[i], v[k + 1] - v[i]);
                let (wn, wf) = hat_weights(da, db, p, &gl);
                a[k] += c * wn;
                a[k + 1] += c * wf;
            }
            // Far part, left of the node.
            for k in 0..i.saturating_sub(1) {
                let (da, db) = (v[i] - v[k + 1], v[i] - v[k]);
                let (wn, wf) = hat_weights(da, db, p, &gl);
                a[k + 1] += c * wn;
                a[k] += c * wf;
            }
            // Constant extension beyond the grid.
            if i + 1 < n {
                a[n - 1] += c * (v[n - 1] - v[i]).powf(-p) / p;
            }
            if i > 0 {
                a[0] += c * (v[i] - v[0]).powf(-p) / p;
            }
            a[i] = 0.0;
            a
        })
        .collect();
    let w = &grid.weights;
    let mut bonds = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                bonds[(i, j)] = 0.5 * (w[i] * rows[i][j] + w[j] * rows[j][i]);
            }
        }
    }
    Ok(bonds)
}

/// Applies `Δ_h` given symmetrized bonds.
pub(crate) fn apply_bonds(bonds: &Mat<f64>, w: &[f64], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| (0..n).map(|j| bonds[(i, j)] * (f[j] - f[i])).sum::<f64>() / w[i])
        .collect()
}

/// Assembles `L h = M^{-1} ℒ(M h)`.
///
/// The transport is written in flux form with face fluxes `G_{i+1/2}(h_i + h_{i+1})/2`,
/// where `G` is the discrete antiderivative of `-Δ_h M`. This makes `L 1 = 0`,
/// `mᵀ L = 0` and `Re⟨Lh, h⟩_M = -¼ Σ c_ij (M_i + M_j) |h_i - h_j|²` exact.
pub fn assemble_levy_fp(eq: &Equilibrium, grid: &VelocityGrid, s: f64) -> Result<OperatorDisc> {
    let params = eq.params;
    match params.family {
        Family::LevyFokkerPlanck { s: ps } if (ps - s).abs() < 1e-12 => {}
        _ => return Err(KinlimError::InvalidParams("operator s does not match the model".into())),
    }
    if grid.d != 1 {
        return Err(KinlimError::Unsupported(
            "Lévy-Fokker-Planck discretization is one-dimensional".into(),
        ));
    }
    let n = grid.len();
    let w = &grid.weights;
    let mv = eq.on_grid(grid);
    if mv.iter().any(|&x| !(x > 1e-300)) {
        return Err(KinlimError::NoConvergence(
            "drift solve: equilibrium vanishes numerically on the grid".into(),
        ));
    }
    let m: Vec<f64> = mv.iter().zip(w).map(|(a, b)| a * b).collect();
    let bonds = frac_laplacian_bonds(grid, s)?;
    if (0..n).any(|i| (0..n).any(|j| bonds[(i, j)] < 0.0)) {
        return Err(KinlimError::InvalidParams(
            "grid too irregular: negative fractional Laplacian bond".into(),
        ));
    }
    let lap_m = apply_bonds(&bonds, w, &mv);
    // G_{i+1/2} = G_{i-1/2} - w_i (Δ_h M)_i, G_{1/2} = 0, G_{n+1/2} = 0 up to rounding.
    let mut g = vec![0.0; n + 1];
    for i in 0..n {
        g[i + 1] = g[i] - w[i] * lap_m[i];
    }
    let closure = g[n].abs() / w.iter().zip(&lap_m).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1e-300);
    g[n] = 0.0;
    let mut l = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if j != i {
                let b = bonds[(i, j)];
                l[(i, j)] += b * mv[j] / m[i];
                diag -= b * mv[i] / m[i];
            }
        }
        // Transport fluxes through faces i+1/2 (g[i+1]) and i-1/2 (g[i]).
        diag += (g[i + 1] - g[i]) / (2.0 * m[i]);
        if i + 1 < n {
            l[(i, i + 1)] += g[i + 1] / (2.0 * m[i]);
        }
        if i > 0 {
            l[(i, i - 1)] -= g[i] / (2.0 * m[i]);
        }
        l[(i, i)] += diag;
    }
    reflect_symmetrize(&mut l, grid);
    let adjoint = discrete_adjoint(&l, &m);
    let drift: Vec<f64> = (0..n).map(|i| (g[i] + g[i + 1]) / (2.0 * mv[i])).collect();
    // Residual of the discrete identity Δ_h M + ∇_h·(UM) = 0 relative to |Δ_h M|.
    let scale = lap_m.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let residual = (0..n)
        .map(|i| (lap_m[i] + (g[i + 1] - g[i]) / w[i]).abs())
        .fold(0.0f64, f64::max)
        / scale
        + closure;
    Ok(OperatorDisc {
        family: params.family,
        eq: *eq,
        grid: grid.clone(),
        matrix: l,
        adjoint_matrix: adjoint,
        masses: m,
        weight_beta: grid.radius.iter().map(|&r| bracket(r).powf(-params.beta)).collect(),
        nu: None,
        drift: Some(drift),
        drift_residual: Some(residual),
    })
}
