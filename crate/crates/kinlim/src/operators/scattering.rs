//! Linear scattering operator `Lh(v) = ∫ b(v, v') M(v') [h(v') - h(v)] dv'`.

use faer::Mat;

use super::{discrete_adjoint, reflect_symmetrize, CollisionKernel, KernelEval, OperatorDisc};
use crate::equilibria::{bracket, Equilibrium, Family, KernelKind, VelocityGrid};
use crate::error::{KinlimError, Result};

/// Assembles `(Lh)_i = Σ_j b(v_i, v_j) m_j (h_j - h_i)` with `m_j = M(v_j) w_j`.
pub fn assemble_scattering(eq: &Equilibrium, grid: &VelocityGrid, kernel: &CollisionKernel) -> Result<OperatorDisc> {
    if matches!(kernel.kind, KernelEval::Custom(_)) && grid.d != 1 {
        return Err(KinlimError::Unsupported("custom kernels are one-dimensional".into()));
    }
    if matches!(kernel.kind, KernelEval::Constant) && kernel.beta.abs() > 1e-12 {
        return Err(KinlimError::InvalidParams("constant kernel requires beta = 0".into()));
    }
    let n = grid.len();
    let m = eq.masses(grid);
    // Radial kernels see radii, custom kernels the signed one-dimensional velocity.
    let arg: &[f64] = match kernel.kind {
        KernelEval::Custom(_) => &grid.nodes,
        _ => &grid.radius,
    };
    let b = Mat::from_fn(n, n, |i, j| kernel.eval(arg[i], arg[j]));
    let mut nu = vec![0.0; n];
    for i in 0..n {
        nu[i] = (0..n).map(|j| b[(i, j)] * m[j]).sum();
        if !(nu[i] > 0.0) {
            return Err(KinlimError::InvalidParams(format!(
                "inadmissible kernel: collision frequency {} at node {i}",
                nu[i]
            )));
        }
        if (0..n).any(|j| b[(i, j)] < 0.0) {
            return Err(KinlimError::InvalidParams("inadmissible kernel: negative values".into()));
        }
    }
    let mut l = Mat::from_fn(n, n, |i, j| if i == j { b[(i, i)] * m[i] - nu[i] } else { b[(i, j)] * m[j] });
    if grid.d == 1 && !matches!(kernel.kind, KernelEval::Custom(_)) {
        reflect_symmetrize(&mut l, grid);
    }
    let adjoint = discrete_adjoint(&l, &m);
    let family = Family::Scattering {
        nu0: kernel.nu0,
        kernel: match kernel.kind {
            KernelEval::Constant => KernelKind::Constant,
            _ => KernelKind::Product,
        },
    };
    Ok(OperatorDisc {
        family,
        eq: *eq,
        grid: grid.clone(),
        matrix: l,
        adjoint_matrix: adjoint,
        masses: m,
        weight_beta: grid.radius.iter().map(|&r| bracket(r).powf(-eq.params.beta)).collect(),
        nu: Some(nu),
        drift: None,
        drift_residual: None,
    })
}

/// Spot check of `‖b(v, ·)‖_β ⟨v⟩^β` on a sample of nodes; bounded for admissible kernels.
pub fn kernel_bound_ratio(kernel: &CollisionKernel, eq: &Equilibrium, grid: &VelocityGrid, samples: &[usize]) -> Vec<f64> {
    let beta = kernel.beta;
    let arg: &[f64] = match kernel.kind {
        KernelEval::Custom(_) => &grid.nodes,
        _ => &grid.radius,
    };
    samples
        .iter()
        .map(|&i| {
            let s: f64 = (0..grid.len())
                .map(|j| kernel.eval(arg[i], arg[j]).powi(2) * bracket(grid.radius[j]).powf(beta) * eq.m_radial(grid.radius[j]) * grid.weights[j])
                .sum();
            s.sqrt() * bracket(grid.radius[i]).powf(beta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{build_equilibrium, build_grid, GridSpec, KernelKind, ModelParams};
    use faer::c64;

    fn setup(alpha: f64, beta: f64, kernel: KernelKind, n: usize) -> OperatorDisc {
        let p = ModelParams::scattering(1, alpha, beta, 1.5, kernel).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n, vmax: 1e4, ..GridSpec::default() }).unwrap();
        assemble_scattering(&eq, &g, &CollisionKernel::from_params(&p).unwrap()).unwrap()
    }

    #[test]
    fn product_kernel_frequency() {
        let op = setup(1.0, 1.0, KernelKind::Product, 200);
        let nu = op.nu.as_ref().unwrap();
        // ν(v) = ν₀⟨v⟩^{-β} Σ_j ⟨v_j⟩^{-β} m_j.
        let integral: f64 = (0..op.len()).map(|j| op.weight_beta[j] * op.masses[j]).sum();
        for i in [0, 50, 100, 199] {
            let exact = 1.5 * op.weight_beta[i] * integral;
            assert!((nu[i] - exact).abs() < 1e-13 * exact);
        }
        // ∫⟨v'⟩^{-β} M dv' = ∫M_β = 1 up to truncation.
        assert!((integral - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_kernel_matches_dense_oracle() {
        let op = setup(2.0, 0.0, KernelKind::Constant, 64);
        let h: Vec<c64> = op.grid.nodes.iter().map(|&v| c64::new((v / 3.0).tanh(), 1.0 / (1.0 + v * v))).collect();
        let lh = op.apply(&h);
        let total: f64 = op.masses.iter().sum();
        let mean: c64 = h.iter().zip(&op.masses).map(|(a, m)| a * *m).sum();
        for i in 0..op.len() {
            let exact = (mean - h[i] * total) * 1.5;
            assert!((lh[i] - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn constants_in_kernel_and_mass_conserved() {
        let op = setup(1.0, 1.0, KernelKind::Product, 128);
        let d = op.diagnostics(20, 3);
        assert!(d.null_residual < 1e-13 * d.matrix_norm);
        assert!(d.adjoint_null_residual < 1e-13 * d.matrix_norm);
        assert!(d.mass_defect < 1e-13);
        assert!(d.adjoint_defect < 1e-13);
        assert!(d.max_dissipation <= 1e-15);
    }

    #[test]
    fn custom_kernel_nonconservative_detected() {
        let p = ModelParams::scattering(1, 1.0, 0.0, 1.0, KernelKind::Product).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n: 64, vmax: 1e3, ..GridSpec::default() }).unwrap();
        // b(v, v') = 1 + tanh(v'): ∫[b(v,v') - b(v',v)]M(v')dv' ≠ 0.
        let k = CollisionKernel::custom(0.0, |_, w: f64| 1.0 + w.tanh());
        let op = assemble_scattering(&eq, &g, &k).unwrap();
        let dgn = op.diagnostics(5, 1);
        assert!(dgn.null_residual < 1e-13);
        assert!(dgn.adjoint_null_residual > 1e-3);
    }

    #[test]
    fn kernel_bound_ratio_bounded() {
        let p = ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n: 128, vmax: 1e4, ..GridSpec::default() }).unwrap();
        let k = CollisionKernel::from_params(&p).unwrap();
        let r = kernel_bound_ratio(&k, &eq, &g, &[0, 32, 64, 127]);
        let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo < 1.0 + 1e-12);
    }
}
