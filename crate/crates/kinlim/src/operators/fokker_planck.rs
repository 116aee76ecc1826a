//! Fokker-Planck operator `Lh = M^{-1} ∇·(M ∇h)` in conservative flux form.

use faer::Mat;

use super::{discrete_adjoint, reflect_symmetrize, OperatorDisc};
use crate::equilibria::{bracket, Equilibrium, Family, VelocityGrid};
use crate::error::{KinlimError, Result};

/// Assembles `(Lh)_i = (F_{i+1/2} - F_{i-1/2}) / m_i` with face fluxes
/// `F_{i+1/2} = M(v_{i+1/2}) (h_{i+1} - h_i) / (v_{i+1} - v_i)` and no flux
/// through the outer faces.
pub fn assemble_fokker_planck(eq: &Equilibrium, grid: &VelocityGrid) -> Result<OperatorDisc> {
    if (eq.params.beta - 2.0).abs() > 1e-12 {
        return Err(KinlimError::InvalidParams("Fokker-Planck requires beta = 2".into()));
    }
    if grid.d != 1 {
        return Err(KinlimError::Unsupported(
            "Fokker-Planck discretization is one-dimensional".into(),
        ));
    }
    let n = grid.len();
    let v = &grid.nodes;
    let m = eq.masses(grid);
    // Face conductances M(v_{i+1/2}) / (v_{i+1} - v_i).
    let k: Vec<f64> = (0..n - 1).map(|i| eq.m(grid.faces[i]) / (v[i + 1] - v[i])).collect();
    let mut l = Mat::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        l[(i, i + 1)] += k[i] / m[i];
        l[(i, i)] -= k[i] / m[i];
        l[(i + 1, i)] += k[i] / m[i + 1];
        l[(i + 1, i + 1)] -= k[i] / m[i + 1];
    }
    reflect_symmetrize(&mut l, grid);
    let adjoint = discrete_adjoint(&l, &m);
    Ok(OperatorDisc {
        family: Family::FokkerPlanck,
        eq: *eq,
        grid: grid.clone(),
        matrix: l,
        adjoint_matrix: adjoint,
        masses: m,
        weight_beta: grid.radius.iter().map(|&r| bracket(r).powf(-2.0)).collect(),
        nu: None,
        drift: None,
        drift_residual: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{build_equilibrium, build_grid, Alpha, GridSpec, MapKind, ModelParams};
    use faer::c64;

    fn setup(alpha: f64, spec: GridSpec) -> OperatorDisc {
        let p = ModelParams::fokker_planck(1, Alpha::Finite(alpha)).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &spec).unwrap();
        assemble_fokker_planck(&eq, &g).unwrap()
    }

    #[test]
    fn self_adjoint_and_dissipative() {
        let op = setup(1.0, GridSpec { n: 200, vmax: 1e4, ..GridSpec::default() });
        let d = op.diagnostics(20, 11);
        assert!(d.null_residual < 1e-12 * d.matrix_norm, "{d:?}");
        assert!(d.adjoint_null_residual < 1e-12 * d.matrix_norm, "{d:?}");
        assert!(d.max_dissipation <= 0.0);
        let diff = (0..op.len())
            .flat_map(|i| (0..op.len()).map(move |j| (i, j)))
            .map(|(i, j)| (op.matrix[(i, j)] - op.adjoint_matrix[(i, j)]).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12 * d.matrix_norm);
    }

    #[test]
    fn dirichlet_form_identity() {
        // ⟨Lh, h⟩_M = -Σ_faces M_f (h_{i+1} - h_i)² / Δv, a discrete -∫|∇h|²M.
        let op = setup(4.0, GridSpec { n: 100, vmax: 100.0, ..GridSpec::default() });
        let h: Vec<c64> = op.grid.nodes.iter().map(|&v| c64::new((v / 5.0).sin(), 0.0)).collect();
        let lhs = op.inner(&op.apply(&h), &h).re;
        let v = &op.grid.nodes;
        let rhs: f64 = -(0..op.len() - 1)
            .map(|i| op.eq.m(op.grid.faces[i]) * (h[i + 1].re - h[i].re).powi(2) / (v[i + 1] - v[i]))
            .sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn matches_symbolic_operator_on_v() {
        // L v = -(d+α) v ⟨v⟩^{-2} for d = 1, α = 4: M'/M = -(1+α) v/⟨v⟩².
        let op = setup(4.0, GridSpec { n: 801, vmax: 20.0, map_kind: MapKind::Truncated, ..GridSpec::default() });
        let h: Vec<c64> = op.grid.nodes.iter().map(|&v| c64::new(v, 0.0)).collect();
        let lh = op.apply(&h);
        for i in (100..700).step_by(50) {
            let v = op.grid.nodes[i];
            let exact = -5.0 * v / (1.0 + v * v);
            assert!((lh[i].re - exact).abs() < 2e-3 * exact.abs().max(0.1), "v={v}: {} vs {exact}", lh[i].re);
        }
    }
}
