//! Matrix discretizations of the collision operators acting on `h = f/M`,
//! their `L²(M)` adjoints, and the numerical checks of coercivity and
//! large-velocity amplitude.

mod fokker_planck;
mod levy;
mod scattering;

use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibria::{bracket, build_equilibrium, build_grid, weighted_norm, Equilibrium, Family, GridSpec, KernelKind, ModelParams, VelocityGrid};
use crate::error::{KinlimError, Result};
use crate::linalg::{inf_norm, matvec_real, sym_eigen};

pub use fokker_planck::assemble_fokker_planck;
pub use levy::{assemble_levy_fp, frac_laplacian_bonds};
pub use scattering::{assemble_scattering, kernel_bound_ratio};

/// Scattering kernel `b(v, v')` in terms of the radii `|v|`, `|v'|` (or the
/// velocities themselves for custom kernels in `d = 1`).
#[derive(Clone)]
pub enum KernelEval {
    Product,
    Constant,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for KernelEval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelEval::Product => write!(f, "Product"),
            KernelEval::Constant => write!(f, "Constant"),
            KernelEval::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Collision kernel of the scattering operator.
#[derive(Debug, Clone)]
pub struct CollisionKernel {
    pub kind: KernelEval,
    pub beta: f64,
    pub nu0: f64,
}

impl CollisionKernel {
    /// Kernel matching a scattering model's parameters.
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        match params.family {
            Family::Scattering { nu0, kernel } => Ok(Self {
                kind: match kernel {
                    KernelKind::Product => KernelEval::Product,
                    KernelKind::Constant => KernelEval::Constant,
                },
                beta: params.beta,
                nu0,
            }),
            _ => Err(KinlimError::InvalidParams("collision kernel needs a scattering model".into())),
        }
    }

    /// User-supplied kernel on one-dimensional velocities.
    pub fn custom(beta: f64, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: KernelEval::Custom(Arc::new(f)),
            beta,
            nu0: 1.0,
        }
    }

    /// `b(v, v')`; for the radial kernels `v` and `v'` may be radii or signed velocities.
    #[inline]
    pub fn eval(&self, v: f64, w: f64) -> f64 {
        match &self.kind {
            KernelEval::Product => self.nu0 * bracket(v).powf(-self.beta) * bracket(w).powf(-self.beta),
            KernelEval::Constant => self.nu0,
            KernelEval::Custom(f) => f(v, w),
        }
    }
}

/// Discretized collision operator with its `L²(M)` adjoint.
///
/// Both matrices are real. `masses[i] = M(v_i) w_i` define the discrete
/// inner product `⟨h, g⟩_M = Σ m_i h_i conj(g_i)`.
#[derive(Debug, Clone)]
pub struct OperatorDisc {
    pub family: Family,
    pub eq: Equilibrium,
    pub grid: VelocityGrid,
    pub matrix: Mat<f64>,
    pub adjoint_matrix: Mat<f64>,
    pub masses: Vec<f64>,
    /// `⟨v_i⟩^{-β}`.
    pub weight_beta: Vec<f64>,
    /// Collision frequency `ν(v_i)` (scattering only).
    pub nu: Option<Vec<f64>>,
    /// Nodal drift `U(v_i)` (Lévy-Fokker-Planck only).
    pub drift: Option<Vec<f64>>,
    /// `max |Δ^s M + ∇·(UM)|` on the grid (Lévy-Fokker-Planck only).
    pub drift_residual: Option<f64>,
}

/// Null-space, adjoint and dissipativity checks of an assembled operator.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorDiagnostics {
    pub family: String,
    pub n: usize,
    pub matrix_norm: f64,
    /// `‖L 1‖_β`.
    pub null_residual: f64,
    /// `‖L* 1‖_β`.
    pub adjoint_null_residual: f64,
    /// `max |⟨Lh, g⟩_M - ⟨h, L* g⟩_M| / (‖h‖ ‖g‖)` over random pairs.
    pub adjoint_defect: f64,
    /// `max Re⟨Lh, h⟩_M / ‖h‖²` over random vectors; non-positive when dissipative.
    pub max_dissipation: f64,
    /// `max |Σ (Lh)_i m_i| / ‖h‖` over random vectors.
    pub mass_defect: f64,
}

impl OperatorDisc {
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn apply(&self, h: &[c64]) -> Vec<c64> {
        matvec_real(self.matrix.as_ref(), h)
    }

    pub fn apply_adjoint(&self, h: &[c64]) -> Vec<c64> {
        matvec_real(self.adjoint_matrix.as_ref(), h)
    }

    /// `⟨h, g⟩_M`.
    pub fn inner(&self, h: &[c64], g: &[c64]) -> c64 {
        h.iter().zip(g).zip(&self.masses).map(|((a, b), m)| a * b.conj() * *m).sum()
    }

    /// Weighted norm `‖h‖_k`.
    pub fn norm(&self, h: &[c64], k: f64) -> f64 {
        weighted_norm(h, k, &self.eq, &self.grid)
    }

    pub fn beta(&self) -> f64 {
        self.eq.params.beta
    }

    /// Runs the structural checks with `samples` random vectors from a fixed seed.
    pub fn diagnostics(&self, samples: usize, seed: u64) -> OperatorDiagnostics {
        let n = self.len();
        let beta = self.beta();
        let ones = vec![c64::new(1.0, 0.0); n];
        let null_residual = self.norm(&self.apply(&ones), beta);
        let adjoint_null_residual = self.norm(&self.apply_adjoint(&ones), beta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<c64> {
            (0..n).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
        };
        let mut adjoint_defect: f64 = 0.0;
        let mut max_dissipation = f64::NEG_INFINITY;
        let mut mass_defect: f64 = 0.0;
        for _ in 0..samples {
            let h = draw(&mut rng);
            let g = draw(&mut rng);
            let lh = self.apply(&h);
            let lsg = self.apply_adjoint(&g);
            let nh = self.norm(&h, 0.0);
            let ng = self.norm(&g, 0.0);
            let d = (self.inner(&lh, &g) - self.inner(&h, &lsg)).norm() / (nh * ng);
            adjoint_defect = adjoint_defect.max(d);
            max_dissipation = max_dissipation.max(self.inner(&lh, &h).re / (nh * nh));
            let total: c64 = lh.iter().zip(&self.masses).map(|(a, m)| a * *m).sum();
            mass_defect = mass_defect.max(total.norm() / nh);
        }
        OperatorDiagnostics {
            family: self.family.name().to_string(),
            n,
            matrix_norm: inf_norm(self.matrix.as_ref()),
            null_residual,
            adjoint_null_residual,
            adjoint_defect,
            max_dissipation,
            mass_defect,
        }
    }
}

/// Builds equilibrium, grid and operator for a model.
pub fn assemble(params: &ModelParams, spec: &GridSpec) -> Result<OperatorDisc> {
    let eq = build_equilibrium(params)?;
    let grid = build_grid(params, spec)?;
    match params.family {
        Family::Scattering { .. } => assemble_scattering(&eq, &grid, &CollisionKernel::from_params(params)?),
        Family::FokkerPlanck => assemble_fokker_planck(&eq, &grid),
        Family::LevyFokkerPlanck { s } => assemble_levy_fp(&eq, &grid, s),
    }
}

/// Discrete adjoint `L* = m^{-1} Lᵀ m` in `L²(M)`.
pub(crate) fn discrete_adjoint(l: &Mat<f64>, m: &[f64]) -> Mat<f64> {
    let n = m.len();
    Mat::from_fn(n, n, |i, j| l[(j, i)] * m[j] / m[i])
}

/// Averages `L` with its conjugation by the reflection `v ↦ -v`.
pub(crate) fn reflect_symmetrize(l: &mut Mat<f64>, grid: &VelocityGrid) {
    let n = l.nrows();
    let mirror: Vec<usize> = (0..n).map(|i| grid.mirror(i)).collect();
    let src = l.clone();
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = 0.5 * (src[(i, j)] + src[(mirror[i], mirror[j])]);
        }
    }
}

/// Smallest eigenvalue of the symmetric part of `-⟨v⟩^{β/2} L ⟨v⟩^{β/2}` on the
/// `L²(M)`-orthogonal complement of `⟨v⟩^{-β/2}`.
pub fn coercivity_gap(op: &OperatorDisc) -> Result<f64> {
    let n = op.len();
    let beta = op.beta();
    let sq: Vec<f64> = op.masses.iter().map(|m| m.sqrt()).collect();
    let dw: Vec<f64> = op.grid.radius.iter().map(|&r| bracket(r).powf(beta / 2.0)).collect();
    let k = |i: usize, j: usize| -sq[i] * dw[i] * op.matrix[(i, j)] * dw[j] / sq[j];
    let mut s = Mat::from_fn(n, n, |i, j| 0.5 * (k(i, j) + k(j, i)));
    let q: Vec<f64> = (0..n).map(|i| sq[i] / dw[i]).collect();
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let shift = 2.0 * inf_norm(s.as_ref()) + 1.0;
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] += shift * q[i] * q[j] / (qn * qn);
        }
    }
    let (vals, _) = sym_eigen(s.as_ref())?;
    let lambda = vals[0];
    if !lambda.is_finite() {
        return Err(KinlimError::NoConvergence("coercivity gap is not finite".into()));
    }
    Ok(lambda)
}

/// Fixed smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, quintic smoothstep between.
pub fn cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let x = 2.0 - r;
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// `‖L(χ(·/R))‖_β` for each radius in `radii`.
pub fn large_v_amplitude(op: &OperatorDisc, radii: &[f64]) -> Result<Vec<f64>> {
    let beta = op.beta();
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) || 2.0 * r > op.grid.vmax {
                return Err(KinlimError::OutOfRange(format!(
                    "cutoff radius {r} needs 2R <= vmax = {}",
                    op.grid.vmax
                )));
            }
            let chi: Vec<c64> = op.grid.radius.iter().map(|&v| c64::new(cutoff(v / r), 0.0)).collect();
            Ok(op.norm(&op.apply(&chi), beta))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
