//! Heavy-tailed equilibria, model parameters and velocity grids.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{KinlimError, Result};
use crate::quad::{integrate, integrate_to_inf, QuadOptions};
use crate::special::{gauss_jacobi, sphere_area, StableDensity};

/// Japanese bracket `⟨v⟩ = sqrt(1 + |v|^2)` of a radius.
#[inline]
pub fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// Tail exponent: finite, or the super-polynomial (Gaussian) case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Alpha::Infinite)
    }

    /// Value as a float, `+inf` for the Gaussian case.
    pub fn value(&self) -> f64 {
        match self {
            Alpha::Finite(a) => *a,
            Alpha::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Finite(a) => s.serialize_f64(*a),
            Alpha::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(a) if a.is_infinite() && a > 0.0 => Ok(Alpha::Infinite),
            Repr::Num(a) => Ok(Alpha::Finite(a)),
            Repr::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" | "gaussian" => Ok(Alpha::Infinite),
                other => other
                    .parse::<f64>()
                    .map(Alpha::Finite)
                    .map_err(|_| serde::de::Error::custom(format!("invalid alpha '{t}'"))),
            },
        }
    }
}

/// Scattering kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `b(v, v') = ν₀ ⟨v⟩^{-β} ⟨v'⟩^{-β}`.
    Product,
    /// `b ≡ ν₀`, requires `β = 0`.
    Constant,
}

/// Collision operator family with its own parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Scattering { nu0: f64, kernel: KernelKind },
    FokkerPlanck,
    LevyFokkerPlanck { s: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Scattering { .. } => "scattering",
            Family::FokkerPlanck => "fokker-planck",
            Family::LevyFokkerPlanck { .. } => "levy-fokker-planck",
        }
    }
}

/// Functional form of the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumShape {
    /// `c_{α,β} ⟨v⟩^{-(d+α)}`, or a Gaussian when `α = ∞`.
    #[default]
    PowerLaw,
    /// Symmetric `2s`-stable density, the exact drift-linear case of the Lévy-Fokker-Planck family.
    StableLaw,
}

/// Single source of truth for a model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub alpha: Alpha,
    pub beta: f64,
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub shape: EquilibriumShape,
}

const PARAM_TOL: f64 = 1e-12;

impl ModelParams {
    /// Scattering model with tail `α`, weight `β` and kernel `kernel`.
    pub fn scattering(d: usize, alpha: f64, beta: f64, nu0: f64, kernel: KernelKind) -> Result<Self> {
        Self {
            d,
            alpha: Alpha::Finite(alpha),
            beta,
            family: Family::Scattering { nu0, kernel },
            shape: EquilibriumShape::PowerLaw,
        }
        .validated()
    }

    /// Fokker-Planck model; `β = 2` is forced.
    pub fn fokker_planck(d: usize, alpha: Alpha) -> Result<Self> {
        Self {
            d,
            alpha,
            beta: 2.0,
            family: Family::FokkerPlanck,
            shape: EquilibriumShape::PowerLaw,
        }
        .validated()
    }

    /// Lévy-Fokker-Planck model with power-law equilibrium; `β = 2s - α` is forced.
    pub fn levy_fokker_planck(d: usize, s: f64, alpha: f64) -> Result<Self> {
        Self {
            d,
            alpha: Alpha::Finite(alpha),
            beta: 2.0 * s - alpha,
            family: Family::LevyFokkerPlanck { s },
            shape: EquilibriumShape::PowerLaw,
        }
        .validated()
    }

    /// Lévy-Fokker-Planck model whose equilibrium is the `2s`-stable density (`α = 2s`, `β = 0`, d = 1).
    pub fn stable_levy(s: f64) -> Result<Self> {
        Self {
            d: 1,
            alpha: Alpha::Finite(2.0 * s),
            beta: 0.0,
            family: Family::LevyFokkerPlanck { s },
            shape: EquilibriumShape::StableLaw,
        }
        .validated()
    }

    /// Checks the admissibility invariants and returns `self`.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KinlimError::InvalidParams(m));
        if self.d == 0 {
            return bad("dimension must be at least 1".into());
        }
        if !self.beta.is_finite() {
            return bad("beta must be finite".into());
        }
        if let Alpha::Finite(a) = self.alpha {
            if !a.is_finite() {
                return bad("alpha must be finite or 'inf'".into());
            }
            if a + self.beta <= 0.0 {
                return bad(format!("alpha + beta = {} must be positive", a + self.beta));
            }
        }
        match self.family {
            Family::Scattering { nu0, kernel } => {
                if !(nu0 > 0.0 && nu0.is_finite()) {
                    return bad(format!("nu0 = {nu0} must be positive"));
                }
                if kernel == KernelKind::Constant && self.beta.abs() > PARAM_TOL {
                    return bad("constant kernel requires beta = 0".into());
                }
            }
            Family::FokkerPlanck => {
                if (self.beta - 2.0).abs() > PARAM_TOL {
                    return bad("Fokker-Planck requires beta = 2".into());
                }
            }
            Family::LevyFokkerPlanck { s } => {
                if !(s > 0.5 && s < 1.0) {
                    return bad(format!("s = {s} must lie in (1/2, 1)"));
                }
                let a = match self.alpha {
                    Alpha::Finite(a) => a,
                    Alpha::Infinite => return bad("Lévy-Fokker-Planck requires a finite alpha".into()),
                };
                if a <= s {
                    return bad(format!("Lévy-Fokker-Planck requires alpha > s (alpha = {a}, s = {s})"));
                }
                if (self.beta - (2.0 * s - a)).abs() > 1e-9 {
                    return bad("Lévy-Fokker-Planck requires beta = 2s - alpha".into());
                }
            }
        }
        if self.shape == EquilibriumShape::StableLaw {
            let ok = match (self.family, self.alpha) {
                (Family::LevyFokkerPlanck { s }, Alpha::Finite(a)) => {
                    self.d == 1 && (a - 2.0 * s).abs() < 1e-9 && self.beta.abs() < 1e-9
                }
                _ => false,
            };
            if !ok {
                return bad("stable-law equilibrium requires d = 1, Lévy-Fokker-Planck, alpha = 2s".into());
            }
        }
        Ok(())
    }

    /// Additional requirement of the macroscopic limit: `α ≥ 0`.
    pub fn require_macro(&self) -> Result<()> {
        match self.alpha {
            Alpha::Finite(a) if a < 0.0 => Err(KinlimError::InvalidParams(format!(
                "macroscopic limit requires alpha >= 0 (alpha = {a})"
            ))),
            _ => Ok(()),
        }
    }
}

/// Radial part of `∫_{R^d} ⟨v⟩^{-d-a} dv` by adaptive quadrature.
fn bracket_integral(d: usize, a: f64) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let df = d as f64;
    let inner = integrate(|r: f64| r.powi(d as i32 - 1) * (1.0 + r * r).powf(-(df + a) / 2.0), 0.0, 1.0, opts)?;
    // On [1, ∞) set r = 1/t, then y = t^a, which removes the endpoint singularity.
    let outer = integrate(
        |y: f64| {
            if y == 0.0 {
                return 1.0 / a;
            }
            let t = y.powf(1.0 / a);
            (1.0 + t * t).powf(-(df + a) / 2.0) / a
        },
        0.0,
        1.0,
        opts,
    )?;
    Ok(sphere_area(d) * (inner.value + outer.value))
}

/// `c_{α,β} = (∫ ⟨v⟩^{-d-α-β} dv)^{-1}`.
pub fn normalization_constant(d: usize, alpha: f64, beta: f64) -> Result<f64> {
    let a = alpha + beta;
    if !(a > 0.0) {
        return Err(KinlimError::DivergentIntegral(format!(
            "∫⟨v⟩^(-d-α-β) diverges for α + β = {a}"
        )));
    }
    if d == 0 {
        return Err(KinlimError::InvalidParams("dimension must be at least 1".into()));
    }
    Ok(1.0 / bracket_integral(d, a)?)
}

#[derive(Debug, Clone, Copy)]
enum EqKind {
    PowerLaw { exponent: f64 },
    Gaussian,
    Stable(StableDensity),
}

/// Equilibrium `M` with its weighted companion `M_β = ⟨v⟩^{-β} M`.
#[derive(Debug, Clone, Copy)]
pub struct Equilibrium {
    pub params: ModelParams,
    /// Normalization prefactor, fixed so that `∫ M_β = 1`.
    pub c_alpha_beta: f64,
    kind: EqKind,
    mass: f64,
}

impl Equilibrium {
    /// Evaluates `M` at radius `r = |v|`.
    #[inline]
    pub fn m_radial(&self, r: f64) -> f64 {
        match self.kind {
            EqKind::PowerLaw { exponent } => self.c_alpha_beta * (1.0 + r * r).powf(-exponent / 2.0),
            EqKind::Gaussian => self.c_alpha_beta * (-0.5 * r * r).exp(),
            EqKind::Stable(p) => p.pdf(r),
        }
    }

    /// `M(v)` for a one-dimensional velocity.
    #[inline]
    pub fn m(&self, v: f64) -> f64 {
        self.m_radial(v.abs())
    }

    /// `M_β(v) = ⟨v⟩^{-β} M(v)` at radius `r`.
    #[inline]
    pub fn m_beta_radial(&self, r: f64) -> f64 {
        bracket(r).powf(-self.params.beta) * self.m_radial(r)
    }

    /// `‖M‖_{L¹}`, infinite when `α ≤ 0`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Constant `K` with `M(v) ~ K |v|^{-d-α}` at infinity, zero for the Gaussian.
    pub fn tail_constant(&self) -> f64 {
        match self.kind {
            EqKind::PowerLaw { .. } => self.c_alpha_beta,
            EqKind::Gaussian => 0.0,
            EqKind::Stable(p) => p.tail_constant(),
        }
    }

    pub fn is_stable_law(&self) -> bool {
        matches!(self.kind, EqKind::Stable(_))
    }

    /// Values of `M` at the grid nodes.
    pub fn on_grid(&self, grid: &VelocityGrid) -> Vec<f64> {
        grid.radius.iter().map(|&r| self.m_radial(r)).collect()
    }

    /// Nodal masses `m_i = M(v_i) w_i`.
    pub fn masses(&self, grid: &VelocityGrid) -> Vec<f64> {
        grid.radius.iter().zip(&grid.weights).map(|(&r, &w)| self.m_radial(r) * w).collect()
    }

    /// `∫_{|v| > R} M_β dv` by adaptive quadrature.
    pub fn tail_mass_beta(&self, radius: f64) -> Result<f64> {
        let d = self.params.d;
        let r = integrate_to_inf(
            |r: f64| r.powi(d as i32 - 1) * self.m_beta_radial(r),
            radius,
            QuadOptions {
                abs_tol: 1e-300,
                rel_tol: 1e-10,
                max_intervals: 4000,
            },
        )?;
        Ok(sphere_area(d) * r.value)
    }
}

/// Builds the equilibrium of a validated model.
pub fn build_equilibrium(params: &ModelParams) -> Result<Equilibrium> {
    params.validate()?;
    let d = params.d;
    match (params.shape, params.alpha) {
        (EquilibriumShape::StableLaw, Alpha::Finite(a)) => Ok(Equilibrium {
            params: *params,
            c_alpha_beta: 1.0,
            kind: EqKind::Stable(StableDensity::new(a)),
            mass: 1.0,
        }),
        (EquilibriumShape::StableLaw, Alpha::Infinite) => {
            Err(KinlimError::InvalidParams("stable law needs a finite alpha".into()))
        }
        (EquilibriumShape::PowerLaw, Alpha::Finite(a)) => {
            let c = normalization_constant(d, a, params.beta)?;
            let mass = if a > 0.0 {
                c / normalization_constant(d, a, 0.0)?
            } else {
                f64::INFINITY
            };
            Ok(Equilibrium {
                params: *params,
                c_alpha_beta: c,
                kind: EqKind::PowerLaw { exponent: d as f64 + a },
                mass,
            })
        }
        (EquilibriumShape::PowerLaw, Alpha::Infinite) => {
            let beta = params.beta;
            let opts = QuadOptions {
                abs_tol: 0.0,
                rel_tol: 1e-13,
                max_intervals: 4000,
            };
            let z = integrate_to_inf(
                |r: f64| r.powi(d as i32 - 1) * bracket(r).powf(-beta) * (-0.5 * r * r).exp(),
                0.0,
                opts,
            )?;
            let c = 1.0 / (sphere_area(d) * z.value);
            let mass = c * (2.0 * PI).powf(d as f64 / 2.0);
            Ok(Equilibrium {
                params: *params,
                c_alpha_beta: c,
                kind: EqKind::Gaussian,
                mass,
            })
        }
    }
}

/// Velocity-grid layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    /// Uniform nodes on `[-vmax, vmax]`.
    Truncated,
    /// `v = L tan(πy/2)` with uniform `y`.
    AlgebraicMap,
    /// `v = L sinh(x)` with uniform `x`: geometric spacing in the tails.
    #[default]
    SinhMap,
}

/// Grid request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub vmax: f64,
    #[serde(default)]
    pub map_kind: MapKind,
    /// Map scale `L`.
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Angular nodes for `d ≥ 2`.
    #[serde(default = "default_angular")]
    pub n_angular: usize,
}

fn default_scale() -> f64 {
    1.0
}

fn default_angular() -> usize {
    16
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 1024,
            vmax: 1e6,
            map_kind: MapKind::SinhMap,
            scale: 1.0,
            n_angular: 16,
        }
    }
}

/// Quadrature nodes and weights in velocity.
///
/// In `d = 1` the nodes are sorted and `faces` holds the interfaces between
/// consecutive nodes. In `d ≥ 2` the nodes form a radial × polar tensor grid
/// and `v·σ = r t` with `t` the cosine of the polar angle.
#[derive(Debug, Clone, Serialize)]
pub struct VelocityGrid {
    pub d: usize,
    pub map_kind: MapKind,
    pub vmax: f64,
    pub scale: f64,
    /// Component `v·σ` (equal to `v` when `d = 1`).
    pub nodes: Vec<f64>,
    /// `|v|` at each node.
    pub radius: Vec<f64>,
    pub weights: Vec<f64>,
    /// Interfaces `v_{i+1/2}` between consecutive nodes (`d = 1` only).
    pub faces: Vec<f64>,
    /// `∫_{|v|>vmax} M_β dv`, filled by [`build_grid`].
    pub tail_estimate: f64,
    /// Radial nodes and angular cosines of the tensor layout (`d ≥ 2`).
    pub radial_nodes: Vec<f64>,
    pub angular_nodes: Vec<f64>,
}

impl VelocityGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the mirror node `-v`.
    pub fn mirror(&self, i: usize) -> usize {
        if self.d == 1 {
            self.len() - 1 - i
        } else {
            let na = self.angular_nodes.len();
            let (ir, ia) = (i / na, i % na);
            ir * na + (na - 1 - ia)
        }
    }

    /// Sum `Σ f(v_i) M(v_i) w_i`.
    pub fn integrate_against(&self, eq: &Equilibrium, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.len()).map(|i| f(i) * eq.m_radial(self.radius[i]) * self.weights[i]).sum()
    }
}

/// One-dimensional symmetric node set on `[-vmax, vmax]` with trapezoid weights in the map variable.
fn line_nodes(n: usize, vmax: f64, map: MapKind, scale: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let last = (n - 1) as f64;
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut faces = vec![0.0; n - 1];
    match map {
        MapKind::Truncated => {
            let h = 2.0 * vmax / last;
            for i in 0..n {
                v[i] = -vmax + h * i as f64;
                w[i] = h;
            }
            for i in 0..n - 1 {
                faces[i] = 0.5 * (v[i] + v[i + 1]);
            }
        }
        MapKind::SinhMap => {
            let xm = (vmax / scale).asinh();
            let dx = 2.0 * xm / last;
            for i in 0..n {
                let x = -xm + dx * i as f64;
                v[i] = scale * x.sinh();
                w[i] = scale * x.cosh() * dx;
            }
            for i in 0..n - 1 {
                faces[i] = scale * (-xm + dx * (i as f64 + 0.5)).sinh();
            }
        }
        MapKind::AlgebraicMap => {
            let ym = 2.0 / PI * (vmax / scale).atan();
            let dy = 2.0 * ym / last;
            for i in 0..n {
                let y = -ym + dy * i as f64;
                let c = (PI * y / 2.0).cos();
                v[i] = scale * (PI * y / 2.0).tan();
                w[i] = scale * PI / 2.0 / (c * c) * dy;
            }
            for i in 0..n - 1 {
                faces[i] = scale * (PI * (-ym + dy * (i as f64 + 0.5)) / 2.0).tan();
            }
        }
    }
    // Exact mirror symmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let a = 0.5 * (v[j] - v[i]);
        v[i] = -a;
        v[j] = a;
        let ww = 0.5 * (w[i] + w[j]);
        w[i] = ww;
        w[j] = ww;
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
    for i in 0..(n - 1) / 2 {
        let j = n - 2 - i;
        let a = 0.5 * (faces[j] - faces[i]);
        faces[i] = -a;
        faces[j] = a;
    }
    if (n - 1) % 2 == 1 {
        faces[(n - 1) / 2] = 0.0;
    }
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    (v, w, faces)
}

/// Builds a symmetric grid for the model's dimension.
pub fn build_grid(params: &ModelParams, spec: &GridSpec) -> Result<VelocityGrid> {
    if spec.n < 16 {
        return Err(KinlimError::Config(format!("grid needs at least 16 nodes, got {}", spec.n)));
    }
    if !(spec.vmax > 1.0 && spec.vmax.is_finite()) {
        return Err(KinlimError::Config(format!("vmax = {} must exceed 1", spec.vmax)));
    }
    if !(spec.scale > 0.0 && spec.scale.is_finite()) {
        return Err(KinlimError::Config("map scale must be positive".into()));
    }
    let d = params.d;
    let mut grid = if d == 1 {
        let (v, w, faces) = line_nodes(spec.n, spec.vmax, spec.map_kind, spec.scale);
        VelocityGrid {
            d,
            map_kind: spec.map_kind,
            vmax: spec.vmax,
            scale: spec.scale,
            radius: v.iter().map(|x| x.abs()).collect(),
            nodes: v,
            weights: w,
            faces,
            tail_estimate: 0.0,
            radial_nodes: Vec::new(),
            angular_nodes: Vec::new(),
        }
    } else {
        if spec.n_angular < 2 || spec.n_angular % 2 == 1 {
            return Err(KinlimError::Config("n_angular must be even and at least 2".into()));
        }
        // Radial nodes: positive half of a symmetric line grid with 2n nodes.
        let (v, w, _) = line_nodes(2 * spec.n, spec.vmax, spec.map_kind, spec.scale);
        let rn: Vec<f64> = v[spec.n..].to_vec();
        let rw: Vec<f64> = w[spec.n..].to_vec();
        let jac = 0.5 * (d as f64 - 3.0);
        let (t, tw) = gauss_jacobi(spec.n_angular, jac, jac);
        let s_low = sphere_area(d - 1);
        let mut nodes = Vec::with_capacity(rn.len() * t.len());
        let mut radius = Vec::with_capacity(nodes.capacity());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (r, wr) in rn.iter().zip(&rw) {
            for (tt, wt) in t.iter().zip(&tw) {
                nodes.push(r * tt);
                radius.push(*r);
                weights.push(wr * r.powi(d as i32 - 1) * wt * s_low);
            }
        }
        VelocityGrid {
            d,
            map_kind: spec.map_kind,
            vmax: spec.vmax,
            scale: spec.scale,
            nodes,
            radius,
            weights,
            faces: Vec::new(),
            tail_estimate: 0.0,
            radial_nodes: rn,
            angular_nodes: t,
        }
    };
    let eq = build_equilibrium(params)?;
    grid.tail_estimate = eq.tail_mass_beta(spec.vmax)?;
    Ok(grid)
}

/// `‖h‖_k = (Σ |h_i|² ⟨v_i⟩^k M_i w_i)^{1/2}`.
pub fn weighted_norm(h: &[Complex64], k: f64, eq: &Equilibrium, grid: &VelocityGrid) -> f64 {
    h.iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * bracket(grid.radius[i]).powf(k) * eq.m_radial(grid.radius[i]) * grid.weights[i])
        .sum::<f64>()
        .sqrt()
}

/// Real-valued variant of [`weighted_norm`].
pub fn weighted_norm_real(h: &[f64], k: f64, eq: &Equilibrium, grid: &VelocityGrid) -> f64 {
    h.iter()
        .enumerate()
        .map(|(i, x)| x * x * bracket(grid.radius[i]).powf(k) * eq.m_radial(grid.radius[i]) * grid.weights[i])
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bracket_integral_closed_form;

    #[test]
    fn normalization_examples() {
        assert!((normalization_constant(1, 2.0, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((normalization_constant(1, 1.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!(matches!(
            normalization_constant(1, 0.5, -0.5),
            Err(KinlimError::DivergentIntegral(_))
        ));
    }

    #[test]
    fn normalization_matches_gamma_formula() {
        for d in 1..=3 {
            for &a in &[0.1, 0.5, 1.0, 2.5, 6.0] {
                let c = normalization_constant(d, a, 0.0).unwrap();
                let exact = 1.0 / bracket_integral_closed_form(d, a);
                assert!((c - exact).abs() < 1e-11 * exact, "d={d} a={a}: {c} vs {exact}");
            }
        }
    }

    #[test]
    fn evenness_and_mass() {
        let p = ModelParams::scattering(1, 2.0, 0.0, 1.0, KernelKind::Product).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        assert_eq!(eq.m(1.0), eq.m(-1.0));
        assert!((eq.m(0.0) - 0.5).abs() < 1e-12);
        assert!((eq.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_case() {
        let p = ModelParams::fokker_planck(1, Alpha::Infinite).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n: 400, vmax: 40.0, ..GridSpec::default() }).unwrap();
        let s: f64 = (0..g.len()).map(|i| eq.m_beta_radial(g.radius[i]) * g.weights[i]).sum();
        assert!((s - 1.0).abs() < 1e-10);
        // Polynomial moments are finite: the 10th moment tail beyond 20 is negligible.
        assert!(eq.m(20.0) * 20f64.powi(10) < 1e-70);
    }

    #[test]
    fn grid_symmetry_and_positivity() {
        let p = ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).unwrap();
        for map in [MapKind::Truncated, MapKind::SinhMap, MapKind::AlgebraicMap] {
            let g = build_grid(&p, &GridSpec { n: 64, vmax: 50.0, map_kind: map, ..GridSpec::default() }).unwrap();
            assert_eq!(g.len(), 64);
            for i in 0..g.len() {
                assert!(g.weights[i] > 0.0);
                assert_eq!(g.nodes[i], -g.nodes[g.mirror(i)]);
                assert_eq!(g.weights[i], g.weights[g.mirror(i)]);
            }
        }
    }

    #[test]
    fn odd_moments_vanish() {
        let p = ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n: 257, ..GridSpec::default() }).unwrap();
        let s = g.integrate_against(&eq, |i| g.nodes[i].powi(3) / (1.0 + g.nodes[i].powi(4)));
        assert!(s.abs() < 1e-15);
    }

    #[test]
    fn sinh_grid_mass_beta() {
        let p = ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n: 512, vmax: 1e6, ..GridSpec::default() }).unwrap();
        let s: f64 = (0..g.len()).map(|i| eq.m_beta_radial(g.radius[i]) * g.weights[i]).sum();
        assert!((s - 1.0).abs() < 1e-8 + g.tail_estimate, "{s}");
    }

    #[test]
    fn weighted_norm_examples() {
        let p = ModelParams::fokker_planck(1, Alpha::Finite(4.0)).unwrap();
        let eq = build_equilibrium(&p).unwrap();
        let g = build_grid(&p, &GridSpec { n: 1024, ..GridSpec::default() }).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); g.len()];
        assert!((weighted_norm(&ones, -2.0, &eq, &g) - 1.0).abs() < 1e-8);
        let zeros = vec![Complex64::new(0.0, 0.0); g.len()];
        assert_eq!(weighted_norm(&zeros, 0.0, &eq, &g), 0.0);
        let vh: Vec<Complex64> = g.nodes.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let got = weighted_norm(&vh, 0.0, &eq, &g);
        // Oracle: ∫ v² c (1+v²)^{-5/2} dv with c = c_{4,2}, by independent quadrature.
        let c = 1.0 / bracket_integral_closed_form(1, 6.0);
        let o = crate::quad::integrate_line(|v| v * v * c * (1.0 + v * v).powf(-2.5), 0.0, QuadOptions::default())
            .unwrap()
            .value
            .sqrt();
        assert!((got - o).abs() < 1e-8 * o, "{got} vs {o}");
    }
}
