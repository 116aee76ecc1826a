//! Spectral evolution of the fractional heat equation `∂_t r = κ Δ^{ζ/2} r`.

use std::path::Path;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{KinlimError, Result};
use crate::theory::regime;

/// Fourier amplitudes of a macroscopic density along one frequency line.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroField {
    pub xi: Vec<f64>,
    pub r_hat: Vec<c64>,
    /// Quadrature weights `Δξ` attached to the nodes.
    pub dxi: Vec<f64>,
    pub time: f64,
}

impl MacroField {
    pub fn new(xi: Vec<f64>, r_hat: Vec<c64>, dxi: Vec<f64>) -> Result<Self> {
        if xi.len() != r_hat.len() || xi.len() != dxi.len() {
            return Err(KinlimError::InvalidParams("frequency grid, amplitudes and weights differ in length".into()));
        }
        Ok(Self { xi, r_hat, dxi, time: 0.0 })
    }

    /// Samples `f(ξ)` on a frequency grid.
    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn(f64) -> c64) -> Self {
        Self { xi: grid.xi.clone(), r_hat: grid.xi.iter().map(|&x| f(x)).collect(), dxi: grid.dxi.clone(), time: 0.0 }
    }

    /// Centered Gaussian density of variance `var`: `r̂(ξ) = exp(-var ξ²/2)`.
    pub fn gaussian(grid: &FrequencyGrid, var: f64) -> Self {
        Self::from_fn(grid, |x| c64::new((-0.5 * var * x * x).exp(), 0.0))
    }

    /// Real cosine profile `cos(ξ₀ x)` carried by the pair `±ξ₀`, unit weights.
    pub fn single_mode(xi0: f64, amplitude: f64) -> Self {
        Self {
            xi: vec![-xi0, xi0],
            r_hat: vec![c64::new(0.5 * amplitude, 0.0); 2],
            dxi: vec![1.0, 1.0],
            time: 0.0,
        }
    }

    /// Reality symmetry defect `max |r̂(-ξ) - conj r̂(ξ)|` for grids symmetric about zero.
    pub fn reality_defect(&self) -> f64 {
        let n = self.xi.len();
        (0..n).map(|i| (self.r_hat[n - 1 - i] - self.r_hat[i].conj()).norm()).fold(0.0, f64::max)
    }
}

/// Symmetric uniform frequency grid containing `ξ = 0`.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    pub xi: Vec<f64>,
    pub dxi: Vec<f64>,
}

/// `2k + 1` nodes on `[-xi_max, xi_max]`; the spacing is nudged so that no node sits on `|ξ| = 1`.
pub fn frequency_grid(k: usize, xi_max: f64) -> Result<FrequencyGrid> {
    if k == 0 || !(xi_max > 0.0 && xi_max.is_finite()) {
        return Err(KinlimError::Config("frequency grid needs k ≥ 1 and a positive finite xi_max".into()));
    }
    let mut h = xi_max / k as f64;
    let hits_one = |h: f64| {
        let j = (1.0 / h).round();
        j >= 1.0 && j <= k as f64 && (j * h - 1.0).abs() < 1e-3 * h
    };
    if hits_one(h) {
        h *= 1.0 + 0.25 / k as f64;
    }
    debug_assert!(!hits_one(h));
    let xi: Vec<f64> = (0..=2 * k).map(|j| (j as f64 - k as f64) * h).collect();
    let mut dxi = vec![h; xi.len()];
    dxi[0] *= 0.5;
    dxi[2 * k] *= 0.5;
    Ok(FrequencyGrid { xi, dxi })
}

/// Returns `exp(-κ|ξ|^ζ t) r̂₀(ξ)` at time `r0.time + t`.
pub fn evolve_fractional_heat(r0: &MacroField, kappa: f64, zeta: f64, t: f64) -> Result<MacroField> {
    if !(kappa >= 0.0) || !(zeta > 0.0 && zeta <= 2.0) || !(t >= 0.0) {
        return Err(KinlimError::InvalidParams(format!("need kappa ≥ 0, zeta in (0,2], t ≥ 0; got {kappa}, {zeta}, {t}")));
    }
    let r_hat = r0.xi.iter().zip(&r0.r_hat).map(|(&x, &r)| r * (-kappa * x.abs().powf(zeta) * t).exp()).collect();
    Ok(MacroField { xi: r0.xi.clone(), r_hat, dxi: r0.dxi.clone(), time: r0.time + t })
}

/// Snapshots of the macroscopic solution on a time grid.
pub fn evolve_series(r0: &MacroField, kappa: f64, zeta: f64, times: &[f64]) -> Result<Vec<MacroField>> {
    times.iter().map(|&t| evolve_fractional_heat(r0, kappa, zeta, t)).collect()
}

/// Regime factor of the frequency weight `W(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    /// `α > β`.
    Plain,
    /// `α = β`: `|ln(2|ξ|/(1+|ξ|))|^{-1}`.
    Logarithmic,
    /// `0 ≤ α < β`: `(|ξ|/⟨ξ⟩)^p` with `p = (β-α)/(2(1+β))`.
    Power { p: f64 },
}

impl WeightKind {
    pub fn for_model(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(KinlimError::InvalidParams(format!("weight needs alpha ≥ 0, got {alpha}")));
        }
        Ok(if (alpha - beta).abs() <= 1e-12 {
            WeightKind::Logarithmic
        } else if alpha > beta {
            WeightKind::Plain
        } else {
            WeightKind::Power { p: (beta - alpha) / (2.0 * (1.0 + beta)) }
        })
    }

    /// `W(ξ) = ⟨ξ⟩^{-ζ}` times the regime factor; zero where the factor vanishes.
    pub fn weight(&self, xi: f64, zeta: f64) -> Result<f64> {
        let a = xi.abs();
        let base = (1.0 + a * a).powf(-0.5 * zeta);
        let factor = match *self {
            WeightKind::Plain => 1.0,
            WeightKind::Logarithmic => {
                if a == 0.0 {
                    0.0
                } else {
                    let l = (2.0 * a / (1.0 + a)).ln().abs();
                    if l < 1e-12 {
                        return Err(KinlimError::InvalidParams("logarithmic weight is singular at |xi| = 1".into()));
                    }
                    1.0 / l
                }
            }
            WeightKind::Power { p } => {
                if a == 0.0 && p > 0.0 {
                    0.0
                } else {
                    (a / (1.0 + a * a).sqrt()).powf(p)
                }
            }
        };
        Ok(base * factor)
    }
}

/// `(Σ W(ξ)² |r̂(ξ)|² Δξ)^{1/2}`.
pub fn weighted_neg_sobolev_norm(field: &MacroField, zeta: f64, kind: WeightKind) -> Result<f64> {
    let mut acc = 0.0;
    for ((&x, r), &dx) in field.xi.iter().zip(&field.r_hat).zip(&field.dxi) {
        let w = kind.weight(x, zeta)?;
        acc += w * w * r.norm_sqr() * dx;
    }
    Ok(acc.sqrt())
}

#[derive(Serialize)]
struct SnapshotRow {
    xi: f64,
    re: f64,
    im: f64,
}

/// Writes `(xi, re, im)` rows.
pub fn write_snapshot_csv(field: &MacroField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (&xi, r) in field.xi.iter().zip(&field.r_hat) {
        w.serialize(SnapshotRow { xi, re: r.re, im: r.im })?;
    }
    w.flush()?;
    Ok(())
}

/// Frequency weight for the model's regime (`α` must be finite here).
pub fn weight_for(alpha: f64, beta: f64) -> Result<WeightKind> {
    regime(alpha, beta)?;
    if alpha.is_infinite() {
        return Ok(WeightKind::Plain);
    }
    WeightKind::for_model(alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_maps() {
        let g = frequency_grid(20, 5.0).unwrap();
        let r = MacroField::gaussian(&g, 0.7);
        assert_eq!(evolve_fractional_heat(&r, 0.0, 1.3, 2.0).unwrap().r_hat, r.r_hat);
        assert_eq!(evolve_fractional_heat(&r, 0.4, 1.3, 0.0).unwrap().r_hat, r.r_hat);
    }

    #[test]
    fn heat_kernel_variance_growth() {
        let g = frequency_grid(40, 8.0).unwrap();
        let (v0, kappa, t) = (0.5, 0.3, 1.7);
        let out = evolve_fractional_heat(&MacroField::gaussian(&g, v0), kappa, 2.0, t).unwrap();
        let expect = MacroField::gaussian(&g, v0 + 2.0 * kappa * t);
        for (a, b) in out.r_hat.iter().zip(&expect.r_hat) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn grid_avoids_unit_frequency() {
        for (k, xm) in [(10, 10.0), (4, 2.0), (7, 3.5), (100, 1.0)] {
            let g = frequency_grid(k, xm).unwrap();
            assert!(g.xi.iter().all(|x| (x.abs() - 1.0).abs() > 1e-6), "k={k} xm={xm}");
            assert_eq!(g.xi[k], 0.0);
            let w = WeightKind::Logarithmic;
            assert!(weighted_neg_sobolev_norm(&MacroField::gaussian(&g, 1.0), 1.0, w).unwrap().is_finite());
        }
    }

    #[test]
    fn weight_examples() {
        let f = MacroField::new(vec![1.0], vec![c64::new(3.0, 0.0)], vec![1.0]).unwrap();
        assert!((weighted_neg_sobolev_norm(&f, 2.0, WeightKind::Plain).unwrap() - 1.5).abs() < 1e-15);
        assert!(WeightKind::Logarithmic.weight(1.0, 1.0).is_err());
        assert_eq!(WeightKind::Logarithmic.weight(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(WeightKind::Power { p: 0.25 }.weight(0.0, 1.0).unwrap(), 0.0);
        let zero = MacroField::new(vec![0.5, 2.0], vec![c64::new(0.0, 0.0); 2], vec![1.0; 2]).unwrap();
        assert_eq!(weighted_neg_sobolev_norm(&zero, 1.0, WeightKind::Plain).unwrap(), 0.0);
        assert_eq!(WeightKind::for_model(1.0, 1.0).unwrap(), WeightKind::Logarithmic);
        assert_eq!(WeightKind::for_model(2.0, 1.0).unwrap(), WeightKind::Plain);
        assert_eq!(WeightKind::for_model(0.0, 1.0).unwrap(), WeightKind::Power { p: 0.25 });
    }

    #[test]
    fn snapshot_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_snapshot_csv(&MacroField::single_mode(2.0, 1.0), &p).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().next(), Some("xi,re,im"));
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn semigroup_mass_and_decay(kappa in 0.0..3.0f64, zeta in 0.05..2.0f64, t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
            let g = frequency_grid(16, 4.0).unwrap();
            let r0 = MacroField::gaussian(&g, 0.3);
            let a = evolve_fractional_heat(&r0, kappa, zeta, t1 + t2).unwrap();
            let b = evolve_fractional_heat(&evolve_fractional_heat(&r0, kappa, zeta, t1).unwrap(), kappa, zeta, t2).unwrap();
            for ((x, y), xi) in a.r_hat.iter().zip(&b.r_hat).zip(&g.xi) {
                let scale = 1.0 + kappa * xi.abs().powf(zeta) * (t1 + t2);
                prop_assert!((x - y).norm() <= 4e-16 * scale * x.norm());
            }
            prop_assert_eq!(a.r_hat[16], r0.r_hat[16]);
            let c = evolve_fractional_heat(&r0, kappa, zeta, t1).unwrap();
            for (x, y) in a.r_hat.iter().zip(&c.r_hat) {
                prop_assert!(x.norm() <= y.norm());
            }
            prop_assert!(a.reality_defect() == 0.0);
        }
    }
}
