//! One-dimensional rescaled Fokker-Planck profile:
//! `Φ'' - ((1+α)/u) Φ' + i u Φ = 0` on `u > 0`, `Φ(0) = 1`, `Φ` decaying at infinity.
//!
//! Near the origin `Φ = S + B H` with the Frobenius solutions `S = 1 + Σ a_n u^n (+ C ln u H)`
//! and `H = u^N Σ h_k u^k`, `N = α + 2`. The log term appears when `N ∈ {3, 6}`.
//! `S` and `H` are continued outward by RK4, the decaying solution is integrated
//! backward from a WKB start, and `B` is fixed by a Wronskian match.

use std::f64::consts::FRAC_PI_4;

use faer::c64;

use crate::error::{KinlimError, Result};

const U0: f64 = 0.5;
const U_MATCH: f64 = 6.0;
const U_FAR: f64 = 20.0;
const STEP: f64 = 1e-3;
const SERIES_TERMS: usize = 400;

#[derive(Debug, Clone)]
struct Segment {
    start: f64,
    step: f64,
    phi: Vec<c64>,
    dphi: Vec<c64>,
}

impl Segment {
    fn end(&self) -> f64 {
        self.start + self.step * (self.phi.len() - 1) as f64
    }

    /// Cubic Hermite interpolation of the stored values and slopes.
    fn eval(&self, u: f64) -> (c64, c64) {
        let x = (u - self.start) / self.step;
        let i = (x.floor().max(0.0) as usize).min(self.phi.len() - 2);
        let t = x - i as f64;
        let h = self.step;
        let (p0, p1, m0, m1) = (self.phi[i], self.phi[i + 1], self.dphi[i] * h, self.dphi[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let val = p0 * (2.0 * t3 - 3.0 * t2 + 1.0) + m0 * (t3 - 2.0 * t2 + t) + p1 * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2);
        let der = (p0 * (6.0 * t2 - 6.0 * t) + m0 * (3.0 * t2 - 4.0 * t + 1.0) + p1 * (-6.0 * t2 + 6.0 * t) + m1 * (3.0 * t2 - 2.0 * t)) / h;
        (val, der)
    }
}

/// Solution profile `Φ(u)` for `σ = +1`; `Φ(-u) = conj Φ(u)`.
#[derive(Debug, Clone)]
pub struct FpProfile {
    pub alpha: f64,
    /// Regular series coefficients `a_n` (index = power of `u`).
    a: Vec<c64>,
    /// Second-solution coefficients `h_k`, multiplying `u^{N+k}`.
    h: Vec<c64>,
    big_n: f64,
    /// Coefficient of `ln u · H` in `S`, zero off resonance.
    log_coeff: c64,
    /// Weight of `H` in `Φ`.
    b: c64,
    inner: Segment,
    outer: Segment,
}

fn series_coefficients(alpha: f64) -> Result<(Vec<c64>, Vec<c64>, f64, c64)> {
    let i = c64::new(0.0, 1.0);
    let mut big_n = alpha + 2.0;
    let resonant = [3.0, 6.0].into_iter().find(|&r| (big_n - r).abs() < 1e-10);
    if let Some(r) = resonant {
        big_n = r;
    }
    let mut h = vec![c64::new(0.0, 0.0); SERIES_TERMS];
    h[0] = c64::new(1.0, 0.0);
    for k in (3..SERIES_TERMS).step_by(3) {
        h[k] = -i * h[k - 3] / (k as f64 * (k as f64 + big_n));
    }
    let mut a = vec![c64::new(0.0, 0.0); SERIES_TERMS];
    a[0] = c64::new(1.0, 0.0);
    let mut log_coeff = c64::new(0.0, 0.0);
    let nr = resonant.map(|r| r as usize);
    for n in (3..SERIES_TERMS).step_by(3) {
        let nf = n as f64;
        match nr {
            Some(r) if n == r => {
                log_coeff = -i * a[n - 3] / (big_n * h[0]);
            }
            Some(r) if n > r => {
                a[n] = -(i * a[n - 3] + log_coeff * h[n - r] * (2.0 * nf - big_n)) / (nf * (nf - big_n));
            }
            _ => {
                a[n] = i * a[n - 3] / (nf * (big_n - nf));
            }
        }
    }
    Ok((a, h, big_n, log_coeff))
}

fn rhs(alpha: f64, u: f64, y: [c64; 2]) -> [c64; 2] {
    let i = c64::new(0.0, 1.0);
    [y[1], y[1] * ((1.0 + alpha) / u) - i * u * y[0]]
}

/// Fixed-step RK4 from `u_start` over `steps` steps of signed size `step`.
fn rk4(alpha: f64, y0: [c64; 2], u_start: f64, step: f64, steps: usize) -> Vec<[c64; 2]> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    let add = |y: [c64; 2], k: [c64; 2], s: f64| [y[0] + k[0] * s, y[1] + k[1] * s];
    for j in 0..steps {
        let u = u_start + step * j as f64;
        let k1 = rhs(alpha, u, y);
        let k2 = rhs(alpha, u + 0.5 * step, add(y, k1, 0.5 * step));
        let k3 = rhs(alpha, u + 0.5 * step, add(y, k2, 0.5 * step));
        let k4 = rhs(alpha, u + step, add(y, k3, step));
        for c in 0..2 {
            y[c] += (k1[c] + (k2[c] + k3[c]) * 2.0 + k4[c]) * (step / 6.0);
        }
        out.push(y);
    }
    out
}

/// Log-derivative of the decaying WKB solution at large `u`.
fn wkb_log_derivative(alpha: f64, u: f64) -> c64 {
    -c64::from_polar(1.0, -FRAC_PI_4) * u.sqrt() + (1.0 + 2.0 * alpha) / (4.0 * u)
}

impl FpProfile {
    /// Solves the profile equation for `d = 1` and `α ∈ (0, 4]`.
    pub fn solve(d: usize, alpha: f64) -> Result<Self> {
        if d != 1 {
            return Err(KinlimError::Unsupported("rescaled Fokker-Planck profile is implemented for d = 1".into()));
        }
        if !(alpha > 0.0 && alpha <= 4.0 + 1e-12) {
            return Err(KinlimError::InvalidParams(format!("profile solver needs alpha in (0, 4], got {alpha}")));
        }
        let (a, h, big_n, log_coeff) = series_coefficients(alpha)?;
        let mut prof = FpProfile {
            alpha,
            a,
            h,
            big_n,
            log_coeff,
            b: c64::new(0.0, 0.0),
            inner: Segment { start: U0, step: STEP, phi: vec![], dphi: vec![] },
            outer: Segment { start: U_MATCH, step: STEP, phi: vec![], dphi: vec![] },
        };
        let (s0, ds0) = prof.series_s(U0)?;
        let (h0, dh0) = prof.series_h(U0)?;
        let n_in = ((U_MATCH - U0) / STEP).round() as usize;
        let s_path = rk4(alpha, [s0, ds0], U0, STEP, n_in);
        let h_path = rk4(alpha, [h0, dh0], U0, STEP, n_in);
        let n_out = ((U_FAR - U_MATCH) / STEP).round() as usize;
        let d_start = [c64::new(1.0, 0.0), wkb_log_derivative(alpha, U_FAR)];
        let mut d_path = rk4(alpha, d_start, U_FAR, -STEP, n_out);
        d_path.reverse();
        let wr = |p: [c64; 2], q: [c64; 2]| p[0] * q[1] - p[1] * q[0];
        let dm = d_path[0];
        let w_hd = wr(h_path[n_in], dm);
        if w_hd.norm() == 0.0 || !w_hd.is_finite() {
            return Err(KinlimError::NoConvergence("degenerate Wronskian in profile match".into()));
        }
        let b = -wr(s_path[n_in], dm) / w_hd;
        prof.b = b;
        prof.inner.phi = s_path.iter().zip(&h_path).map(|(s, hh)| s[0] + b * hh[0]).collect();
        prof.inner.dphi = s_path.iter().zip(&h_path).map(|(s, hh)| s[1] + b * hh[1]).collect();
        let k = prof.inner.phi[n_in] / dm[0];
        prof.outer.phi = d_path.iter().map(|y| y[0] * k).collect();
        prof.outer.dphi = d_path.iter().map(|y| y[1] * k).collect();
        if !prof.outer.phi.iter().chain(&prof.inner.phi).all(|z| z.is_finite()) {
            return Err(KinlimError::NoConvergence("non-finite profile values".into()));
        }
        Ok(prof)
    }

    fn series_h(&self, u: f64) -> Result<(c64, c64)> {
        let mut val = c64::new(0.0, 0.0);
        let mut der = c64::new(0.0, 0.0);
        for k in (0..SERIES_TERMS).step_by(3) {
            let p = self.big_n + k as f64;
            let term = self.h[k] * u.powf(p);
            val += term;
            der += term * (p / u);
            if k > 0 && term.norm() < 1e-18 * val.norm() {
                return Ok((val, der));
            }
        }
        Err(KinlimError::NoConvergence(format!("profile series not converged at u = {u}")))
    }

    fn series_s(&self, u: f64) -> Result<(c64, c64)> {
        let mut val = c64::new(0.0, 0.0);
        let mut der = c64::new(0.0, 0.0);
        let mut done = false;
        for n in (0..SERIES_TERMS).step_by(3) {
            let term = self.a[n] * u.powi(n as i32);
            val += term;
            if n > 0 {
                der += term * (n as f64 / u);
            }
            // Past the resonant index, where a coefficient may vanish exactly.
            if n > 6 && term.norm() < 1e-18 * val.norm() {
                done = true;
                break;
            }
        }
        if !done {
            return Err(KinlimError::NoConvergence(format!("profile series not converged at u = {u}")));
        }
        if self.log_coeff.norm() > 0.0 {
            let (hv, hd) = self.series_h(u)?;
            val += self.log_coeff * u.ln() * hv;
            der += self.log_coeff * (hv / u + u.ln() * hd);
        }
        Ok((val, der))
    }

    /// `Φ(u)` and `Φ'(u)` for `u ≥ 0`.
    fn eval_nonneg(&self, u: f64) -> (c64, c64) {
        if u == 0.0 {
            return (c64::new(1.0, 0.0), c64::new(0.0, 0.0));
        }
        if u <= U0 {
            let (s, ds) = self.series_s(u).expect("series converges on [0, U0]");
            let (h, dh) = self.series_h(u).expect("series converges on [0, U0]");
            return (s + self.b * h, ds + self.b * dh);
        }
        if u <= U_MATCH {
            return self.inner.eval(u);
        }
        if u <= self.outer.end() {
            return self.outer.eval(u);
        }
        // WKB continuation beyond the integration window.
        let uf = self.outer.end();
        let n = self.outer.phi.len() - 1;
        let phase = -c64::from_polar(1.0, -FRAC_PI_4) * (2.0 / 3.0) * (u.powf(1.5) - uf.powf(1.5))
            + (1.0 + 2.0 * self.alpha) / 4.0 * (u / uf).ln();
        let val = self.outer.phi[n] * phase.exp();
        (val, val * wkb_log_derivative(self.alpha, u))
    }

    /// `Φ(u)` on the real line for `σ = +1`.
    pub fn eval(&self, u: f64) -> c64 {
        let (v, _) = self.eval_nonneg(u.abs());
        if u < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    /// `Φ'(u)` on the real line for `σ = +1`.
    pub fn derivative(&self, u: f64) -> c64 {
        let (_, d) = self.eval_nonneg(u.abs());
        if u < 0.0 {
            -d.conj()
        } else {
            d
        }
    }

    /// Coefficient `a_3` of `u³` in the regular series (zero at the resonance `α = 1`).
    pub fn cubic_coefficient(&self) -> c64 {
        self.a[3]
    }

    /// Weight of the second Frobenius solution `u^{α+2}(1 + …)`.
    pub fn second_solution_weight(&self) -> c64 {
        self.b
    }

    /// Residual `|Φ'' - ((1+α)/u)Φ' + iuΦ|` at `u` by a centered difference of `Φ'`.
    pub fn residual(&self, u: f64) -> f64 {
        let du = 1e-5 * u.max(1.0);
        let d2 = (self.derivative(u + du) - self.derivative(u - du)) / (2.0 * du);
        let i = c64::new(0.0, 1.0);
        (d2 - self.derivative(u) * ((1.0 + self.alpha) / u) + i * u * self.eval(u)).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_at_origin_and_decaying() {
        for alpha in [0.5, 1.0, 2.0, 4.0] {
            let p = FpProfile::solve(1, alpha).unwrap();
            assert_eq!(p.eval(0.0), c64::new(1.0, 0.0));
            assert!((p.eval(1e-4) - 1.0).norm() < 1e-6);
            assert!(p.eval(25.0).norm() < 1e-8, "alpha={alpha}");
        }
    }

    #[test]
    fn critical_cubic_coefficient() {
        let p = FpProfile::solve(1, 4.0).unwrap();
        assert!((p.cubic_coefficient() - c64::new(0.0, 1.0 / 9.0)).norm() < 1e-15);
        // Off resonance a_3 = i / (3(α - 1)).
        let q = FpProfile::solve(1, 2.5).unwrap();
        assert!((q.cubic_coefficient() - c64::new(0.0, 1.0 / 4.5)).norm() < 1e-15);
    }

    #[test]
    fn ode_residual_small_across_segments() {
        for alpha in [0.3, 1.0, 2.5, 4.0] {
            let p = FpProfile::solve(1, alpha).unwrap();
            for u in [0.1, 0.4, 0.7, 2.0, 5.9, 6.1, 10.0, 19.0, 22.0] {
                let scale = 1.0 + u * p.eval(u).norm() + p.derivative(u).norm() * (1.0 + alpha) / u;
                assert!(p.residual(u) < 1e-5 * scale, "alpha={alpha} u={u}: {}", p.residual(u));
            }
        }
    }

    #[test]
    fn continuous_at_segment_joins() {
        let p = FpProfile::solve(1, 2.0).unwrap();
        for u in [U0, U_MATCH] {
            let l = p.eval(u - 1e-9);
            let r = p.eval(u + 1e-9);
            assert!((l - r).norm() < 1e-7 * l.norm().max(1e-3), "u={u}");
        }
    }

    #[test]
    fn series_matches_direct_integration() {
        // RK4 from the series at u = 0.05 reproduces the series at u = U0.
        let p = FpProfile::solve(1, 1.7).unwrap();
        let (s, ds) = p.series_s(0.05).unwrap();
        let steps = 45_000;
        let path = rk4(1.7, [s, ds], 0.05, (U0 - 0.05) / steps as f64, steps);
        let (s_end, _) = p.series_s(U0).unwrap();
        assert!((path[steps][0] - s_end).norm() < 1e-10);
    }

    #[test]
    fn conjugate_symmetry() {
        let p = FpProfile::solve(1, 3.0).unwrap();
        for u in [0.3, 2.0, 8.0] {
            assert_eq!(p.eval(-u), p.eval(u).conj());
        }
    }

    #[test]
    fn rejects_unsupported_inputs() {
        assert!(matches!(FpProfile::solve(2, 1.0), Err(KinlimError::Unsupported(_))));
        assert!(FpProfile::solve(1, 4.5).is_err());
        assert!(FpProfile::solve(1, 0.0).is_err());
    }
}
