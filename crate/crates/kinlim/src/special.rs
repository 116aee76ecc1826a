//! Special functions: gamma wrappers, sphere areas, the fractional Laplacian
//! constant and the symmetric stable density.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::quad::{integrate, QuadOptions};

/// Euler gamma function, valid for non-integer negative arguments.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Surface area `|S^{d-1}|` of the unit sphere in dimension `d` (2 for d = 1).
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Constant `C_{d,s} = 4^s Γ(d/2+s) / (π^{d/2} |Γ(-s)|)` of the singular-integral
/// form of the fractional Laplacian.
pub fn frac_laplacian_constant(d: usize, s: f64) -> f64 {
    let h = d as f64 / 2.0;
    4f64.powf(s) * gamma(h + s) / (PI.powf(h) * gamma(-s).abs())
}

/// Closed form of `∫_{R^d} ⟨v⟩^{-d-a} dv` for `a > 0`.
pub fn bracket_integral_closed_form(d: usize, a: f64) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() + ln_gamma(a / 2.0) - ln_gamma(h + a / 2.0)).exp()
}

/// Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]` (Golub-Welsch).
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = faer::Mat::<f64>::zeros(n, n);
    let ab = a + b;
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        j[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let off2 = if k == 0 {
                4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0).powi(2) * (ab + 3.0))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + ab)
                    / ((2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0))
            };
            j[(k, k + 1)] = off2.sqrt();
            j[(k + 1, k)] = off2.sqrt();
        }
    }
    let mu0 = (ab + 1.0).exp2() * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
    let evd = j.self_adjoint_eigen(faer::Side::Lower).expect("tridiagonal eigensolve");
    let mut x: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    let mut w: Vec<f64> = (0..n).map(|i| mu0 * evd.U()[(0, i)].powi(2)).collect();
    // Enforce exact symmetry when the weight is even.
    if (a - b).abs() < 1e-15 {
        for i in 0..n / 2 {
            let k = n - 1 - i;
            let xs = 0.5 * (x[k] - x[i]);
            x[i] = -xs;
            x[k] = xs;
            let ws = 0.5 * (w[i] + w[k]);
            w[i] = ws;
            w[k] = ws;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
    }
    (x, w)
}

/// Switch point to the asymptotic series; the Zolotarev integrand becomes too
/// concentrated for adaptive quadrature beyond a few hundred.
const TAIL_START: f64 = 100.0;

/// Symmetric `a`-stable density with characteristic function `exp(-|ξ|^a)`, `a ∈ (1, 2)`.
///
/// Uses the convergent power series near the origin, the Zolotarev integral
/// representation at moderate range and the asymptotic tail series far out.
#[derive(Debug, Clone, Copy)]
pub struct StableDensity {
    a: f64,
}

impl StableDensity {
    pub fn new(a: f64) -> Self {
        assert!(a > 1.0 && a < 2.0, "stable index must lie in (1, 2)");
        Self { a }
    }

    pub fn index(&self) -> f64 {
        self.a
    }

    /// Tail constant `K` with `p(x) ~ K |x|^{-1-a}`.
    pub fn tail_constant(&self) -> f64 {
        gamma(1.0 + self.a) * (PI * self.a / 2.0).sin() / PI
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= 2.0 {
            self.series(x)
        } else if x < TAIL_START {
            self.zolotarev(x)
        } else {
            self.tail(x)
        }
    }

    fn series(&self, x: f64) -> f64 {
        let a = self.a;
        let x2 = x * x;
        let mut sum = 0.0;
        let mut xpow = 1.0;
        let mut fact = 1.0;
        for k in 0..200usize {
            let kf = k as f64;
            if k > 0 {
                fact *= (2.0 * kf - 1.0) * (2.0 * kf);
                xpow *= x2;
            }
            let term = gamma((2.0 * kf + 1.0) / a) / fact * xpow;
            let signed = if k % 2 == 0 { term } else { -term };
            sum += signed;
            if k > 4 && term < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (PI * a)
    }

    fn zolotarev(&self, x: f64) -> f64 {
        let a = self.a;
        let e = a / (a - 1.0);
        let scale = x.powf(e);
        let v = |t: f64| -> f64 {
            let c = t.cos();
            let sa = (a * t).sin();
            if c <= 0.0 || sa <= 0.0 {
                return 0.0;
            }
            (c / sa).powf(e) * ((a - 1.0) * t).cos() / c
        };
        let f = |t: f64| {
            let vt = v(t);
            let z = scale * vt;
            if z > 700.0 {
                0.0
            } else {
                vt * (-z).exp()
            }
        };
        let r = integrate(
            f,
            0.0,
            PI / 2.0,
            QuadOptions {
                abs_tol: 1e-300,
                rel_tol: 1e-13,
                max_intervals: 2000,
            },
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        a * x.powf(1.0 / (a - 1.0)) / (PI * (a - 1.0).abs()) * r
    }

    fn tail(&self, x: f64) -> f64 {
        let a = self.a;
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..30usize {
            let kf = k as f64;
            fact *= kf;
            let term = gamma(a * kf + 1.0) / fact * (kf * PI * a / 2.0).sin() * x.powf(-a * kf - 1.0);
            let signed = if k % 2 == 1 { term } else { -term };
            sum += signed;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum / PI
    }
}
