//! Dense linear-algebra helpers on top of faer: matrix exponential, LU solves,
//! symmetric eigenvalues and norms.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, MatRef};

use crate::error::{KinlimError, Result};

/// Complex dense matrix.
pub type CMat = Mat<c64>;

/// Maximum absolute row sum.
pub fn inf_norm<T: Copy + Into<c64>>(a: MatRef<'_, T>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].into().norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn one_norm<T: Copy + Into<c64>>(a: MatRef<'_, T>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].into().norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Promotes a real matrix to complex.
pub fn to_complex(a: MatRef<'_, f64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0))
}

/// `y = A x` for a complex matrix.
pub fn matvec(a: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for i in 0..a.nrows() {
            y[i] += col[i] * xj;
        }
    }
    y
}

/// `y = A x` for a real matrix acting on a complex vector.
pub fn matvec_real(a: MatRef<'_, f64>, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        let col = a.col(j);
        for i in 0..a.nrows() {
            y[i] += xj * col[i];
        }
    }
    y
}

/// Partial-pivoting LU factorization that rejects numerically singular matrices.
pub struct Lu {
    lu: PartialPivLu<c64>,
    n: usize,
}

impl Lu {
    pub fn new(a: MatRef<'_, c64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(KinlimError::Linalg("LU of a non-square matrix".into()));
        }
        let lu = a.partial_piv_lu();
        let n = a.nrows();
        let u = lu.U();
        let scale = inf_norm(a).max(f64::MIN_POSITIVE);
        let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if !(min_pivot > 1e-300) || !(min_pivot / scale).is_finite() || min_pivot / scale < 1e-15 * f64::EPSILON {
            return Err(KinlimError::Linalg(format!(
                "matrix numerically singular (min pivot {min_pivot:.3e}, norm {scale:.3e})"
            )));
        }
        Ok(Self { lu, n })
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_mat(&self, b: MatRef<'_, c64>) -> CMat {
        let mut x = b.to_owned();
        self.lu.solve_in_place(x.as_mut());
        x
    }
}

/// Eigenvalues (ascending) and eigenvectors of a real symmetric matrix.
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| KinlimError::NoConvergence(format!("symmetric eigensolver: {e:?}")))?;
    let s = evd.S();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues and eigenvectors of a general complex matrix.
pub fn eigen(a: MatRef<'_, c64>) -> Result<(Vec<c64>, CMat)> {
    let evd = a.eigen().map_err(|e| KinlimError::NoConvergence(format!("eigensolver: {e:?}")))?;
    let s = evd.S();
    let vals = (0..a.nrows()).map(|i| s.column_vector()[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

// Padé [13/13] coefficients for the scaling-and-squaring exponential.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: MatRef<'_, c64>) -> Result<CMat> {
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(KinlimError::Linalg("expm of a non-finite matrix".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = c64::new(0.5f64.powi(s), 0.0);
    let a1: CMat = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let b = PADE13;
    let ident = Mat::<c64>::identity(n, n);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |x: f64| c64::new(x, 0.0);
    let inner_u = Mat::from_fn(n, n, |i, j| c(b[13]) * a6[(i, j)] + c(b[11]) * a4[(i, j)] + c(b[9]) * a2[(i, j)]);
    let tu = &a6 * &inner_u;
    let poly_u = Mat::from_fn(n, n, |i, j| {
        tu[(i, j)] + c(b[7]) * a6[(i, j)] + c(b[5]) * a4[(i, j)] + c(b[3]) * a2[(i, j)] + c(b[1]) * ident[(i, j)]
    });
    let u = &a1 * &poly_u;
    let inner_v = Mat::from_fn(n, n, |i, j| c(b[12]) * a6[(i, j)] + c(b[10]) * a4[(i, j)] + c(b[8]) * a2[(i, j)]);
    let tv = &a6 * &inner_v;
    let v = Mat::from_fn(n, n, |i, j| {
        tv[(i, j)] + c(b[6]) * a6[(i, j)] + c(b[4]) * a4[(i, j)] + c(b[2]) * a2[(i, j)] + c(b[0]) * ident[(i, j)]
    });
    let p = &v + &u;
    let q = &v - &u;
    let mut r = Lu::new(q.as_ref())?.solve_mat(p.as_ref());
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(-(i as f64) * 7.0, i as f64) } else { c64::new(0.0, 0.0) });
        let e = expm(a.as_ref()).unwrap();
        for i in 0..3 {
            let exact = a[(i, i)].exp();
            assert!((e[(i, i)] - exact).norm() < 1e-13 * exact.norm().max(1e-300));
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp([[0, t], [-t, 0]]) is a rotation by t.
        let t = 37.3;
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(t, 0.0),
            (1, 0) => c64::new(-t, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let e = expm(a.as_ref()).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-12);
        assert!((e[(0, 1)].re - t.sin()).abs() < 1e-12);
        assert!((e[(1, 0)].re + t.sin()).abs() < 1e-12);
    }

    #[test]
    fn expm_of_jordan_block() {
        // exp([[l, 1], [0, l]]) = e^l [[1, 1], [0, 1]].
        let l = c64::new(-3.0, 2.0);
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => l,
            (0, 1) => c64::new(1.0, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let e = expm(a.as_ref()).unwrap();
        let el = l.exp();
        assert!((e[(0, 1)] - el).norm() < 1e-14);
        assert!((e[(1, 0)]).norm() < 1e-16);
    }

    #[test]
    fn lu_solves_and_rejects_singular() {
        let a = Mat::from_fn(3, 3, |i, j| c64::new(1.0 / (1.0 + i as f64 + j as f64), (i == j) as u8 as f64));
        let x = vec![c64::new(1.0, -1.0), c64::new(0.5, 2.0), c64::new(-3.0, 0.0)];
        let b = matvec(a.as_ref(), &x);
        let y = Lu::new(a.as_ref()).unwrap().solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-13);
        }
        let z = Mat::<c64>::zeros(3, 3);
        assert!(Lu::new(z.as_ref()).is_err());
    }

    #[test]
    fn symmetric_eigenvalues_sorted() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 });
        let (vals, _) = sym_eigen(a.as_ref()).unwrap();
        let s2 = 2f64.sqrt();
        assert!((vals[0] - (2.0 - s2)).abs() < 1e-14);
        assert!((vals[2] - (2.0 + s2)).abs() < 1e-14);
    }
}
