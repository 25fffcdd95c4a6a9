//! Small dense linear-algebra helpers shared by the symplectic and orbit code.
//!
//! All norms are max-absolute-entry norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// The standard rotation `J = [[0, I], [-I, 0]]` of size `2n`.
pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn ensure_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Ratio of extreme singular values; infinite for a singular matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Right singular vector of the smallest singular value, normalized to unit length.
pub fn real_null_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) =
        svd.singular_values.iter().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, &s)| {
                if s < best.1 {
                    (i, s)
                } else {
                    best
                }
            },
        );
    let v: DVector<f64> = v_t.row(idx).transpose();
    let norm = v.norm();
    v / norm
}

/// Complex analogue of [`real_null_vector`]; also returns the smallest singular value.
pub fn complex_null_vector(m: &DMatrix<Complex64>) -> (DVector<Complex64>, f64) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (idx, smin) =
        svd.singular_values.iter().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, &s)| {
                if s < best.1 {
                    (i, s)
                } else {
                    best
                }
            },
        );
    // rows of V^H are conjugated right singular vectors
    let v: DVector<Complex64> = v_t.row(idx).transpose().map(|z| z.conj());
    let norm = v.norm();
    (v.map(|z| z / norm), smin)
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Coefficients `[c_0, ..., c_n]` (ascending, monic) of `det(tI - m)` by Faddeev-LeVerrier.
pub fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let id = DMatrix::<f64>::identity(n, n);
    let mut mk = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        mk = m * &mk + &id * coeffs[n - k + 1];
        let amk = m * &mk;
        coeffs[n - k] = -amk.trace() / k as f64;
    }
    coeffs
}

pub fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// Signature (#positive - #negative eigenvalues) of the symmetric part of `m`.
///
/// Returns `None` when an eigenvalue lies within `zero_tol` (relative to the
/// largest eigenvalue magnitude) of zero.
pub fn signature(m: &DMatrix<f64>, zero_tol: f64) -> Option<i64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let scale = eig.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut sig = 0;
    for &e in eig.iter() {
        if e.abs() <= zero_tol * scale {
            return None;
        }
        sig += if e > 0.0 { 1 } else { -1 };
    }
    Some(sig)
}
