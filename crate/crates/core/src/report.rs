//! Classification report for a single monodromy matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalogue::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::floer::cz_parity;
use crate::signatures::{b_signature, git_data_point, krein_signs_excluding_trivial, KreinEntry, SignatureOptions};
use crate::symplectic::{
    classify_region, git_point_from_multipliers, involution_blocks, reduced_multipliers, GitPoint, Region, Sign,
    SymplecticMatrix, SYMMETRIC_POINT_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub schema_version: u32,
    pub input: String,
    pub dim: usize,
    pub symplecticity: f64,
    /// Whether the matrix has the `[[A, B], [C, A^T]]` shape.
    pub block_form: bool,
    pub block_residual: f64,
    pub p: GitPoint,
    pub region: Region,
    pub epsilon: Option<Vec<Sign>>,
    pub mu: Option<Vec<f64>>,
    pub witness: Option<Vec<f64>>,
    pub krein: Option<Vec<KreinEntry>>,
    pub multipliers: Vec<[f64; 2]>,
    pub chi_sft: Option<i64>,
}

fn pairs(z: &[Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|z| [z.re, z.im]).collect()
}

/// Contribution of an orbit of this type to `χ_SFT`, if it is not degenerate.
pub fn chi_contribution(region: Region) -> Option<i64> {
    cz_parity(region).ok().map(|p| p.sign())
}

/// Square matrix from rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// p and region from the spectrum alone, for matrices not in block form.
fn from_spectrum(reduced: &[Complex64], boundary_tol: f64) -> Result<(GitPoint, Region)> {
    match reduced.len() {
        2 => {
            let a = 0.5 * (reduced[0] + reduced[1]).re;
            let region = classify_region(GitPoint::new(2.0 * a, 0.0), 1, boundary_tol)?.region;
            Ok((GitPoint::new(a, 0.0), region))
        }
        4 => {
            let p = git_point_from_multipliers(reduced)?;
            Ok((p, classify_region(p, 2, boundary_tol)?.region))
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// `p`, region, signs and multipliers of a 2x2, 4x4 or 6x6 monodromy.
///
/// A 6x6 matrix (and a 4x4 one with `unreduced`) carries the trivial pair,
/// which is deflated. Signs need the `[[A, B], [C, A^T]]` shape; for other
/// matrices only the spectral data is reported.
pub fn classify_matrix(m: DMatrix<f64>, symplectic_tol: f64, unreduced: bool) -> Result<MatrixReport> {
    let dim = m.nrows();
    if !matches!(dim, 2 | 4 | 6) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let sm = SymplecticMatrix::new(m, symplectic_tol)?;
    let opts = SignatureOptions {
        unreduced,
        ..SignatureOptions::default()
    };
    let deflate = dim == 6 || (dim == 4 && unreduced);
    let reduced = if deflate {
        reduced_multipliers(&sm, opts.trivial_tol)?
    } else {
        sm.entries().complex_eigenvalues().iter().cloned().collect()
    };
    let trivial = deflate.then_some(opts.trivial_tol);
    let krein = krein_signs_excluding_trivial(&sm, trivial).ok().map(|k| k.entries);

    let blocks = involution_blocks(&sm);
    let block_form = blocks.scaled_residual <= SYMMETRIC_POINT_THRESHOLD;
    let (p, region, epsilon, mu, witness) = if block_form {
        let data = git_data_point(&blocks, &opts)?;
        let sig = data.epsilon.as_ref().and_then(|_| b_signature(&blocks, &opts).ok());
        let (mu, witness) = sig.map(|s| (s.mu, s.witness)).unzip();
        (data.p, data.region, data.epsilon, mu, witness)
    } else {
        let (p, region) = from_spectrum(&reduced, opts.boundary_tol)?;
        (p, region, None, None, None)
    };
    Ok(MatrixReport {
        schema_version: SCHEMA_VERSION,
        input: "matrix".into(),
        dim,
        symplecticity: sm.residual(),
        block_form,
        block_residual: blocks.scaled_residual,
        p,
        region,
        epsilon,
        mu,
        witness,
        krein,
        multipliers: pairs(&reduced),
        chi_sft: chi_contribution(region),
    })
}
