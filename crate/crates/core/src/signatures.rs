//! B-signatures at symmetric points and Krein signs of elliptic multipliers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{
    classify_region, git_point_from_blocks_with, GitDataPoint, InvolutionBlocks, Region, Sign, SymplecticMatrix,
    DEFAULT_BOUNDARY_TOL, DEFAULT_TRIVIAL_TOL,
};

pub const DEFAULT_SIGN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureOptions {
    pub trivial_tol: f64,
    pub boundary_tol: f64,
    pub sign_floor: f64,
    /// Deflate the trivial eigenvalue from a 2x2 `A` (unreduced planar case).
    /// A 3x3 `A` is always deflated.
    pub unreduced: bool,
}

impl Default for SignatureOptions {
    fn default() -> Self {
        Self {
            trivial_tol: DEFAULT_TRIVIAL_TOL,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
            sign_floor: DEFAULT_SIGN_FLOOR,
            unreduced: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSignature {
    /// Reduced A-eigenvalues, ascending.
    pub mu: Vec<f64>,
    pub signs: Vec<Sign>,
    /// `v^T B v` for the unit eigenvectors.
    pub witness: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<DVector<f64>>,
}

/// Signs of `v_i^T B v_i` for unit eigenvectors `v_i` of `A^T`.
pub fn b_signature(blocks: &InvolutionBlocks, opts: &SignatureOptions) -> Result<BSignature> {
    linalg::ensure_finite(&blocks.a)?;
    linalg::ensure_finite(&blocks.b)?;
    let n = blocks.n();
    let deflate = n == 3 || opts.unreduced;
    let mu: Vec<f64> = match (n, deflate) {
        (1, false) => vec![blocks.a[(0, 0)]],
        (2, true) => {
            let p = git_point_from_blocks_with(blocks, opts.trivial_tol, true)?;
            vec![p.x]
        }
        (2, false) | (3, true) => {
            let p = git_point_from_blocks_with(blocks, opts.trivial_tol, deflate)?;
            let class = classify_region(p, 2, opts.boundary_tol)?;
            if matches!(class.region, Region::N | Region::GammaD) {
                return Err(Error::NotRealDistinct);
            }
            class.alphas
        }
        (n, _) => return Err(Error::UnsupportedDimension(2 * n)),
    };
    let at = blocks.a.transpose();
    let mut eigenvectors = Vec::with_capacity(mu.len());
    let mut witness = Vec::with_capacity(mu.len());
    let mut signs = Vec::with_capacity(mu.len());
    for (index, &m) in mu.iter().enumerate() {
        let shifted = &at - DMatrix::<f64>::identity(n, n) * m;
        let v = linalg::real_null_vector(&shifted);
        let value = (v.transpose() * &blocks.b * &v)[(0, 0)];
        if value.abs() < opts.sign_floor {
            return Err(Error::IndeterminateSign { index, value });
        }
        signs.push(Sign::of(value));
        witness.push(value);
        eigenvectors.push(v);
    }
    Ok(BSignature {
        mu,
        signs,
        witness,
        eigenvectors,
    })
}

/// Krein sign of one elliptic multiplier with positive imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreinEntry {
    /// `[re, im]`.
    pub multiplier: [f64; 2],
    pub sign: Sign,
    pub witness: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KreinSigns {
    pub entries: Vec<KreinEntry>,
}

impl KreinSigns {
    /// Sign of `λ` or of its conjugate (with the opposite sign), if recorded.
    pub fn sign_of(&self, lambda: Complex64, tol: f64) -> Option<Sign> {
        self.entries.iter().find_map(|e| {
            let z = Complex64::new(e.multiplier[0], e.multiplier[1]);
            if (z - lambda).norm() <= tol {
                Some(e.sign)
            } else if (z.conj() - lambda).norm() <= tol {
                Some(e.sign.flip())
            } else {
                None
            }
        })
    }
}

const ELLIPTIC_TOL: f64 = 1e-7;
const SIMPLICITY_TOL: f64 = 1e-7;
const WITNESS_IM_TOL: f64 = 1e-10;

/// Krein signs of all elliptic multipliers of `m`.
pub fn krein_signs(m: &SymplecticMatrix) -> Result<KreinSigns> {
    krein_signs_excluding_trivial(m, None)
}

/// Like [`krein_signs`], first discarding the two multipliers nearest 1 when
/// they lie within `trivial_tol`.
pub fn krein_signs_excluding_trivial(m: &SymplecticMatrix, trivial_tol: Option<f64>) -> Result<KreinSigns> {
    let mat = m.entries();
    linalg::ensure_finite(mat)?;
    let dim = m.dim();
    let mut eig: Vec<Complex64> = mat.complex_eigenvalues().iter().cloned().collect();
    if let Some(tol) = trivial_tol {
        eig.sort_by(|u, v| (u - 1.0).norm().partial_cmp(&(v - 1.0).norm()).unwrap());
        let trivial = eig.iter().take(2).filter(|z| (*z - 1.0).norm() <= tol).count();
        eig.drain(..trivial);
    }
    let g = linalg::to_complex(&linalg::standard_j(dim / 2)) * Complex64::new(0.0, -1.0);
    let cm = linalg::to_complex(mat);
    let mut entries = Vec::new();
    for (idx, &lambda) in eig.iter().enumerate() {
        let elliptic = (lambda.norm() - 1.0).abs() <= ELLIPTIC_TOL && lambda.im > ELLIPTIC_TOL;
        if !elliptic {
            continue;
        }
        let repeated = eig
            .iter()
            .enumerate()
            .any(|(j, z)| j != idx && (z - lambda).norm() <= SIMPLICITY_TOL);
        if repeated {
            return Err(Error::DegenerateEllipticPair {
                re: lambda.re,
                im: lambda.im,
            });
        }
        let shifted = &cm - DMatrix::<Complex64>::identity(dim, dim) * lambda;
        let (v, _) = linalg::complex_null_vector(&shifted);
        let w = (v.adjoint() * &g * &v)[(0, 0)];
        if w.im.abs() > WITNESS_IM_TOL || w.re == 0.0 {
            return Err(Error::DegenerateEllipticPair {
                re: lambda.re,
                im: lambda.im,
            });
        }
        entries.push(KreinEntry {
            multiplier: [lambda.re, lambda.im],
            sign: Sign::of(w.re),
            witness: w.re,
        });
    }
    entries.sort_by(|a, b| a.multiplier[0].partial_cmp(&b.multiplier[0]).unwrap());
    Ok(KreinSigns { entries })
}

/// `(p, region, ε)` of a monodromy already in involution-adapted form.
///
/// `ε` is `None` where the B-signature is undefined (complex or repeated
/// A-eigenvalues, or a boundary locus).
pub fn git_data_point(blocks: &InvolutionBlocks, opts: &SignatureOptions) -> Result<GitDataPoint> {
    let n = blocks.n();
    let deflate = n == 3 || opts.unreduced;
    let p = git_point_from_blocks_with(blocks, opts.trivial_tol, deflate)?;
    let reduced_n = if deflate { n - 1 } else { n };
    let region = if reduced_n == 1 {
        classify_region(crate::symplectic::GitPoint::new(2.0 * p.x, 0.0), 1, opts.boundary_tol)?.region
    } else {
        classify_region(p, reduced_n, opts.boundary_tol)?.region
    };
    let epsilon = if region.carries_signature() {
        match b_signature(blocks, opts) {
            Ok(sig) => Some(sig.signs),
            Err(Error::IndeterminateSign { .. }) | Err(Error::NotRealDistinct) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(GitDataPoint {
        p,
        region,
        epsilon,
        krein: None,
    })
}
