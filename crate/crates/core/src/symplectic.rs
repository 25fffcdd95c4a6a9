//! Symplectic and involution-adapted linear algebra.
//!
//! A monodromy matrix taken at a symmetric point, in a basis where the
//! involution is `diag(I, -I)`, has the block form
//!
//! ```text
//!     M = | A  B  |      B = B^T, C = C^T, AB = BA^T, A^T C = CA, A^2 - BC = I
//!         | C  A^T|
//! ```
//!
//! and its spectrum is determined by `A`. The point `p = (tr A, det A)` of the
//! reduced `A` places the matrix in the Broucke stability diagram; the pencil
//! of lines `y = a x - a^2` tangent to the parabola `y = x^2 / 4` marks the
//! loci where `A` has eigenvalue `a`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::signatures::KreinEntry;

/// Default tolerance on region boundaries in the `(tr A, det A)` plane.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;
/// Default distance from 1 within which the two trivial multipliers must lie.
pub const DEFAULT_TRIVIAL_TOL: f64 = 1e-4;
/// Default symplecticity residual accepted by [`SymplecticMatrix::new`].
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-6;
/// Scaled block residual below which a monodromy counts as `M_{A,B,C}`.
pub const SYMMETRIC_POINT_THRESHOLD: f64 = 1e-4;
/// Largest condition number accepted for a frame change.
pub const MAX_FRAME_CONDITION: f64 = 1e12;

/// Max-norm of `M^T J M - J`.
pub fn symplecticity_residual(m: &DMatrix<f64>) -> Result<f64> {
    let dim = linalg::ensure_square(m)?;
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let j = linalg::standard_j(dim / 2);
    let mtjm = m.transpose() * &j * m;
    Ok(linalg::max_abs_diff(&mtjm, &j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    entries: DMatrix<f64>,
    residual: f64,
}

impl SymplecticMatrix {
    /// Accepts `m` if its symplecticity residual is below `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let s = Self::measured(m)?;
        if s.residual > tol {
            return Err(Error::NotSymplectic {
                residual: s.residual,
                tol,
            });
        }
        Ok(s)
    }

    /// Wraps `m` and records its residual without thresholding it.
    pub fn measured(m: DMatrix<f64>) -> Result<Self> {
        linalg::ensure_finite(&m)?;
        let residual = symplecticity_residual(&m)?;
        Ok(Self { entries: m, residual })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Symplectic inverse `-J M^T J`; exact up to rounding for symplectic `M`.
    pub fn symplectic_inverse(&self) -> DMatrix<f64> {
        let j = linalg::standard_j(self.dim() / 2);
        -(&j * self.entries.transpose() * &j)
    }
}

/// The `(A, B, C)` triple of a monodromy in involution-adapted form.
#[derive(Debug, Clone, PartialEq)]
pub struct InvolutionBlocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// Max absolute violation of the block constraints.
    pub constraint_residual: f64,
    /// Violations normalized by the matrix scale: linear constraints by
    /// `max(1, |M|)`, quadratic ones by `max(1, |M|^2)`.
    pub scaled_residual: f64,
}

impl InvolutionBlocks {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Self {
        let at = a.transpose();
        Self::with_lower_right(a, b, c, &at)
    }

    fn with_lower_right(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let linear = [
            linalg::max_abs_diff(&b, &b.transpose()),
            linalg::max_abs_diff(&c, &c.transpose()),
            linalg::max_abs_diff(d, &a.transpose()),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        let quadratic = [
            linalg::max_abs_diff(&(&a * &b), &(&b * a.transpose())),
            linalg::max_abs_diff(&(a.transpose() * &c), &(&c * &a)),
            linalg::max_abs_diff(&(&a * &a - &b * &c), &id),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        let scale = [&a, &b, &c, d]
            .iter()
            .map(|m| linalg::max_abs(m))
            .fold(1.0_f64, f64::max);
        Self {
            constraint_residual: linear.max(quadratic),
            scaled_residual: (linear / scale).max(quadratic / (scale * scale)),
            a,
            b,
            c,
        }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `[[A, B], [C, A^T]]`.
    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.c);
        m.view_mut((n, n), (n, n)).copy_from(&self.a.transpose());
        m
    }

    pub fn is_symmetric_form(&self, threshold: f64) -> bool {
        self.scaled_residual < threshold
    }
}

/// Splits `m` into quadrants; the residual measures how far it is from `M_{A,B,C}`.
pub fn involution_blocks(m: &SymplecticMatrix) -> InvolutionBlocks {
    let n = m.dim() / 2;
    let e = m.entries();
    let a = e.view((0, 0), (n, n)).into_owned();
    let b = e.view((0, n), (n, n)).into_owned();
    let c = e.view((n, 0), (n, n)).into_owned();
    let d = e.view((n, n), (n, n)).into_owned();
    InvolutionBlocks::with_lower_right(a, b, c, &d)
}

/// Acts with `R` on the blocks: `(R A R^-1, R B R^T, R^-T C R^-1)`.
pub fn change_frame(r: &DMatrix<f64>, blocks: &InvolutionBlocks) -> Result<InvolutionBlocks> {
    let n = linalg::ensure_square(r)?;
    if n != blocks.n() {
        return Err(Error::UnsupportedDimension(n));
    }
    let condition = linalg::condition_number(r);
    if !condition.is_finite() || condition > MAX_FRAME_CONDITION {
        return Err(Error::SingularFrame { condition });
    }
    let r_inv = r.clone().try_inverse().ok_or(Error::SingularFrame { condition })?;
    let a = r * &blocks.a * &r_inv;
    let b = r * &blocks.b * r.transpose();
    let c = r_inv.transpose() * &blocks.c * &r_inv;
    Ok(InvolutionBlocks::new(a, b, c))
}

/// Eigenvalues of `M` with the two nearest 1 removed.
///
/// The result is ordered by pair: pairs sorted by `Re(λ + 1/λ)` ascending,
/// and within a pair the member with positive imaginary part (or, for real
/// pairs, the larger modulus) first.
pub fn reduced_multipliers(m: &SymplecticMatrix, trivial_tol: f64) -> Result<Vec<Complex64>> {
    let eig: Vec<Complex64> = m.entries().complex_eigenvalues().iter().cloned().collect();
    let mut idx: Vec<usize> = (0..eig.len()).collect();
    idx.sort_by(|&i, &j| (eig[i] - 1.0).norm().partial_cmp(&(eig[j] - 1.0).norm()).unwrap());
    let found = idx
        .iter()
        .take(2)
        .filter(|&&i| (eig[i] - 1.0).norm() <= trivial_tol)
        .count();
    if found < 2 {
        return Err(Error::TrivialPairNotFound {
            found,
            tol: trivial_tol,
        });
    }
    let rest: Vec<Complex64> = idx[2..].iter().map(|&i| eig[i]).collect();
    Ok(order_multipliers(rest))
}

pub(crate) fn order_multipliers(mut ms: Vec<Complex64>) -> Vec<Complex64> {
    let key = |z: &Complex64| (z + z.inv()).re;
    let within = |z: &Complex64| -> (i8, f64) {
        if z.im.abs() > 1e-12 {
            (if z.im > 0.0 { 0 } else { 1 }, 0.0)
        } else {
            (2, -z.norm())
        }
    };
    ms.sort_by(|a, b| {
        let ka = (key(a) * 1e9).round();
        let kb = (key(b) * 1e9).round();
        ka.partial_cmp(&kb)
            .unwrap()
            .then_with(|| within(a).partial_cmp(&within(b)).unwrap())
    });
    ms
}

/// A point `p = (tr A, det A)` in the base of the stability diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct GitPoint {
    pub x: f64,
    pub y: f64,
}

impl GitPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Roots of `z^2 - x z + y`, the eigenvalues of the reduced `A`.
    pub fn a_eigenvalues(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.x * self.x - 4.0 * self.y, 0.0).sqrt();
        let half = Complex64::new(self.x / 2.0, 0.0);
        [half - disc / 2.0, half + disc / 2.0]
    }
}

impl From<[f64; 2]> for GitPoint {
    fn from(v: [f64; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

impl From<GitPoint> for [f64; 2] {
    fn from(p: GitPoint) -> Self {
        [p.x, p.y]
    }
}

/// Trace and determinant of `A` with the trivial eigenvalue deflated when
/// `remove_trivial` is set.
fn reduced_trace_det(a: &DMatrix<f64>, remove_trivial: bool, trivial_tol: f64) -> Result<(f64, f64)> {
    linalg::ensure_finite(a)?;
    let tr = a.trace();
    let det = a.determinant();
    if !remove_trivial {
        return Ok((tr, det));
    }
    let eig = a.complex_eigenvalues();
    let trivial = eig
        .iter()
        .filter(|z| (*z - 1.0).norm() <= trivial_tol)
        .min_by(|u, v| (*u - 1.0).norm().partial_cmp(&(*v - 1.0).norm()).unwrap())
        .ok_or(Error::TrivialEigenvalueNotFound { tol: trivial_tol })?;
    Ok((tr - trivial.re, det / trivial.re))
}

/// `p` of the reduced `A`: a 3x3 `A` carries the trivial eigenvalue 1 and is
/// deflated; a 2x2 `A` is used as is. A 1x1 `A = (a)` maps to `(a, a)`.
pub fn git_point_from_blocks(blocks: &InvolutionBlocks, trivial_tol: f64) -> Result<GitPoint> {
    git_point_from_blocks_with(blocks, trivial_tol, blocks.n() == 3)
}

/// Like [`git_point_from_blocks`] but with explicit control over deflation of
/// the trivial eigenvalue (an unreduced planar monodromy has a 2x2 `A`).
pub fn git_point_from_blocks_with(blocks: &InvolutionBlocks, trivial_tol: f64, unreduced: bool) -> Result<GitPoint> {
    match (blocks.n(), unreduced) {
        (1, false) => Ok(GitPoint::new(blocks.a[(0, 0)], blocks.a[(0, 0)])),
        (2, true) => {
            let (t, d) = reduced_trace_det(&blocks.a, true, trivial_tol)?;
            // the deflated A is 1x1: trace and determinant coincide
            debug_assert!((t - d).abs() < 1e-3 * t.abs().max(1.0) || !t.is_finite());
            Ok(GitPoint::new(t, t))
        }
        (2, false) | (3, true) => {
            let (t, d) = reduced_trace_det(&blocks.a, unreduced, trivial_tol)?;
            Ok(GitPoint::new(t, d))
        }
        (n, _) => Err(Error::UnsupportedDimension(2 * n)),
    }
}

const RECIPROCAL_TOL: f64 = 1e-6;

/// `p` from four multipliers in two reciprocal pairs, via
/// `a = Σ_cross λ_i λ_j + 2`, `b = Σ λ`, `p = (b / 2, a / 4 - 1/2)`.
pub fn git_point_from_multipliers(multipliers: &[Complex64]) -> Result<GitPoint> {
    if multipliers.len() != 4 {
        return Err(Error::NotReciprocalPairs);
    }
    if multipliers.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let m = multipliers;
    let pairings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];
    let defect = |(i, j): (usize, usize)| (m[i] * m[j] - 1.0).norm();
    let ((p1, p2), (s1, s2)) = pairings
        .iter()
        .min_by(|u, v| {
            defect(u.0)
                .max(defect(u.1))
                .partial_cmp(&defect(v.0).max(defect(v.1)))
                .unwrap()
        })
        .cloned()
        .unwrap();
    if defect((p1, p2)).max(defect((s1, s2))) > RECIPROCAL_TOL {
        return Err(Error::NotReciprocalPairs);
    }
    let a = m[p1] * m[s1] + m[p1] * m[s2] + m[p2] * m[s1] + m[p2] * m[s2] + 2.0;
    let b = m[p1] + m[p2] + m[s1] + m[s2];
    Ok(GitPoint::new(b.re / 2.0, a.re / 4.0 - 0.5))
}

/// Multipliers `λ` with `(λ + 1/λ) / 2 = α` for each eigenvalue `α` of the reduced `A`.
pub fn multipliers_from_point(p: GitPoint) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(4);
    for alpha in p.a_eigenvalues() {
        let root = (alpha * alpha - 1.0).sqrt();
        out.push(alpha + root);
        out.push(alpha - root);
    }
    order_multipliers(out)
}

/// Regions and boundary loci of the stability diagram.
///
/// The first ten variants label the `n = 2` plane; the last five label the
/// `n = 1` trace line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    E2,
    EHplus,
    EHminus,
    Hpp,
    Hmm,
    Hmp,
    N,
    GammaD,
    Gamma1,
    GammaMinus1,
    Elliptic,
    PosHyp,
    NegHyp,
    Degenerate,
    NegDegenerate,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::E2 => "E2",
            Region::EHplus => "EHplus",
            Region::EHminus => "EHminus",
            Region::Hpp => "Hpp",
            Region::Hmm => "Hmm",
            Region::Hmp => "Hmp",
            Region::N => "N",
            Region::GammaD => "GammaD",
            Region::Gamma1 => "Gamma1",
            Region::GammaMinus1 => "GammaMinus1",
            Region::Elliptic => "Elliptic",
            Region::PosHyp => "PosHyp",
            Region::NegHyp => "NegHyp",
            Region::Degenerate => "Degenerate",
            Region::NegDegenerate => "NegDegenerate",
        }
    }

    /// True for open regions (not a boundary locus).
    pub fn is_regular(&self) -> bool {
        !matches!(
            self,
            Region::GammaD | Region::Gamma1 | Region::GammaMinus1 | Region::Degenerate | Region::NegDegenerate
        )
    }

    /// Whether a B-signature can be attached (real, distinct A-eigenvalues).
    pub fn carries_signature(&self) -> bool {
        !matches!(self, Region::N | Region::GammaD)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub region: Region,
    /// Real A-eigenvalues in ascending order (empty for `N`).
    pub alphas: Vec<f64>,
    pub boundary_tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Factor {
    Elliptic,
    Pos,
    Neg,
}

fn factor(alpha: f64) -> Factor {
    if alpha > 1.0 {
        Factor::Pos
    } else if alpha < -1.0 {
        Factor::Neg
    } else {
        Factor::Elliptic
    }
}

/// Classifies `p` in the stability diagram.
///
/// For `n = 2`, `p = (tr A, det A)`. For `n = 1`, `p.x` is the trace of the
/// reduced 2x2 monodromy and `p.y` is ignored.
pub fn classify_region(p: GitPoint, n: usize, boundary_tol: f64) -> Result<Classification> {
    if !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::NonFinite);
    }
    match n {
        1 => {
            let t = p.x;
            let region = if (t - 2.0).abs() <= boundary_tol {
                Region::Degenerate
            } else if (t + 2.0).abs() <= boundary_tol {
                Region::NegDegenerate
            } else if t > 2.0 {
                Region::PosHyp
            } else if t < -2.0 {
                Region::NegHyp
            } else {
                Region::Elliptic
            };
            Ok(Classification {
                region,
                alphas: vec![t / 2.0],
                boundary_tol,
            })
        }
        2 => {
            let disc = p.x * p.x - 4.0 * p.y;
            if disc < -boundary_tol {
                return Ok(Classification {
                    region: Region::N,
                    alphas: Vec::new(),
                    boundary_tol,
                });
            }
            let s = disc.max(0.0).sqrt();
            // stable quadratic roots
            let (a1, a2) = if s == 0.0 {
                (p.x / 2.0, p.x / 2.0)
            } else {
                let big = 0.5 * (p.x + p.x.signum() * s);
                let small = if big != 0.0 { p.y / big } else { 0.0 };
                if big < small {
                    (big, small)
                } else {
                    (small, big)
                }
            };
            let alphas = vec![a1, a2];
            let near = |target: f64| alphas.iter().any(|a| (a - target).abs() <= boundary_tol);
            let region = if near(1.0) {
                Region::Gamma1
            } else if near(-1.0) {
                Region::GammaMinus1
            } else if disc.abs() <= boundary_tol {
                Region::GammaD
            } else {
                match (factor(a1), factor(a2)) {
                    (Factor::Elliptic, Factor::Elliptic) => Region::E2,
                    (Factor::Elliptic, Factor::Pos) => Region::EHplus,
                    (Factor::Neg, Factor::Elliptic) => Region::EHminus,
                    (Factor::Pos, Factor::Pos) => Region::Hpp,
                    (Factor::Neg, Factor::Neg) => Region::Hmm,
                    (Factor::Neg, Factor::Pos) => Region::Hmp,
                    // a1 <= a2 rules out the remaining orderings
                    _ => unreachable!("unordered A-eigenvalues"),
                }
            };
            Ok(Classification {
                region,
                alphas,
                boundary_tol,
            })
        }
        other => Err(Error::UnsupportedDimension(2 * other)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// The data point `(p, ε)` attached to an orbit at a symmetric point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GitDataPoint {
    pub p: GitPoint,
    pub region: Region,
    pub epsilon: Option<Vec<Sign>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krein: Option<Vec<KreinEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PencilLabel {
    /// `α = cos(2πθ)` for the elliptic eigenvalue `e^{2πiθ}`.
    Elliptic { theta: f64 },
    /// `α = (λ + 1/λ) / 2` for a real eigenvalue `λ`.
    Hyperbolic { lambda: f64 },
}

/// The line `y = α x - α²` of matrices whose `A` has eigenvalue `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PencilLine {
    pub alpha: f64,
    pub label: PencilLabel,
}

impl PencilLine {
    pub fn slope(&self) -> f64 {
        self.alpha
    }

    pub fn intercept(&self) -> f64 {
        -self.alpha * self.alpha
    }

    /// Point of tangency with `y = x² / 4`.
    pub fn tangency(&self) -> GitPoint {
        GitPoint::new(2.0 * self.alpha, self.alpha * self.alpha)
    }

    /// `y - α x + α²`; vanishes exactly when `α` is an eigenvalue of `A`.
    pub fn functional(&self, p: GitPoint) -> f64 {
        p.y - self.alpha * p.x + self.alpha * self.alpha
    }

    /// `Γ_{l/k}`, the line of the eigenvalue `e^{2πi l/k}`.
    pub fn rational(l: u32, k: u32) -> PencilLine {
        let theta = l as f64 / k as f64;
        PencilLine {
            alpha: (2.0 * std::f64::consts::PI * theta).cos(),
            label: PencilLabel::Elliptic { theta },
        }
    }
}

const CIRCLE_TOL: f64 = 1e-9;

pub fn pencil_line(eigenvalue: Complex64) -> Result<PencilLine> {
    let on_circle = (eigenvalue.norm() - 1.0).abs() <= CIRCLE_TOL;
    if on_circle {
        let mut theta = eigenvalue.arg() / (2.0 * std::f64::consts::PI);
        if theta < 0.0 {
            theta += 1.0;
        }
        let alpha = if eigenvalue.im == 0.0 {
            eigenvalue.re
        } else {
            (2.0 * std::f64::consts::PI * theta).cos()
        };
        return Ok(PencilLine {
            alpha,
            label: PencilLabel::Elliptic { theta },
        });
    }
    if eigenvalue.im.abs() <= CIRCLE_TOL * eigenvalue.norm().max(1.0) && eigenvalue.re != 0.0 {
        let lambda = eigenvalue.re;
        return Ok(PencilLine {
            alpha: 0.5 * (lambda + 1.0 / lambda),
            label: PencilLabel::Hyperbolic { lambda },
        });
    }
    Err(Error::InvalidEigenvalue {
        re: eigenvalue.re,
        im: eigenvalue.im,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub before: f64,
    pub after: f64,
    /// `+1` if the functional goes from negative to positive, `-1` for the
    /// opposite, `0` when there is no sign change.
    pub direction: i8,
}

impl Crossing {
    pub fn crossed(&self) -> bool {
        self.direction != 0
    }
}

pub fn crossing_test(before: GitPoint, after: GitPoint, line: &PencilLine) -> Crossing {
    let f0 = line.functional(before);
    let f1 = line.functional(after);
    let direction = if f0 < 0.0 && f1 > 0.0 {
        1
    } else if f0 > 0.0 && f1 < 0.0 {
        -1
    } else {
        0
    };
    Crossing {
        before: f0,
        after: f1,
        direction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum QuadraticRoots {
    /// `μ₁ <= μ₂`.
    Real(f64, f64),
    Complex {
        re: f64,
        im: f64,
    },
}

/// `q(y) = y² + b₁ y + b₀` with `p(x) = x² q(x + 1/x)` for a 4x4 symplectic matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticReduction {
    pub b1: f64,
    pub b0: f64,
    pub roots: QuadraticRoots,
}

pub fn char_poly_reduction(m: &SymplecticMatrix, palindrome_tol: f64) -> Result<QuadraticReduction> {
    if m.dim() != 4 {
        return Err(Error::UnsupportedDimension(m.dim()));
    }
    // ascending: c0 + c1 x + c2 x^2 + c3 x^3 + x^4
    let c = linalg::char_poly(m.entries());
    let defect = (c[1] - c[3]).abs();
    if defect > palindrome_tol {
        return Err(Error::NotPalindromic(defect));
    }
    let b1 = 0.5 * (c[1] + c[3]);
    let b0 = c[2] - 2.0;
    let disc = b1 * b1 - 4.0 * b0;
    let roots = if disc >= 0.0 {
        let s = disc.sqrt();
        QuadraticRoots::Real((-b1 - s) / 2.0, (-b1 + s) / 2.0)
    } else {
        QuadraticRoots::Complex {
            re: -b1 / 2.0,
            im: (-disc).sqrt() / 2.0,
        }
    };
    Ok(QuadraticReduction { b1, b0, roots })
}
