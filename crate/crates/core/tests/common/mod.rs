#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use orbitlab::cr3bp::{correct_symmetric_orbit, CorrectorOptions, Involution, Orbit, State, SystemConfig, Target};
use orbitlab::floer::OrbitLedger;
use orbitlab::symplectic::InvolutionBlocks;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut StdRng, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale))
}

fn random_symmetric(rng: &mut StdRng, n: usize, scale: f64) -> DMatrix<f64> {
    let m = random_matrix(rng, n, scale);
    (&m + m.transpose()) * 0.5
}

/// Invertible `n x n` matrix with condition number bounded by construction.
pub fn random_frame(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    loop {
        let r = DMatrix::<f64>::identity(n, n) + random_matrix(rng, n, 0.6);
        let sv = r.singular_values();
        if sv.min() > 0.2 {
            return r;
        }
    }
}

fn embed(
    top_left: &DMatrix<f64>,
    top_right: &DMatrix<f64>,
    bottom_left: &DMatrix<f64>,
    bottom_right: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = top_left.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(top_left);
    m.view_mut((0, n), (n, n)).copy_from(top_right);
    m.view_mut((n, 0), (n, n)).copy_from(bottom_left);
    m.view_mut((n, n), (n, n)).copy_from(bottom_right);
    m
}

/// Product of two shears and a block-diagonal factor, symplectic by construction.
pub fn random_symplectic(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(n, n);
    let z = DMatrix::<f64>::zeros(n, n);
    let upper = embed(&id, &random_symmetric(rng, n, 0.8), &z, &id);
    let lower = embed(&id, &z, &random_symmetric(rng, n, 0.8), &id);
    let g = random_frame(rng, n);
    let g_inv_t = g.clone().try_inverse().unwrap().transpose();
    let diag = embed(&g, &z, &z, &g_inv_t);
    upper * diag * lower
}

/// `M = R N^{-1} R N` with `R = diag(I, -I)`: symplectic and reversed by `R`,
/// hence of the form `[[A, B], [C, A^T]]` with `B`, `C` symmetric.
pub fn random_valid_triple(rng: &mut StdRng, n: usize) -> InvolutionBlocks {
    let nn = random_symplectic(rng, n);
    let j = orbitlab::linalg::standard_j(n);
    let n_inv = -(&j * nn.transpose() * &j);
    let mut r = DMatrix::<f64>::identity(2 * n, 2 * n);
    for i in n..2 * n {
        r[(i, i)] = -1.0;
    }
    let m = &r * n_inv * &r * nn;
    let a = m.view((0, 0), (n, n)).into_owned();
    let b = m.view((0, n), (n, n)).into_owned();
    let c = m.view((n, 0), (n, n)).into_owned();
    // symmetrise away rounding so the triple is exactly of the required shape
    InvolutionBlocks::new(a, (&b + b.transpose()) * 0.5, (&c + c.transpose()) * 0.5)
}

/// A product of planar rotations by `theta_i` with orientation `sigma_i`,
/// written in a random frame. Returns the blocks and the pairs `(theta, sigma)`.
pub fn random_elliptic(rng: &mut StdRng, n: usize) -> (InvolutionBlocks, Vec<(f64, f64)>) {
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    while pairs.len() < n {
        let theta = rng.random_range(0.15..std::f64::consts::PI - 0.15);
        if pairs.iter().all(|(t, _)| (t.cos() - theta.cos()).abs() > 0.1) {
            let sigma = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            pairs.push((theta, sigma));
        }
    }
    let diag = |f: &dyn Fn(f64, f64) -> f64| {
        DMatrix::from_fn(n, n, |i, j| if i == j { f(pairs[i].0, pairs[i].1) } else { 0.0 })
    };
    let blocks = InvolutionBlocks::new(
        diag(&|t, _| t.cos()),
        diag(&|t, s| -s * t.sin()),
        diag(&|t, s| s * t.sin()),
    );
    let r = random_frame(rng, n);
    (orbitlab::symplectic::change_frame(&r, &blocks).unwrap(), pairs)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join("ledgers")
}

#[derive(Debug, Deserialize)]
pub struct LedgerFixture {
    pub label: String,
    pub invariant: String,
    pub before: serde_json::Value,
    pub after: serde_json::Value,
    #[serde(default)]
    pub expected: Option<[i64; 2]>,
}

impl LedgerFixture {
    pub fn ledgers(&self) -> (OrbitLedger, OrbitLedger) {
        (
            OrbitLedger::from_json(&self.before.to_string()).unwrap(),
            OrbitLedger::from_json(&self.after.to_string()).unwrap(),
        )
    }
}

pub fn load_fixtures() -> Vec<LedgerFixture> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap())
        .collect()
}

/// Jacobi constants on either side of the period-doubling of the Jupiter-Europa family.
pub const JACOBI_BEFORE: f64 = 3.00357414;
pub const JACOBI_AFTER: f64 = 3.003571774;

/// Printed initial point of the orbit before the bifurcation, position and velocity.
pub const SEED_BEFORE: [f64; 6] = [1.016776, 0.0, 0.0, 0.0, 0.0130372, 0.0];

pub fn snitch_before(inv: Involution) -> (SystemConfig, Orbit) {
    let cfg = SystemConfig::jupiter_europa();
    let orbit = correct_symmetric_orbit(
        &State::from_velocity(SEED_BEFORE),
        inv,
        Target::Jacobi(JACOBI_BEFORE),
        &cfg,
        &CorrectorOptions::default(),
    )
    .unwrap();
    (cfg, orbit)
}

/// The seed moved to Saturn-Enceladus by Hill scaling: offsets from the
/// secondary and velocities scale with `mu^(1/3)`, times are unchanged.
pub fn hill_scaled_seed(from: &SystemConfig, to: &SystemConfig, seed: [f64; 6]) -> State {
    let s = (to.mu / from.mu).cbrt();
    let x = (1.0 - to.mu) + (seed[0] - (1.0 - from.mu)) * s;
    State::from_velocity([x, seed[1] * s, seed[2] * s, seed[3] * s, seed[4] * s, seed[5] * s])
}

/// Largest relative defect of `det(M - t) = t^n det((t + 1/t) I - 2A)` over a few `t`.
pub fn char_poly_residual(blocks: &InvolutionBlocks) -> f64 {
    let n = blocks.n();
    let m = blocks.assemble();
    let id2 = DMatrix::<f64>::identity(2 * n, 2 * n);
    let id = DMatrix::<f64>::identity(n, n);
    [0.3, 0.7, 1.3, 2.1, -0.6, -1.7]
        .iter()
        .map(|&t: &f64| {
            let lhs = (&m - &id2 * t).determinant();
            let rhs = t.powi(n as i32) * (&id * (t + 1.0 / t) - &blocks.a * 2.0).determinant();
            (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Relative defect of `T_k(A)^2 - (A^2 - I) U_{k-1}(A)^2 = I`.
pub fn pell_residual(a: &DMatrix<f64>, k: u32) -> f64 {
    use orbitlab::floer::{chebyshev_matrix, ChebyshevKind};
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let t = chebyshev_matrix(ChebyshevKind::First, k, a);
    let u = chebyshev_matrix(ChebyshevKind::Second, k - 1, a);
    let t2 = &t * &t;
    let w = (a * a - &id) * &u * &u;
    let scale = t2.amax().max(w.amax()).max(1.0);
    (t2 - w - id).amax() / scale
}

/// `½ sign((I - A) C^{-1})` by a symmetric eigendecomposition, or `None` when
/// `C` is badly conditioned or the form is close to degenerate.
pub fn half_signature_oracle(blocks: &InvolutionBlocks) -> Option<f64> {
    let n = blocks.n();
    let sv = blocks.c.clone().singular_values();
    if sv.min() < 1e-6 * sv.max().max(1.0) {
        return None;
    }
    let c_inv = blocks.c.clone().try_inverse()?;
    let form = (DMatrix::<f64>::identity(n, n) - &blocks.a) * c_inv;
    let sym = (&form + form.transpose()) * 0.5;
    let eig = sym.symmetric_eigen().eigenvalues;
    let scale = eig.amax().max(1.0);
    if eig.iter().any(|e| e.abs() < 1e-6 * scale) {
        return None;
    }
    let pos = eig.iter().filter(|e| **e > 0.0).count() as f64;
    let neg = eig.iter().filter(|e| **e < 0.0).count() as f64;
    Some(0.5 * (pos - neg))
}
