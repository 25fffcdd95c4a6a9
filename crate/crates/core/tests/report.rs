mod common;

use nalgebra::DMatrix;
use orbitlab::report::{classify_matrix, matrix_from_rows};
use orbitlab::symplectic::{Region, DEFAULT_SYMPLECTIC_TOL};
use orbitlab::Error;
use proptest::prelude::*;

use common::*;

#[test]
fn identity_sits_on_the_trivial_line() {
    let r = classify_matrix(DMatrix::identity(4, 4), DEFAULT_SYMPLECTIC_TOL, false).unwrap();
    assert_eq!(r.region, Region::Gamma1);
    assert!(r.block_form);
    assert_eq!(r.epsilon, None);
    assert_eq!(r.chi_sft, None);
}

#[test]
fn unsupported_and_malformed_matrices() {
    assert!(matches!(
        classify_matrix(DMatrix::identity(8, 8), 1e-6, false),
        Err(Error::UnsupportedDimension(8))
    ));
    assert!(matches!(
        classify_matrix(DMatrix::identity(4, 4) * 2.0, 1e-6, false),
        Err(Error::NotSymplectic { .. })
    ));
    assert!(matches!(
        matrix_from_rows(&[vec![1.0, 0.0], vec![0.0]]),
        Err(Error::NotSquare { .. })
    ));
    assert!(matches!(matrix_from_rows(&[]), Err(Error::EmptyInput)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // a frame that mixes positions and momenta destroys the block shape but
    // not the spectrum, so p and the region are still found
    #[test]
    fn spectrum_route_agrees_with_blocks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let blocks = random_valid_triple(&mut r, 2);
        let m = blocks.assemble();
        let direct = classify_matrix(m.clone(), 1e-8, false).unwrap();
        prop_assert!(direct.block_form);
        let s = random_symplectic(&mut r, 2);
        let s_inv = s.clone().try_inverse().unwrap();
        let mixed = &s * m * s_inv;
        let scale = mixed.amax().max(1.0);
        let moved = classify_matrix(mixed, 1e-8 * scale * scale, false).unwrap();
        prop_assume!(!moved.block_form);
        prop_assert_eq!(moved.region, direct.region);
        let tol = 1e-7 * direct.p.x.abs().max(direct.p.y.abs()).max(1.0);
        prop_assert!((moved.p.x - direct.p.x).abs() < tol && (moved.p.y - direct.p.y).abs() < tol);
    }
}
