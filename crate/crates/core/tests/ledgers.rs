mod common;

use orbitlab::families::{ledger_check, Invariant, InvariantValue};
use orbitlab::floer::{chi_real, chi_sft, ChordEntry, GaussianInt, OrbitLedger, Parity};
use orbitlab::symplectic::DEFAULT_BOUNDARY_TOL;

use common::load_fixtures;

#[test]
fn every_orbit_fixture_keeps_chi_sft() {
    let fixtures: Vec<_> = load_fixtures()
        .into_iter()
        .filter(|f| f.invariant == "chi_sft")
        .collect();
    assert_eq!(fixtures.len(), 10);
    for fx in fixtures {
        let (before, after) = fx.ledgers();
        let check = ledger_check(&before, &after, Invariant::ChiSft, DEFAULT_BOUNDARY_TOL).unwrap();
        let [x, y] = fx.expected.unwrap();
        assert!(check.equal, "{}", fx.label);
        assert_eq!(
            check.values,
            [InvariantValue::Integer(x), InvariantValue::Integer(y)],
            "{}",
            fx.label
        );
    }
}

#[test]
fn tripling_counts_one_on_both_sides() {
    let fx = load_fixtures().into_iter().find(|f| f.label == "tripling_h2").unwrap();
    let (before, after) = fx.ledgers();
    assert_eq!(chi_sft(&before, DEFAULT_BOUNDARY_TOL).unwrap(), 1);
    assert_eq!(chi_sft(&after, DEFAULT_BOUNDARY_TOL).unwrap(), 1);
}

fn shifted(l: &OrbitLedger, k: f64) -> Vec<ChordEntry> {
    l.chords()
        .map(|c| ChordEntry {
            cz_parity: c.cz_parity,
            s: c.s - k,
        })
        .collect()
}

#[test]
fn chord_fixture_is_invariant_for_every_offset() {
    let fx = load_fixtures().into_iter().find(|f| f.invariant == "chi_real").unwrap();
    let (before, after) = fx.ledgers();
    let mut seen = Vec::new();
    for k in 0..4 {
        let b = chi_real(&shifted(&before, k as f64)).unwrap();
        let a = chi_real(&shifted(&after, k as f64)).unwrap();
        assert_eq!(b, a, "offset {k}");
        seen.push(b);
    }
    // a whole-unit shift of s multiplies every term by i^2
    assert_eq!(seen[0], GaussianInt::new(1, 0));
    assert_eq!(seen[1], GaussianInt::new(-1, 0));
}

#[test]
fn mismatched_ledger_is_reported_unequal() {
    let before = OrbitLedger::from_json(r#"[{"dim": 4, "simple_type": "Elliptic", "k": 1}]"#).unwrap();
    let after = OrbitLedger::from_json(r#"[{"dim": 4, "simple_type": "PosHyp", "k": 1}]"#).unwrap();
    let check = ledger_check(&before, &after, Invariant::ChiSft, DEFAULT_BOUNDARY_TOL).unwrap();
    assert!(!check.equal);
}

#[test]
fn single_chord_values() {
    let one = |p, s| chi_real(&[ChordEntry { cz_parity: p, s }]).unwrap();
    assert_eq!(one(Parity::Even, 0.0), GaussianInt::new(1, 0));
    assert_eq!(one(Parity::Odd, 0.0), GaussianInt::new(-1, 0));
    assert_eq!(one(Parity::Even, 0.5), GaussianInt::new(0, -1));
    assert_eq!(one(Parity::Even, -0.5), GaussianInt::new(0, 1));
}
