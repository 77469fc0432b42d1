//! Independent numerical oracles for the closed forms in the library.

mod common;

use common::{j_bracket_monte_carlo, quadrature_overlaps, r3};
use dapkit::lattice::{enumerate_shells, shell_distance_closed_form, LatticeSpec, Relation};
use dapkit::materials::LatticeKind;
use dapkit::spectra::FranckCondonTable;
use dapkit::j_correction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn franck_condon_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_fc);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let omega_g = rng.random_range(20.0..120.0);
        let omega_e = omega_g * rng.random_range(0.6..1.6);
        let dq = rng.random_range(-1.2..1.2);
        let table = FranckCondonTable::new(omega_e, omega_g, dq, 20, 20).unwrap();
        let quad = quadrature_overlaps(omega_e, omega_g, dq, 20);
        for m in 0..=20 {
            for n in 0..=20 {
                worst = worst.max((table.get(m, n) - quad[m][n]).abs());
            }
        }
    }
    assert!(worst < 1e-8, "max deviation {worst:e}");
}

#[test]
fn j_correction_matches_monte_carlo() {
    let eps = 9.72;
    let k = dapkit::constants::COULOMB_EV_ANGSTROM / eps;
    let cases = [(2.0, 4.0, 3.0), (8.0, 4.63, 3.90), (30.0, 2.0, 2.0), (5.0, 1.3, 4.6)];
    for (i, &(r, a_d, a_a)) in cases.iter().enumerate() {
        let (mc, se) = j_bracket_monte_carlo(r, a_d, a_a, 2_000_000, 17 + i as u64);
        let j = j_correction(r, a_d, a_a, eps).unwrap();
        assert!((j - k * mc).abs() < 3.0 * k * se, "R={r}: closed {j} vs MC {} ± {}", k * mc, k * se);
    }
}

#[test]
fn shells_match_three_square_counts() {
    for kind in [LatticeKind::DiamondStructure, LatticeKind::Zincblende] {
        let lattice = LatticeSpec::new(4.0, kind).unwrap();
        for relation in [Relation::SameSublattice, Relation::OppositeSublattice] {
            let r_max = shell_distance_closed_form(100, relation, 4.0).unwrap().unwrap() + 1e-6;
            let shells = enumerate_shells(&lattice, relation, r_max).unwrap();
            let mut it = shells.iter();
            for mp in 1..=100u32 {
                let expected = match relation {
                    Relation::SameSublattice => r3(2 * mp as i64),
                    _ => r3(8 * mp as i64 - 5) / 2,
                };
                let closed = shell_distance_closed_form(mp, relation, 4.0).unwrap();
                assert_eq!(closed.is_some(), expected > 0, "m'={mp}");
                if let Some(d) = closed {
                    let s = it.next().expect("missing shell");
                    assert_eq!(s.form_index, mp);
                    assert!((s.distance - d).abs() < 1e-9);
                    assert_eq!(s.multiplicity, expected, "{relation:?} m'={mp}");
                }
            }
        }
    }
}
