use anticyc_core::linalg::{
    charpoly, intertwiner_solve, intertwines, mat_pow_zeta, orbit_block_construct, random_principal_matrix,
    Intertwiner, PadicMatrix,
};
use anticyc_core::{PadicExponent, PadicRing};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn principal(ring: &PadicRing, entries: &[i64], r: usize) -> PadicMatrix {
    let p = ring.p().clone();
    let mut m = PadicMatrix::identity(ring, r);
    for i in 0..r {
        for j in 0..r {
            let base = BigInt::from((i == j) as i64);
            m.set(i, j, base + &p * entries[i * r + j]);
        }
    }
    m
}

fn unimodular(ring: &PadicRing, entries: &[i64], r: usize) -> PadicMatrix {
    // unit upper triangular times unit lower triangular
    let mut up = PadicMatrix::identity(ring, r);
    let mut low = PadicMatrix::identity(ring, r);
    for i in 0..r {
        for j in 0..r {
            if i < j {
                up.set(i, j, entries[i * r + j]);
            } else if i > j {
                low.set(i, j, entries[i * r + j]);
            }
        }
    }
    up.mul(&low).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn charpoly_is_conjugation_invariant(
        r in 1usize..5,
        a in prop::collection::vec(-50i64..50, 16),
        b in prop::collection::vec(-50i64..50, 16),
    ) {
        let ring = PadicRing::new(3, 4).unwrap();
        let m = principal(&ring, &a, r);
        let q = unimodular(&ring, &b, r);
        let conj = m.conjugate_by(&q).unwrap();
        prop_assert_eq!(charpoly(&m), charpoly(&conj));
        prop_assert!(charpoly(&m).evaluate(&m).unwrap().is_zero());
    }

    #[test]
    fn zeta_power_group_laws(
        r in 1usize..4,
        a in prop::collection::vec(-50i64..50, 9),
        x in -200i64..200,
        y in -200i64..200,
    ) {
        let ring = PadicRing::new(5, 3).unwrap();
        let m = principal(&ring, &a, r);
        let ex = PadicExponent::Padic(ring.element(x));
        let ey = PadicExponent::Padic(ring.element(y));
        let lhs = mat_pow_zeta(&m, &ex.add(&ey).unwrap()).unwrap();
        let rhs = mat_pow_zeta(&m, &ex).unwrap().mul(&mat_pow_zeta(&m, &ey).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        // integer exponents match repeated multiplication
        let k = x.rem_euclid(12);
        prop_assert_eq!(
            mat_pow_zeta(&m, &PadicExponent::from(k)).unwrap(),
            m.pow_int(&BigInt::from(k)).unwrap()
        );
    }
}

#[test]
fn odd_rank_random_matrices_have_no_inversion_intertwiner() {
    let zeta = PadicExponent::from(-1);
    for p in [3u32, 5] {
        let ring = PadicRing::new(p, 4).unwrap();
        for r in [1usize, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(7 + p as u64 * 10 + r as u64);
            for _ in 0..30 {
                let (m, _) = random_principal_matrix(&ring, r, &mut rng).unwrap();
                let verdict = intertwiner_solve(&m, &zeta).unwrap();
                assert!(matches!(verdict, Intertwiner::Absent { .. }), "p={p} r={r}: {verdict:?}");
            }
        }
    }
}

#[test]
fn orbit_controls_resolve_and_share_charpoly() {
    for (p, n, d, s) in [(3u32, 4u32, 2u32, 1usize), (3, 5, 2, 2), (5, 5, 4, 1), (7, 4, 3, 1)] {
        let ring = PadicRing::new(p, n).unwrap();
        let zeta = if d == 2 {
            PadicExponent::from(-1)
        } else {
            let a = (2..p)
                .find(|&a| {
                    PadicExponent::Padic(ring.teichmuller(a).unwrap()).root_of_unity_order(&ring).unwrap()
                        == Some(d)
                })
                .unwrap();
            PadicExponent::Padic(ring.teichmuller(a).unwrap())
        };
        let (m, dm) = orbit_block_construct(&ring, d, s, &zeta).unwrap();
        assert!(intertwines(&m, &dm, &zeta).unwrap());
        assert_eq!(charpoly(&m), charpoly(&mat_pow_zeta(&m, &zeta).unwrap()));
        let solved = intertwiner_solve(&m, &zeta).unwrap();
        let w = solved.witness().expect("constructed control has an intertwiner");
        assert!(intertwines(&m, w, &zeta).unwrap());
    }
}
