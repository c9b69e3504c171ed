//! Property tests for the algebraic substrate: ring axioms on polynomials,
//! Schwarz symmetry of formal partials, alternation antisymmetry and
//! agreement of the contraction engine with the rejection-loop oracle.

use proptest::prelude::*;

use agm_core::connection::{cov_deriv, curvature, ricci, Connection, DerivKind};
use agm_core::grid::{Down, TensorGrid, Up};
use agm_core::poly::PolyField;
use agm_core::rational::Rational;
use agm_core::verify::{gen_general_scenario, naive_contract, rand_grid, rand_poly, SplitMix64};

fn arb_poly(dim: usize) -> impl Strategy<Value = PolyField> {
    (any::<u64>(), 0u32..=2).prop_map(move |(seed, degree)| {
        let mut rng = SplitMix64::new(seed);
        rand_poly(&mut rng, dim, degree)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_add_commutes(a in arb_poly(3), b in arb_poly(3)) {
        prop_assert_eq!(a.add(&b), b.add(&a));
    }

    #[test]
    fn poly_add_associates(a in arb_poly(3), b in arb_poly(3), c in arb_poly(3)) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn poly_mul_associates(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn poly_mul_commutes(a in arb_poly(3), b in arb_poly(3)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn poly_distributes(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn poly_sub_is_add_neg(a in arb_poly(3), b in arb_poly(3)) {
        prop_assert_eq!(a.sub(&b), a.add(&b.neg()));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn schwarz_symmetry(p in arb_poly(3), k in 0usize..3, m in 0usize..3) {
        let dkm = p.partial(k).unwrap().partial(m).unwrap();
        let dmk = p.partial(m).unwrap().partial(k).unwrap();
        prop_assert_eq!(dkm, dmk);
    }

    #[test]
    fn eval_at_respects_ring_ops(a in arb_poly(2), b in arb_poly(2), x in -3i64..=3, y in -3i64..=3) {
        let pt = [Rational::from_int(x), Rational::from_int(y)];
        let va = a.eval_at(&pt).unwrap();
        let vb = b.eval_at(&pt).unwrap();
        prop_assert_eq!(a.add(&b).eval_at(&pt).unwrap(), &va + &vb);
        prop_assert_eq!(a.mul(&b).eval_at(&pt).unwrap(), &va * &vb);
    }

    #[test]
    fn alternate_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let t = rand_grid(&mut rng, 2, &[Up, Down, Down, Down], 1);
        let a12 = t.alternate(1, 2).unwrap();
        let a21 = t.alternate(2, 1).unwrap();
        prop_assert!(a12.add(&a21).is_zero());
    }

    #[test]
    fn contract_matches_naive(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = SplitMix64::new(seed);
        let a = rand_grid(&mut rng, dim, &[Up, Down, Down], 2);
        let b = rand_grid(&mut rng, dim, &[Up, Down], 2);
        for pairs in [vec![(0usize, 1usize)], vec![(1, 0)], vec![(0, 1), (1, 0)]] {
            let got = agm_core::grid::grid_contract(&a, &b, &pairs).unwrap();
            prop_assert_eq!(got, naive_contract(&a, &b, &pairs));
        }
    }
}

#[test]
fn check_equality_rejects_shape_mismatch() {
    use agm_core::verify::{check_equality, EqualityMode};
    let a = TensorGrid::zero(2, &[Up, Down]);
    let b = TensorGrid::zero(2, &[Down, Up]);
    assert!(check_equality(&a, &b, EqualityMode::Polynomial).is_err());
    let c = TensorGrid::zero(3, &[Up, Down]);
    assert!(check_equality(&a, &c, EqualityMode::Origin).is_err());
}

fn random_connection(dim: usize, seed: u64) -> Connection {
    let mut rng = SplitMix64::new(seed);
    Connection::new(rand_grid(&mut rng, dim, &[Up, Down, Down], 2)).unwrap()
}

#[test]
fn curvature_is_antisymmetric_in_last_pair() {
    for (dim, seed) in [(2, 10u64), (3, 11)] {
        let c = random_connection(dim, seed);
        let r = curvature(&c);
        assert!(r.add(&r.swap_slots(2, 3)).is_zero());
    }
}

#[test]
fn curvature_is_torsion_independent() {
    for (dim, seed) in [(2, 20u64), (3, 21)] {
        let c = random_connection(dim, seed);
        let cs = Connection::new(c.sym()).unwrap();
        assert_eq!(curvature(&c), curvature(&cs));
        assert_eq!(ricci(&c), ricci(&cs));
    }
}

#[test]
fn ricci_type_identity_holds() {
    // a^i_{j|mn} - a^i_{j|nm} == a^a_j R^i_{amn} - a^i_a R^a_{jmn}
    for (dim, seed) in [(2, 30u64), (2, 31), (3, 32), (3, 33)] {
        let c = random_connection(dim, seed);
        let mut rng = SplitMix64::new(seed ^ 0xab);
        let t = rand_grid(&mut rng, dim, &[Up, Down], 2);
        let d2 = cov_deriv(
            &cov_deriv(&t, &c, DerivKind::K0).unwrap(),
            &c,
            DerivKind::K0,
        )
        .unwrap();
        let lhs = d2.alternate(2, 3).unwrap();
        let r = curvature(&c);
        let term1 = t
            .contract(&r, &[(0, 1)])
            .unwrap()
            .permute_indices(&[1, 0, 2, 3]);
        let term2 = t.contract(&r, &[(1, 0)]).unwrap();
        assert_eq!(lhs, term1.sub(&term2), "dim {dim} seed {seed}");
    }
}

#[test]
fn general_scenarios_respect_decomposition() {
    // sym/anti parts of the image connection recombine the deformation data
    for seed in [1u64, 2, 3] {
        let (c, d) = gen_general_scenario(3, 2, seed).unwrap();
        let cb = agm_core::mapping::apply_general(&c, &d).unwrap();
        assert_eq!(cb.sym(), c.sym().add(&d.omega_bar.sub(&d.omega)));
        assert_eq!(cb.anti(), c.anti().add(&d.tau_bar.sub(&d.tau)));
    }
}
