//! Property suites over the module invariants.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

use nucdim::commdim::{
    build_commutative_triple, build_pou, function_matrix, greedy_color, interval_sets, oscillation_bound, FinSpace,
};
use nucdim::cstar::instances::{random_order_zero, round_trip};
use nucdim::cstar::product_domination_check;
use nucdim::fock::{calkin_defect, d_k_congruence_holds, kappa_dense, sigma_profile};
use nucdim::numkit::random::{gaussian, ordered_pair};
use nucdim::numkit::rational::{self, rat, Rational};
use nucdim::numkit::{operator_norm, psd_check, CMatrix, SpMatrix};
use nucdim::rng::stream;
use nucdim::roe::{
    commutator_report, cover_z, phi_psi_defect, BandMatrix, CoarseSpace, FamilyBlocks, HFamily, RoeApprox,
};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn norm_sandwiched_by_entries_and_frobenius(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
        let a = gaussian(rows, cols, &mut stream(seed, 0));
        let n = operator_norm(&a).unwrap();
        prop_assert!(n + 1e-12 >= a.max_abs());
        prop_assert!(n <= a.frobenius() + 1e-12);
        prop_assert!((operator_norm(&a.adjoint()).unwrap() - n).abs() <= 1e-10 * n.max(1.0));
    }

    #[test]
    fn norm_is_submultiplicative(n in 1usize..7, seed in any::<u64>()) {
        let mut rng = stream(seed, 1);
        let a = gaussian(n, n, &mut rng);
        let b = gaussian(n, n, &mut rng);
        let ab = operator_norm(&a.try_matmul(&b).unwrap()).unwrap();
        prop_assert!(ab <= operator_norm(&a).unwrap() * operator_norm(&b).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn sparse_norm_matches_dense(n in 1usize..12, density in 0.05f64..0.6, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = stream(seed, 2);
        let trip: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|_| rng.random_bool(density))
            .map(|(i, j)| (i, j, Complex64::new((i + 2 * j) as f64 - 3.0, 0.5)))
            .collect();
        let s = SpMatrix::from_triplets(n, n, trip);
        let dense = operator_norm(&s.to_dense()).unwrap();
        prop_assert!((s.operator_norm().unwrap() - dense).abs() <= 1e-9 * dense.max(1.0));
    }

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let x = rat(p, q);
        prop_assert_eq!(rational::parse(&rational::format(&x)).unwrap(), x);
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn h_family_is_a_lipschitz_partition(len in 2usize..120, r in 1usize..8) {
        let s = CoarseSpace::z_interval(len).unwrap();
        let c = cover_z(&s, r).unwrap();
        let hf = HFamily::new(&s, &c, r).unwrap();
        prop_assert!(hf.ratios_sum_to_one());
        prop_assert!(hf.partition_defect() <= 1e-12);
        prop_assert!(hf.lipschitz_excess(&s) <= Rational::zero());
        let n1 = rational::int(hf.family_count() as i64);
        for h in hf.h_total() {
            prop_assert!(*h >= Rational::one() && *h <= n1);
        }
        for h in hf.h_raw().iter().flatten() {
            prop_assert!(*h >= Rational::zero() && *h <= Rational::one());
        }
    }

    #[test]
    fn commutator_and_defect_bounds(len in 8usize..80, r in 1usize..6, width in 0u64..3, seed in any::<u64>()) {
        let s = Arc::new(CoarseSpace::z_interval(len).unwrap());
        let a = BandMatrix::random(s.clone(), width, 1.0, &mut stream(seed, 3)).unwrap();
        let c = cover_z(&s, r).unwrap();
        let rep = commutator_report(&a, &HFamily::new(&s, &c, r).unwrap()).unwrap();
        prop_assert!(rep.holds, "{rep:?}");
        let d = phi_psi_defect(&a, &RoeApprox::new(&s, &c, r).unwrap()).unwrap();
        prop_assert!(d.holds, "{d:?}");
        prop_assert!(d.unital_defect <= 1e-12);
    }

    #[test]
    fn band_norm_bound(len in 1usize..60, width in 0u64..4, m in 0.0f64..3.0, seed in any::<u64>()) {
        let s = Arc::new(CoarseSpace::z_interval(len).unwrap());
        let a = BandMatrix::random(s.clone(), width, m, &mut stream(seed, 4)).unwrap();
        let nb = nucdim::roe::norm_bound_check(&a).unwrap();
        prop_assert!(nb.holds);
        // b_r on a path: min(len, 2r + 1).
        prop_assert_eq!(s.ball_growth(width), len.min(2 * width as usize + 1));
    }

    #[test]
    fn block_embedding_is_multiplicative(sizes in prop::collection::vec(1usize..4, 1..4), seed in any::<u64>()) {
        let mut rng = stream(seed, 5);
        let mut next = 0;
        let supports: Vec<Vec<usize>> = sizes.iter().map(|&k| { let v = (next..next + k).collect(); next += k + 1; v }).collect();
        let dim = next;
        let supports = Arc::new(supports);
        let x = FamilyBlocks::new(dim, supports.clone(), sizes.iter().map(|&k| gaussian(k, k, &mut rng)).collect()).unwrap();
        let y = FamilyBlocks::new(dim, supports, sizes.iter().map(|&k| gaussian(k, k, &mut rng)).collect()).unwrap();
        let lhs = x.mul(&y).unwrap().embed().to_dense();
        let rhs = x.embed().to_dense().try_matmul(&y.embed().to_dense()).unwrap();
        prop_assert!(lhs.try_sub(&rhs).unwrap().max_abs() <= 1e-10);
        let adj = x.adjoint().embed().to_dense();
        prop_assert!(adj.try_sub(&x.embed().to_dense().adjoint()).unwrap().max_abs() == 0.0);
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn order_zero_round_trip(seed in any::<u64>()) {
        let rep = round_trip(&random_order_zero(24, &mut stream(seed, 6)).unwrap()).unwrap();
        prop_assert!(rep.residual <= 1e-9, "{rep:?}");
        prop_assert!(rep.h_error <= 1e-8 && rep.pi_error <= 1e-8 && rep.trace_defect <= 1e-8, "{rep:?}");
    }

    #[test]
    fn product_domination(n in 1usize..7, seed in any::<u64>()) {
        let mut rng = stream(seed, 7);
        let (a, b) = ordered_pair(n, &mut rng).unwrap();
        let (a2, b2) = ordered_pair(n, &mut rng).unwrap();
        prop_assert!(product_domination_check(&a, &a2, &b, &b2).unwrap().holds);
    }

    #[test]
    fn interval_cover_triple_error_within_oscillation(n in 4usize..40, stride in 1usize..6, seed in any::<u64>()) {
        use rand::Rng;
        prop_assume!(2 * stride <= n);
        let space = FinSpace::path(n);
        let cover = greedy_color(&space, interval_sets(n, stride).unwrap()).unwrap();
        prop_assert!(cover.color_count() <= 2);
        let pou = build_pou(&cover, &space).unwrap();
        prop_assert!(pou.sum_defect() <= 1e-12);
        for u in 0..cover.len() {
            prop_assert_eq!(&pou.support(u), &cover.sets()[u]);
        }
        let mut rng = stream(seed, 8);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = build_commutative_triple(&space, &cover, &pou).unwrap();
        let fm = function_matrix(&f);
        let err = operator_norm(&t.round_trip(&fm).unwrap().try_sub(&fm).unwrap()).unwrap();
        prop_assert!(err <= oscillation_bound(&pou, &f) + 1e-12);
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn sigma_is_symmetric_periodic_and_bounded(k in 2usize..24, i in 1usize..80, p in 0usize..24) {
        let s = sigma_profile(k).unwrap();
        let j = i + p;
        prop_assert_eq!(s.sigma(i, j), s.sigma(j, i));
        let v = s.sigma(i, j);
        prop_assert!(v >= Rational::zero() && v <= rational::int(2));
        if i >= s.stable_start() {
            prop_assert_eq!(s.sigma(i + k, j + k), s.sigma(i, j));
        }
    }

    #[test]
    fn even_k_stable_diagonal_is_one(l in 1usize..16) {
        let r = sigma_profile(2 * l).unwrap().check_stable_claims(4 * l);
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn kappa_is_psd(k in 1usize..40) {
        prop_assert!(psd_check(&kappa_dense(k).unwrap(), 1e-10).unwrap().is_psd);
    }

    #[test]
    fn calkin_defect_within_bound_for_even_k(l in 2usize..14, mu in 0usize..4, nu in 0usize..4) {
        let k = 2 * l;
        prop_assume!(k > 2 * mu.max(nu));
        let d = calkin_defect(mu, nu, k).unwrap();
        prop_assert!(d.within_bound(), "{d:?}");
    }

    #[test]
    fn d_k_congruence(n in 2usize..7, k in 1usize..20) {
        prop_assert!(d_k_congruence_holds(n, k));
    }
}

#[test]
fn identity_sample_is_fixed_by_cover_triples() {
    let space = FinSpace::path(12);
    let cover = greedy_color(&space, interval_sets(12, 3).unwrap()).unwrap();
    let pou = build_pou(&cover, &space).unwrap();
    let t = build_commutative_triple(&space, &cover, &pou).unwrap();
    let id = CMatrix::identity(12);
    assert!(t.round_trip(&id).unwrap().try_sub(&id).unwrap().max_abs() <= 1e-12);
}
