use blockip::nfold::{solve_nfold, NFoldOptions, NFoldOutcome};
use blockip::oracles::{sat_bf, subset_sum_dp};
use blockip::reductions::{gen_3sat, gen_random_cnf, gen_random_fourblock, gen_subset_sum, shrink_4block, RandomParams};
use blockip::twostage::{solve_twostage_direct, TwoStageOptions, TwoStageVerdict};
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sat_encoding_is_satisfiable_iff_the_formula_is(vars in 3usize..=4, clauses in 1usize..=6, seed in any::<u64>()) {
        let f = gen_random_cnf(vars, clauses, seed);
        let p = gen_3sat(&f);
        let verdict = solve_twostage_direct(&p, &TwoStageOptions::default()).unwrap();
        match (sat_bf(&f), &verdict) {
            (Some(_), TwoStageVerdict::Feasible(w)) => prop_assert!(w.verify(&p)),
            (None, TwoStageVerdict::Infeasible) => {}
            (want, got) => prop_assert!(false, "formula {:?}: oracle {:?}, solver {:?}", f, want, got),
        }
    }

    #[test]
    fn subset_sum_encoding_matches_dynamic_programming(items in prop::collection::vec(1u64..=12, 1..=5), t in 0u64..=40) {
        let p = gen_subset_sum(&items, t, None).unwrap();
        let got = solve_nfold(&p, &NFoldOptions::default()).unwrap();
        prop_assert_eq!(matches!(got, NFoldOutcome::Optimum { .. }), subset_sum_dp(&items, t));
    }

    #[test]
    fn shrinking_leaves_unit_coupling(seed in any::<u64>(), bricks in 1usize..=3, coupling in 1i64..=9) {
        let params = RandomParams { globals: 2, locals: 2, rows: 1, link_rows: 1, bricks, coupling, ..RandomParams::default() };
        let (p, _, _) = gen_random_fourblock(&params, seed, false);
        let q = shrink_4block(&p).unwrap();
        q.validate().unwrap();
        prop_assert!(q.is_uniform());
        prop_assert_eq!(q.groups.len(), p.groups.len());
        for m in [&q.a, &q.bmat, &q.c] {
            prop_assert!(m.max_abs() <= BigInt::one());
        }
    }
}
