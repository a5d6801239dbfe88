use blockip::reductions::{gen_random_twostage, RandomParams};
use blockip::twostage::{solve_twostage_direct, solve_twostage_residue, TwoStageOptions, TwoStageVerdict};
use proptest::prelude::*;

fn params(bricks: usize, locals: usize) -> RandomParams {
    RandomParams {
        globals: 1,
        locals,
        rows: 1,
        bricks,
        delta: 3,
        coupling: 4,
        value: 4,
        ..RandomParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree_and_witnesses_verify(seed in any::<u64>(), bricks in 1usize..=3, locals in 1usize..=2, perturb in any::<bool>()) {
        let (p, _) = gen_random_twostage(&params(bricks, locals), seed, perturb);
        let opts = TwoStageOptions::default();
        let residue = solve_twostage_residue(&p, &opts).unwrap();
        let direct = solve_twostage_direct(&p, &opts).unwrap();
        for v in [&residue, &direct] {
            if let TwoStageVerdict::Feasible(w) = v {
                prop_assert!(w.verify(&p));
            }
        }
        let limited = |v: &TwoStageVerdict| matches!(v, TwoStageVerdict::ResourceLimit(_));
        if !limited(&residue) && !limited(&direct) {
            prop_assert_eq!(residue.is_feasible(), direct.is_feasible());
        }
    }

    #[test]
    fn planted_programs_are_feasible(seed in any::<u64>(), bricks in 1usize..=3) {
        let (p, planted) = gen_random_twostage(&params(bricks, 2), seed, false);
        prop_assert!(planted.verify(&p));
        let verdict = solve_twostage_direct(&p, &TwoStageOptions::default()).unwrap();
        prop_assert!(verdict.is_feasible(), "{:?}", verdict);
    }
}
