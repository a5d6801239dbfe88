use blockip::nfold::{build_model, expand_program, faithful_check, solve_nfold, solve_nfold_flat, NFoldOptions, NFoldOutcome};
use blockip::reductions::{gen_random_nfold, RandomParams};
use proptest::prelude::*;

fn params(locals: usize, bricks: usize) -> RandomParams {
    RandomParams {
        locals,
        rows: 1,
        link_rows: 1,
        bricks,
        delta: 2,
        coupling: 3,
        value: 3,
        cost: 4,
        nonnegative_d: true,
        ..RandomParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn aggregated_model_matches_the_flat_program(seed in any::<u64>(), locals in 1usize..=2, bricks in 1usize..=4, perturb in any::<bool>()) {
        let (p, _) = gen_random_nfold(&params(locals, bricks), seed, perturb);
        let opts = NFoldOptions::default();
        let got = solve_nfold(&p, &opts).unwrap();
        let flat = solve_nfold_flat(&p, &opts.mip).unwrap();
        prop_assert_eq!(got.value(), flat.value());
        if let NFoldOutcome::Optimum { value, solution } = &got {
            prop_assert_eq!(solution.verify(&p), Some(value.clone()));
        }
    }

    #[test]
    fn decompositions_are_faithful_and_costs_minimal(seed in any::<u64>(), locals in 1usize..=2, bricks in 1usize..=4) {
        let (p, _) = gen_random_nfold(&params(locals, bricks), seed, false);
        let opts = NFoldOptions::default();
        let expansion = expand_program(&p, &opts).unwrap();
        for (br, dec) in p.bricks.iter().zip(&expansion.decompositions) {
            if let Some(dec) = dec {
                prop_assert_eq!(&dec.total(), &dec.target);
                prop_assert!(faithful_check(&br.d, &dec.target, &dec.parts, &opts).unwrap());
            }
        }
        let q = &expansion.program;
        let model = build_model(q, &opts).unwrap();
        for diag in &model.diags {
            for (k, g) in diag.graver.iter().enumerate() {
                let costs: Vec<_> = q.bricks.iter().filter(|b| b.d == diag.d).map(|b| b.c.dot(g).unwrap()).collect();
                prop_assert_eq!(costs.iter().min(), Some(&diag.best[k]));
                let chosen = &q.bricks[diag.best_brick[k]];
                prop_assert_eq!(&chosen.d, &diag.d);
                prop_assert_eq!(chosen.c.dot(g).unwrap(), diag.best[k].clone());
            }
        }
    }
}
