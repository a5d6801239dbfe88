use blockip::instance::{format_instance, parse_instance, Instance};
use blockip::model::{NFoldSolution, TwoStageWitness};
use blockip::reductions::{gen_random_fourblock, gen_random_nfold, gen_random_twostage, RandomParams};
use blockip::IntVec;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = RandomParams> {
    (1usize..=2, 1usize..=3, 0usize..=2, 1usize..=2, 1usize..=4, 1i64..=5, 1i64..=50).prop_map(
        |(globals, locals, rows, link_rows, bricks, delta, coupling)| RandomParams {
            globals,
            locals,
            rows,
            link_rows,
            bricks,
            delta,
            coupling,
            ..RandomParams::default()
        },
    )
}

/// Formats, parses and checks that formatting the parsed instance is a fixed point.
fn round_trip(inst: &Instance) -> Instance {
    let text = format_instance(inst);
    let parsed = parse_instance(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(format_instance(&parsed), text);
    parsed
}

proptest! {
    #[test]
    fn two_stage_round_trips(params in params(), seed in any::<u64>()) {
        let (p, w) = gen_random_twostage(&params, seed, false);
        let Instance::TwoStage(q) = round_trip(&Instance::TwoStage(p.clone())) else { panic!("kind changed") };
        let w = TwoStageWitness {
            u: IntVec::from_parts(q.globals.clone(), w.u.into_entries()),
            v: w.v.into_iter().map(|v| IntVec::from_parts(q.locals.clone(), v.into_entries())).collect(),
        };
        prop_assert!(w.verify(&q));
    }

    #[test]
    fn nfold_round_trips(params in params(), seed in any::<u64>()) {
        let (p, s) = gen_random_nfold(&params, seed, false);
        let want = s.verify(&p);
        let Instance::NFold(q) = round_trip(&Instance::NFold(p)) else { panic!("kind changed") };
        let s = NFoldSolution {
            bricks: s
                .bricks
                .into_iter()
                .map(|b| b.into_iter().map(|(y, k)| (IntVec::from_parts(q.locals.clone(), y.into_entries()), k)).collect())
                .collect(),
        };
        prop_assert!(want.is_some());
        prop_assert_eq!(s.verify(&q), want);
    }

    #[test]
    fn four_block_round_trips(params in params(), seed in any::<u64>()) {
        let (p, x, ys) = gen_random_fourblock(&params, seed, false);
        let Instance::FourBlock(q) = round_trip(&Instance::FourBlock(p)) else { panic!("kind changed") };
        let ys: Vec<_> = ys.into_iter().map(|y| y.into_entries()).collect();
        prop_assert!(q.is_solution(x.entries(), &ys));
    }
}
