use blockip::lattice::{fractionality_constant, lattice_member, span_coefficients, span_member};
use blockip::oracles::lattice_member_bf;
use blockip::{IntVec, Index, VectorSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// Up to three generators of dimension one or two, entries in `[−3, 3]`.
fn generators() -> impl Strategy<Value = VectorSet> {
    (1usize..=2).prop_flat_map(|t| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, t), 0..=3).prop_map(move |gens| {
            let gens: Vec<Vec<BigInt>> = gens.into_iter().map(|g| g.into_iter().map(BigInt::from).collect()).collect();
            VectorSet::new(Index::range("t", t), gens).unwrap()
        })
    })
}

fn point(d: &VectorSet, raw: &[i64]) -> IntVec {
    IntVec::new(d.index().clone(), raw[..d.dim()].iter().map(|&x| BigInt::from(x)).collect()).unwrap()
}

proptest! {
    #[test]
    fn lattice_membership_matches_enumeration(d in generators(), raw in prop::collection::vec(-6i64..=6, 2)) {
        let v = point(&d, &raw);
        let exact = lattice_member(&d, &v).unwrap();
        if lattice_member_bf(&d, &v, 8).unwrap() {
            prop_assert!(exact.is_some());
        }
        match exact {
            Some(w) => prop_assert_eq!(w.combination(), v),
            None => prop_assert!(!lattice_member_bf(&d, &v, 8).unwrap()),
        }
    }

    #[test]
    fn fractionality_constant_clears_denominators(d in generators(), coeffs in prop::collection::vec(-5i64..=5, 3)) {
        // an integer point of the span: an integer combination of the generators
        let mut v = vec![BigInt::from(0); d.dim()];
        for (g, c) in d.vectors().iter().zip(&coeffs) {
            for (x, gi) in v.iter_mut().zip(g) {
                *x += gi * c;
            }
        }
        let v = IntVec::new(d.index().clone(), v).unwrap();
        let c = BigRational::from_integer(fractionality_constant(&d));
        let lambda = span_coefficients(&d, &v).unwrap().expect("in the span");
        prop_assert!(lambda.iter().all(|l| (l * &c).is_integer()));
    }

    #[test]
    fn regular_lattice_classes_are_all_or_nothing(
        d in generators(),
        mult in 1i64..=3,
        raw in prop::collection::vec(-4i64..=4, 2),
        shifts in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 6),
    ) {
        let k = fractionality_constant(&d) * mult;
        let base = point(&d, &raw);
        // sample the class of `base` modulo K', keeping only span points
        let samples: Vec<IntVec> = shifts
            .iter()
            .map(|s| {
                let e = base.entries().iter().zip(s).map(|(x, si)| x + &k * si).collect();
                IntVec::new(d.index().clone(), e).unwrap()
            })
            .filter(|v| span_member(&d, v).unwrap())
            .collect();
        let members: Vec<bool> = samples.iter().map(|v| lattice_member(&d, v).unwrap().is_some()).collect();
        prop_assert!(members.iter().all(|&m| m) || members.iter().all(|&m| !m));
    }
}
