use blockip::cone::{cone_constants, cone_member_rat, orthogonal_subset, weyl_dual, DEFAULT_FACET_CAP};
use blockip::lattice::fractionality_constant;
use blockip::{Index, RatVec, VectorSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Up to four generators of dimension one to three, entries in `[−3, 3]`.
fn generators() -> impl Strategy<Value = VectorSet> {
    (1usize..=3).prop_flat_map(|t| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, t), 0..=4).prop_map(move |gens| {
            let gens: Vec<Vec<BigInt>> = gens.into_iter().map(|g| g.into_iter().map(BigInt::from).collect()).collect();
            VectorSet::new(Index::range("t", t), gens).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn dual_description_agrees_with_lp_membership(
        d in generators(),
        raw in prop::collection::vec((-7i64..=7, 1i64..=4), 3),
    ) {
        let dual = weyl_dual(&d);
        let p: Vec<BigRational> = raw[..d.dim()]
            .iter()
            .map(|&(n, m)| BigRational::new(BigInt::from(n), BigInt::from(m)))
            .collect();
        let by_facets = dual.facets.vectors().iter().all(|f| {
            let s: BigRational = f.iter().zip(&p).map(|(fi, x)| x * BigRational::from_integer(fi.clone())).sum();
            !s.is_negative()
        });
        let v = RatVec::new(d.index().clone(), p).unwrap();
        prop_assert_eq!(cone_member_rat(&d, &v).unwrap(), by_facets);
        // every generator lies in the dual description
        for i in 0..d.len() {
            prop_assert!(dual.contains(&d.get(i)).unwrap());
        }
    }

    #[test]
    fn modulus_chain_divides_upwards(d in generators()) {
        let dual = weyl_dual(&d);
        let c = cone_constants(&dual, DEFAULT_FACET_CAP).unwrap();
        prop_assert_eq!(c.bseq.len(), dual.facets.len() + 1);
        prop_assert_eq!(&c.bseq[0], &c.k);
        for w in c.bseq.windows(2) {
            prop_assert_eq!(&w[1], &(&w[0] * &c.mhat));
        }
        prop_assert_eq!(&c.b, &(BigInt::from(2) * c.bseq.last().unwrap()));
        prop_assert!(c.mhat >= c.m && !c.mhat.is_zero());
        // K clears the denominators of every facet-orthogonal subset
        let facets: Vec<_> = (0..dual.facets.len()).map(|i| dual.facet(i)).collect();
        for mask in 0u32..(1 << facets.len()) {
            let g: Vec<_> = facets.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, f)| f.clone()).collect();
            let sub = orthogonal_subset(&d, &g).unwrap();
            prop_assert!(c.k.is_multiple_of(&fractionality_constant(&sub)));
        }
    }
}
