use blockip::mip::{lp_solve, mip_solve, tu_round, MipOptions, MixedProgram, Sense, Status};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Small {
    upper: Vec<i64>,
    cost: Vec<i64>,
    rows: Vec<(Vec<i64>, u8, i64)>,
}

fn small() -> impl Strategy<Value = Small> {
    (2usize..=4).prop_flat_map(|n| {
        let row = (prop::collection::vec(-3i64..=3, n), 0u8..3, -6i64..=10);
        (
            prop::collection::vec(0i64..=4, n),
            prop::collection::vec(-3i64..=3, n),
            prop::collection::vec(row, 1..=3),
        )
            .prop_map(|(upper, cost, rows)| Small { upper, cost, rows })
    })
}

fn build(s: &Small, integer: bool) -> MixedProgram {
    let mut p = MixedProgram::new();
    for (j, (&u, &c)) in s.upper.iter().zip(&s.cost).enumerate() {
        let v = p.add_var(format!("x{j}"), Some(BigInt::from(0)), Some(BigInt::from(u)), integer);
        p.set_cost(v, BigInt::from(c));
    }
    for (a, sense, rhs) in &s.rows {
        let sense = [Sense::Eq, Sense::Le, Sense::Ge][*sense as usize];
        let terms = a.iter().enumerate().map(|(j, &x)| (j, BigInt::from(x))).collect();
        p.add_constraint(terms, sense, BigInt::from(*rhs));
    }
    p
}

/// Minimum cost over all integer points of the box, by enumeration.
fn enumerate(s: &Small) -> Option<i64> {
    let mut best = None;
    let mut x = vec![0i64; s.upper.len()];
    loop {
        let ok = s.rows.iter().all(|(a, sense, rhs)| {
            let lhs: i64 = a.iter().zip(&x).map(|(p, q)| p * q).sum();
            match sense {
                0 => lhs == *rhs,
                1 => lhs <= *rhs,
                _ => lhs >= *rhs,
            }
        });
        if ok {
            let c: i64 = s.cost.iter().zip(&x).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(c, |b: i64| b.min(c)));
        }
        let mut j = 0;
        while j < x.len() && x[j] == s.upper[j] {
            x[j] = 0;
            j += 1;
        }
        if j == x.len() {
            return best;
        }
        x[j] += 1;
    }
}

proptest! {
    #[test]
    fn lp_vertex_is_feasible_and_bounds_the_integer_optimum(s in small()) {
        let lp = lp_solve(&build(&s, false)).unwrap();
        let p = build(&s, true);
        let ip = mip_solve(&p, &MipOptions::default()).unwrap();
        match lp.status {
            Status::Optimal => {
                prop_assert!(build(&s, false).is_feasible(&lp.values));
                prop_assert_eq!(lp.objective.clone().unwrap(), p.objective_value(&lp.values));
                if let Some(o) = &ip.objective {
                    prop_assert!(lp.objective.unwrap() <= *o);
                }
            }
            Status::Infeasible => prop_assert_eq!(ip.status, Status::Infeasible),
            other => prop_assert!(false, "bounded LP reported {:?}", other),
        }
    }

    #[test]
    fn integer_optimum_matches_enumeration(s in small()) {
        let p = build(&s, true);
        let out = mip_solve(&p, &MipOptions::default()).unwrap();
        match enumerate(&s) {
            Some(best) => {
                prop_assert_eq!(out.status, Status::Optimal);
                prop_assert!(p.is_feasible(&out.values));
                prop_assert_eq!(out.objective.unwrap(), BigRational::from_integer(BigInt::from(best)));
            }
            None => prop_assert_eq!(out.status, Status::Infeasible),
        }
    }

    #[test]
    fn transportation_vertices_are_integral(
        supply in prop::collection::vec(0i64..=6, 2..=3),
        extra in prop::collection::vec(0i64..=6, 2..=3),
        cost in prop::collection::vec(-4i64..=4, 9),
    ) {
        // demands sum to at most the total supply
        let total: i64 = supply.iter().sum();
        let mut demand: Vec<i64> = extra.iter().map(|&e| e.min(total)).collect();
        let mut left = total;
        for d in demand.iter_mut() {
            *d = (*d).min(left);
            left -= *d;
        }
        let mut p = MixedProgram::new();
        let mut var = vec![vec![0; demand.len()]; supply.len()];
        for (i, row) in var.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = p.add_nonneg(format!("f{i}_{j}"), false);
                p.set_cost(*v, BigInt::from(cost[i * 3 + j]));
            }
        }
        for (i, &s) in supply.iter().enumerate() {
            p.add_constraint(var[i].iter().map(|&v| (v, BigInt::from(1))).collect(), Sense::Le, BigInt::from(s));
        }
        for (j, &d) in demand.iter().enumerate() {
            p.add_constraint(var.iter().map(|r| (r[j], BigInt::from(1))).collect(), Sense::Eq, BigInt::from(d));
        }
        let out = lp_solve(&p).unwrap();
        prop_assert_eq!(out.status, Status::Optimal);
        prop_assert!(out.values.iter().all(|v| v.is_integer()));
        let rounded = tu_round(&p, &[]).unwrap();
        let as_rat: Vec<BigRational> = rounded.into_iter().map(BigRational::from_integer).collect();
        prop_assert!(p.is_feasible(&as_rat));
        prop_assert_eq!(p.objective_value(&as_rat), out.objective.unwrap());
    }
}
