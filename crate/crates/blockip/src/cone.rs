//! Polyhedral cones spanned by finite generator sets.
//!
//! [`weyl_dual`] computes a finite set `F` of integer functionals with
//! `cone(D) = {v : ⟨f,v⟩ ≥ 0 for all f ∈ F}` by a double-description pass over
//! the dual cone `{f : ⟨f,d⟩ ≥ 0 for all d ∈ D}`. [`cone_constants`] derives the
//! deep-in-the-cone threshold and the residue modulus used by the certificate
//! construction in [`crate::polyhedral`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::fractionality_constant_raw;
use crate::mip::{lp_solve, MixedProgram, Sense, Status};
use crate::numerics::{big, dot, l1_norm, lcm, pow, primitive, IntVec, RatVec, VectorSet};

/// Largest facet count for which subset enumeration is attempted.
pub const DEFAULT_FACET_CAP: usize = 16;

/// Generators together with a dual description of their cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualRepresentation {
    pub generators: VectorSet,
    /// Primitive, pairwise distinct, lexicographically sorted functionals.
    pub facets: VectorSet,
}

impl DualRepresentation {
    pub fn facet(&self, i: usize) -> IntVec {
        self.facets.get(i)
    }

    /// Whether all facet products with `v` are nonnegative.
    pub fn contains(&self, v: &IntVec) -> Result<bool> {
        self.generators.check_vector(v)?;
        Ok(self.facets.vectors().iter().all(|f| !dot(f, v.entries()).is_negative()))
    }
}

/// The constants of the certificate construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeConstants {
    pub l: BigInt,
    pub m: BigInt,
    pub mhat: BigInt,
    pub k: BigInt,
    /// `B_0 = K`, `B_i = M̂·B_{i−1}` for `i = 1..|F|`.
    pub bseq: Vec<BigInt>,
    pub b: BigInt,
}

type DualCache = Mutex<HashMap<(usize, Vec<Vec<BigInt>>), Arc<Vec<Vec<BigInt>>>>>;

fn dual_cache() -> &'static DualCache {
    static CACHE: OnceLock<DualCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Computes a dual representation of `cone(D)`.
///
/// Redundant functionals (those in the cone of the others) are removed, so the
/// result is a minimal generating set of the dual cone, with lineality given
/// by `±` pairs.
pub fn weyl_dual(d: &VectorSet) -> DualRepresentation {
    let key = (d.dim(), d.canonical());
    let cached = dual_cache().lock().expect("cache poisoned").get(&key).cloned();
    let facets = match cached {
        Some(f) => f,
        None => {
            let f = Arc::new(dual_generators(&key.1, d.dim()));
            dual_cache().lock().expect("cache poisoned").insert(key, f.clone());
            f
        }
    };
    DualRepresentation {
        generators: d.clone(),
        facets: VectorSet::new(d.index().clone(), facets.as_ref().clone()).expect("facet dimension"),
    }
}

fn unit(dim: usize, i: usize) -> Vec<BigInt> {
    (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()
}

/// `a·x − b·y`, made primitive.
fn combo(a: &BigInt, x: &[BigInt], b: &BigInt, y: &[BigInt]) -> Vec<BigInt> {
    let v: Vec<BigInt> = x.iter().zip(y).map(|(xi, yi)| a * xi - b * yi).collect();
    primitive(&v)
}

fn dual_generators(gens: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let mut lineality: Vec<Vec<BigInt>> = (0..dim).map(|i| unit(dim, i)).collect();
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    for d in gens {
        if let Some(pos) = lineality.iter().position(|l| !dot(d, l).is_zero()) {
            let mut l0 = lineality.remove(pos);
            if dot(d, &l0).is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
            }
            let s0 = dot(d, &l0);
            // project everything else onto the hyperplane ⟨d,·⟩ = 0 along l0
            for l in lineality.iter_mut() {
                let s = dot(d, l);
                if !s.is_zero() {
                    *l = combo(&s0, l, &s, &l0);
                }
            }
            for r in rays.iter_mut() {
                let s = dot(d, r);
                if !s.is_zero() {
                    *r = combo(&s0, r, &s, &l0);
                }
            }
            rays.push(primitive(&l0));
            dedup_in_place(&mut rays);
            continue;
        }
        let mut pos = Vec::new();
        let mut zero = Vec::new();
        let mut neg = Vec::new();
        for r in rays.drain(..) {
            let s = dot(d, &r);
            if s.is_positive() {
                pos.push((r, s));
            } else if s.is_zero() {
                zero.push(r);
            } else {
                neg.push((r, s));
            }
        }
        let mut next: Vec<Vec<BigInt>> = pos.iter().map(|(r, _)| r.clone()).collect();
        next.extend(zero);
        for (p, sp) in &pos {
            for (n, sn) in &neg {
                // ⟨d,p⟩·n − ⟨d,n⟩·p lies on the hyperplane
                let v = combo(sp, n, sn, p);
                if v.iter().any(|x| !x.is_zero()) {
                    next.push(v);
                }
            }
        }
        dedup_in_place(&mut next);
        rays = remove_redundant(next, &lineality);
    }
    let mut all: Vec<Vec<BigInt>> = Vec::new();
    for l in &lineality {
        let l = primitive(l);
        all.push(l.iter().map(|x| -x).collect());
        all.push(l);
    }
    all.extend(rays.into_iter().map(|r| primitive(&r)));
    all.retain(|v| v.iter().any(|x| !x.is_zero()));
    all.sort();
    all.dedup();
    // sequential redundancy removal in sorted order
    let mut i = 0;
    while i < all.len() {
        let others: Vec<Vec<BigInt>> = all.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
        if cone_member_raw(&others, &all[i], dim) {
            all.remove(i);
        } else {
            i += 1;
        }
    }
    all
}

fn dedup_in_place(v: &mut Vec<Vec<BigInt>>) {
    v.sort();
    v.dedup();
}

/// Drops rays that are nonnegative combinations of the other rays and the lineality space.
fn remove_redundant(mut rays: Vec<Vec<BigInt>>, lineality: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if rays.len() <= 1 {
        return rays;
    }
    let dim = rays[0].len();
    let mut i = 0;
    while i < rays.len() {
        let mut others: Vec<Vec<BigInt>> = rays.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
        for l in lineality {
            others.push(l.clone());
            others.push(l.iter().map(|x| -x).collect());
        }
        if cone_member_raw(&others, &rays[i], dim) {
            rays.remove(i);
        } else {
            i += 1;
        }
    }
    rays
}

/// The generators orthogonal to every functional in `g`.
pub fn orthogonal_subset(d: &VectorSet, g: &[IntVec]) -> Result<VectorSet> {
    for f in g {
        d.check_vector(f)?;
    }
    let raw: Vec<Vec<BigInt>> = g.iter().map(|f| f.entries().to_vec()).collect();
    VectorSet::new(d.index().clone(), orthogonal_raw(d.vectors(), &raw))
}

pub(crate) fn orthogonal_raw(gens: &[Vec<BigInt>], g: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    gens.iter()
        .filter(|d| g.iter().all(|f| dot(f, d).is_zero()))
        .cloned()
        .collect()
}

fn max_facet_l1(facets: &[Vec<BigInt>]) -> BigInt {
    facets.iter().map(|f| l1_norm(f)).max().unwrap_or_else(BigInt::zero)
}

/// `(L, M)` of the deep-in-the-cone lemma:
/// `L = (2 + (|D|+1)·max‖d‖∞)^(2·dim)` and `M = L·|D|·max‖f‖₁·max‖d‖∞`
/// (so `M = 0` when `D` or `F` is empty).
pub fn deep_threshold(dual: &DualRepresentation) -> (BigInt, BigInt) {
    let d = &dual.generators;
    let dmax = d.max_inf_norm();
    let n = big(d.len() as i64);
    let l = pow(&(big(2) + (&n + 1) * &dmax), 2 * d.dim());
    let m = &l * &n * max_facet_l1(dual.facets.vectors()) * &dmax;
    (l, m)
}

/// The modulus chain of the certificate construction.
///
/// `K` is the lcm of the fractionality constants of `D_G` over all facet
/// subsets `G`; `M̂ = M + |D|·max‖f‖₁·max‖d‖∞` (raised to 1 when it vanishes,
/// which only happens for empty `D` or `F`); `B = 2·M̂^|F|·K`.
pub fn cone_constants(dual: &DualRepresentation, facet_cap: usize) -> Result<ConeConstants> {
    let facets = dual.facets.vectors();
    if facets.len() > facet_cap {
        return Err(Error::ResourceLimit(format!(
            "{} facets exceed the subset-enumeration cap of {facet_cap}",
            facets.len()
        )));
    }
    let gens = dual.generators.vectors();
    let dim = dual.generators.dim();
    let (l, m) = deep_threshold(dual);
    let dmax = dual.generators.max_inf_norm();
    let n = big(gens.len() as i64);
    let mut mhat = &m + &n * max_facet_l1(facets) * &dmax;
    if mhat.is_zero() {
        mhat = BigInt::one();
    }
    let k = (0u64..(1u64 << facets.len()))
        .into_par_iter()
        .map(|mask| {
            let g: Vec<Vec<BigInt>> = facets
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, f)| f.clone())
                .collect();
            fractionality_constant_raw(&orthogonal_raw(gens, &g), dim)
        })
        .reduce(BigInt::one, |a, b| lcm(&a, &b));
    let mut bseq = vec![k.clone()];
    for i in 0..facets.len() {
        let next = &bseq[i] * &mhat;
        bseq.push(next);
    }
    let b = big(2) * bseq.last().expect("chain is nonempty");
    Ok(ConeConstants { l, m, mhat, k, bseq, b })
}

/// Whether `v` is a nonnegative real combination of the generators (exact LP).
pub fn cone_member(d: &VectorSet, v: &IntVec) -> Result<bool> {
    d.check_vector(v)?;
    Ok(cone_member_raw(d.vectors(), v.entries(), d.dim()))
}

/// Rational variant of [`cone_member`]; the point is scaled to an integer vector.
pub fn cone_member_rat(d: &VectorSet, v: &RatVec) -> Result<bool> {
    if d.index() != v.index() {
        return Err(Error::IndexMismatch {
            expected: d.index().names().join(","),
            found: v.index().names().join(","),
        });
    }
    let den = v.entries().iter().fold(BigInt::one(), |acc, x| lcm(&acc, x.denom()));
    let scaled: Vec<BigInt> = v.entries().iter().map(|x| (x * &den).to_integer()).collect();
    Ok(cone_member_raw(d.vectors(), &scaled, d.dim()))
}

pub(crate) fn cone_member_raw(gens: &[Vec<BigInt>], v: &[BigInt], dim: usize) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let mut p = MixedProgram::new();
    let lam: Vec<usize> = (0..gens.len()).map(|j| p.add_nonneg(format!("l{j}"), false)).collect();
    for i in 0..dim {
        let terms = gens
            .iter()
            .zip(&lam)
            .filter(|(g, _)| !g[i].is_zero())
            .map(|(g, &j)| (j, g[i].clone()))
            .collect();
        p.add_constraint(terms, Sense::Eq, v[i].clone());
    }
    matches!(lp_solve(&p).map(|o| o.status), Ok(Status::Optimal))
}

/// Whether every facet product with `v` is at least `m`.
pub fn is_deep(dual: &DualRepresentation, v: &IntVec, m: &BigInt) -> bool {
    dual.facets.vectors().iter().all(|f| dot(f, v.entries()) >= *m)
}
