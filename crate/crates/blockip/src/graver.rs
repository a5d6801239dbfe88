//! Graver bases, minimal nonnegative solutions and base-solution decompositions.
//!
//! * [`graver_basis`] runs a completion procedure: starting from `±` a kernel
//!   lattice basis, sums of elements that are not sign-compatible are reduced
//!   by conformal subtraction and added back until nothing new appears.
//!   Candidates are processed in increasing `(ℓ1, lex)` order.
//! * [`minimal_solutions`] enumerates the ⊑-minimal `v ≥ 0` with `Dv = b`,
//!   i.e. the elements with last coordinate 1 in the Hilbert basis of
//!   `{(v,z) ≥ 0 : Dv − zb = 0}`, by the Contejean–Devie completion restricted
//!   to `z ≤ 1`. The `z = 0` part of the same run is the set of nonnegative
//!   Graver elements of `D`.
//! * [`graver_decompose`] splits a solution into a minimal solution plus
//!   nonnegative Graver elements; [`base_solutions`] enumerates all solutions
//!   inside a norm box.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::hermite::solve_integer_system;
use crate::numerics::{add_vec, big, conformal_leq_raw, dot, inf_norm, l1_norm, pow, sub_vec, IntMat, IntVec};

/// Work limits for the enumeration routines in this module.
#[derive(Clone, Debug)]
pub struct GraverOptions {
    /// Maximum number of candidate vectors examined by one call.
    pub max_candidates: usize,
}

impl Default for GraverOptions {
    fn default() -> Self {
        GraverOptions {
            max_candidates: 2_000_000,
        }
    }
}

/// The ⊑-minimal nonzero integer kernel elements of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraverBasis {
    pub matrix: IntMat,
    /// Sorted lexicographically.
    pub elements: Vec<IntVec>,
}

/// `w = base + Σ multiplicity·part`, every part a nonnegative Graver element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraverDecomposition {
    pub base: IntVec,
    pub parts: Vec<(IntVec, BigInt)>,
}

impl GraverDecomposition {
    /// Re-sums the decomposition.
    pub fn total(&self) -> IntVec {
        let mut acc = self.base.entries().to_vec();
        for (g, k) in &self.parts {
            for (a, x) in acc.iter_mut().zip(g.entries()) {
                *a += x * k;
            }
        }
        IntVec::from_parts(self.base.index().clone(), acc)
    }
}

/// `(2·rows·Δ + 1)^rows`, the ℓ1 bound on Graver elements.
pub fn graver_norm_bound(d: &IntMat) -> BigInt {
    let t = d.nrows();
    pow(&(big(2 * t as i64) * d.max_abs() + 1), t)
}

/// `(2·rows·(Δ + ‖b‖∞) + 1)^rows`, the default norm box for base solutions.
pub fn base_norm_bound(d: &IntMat, b: &[BigInt]) -> BigInt {
    let t = d.nrows();
    pow(&(big(2 * t as i64) * (d.max_abs() + inf_norm(b)) + 1), t)
}

type Key = (usize, Vec<Vec<BigInt>>);
type VecCache = Mutex<HashMap<Key, Arc<Vec<Vec<BigInt>>>>>;
type SolCache = Mutex<HashMap<(Key, Vec<BigInt>), Arc<MinimalSolutions>>>;

fn graver_cache() -> &'static VecCache {
    static C: OnceLock<VecCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn solution_cache() -> &'static SolCache {
    static C: OnceLock<SolCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn key(d: &IntMat) -> Key {
    (d.ncols(), d.rows().to_vec())
}

/// Computes the Graver basis of `D`.
pub fn graver_basis(d: &IntMat, opts: &GraverOptions) -> Result<GraverBasis> {
    let raw = graver_raw(d, opts)?;
    Ok(GraverBasis {
        matrix: d.clone(),
        elements: raw.iter().map(|g| IntVec::from_parts(d.col_index().clone(), g.clone())).collect(),
    })
}

pub(crate) fn graver_raw(d: &IntMat, opts: &GraverOptions) -> Result<Arc<Vec<Vec<BigInt>>>> {
    let k = key(d);
    if let Some(hit) = graver_cache().lock().expect("cache poisoned").get(&k) {
        return Ok(hit.clone());
    }
    let elements = Arc::new(completion(d, opts)?);
    let bound = graver_norm_bound(d);
    if let Some(g) = elements.iter().find(|g| l1_norm(g) > bound) {
        return Err(Error::Internal(format!("Graver element {g:?} exceeds the norm bound {bound}")));
    }
    graver_cache().lock().expect("cache poisoned").insert(k, elements.clone());
    Ok(elements)
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    l1: BigInt,
    v: Vec<BigInt>,
}

fn sign_compatible(a: &[BigInt], b: &[BigInt]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.sign() == y.sign() || x.is_zero() || y.is_zero())
}

fn normal_form(mut v: Vec<BigInt>, basis: &[Vec<BigInt>]) -> Vec<BigInt> {
    'outer: loop {
        if v.iter().all(|x| x.is_zero()) {
            return v;
        }
        for g in basis {
            if conformal_leq_raw(g, &v) {
                v = sub_vec(&v, g);
                continue 'outer;
            }
        }
        return v;
    }
}

fn completion(d: &IntMat, opts: &GraverOptions) -> Result<Vec<Vec<BigInt>>> {
    let n = d.ncols();
    let zero = vec![BigInt::zero(); d.nrows()];
    let Some(sol) = solve_integer_system(d.rows(), &zero, n) else {
        return Err(Error::Internal("homogeneous system reported unsolvable".into()));
    };
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for k in &sol.kernel {
        for v in [k.clone(), k.iter().map(|x| -x).collect::<Vec<_>>()] {
            if seen.insert(v.clone()) {
                heap.push(Reverse(Candidate { l1: l1_norm(&v), v }));
            }
        }
    }
    let mut examined = 0usize;
    while let Some(Reverse(Candidate { v, .. })) = heap.pop() {
        examined += 1;
        if examined > opts.max_candidates {
            return Err(Error::ResourceLimit(format!(
                "Graver completion examined more than {} candidates",
                opts.max_candidates
            )));
        }
        let r = normal_form(v, &basis);
        if r.iter().all(|x| x.is_zero()) {
            continue;
        }
        for g in &basis {
            if !sign_compatible(g, &r) {
                let s = add_vec(g, &r);
                if s.iter().any(|x| !x.is_zero()) && seen.insert(s.clone()) {
                    heap.push(Reverse(Candidate { l1: l1_norm(&s), v: s }));
                }
            }
        }
        basis.push(r);
    }
    // keep only ⊑-minimal elements
    let mut out: Vec<Vec<BigInt>> = basis
        .iter()
        .filter(|g| !basis.iter().any(|h| h != *g && conformal_leq_raw(h, g)))
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Minimal solutions and the nonnegative kernel Hilbert basis of one system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct MinimalSolutions {
    /// ⊑-minimal `v ≥ 0` with `Dv = b`, sorted.
    pub solutions: Vec<Vec<BigInt>>,
    /// Minimal nonzero `g ≥ 0` with `Dg = 0`, sorted.
    pub kernel: Vec<Vec<BigInt>>,
}

/// All ⊑-minimal `v ≥ 0` with `Dv = b`; empty if there is none, `{0}` for `b = 0`.
pub fn minimal_solutions(d: &IntMat, b: &IntVec, opts: &GraverOptions) -> Result<Vec<IntVec>> {
    if d.row_index() != b.index() {
        return Err(Error::IndexMismatch {
            expected: d.row_index().names().join(","),
            found: b.index().names().join(","),
        });
    }
    let sols = minimal_raw(d, b.entries(), opts)?;
    Ok(sols
        .solutions
        .iter()
        .map(|v| IntVec::from_parts(d.col_index().clone(), v.clone()))
        .collect())
}

/// The nonnegative elements of the Graver basis of `D`, sorted.
pub fn nonnegative_graver(d: &IntMat, opts: &GraverOptions) -> Result<Vec<IntVec>> {
    let zero = vec![BigInt::zero(); d.nrows()];
    let sols = minimal_raw(d, &zero, opts)?;
    Ok(sols
        .kernel
        .iter()
        .map(|v| IntVec::from_parts(d.col_index().clone(), v.clone()))
        .collect())
}

pub(crate) fn minimal_raw(d: &IntMat, b: &[BigInt], opts: &GraverOptions) -> Result<Arc<MinimalSolutions>> {
    let k = (key(d), b.to_vec());
    if let Some(hit) = solution_cache().lock().expect("cache poisoned").get(&k) {
        return Ok(hit.clone());
    }
    let mut res = contejean_devie(d, b, opts)?;
    if b.iter().all(|x| x.is_zero()) {
        res.solutions = vec![vec![BigInt::zero(); d.ncols()]];
    }
    let res = Arc::new(res);
    solution_cache().lock().expect("cache poisoned").insert(k, res.clone());
    Ok(res)
}

fn contejean_devie(d: &IntMat, b: &[BigInt], opts: &GraverOptions) -> Result<MinimalSolutions> {
    let n = d.ncols();
    let homogeneous = b.iter().all(|x| x.is_zero());
    // columns of [D | −b]; the extra column is only used for a nonzero b
    let mut cols: Vec<Vec<BigInt>> = d.columns();
    if !homogeneous {
        cols.push(b.iter().map(|x| -x).collect());
    }
    let width = cols.len();
    let image = |p: &[BigInt]| -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); d.nrows()];
        for (c, k) in cols.iter().zip(p) {
            if !k.is_zero() {
                for (a, x) in acc.iter_mut().zip(c) {
                    *a += x * k;
                }
            }
        }
        acc
    };
    let mut found: Vec<Vec<BigInt>> = Vec::new();
    let mut frontier: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for j in 0..width {
        let mut e = vec![BigInt::zero(); width];
        e[j] = BigInt::one();
        frontier.insert(e);
    }
    let mut examined = 0usize;
    while !frontier.is_empty() {
        let mut next: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        let mut level_solutions = Vec::new();
        let mut open = Vec::new();
        for p in frontier {
            if found.iter().any(|s| dominates(&p, s)) {
                continue;
            }
            let ap = image(&p);
            if ap.iter().all(|x| x.is_zero()) {
                level_solutions.push(p);
            } else {
                open.push((p, ap));
            }
        }
        found.extend(level_solutions);
        for (p, ap) in open {
            for j in 0..width {
                if !homogeneous && j == n && !p[n].is_zero() {
                    continue;
                }
                if dot(&ap, &cols[j]).is_negative() {
                    let mut q = p.clone();
                    q[j] += 1;
                    if found.iter().any(|s| dominates(&q, s)) {
                        continue;
                    }
                    examined += 1;
                    if examined > opts.max_candidates {
                        return Err(Error::ResourceLimit(format!(
                            "minimal-solution search examined more than {} candidates",
                            opts.max_candidates
                        )));
                    }
                    next.insert(q);
                }
            }
        }
        frontier = next;
    }
    let mut solutions = Vec::new();
    let mut kernel = Vec::new();
    for s in found {
        if !homogeneous && s[n].is_one() {
            solutions.push(s[..n].to_vec());
        } else {
            kernel.push(s[..n].to_vec());
        }
    }
    solutions.sort();
    kernel.sort();
    Ok(MinimalSolutions { solutions, kernel })
}

/// `p ≥ s` componentwise.
fn dominates(p: &[BigInt], s: &[BigInt]) -> bool {
    p.iter().zip(s).all(|(a, b)| a >= b)
}

/// Splits `w` into a minimal solution plus nonnegative Graver elements by
/// greedily subtracting the largest possible multiple of each element.
pub fn graver_decompose(d: &IntMat, b: &IntVec, w: &IntVec, opts: &GraverOptions) -> Result<GraverDecomposition> {
    if d.col_index() != w.index() || d.row_index() != b.index() {
        return Err(Error::IndexMismatch {
            expected: d.col_index().names().join(","),
            found: w.index().names().join(","),
        });
    }
    if !w.is_nonnegative() || d.apply(w)? != *b {
        return Err(Error::Precondition("w must be a nonnegative solution of Dw = b".into()));
    }
    let zero = vec![BigInt::zero(); d.nrows()];
    let kernel = minimal_raw(d, &zero, opts)?;
    let mut rest = w.entries().to_vec();
    let mut parts = Vec::new();
    loop {
        let mut progressed = false;
        for g in &kernel.kernel {
            let mult = g
                .iter()
                .zip(&rest)
                .filter(|(gi, _)| !gi.is_zero())
                .map(|(gi, ri)| ri.div_floor(gi))
                .min()
                .unwrap_or_else(BigInt::zero);
            if mult.is_positive() {
                for (r, gi) in rest.iter_mut().zip(g) {
                    *r -= gi * &mult;
                }
                parts.push((IntVec::from_parts(w.index().clone(), g.clone()), mult));
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    let bound = base_norm_bound(d, b.entries());
    if inf_norm(&rest) > bound {
        return Err(Error::Internal("decomposition base exceeds the base-solution bound".into()));
    }
    Ok(GraverDecomposition {
        base: IntVec::from_parts(w.index().clone(), rest),
        parts,
    })
}

/// All `v ≥ 0` with `Dv = b` and `‖v‖∞ ≤ bound` (default [`base_norm_bound`]),
/// sorted lexicographically.
pub fn base_solutions(d: &IntMat, b: &IntVec, bound: Option<&BigInt>, opts: &GraverOptions) -> Result<Vec<IntVec>> {
    if d.row_index() != b.index() {
        return Err(Error::IndexMismatch {
            expected: d.row_index().names().join(","),
            found: b.index().names().join(","),
        });
    }
    let bound = bound.cloned().unwrap_or_else(|| base_norm_bound(d, b.entries()));
    let raw = bounded_solutions(d.rows(), b.entries(), d.ncols(), &bound, opts)?;
    Ok(raw.into_iter().map(|v| IntVec::from_parts(d.col_index().clone(), v)).collect())
}

/// Depth-first enumeration with interval propagation on the row activities.
pub(crate) fn bounded_solutions(
    rows: &[Vec<BigInt>],
    b: &[BigInt],
    n: usize,
    bound: &BigInt,
    opts: &GraverOptions,
) -> Result<Vec<Vec<BigInt>>> {
    // suffix_min[j][i], suffix_max[j][i]: activity range of row i over columns j..
    let m = rows.len();
    let mut suffix_min = vec![vec![BigInt::zero(); m]; n + 1];
    let mut suffix_max = vec![vec![BigInt::zero(); m]; n + 1];
    for j in (0..n).rev() {
        for i in 0..m {
            let a = &rows[i][j];
            let (lo, hi) = if a.is_negative() {
                (a * bound, BigInt::zero())
            } else {
                (BigInt::zero(), a * bound)
            };
            suffix_min[j][i] = &suffix_min[j + 1][i] + lo;
            suffix_max[j][i] = &suffix_max[j + 1][i] + hi;
        }
    }
    let mut out = Vec::new();
    let mut current = vec![BigInt::zero(); n];
    let mut residual = b.to_vec();
    let mut nodes = 0usize;
    dfs(rows, n, bound, &suffix_min, &suffix_max, 0, &mut current, &mut residual, &mut out, &mut nodes, opts)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    rows: &[Vec<BigInt>],
    n: usize,
    bound: &BigInt,
    smin: &[Vec<BigInt>],
    smax: &[Vec<BigInt>],
    j: usize,
    current: &mut Vec<BigInt>,
    residual: &mut Vec<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
    nodes: &mut usize,
    opts: &GraverOptions,
) -> Result<()> {
    *nodes += 1;
    if *nodes > opts.max_candidates {
        return Err(Error::ResourceLimit(format!(
            "bounded enumeration visited more than {} nodes",
            opts.max_candidates
        )));
    }
    if residual.iter().enumerate().any(|(i, r)| *r < smin[j][i] || *r > smax[j][i]) {
        return Ok(());
    }
    if j == n {
        out.push(current.clone());
        return Ok(());
    }
    // range for x_j implied by each row with the remaining columns relaxed
    let mut lo = BigInt::zero();
    let mut hi = bound.clone();
    for (i, row) in rows.iter().enumerate() {
        let a = &row[j];
        if a.is_zero() {
            continue;
        }
        // residual − a·x ∈ [smin[j+1], smax[j+1]]
        let low_num = &residual[i] - &smax[j + 1][i];
        let high_num = &residual[i] - &smin[j + 1][i];
        let (l, h) = if a.is_positive() {
            (ceil_div(&low_num, a), high_num.div_floor(a))
        } else {
            (ceil_div(&high_num, a), low_num.div_floor(a))
        };
        lo = lo.max(l);
        hi = hi.min(h);
    }
    let mut x = lo;
    while x <= hi {
        for (i, row) in rows.iter().enumerate() {
            residual[i] -= &row[j] * &x;
        }
        current[j] = x.clone();
        let r = dfs(rows, n, bound, smin, smax, j + 1, current, residual, out, nodes, opts);
        for (i, row) in rows.iter().enumerate() {
            residual[i] += &row[j] * &x;
        }
        r?;
        x += 1;
    }
    current[j] = BigInt::zero();
    Ok(())
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}
