//! Brute-force reference implementations.
//!
//! Everything here is deliberately independent of the solver modules: only
//! the numeric types, the error type and the plain program data types are
//! shared. Arithmetic is done in `i128`; inputs that do not fit are rejected
//! with a resource-limit error. Search boxes are always explicit arguments.

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::model::{CnfFormula, FourBlockProgram, NFoldProgram, NFoldSolution, TwoStageProgram};
use crate::numerics::{IntMat, IntVec, VectorSet};

fn small(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .filter(|v| v.unsigned_abs() < 1u128 << 100)
        .ok_or_else(|| Error::ResourceLimit(format!("{x} is too large for the brute-force oracles")))
}

fn small_vec(v: &[BigInt]) -> Result<Vec<i128>> {
    v.iter().map(small).collect()
}

fn small_rows(m: &IntMat) -> Result<Vec<Vec<i128>>> {
    m.rows().iter().map(|r| small_vec(r)).collect()
}

fn big_vec(v: &[i128]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

// ---------------------------------------------------------------------------
// Generic bounded search over a linear equation system.

/// `Σ a_j x_j = rhs` over variables with inclusive integer domains.
#[derive(Clone, Debug, Default)]
struct EqSystem {
    rows: Vec<Vec<(usize, i128)>>,
    rhs: Vec<i128>,
}

impl EqSystem {
    fn push(&mut self, terms: Vec<(usize, i128)>, rhs: i128) {
        self.rows.push(terms.into_iter().filter(|(_, a)| *a != 0).collect());
        self.rhs.push(rhs);
    }
}

struct Search<'a> {
    sys: &'a EqSystem,
    nodes: usize,
    node_limit: usize,
    limit_solutions: usize,
    found: Vec<Vec<i128>>,
}

impl Search<'_> {
    fn propagate(&self, dom: &mut [(i128, i128)]) -> bool {
        loop {
            let mut changed = false;
            for (row, &r) in self.sys.rows.iter().zip(&self.sys.rhs) {
                let mut lo = 0i128;
                let mut hi = 0i128;
                for &(j, a) in row {
                    let (l, h) = dom[j];
                    if a > 0 {
                        lo += a * l;
                        hi += a * h;
                    } else {
                        lo += a * h;
                        hi += a * l;
                    }
                }
                if r < lo || r > hi {
                    return false;
                }
                for &(j, a) in row {
                    let (l, h) = dom[j];
                    let (own_lo, own_hi) = if a > 0 { (a * l, a * h) } else { (a * h, a * l) };
                    // a·x_j ∈ [r − (hi − own_hi), r − (lo − own_lo)]
                    let lo_t = r - (hi - own_hi);
                    let hi_t = r - (lo - own_lo);
                    let (nl, nh) = if a > 0 {
                        (div_ceil(lo_t, a), div_floor(hi_t, a))
                    } else {
                        (div_ceil(hi_t, a), div_floor(lo_t, a))
                    };
                    let nl = nl.max(l);
                    let nh = nh.min(h);
                    if nl > nh {
                        return false;
                    }
                    if (nl, nh) != (l, h) {
                        dom[j] = (nl, nh);
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn run(&mut self, mut dom: Vec<(i128, i128)>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::ResourceLimit(format!("brute-force search exceeded {} nodes", self.node_limit)));
        }
        if !self.propagate(&mut dom) {
            return Ok(());
        }
        let pick = dom
            .iter()
            .enumerate()
            .filter(|(_, (l, h))| l < h)
            .min_by_key(|(j, (l, h))| (h - l, *j))
            .map(|(j, _)| j);
        let Some(j) = pick else {
            self.found.push(dom.iter().map(|(l, _)| *l).collect());
            return Ok(());
        };
        let (l, h) = dom[j];
        for x in l..=h {
            let mut d = dom.clone();
            d[j] = (x, x);
            self.run(d)?;
            if self.found.len() >= self.limit_solutions {
                return Ok(());
            }
        }
        Ok(())
    }
}

const NODE_LIMIT: usize = 20_000_000;

fn search(sys: &EqSystem, dom: Vec<(i128, i128)>, max_solutions: usize) -> Result<Vec<Vec<i128>>> {
    let mut s = Search {
        sys,
        nodes: 0,
        node_limit: NODE_LIMIT,
        limit_solutions: max_solutions,
        found: Vec::new(),
    };
    s.run(dom)?;
    let mut out = s.found;
    out.sort();
    Ok(out)
}

/// Solutions of `D y = b` with `0 ≤ y ≤ bound`, sorted.
fn box_solutions(d: &[Vec<i128>], b: &[i128], n: usize, bound: i128, max: usize) -> Result<Vec<Vec<i128>>> {
    let mut sys = EqSystem::default();
    for (row, &r) in d.iter().zip(b) {
        sys.push(row.iter().enumerate().map(|(j, &a)| (j, a)).collect(), r);
    }
    search(&sys, vec![(0, bound); n], max)
}

// ---------------------------------------------------------------------------
// Integer cones.

/// Membership of `v` in the integer cone of `D`, enumerating coefficient
/// vectors `λ ∈ [0, coeff_box]^|D|` (with propagation).
pub fn intcone_member_bf(d: &VectorSet, v: &IntVec, coeff_box: u64) -> Result<bool> {
    d.check_vector(v)?;
    let gens: Vec<Vec<i128>> = d.vectors().iter().map(|g| small_vec(g)).collect::<Result<_>>()?;
    let target = small_vec(v.entries())?;
    let mut sys = EqSystem::default();
    for (x, &t) in target.iter().enumerate() {
        sys.push(gens.iter().enumerate().map(|(j, g)| (j, g[x])).collect(), t);
    }
    Ok(!search(&sys, vec![(0, coeff_box as i128); gens.len()], 1)?.is_empty())
}

/// Exact integer-cone membership in dimension 1 (any number of generators) and
/// dimension 2 (at most three generators), by semigroup arithmetic.
pub fn intcone_member_exact(d: &VectorSet, v: &IntVec) -> Result<bool> {
    d.check_vector(v)?;
    let gens: Vec<Vec<i128>> = d.vectors().iter().map(|g| small_vec(g)).collect::<Result<_>>()?;
    let target = small_vec(v.entries())?;
    match d.dim() {
        0 => Ok(true),
        1 => {
            let a: Vec<i128> = gens.iter().map(|g| g[0]).collect();
            semigroup_member(&a, target[0])
        }
        2 if gens.len() <= 3 => plane_member(&gens, &target),
        _ => Err(Error::ResourceLimit("exact integer-cone oracle supports dimension ≤ 2 with ≤ 3 generators".into())),
    }
}

/// Membership of `x` in the additive monoid generated by the integers `a`.
fn semigroup_member(a: &[i128], x: i128) -> Result<bool> {
    let a: Vec<i128> = a.iter().copied().filter(|&v| v != 0).collect();
    if a.is_empty() {
        return Ok(x == 0);
    }
    let g = a.iter().fold(0, |g, &v| gcd(g, v));
    if x % g != 0 {
        return Ok(false);
    }
    let has_pos = a.iter().any(|&v| v > 0);
    let has_neg = a.iter().any(|&v| v < 0);
    if has_pos && has_neg {
        return Ok(true);
    }
    let sign = if has_pos { 1 } else { -1 };
    let x = sign * x / g;
    if x < 0 {
        return Ok(false);
    }
    let a: Vec<i128> = a.iter().map(|&v| sign * v / g).collect();
    let m = *a.iter().min().expect("nonempty");
    if m > 10_000_000 {
        return Err(Error::ResourceLimit("semigroup generator too large for the residue table".into()));
    }
    // smallest monoid element in each residue class mod m
    let m_us = m as usize;
    let mut dist = vec![i128::MAX; m_us];
    dist[0] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i128, 0usize)));
    while let Some(Reverse((dcur, r))) = heap.pop() {
        if dcur > dist[r] {
            continue;
        }
        for &ai in &a {
            let nd = dcur + ai;
            let nr = ((r as i128 + ai) % m) as usize;
            if nd < dist[nr] {
                dist[nr] = nd;
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    Ok(dist[(x % m) as usize] <= x)
}

fn det2(a: &[i128], b: &[i128]) -> i128 {
    a[0] * b[1] - a[1] * b[0]
}

fn plane_member(gens: &[Vec<i128>], v: &[i128]) -> Result<bool> {
    let nz: Vec<&Vec<i128>> = gens.iter().filter(|g| g[0] != 0 || g[1] != 0).collect();
    if v == [0, 0] {
        return Ok(true);
    }
    if nz.is_empty() {
        return Ok(false);
    }
    // independent pair, if any
    let mut pair = None;
    'find: for i in 0..nz.len() {
        for j in i + 1..nz.len() {
            if det2(nz[i], nz[j]) != 0 {
                pair = Some((i, j));
                break 'find;
            }
        }
    }
    let Some((i, j)) = pair else {
        // all generators on one line through the origin
        let g0 = nz[0];
        let gg = gcd(g0[0], g0[1]);
        let u = [g0[0] / gg, g0[1] / gg];
        if det2(&u, v) != 0 {
            return Ok(false);
        }
        let coord = |w: &[i128]| if u[0] != 0 { w[0] / u[0] } else { w[1] / u[1] };
        let a: Vec<i128> = nz.iter().map(|g| coord(g)).collect();
        return semigroup_member(&a, coord(v));
    };
    let (p, q) = (nz[i], nz[j]);
    let rest: Vec<&Vec<i128>> = nz.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, g)| *g).collect();
    let mut det = det2(p, q);
    // adjugate of [p q]: λ_p = (q1·w0 − q0·w1)/det, λ_q = (p0·w1 − p1·w0)/det
    let adj = |w: &[i128]| -> (i128, i128) { (q[1] * w[0] - q[0] * w[1], p[0] * w[1] - p[1] * w[0]) };
    let (mut a0, mut b0) = adj(v);
    if rest.is_empty() {
        if det < 0 {
            det = -det;
            a0 = -a0;
            b0 = -b0;
        }
        return Ok(a0 >= 0 && b0 >= 0 && a0 % det == 0 && b0 % det == 0);
    }
    let c = rest[0];
    let (mut a1, mut b1) = adj(c);
    if det < 0 {
        det = -det;
        a0 = -a0;
        b0 = -b0;
        a1 = -a1;
        b1 = -b1;
    }
    // need s ≥ 0 with a0 − s·a1 ≥ 0, b0 − s·b1 ≥ 0, both divisible by det
    let mut lo: i128 = 0;
    let mut hi: Option<i128> = None;
    for (c0, c1) in [(a0, a1), (b0, b1)] {
        if c1 > 0 {
            let h = div_floor(c0, c1);
            hi = Some(hi.map_or(h, |x: i128| x.min(h)));
        } else if c1 < 0 {
            lo = lo.max(div_ceil(c0, c1));
        } else if c0 < 0 {
            return Ok(false);
        }
    }
    let end = match hi {
        Some(h) => h.min(lo + det - 1),
        None => lo + det - 1,
    };
    let mut s = lo;
    while s <= end {
        if (a0 - s * a1) % det == 0 && (b0 - s * b1) % det == 0 {
            return Ok(true);
        }
        s += 1;
    }
    Ok(false)
}

/// Lattice membership by enumerating integer coefficients in `[−box, box]`.
pub fn lattice_member_bf(d: &VectorSet, v: &IntVec, coeff_box: u64) -> Result<bool> {
    d.check_vector(v)?;
    let gens: Vec<Vec<i128>> = d.vectors().iter().map(|g| small_vec(g)).collect::<Result<_>>()?;
    let target = small_vec(v.entries())?;
    let mut sys = EqSystem::default();
    for (x, &t) in target.iter().enumerate() {
        sys.push(gens.iter().enumerate().map(|(j, g)| (j, g[x])).collect(), t);
    }
    let b = coeff_box as i128;
    Ok(!search(&sys, vec![(-b, b); gens.len()], 1)?.is_empty())
}

// ---------------------------------------------------------------------------
// Graver bases and minimal solutions.

fn conformal(u: &[i128], v: &[i128]) -> bool {
    u.iter().zip(v).all(|(&a, &b)| a == 0 || (a > 0 && b >= a) || (a < 0 && b <= a))
}

/// The ⊑-minimal nonzero kernel elements of `D` with `‖g‖₁ ≤ l1_bound`, sorted.
pub fn graver_bf(d: &IntMat, l1_bound: u64) -> Result<Vec<IntVec>> {
    let rows = small_rows(d)?;
    let n = d.ncols();
    let bound = l1_bound as i128;
    let mut kernel: Vec<Vec<i128>> = Vec::new();
    let mut cur = vec![0i128; n];
    let mut visited = 0usize;
    enumerate_l1(&rows, n, 0, bound, &mut cur, &mut kernel, &mut visited)?;
    kernel.sort_by_key(|g| (g.iter().map(|x| x.abs()).sum::<i128>(), g.clone()));
    let mut minimal: Vec<Vec<i128>> = Vec::new();
    for g in kernel {
        if !minimal.iter().any(|m| conformal(m, &g)) {
            minimal.push(g);
        }
    }
    minimal.sort();
    Ok(minimal
        .into_iter()
        .map(|g| IntVec::from_parts(d.col_index().clone(), big_vec(&g)))
        .collect())
}

fn enumerate_l1(
    rows: &[Vec<i128>],
    n: usize,
    j: usize,
    budget: i128,
    cur: &mut Vec<i128>,
    out: &mut Vec<Vec<i128>>,
    visited: &mut usize,
) -> Result<()> {
    *visited += 1;
    if *visited > NODE_LIMIT {
        return Err(Error::ResourceLimit("Graver enumeration exceeded its node limit".into()));
    }
    if n == 0 {
        return Ok(());
    }
    if j == n - 1 {
        // the last coordinate is forced by any row that uses it
        let partial: Vec<i128> = rows.iter().map(|r| r.iter().zip(cur.iter()).take(n - 1).map(|(a, x)| a * x).sum()).collect();
        let candidates: Vec<i128> = match rows.iter().position(|r| r[n - 1] != 0) {
            Some(i) => {
                let a = rows[i][n - 1];
                if partial[i] % a != 0 {
                    vec![]
                } else {
                    vec![-partial[i] / a]
                }
            }
            None => (-budget..=budget).collect(),
        };
        for x in candidates {
            if x.abs() > budget {
                continue;
            }
            cur[j] = x;
            let zero = rows.iter().zip(&partial).all(|(r, p)| p + r[n - 1] * x == 0);
            if zero && cur.iter().any(|&c| c != 0) {
                out.push(cur.clone());
            }
        }
        cur[j] = 0;
        return Ok(());
    }
    for x in -budget..=budget {
        cur[j] = x;
        enumerate_l1(rows, n, j + 1, budget - x.abs(), cur, out, visited)?;
    }
    cur[j] = 0;
    Ok(())
}

/// The componentwise-minimal `v ≥ 0` with `Dv = b` inside `[0, bound]^n`, sorted.
pub fn minimal_solutions_bf(d: &IntMat, b: &IntVec, bound: u64) -> Result<Vec<IntVec>> {
    let rows = small_rows(d)?;
    let rhs = small_vec(b.entries())?;
    let mut sols = box_solutions(&rows, &rhs, d.ncols(), bound as i128, usize::MAX)?;
    sols.sort_by_key(|s| (s.iter().sum::<i128>(), s.clone()));
    let mut minimal: Vec<Vec<i128>> = Vec::new();
    for s in sols {
        if !minimal.iter().any(|m| m.iter().zip(&s).all(|(a, b)| a <= b)) {
            minimal.push(s);
        }
    }
    minimal.sort();
    Ok(minimal
        .into_iter()
        .map(|s| IntVec::from_parts(d.col_index().clone(), big_vec(&s)))
        .collect())
}

/// All `v ≥ 0` with `Dv = b` and `‖v‖∞ ≤ bound`, sorted.
pub fn box_solutions_bf(d: &IntMat, b: &IntVec, bound: u64) -> Result<Vec<IntVec>> {
    let rows = small_rows(d)?;
    let rhs = small_vec(b.entries())?;
    Ok(box_solutions(&rows, &rhs, d.ncols(), bound as i128, usize::MAX)?
        .into_iter()
        .map(|s| IntVec::from_parts(d.col_index().clone(), big_vec(&s)))
        .collect())
}

// ---------------------------------------------------------------------------
// Programs.

/// Result of a box-bounded search: the verdict holds within the box only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoxVerdict<W> {
    Feasible(W),
    Infeasible,
}

/// Searches `u ∈ [0, u_box]^x` in lexicographic order; each brick is checked
/// exactly when it has one or two rows and few columns, otherwise by
/// enumerating `v ∈ [0, v_box]^y`. Returns the first feasible `u`.
pub fn solve_twostage_bf(p: &TwoStageProgram, u_box: u64, v_box: u64) -> Result<BoxVerdict<IntVec>> {
    let nx = p.globals.len();
    let bricks: Vec<(Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<i128>)> = p
        .bricks
        .iter()
        .map(|b| Ok((small_rows(&b.a)?, small_rows(&b.d)?, small_vec(b.b.entries())?)))
        .collect::<Result<_>>()?;
    let mut u = vec![0i128; nx];
    let total = (u_box as u128 + 1).checked_pow(nx as u32).unwrap_or(u128::MAX);
    if total > NODE_LIMIT as u128 {
        return Err(Error::ResourceLimit("global search box too large".into()));
    }
    loop {
        let mut ok = true;
        for (a, d, b) in &bricks {
            let rhs: Vec<i128> = b
                .iter()
                .zip(a)
                .map(|(bi, row)| bi - row.iter().zip(&u).map(|(x, y)| x * y).sum::<i128>())
                .collect();
            if !brick_feasible(d, &rhs, p.locals.len(), v_box)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(BoxVerdict::Feasible(IntVec::from_parts(p.globals.clone(), big_vec(&u))));
        }
        // next u in lexicographic order
        let mut k = nx;
        loop {
            if k == 0 {
                return Ok(BoxVerdict::Infeasible);
            }
            k -= 1;
            if u[k] < u_box as i128 {
                u[k] += 1;
                for x in u.iter_mut().skip(k + 1) {
                    *x = 0;
                }
                break;
            }
        }
        if nx == 0 {
            return Ok(BoxVerdict::Infeasible);
        }
    }
}

fn brick_feasible(d: &[Vec<i128>], rhs: &[i128], ny: usize, v_box: u64) -> Result<bool> {
    let t = d.len();
    if (t == 1) || (t == 2 && ny <= 3) {
        let gens: Vec<Vec<i128>> = (0..ny).map(|j| d.iter().map(|r| r[j]).collect()).collect();
        return if t == 1 {
            semigroup_member(&gens.iter().map(|g| g[0]).collect::<Vec<_>>(), rhs[0])
        } else {
            plane_member(&gens, rhs)
        };
    }
    Ok(!box_solutions(d, rhs, ny, v_box as i128, 1)?.is_empty())
}

/// Minimises an n-fold program over `y_i ∈ [0, y_box]^y` for every brick copy.
/// Returns the optimum value with a solution, or infeasibility within the box.
pub fn solve_nfold_bf(p: &NFoldProgram, y_box: u64) -> Result<BoxVerdict<(BigInt, NFoldSolution)>> {
    let c_rows = small_rows(&p.c)?;
    let a = small_vec(p.a.entries())?;
    let ny = p.locals.len();
    // per brick entry: solutions with their linking contribution and cost
    let mut per_brick: Vec<Vec<(Vec<i128>, Vec<i128>, i128)>> = Vec::new();
    for br in &p.bricks {
        let d = small_rows(&br.d)?;
        let b = small_vec(br.b.entries())?;
        let c = small_vec(br.c.entries())?;
        let sols = box_solutions(&d, &b, ny, y_box as i128, usize::MAX)?;
        per_brick.push(
            sols.into_iter()
                .map(|y| {
                    let link: Vec<i128> = c_rows.iter().map(|r| r.iter().zip(&y).map(|(x, z)| x * z).sum()).collect();
                    let cost: i128 = c.iter().zip(&y).map(|(x, z)| x * z).sum();
                    (y, link, cost)
                })
                .collect(),
        );
    }
    // dynamic programme over copies: partial linking sum -> (cost, choices)
    let mut states: BTreeMap<Vec<i128>, (i128, Vec<(usize, usize)>)> = BTreeMap::new();
    states.insert(vec![0; a.len()], (0, Vec::new()));
    for (bi, br) in p.bricks.iter().enumerate() {
        for _ in 0..br.multiplicity {
            let mut next: BTreeMap<Vec<i128>, (i128, Vec<(usize, usize)>)> = BTreeMap::new();
            for (sum, (cost, choice)) in &states {
                for (si, (_, link, c)) in per_brick[bi].iter().enumerate() {
                    let s: Vec<i128> = sum.iter().zip(link).map(|(x, y)| x + y).collect();
                    let nc = cost + c;
                    let better = next.get(&s).is_none_or(|(old, _)| nc < *old);
                    if better {
                        let mut ch = choice.clone();
                        ch.push((bi, si));
                        next.insert(s, (nc, ch));
                    }
                }
            }
            if next.len() > 5_000_000 {
                return Err(Error::ResourceLimit("n-fold oracle state space too large".into()));
            }
            states = next;
        }
    }
    let Some((cost, choice)) = states.get(&a) else {
        return Ok(BoxVerdict::Infeasible);
    };
    let mut bricks: Vec<Vec<(IntVec, usize)>> = vec![Vec::new(); p.bricks.len()];
    for &(bi, si) in choice {
        let y = IntVec::from_parts(p.locals.clone(), big_vec(&per_brick[bi][si].0));
        match bricks[bi].iter_mut().find(|(v, _)| *v == y) {
            Some(entry) => entry.1 += 1,
            None => bricks[bi].push((y, 1)),
        }
    }
    Ok(BoxVerdict::Feasible((BigInt::from(*cost), NFoldSolution { bricks })))
}

/// The smallest feasible `x` of a two-stage program with one global variable
/// and one row per brick, or `None`; exact without any box.
///
/// Brick `i` asks for `b_i − a_i·x` in the monoid generated by its row of `D`.
/// Once `|b_i − a_i·x|` exceeds the Frobenius bound `max|d|²`, membership only
/// depends on `x` modulo the lcm `P` of the row gcds and on its sign. So it
/// suffices to test every `x` where some residual is small or changes sign,
/// plus one period after each of them.
pub fn solve_twostage_scalar(p: &TwoStageProgram) -> Result<Option<BigInt>> {
    if p.globals.len() != 1 || p.rows.len() != 1 {
        return Err(Error::Precondition("the scalar oracle needs one global variable and one row".into()));
    }
    let bricks: Vec<(i128, Vec<i128>, i128)> = p
        .bricks
        .iter()
        .map(|br| Ok((small(&br.a.rows()[0][0])?, small_vec(&br.d.rows()[0])?, small(&br.b.entries()[0])?)))
        .collect::<Result<_>>()?;
    let w = bricks
        .iter()
        .map(|(_, d, _)| d.iter().map(|v| v * v).max().unwrap_or(0))
        .max()
        .unwrap_or(0)
        + 1;
    let period = bricks.iter().fold(1i128, |l, (_, d, _)| {
        let g = d.iter().fold(0, |g, &v| gcd(g, v)).max(1);
        l / gcd(l, g) * g
    });
    let mut near: Vec<i128> = vec![0];
    for &(a, _, b) in &bricks {
        if a == 0 {
            continue;
        }
        let (lo, hi) = if a > 0 {
            (div_ceil(b - w, a), div_floor(b + w, a))
        } else {
            (div_ceil(b + w, a), div_floor(b - w, a))
        };
        near.extend(lo.max(0)..=hi.max(-1));
        // the residual changes sign between these two
        let cross = div_floor(b, a);
        near.extend([cross, cross + 1].into_iter().filter(|&x| x >= 0));
    }
    let mut candidates: Vec<i128> = near.iter().flat_map(|&e| e..=e + period).collect();
    candidates.sort_unstable();
    candidates.dedup();
    for x in candidates {
        let mut ok = true;
        for (a, d, b) in &bricks {
            if !semigroup_member(d, b - a * x)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(BigInt::from(x)));
        }
    }
    Ok(None)
}

/// Feasibility of a 4-block program with per-variable upper bounds
/// (`global_bounds` for `x`, `local_bounds` for every group's `y`).
pub fn fourblock_feasible_bf(p: &FourBlockProgram, global_bounds: &[u64], local_bounds: &[u64]) -> Result<bool> {
    let nx = p.globals.len();
    let ny = p.locals.len();
    if global_bounds.len() != nx || local_bounds.len() != ny {
        return Err(Error::Dimension("bound vector lengths do not match the program".into()));
    }
    let n = p.groups.len();
    let var_y = |t: usize, j: usize| nx + t * ny + j;
    let mut sys = EqSystem::default();
    let bmat = small_rows(&p.bmat)?;
    let rhs = small_vec(p.rhs.entries())?;
    let cs: Vec<Vec<Vec<i128>>> = (0..n).map(|t| small_rows(p.group_c(t))).collect::<Result<_>>()?;
    for (i, &r) in rhs.iter().enumerate() {
        let mut terms: Vec<(usize, i128)> = bmat[i].iter().enumerate().map(|(j, &a)| (j, a)).collect();
        for (t, c) in cs.iter().enumerate() {
            terms.extend(c[i].iter().enumerate().map(|(j, &a)| (var_y(t, j), a)));
        }
        sys.push(terms, r);
    }
    for t in 0..n {
        let a = small_rows(p.group_a(t))?;
        let d = small_rows(&p.groups[t].d)?;
        let b = small_vec(p.groups[t].b.entries())?;
        for (i, &r) in b.iter().enumerate() {
            let mut terms: Vec<(usize, i128)> = a[i].iter().enumerate().map(|(j, &v)| (j, v)).collect();
            terms.extend(d[i].iter().enumerate().map(|(j, &v)| (var_y(t, j), v)));
            sys.push(terms, r);
        }
    }
    let mut dom: Vec<(i128, i128)> = global_bounds.iter().map(|&b| (0, b as i128)).collect();
    for _ in 0..n {
        dom.extend(local_bounds.iter().map(|&b| (0, b as i128)));
    }
    Ok(!search(&sys, dom, 1)?.is_empty())
}

/// A satisfying assignment by exhaustive enumeration, if any.
pub fn sat_bf(f: &CnfFormula) -> Option<Vec<bool>> {
    (0u64..1 << f.num_vars)
        .map(|mask| (0..f.num_vars).map(|k| mask >> k & 1 == 1).collect::<Vec<bool>>())
        .find(|a| f.eval(a))
}

/// Whether some subset of `a` sums to `t` (dynamic programming over sums).
pub fn subset_sum_dp(a: &[u64], t: u64) -> bool {
    let t = t as usize;
    let mut reach = vec![false; t + 1];
    reach[0] = true;
    for &x in a {
        let x = x as usize;
        if x > t {
            continue;
        }
        for s in (x..=t).rev() {
            if reach[s - x] {
                reach[s] = true;
            }
        }
    }
    reach[t]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intcone_examples() {
        let d = VectorSet::from_i64(1, &[&[3], &[5]]);
        assert!(!intcone_member_exact(&d, &IntVec::anon("t", &[7])).unwrap());
        assert!(intcone_member_exact(&d, &IntVec::anon("t", &[8])).unwrap());
        assert!(intcone_member_exact(&d, &IntVec::anon("t", &[0])).unwrap());
        assert!(!intcone_member_bf(&d, &IntVec::anon("t", &[7]), 10).unwrap());
        assert!(intcone_member_bf(&d, &IntVec::anon("t", &[8]), 10).unwrap());
    }

    #[test]
    fn exact_and_enumerated_cones_agree_in_the_plane() {
        let sets: &[&[&[i64]]] = &[
            &[&[1, 0], &[1, 2]],
            &[&[2, 1], &[-1, 1], &[0, -2]],
            &[&[1, 1], &[2, 2], &[-1, -1]],
            &[&[2, 0], &[0, 2], &[1, 1]],
            &[&[1, -2], &[2, 1], &[1, 2]],
        ];
        for gens in sets {
            let d = VectorSet::from_i64(2, gens);
            for x in -6..=6 {
                for y in -6..=6 {
                    let v = IntVec::anon("t", &[x, y]);
                    assert_eq!(
                        intcone_member_exact(&d, &v).unwrap(),
                        intcone_member_bf(&d, &v, 40).unwrap(),
                        "{gens:?} at ({x},{y})"
                    );
                }
            }
        }
    }

    #[test]
    fn graver_oracle_examples() {
        let g = graver_bf(&IntMat::from_rows_i64(&[&[1, -1]]), 6).unwrap();
        assert_eq!(g, vec![IntVec::anon("y", &[-1, -1]), IntVec::anon("y", &[1, 1])]);
        let g = graver_bf(&IntMat::from_rows_i64(&[&[2, -3]]), 10).unwrap();
        assert_eq!(g, vec![IntVec::anon("y", &[-3, -2]), IntVec::anon("y", &[3, 2])]);
        assert!(graver_bf(&IntMat::from_rows_i64(&[&[2]]), 10).unwrap().is_empty());
    }

    #[test]
    fn program_oracle_examples() {
        let p = TwoStageProgram::from_i64(1, 1, &[(&[&[1]], &[&[2]], &[3])]).unwrap();
        assert_eq!(solve_twostage_bf(&p, 5, 5).unwrap(), BoxVerdict::Feasible(IntVec::anon("x", &[1])));
        let p = TwoStageProgram::from_i64(1, 1, &[(&[&[2]], &[&[2]], &[1])]).unwrap();
        assert_eq!(solve_twostage_bf(&p, 5, 5).unwrap(), BoxVerdict::Infeasible);
        let empty = TwoStageProgram::from_i64(0, 0, &[]).unwrap();
        assert!(matches!(solve_twostage_bf(&empty, 0, 0).unwrap(), BoxVerdict::Feasible(_)));
    }

    #[test]
    fn scalar_oracle_matches_box_search() {
        use crate::reductions::{gen_random_twostage, RandomParams};
        let params = RandomParams {
            locals: 2,
            bricks: 2,
            delta: 3,
            coupling: 4,
            value: 3,
            ..RandomParams::default()
        };
        for seed in 0..60 {
            let (p, _) = gen_random_twostage(&params, seed, seed % 2 == 1);
            let exact = solve_twostage_scalar(&p).unwrap();
            let boxed = match solve_twostage_bf(&p, 30, 200).unwrap() {
                BoxVerdict::Feasible(u) => Some(u.entries()[0].clone()),
                BoxVerdict::Infeasible => None,
            };
            assert_eq!(exact.filter(|x| *x <= BigInt::from(30)), boxed, "seed {seed}");
        }
        // the residual jumps from −860364278 to 13 without passing through [−10, 10]
        let p = TwoStageProgram::from_i64(1, 2, &[(&[&[-860364291]], &[&[3, 2]], &[-3441457151])]).unwrap();
        assert_eq!(solve_twostage_scalar(&p).unwrap(), Some(BigInt::from(4)));
    }

    #[test]
    fn sat_and_subset_sum() {
        let f = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
        assert!(sat_bf(&f).is_none());
        assert!(subset_sum_dp(&[3, 5, 7], 8));
        assert!(!subset_sum_dp(&[3, 5, 7], 4));
        assert!(subset_sum_dp(&[3, 5, 7], 0));
    }
}
