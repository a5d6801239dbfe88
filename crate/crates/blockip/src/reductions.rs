//! Instance generators: reductions from 3-SAT and Subset Sum, the 4-block
//! coefficient-shrinking transformation, and seeded random instances.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    CnfFormula, FourBlockGroup, FourBlockProgram, NFoldBrick, NFoldProgram, NFoldSolution, TwoStageBrick,
    TwoStageProgram, TwoStageWitness,
};
use crate::numerics::{big, mat_vec, IntMat, IntVec, Index};

/// The first `n` primes, by trial division.
pub fn first_primes(n: usize) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::with_capacity(n);
    let mut c = 2i64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Columns of one literal gadget `(a, b, c, d, e)` in a clause brick.
const GADGET: usize = 5;

/// Encodes a 3-CNF formula as a two-stage program with one global variable.
///
/// The global `x` encodes an assignment: variable `k` is false iff the `k`-th
/// prime divides `x`. Each clause becomes one brick of 10 rows and 16 locals:
/// three divisibility gadgets forcing `b = [p ∤ x]`, plus a slack row asking
/// that the signed sum of the three `b` values reach `1 − #negative literals`.
pub fn gen_3sat(f: &CnfFormula) -> TwoStageProgram {
    let primes = first_primes(f.num_vars);
    let globals = Index::new(["x"]);
    let mut local_names = Vec::new();
    for lit in 1..=3 {
        for v in ["a", "b", "c", "d", "e"] {
            local_names.push(format!("{v}{lit}"));
        }
    }
    local_names.push("s".to_string());
    let locals = Index::new(local_names);
    let rows = Index::range("t", 10);
    let bricks = f
        .clauses
        .iter()
        .map(|clause| {
            let mut d = vec![vec![0i64; 16]; 10];
            let mut a = [0i64; 10];
            let mut b = vec![0i64; 10];
            let mut negatives = 0;
            for (j, &lit) in clause.iter().enumerate() {
                let p = primes[lit.unsigned_abs() as usize - 1];
                let (r, c) = (3 * j, GADGET * j);
                // −x + p·a + b + c = 0
                a[r] = -1;
                d[r][c] = p;
                d[r][c + 1] = 1;
                d[r][c + 2] = 1;
                // (p − 2)·b − c − d = 0
                d[r + 1][c + 1] = p - 2;
                d[r + 1][c + 2] = -1;
                d[r + 1][c + 3] = -1;
                // b + e = 1
                d[r + 2][c + 1] = 1;
                d[r + 2][c + 4] = 1;
                b[r + 2] = 1;
                // clause row
                d[9][c + 1] = if lit > 0 { 1 } else { -1 };
                if lit < 0 {
                    negatives += 1;
                }
            }
            d[9][15] = -1;
            b[9] = 1 - negatives;
            let to = |m: Vec<Vec<i64>>| m.into_iter().map(|r| r.into_iter().map(big).collect()).collect();
            TwoStageBrick {
                a: IntMat::new(rows.clone(), globals.clone(), a.iter().map(|&v| vec![big(v)]).collect()).expect("10x1"),
                d: IntMat::new(rows.clone(), locals.clone(), to(d)).expect("10x16"),
                b: IntVec::from_i64(rows.clone(), &b).expect("length 10"),
            }
        })
        .collect();
    TwoStageProgram::new(globals, locals, rows, bricks).expect("consistent by construction")
}

/// The global value encoding an assignment (product of the primes of false variables).
pub fn encode_assignment(assignment: &[bool]) -> BigInt {
    first_primes(assignment.len())
        .into_iter()
        .zip(assignment)
        .filter(|(_, &v)| !v)
        .fold(BigInt::from(1), |acc, (p, _)| acc * p)
}

/// Encodes `Σ a_i y_i = t, y ∈ {0,1}^n` as a uniform n-fold program.
///
/// Brick `i` has locals `(y, y', z)` with `y + y' = 1` and `z = a_i·y`; the
/// single linking row sums the `z`. Costs, if given, are charged on `y`.
pub fn gen_subset_sum(a: &[u64], t: u64, costs: Option<&[i64]>) -> Result<NFoldProgram> {
    if let Some(c) = costs {
        if c.len() != a.len() {
            return Err(Error::Dimension(format!("{} costs for {} items", c.len(), a.len())));
        }
    }
    let locals = Index::new(["y", "y'", "z"]);
    let link = Index::new(["s"]);
    let local_rows = Index::new(["t0", "t1"]);
    let c = IntMat::new(link.clone(), locals.clone(), vec![vec![big(0), big(0), big(1)]])?;
    let bricks = a
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            let d = vec![vec![big(1), big(1), big(0)], vec![-BigInt::from(ai), big(0), big(1)]];
            let cost = costs.map_or(0, |c| c[i]);
            Ok(NFoldBrick {
                d: IntMat::new(local_rows.clone(), locals.clone(), d)?,
                b: IntVec::from_i64(local_rows.clone(), &[1, 0])?,
                c: IntVec::from_i64(locals.clone(), &[cost, 0, 0])?,
                multiplicity: 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    NFoldProgram::new(c, IntVec::new(link, vec![BigInt::from(t)])?, local_rows, bricks)
}

/// Dense working copy of a 4-block program that grows by variables and rows.
struct FourBlockWork {
    gnames: Vec<String>,
    lnames: Vec<String>,
    bmat: Vec<Vec<BigInt>>,
    cmat: Vec<Vec<BigInt>>,
    amat: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    d: Vec<Vec<Vec<BigInt>>>,
    b: Vec<Vec<BigInt>>,
}

impl FourBlockWork {
    fn add_global(&mut self, name: String) -> usize {
        self.gnames.push(name);
        for r in self.bmat.iter_mut().chain(self.amat.iter_mut()) {
            r.push(BigInt::zero());
        }
        self.gnames.len() - 1
    }

    fn add_local(&mut self, name: String) -> usize {
        self.lnames.push(name);
        for r in self.cmat.iter_mut().chain(self.d.iter_mut().flatten()) {
            r.push(BigInt::zero());
        }
        self.lnames.len() - 1
    }

    fn add_link_row(&mut self) -> usize {
        self.bmat.push(vec![BigInt::zero(); self.gnames.len()]);
        self.cmat.push(vec![BigInt::zero(); self.lnames.len()]);
        self.rhs.push(BigInt::zero());
        self.rhs.len() - 1
    }

    fn add_local_row(&mut self) -> usize {
        self.amat.push(vec![BigInt::zero(); self.gnames.len()]);
        for (d, b) in self.d.iter_mut().zip(self.b.iter_mut()) {
            d.push(vec![BigInt::zero(); self.lnames.len()]);
            b.push(BigInt::zero());
        }
        self.amat.len() - 1
    }

    /// Locals `q, q'` per group with `q' = x_j` and `q = q'` in the first `m`
    /// groups, `q = 0` in the others; returns the column of `q`.
    fn copy_global(&mut self, tag: &str, i: usize, j: usize, m: usize) -> usize {
        let q = self.add_local(format!("{tag}({i},{j})"));
        let qq = self.add_local(format!("{tag}'({i},{j})"));
        let r1 = self.add_local_row();
        self.amat[r1][j] = big(-1);
        let r2 = self.add_local_row();
        for (t, d) in self.d.iter_mut().enumerate() {
            d[r1][qq] = big(1);
            d[r2][q] = big(1);
            if t < m {
                d[r2][qq] = big(-1);
            }
        }
        q
    }

    fn large(m: &[Vec<BigInt>]) -> Vec<(usize, usize, BigInt)> {
        let mut out = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.abs() >= big(2) {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }
}

/// Rewrites a uniform 4-block program whose `A`, `B̂`, `C` entries are bounded
/// by the number of groups `n` into an equivalent one with all of those
/// entries in `{−1, 0, 1}`.
///
/// * `C`: a large `c_ij` becomes a global `z(i,j) = Σ_t y_{t,j}` entering row `i`
///   with coefficient `c_ij` (which moves the large entry into `B̂`).
/// * `A`: a large `a_ij` becomes a global `z'(i,j) = Σ_t p(i,j)_t` where the
///   local copies `p(i,j)_t` equal `x_j` in `|a_ij|` groups and 0 elsewhere.
/// * `B̂`: a large `b_ij` is replaced directly by `±Σ_t q(i,j)_t` with the same
///   kind of local copies.
///
/// Original variables keep their names; blocks are padded with zero rows and
/// columns to a common size at the end.
pub fn shrink_4block(p: &FourBlockProgram) -> Result<FourBlockProgram> {
    p.validate()?;
    if !p.is_uniform() {
        return Err(Error::Precondition("the coefficient-shrinking transform needs a uniform program".into()));
    }
    let n = p.groups.len();
    let limit = BigInt::from(n);
    for (what, m) in [("A", &p.a), ("Bmat", &p.bmat), ("C", &p.c)] {
        if m.max_abs() > limit {
            return Err(Error::Precondition(format!("{what} has an entry larger than the {n} groups")));
        }
    }
    let mut w = FourBlockWork {
        gnames: p.globals.names().to_vec(),
        lnames: p.locals.names().to_vec(),
        bmat: p.bmat.rows().to_vec(),
        cmat: p.c.rows().to_vec(),
        amat: p.a.rows().to_vec(),
        rhs: p.rhs.entries().to_vec(),
        d: p.groups.iter().map(|g| g.d.rows().to_vec()).collect(),
        b: p.groups.iter().map(|g| g.b.entries().to_vec()).collect(),
    };
    for (i, j, c) in FourBlockWork::large(&w.cmat) {
        let z = w.add_global(format!("z({i},{j})"));
        let r = w.add_link_row();
        w.bmat[r][z] = big(-1);
        w.cmat[r][j] = big(1);
        w.bmat[i][z] = c;
        w.cmat[i][j] = BigInt::zero();
    }
    for (i, j, a) in FourBlockWork::large(&w.amat) {
        let m = a.abs().try_into().expect("bounded by the group count");
        let q = w.copy_global("p", i, j, m);
        let z = w.add_global(format!("z'({i},{j})"));
        let r = w.add_link_row();
        w.bmat[r][z] = big(-1);
        w.cmat[r][q] = big(1);
        w.amat[i][j] = BigInt::zero();
        w.amat[i][z] = big(if a.is_positive() { 1 } else { -1 });
    }
    for (i, j, b) in FourBlockWork::large(&w.bmat) {
        let m = b.abs().try_into().expect("bounded by the group count");
        let q = w.copy_global("q", i, j, m);
        w.bmat[i][j] = BigInt::zero();
        w.cmat[i][q] = big(if b.is_positive() { 1 } else { -1 });
    }
    let size = w.gnames.len().max(w.lnames.len()).max(w.rhs.len()).max(w.amat.len());
    while w.gnames.len() < size {
        let k = w.gnames.len();
        w.add_global(format!("pad{k}"));
    }
    while w.lnames.len() < size {
        let k = w.lnames.len();
        w.add_local(format!("pad{k}"));
    }
    while w.rhs.len() < size {
        w.add_link_row();
    }
    while w.amat.len() < size {
        w.add_local_row();
    }
    let globals = Index::new(w.gnames);
    let locals = Index::new(w.lnames);
    let link_rows = Index::range("s", size);
    let local_rows = Index::range("t", size);
    let out = FourBlockProgram {
        bmat: IntMat::new(link_rows.clone(), globals.clone(), w.bmat)?,
        c: IntMat::new(link_rows.clone(), locals.clone(), w.cmat)?,
        a: IntMat::new(local_rows.clone(), globals.clone(), w.amat)?,
        rhs: IntVec::new(link_rows.clone(), w.rhs)?,
        groups: w
            .d
            .into_iter()
            .zip(w.b)
            .map(|(d, b)| {
                Ok(FourBlockGroup {
                    c: None,
                    a: None,
                    d: IntMat::new(local_rows.clone(), locals.clone(), d)?,
                    b: IntVec::new(local_rows.clone(), b)?,
                })
            })
            .collect::<Result<_>>()?,
        globals,
        locals,
        link_rows,
        local_rows,
    };
    out.validate()?;
    Ok(out)
}

/// Size and entry ranges for random instances.
#[derive(Clone, Debug)]
pub struct RandomParams {
    pub globals: usize,
    pub locals: usize,
    /// Local rows per brick.
    pub rows: usize,
    /// Linking rows (n-fold only).
    pub link_rows: usize,
    pub bricks: usize,
    /// Bound on `|D|` entries.
    pub delta: i64,
    /// Bound on `|A|` (two-stage) or `|C|` (n-fold) entries.
    pub coupling: i64,
    /// Bound on planted solution entries.
    pub value: i64,
    /// Bound on `|c|` cost entries (n-fold only).
    pub cost: i64,
    /// Draw n-fold `D` entries from `[0, delta]` with no zero column, so every
    /// brick solution is bounded by `‖b‖∞`.
    pub nonnegative_d: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            globals: 1,
            locals: 2,
            rows: 1,
            link_rows: 1,
            bricks: 3,
            delta: 3,
            coupling: 10,
            value: 5,
            cost: 5,
            nonnegative_d: false,
        }
    }
}

fn rand_nonnegative_mat(rng: &mut ChaCha8Rng, rows: &Index, cols: &Index, bound: i64) -> IntMat {
    let mut data: Vec<Vec<BigInt>> = (0..rows.len())
        .map(|_| (0..cols.len()).map(|_| big(rng.gen_range(0..=bound))).collect())
        .collect();
    if !data.is_empty() && bound > 0 {
        for j in 0..cols.len() {
            if data.iter().all(|r| r[j].is_zero()) {
                let i = rng.gen_range(0..rows.len());
                data[i][j] = big(rng.gen_range(1..=bound));
            }
        }
    }
    IntMat::new(rows.clone(), cols.clone(), data).expect("sized by the indices")
}

fn rand_mat(rng: &mut ChaCha8Rng, rows: &Index, cols: &Index, bound: i64) -> IntMat {
    let data = (0..rows.len())
        .map(|_| (0..cols.len()).map(|_| big(rng.gen_range(-bound..=bound))).collect())
        .collect();
    IntMat::new(rows.clone(), cols.clone(), data).expect("sized by the indices")
}

fn rand_vec(rng: &mut ChaCha8Rng, index: &Index, lo: i64, hi: i64) -> IntVec {
    IntVec::from_parts(index.clone(), (0..index.len()).map(|_| big(rng.gen_range(lo..=hi))).collect())
}

/// A two-stage program with a planted solution. With `perturb`, one entry of
/// one right-hand side is shifted by one afterwards, so the planted vector is
/// no longer a solution (the program may or may not stay feasible).
pub fn gen_random_twostage(params: &RandomParams, seed: u64, perturb: bool) -> (TwoStageProgram, TwoStageWitness) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let globals = Index::range("x", params.globals);
    let locals = Index::range("y", params.locals);
    let rows = Index::range("t", params.rows);
    let u = rand_vec(&mut rng, &globals, 0, params.value);
    let mut bricks = Vec::new();
    let mut v = Vec::new();
    for _ in 0..params.bricks {
        let a = rand_mat(&mut rng, &rows, &globals, params.coupling);
        let d = rand_mat(&mut rng, &rows, &locals, params.delta);
        let vi = rand_vec(&mut rng, &locals, 0, params.value);
        let b: Vec<BigInt> = mat_vec(a.rows(), u.entries())
            .into_iter()
            .zip(mat_vec(d.rows(), vi.entries()))
            .map(|(x, y)| x + y)
            .collect();
        bricks.push(TwoStageBrick {
            a,
            d,
            b: IntVec::from_parts(rows.clone(), b),
        });
        v.push(vi);
    }
    if perturb && !bricks.is_empty() && !rows.is_empty() {
        let i = rng.gen_range(0..bricks.len());
        let k = rng.gen_range(0..rows.len());
        let mut b = bricks[i].b.entries().to_vec();
        b[k] += if rng.gen_bool(0.5) { 1 } else { -1 };
        bricks[i].b = IntVec::from_parts(rows.clone(), b);
    }
    let p = TwoStageProgram::new(globals, locals, rows, bricks).expect("consistent by construction");
    (p, TwoStageWitness { u, v })
}

/// A uniform n-fold program with a planted feasible solution and random
/// costs; the planted solution's value bounds the optimum from above.
pub fn gen_random_nfold(params: &RandomParams, seed: u64, perturb: bool) -> (NFoldProgram, NFoldSolution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locals = Index::range("y", params.locals);
    let link = Index::range("s", params.link_rows);
    let local_rows = Index::range("t", params.rows);
    let c = rand_mat(&mut rng, &link, &locals, params.coupling);
    let mut a = vec![BigInt::zero(); link.len()];
    let mut bricks = Vec::new();
    let mut sol = Vec::new();
    for _ in 0..params.bricks {
        let d = if params.nonnegative_d {
            rand_nonnegative_mat(&mut rng, &local_rows, &locals, params.delta)
        } else {
            rand_mat(&mut rng, &local_rows, &locals, params.delta)
        };
        let y = rand_vec(&mut rng, &locals, 0, params.value);
        for (x, cy) in a.iter_mut().zip(mat_vec(c.rows(), y.entries())) {
            *x += cy;
        }
        bricks.push(NFoldBrick {
            b: IntVec::from_parts(local_rows.clone(), mat_vec(d.rows(), y.entries())),
            d,
            c: rand_vec(&mut rng, &locals, -params.cost, params.cost),
            multiplicity: 1,
        });
        sol.push(vec![(y, 1)]);
    }
    if perturb && !bricks.is_empty() && !local_rows.is_empty() {
        let i = rng.gen_range(0..bricks.len());
        let k = rng.gen_range(0..local_rows.len());
        let mut b = bricks[i].b.entries().to_vec();
        b[k] += 1;
        bricks[i].b = IntVec::from_parts(local_rows.clone(), b);
    }
    let p = NFoldProgram::new(c, IntVec::from_parts(link, a), local_rows, bricks).expect("consistent by construction");
    (p, NFoldSolution { bricks: sol })
}

/// A uniform 4-block program with `params.bricks` groups and a planted
/// solution `(x, y_1..y_n)`. `A`, `B̂` and `C` entries are bounded by
/// `min(coupling, groups)` so the coefficient-shrinking transform applies.
pub fn gen_random_fourblock(params: &RandomParams, seed: u64, perturb: bool) -> (FourBlockProgram, IntVec, Vec<IntVec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let globals = Index::range("x", params.globals);
    let locals = Index::range("y", params.locals);
    let link_rows = Index::range("s", params.link_rows);
    let local_rows = Index::range("t", params.rows);
    let bound = params.coupling.min(params.bricks as i64);
    let bmat = rand_mat(&mut rng, &link_rows, &globals, bound);
    let c = rand_mat(&mut rng, &link_rows, &locals, bound);
    let a = rand_mat(&mut rng, &local_rows, &globals, bound);
    let x = rand_vec(&mut rng, &globals, 0, params.value);
    let mut rhs = mat_vec(bmat.rows(), x.entries());
    let ax = mat_vec(a.rows(), x.entries());
    let mut groups = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..params.bricks {
        let d = rand_mat(&mut rng, &local_rows, &locals, params.delta);
        let y = rand_vec(&mut rng, &locals, 0, params.value);
        for (r, cy) in rhs.iter_mut().zip(mat_vec(c.rows(), y.entries())) {
            *r += cy;
        }
        let b = ax.iter().zip(mat_vec(d.rows(), y.entries())).map(|(p, q)| p + q).collect();
        groups.push(FourBlockGroup {
            c: None,
            a: None,
            d,
            b: IntVec::from_parts(local_rows.clone(), b),
        });
        ys.push(y);
    }
    if perturb && !groups.is_empty() && !local_rows.is_empty() {
        let i = rng.gen_range(0..groups.len());
        let k = rng.gen_range(0..local_rows.len());
        let mut b = groups[i].b.entries().to_vec();
        b[k] += 1;
        groups[i].b = IntVec::from_parts(local_rows.clone(), b);
    }
    let p = FourBlockProgram {
        bmat,
        c,
        a,
        rhs: IntVec::from_parts(link_rows.clone(), rhs),
        groups,
        globals,
        locals,
        link_rows,
        local_rows,
    };
    p.validate().expect("consistent by construction");
    (p, x, ys)
}

/// A random 3-CNF formula with distinct variables in every clause where possible.
pub fn gen_random_cnf(num_vars: usize, num_clauses: usize, seed: u64) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..num_clauses)
        .map(|_| {
            let mut c = [0i64; 3];
            for k in 0..3 {
                loop {
                    let v = rng.gen_range(1..=num_vars as i64);
                    if num_vars < 3 || !c[..k].iter().any(|l| l.abs() == v) {
                        c[k] = if rng.gen_bool(0.5) { v } else { -v };
                        break;
                    }
                }
            }
            c
        })
        .collect();
    CnfFormula::new(num_vars, clauses).expect("literals in range")
}
