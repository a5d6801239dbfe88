//! Optimisation of uniform n-fold programs.
//!
//! Every brick right-hand side is first split into a faithful decomposition:
//! a multiset of small conformal parts such that every brick solution splits
//! into solutions of the parts. Bricks with equal `(D, part, c)` then form one
//! type with a count, and the program becomes a compact mixed model:
//!
//! * `ζ` (integer) counts how often a minimal solution serves a right-hand side,
//! * `δ` (integer) counts nonnegative Graver elements of a `D`, each charged at
//!   the cheapest cost vector among the bricks with that `D`,
//! * `ω` (continuous) distributes the minimal solutions over cost types.
//!
//! With `ζ` and `δ` fixed the `ω` rows form a transportation problem, so an LP
//! vertex is integral and the witness is read off directly.
//!
//! Every solution of `Dv = b` with `v ≥ 0` is a minimal solution plus a sum of
//! nonnegative Graver elements, so minimal solutions serve as base solutions.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graver::{base_solutions, minimal_raw, GraverOptions};
use crate::hermite::{lll_reduce, reduce_against, solve_integer_system};
use crate::mip::{mip_solve, tu_round, MipOptions, MixedProgram, Sense, Status};
use crate::model::{NFoldBrick, NFoldProgram, NFoldSolution};
use crate::numerics::{big, dot, inf_norm, l1_norm, IntMat, IntVec};

/// A split of `target` into conformal parts, each at most `threshold` in ℓ∞.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaithfulDecomposition {
    pub target: IntVec,
    /// Distinct parts with their multiplicities, sorted by part.
    pub parts: Vec<(IntVec, usize)>,
    pub threshold: BigInt,
}

impl FaithfulDecomposition {
    /// Multiplicity-weighted sum of the parts.
    pub fn total(&self) -> IntVec {
        let mut acc = vec![BigInt::zero(); self.target.len()];
        for (p, k) in &self.parts {
            for (a, x) in acc.iter_mut().zip(p.entries()) {
                *a += x * BigInt::from(*k);
            }
        }
        IntVec::from_parts(self.target.index().clone(), acc)
    }
}

#[derive(Clone, Debug)]
pub struct NFoldOptions {
    /// Initial decomposition threshold; doubled whenever a step fails.
    pub xi0: u64,
    /// Use every solution within the base-norm box instead of the minimal solutions.
    pub full_base: bool,
    pub mip: MipOptions,
    pub graver: GraverOptions,
}

impl Default for NFoldOptions {
    fn default() -> Self {
        NFoldOptions {
            xi0: 4,
            full_base: false,
            mip: MipOptions::default(),
            graver: GraverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NFoldOutcome {
    Optimum { value: BigInt, solution: NFoldSolution },
    Infeasible,
    Unbounded,
    ResourceLimit(String),
}

impl NFoldOutcome {
    pub fn value(&self) -> Option<&BigInt> {
        match self {
            NFoldOutcome::Optimum { value, .. } => Some(value),
            _ => None,
        }
    }
}

fn is_conformal_part(part: &[BigInt], b: &[BigInt]) -> bool {
    part.iter()
        .zip(b)
        .all(|(p, x)| p.is_zero() || (p.signum() == x.signum() && p.abs() <= x.abs()))
}

/// Decides whether every brick solution for `b` splits into solutions of the parts.
///
/// It suffices to split the ⊑-minimal solutions: any other solution is a
/// minimal one plus a nonnegative kernel element, which can be added to any
/// part. Each split is an integer program over the minimal solutions of the
/// parts and the nonnegative Graver elements of `D`.
pub fn faithful_check(d: &IntMat, b: &IntVec, parts: &[(IntVec, usize)], opts: &NFoldOptions) -> Result<bool> {
    if d.row_index() != b.index() {
        return Err(Error::IndexMismatch {
            expected: d.row_index().names().join(","),
            found: b.index().names().join(","),
        });
    }
    let raw: Vec<(Vec<BigInt>, usize)> = parts.iter().map(|(p, k)| (p.entries().to_vec(), *k)).collect();
    let mut sum = vec![BigInt::zero(); b.len()];
    for (p, k) in &raw {
        if p.len() != b.len() {
            return Err(Error::Dimension("part length differs from the right-hand side".into()));
        }
        if *k == 0 || p.iter().all(|x| x.is_zero()) || !is_conformal_part(p, b.entries()) {
            return Err(Error::Precondition("parts must be nonzero, conformal to b and of positive multiplicity".into()));
        }
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x * BigInt::from(*k);
        }
    }
    if sum != b.entries() {
        return Err(Error::Precondition("parts do not sum to b".into()));
    }
    check_raw(d, b.entries(), &raw, opts)
}

fn check_raw(d: &IntMat, b: &[BigInt], parts: &[(Vec<BigInt>, usize)], opts: &NFoldOptions) -> Result<bool> {
    let whole = minimal_raw(d, b, &opts.graver)?;
    if whole.solutions.is_empty() {
        return Ok(true);
    }
    let mut part_sols = Vec::with_capacity(parts.len());
    for (p, k) in parts {
        let sols = minimal_raw(d, p, &opts.graver)?;
        if sols.solutions.is_empty() {
            return Ok(false);
        }
        part_sols.push((sols, *k));
    }
    for v in &whole.solutions {
        let fits = |s: &Vec<BigInt>| s.iter().zip(v).all(|(a, b)| a <= b);
        let mut ilp = MixedProgram::new();
        let mut columns: Vec<(usize, &Vec<BigInt>)> = Vec::new();
        for (k, (sols, m)) in part_sols.iter().enumerate() {
            let mut count = Vec::new();
            for s in sols.solutions.iter().filter(|s| fits(s)) {
                let var = ilp.add_nonneg(format!("mu{k}"), true);
                columns.push((var, s));
                count.push((var, BigInt::from(1)));
            }
            if count.is_empty() {
                return Ok(false);
            }
            ilp.add_constraint(count, Sense::Eq, BigInt::from(*m));
        }
        for g in whole.kernel.iter().filter(|g| fits(g)) {
            let var = ilp.add_nonneg("nu", true);
            columns.push((var, g));
        }
        for (j, target) in v.iter().enumerate() {
            let terms: Vec<(usize, BigInt)> = columns
                .iter()
                .filter(|(_, s)| !s[j].is_zero())
                .map(|(var, s)| (*var, s[j].clone()))
                .collect();
            ilp.add_constraint(terms, Sense::Eq, target.clone());
        }
        let out = mip_solve(&ilp, &opts.mip)?;
        match out.status {
            Status::Infeasible => return Ok(false),
            Status::ResourceLimit => return Err(Error::ResourceLimit("split search exceeded the node limit".into())),
            _ => {}
        }
    }
    Ok(true)
}

/// One split `b = α′·b₀ + b′` with `‖b₀‖∞ ≤ Ξ`, `α′` a power of two, verified faithful.
///
/// Candidates are tried by decreasing `α′·‖b₀‖₁`, then increasing `α′`, then
/// lexicographically in `b₀`. `Ok(None)` means no candidate verifies.
pub fn faithful_step(d: &IntMat, b: &IntVec, xi: u64, opts: &NFoldOptions) -> Result<Option<(IntVec, usize, IntVec)>> {
    let xi_big = BigInt::from(xi);
    if inf_norm(b.entries()) <= xi_big {
        return Err(Error::Precondition("the right-hand side is already within the threshold".into()));
    }
    Ok(step_raw(d, b.entries(), &xi_big, opts)?.map(|(b0, alpha, rest)| {
        let idx = b.index().clone();
        (IntVec::from_parts(idx.clone(), b0), alpha, IntVec::from_parts(idx, rest))
    }))
}

type Step = (Vec<BigInt>, usize, Vec<BigInt>);

fn step_raw(d: &IntMat, b: &[BigInt], xi: &BigInt, opts: &NFoldOptions) -> Result<Option<Step>> {
    let ranges: Vec<(BigInt, BigInt)> = b
        .iter()
        .map(|x| {
            let m = x.abs().min(xi.clone());
            if x.is_negative() {
                (-m, BigInt::zero())
            } else {
                (BigInt::zero(), m)
            }
        })
        .collect();
    let mut candidates: Vec<(BigInt, usize, Vec<BigInt>)> = Vec::new();
    let mut cur: Vec<BigInt> = ranges.iter().map(|(l, _)| l.clone()).collect();
    loop {
        if cur.iter().any(|x| !x.is_zero()) {
            let mut alpha = 1usize;
            while cur.iter().zip(b).all(|(p, x)| p.abs() * BigInt::from(alpha) <= x.abs()) {
                candidates.push((l1_norm(&cur) * BigInt::from(alpha), alpha, cur.clone()));
                alpha *= 2;
            }
        }
        // odometer over the box
        let mut k = 0;
        while k < cur.len() {
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0.clone();
            k += 1;
        }
        if k == cur.len() {
            break;
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    for (_, alpha, b0) in candidates {
        let rest: Vec<BigInt> = b.iter().zip(&b0).map(|(x, p)| x - p * BigInt::from(alpha)).collect();
        let parts = if rest.iter().all(|x| x.is_zero()) {
            vec![(b0.clone(), alpha)]
        } else if rest == b0 {
            vec![(b0.clone(), alpha + 1)]
        } else {
            vec![(b0.clone(), alpha), (rest.clone(), 1)]
        };
        if check_raw(d, b, &parts, opts)? {
            return Ok(Some((b0, alpha, rest)));
        }
    }
    Ok(None)
}

/// Splits `b ≠ 0` into parts of ℓ∞ norm at most `Ξ`, starting from `Ξ = xi0`
/// and doubling `Ξ` whenever a step finds no faithful split.
pub fn faithful_decompose(d: &IntMat, b: &IntVec, xi0: u64, opts: &NFoldOptions) -> Result<FaithfulDecomposition> {
    if d.row_index() != b.index() {
        return Err(Error::IndexMismatch {
            expected: d.row_index().names().join(","),
            found: b.index().names().join(","),
        });
    }
    if b.is_zero() {
        return Err(Error::Precondition("cannot decompose a zero right-hand side".into()));
    }
    let mut xi = BigInt::from(xi0.max(1));
    'restart: loop {
        let mut parts: BTreeMap<Vec<BigInt>, usize> = BTreeMap::new();
        let mut rest = b.entries().to_vec();
        while inf_norm(&rest) > xi {
            match step_raw(d, &rest, &xi, opts)? {
                Some((b0, alpha, r)) => {
                    *parts.entry(b0).or_default() += alpha;
                    rest = r;
                }
                None => {
                    xi *= 2;
                    continue 'restart;
                }
            }
        }
        if rest.iter().any(|x| !x.is_zero()) {
            *parts.entry(rest).or_default() += 1;
        }
        let idx = b.index().clone();
        return Ok(FaithfulDecomposition {
            target: b.clone(),
            parts: parts.into_iter().map(|(p, k)| (IntVec::from_parts(idx.clone(), p), k)).collect(),
            threshold: xi,
        });
    }
}

/// The high-multiplicity program obtained by decomposing every right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    /// One brick per type `(D, part, c)`; its multiplicity is the type count.
    pub program: NFoldProgram,
    /// Per original brick, `(type, copies per original copy)`.
    pub provenance: Vec<Vec<(usize, usize)>>,
    /// Per original brick, its decomposition; `None` for a zero right-hand side.
    pub decompositions: Vec<Option<FaithfulDecomposition>>,
}

/// Replaces every brick by its decomposition parts and merges equal types.
pub fn expand_program(p: &NFoldProgram, opts: &NFoldOptions) -> Result<Expansion> {
    p.validate()?;
    let mut keys: Vec<(Vec<Vec<BigInt>>, Vec<BigInt>)> = Vec::new();
    let mut key_of: HashMap<(Vec<Vec<BigInt>>, Vec<BigInt>), usize> = HashMap::new();
    let brick_key: Vec<usize> = p
        .bricks
        .iter()
        .map(|br| {
            let k = (br.d.rows().to_vec(), br.b.entries().to_vec());
            let next = keys.len();
            *key_of.entry(k.clone()).or_insert_with(|| {
                keys.push(k);
                next
            })
        })
        .collect();
    let firsts: Vec<usize> = (0..keys.len())
        .map(|k| brick_key.iter().position(|&x| x == k).expect("every key has a brick"))
        .collect();
    let decs: Vec<Option<FaithfulDecomposition>> = firsts
        .par_iter()
        .map(|&i| {
            let br = &p.bricks[i];
            if br.b.is_zero() {
                Ok(None)
            } else {
                faithful_decompose(&br.d, &br.b, opts.xi0, opts).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let mut types: Vec<NFoldBrick> = Vec::new();
    let mut type_of: HashMap<(Vec<Vec<BigInt>>, Vec<BigInt>, Vec<BigInt>), usize> = HashMap::new();
    let mut provenance = Vec::with_capacity(p.bricks.len());
    let mut decompositions = Vec::with_capacity(p.bricks.len());
    for (i, br) in p.bricks.iter().enumerate() {
        let dec = &decs[brick_key[i]];
        let parts: Vec<(IntVec, usize)> = match dec {
            Some(dec) => dec.parts.clone(),
            None => vec![(br.b.clone(), 1)],
        };
        let mut prov = Vec::with_capacity(parts.len());
        for (part, per) in parts {
            let key = (br.d.rows().to_vec(), part.entries().to_vec(), br.c.entries().to_vec());
            let next = types.len();
            let t = *type_of.entry(key).or_insert(next);
            if t == next {
                types.push(NFoldBrick {
                    d: br.d.clone(),
                    b: part,
                    c: br.c.clone(),
                    multiplicity: 0,
                });
            }
            types[t].multiplicity += per * br.multiplicity;
            prov.push((t, per));
        }
        provenance.push(prov);
        decompositions.push(dec.clone());
    }
    let program = NFoldProgram::new(p.c.clone(), p.a.clone(), p.local_rows.clone(), types)?;
    Ok(Expansion {
        program,
        provenance,
        decompositions,
    })
}

/// Bricks sharing one matrix `D`, with the Graver variables of that matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagGroup {
    pub d: IntMat,
    /// Nonnegative Graver elements of `D`.
    pub graver: Vec<IntVec>,
    /// The `δ` variable of each Graver element.
    pub delta: Vec<usize>,
    /// Cheapest cost of each Graver element over the bricks with this `D`.
    pub best: Vec<BigInt>,
    /// A brick of the expanded program attaining `best`.
    pub best_brick: Vec<usize>,
}

/// All bricks sharing `(D, b)`, with the `ζ` variable of each base solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhsGroup {
    pub diag: usize,
    pub b: IntVec,
    pub bases: Vec<IntVec>,
    pub zeta: Vec<usize>,
}

/// One brick of the expanded program, with the `ω` variable of each base solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelType {
    pub rhs: usize,
    pub omega: Vec<usize>,
}

/// The mixed model over an expanded program; `types[t]` belongs to brick `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelM {
    pub program: MixedProgram,
    pub diags: Vec<DiagGroup>,
    pub rhs_groups: Vec<RhsGroup>,
    pub types: Vec<ModelType>,
    /// Coordinates `z` of the brick total in the solution lattice of `C·Y = a`.
    pub link_vars: Vec<usize>,
}

impl ModelM {
    /// Every integer variable: `ζ`, `δ` and the lattice coordinates of the linking rows.
    pub fn integer_vars(&self) -> Vec<usize> {
        let zeta = self.rhs_groups.iter().flat_map(|r| r.zeta.iter().copied());
        let delta = self.diags.iter().flat_map(|g| g.delta.iter().copied());
        zeta.chain(delta).chain(self.link_vars.iter().copied()).collect()
    }

    /// Every `ω` variable.
    pub fn omega_vars(&self) -> Vec<usize> {
        self.types.iter().flat_map(|t| t.omega.iter().copied()).collect()
    }
}

/// Builds the relaxed model (integral `ζ`, `δ`; continuous `ω`) of an expanded program.
pub fn build_model(p: &NFoldProgram, opts: &NFoldOptions) -> Result<ModelM> {
    p.validate()?;
    let mut ilp = MixedProgram::new();
    let mut diags: Vec<DiagGroup> = Vec::new();
    let mut diag_of: HashMap<Vec<Vec<BigInt>>, usize> = HashMap::new();
    let mut rhs_groups: Vec<RhsGroup> = Vec::new();
    let mut rhs_of: HashMap<(usize, Vec<BigInt>), usize> = HashMap::new();
    let mut rhs_of_brick = Vec::with_capacity(p.bricks.len());
    for br in &p.bricks {
        let next = diags.len();
        let g = *diag_of.entry(br.d.rows().to_vec()).or_insert(next);
        if g == next {
            diags.push(DiagGroup {
                d: br.d.clone(),
                graver: Vec::new(),
                delta: Vec::new(),
                best: Vec::new(),
                best_brick: Vec::new(),
            });
        }
        let next = rhs_groups.len();
        let r = *rhs_of.entry((g, br.b.entries().to_vec())).or_insert(next);
        if r == next {
            let bases = if opts.full_base {
                base_solutions(&br.d, &br.b, None, &opts.graver)?
            } else {
                let sols = minimal_raw(&br.d, br.b.entries(), &opts.graver)?;
                sols.solutions
                    .iter()
                    .map(|v| IntVec::from_parts(p.locals.clone(), v.clone()))
                    .collect()
            };
            let zeta = (0..bases.len()).map(|k| ilp.add_nonneg(format!("zeta{r}_{k}"), true)).collect();
            rhs_groups.push(RhsGroup {
                diag: g,
                b: br.b.clone(),
                bases,
                zeta,
            });
        }
        rhs_of_brick.push(r);
    }
    for (gi, g) in diags.iter_mut().enumerate() {
        let zero = vec![BigInt::zero(); p.local_rows.len()];
        let kernel = minimal_raw(&g.d, &zero, &opts.graver)?;
        for (k, e) in kernel.kernel.iter().enumerate() {
            let (mut best, mut best_brick) = (None::<BigInt>, 0);
            for (t, br) in p.bricks.iter().enumerate() {
                if rhs_groups[rhs_of_brick[t]].diag != gi {
                    continue;
                }
                let cost = dot(br.c.entries(), e);
                if best.as_ref().is_none_or(|b| cost < *b) {
                    best = Some(cost);
                    best_brick = t;
                }
            }
            let best = best.expect("a matrix group has a brick");
            let var = ilp.add_nonneg(format!("delta{gi}_{k}"), true);
            ilp.set_cost(var, best.clone());
            g.graver.push(IntVec::from_parts(p.locals.clone(), e.clone()));
            g.delta.push(var);
            g.best.push(best);
            g.best_brick.push(best_brick);
        }
    }
    let mut types = Vec::with_capacity(p.bricks.len());
    for (t, br) in p.bricks.iter().enumerate() {
        let r = rhs_of_brick[t];
        let omega: Vec<usize> = rhs_groups[r]
            .bases
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let var = ilp.add_nonneg(format!("omega{t}_{k}"), false);
                ilp.set_cost(var, dot(br.c.entries(), w.entries()));
                var
            })
            .collect();
        // every brick of this type takes exactly one base solution
        let terms = omega.iter().map(|&v| (v, big(1))).collect();
        ilp.add_constraint(terms, Sense::Eq, BigInt::from(br.multiplicity));
        types.push(ModelType { rhs: r, omega });
    }
    // the types of a right-hand side share its base-solution counts
    for (r, grp) in rhs_groups.iter().enumerate() {
        for (k, &z) in grp.zeta.iter().enumerate() {
            let mut terms: Vec<(usize, BigInt)> = types
                .iter()
                .filter(|ty| ty.rhs == r)
                .map(|ty| (ty.omega[k], big(1)))
                .collect();
            terms.push((z, big(-1)));
            ilp.add_constraint(terms, Sense::Eq, BigInt::zero());
        }
    }
    // Linking rows: the brick total Y = Σ y_i must satisfy C·Y = a. Its integer
    // solutions are Y₀ + K·z with K an LLL-reduced kernel basis, so the rows
    // are imposed as Σ ζ·ŵ + Σ δ·g − K·z = Y₀ with small coefficients.
    let ny = p.locals.len();
    let z = match solve_integer_system(p.c.rows(), p.a.entries(), ny) {
        None => {
            let never = ilp.add_var("unsolvable_link", Some(BigInt::zero()), Some(BigInt::zero()), true);
            ilp.add_constraint(vec![(never, big(1))], Sense::Eq, big(1));
            None
        }
        Some(mut sol) => {
            lll_reduce(&mut sol.kernel);
            reduce_against(&mut sol.particular, &sol.kernel);
            Some(sol)
        }
    };
    let mut link_vars = Vec::new();
    if let Some(sol) = &z {
        // fixing the lattice coordinates first pins the brick total
        link_vars = (0..sol.kernel.len())
            .map(|k| {
                let v = ilp.add_var(format!("z{k}"), None, None, true);
                ilp.set_priority(v, 1);
                v
            })
            .collect();
        for j in 0..ny {
            let mut terms: Vec<(usize, BigInt)> = Vec::new();
            for grp in &rhs_groups {
                for (w, &v) in grp.bases.iter().zip(&grp.zeta) {
                    if !w.entries()[j].is_zero() {
                        terms.push((v, w.entries()[j].clone()));
                    }
                }
            }
            for g in &diags {
                for (e, &v) in g.graver.iter().zip(&g.delta) {
                    if !e.entries()[j].is_zero() {
                        terms.push((v, e.entries()[j].clone()));
                    }
                }
            }
            for (kv, &v) in sol.kernel.iter().zip(&link_vars) {
                if !kv[j].is_zero() {
                    terms.push((v, -&kv[j]));
                }
            }
            ilp.add_constraint(terms, Sense::Eq, sol.particular[j].clone());
        }
    }
    Ok(ModelM {
        program: ilp,
        diags,
        rhs_groups,
        types,
        link_vars,
    })
}

fn limit_outcome(e: Error) -> Result<NFoldOutcome> {
    match e {
        Error::ResourceLimit(m) => Ok(NFoldOutcome::ResourceLimit(m)),
        e => Err(e),
    }
}

fn count_of(v: &BigInt) -> Result<usize> {
    v.to_usize()
        .ok_or_else(|| Error::ResourceLimit(format!("multiplicity {v} does not fit a machine word")))
}

fn group_solutions(p: &NFoldProgram, ys: Vec<Vec<Vec<BigInt>>>) -> NFoldSolution {
    NFoldSolution {
        bricks: ys
            .into_iter()
            .map(|copies| {
                let mut groups: BTreeMap<Vec<BigInt>, usize> = BTreeMap::new();
                for y in copies {
                    *groups.entry(y).or_default() += 1;
                }
                groups
                    .into_iter()
                    .map(|(y, k)| (IntVec::from_parts(p.locals.clone(), y), k))
                    .collect()
            })
            .collect(),
    }
}

/// Minimises a uniform n-fold program through its decomposed model.
pub fn solve_nfold(p: &NFoldProgram, opts: &NFoldOptions) -> Result<NFoldOutcome> {
    p.validate()?;
    let expansion = match expand_program(p, opts) {
        Ok(x) => x,
        Err(e) => return limit_outcome(e),
    };
    let model = match build_model(&expansion.program, opts) {
        Ok(m) => m,
        Err(e) => return limit_outcome(e),
    };
    let out = mip_solve(&model.program, &opts.mip)?;
    match out.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(NFoldOutcome::Infeasible),
        Status::Unbounded => return Ok(NFoldOutcome::Unbounded),
        Status::Feasible | Status::ResourceLimit => {
            return Ok(NFoldOutcome::ResourceLimit("node limit reached before optimality was proven".into()))
        }
    }
    let value = out
        .objective
        .as_ref()
        .filter(|v| v.is_integer())
        .map(|v| v.to_integer())
        .ok_or_else(|| Error::Internal("model optimum is not integral".into()))?;
    let fixed: Vec<(usize, BigInt)> = model.integer_vars().into_iter().map(|j| (j, out.int_value(j))).collect();
    let x = tu_round(&model.program, &fixed)?;
    let solution = assemble(p, &expansion, &model, &x)?;
    match solution.verify(p) {
        Some(v) if v == value => Ok(NFoldOutcome::Optimum { value, solution }),
        Some(v) => Err(Error::Internal(format!("witness value {v} differs from the model optimum {value}"))),
        None => Err(Error::Internal("assembled witness violates the program".into())),
    }
}

/// Hands out the base solutions of each type to concrete brick copies and adds
/// every Graver element to one copy of its cheapest brick.
fn assemble(p: &NFoldProgram, expansion: &Expansion, model: &ModelM, x: &[BigInt]) -> Result<NFoldSolution> {
    let mut pools: Vec<Vec<&[BigInt]>> = Vec::with_capacity(model.types.len());
    for ty in &model.types {
        let mut pool = Vec::new();
        for (w, &var) in model.rhs_groups[ty.rhs].bases.iter().zip(&ty.omega).rev() {
            for _ in 0..count_of(&x[var])? {
                pool.push(w.entries());
            }
        }
        pools.push(pool);
    }
    let mut extra: BTreeMap<usize, Vec<BigInt>> = BTreeMap::new();
    for g in &model.diags {
        for ((e, &var), &t) in g.graver.iter().zip(&g.delta).zip(&g.best_brick) {
            if x[var].is_zero() {
                continue;
            }
            let acc = extra.entry(t).or_insert_with(|| vec![BigInt::zero(); p.locals.len()]);
            for (a, v) in acc.iter_mut().zip(e.entries()) {
                *a += v * &x[var];
            }
        }
    }
    let mut ys = Vec::with_capacity(p.bricks.len());
    for (br, prov) in p.bricks.iter().zip(&expansion.provenance) {
        let mut copies = Vec::with_capacity(br.multiplicity);
        for _ in 0..br.multiplicity {
            let mut y = vec![BigInt::zero(); p.locals.len()];
            for &(t, per) in prov {
                for _ in 0..per {
                    let w = pools[t].pop().ok_or_else(|| Error::Internal("base solutions run out".into()))?;
                    for (a, v) in y.iter_mut().zip(w) {
                        *a += v;
                    }
                }
                if let Some(e) = extra.remove(&t) {
                    for (a, v) in y.iter_mut().zip(e) {
                        *a += v;
                    }
                }
            }
            copies.push(y);
        }
        ys.push(copies);
    }
    if pools.iter().any(|pool| !pool.is_empty()) || !extra.is_empty() {
        return Err(Error::Internal("base solutions left unassigned".into()));
    }
    Ok(group_solutions(p, ys))
}

/// Minimises the program as one flat integer program with a variable block per brick copy.
pub fn solve_nfold_flat(p: &NFoldProgram, opts: &MipOptions) -> Result<NFoldOutcome> {
    p.validate()?;
    let ny = p.locals.len();
    let mut ilp = MixedProgram::new();
    let mut blocks: Vec<Vec<Vec<usize>>> = Vec::with_capacity(p.bricks.len());
    for (i, br) in p.bricks.iter().enumerate() {
        let mut copies = Vec::with_capacity(br.multiplicity);
        for c in 0..br.multiplicity {
            let vars: Vec<usize> = (0..ny)
                .map(|j| ilp.add_nonneg(format!("{}_{i}_{c}", p.locals.names()[j]), true))
                .collect();
            for (v, cost) in vars.iter().zip(br.c.entries()) {
                ilp.set_cost(*v, cost.clone());
            }
            for (row, b) in br.d.rows().iter().zip(br.b.entries()) {
                let terms = vars.iter().zip(row).filter(|(_, a)| !a.is_zero()).map(|(&v, a)| (v, a.clone())).collect();
                ilp.add_constraint(terms, Sense::Eq, b.clone());
            }
            copies.push(vars);
        }
        blocks.push(copies);
    }
    for (row, a) in p.c.rows().iter().zip(p.a.entries()) {
        let mut terms = Vec::new();
        for vars in blocks.iter().flatten() {
            terms.extend(vars.iter().zip(row).filter(|(_, c)| !c.is_zero()).map(|(&v, c)| (v, c.clone())));
        }
        ilp.add_constraint(terms, Sense::Eq, a.clone());
    }
    let out = mip_solve(&ilp, opts)?;
    match out.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(NFoldOutcome::Infeasible),
        Status::Unbounded => return Ok(NFoldOutcome::Unbounded),
        Status::Feasible | Status::ResourceLimit => {
            return Ok(NFoldOutcome::ResourceLimit("node limit reached before optimality was proven".into()))
        }
    }
    let ys = blocks
        .iter()
        .map(|copies| copies.iter().map(|vars| vars.iter().map(|&v| out.int_value(v)).collect()).collect())
        .collect();
    let solution = group_solutions(p, ys);
    let value = solution
        .verify(p)
        .ok_or_else(|| Error::Internal("flat solution violates the program".into()))?;
    Ok(NFoldOutcome::Optimum { value, solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::gen_subset_sum;

    fn row(d: &[i64]) -> IntMat {
        IntMat::anon("t", "y", &[d], d.len())
    }

    fn rhs(b: &[i64]) -> IntVec {
        IntVec::anon("t", b)
    }

    fn parts(ps: &[(&[i64], usize)]) -> Vec<(IntVec, usize)> {
        ps.iter().map(|(p, k)| (rhs(p), *k)).collect()
    }

    fn single(d: &[i64], b: i64, c: &[i64], link: &[i64], a: i64) -> NFoldProgram {
        let dm = row(d);
        let cm = IntMat::anon("s", "y", &[link], link.len());
        let cm = cm.with_indices(cm.row_index().clone(), dm.col_index().clone()).unwrap();
        let brick = NFoldBrick {
            d: dm.clone(),
            b: rhs(&[b]),
            c: IntVec::from_i64(dm.col_index().clone(), c).unwrap(),
            multiplicity: 1,
        };
        NFoldProgram::new(cm, IntVec::anon("s", &[a]), dm.row_index().clone(), vec![brick]).unwrap()
    }

    #[test]
    fn checker_examples() {
        let o = NFoldOptions::default();
        assert!(faithful_check(&row(&[1, 1]), &rhs(&[10]), &parts(&[(&[2], 5)]), &o).unwrap());
        assert!(!faithful_check(&row(&[2]), &rhs(&[4]), &parts(&[(&[1], 1), (&[3], 1)]), &o).unwrap());
        assert!(faithful_check(&row(&[2, 3]), &rhs(&[7]), &parts(&[(&[7], 1)]), &o).unwrap());
        assert!(!faithful_check(&row(&[2]), &rhs(&[4]), &parts(&[(&[1], 4)]), &o).unwrap());
        assert!(faithful_check(&row(&[2]), &rhs(&[4]), &parts(&[(&[1], 3)]), &o).is_err());
    }

    #[test]
    fn step_and_decompose_examples() {
        let o = NFoldOptions::default();
        let (b0, alpha, rest) = faithful_step(&row(&[1, 1]), &rhs(&[10]), 2, &o).unwrap().unwrap();
        assert_eq!((b0, alpha, rest), (rhs(&[2]), 4, rhs(&[2])));
        let (b0, alpha, rest) = faithful_step(&row(&[2]), &rhs(&[6]), 2, &o).unwrap().unwrap();
        assert_eq!((b0, alpha, rest), (rhs(&[2]), 2, rhs(&[2])));
        assert!(faithful_step(&row(&[2]), &rhs(&[2]), 2, &o).is_err());
        let dec = faithful_decompose(&row(&[1, 1]), &rhs(&[10]), 2, &o).unwrap();
        assert_eq!(dec.parts, parts(&[(&[2], 5)]));
        let dec = faithful_decompose(&row(&[1, 1]), &rhs(&[3]), 4, &o).unwrap();
        assert_eq!(dec.parts, parts(&[(&[3], 1)]));
        let dec = faithful_decompose(&row(&[2]), &rhs(&[3]), 1, &o).unwrap();
        assert_eq!(dec.total(), rhs(&[3]));
    }

    #[test]
    fn expansion_counts_types() {
        let o = NFoldOptions { xi0: 2, ..Default::default() };
        let p = single(&[1, 1], 10, &[0, 0], &[0, 0], 0);
        let x = expand_program(&p, &o).unwrap();
        assert_eq!(x.program.bricks.len(), 1);
        assert_eq!(x.program.bricks[0].b, rhs(&[2]));
        assert_eq!(x.program.bricks[0].multiplicity, 5);
        let mut twice = p.clone();
        twice.bricks.push(p.bricks[0].clone());
        let x = expand_program(&twice, &o).unwrap();
        assert_eq!(x.program.bricks[0].multiplicity, 10);
    }

    #[test]
    fn solver_examples() {
        let o = NFoldOptions::default();
        let p = gen_subset_sum(&[3, 5], 8, None).unwrap();
        let out = solve_nfold(&p, &o).unwrap();
        assert_eq!(out.value(), Some(&BigInt::zero()));
        let p = single(&[1, 1], 2, &[5, 1], &[1, 0], 1);
        assert_eq!(solve_nfold(&p, &o).unwrap().value(), Some(&big(6)));
        let p = single(&[1, -1], 0, &[-1, 0], &[0, 0], 0);
        assert_eq!(solve_nfold(&p, &o).unwrap(), NFoldOutcome::Unbounded);
        let p = single(&[2], 3, &[0], &[0], 0);
        assert_eq!(solve_nfold(&p, &o).unwrap(), NFoldOutcome::Infeasible);
        let p = gen_subset_sum(&[3, 5], 7, None).unwrap();
        assert_eq!(solve_nfold(&p, &o).unwrap(), NFoldOutcome::Infeasible);
    }

    #[test]
    fn model_matches_flat_solve() {
        let o = NFoldOptions { xi0: 2, ..Default::default() };
        let p = gen_subset_sum(&[2, 3, 4, 7], 9, Some(&[3, -1, 2, 5])).unwrap();
        let a = solve_nfold(&p, &o).unwrap();
        let b = solve_nfold_flat(&p, &o.mip).unwrap();
        assert_eq!(a.value(), b.value());
        let p = single(&[1, 2], 9, &[2, 3], &[1, 0], 3);
        assert_eq!(solve_nfold(&p, &o).unwrap().value(), solve_nfold_flat(&p, &o.mip).unwrap().value());
    }
}
