//! Exact linear, integer and mixed-integer programming.
//!
//! [`lp_solve`] runs an exact rational simplex and returns a basic (vertex)
//! solution. [`mip_solve`] adds branch-and-bound on the integer variables:
//!
//! 1. The LP relaxation of the root is solved without any artificial box. If it
//!    is unbounded, the program is unbounded exactly when it has an integer
//!    feasible point, which is then searched for with a zero objective.
//! 2. Integer variables without finite bounds receive a solution-size box
//!    `|x_j| ≤ (n+1)·Δ`, where `Δ` is a Hadamard estimate of the largest
//!    subdeterminant of the constraint data (including right-hand sides).
//!    If the program has an integer point (or optimum), it has one in that box.
//! 3. At every node, bounds of integer variables are tightened by propagation
//!    and the equality rows supported only on integer variables are tested for
//!    an integer solution with the fixed variables substituted. This exposes
//!    parity and congruence conflicts that LP bounds cannot see.
//! 4. Nodes are selected best-bound first, preferring deeper and then newer
//!    nodes on ties; branching is on the fractional variable of highest
//!    priority, then the most fractional one, lowest index first on ties.
//!    Everything is deterministic.
//! 5. Pure feasibility searches (zero objective) first fix small-domain
//!    integer variables in index order without solving LPs. Once none is left
//!    in a pure integer program, the remaining equality system is solved over
//!    the integers, `x = x0 + K·z`, and the search continues over `z`.

mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::hermite::{lll_reduce, reduce_against, solve_integer_system, solve_integer_system_unreduced};
use crate::numerics::{ceil_rat, floor_rat, rat};
use simplex::{solve_lp, LpResult};

/// Constraint sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// `Σ coeff·x  (sense)  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, BigInt)>,
    pub sense: Sense,
    pub rhs: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub lower: Option<BigInt>,
    pub upper: Option<BigInt>,
    pub integer: bool,
    /// Fractional variables of higher priority are branched on first.
    pub priority: u32,
}

/// A minimisation program with optional bounds and a designated integer subset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MixedProgram {
    pub vars: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<BigInt>,
}

impl MixedProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: Option<BigInt>, upper: Option<BigInt>, integer: bool) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
            priority: 0,
        });
        self.objective.push(BigInt::zero());
        self.vars.len() - 1
    }

    /// Adds a nonnegative variable.
    pub fn add_nonneg(&mut self, name: impl Into<String>, integer: bool) -> usize {
        self.add_var(name, Some(BigInt::zero()), None, integer)
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, BigInt)>, sense: Sense, rhs: BigInt) {
        self.constraints.push(LinearConstraint { terms, sense, rhs });
    }

    pub fn set_priority(&mut self, var: usize, priority: u32) {
        self.vars[var].priority = priority;
    }

    pub fn set_cost(&mut self, var: usize, cost: BigInt) {
        self.objective[var] = cost;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.vars.len() {
            return Err(Error::Dimension("objective length differs from variable count".into()));
        }
        for c in &self.constraints {
            if let Some((j, _)) = c.terms.iter().find(|(j, _)| *j >= self.vars.len()) {
                return Err(Error::Dimension(format!("constraint refers to unknown variable {j}")));
            }
        }
        Ok(())
    }

    /// Checks an assignment exactly against bounds, rows and integrality.
    pub fn is_feasible(&self, x: &[BigRational]) -> bool {
        if x.len() != self.vars.len() {
            return false;
        }
        for (v, xv) in self.vars.iter().zip(x) {
            if v.integer && !xv.is_integer() {
                return false;
            }
            if v.lower.as_ref().is_some_and(|l| xv < &rat(l)) || v.upper.as_ref().is_some_and(|u| xv > &rat(u)) {
                return false;
            }
        }
        self.constraints.iter().all(|c| {
            let lhs: BigRational = c.terms.iter().map(|(j, a)| &x[*j] * rat(a)).fold(BigRational::zero(), |s, t| s + t);
            let r = rat(&c.rhs);
            match c.sense {
                Sense::Eq => lhs == r,
                Sense::Le => lhs <= r,
                Sense::Ge => lhs >= r,
            }
        })
    }

    pub fn objective_value(&self, x: &[BigRational]) -> BigRational {
        x.iter()
            .zip(&self.objective)
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| v * rat(c))
            .fold(BigRational::zero(), |s, t| s + t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    /// A feasible point was found but optimality was not proven within the budget.
    Feasible,
    Infeasible,
    Unbounded,
    ResourceLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: Status,
    /// Exact assignment (integral on integer variables) when one is available.
    pub values: Vec<BigRational>,
    pub objective: Option<BigRational>,
}

impl SolveOutcome {
    fn bare(status: Status) -> Self {
        SolveOutcome {
            status,
            values: Vec::new(),
            objective: None,
        }
    }

    pub fn has_point(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::Feasible | Status::Unbounded) && !self.values.is_empty()
    }

    /// The values of the given variables as integers; panics if any is fractional.
    pub fn int_value(&self, var: usize) -> BigInt {
        let v = &self.values[var];
        assert!(v.is_integer(), "variable {var} is not integral");
        v.to_integer()
    }
}

#[derive(Clone, Debug)]
pub struct MipOptions {
    /// Maximum number of branch-and-bound nodes.
    pub node_limit: usize,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions { node_limit: 200_000 }
    }
}

/// Solves the LP relaxation (integrality is ignored) at a vertex.
pub fn lp_solve(p: &MixedProgram) -> Result<SolveOutcome> {
    p.validate()?;
    let lower: Vec<Option<BigInt>> = p.vars.iter().map(|v| v.lower.clone()).collect();
    let upper: Vec<Option<BigInt>> = p.vars.iter().map(|v| v.upper.clone()).collect();
    Ok(match solve_lp(&lower, &upper, &p.constraints, &p.objective) {
        LpResult::Optimal { x, value } => SolveOutcome {
            status: Status::Optimal,
            values: x,
            objective: Some(value),
        },
        LpResult::Infeasible => SolveOutcome::bare(Status::Infeasible),
        LpResult::Unbounded => SolveOutcome::bare(Status::Unbounded),
        LpResult::IterationLimit => SolveOutcome::bare(Status::ResourceLimit),
    })
}

/// Exact mixed-integer minimisation by branch-and-bound.
pub fn mip_solve(p: &MixedProgram, opts: &MipOptions) -> Result<SolveOutcome> {
    p.validate()?;
    if p.vars.iter().all(|v| !v.integer) {
        return lp_solve(p);
    }
    let mut solver = BranchAndBound::new(p, opts);
    Ok(solver.run())
}

/// Fixes the given integer variables, solves the remaining LP at a vertex and
/// returns an integral assignment of all variables.
///
/// The residual system is expected to be totally unimodular; a fractional
/// vertex is reported as an internal inconsistency.
pub fn tu_round(p: &MixedProgram, fixed: &[(usize, BigInt)]) -> Result<Vec<BigInt>> {
    let mut q = p.clone();
    for (j, v) in fixed {
        q.vars[*j].lower = Some(v.clone());
        q.vars[*j].upper = Some(v.clone());
    }
    for v in q.vars.iter_mut() {
        v.integer = false;
    }
    let out = lp_solve(&q)?;
    match out.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(Error::Precondition("fixed assignment leaves an infeasible LP".into())),
        Status::Unbounded => return Err(Error::Precondition("fixed assignment leaves an unbounded LP".into())),
        _ => return Err(Error::ResourceLimit("simplex iteration limit".into())),
    }
    out.values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                Err(Error::Internal(format!(
                    "vertex value {v} of variable {} is fractional; the residual system is not totally unimodular",
                    q.vars[j].name
                )))
            }
        })
        .collect()
}

struct Node {
    bound: BigRational,
    depth: usize,
    seq: usize,
    lower: Vec<Option<BigInt>>,
    upper: Vec<Option<BigInt>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then deeper, then newer.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

struct BranchAndBound<'a> {
    p: &'a MixedProgram,
    opts: &'a MipOptions,
    /// Equality rows whose support consists of integer variables only.
    int_eq_rows: Vec<usize>,
    integral_objective: bool,
    all_integer: bool,
}

/// Widest domain that feasibility searches enumerate value by value.
const SMALL_DOMAIN: i64 = 64;

enum NodeResult {
    Pruned,
    Integral(Vec<BigRational>, BigRational),
    Branch(usize, BigRational, BigRational),
    /// Fix the variable to the value, or exclude everything up to it.
    Split(usize, BigInt),
    Unbounded,
    Limit,
}

impl<'a> BranchAndBound<'a> {
    fn new(p: &'a MixedProgram, opts: &'a MipOptions) -> Self {
        let int_eq_rows = p
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.sense == Sense::Eq && c.terms.iter().all(|(j, _)| p.vars[*j].integer))
            .map(|(i, _)| i)
            .collect();
        let integral_objective = p
            .objective
            .iter()
            .zip(&p.vars)
            .all(|(c, v)| c.is_zero() || v.integer);
        BranchAndBound {
            p,
            opts,
            int_eq_rows,
            integral_objective,
            all_integer: p.vars.iter().all(|v| v.integer),
        }
    }

    fn run(&mut self) -> SolveOutcome {
        let p = self.p;
        let mut lower: Vec<Option<BigInt>> = Vec::with_capacity(p.vars.len());
        let mut upper: Vec<Option<BigInt>> = Vec::with_capacity(p.vars.len());
        for v in &p.vars {
            lower.push(v.lower.clone());
            upper.push(v.upper.clone());
        }
        // root relaxation without the artificial box
        let zero_obj = vec![BigInt::zero(); p.vars.len()];
        let root = solve_lp(&lower, &upper, &p.constraints, &p.objective);
        let (objective, unbounded_relaxation) = match root {
            LpResult::Infeasible => return SolveOutcome::bare(Status::Infeasible),
            LpResult::IterationLimit => return SolveOutcome::bare(Status::ResourceLimit),
            LpResult::Unbounded => (&zero_obj, true),
            LpResult::Optimal { .. } => (&p.objective, false),
        };
        let unbounded_int = p
            .vars
            .iter()
            .enumerate()
            .any(|(j, v)| v.integer && (lower[j].is_none() || upper[j].is_none()));
        if unbounded_int {
            let beta = self.box_bound();
            for (j, v) in p.vars.iter().enumerate() {
                if !v.integer {
                    continue;
                }
                if lower[j].is_none() {
                    lower[j] = Some(-beta.clone());
                }
                if upper[j].is_none() {
                    upper[j] = Some(beta.clone());
                }
            }
        }
        let integral_objective = self.integral_objective || unbounded_relaxation;
        let feasibility = objective.iter().all(Zero::is_zero);
        let mut heap = BinaryHeap::new();
        let mut seq = 0usize;
        heap.push(Node {
            bound: BigRational::zero(),
            depth: 0,
            seq,
            lower,
            upper,
        });
        let mut incumbent: Option<(Vec<BigRational>, BigRational)> = None;
        let mut nodes = 0usize;
        let mut exhausted = true;
        while let Some(node) = heap.pop() {
            if let Some((_, best)) = &incumbent {
                if node.depth > 0 && !improves(&node.bound, best, integral_objective) {
                    continue;
                }
            }
            if nodes >= self.opts.node_limit {
                exhausted = false;
                break;
            }
            nodes += 1;
            let best = incumbent.as_ref().map(|x| &x.1);
            match self.process(node.lower.clone(), node.upper.clone(), objective, best, integral_objective, feasibility) {
                NodeResult::Pruned => {}
                NodeResult::Limit => {
                    exhausted = false;
                    break;
                }
                NodeResult::Unbounded => {
                    // cannot happen below a bounded root relaxation; treat as inconclusive
                    exhausted = false;
                    break;
                }
                NodeResult::Integral(x, v) => {
                    let better = incumbent.as_ref().is_none_or(|(_, b)| v < *b);
                    if better {
                        incumbent = Some((x, v));
                    }
                    if unbounded_relaxation || feasibility {
                        break;
                    }
                }
                NodeResult::Split(j, v) => {
                    let mut up_lower = node.lower.clone();
                    up_lower[j] = Some(&v + BigInt::one());
                    seq += 1;
                    heap.push(Node {
                        bound: node.bound.clone(),
                        depth: node.depth + 1,
                        seq,
                        lower: up_lower,
                        upper: node.upper.clone(),
                    });
                    let mut fix_lower = node.lower;
                    let mut fix_upper = node.upper;
                    fix_lower[j] = Some(v.clone());
                    fix_upper[j] = Some(v);
                    seq += 1;
                    heap.push(Node {
                        bound: node.bound,
                        depth: node.depth + 1,
                        seq,
                        lower: fix_lower,
                        upper: fix_upper,
                    });
                }
                NodeResult::Branch(j, val, bound) => {
                    let fl = floor_rat(&val);
                    let mut up_lower = node.lower.clone();
                    up_lower[j] = Some(&fl + BigInt::one());
                    seq += 1;
                    heap.push(Node {
                        bound: bound.clone(),
                        depth: node.depth + 1,
                        seq,
                        lower: up_lower,
                        upper: node.upper.clone(),
                    });
                    let mut down_upper = node.upper;
                    down_upper[j] = Some(fl);
                    seq += 1;
                    heap.push(Node {
                        bound,
                        depth: node.depth + 1,
                        seq,
                        lower: node.lower,
                        upper: down_upper,
                    });
                }
            }
        }
        if unbounded_relaxation {
            return match incumbent {
                Some((x, _)) => SolveOutcome {
                    status: Status::Unbounded,
                    values: x,
                    objective: None,
                },
                None if exhausted => SolveOutcome::bare(Status::Infeasible),
                None => SolveOutcome::bare(Status::ResourceLimit),
            };
        }
        match incumbent {
            Some((x, v)) => SolveOutcome {
                status: if exhausted { Status::Optimal } else { Status::Feasible },
                values: x,
                objective: Some(v),
            },
            None if exhausted => SolveOutcome::bare(Status::Infeasible),
            None => SolveOutcome::bare(Status::ResourceLimit),
        }
    }

    fn process(
        &self,
        mut lower: Vec<Option<BigInt>>,
        mut upper: Vec<Option<BigInt>>,
        objective: &[BigInt],
        incumbent: Option<&BigRational>,
        integral_objective: bool,
        feasibility: bool,
    ) -> NodeResult {
        for _ in 0..4 {
            if !self.propagate(&mut lower, &mut upper) {
                return NodeResult::Pruned;
            }
            match self.lattice_filter(&mut lower, &mut upper) {
                None => return NodeResult::Pruned,
                Some(false) => break,
                Some(true) => {}
            }
        }
        if feasibility {
            let small = BigInt::from(SMALL_DOMAIN);
            let pick = (0..self.p.vars.len()).find(|&j| {
                self.p.vars[j].integer
                    && matches!((&lower[j], &upper[j]), (Some(l), Some(u)) if l < u && u - l <= small)
            });
            if let Some(j) = pick {
                return NodeResult::Split(j, lower[j].clone().expect("bounded"));
            }
            if self.all_integer && self.p.constraints.iter().any(|c| c.sense == Sense::Eq) {
                return self.solve_in_lattice(&lower, &upper);
            }
        }
        let (x, value) = match solve_lp(&lower, &upper, &self.p.constraints, objective) {
            LpResult::Infeasible => return NodeResult::Pruned,
            LpResult::Unbounded => return NodeResult::Unbounded,
            LpResult::IterationLimit => return NodeResult::Limit,
            LpResult::Optimal { x, value } => (x, value),
        };
        if let Some(best) = incumbent {
            if !improves(&value, best, integral_objective) {
                return NodeResult::Pruned;
            }
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut branch: Option<(usize, u32, BigRational)> = None;
        for (j, v) in self.p.vars.iter().enumerate() {
            if !v.integer || x[j].is_integer() {
                continue;
            }
            let frac = &x[j] - x[j].floor();
            let dist = (&frac - &half).abs();
            let better = branch
                .as_ref()
                .is_none_or(|(_, pr, d)| v.priority > *pr || (v.priority == *pr && dist < *d));
            if better {
                branch = Some((j, v.priority, dist));
            }
        }
        match branch {
            None => NodeResult::Integral(x, value),
            Some((j, ..)) => NodeResult::Branch(j, x[j].clone(), value),
        }
    }

    /// Tightens integer bounds from the rows; returns false on a detected conflict.
    fn propagate(&self, lower: &mut [Option<BigInt>], upper: &mut [Option<BigInt>]) -> bool {
        let p = self.p;
        for _ in 0..8 {
            let mut changed = false;
            for c in &p.constraints {
                let senses: &[Sense] = match c.sense {
                    Sense::Eq => &[Sense::Le, Sense::Ge],
                    Sense::Le => &[Sense::Le],
                    Sense::Ge => &[Sense::Ge],
                };
                for &s in senses {
                    // normalise to Σ a x ≤ r
                    let flip = s == Sense::Ge;
                    let mut min_act = BigInt::zero();
                    let mut inf_count = 0usize;
                    let mut inf_var = usize::MAX;
                    for (j, a0) in &c.terms {
                        let a = if flip { -a0 } else { a0.clone() };
                        let b = if a.is_positive() { &lower[*j] } else { &upper[*j] };
                        if a.is_zero() {
                            continue;
                        }
                        match b {
                            Some(b) => min_act += &a * b,
                            None => {
                                inf_count += 1;
                                inf_var = *j;
                            }
                        }
                    }
                    let r = if flip { -&c.rhs } else { c.rhs.clone() };
                    if inf_count == 0 && min_act > r {
                        return false;
                    }
                    if inf_count > 1 {
                        continue;
                    }
                    for (j, a0) in &c.terms {
                        if !p.vars[*j].integer || a0.is_zero() {
                            continue;
                        }
                        if inf_count == 1 && *j != inf_var {
                            continue;
                        }
                        let a = if flip { -a0 } else { a0.clone() };
                        let own = if a.is_positive() { &lower[*j] } else { &upper[*j] };
                        let rest = match (inf_count, own) {
                            (0, Some(b)) => &min_act - &a * b,
                            (1, None) => min_act.clone(),
                            _ => continue,
                        };
                        // a x ≤ r − rest
                        let slack = &r - &rest;
                        if a.is_positive() {
                            let nb = slack.div_floor(&a);
                            if upper[*j].as_ref().is_none_or(|u| nb < *u) {
                                upper[*j] = Some(nb);
                                changed = true;
                            }
                        } else {
                            let nb = -(-slack).div_floor(&a);
                            if lower[*j].as_ref().is_none_or(|l| nb > *l) {
                                lower[*j] = Some(nb);
                                changed = true;
                            }
                        }
                        if let (Some(l), Some(u)) = (&lower[*j], &upper[*j]) {
                            if l > u {
                                return false;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        true
    }

    /// Finishes a pure integer feasibility node by parametrising the integer
    /// solutions of its equality rows as `x = x0 + K·z` and searching over `z`.
    fn solve_in_lattice(&self, lower: &[Option<BigInt>], upper: &[Option<BigInt>]) -> NodeResult {
        let p = self.p;
        let n = p.vars.len();
        let fixed = |j: usize| match (&lower[j], &upper[j]) {
            (Some(l), Some(u)) if l == u => Some(l.clone()),
            _ => None,
        };
        let free: Vec<usize> = (0..n).filter(|&j| fixed(j).is_none()).collect();
        let mut pos = vec![usize::MAX; n];
        for (k, &j) in free.iter().enumerate() {
            pos[j] = k;
        }
        // constant part and free-variable coefficients of every row
        let split = |c: &LinearConstraint| {
            let mut rhs = c.rhs.clone();
            let mut row = vec![BigInt::zero(); free.len()];
            for (j, a) in &c.terms {
                match fixed(*j) {
                    Some(v) => rhs -= a * v,
                    None => row[pos[*j]] += a,
                }
            }
            (row, rhs)
        };
        let (mut eq_rows, mut eq_rhs) = (Vec::new(), Vec::new());
        for c in p.constraints.iter().filter(|c| c.sense == Sense::Eq) {
            let (row, rhs) = split(c);
            eq_rows.push(row);
            eq_rhs.push(rhs);
        }
        let Some(mut sol) = solve_integer_system(&eq_rows, &eq_rhs, free.len()) else {
            return NodeResult::Pruned;
        };
        lll_reduce(&mut sol.kernel);
        reduce_against(&mut sol.particular, &sol.kernel);
        let kdim = sol.kernel.len();
        // x_free = x0 + Σ_k z_k K_k, written as an inequality system in z
        let expand = |row: &[BigInt]| -> (Vec<(usize, BigInt)>, BigInt) {
            let constant: BigInt = row.iter().zip(&sol.particular).map(|(a, x)| a * x).sum();
            let terms = (0..kdim)
                .map(|k| (k, row.iter().zip(&sol.kernel[k]).map(|(a, x)| a * x).sum::<BigInt>()))
                .filter(|(_, a)| !a.is_zero())
                .collect();
            (terms, constant)
        };
        let mut sub = MixedProgram::new();
        for k in 0..kdim {
            sub.add_var(format!("z{k}"), None, None, true);
        }
        let mut push = |terms: Vec<(usize, BigInt)>, sense: Sense, rhs: BigInt| -> bool {
            if terms.is_empty() {
                return match sense {
                    Sense::Eq => rhs.is_zero(),
                    Sense::Le => !rhs.is_negative(),
                    Sense::Ge => !rhs.is_positive(),
                };
            }
            sub.add_constraint(terms, sense, rhs);
            true
        };
        for (k, &j) in free.iter().enumerate() {
            let mut unit = vec![BigInt::zero(); free.len()];
            unit[k] = BigInt::one();
            let (terms, constant) = expand(&unit);
            if let Some(l) = &lower[j] {
                if !push(terms.clone(), Sense::Ge, l - &constant) {
                    return NodeResult::Pruned;
                }
            }
            if let Some(u) = &upper[j] {
                if !push(terms, Sense::Le, u - &constant) {
                    return NodeResult::Pruned;
                }
            }
        }
        for c in p.constraints.iter().filter(|c| c.sense != Sense::Eq) {
            let (row, rhs) = split(c);
            let (terms, constant) = expand(&row);
            if !push(terms, c.sense, rhs - constant) {
                return NodeResult::Pruned;
            }
        }
        let z: Vec<BigInt> = if kdim == 0 {
            Vec::new()
        } else {
            match BranchAndBound::new(&sub, self.opts).run() {
                out if out.has_point() => (0..kdim).map(|k| out.int_value(k)).collect(),
                out if out.status == Status::Infeasible => return NodeResult::Pruned,
                _ => return NodeResult::Limit,
            }
        };
        let mut x: Vec<BigRational> = (0..n).map(|j| fixed(j).map(|v| rat(&v)).unwrap_or_else(BigRational::zero)).collect();
        for (k, &j) in free.iter().enumerate() {
            let v: BigInt = &sol.particular[k] + z.iter().zip(&sol.kernel).map(|(zk, kv)| zk * &kv[k]).sum::<BigInt>();
            x[j] = rat(&v);
        }
        debug_assert!(p.is_feasible(&x));
        NodeResult::Integral(x, BigRational::zero())
    }

    /// Integer solvability of the integer-only equality rows with fixed variables substituted.
    ///
    /// Every free variable occurring in those rows is confined to a residue class
    /// `x₀ⱼ + gⱼ·Z` of the solution lattice; bounds are rounded into that class.
    /// Returns `None` on a conflict and otherwise whether a bound moved.
    fn lattice_filter(&self, lower: &mut [Option<BigInt>], upper: &mut [Option<BigInt>]) -> Option<bool> {
        if self.int_eq_rows.is_empty() {
            return Some(false);
        }
        let n = self.p.vars.len();
        let mut col_of = vec![usize::MAX; n];
        let mut var_of = Vec::new();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &i in &self.int_eq_rows {
            let c = &self.p.constraints[i];
            let mut r = c.rhs.clone();
            let mut entries: Vec<(usize, BigInt)> = Vec::new();
            for (j, a) in &c.terms {
                if a.is_zero() {
                    continue;
                }
                match (&lower[*j], &upper[*j]) {
                    (Some(l), Some(u)) if l == u => r -= a * l,
                    _ => {
                        if col_of[*j] == usize::MAX {
                            col_of[*j] = var_of.len();
                            var_of.push(*j);
                        }
                        entries.push((col_of[*j], a.clone()));
                    }
                }
            }
            if entries.is_empty() {
                if !r.is_zero() {
                    return None;
                }
                continue;
            }
            rows.push(entries);
            rhs.push(r);
        }
        let ncols = var_of.len();
        let dense: Vec<Vec<BigInt>> = rows
            .into_iter()
            .map(|entries| {
                let mut row = vec![BigInt::zero(); ncols];
                for (c, a) in entries {
                    row[c] += a;
                }
                row
            })
            .collect();
        let sol = solve_integer_system_unreduced(&dense, &rhs, ncols)?;
        let mut changed = false;
        for (col, &j) in var_of.iter().enumerate() {
            let g = sol.kernel.iter().fold(BigInt::zero(), |g, k| g.gcd(&k[col]));
            if g.is_one() {
                continue;
            }
            let x0 = &sol.particular[col];
            if let Some(l) = &lower[j] {
                let t = if g.is_zero() { x0.clone() } else { l + (x0 - l).mod_floor(&g) };
                if &t < l {
                    return None;
                }
                if &t != l {
                    lower[j] = Some(t);
                    changed = true;
                }
            } else if g.is_zero() {
                lower[j] = Some(x0.clone());
                changed = true;
            }
            if let Some(u) = &upper[j] {
                let t = if g.is_zero() { x0.clone() } else { u - (u - x0).mod_floor(&g) };
                if &t > u {
                    return None;
                }
                if &t != u {
                    upper[j] = Some(t);
                    changed = true;
                }
            } else if g.is_zero() {
                upper[j] = Some(x0.clone());
                changed = true;
            }
            if let (Some(l), Some(u)) = (&lower[j], &upper[j]) {
                if l > u {
                    return None;
                }
            }
        }
        Some(changed)
    }

    /// `(n+1)·Δ` with `Δ` a Hadamard bound on subdeterminants of `[A b]`.
    fn box_bound(&self) -> BigInt {
        let p = self.p;
        let n = p.vars.len();
        let mut sq_norms: Vec<BigInt> = Vec::new();
        for c in &p.constraints {
            let mut s: BigInt = c.terms.iter().map(|(_, a)| a * a).sum();
            s += &c.rhs * &c.rhs;
            if !s.is_zero() {
                sq_norms.push(s);
            }
        }
        for v in &p.vars {
            for b in [&v.lower, &v.upper].into_iter().flatten() {
                sq_norms.push(BigInt::one() + b * b);
            }
        }
        sq_norms.sort_by(|a, b| b.cmp(a));
        let prod: BigInt = sq_norms.iter().take(n + 1).fold(BigInt::one(), |acc, s| acc * s);
        let delta = prod.sqrt() + BigInt::one();
        delta * BigInt::from(n + 1)
    }
}

fn improves(value: &BigRational, best: &BigRational, integral: bool) -> bool {
    if integral {
        ceil_rat(value) < ceil_rat(best)
    } else {
        value < best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::big;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(big(n))
    }

    #[test]
    fn lp_vertex_optimum() {
        let mut p = MixedProgram::new();
        let x = p.add_nonneg("x", false);
        let y = p.add_nonneg("y", false);
        p.add_constraint(vec![(x, big(1)), (y, big(1))], Sense::Ge, big(1));
        p.set_cost(x, big(1));
        p.set_cost(y, big(1));
        let out = lp_solve(&p).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.objective, Some(r(1)));
        assert!(out.values.iter().all(|v| v.is_integer()));
    }

    #[test]
    fn lp_infeasible_and_unbounded() {
        let mut p = MixedProgram::new();
        let x = p.add_var("x", Some(big(0)), Some(big(-1)), false);
        let _ = x;
        assert_eq!(lp_solve(&p).unwrap().status, Status::Infeasible);
        let mut q = MixedProgram::new();
        let x = q.add_nonneg("x", false);
        q.set_cost(x, big(-1));
        assert_eq!(lp_solve(&q).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn mip_rounds_up() {
        let mut p = MixedProgram::new();
        let x = p.add_nonneg("x", true);
        p.add_constraint(vec![(x, big(2))], Sense::Ge, big(3));
        p.set_cost(x, big(1));
        let out = mip_solve(&p, &MipOptions::default()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.values[x], r(2));
    }

    #[test]
    fn mip_parity_infeasible() {
        let mut p = MixedProgram::new();
        let x = p.add_nonneg("x", true);
        let y = p.add_nonneg("y", true);
        p.add_constraint(vec![(x, big(2)), (y, big(2))], Sense::Eq, big(1));
        assert_eq!(mip_solve(&p, &MipOptions::default()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn mip_forced_assignment() {
        let mut p = MixedProgram::new();
        let a = p.add_nonneg("y1", true);
        let b = p.add_nonneg("y2", true);
        p.add_constraint(vec![(a, big(1)), (b, big(1))], Sense::Eq, big(2));
        p.add_constraint(vec![(a, big(1))], Sense::Eq, big(1));
        p.set_cost(a, big(5));
        p.set_cost(b, big(1));
        let out = mip_solve(&p, &MipOptions::default()).unwrap();
        assert_eq!(out.objective, Some(r(6)));
    }

    #[test]
    fn mip_unbounded_with_integer_point() {
        let mut p = MixedProgram::new();
        let x = p.add_var("x", None, None, true);
        let y = p.add_var("y", None, None, true);
        p.add_constraint(vec![(x, big(2)), (y, big(-2))], Sense::Eq, big(4));
        p.set_cost(x, big(-1));
        assert_eq!(mip_solve(&p, &MipOptions::default()).unwrap().status, Status::Unbounded);
        let mut q = MixedProgram::new();
        let x = q.add_var("x", None, None, true);
        let y = q.add_var("y", None, None, true);
        q.add_constraint(vec![(x, big(2)), (y, big(-2))], Sense::Eq, big(3));
        q.set_cost(x, big(-1));
        assert_eq!(mip_solve(&q, &MipOptions::default()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn tu_round_single_arc() {
        let mut p = MixedProgram::new();
        let w = p.add_nonneg("w", false);
        p.add_constraint(vec![(w, big(1))], Sense::Eq, big(7));
        assert_eq!(tu_round(&p, &[]).unwrap(), vec![big(7)]);
    }

    #[test]
    fn tu_round_detects_fractional_vertex() {
        let mut p = MixedProgram::new();
        let w = p.add_nonneg("w", false);
        p.add_constraint(vec![(w, big(2))], Sense::Eq, big(1));
        assert!(matches!(tu_round(&p, &[]), Err(Error::Internal(_))));
    }
}
