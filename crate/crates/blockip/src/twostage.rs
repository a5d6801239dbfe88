//! Feasibility of two-stage stochastic integer programs.
//!
//! The residue engine writes the global vector as `u = B·w + r` with `B` a
//! common multiple of the certificate moduli of all brick types. For fixed
//! `r`, every brick's right-hand side `b_i − A_i u` stays in one residue class
//! modulo its own modulus, so integer-cone membership of that right-hand side
//! is exactly a system of linear inequalities in `w`. Each residue therefore
//! costs one small integer program over `w` alone.
//!
//! The direct engine encodes the whole program as one flat integer program.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::cone::{cone_constants, weyl_dual};
use crate::error::{Error, Result};
use crate::mip::{mip_solve, MipOptions, MixedProgram, Sense, Status};
use crate::model::{TwoStageProgram, TwoStageWitness};
use crate::numerics::{ceil_rat, dot, floor_rat, lcm, mat_vec, mod_floor, sub_vec, IntMat, IntVec, Index, VectorSet};
use crate::polyhedral::{construct_q, CertificateOptions, PolyhedralCertificate};

/// Default cap on the number of residues `B^|x|` the residue engine enumerates.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// The answer of either engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoStageVerdict {
    Feasible(TwoStageWitness),
    Infeasible,
    ResourceLimit(String),
}

impl TwoStageVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, TwoStageVerdict::Feasible(_))
    }
}

#[derive(Clone, Debug)]
pub struct TwoStageOptions {
    /// Largest number of residues the residue engine may enumerate.
    pub budget: u64,
    pub certificate: CertificateOptions,
    pub mip: MipOptions,
}

impl Default for TwoStageOptions {
    fn default() -> Self {
        TwoStageOptions {
            budget: DEFAULT_BUDGET,
            certificate: CertificateOptions::default(),
            mip: MipOptions::default(),
        }
    }
}

/// A distinct local matrix after removing repeated columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrickType {
    /// Sorted, duplicate-free columns over the row index.
    pub d: IntMat,
    /// Bricks of this type.
    pub members: Vec<usize>,
}

/// A program whose bricks are grouped by their column-deduplicated `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedTwoStage {
    pub program: TwoStageProgram,
    pub types: Vec<BrickType>,
    /// `type_of[i]` is the type of brick `i`.
    pub type_of: Vec<usize>,
}

impl NormalizedTwoStage {
    /// Lifts local vectors over a type's columns back to the original locals:
    /// each column value goes to its first occurrence in `D_i`, the rest are 0.
    pub fn lift(&self, brick: usize, v: &[BigInt]) -> IntVec {
        let t = &self.types[self.type_of[brick]];
        let cols = self.program.bricks[brick].d.columns();
        let mut out = vec![BigInt::zero(); self.program.locals.len()];
        for (k, col) in t.d.columns().iter().enumerate() {
            let j = cols.iter().position(|c| c == col).expect("type column occurs in brick");
            out[j] = v[k].clone();
        }
        IntVec::from_parts(self.program.locals.clone(), out)
    }
}

/// Groups bricks by the sorted set of distinct columns of their `D`.
pub fn normalize_twostage(p: &TwoStageProgram) -> NormalizedTwoStage {
    let mut types: Vec<BrickType> = Vec::new();
    let mut by_key: HashMap<Vec<Vec<BigInt>>, usize> = HashMap::new();
    let mut type_of = Vec::with_capacity(p.bricks.len());
    for (i, br) in p.bricks.iter().enumerate() {
        let mut cols = br.d.columns();
        cols.sort();
        cols.dedup();
        let next = types.len();
        let t = *by_key.entry(cols.clone()).or_insert(next);
        if t == next {
            let names = Index::range("y", cols.len());
            let d = IntMat::from_columns(p.rows.clone(), names, &cols).expect("columns match the row index");
            types.push(BrickType { d, members: Vec::new() });
        }
        types[t].members.push(i);
        type_of.push(t);
    }
    NormalizedTwoStage {
        program: p.clone(),
        types,
        type_of,
    }
}

/// The residue engine.
pub fn solve_twostage_residue(p: &TwoStageProgram, opts: &TwoStageOptions) -> Result<TwoStageVerdict> {
    match residue_engine(p, opts) {
        Err(Error::ResourceLimit(m)) => Ok(TwoStageVerdict::ResourceLimit(m)),
        other => other,
    }
}

fn residue_engine(p: &TwoStageProgram, opts: &TwoStageOptions) -> Result<TwoStageVerdict> {
    p.validate()?;
    let norm = normalize_twostage(p);
    let gens: Vec<VectorSet> = norm.types.iter().map(|t| VectorSet::from_columns(&t.d)).collect();
    let mut moduli = Vec::with_capacity(gens.len());
    for g in &gens {
        let dual = weyl_dual(g);
        moduli.push(cone_constants(&dual, opts.certificate.facet_cap)?.b);
    }
    let modulus = moduli.iter().fold(BigInt::one(), |a, b| lcm(&a, b));
    let nx = p.globals.len();
    let total = modulus
        .to_u64()
        .and_then(|m| m.checked_pow(nx as u32))
        .filter(|&t| t <= opts.budget)
        .ok_or_else(|| Error::ResourceLimit(format!("{modulus}^{nx} residues exceed the budget of {}", opts.budget)))?;
    let ctx = ResidueContext {
        p,
        norm: &norm,
        gens: &gens,
        moduli: &moduli,
        modulus: &modulus,
        opts,
        certs: (0..gens.len()).map(|_| Mutex::new(HashMap::new())).collect(),
    };
    // lexicographically smallest feasible residue, independent of scheduling
    let found = (0..total)
        .into_par_iter()
        .map(|idx| ctx.try_residue(&decode(idx, &modulus, nx)))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    let u = match found {
        None => return Ok(TwoStageVerdict::Infeasible),
        Some(r) => r?.expect("filtered above"),
    };
    let witness = recover_locals(&norm, u, &opts.mip)?;
    if !witness.verify(p) {
        return Err(Error::Internal("residue engine produced a witness that does not re-substitute".into()));
    }
    Ok(TwoStageVerdict::Feasible(witness))
}

/// Mixed-radix digits of `idx`, most significant first.
fn decode(mut idx: u64, modulus: &BigInt, nx: usize) -> Vec<BigInt> {
    let m = modulus.to_u64().expect("modulus fits when the budget does");
    let mut r = vec![BigInt::zero(); nx];
    for x in r.iter_mut().rev() {
        *x = BigInt::from(idx % m);
        idx /= m;
    }
    r
}

struct ResidueContext<'a> {
    p: &'a TwoStageProgram,
    norm: &'a NormalizedTwoStage,
    gens: &'a [VectorSet],
    moduli: &'a [BigInt],
    modulus: &'a BigInt,
    opts: &'a TwoStageOptions,
    /// Certificates per type, keyed by the brick residue.
    certs: Vec<Mutex<HashMap<Vec<BigInt>, Arc<PolyhedralCertificate>>>>,
}

impl ResidueContext<'_> {
    fn certificate(&self, t: usize, ri: Vec<BigInt>) -> Result<Arc<PolyhedralCertificate>> {
        if let Some(c) = self.certs[t].lock().expect("cache poisoned").get(&ri) {
            return Ok(c.clone());
        }
        let v = IntVec::from_parts(self.p.rows.clone(), ri.clone());
        let cert = construct_q(&self.gens[t], &v, &self.opts.certificate)?;
        self.certs[t].lock().expect("cache poisoned").insert(ri, cert.clone());
        Ok(cert)
    }

    /// Returns a feasible global vector `u ≡ r (mod B)` if one exists.
    fn try_residue(&self, r: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        let mut certs: Vec<Arc<PolyhedralCertificate>> = Vec::with_capacity(self.p.bricks.len());
        for (i, br) in self.p.bricks.iter().enumerate() {
            let t = self.norm.type_of[i];
            let rhs = sub_vec(br.b.entries(), &mat_vec(br.a.rows(), r));
            let ri: Vec<BigInt> = rhs.iter().map(|x| mod_floor(x, &self.moduli[t])).collect();
            let cert = self.certificate(t, ri)?;
            if cert.closure.is_empty() {
                // no point of the integer cone lies in this class at all
                return Ok(None);
            }
            certs.push(cert);
        }
        let nx = r.len();
        let mut ilp = MixedProgram::new();
        let w: Vec<usize> = (0..nx).map(|j| ilp.add_var(format!("w{j}"), None, None, true)).collect();
        // u = B·w + r ≥ 0
        for j in 0..nx {
            ilp.add_constraint(vec![(w[j], self.modulus.clone())], Sense::Ge, -r[j].clone());
        }
        // ⟨q, b_i − A_i r⟩ − B·⟨q, A_i w⟩ ≥ a for every certificate inequality
        for (br, cert) in self.p.bricks.iter().zip(&certs) {
            let rhs = sub_vec(br.b.entries(), &mat_vec(br.a.rows(), r));
            for (q, a) in &cert.inequalities {
                let coeffs: Vec<BigInt> = (0..nx)
                    .map(|j| -(self.modulus * dot(q.entries(), &br.a.column(j))))
                    .collect();
                let bound = a - dot(q.entries(), &rhs);
                if coeffs.iter().all(Zero::is_zero) {
                    if bound > BigInt::zero() {
                        return Ok(None);
                    }
                    continue;
                }
                let terms = w.iter().copied().zip(coeffs).filter(|(_, c)| !c.is_zero()).collect();
                ilp.add_constraint(terms, Sense::Ge, bound);
            }
        }
        if nx == 1 {
            return Ok(univariate(&ilp).map(|w| vec![self.modulus * w + &r[0]]));
        }
        let out = mip_solve(&ilp, &self.opts.mip)?;
        match out.status {
            Status::Optimal | Status::Feasible => {
                let u = (0..nx).map(|j| self.modulus * out.int_value(w[j]) + &r[j]).collect();
                Ok(Some(u))
            }
            Status::Infeasible => Ok(None),
            Status::Unbounded => Err(Error::Internal("zero objective reported unbounded".into())),
            Status::ResourceLimit => Err(Error::ResourceLimit("residue integer program hit the node limit".into())),
        }
    }
}

/// Smallest integer satisfying constraints `c·w ≥ β` in one variable.
fn univariate(ilp: &MixedProgram) -> Option<BigInt> {
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    for con in &ilp.constraints {
        let (_, c) = &con.terms[0];
        let q = BigRational::new(con.rhs.clone(), c.clone());
        if c.is_positive() {
            let l = ceil_rat(&q);
            lo = Some(lo.map_or(l.clone(), |x| x.max(l)));
        } else {
            let h = floor_rat(&q);
            hi = Some(hi.map_or(h.clone(), |x| x.min(h)));
        }
    }
    let lo = lo.expect("u ≥ 0 bounds w below");
    match hi {
        Some(h) if h < lo => None,
        _ => Some(lo),
    }
}

/// Finds `v_i ≥ 0` with `D v_i = b_i − A_i u` brick by brick.
fn recover_locals(norm: &NormalizedTwoStage, u: Vec<BigInt>, mip: &MipOptions) -> Result<TwoStageWitness> {
    let p = &norm.program;
    let mut v = Vec::with_capacity(p.bricks.len());
    for (i, br) in p.bricks.iter().enumerate() {
        let d = &norm.types[norm.type_of[i]].d;
        let rhs = sub_vec(br.b.entries(), &mat_vec(br.a.rows(), &u));
        let mut ilp = MixedProgram::new();
        let vars: Vec<usize> = (0..d.ncols()).map(|j| ilp.add_nonneg(format!("v{j}"), true)).collect();
        for (row, b) in d.rows().iter().zip(rhs) {
            let terms = vars.iter().copied().zip(row.iter().cloned()).filter(|(_, c)| !c.is_zero()).collect();
            ilp.add_constraint(terms, Sense::Eq, b);
        }
        let out = mip_solve(&ilp, mip)?;
        match out.status {
            Status::Optimal | Status::Feasible => {
                let vals: Vec<BigInt> = vars.iter().map(|&j| out.int_value(j)).collect();
                v.push(norm.lift(i, &vals));
            }
            Status::ResourceLimit => return Err(Error::ResourceLimit("witness recovery hit the node limit".into())),
            _ => return Err(Error::Internal(format!("certified brick {i} has no local solution"))),
        }
    }
    Ok(TwoStageWitness {
        u: IntVec::from_parts(p.globals.clone(), u),
        v,
    })
}

/// The direct engine: one flat integer program over `u` and all `v_i`.
pub fn solve_twostage_direct(p: &TwoStageProgram, opts: &TwoStageOptions) -> Result<TwoStageVerdict> {
    p.validate()?;
    let nx = p.globals.len();
    let ny = p.locals.len();
    let mut ilp = MixedProgram::new();
    let u: Vec<usize> = (0..nx).map(|j| ilp.add_nonneg(p.globals.names()[j].clone(), true)).collect();
    let mut vs = Vec::with_capacity(p.bricks.len());
    for i in 0..p.bricks.len() {
        vs.push((0..ny).map(|j| ilp.add_nonneg(format!("{}_{i}", p.locals.names()[j]), true)).collect::<Vec<_>>());
    }
    for (br, v) in p.bricks.iter().zip(&vs) {
        for (k, b) in br.b.entries().iter().enumerate() {
            let mut terms: Vec<(usize, BigInt)> = Vec::new();
            terms.extend(u.iter().zip(&br.a.rows()[k]).filter(|(_, c)| !c.is_zero()).map(|(&j, c)| (j, c.clone())));
            terms.extend(v.iter().zip(&br.d.rows()[k]).filter(|(_, c)| !c.is_zero()).map(|(&j, c)| (j, c.clone())));
            ilp.add_constraint(terms, Sense::Eq, b.clone());
        }
    }
    let out = mip_solve(&ilp, &opts.mip)?;
    match out.status {
        Status::Optimal | Status::Feasible => {
            let witness = TwoStageWitness {
                u: IntVec::from_parts(p.globals.clone(), u.iter().map(|&j| out.int_value(j)).collect()),
                v: vs
                    .iter()
                    .map(|v| IntVec::from_parts(p.locals.clone(), v.iter().map(|&j| out.int_value(j)).collect()))
                    .collect(),
            };
            if !witness.verify(p) {
                return Err(Error::Internal("direct engine produced a witness that does not re-substitute".into()));
            }
            Ok(TwoStageVerdict::Feasible(witness))
        }
        Status::Infeasible => Ok(TwoStageVerdict::Infeasible),
        Status::Unbounded => Err(Error::Internal("zero objective reported unbounded".into())),
        Status::ResourceLimit => Ok(TwoStageVerdict::ResourceLimit("branch-and-bound node limit reached".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both(p: &TwoStageProgram) -> (TwoStageVerdict, TwoStageVerdict) {
        let o = TwoStageOptions::default();
        (solve_twostage_residue(p, &o).unwrap(), solve_twostage_direct(p, &o).unwrap())
    }

    #[test]
    fn normalization_merges_columns_and_types() {
        let p = TwoStageProgram::from_i64(1, 2, &[(&[&[1]], &[&[1, 1]], &[3]), (&[&[2]], &[&[1, 1]], &[4])]).unwrap();
        let n = normalize_twostage(&p);
        assert_eq!(n.types.len(), 1);
        assert_eq!(n.types[0].d.ncols(), 1);
        assert_eq!(n.types[0].members, vec![0, 1]);
        assert_eq!(n.lift(0, &[BigInt::from(5)]), IntVec::anon("y", &[5, 0]));
        let q = TwoStageProgram::from_i64(1, 2, &[(&[&[1]], &[&[1, 2]], &[3])]).unwrap();
        assert_eq!(normalize_twostage(&q).types[0].d.ncols(), 2);
    }

    #[test]
    fn small_examples() {
        let p = TwoStageProgram::from_i64(1, 1, &[(&[&[1]], &[&[2]], &[3])]).unwrap();
        let (r, d) = both(&p);
        let expect = TwoStageWitness {
            u: IntVec::anon("x", &[1]),
            v: vec![IntVec::anon("y", &[1])],
        };
        assert_eq!(r, TwoStageVerdict::Feasible(expect));
        assert!(d.is_feasible());

        let p = TwoStageProgram::from_i64(1, 1, &[(&[&[2]], &[&[2]], &[1])]).unwrap();
        assert_eq!(both(&p), (TwoStageVerdict::Infeasible, TwoStageVerdict::Infeasible));
    }

    #[test]
    fn large_global_entries_are_exact() {
        let p = TwoStageProgram::from_i64(1, 1, &[(&[&[1_000_000_000]], &[&[1]], &[1_000_000_000])]).unwrap();
        let (r, d) = both(&p);
        for v in [r, d] {
            let TwoStageVerdict::Feasible(w) = v else { panic!("expected feasible") };
            assert!(w.verify(&p));
        }
    }
}
