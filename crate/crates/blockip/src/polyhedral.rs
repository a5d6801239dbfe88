//! Certificate polyhedra for integer-cone membership on a residue class.
//!
//! Fix generators `D`, their dual functionals `F`, the modulus `B` from
//! [`cone_constants`] and a residue `r ∈ {0..B−1}^t`. Every functional `f`
//! takes values `p_f, p_f + B, p_f + 2B, ...` on lattice points `v ≡ r (mod B)`
//! of `cone(D)`; `f` is *tight* for `v` when `⟨f,v⟩ = p_f`. Whether such a
//! point lies in `intCone(D)` depends only on its set of tight functionals, so
//! membership is decided by
//!
//! * `⟨f,v⟩ ≥ 0` for every `f ∈ F`, and
//! * `Σ_{g∈G} ⟨g,v⟩ ≥ 1 + Σ_{g∈G} p_g` for every pattern `G` that is not below
//!   a pattern realised by some point of `intCone(D)` in the residue class.
//!
//! Which patterns are realised is decided by one small ILP per pattern.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cone::{cone_constants, weyl_dual, ConeConstants, DualRepresentation, DEFAULT_FACET_CAP};
use crate::error::{Error, Result};
use crate::mip::{mip_solve, MipOptions, MixedProgram, Sense, Status};
use crate::numerics::{dot, fmt_row, mod_floor, IntVec, VectorSet};

/// Limits for certificate construction.
#[derive(Clone, Debug)]
pub struct CertificateOptions {
    pub facet_cap: usize,
    pub mip: MipOptions,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            facet_cap: DEFAULT_FACET_CAP,
            mip: MipOptions::default(),
        }
    }
}

/// A set of functionals, given by their positions in the facet list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TightPattern(pub Vec<usize>);

impl TightPattern {
    fn from_mask(mask: u64, len: usize) -> Self {
        TightPattern((0..len).filter(|i| mask >> i & 1 == 1).collect())
    }

    fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, i| m | 1 << i)
    }
}

/// The inequality system deciding integer-cone membership on one residue class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralCertificate {
    pub generators: VectorSet,
    pub facets: VectorSet,
    pub modulus: BigInt,
    pub residue: IntVec,
    /// `p_f` for every facet, in facet order.
    pub facet_residues: Vec<BigInt>,
    /// Patterns realised by points of the integer cone in the residue class.
    pub family: Vec<TightPattern>,
    /// Downward closure of `family`.
    pub closure: Vec<TightPattern>,
    /// Pairs `(q, a)` meaning `⟨q,v⟩ ≥ a`.
    pub inequalities: Vec<(IntVec, BigInt)>,
}

impl PolyhedralCertificate {
    /// Stable multi-line rendering used by the `analyze` command.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("modulus {}\n", self.modulus));
        out.push_str(&format!("residue {}\n", fmt_row(self.residue.entries())));
        for (f, p) in self.facets.vectors().iter().zip(&self.facet_residues) {
            out.push_str(&format!("facet {} residue {p}\n", fmt_row(f)));
        }
        let pat = |ps: &[TightPattern]| {
            ps.iter()
                .map(|p| format!("{{{}}}", p.0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("realised {}\n", pat(&self.family)));
        out.push_str(&format!("closure {}\n", pat(&self.closure)));
        for (q, a) in &self.inequalities {
            out.push_str(&format!("inequality {} >= {a}\n", fmt_row(q.entries())));
        }
        out
    }
}

/// The unique `p ∈ {0..B−1}` with `p ≡ ⟨f,r⟩ (mod B)`.
pub fn facet_residue(f: &IntVec, r: &IntVec, b: &BigInt) -> Result<BigInt> {
    if f.index() != r.index() {
        return Err(Error::IndexMismatch {
            expected: f.index().names().join(","),
            found: r.index().names().join(","),
        });
    }
    Ok(mod_floor(&dot(f.entries(), r.entries()), b))
}

fn check_residue(r: &IntVec, b: &BigInt) -> Result<()> {
    if r.entries().iter().any(|x| x.is_negative() || x >= b) {
        return Err(Error::Precondition(format!("residue {} is not reduced modulo {b}", fmt_row(r.entries()))));
    }
    Ok(())
}

/// Whether some `v ∈ intCone(D)` with `v ≡ r (mod B)` has exactly the tight set `G`.
///
/// Solved as one ILP in `v = B·w + r` and nonnegative integer coefficients `λ`
/// with `v = Σ λ_d d`, `⟨g,v⟩ = p_g` on `G` and `⟨f,v⟩ ≥ p_f + 1` off `G`.
pub fn family_l_member(
    dual: &DualRepresentation,
    constants: &ConeConstants,
    r: &IntVec,
    pattern: &TightPattern,
    opts: &CertificateOptions,
) -> Result<bool> {
    dual.generators.check_vector(r)?;
    check_residue(r, &constants.b)?;
    let residues: Vec<BigInt> = dual
        .facets
        .vectors()
        .iter()
        .map(|f| mod_floor(&dot(f, r.entries()), &constants.b))
        .collect();
    pattern_realised(dual, &constants.b, r.entries(), &residues, pattern.mask(), &opts.mip)
}

fn pattern_realised(
    dual: &DualRepresentation,
    b: &BigInt,
    r: &[BigInt],
    residues: &[BigInt],
    mask: u64,
    mip: &MipOptions,
) -> Result<bool> {
    let gens = dual.generators.vectors();
    let facets = dual.facets.vectors();
    let dim = dual.generators.dim();
    let mut p = MixedProgram::new();
    let w: Vec<usize> = (0..dim).map(|i| p.add_var(format!("w{i}"), None, None, true)).collect();
    let lam: Vec<usize> = (0..gens.len()).map(|j| p.add_nonneg(format!("l{j}"), true)).collect();
    // Σ_d d_x λ_d − B·w_x = r_x
    for x in 0..dim {
        let mut terms: Vec<(usize, BigInt)> = gens
            .iter()
            .zip(&lam)
            .filter(|(d, _)| !d[x].is_zero())
            .map(|(d, &j)| (j, d[x].clone()))
            .collect();
        terms.push((w[x], -b));
        p.add_constraint(terms, Sense::Eq, r[x].clone());
    }
    for (i, f) in facets.iter().enumerate() {
        // ⟨f, Σ λ_d d⟩ = Σ λ_d ⟨f,d⟩
        let terms: Vec<(usize, BigInt)> = gens
            .iter()
            .zip(&lam)
            .map(|(d, &j)| (j, dot(f, d)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if mask >> i & 1 == 1 {
            p.add_constraint(terms, Sense::Eq, residues[i].clone());
        } else {
            p.add_constraint(terms, Sense::Ge, &residues[i] + 1);
        }
    }
    for &j in &lam {
        p.set_cost(j, BigInt::one());
    }
    let out = mip_solve(&p, mip)?;
    match out.status {
        Status::Optimal | Status::Feasible | Status::Unbounded => Ok(true),
        Status::Infeasible => Ok(false),
        Status::ResourceLimit => Err(Error::ResourceLimit("pattern ILP exceeded the node budget".into())),
    }
}

type CertCache = Mutex<HashMap<(usize, Vec<Vec<BigInt>>, Vec<BigInt>), Arc<PolyhedralCertificate>>>;

fn cert_cache() -> &'static CertCache {
    static C: OnceLock<CertCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Builds the certificate for generators `D` and residue `r` (reduced modulo
/// the modulus of `D`). Results are cached by canonical generators and residue.
pub fn construct_q(d: &VectorSet, r: &IntVec, opts: &CertificateOptions) -> Result<Arc<PolyhedralCertificate>> {
    d.check_vector(r)?;
    let canonical = d.canonical();
    let key = (d.dim(), canonical.clone(), r.entries().to_vec());
    let cached = cert_cache().lock().expect("cache poisoned").get(&key).cloned();
    let cert = match cached {
        Some(hit) => hit,
        None => {
            let canon_set = VectorSet::new(d.index().clone(), canonical)?;
            let dual = weyl_dual(&canon_set);
            let constants = cone_constants(&dual, opts.facet_cap)?;
            let cert = Arc::new(build(&dual, &constants, r, opts)?);
            cert_cache().lock().expect("cache poisoned").insert(key, cert.clone());
            cert
        }
    };
    if cert.generators == *d && cert.residue == *r {
        return Ok(cert);
    }
    // same content, different generator order or index names
    let index = d.index().clone();
    let mut c = cert.as_ref().clone();
    c.generators = d.clone();
    c.residue = r.clone();
    c.facets = VectorSet::new(index.clone(), c.facets.vectors().to_vec())?;
    c.inequalities = c
        .inequalities
        .into_iter()
        .map(|(q, a)| (IntVec::from_parts(index.clone(), q.into_entries()), a))
        .collect();
    Ok(Arc::new(c))
}

/// Certificate construction for an already computed dual representation.
pub fn construct_q_with(
    dual: &DualRepresentation,
    constants: &ConeConstants,
    r: &IntVec,
    opts: &CertificateOptions,
) -> Result<PolyhedralCertificate> {
    dual.generators.check_vector(r)?;
    build(dual, constants, r, opts)
}

fn build(dual: &DualRepresentation, constants: &ConeConstants, r: &IntVec, opts: &CertificateOptions) -> Result<PolyhedralCertificate> {
    let b = &constants.b;
    check_residue(r, b)?;
    let facets = dual.facets.vectors();
    let nf = facets.len();
    if nf > opts.facet_cap {
        return Err(Error::ResourceLimit(format!("{nf} facets exceed the cap of {}", opts.facet_cap)));
    }
    let residues: Vec<BigInt> = facets.iter().map(|f| mod_floor(&dot(f, r.entries()), b)).collect();
    let full = 1u64 << nf;
    let mut masks: Vec<u64> = (0..full).collect();
    // larger patterns first so that a realised pattern settles all of its subsets
    masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    let mut family = BTreeSet::new();
    let mut closure = BTreeSet::new();
    for &m in &masks {
        if closure.contains(&m) {
            continue;
        }
        if pattern_realised(dual, b, r.entries(), &residues, m, &opts.mip)? {
            family.insert(m);
            let mut sub = m;
            loop {
                closure.insert(sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & m;
            }
        }
    }
    let index = dual.generators.index().clone();
    let mut inequalities: Vec<(IntVec, BigInt)> = facets
        .iter()
        .map(|f| (IntVec::from_parts(index.clone(), f.clone()), BigInt::zero()))
        .collect();
    for m in 0..full {
        if closure.contains(&m) {
            continue;
        }
        let mut q = vec![BigInt::zero(); dual.generators.dim()];
        let mut a = BigInt::one();
        for (i, f) in facets.iter().enumerate() {
            if m >> i & 1 == 1 {
                for (qx, fx) in q.iter_mut().zip(f) {
                    *qx += fx;
                }
                a += &residues[i];
            }
        }
        inequalities.push((IntVec::from_parts(index.clone(), q), a));
    }
    let to_patterns = |s: &BTreeSet<u64>| {
        let mut v: Vec<TightPattern> = s.iter().map(|&m| TightPattern::from_mask(m, nf)).collect();
        v.sort();
        v
    };
    Ok(PolyhedralCertificate {
        generators: dual.generators.clone(),
        facets: dual.facets.clone(),
        modulus: b.clone(),
        residue: r.clone(),
        facet_residues: residues,
        family: to_patterns(&family),
        closure: to_patterns(&closure),
        inequalities,
    })
}

/// Whether `v` (which must satisfy `v ≡ r mod B`) satisfies every inequality.
pub fn certified_member(cert: &PolyhedralCertificate, v: &IntVec) -> Result<bool> {
    cert.generators.check_vector(v)?;
    let ok_class = v
        .entries()
        .iter()
        .zip(cert.residue.entries())
        .all(|(x, r)| mod_floor(x, &cert.modulus) == *r);
    if !ok_class {
        return Err(Error::Precondition(format!(
            "{} is not congruent to the residue {} modulo {}",
            fmt_row(v.entries()),
            fmt_row(cert.residue.entries()),
            cert.modulus
        )));
    }
    Ok(satisfies(cert, v.entries()))
}

pub(crate) fn satisfies(cert: &PolyhedralCertificate, v: &[BigInt]) -> bool {
    cert.inequalities.iter().all(|(q, a)| dot(q.entries(), v) >= *a)
}

/// The tight set of a point of the residue class.
pub fn tight_pattern(cert: &PolyhedralCertificate, v: &IntVec) -> TightPattern {
    TightPattern(
        cert.facets
            .vectors()
            .iter()
            .zip(&cert.facet_residues)
            .enumerate()
            .filter(|(_, (f, p))| dot(f, v.entries()) == **p)
            .map(|(i, _)| i)
            .collect(),
    )
}
