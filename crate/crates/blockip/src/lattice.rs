//! Span and lattice membership over a finite generator set, the fractionality
//! constant of a generator set, and regular lattices `{v : v ≡ r mod K}`.
//!
//! The empty generator set spans `{0}`, generates the lattice `{0}` and has
//! fractionality constant 1.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Result;
use crate::hermite::{rank, row_echelon_pivots, solve_integer_system, determinant};
use crate::mip::{mip_solve, MipOptions, MixedProgram, Sense, Status};
use crate::numerics::{big, inf_norm, l1_norm, mod_floor, pow, IntVec, VectorSet};

/// Integer coefficients expressing a vector as a combination of generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeWitness {
    pub coefficients: Vec<BigInt>,
    pub generators: VectorSet,
}

impl LatticeWitness {
    /// `Σ λ_d · d`.
    pub fn combination(&self) -> IntVec {
        IntVec::from_parts(self.generators.index().clone(), combine(self.generators.vectors(), &self.coefficients, self.generators.dim()))
    }

    pub fn l1(&self) -> BigInt {
        l1_norm(&self.coefficients)
    }
}

pub(crate) fn combine(gens: &[Vec<BigInt>], coeffs: &[BigInt], dim: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); dim];
    for (g, c) in gens.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(g) {
            *o += c * x;
        }
    }
    out
}

/// Rows of the `dim × |D|` matrix whose columns are the generators.
pub(crate) fn generator_rows(gens: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    (0..dim).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect()
}

/// Whether `v` is a rational combination of the generators.
pub fn span_member(d: &VectorSet, v: &IntVec) -> Result<bool> {
    d.check_vector(v)?;
    Ok(span_member_raw(d.vectors(), v.entries()))
}

pub(crate) fn span_member_raw(gens: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    let mut with_v: Vec<Vec<BigInt>> = gens.to_vec();
    with_v.push(v.to_vec());
    rank(gens) == rank(&with_v)
}

/// Integer coefficients for `v` over the generators, or `None` if `v` is not in
/// the lattice they generate.
///
/// The coefficients are size-reduced against the kernel lattice and satisfy
/// `Σ|λ_d| ≤ (2 + max‖d‖∞ + ‖v‖∞)^(2·dim)`; if the reduced solution is longer
/// than that, an ℓ1-minimal witness is computed instead.
pub fn lattice_member(d: &VectorSet, v: &IntVec) -> Result<Option<LatticeWitness>> {
    d.check_vector(v)?;
    let Some(coefficients) = lattice_coefficients(d.vectors(), v.entries(), d.dim())? else {
        return Ok(None);
    };
    Ok(Some(LatticeWitness {
        coefficients,
        generators: d.clone(),
    }))
}

pub(crate) fn lattice_coefficients(gens: &[Vec<BigInt>], v: &[BigInt], dim: usize) -> Result<Option<Vec<BigInt>>> {
    let rows = generator_rows(gens, dim);
    let Some(sol) = solve_integer_system(&rows, v, gens.len()) else {
        return Ok(None);
    };
    let bound = witness_bound(gens, v, dim);
    if l1_norm(&sol.particular) <= bound {
        return Ok(Some(sol.particular));
    }
    shortest_witness(&rows, v, gens.len()).map(Some)
}

/// `(2 + max‖d‖∞ + ‖v‖∞)^(2·dim)`.
pub(crate) fn witness_bound(gens: &[Vec<BigInt>], v: &[BigInt], dim: usize) -> BigInt {
    let dmax = gens.iter().map(|g| inf_norm(g)).max().unwrap_or_else(BigInt::zero);
    pow(&(big(2) + dmax + inf_norm(v)), 2 * dim)
}

fn shortest_witness(rows: &[Vec<BigInt>], v: &[BigInt], n: usize) -> Result<Vec<BigInt>> {
    // λ = λ⁺ − λ⁻, minimise Σ λ⁺ + λ⁻
    let mut p = MixedProgram::new();
    let plus: Vec<usize> = (0..n).map(|j| p.add_nonneg(format!("p{j}"), true)).collect();
    let minus: Vec<usize> = (0..n).map(|j| p.add_nonneg(format!("m{j}"), true)).collect();
    for (row, rhs) in rows.iter().zip(v) {
        let mut terms = Vec::new();
        for (j, a) in row.iter().enumerate() {
            if !a.is_zero() {
                terms.push((plus[j], a.clone()));
                terms.push((minus[j], -a));
            }
        }
        p.add_constraint(terms, Sense::Eq, rhs.clone());
    }
    for j in 0..n {
        p.set_cost(plus[j], BigInt::one());
        p.set_cost(minus[j], BigInt::one());
    }
    let out = mip_solve(&p, &MipOptions::default())?;
    if out.status != Status::Optimal {
        return Err(crate::error::Error::ResourceLimit("shortest lattice witness search did not finish".into()));
    }
    Ok((0..n).map(|j| out.int_value(plus[j]) - out.int_value(minus[j])).collect())
}

/// A positive integer `C` such that every integer vector in the span of the
/// generators has rational coefficients `λ` with `C·λ` integral.
///
/// The generator matrix is restricted to its first independent rows (in order),
/// padded with unit rows on the non-pivot columns to a nonsingular square
/// matrix, and `C` is the absolute value of its determinant.
pub fn fractionality_constant(d: &VectorSet) -> BigInt {
    fractionality_constant_raw(d.vectors(), d.dim())
}

pub(crate) fn fractionality_constant_raw(gens: &[Vec<BigInt>], dim: usize) -> BigInt {
    if gens.is_empty() {
        return BigInt::one();
    }
    determinant(&padded_square(gens, dim).0).abs()
}

/// The padded square matrix and the chosen row indices.
fn padded_square(gens: &[Vec<BigInt>], dim: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let rows = generator_rows(gens, dim);
    let n = gens.len();
    let (chosen, pivots) = row_echelon_pivots(&rows);
    let mut square: Vec<Vec<BigInt>> = chosen.iter().map(|&i| rows[i].clone()).collect();
    for j in 0..n {
        if !pivots.contains(&j) {
            let mut e = vec![BigInt::zero(); n];
            e[j] = BigInt::one();
            square.push(e);
        }
    }
    (square, chosen)
}

/// Rational coefficients of `v` obtained from the same padded square system
/// that defines the fractionality constant (padding rows get right-hand side 0).
/// `None` if `v` is not in the span.
pub fn span_coefficients(d: &VectorSet, v: &IntVec) -> Result<Option<Vec<BigRational>>> {
    d.check_vector(v)?;
    let gens = d.vectors();
    if !span_member_raw(gens, v.entries()) {
        return Ok(None);
    }
    if gens.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let (square, chosen) = padded_square(gens, d.dim());
    let n = gens.len();
    let mut rhs = vec![BigInt::zero(); n];
    for (k, &i) in chosen.iter().enumerate() {
        rhs[k] = v.entries()[i].clone();
    }
    Ok(Some(solve_square(&square, &rhs)))
}

/// Gaussian elimination over the rationals for a nonsingular square system.
fn solve_square(a: &[Vec<BigInt>], b: &[BigInt]) -> Vec<BigRational> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("padded matrix is nonsingular");
        m.swap(col, piv);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let sub = &f * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n].clone()).collect()
}

/// Whether `v ≡ r` coordinatewise modulo `K` (negative entries normalised).
pub fn regular_lattice_member(v: &IntVec, k: &BigInt, r: &IntVec) -> Result<bool> {
    if v.index() != r.index() {
        return Err(crate::error::Error::IndexMismatch {
            expected: v.index().names().join(","),
            found: r.index().names().join(","),
        });
    }
    if !k.is_positive() {
        return Err(crate::error::Error::Precondition("modulus must be positive".into()));
    }
    Ok(v
        .entries()
        .iter()
        .zip(r.entries())
        .all(|(a, b)| mod_floor(a, k) == mod_floor(b, k)))
}
