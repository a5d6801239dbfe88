//! Block-structured program types and their solution objects.
//!
//! * Two-stage: `A_i u + D_i v_i = b_i` for every brick `i`, with `u, v_i ≥ 0`.
//! * n-fold (uniform): `Σ_i C y_i = a`, `D_i y_i = b_i`, `y_i ≥ 0`, minimising
//!   `Σ_i ⟨c_i, y_i⟩`. A brick may carry a multiplicity (high-multiplicity form).
//! * 4-block: `B̂ x + Σ_t C y_t = a`, `A x + D_t y_t = b_t`, `x, y_t ≥ 0`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{mat_vec, IntMat, IntVec, Index};

fn dims(what: &str, m: &IntMat, rows: &Index, cols: &Index) -> Result<()> {
    if m.row_index() != rows || m.col_index() != cols {
        return Err(Error::Dimension(format!(
            "{what} is {}x{} but {}x{} was expected",
            m.nrows(),
            m.ncols(),
            rows.len(),
            cols.len()
        )));
    }
    Ok(())
}

fn vdims(what: &str, v: &IntVec, idx: &Index) -> Result<()> {
    if v.index() != idx {
        return Err(Error::Dimension(format!("{what} has length {} but {} was expected", v.len(), idx.len())));
    }
    Ok(())
}

/// One brick `A_i u + D_i v_i = b_i` of a two-stage program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoStageBrick {
    pub a: IntMat,
    pub d: IntMat,
    pub b: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoStageProgram {
    pub globals: Index,
    pub locals: Index,
    pub rows: Index,
    pub bricks: Vec<TwoStageBrick>,
}

impl TwoStageProgram {
    pub fn new(globals: Index, locals: Index, rows: Index, bricks: Vec<TwoStageBrick>) -> Result<Self> {
        let p = TwoStageProgram {
            globals,
            locals,
            rows,
            bricks,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds a program over anonymous indices `x*`, `y*`, `t*` from small literals.
    pub fn from_i64(nx: usize, ny: usize, bricks: &[(&[&[i64]], &[&[i64]], &[i64])]) -> Result<Self> {
        let globals = Index::range("x", nx);
        let locals = Index::range("y", ny);
        let nt = bricks.first().map_or(0, |b| b.2.len());
        let rows = Index::range("t", nt);
        let mut out = Vec::new();
        for (a, d, b) in bricks {
            let to = |r: &[&[i64]]| -> Vec<Vec<BigInt>> { r.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect() };
            out.push(TwoStageBrick {
                a: IntMat::new(rows.clone(), globals.clone(), to(a))?,
                d: IntMat::new(rows.clone(), locals.clone(), to(d))?,
                b: IntVec::from_i64(rows.clone(), b)?,
            });
        }
        TwoStageProgram::new(globals, locals, rows, out)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, br) in self.bricks.iter().enumerate() {
            dims(&format!("A of brick {i}"), &br.a, &self.rows, &self.globals)?;
            dims(&format!("D of brick {i}"), &br.d, &self.rows, &self.locals)?;
            vdims(&format!("b of brick {i}"), &br.b, &self.rows)?;
        }
        Ok(())
    }

    /// `max_i ‖D_i‖∞`.
    pub fn delta(&self) -> BigInt {
        self.bricks.iter().map(|b| b.d.max_abs()).max().unwrap_or_else(BigInt::zero)
    }
}

/// A solution `(u, v_1, ..., v_n)` of a two-stage program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoStageWitness {
    pub u: IntVec,
    pub v: Vec<IntVec>,
}

impl TwoStageWitness {
    /// Exact re-substitution into every brick.
    pub fn verify(&self, p: &TwoStageProgram) -> bool {
        if self.u.index() != &p.globals || self.v.len() != p.bricks.len() || !self.u.is_nonnegative() {
            return false;
        }
        p.bricks.iter().zip(&self.v).all(|(br, v)| {
            v.index() == &p.locals && v.is_nonnegative() && {
                let au = mat_vec(br.a.rows(), self.u.entries());
                let dv = mat_vec(br.d.rows(), v.entries());
                au.iter().zip(&dv).zip(br.b.entries()).all(|((x, y), b)| x + y == *b)
            }
        })
    }
}

/// One brick `D_i y = b_i` with cost `c_i`, repeated `multiplicity` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NFoldBrick {
    pub d: IntMat,
    pub b: IntVec,
    pub c: IntVec,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NFoldProgram {
    pub locals: Index,
    pub link_rows: Index,
    pub local_rows: Index,
    /// The uniform linking block `C` (link rows × locals).
    pub c: IntMat,
    pub a: IntVec,
    pub bricks: Vec<NFoldBrick>,
}

impl NFoldProgram {
    pub fn new(c: IntMat, a: IntVec, local_rows: Index, bricks: Vec<NFoldBrick>) -> Result<Self> {
        let p = NFoldProgram {
            locals: c.col_index().clone(),
            link_rows: c.row_index().clone(),
            local_rows,
            c,
            a,
            bricks,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        dims("C", &self.c, &self.link_rows, &self.locals)?;
        vdims("a", &self.a, &self.link_rows)?;
        for (i, br) in self.bricks.iter().enumerate() {
            dims(&format!("D of brick {i}"), &br.d, &self.local_rows, &self.locals)?;
            vdims(&format!("b of brick {i}"), &br.b, &self.local_rows)?;
            vdims(&format!("c of brick {i}"), &br.c, &self.locals)?;
            if br.multiplicity == 0 {
                return Err(Error::Dimension(format!("brick {i} has multiplicity 0")));
            }
        }
        Ok(())
    }

    /// Total number of bricks counting multiplicities.
    pub fn brick_count(&self) -> usize {
        self.bricks.iter().map(|b| b.multiplicity).sum()
    }

    /// `max_i ‖D_i‖∞`.
    pub fn delta(&self) -> BigInt {
        self.bricks.iter().map(|b| b.d.max_abs()).max().unwrap_or_else(BigInt::zero)
    }
}

/// An n-fold solution; `bricks[i]` lists `(y, count)` groups whose counts sum
/// to the multiplicity of brick `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NFoldSolution {
    pub bricks: Vec<Vec<(IntVec, usize)>>,
}

impl NFoldSolution {
    /// Exact re-substitution; returns the objective value if feasible.
    pub fn verify(&self, p: &NFoldProgram) -> Option<BigInt> {
        if self.bricks.len() != p.bricks.len() {
            return None;
        }
        let mut link = vec![BigInt::zero(); p.link_rows.len()];
        let mut value = BigInt::zero();
        for (br, groups) in p.bricks.iter().zip(&self.bricks) {
            if groups.iter().map(|(_, k)| *k).sum::<usize>() != br.multiplicity {
                return None;
            }
            for (y, k) in groups {
                if y.index() != &p.locals || y.entries().iter().any(|e| e.is_negative()) {
                    return None;
                }
                if mat_vec(br.d.rows(), y.entries()) != br.b.entries() {
                    return None;
                }
                let k = BigInt::from(*k);
                for (l, cy) in link.iter_mut().zip(mat_vec(p.c.rows(), y.entries())) {
                    *l += cy * &k;
                }
                value += y.dot(&br.c).ok()? * &k;
            }
        }
        (link == p.a.entries()).then_some(value)
    }
}

/// One group `A x + D_t y_t = b_t` of a 4-block program; `a`/`c` override the
/// program-wide blocks when present (which makes the program non-uniform).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourBlockGroup {
    pub c: Option<IntMat>,
    pub a: Option<IntMat>,
    pub d: IntMat,
    pub b: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourBlockProgram {
    pub globals: Index,
    pub locals: Index,
    pub link_rows: Index,
    pub local_rows: Index,
    /// `B̂` (link rows × globals).
    pub bmat: IntMat,
    /// `C` (link rows × locals).
    pub c: IntMat,
    /// `A` (local rows × globals).
    pub a: IntMat,
    /// Linking right-hand side.
    pub rhs: IntVec,
    pub groups: Vec<FourBlockGroup>,
}

impl FourBlockProgram {
    pub fn validate(&self) -> Result<()> {
        dims("Bmat", &self.bmat, &self.link_rows, &self.globals)?;
        dims("C", &self.c, &self.link_rows, &self.locals)?;
        dims("A", &self.a, &self.local_rows, &self.globals)?;
        vdims("a", &self.rhs, &self.link_rows)?;
        for (i, g) in self.groups.iter().enumerate() {
            if let Some(c) = &g.c {
                dims(&format!("C of group {i}"), c, &self.link_rows, &self.locals)?;
            }
            if let Some(a) = &g.a {
                dims(&format!("A of group {i}"), a, &self.local_rows, &self.globals)?;
            }
            dims(&format!("D of group {i}"), &g.d, &self.local_rows, &self.locals)?;
            vdims(&format!("b of group {i}"), &g.b, &self.local_rows)?;
        }
        Ok(())
    }

    pub fn is_uniform(&self) -> bool {
        self.groups.iter().all(|g| g.c.is_none() && g.a.is_none())
    }

    pub fn group_c(&self, t: usize) -> &IntMat {
        self.groups[t].c.as_ref().unwrap_or(&self.c)
    }

    pub fn group_a(&self, t: usize) -> &IntMat {
        self.groups[t].a.as_ref().unwrap_or(&self.a)
    }

    /// Exact check of `(x, y_1..y_n)`.
    pub fn is_solution(&self, x: &[BigInt], ys: &[Vec<BigInt>]) -> bool {
        if x.len() != self.globals.len() || ys.len() != self.groups.len() {
            return false;
        }
        if x.iter().chain(ys.iter().flatten()).any(|e| e.is_negative()) {
            return false;
        }
        let mut link = mat_vec(self.bmat.rows(), x);
        for (t, y) in ys.iter().enumerate() {
            for (l, v) in link.iter_mut().zip(mat_vec(self.group_c(t).rows(), y)) {
                *l += v;
            }
            let ax = mat_vec(self.group_a(t).rows(), x);
            let dy = mat_vec(self.groups[t].d.rows(), y);
            if ax.iter().zip(&dy).zip(self.groups[t].b.entries()).any(|((p, q), b)| p + q != *b) {
                return false;
            }
        }
        link == self.rhs.entries()
    }
}

/// A 3-CNF formula; literal `+k` / `−k` refers to variable `k` (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<[i64; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[i64; 3]>) -> Result<Self> {
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > num_vars {
                    return Err(Error::Precondition(format!("literal {l} out of range 1..={num_vars}")));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Evaluates the formula; `assignment[k]` is the value of variable `k+1`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = assignment[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_verification() {
        let p = TwoStageProgram::from_i64(1, 1, &[(&[&[1]], &[&[2]], &[3])]).unwrap();
        let w = TwoStageWitness {
            u: IntVec::anon("x", &[1]),
            v: vec![IntVec::anon("y", &[1])],
        };
        assert!(w.verify(&p));
        let w = TwoStageWitness {
            u: IntVec::anon("x", &[0]),
            v: vec![IntVec::anon("y", &[1])],
        };
        assert!(!w.verify(&p));
    }

    #[test]
    fn ragged_brick_is_rejected() {
        assert!(TwoStageProgram::from_i64(1, 2, &[(&[&[1]], &[&[2]], &[3])]).is_err());
    }

    #[test]
    fn cnf_evaluation() {
        let f = CnfFormula::new(3, vec![[1, 2, -3]]).unwrap();
        assert!(f.eval(&[false, false, false]));
        assert!(!f.eval(&[false, false, true]));
        assert!(CnfFormula::new(2, vec![[1, 2, 3]]).is_err());
    }
}
