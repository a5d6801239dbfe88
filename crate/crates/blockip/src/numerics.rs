//! Arbitrary-precision vectors and matrices over named index tuples.
//!
//! Every vector carries the ordered tuple of variable names it is indexed by.
//! Two vectors can only be combined when their index tuples agree, which keeps
//! bricks with different variable namespaces from being mixed up silently.
//! Heavy algorithms elsewhere in the crate work on plain `Vec<BigInt>` slices and
//! only wrap results into [`IntVec`] at their public boundary.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An ordered tuple of variable names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index(Arc<Vec<String>>);

impl Index {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Index(Arc::new(names.into_iter().map(Into::into).collect()))
    }

    /// Names `prefix0, prefix1, ...`.
    pub fn range(prefix: &str, len: usize) -> Self {
        Index::new((0..len).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    fn same(&self, other: &Index) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }

    fn check(&self, other: &Index) -> Result<()> {
        if self.same(other) {
            Ok(())
        } else {
            Err(Error::IndexMismatch {
                expected: self.0.join(","),
                found: other.0.join(","),
            })
        }
    }
}

impl fmt::Debug for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// An integer vector indexed by a variable tuple.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVec {
    index: Index,
    entries: Vec<BigInt>,
}

impl IntVec {
    pub fn new(index: Index, entries: Vec<BigInt>) -> Result<Self> {
        if index.len() != entries.len() {
            return Err(Error::Dimension(format!(
                "index has {} variables but {} entries were given",
                index.len(),
                entries.len()
            )));
        }
        Ok(IntVec { index, entries })
    }

    /// Builds a vector over `index`; panics if the lengths differ.
    pub fn from_parts(index: Index, entries: Vec<BigInt>) -> Self {
        assert_eq!(index.len(), entries.len(), "vector length does not match its index");
        IntVec { index, entries }
    }

    pub fn zeros(index: Index) -> Self {
        let entries = vec![BigInt::zero(); index.len()];
        IntVec { index, entries }
    }

    pub fn from_i64(index: Index, values: &[i64]) -> Result<Self> {
        IntVec::new(index, values.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// A vector over the anonymous index `prefix0..`.
    pub fn anon(prefix: &str, values: &[i64]) -> Self {
        IntVec::from_parts(
            Index::range(prefix, values.len()),
            values.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&BigInt> {
        self.index.position(name).map(|i| &self.entries[i])
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| !e.is_negative())
    }

    pub fn add(&self, other: &IntVec) -> Result<IntVec> {
        self.index.check(&other.index)?;
        Ok(IntVec {
            index: self.index.clone(),
            entries: add_vec(&self.entries, &other.entries),
        })
    }

    pub fn sub(&self, other: &IntVec) -> Result<IntVec> {
        self.index.check(&other.index)?;
        Ok(IntVec {
            index: self.index.clone(),
            entries: sub_vec(&self.entries, &other.entries),
        })
    }

    pub fn scale(&self, k: &BigInt) -> IntVec {
        IntVec {
            index: self.index.clone(),
            entries: scale_vec(&self.entries, k),
        }
    }

    pub fn dot(&self, other: &IntVec) -> Result<BigInt> {
        self.index.check(&other.index)?;
        Ok(dot(&self.entries, &other.entries))
    }

    /// Reinterprets the entries over a different index of the same length.
    pub fn reindex(&self, index: Index) -> Result<IntVec> {
        IntVec::new(index, self.entries.clone())
    }
}

impl fmt::Debug for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_row(&self.entries))
    }
}

/// A dense integer matrix with named row and column indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: Index,
    cols: Index,
    data: Vec<Vec<BigInt>>,
}

impl IntMat {
    pub fn new(rows: Index, cols: Index, data: Vec<Vec<BigInt>>) -> Result<Self> {
        if data.len() != rows.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows but its row index has {}",
                data.len(),
                rows.len()
            )));
        }
        if let Some(r) = data.iter().find(|r| r.len() != cols.len()) {
            return Err(Error::Dimension(format!(
                "matrix row has {} entries but the column index has {}",
                r.len(),
                cols.len()
            )));
        }
        Ok(IntMat { rows, cols, data })
    }

    pub fn zeros(rows: Index, cols: Index) -> Self {
        let data = vec![vec![BigInt::zero(); cols.len()]; rows.len()];
        IntMat { rows, cols, data }
    }

    pub fn identity(index: Index) -> Self {
        let n = index.len();
        let data = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
        IntMat {
            rows: index.clone(),
            cols: index,
            data,
        }
    }

    /// Matrix over anonymous indices `row_prefix0..` and `col_prefix0..`.
    pub fn anon(row_prefix: &str, col_prefix: &str, rows: &[&[i64]], ncols: usize) -> Self {
        let data: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), ncols, "ragged matrix literal");
                r.iter().map(|&v| BigInt::from(v)).collect()
            })
            .collect();
        IntMat {
            rows: Index::range(row_prefix, rows.len()),
            cols: Index::range(col_prefix, ncols),
            data,
        }
    }

    pub fn from_rows_i64(rows: &[&[i64]]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        IntMat::anon("t", "y", rows, ncols)
    }

    pub fn row_index(&self) -> &Index {
        &self.rows
    }

    pub fn col_index(&self) -> &Index {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.data.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.data
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.data[row][col]
    }

    pub fn column(&self, col: usize) -> Vec<BigInt> {
        self.data.iter().map(|r| r[col].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.ncols()).map(|j| self.column(j)).collect()
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: Index, cols: Index, columns: &[Vec<BigInt>]) -> Result<Self> {
        if columns.len() != cols.len() {
            return Err(Error::Dimension("column count mismatch".into()));
        }
        let mut data = vec![Vec::with_capacity(columns.len()); rows.len()];
        for c in columns {
            if c.len() != rows.len() {
                return Err(Error::Dimension("column length mismatch".into()));
            }
            for (i, e) in c.iter().enumerate() {
                data[i].push(e.clone());
            }
        }
        Ok(IntMat { rows, cols, data })
    }

    /// Maximum absolute entry, zero for an empty matrix.
    pub fn max_abs(&self) -> BigInt {
        self.data
            .iter()
            .flat_map(|r| r.iter())
            .map(|e| e.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn apply(&self, u: &IntVec) -> Result<IntVec> {
        mat_apply(self, u)
    }

    pub fn with_indices(&self, rows: Index, cols: Index) -> Result<IntMat> {
        IntMat::new(rows, cols, self.data.clone())
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", fmt_row(r))?;
        }
        write!(f, "]")
    }
}

/// An exact rational vector; entries are kept in lowest terms by `BigRational`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatVec {
    index: Index,
    entries: Vec<BigRational>,
}

impl RatVec {
    pub fn new(index: Index, entries: Vec<BigRational>) -> Result<Self> {
        if index.len() != entries.len() {
            return Err(Error::Dimension("rational vector length does not match its index".into()));
        }
        Ok(RatVec { index, entries })
    }

    pub fn from_int(v: &IntVec) -> Self {
        RatVec {
            index: v.index.clone(),
            entries: v.entries.iter().map(|e| BigRational::from_integer(e.clone())).collect(),
        }
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    /// The integer vector with the same entries, if all entries are integral.
    pub fn to_int(&self) -> Option<IntVec> {
        let entries: Option<Vec<BigInt>> = self
            .entries
            .iter()
            .map(|e| e.is_integer().then(|| e.to_integer()))
            .collect();
        entries.map(|entries| IntVec {
            index: self.index.clone(),
            entries,
        })
    }
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A finite set of vectors over a common index, e.g. the generators of a cone.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VectorSet {
    index: Index,
    vectors: Vec<Vec<BigInt>>,
}

impl VectorSet {
    pub fn new(index: Index, vectors: Vec<Vec<BigInt>>) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != index.len()) {
            return Err(Error::Dimension("generator length does not match the index".into()));
        }
        Ok(VectorSet { index, vectors })
    }

    pub fn from_intvecs(index: Index, vectors: &[IntVec]) -> Result<Self> {
        for v in vectors {
            index.check(&v.index)?;
        }
        Ok(VectorSet {
            index,
            vectors: vectors.iter().map(|v| v.entries.clone()).collect(),
        })
    }

    /// Generators over the anonymous index `t0..t{dim-1}`.
    pub fn from_i64(dim: usize, vectors: &[&[i64]]) -> Self {
        let vectors = vectors
            .iter()
            .map(|v| {
                assert_eq!(v.len(), dim, "generator of wrong dimension");
                v.iter().map(|&x| BigInt::from(x)).collect()
            })
            .collect();
        VectorSet {
            index: Index::range("t", dim),
            vectors,
        }
    }

    /// The columns of a matrix, over its row index.
    pub fn from_columns(m: &IntMat) -> Self {
        VectorSet {
            index: m.row_index().clone(),
            vectors: m.columns(),
        }
    }

    pub fn empty(index: Index) -> Self {
        VectorSet {
            index,
            vectors: Vec::new(),
        }
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }

    pub fn get(&self, i: usize) -> IntVec {
        IntVec::from_parts(self.index.clone(), self.vectors[i].clone())
    }

    /// Maximum ℓ∞ norm over the generators, zero for the empty set.
    pub fn max_inf_norm(&self) -> BigInt {
        self.vectors.iter().map(|v| inf_norm(v)).max().unwrap_or_else(BigInt::zero)
    }

    /// Sorted, duplicate-free copy of the vectors; used as a cache key.
    pub fn canonical(&self) -> Vec<Vec<BigInt>> {
        let mut v = self.vectors.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn check_vector(&self, v: &IntVec) -> Result<()> {
        self.index.check(&v.index)
    }
}

/// The conformal order: same signs coordinatewise and `|u[x]| ≤ |v[x]|`.
pub fn conformal_leq(u: &IntVec, v: &IntVec) -> Result<bool> {
    u.index.check(&v.index)?;
    Ok(conformal_leq_raw(&u.entries, &v.entries))
}

pub(crate) fn conformal_leq_raw(u: &[BigInt], v: &[BigInt]) -> bool {
    u.iter().zip(v).all(|(a, b)| {
        if a.is_zero() {
            true
        } else if a.is_positive() {
            b >= a
        } else {
            b <= a
        }
    })
}

/// Exact matrix-vector product over the row index of `m`.
pub fn mat_apply(m: &IntMat, u: &IntVec) -> Result<IntVec> {
    m.cols.check(&u.index)?;
    Ok(IntVec {
        index: m.rows.clone(),
        entries: mat_vec(&m.data, &u.entries),
    })
}

/// Returns `(‖u‖∞, ‖u‖₁)`.
pub fn norms(u: &IntVec) -> (BigInt, BigInt) {
    (inf_norm(&u.entries), l1_norm(&u.entries))
}

pub(crate) fn inf_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(|e| e.abs()).max().unwrap_or_else(BigInt::zero)
}

pub(crate) fn l1_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(|e| e.abs()).sum()
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn add_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn scale_vec(a: &[BigInt], k: &BigInt) -> Vec<BigInt> {
    a.iter().map(|x| x * k).collect()
}

pub(crate) fn mat_vec(rows: &[Vec<BigInt>], u: &[BigInt]) -> Vec<BigInt> {
    rows.iter().map(|r| dot(r, u)).collect()
}

/// Gcd of all entries (zero for the zero vector).
pub(crate) fn gcd_all(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, e| g.gcd(e))
}

/// Divides by the gcd of the entries; the zero vector is returned unchanged.
pub(crate) fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = gcd_all(v);
    if g.is_zero() || g.is_one() {
        v.to_vec()
    } else {
        v.iter().map(|e| e / &g).collect()
    }
}

/// Residue in `0..m` for positive `m`.
pub fn mod_floor(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

pub(crate) fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

pub(crate) fn pow(base: &BigInt, exp: usize) -> BigInt {
    num_traits::pow(base.clone(), exp)
}

pub(crate) fn rat(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

pub(crate) fn floor_rat(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

pub(crate) fn ceil_rat(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

pub(crate) fn fmt_row(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_examples() {
        let u = IntVec::anon("x", &[1, -2]);
        assert!(conformal_leq(&u, &IntVec::anon("x", &[3, -2])).unwrap());
        assert!(!conformal_leq(&u, &IntVec::anon("x", &[3, 2])).unwrap());
        let z = IntVec::anon("x", &[0, 0]);
        assert!(conformal_leq(&z, &IntVec::anon("x", &[-7, 4])).unwrap());
    }

    #[test]
    fn conformal_rejects_mismatched_index() {
        let u = IntVec::anon("x", &[1]);
        let v = IntVec::anon("y", &[1]);
        assert!(matches!(conformal_leq(&u, &v), Err(Error::IndexMismatch { .. })));
    }

    #[test]
    fn apply_examples() {
        let id = IntMat::identity(Index::range("x", 2));
        let u = IntVec::anon("x", &[4, -9]);
        assert_eq!(mat_apply(&id, &u).unwrap().entries(), u.entries());
        let m = IntMat::anon("t", "x", &[&[2, 0], &[0, 3]], 2);
        assert_eq!(mat_apply(&m, &IntVec::anon("x", &[1, 1])).unwrap(), IntVec::anon("t", &[2, 3]));
        let m = IntMat::anon("t", "x", &[&[3, 5]], 2);
        assert_eq!(mat_apply(&m, &IntVec::anon("x", &[1, 1])).unwrap(), IntVec::anon("t", &[8]));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norms(&IntVec::anon("x", &[0, 0])), (big(0), big(0)));
        assert_eq!(norms(&IntVec::anon("x", &[-3, 2])), (big(3), big(5)));
        let e = big(1_000_000_000);
        assert_eq!(
            norms(&IntVec::anon("x", &[1_000_000_000, -1_000_000_000])),
            (e.clone(), e * 2)
        );
    }

    #[test]
    fn residues_are_normalized() {
        assert_eq!(mod_floor(&big(-3), &big(4)), big(1));
        assert_eq!(primitive(&[big(4), big(-6)]), vec![big(2), big(-3)]);
    }
}
