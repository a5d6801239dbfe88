//! Integer solutions of linear equation systems.
//!
//! `E x = e` is brought to column echelon form by unimodular column operations
//! (extended Euclid on each row), the echelon system is solved by forward
//! substitution, and the transformation matrix yields a particular solution
//! together with a basis of the integer kernel. The kernel basis and the
//! particular solution are then size-reduced by pairwise rounding so that
//! downstream searches start from short vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::numerics::dot;

/// All integer solutions of `E x = e`, written as `particular + kernel · z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSolutionSet {
    pub particular: Vec<BigInt>,
    /// Basis of `{x ∈ Zⁿ : E x = 0}`, one vector per entry.
    pub kernel: Vec<Vec<BigInt>>,
}

/// Solves `E x = e` over the integers; `None` if there is no integer solution.
pub fn solve_integer_system(rows: &[Vec<BigInt>], rhs: &[BigInt], ncols: usize) -> Option<IntegerSolutionSet> {
    let mut set = solve_integer_system_unreduced(rows, rhs, ncols)?;
    size_reduce_basis(&mut set.kernel);
    reduce_against(&mut set.particular, &set.kernel);
    Some(set)
}

/// As [`solve_integer_system`] but without size reduction of the result.
pub(crate) fn solve_integer_system_unreduced(
    rows: &[Vec<BigInt>],
    rhs: &[BigInt],
    ncols: usize,
) -> Option<IntegerSolutionSet> {
    let m = rows.len();
    // cols[j] holds column j of E stacked on column j of U.
    let mut e_cols: Vec<Vec<BigInt>> = (0..ncols).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    let mut u_cols: Vec<Vec<BigInt>> = (0..ncols)
        .map(|j| (0..ncols).map(|i| BigInt::from((i == j) as i64)).collect())
        .collect();
    let mut pivot_row_of_col: Vec<usize> = Vec::new();
    let mut k = 0usize;
    for i in 0..m {
        if k >= ncols {
            break;
        }
        loop {
            // pick the column in k.. with the smallest nonzero |entry| in row i
            let mut best: Option<usize> = None;
            let mut nonzero = 0;
            for j in k..ncols {
                let v = &e_cols[j][i];
                if !v.is_zero() {
                    nonzero += 1;
                    if best.is_none_or(|b| v.abs() < e_cols[b][i].abs()) {
                        best = Some(j);
                    }
                }
            }
            let Some(p) = best else { break };
            if nonzero == 1 {
                e_cols.swap(k, p);
                u_cols.swap(k, p);
                if e_cols[k][i].is_negative() {
                    negate(&mut e_cols[k]);
                    negate(&mut u_cols[k]);
                }
                pivot_row_of_col.push(i);
                k += 1;
                break;
            }
            let pv = e_cols[p][i].clone();
            for j in k..ncols {
                if j == p || e_cols[j][i].is_zero() {
                    continue;
                }
                let q = e_cols[j][i].div_floor(&pv);
                if q.is_zero() {
                    continue;
                }
                let (src_e, src_u) = (e_cols[p].clone(), u_cols[p].clone());
                axpy(&mut e_cols[j], &q, &src_e);
                axpy(&mut u_cols[j], &q, &src_u);
            }
        }
    }
    let rank = k;
    // forward substitution on the echelon form
    let mut y: Vec<BigInt> = vec![BigInt::zero(); rank];
    let mut next = 0usize;
    for i in 0..m {
        let mut acc = rhs[i].clone();
        for (j, yj) in y.iter().enumerate().take(next) {
            acc -= &e_cols[j][i] * yj;
        }
        if next < rank && pivot_row_of_col[next] == i {
            let (q, r) = acc.div_rem(&e_cols[next][i]);
            if !r.is_zero() {
                return None;
            }
            y[next] = q;
            next += 1;
        } else if !acc.is_zero() {
            return None;
        }
    }
    let mut particular = vec![BigInt::zero(); ncols];
    for (j, yj) in y.iter().enumerate() {
        if !yj.is_zero() {
            axpy(&mut particular, &-yj, &u_cols[j]);
        }
    }
    let kernel: Vec<Vec<BigInt>> = u_cols.drain(rank..).collect();
    Some(IntegerSolutionSet { particular, kernel })
}

fn negate(v: &mut [BigInt]) {
    for e in v.iter_mut() {
        *e = -std::mem::take(e);
    }
}

/// `target -= q · src`.
fn axpy(target: &mut [BigInt], q: &BigInt, src: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    // nearest integer to num/den for den > 0
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * &two))
}

fn sq_norm(v: &[BigInt]) -> BigInt {
    dot(v, v)
}

/// Pairwise size reduction: repeatedly subtract rounded multiples while norms shrink.
pub(crate) fn size_reduce_basis(basis: &mut [Vec<BigInt>]) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds < 200 {
        changed = false;
        rounds += 1;
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let nb = sq_norm(&basis[b]);
                if nb.is_zero() {
                    continue;
                }
                let q = round_div(&dot(&basis[a], &basis[b]), &nb);
                if q.is_zero() {
                    continue;
                }
                let mut cand = basis[a].clone();
                axpy(&mut cand, &q, &basis[b]);
                if sq_norm(&cand) < sq_norm(&basis[a]) {
                    basis[a] = cand;
                    changed = true;
                }
            }
        }
    }
}

/// Shortens `v` by rounded multiples of the basis vectors.
pub(crate) fn reduce_against(v: &mut Vec<BigInt>, basis: &[Vec<BigInt>]) {
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds < 200 {
        changed = false;
        rounds += 1;
        for b in basis {
            let nb = sq_norm(b);
            if nb.is_zero() {
                continue;
            }
            let q = round_div(&dot(v, b), &nb);
            if q.is_zero() {
                continue;
            }
            let mut cand = v.clone();
            axpy(&mut cand, &q, b);
            if sq_norm(&cand) < sq_norm(v) {
                *v = cand;
                changed = true;
            }
        }
    }
}

/// LLL reduction (`δ = 3/4`) of linearly independent integer vectors, in place,
/// in exact integer arithmetic on the scaled Gram–Schmidt data.
pub fn lll_reduce(basis: &mut [Vec<BigInt>]) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    // d[i] = Gram determinant of the first i vectors; lam[k][j] the scaled coefficients
    let mut d: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut lam: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::one();
    d[1] = sq_norm(&basis[0]);
    let mut k = 1usize;
    let mut kmax = 0usize;
    let three = BigInt::from(3);
    let four = BigInt::from(4);
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&basis[k], &basis[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k + 1] = u;
                }
            }
        }
        loop {
            size_reduce_step(basis, &mut lam, &d, k, k - 1);
            let lhs = &four * &d[k + 1] * &d[k - 1];
            let rhs = &three * &d[k] * &d[k] - &four * &lam[k][k - 1] * &lam[k][k - 1];
            if lhs >= rhs {
                break;
            }
            // swap b_k and b_{k-1}
            basis.swap(k, k - 1);
            for j in 0..k - 1 {
                let t = std::mem::take(&mut lam[k][j]);
                lam[k][j] = std::mem::replace(&mut lam[k - 1][j], t);
            }
            let l = lam[k][k - 1].clone();
            let b = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
                lam[i][k - 1] = (&b * &t + &l * &lam[i][k]) / &d[k + 1];
            }
            d[k] = b;
            if k > 1 {
                k -= 1;
            }
        }
        for l in (0..k.saturating_sub(1)).rev() {
            size_reduce_step(basis, &mut lam, &d, k, l);
        }
        k += 1;
    }
}

fn size_reduce_step(basis: &mut [Vec<BigInt>], lam: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
    let two = BigInt::from(2);
    if (&lam[k][l] * &two).abs() <= d[l + 1] {
        return;
    }
    let q = round_div(&lam[k][l], &d[l + 1]);
    let src = basis[l].clone();
    axpy(&mut basis[k], &q, &src);
    lam[k][l] -= &q * &d[l + 1];
    for i in 0..l {
        let t = &q * &lam[l][i];
        lam[k][i] -= t;
    }
}

/// Rank of an integer matrix given by rows (fraction-free elimination).
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    independent_rows(rows).len()
}

/// Indices of the first maximal linearly independent set of rows, in order.
pub fn independent_rows(rows: &[Vec<BigInt>]) -> Vec<usize> {
    row_echelon_pivots(rows).0
}

/// The first maximal independent row set together with one distinct pivot
/// column per chosen row; the chosen rows restricted to the pivot columns form
/// a nonsingular square matrix.
pub(crate) fn row_echelon_pivots(rows: &[Vec<BigInt>]) -> (Vec<usize>, Vec<usize>) {
    let mut basis: Vec<(usize, Vec<BigInt>)> = Vec::new(); // (pivot column, reduced row)
    let mut chosen = Vec::new();
    for (idx, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for (pc, b) in &basis {
            if !v[*pc].is_zero() {
                let f = v[*pc].clone();
                let g = b[*pc].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x = &*x * &g - &f * y;
                }
                let d = crate::numerics::gcd_all(&v);
                if !d.is_zero() && !d.is_one() {
                    for x in v.iter_mut() {
                        *x = &*x / &d;
                    }
                }
            }
        }
        if let Some(pc) = v.iter().position(|x| !x.is_zero()) {
            basis.push((pc, v));
            chosen.push(idx);
        }
    }
    let pivots = basis.into_iter().map(|(pc, _)| pc).collect();
    (chosen, pivots)
}

/// Exact determinant of a square integer matrix (Bareiss elimination).
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
