//! Exact two-phase primal simplex.
//!
//! Variables are shifted and split into standard form (`x ≥ 0`, equality rows),
//! slack columns are added for inequalities, and artificial columns for rows
//! without a usable slack. Each tableau row is stored as an integer vector with
//! its own positive denominator, so rows whose entry in the pivot column is zero
//! are left untouched by a pivot. Dantzig pricing is used until a run of
//! degenerate pivots is observed, after which Bland's rule takes over for good.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{LinearConstraint, Sense};

pub(crate) enum LpResult {
    Optimal { x: Vec<BigRational>, value: BigRational },
    Infeasible,
    Unbounded,
    IterationLimit,
}

const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 200_000;

struct ColumnMap {
    offset: BigInt,
    cols: Vec<(usize, bool)>, // (standard column, negated)
}

struct Tableau {
    rows: Vec<Vec<BigInt>>,
    dens: Vec<BigInt>,
    obj: Vec<BigInt>,
    obj_den: BigInt,
    basis: Vec<usize>,
    width: usize, // number of columns excluding the right-hand side
}

enum Pricing {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width
    }

    fn normalize(row: &mut [BigInt], den: &mut BigInt) {
        let mut g = den.clone();
        for e in row.iter() {
            if g.is_one() {
                return;
            }
            if !e.is_zero() {
                g = g.gcd(e);
            }
        }
        if !g.is_one() && !g.is_zero() {
            for e in row.iter_mut() {
                if !e.is_zero() {
                    *e = &*e / &g;
                }
            }
            *den = &*den / &g;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let mut p = self.rows[r][c].clone();
        if p.is_negative() {
            for e in self.rows[r].iter_mut() {
                *e = -std::mem::take(e);
            }
            p = -p;
        }
        self.dens[r] = p;
        {
            let (row, den) = (&mut self.rows[r], &mut self.dens[r]);
            Tableau::normalize(row, den);
        }
        let pivot_row = self.rows[r].clone();
        let pivot_den = self.dens[r].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let update = |row: &mut Vec<BigInt>, den: &mut BigInt| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            if !pivot_den.is_one() {
                for e in row.iter_mut() {
                    if !e.is_zero() {
                        *e *= &pivot_den;
                    }
                }
            }
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
            *den *= &pivot_den;
            Tableau::normalize(row, den);
        };
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let mut row = std::mem::take(&mut self.rows[i]);
            let mut den = std::mem::take(&mut self.dens[i]);
            update(&mut row, &mut den);
            self.rows[i] = row;
            self.dens[i] = den;
        }
        let mut obj = std::mem::take(&mut self.obj);
        let mut od = std::mem::take(&mut self.obj_den);
        update(&mut obj, &mut od);
        self.obj = obj;
        self.obj_den = od;
        self.basis[r] = c;
    }

    /// Runs primal simplex iterations on the current objective row.
    fn optimize(&mut self, allowed: &[bool]) -> Pricing {
        let rhs = self.rhs();
        let mut bland = false;
        let mut streak = 0usize;
        for _ in 0..MAX_PIVOTS {
            let entering = if bland {
                (0..self.width).find(|&j| allowed[j] && self.obj[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..self.width {
                    if allowed[j] && self.obj[j].is_negative() && best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Pricing::Optimal;
            };
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let lhs = &self.rows[i][rhs] * &self.rows[l][c];
                        let rhs_v = &self.rows[l][rhs] * a;
                        if lhs < rhs_v || (lhs == rhs_v && self.basis[i] < self.basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
            let Some(r) = leave else {
                return Pricing::Unbounded;
            };
            if self.rows[r][rhs].is_zero() {
                streak += 1;
                if streak > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
        Pricing::Limit
    }
}

/// Solves `min c·x` subject to the rows and variable bounds, exactly.
pub(crate) fn solve_lp(
    lower: &[Option<BigInt>],
    upper: &[Option<BigInt>],
    rows: &[LinearConstraint],
    objective: &[BigInt],
) -> LpResult {
    let n = lower.len();
    for j in 0..n {
        if let (Some(l), Some(u)) = (&lower[j], &upper[j]) {
            if l > u {
                return LpResult::Infeasible;
            }
        }
    }
    // column maps
    let mut maps: Vec<ColumnMap> = Vec::with_capacity(n);
    let mut nstd = 0usize;
    let mut bound_rows: Vec<(usize, BigInt)> = Vec::new(); // x'_col ≤ value
    for j in 0..n {
        match (&lower[j], &upper[j]) {
            (Some(l), Some(u)) if l == u => maps.push(ColumnMap { offset: l.clone(), cols: vec![] }),
            (Some(l), Some(u)) => {
                bound_rows.push((nstd, u - l));
                maps.push(ColumnMap { offset: l.clone(), cols: vec![(nstd, false)] });
                nstd += 1;
            }
            (Some(l), None) => {
                maps.push(ColumnMap { offset: l.clone(), cols: vec![(nstd, false)] });
                nstd += 1;
            }
            (None, Some(u)) => {
                maps.push(ColumnMap { offset: u.clone(), cols: vec![(nstd, true)] });
                nstd += 1;
            }
            (None, None) => {
                maps.push(ColumnMap { offset: BigInt::zero(), cols: vec![(nstd, false), (nstd + 1, true)] });
                nstd += 2;
            }
        }
    }
    // rows in standard columns: (coefficients, sense, rhs)
    let mut std_rows: Vec<(Vec<(usize, BigInt)>, Sense, BigInt)> = Vec::new();
    for con in rows {
        let mut coeffs: Vec<(usize, BigInt)> = Vec::new();
        let mut rhs = con.rhs.clone();
        for (j, a) in &con.terms {
            if a.is_zero() {
                continue;
            }
            let m = &maps[*j];
            rhs -= a * &m.offset;
            for (c, neg) in &m.cols {
                coeffs.push((*c, if *neg { -a } else { a.clone() }));
            }
        }
        coeffs.sort_by_key(|(c, _)| *c);
        let mut merged: Vec<(usize, BigInt)> = Vec::new();
        for (c, a) in coeffs {
            match merged.last_mut() {
                Some((lc, la)) if *lc == c => *la += a,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        if merged.is_empty() {
            let ok = match con.sense {
                Sense::Eq => rhs.is_zero(),
                Sense::Le => !rhs.is_negative(),
                Sense::Ge => !rhs.is_positive(),
            };
            if !ok {
                return LpResult::Infeasible;
            }
            continue;
        }
        std_rows.push((merged, con.sense, rhs));
    }
    for (c, v) in bound_rows {
        std_rows.push((vec![(c, BigInt::one())], Sense::Le, v));
    }
    let nslack = std_rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let nreal = nstd + nslack;
    // decide basis per row: slack with +1 after sign normalization, else artificial
    let m = std_rows.len();
    let mut needs_art = vec![false; m];
    let mut slack_of_row = vec![usize::MAX; m];
    let mut sign_flip = vec![false; m];
    let mut s = nstd;
    for (i, (_, sense, rhs)) in std_rows.iter().enumerate() {
        let flip = rhs.is_negative();
        sign_flip[i] = flip;
        match sense {
            Sense::Eq => needs_art[i] = true,
            Sense::Le => {
                slack_of_row[i] = s;
                needs_art[i] = flip;
                s += 1;
            }
            Sense::Ge => {
                slack_of_row[i] = s;
                needs_art[i] = !flip;
                s += 1;
            }
        }
    }
    let nart = needs_art.iter().filter(|&&b| b).count();
    let width = nreal + nart;
    let mut trows: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut a = nreal;
    for (i, (coeffs, sense, rhs)) in std_rows.iter().enumerate() {
        let mut row = vec![BigInt::zero(); width + 1];
        for (c, v) in coeffs {
            row[*c] = v.clone();
        }
        match sense {
            Sense::Le => row[slack_of_row[i]] = BigInt::one(),
            Sense::Ge => row[slack_of_row[i]] = -BigInt::one(),
            Sense::Eq => {}
        }
        row[width] = rhs.clone();
        if sign_flip[i] {
            for e in row.iter_mut() {
                *e = -std::mem::take(e);
            }
        }
        if needs_art[i] {
            row[a] = BigInt::one();
            basis.push(a);
            a += 1;
        } else {
            basis.push(slack_of_row[i]);
        }
        trows.push(row);
    }
    let mut t = Tableau {
        dens: vec![BigInt::one(); m],
        rows: trows,
        obj: vec![BigInt::zero(); width + 1],
        obj_den: BigInt::one(),
        basis,
        width,
    };
    if nart > 0 {
        // phase 1: minimise the sum of artificials
        for j in nreal..width {
            t.obj[j] = BigInt::one();
        }
        for i in 0..m {
            if t.basis[i] >= nreal {
                for j in 0..=width {
                    if !t.rows[i][j].is_zero() {
                        let v = t.rows[i][j].clone();
                        t.obj[j] -= v;
                    }
                }
            }
        }
        let allowed = vec![true; width];
        match t.optimize(&allowed) {
            Pricing::Optimal => {}
            Pricing::Unbounded => unreachable!("phase one objective is bounded below"),
            Pricing::Limit => return LpResult::IterationLimit,
        }
        if !t.obj[width].is_zero() {
            return LpResult::Infeasible;
        }
        // drive artificials out of the basis
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= nreal {
                if let Some(j) = (0..nreal).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, j);
                    i += 1;
                } else {
                    t.rows.remove(i);
                    t.dens.remove(i);
                    t.basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
        for row in t.rows.iter_mut() {
            let rhs = row[width].clone();
            row.truncate(nreal);
            row.push(rhs);
        }
        t.width = nreal;
    }
    // phase 2 objective row
    let width = t.width;
    let mut cost = vec![BigInt::zero(); width];
    for (j, cj) in objective.iter().enumerate() {
        if cj.is_zero() {
            continue;
        }
        for (c, neg) in &maps[j].cols {
            cost[*c] += if *neg { -cj } else { cj.clone() };
        }
    }
    let mut obj: Vec<BigInt> = cost.clone();
    obj.push(BigInt::zero());
    let mut od = BigInt::one();
    for i in 0..t.rows.len() {
        let cb = &cost[t.basis[i]];
        if cb.is_zero() {
            continue;
        }
        let di = &t.dens[i];
        for j in 0..=width {
            let mut v = &obj[j] * di;
            if !t.rows[i][j].is_zero() {
                v -= cb * &od * &t.rows[i][j];
            }
            obj[j] = v;
        }
        od *= di;
        Tableau::normalize(&mut obj, &mut od);
    }
    t.obj = obj;
    t.obj_den = od;
    let allowed = vec![true; width];
    match t.optimize(&allowed) {
        Pricing::Optimal => {}
        Pricing::Unbounded => return LpResult::Unbounded,
        Pricing::Limit => return LpResult::IterationLimit,
    }
    let mut xs = vec![BigRational::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        xs[b] = BigRational::new(t.rows[i][width].clone(), t.dens[i].clone());
    }
    let x: Vec<BigRational> = maps
        .iter()
        .map(|m| {
            let mut v = BigRational::from_integer(m.offset.clone());
            for (c, neg) in &m.cols {
                if *neg {
                    v -= &xs[*c];
                } else {
                    v += &xs[*c];
                }
            }
            v
        })
        .collect();
    let value = x
        .iter()
        .zip(objective)
        .filter(|(_, c)| !c.is_zero())
        .map(|(v, c)| v * BigRational::from_integer(c.clone()))
        .fold(BigRational::zero(), |acc, v| acc + v);
    LpResult::Optimal { x, value }
}
