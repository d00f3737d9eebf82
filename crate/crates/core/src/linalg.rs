//! Exact linear algebra: a sparse rational solver and small polynomial matrices.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::{Poly, Q};

pub type SparseRow = BTreeMap<usize, Q>;

/// Sparse system `A x = b` over the rationals, solved by exact elimination.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    ncols: usize,
    rows: Vec<(SparseRow, Q)>,
}

/// Result of [`LinearSystem::solve`].
#[derive(Debug, Clone)]
pub struct Solution {
    /// Particular solution with every free variable set to zero.
    pub particular: Option<Vec<Q>>,
    /// Nullspace basis, one vector per free column, in reduced echelon form.
    pub nullspace: Vec<Vec<Q>>,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Solution {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }
}

fn reduce_by(row: &mut SparseRow, rhs: &mut Q, piv: &(SparseRow, Q), col: usize) {
    let f = match row.get(&col) {
        Some(v) => v.clone(),
        None => return,
    };
    for (c, v) in &piv.0 {
        let entry = row.entry(*c).or_insert_with(Q::zero);
        *entry -= &f * v;
        if entry.is_zero() {
            row.remove(c);
        }
    }
    *rhs -= &f * &piv.1;
}

impl LinearSystem {
    pub fn new(ncols: usize) -> Self {
        LinearSystem {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, row: SparseRow, rhs: Q) {
        debug_assert!(row.keys().all(|&c| c < self.ncols));
        let row: SparseRow = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        if row.is_empty() && rhs.is_zero() {
            return;
        }
        self.rows.push((row, rhs));
    }

    pub fn solve(&self) -> Solution {
        // forward elimination into an echelon set keyed by leading column
        let mut pivots: BTreeMap<usize, (SparseRow, Q)> = BTreeMap::new();
        let mut consistent = true;
        for (row0, rhs0) in &self.rows {
            let mut row = row0.clone();
            let mut rhs = rhs0.clone();
            let mut cursor = 0usize;
            loop {
                let next = row.range(cursor..).next().map(|(c, _)| *c);
                let c = match next {
                    Some(c) => c,
                    None => break,
                };
                if let Some(p) = pivots.get(&c) {
                    reduce_by(&mut row, &mut rhs, p, c);
                    cursor = c + 1;
                } else {
                    break;
                }
            }
            match row.iter().next().map(|(c, v)| (*c, v.clone())) {
                None => {
                    if !rhs.is_zero() {
                        consistent = false;
                    }
                }
                Some((c, lead)) => {
                    let inv = lead.recip();
                    for v in row.values_mut() {
                        *v *= &inv;
                    }
                    rhs *= &inv;
                    pivots.insert(c, (row, rhs));
                }
            }
        }
        // back substitution to reduced echelon form
        let cols: Vec<usize> = pivots.keys().rev().copied().collect();
        for &c in &cols {
            let (mut row, mut rhs) = pivots.remove(&c).expect("pivot present");
            let later: Vec<usize> = row.range(c + 1..).map(|(k, _)| *k).collect();
            for k in later {
                if let Some(p) = pivots.get(&k) {
                    reduce_by(&mut row, &mut rhs, p, k);
                }
            }
            pivots.insert(c, (row, rhs));
        }
        let pivot_cols: Vec<usize> = pivots.keys().copied().collect();
        let particular = consistent.then(|| {
            let mut x = vec![Q::zero(); self.ncols];
            for (c, (_, rhs)) in &pivots {
                x[*c] = rhs.clone();
            }
            x
        });
        let mut is_pivot = vec![false; self.ncols];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        // column -> pivot rows that mention it
        let mut mentions: BTreeMap<usize, Vec<(usize, Q)>> = BTreeMap::new();
        for (p, (row, _)) in &pivots {
            for (c, v) in row.range(p + 1..) {
                mentions.entry(*c).or_default().push((*p, v.clone()));
            }
        }
        let mut nullspace = Vec::new();
        for f in 0..self.ncols {
            if is_pivot[f] {
                continue;
            }
            let mut v = vec![Q::zero(); self.ncols];
            v[f] = Q::one();
            if let Some(list) = mentions.get(&f) {
                for (p, coef) in list {
                    v[*p] = -coef.clone();
                }
            }
            nullspace.push(v);
        }
        Solution {
            particular,
            nullspace,
            rank: pivot_cols.len(),
            pivots: pivot_cols,
        }
    }
}

/// Rank of a dense rational matrix.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut sys = LinearSystem::new(ncols);
    for r in rows {
        let sparse: SparseRow = r
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (c, v.clone()))
            .collect();
        sys.push(sparse, Q::zero());
    }
    sys.solve().rank
}

/// Solves the dense square system `m x = b`; `None` when singular.
pub fn solve_dense(m: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in col..=n {
                    let t = &f * &a[col][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

/// Inverse of a dense square rational matrix; `None` when singular.
pub fn invert_dense(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Q> = (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
        cols.push(solve_dense(m, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

pub fn mat_mul_q(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

/// Square matrix with polynomial entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    nvars: usize,
    rows: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    pub fn zero(nvars: usize, n: usize) -> Self {
        PolyMatrix {
            nvars,
            rows: vec![vec![Poly::zero(nvars); n]; n],
        }
    }

    pub fn identity(nvars: usize, n: usize) -> Self {
        let mut m = Self::zero(nvars, n);
        for i in 0..n {
            m.rows[i][i] = Poly::one(nvars);
        }
        m
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<Poly>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        PolyMatrix { nvars, rows }
    }

    pub fn from_q(nvars: usize, rows: &[Vec<Q>]) -> Self {
        Self::from_rows(
            nvars,
            rows.iter()
                .map(|r| r.iter().map(|v| Poly::constant(nvars, v.clone())).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.rows[i][j] = p;
    }

    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let n = self.n();
        let mut t = Self::zero(self.nvars, n);
        for i in 0..n {
            for j in 0..n {
                t.rows[j][i] = self.rows[i][j].clone();
            }
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (r, orow) in out.rows.iter_mut().zip(&o.rows) {
            for (a, b) in r.iter_mut().zip(orow) {
                a.add_assign_ref(b);
            }
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        PolyMatrix {
            nvars: self.nvars,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|p| p.scale(c)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n();
        let mut out = Self::zero(self.nvars, n);
        for i in 0..n {
            for k in 0..n {
                if self.rows[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if o.rows[k][j].is_zero() {
                        continue;
                    }
                    let t = &self.rows[i][k] * &o.rows[k][j];
                    out.rows[i][j].add_assign_ref(&t);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Poly]) -> Vec<Poly> {
        self.rows
            .iter()
            .map(|r| {
                let mut acc = Poly::zero(self.nvars);
                for (a, b) in r.iter().zip(v) {
                    acc.add_assign_ref(&(a * b));
                }
                acc
            })
            .collect()
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> Self {
        PolyMatrix {
            nvars: self.nvars,
            rows: self
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip_r)
                .map(|(_, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != skip_c)
                        .map(|(_, p)| p.clone())
                        .collect()
                })
                .collect(),
        }
    }

    /// Determinant by cofactor expansion (intended for small sizes).
    pub fn det(&self) -> Poly {
        let n = self.n();
        match n {
            0 => Poly::one(self.nvars),
            1 => self.rows[0][0].clone(),
            2 => &(&self.rows[0][0] * &self.rows[1][1]) - &(&self.rows[0][1] * &self.rows[1][0]),
            _ => {
                let mut acc = Poly::zero(self.nvars);
                for j in 0..n {
                    if self.rows[0][j].is_zero() {
                        continue;
                    }
                    let t = &self.rows[0][j] * &self.minor(0, j).det();
                    if j % 2 == 0 {
                        acc.add_assign_ref(&t);
                    } else {
                        acc.add_assign_ref(&-t);
                    }
                }
                acc
            }
        }
    }

    /// Classical adjugate: `m * adj(m) = det(m) * 1`.
    pub fn adjugate(&self) -> Self {
        let n = self.n();
        let mut out = Self::zero(self.nvars, n);
        if n == 1 {
            out.rows[0][0] = Poly::one(self.nvars);
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(i, j).det();
                out.rows[j][i] = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        out
    }

    /// Inverse when the determinant is a nonzero constant.
    pub fn inverse_polynomial(&self) -> Option<Self> {
        let d = self.det();
        if !d.is_constant() || d.is_zero() {
            return None;
        }
        Some(self.adjugate().scale(&d.constant_term().recip()))
    }

    pub fn eval(&self, point: &[Q]) -> Vec<Vec<Q>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|p| p.eval(point)).collect())
            .collect()
    }

    pub fn derivative(&self, var: usize) -> Self {
        PolyMatrix {
            nvars: self.nvars,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|p| p.derivative(var)).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|p| p.is_zero())
    }
}
