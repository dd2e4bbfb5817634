//! Dense and incremental linear algebra over `K`.

use std::collections::BTreeMap;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::FieldElement;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Index<(usize, usize)> for KMatrix {
    type Output = FieldElement;
    fn index(&self, (r, c): (usize, usize)) -> &FieldElement {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for KMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElement {
        &mut self.data[r * self.cols + c]
    }
}

impl KMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![FieldElement::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = FieldElement::one();
        }
        m
    }

    /// Builds from row vectors. An empty list yields a `0 × 0` matrix.
    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_rows_with_width(rows: Vec<Vec<FieldElement>>, cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<FieldElement>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> KMatrix {
        let mut t = KMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &KMatrix) -> KMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = KMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let t = a * b;
                        out[(i, j)] += &t;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn map(&self, f: impl Fn(&FieldElement) -> FieldElement) -> KMatrix {
        KMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElement::is_zero)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (KMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].inverse().expect("nonzero pivot");
            for j in c..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    if m[(r, j)].is_zero() {
                        continue;
                    }
                    let t = &f * &m[(r, j)];
                    m[(i, j)] -= &t;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : A x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<FieldElement>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![FieldElement::zero(); self.cols];
                v[f] = FieldElement::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -&r[(i, f)];
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> Result<FieldElement> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let mut m = self.clone();
        let mut det = FieldElement::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                return Ok(FieldElement::zero());
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            det = &det * &m[(c, c)];
            let inv = m[(c, c)].inverse()?;
            for i in c + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] * &inv;
                for j in c..m.cols {
                    let t = &f * &m[(c, j)];
                    m[(i, j)] -= &t;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<KMatrix> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.cols,
            });
        }
        let mut aug = KMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = FieldElement::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::DivisionByZero);
        }
        let mut inv = KMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

pub fn dot(a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    let mut acc = FieldElement::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += &(x * y);
        }
    }
    acc
}

/// Outcome of solving `A x = b` for several right-hand sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub rank: usize,
    /// One entry per right-hand side; `None` when that system is inconsistent.
    pub particular: Vec<Option<Vec<FieldElement>>>,
    pub kernel: Vec<Vec<FieldElement>>,
}

pub fn linear_solve_over_k(a: &KMatrix, rhs: &[Vec<FieldElement>]) -> Result<LinearSolution> {
    let n = a.cols();
    for b in rhs {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: b.len(),
            });
        }
    }
    let mut aug = KMatrix::zeros(a.rows(), n + rhs.len());
    for i in 0..a.rows() {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        for (k, b) in rhs.iter().enumerate() {
            aug[(i, n + k)] = b[i].clone();
        }
    }
    let (r, pivots) = aug.rref();
    let rank = pivots.iter().filter(|&&p| p < n).count();
    let particular = (0..rhs.len())
        .map(|k| {
            // inconsistent iff some row has zero coefficients but nonzero rhs
            let bad = (rank..a.rows()).any(|i| !r[(i, n + k)].is_zero());
            (!bad).then(|| {
                let mut x = vec![FieldElement::zero(); n];
                for (i, &p) in pivots.iter().take(rank).enumerate() {
                    x[p] = r[(i, n + k)].clone();
                }
                x
            })
        })
        .collect();
    Ok(LinearSolution {
        rank,
        particular,
        kernel: a.kernel(),
    })
}

/// Row-echelon basis built one sparse row at a time.
///
/// Each stored row has leading entry 1 in its pivot column and nothing to
/// the left of it, so a new row is reduced in one left-to-right sweep.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: BTreeMap<usize, BTreeMap<usize, FieldElement>>,
}

pub type SparseRow = BTreeMap<usize, FieldElement>;

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Reduces a row against the basis, returning the remainder.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        row.retain(|_, v| !v.is_zero());
        let mut cursor = 0usize;
        loop {
            let next = row
                .range(cursor..)
                .map(|(k, _)| *k)
                .find(|k| self.rows.contains_key(k));
            let Some(col) = next else { break };
            let f = row.remove(&col).expect("present");
            for (c, v) in &self.rows[&col] {
                if *c == col {
                    continue;
                }
                let t = &f * v;
                let e = row.entry(*c).or_insert_with(FieldElement::zero);
                *e -= &t;
                if e.is_zero() {
                    row.remove(c);
                }
            }
            cursor = col + 1;
        }
        row
    }

    /// Inserts a row; returns whether the rank grew.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let row = self.reduce(row);
        let Some((&pivot, lead)) = row.iter().next() else {
            return false;
        };
        let inv = lead.inverse().expect("nonzero lead");
        let row: SparseRow = row.iter().map(|(c, v)| (*c, v * &inv)).collect();
        self.rows.insert(pivot, row);
        true
    }

    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }
}

pub fn dense_to_sparse(v: &[FieldElement]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

/// Rank of a list of vectors (rows).
pub fn rank_of_rows(rows: &[Vec<FieldElement>]) -> usize {
    let mut basis = EchelonBasis::new();
    for r in rows {
        basis.insert(dense_to_sparse(r));
    }
    basis.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElement as F;

    #[test]
    fn identity_system() {
        let e1 = vec![F::one(), F::zero(), F::zero()];
        let s = linear_solve_over_k(&KMatrix::identity(3), std::slice::from_ref(&e1)).unwrap();
        assert_eq!(s.rank, 3);
        assert_eq!(s.particular[0].as_ref(), Some(&e1));
        assert!(s.kernel.is_empty());
    }

    #[test]
    fn zero_system() {
        let s = linear_solve_over_k(&KMatrix::zeros(2, 2), &[vec![F::zero(), F::zero()]]).unwrap();
        assert_eq!(s.rank, 0);
        assert_eq!(s.kernel.len(), 2);
    }

    #[test]
    fn kernel_of_one_i() {
        let a = KMatrix::from_rows(vec![vec![F::one(), F::i()]]);
        let s = linear_solve_over_k(&a, &[vec![F::zero()]]).unwrap();
        assert_eq!(s.kernel, vec![vec![-F::i(), F::one()]]);
    }

    #[test]
    fn inconsistent_reported_not_failed() {
        let a = KMatrix::from_rows(vec![vec![F::one()], vec![F::one()]]);
        let s = linear_solve_over_k(&a, &[vec![F::one(), F::from_int(2)]]).unwrap();
        assert_eq!(s.particular[0], None);
    }

    #[test]
    fn inverse_and_determinant() {
        let a = KMatrix::from_rows(vec![
            vec![F::one(), F::sqrt2()],
            vec![F::i(), F::from_int(3)],
        ]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), KMatrix::identity(2));
        assert_eq!(a.determinant().unwrap(), F::from_int(3) - F::i_sqrt2());
    }

    #[test]
    fn echelon_basis_matches_dense_rank() {
        let rows = vec![
            vec![F::one(), F::i(), F::zero()],
            vec![F::i(), -F::one(), F::zero()],
            vec![F::zero(), F::sqrt2(), F::one()],
        ];
        assert_eq!(rank_of_rows(&rows), 2);
        assert_eq!(KMatrix::from_rows(rows).rank(), 2);
    }
}
