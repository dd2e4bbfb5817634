//! Integer matrices, normal forms and the Picard lattice.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::Rational;

/// A dense matrix over `Z`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|r| {
                self.row(r)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn with_width(rows: &[Vec<BigInt>], cols: usize) -> Self {
        if rows.is_empty() {
            return Self::zeros(0, cols);
        }
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// `row[dst] += q·row[src]`.
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let s = &self.data[src * self.cols + c];
            if !s.is_zero() {
                let t = s * q;
                self.data[dst * self.cols + c] += t;
            }
        }
    }

    /// `col[dst] += q·col[src]`.
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let s = &self.data[r * self.cols + src];
            if !s.is_zero() {
                let t = s * q;
                self.data[r * self.cols + dst] += t;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let x = &mut self.data[r * self.cols + c];
            *x = -std::mem::take(x);
        }
    }

    /// Rank over `Q`.
    pub fn rank(&self) -> usize {
        hnf(self).pivots.len()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = v / &prev;
                }
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        Ok(sign * &m[(n - 1, n - 1)])
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().is_ok_and(|d| d.abs().is_one())
    }
}

/// Row-style Hermite normal form `U·A = H`.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Pivot column of each nonzero row of `H`, in order.
    pub pivots: Vec<usize>,
}

/// Hermite normal form by integer row operations: pivots positive, entries
/// above a pivot reduced into `[0, pivot)`, zero rows last.
pub fn hnf(a: &IntMatrix) -> Hermite {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..h.cols {
        if r == h.rows {
            break;
        }
        loop {
            let best = (r..h.rows)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&x, &y| h[(x, c)].abs().cmp(&h[(y, c)].abs()).then(x.cmp(&y)));
            let Some(p) = best else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..h.rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                h.add_row(i, r, &q);
                u.add_row(i, r, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let p = h[(r, c)].clone();
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&p);
            h.add_row(i, r, &q);
            u.add_row(i, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    Hermite { h, u, pivots }
}

/// `U·A·V = D` with `D` diagonal and each factor dividing the next.
#[derive(Clone, Debug)]
pub struct Smith {
    /// The `min(rows, cols)` diagonal entries of `D`, nonnegative.
    pub factors: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.factors.iter().filter(|f| !f.is_zero()).count()
    }
}

/// Smith normal form. Pivot: smallest nonzero absolute value in the
/// remaining block, first in row-major order on ties.
pub fn snf(a: &IntMatrix) -> Smith {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    for t in 0..m.min(n) {
        let Some((pi, pj)) = smallest_entry(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !d[(i, t)].is_zero() {
                    let q = -d[(i, t)].div_floor(&d[(t, t)]);
                    d.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                    clean &= d[(i, t)].is_zero();
                }
            }
            for j in t + 1..n {
                if !d[(t, j)].is_zero() {
                    let q = -d[(t, j)].div_floor(&d[(t, t)]);
                    d.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                    clean &= d[(t, j)].is_zero();
                }
            }
            if !clean {
                // a nonzero remainder is smaller than the pivot; move it in
                let cand = (t + 1..m)
                    .map(|i| (i, t))
                    .chain((t + 1..n).map(|j| (t, j)))
                    .filter(|&(i, j)| !d[(i, j)].is_zero())
                    .min_by(|&x, &y| d[x].abs().cmp(&d[y].abs()).then(x.cmp(&y)))
                    .expect("some remainder is nonzero");
                d.swap_rows(t, cand.0);
                u.swap_rows(t, cand.0);
                d.swap_cols(t, cand.1);
                v.swap_cols(t, cand.1);
                continue;
            }
            let p = d[(t, t)].clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    d.add_row(t, i, &BigInt::one());
                    u.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    let factors = (0..m.min(n)).map(|i| d[(i, i)].clone()).collect();
    Smith { factors, u, v }
}

fn smallest_entry(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows {
        for j in t..d.cols {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|b| x.abs() < d[b].abs()) {
                best = Some((i, j));
                if x.abs().is_one() {
                    return best;
                }
            }
        }
    }
    best
}

/// Rows form a basis of the saturated lattice `{x : x·A = 0}`.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let h = hnf(a);
    let rank = h.pivots.len();
    IntMatrix::with_width(
        &(rank..a.rows)
            .map(|r| h.u.row(r).to_vec())
            .collect::<Vec<_>>(),
        a.rows,
    )
}

/// `(positive, negative, zero)` counts of a symmetric matrix, by exact
/// congruence diagonalization over `Q`.
pub fn signature(g: &IntMatrix) -> Result<(usize, usize, usize)> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = g.rows;
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Rational::from_integer(g[(i, j)].clone()))
                .collect()
        })
        .collect();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    let mut k = 0;
    while k < n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // e_k ← e_k + e_j gives a diagonal entry 2·a_kj
                for c in 0..n {
                    let t = a[j][c].clone();
                    a[k][c] += t;
                }
                for r in 0..n {
                    let t = a[r][j].clone();
                    a[r][k] += t;
                }
            } else {
                zero += 1;
                k += 1;
                continue;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for c in k..n {
                let t = &f * &a[k][c];
                a[i][c] -= t;
            }
            for r in k..n {
                let t = &f * &a[r][k];
                a[r][i] -= t;
            }
        }
        k += 1;
    }
    Ok((pos, neg, zero))
}

pub fn is_primitive(v: &[BigInt]) -> Result<bool> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(g.is_one())
}

pub fn is_even(g: &IntMatrix) -> Result<bool> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok((0..g.rows).all(|i| g[(i, i)].is_even()))
}

/// LLL reduction (parameter 3/4) of a positive definite Gram matrix, in
/// all-integer arithmetic. Returns the reduced Gram matrix `H·G·Hᵀ` and the
/// unimodular `H` whose rows express the new basis in the old one.
pub fn lll_reduce(g: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    lll_reduce_with(g, 3, 4)
}

/// LLL reduction with parameter `num/den`, which must lie in `(1/4, 1]`.
pub fn lll_reduce_with(g: &IntMatrix, num: i64, den: i64) -> Result<(IntMatrix, IntMatrix)> {
    if !(4 * num > den && num <= den && den > 0) {
        return Err(Error::Precondition("LLL parameter outside (1/4, 1]".into()));
    }
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = g.rows;
    let mut gram = g.clone();
    let mut h = IntMatrix::identity(n);
    if n == 0 {
        return Ok((gram, h));
    }
    // d[i + 1] is the i-th leading principal minor; lam[k][j] for j < k
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::one();
    d[1] = gram[(0, 0)].clone();
    if !d[1].is_positive() {
        return Err(Error::NotDefinite);
    }
    let mut k = 1;
    let mut kmax = 0;
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = gram[(k, j)].clone();
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if !u.is_positive() {
                        return Err(Error::NotDefinite);
                    }
                    d[k + 1] = u;
                }
            }
        }
        loop {
            redi(&mut gram, &mut h, &mut lam, &d, k, k - 1);
            let lhs = BigInt::from(den) * &d[k + 1] * &d[k - 1];
            let rhs = BigInt::from(num) * &d[k] * &d[k]
                - BigInt::from(den) * &lam[k][k - 1] * &lam[k][k - 1];
            if lhs < rhs {
                swapi(&mut gram, &mut h, &mut lam, &mut d, k, kmax);
                k = (k - 1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    redi(&mut gram, &mut h, &mut lam, &d, k, l);
                }
                k += 1;
                break;
            }
        }
    }
    let check = h.mul(g).mul(&h.transpose());
    if check != gram {
        return Err(Error::Inconsistent(
            "LLL transform does not reproduce the reduced Gram matrix".into(),
        ));
    }
    Ok((gram, h))
}

/// Size reduction of `b_k` against `b_l`.
fn redi(
    gram: &mut IntMatrix,
    h: &mut IntMatrix,
    lam: &mut [Vec<BigInt>],
    d: &[BigInt],
    k: usize,
    l: usize,
) {
    let two_lam = BigInt::from(2) * &lam[k][l];
    if two_lam.abs() <= d[l + 1] {
        return;
    }
    // nearest integer to lam / d
    let q = (&two_lam + &d[l + 1]).div_floor(&(BigInt::from(2) * &d[l + 1]));
    let mq = -&q;
    h.add_row(k, l, &mq);
    gram.add_row(k, l, &mq);
    gram.add_col(k, l, &mq);
    lam[k][l] -= &q * &d[l + 1];
    for i in 0..l {
        let t = &q * &lam[l][i];
        lam[k][i] -= t;
    }
}

fn swapi(
    gram: &mut IntMatrix,
    h: &mut IntMatrix,
    lam: &mut [Vec<BigInt>],
    d: &mut [BigInt],
    k: usize,
    kmax: usize,
) {
    h.swap_rows(k, k - 1);
    gram.swap_rows(k, k - 1);
    gram.swap_cols(k, k - 1);
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
}

/// A basis of the lattice generated by the catalog classes modulo
/// numerical equivalence, with coordinates of every class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PicardLattice {
    /// Basis vectors as integer combinations of catalog classes (rank × n).
    pub basis_expr: IntMatrix,
    /// Intersection form on the basis.
    pub gram64: IntMatrix,
    /// Each catalog class in the basis (n × rank).
    pub coords: IntMatrix,
    /// Basis of the relations among catalog classes.
    pub kernel: IntMatrix,
}

impl PicardLattice {
    pub fn rank(&self) -> usize {
        self.gram64.rows
    }

    pub fn discriminant(&self) -> Result<BigInt> {
        self.gram64.determinant()
    }

    /// Coordinates in the basis of an integer combination of catalog classes.
    pub fn to_basis(&self, x: &[i64]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.rank()];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.coords.row(i)) {
                *o += c * xi;
            }
        }
        out
    }

    /// Pairing of two vectors in basis coordinates.
    pub fn pair(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        let n = self.rank();
        let mut s = BigInt::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            let mut t = BigInt::zero();
            for j in 0..n {
                if !y[j].is_zero() {
                    t += &self.gram64[(i, j)] * &y[j];
                }
            }
            s += &x[i] * t;
        }
        s
    }
}

/// Builds the lattice from the catalog intersection matrix using the Hermite
/// form of the matrix: its nonzero rows form a basis of the image of
/// `x ↦ x·G`, which is isomorphic to the quotient by numerical equivalence.
pub fn build_picard_lattice(gram: &IntMatrix, expected_rank: usize) -> Result<PicardLattice> {
    if !gram.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = gram.rows;
    let herm = hnf(gram);
    let rank = herm.pivots.len();
    if rank != expected_rank {
        return Err(Error::RankMismatch {
            expected: expected_rank,
            found: rank,
        });
    }
    let basis_expr = IntMatrix::with_width(
        &(0..rank)
            .map(|r| herm.u.row(r).to_vec())
            .collect::<Vec<_>>(),
        n,
    );
    let kernel = IntMatrix::with_width(
        &(rank..n)
            .map(|r| herm.u.row(r).to_vec())
            .collect::<Vec<_>>(),
        n,
    );
    let gram64 = basis_expr.mul(gram).mul(&basis_expr.transpose());
    let mut coords = IntMatrix::zeros(n, rank);
    for j in 0..n {
        let mut rest: Vec<BigInt> = gram.row(j).to_vec();
        for (i, &pc) in herm.pivots.iter().enumerate() {
            if rest[pc].is_zero() {
                continue;
            }
            let (q, r) = rest[pc].div_rem(&herm.h[(i, pc)]);
            if !r.is_zero() {
                return Err(Error::Inconsistent("class outside the lattice".into()));
            }
            for c in pc..n {
                let t = &q * &herm.h[(i, c)];
                rest[c] -= t;
            }
            coords[(j, i)] = q;
        }
        if rest.iter().any(|x| !x.is_zero()) {
            return Err(Error::Inconsistent("class outside the row lattice".into()));
        }
    }
    if coords.mul(&gram64).mul(&coords.transpose()) != *gram {
        return Err(Error::Inconsistent(
            "coordinates do not reproduce the intersection matrix".into(),
        ));
    }
    Ok(PicardLattice {
        basis_expr,
        gram64,
        coords,
        kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn diag_of(s: &Smith) -> Vec<i64> {
        s.factors.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    fn check_smith(a: &IntMatrix, s: &Smith) {
        let d = s.u.mul(a).mul(&s.v);
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                let expected = if i == j {
                    s.factors[i].clone()
                } else {
                    BigInt::zero()
                };
                assert_eq!(d[(i, j)], expected);
            }
        }
        assert!(s.u.is_unimodular() && s.v.is_unimodular());
        for w in s.factors.windows(2) {
            assert!(w[1].is_zero() || w[1].is_multiple_of(&w[0]));
        }
    }

    #[test]
    fn snf_examples() {
        let a = m(&[vec![2, 0], vec![0, 3]]);
        let s = snf(&a);
        assert_eq!(diag_of(&s), vec![1, 6]);
        check_smith(&a, &s);
        let z = m(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(diag_of(&snf(&z)), vec![0, 0]);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&IntMatrix::identity(3)).rows(), 0);
        // x·(2, 4)ᵀ = 0 over Z², as a 2 × 1 matrix
        let k = kernel_basis(&m(&[vec![2], vec![4]]));
        assert_eq!(k.rows(), 1);
        let v: Vec<i64> = k.row(0).iter().map(|x| x.to_i64().unwrap()).collect();
        assert!(v == vec![2, -1] || v == vec![-2, 1]);
    }

    #[test]
    fn determinant_and_signature() {
        let a = m(&[vec![2, 1], vec![1, -3]]);
        assert_eq!(a.determinant().unwrap(), BigInt::from(-7));
        assert_eq!(signature(&a).unwrap(), (1, 1, 0));
        let h = m(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(signature(&h).unwrap(), (1, 1, 0));
        assert_eq!(signature(&m(&[vec![0]])).unwrap(), (0, 0, 1));
        assert!(signature(&m(&[vec![0, 1], vec![2, 0]])).is_err());
    }

    #[test]
    fn primitivity_and_evenness() {
        let v = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert!(is_primitive(&v(&[0, 1, 0])).unwrap());
        assert!(!is_primitive(&v(&[2, 4, 0])).unwrap());
        assert_eq!(is_primitive(&v(&[0, 0])), Err(Error::ZeroVector));
        assert!(!is_even(&m(&[vec![1]])).unwrap());
        assert!(is_even(&m(&[vec![2]])).unwrap());
        assert_eq!(
            is_even(&m(&[vec![2, 1], vec![0, 2]])),
            Err(Error::NotSymmetric)
        );
    }

    #[test]
    fn lll_examples() {
        let id = IntMatrix::identity(3);
        assert_eq!(lll_reduce(&id).unwrap().0, id);
        let g = m(&[vec![4, 1], vec![1, 4]]);
        assert_eq!(lll_reduce(&g).unwrap().0, g);
        assert_eq!(
            lll_reduce(&m(&[vec![1, 2], vec![2, 1]])).unwrap_err(),
            Error::NotDefinite
        );
        // a skewed basis of Z²
        let g = m(&[vec![1, 10], vec![10, 101]]);
        let (r, h) = lll_reduce(&g).unwrap();
        assert_eq!(r, IntMatrix::identity(2));
        assert!(h.is_unimodular());
    }

    #[test]
    fn hnf_shape() {
        let a = m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let herm = hnf(&a);
        assert_eq!(herm.u.mul(&a), herm.h);
        assert!(herm.u.is_unimodular());
        assert_eq!(herm.pivots, vec![0, 1, 2]);
        for (i, &p) in herm.pivots.iter().enumerate() {
            assert!(herm.h[(i, p)].is_positive());
            for r in 0..i {
                assert!(!herm.h[(r, p)].is_negative() && herm.h[(r, p)] < herm.h[(i, p)]);
            }
        }
    }

    #[test]
    fn picard_on_small_example() {
        // classes x, y, x + y with the hyperbolic form on x, y
        let g = m(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 2]]);
        let pic = build_picard_lattice(&g, 2).unwrap();
        assert_eq!(pic.discriminant().unwrap(), BigInt::from(-1));
        assert_eq!(pic.kernel.rows(), 1);
        assert!(matches!(
            build_picard_lattice(&g, 3),
            Err(Error::RankMismatch { .. })
        ));
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-6i64..=6, rows * cols).prop_map(move |v| {
            IntMatrix::from_i64(&v.chunks(cols).map(|c| c.to_vec()).collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn snf_transforms_reproduce(a in small_matrix(4, 3)) {
            let s = snf(&a);
            check_smith(&a, &s);
            prop_assert_eq!(s.rank(), hnf(&a).pivots.len());
        }

        #[test]
        fn hnf_transform_reproduces(a in small_matrix(3, 4)) {
            let herm = hnf(&a);
            prop_assert_eq!(herm.u.mul(&a), herm.h.clone());
            prop_assert!(herm.u.is_unimodular());
            let k = kernel_basis(&a);
            prop_assert!(k.mul(&a).is_zero());
            prop_assert_eq!(k.rows() + herm.pivots.len(), a.rows());
        }

        #[test]
        fn lll_preserves_determinant(v in proptest::collection::vec(-4i64..=4, 9)) {
            // B·Bᵀ + I is positive definite
            let b = IntMatrix::from_i64(&v.chunks(3).map(|c| c.to_vec()).collect::<Vec<_>>());
            let mut g = b.mul(&b.transpose());
            for i in 0..3 {
                g[(i, i)] += BigInt::one();
            }
            let (r, h) = lll_reduce(&g).unwrap();
            prop_assert_eq!(r.determinant().unwrap(), g.determinant().unwrap());
            prop_assert!(h.is_unimodular());
            prop_assert_eq!(h.mul(&g).mul(&h.transpose()), r);
        }
    }
}
