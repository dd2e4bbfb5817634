//! Sparse multivariate polynomials over `K`.
//!
//! Monomials compare in graded lexicographic order with variable 0 the
//! largest. For the ambient `P^6` the variable order is
//! `a1, a2, a3, b1, b2, b3, c`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, GaloisElement};
use crate::linalg::KMatrix;

/// Exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All monomials of total degree exactly `d` in `nvars` variables, in
    /// descending graded-lex order.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(Monomial(cur.clone()));
                return;
            }
            for e in (0..=left).rev() {
                cur[pos] = e;
                rec(pos + 1, left - e, cur, out);
            }
        }
        if nvars == 0 {
            return if d == 0 {
                vec![Monomial(vec![])]
            } else {
                vec![]
            };
        }
        let mut out = Vec::new();
        rec(0, d, &mut vec![0; nvars], &mut out);
        out
    }

    /// All monomials of degree `< d`, lowest degree first.
    pub fn all_below_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        (0..d).flat_map(|k| Self::all_of_degree(nvars, k)).collect()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// A polynomial in a fixed number of variables with no stored zero terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: FieldElement, nvars: usize) -> Self {
        Self::monomial(c, Monomial::one(nvars))
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        Self::monomial(FieldElement::one(), Monomial::var(i, nvars))
    }

    pub fn monomial(c: FieldElement, m: Monomial) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { nvars, terms }
    }

    /// `Σ coeffs[j]·x_j`.
    pub fn linear(coeffs: &[FieldElement]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (j, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(j, n), c);
        }
        p
    }

    /// Diagonal quadratic form `Σ coeffs[j]·x_j²`.
    pub fn diagonal_quadric(coeffs: &[i64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (j, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[j] = 2;
            p.add_term(Monomial(e), &FieldElement::from_int(c));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> FieldElement {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(FieldElement::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Lowest degree of a term; `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: &FieldElement) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        self.scale(&-FieldElement::one())
    }

    pub fn scale(&self, c: &FieldElement) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut out = MultiPoly::constant(FieldElement::one(), self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn evaluate(&self, point: &[FieldElement]) -> FieldElement {
        assert_eq!(point.len(), self.nvars, "point dimension mismatch");
        let mut acc = FieldElement::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t = &t * x;
                }
            }
            acc += &t;
        }
        acc
    }

    pub fn partial(&self, var: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] -= 1;
            out.add_term(m2, &c.scale(&crate::field::rat(e as i64)));
        }
        out
    }

    pub fn gradient_at(&self, point: &[FieldElement]) -> Vec<FieldElement> {
        (0..self.nvars)
            .map(|j| self.partial(j).evaluate(point))
            .collect()
    }

    /// Replaces every variable `x_j` by `images[j]`; the images fix the
    /// variable count of the result.
    pub fn compose(&self, images: &[MultiPoly]) -> Result<MultiPoly> {
        if images.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: images.len(),
            });
        }
        let target = images.first().map(MultiPoly::nvars).unwrap_or(0);
        if images.iter().any(|p| p.nvars != target) {
            return Err(Error::Precondition("images live in different rings".into()));
        }
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| vec![MultiPoly::constant(FieldElement::one(), target), p.clone()])
            .collect();
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(c.clone(), target);
            for (j, &e) in m.0.iter().enumerate() {
                while powers[j].len() <= e as usize {
                    let next = powers[j].last().unwrap().mul(&images[j]);
                    powers[j].push(next);
                }
                if e > 0 {
                    t = t.mul(&powers[j][e as usize]);
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn galois(&self, g: GaloisElement) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), g.apply(c)))
                .collect(),
        }
    }

    /// Homogeneous component of degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops all terms of degree `>= d`.
    pub fn truncate(&self, d: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() < d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficients of the degree-1 part.
    pub fn linear_coeffs(&self) -> Vec<FieldElement> {
        (0..self.nvars)
            .map(|j| self.coefficient(&Monomial::var(j, self.nvars)))
            .collect()
    }

    /// Symmetric matrix `A` of a quadratic form with `p(x) = xᵀ A x`.
    pub fn quadratic_form_matrix(&self) -> KMatrix {
        let n = self.nvars;
        let half = FieldElement::from_rational(crate::field::ratio(1, 2));
        let mut a = KMatrix::zeros(n, n);
        for (m, c) in &self.terms {
            let idx: Vec<usize> =
                m.0.iter()
                    .enumerate()
                    .flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize))
                    .collect();
            match idx.as_slice() {
                [j, k] if j == k => a[(*j, *j)] = c.clone(),
                [j, k] => {
                    let h = c * &half;
                    a[(*j, *k)] = h.clone();
                    a[(*k, *j)] = h;
                }
                _ => panic!("quadratic_form_matrix on a non-quadratic term"),
            }
        }
        a
    }

    /// Largest `k` such that the given variable divides every term as `x^k`.
    pub fn variable_valuation(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).min().unwrap_or(0)
    }

    /// Divides by `x_var^k`; the caller guarantees divisibility.
    pub fn divide_by_variable(&self, var: usize, k: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2.0[var] -= k;
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    /// Leading coefficient w.r.t. graded lex order; used for normalizing.
    pub fn leading_coefficient(&self) -> Option<&FieldElement> {
        self.terms.iter().next_back().map(|(_, c)| c)
    }

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self) -> MultiPoly {
        match self.leading_coefficient() {
            None => self.clone(),
            Some(c) => self.scale(&c.inverse().expect("nonzero leading coefficient")),
        }
    }

    pub fn display_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| {
                        let name = names
                            .get(j)
                            .map(|s| s.to_string())
                            .unwrap_or(format!("x{j}"));
                        if e == 1 {
                            name
                        } else {
                            format!("{name}^{e}")
                        }
                    })
                    .collect();
            let coef = c.to_string();
            let term = if mono.is_empty() {
                format!("({coef})")
            } else if c.is_one() {
                mono.join("*")
            } else {
                format!("({coef})*{}", mono.join("*"))
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// Substitutes `x ↦ map·x`: variable `j` becomes `Σ_k map[j,k]·x_k`.
pub fn poly_substitute(p: &MultiPoly, map: &KMatrix) -> Result<MultiPoly> {
    let n = p.nvars();
    if map.rows() != n || map.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: map.rows().max(map.cols()),
        });
    }
    let images: Vec<MultiPoly> = (0..n).map(|j| MultiPoly::linear(map.row(j))).collect();
    p.compose(&images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElement as F;
    use proptest::prelude::*;

    const N: usize = 7;

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(i, N)
    }

    fn q1() -> MultiPoly {
        MultiPoly::diagonal_quadric(&[1, 0, 0, 1, 0, 0, -1])
    }

    fn sigma() -> KMatrix {
        // rows: images of a1, a2, a3, b1, b2, b3, c
        let z = F::zero;
        let one = F::one;
        let i = F::i;
        let mi = || -F::i();
        KMatrix::from_rows(vec![
            vec![one(), z(), z(), z(), z(), z(), z()],
            vec![z(), one(), z(), z(), z(), z(), z()],
            vec![z(), z(), z(), z(), z(), z(), mi()],
            vec![z(), z(), z(), z(), mi(), z(), z()],
            vec![z(), z(), z(), i(), z(), z(), z()],
            vec![z(), z(), z(), z(), z(), one(), z()],
            vec![z(), z(), i(), z(), z(), z(), z()],
        ])
    }

    #[test]
    fn sigma_sends_q1_to_r2() {
        let r2 = MultiPoly::diagonal_quadric(&[1, 0, 1, 0, -1, 0, 0]);
        assert_eq!(poly_substitute(&q1(), &sigma()).unwrap(), r2);
    }

    #[test]
    fn identity_and_sign_change_fix_q1() {
        assert_eq!(poly_substitute(&q1(), &KMatrix::identity(N)).unwrap(), q1());
        let mut flip = KMatrix::identity(N);
        flip[(3, 3)] = F::from_int(-1);
        assert_eq!(poly_substitute(&q1(), &flip).unwrap(), q1());
    }

    #[test]
    fn substitution_checks_dimensions() {
        assert!(matches!(
            poly_substitute(&q1(), &KMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degree_of_product() {
        let p = x(0).add(&x(1).mul(&x(2)));
        let q = x(6).mul(&x(6)).sub(&x(3));
        assert_eq!(p.mul(&q).degree(), Some(4));
        assert!(!p.is_homogeneous());
        assert!(q1().is_homogeneous());
    }

    #[test]
    fn partial_derivatives() {
        let p = x(0).mul(&x(0)).mul(&x(1));
        assert_eq!(p.partial(0), x(0).mul(&x(1)).scale(&F::from_int(2)));
        assert_eq!(p.partial(2), MultiPoly::zero(N));
    }

    #[test]
    fn quadratic_form_matrix_roundtrip() {
        let p = x(0).mul(&x(1)).add(&x(2).mul(&x(2)));
        let a = p.quadratic_form_matrix();
        assert_eq!(a[(0, 1)], F::from_rational(crate::field::ratio(1, 2)));
        assert_eq!(a[(2, 2)], F::one());
    }

    #[test]
    fn monomial_enumeration_counts() {
        assert_eq!(Monomial::all_of_degree(3, 2).len(), 6);
        assert_eq!(Monomial::all_of_degree(7, 2).len(), 28);
        assert_eq!(Monomial::all_below_degree(2, 4).len(), 10);
    }

    fn small_matrix() -> impl Strategy<Value = KMatrix> {
        prop::collection::vec((-2i64..3, -1i64..2), 9).prop_map(|v| {
            KMatrix::from_rows(
                v.chunks(3)
                    .map(|r| r.iter().map(|&(a, b)| F::from_ints(a, b, 0, 0)).collect())
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn substitution_composes(m1 in small_matrix(), m2 in small_matrix()) {
            let p = MultiPoly::diagonal_quadric(&[1, -1, 2])
                .add(&MultiPoly::var(0, 3).mul(&MultiPoly::var(1, 3)));
            let lhs = poly_substitute(&poly_substitute(&p, &m1).unwrap(), &m2).unwrap();
            let rhs = poly_substitute(&p, &m1.mul(&m2)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
