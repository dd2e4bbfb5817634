//! Exact arithmetic in `Q` and in the biquadratic field `K = Q(i, √2)`.
//!
//! Elements of `K` are stored as four rationals on the basis
//! `{1, i, √2, i√2}` and multiplied through a fixed table. The Galois group
//! `Gal(K/Q) ≅ Z/2 × Z/2` acts by sign flips on the coordinates.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// An element `c0 + c1·i + c2·√2 + c3·i√2` of `K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FieldElement {
    c: [Rational; 4],
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    /// Lexicographic on the coordinate 4-tuple. Not a field ordering; used
    /// only to make canonical sorts deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.cmp(&other.c)
    }
}

impl FieldElement {
    pub fn new(c0: Rational, c1: Rational, c2: Rational, c3: Rational) -> Self {
        Self {
            c: [c0, c1, c2, c3],
        }
    }

    pub fn from_coords(c: [Rational; 4]) -> Self {
        Self { c }
    }

    pub fn from_ints(c0: i64, c1: i64, c2: i64, c3: i64) -> Self {
        Self::new(rat(c0), rat(c1), rat(c2), rat(c3))
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::new(q, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1, 0, 0)
    }

    pub fn sqrt2() -> Self {
        Self::from_ints(0, 0, 1, 0)
    }

    pub fn i_sqrt2() -> Self {
        Self::from_ints(0, 0, 0, 1)
    }

    pub fn coords(&self) -> &[Rational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// `Some(q)` when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.c[1..].iter().all(Zero::is_zero).then_some(&self.c[0])
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self {
            c: [
                &self.c[0] * q,
                &self.c[1] * q,
                &self.c[2] * q,
                &self.c[3] * q,
            ],
        }
    }

    /// Field norm `N_{K/Q}`: the product of the four conjugates.
    pub fn norm(&self) -> Rational {
        let prod = self * &GaloisElement::CONJ_I.apply(self);
        // `prod` lies in Q(√2): u + v√2, with norm u² − 2v².
        let [u, _, v, _] = &prod.c;
        u * u - rat(2) * v * v
    }

    pub fn inverse(&self) -> Result<Self> {
        field_inverse(self)
    }

    /// The smallest subfield of `K` containing this element.
    pub fn subfield(&self) -> Subfield {
        Subfield::from_fixing(
            GaloisElement::ALL
                .iter()
                .filter(|g| &g.apply(self) == self)
                .copied(),
        )
    }

    /// Square root of a rational inside `K`, when one exists.
    pub fn sqrt_of_rational(q: &Rational) -> Option<Self> {
        if q.is_zero() {
            return Some(Self::zero());
        }
        // q = n/d = n·d / d²
        let m = q.numer() * q.denom();
        let negative = m.is_negative();
        let mut a = m.abs();
        let two = BigInt::from(2);
        let mut doubled = false;
        let mut extra = BigInt::one();
        while a.is_even() {
            a /= &two;
            if doubled {
                extra *= &two;
            }
            doubled = !doubled;
        }
        let s = a.sqrt();
        if &s * &s != a {
            return None;
        }
        let root = Rational::new(s * extra, q.denom().clone());
        let zero = Rational::zero;
        Some(match (negative, doubled) {
            (false, false) => Self::new(root, zero(), zero(), zero()),
            (true, false) => Self::new(zero(), root, zero(), zero()),
            (false, true) => Self::new(zero(), zero(), root, zero()),
            (true, true) => Self::new(zero(), zero(), zero(), root),
        })
    }
}

pub fn field_inverse(x: &FieldElement) -> Result<FieldElement> {
    if x.is_zero() {
        return Err(Error::DivisionByZero);
    }
    // x⁻¹ = (product of the three nontrivial conjugates) / N(x)
    let others = GaloisElement::ALL[1..]
        .iter()
        .fold(FieldElement::one(), |acc, g| &acc * &g.apply(x));
    let n = (x * &others)
        .as_rational()
        .cloned()
        .expect("norm of an element lies in Q");
    Ok(others.scale(&n.recip()))
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const UNITS: [&str; 4] = ["", "i", "r2", "i*r2"];
        let mut wrote = false;
        for (c, unit) in self.c.iter().zip(UNITS) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if wrote {
                f.write_str(if neg { "-" } else { "+" })?;
            } else if neg {
                f.write_str("-")?;
            }
            match (mag.is_one(), unit.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{unit}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{unit}")?,
            }
            wrote = true;
        }
        if !wrote {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        FieldElement {
            c: [
                &self.c[0] + &rhs.c[0],
                &self.c[1] + &rhs.c[1],
                &self.c[2] + &rhs.c[2],
                &self.c[3] + &rhs.c[3],
            ],
        }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        FieldElement {
            c: [
                &self.c[0] - &rhs.c[0],
                &self.c[1] - &rhs.c[1],
                &self.c[2] - &rhs.c[2],
                &self.c[3] - &rhs.c[3],
            ],
        }
    }
}

/// `e_p · e_q = factor · e_slot` on the basis `{1, i, √2, i√2}`.
const MUL_TABLE: [[(usize, i64); 4]; 4] = [
    [(0, 1), (1, 1), (2, 1), (3, 1)],
    [(1, 1), (0, -1), (3, 1), (2, -1)],
    [(2, 1), (3, 1), (0, 2), (1, 2)],
    [(3, 1), (2, -1), (1, 2), (0, -2)],
];

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        let mut c: [Rational; 4] = Default::default();
        for (p, x) in self.c.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (q, y) in rhs.c.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                let (slot, factor) = MUL_TABLE[p][q];
                let t = x * y;
                match factor {
                    1 => c[slot] += t,
                    -1 => c[slot] -= t,
                    f => c[slot] += t * rat(f),
                }
            }
        }
        FieldElement { c }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            c: [-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3]],
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, rhs: &FieldElement) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl SubAssign<&FieldElement> for FieldElement {
    fn sub_assign(&mut self, rhs: &FieldElement) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
    }
}

/// An automorphism of `K`, determined by the images of `i` and `√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaloisElement {
    pub negate_i: bool,
    pub negate_sqrt2: bool,
}

impl GaloisElement {
    pub const IDENTITY: Self = Self {
        negate_i: false,
        negate_sqrt2: false,
    };
    /// Complex conjugation: `i ↦ −i`, `√2 ↦ √2`.
    pub const CONJ_I: Self = Self {
        negate_i: true,
        negate_sqrt2: false,
    };
    pub const CONJ_SQRT2: Self = Self {
        negate_i: false,
        negate_sqrt2: true,
    };
    pub const CONJ_BOTH: Self = Self {
        negate_i: true,
        negate_sqrt2: true,
    };
    pub const ALL: [Self; 4] = [
        Self::IDENTITY,
        Self::CONJ_I,
        Self::CONJ_SQRT2,
        Self::CONJ_BOTH,
    ];

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        galois_apply(*self, x)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            negate_i: self.negate_i ^ other.negate_i,
            negate_sqrt2: self.negate_sqrt2 ^ other.negate_sqrt2,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

pub fn galois_apply(g: GaloisElement, x: &FieldElement) -> FieldElement {
    let [c0, c1, c2, c3] = &x.c;
    let flip = |c: &Rational, on: bool| if on { -c } else { c.clone() };
    FieldElement {
        c: [
            c0.clone(),
            flip(c1, g.negate_i),
            flip(c2, g.negate_sqrt2),
            flip(c3, g.negate_i ^ g.negate_sqrt2),
        ],
    }
}

/// The five subfields of `K` that occur as fields of definition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subfield {
    Q,
    QI,
    QSqrt2,
    QISqrt2,
    K,
}

impl Subfield {
    /// The fixed field of the subgroup made of the given Galois elements.
    pub fn from_fixing(stabilizer: impl IntoIterator<Item = GaloisElement>) -> Self {
        let mut fixed = [false; 4];
        for g in stabilizer {
            let idx = GaloisElement::ALL
                .iter()
                .position(|h| *h == g)
                .expect("known element");
            fixed[idx] = true;
        }
        match fixed {
            [_, true, true, _] | [_, true, _, true] | [_, _, true, true] => Subfield::Q,
            [_, true, false, false] => Subfield::QSqrt2,
            [_, false, true, false] => Subfield::QI,
            [_, false, false, true] => Subfield::QISqrt2,
            _ => Subfield::K,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Subfield::Q => "Q",
            Subfield::QI => "Q(i)",
            Subfield::QSqrt2 => "Q(sqrt2)",
            Subfield::QISqrt2 => "Q(i*sqrt2)",
            Subfield::K => "Q(i,sqrt2)",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            Subfield::Q,
            Subfield::QI,
            Subfield::QSqrt2,
            Subfield::QISqrt2,
            Subfield::K,
        ]
        .into_iter()
        .find(|f| f.label() == s)
    }
}

impl fmt::Display for Subfield {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(c0: i64, c1: i64, c2: i64, c3: i64) -> FieldElement {
        FieldElement::from_ints(c0, c1, c2, c3)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            field_inverse(&k(2, 0, 0, 0)).unwrap(),
            FieldElement::from_rational(ratio(1, 2))
        );
        assert_eq!(field_inverse(&FieldElement::i()).unwrap(), k(0, -1, 0, 0));
        assert_eq!(field_inverse(&k(1, 0, 1, 0)).unwrap(), k(-1, 0, 1, 0));
        assert_eq!(
            field_inverse(&FieldElement::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn basis_relations() {
        assert_eq!(&FieldElement::i() * &FieldElement::i(), k(-1, 0, 0, 0));
        assert_eq!(
            &FieldElement::sqrt2() * &FieldElement::sqrt2(),
            k(2, 0, 0, 0)
        );
        assert_eq!(
            &FieldElement::i() * &FieldElement::sqrt2(),
            FieldElement::i_sqrt2()
        );
        assert_eq!(
            &FieldElement::i_sqrt2() * &FieldElement::i_sqrt2(),
            k(-2, 0, 0, 0)
        );
    }

    #[test]
    fn galois_examples() {
        let conj = GaloisElement::CONJ_I;
        assert_eq!(conj.apply(&FieldElement::i()), k(0, -1, 0, 0));
        assert_eq!(
            GaloisElement::CONJ_SQRT2.apply(&FieldElement::sqrt2()),
            k(0, 0, -1, 0)
        );
        assert_eq!(conj.apply(&k(3, 2, -1, 0)), k(3, -2, -1, 0));
    }

    #[test]
    fn galois_group_is_klein_four() {
        for g in GaloisElement::ALL {
            assert!(g.compose(&g).is_identity());
            for h in GaloisElement::ALL {
                assert_eq!(g.compose(&h), h.compose(&g));
            }
        }
    }

    #[test]
    fn fixed_fields_of_basis_elements() {
        assert_eq!(FieldElement::from_int(5).subfield(), Subfield::Q);
        assert_eq!(FieldElement::i().subfield(), Subfield::QI);
        assert_eq!(FieldElement::sqrt2().subfield(), Subfield::QSqrt2);
        assert_eq!(FieldElement::i_sqrt2().subfield(), Subfield::QISqrt2);
        assert_eq!(k(0, 1, 1, 0).subfield(), Subfield::K);
        // each order-2 element fixes exactly one quadratic subfield
        let fixed: Vec<_> = [
            GaloisElement::CONJ_I,
            GaloisElement::CONJ_SQRT2,
            GaloisElement::CONJ_BOTH,
        ]
        .iter()
        .map(|g| Subfield::from_fixing([GaloisElement::IDENTITY, *g]))
        .collect();
        assert_eq!(
            fixed,
            vec![Subfield::QSqrt2, Subfield::QI, Subfield::QISqrt2]
        );
    }

    #[test]
    fn square_roots_of_rationals() {
        let check = |q: Rational| {
            let r = FieldElement::sqrt_of_rational(&q).unwrap();
            assert_eq!(&r * &r, FieldElement::from_rational(q));
        };
        for q in [
            rat(4),
            rat(-1),
            rat(2),
            rat(-2),
            ratio(9, 8),
            ratio(-1, 2),
            rat(-8),
            rat(0),
        ] {
            check(q);
        }
        assert!(FieldElement::sqrt_of_rational(&rat(3)).is_none());
        assert!(FieldElement::sqrt_of_rational(&ratio(1, 3)).is_none());
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(k(0, 0, 0, 0).to_string(), "0");
        assert_eq!(k(1, -1, 0, 0).to_string(), "1-i");
        assert_eq!(k(0, 0, -2, 1).to_string(), "-2*r2+i*r2");
    }

    fn element() -> impl Strategy<Value = FieldElement> {
        prop::array::uniform4((-20i64..20, 1i64..6))
            .prop_map(|c| FieldElement::from_coords(c.map(|(n, d)| ratio(n, d))))
    }

    proptest! {
        #[test]
        fn field_axioms(a in element(), b in element(), c in element()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            if !a.is_zero() {
                prop_assert!((&a * &a.inverse().unwrap()).is_one());
            }
        }

        #[test]
        fn galois_elements_are_automorphisms(a in element(), b in element()) {
            for g in GaloisElement::ALL {
                prop_assert_eq!(g.apply(&(&a * &b)), &g.apply(&a) * &g.apply(&b));
                prop_assert_eq!(g.apply(&(&a + &b)), &g.apply(&a) + &g.apply(&b));
            }
        }

        #[test]
        fn norm_is_multiplicative(a in element(), b in element()) {
            prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        }
    }
}
