//! Hilbert functions of homogeneous ideals and local lengths of affine
//! ideals, both by exact elimination on Macaulay-style matrices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::linalg::{EchelonBasis, KMatrix, SparseRow};
use crate::poly::{Monomial, MultiPoly};

pub const DEFAULT_DEGREE_CAP: usize = 12;
pub const DEFAULT_LOCAL_BOUND: usize = 10;

/// `dim_K (K[x]/I)_d` for homogeneous generators.
pub fn graded_dimension(generators: &[MultiPoly], nvars: usize, d: u32) -> usize {
    let monos = Monomial::all_of_degree(nvars, d);
    let index: HashMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut basis = EchelonBasis::new();
    for g in generators.iter().filter(|g| !g.is_zero()) {
        let gd = g.degree().expect("nonzero");
        debug_assert!(g.is_homogeneous());
        if gd > d {
            continue;
        }
        for m in Monomial::all_of_degree(nvars, d - gd) {
            let row: SparseRow = g
                .mul_monomial(&m)
                .terms()
                .map(|(mono, c)| (index[mono], c.clone()))
                .collect();
            basis.insert(row);
            if basis.rank() == monos.len() {
                return 0;
            }
        }
    }
    monos.len() - basis.rank()
}

/// Degree of the projective scheme cut out by homogeneous generators,
/// assuming it is zero-dimensional (or empty).
///
/// The Hilbert function is evaluated degree by degree until `H(d) = H(d+1)`
/// with `H(d) <= d` and `d` at least the generator degrees. By Gotzmann
/// persistence the Hilbert function is then constant from `d` on, so the
/// common value is the degree. Not stabilizing by `cap` is an error.
pub fn scheme_length(generators: &[MultiPoly], nvars: usize, cap: usize) -> Result<usize> {
    let gens = eliminate_linear_forms(generators, nvars, true)?;
    let (gens, nvars) = (gens.generators, gens.nvars);
    if gens.iter().any(|g| g.degree() == Some(0)) {
        return Ok(0);
    }
    let max_deg = gens.iter().filter_map(MultiPoly::degree).max().unwrap_or(1) as usize;
    let mut prev = graded_dimension(&gens, nvars, max_deg as u32);
    for d in max_deg..cap {
        let next = graded_dimension(&gens, nvars, d as u32 + 1);
        if next == prev && prev <= d {
            return Ok(prev);
        }
        prev = next;
    }
    Err(Error::DegreeCapExceeded { cap })
}

/// `dim_K` of the local ring at the origin modulo the ideal.
///
/// Computed as the stabilized value of `dim K[x]/(I + m^N)`. Two equal
/// consecutive values force `m^N ⊂ I` locally (Nakayama), so the sequence is
/// constant from there on.
pub fn local_length(generators: &[MultiPoly], nvars: usize, n_max: usize) -> Result<usize> {
    for g in generators {
        if g.nvars() != nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: g.nvars(),
            });
        }
        if !g.coefficient(&Monomial::one(nvars)).is_zero() {
            return Err(Error::Precondition(
                "generator does not vanish at the origin".into(),
            ));
        }
    }
    let reduced = eliminate_linear_forms(generators, nvars, false)?;
    let (gens, nvars) = (reduced.generators, reduced.nvars);
    let mut prev = 1usize; // N = 1: only the constants survive
    for n in 2..=n_max.max(2) as u32 {
        let cur = truncated_quotient_dim(&gens, nvars, n);
        if cur == prev {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoStabilization { bound: n_max })
}

/// `dim K[x]/(I + m^n)` for generators vanishing at the origin.
fn truncated_quotient_dim(gens: &[MultiPoly], nvars: usize, n: u32) -> usize {
    let monos = Monomial::all_below_degree(nvars, n);
    let index: HashMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut basis = EchelonBasis::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let ord = g.order().expect("nonzero");
        if ord >= n {
            continue;
        }
        for m in Monomial::all_below_degree(nvars, n - ord) {
            let row: SparseRow = g
                .mul_monomial(&m)
                .truncate(n)
                .terms()
                .map(|(mono, c)| (index[mono], c.clone()))
                .collect();
            basis.insert(row);
        }
    }
    monos.len() - basis.rank()
}

/// Generators after substituting away every purely linear generator.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub generators: Vec<MultiPoly>,
    pub nvars: usize,
}

/// Repeatedly uses degree-1 homogeneous generators to eliminate variables.
///
/// The quotient ring is unchanged up to isomorphism (graded when
/// `homogeneous`, local at the origin otherwise), so Hilbert functions and
/// local lengths can be read off the smaller presentation.
pub fn eliminate_linear_forms(
    generators: &[MultiPoly],
    nvars: usize,
    homogeneous: bool,
) -> Result<Reduced> {
    let mut gens: Vec<MultiPoly> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .cloned()
        .collect();
    let mut nvars = nvars;
    loop {
        let (linear, rest): (Vec<MultiPoly>, Vec<MultiPoly>) = gens
            .into_iter()
            .partition(|g| g.is_homogeneous() && g.degree() == Some(1));
        if linear.is_empty() {
            return Ok(Reduced {
                generators: rest,
                nvars,
            });
        }
        let rows: Vec<Vec<FieldElement>> = linear.iter().map(MultiPoly::linear_coeffs).collect();
        let images = kernel_parametrization(&KMatrix::from_rows_with_width(rows, nvars));
        let new_nvars = images.first().map_or(0, MultiPoly::nvars);
        let mut next = Vec::with_capacity(rest.len());
        for g in &rest {
            let h = if new_nvars == 0 {
                // everything collapses to the constant term
                MultiPoly::constant(g.coefficient(&Monomial::one(nvars)), 0)
            } else {
                g.compose(&images)?
            };
            if !h.is_zero() {
                next.push(h);
            }
        }
        if !homogeneous
            && next
                .iter()
                .any(|g| !g.coefficient(&Monomial::one(new_nvars)).is_zero())
        {
            return Err(Error::Precondition(
                "generator does not vanish at the origin".into(),
            ));
        }
        gens = next;
        nvars = new_nvars;
        if nvars == 0 {
            return Ok(Reduced {
                generators: gens,
                nvars,
            });
        }
    }
}

/// Writes each original variable as a linear form in the free variables of
/// `{x : A x = 0}`. Returns an empty list when the kernel is trivial.
pub fn kernel_parametrization(a: &KMatrix) -> Vec<MultiPoly> {
    let n = a.cols();
    let kernel = a.kernel();
    let k = kernel.len();
    if k == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|j| {
            let coeffs: Vec<FieldElement> = kernel.iter().map(|v| v[j].clone()).collect();
            MultiPoly::linear(&coeffs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElement as F;
    use proptest::prelude::*;

    fn v(i: usize, n: usize) -> MultiPoly {
        MultiPoly::var(i, n)
    }

    fn sq(i: usize, n: usize) -> MultiPoly {
        v(i, n).mul(&v(i, n))
    }

    #[test]
    fn graded_dimension_examples() {
        let g = vec![sq(0, 3).sub(&sq(1, 3)), sq(0, 3).sub(&sq(2, 3))];
        assert_eq!(graded_dimension(&g, 3, 5), 4);
        assert_eq!(graded_dimension(&[v(0, 3), v(1, 3)], 3, 3), 1);
        let c = v(0, 3).mul(&v(2, 3)).sub(&sq(1, 3));
        assert_eq!(graded_dimension(&[c.clone(), c.add(&sq(2, 3))], 3, 6), 4);
    }

    #[test]
    fn scheme_length_examples() {
        let g = vec![sq(0, 3).sub(&sq(1, 3)), sq(0, 3).sub(&sq(2, 3))];
        assert_eq!(scheme_length(&g, 3, 12).unwrap(), 4);
        assert_eq!(
            scheme_length(&[v(0, 3), v(1, 3), v(2, 3)], 3, 12).unwrap(),
            0
        );
        // a conic and a line in the plane: a 1-dimensional scheme never stabilizes
        assert!(matches!(
            scheme_length(&[sq(0, 3)], 3, 8),
            Err(Error::DegreeCapExceeded { cap: 8 })
        ));
    }

    #[test]
    fn local_length_examples() {
        assert_eq!(local_length(&[v(0, 2), v(1, 2)], 2, 10).unwrap(), 1);
        assert_eq!(local_length(&[sq(0, 2), v(1, 2)], 2, 10).unwrap(), 2);
        let xy = v(0, 2).mul(&v(1, 2));
        assert_eq!(local_length(&[sq(0, 2), xy, sq(1, 2)], 2, 10).unwrap(), 3);
    }

    #[test]
    fn local_length_detects_non_isolated_point() {
        assert!(matches!(
            local_length(&[sq(0, 2)], 2, 6),
            Err(Error::NoStabilization { .. })
        ));
        let unit = MultiPoly::constant(F::one(), 2);
        assert!(local_length(&[unit], 2, 6).is_err());
    }

    #[test]
    fn tangency_has_higher_multiplicity() {
        // y = x² against y = 0 at the origin
        let parabola = v(1, 2).sub(&sq(0, 2));
        assert_eq!(local_length(&[parabola, v(1, 2)], 2, 10).unwrap(), 2);
    }

    #[test]
    fn global_degree_equals_sum_of_local_lengths() {
        // conic yz = x² against the doubled tangent line y² = 0: one point of length 4
        let n = 3;
        let conic = v(1, n).mul(&v(2, n)).sub(&sq(0, n));
        let double_line = sq(1, n);
        assert_eq!(scheme_length(&[conic, double_line], n, 12).unwrap(), 4);
        // affine chart z = 1: (y - x², y²) at the origin
        let a = v(1, 2).sub(&sq(0, 2));
        assert_eq!(local_length(&[a, sq(1, 2)], 2, 10).unwrap(), 4);

        // four reduced points (±1 : ±1 : 1): each has local length 1
        let g = vec![sq(0, n).sub(&sq(2, n)), sq(1, n).sub(&sq(2, n))];
        assert_eq!(scheme_length(&g, n, 12).unwrap(), 4);
        let shifted = |sx: i64, sy: i64| {
            // x ↦ x + sx, y ↦ y + sy in the chart z = 1
            let x = v(0, 2).add(&MultiPoly::constant(F::from_int(sx), 2));
            let y = v(1, 2).add(&MultiPoly::constant(F::from_int(sy), 2));
            let one = MultiPoly::constant(F::one(), 2);
            vec![x.mul(&x).sub(&one), y.mul(&y).sub(&one)]
        };
        let total: usize = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
            .iter()
            .map(|&(a, b)| local_length(&shifted(a, b), 2, 10).unwrap())
            .sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn linear_elimination_preserves_hilbert_function() {
        let n = 4;
        let gens = vec![
            v(3, n).sub(&v(0, n)),
            sq(0, n).sub(&sq(1, n)),
            sq(1, n).sub(&sq(2, n)),
        ];
        let red = eliminate_linear_forms(&gens, n, true).unwrap();
        assert_eq!(red.nvars, 3);
        for d in 2..6 {
            assert_eq!(
                graded_dimension(&gens, n, d),
                graded_dimension(&red.generators, 3, d)
            );
        }
    }

    proptest! {
        #[test]
        fn adding_a_generator_never_increases_dimension(
            coeffs in prop::collection::vec(-2i64..3, 6), d in 2u32..6
        ) {
            let n = 3;
            let base = vec![sq(0, n).sub(&sq(1, n))];
            let mut extra = MultiPoly::zero(n);
            for (m, c) in Monomial::all_of_degree(n, 2).into_iter().zip(&coeffs) {
                extra.add_term(m, &F::from_int(*c));
            }
            let mut more = base.clone();
            more.push(extra);
            prop_assert!(graded_dimension(&more, n, d) <= graded_dimension(&base, n, d));
        }
    }
}
