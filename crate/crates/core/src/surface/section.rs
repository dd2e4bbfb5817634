use crate::error::{Error, Result};
use crate::field::FieldElement as F;
use crate::linalg::rank_of_rows;
use crate::poly::MultiPoly;

use super::catalog::Catalog;
use super::model::{a, C, NVARS};

/// Degree of the surface as a complete intersection of four quadrics.
pub const SURFACE_DEGREE: usize = 16;

/// Irreducible components of a hyperplane section, as catalog ids with
/// multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionDecomposition {
    pub components: Vec<(usize, usize)>,
    pub total_degree: usize,
}

fn supported_hyperplanes() -> Vec<Vec<F>> {
    let mut out = Vec::new();
    for v in 0..NVARS {
        let mut c = vec![F::zero(); NVARS];
        c[v] = F::one();
        out.push(c);
    }
    for j in 0..3 {
        for s in [F::one(), -F::one()] {
            let mut c = vec![F::zero(); NVARS];
            c[a(j)] = F::one();
            c[a((j + 1) % 3)] = -&s;
            out.push(c);
            let mut c = vec![F::zero(); NVARS];
            c[a(j)] = F::one();
            c[C] = -&(&s * &F::i());
            out.push(c);
        }
    }
    out
}

fn proportional(x: &[F], y: &[F]) -> bool {
    rank_of_rows(&[x.to_vec(), y.to_vec()]) == 1
}

/// Decomposes the section of the surface by one of the coordinate
/// hyperplanes or one of the hyperplanes `a_j = ±a_{j+1}`, `a_j = ±i·c`.
///
/// The components are the catalog curves whose span lies in the
/// hyperplane. The section has degree 16, so the multiplicities are all one
/// exactly when the component degrees add up to 16.
pub fn hyperplane_section_decomposition(
    catalog: &Catalog,
    h: &MultiPoly,
) -> Result<SectionDecomposition> {
    let coeffs = h.linear_coeffs();
    if h.nvars() != NVARS
        || !h.is_homogeneous()
        || h.degree() != Some(1)
        || !supported_hyperplanes()
            .iter()
            .any(|s| proportional(s, &coeffs))
    {
        return Err(Error::UnsupportedHyperplane(
            h.display_with(&super::model::VAR_NAMES),
        ));
    }
    let mut components = Vec::new();
    let mut total = 0;
    for c in catalog.curves.iter().filter(|c| !c.is_exceptional()) {
        let mut rows: Vec<Vec<F>> = c
            .span_linear_forms
            .iter()
            .map(MultiPoly::linear_coeffs)
            .collect();
        let r = rank_of_rows(&rows);
        rows.push(coeffs.clone());
        if rank_of_rows(&rows) == r {
            components.push((c.id, 1));
            total += c.degree;
        }
    }
    if total != SURFACE_DEGREE {
        return Err(Error::Inconsistent(format!(
            "components of degree {total} do not exhaust a section of degree {SURFACE_DEGREE}"
        )));
    }
    Ok(SectionDecomposition {
        components,
        total_degree: total,
    })
}
