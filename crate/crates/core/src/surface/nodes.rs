use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::{FieldElement, GaloisElement, Subfield};
use crate::linalg::KMatrix;
use crate::poly::Monomial;

use super::model::{normalize_projective, SurfaceModel, NVARS};

/// One of the 48 `A1` singular points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: usize,
    /// Projective coordinates, first nonzero entry equal to 1.
    pub coords: Vec<FieldElement>,
    /// Index into the rank-3 quadric list whose singular locus contains it.
    pub source_quadric: usize,
    pub field: Subfield,
}

impl NodeRecord {
    pub fn galois(&self, g: GaloisElement) -> Vec<FieldElement> {
        self.coords.iter().map(|x| g.apply(x)).collect()
    }
}

/// Smallest field over which a projective point is defined.
pub fn point_field(coords: &[FieldElement]) -> Subfield {
    Subfield::from_fixing(GaloisElement::ALL.into_iter().filter(|g| {
        let image: Vec<FieldElement> = coords.iter().map(|x| g.apply(x)).collect();
        normalize_projective(&image).ok().as_deref() == Some(coords)
    }))
}

/// Enumerates the singular points of the surface.
///
/// On the singular locus of each rank-3 quadric the remaining equations
/// become linear in the squares of the four free coordinates; the squares
/// are solved for exactly and every sign choice of the square roots is
/// kept.
pub fn compute_singular_points(model: &SurfaceModel) -> Result<Vec<NodeRecord>> {
    let mut nodes = Vec::new();
    let mut seen = BTreeSet::new();
    for source in 0..model.rank3.len() {
        let zeroed = model.distinguished_coordinates(source);
        let free: Vec<usize> = (0..NVARS).filter(|v| !zeroed.contains(v)).collect();
        let mut rows = Vec::new();
        for q in &model.quadrics {
            let row: Vec<FieldElement> = free
                .iter()
                .map(|&v| {
                    let mut e = vec![0; NVARS];
                    e[v] = 2;
                    q.coefficient(&Monomial(e))
                })
                .collect();
            rows.push(row);
        }
        let kernel = KMatrix::from_rows(rows).kernel();
        let [squares] = kernel.as_slice() else {
            return Err(Error::Inconsistent(format!(
                "expected a unique solution for the squares on the singular locus of quadric {source}"
            )));
        };
        let lead = squares
            .iter()
            .position(|s| !s.is_zero())
            .ok_or(Error::ZeroVector)?;
        let inv = squares[lead].inverse()?;
        let mut roots = Vec::new();
        for s in squares {
            let q = (s * &inv)
                .as_rational()
                .cloned()
                .ok_or_else(|| Error::Inconsistent("irrational square".into()))?;
            let r = FieldElement::sqrt_of_rational(&q)
                .ok_or_else(|| Error::Inconsistent("square root outside the field".into()))?;
            roots.push(r);
        }
        let nonzero: Vec<usize> = (0..free.len())
            .filter(|&k| k != lead && !roots[k].is_zero())
            .collect();
        for mask in 0..(1u32 << nonzero.len()) {
            let mut p = vec![FieldElement::zero(); NVARS];
            for (k, &v) in free.iter().enumerate() {
                p[v] = roots[k].clone();
            }
            for (bit, &k) in nonzero.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    p[free[k]] = -&p[free[k]];
                }
            }
            let p = normalize_projective(&p)?;
            if !model.contains_point(&p) {
                return Err(Error::Inconsistent(
                    "computed node is not on the surface".into(),
                ));
            }
            if model.jacobian_rank(&p) != 3 {
                return Err(Error::Inconsistent(
                    "computed node does not have Jacobian rank 3".into(),
                ));
            }
            if seen.insert(p.clone()) {
                let field = point_field(&p);
                nodes.push(NodeRecord {
                    id: 0,
                    coords: p,
                    source_quadric: source,
                    field,
                });
            }
        }
    }
    nodes.sort_by(|x, y| (x.source_quadric, &x.coords).cmp(&(y.source_quadric, &y.coords)));
    for (id, n) in nodes.iter_mut().enumerate() {
        n.id = id;
    }
    if nodes.len() != 48 {
        return Err(Error::Inconsistent(format!(
            "found {} nodes instead of 48",
            nodes.len()
        )));
    }
    Ok(nodes)
}

/// Index of a node by exact projective equality.
pub fn find_node(nodes: &[NodeRecord], coords: &[FieldElement]) -> Option<usize> {
    let p = normalize_projective(coords).ok()?;
    nodes.iter().position(|n| n.coords == p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::model::build_surface_model;

    fn nodes() -> Vec<NodeRecord> {
        compute_singular_points(&build_surface_model().unwrap()).unwrap()
    }

    #[test]
    fn forty_eight_distinct_nodes() {
        let ns = nodes();
        assert_eq!(ns.len(), 48);
        let set: BTreeSet<_> = ns.iter().map(|n| n.coords.clone()).collect();
        assert_eq!(set.len(), 48);
        for src in 0..6 {
            assert_eq!(ns.iter().filter(|n| n.source_quadric == src).count(), 8);
        }
    }

    #[test]
    fn rational_split() {
        let ns = nodes();
        assert_eq!(ns.iter().filter(|n| n.field == Subfield::Q).count(), 24);
        assert_eq!(ns.iter().filter(|n| n.field == Subfield::QI).count(), 24);
    }

    #[test]
    fn r1_family_contains_expected_point() {
        let ns = nodes();
        let p: Vec<FieldElement> = [1, 0, 0, 0, 1, 1, 1]
            .iter()
            .map(|&v| FieldElement::from_int(v))
            .collect();
        let id = find_node(&ns, &p).expect("node present");
        assert_eq!(ns[id].source_quadric, 3);
    }

    #[test]
    fn nodes_lie_on_distinguished_coordinates() {
        let m = build_surface_model().unwrap();
        for n in nodes() {
            for v in m.distinguished_coordinates(n.source_quadric) {
                assert!(n.coords[v].is_zero());
            }
            assert_eq!(m.jacobian_rank(&n.coords), 3);
        }
    }

    #[test]
    fn q1_singular_locus_points() {
        // [0, 1, ±i, 0, ±i, ±1, 0]: the a2 = 1 chart of a1 = b1 = c = 0
        let ns = nodes();
        let i = FieldElement::i();
        let one = FieldElement::one();
        let z = FieldElement::zero();
        for (s1, s2, s3) in [(1, 1, 1), (1, -1, 1), (-1, 1, -1), (-1, -1, -1)] {
            let sgn = |s: i64, x: &FieldElement| if s > 0 { x.clone() } else { -x };
            let p = vec![
                z.clone(),
                one.clone(),
                sgn(s1, &i),
                z.clone(),
                sgn(s2, &i),
                sgn(s3, &one),
                z.clone(),
            ];
            assert!(find_node(&ns, &p).is_some());
        }
        // the literal printed pattern [0, 1, ±1, 0, ±i, ±i, 0] fails the equations
        let m = build_surface_model().unwrap();
        let p = vec![
            z.clone(),
            one.clone(),
            one.clone(),
            z.clone(),
            i.clone(),
            i.clone(),
            z,
        ];
        assert!(!m.contains_point(&p));
    }
}
