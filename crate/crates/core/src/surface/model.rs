use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::linalg::KMatrix;
use crate::poly::MultiPoly;

pub const NVARS: usize = 7;
pub const VAR_NAMES: [&str; NVARS] = ["a1", "a2", "a3", "b1", "b2", "b3", "c"];
pub const C: usize = 6;

pub const fn a(j: usize) -> usize {
    j
}

pub const fn b(j: usize) -> usize {
    3 + j
}

/// Labels of the six rank-3 quadrics, in canonical order.
pub const RANK3_LABELS: [&str; 6] = ["Q1", "Q2", "Q3", "R1", "R2", "R3"];

/// The four defining quadrics and the six rank-3 quadrics of the surface.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    /// `q1, q2, q3, q4`.
    pub quadrics: [MultiPoly; 4],
    /// `q1, q2, q3, r1, r2, r3`.
    pub rank3: [MultiPoly; 6],
}

fn square(var: usize) -> MultiPoly {
    let x = MultiPoly::var(var, NVARS);
    x.mul(&x)
}

pub fn build_surface_model() -> Result<SurfaceModel> {
    let q = |j: usize| square(a(j)).add(&square(b(j))).sub(&square(C));
    let q4 = square(a(0))
        .add(&square(a(1)))
        .add(&square(a(2)))
        .sub(&square(C));
    let quadrics = [q(0), q(1), q(2), q4.clone()];
    let r = |j: usize| q4.sub(&quadrics[j]);
    let rank3 = [q(0), q(1), q(2), r(0), r(1), r(2)];

    // r_j = (sum of the other two a²) − b_j²
    for j in 0..3 {
        let expected = (0..3)
            .filter(|&k| k != j)
            .fold(MultiPoly::zero(NVARS), |acc, k| acc.add(&square(a(k))))
            .sub(&square(b(j)));
        if rank3[3 + j] != expected {
            return Err(Error::Inconsistent(format!(
                "r{} has an unexpected shape",
                j + 1
            )));
        }
    }
    for (form, label) in rank3.iter().zip(RANK3_LABELS) {
        if quadric_rank(form) != 3 {
            return Err(Error::Inconsistent(format!("{label} does not have rank 3")));
        }
    }
    if quadric_rank(&quadrics[3]) != 4 {
        return Err(Error::Inconsistent("q4 does not have rank 4".into()));
    }
    Ok(SurfaceModel { quadrics, rank3 })
}

/// Rank of the symmetric coefficient matrix of a quadratic form.
pub fn quadric_rank(form: &MultiPoly) -> usize {
    form.quadratic_form_matrix().rank()
}

impl SurfaceModel {
    /// Coordinates that actually occur in a rank-3 quadric; they cut out its
    /// singular locus.
    pub fn distinguished_coordinates(&self, idx: usize) -> Vec<usize> {
        let form = &self.rank3[idx];
        (0..NVARS)
            .filter(|&v| form.terms().any(|(m, _)| m.0[v] > 0))
            .collect()
    }

    pub fn contains_point(&self, p: &[FieldElement]) -> bool {
        self.quadrics.iter().all(|q| q.evaluate(p).is_zero())
    }

    /// The 4 × 7 Jacobian matrix of `q1..q4` at a point.
    pub fn jacobian(&self, p: &[FieldElement]) -> KMatrix {
        KMatrix::from_rows(self.quadrics.iter().map(|q| q.gradient_at(p)).collect())
    }

    pub fn jacobian_rank(&self, p: &[FieldElement]) -> usize {
        self.jacobian(p).rank()
    }
}

/// Scales a nonzero vector so its first nonzero coordinate is 1.
pub fn normalize_projective(v: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let lead = v.iter().find(|x| !x.is_zero()).ok_or(Error::ZeroVector)?;
    let inv = lead.inverse()?;
    Ok(v.iter().map(|x| x * &inv).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ratio, FieldElement as F};

    #[test]
    fn model_forms() {
        let m = build_surface_model().unwrap();
        assert_eq!(
            m.quadrics[3],
            MultiPoly::diagonal_quadric(&[1, 1, 1, 0, 0, 0, -1])
        );
        assert_eq!(quadric_rank(&m.quadrics[3]), 4);
        assert_eq!(
            m.rank3[3],
            MultiPoly::diagonal_quadric(&[0, 1, 1, -1, 0, 0, 0])
        );
        assert_eq!(m.rank3.len(), 6);
        assert_eq!(m.distinguished_coordinates(0), vec![a(0), b(0), C]);
        assert_eq!(m.distinguished_coordinates(3), vec![a(1), a(2), b(0)]);
    }

    #[test]
    fn smooth_rational_points_have_full_rank() {
        let m = build_surface_model().unwrap();
        let f = |n, d| F::from_rational(ratio(n, d));
        // degenerate box (0, 3/5, 4/5) on a conic in a1 = 0
        let p = [
            f(0, 1),
            f(3, 5),
            f(4, 5),
            f(1, 1),
            f(4, 5),
            f(3, 5),
            f(1, 1),
        ];
        assert!(m.contains_point(&p));
        assert_eq!(m.jacobian_rank(&p), 4);
        // degenerate box (3/5, 0, 4/5)
        let p = [
            f(3, 5),
            f(0, 1),
            f(4, 5),
            f(4, 5),
            f(1, 1),
            f(3, 5),
            f(1, 1),
        ];
        assert!(m.contains_point(&p));
        assert_eq!(m.jacobian_rank(&p), 4);
    }
}
