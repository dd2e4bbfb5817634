//! Intersection numbers of curves on the minimal resolution of the surface,
//! and the 140 × 140 intersection matrix of the catalog.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldElement as F;
use crate::ideal::{local_length, scheme_length, DEFAULT_LOCAL_BOUND};
use crate::linalg::{rank_of_rows, KMatrix};
use crate::poly::MultiPoly;
use crate::surface::model::NVARS;
use crate::surface::section::hyperplane_section_decomposition;
use crate::surface::{Catalog, CurveRecord, NodeRecord};

pub const GRAM_FORMAT: &str = "cuboid-gram v1";

/// Hilbert-function bound for the ambient intersection schemes.
pub const SCHEME_DEGREE_CAP: usize = 24;

/// Division rounds allowed when forming strict transforms.
pub const SATURATION_ROUNDS: usize = 8;

/// How an entry of the intersection matrix was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Adjunction,
    Disjoint,
    Engine,
    ExceptionalPair,
}

impl Provenance {
    pub fn code(&self) -> char {
        match self {
            Provenance::Adjunction => 'A',
            Provenance::Disjoint => 'D',
            Provenance::Engine => 'E',
            Provenance::ExceptionalPair => 'X',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'A' => Some(Provenance::Adjunction),
            'D' => Some(Provenance::Disjoint),
            'E' => Some(Provenance::Engine),
            'X' => Some(Provenance::ExceptionalPair),
            _ => None,
        }
    }
}

/// What happens above one node shared by two curves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalContribution {
    pub node_id: usize,
    /// Local length of the ambient intersection scheme at the node.
    pub lambda: usize,
    /// Local intersection number of the strict transforms above the node.
    pub beta: usize,
    pub same_tangent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairIntersection {
    pub value: i64,
    pub provenance: Provenance,
    pub scheme_degree: usize,
    pub contributions: Vec<LocalContribution>,
}

/// `C̃²` by adjunction on the resolution: `2·p_a − 2 − deg C`, since the
/// canonical class is the pulled-back hyperplane class.
pub fn self_intersection(curve: &CurveRecord) -> i64 {
    if curve.is_exceptional() {
        -2
    } else {
        2 * curve.arithmetic_genus as i64 - 2 - curve.degree as i64
    }
}

fn require_curves(a: &CurveRecord, b: &CurveRecord) -> Result<()> {
    if a.id == b.id {
        return Err(Error::Precondition("a curve paired with itself".into()));
    }
    if a.is_exceptional() || b.is_exceptional() {
        return Err(Error::Precondition(
            "exceptional curves have no equations downstairs".into(),
        ));
    }
    Ok(())
}

/// Length of the scheme `C ∩ D` in projective space.
pub fn scheme_degree(a: &CurveRecord, b: &CurveRecord) -> Result<usize> {
    require_curves(a, b)?;
    let mut gens = a.generators();
    gens.extend(b.generators());
    scheme_length(&gens, NVARS, SCHEME_DEGREE_CAP)
}

/// The affine chart at a point: dehomogenize on its first nonzero
/// coordinate and move the point to the origin. Returns polynomials in six
/// variables.
pub fn affine_chart(gens: &[MultiPoly], p: &[F]) -> Result<Vec<MultiPoly>> {
    let k = p
        .iter()
        .position(|x| !x.is_zero())
        .ok_or(Error::ZeroVector)?;
    let n = NVARS - 1;
    let images: Vec<MultiPoly> = (0..NVARS)
        .map(|i| {
            if i == k {
                MultiPoly::constant(p[k].clone(), n)
            } else {
                let y = if i < k { i } else { i - 1 };
                MultiPoly::var(y, n).add(&MultiPoly::constant(p[i].clone(), n))
            }
        })
        .collect();
    gens.iter().map(|g| g.compose(&images)).collect()
}

fn require_incident(curve: &CurveRecord, p: &NodeRecord) -> Result<()> {
    if !curve.node_ids.contains(&p.id) {
        return Err(Error::Precondition(format!(
            "node {} is not on {}",
            p.id,
            curve.label()
        )));
    }
    Ok(())
}

/// Local length of `C ∩ D` at a node lying on both.
pub fn node_local_length(a: &CurveRecord, b: &CurveRecord, p: &NodeRecord) -> Result<usize> {
    require_curves(a, b)?;
    require_incident(a, p)?;
    require_incident(b, p)?;
    let mut gens = a.generators();
    gens.extend(b.generators());
    local_length(
        &affine_chart(&gens, &p.coords)?,
        NVARS - 1,
        DEFAULT_LOCAL_BOUND,
    )
}

/// Tangent direction of a curve at a node, in chart coordinates, scaled so
/// its first nonzero entry is 1.
pub fn tangent_direction(curve: &CurveRecord, p: &NodeRecord) -> Result<Vec<F>> {
    require_incident(curve, p)?;
    let chart = affine_chart(&curve.generators(), &p.coords)?;
    let origin = vec![F::zero(); NVARS - 1];
    let jac = KMatrix::from_rows(chart.iter().map(|g| g.gradient_at(&origin)).collect());
    let kernel = jac.kernel();
    let [v] = kernel.as_slice() else {
        return Err(Error::Inconsistent(format!(
            "{} is not smooth at node {}",
            curve.label(),
            p.id
        )));
    };
    crate::surface::model::normalize_projective(v)
}

/// Generators of the strict transform of a curve in the blow-up chart along
/// `v`, with coordinates `(t, u)` where `y_k = t`, `y_i = t·(u_i + v_i)`.
/// The common point with the exceptional divisor is the origin.
fn strict_transform(chart_gens: &[MultiPoly], v: &[F]) -> Result<Vec<MultiPoly>> {
    let n = v.len();
    let k = v
        .iter()
        .position(|x| !x.is_zero())
        .ok_or(Error::ZeroVector)?;
    let t = MultiPoly::var(0, n);
    let images: Vec<MultiPoly> = (0..n)
        .map(|i| {
            if i == k {
                t.clone()
            } else {
                let u = if i < k { i + 1 } else { i };
                MultiPoly::var(u, n)
                    .add(&MultiPoly::constant(v[i].clone(), n))
                    .mul(&t)
            }
        })
        .collect();
    let mut out = Vec::new();
    for g in chart_gens {
        let h = g.compose(&images)?;
        let e = h.variable_valuation(0);
        if e as usize > SATURATION_ROUNDS {
            return Err(Error::SaturationBound {
                rounds: SATURATION_ROUNDS,
            });
        }
        out.push(h.divide_by_variable(0, e));
    }
    // smooth germ at the origin not contained in t = 0: the divided ideal is
    // already saturated by t
    let origin = vec![F::zero(); n];
    let mut rows: Vec<Vec<F>> = out.iter().map(|g| g.gradient_at(&origin)).collect();
    if out.iter().any(|g| !g.evaluate(&origin).is_zero()) || rank_of_rows(&rows) != n - 1 {
        return Err(Error::SaturationBound {
            rounds: SATURATION_ROUNDS,
        });
    }
    rows.push(t.gradient_at(&origin));
    if rank_of_rows(&rows) != n {
        return Err(Error::SaturationBound {
            rounds: SATURATION_ROUNDS,
        });
    }
    Ok(out)
}

/// Local intersection number of the strict transforms of two curves above
/// a shared node. Zero when their tangent directions differ, since the
/// strict transforms then meet the exceptional curve at different points.
pub fn blowup_contribution(a: &CurveRecord, b: &CurveRecord, p: &NodeRecord) -> Result<usize> {
    require_curves(a, b)?;
    let va = tangent_direction(a, p)?;
    let vb = tangent_direction(b, p)?;
    if va != vb {
        return Ok(0);
    }
    let mut gens = strict_transform(&affine_chart(&a.generators(), &p.coords)?, &va)?;
    gens.extend(strict_transform(
        &affine_chart(&b.generators(), &p.coords)?,
        &vb,
    )?);
    local_length(&gens, NVARS - 1, DEFAULT_LOCAL_BOUND)
}

/// `C̃ · E_p` for a non-exceptional curve.
pub fn exceptional_intersection(curve: &CurveRecord, p: &NodeRecord) -> Result<usize> {
    if curve.is_exceptional() {
        return Err(Error::Precondition(
            "expected a non-exceptional curve".into(),
        ));
    }
    if !curve.node_ids.contains(&p.id) {
        return Ok(0);
    }
    let v = tangent_direction(curve, p)?;
    let mut gens = strict_transform(&affine_chart(&curve.generators(), &p.coords)?, &v)?;
    gens.push(MultiPoly::var(0, NVARS - 1));
    local_length(&gens, NVARS - 1, DEFAULT_LOCAL_BOUND)
}

/// `C̃ · D̃` on the resolution for two distinct catalog curves.
pub fn strict_transform_intersection(
    catalog: &Catalog,
    a: usize,
    b: usize,
) -> Result<PairIntersection> {
    let (ca, cb) = (&catalog.curves[a], &catalog.curves[b]);
    if a == b {
        return Err(Error::Precondition("a curve paired with itself".into()));
    }
    let pair = |value: i64, provenance| PairIntersection {
        value,
        provenance,
        scheme_degree: 0,
        contributions: Vec::new(),
    };
    match (ca.is_exceptional(), cb.is_exceptional()) {
        (true, true) => Ok(pair(0, Provenance::ExceptionalPair)),
        (true, false) | (false, true) => {
            let (e, c) = if ca.is_exceptional() {
                (ca, cb)
            } else {
                (cb, ca)
            };
            let p = &catalog.nodes[e.node_ids[0]];
            let v = exceptional_intersection(c, p)? as i64;
            Ok(pair(
                v,
                if c.node_ids.contains(&p.id) {
                    Provenance::Engine
                } else {
                    Provenance::Disjoint
                },
            ))
        }
        (false, false) => {
            let total = scheme_degree(ca, cb)?;
            let shared: Vec<usize> = ca
                .node_ids
                .iter()
                .copied()
                .filter(|p| cb.node_ids.contains(p))
                .collect();
            if total == 0 && shared.is_empty() {
                return Ok(pair(0, Provenance::Disjoint));
            }
            let mut contributions = Vec::new();
            let mut value = total as i64;
            for id in shared {
                let p = &catalog.nodes[id];
                let lambda = node_local_length(ca, cb, p)?;
                let same_tangent = tangent_direction(ca, p)? == tangent_direction(cb, p)?;
                let beta = blowup_contribution(ca, cb, p)?;
                value += beta as i64 - lambda as i64;
                contributions.push(LocalContribution {
                    node_id: id,
                    lambda,
                    beta,
                    same_tangent,
                });
            }
            if value < 0 {
                return Err(Error::Inconsistent(format!(
                    "negative intersection of {} and {}",
                    ca.label(),
                    cb.label()
                )));
            }
            Ok(PairIntersection {
                value,
                provenance: Provenance::Engine,
                scheme_degree: total,
                contributions,
            })
        }
    }
}

/// The intersection matrix of the catalog, with per-entry provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    pub entries: Vec<Vec<i64>>,
    pub provenance: Vec<Vec<Provenance>>,
    pub catalog_hash: String,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut s = 0;
        for (i, row) in self.entries.iter().enumerate() {
            if x[i] == 0 {
                continue;
            }
            s += x[i] * row.iter().zip(y).map(|(a, b)| a * b).sum::<i64>();
        }
        s
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn to_text(&self) -> String {
        let n = self.size();
        let mut out = format!("{GRAM_FORMAT}\ncatalog {}\nsize {n}\n", self.catalog_hash);
        for row in &self.entries {
            let line: Vec<String> = row.iter().map(i64::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out.push_str("provenance\n");
        for row in &self.provenance {
            let line: String = row.iter().map(Provenance::code).collect();
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<GramMatrix> {
        let bad = |m: &str| Error::Parse(format!("intersection matrix: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some(GRAM_FORMAT) {
            return Err(bad("unknown format version"));
        }
        let catalog_hash = lines
            .next()
            .and_then(|l| l.strip_prefix("catalog "))
            .ok_or_else(|| bad("missing catalog hash"))?
            .to_string();
        let n: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("size "))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("missing size"))?;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<i64> = lines
                .next()
                .ok_or_else(|| bad("truncated"))?
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("not an integer")))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(bad("ragged row"));
            }
            entries.push(row);
        }
        if lines.next() != Some("provenance") {
            return Err(bad("missing provenance"));
        }
        let mut provenance = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<Provenance> = lines
                .next()
                .ok_or_else(|| bad("truncated provenance"))?
                .chars()
                .map(|c| Provenance::from_code(c).ok_or_else(|| bad("unknown provenance code")))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(bad("ragged provenance row"));
            }
            provenance.push(row);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing data"));
        }
        let g = GramMatrix {
            entries,
            provenance,
            catalog_hash,
        };
        if !g.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(g)
    }
}

/// Full engine output: the matrix and every pair that met above a node.
#[derive(Clone, Debug)]
pub struct GramComputation {
    pub gram: GramMatrix,
    /// Pairs `(i, j)` with `i < j` sharing a node, with what happened there.
    pub node_pairs: Vec<((usize, usize), Vec<LocalContribution>)>,
}

impl GramComputation {
    /// Pairs whose strict transforms meet above a node.
    pub fn tangential_pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for ((i, j), cs) in &self.node_pairs {
            for c in cs.iter().filter(|c| c.same_tangent) {
                out.push((*i, *j, c.node_id));
            }
        }
        out
    }
}

/// Computes all pairwise intersection numbers of the catalog.
pub fn gram_matrix(catalog: &Catalog) -> Result<GramComputation> {
    let n = catalog.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<PairIntersection>> = pairs
        .par_iter()
        .map(|&(i, j)| strict_transform_intersection(catalog, i, j))
        .collect();
    let mut entries = vec![vec![0i64; n]; n];
    let mut provenance = vec![vec![Provenance::Disjoint; n]; n];
    let mut node_pairs = Vec::new();
    for (i, c) in catalog.curves.iter().enumerate() {
        entries[i][i] = self_intersection(c);
        provenance[i][i] = Provenance::Adjunction;
    }
    for (&(i, j), r) in pairs.iter().zip(results) {
        let r = r?;
        entries[i][j] = r.value;
        entries[j][i] = r.value;
        provenance[i][j] = r.provenance;
        provenance[j][i] = r.provenance;
        if !r.contributions.is_empty() {
            node_pairs.push(((i, j), r.contributions));
        }
    }
    Ok(GramComputation {
        gram: GramMatrix {
            entries,
            provenance,
            catalog_hash: catalog.hash(),
        },
        node_pairs,
    })
}

/// Class of the pullback of a hyperplane section, as a vector on the
/// catalog: its components plus `m_p·E_p`, with `m_p` fixed by
/// `(b*H)·E_p = 0`.
pub fn hyperplane_class(catalog: &Catalog, gram: &GramMatrix, h: &MultiPoly) -> Result<Vec<i64>> {
    let section = hyperplane_section_decomposition(catalog, h)?;
    let mut x = vec![0i64; catalog.len()];
    for (id, m) in &section.components {
        x[*id] += *m as i64;
    }
    for p in 0..catalog.nodes.len() {
        let e = catalog.exceptional_of(p);
        let s: i64 = section
            .components
            .iter()
            .map(|(id, m)| *m as i64 * gram.entries[*id][e])
            .sum();
        if s % 2 != 0 {
            return Err(Error::Inconsistent(format!(
                "odd pairing with the exceptional curve over node {p}"
            )));
        }
        x[e] = s / 2;
    }
    Ok(x)
}

/// The canonical class as the pullback of the hyperplane `a1 = 0`, checked
/// against its defining properties and against the pullbacks of `a2 = 0`,
/// `a3 = 0` and `c = 0`.
pub fn canonical_class_vector(catalog: &Catalog, gram: &GramMatrix) -> Result<Vec<i64>> {
    let coord = |v: usize| MultiPoly::var(v, NVARS);
    let k = hyperplane_class(catalog, gram, &coord(0))?;
    if gram.pair(&k, &k) != 16 {
        return Err(Error::Inconsistent("K·K is not 16".into()));
    }
    let gk = gram.apply(&k);
    for (c, &v) in catalog.curves.iter().zip(&gk) {
        if v != c.degree as i64 {
            return Err(Error::Inconsistent(format!(
                "K·{} = {v}, expected {}",
                c.label(),
                c.degree
            )));
        }
    }
    for v in [1, 2, crate::surface::model::C] {
        let h = hyperplane_class(catalog, gram, &coord(v))?;
        let diff: Vec<i64> = h.iter().zip(&k).map(|(a, b)| a - b).collect();
        if gram.apply(&diff).iter().any(|&x| x != 0) {
            return Err(Error::Inconsistent(format!(
                "hyperplane {v} gives a different class"
            )));
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{CurveKind, FamilyHyperplane};
    use std::sync::OnceLock;

    fn catalog() -> &'static Catalog {
        static CAT: OnceLock<Catalog> = OnceLock::new();
        CAT.get_or_init(|| Catalog::build().unwrap())
    }

    fn find(pred: impl Fn(&CurveRecord) -> bool) -> Vec<&'static CurveRecord> {
        catalog().curves.iter().filter(|c| pred(c)).collect()
    }

    #[test]
    fn self_intersections() {
        for c in &catalog().curves {
            let expected = match c.kind {
                CurveKind::Exceptional => -2,
                _ => -4,
            };
            assert_eq!(self_intersection(c), expected);
        }
    }

    #[test]
    fn a1_conics_differing_in_b1_sign() {
        let cat = catalog();
        let fam = find(|c| c.hyperplane == FamilyHyperplane::A(0));
        let x = fam
            .iter()
            .find(|c| c.signs == [false, false, false])
            .unwrap();
        let y = fam
            .iter()
            .find(|c| c.signs == [true, false, false])
            .unwrap();
        // b1 = c and b1 = −c force b1 = c = 0, leaving a2² + a3² = 0 on the span
        let shared: Vec<usize> = x
            .node_ids
            .iter()
            .copied()
            .filter(|p| y.node_ids.contains(p))
            .collect();
        assert_eq!(shared.len(), 2);
        for &p in &shared {
            assert_eq!(cat.nodes[p].source_quadric, 0);
        }
        let total = scheme_degree(x, y).unwrap();
        let local: usize = shared
            .iter()
            .map(|&p| node_local_length(x, y, &cat.nodes[p]).unwrap())
            .sum();
        assert_eq!(total, local);
        assert_eq!(total, 2);
    }

    #[test]
    fn preconditions() {
        let cat = catalog();
        let c = &cat.curves[48];
        assert!(scheme_degree(c, c).is_err());
        assert!(blowup_contribution(c, c, &cat.nodes[c.node_ids[0]]).is_err());
        let far = cat
            .nodes
            .iter()
            .find(|p| !c.node_ids.contains(&p.id))
            .unwrap();
        let other =
            find(|d| !d.is_exceptional() && d.id != c.id && d.node_ids.contains(&c.node_ids[0]))[0];
        assert!(node_local_length(c, other, far).is_err());
        assert_eq!(exceptional_intersection(c, far).unwrap(), 0);
        assert!(strict_transform_intersection(cat, 3, 3).is_err());
    }

    #[test]
    fn exceptional_pairs() {
        let cat = catalog();
        assert_eq!(strict_transform_intersection(cat, 0, 1).unwrap().value, 0);
        for c in find(|c| !c.is_exceptional()) {
            for p in &cat.nodes {
                let v = exceptional_intersection(c, p).unwrap();
                assert_eq!(
                    v,
                    usize::from(c.node_ids.contains(&p.id)),
                    "{} at {}",
                    c.label(),
                    p.id
                );
            }
        }
    }

    #[test]
    fn disjoint_supports() {
        let cat = catalog();
        // conics in a1 = 0 with b1 = c and in c = 0 can only meet where a1 = b1 = c = 0
        let x =
            find(|c| c.hyperplane == FamilyHyperplane::A(1) && c.signs == [false, false, false])[0];
        let y =
            find(|c| c.hyperplane == FamilyHyperplane::A(1) && c.signs == [true, true, true])[0];
        let r = strict_transform_intersection(cat, x.id, y.id).unwrap();
        assert!(r.value >= 0);
        let pairs: Vec<_> = find(|c| !c.is_exceptional());
        let mut disjoint = 0;
        for d in &pairs[1..] {
            if scheme_degree(pairs[0], d).unwrap() == 0 {
                disjoint += 1;
            }
        }
        assert!(disjoint > 0);
    }

    #[test]
    fn transversal_crossing_has_length_one() {
        let cat = catalog();
        let mut seen = false;
        for x in find(|c| c.kind == CurveKind::Conic) {
            for y in find(|c| c.kind == CurveKind::Conic && c.id > x.id) {
                for &p in x.node_ids.iter().filter(|p| y.node_ids.contains(p)) {
                    let node = &cat.nodes[p];
                    if tangent_direction(x, node).unwrap() != tangent_direction(y, node).unwrap() {
                        assert_eq!(blowup_contribution(x, y, node).unwrap(), 0);
                        if node_local_length(x, y, node).unwrap() == 1 {
                            seen = true;
                        }
                    }
                }
            }
        }
        assert!(seen);
    }

    #[test]
    fn gram_text_round_trip() {
        let g = GramMatrix {
            entries: vec![vec![-2, 1], vec![1, -4]],
            provenance: vec![
                vec![Provenance::Adjunction, Provenance::Engine],
                vec![Provenance::Engine, Provenance::Adjunction],
            ],
            catalog_hash: "abc".into(),
        };
        assert_eq!(GramMatrix::from_text(&g.to_text()).unwrap(), g);
        let asym = g.to_text().replacen("1 -4", "2 -4", 1);
        assert!(GramMatrix::from_text(&asym).is_err());
        assert!(GramMatrix::from_text("nonsense").is_err());
    }
}
