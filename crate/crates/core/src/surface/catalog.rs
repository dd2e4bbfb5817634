use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldElement as F, GaloisElement, Subfield};
use crate::ideal::{kernel_parametrization, scheme_length, DEFAULT_DEGREE_CAP};
use crate::linalg::{rank_of_rows, KMatrix};
use crate::poly::{Monomial, MultiPoly};

use super::model::{a, b, build_surface_model, SurfaceModel, C, NVARS};
use super::nodes::{compute_singular_points, NodeRecord};

pub const CATALOG_FORMAT: &str = "cuboid-catalog v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveKind {
    Exceptional,
    Conic,
    GenusOneB,
    GenusOneAA,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::Exceptional => "Exceptional",
            CurveKind::Conic => "Conic",
            CurveKind::GenusOneB => "GenusOneB",
            CurveKind::GenusOneAA => "GenusOneAA",
        }
    }
}

/// The hyperplane a family of catalog curves lives in. `negative` selects
/// the minus sign in `a_j = ±a_{j+1}` and `a_j = ±i·c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyHyperplane {
    Node(usize),
    A(usize),
    C,
    B(usize),
    AEqA { j: usize, negative: bool },
    AEqIC { j: usize, negative: bool },
}

impl FamilyHyperplane {
    pub fn label(&self) -> String {
        let s = |neg: bool| if neg { "-" } else { "" };
        match *self {
            FamilyHyperplane::Node(p) => format!("p{p}"),
            FamilyHyperplane::A(j) => format!("a{}=0", j + 1),
            FamilyHyperplane::C => "c=0".into(),
            FamilyHyperplane::B(j) => format!("b{}=0", j + 1),
            FamilyHyperplane::AEqA { j, negative } => {
                format!("a{}={}a{}", j + 1, s(negative), (j + 1) % 3 + 1)
            }
            FamilyHyperplane::AEqIC { j, negative } => format!("a{}={}i*c", j + 1, s(negative)),
        }
    }
}

/// Canonical description of a curve ideal that is a complete intersection
/// inside a linear subspace: the reduced row echelon form of the linear
/// forms, and the reduced row echelon form of the quadrics restricted to the
/// canonical parametrization of that subspace.
///
/// Every step commutes with field automorphisms, so
/// `key(σ(I)) = σ(key(I))`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IdealKey {
    pub linear: Vec<Vec<F>>,
    pub quadric: Vec<Vec<F>>,
}

pub fn ideal_key(linear: &[MultiPoly], quadrics: &[MultiPoly]) -> Result<IdealKey> {
    let nvars = linear
        .first()
        .or(quadrics.first())
        .map_or(NVARS, MultiPoly::nvars);
    let rows: Vec<Vec<F>> = linear.iter().map(MultiPoly::linear_coeffs).collect();
    let lin = KMatrix::from_rows_with_width(rows, nvars);
    let (r, pivots) = lin.rref();
    let linear_key: Vec<Vec<F>> = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
    let restricted = restrict_to_span(&lin, quadrics)?;
    Ok(IdealKey {
        linear: linear_key,
        quadric: row_space(restricted),
    })
}

/// Restricts forms of a fixed degree to `{x : A x = 0}` and returns their
/// coefficient vectors in the parametrizing variables.
fn restrict_to_span(lin: &KMatrix, forms: &[MultiPoly]) -> Result<Vec<Vec<F>>> {
    let images = kernel_parametrization(lin);
    let k = images.first().map_or(0, MultiPoly::nvars);
    let monos = Monomial::all_of_degree(k, 2);
    forms
        .iter()
        .map(|f| {
            let g = f.compose(&images)?;
            Ok(monos.iter().map(|m| g.coefficient(m)).collect())
        })
        .collect()
}

fn row_space(rows: Vec<Vec<F>>) -> Vec<Vec<F>> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let (r, pivots) = KMatrix::from_rows_with_width(rows, width).rref();
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// A curve of the catalog: an exceptional curve of the resolution, or the
/// closure of a conic or genus-one curve on the singular surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveRecord {
    pub id: usize,
    pub kind: CurveKind,
    pub hyperplane: FamilyHyperplane,
    /// `false` for `+`, `true` for `−`, in the order the family lists them.
    pub signs: Vec<bool>,
    pub span_linear_forms: Vec<MultiPoly>,
    pub defining_quadrics: Vec<MultiPoly>,
    pub degree: usize,
    pub arithmetic_genus: usize,
    pub node_ids: Vec<usize>,
    pub field_of_definition: Subfield,
}

impl CurveRecord {
    pub fn is_exceptional(&self) -> bool {
        self.kind == CurveKind::Exceptional
    }

    pub fn label(&self) -> String {
        let signs: String = self
            .signs
            .iter()
            .map(|&s| if s { '-' } else { '+' })
            .collect();
        if signs.is_empty() {
            format!("{}[{}]", self.kind.label(), self.hyperplane.label())
        } else {
            format!(
                "{}[{};{}]",
                self.kind.label(),
                self.hyperplane.label(),
                signs
            )
        }
    }

    pub fn generators(&self) -> Vec<MultiPoly> {
        self.span_linear_forms
            .iter()
            .chain(&self.defining_quadrics)
            .cloned()
            .collect()
    }

    pub fn contains_point(&self, p: &[F]) -> bool {
        !self.is_exceptional() && self.generators().iter().all(|g| g.evaluate(p).is_zero())
    }

    pub fn ideal_key(&self) -> Result<IdealKey> {
        ideal_key(&self.span_linear_forms, &self.defining_quadrics)
    }

    fn sort_key(&self) -> (CurveKind, FamilyHyperplane, Vec<bool>) {
        (self.kind, self.hyperplane, self.signs.clone())
    }
}

/// Fixed field of the Galois stabilizer of the curve's ideal.
pub fn field_of_definition(curve: &CurveRecord) -> Result<Subfield> {
    let key = curve.ideal_key()?;
    let mut stabilizer = Vec::new();
    for g in GaloisElement::ALL {
        let lin: Vec<MultiPoly> = curve
            .span_linear_forms
            .iter()
            .map(|f| f.galois(g))
            .collect();
        let quad: Vec<MultiPoly> = curve
            .defining_quadrics
            .iter()
            .map(|f| f.galois(g))
            .collect();
        if ideal_key(&lin, &quad)? == key {
            stabilizer.push(g);
        }
    }
    Ok(Subfield::from_fixing(stabilizer))
}

fn var(v: usize) -> MultiPoly {
    MultiPoly::var(v, NVARS)
}

fn sq(v: usize) -> MultiPoly {
    var(v).mul(&var(v))
}

/// `x − s·y` as a linear form.
fn minus(x: usize, s: &F, y: usize) -> MultiPoly {
    var(x).sub(&var(y).scale(s))
}

fn signed(base: &F, negative: bool) -> F {
    if negative {
        -base
    } else {
        base.clone()
    }
}

fn q(j: usize) -> MultiPoly {
    sq(a(j)).add(&sq(b(j))).sub(&sq(C))
}

fn q4() -> MultiPoly {
    sq(a(0)).add(&sq(a(1))).add(&sq(a(2))).sub(&sq(C))
}

fn others(j: usize) -> (usize, usize) {
    let mut it = (0..3).filter(|&x| x != j);
    (it.next().unwrap(), it.next().unwrap())
}

const SIGNS3: [[bool; 3]; 8] = [
    [false, false, false],
    [false, false, true],
    [false, true, false],
    [false, true, true],
    [true, false, false],
    [true, false, true],
    [true, true, false],
    [true, true, true],
];

struct Draft {
    kind: CurveKind,
    hyperplane: FamilyHyperplane,
    signs: Vec<bool>,
    linear: Vec<MultiPoly>,
    quadrics: Vec<MultiPoly>,
}

fn family_drafts() -> Vec<Draft> {
    let one = F::one();
    let i = F::i();
    let r2 = F::sqrt2();
    let mut out = Vec::new();
    // conics in a_j = 0: b_j = ±c, b_k = ±a_l, b_l = ±a_k
    for j in 0..3 {
        let (k, l) = others(j);
        for s in SIGNS3 {
            out.push(Draft {
                kind: CurveKind::Conic,
                hyperplane: FamilyHyperplane::A(j),
                signs: s.to_vec(),
                linear: vec![
                    var(a(j)),
                    minus(b(j), &signed(&one, s[0]), C),
                    minus(b(k), &signed(&one, s[1]), a(l)),
                    minus(b(l), &signed(&one, s[2]), a(k)),
                ],
                quadrics: vec![sq(a(k)).add(&sq(a(l))).sub(&sq(C))],
            });
        }
    }
    // conics in c = 0: b_j = ±i·a_j
    for s in SIGNS3 {
        let mut linear = vec![var(C)];
        linear.extend((0..3).map(|j| minus(b(j), &signed(&i, s[j]), a(j))));
        out.push(Draft {
            kind: CurveKind::Conic,
            hyperplane: FamilyHyperplane::C,
            signs: s.to_vec(),
            linear,
            quadrics: vec![sq(a(0)).add(&sq(a(1))).add(&sq(a(2)))],
        });
    }
    // genus one in b_j = 0: a_j = ±c, a_l = ±i·a_k
    for j in 0..3 {
        let (k, l) = others(j);
        for s in &SIGNS3[..4] {
            let s = &s[1..];
            out.push(Draft {
                kind: CurveKind::GenusOneB,
                hyperplane: FamilyHyperplane::B(j),
                signs: s.to_vec(),
                linear: vec![
                    var(b(j)),
                    minus(a(j), &signed(&one, s[0]), C),
                    minus(a(l), &signed(&i, s[1]), a(k)),
                ],
                quadrics: vec![q(k), q(l)],
            });
        }
    }
    // genus one in a_j = ±a_{j+1}: b_{j+1} = ±b_j, b_m = ±√2·a_j
    for j in 0..3 {
        let n = (j + 1) % 3;
        let m = (j + 2) % 3;
        for s in SIGNS3 {
            out.push(Draft {
                kind: CurveKind::GenusOneAA,
                hyperplane: FamilyHyperplane::AEqA { j, negative: s[0] },
                signs: s[1..].to_vec(),
                linear: vec![
                    minus(a(j), &signed(&one, s[0]), a(n)),
                    minus(b(n), &signed(&one, s[1]), b(j)),
                    minus(b(m), &signed(&r2, s[2]), a(j)),
                ],
                quadrics: vec![q(j), q4()],
            });
        }
    }
    // genus one in a_j = ±i·c: b_j = ±√2·c, b_l = ±i·b_k
    for j in 0..3 {
        let (k, l) = others(j);
        for s in SIGNS3 {
            out.push(Draft {
                kind: CurveKind::GenusOneAA,
                hyperplane: FamilyHyperplane::AEqIC { j, negative: s[0] },
                signs: s[1..].to_vec(),
                linear: vec![
                    minus(a(j), &signed(&i, s[0]), C),
                    minus(b(j), &signed(&r2, s[1]), C),
                    minus(b(l), &signed(&i, s[2]), b(k)),
                ],
                quadrics: vec![q(k), q(l)],
            });
        }
    }
    out
}

/// Checks that the quadrics of the surface, restricted to the span, cut out
/// exactly the span of the curve's own quadrics.
fn check_membership(model: &SurfaceModel, lin: &KMatrix, quadrics: &[MultiPoly]) -> Result<()> {
    let surface = row_space(restrict_to_span(lin, &model.quadrics)?);
    let curve = row_space(restrict_to_span(lin, quadrics)?);
    if surface != curve {
        return Err(Error::Inconsistent(
            "curve is not the section of the surface by its span".into(),
        ));
    }
    Ok(())
}

/// Smoothness of a conic or of a complete intersection of two quadrics in
/// its span.
fn check_smooth(lin: &KMatrix, quadrics: &[MultiPoly]) -> Result<bool> {
    let images = kernel_parametrization(lin);
    let restricted: Vec<KMatrix> = quadrics
        .iter()
        .map(|f| f.compose(&images).map(|g| g.quadratic_form_matrix()))
        .collect::<Result<_>>()?;
    match restricted.as_slice() {
        [m] => Ok(m.rows() == 3 && m.rank() == 3),
        [x, y] if x.rows() == 4 => {
            // discriminant of the pencil det(x + t·y), as a binary quartic
            let samples: Vec<F> = (0..5)
                .map(|t| {
                    let t = F::from_int(t);
                    let m = KMatrix::from_rows(
                        (0..4)
                            .map(|r| (0..4).map(|c| &x[(r, c)] + &(&t * &y[(r, c)])).collect())
                            .collect(),
                    );
                    m.determinant()
                })
                .collect::<Result<_>>()?;
            let f = interpolate(&samples)?;
            let d = degree(&f);
            if d.is_none_or(|d| d < 3) {
                return Ok(false);
            }
            Ok(degree(&poly_gcd(&f, &derivative(&f))?) == Some(0))
        }
        _ => Err(Error::Precondition("unsupported curve shape".into())),
    }
}

fn trim(mut p: Vec<F>) -> Vec<F> {
    while p.last().is_some_and(F::is_zero) {
        p.pop();
    }
    p
}

fn degree(p: &[F]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn derivative(p: &[F]) -> Vec<F> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * &F::from_int(k as i64))
        .collect()
}

fn poly_rem(p: &[F], d: &[F]) -> Result<Vec<F>> {
    let dd = degree(d).ok_or(Error::DivisionByZero)?;
    let lead = d[dd].inverse()?;
    let mut r = trim(p.to_vec());
    while let Some(rd) = degree(&r) {
        if rd < dd {
            break;
        }
        let f = &r[rd] * &lead;
        for k in 0..=dd {
            let t = &f * &d[k];
            r[rd - dd + k] -= &t;
        }
        r = trim(r);
    }
    Ok(r)
}

fn poly_gcd(p: &[F], q: &[F]) -> Result<Vec<F>> {
    let (mut x, mut y) = (trim(p.to_vec()), trim(q.to_vec()));
    while degree(&y).is_some() {
        let r = poly_rem(&x, &y)?;
        x = y;
        y = r;
    }
    Ok(x)
}

/// Coefficients of the polynomial of degree < n taking `values[t]` at `t = 0..n`.
fn interpolate(values: &[F]) -> Result<Vec<F>> {
    let n = values.len();
    let vander = KMatrix::from_rows(
        (0..n)
            .map(|t| {
                (0..n)
                    .map(|e| F::from_int((t as i64).pow(e as u32)))
                    .collect()
            })
            .collect(),
    );
    Ok(trim(vander.inverse()?.mul_vec(values)))
}

/// A coordinate hyperplane not containing the span; it meets a curve that
/// is a complete intersection in its span in a scheme of length `degree`.
fn test_hyperplane(lin: &KMatrix) -> Result<MultiPoly> {
    let rows = lin.row_vecs();
    let r = rank_of_rows(&rows);
    (0..NVARS)
        .map(|v| MultiPoly::var(v, NVARS))
        .find(|h| {
            let mut ext = rows.clone();
            ext.push(h.linear_coeffs());
            rank_of_rows(&ext) > r
        })
        .ok_or_else(|| Error::Precondition("span is a point".into()))
}

/// Builds the 140 curves in canonical order.
pub fn build_curve_catalog(model: &SurfaceModel, nodes: &[NodeRecord]) -> Result<Vec<CurveRecord>> {
    if nodes.len() != 48 {
        return Err(Error::Precondition(format!(
            "expected 48 nodes, got {}",
            nodes.len()
        )));
    }
    let mut curves: Vec<CurveRecord> = nodes
        .iter()
        .map(|n| CurveRecord {
            id: 0,
            kind: CurveKind::Exceptional,
            hyperplane: FamilyHyperplane::Node(n.id),
            signs: Vec::new(),
            span_linear_forms: Vec::new(),
            defining_quadrics: Vec::new(),
            degree: 0,
            arithmetic_genus: 0,
            node_ids: vec![n.id],
            field_of_definition: n.field,
        })
        .collect();
    for d in family_drafts() {
        let rows: Vec<Vec<F>> = d.linear.iter().map(MultiPoly::linear_coeffs).collect();
        let lin = KMatrix::from_rows_with_width(rows, NVARS);
        let span_dim = NVARS - lin.rank() - 1;
        let (degree, genus, expected_dim) = if d.kind == CurveKind::Conic {
            (2, 0, 2)
        } else {
            (4, 1, 3)
        };
        if span_dim != expected_dim {
            return Err(Error::Inconsistent(format!(
                "span of {} has dimension {span_dim}",
                d.hyperplane.label()
            )));
        }
        check_membership(model, &lin, &d.quadrics)?;
        if !check_smooth(&lin, &d.quadrics)? {
            return Err(Error::Inconsistent(format!(
                "curve in {} is singular",
                d.hyperplane.label()
            )));
        }
        let mut gens: Vec<MultiPoly> = d.linear.iter().chain(&d.quadrics).cloned().collect();
        gens.push(test_hyperplane(&lin)?);
        let measured = scheme_length(&gens, NVARS, DEFAULT_DEGREE_CAP)?;
        if measured != degree {
            return Err(Error::Inconsistent(format!(
                "curve in {} has degree {measured}",
                d.hyperplane.label()
            )));
        }
        let mut rec = CurveRecord {
            id: 0,
            kind: d.kind,
            hyperplane: d.hyperplane,
            signs: d.signs,
            span_linear_forms: d.linear,
            defining_quadrics: d.quadrics,
            degree,
            arithmetic_genus: genus,
            node_ids: Vec::new(),
            field_of_definition: Subfield::Q,
        };
        rec.node_ids = nodes
            .iter()
            .filter(|n| rec.contains_point(&n.coords))
            .map(|n| n.id)
            .collect();
        for &p in &rec.node_ids {
            let jac: Vec<Vec<F>> = rec
                .generators()
                .iter()
                .map(|g| g.gradient_at(&nodes[p].coords))
                .collect();
            if rank_of_rows(&jac) != NVARS - 2 {
                return Err(Error::Inconsistent(format!(
                    "{} is singular at node {p}",
                    rec.label()
                )));
            }
        }
        rec.field_of_definition = field_of_definition(&rec)?;
        curves.push(rec);
    }
    curves.sort_by_key(CurveRecord::sort_key);
    for (id, c) in curves.iter_mut().enumerate() {
        c.id = id;
    }
    let count = |k: CurveKind| curves.iter().filter(|c| c.kind == k).count();
    let counts = [
        count(CurveKind::Exceptional),
        count(CurveKind::Conic),
        count(CurveKind::GenusOneB),
        count(CurveKind::GenusOneAA),
    ];
    if counts != [48, 32, 12, 48] {
        return Err(Error::Inconsistent(format!("family counts {counts:?}")));
    }
    Ok(curves)
}

/// Surface, nodes and curves together, with lookup by ideal.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub model: SurfaceModel,
    pub nodes: Vec<NodeRecord>,
    pub curves: Vec<CurveRecord>,
    index: BTreeMap<IdealKey, usize>,
}

impl Catalog {
    pub fn build() -> Result<Catalog> {
        let model = build_surface_model()?;
        let nodes = compute_singular_points(&model)?;
        let curves = build_curve_catalog(&model, &nodes)?;
        let mut index = BTreeMap::new();
        for c in curves.iter().filter(|c| !c.is_exceptional()) {
            if index.insert(c.ideal_key()?, c.id).is_some() {
                return Err(Error::Inconsistent(format!(
                    "duplicate curve {}",
                    c.label()
                )));
            }
        }
        Ok(Catalog {
            model,
            nodes,
            curves,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn find_curve(&self, key: &IdealKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Catalog index of the exceptional curve over a node.
    pub fn exceptional_of(&self, node: usize) -> usize {
        node
    }

    /// Catalog index of the curve cut out by the given forms.
    pub fn locate(&self, linear: &[MultiPoly], quadrics: &[MultiPoly]) -> Result<usize> {
        let key = ideal_key(linear, quadrics)?;
        self.find_curve(&key)
            .ok_or_else(|| Error::NoMatch("curve not in the catalog".into()))
    }

    /// Plain-text export, one curve per line, used as the cache key basis.
    pub fn export_text(&self) -> String {
        let monos2 = Monomial::all_of_degree(NVARS, 2);
        let mut out = format!("{CATALOG_FORMAT}\nnodes {}\n", self.nodes.len());
        for n in &self.nodes {
            let coords: Vec<String> = n.coords.iter().map(F::to_string).collect();
            let _ = writeln!(
                out,
                "node {} src={} field={} [{}]",
                n.id,
                n.source_quadric,
                n.field,
                coords.join(",")
            );
        }
        let _ = writeln!(out, "curves {}", self.curves.len());
        for c in &self.curves {
            let lin: Vec<String> = c
                .span_linear_forms
                .iter()
                .map(|f| {
                    format!(
                        "[{}]",
                        f.linear_coeffs()
                            .iter()
                            .map(F::to_string)
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                })
                .collect();
            let quad: Vec<String> = c
                .defining_quadrics
                .iter()
                .map(|f| {
                    format!(
                        "[{}]",
                        monos2
                            .iter()
                            .map(|m| f.coefficient(m).to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                })
                .collect();
            let nodes: Vec<String> = c.node_ids.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "curve {} {} {} deg={} pa={} field={} nodes=[{}] linear=[{}] quadrics=[{}]",
                c.id,
                c.kind.label(),
                c.label(),
                c.degree,
                c.arithmetic_genus,
                c.field_of_definition,
                nodes.join(","),
                lin.join(";"),
                quad.join(";")
            );
        }
        out
    }

    /// SHA-256 of the export, in hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.export_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn catalog() -> &'static Catalog {
        static CAT: OnceLock<Catalog> = OnceLock::new();
        CAT.get_or_init(|| Catalog::build().unwrap())
    }

    fn f(n: i64) -> F {
        F::from_int(n)
    }

    fn lin(terms: &[(usize, F)]) -> MultiPoly {
        let mut c = vec![F::zero(); NVARS];
        for (v, x) in terms {
            c[*v] = x.clone();
        }
        MultiPoly::linear(&c)
    }

    #[test]
    fn family_counts_and_fields() {
        let cat = catalog();
        assert_eq!(cat.len(), 140);
        let by = |k: CurveKind, fld: Subfield| {
            cat.curves
                .iter()
                .filter(|c| c.kind == k && c.field_of_definition == fld)
                .count()
        };
        assert_eq!(by(CurveKind::Conic, Subfield::Q), 24);
        assert_eq!(by(CurveKind::Conic, Subfield::QI), 8);
        assert_eq!(by(CurveKind::GenusOneB, Subfield::QI), 12);
        assert_eq!(by(CurveKind::GenusOneAA, Subfield::QSqrt2), 24);
        assert_eq!(by(CurveKind::GenusOneAA, Subfield::K), 24);
        for (i, c) in cat.curves.iter().enumerate() {
            assert_eq!(c.id, i);
        }
        for p in 0..48 {
            assert_eq!(cat.curves[p].node_ids, vec![p]);
        }
    }

    #[test]
    fn conic_example_by_substitution() {
        // a1 = 0, b1 = c, b2 = a3, b3 = a2 makes q1..q4 all multiples of a2²+a3²−c²
        let cat = catalog();
        let linear = [
            lin(&[(a(0), f(1))]),
            lin(&[(b(0), f(1)), (C, f(-1))]),
            lin(&[(b(1), f(1)), (a(2), f(-1))]),
            lin(&[(b(2), f(1)), (a(1), f(-1))]),
        ];
        let quad = MultiPoly::diagonal_quadric(&[0, 1, 1, 0, 0, 0, -1]);
        let id = cat.locate(&linear, std::slice::from_ref(&quad)).unwrap();
        let c = &cat.curves[id];
        assert_eq!(c.kind, CurveKind::Conic);
        assert_eq!(c.field_of_definition, Subfield::Q);
        assert_eq!(c.node_ids.len(), 6);
        // substitution oracle
        let mut images: Vec<MultiPoly> = (0..NVARS).map(var).collect();
        images[a(0)] = MultiPoly::zero(NVARS);
        images[b(0)] = var(C);
        images[b(1)] = var(a(2));
        images[b(2)] = var(a(1));
        for qq in &cat.model.quadrics {
            let r = qq.compose(&images).unwrap();
            assert!(r.is_zero() || r == quad || r == quad.neg());
        }
    }

    #[test]
    fn genus_one_aa_example_by_substitution() {
        let cat = catalog();
        let r2 = F::sqrt2();
        let linear = [
            lin(&[(a(0), f(1)), (a(1), f(-1))]),
            lin(&[(b(2), f(1)), (a(0), -&r2)]),
            lin(&[(b(1), f(1)), (b(0), f(-1))]),
        ];
        let quads = [q(0), MultiPoly::diagonal_quadric(&[2, 0, 1, 0, 0, 0, -1])];
        let id = cat.locate(&linear, &quads).unwrap();
        let c = &cat.curves[id];
        assert_eq!(c.kind, CurveKind::GenusOneAA);
        assert_eq!(c.field_of_definition, Subfield::QSqrt2);
        let mut images: Vec<MultiPoly> = (0..NVARS).map(var).collect();
        images[a(1)] = var(a(0));
        images[b(1)] = var(b(0));
        images[b(2)] = var(a(0)).scale(&r2);
        let restricted: Vec<Vec<F>> = cat
            .model
            .quadrics
            .iter()
            .map(|qq| {
                let r = qq.compose(&images).unwrap();
                Monomial::all_of_degree(NVARS, 2)
                    .iter()
                    .map(|m| r.coefficient(m))
                    .collect()
            })
            .collect();
        let expected: Vec<Vec<F>> = quads
            .iter()
            .map(|qq| {
                let r = qq.compose(&images).unwrap();
                Monomial::all_of_degree(NVARS, 2)
                    .iter()
                    .map(|m| r.coefficient(m))
                    .collect()
            })
            .collect();
        assert_eq!(row_space(restricted), row_space(expected));
    }

    #[test]
    fn c_section_conics_are_over_qi() {
        let cat = catalog();
        for c in cat
            .curves
            .iter()
            .filter(|c| c.hyperplane == FamilyHyperplane::C)
        {
            assert_eq!(c.field_of_definition, Subfield::QI);
        }
    }

    #[test]
    fn incidence_regularity() {
        let cat = catalog();
        for c in &cat.curves {
            let expected = match c.kind {
                CurveKind::Exceptional => 1,
                CurveKind::Conic => 6,
                CurveKind::GenusOneB => 8,
                CurveKind::GenusOneAA => c.node_ids.len(),
            };
            assert_eq!(c.node_ids.len(), expected, "{}", c.label());
        }
        // within a hyperplane family every node meets the same number of conics
        for j in 0..3 {
            let fam: Vec<&CurveRecord> = cat
                .curves
                .iter()
                .filter(|c| c.hyperplane == FamilyHyperplane::A(j))
                .collect();
            let mut per_node = BTreeMap::new();
            for c in &fam {
                for &p in &c.node_ids {
                    *per_node.entry(p).or_insert(0) += 1;
                }
            }
            let counts: std::collections::BTreeSet<_> = per_node.values().collect();
            assert_eq!(counts.len(), 1);
        }
    }

    #[test]
    fn galois_images_stay_in_catalog() {
        let cat = catalog();
        for c in cat.curves.iter().filter(|c| !c.is_exceptional()) {
            for g in GaloisElement::ALL {
                let lin: Vec<_> = c.span_linear_forms.iter().map(|f| f.galois(g)).collect();
                let quad: Vec<_> = c.defining_quadrics.iter().map(|f| f.galois(g)).collect();
                assert!(cat.locate(&lin, &quad).is_ok());
            }
        }
    }

    #[test]
    fn export_is_deterministic() {
        let cat = catalog();
        let text = cat.export_text();
        assert!(text.starts_with(CATALOG_FORMAT));
        assert_eq!(
            text.lines().filter(|l| l.starts_with("curve ")).count(),
            140
        );
        assert_eq!(cat.hash(), Catalog::build().unwrap().hash());
        assert_eq!(cat.hash().len(), 64);
    }

    #[test]
    fn squarefree_detection() {
        // (t − 1)² t is not squarefree, t(t − 1)(t − 2) is
        let p = vec![f(0), f(1), f(-2), f(1)];
        assert_ne!(degree(&poly_gcd(&p, &derivative(&p)).unwrap()), Some(0));
        let p = vec![f(0), f(2), f(-3), f(1)];
        assert_eq!(degree(&poly_gcd(&p, &derivative(&p)).unwrap()), Some(0));
        let v: Vec<F> = (0..4).map(|t| f(t * t * t - 2)).collect();
        assert_eq!(interpolate(&v).unwrap(), vec![f(-2), f(0), f(0), f(1)]);
    }
}
