//! Automorphisms, the Galois action and their effect on the Picard lattice.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldElement as F, GaloisElement};
use crate::intersect::GramMatrix;
use crate::lattice::{hnf, kernel_basis, snf, IntMatrix, PicardLattice};
use crate::linalg::{rank_of_rows, KMatrix};
use crate::poly::{poly_substitute, MultiPoly};
use crate::surface::model::{a, b, normalize_projective, SurfaceModel, C, NVARS};
use crate::surface::nodes::find_node;
use crate::surface::Catalog;

/// Largest group the closure routines will build.
pub const CLOSURE_BOUND: usize = 100_000;

/// A permutation of `0..n`, stored as the list of images.
pub type Perm = Vec<usize>;

/// `(p ∘ q)(x) = p(q(x))`.
pub fn compose(p: &[usize], q: &[usize]) -> Perm {
    q.iter().map(|&x| p[x]).collect()
}

pub fn invert(p: &[usize]) -> Perm {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x] = i;
    }
    out
}

pub fn identity_perm(n: usize) -> Perm {
    (0..n).collect()
}

fn is_perm(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter()
        .all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

/// A linear automorphism of `P^6`, acting on points by `x ↦ M·x` and on
/// polynomials by substitution `f ↦ f(M·x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjectiveMap {
    matrix: KMatrix,
}

impl ProjectiveMap {
    /// Normalizes so that the first nonzero entry in row-major order is 1.
    pub fn new(matrix: KMatrix) -> Result<Self> {
        if matrix.rows() != NVARS || matrix.cols() != NVARS {
            return Err(Error::DimensionMismatch {
                expected: NVARS,
                found: matrix.rows(),
            });
        }
        if matrix.determinant()?.is_zero() {
            return Err(Error::Precondition("singular matrix".into()));
        }
        let flat: Vec<F> = matrix.row_vecs().concat();
        let flat = normalize_projective(&flat)?;
        let rows = flat.chunks(NVARS).map(<[F]>::to_vec).collect();
        Ok(ProjectiveMap {
            matrix: KMatrix::from_rows(rows),
        })
    }

    pub fn identity() -> Self {
        ProjectiveMap {
            matrix: KMatrix::identity(NVARS),
        }
    }

    /// The map whose matrix has `images[j]` as row `j`: the variable `x_j` is
    /// replaced by the linear form `images[j]`.
    pub fn from_images(images: &[Vec<F>]) -> Result<Self> {
        Self::new(KMatrix::from_rows(images.to_vec()))
    }

    pub fn matrix(&self) -> &KMatrix {
        &self.matrix
    }

    /// `x ↦ self(other(x))`.
    pub fn compose(&self, other: &ProjectiveMap) -> ProjectiveMap {
        Self::new(self.matrix.mul(&other.matrix)).expect("product of invertible maps")
    }

    pub fn inverse(&self) -> ProjectiveMap {
        Self::new(self.matrix.inverse().expect("invertible")).expect("invertible")
    }

    pub fn apply_point(&self, p: &[F]) -> Result<Vec<F>> {
        normalize_projective(&self.matrix.mul_vec(p))
    }

    /// `f ∘ M`.
    pub fn pull_back(&self, f: &MultiPoly) -> Result<MultiPoly> {
        poly_substitute(f, &self.matrix)
    }

    /// The equations of the image of `V(f)`: `f ∘ M⁻¹`.
    pub fn push_forward(&self, f: &MultiPoly) -> Result<MultiPoly> {
        poly_substitute(f, &self.matrix.inverse()?)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == KMatrix::identity(NVARS)
    }

    /// Whether all entries are rational, so that the map commutes with the
    /// Galois action.
    pub fn is_rational(&self) -> bool {
        self.matrix
            .row_vecs()
            .iter()
            .flatten()
            .all(|x| x.as_rational().is_some())
    }
}

fn unit_images() -> Vec<Vec<F>> {
    (0..NVARS)
        .map(|j| {
            let mut r = vec![F::zero(); NVARS];
            r[j] = F::one();
            r
        })
        .collect()
}

/// `a1 ↦ a1, a2 ↦ a2, a3 ↦ −i·c, b1 ↦ −i·b2, b2 ↦ i·b1, b3 ↦ b3, c ↦ i·a3`.
pub fn sigma() -> ProjectiveMap {
    let mut rows = vec![vec![F::zero(); NVARS]; NVARS];
    rows[a(0)][a(0)] = F::one();
    rows[a(1)][a(1)] = F::one();
    rows[a(2)][C] = -F::i();
    rows[b(0)][b(1)] = -F::i();
    rows[b(1)][b(0)] = F::i();
    rows[b(2)][b(2)] = F::one();
    rows[C][a(2)] = F::i();
    ProjectiveMap::from_images(&rows).expect("sigma is invertible")
}

/// Simultaneous permutation of the indices of `a_j` and `b_j`:
/// `a_j ↦ a_{perm[j]}`, `b_j ↦ b_{perm[j]}`.
pub fn index_permutation(perm: [usize; 3]) -> ProjectiveMap {
    let mut rows = vec![vec![F::zero(); NVARS]; NVARS];
    for j in 0..3 {
        rows[a(j)][a(perm[j])] = F::one();
        rows[b(j)][b(perm[j])] = F::one();
    }
    rows[C][C] = F::one();
    ProjectiveMap::from_images(&rows).expect("permutation matrix")
}

/// Negates one coordinate.
pub fn sign_change(var: usize) -> ProjectiveMap {
    let mut rows = unit_images();
    rows[var][var] = -F::one();
    ProjectiveMap::from_images(&rows).expect("diagonal matrix")
}

pub fn sign_changes() -> Vec<ProjectiveMap> {
    (0..NVARS).map(sign_change).collect()
}

/// The transposition `(1 2)` and the cycle `(1 2 3)` of the indices, σ, and
/// the seven sign changes.
pub fn standard_generators() -> Vec<ProjectiveMap> {
    let mut gens = vec![
        index_permutation([1, 0, 2]),
        index_permutation([1, 2, 0]),
        sigma(),
    ];
    gens.extend(sign_changes());
    gens
}

/// Whether every `q_j ∘ M` lies in the span of `q1, …, q4`.
pub fn verify_preserves_ideal(m: &ProjectiveMap, model: &SurfaceModel) -> Result<bool> {
    let monos = crate::poly::Monomial::all_of_degree(NVARS, 2);
    let coeffs = |f: &MultiPoly| monos.iter().map(|mo| f.coefficient(mo)).collect::<Vec<F>>();
    let base: Vec<Vec<F>> = model.quadrics.iter().map(coeffs).collect();
    let r = rank_of_rows(&base);
    for q in &model.quadrics {
        let mut rows = base.clone();
        rows.push(coeffs(&m.pull_back(q)?));
        if rank_of_rows(&rows) != r {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Finds `j` and `μ` with `f = μ·forms[j]`.
fn match_up_to_scalar(f: &MultiPoly, forms: &[MultiPoly]) -> Option<(usize, F)> {
    let (mono, lead) = f.terms().next()?;
    for (j, g) in forms.iter().enumerate() {
        let c = g.coefficient(mono);
        if c.is_zero() {
            continue;
        }
        let mu = lead * &c.inverse().ok()?;
        if g.scale(&mu) == *f {
            return Some((j, mu));
        }
    }
    None
}

/// The permutation of `{Q1, Q2, Q3, R1, R2, R3}` induced by `f ↦ f ∘ M⁻¹`;
/// entry `i` is the index of the image of form `i`.
pub fn quadric_set_action(m: &ProjectiveMap, model: &SurfaceModel) -> Result<Perm> {
    let mut out = Vec::with_capacity(6);
    for f in &model.rank3 {
        let img = m.push_forward(f)?;
        let (j, _) = match_up_to_scalar(&img, &model.rank3).ok_or_else(|| {
            Error::Inconsistent("image of a rank-3 quadric is not in the set".into())
        })?;
        out.push(j);
    }
    if !is_perm(&out) {
        return Err(Error::Inconsistent(
            "induced map on the rank-3 quadrics is not a bijection".into(),
        ));
    }
    Ok(out)
}

/// The forms `a1², a2², a3², −c²`.
pub fn s4_forms() -> [MultiPoly; 4] {
    let sq = |v: usize| {
        let x = MultiPoly::var(v, NVARS);
        x.mul(&x)
    };
    [sq(a(0)), sq(a(1)), sq(a(2)), sq(C).scale(&-F::one())]
}

/// The permutation of `{a1², a2², a3², −c²}` induced by `f ↦ f ∘ M⁻¹`, up
/// to a common scalar.
pub fn s4_quotient(m: &ProjectiveMap) -> Result<Perm> {
    let forms = s4_forms();
    let mut out = Vec::with_capacity(4);
    let mut common: Option<F> = None;
    for f in &forms {
        let img = m.push_forward(f)?;
        let (j, mu) = match_up_to_scalar(&img, &forms)
            .ok_or_else(|| Error::Precondition("map does not permute the four squares".into()))?;
        if common.get_or_insert_with(|| mu.clone()) != &mu {
            return Err(Error::Precondition(
                "map does not permute the four squares".into(),
            ));
        }
        out.push(j);
    }
    if !is_perm(&out) {
        return Err(Error::Precondition(
            "map does not permute the four squares".into(),
        ));
    }
    Ok(out)
}

/// Closure of a set of maps under composition. Every generator is checked
/// against the surface ideal first.
pub fn generate_group(
    generators: &[ProjectiveMap],
    model: &SurfaceModel,
) -> Result<Vec<ProjectiveMap>> {
    for g in generators {
        if !verify_preserves_ideal(g, model)? {
            return Err(Error::Precondition(
                "generator does not preserve the surface".into(),
            ));
        }
    }
    let mut elements = vec![ProjectiveMap::identity()];
    let mut seen: HashSet<ProjectiveMap> = elements.iter().cloned().collect();
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for g in generators {
            let p = elements[k].compose(g);
            if seen.insert(p.clone()) {
                if elements.len() == CLOSURE_BOUND {
                    return Err(Error::ClosureBound {
                        bound: CLOSURE_BOUND,
                    });
                }
                queue.push_back(elements.len());
                elements.push(p);
            }
        }
    }
    Ok(elements)
}

/// What a permutation of the catalog comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymmetrySource {
    Automorphism(ProjectiveMap),
    Galois(GaloisElement),
    /// A product of generators of the combined group.
    Combined,
}

/// The permutation of the catalog induced by a map or a Galois element.
///
/// Automorphisms move curves to their images `V(J ∘ M⁻¹)` and nodes to
/// `M·p`; Galois elements act on coefficients.
pub fn curve_permutation(source: &SymmetrySource, catalog: &Catalog) -> Result<Perm> {
    let inv = match source {
        SymmetrySource::Automorphism(m) => Some(m.inverse()),
        SymmetrySource::Galois(_) => None,
        SymmetrySource::Combined => {
            return Err(Error::Precondition(
                "only generators act directly on curves".into(),
            ));
        }
    };
    let mut perm = Vec::with_capacity(catalog.len());
    for c in &catalog.curves {
        let image = if c.is_exceptional() {
            let p = &catalog.nodes[c.node_ids[0]].coords;
            let q = match source {
                SymmetrySource::Automorphism(m) => m.apply_point(p)?,
                SymmetrySource::Galois(g) => {
                    normalize_projective(&p.iter().map(|x| g.apply(x)).collect::<Vec<_>>())?
                }
                SymmetrySource::Combined => unreachable!(),
            };
            let n = find_node(&catalog.nodes, &q)
                .ok_or_else(|| Error::NoMatch(format!("image of node {}", c.id)))?;
            catalog.exceptional_of(n)
        } else {
            let map = |f: &MultiPoly| -> Result<MultiPoly> {
                match (source, &inv) {
                    (SymmetrySource::Automorphism(_), Some(mi)) => mi.pull_back(f),
                    (SymmetrySource::Galois(g), _) => Ok(f.galois(*g)),
                    _ => unreachable!(),
                }
            };
            let lin = c
                .span_linear_forms
                .iter()
                .map(map)
                .collect::<Result<Vec<_>>>()?;
            let quad = c
                .defining_quadrics
                .iter()
                .map(map)
                .collect::<Result<Vec<_>>>()?;
            catalog
                .locate(&lin, &quad)
                .map_err(|_| Error::NoMatch(c.label()))?
        };
        let target = &catalog.curves[image];
        if target.kind != c.kind || target.degree != c.degree {
            return Err(Error::Inconsistent(format!(
                "{} is sent to a curve of another type",
                c.label()
            )));
        }
        perm.push(image);
    }
    if !is_perm(&perm) {
        return Err(Error::Inconsistent(
            "induced map on the catalog is not a bijection".into(),
        ));
    }
    Ok(perm)
}

/// Matrix on the lattice basis, acting on row vectors, of the map sending
/// class `j` to class `perm[j]`.
pub fn matrix_on_lattice(perm: &[usize], pic: &PicardLattice) -> Result<IntMatrix> {
    let n = pic.coords.rows();
    let r = pic.rank();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let mut m = IntMatrix::zeros(r, r);
    for i in 0..r {
        for (j, t) in pic.basis_expr.row(i).iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            for (k, c) in pic.coords.row(perm[j]).iter().enumerate() {
                if !c.is_zero() {
                    m[(i, k)] += t * c;
                }
            }
        }
    }
    if pic.coords.mul(&m) != permute_rows(&pic.coords, perm) {
        return Err(Error::Inconsistent(
            "permutation does not respect the relations".into(),
        ));
    }
    if m.mul(&pic.gram64).mul(&m.transpose()) != pic.gram64 {
        return Err(Error::Inconsistent(
            "permutation does not preserve the pairing".into(),
        ));
    }
    Ok(m)
}

fn permute_rows(a: &IntMatrix, perm: &[usize]) -> IntMatrix {
    IntMatrix::with_width(
        &perm.iter().map(|&p| a.row(p).to_vec()).collect::<Vec<_>>(),
        a.cols(),
    )
}

/// Whether the permutation preserves every entry of the intersection matrix.
pub fn preserves_gram(perm: &[usize], gram: &GramMatrix) -> bool {
    let n = gram.size();
    (0..n).all(|i| (0..n).all(|j| gram.entries[perm[i]][perm[j]] == gram.entries[i][j]))
}

/// A permutation of the catalog together with its matrix on the lattice.
#[derive(Clone, Debug)]
pub struct PermutationAction {
    pub perm: Perm,
    pub matrix_on_l: IntMatrix,
    pub source: SymmetrySource,
}

impl PermutationAction {
    pub fn new(
        perm: Perm,
        source: SymmetrySource,
        pic: &PicardLattice,
        gram: &GramMatrix,
    ) -> Result<Self> {
        if !preserves_gram(&perm, gram) {
            return Err(Error::Inconsistent(
                "permutation does not preserve the intersection matrix".into(),
            ));
        }
        let matrix_on_l = matrix_on_lattice(&perm, pic)?;
        Ok(PermutationAction {
            perm,
            matrix_on_l,
            source,
        })
    }

    pub fn from_source(
        source: SymmetrySource,
        catalog: &Catalog,
        pic: &PicardLattice,
        gram: &GramMatrix,
    ) -> Result<Self> {
        let perm = curve_permutation(&source, catalog)?;
        Self::new(perm, source, pic, gram)
    }

    pub fn fixes(&self, v: &[BigInt]) -> bool {
        row_times(v, &self.matrix_on_l) == v
    }
}

fn row_times(v: &[BigInt], m: &IntMatrix) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); m.cols()];
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (o, y) in out.iter_mut().zip(m.row(i)) {
            *o += x * y;
        }
    }
    out
}

/// Closure of a set of permutations, in breadth-first order from the
/// identity.
pub fn permutation_closure(generators: &[Perm], degree: usize) -> Result<Vec<Perm>> {
    let mut elements = vec![identity_perm(degree)];
    let mut seen: HashSet<Perm> = elements.iter().cloned().collect();
    let mut k = 0;
    while k < elements.len() {
        for g in generators {
            let p = compose(&elements[k], g);
            if seen.insert(p.clone()) {
                if elements.len() == CLOSURE_BOUND {
                    return Err(Error::ClosureBound {
                        bound: CLOSURE_BOUND,
                    });
                }
                elements.push(p);
            }
        }
        k += 1;
    }
    Ok(elements)
}

/// The group generated by the automorphisms and the Galois group, as
/// permutations of the catalog.
#[derive(Clone, Debug)]
pub struct CombinedGroup {
    pub generators: Vec<PermutationAction>,
    pub elements: Vec<Perm>,
}

impl CombinedGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Builds the combined group from the standard automorphism generators and
/// the two generators of the Galois group.
pub fn combined_group(
    catalog: &Catalog,
    pic: &PicardLattice,
    gram: &GramMatrix,
) -> Result<CombinedGroup> {
    let mut generators = Vec::new();
    for m in standard_generators() {
        generators.push(PermutationAction::from_source(
            SymmetrySource::Automorphism(m),
            catalog,
            pic,
            gram,
        )?);
    }
    for g in [GaloisElement::CONJ_I, GaloisElement::CONJ_SQRT2] {
        generators.push(PermutationAction::from_source(
            SymmetrySource::Galois(g),
            catalog,
            pic,
            gram,
        )?);
    }
    let perms: Vec<Perm> = generators.iter().map(|g| g.perm.clone()).collect();
    let elements = permutation_closure(&perms, catalog.len())?;
    Ok(CombinedGroup {
        generators,
        elements,
    })
}

/// A Sylow 2-subgroup with a generating set.
#[derive(Clone, Debug)]
pub struct SylowSubgroup {
    pub elements: Vec<Perm>,
    pub generators: Vec<Perm>,
    pub order: usize,
}

fn two_part(n: usize) -> usize {
    1 << n.trailing_zeros()
}

/// Grows a 2-subgroup one index-2 extension at a time: any `g` normalizing
/// `H` with `g ∉ H`, `g² ∈ H` gives `⟨H, g⟩ = H ∪ gH`. Candidates are
/// scanned in sorted order, so the result is deterministic.
pub fn sylow2(group: &[Perm]) -> Result<SylowSubgroup> {
    let degree = group.first().map_or(0, Vec::len);
    let target = two_part(group.len());
    let mut sorted = group.to_vec();
    sorted.sort();
    let mut elements = vec![identity_perm(degree)];
    let mut members: HashSet<Perm> = elements.iter().cloned().collect();
    let mut generators: Vec<Perm> = Vec::new();
    while elements.len() < target {
        let g = sorted
            .iter()
            .find(|g| {
                if members.contains(*g) || !members.contains(&compose(g, g)) {
                    return false;
                }
                let gi = invert(g);
                generators
                    .iter()
                    .all(|h| members.contains(&compose(&compose(g, h), &gi)))
            })
            .ok_or_else(|| Error::Inconsistent("no element extends the 2-subgroup".into()))?
            .clone();
        let coset: Vec<Perm> = elements.iter().map(|h| compose(&g, h)).collect();
        for c in coset {
            members.insert(c.clone());
            elements.push(c);
        }
        generators.push(g);
    }
    let order = elements.len();
    Ok(SylowSubgroup {
        elements,
        generators,
        order,
    })
}

/// Basis of `{x ∈ F2^n : x·M ≡ x for every M}` for matrices acting on row
/// vectors.
pub fn f2_fixed_space(matrices: &[IntMatrix], dim: usize) -> Result<Vec<Vec<u8>>> {
    let two = BigInt::from(2);
    let width = matrices.len() * dim;
    let mut rows: Vec<(Vec<u8>, Vec<u8>)> = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut left = vec![0u8; width];
        for (k, m) in matrices.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.rows(),
                });
            }
            for j in 0..dim {
                let mut v = m[(i, j)].clone();
                if i == j {
                    v -= 1;
                }
                left[k * dim + j] = u8::from(!(v % &two).is_zero());
            }
        }
        let mut right = vec![0u8; dim];
        right[i] = 1;
        rows.push((left, right));
    }
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..dim).find(|&i| rows[i].0[c] == 1) else {
            continue;
        };
        rows.swap(r, p);
        let (pl, pr) = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0[c] == 1 {
                row.0.iter_mut().zip(&pl).for_each(|(x, y)| *x ^= y);
                row.1.iter_mut().zip(&pr).for_each(|(x, y)| *x ^= y);
            }
        }
        r += 1;
    }
    Ok(rows.into_iter().skip(r).map(|(_, right)| right).collect())
}

/// A finite group with a multiplication table acting on `Z^n` through
/// matrices on column vectors: `matrices[g]·matrices[h] = matrices[table[g][h]]`.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub table: Vec<Vec<usize>>,
    pub matrices: Vec<IntMatrix>,
    pub identity: usize,
}

impl GroupAction {
    pub fn new(table: Vec<Vec<usize>>, matrices: Vec<IntMatrix>) -> Result<Self> {
        let n = table.len();
        if n == 0
            || matrices.len() != n
            || table
                .iter()
                .any(|r| r.len() != n || r.iter().any(|&x| x >= n))
        {
            return Err(Error::NotAGroup);
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(Error::NotAGroup)?;
        for g in 0..n {
            if !is_perm(&table[g]) {
                return Err(Error::NotAGroup);
            }
            for h in 0..n {
                for k in 0..n {
                    if table[table[g][h]][k] != table[g][table[h][k]] {
                        return Err(Error::NotAGroup);
                    }
                }
                if matrices[g].mul(&matrices[h]) != matrices[table[g][h]] {
                    return Err(Error::NotAGroup);
                }
            }
        }
        let dim = matrices[0].rows();
        if matrices.iter().any(|m| m.rows() != dim || m.cols() != dim)
            || matrices[identity] != IntMatrix::identity(dim)
        {
            return Err(Error::NotAGroup);
        }
        Ok(GroupAction {
            table,
            matrices,
            identity,
        })
    }

    /// The tautological action of a finite matrix group; the table is read
    /// off the products.
    pub fn from_matrix_group(matrices: Vec<IntMatrix>) -> Result<Self> {
        let index: HashMap<&IntMatrix, usize> =
            matrices.iter().enumerate().map(|(i, m)| (m, i)).collect();
        if index.len() != matrices.len() {
            return Err(Error::NotAGroup);
        }
        let mut table = Vec::with_capacity(matrices.len());
        for g in &matrices {
            let row = matrices
                .iter()
                .map(|h| index.get(&g.mul(h)).copied().ok_or(Error::NotAGroup))
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        Self::new(table, matrices)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].rows()
    }
}

/// Invariant factors of `H^1(Γ, Z^n)`: entries greater than one for the
/// torsion part and zeros for free summands. The trivial group gives an
/// empty list.
pub fn h1_cohomology(action: &GroupAction) -> Result<Vec<BigInt>> {
    let (ord, n) = (action.order(), action.dim());
    let unknowns = ord * n;
    // column block (g, h): f(gh) − f(g) − A_g f(h)
    let mut eq = IntMatrix::zeros(unknowns, ord * ord * n);
    for g in 0..ord {
        for h in 0..ord {
            let gh = action.table[g][h];
            let col0 = (g * ord + h) * n;
            let ag = &action.matrices[g];
            for t in 0..n {
                eq[(gh * n + t, col0 + t)] += 1;
                eq[(g * n + t, col0 + t)] -= 1;
                for s in 0..n {
                    let v = &ag[(t, s)];
                    if !v.is_zero() {
                        eq[(h * n + s, col0 + t)] -= v;
                    }
                }
            }
        }
    }
    let z1 = kernel_basis(&eq);
    let k = z1.rows();
    let herm = hnf(&z1);
    let mut relations = Vec::with_capacity(n);
    for s in 0..n {
        let mut rest = vec![BigInt::zero(); unknowns];
        for g in 0..ord {
            for t in 0..n {
                let mut v = action.matrices[g][(t, s)].clone();
                if t == s {
                    v -= 1;
                }
                rest[g * n + t] = v;
            }
        }
        let mut d = vec![BigInt::zero(); herm.pivots.len()];
        for (i, &pc) in herm.pivots.iter().enumerate() {
            if rest[pc].is_zero() {
                continue;
            }
            let p = &herm.h[(i, pc)];
            if !(&rest[pc] % p).is_zero() {
                return Err(Error::Inconsistent(
                    "coboundary is not an integral cocycle".into(),
                ));
            }
            let q = &rest[pc] / p;
            for c in pc..unknowns {
                let t = &q * &herm.h[(i, c)];
                rest[c] -= t;
            }
            d[i] = q;
        }
        if rest.iter().any(|x| !x.is_zero()) {
            return Err(Error::Inconsistent("coboundary is not a cocycle".into()));
        }
        let mut c = vec![BigInt::zero(); k];
        for (i, di) in d.iter().enumerate() {
            if di.is_zero() {
                continue;
            }
            for (cj, u) in c.iter_mut().zip(herm.u.row(i)) {
                *cj += di * u;
            }
        }
        relations.push(c);
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let rel = IntMatrix::with_width(&relations, k);
    let s = snf(&rel);
    let mut out: Vec<BigInt> = s
        .factors
        .iter()
        .filter(|f| !f.is_zero() && !f.is_one())
        .cloned()
        .collect();
    out.extend(std::iter::repeat_n(BigInt::zero(), k - s.rank()));
    Ok(out)
}

/// The Galois group acting on the lattice, as column-vector matrices.
pub fn galois_action(
    catalog: &Catalog,
    pic: &PicardLattice,
    gram: &GramMatrix,
) -> Result<GroupAction> {
    let els = GaloisElement::ALL;
    let mut matrices = Vec::with_capacity(4);
    for g in els {
        let pa = PermutationAction::from_source(SymmetrySource::Galois(g), catalog, pic, gram)?;
        matrices.push(pa.matrix_on_l.transpose());
    }
    let table = els
        .iter()
        .map(|g| {
            els.iter()
                .map(|h| els.iter().position(|x| *x == g.compose(h)).expect("closed"))
                .collect()
        })
        .collect();
    GroupAction::new(table, matrices)
}

/// Reduction of an integer vector modulo 2.
pub fn mod2(v: &[BigInt]) -> Vec<u8> {
    let two = BigInt::from(2);
    v.iter().map(|x| u8::from(!(x % &two).is_zero())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::model::build_surface_model;
    use proptest::prelude::*;

    fn model() -> SurfaceModel {
        build_surface_model().unwrap()
    }

    #[test]
    fn sigma_preserves_the_surface() {
        assert!(verify_preserves_ideal(&sigma(), &model()).unwrap());
        for s in sign_changes() {
            assert!(verify_preserves_ideal(&s, &model()).unwrap());
        }
    }

    #[test]
    fn swapping_a1_and_b1_breaks_the_surface() {
        let mut rows = unit_images();
        rows.swap(a(0), b(0));
        let m = ProjectiveMap::from_images(&rows).unwrap();
        // fixes q1, q2, q3 but sends q4 to b1² + a2² + a3² − c²
        assert!(!verify_preserves_ideal(&m, &model()).unwrap());
    }

    #[test]
    fn sigma_is_an_involution() {
        let s = sigma();
        assert!(s.compose(&s).is_identity());
    }

    #[test]
    fn sigma_on_rank3_quadrics() {
        // direct substitution: q1∘σ = a2² + a3² − b2² = r2, q2∘σ = r1
        let m = model();
        let s = sigma();
        assert_eq!(s.pull_back(&m.rank3[0]).unwrap(), m.rank3[4]);
        assert_eq!(s.pull_back(&m.rank3[1]).unwrap(), m.rank3[3]);
        assert_eq!(s.pull_back(&m.rank3[2]).unwrap(), m.rank3[2]);
        assert_eq!(s.pull_back(&m.rank3[5]).unwrap(), m.rank3[5]);
        assert_eq!(quadric_set_action(&s, &m).unwrap(), vec![4, 3, 2, 1, 0, 5]);
    }

    #[test]
    fn transposition_on_rank3_quadrics() {
        let t = index_permutation([1, 0, 2]);
        assert_eq!(
            quadric_set_action(&t, &model()).unwrap(),
            vec![1, 0, 2, 4, 3, 5]
        );
        assert_eq!(
            quadric_set_action(&ProjectiveMap::identity(), &model()).unwrap(),
            identity_perm(6)
        );
    }

    #[test]
    fn s4_images() {
        assert_eq!(s4_quotient(&sigma()).unwrap(), vec![0, 1, 3, 2]);
        for s in sign_changes() {
            assert_eq!(s4_quotient(&s).unwrap(), identity_perm(4));
        }
        assert_eq!(s4_quotient(&index_permutation([1, 2, 0])).unwrap()[3], 3);
    }

    #[test]
    fn small_groups() {
        let m = model();
        assert_eq!(
            generate_group(&[ProjectiveMap::identity()], &m)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(generate_group(&sign_changes(), &m).unwrap().len(), 64);
        let s3 = generate_group(
            &[index_permutation([1, 0, 2]), index_permutation([1, 2, 0])],
            &m,
        )
        .unwrap();
        assert_eq!(s3.len(), 6);
    }

    #[test]
    fn full_group_and_quotient() {
        let m = model();
        let g = generate_group(&standard_generators(), &m).unwrap();
        assert_eq!(g.len(), 1536);
        let mut images = HashSet::new();
        let mut kernel = 0;
        let mut orbit_of_q1 = HashSet::new();
        for x in &g {
            let p = s4_quotient(x).unwrap();
            if p == identity_perm(4) {
                kernel += 1;
                assert!(x.matrix().row_vecs().iter().enumerate().all(|(i, r)| r
                    .iter()
                    .enumerate()
                    .all(|(j, v)| if i == j {
                        v.as_rational().is_some()
                    } else {
                        v.is_zero()
                    })));
            }
            images.insert(p);
            orbit_of_q1.insert(quadric_set_action(x, &m).unwrap()[0]);
        }
        assert_eq!(images.len(), 24);
        assert_eq!(kernel, 64);
        assert_eq!(orbit_of_q1.len(), 6);
    }

    #[test]
    fn s4_quotient_is_a_homomorphism() {
        let gens = standard_generators();
        for x in &gens {
            for y in &gens {
                let lhs = s4_quotient(&x.compose(y)).unwrap();
                let rhs = compose(&s4_quotient(x).unwrap(), &s4_quotient(y).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn perm_helpers() {
        let p = vec![1, 2, 0];
        assert_eq!(compose(&p, &invert(&p)), identity_perm(3));
        assert!(!is_perm(&[0, 0, 1]));
    }

    #[test]
    fn sylow_of_s3() {
        let g = permutation_closure(&[vec![1, 0, 2], vec![1, 2, 0]], 3).unwrap();
        assert_eq!(g.len(), 6);
        let s = sylow2(&g).unwrap();
        assert_eq!(s.order, 2);
        let t = sylow2(&[identity_perm(4)]).unwrap();
        assert_eq!(t.order, 1);
    }

    #[test]
    fn sylow_of_s4_is_dihedral() {
        let g = permutation_closure(&[vec![1, 0, 2, 3], vec![1, 2, 3, 0]], 4).unwrap();
        let s = sylow2(&g).unwrap();
        assert_eq!(s.order, 8);
        let set: HashSet<Perm> = s.elements.iter().cloned().collect();
        for x in &s.elements {
            for y in &s.elements {
                assert!(set.contains(&compose(x, y)));
            }
        }
    }

    #[test]
    fn f2_fixed_space_examples() {
        assert_eq!(f2_fixed_space(&[], 5).unwrap().len(), 5);
        // swap of two coordinates fixes (1,1,0) and (0,0,1)
        let m = IntMatrix::from_i64(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]);
        let fixed = f2_fixed_space(&[m], 3).unwrap();
        assert_eq!(fixed.len(), 2);
        // -1 is the identity modulo 2
        let neg = IntMatrix::from_i64(&[vec![-1, 0], vec![0, -1]]);
        assert_eq!(f2_fixed_space(&[neg], 2).unwrap().len(), 2);
    }

    fn cyclic_two(sign: i64) -> GroupAction {
        let mats = vec![IntMatrix::identity(1), IntMatrix::from_i64(&[vec![sign]])];
        GroupAction::new(vec![vec![0, 1], vec![1, 0]], mats).unwrap()
    }

    #[test]
    fn h1_of_z2_on_z() {
        assert!(h1_cohomology(&cyclic_two(1)).unwrap().is_empty());
        assert_eq!(
            h1_cohomology(&cyclic_two(-1)).unwrap(),
            vec![BigInt::from(2)]
        );
    }

    #[test]
    fn h1_of_swap_module() {
        // Z/2 swapping two basis vectors: the permutation module is induced,
        // so H^1 vanishes
        let mats = vec![
            IntMatrix::identity(2),
            IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]),
        ];
        let act = GroupAction::from_matrix_group(mats).unwrap();
        assert!(h1_cohomology(&act).unwrap().is_empty());
    }

    #[test]
    fn not_a_group() {
        let mats = vec![IntMatrix::identity(1), IntMatrix::from_i64(&[vec![2]])];
        assert_eq!(
            GroupAction::from_matrix_group(mats).unwrap_err(),
            Error::NotAGroup
        );
        let mats = vec![IntMatrix::identity(1), IntMatrix::identity(1)];
        assert_eq!(
            GroupAction::new(vec![vec![0, 1], vec![1, 1]], mats).unwrap_err(),
            Error::NotAGroup
        );
    }

    fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
        (0..n)
            .map(|g| (0..n).map(|h| (g + h) % n).collect())
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn h1_trivial_module_vanishes(order in 1usize..6, dim in 1usize..4) {
            let mats = vec![IntMatrix::identity(dim); order];
            let act = GroupAction::new(cyclic_table(order), mats).unwrap();
            prop_assert!(h1_cohomology(&act).unwrap().is_empty());
        }
    }
}
