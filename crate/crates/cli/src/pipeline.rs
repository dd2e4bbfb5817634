//! The stages of the verification pipeline: what each one computes, how its
//! artifact is stored, and the claims checked against it.

use std::cell::OnceCell;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use cuboid_core::classify::{
    CandidateSet, CanonicalComplement, ClassQuery, CurveClasses, EnumerationOptions,
};
use cuboid_core::field::{FieldElement, GaloisElement, Subfield};
use cuboid_core::intersect::{
    canonical_class_vector, gram_matrix, hyperplane_class, GramMatrix, GRAM_FORMAT,
};
use cuboid_core::lattice::{build_picard_lattice, is_even, is_primitive, signature, IntMatrix};
use cuboid_core::poly::MultiPoly;
use cuboid_core::surface::invariants;
use cuboid_core::surface::model::{a, C, NVARS, RANK3_LABELS, VAR_NAMES};
use cuboid_core::surface::{hyperplane_section_decomposition, Catalog, CurveKind};
use cuboid_core::symmetry::{
    curve_permutation, f2_fixed_space, galois_action, generate_group, h1_cohomology, identity_perm,
    index_permutation, mod2, permutation_closure, preserves_gram, quadric_set_action, s4_quotient,
    sigma, sign_change, sylow2, GroupAction, Perm, PermutationAction, ProjectiveMap,
    SymmetrySource,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::artifacts::*;
use crate::error::CliError;
use crate::report::{Claim, VerificationReport};

/// Claims of one stage plus informational lines.
#[derive(Clone, Debug, Default)]
pub struct StageOutput {
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
}

/// The queries run by the classification stage.
pub const QUERIES: [(i64, i64); 5] = [(0, 2), (0, -2), (2, -4), (4, -6), (4, -4)];

/// Candidate sets up to this size are written out in full.
pub const LISTED_CANDIDATES: usize = 1000;

/// Lazily computed or loaded artifacts of one workspace.
pub struct Pipeline {
    ws: Workspace,
    build: bool,
    catalog: OnceCell<Catalog>,
    hash: OnceCell<String>,
    catalog_checked: OnceCell<()>,
    gram: OnceCell<GramMatrix>,
    lattice: OnceCell<LatticeArtifact>,
    group: OnceCell<GroupArtifact>,
    fixed: OnceCell<FixedSpaceArtifact>,
    cohomology: OnceCell<CohomologyArtifact>,
    classify: OnceCell<ClassifyArtifact>,
}

fn cache<T>(cell: &OnceCell<T>, v: T) -> &T {
    let _ = cell.set(v);
    cell.get().expect("just set")
}

impl Pipeline {
    pub fn new(ws: Workspace, build: bool) -> Self {
        Pipeline {
            ws,
            build,
            catalog: OnceCell::new(),
            hash: OnceCell::new(),
            catalog_checked: OnceCell::new(),
            gram: OnceCell::new(),
            lattice: OnceCell::new(),
            group: OnceCell::new(),
            fixed: OnceCell::new(),
            cohomology: OnceCell::new(),
            classify: OnceCell::new(),
        }
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    /// The catalog, rebuilt in memory.
    pub fn catalog(&self) -> Result<&Catalog, CliError> {
        if let Some(c) = self.catalog.get() {
            return Ok(c);
        }
        Ok(cache(&self.catalog, Catalog::build()?))
    }

    pub fn catalog_hash(&self) -> Result<&str, CliError> {
        if let Some(h) = self.hash.get() {
            return Ok(h);
        }
        let h = self.catalog()?.hash();
        Ok(cache(&self.hash, h))
    }

    /// The catalog, after checking that the stored export is the current
    /// one.
    fn upstream_catalog(&self) -> Result<&Catalog, CliError> {
        let cat = self.catalog()?;
        if self.catalog_checked.get().is_some() {
            return Ok(cat);
        }
        if !self.ws.exists(Stage::Catalog) && self.build {
            self.ws.write(Stage::Catalog, &cat.export_text())?;
        }
        let stored = self.ws.read(Stage::Catalog)?;
        if stored != cat.export_text() {
            return Err(CliError::CacheMismatch {
                artifact: Stage::Catalog.name().into(),
                reason: "stored catalog differs from the computed one".into(),
            });
        }
        let _ = self.catalog_checked.set(());
        Ok(cat)
    }

    /// Loads the artifact of `stage`, or computes and stores it when
    /// building is allowed.
    fn upstream<'a, T>(
        &'a self,
        cell: &'a OnceCell<T>,
        stage: Stage,
        load: impl FnOnce(&str, &str) -> Result<T, CliError>,
        compute: impl FnOnce() -> Result<(T, String), CliError>,
    ) -> Result<&'a T, CliError> {
        if let Some(v) = cell.get() {
            return Ok(v);
        }
        self.upstream_catalog()?;
        let v = if self.ws.exists(stage) {
            load(&self.ws.read(stage)?, self.catalog_hash()?)?
        } else if self.build {
            let (v, text) = compute()?;
            self.ws.write(stage, &text)?;
            v
        } else {
            return Err(CliError::MissingCache(stage.name().into()));
        };
        Ok(cache(cell, v))
    }

    pub fn gram(&self) -> Result<&GramMatrix, CliError> {
        self.upstream(&self.gram, Stage::Gram, load_gram, || {
            let g = self.compute_gram()?.0;
            let t = g.to_text();
            Ok((g, t))
        })
    }

    pub fn lattice(&self) -> Result<&LatticeArtifact, CliError> {
        self.upstream(
            &self.lattice,
            Stage::Lattice,
            LatticeArtifact::from_text,
            || {
                let l = self.compute_lattice()?;
                let t = l.to_text(self.catalog_hash()?);
                Ok((l, t))
            },
        )
    }

    pub fn group(&self) -> Result<&GroupArtifact, CliError> {
        self.upstream(&self.group, Stage::Group, GroupArtifact::from_text, || {
            let g = self.compute_group()?;
            let t = g.to_text(self.catalog_hash()?);
            Ok((g, t))
        })
    }

    pub fn fixed_space(&self) -> Result<&FixedSpaceArtifact, CliError> {
        self.upstream(
            &self.fixed,
            Stage::FixedSpace,
            FixedSpaceArtifact::from_text,
            || {
                let f = self.compute_fixed_space()?;
                let t = f.to_text(self.catalog_hash()?);
                Ok((f, t))
            },
        )
    }

    pub fn cohomology(&self) -> Result<&CohomologyArtifact, CliError> {
        self.upstream(
            &self.cohomology,
            Stage::Cohomology,
            CohomologyArtifact::from_text,
            || {
                let c = self.compute_cohomology()?;
                let t = c.to_text(self.catalog_hash()?);
                Ok((c, t))
            },
        )
    }

    pub fn classification(&self) -> Result<&ClassifyArtifact, CliError> {
        self.upstream(
            &self.classify,
            Stage::Classify,
            ClassifyArtifact::from_text,
            || {
                let c = self.compute_classify()?;
                let t = c.to_text(self.catalog_hash()?);
                Ok((c, t))
            },
        )
    }

    /// Recomputes `stage` from its inputs, stores it and checks its claims.
    pub fn run_stage(&self, stage: Stage) -> Result<StageOutput, CliError> {
        let hash = self.catalog_hash()?.to_string();
        let mut notes = Vec::new();
        match stage {
            Stage::Catalog => {
                let cat = self.catalog()?;
                self.ws.write(Stage::Catalog, &cat.export_text())?;
                let _ = self.catalog_checked.set(());
                notes.push(format!("catalog {hash}"));
            }
            Stage::Gram => {
                self.upstream_catalog()?;
                let (g, tangential) = self.compute_gram()?;
                self.ws.write(stage, &g.to_text())?;
                notes.push(tangential_note(&tangential));
                let _ = self.gram.set(g);
            }
            Stage::Lattice => {
                let l = self.compute_lattice()?;
                self.ws.write(stage, &l.to_text(&hash))?;
                let _ = self.lattice.set(l);
            }
            Stage::Group => {
                let g = self.compute_group()?;
                self.ws.write(stage, &g.to_text(&hash))?;
                let _ = self.group.set(g);
            }
            Stage::FixedSpace => {
                let f = self.compute_fixed_space()?;
                self.ws.write(stage, &f.to_text(&hash))?;
                let _ = self.fixed.set(f);
            }
            Stage::Cohomology => {
                let c = self.compute_cohomology()?;
                self.ws.write(stage, &c.to_text(&hash))?;
                let _ = self.cohomology.set(c);
            }
            Stage::Classify => {
                let c = self.compute_classify()?;
                self.ws.write(stage, &c.to_text(&hash))?;
                let _ = self.classify.set(c);
            }
        }
        let mut out = self.stage_claims(stage)?;
        notes.append(&mut out.notes);
        out.notes = notes;
        Ok(out)
    }

    /// Checks every stage against its stored artifact and writes the
    /// report in both formats.
    pub fn verify_all(&self) -> Result<(VerificationReport, Vec<String>), CliError> {
        let mut claims = Vec::new();
        let mut notes = Vec::new();
        for stage in Stage::ALL {
            let mut out = self.stage_claims(stage)?;
            claims.append(&mut out.claims);
            notes.append(&mut out.notes);
        }
        let report = VerificationReport::new(self.catalog_hash()?, claims)?;
        self.ws.write_file("report.txt", &report.to_text())?;
        self.ws.write_file("report.json", &report.to_json())?;
        Ok((report, notes))
    }

    /// Claims of `stage`, read from stored artifacts.
    pub fn stage_claims(&self, stage: Stage) -> Result<StageOutput, CliError> {
        match stage {
            Stage::Catalog => self.catalog_claims(),
            Stage::Gram => self.gram_claims(),
            Stage::Lattice => self.lattice_claims(),
            Stage::Group => self.group_claims(),
            Stage::FixedSpace => self.fixed_space_claims(),
            Stage::Cohomology => self.cohomology_claims(),
            Stage::Classify => self.classify_claims(),
        }
    }

    fn compute_gram(&self) -> Result<(GramMatrix, Vec<(usize, usize, usize)>), CliError> {
        let run = gram_matrix(self.catalog()?)?;
        let t = run.tangential_pairs();
        Ok((run.gram, t))
    }

    fn compute_lattice(&self) -> Result<LatticeArtifact, CliError> {
        let cat = self.upstream_catalog()?;
        let gram = self.gram()?;
        let pic = build_picard_lattice(&IntMatrix::from_i64(&gram.entries), 64)?;
        let k_catalog = canonical_class_vector(cat, gram)?;
        let k = pic.to_basis(&k_catalog);
        Ok(LatticeArtifact { pic, k_catalog, k })
    }

    fn compute_group(&self) -> Result<GroupArtifact, CliError> {
        let cat = self.upstream_catalog()?;
        let model = &cat.model;
        let elements = generate_group(
            &labelled_generators()
                .into_iter()
                .map(|x| x.1)
                .collect::<Vec<_>>(),
            model,
        )?;
        let mut images = HashSet::new();
        let mut kernel = 0;
        let mut kernel_sign_changes = true;
        let mut orbit = HashSet::new();
        for g in &elements {
            let p = s4_quotient(g)?;
            if p == identity_perm(4) {
                kernel += 1;
                kernel_sign_changes &= is_sign_change(g);
            }
            images.insert(p);
            orbit.insert(quadric_set_action(g, model)?[0]);
        }
        let mut generators = Vec::new();
        for (label, m) in labelled_generators() {
            generators.push((
                label,
                curve_permutation(&SymmetrySource::Automorphism(m), cat)?,
            ));
        }
        let automorphism_perms: Vec<Perm> = generators.iter().map(|g| g.1.clone()).collect();
        let image = permutation_closure(&automorphism_perms, cat.len())?.len();
        for (label, g) in [
            ("galois-i", GaloisElement::CONJ_I),
            ("galois-sqrt2", GaloisElement::CONJ_SQRT2),
        ] {
            generators.push((
                label.to_string(),
                curve_permutation(&SymmetrySource::Galois(g), cat)?,
            ));
        }
        let all: Vec<Perm> = generators.iter().map(|g| g.1.clone()).collect();
        let combined = permutation_closure(&all, cat.len())?.len();
        Ok(GroupArtifact {
            order: elements.len(),
            s4_images: images.len(),
            s4_kernel: kernel,
            kernel_sign_changes,
            quadric_orbit: orbit.len(),
            sigma_quadrics: quadric_set_action(&sigma(), model)?,
            automorphism_image: image,
            combined_order: combined,
            generators,
        })
    }

    fn compute_fixed_space(&self) -> Result<FixedSpaceArtifact, CliError> {
        let lat = self.lattice()?;
        let gram = self.gram()?;
        let group = self.group()?;
        let perms: Vec<Perm> = group.generators.iter().map(|g| g.1.clone()).collect();
        let elements = permutation_closure(&perms, gram.size())?;
        let sylow = sylow2(&elements)?;
        let mut matrices = Vec::with_capacity(sylow.generators.len());
        for p in &sylow.generators {
            let act = PermutationAction::new(p.clone(), SymmetrySource::Combined, &lat.pic, gram)?;
            if !act.fixes(&lat.k) {
                return Err(cuboid_core::Error::Inconsistent(
                    "a symmetry moves the canonical class".into(),
                )
                .into());
            }
            matrices.push(act.matrix_on_l);
        }
        let basis = f2_fixed_space(&matrices, lat.pic.rank())?;
        Ok(FixedSpaceArtifact {
            combined_order: elements.len(),
            sylow_order: sylow.order,
            sylow_generators: sylow.generators.len(),
            basis,
            k_mod2: mod2(&lat.k),
        })
    }

    fn compute_cohomology(&self) -> Result<CohomologyArtifact, CliError> {
        let cat = self.upstream_catalog()?;
        let lat = self.lattice()?;
        let action = galois_action(cat, &lat.pic, self.gram()?)?;
        Ok(CohomologyArtifact {
            group_order: action.order(),
            factors: h1_cohomology(&action)?,
        })
    }

    fn compute_classify(&self) -> Result<ClassifyArtifact, CliError> {
        let lat = self.lattice()?;
        let options = EnumerationOptions::default();
        let comp = CanonicalComplement::new(&lat.pic, &lat.k, options)?;
        let curves = CurveClasses::new(&lat.pic)?;
        let mut sets = Vec::new();
        for (d, n) in QUERIES {
            let mut c = cuboid_core::classify::enumerate_classes(
                ClassQuery::new(d, n),
                &lat.pic,
                &comp,
                &curves,
                options,
            )?;
            if c.count > LISTED_CANDIDATES {
                c.vectors = None;
            }
            sets.push(c);
        }
        Ok(ClassifyArtifact { sets })
    }

    fn catalog_claims(&self) -> Result<StageOutput, CliError> {
        let cat = self.upstream_catalog()?;
        let mut claims = Vec::new();
        let n = cat.nodes.len();
        claims.push(Claim::evaluate("nodes.count", n.to_string(), n == 48));
        let ranks: BTreeMap<usize, usize> = cat.nodes.iter().fold(BTreeMap::new(), |mut m, p| {
            *m.entry(cat.model.jacobian_rank(&p.coords)).or_default() += 1;
            m
        });
        let rank_text = if ranks.len() == 1 && ranks.contains_key(&3) {
            "rank 3 at every node".to_string()
        } else {
            ranks
                .iter()
                .map(|(r, c)| format!("{c} nodes of rank {r}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        claims.push(Claim::evaluate(
            "nodes.jacobian-rank",
            rank_text,
            ranks.len() == 1 && ranks.contains_key(&3),
        ));
        let fields = field_summary(cat.nodes.iter().map(|p| p.field));
        claims.push(Claim::evaluate(
            "nodes.fields",
            fields.clone(),
            fields == "24 over Q, 24 over Q(i)",
        ));
        claims.push(Claim::evaluate(
            "catalog.size",
            cat.len().to_string(),
            cat.len() == 140,
        ));
        let kinds = [
            CurveKind::Exceptional,
            CurveKind::Conic,
            CurveKind::GenusOneB,
            CurveKind::GenusOneAA,
        ];
        let counts: Vec<String> = kinds
            .iter()
            .map(|k| {
                cat.curves
                    .iter()
                    .filter(|c| c.kind == *k)
                    .count()
                    .to_string()
            })
            .collect();
        let families = counts.join("/");
        claims.push(Claim::evaluate(
            "catalog.families",
            families.clone(),
            families == "48/32/12/48",
        ));
        for (id, kind) in [
            ("catalog.fields.exceptional", CurveKind::Exceptional),
            ("catalog.fields.conic", CurveKind::Conic),
            ("catalog.fields.genus-one-b", CurveKind::GenusOneB),
            ("catalog.fields.genus-one-aa", CurveKind::GenusOneAA),
        ] {
            let s = field_summary(
                cat.curves
                    .iter()
                    .filter(|c| c.kind == kind)
                    .map(|c| c.field_of_definition),
            );
            let expected = crate::report::registry_entry(id)
                .map(|e| e.expected)
                .unwrap_or_default();
            claims.push(Claim::evaluate(id, s.clone(), s == expected));
        }
        let section = hyperplane_section_decomposition(cat, &MultiPoly::var(C, NVARS))?;
        let parts: Vec<_> = section
            .components
            .iter()
            .map(|(id, m)| (&cat.curves[*id], *m))
            .collect();
        let all_conics = parts
            .iter()
            .all(|(c, m)| c.kind == CurveKind::Conic && *m == 1);
        let fields = field_summary(parts.iter().map(|(c, _)| c.field_of_definition));
        let text = if all_conics {
            format!(
                "{} conics over {}",
                parts.len(),
                fields.split_once(" over ").map_or("", |x| x.1)
            )
        } else {
            format!("{} components, not all reduced conics", parts.len())
        };
        claims.push(Claim::evaluate(
            "section.c",
            text.clone(),
            text == "8 conics over Q(i)",
        ));
        Ok(StageOutput {
            claims,
            notes: Vec::new(),
        })
    }

    fn gram_claims(&self) -> Result<StageOutput, CliError> {
        let cat = self.upstream_catalog()?;
        let g = self.gram()?;
        let mut claims = Vec::new();
        let sym = g.is_symmetric();
        claims.push(Claim::evaluate(
            "gram.symmetric",
            if sym { "symmetric" } else { "not symmetric" },
            sym,
        ));
        let mut diag: BTreeMap<i64, usize> = BTreeMap::new();
        let mut consistent = true;
        for (i, c) in cat.curves.iter().enumerate() {
            let v = g.entries[i][i];
            *diag.entry(v).or_default() += 1;
            consistent &= v == if c.is_exceptional() { -2 } else { -4 };
        }
        let text = diag
            .iter()
            .rev()
            .map(|(v, c)| format!("{c} × {v}"))
            .collect::<Vec<_>>()
            .join(", ");
        claims.push(Claim::evaluate(
            "gram.diagonal",
            text.clone(),
            consistent && text == "48 × -2, 92 × -4",
        ));
        let rank = IntMatrix::from_i64(&g.entries).rank();
        claims.push(Claim::evaluate("gram.rank", rank.to_string(), rank == 64));
        Ok(StageOutput {
            claims,
            notes: Vec::new(),
        })
    }

    fn lattice_claims(&self) -> Result<StageOutput, CliError> {
        let cat = self.upstream_catalog()?;
        let gram = self.gram()?;
        let lat = self.lattice()?;
        let pic = &lat.pic;
        let mut claims = Vec::new();
        let det = pic.discriminant()?;
        let expected_det = -(BigInt::one() << 28usize);
        claims.push(Claim::evaluate(
            "lattice.discriminant",
            power_of_two_text(&det),
            det == expected_det,
        ));
        let (p, n, z) = signature(&pic.gram64)?;
        let sig = if z == 0 {
            format!("({p}, {n})")
        } else {
            format!("({p}, {n}) with {z} zero")
        };
        claims.push(Claim::evaluate(
            "lattice.signature",
            sig,
            (p, n, z) == (1, 63, 0),
        ));
        let even = is_even(&pic.gram64)?;
        claims.push(Claim::evaluate(
            "lattice.even",
            if even { "even" } else { "odd" },
            even,
        ));
        let prim = is_primitive(&lat.k)?;
        claims.push(Claim::evaluate(
            "canonical.primitive",
            if prim { "primitive" } else { "imprimitive" },
            prim,
        ));
        let k2 = pic.pair(&lat.k, &lat.k);
        claims.push(Claim::evaluate(
            "canonical.square",
            k2.to_string(),
            k2 == BigInt::from(16),
        ));
        let good = cat
            .curves
            .iter()
            .enumerate()
            .filter(|(i, c)| pic.pair(&lat.k, pic.coords.row(*i)) == BigInt::from(c.degree))
            .count();
        claims.push(Claim::evaluate(
            "canonical.degrees",
            format!("K·C = deg C for {good} of {} curves", cat.len()),
            good == cat.len() && good == 140,
        ));
        let mut agree = 0;
        for v in [a(0), a(1), a(2), C] {
            let h = hyperplane_class(cat, gram, &MultiPoly::var(v, NVARS))?;
            if pic.to_basis(&h) == lat.k {
                agree += 1;
            }
        }
        claims.push(Claim::evaluate(
            "canonical.hyperplanes",
            format!("{agree} of 4 sections equal K in L"),
            agree == 4,
        ));
        let degrees = [2, 2, 2, 2];
        let chi = invariants::holomorphic_euler_characteristic(6, &degrees);
        let c2 = invariants::second_chern_number(6, &degrees);
        let (lhs, rhs) = invariants::noether_sides(chi, 16, c2);
        let k2_ok = k2 == BigInt::from(16);
        claims.push(Claim::evaluate(
            "surface.noether",
            format!("12·{chi} = {lhs}, K² + c₂ = {k2} + {c2}"),
            k2_ok && lhs == rhs && chi == 8 && c2 == 80,
        ));
        Ok(StageOutput {
            claims,
            notes: Vec::new(),
        })
    }

    fn group_claims(&self) -> Result<StageOutput, CliError> {
        let gram = self.gram()?;
        let g = self.group()?;
        let mut claims = Vec::new();
        claims.push(Claim::evaluate(
            "group.order",
            g.order.to_string(),
            g.order == 1536,
        ));
        claims.push(Claim::evaluate(
            "group.s4-quotient",
            format!(
                "{} images, kernel of {} elements{}",
                g.s4_images,
                g.s4_kernel,
                if g.kernel_sign_changes {
                    ", all sign changes"
                } else {
                    ", not all sign changes"
                }
            ),
            g.s4_images == 24 && g.s4_kernel == 64 && g.kernel_sign_changes,
        ));
        claims.push(Claim::evaluate(
            "group.quadric-orbit",
            format!("orbit of Q1 has {} elements", g.quadric_orbit),
            g.quadric_orbit == 6,
        ));
        let text = describe_quadric_perm(&g.sigma_quadrics);
        claims.push(Claim::evaluate(
            "group.sigma-quadrics",
            text.clone(),
            g.sigma_quadrics == [4, 5, 2, 3, 0, 1],
        ));
        let preserved = g
            .generators
            .iter()
            .filter(|(_, p)| preserves_gram(p, gram))
            .count();
        claims.push(Claim::evaluate(
            "group.gram-invariance",
            format!(
                "{preserved} of {} generators preserve the matrix",
                g.generators.len()
            ),
            preserved == g.generators.len(),
        ));
        claims.push(Claim::evaluate(
            "group.combined-order",
            factor_text(g.combined_order),
            g.combined_order % (512 * 3) == 0,
        ));
        let notes = vec![format!(
            "automorphisms act on the curves through a group of order {} (kernel of order {})",
            g.automorphism_image,
            g.order / g.automorphism_image.max(1)
        )];
        Ok(StageOutput { claims, notes })
    }

    fn fixed_space_claims(&self) -> Result<StageOutput, CliError> {
        let f = self.fixed_space()?;
        let mut claims = Vec::new();
        let two_part = 1usize << f.combined_order.trailing_zeros();
        claims.push(Claim::evaluate(
            "fixed-space.sylow-order",
            format!("{} of {}", f.sylow_order, f.combined_order),
            f.sylow_order == two_part,
        ));
        let dim = f.basis.len();
        let contains = f2_in_span(&f.basis, &f.k_mod2);
        let nonzero = f.k_mod2.iter().any(|x| *x != 0);
        claims.push(Claim::evaluate(
            "fixed-space.dimension",
            format!(
                "dimension {dim}, {} K mod 2",
                if contains && nonzero {
                    "contains"
                } else {
                    "does not contain"
                }
            ),
            dim == 1 && contains && nonzero,
        ));
        Ok(StageOutput {
            claims,
            notes: Vec::new(),
        })
    }

    fn cohomology_claims(&self) -> Result<StageOutput, CliError> {
        let c = self.cohomology()?;
        let mut claims = Vec::new();
        let table = vec![vec![0, 1], vec![1, 0]];
        let id = IntMatrix::from_i64(&[vec![1]]);
        let neg = IntMatrix::from_i64(&[vec![-1]]);
        let trivial = h1_cohomology(&GroupAction::new(
            table.clone(),
            vec![id.clone(), id.clone()],
        )?)?;
        let sign = h1_cohomology(&GroupAction::new(table, vec![id, neg])?)?;
        let text = format!(
            "trivial Z/2 on Z: {}; sign Z/2 on Z: {}",
            group_text(&trivial),
            group_text(&sign)
        );
        claims.push(Claim::evaluate(
            "cohomology.oracles",
            text,
            trivial.is_empty() && sign == [BigInt::from(2)],
        ));
        claims.push(Claim::evaluate(
            "cohomology.galois",
            group_text(&c.factors),
            c.factors.is_empty() && c.group_order == 4,
        ));
        Ok(StageOutput {
            claims,
            notes: Vec::new(),
        })
    }

    fn classify_claims(&self) -> Result<StageOutput, CliError> {
        let cat = self.upstream_catalog()?;
        let lat = self.lattice()?;
        let cls = self.classification()?;
        let classes = |pred: &dyn Fn(CurveKind) -> bool| -> Vec<Vec<BigInt>> {
            let mut v: Vec<Vec<BigInt>> = cat
                .curves
                .iter()
                .filter(|c| pred(c.kind))
                .map(|c| lat.pic.coords.row(c.id).to_vec())
                .collect();
            v.sort();
            v.dedup();
            v
        };
        let get = |d: i64, n: i64| -> Result<&CandidateSet, CliError> {
            cls.get(d, n)
                .ok_or_else(|| parse_error(Stage::Classify, &format!("query ({d}, {n}) missing")))
        };
        let mut claims = Vec::new();

        let pos = get(0, 2)?;
        claims.push(Claim::evaluate(
            "classify.positive-norm",
            format!("(0, 2): {} classes", pos.count),
            pos.count == 0,
        ));

        let roots = get(0, -2)?;
        let listed = roots.vectors.as_deref().unwrap_or_default();
        let exc = classes(&|k| k == CurveKind::Exceptional);
        let present = exc
            .iter()
            .filter(|e| {
                let neg: Vec<BigInt> = e.iter().map(|x| -x).collect();
                listed.binary_search(e).is_ok() && listed.binary_search(&neg).is_ok()
            })
            .count();
        claims.push(Claim::evaluate(
            "classify.roots",
            format!(
                "(0, -2): {} classes, ±E present for {present} of {} nodes",
                roots.count,
                exc.len()
            ),
            present == exc.len() && present == 48,
        ));

        let conics = get(2, -4)?;
        claims.push(Claim::evaluate(
            "classify.conic-candidates",
            format!("(2, -4): {} classes", conics.count),
            conics.count == 2048,
        ));
        let known = classes(&|k| k == CurveKind::Conic);
        claims.push(Claim::evaluate(
            "classify.conics",
            survivor_text(conics, &known, "conics"),
            conics.survivors == known && known.len() == 32,
        ));

        let rational = get(4, -6)?;
        claims.push(Claim::evaluate(
            "classify.rational-quartics",
            format!(
                "(4, -6): {} classes, {} survivors",
                rational.count,
                rational.survivors.len()
            ),
            rational.survivors.is_empty(),
        ));

        let elliptic = get(4, -4)?;
        let known = classes(&|k| matches!(k, CurveKind::GenusOneB | CurveKind::GenusOneAA));
        claims.push(Claim::evaluate(
            "classify.genus-one-quartics",
            survivor_text(elliptic, &known, "genus-one curves"),
            elliptic.survivors == known && known.len() == 60,
        ));
        let notes = cls
            .sets
            .iter()
            .map(|s| {
                format!(
                    "({}, {}): {} classes, {} survivors",
                    s.query.dot_with_k,
                    s.query.self_int,
                    s.count,
                    s.survivors.len()
                )
            })
            .collect();
        Ok(StageOutput { claims, notes })
    }
}

fn load_gram(text: &str, hash: &str) -> Result<GramMatrix, CliError> {
    let _ = check_header(Stage::Gram, text, GRAM_FORMAT, hash)?;
    Ok(GramMatrix::from_text(text)?)
}

fn tangential_note(pairs: &[(usize, usize, usize)]) -> String {
    if pairs.is_empty() {
        return "no pair of curves shares a tangent direction at a node".into();
    }
    let list: Vec<String> = pairs
        .iter()
        .map(|(i, j, p)| format!("({i}, {j}) at node {p}"))
        .collect();
    format!("pairs tangent at a node: {}", list.join(", "))
}

fn labelled_generators() -> Vec<(String, ProjectiveMap)> {
    let mut out = vec![
        ("swap-12".to_string(), index_permutation([1, 0, 2])),
        ("cycle-123".to_string(), index_permutation([1, 2, 0])),
        ("sigma".to_string(), sigma()),
    ];
    for (v, name) in VAR_NAMES.iter().enumerate() {
        out.push((format!("sign-{name}"), sign_change(v)));
    }
    out
}

fn is_sign_change(m: &ProjectiveMap) -> bool {
    let one = FieldElement::one();
    let minus = -FieldElement::one();
    m.matrix().row_vecs().iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, v)| {
            if i == j {
                *v == one || *v == minus
            } else {
                v.is_zero()
            }
        })
    })
}

fn field_summary(fields: impl Iterator<Item = Subfield>) -> String {
    let mut counts: BTreeMap<Subfield, usize> = BTreeMap::new();
    for f in fields {
        *counts.entry(f).or_default() += 1;
    }
    counts
        .iter()
        .map(|(f, c)| format!("{c} over {}", f.label()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn power_of_two_text(x: &BigInt) -> String {
    let m = x.magnitude();
    if m.count_ones() == 1 {
        let sign = if *x < BigInt::zero() { "-" } else { "" };
        format!("{sign}2^{}", m.trailing_zeros().unwrap_or(0))
    } else {
        x.to_string()
    }
}

fn factor_text(n: usize) -> String {
    let mut parts = Vec::new();
    let mut m = n;
    let mut p = 2;
    while m > 1 {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e == 1 {
            parts.push(p.to_string());
        } else if e > 1 {
            parts.push(format!("{p}^{e}"));
        }
        p += 1;
    }
    if parts.is_empty() {
        n.to_string()
    } else {
        format!("{n} = {}", parts.join("·"))
    }
}

/// Cycle notation on the labels `Q1 … R3`, e.g. `Q1↔R2, Q2↔R1, fixes Q3, R3`.
pub fn describe_quadric_perm(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut cycles = Vec::new();
    let mut fixed = Vec::new();
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut c = vec![i];
        seen[i] = true;
        let mut j = p[i];
        while j != i {
            seen[j] = true;
            c.push(j);
            j = p[j];
        }
        if c.len() == 1 {
            fixed.push(RANK3_LABELS[i]);
        } else if c.len() == 2 {
            cycles.push(format!("{}↔{}", RANK3_LABELS[c[0]], RANK3_LABELS[c[1]]));
        } else {
            cycles.push(format!(
                "({})",
                c.iter()
                    .map(|&k| RANK3_LABELS[k])
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
        }
    }
    if !fixed.is_empty() {
        cycles.push(format!("fixes {}", fixed.join(", ")));
    }
    cycles.join(", ")
}

fn group_text(factors: &[BigInt]) -> String {
    if factors.is_empty() {
        return "0".into();
    }
    factors
        .iter()
        .map(|f| {
            if f.is_zero() {
                "Z".to_string()
            } else {
                format!("Z/{f}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ⊕ ")
}

fn survivor_text(set: &CandidateSet, known: &[Vec<BigInt>], what: &str) -> String {
    let q = set.query;
    let equal = set.survivors == known;
    format!(
        "({}, {}): {} classes, {} survivors, {} the {} catalog {what}",
        q.dot_with_k,
        q.self_int,
        set.count,
        set.survivors.len(),
        if equal { "equal to" } else { "not equal to" },
        known.len()
    )
}

/// Whether `v` lies in the span of `basis` over `F2`.
fn f2_in_span(basis: &[Vec<u8>], v: &[u8]) -> bool {
    let rank = |rows: &[Vec<u8>]| {
        let mut m: Vec<Vec<u8>> = rows.to_vec();
        let mut r = 0;
        let cols = m.first().map_or(0, Vec::len);
        for c in 0..cols {
            let Some(p) = (r..m.len()).find(|&i| m[i][c] == 1) else {
                continue;
            };
            m.swap(r, p);
            let pivot = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && row[c] == 1 {
                    row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
                }
            }
            r += 1;
        }
        r
    };
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank(basis) == rank(&with)
}

/// The group stage: orders, quotient data and the generator permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupArtifact {
    pub order: usize,
    pub s4_images: usize,
    pub s4_kernel: usize,
    pub kernel_sign_changes: bool,
    pub quadric_orbit: usize,
    pub sigma_quadrics: Perm,
    /// Order of the image of the automorphisms in the symmetric group on the
    /// catalog.
    pub automorphism_image: usize,
    pub combined_order: usize,
    /// Automorphism generators followed by the two Galois generators.
    pub generators: Vec<(String, Perm)>,
}

impl GroupArtifact {
    pub fn to_text(&self, hash: &str) -> String {
        let mut out = header(GROUP_FORMAT, hash);
        let _ = writeln!(out, "order {}", self.order);
        let _ = writeln!(out, "s4-images {}", self.s4_images);
        let _ = writeln!(out, "s4-kernel {}", self.s4_kernel);
        let _ = writeln!(out, "kernel-sign-changes {}", self.kernel_sign_changes);
        let _ = writeln!(out, "quadric-orbit {}", self.quadric_orbit);
        let _ = writeln!(out, "sigma-quadrics {}", join(&self.sigma_quadrics));
        let _ = writeln!(out, "automorphism-image {}", self.automorphism_image);
        let _ = writeln!(out, "combined-order {}", self.combined_order);
        let _ = writeln!(out, "generators {}", self.generators.len());
        for (label, p) in &self.generators {
            let _ = writeln!(out, "{label} {}", join(p));
        }
        out
    }

    pub fn from_text(text: &str, hash: &str) -> Result<Self, CliError> {
        let st = Stage::Group;
        let mut lines = check_header(st, text, GROUP_FORMAT, hash)?;
        let count =
            |key: &str, lines: &mut std::str::Lines<'_>| parse_usize(st, field(st, lines, key)?);
        let order = count("order", &mut lines)?;
        let s4_images = count("s4-images", &mut lines)?;
        let s4_kernel = count("s4-kernel", &mut lines)?;
        let kernel_sign_changes = field(st, &mut lines, "kernel-sign-changes")?
            .parse()
            .map_err(|_| parse_error(st, "kernel-sign-changes"))?;
        let quadric_orbit = count("quadric-orbit", &mut lines)?;
        let sigma_quadrics = parse_list(st, field(st, &mut lines, "sigma-quadrics")?)?;
        let automorphism_image = count("automorphism-image", &mut lines)?;
        let combined_order = count("combined-order", &mut lines)?;
        let n = count("generators", &mut lines)?;
        let mut generators = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| parse_error(st, "truncated"))?;
            let (label, rest) = line
                .split_once(' ')
                .ok_or_else(|| parse_error(st, "bad generator"))?;
            let p: Perm = parse_list(st, rest)?;
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted != identity_perm(p.len()) {
                return Err(parse_error(st, &format!("{label} is not a permutation")));
            }
            generators.push((label.to_string(), p));
        }
        expect_end(st, lines)?;
        Ok(GroupArtifact {
            order,
            s4_images,
            s4_kernel,
            kernel_sign_changes,
            quadric_orbit,
            sigma_quadrics,
            automorphism_image,
            combined_order,
            generators,
        })
    }
}

/// The fixed-space stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedSpaceArtifact {
    pub combined_order: usize,
    pub sylow_order: usize,
    pub sylow_generators: usize,
    /// Basis of the fixed subspace of `L/2L`.
    pub basis: Vec<Vec<u8>>,
    pub k_mod2: Vec<u8>,
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn parse_bits(st: Stage, s: &str) -> Result<Vec<u8>, CliError> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(parse_error(st, "not a bit string")),
        })
        .collect()
}

impl FixedSpaceArtifact {
    pub fn to_text(&self, hash: &str) -> String {
        let mut out = header(FIXED_SPACE_FORMAT, hash);
        let _ = writeln!(out, "combined-order {}", self.combined_order);
        let _ = writeln!(out, "sylow-order {}", self.sylow_order);
        let _ = writeln!(out, "sylow-generators {}", self.sylow_generators);
        let _ = writeln!(out, "canonical-mod-2 {}", bits(&self.k_mod2));
        let _ = writeln!(out, "dimension {}", self.basis.len());
        for v in &self.basis {
            let _ = writeln!(out, "{}", bits(v));
        }
        out
    }

    pub fn from_text(text: &str, hash: &str) -> Result<Self, CliError> {
        let st = Stage::FixedSpace;
        let mut lines = check_header(st, text, FIXED_SPACE_FORMAT, hash)?;
        let combined_order = parse_usize(st, field(st, &mut lines, "combined-order")?)?;
        let sylow_order = parse_usize(st, field(st, &mut lines, "sylow-order")?)?;
        let sylow_generators = parse_usize(st, field(st, &mut lines, "sylow-generators")?)?;
        let k_mod2 = parse_bits(st, field(st, &mut lines, "canonical-mod-2")?)?;
        let dim = parse_usize(st, field(st, &mut lines, "dimension")?)?;
        let mut basis = Vec::with_capacity(dim);
        for _ in 0..dim {
            let v = parse_bits(
                st,
                lines.next().ok_or_else(|| parse_error(st, "truncated"))?,
            )?;
            if v.len() != k_mod2.len() {
                return Err(parse_error(st, "basis vector of the wrong length"));
            }
            basis.push(v);
        }
        expect_end(st, lines)?;
        Ok(FixedSpaceArtifact {
            combined_order,
            sylow_order,
            sylow_generators,
            basis,
            k_mod2,
        })
    }
}

/// The cohomology stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyArtifact {
    pub group_order: usize,
    /// Invariant factors of `H¹`, `0` standing for a free summand.
    pub factors: Vec<BigInt>,
}

impl CohomologyArtifact {
    pub fn to_text(&self, hash: &str) -> String {
        let mut out = header(COHOMOLOGY_FORMAT, hash);
        let _ = writeln!(out, "group-order {}", self.group_order);
        let _ = writeln!(out, "factors {}", self.factors.len());
        for f in &self.factors {
            let _ = writeln!(out, "{f}");
        }
        out
    }

    pub fn from_text(text: &str, hash: &str) -> Result<Self, CliError> {
        let st = Stage::Cohomology;
        let mut lines = check_header(st, text, COHOMOLOGY_FORMAT, hash)?;
        let group_order = parse_usize(st, field(st, &mut lines, "group-order")?)?;
        let n = parse_usize(st, field(st, &mut lines, "factors")?)?;
        let mut factors = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| parse_error(st, "truncated"))?;
            factors.push(
                line.trim()
                    .parse()
                    .map_err(|_| parse_error(st, "bad factor"))?,
            );
        }
        expect_end(st, lines)?;
        Ok(CohomologyArtifact {
            group_order,
            factors,
        })
    }
}

/// The classification stage: one candidate set per query, listed in full
/// only when small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifyArtifact {
    pub sets: Vec<CandidateSet>,
}

impl ClassifyArtifact {
    pub fn get(&self, d: i64, n: i64) -> Option<&CandidateSet> {
        self.sets.iter().find(|s| s.query == ClassQuery::new(d, n))
    }

    pub fn to_text(&self, hash: &str) -> String {
        let mut out = header(CLASSIFY_FORMAT, hash);
        let _ = writeln!(out, "queries {}", self.sets.len());
        for s in &self.sets {
            let _ = writeln!(out, "query {} {}", s.query.dot_with_k, s.query.self_int);
            let _ = writeln!(out, "count {}", s.count);
            match &s.vectors {
                Some(v) => {
                    let _ = writeln!(out, "vectors {}", v.len());
                    for x in v {
                        let _ = writeln!(out, "{}", join(x));
                    }
                }
                None => out.push_str("vectors omitted\n"),
            }
            let _ = writeln!(out, "survivors {}", s.survivors.len());
            for x in &s.survivors {
                let _ = writeln!(out, "{}", join(x));
            }
        }
        out
    }

    pub fn from_text(text: &str, hash: &str) -> Result<Self, CliError> {
        let st = Stage::Classify;
        let mut lines = check_header(st, text, CLASSIFY_FORMAT, hash)?;
        let n = parse_usize(st, field(st, &mut lines, "queries")?)?;
        let mut sets = Vec::with_capacity(n);
        let read_vectors =
            |lines: &mut std::str::Lines<'_>, k: usize| -> Result<Vec<Vec<BigInt>>, CliError> {
                (0..k)
                    .map(|_| {
                        parse_list(
                            st,
                            lines.next().ok_or_else(|| parse_error(st, "truncated"))?,
                        )
                    })
                    .collect()
            };
        for _ in 0..n {
            let q: Vec<i64> = parse_list(st, field(st, &mut lines, "query")?)?;
            let [d, s] = q[..] else {
                return Err(parse_error(st, "bad query"));
            };
            let count = parse_usize(st, field(st, &mut lines, "count")?)?;
            let vectors = match field(st, &mut lines, "vectors")? {
                "omitted" => None,
                k => Some(read_vectors(&mut lines, parse_usize(st, k)?)?),
            };
            let k = parse_usize(st, field(st, &mut lines, "survivors")?)?;
            let survivors = read_vectors(&mut lines, k)?;
            sets.push(CandidateSet {
                query: ClassQuery::new(d, s),
                count,
                vectors,
                survivors,
            });
        }
        expect_end(st, lines)?;
        Ok(ClassifyArtifact { sets })
    }
}
