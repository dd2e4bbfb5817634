//! The claim registry and the verification report built from it.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::artifacts::Stage;
use crate::error::CliError;

pub const REPORT_FORMAT: &str = "cuboid-report v1";

/// One checkable statement, with the value it must take.
#[derive(Clone, Copy, Debug)]
pub struct ClaimSpec {
    pub id: &'static str,
    pub stage: Stage,
    pub anchor: &'static str,
    pub expected: &'static str,
}

const fn spec(
    id: &'static str,
    stage: Stage,
    anchor: &'static str,
    expected: &'static str,
) -> ClaimSpec {
    ClaimSpec {
        id,
        stage,
        anchor,
        expected,
    }
}

pub const REGISTRY: &[ClaimSpec] = &[
    spec("nodes.count", Stage::Catalog, "singular locus", "48"),
    spec(
        "nodes.jacobian-rank",
        Stage::Catalog,
        "singular locus",
        "rank 3 at every node",
    ),
    spec(
        "nodes.fields",
        Stage::Catalog,
        "singular locus",
        "24 over Q, 24 over Q(i)",
    ),
    spec("catalog.size", Stage::Catalog, "curve catalog", "140"),
    spec(
        "catalog.families",
        Stage::Catalog,
        "curve catalog",
        "48/32/12/48",
    ),
    spec(
        "catalog.fields.exceptional",
        Stage::Catalog,
        "curve catalog",
        "24 over Q, 24 over Q(i)",
    ),
    spec(
        "catalog.fields.conic",
        Stage::Catalog,
        "curve catalog",
        "24 over Q, 8 over Q(i)",
    ),
    spec(
        "catalog.fields.genus-one-b",
        Stage::Catalog,
        "curve catalog",
        "12 over Q(i)",
    ),
    spec(
        "catalog.fields.genus-one-aa",
        Stage::Catalog,
        "curve catalog",
        "24 over Q(sqrt2), 24 over Q(i,sqrt2)",
    ),
    spec(
        "section.c",
        Stage::Catalog,
        "hyperplane c = 0",
        "8 conics over Q(i)",
    ),
    spec(
        "gram.symmetric",
        Stage::Gram,
        "intersection matrix",
        "symmetric",
    ),
    spec(
        "gram.diagonal",
        Stage::Gram,
        "intersection matrix",
        "48 × -2, 92 × -4",
    ),
    spec("gram.rank", Stage::Gram, "intersection matrix", "64"),
    spec(
        "lattice.discriminant",
        Stage::Lattice,
        "Picard lattice",
        "-2^28",
    ),
    spec(
        "lattice.signature",
        Stage::Lattice,
        "Picard lattice",
        "(1, 63)",
    ),
    spec("lattice.even", Stage::Lattice, "Picard lattice", "even"),
    spec(
        "canonical.primitive",
        Stage::Lattice,
        "canonical class",
        "primitive",
    ),
    spec("canonical.square", Stage::Lattice, "canonical class", "16"),
    spec(
        "canonical.degrees",
        Stage::Lattice,
        "canonical class",
        "K·C = deg C for all 140 curves",
    ),
    spec(
        "canonical.hyperplanes",
        Stage::Lattice,
        "canonical class",
        "a1, a2, a3, c sections agree in L",
    ),
    spec(
        "surface.noether",
        Stage::Lattice,
        "numerical invariants",
        "12·8 = 16 + 80",
    ),
    spec("group.order", Stage::Group, "automorphism group", "1536"),
    spec(
        "group.s4-quotient",
        Stage::Group,
        "automorphism group",
        "onto S4, kernel = the 64 sign changes",
    ),
    spec(
        "group.quadric-orbit",
        Stage::Group,
        "automorphism group",
        "transitive on the 6 rank-3 quadrics",
    ),
    spec(
        "group.sigma-quadrics",
        Stage::Group,
        "automorphism group",
        "Q1↔R2, Q2↔R3, fixes Q3, R1",
    ),
    spec(
        "group.gram-invariance",
        Stage::Group,
        "symmetries of the catalog",
        "every generator preserves the matrix",
    ),
    spec(
        "group.combined-order",
        Stage::Group,
        "symmetries of the catalog",
        "divisible by 2^9·3",
    ),
    spec(
        "fixed-space.sylow-order",
        Stage::FixedSpace,
        "mod 2 fixed space",
        "full 2-part of the combined order",
    ),
    spec(
        "fixed-space.dimension",
        Stage::FixedSpace,
        "mod 2 fixed space",
        "dimension 1, spanned by K mod 2",
    ),
    spec(
        "cohomology.oracles",
        Stage::Cohomology,
        "Galois cohomology",
        "trivial Z/2 on Z: 0; sign Z/2 on Z: Z/2",
    ),
    spec(
        "cohomology.galois",
        Stage::Cohomology,
        "Galois cohomology",
        "0",
    ),
    spec(
        "classify.positive-norm",
        Stage::Classify,
        "low-degree curves",
        "(0, 2): no classes",
    ),
    spec(
        "classify.roots",
        Stage::Classify,
        "low-degree curves",
        "(0, -2) contains ±E for all 48 nodes",
    ),
    spec(
        "classify.conic-candidates",
        Stage::Classify,
        "low-degree curves",
        "(2, -4): 2048 classes",
    ),
    spec(
        "classify.conics",
        Stage::Classify,
        "low-degree curves",
        "(2, -4) survivors = the 32 catalog conics",
    ),
    spec(
        "classify.rational-quartics",
        Stage::Classify,
        "low-degree curves",
        "(4, -6): 0 survivors",
    ),
    spec(
        "classify.genus-one-quartics",
        Stage::Classify,
        "low-degree curves",
        "(4, -4) survivors = the 60 catalog genus-one curves",
    ),
];

pub fn registry_entry(id: &str) -> Option<&'static ClaimSpec> {
    REGISTRY.iter().find(|c| c.id == id)
}

/// The outcome of one claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub anchor: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl Claim {
    /// Fills in anchor and expectation from the registry.
    pub fn evaluate(id: &str, computed: impl Into<String>, pass: bool) -> Claim {
        let s = registry_entry(id).unwrap_or_else(|| panic!("claim {id} is not registered"));
        Claim {
            id: id.into(),
            anchor: s.anchor.into(),
            expected: s.expected.into(),
            computed: computed.into(),
            pass,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} [{}] expected: {}; computed: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.anchor,
            self.expected,
            self.computed
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Every registered claim, each exactly once, in registry order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub format: String,
    pub catalog_hash: String,
    pub claims: Vec<Claim>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(catalog_hash: &str, claims: Vec<Claim>) -> Result<Self, CliError> {
        let report = VerificationReport {
            format: REPORT_FORMAT.into(),
            catalog_hash: catalog_hash.into(),
            pass: claims.iter().all(|c| c.pass),
            claims,
        };
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.format != REPORT_FORMAT {
            return Err(CliError::Report(format!(
                "unknown format {:?}",
                self.format
            )));
        }
        if self.claims.is_empty() {
            return Err(CliError::Report("no claims".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.claims {
            let Some(s) = registry_entry(&c.id) else {
                return Err(CliError::Report(format!("unregistered claim {}", c.id)));
            };
            if !seen.insert(c.id.as_str()) {
                return Err(CliError::Report(format!("claim {} appears twice", c.id)));
            }
            if c.anchor != s.anchor || c.expected != s.expected {
                return Err(CliError::Report(format!(
                    "claim {} disagrees with the registry",
                    c.id
                )));
            }
        }
        if let Some(s) = REGISTRY.iter().find(|s| !seen.contains(s.id)) {
            return Err(CliError::Report(format!("claim {} is missing", s.id)));
        }
        if self.pass != self.claims.iter().all(|c| c.pass) {
            return Err(CliError::Report(
                "overall status disagrees with the claims".into(),
            ));
        }
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| !c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\ncatalog {}\n", self.format, self.catalog_hash);
        for c in &self.claims {
            let _ = writeln!(out, "{}", c.line());
        }
        let failed = self.failures().count();
        let _ = writeln!(
            out,
            "{}: {} of {} claims pass",
            if self.pass { "PASS" } else { "FAIL" },
            self.claims.len() - failed,
            self.claims.len()
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: VerificationReport =
            serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn export(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass() -> Vec<Claim> {
        REGISTRY
            .iter()
            .map(|s| Claim::evaluate(s.id, "ok", true))
            .collect()
    }

    #[test]
    fn registry_ids_are_unique() {
        let ids: BTreeSet<&str> = REGISTRY.iter().map(|s| s.id).collect();
        assert_eq!(ids.len(), REGISTRY.len());
    }

    #[test]
    fn registry_is_in_stage_order() {
        assert!(REGISTRY.windows(2).all(|w| w[0].stage <= w[1].stage));
        for st in Stage::ALL {
            assert!(REGISTRY.iter().any(|s| s.stage == st), "{}", st.name());
        }
    }

    #[test]
    fn json_round_trip() {
        let mut claims = all_pass();
        claims[3].pass = false;
        claims[3].computed = "139".into();
        let r = VerificationReport::new("h", claims).unwrap();
        assert!(!r.pass);
        let back = VerificationReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn text_has_a_line_per_claim() {
        let r = VerificationReport::new("h", all_pass()).unwrap();
        let text = r.to_text();
        for s in REGISTRY {
            assert_eq!(
                text.lines()
                    .filter(|l| l.starts_with(&format!("PASS {} [{}]", s.id, s.anchor)))
                    .count(),
                1
            );
        }
        assert!(text.ends_with(&format!(
            "PASS: {n} of {n} claims pass\n",
            n = REGISTRY.len()
        )));
    }

    #[test]
    fn rejects_empty_and_incomplete() {
        assert!(matches!(
            VerificationReport::new("h", vec![]),
            Err(CliError::Report(_))
        ));
        let mut claims = all_pass();
        claims.pop();
        assert!(VerificationReport::new("h", claims).is_err());
        let mut claims = all_pass();
        claims.push(claims[0].clone());
        assert!(VerificationReport::new("h", claims).is_err());
    }

    #[test]
    fn rejects_tampered_json() {
        let r = VerificationReport::new("h", all_pass()).unwrap();
        let edited = r
            .to_json()
            .replacen("\"expected\": \"48\"", "\"expected\": \"47\"", 1);
        assert!(VerificationReport::from_json(&edited).is_err());
        let edited = r.to_json().replacen("\"pass\": true", "\"pass\": false", 1);
        assert!(VerificationReport::from_json(&edited).is_err());
    }
}
