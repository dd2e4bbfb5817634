//! The workspace directory and the plain-text artifact formats that live in
//! it.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cuboid_core::lattice::{IntMatrix, PicardLattice};
use num_bigint::BigInt;

use crate::error::CliError;

pub const LATTICE_FORMAT: &str = "cuboid-lattice v1";
pub const GROUP_FORMAT: &str = "cuboid-group v1";
pub const FIXED_SPACE_FORMAT: &str = "cuboid-fixed-space v1";
pub const COHOMOLOGY_FORMAT: &str = "cuboid-cohomology v1";
pub const CLASSIFY_FORMAT: &str = "cuboid-classify v1";

/// Pipeline stages in dependency order, with the file each one writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Catalog,
    Gram,
    Lattice,
    Group,
    FixedSpace,
    Cohomology,
    Classify,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Catalog,
        Stage::Gram,
        Stage::Lattice,
        Stage::Group,
        Stage::FixedSpace,
        Stage::Cohomology,
        Stage::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Catalog => "catalog",
            Stage::Gram => "gram",
            Stage::Lattice => "lattice",
            Stage::Group => "group",
            Stage::FixedSpace => "fixed-space",
            Stage::Cohomology => "cohomology",
            Stage::Classify => "classify",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.txt", self.name())
    }
}

/// A directory holding the artifacts of one run.
#[derive(Clone, Debug)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn open(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Workspace {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn exists(&self, stage: Stage) -> bool {
        self.path(&stage.file_name()).is_file()
    }

    pub fn read(&self, stage: Stage) -> Result<String, CliError> {
        let p = self.path(&stage.file_name());
        if !p.is_file() {
            return Err(CliError::MissingCache(stage.name().into()));
        }
        fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))
    }

    pub fn write(&self, stage: Stage, text: &str) -> Result<(), CliError> {
        self.write_file(&stage.file_name(), text)
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place.
    pub fn write_file(&self, name: &str, text: &str) -> Result<(), CliError> {
        let dest = self.path(name);
        let mut tmp =
            tempfile::NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        tmp.write_all(text.as_bytes())
            .map_err(|e| CliError::io(&dest, e))?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file()
                .set_permissions(fs::Permissions::from_mode(0o644))
                .map_err(|e| CliError::io(&dest, e))?;
        }
        tmp.persist(&dest)
            .map_err(|e| CliError::io(&dest, e.error))?;
        Ok(())
    }
}

/// Checks the two header lines shared by every derived artifact and returns
/// the remaining lines.
pub fn check_header<'a>(
    stage: Stage,
    text: &'a str,
    format: &str,
    catalog_hash: &str,
) -> Result<std::str::Lines<'a>, CliError> {
    let mut lines = text.lines();
    let found = lines.next().unwrap_or("");
    if found != format {
        return Err(CliError::CacheMismatch {
            artifact: stage.name().into(),
            reason: format!("format {found:?}, expected {format:?}"),
        });
    }
    let hash = lines
        .next()
        .and_then(|l| l.strip_prefix("catalog "))
        .unwrap_or("");
    if hash != catalog_hash {
        return Err(CliError::CacheMismatch {
            artifact: stage.name().into(),
            reason: format!("built for catalog {hash:?}, current catalog is {catalog_hash}"),
        });
    }
    Ok(lines)
}

pub fn header(format: &str, catalog_hash: &str) -> String {
    format!("{format}\ncatalog {catalog_hash}\n")
}

pub fn parse_error(stage: Stage, what: &str) -> CliError {
    CliError::Parse {
        artifact: stage.name().into(),
        reason: what.into(),
    }
}

/// Pulls the next line and strips `key ` from it.
pub fn field<'a>(
    stage: Stage,
    lines: &mut std::str::Lines<'a>,
    key: &str,
) -> Result<&'a str, CliError> {
    lines
        .next()
        .and_then(|l| l.strip_prefix(key))
        .and_then(|l| l.strip_prefix(' '))
        .ok_or_else(|| parse_error(stage, &format!("expected `{key}`")))
}

pub fn parse_usize(stage: Stage, s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| parse_error(stage, &format!("not a count: {s:?}")))
}

pub fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn parse_list<T: std::str::FromStr>(stage: Stage, s: &str) -> Result<Vec<T>, CliError> {
    s.split_whitespace()
        .map(|x| {
            x.parse()
                .map_err(|_| parse_error(stage, &format!("bad entry {x:?}")))
        })
        .collect()
}

pub fn write_matrix(out: &mut String, name: &str, m: &IntMatrix) {
    let _ = writeln!(out, "{name} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let _ = writeln!(out, "{}", join(m.row(r)));
    }
}

pub fn read_matrix(
    stage: Stage,
    lines: &mut std::str::Lines<'_>,
    name: &str,
) -> Result<IntMatrix, CliError> {
    let dims: Vec<usize> = parse_list(stage, field(stage, lines, name)?)?;
    let [rows, cols] = dims[..] else {
        return Err(parse_error(stage, &format!("bad dimensions for {name}")));
    };
    let mut data = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row: Vec<BigInt> = parse_list(
            stage,
            lines
                .next()
                .ok_or_else(|| parse_error(stage, "truncated"))?,
        )?;
        if row.len() != cols {
            return Err(parse_error(stage, &format!("ragged row in {name}")));
        }
        data.push(row);
    }
    Ok(IntMatrix::with_width(&data, cols))
}

pub fn expect_end(stage: Stage, mut lines: std::str::Lines<'_>) -> Result<(), CliError> {
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(parse_error(stage, "trailing data"));
    }
    Ok(())
}

/// The lattice artifact: the basis and the canonical class on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeArtifact {
    pub pic: PicardLattice,
    /// The canonical class as a combination of catalog curves.
    pub k_catalog: Vec<i64>,
    /// The canonical class in the lattice basis.
    pub k: Vec<BigInt>,
}

impl LatticeArtifact {
    pub fn to_text(&self, catalog_hash: &str) -> String {
        let mut out = header(LATTICE_FORMAT, catalog_hash);
        write_matrix(&mut out, "basis", &self.pic.basis_expr);
        write_matrix(&mut out, "gram", &self.pic.gram64);
        write_matrix(&mut out, "coords", &self.pic.coords);
        write_matrix(&mut out, "kernel", &self.pic.kernel);
        let _ = writeln!(out, "canonical-curves {}", join(&self.k_catalog));
        let _ = writeln!(out, "canonical {}", join(&self.k));
        out
    }

    pub fn from_text(text: &str, catalog_hash: &str) -> Result<Self, CliError> {
        let st = Stage::Lattice;
        let mut lines = check_header(st, text, LATTICE_FORMAT, catalog_hash)?;
        let basis_expr = read_matrix(st, &mut lines, "basis")?;
        let gram64 = read_matrix(st, &mut lines, "gram")?;
        let coords = read_matrix(st, &mut lines, "coords")?;
        let kernel = read_matrix(st, &mut lines, "kernel")?;
        let k_catalog = parse_list(st, field(st, &mut lines, "canonical-curves")?)?;
        let k = parse_list(st, field(st, &mut lines, "canonical")?)?;
        expect_end(st, lines)?;
        Ok(LatticeArtifact {
            pic: PicardLattice {
                basis_expr,
                gram64,
                coords,
                kernel,
            },
            k_catalog,
            k,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LatticeArtifact {
        let pic = PicardLattice {
            basis_expr: IntMatrix::from_i64(&[vec![1, 0, 0], vec![0, 1, 0]]),
            gram64: IntMatrix::from_i64(&[vec![-2, 1], vec![1, -2]]),
            coords: IntMatrix::from_i64(&[vec![1, 0], vec![0, 1], vec![-1, -1]]),
            kernel: IntMatrix::from_i64(&[vec![1, 1, 1]]),
        };
        LatticeArtifact {
            pic,
            k_catalog: vec![0, 0, 1],
            k: vec![BigInt::from(-1), BigInt::from(-1)],
        }
    }

    #[test]
    fn lattice_round_trip() {
        let a = tiny();
        let text = a.to_text("abc");
        assert_eq!(LatticeArtifact::from_text(&text, "abc").unwrap(), a);
    }

    #[test]
    fn lattice_rejects_other_catalog() {
        let text = tiny().to_text("abc");
        assert!(matches!(
            LatticeArtifact::from_text(&text, "abd"),
            Err(CliError::CacheMismatch { .. })
        ));
        let text = text.replacen(LATTICE_FORMAT, "cuboid-lattice v0", 1);
        assert!(matches!(
            LatticeArtifact::from_text(&text, "abc"),
            Err(CliError::CacheMismatch { .. })
        ));
    }

    #[test]
    fn lattice_rejects_garbage() {
        let text = tiny().to_text("abc").replace("-2 1", "-2 x");
        assert!(matches!(
            LatticeArtifact::from_text(&text, "abc"),
            Err(CliError::Parse { .. })
        ));
        let mut text = tiny().to_text("abc");
        text.push_str("extra\n");
        assert!(LatticeArtifact::from_text(&text, "abc").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::open(dir.path()).unwrap();
        assert!(matches!(
            ws.read(Stage::Gram),
            Err(CliError::MissingCache(_))
        ));
        ws.write(Stage::Gram, "one").unwrap();
        ws.write(Stage::Gram, "two").unwrap();
        assert_eq!(ws.read(Stage::Gram).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
