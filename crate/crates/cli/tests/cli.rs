use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cuboid(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuboid"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lattice_without_gram_is_a_missing_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = cuboid(dir.path(), &["lattice"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing cache"), "{}", stderr(&out));
    assert!(!dir.path().join("lattice.txt").exists());
}

#[test]
fn catalog_then_tampered_gram() {
    let dir = tempfile::tempdir().unwrap();
    let first = cuboid(dir.path(), &["catalog"]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS nodes.count ")));
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
    let path = dir.path().join("catalog.txt");
    let before = fs::read(&path).unwrap();
    assert!(before.starts_with(b"cuboid-catalog v1\n"));

    let again = cuboid(dir.path(), &["catalog"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read(&path).unwrap(), before);

    fs::write(
        dir.path().join("gram.txt"),
        "cuboid-gram v1\ncatalog deadbeef\nsize 0\n",
    )
    .unwrap();
    let out = cuboid(dir.path(), &["lattice"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("cache mismatch in gram"),
        "{}",
        stderr(&out)
    );
    assert!(!dir.path().join("lattice.txt").exists());
}

#[test]
fn edited_catalog_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cuboid(dir.path(), &["catalog"]).status.code(), Some(0));
    let path = dir.path().join("catalog.txt");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("extra\n");
    fs::write(&path, text).unwrap();
    let out = cuboid(dir.path(), &["gram"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("cache mismatch in catalog"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn json_output_is_a_claim_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = cuboid(dir.path(), &["--format", "json", "catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let claims = v.as_array().unwrap();
    assert!(claims.iter().all(|c| c["pass"] == true));
    assert!(claims
        .iter()
        .any(|c| c["id"] == "catalog.families" && c["computed"] == "48/32/12/48"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cuboid(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
