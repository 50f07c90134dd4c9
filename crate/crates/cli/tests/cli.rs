use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn oidkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oidkit")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn build_koszul(dir: &Path, name: &str) -> PathBuf {
    let o = oidkit(dir, &["build", "--family", "koszul", "--phi", "x^3+y^3+z^3", "--vars", "x,y,z", "--max-arity", "4", "-o", name]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(name)
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    build_koszul(dir.path(), "k.json");
    let o = oidkit(dir.path(), &["verify", "k.json", "--max-arity", "4"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 residuals"));
}

#[test]
fn corrupted_structure_reports_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let p = build_koszul(dir.path(), "k.json");
    let mut v = read(&p);
    v["brackets"]["2"]["dP[1,2] . dP[1,3]"] = serde_json::json!({"dP[2,3]": "x"});
    std::fs::write(dir.path().join("bad.json"), serde_json::to_string(&v).unwrap()).unwrap();
    let o = oidkit(dir.path(), &["verify", "bad.json"]);
    assert_eq!(code(&o), 1);
    let o = oidkit(dir.path(), &["--json", "verify", "bad.json"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!report["residuals"].as_array().unwrap().is_empty());
    assert_eq!(report["exit_code"], 1);
}

#[test]
fn restriction_verifies() {
    let dir = tempfile::tempdir().unwrap();
    build_koszul(dir.path(), "k.json");
    let o = oidkit(dir.path(), &["restrict", "k.json", "--phi", "x^3+y^3+z^3", "-o", "kw.json"]);
    assert_eq!(code(&o), 0);
    assert!(read(&dir.path().join("kw.json")).get("modulus").is_some());
    assert_eq!(code(&oidkit(dir.path(), &["verify", "kw.json"])), 0);
}

#[test]
fn restriction_by_a_non_invariant_function_fails() {
    let dir = tempfile::tempdir().unwrap();
    build_koszul(dir.path(), "k.json");
    let o = oidkit(dir.path(), &["restrict", "k.json", "--phi", "x", "-o", "kx.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho(dP["));
}

#[test]
fn parse_and_io_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&oidkit(dir.path(), &["verify", "missing.json"])), 2);
    std::fs::write(dir.path().join("junk.json"), "{not json").unwrap();
    assert_eq!(code(&oidkit(dir.path(), &["verify", "junk.json"])), 2);
    assert_eq!(code(&oidkit(dir.path(), &["frobnicate"])), 2);
    let o = oidkit(dir.path(), &["build", "--family", "koszul", "--phi", "x^3+w", "--vars", "x,y", "-o", "k.json"]);
    assert_eq!(code(&o), 2);
    std::fs::write(dir.path().join("ptr.json"), r#"{"complex": {"vars": ["x"], "generators": [{"label": "a", "degree": 0}]}}"#).unwrap();
    let o = oidkit(dir.path(), &["verify", "ptr.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/complex/generators/0/degree"));
}

#[test]
fn construct_morphism_and_homotopy_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_koszul(d, "k.json");
    let o = oidkit(d, &["build", "--family", "koszul", "--phi", "x^3+y^3+z^3", "--complex-only", "-o", "c.json"]);
    assert_eq!(code(&o), 0);
    let o = oidkit(d, &["construct", "--complex", "c.json", "--max-arity", "3", "--weight-cap", "12", "-o", "built.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cert = read(&d.join("built.json.cert.json"));
    assert!(cert["steps"].as_array().unwrap().iter().all(|s| s["solved"] == true));
    assert_eq!(code(&oidkit(d, &["verify", "built.json"])), 0);

    let o = oidkit(d, &["morphism", "--from", "built.json", "--to", "k.json", "--max-arity", "2", "-o", "phi.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("phi.json.cert.json").exists());

    let h = serde_json::json!({
        "kind": "coderivation",
        "degree": -1,
        "coeffs": {"0": {"dP[1,2]": {"dP[1,2,3]": "z"}}},
    });
    std::fs::write(d.join("h.json"), serde_json::to_string(&h).unwrap()).unwrap();
    let o = oidkit(d, &["homotopy", "--from", "built.json", "--to", "k.json", "--morphism", "phi.json", "--h", "h.json", "-o", "path.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = read(&d.join("path.json"));
    assert_eq!(path["time"], "t");
}

#[test]
fn construction_on_a_non_exact_complex_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = oidkit(d, &["build", "--family", "ideal", "--phis", "x^2;x*y", "--vars", "x,y", "--complex-only", "-o", "c.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&oidkit(d, &["homology", "c.json", "--expect-exact"])), 1);
    assert_eq!(code(&oidkit(d, &["construct", "--complex", "c.json", "-o", "s.json"])), 1);
}

#[test]
fn construction_beyond_the_weight_cap_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = oidkit(d, &["build", "--family", "koszul", "--phi", "x^3+y^3+z^3", "--complex-only", "-o", "c.json"]);
    assert_eq!(code(&o), 0);
    let o = oidkit(d, &["construct", "--complex", "c.json", "--weight-cap", "0", "-o", "s.json"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn roundtrip_normalizes_and_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = build_koszul(d, "k.json");
    assert_eq!(code(&oidkit(d, &["roundtrip", "k.json"])), 0);
    let mut v = read(&p);
    v["brackets"]["2"] = serde_json::json!({
        "dP[1,3] . dP[1,2]": {"dP[2,3]": "3*x^2"},
        "dP[2,3] . dP[1,3]": {"dP[1,2]": "0"},
    });
    std::fs::write(d.join("messy.json"), serde_json::to_string(&v).unwrap()).unwrap();
    let o = oidkit(d, &["roundtrip", "messy.json", "-o", "clean.json"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("normalized on write: true"));
    let clean = read(&d.join("clean.json"));
    assert_eq!(clean["brackets"]["2"], serde_json::json!({"dP[1,2] . dP[1,3]": {"dP[2,3]": "-3*x^2"}}));
    let o = oidkit(d, &["roundtrip", "clean.json"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("normalized on write: false"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_koszul(d, "a.json");
    build_koszul(d, "b.json");
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());
    for out in ["s1.json", "s2.json"] {
        let o = oidkit(d, &["build", "--family", "ideal", "--phis", "x;y", "--vars", "x,y", "--complex-only", "-o", "c.json"]);
        assert_eq!(code(&o), 0);
        assert_eq!(code(&oidkit(d, &["construct", "--complex", "c.json", "--weight-cap", "6", "-o", out])), 0);
    }
    assert_eq!(std::fs::read(d.join("s1.json")).unwrap(), std::fs::read(d.join("s2.json")).unwrap());
}

#[test]
fn twist_rn_and_homology_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_koszul(d, "k.json");
    assert_eq!(code(&oidkit(d, &["twist", "k.json", "--chi", "x", "-o", "kt.json"])), 0);
    assert_eq!(code(&oidkit(d, &["verify", "kt.json"])), 0);
    assert_eq!(code(&oidkit(d, &["twist", "k.json", "--chi", "1", "-o", "k1.json"])), 0);
    assert_eq!(std::fs::read(d.join("k.json")).unwrap(), std::fs::read(d.join("k1.json")).unwrap());
    let o = oidkit(d, &["--json", "rn", "k.json", "--left", "1", "--right", "1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["entries"], serde_json::json!({}));
    let o = oidkit(d, &["--json", "homology", "k.json", "--weight-cap", "6", "--expect-exact"]);
    assert_eq!(code(&o), 0);
}
