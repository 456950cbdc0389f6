use std::path::PathBuf;
use std::process::{Command, Output};

use nilzeta::algebra::RatFuncProduct;
use serde_json::Value;

fn zeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeta"))
        .args(args)
        .env_remove("ZETA_CORPUS")
        .output()
        .expect("run zeta")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn compute_json(args: &[&str]) -> Value {
    let mut all = vec!["compute", "--json", "--kmax", "12"];
    all.extend_from_slice(args);
    let o = zeta(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn zeta_of(v: &Value) -> RatFuncProduct {
    serde_json::from_value(v["nielsen_zeta"].clone()).unwrap()
}

fn ints(v: &Value, key: &str) -> Vec<i128> {
    v["iterates"].as_array().unwrap().iter().map(|r| r[key].as_str().unwrap().parse().unwrap()).collect()
}

#[test]
fn klein_bottle_example() {
    let v = compute_json(&["--manifold", "klein-bottle", "--param", "a=3", "--param", "b=5", "--param", "s=1/2"]);
    assert_eq!(zeta_of(&v).to_string(), "(1 - 5*z)/(1 - 15*z)");
    assert_eq!(v["index"], 2);
    assert_eq!(v["p"], 2);
    assert_eq!(v["n"], 0);
    // N(f^k) = 15^k − 5^k
    let n = ints(&v, "nielsen");
    for (k, x) in n.iter().enumerate() {
        let k = k as u32 + 1;
        assert_eq!(*x, 15i128.pow(k) - 5i128.pow(k));
    }
    assert_eq!(v["table_zeta"], v["nielsen_zeta"]);
}

#[test]
fn circle_identity_has_trivial_zeta() {
    let v = compute_json(&["--manifold", "circle", "--param", "d=1"]);
    assert_eq!(zeta_of(&v), RatFuncProduct::one());
    assert!(ints(&v, "nielsen").iter().all(|&x| x == 0));
}

#[test]
fn hantzsche_wendt_identity_like() {
    let v = compute_json(&[
        "--manifold", "hantzsche-wendt", "--param", "a=1", "--param", "b=1", "--param", "c=1",
        "--param", "r=1/2", "--param", "s=1/2", "--param", "t=1/2",
    ]);
    assert_eq!(zeta_of(&v), RatFuncProduct::one());
    assert_eq!(v["index"], 1);
}

#[test]
fn explicit_matrix_matches_family() {
    let by_family = compute_json(&["--manifold", "klein-bottle", "--param", "a=3", "--param", "b=5", "--param", "s=1/2"]);
    let explicit = compute_json(&["--manifold", "klein-bottle", "--matrix", "3,0;0,5", "--translation", "0,1/2"]);
    assert_eq!(by_family["nielsen_zeta"], explicit["nielsen_zeta"]);
    assert_eq!(by_family["iterates"], explicit["iterates"]);
    assert!(explicit.get("table_zeta").is_none());
}

#[test]
fn json_round_trips() {
    let v = compute_json(&["--manifold", "klein-bottle", "--param", "a=-3", "--param", "b=7", "--param", "s=1/2"]);
    for key in ["lefschetz_zeta", "lefschetz_plus_zeta", "nielsen_zeta", "nielsen_zeta_structural"] {
        let r: RatFuncProduct = serde_json::from_value(v[key].clone()).unwrap();
        assert_eq!(serde_json::to_value(&r).unwrap(), v[key], "{key}");
    }
    assert_eq!(v["nielsen_zeta"], v["nielsen_zeta_structural"]);
    // L and N are decimal strings so large iterates survive JSON
    assert!(v["iterates"][0]["nielsen"].is_string());
}

#[test]
fn text_output_mentions_case_and_table() {
    let o = zeta(&["compute", "--manifold", "klein-bottle", "--param", "a=3", "--param", "b=5", "--param", "s=1/2", "--kmax", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("(1 - 5*z)/(1 - 15*z)"));
    assert!(s.contains("(matches)"));
    assert!(s.contains("Γ ≠ Γ⁺"));
    assert_eq!(s.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 3);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| zeta(args).status.code().unwrap();
    assert_eq!(code(&["compute", "--manifold", "no-such-manifold"]), 1);
    assert_eq!(code(&["compute", "--manifold", "circle", "--param", "d=x/"]), 1);
    assert_eq!(code(&["compute", "--manifold", "circle", "--param", "d=1", "--kmax", "0"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["compute", "--manifold", "klein-bottle", "--matrix", "3,0;0,5", "--translation", "0,1/3"]), 2);
    assert_eq!(code(&["compute", "--manifold", "klein-bottle", "--matrix", "3,0;0,5", "--translation", "0"]), 2);
    assert_eq!(code(&["compute", "--manifold", "klein-bottle", "--param", "a=2", "--param", "b=5", "--param", "s=1/2"]), 3);
    assert_eq!(code(&["verify-tables", "--corpus", "/nonexistent/corpus.json"]), 4);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn catalog_listing_and_filter() {
    let o = zeta(&["catalog"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for id in ["circle", "klein-bottle", "hantzsche-wendt"] {
        assert!(s.lines().any(|l| l.starts_with(id)), "{id}");
    }
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.iter().filter(|l| l.contains(" abelian ")).count(), 13);
    let o = zeta(&["catalog", "--filter", "heis"]);
    let heis = stdout(&o);
    assert!(heis.lines().count() > 1);
    assert!(heis.lines().skip(1).all(|l| l.contains("heisenberg")));
    let o = zeta(&["catalog", "--filter", "klein"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = zeta(&["catalog", "--filter", "zzz"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn verify_zero_samples_warns_and_passes() {
    let o = zeta(&["verify-tables", "--samples", "0"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zeta-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Appends a spurious factor to every zeta row of one family.
fn corrupted_corpus(victim: &str) -> PathBuf {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/families.json")).unwrap();
    let mut corpus: Value = serde_json::from_str(&text).unwrap();
    let fam = corpus["families"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|f| format!("{}#{}", f["manifold"].as_str().unwrap(), f["index"]) == victim)
        .expect("victim family");
    let bogus = serde_json::json!(["1 - 1000003*z", 1]);
    for row in fam["zeta"].as_array_mut().unwrap() {
        if let Some(all) = row.get_mut("all") {
            all.as_array_mut().unwrap().push(bogus.clone());
        } else {
            for cell in row["cells"].as_object_mut().unwrap().values_mut() {
                cell.as_array_mut().unwrap().push(bogus.clone());
            }
        }
    }
    let path = scratch(&victim.replace('#', "_")).join("families.json");
    std::fs::write(&path, serde_json::to_string(&corpus).unwrap()).unwrap();
    path
}

#[test]
fn corrupted_row_is_the_only_failure() {
    let victim = "klein-bottle#1";
    let path = corrupted_corpus(victim);
    let o = zeta(&["verify-tables", "--corpus", path.to_str().unwrap(), "--samples", "2"]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    let failing: Vec<_> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{out}");
    assert!(failing[0].contains(victim));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&format!("first failure: {victim}")));
}

#[test]
fn corpus_from_environment() {
    let path = corrupted_corpus("circle#1");
    let o = Command::new(env!("CARGO_BIN_EXE_zeta"))
        .args(["verify-tables", "--samples", "1"])
        .env("ZETA_CORPUS", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("circle#1"));
}

#[test]
fn clean_corpus_copy_passes() {
    let dir = scratch("clean");
    let path = dir.join("families.json");
    std::fs::copy(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/families.json"), &path).unwrap();
    let o = zeta(&["verify-tables", "--corpus", path.to_str().unwrap(), "--samples", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains(" 0 failed"));
}
