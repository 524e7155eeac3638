use std::path::PathBuf;
use std::process::{Command, Output};

use fcrystal_cli::bundled::{self, DOCUMENTS};
use fcrystal_cli::doc::{CrystalDocument, Overrides};

fn fcrystal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcrystal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fcrystal-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bundled_documents_round_trip() {
    for (name, text) in DOCUMENTS {
        let d = CrystalDocument::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(CrystalDocument::parse(&d.to_json()).unwrap(), d, "{name}");
    }
}

#[test]
fn bundled_documents_build() {
    let o = Overrides::default();
    for name in ["unit", "twist", "ordinary", "supersingular", "non_exact"] {
        bundled::load(name).unwrap().to_point(&o).unwrap();
    }
    for name in ["unit_line", "unit_torus", "p_divisible_line", "rank_three_line", "lifting_torus"] {
        assert!(bundled::load(name).unwrap().to_lifted(&o).unwrap().check_compatibility().ok, "{name}");
    }
    bundled::load("rank_three_plane").unwrap().to_plane(&o).unwrap();
}

#[test]
fn twist_class_number_report() {
    let o = fcrystal(&["--json", "point", "twist", "lvalue"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["lhs_valuation"], -2);
    assert_eq!(v["data"]["T0"]["order_val"], 2);
    assert_eq!(v["claims"][0]["verdict"], "pass");
    assert_eq!(v["claims"][0]["paper_ref"], "zeta/class-number");
}

#[test]
fn supersingular_slopes_report() {
    let o = fcrystal(&["--json", "point", "supersingular", "newton"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["newton"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(v["data"]["hodge"], serde_json::json!([0, 1]));
}

#[test]
fn non_uniform_witness_and_rank_jump() {
    let o = fcrystal(&["--json", "lifted", "rank_three_line", "uniformity", "--r", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["witness"], "T^2⊗e3");
    let o = fcrystal(&["--json", "lifted", "rank_three_plane", "rank-jump", "--r", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["data"]["generic_rank"].as_u64(), v["data"]["fiber_rank"].as_u64()), (Some(3), Some(4)));
}

#[test]
fn first_non_exact_level() {
    let o = fcrystal(&["--json", "point", "non_exact", "exactness", "--sub", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["first_failure"], 0);
}

#[test]
fn reduced_precision_exits_three_with_hint() {
    for args in
        [&["point", "twist", "lvalue", "--precision", "2"][..], &["lifted", "unit_line", "griffiths", "--r", "1", "--precision", "1"]]
    {
        let o = fcrystal(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("retry with --precision"), "{args:?}");
    }
}

#[test]
fn verify_all_below_declared_precision_is_insufficient() {
    let o = fcrystal(&["verify-all", "--criterion", "9", "--precision", "6"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("INSUFFICIENT"));
}

#[test]
fn input_errors_exit_two() {
    let dir = scratch("input");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, bundled::text("ordinary").unwrap().replace("\"rank\": \"2\"", "\"rank\": \"3\"")).unwrap();
    let o = fcrystal(&["point", bad.to_str().unwrap(), "newton"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&bad, "{ \"schema\": ").unwrap();
    let o = fcrystal(&["point", bad.to_str().unwrap(), "newton"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    let o = fcrystal(&["point", "no-such-document", "newton"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_data_dir_exits_two() {
    let dir = scratch("corrupt");
    for (name, text) in DOCUMENTS {
        std::fs::write(dir.join(format!("{name}.json")), text).unwrap();
    }
    let o = fcrystal(&["verify-all", "--criterion", "7", "--data-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    std::fs::write(dir.join("non_exact.json"), bundled::text("non_exact").unwrap().replace("fcrystal-document/1", "fcrystal-document/0"))
        .unwrap();
    let o = fcrystal(&["verify-all", "--criterion", "7", "--data-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
