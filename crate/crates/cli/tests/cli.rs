use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exterior-wave-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_EVOLVE: &[&str] = &["--n", "401", "--r_max", "16", "--duration", "2", "--save_every", "20", "--profile_n", "801"];

#[test]
fn unknown_keys_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(tmp.path(), &["evolve", "--out_dir", "o", "--durration", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("durration"));
    // nothing is computed before validation
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn missing_inputs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(tmp.path(), &["norms", "--out_dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["exit_code"], 2);
}

#[test]
fn free_evolution_matches_closed_form_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a = vec!["evolve", "--out_dir", "a"];
    a.extend_from_slice(SMALL_EVOLVE);
    let mut b = vec!["evolve", "--out_dir", "b"];
    b.extend_from_slice(SMALL_EVOLVE);
    assert_eq!(lab(tmp.path(), &a).status.code(), Some(0));
    assert_eq!(lab(tmp.path(), &b).status.code(), Some(0));

    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["command"], "evolve");
    assert_eq!(m["exit_code"], 0);
    let err = m["results"]["max_abs_error_vs_closed_form"].as_f64().unwrap();
    assert!(err < 1e-2, "error {err}");
    let outputs = m["outputs"].as_array().unwrap();
    for o in outputs {
        assert!(o["resolution"]["grid"]["n"].is_u64(), "{o}");
        assert!(tmp.path().join("a").join(o["file"].as_str().unwrap()).exists());
    }

    // byte-identical data files across runs
    for entry in fs::read_dir(tmp.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.json" {
            continue;
        }
        let x = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let y = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn overrides_win_over_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.json"), r#"{"out_dir": "o", "duration": 1.0, "n": 401, "r_max": 16, "profile_n": 801}"#).unwrap();
    let out = lab(tmp.path(), &["evolve", "--config", "c.json", "--duration", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["config"]["duration"], 0.5);
    assert_eq!(m["config"]["n"], 401);
    // defaults are resolved into the manifest
    assert_eq!(m["config"]["cfl"], 0.5);
}

#[test]
fn nonradiative_sweep_writes_one_branch_per_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(tmp.path(), &["nonradiative", "--out_dir", "o", "--F", "defocusing_quintic", "--alpha", "0.5,1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o");
    for i in 0..3 {
        assert!(dir.join(format!("branch_{i:02}.csv")).exists());
        let s: Value = serde_json::from_str(&fs::read_to_string(dir.join(format!("branch_{i:02}.json"))).unwrap()).unwrap();
        assert!(s["alpha"].is_f64());
    }
    let table = fs::read_to_string(dir.join("tail_law.csv")).unwrap();
    assert!(table.starts_with("# tail_law"));
    assert_eq!(table.lines().nth(1), Some("alpha,R,tail_energy,ratio"));
    assert!(!table.contains('\r'));
}

#[test]
fn synthesize_then_extract_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(lab(tmp.path(), &["profile", "synthesize", "--out_dir", "s", "--profile_n", "801"]).status.code(), Some(0));
    let out = lab(tmp.path(), &["profile", "extract", "--out_dir", "e", "--state_csv", "s/state.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = manifest(&tmp.path().join("s"));
    let e = manifest(&tmp.path().join("e"));
    let p0 = s["results"]["profile_energy"].as_f64().unwrap();
    let p1 = e["results"]["profile_energy"].as_f64().unwrap();
    assert!((p0 - p1).abs() / p0 < 1e-2, "{p0} vs {p1}");
}

#[test]
fn verify_reports_failures_with_exit_four() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = lab(tmp.path(), &["verify", "isometry", "--out_dir", "v", "--cases", "2"]);
    assert_eq!(ok.status.code(), Some(0));
    let table = fs::read_to_string(tmp.path().join("v/verify.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| l.ends_with(",true")).count(), 4);

    let bad = lab(
        tmp.path(),
        &["verify", "conservation", "--out_dir", "w", "--cases", "1", "--conservation_tolerance", "0", "--conservation_time", "1"],
    );
    assert_eq!(bad.status.code(), Some(4));
    assert_eq!(manifest(&tmp.path().join("w"))["exit_code"], 4);
}

#[test]
fn charnum_of_alpha_member_against_its_base() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(tmp.path(), &["construct", "alpha", "--out_dir", "c", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lab(tmp.path(), &["charnum", "--out_dir", "n", "--u_state", "c/state.csv", "--v_state", "c/base.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let alpha = manifest(&tmp.path().join("n"))["results"]["alpha"].as_f64().unwrap();
    assert!((alpha - 0.5).abs() < 0.5 * 0.02, "alpha {alpha}");
}

#[test]
fn unexpected_blowup_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let bumps = r#"[{"amplitude": 3, "center": 0, "half_width": 1}]"#;
    let run = |out: &str, extra: &[&str]| {
        let mut args = vec!["scatter-experiment", "--out_dir", out, "--F", "focusing_quintic", "--bumps", bumps];
        args.extend_from_slice(&["--duration", "2", "--n", "2001"]);
        args.extend_from_slice(extra);
        lab(tmp.path(), &args).status.code()
    };
    assert_eq!(run("a", &[]), Some(3));
    assert_eq!(run("b", &["--expect_blowup", "true"]), Some(0));
    assert_eq!(manifest(&tmp.path().join("b"))["results"]["verdict"], "blowup");
}
