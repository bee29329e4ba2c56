use std::path::Path;

use gdes::cli::run;
use gdes::specdoc::{preset, spec_to_json};
use serde_json::Value;

fn gdes(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("gdes").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = gdes(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn preset_file_matches_builtin() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/edes.json");
    let on_disk = std::fs::read_to_string(&path).unwrap();
    assert_eq!(on_disk.trim_end(), spec_to_json(&preset("edes").unwrap()).trim_end());
    let (code, out, _) = gdes(&[
        "encrypt", "--spec", path.to_str().unwrap(),
        "--key", "11012012122012012110", "--in", "012012012012012012",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "210212002210210000");
}

#[test]
fn integer_forms_and_json_output() {
    let v = json(&[
        "--format", "json", "encrypt", "--preset", "edes",
        "--key-int", "0", "--int", "0",
    ]);
    let c = v["output"].as_str().unwrap().to_string();
    let int = v["int"].as_str().unwrap().to_string();
    let (_, out, _) = gdes(&["decrypt", "--preset", "edes", "--key-int", "0", "--int", &int]);
    assert_eq!(out.trim(), "000000000000000000");
    let (_, out, _) = gdes(&["decrypt", "--preset", "edes", "--key-int", "0", "--in", &c]);
    assert_eq!(out.trim(), "000000000000000000");
}

#[test]
fn out_of_range_integer_is_rejected() {
    let (code, _, err) = gdes(&[
        "encrypt", "--preset", "edes", "--key-int", "3486784401", "--int", "0",
    ]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}

#[test]
fn bad_spec_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut doc: Value = serde_json::from_str(&spec_to_json(&preset("edes").unwrap())).unwrap();
    doc["initial_perm"][0] = Value::from(99);
    std::fs::write(&path, doc.to_string()).unwrap();
    let (code, _, err) = gdes(&["spec", "--spec", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("/initial_perm"), "{err}");
}

#[test]
fn orbit_and_sign_on_small_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.json");
    std::fs::write(&path, spec_to_json(&gdes::specdoc::small_des(3, 1).unwrap())).unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["orbit", "--spec", p, "--key-int", "5", "--msg-int", "7"]);
    assert_eq!(v["truncated"], false);
    assert!(v["length"].as_u64().unwrap() >= 1);
    let v = json(&["sign", "--spec", p, "--key-int", "5"]);
    assert_eq!(v["domain"], 6561);
    assert!(v["sign"] == 1 || v["sign"] == -1);
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["closure", "--small-des", "3", "--probes", "2", "--seed", "9"];
    let (_, a, _) = gdes(&args);
    let (_, b, _) = gdes(&args);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["threshold"], v["key_space"]);
    let v = json(&["closure", "--small-des", "3", "--probes", "2", "--seed", "9", "--threshold-exp", "8"]);
    assert_eq!(v["threshold"], "6561");
}

#[test]
fn csv_reports() {
    let (code, out, _) = gdes(&[
        "--format", "csv", "subgroup", "--preset", "edes", "--gen-keys", "1,2",
        "--probe", "0,~1:5", "--max-steps", "1000",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "m,k,word,orb,truncated,bound,compare_to,exceeds");
    assert!(lines.next().unwrap().starts_with("5,1 2,\"0,~1\","));
}

#[test]
fn checkpointed_orbit_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("orbit.ck");
    let ck = ck.to_str().unwrap();
    let base = ["orbit", "--preset", "edes", "--key-int", "12345", "--msg-int", "678"];
    let full = json(&[&base[..], &["--max-steps", "300000000"]].concat());
    let len = full["length"].as_u64().unwrap();
    let first = json(&[&base[..], &["--max-steps", &(len / 2).to_string(), "--checkpoint", ck]].concat());
    assert_eq!(first["truncated"], true);
    let resumed = json(&[&base[..], &["--max-steps", "300000000", "--checkpoint", ck, "--resume"]].concat());
    assert_eq!(resumed["length"], full["length"]);
}

#[test]
fn brute_census_from_tiny_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.json");
    std::fs::write(&path, r#"{"group":{"moduli":[2]},"t":1,"tables":[[1,0]]}"#).unwrap();
    let v = json(&["brute", "--tiny-spec", path.to_str().unwrap(), "--n-rounds", "3"]);
    // With f(y) = y + 1 the single Feistel round has order 3.
    assert_eq!(v["levels"][2]["feistel"]["contains_identity"], true);
    assert_eq!(v["levels"][2]["with_swap"]["contains_identity"], false);
}

#[test]
fn sbox_commands() {
    let v = json(&["sbox-gen", "--moduli", "3", "--i", "2", "--j", "3", "--seed", "4", "--row-surjective"]);
    assert_eq!(v["table"].as_array().unwrap().len(), 9 * 27);
    let v = json(&["sbox-audit", "--preset", "edes"]);
    assert_eq!(v.as_array().unwrap().len(), 3);
    let v = json(&["sbox-expand", "--preset", "edes", "--target-modulus", "9"]);
    assert_eq!(v["group"]["moduli"][0], 9);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = gdes(&["--help"]);
    assert_eq!(code, 0);
    for cmd in ["encrypt", "orbit", "closure", "purity", "walk", "subgroup", "sign", "brute", "verify-paper"] {
        assert!(out.contains(cmd), "{cmd}");
    }
}
