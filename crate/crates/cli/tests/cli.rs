use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn symcanon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcanon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = symcanon(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn rz_json(a: f64) -> String {
    json!({"axis": [0, 0, 1], "angle_rad": a}).to_string()
}

fn rz_matrix(a: f64) -> [f64; 9] {
    let (c, s) = (a.cos(), a.sin());
    [c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]
}

fn assert_matrix(v: &Value, expected: &[f64; 9], tol: f64) {
    let got: Vec<f64> = serde_json::from_value(v.clone()).unwrap();
    for (g, e) in got.iter().zip(expected) {
        assert!((g - e).abs() <= tol, "{got:?} vs {expected:?}");
    }
}

const REVOLUTION: &str = r#"{"kind":"revolution","axis":[0,0,1]}"#;

#[test]
fn canonicalize_examples() {
    let v = ok_json(&["canonicalize", "--rotation", &rz_json(PI / 2.0 + 0.1)]);
    assert_matrix(&v["canonical"], &rz_matrix(0.1 - PI / 2.0), 1e-12);
    assert_eq!(v["variant"], "map");

    let v = ok_json(&["canonicalize", "--symmetry", REVOLUTION, "--rotation", &rz_json(1.0)]);
    assert_matrix(&v["canonical"], &rz_matrix(0.0), 1e-12);

    let tilted = json!({"axis": [1, 2, 3], "angle_rad": 2.0}).to_string();
    let v = ok_json(&["canonicalize", "--symmetry", r#"{"kind":"sphere"}"#, "--rotation", &tilted]);
    assert_matrix(&v["canonical"], &rz_matrix(0.0), 0.0);
}

#[test]
fn map_prime_dispatch() {
    let v = ok_json(&["canonicalize", "--variant", "map_prime", "--rotation", &rz_json(0.2)]);
    assert_eq!(v["delta"], json!([1]));
    assert!(v.get("note").is_none());

    let v = ok_json(&[
        "canonicalize",
        "--variant",
        "map_prime",
        "--symmetry",
        REVOLUTION,
        "--rotation",
        &rz_json(1.0),
    ]);
    assert!(v["note"].as_str().unwrap().contains("continuous"));
    assert_eq!(v["delta"], Value::Null);

    let out = symcanon(&[
        "canonicalize",
        "--variant",
        "map_prime",
        "--symmetry",
        r#"{"kind":"sphere"}"#,
        "--rotation",
        &rz_json(1.0),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sphere"));
}

#[test]
fn malformed_input_reports_byte_offset() {
    let out = symcanon(&["canonicalize", "--rotation", "[1, 0, 0, 0, 1, 0, 0, 0 ?]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("byte 24"), "{}", stderr(&out));

    let out = symcanon(&["canonicalize"]);
    assert_eq!(out.status.code(), Some(1));
    let out = symcanon(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn rotation_from_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let rot = dir.path().join("r.json");
    fs::write(&rot, serde_json::to_string(&rz_matrix(PI / 2.0 + 0.1)).unwrap()).unwrap();
    let dest = dir.path().join("nested/out.json");
    let out = symcanon(&[
        "canonicalize",
        "--rotation",
        &format!("@{}", rot.display()),
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&dest).unwrap()).unwrap();
    assert_matrix(&v["canonical"], &rz_matrix(0.1 - PI / 2.0), 1e-12);
}

#[test]
fn partition_and_equiv() {
    let v = ok_json(&["partition", "--symmetry", r#"{"kind":"cyclic","axis":[0,0,1],"order":4}"#, "--rotation", &rz_json(PI / 4.0 - 0.01)]);
    assert_eq!(v["delta"], json!([2]));

    let v = ok_json(&["equiv", "--rotation", &rz_json(0.4), "--other", &rz_json(0.4 + PI)]);
    assert_eq!(v["equivalent"], true);
    assert_eq!(v["quotient_rotation_dist"], 0.0);

    let v = ok_json(&["equiv", "--rotation", &rz_json(0.4), "--other", &rz_json(0.7)]);
    assert_eq!(v["equivalent"], false);
    assert!((v["quotient_rotation_dist"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

fn pose(r: [f64; 9], t: [f64; 3]) -> Value {
    json!({"rotation": r, "translation": t})
}

fn write(path: &Path, v: &Value) -> String {
    fs::write(path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn eval_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let angles = [0.1, 1.2, -2.0];
    let gt: Vec<Value> = angles.iter().map(|&a| pose(rz_matrix(a), [0.1, 0.0, 5.0])).collect();
    let gt_path = write(&dir.path().join("gt.json"), &json!(gt));

    let v = ok_json(&["eval", "--estimates", &gt_path, "--ground-truth", &gt_path]);
    assert_eq!(v["aggregate"]["count"], 3);
    assert_eq!(v["aggregate"]["max_quotient_rotation_dist"], 0.0);
    assert_eq!(v["aggregate"]["mean_adi"], 0.0);

    // half-turn about z is a symmetry of the default object
    let flipped: Vec<Value> = angles.iter().map(|&a| pose(rz_matrix(a + PI), [0.1, 0.0, 5.0])).collect();
    let est = write(&dir.path().join("flip.json"), &json!(flipped));
    let v = ok_json(&["eval", "--estimates", &est, "--ground-truth", &gt_path]);
    assert_eq!(v["aggregate"]["max_quotient_rotation_dist"], 0.0);
    assert!(v["aggregate"]["mean_adi"].as_f64().unwrap() < 1e-9);

    let offset: Vec<Value> = angles.iter().map(|&a| pose(rz_matrix(a + 0.25), [0.1, 0.0, 5.0])).collect();
    let est = write(&dir.path().join("off.json"), &json!(offset));
    let v = ok_json(&["eval", "--estimates", &est, "--ground-truth", &gt_path]);
    for r in v["records"].as_array().unwrap() {
        assert!((r["quotient_rotation_dist"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }

    let short = write(&dir.path().join("short.json"), &json!(gt[..2]));
    let out = symcanon(&["eval", "--estimates", &short, "--ground-truth", &gt_path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("records"));
}

#[test]
fn pnp_recovers_pose_and_flags_degenerate_input() {
    // identity rotation at depth 7: corner (±1, ±0.6, ±0.3) projects through the default camera
    let corners: Vec<[f64; 2]> = (0..8)
        .map(|i| {
            let x = if i & 1 == 1 { 1.0 } else { -1.0 };
            let y = if i & 2 == 2 { 0.6 } else { -0.6 };
            let z = 7.0 + if i & 4 == 4 { 0.3 } else { -0.3 };
            [800.0 * x / z + 320.0, 800.0 * y / z + 240.0]
        })
        .collect();
    let v = ok_json(&["pnp", "--corners", &json!(corners).to_string()]);
    assert_matrix(&v["pose"]["rotation"], &rz_matrix(0.0), 1e-9);
    assert!((v["pose"]["translation"][2].as_f64().unwrap() - 7.0).abs() < 1e-9);

    let flat = json!([[100.0, 100.0]; 8].to_vec()).to_string();
    let out = symcanon(&["pnp", "--corners", &flat]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

fn small_config(dir: &Path, edit: impl FnOnce(&mut Value)) -> String {
    let mut cfg: Value =
        serde_json::from_str(include_str!("../../harness/configs/default.json")).unwrap();
    cfg["train"]["epochs"] = json!(6);
    cfg["train"]["eval_every"] = json!(3);
    cfg["data"]["n_train"] = json!(300);
    cfg["data"]["n_val"] = json!(80);
    edit(&mut cfg);
    write(&dir.join("cfg.json"), &cfg)
}

#[test]
fn demo_writes_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |_| {});
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = symcanon(&["demo", "--config", &cfg, "--out", out.to_str().unwrap()]);
        // too little training for the ordering to be guaranteed
        assert!(matches!(o.status.code(), Some(0 | 3)), "{}", stderr(&o));
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 10);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["modes"].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(a.join("map_prime_curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("epoch,loss,val_rms_px,val_rot_err_rad,clf_acc\n"));
}

#[test]
fn demo_on_revolution_has_identical_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |c| c["symmetry"] = serde_json::from_str(REVOLUTION).unwrap());
    let out = dir.path().join("rev");
    let o = symcanon(&["demo", "--config", &cfg, "--mode", "all", "--out", out.to_str().unwrap()]);
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["curve_gap"], 0.0);
    let a = fs::read_to_string(out.join("map_only_curve.csv")).unwrap();
    let b = fs::read_to_string(out.join("map_prime_curve.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn demo_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = small_config(dir.path(), |c| c["train"]["epochs"] = json!(0));
    let o = symcanon(&["demo", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epochs"));

    let cfg = small_config(dir.path(), |c| {
        c["train"]["learning_rate"] = json!(1e300);
        c["train"]["final_lr_fraction"] = json!(1.0);
    });
    let o = symcanon(&["demo", "--config", &cfg, "--mode", "map_only", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("diverged"));

    let cfg = small_config(dir.path(), |c| c["bogus"] = json!(1));
    let o = symcanon(&["demo", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
