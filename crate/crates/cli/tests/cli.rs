use std::path::Path;
use std::process::{Command, Output};

fn gpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn frame_lists_n_squared_projectors() {
    let out = gpt(&["frame", "--n", "3"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["K"], 9);
    assert_eq!(json["labels"][3], "12x");
    assert_eq!(json["labels"][4], "12y");
}

#[test]
fn frame_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.frame.json");
    let out = gpt(&["frame", "--n", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(json["dimension"], 2);
}

#[test]
fn dmatrix_csv_has_header_and_rows() {
    let out = gpt(&["dmatrix", "--n", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ",1,2,12x,12y");
    assert_eq!(lines[1], "1,1,0,0.5,0.5");
    assert_eq!(lines.len(), 5);
}

#[test]
fn classical_dmatrix_is_identity() {
    let json = stdout_json(&gpt(&["dmatrix", "--n", "3", "--theory", "classical"]));
    assert_eq!(
        json["rows"],
        serde_json::json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    );
}

#[test]
fn convert_round_trip_through_r() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write(
        dir.path(),
        "rho.json",
        "[[[0.75,0],[0,-0.25]],[[0,0.25],[0.25,0]]]",
    );
    let out = gpt(&["convert", "--in", &rho, "--from", "rho", "--to", "r"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = write(
        dir.path(),
        "r.json",
        &String::from_utf8(out.stdout).unwrap(),
    );
    let back = stdout_json(&gpt(&["convert", "--in", &r, "--from", "r", "--to", "rho"]));
    let m = &back["matrix"];
    let close = |v: &serde_json::Value, x: f64| (v.as_f64().unwrap() - x).abs() < 1e-12;
    assert!(close(&m[0][0][0], 0.75));
    assert!(close(&m[0][1][1], -0.25));
    assert!(close(&m[1][0][1], 0.25));
    assert!(close(&m[1][1][0], 0.25));
}

#[test]
fn convert_p_of_basis_state() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write(
        dir.path(),
        "rho.json",
        r#"{"dimension": 2, "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#,
    );
    let json = stdout_json(&gpt(&[
        "convert", "--in", &rho, "--from", "rho", "--to", "p",
    ]));
    assert_eq!(json["values"], serde_json::json!([1.0, 0.0, 0.5, 0.5]));
}

#[test]
fn convert_rejects_wrong_representation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"dimension": 2, "K": 4, "role": "state", "representation": "p", "values": [1, 0, 0.5, 0.5]}"#,
    );
    let out = gpt(&["convert", "--in", &p, "--from", "r", "--to", "rho"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bloch_spherical_point() {
    let out = gpt(&["bloch", "--a", "0.5", "--b", "0.5", "--c", "0.5"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["data"]["c_minus"], 0.0);
    assert_eq!(json["data"]["c_plus"], 1.0);
    assert_eq!(json["data"]["surface"]["kind"], "ellipsoid");
}

#[test]
fn bloch_out_of_range_is_usage_error() {
    assert_eq!(
        gpt(&["bloch", "--a", "1.5", "--b", "0.5", "--c", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn transform_of_unitary_and_kraus() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.json", "[[[0,0],[1,0]],[[1,0],[0,0]]]");
    let out = gpt(&["transform", "--unitary", &x]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let json = stdout_json(&out);
    // X swaps the two basis fiducials
    assert_eq!(json["data"]["z"][0][1].as_f64().unwrap().round(), 1.0);

    let s = 0.5_f64.sqrt();
    let kraus = format!("[[[[{s},0],[0,0]],[[0,0],[{s},0]]], [[[0,0],[{s},0]],[[{s},0],[0,0]]]]");
    let k = write(dir.path(), "k.json", &kraus);
    assert!(gpt(&["transform", "--kraus", &k]).status.success());
}

#[test]
fn transform_flags_expanding_kraus_set() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "k.json", "[[[[2,0],[0,0]],[[0,0],[1,0]]]]");
    assert_eq!(gpt(&["transform", "--kraus", &k]).status.code(), Some(1));
}

#[test]
fn transform_requires_an_input() {
    assert_eq!(gpt(&["transform"]).status.code(), Some(2));
}

#[test]
fn composite_of_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write(
        dir.path(),
        "bell.json",
        "[[[0.5,0],[0,0],[0,0],[0.5,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0.5,0],[0,0],[0,0],[0.5,0]]]",
    );
    let out = gpt(&["composite", "--rho", &bell]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["data"]["dof_rank"], 16);
    assert!(
        json["data"]["partial_transpose_min_eigenvalue"]
            .as_f64()
            .unwrap()
            < -0.49
    );
}

#[test]
fn verify_quantum_passes() {
    let out = gpt(&["verify", "--theory", "quantum", "--n", "2", "--seed", "3"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn verify_classical_passes_by_expectation() {
    let out = gpt(&["verify", "--theory", "classical", "--n", "2"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["checks"][4]["status"], "expected-fail");
}

#[test]
fn simulate_writes_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "seed = 1\n[[pipeline]]\nkind = \"simulate\"\nn = 2\nbasis = 1\nshots = 100000\n\n[[pipeline]]\nkind = \"frame\"\nn = 3\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = gpt(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            "5",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ra = std::fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["seed"], 5);
    let csv = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(csv.starts_with("pipeline,kind,check,status,max_deviation\n"));
}

#[test]
fn simulate_rejects_unknown_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[[pipeline]]\nkind = \"teleport\"\n",
    );
    let out = gpt(&[
        "simulate",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("teleport"));
}

#[test]
fn simulate_accepts_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"seed": 2, "pipeline": [{"kind": "continuity", "theory": "quantum", "n": 2}]}"#,
    );
    let out = gpt(&[
        "simulate",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
}
