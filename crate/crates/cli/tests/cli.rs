use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn opgraph(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_opgraph"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn opgraph_json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, stdout, stderr) = opgraph(&all);
    let v = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {stdout}\n{stderr}"));
    (code, v)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn verify_theta_two_exact() {
    let (code, r) = opgraph_json(&["verify", "--theta", "2", "--backend", "exact"]);
    assert_eq!(code, 0);
    assert_eq!(r["passed"], true);
    assert_eq!(r["data"]["dim_m_theta"], 8);
    assert_eq!(r["data"]["operator_system"], false);
    assert_eq!(r["data"]["dim_ker_psi"], 0);
    let profile = r["data"]["block_profile"].as_array().unwrap();
    assert_eq!(profile.len(), 2);
    assert!(profile.iter().all(|b| b["matrix_size"] == 2));
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["backend"] == "exact"));
}

#[test]
fn verify_theta_one() {
    let (code, r) = opgraph_json(&["verify", "--theta", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["dim_m_theta"], 4);
    assert_eq!(r["data"]["dim_ker_psi"], 4);
    assert_eq!(r["data"]["block_profile"].as_array().unwrap().len(), 4);
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"J^2 = 0"));
}

#[test]
fn verify_negative_and_float_theta() {
    let (code, r) = opgraph_json(&["verify", "--theta", "-1"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["dim_m_theta"], 4);
    let (code, r) = opgraph_json(&["verify", "--theta", "exp(i*pi/5)"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["backend"], "float");
    assert_eq!(r["data"]["dim_m_theta"], 8);
    assert_eq!(r["data"]["operator_system"], true);
}

#[test]
fn verify_theta_zero_is_usage_error() {
    let (code, _, stderr) = opgraph(&["verify", "--theta", "0"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("theta must be nonzero"), "{stderr}");
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(opgraph(&["verify"]).0, 2);
    assert_eq!(opgraph(&["verify", "--theta", "1+"]).0, 2);
    assert_eq!(
        opgraph(&["verify", "--theta", "exp(i*pi/3)", "--backend", "exact"]).0,
        2
    );
    assert_eq!(opgraph(&["frobnicate"]).0, 2);
}

#[test]
fn sweep_unit_circle_shows_dimension_gap() {
    let (code, r) = opgraph_json(&["sweep", "--theta", "unit-circle:n=8"]);
    assert_eq!(code, 0);
    let dims: Vec<u64> = r["data"]["dims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_u64().unwrap())
        .collect();
    assert_eq!(dims, [4, 8, 8, 8, 4, 8, 8, 8]);
    let rows = r["data"]["rows"].as_array().unwrap();
    let angles: Vec<f64> = rows
        .iter()
        .map(|row| row["angle"].as_f64().unwrap())
        .collect();
    assert!(angles.windows(2).all(|w| w[0] < w[1]));
    for (row, label) in rows.iter().step_by(2).zip(["1", "i", "-1", "-i"]) {
        assert_eq!(row["theta"], label);
        assert_eq!(row["backend"], "exact");
    }
}

#[test]
fn sweep_injects_special_points_for_odd_n() {
    let (code, r) = opgraph_json(&["sweep", "--range", "unit-circle:n=5"]);
    assert_eq!(code, 0);
    let rows = r["data"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows.iter().filter(|row| row["dim"] == 4).count(), 2);
}

#[test]
fn sweep_lists() {
    let (code, r) = opgraph_json(&["sweep", "--theta", "1,-1"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["dims"], serde_json::json!([4, 4]));
    let (code, r) = opgraph_json(&["sweep", "--theta", "i"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["dims"], serde_json::json!([8]));
    assert_eq!(r["data"]["rows"][0]["ker_psi"], 0);
}

#[test]
fn fp_normal_forms() {
    let (code, r) = opgraph_json(&["fp", "--theta", "2", "x*y"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["normal_form"], "g");

    let (code, r) = opgraph_json(&["fp", "--theta", "1", "g^2 - 1"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["psi_is_zero"], true);
    assert_eq!(r["data"]["coefficients"][0], "-1");

    let (code, r) = opgraph_json(&[
        "fp",
        "--theta",
        "3/5+4/5*i",
        "2*x*g - 1/3*z",
        "--times",
        "y + g^3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["checks"][0]["status"], "pass");
    assert_eq!(r["checks"][0]["residual"], 0.0);
}

#[test]
fn fp_parse_errors() {
    let (code, _, stderr) = opgraph(&["fp", "--theta", "2", ""]);
    assert_eq!(code, 2);
    assert!(stderr.contains("empty expression"), "{stderr}");
    let (code, _, stderr) = opgraph(&["fp", "--theta", "2", "x + w"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("column 5"), "{stderr}");
}

#[test]
fn rep_reports_characters() {
    let (code, r) = opgraph_json(&["rep", "--theta", "2"]);
    assert_eq!(code, 0);
    let blocks = r["data"]["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[0]["chi_g"], "2");
    assert_eq!(blocks[1]["chi_g"], "-2");
    assert_eq!(blocks[0]["chi_z"], "1");
    assert_eq!(blocks[1]["chi_z"], "-1");
    let (code, r) = opgraph_json(&["rep", "--theta", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["block_dims"], serde_json::json!([1, 1, 1, 1]));
}

const AMPLITUDE_DAMPING: &str = r#"{"dim_in": 2, "dim_out": 2,
  "kraus": [[["1", "0"], ["0", "3/5"]], [["0", "4/5"], ["0", "0"]]]}"#;

#[test]
fn identity_channel_graph_is_one_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "id.json",
        r#"{"dim_in": 3, "dim_out": 3,
      "kraus": [[["1","0","0"],["0","1","0"],["0","0","1"]]]}"#,
    );
    let (code, r) = opgraph_json(&["channel", "--file", &f, "--action", "graph"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["graph_dim"], 1);
    assert_eq!(r["data"]["backend"], "exact");
}

#[test]
fn graph_check_on_exact_and_float_channels() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "amp.json", AMPLITUDE_DAMPING);
    let (code, r) = opgraph_json(&["channel", "--file", &f, "--action", "graph-check"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["equal"], true);
    let (code, r) = opgraph_json(&[
        "channel",
        "--file",
        &f,
        "--action",
        "graph-check",
        "--backend",
        "float",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["backend"], "float");
    assert_eq!(r["data"]["equal"], true);
}

#[test]
fn random_two_kraus_qubit_channel() {
    use opgraph_core::channels::random_channel;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let dir = tempfile::tempdir().unwrap();
    for k in 0..5 {
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        let f = write(
            dir.path(),
            &format!("r{k}.json"),
            &opgraph_cli::io::channel_json(&ch).to_string(),
        );
        let (code, r) = opgraph_json(&["channel", "--file", &f, "--action", "graph-check"]);
        assert_eq!(code, 0);
        assert_eq!(r["data"]["equal"], true);
        let (code, r) = opgraph_json(&[
            "channel",
            "--file",
            &f,
            "--action",
            "duality-test",
            "--trials",
            "5",
        ]);
        assert_eq!(code, 0);
        assert!(r["data"]["max_gap"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn dephasing_frame_graph_is_two_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "frame.json",
        r#"{"vectors": [[1, 0], [0, 1]], "gram": [[1, 0], [0, 1]]}"#,
    );
    let (code, r) = opgraph_json(&["channel", "--file", &f]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["source"], "frame");
    assert_eq!(r["data"]["graph_dim"], 2);
}

#[test]
fn non_trace_preserving_channel_fails_with_residual() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.json",
        r#"{"dim_in": 2, "dim_out": 2,
      "kraus": [[["1","0"],["0","1"]], [["1","0"],["0","0"]]]}"#,
    );
    let (code, r) = opgraph_json(&["channel", "--file", &f, "--action", "graph-check"]);
    assert_eq!(code, 1);
    assert_eq!(r["checks"][0]["name"], "trace preserving");
    assert_eq!(r["checks"][0]["status"], "fail");
    assert_eq!(r["checks"][0]["residual"], 1.0);
}

#[test]
fn malformed_channel_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "broken.json", "{\"dim_in\": 2");
    assert_eq!(opgraph(&["channel", "--file", &f]).0, 2);
    assert_eq!(
        opgraph(&["channel", "--file", "/nonexistent/file.json"]).0,
        2
    );
}

/// Projections onto the joint eigenvectors of X, Y, Z at theta = 1: a
/// dephasing channel whose graph is the commutative algebra span L(1).
fn klein_dephasing_json() -> String {
    let (_, r) = opgraph_json(&["rep", "--theta", "1"]);
    use opgraph_core::scalar::parse_gaussian;
    use opgraph_core::{CMatrix, GaussianRational, Scalar};
    let kraus: Vec<CMatrix<GaussianRational>> = r["data"]["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| {
            let v: Vec<GaussianRational> = b["basis"][0]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| parse_gaussian(e.as_str().unwrap()).unwrap())
                .collect();
            let col = CMatrix::column_vector(v);
            let norm = col.adjoint().matmul(&col).trace();
            col.matmul(&col.adjoint()).scale(&norm.inv().unwrap())
        })
        .collect();
    let ch = opgraph_core::channels::KrausChannel::new(kraus, 0.0).unwrap();
    opgraph_cli::io::channel_json(&ch).to_string()
}

#[test]
fn match_l_at_the_klein_point() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "klein.json", &klein_dephasing_json());
    let (code, r) = opgraph_json(&[
        "channel", "--file", &f, "--action", "match-L", "--theta", "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["equal"], true);
    let (code, r) = opgraph_json(&[
        "channel", "--file", &f, "--action", "match-L", "--theta", "2",
    ]);
    assert_eq!(code, 1);
    assert_eq!(r["data"]["equal"], false);
    assert_eq!(
        opgraph(&["channel", "--file", &f, "--action", "match-L"]).0,
        2
    );
}

#[test]
fn out_file_and_stable_json_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let out_s = out.display().to_string();
    let (code, stdout, _) = opgraph(&["verify", "--theta", "i", "--json", "--out", &out_s]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "command",
            "config",
            "checks",
            "data",
            "passed",
            "wall_time_ms"
        ]
    );
    let config_keys: Vec<&str> = r["config"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(
        config_keys,
        [
            "command",
            "theta_spec",
            "backend",
            "tol",
            "seed",
            "output",
            "output_path"
        ]
    );
    for c in r["checks"].as_array().unwrap() {
        for k in ["name", "status", "backend", "detail"] {
            assert!(c.get(k).is_some(), "check missing {k}");
        }
    }
}

#[test]
fn exact_reports_reproduce_from_echoed_config() {
    let (_, first) = opgraph_json(&["verify", "--theta", "3/5+4/5*i", "--seed", "7"]);
    let cfg = &first["config"];
    let (_, second) = opgraph_json(&[
        cfg["command"].as_str().unwrap(),
        "--theta",
        cfg["theta_spec"].as_str().unwrap(),
        "--backend",
        cfg["backend"].as_str().unwrap(),
        "--seed",
        &cfg["seed"].to_string(),
    ]);
    assert_eq!(first["data"], second["data"]);
    assert_eq!(first["checks"], second["checks"]);
}

#[test]
fn text_output_lists_checks() {
    let (code, stdout, _) = opgraph(&["verify", "--theta", "1/2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("PASS [exact] dim M_theta"));
    assert!(stdout.contains("0 failed"));
}
