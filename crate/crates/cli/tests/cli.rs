use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kirchhoff_core::{ProblemParams, Solver};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kirchhoff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_base(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_error(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("error line on stderr");
    serde_json::from_str(line).expect("error is JSON")
}

fn stdout_paths(o: &Output) -> Vec<PathBuf> {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(PathBuf::from)
        .collect()
}

#[test]
fn zero_b_gives_varpi_equal_a() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "gs");
    let o = run(&[
        "ground-state",
        "--dim",
        "3",
        "--a",
        "2",
        "--b",
        "0",
        "--q",
        "3",
        "--p",
        "4",
        "--lambda",
        "0.5",
        "--out",
        &base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let paths = stdout_paths(&o);
    assert_eq!(
        paths,
        vec![
            PathBuf::from(format!("{base}.csv")),
            PathBuf::from(format!("{base}.json"))
        ]
    );
    let r = read_json(&paths[1]);
    assert_eq!(r["varpi"].as_f64().unwrap(), 2.0);
    assert!(r["residuals"]["nehari"].as_f64().unwrap() < 1e-6);
    assert!(r.get("profile").is_none());
}

#[test]
fn profile_csv_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "gs");
    let o = run(&[
        "ground-state",
        "--dim",
        "4",
        "--b",
        "0",
        "--q",
        "3",
        "--p",
        "3.5",
        "--lambda",
        "1",
        "--out",
        &base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(format!("{base}.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,W,Wprime"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0][0], 0.0);
    assert!(
        rows.windows(2).all(|w| w[1][1] <= w[0][1]),
        "profile decreases"
    );
}

#[test]
fn json_format_inlines_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "gs");
    let o = run(&[
        "ground-state",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "4",
        "--lambda",
        "1",
        "--format",
        "json",
        "--out",
        &base,
    ]);
    assert_eq!(
        stdout_paths(&o),
        vec![PathBuf::from(format!("{base}.json"))]
    );
    assert!(!Path::new(&format!("{base}.csv")).exists());
    let r = read_json(format!("{base}.json"));
    assert_eq!(r["profile"].as_array().unwrap().len(), 401);
}

#[test]
fn unsupported_dimension_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "x");
    let o = run(&[
        "ground-state",
        "--dim",
        "5",
        "--q",
        "3",
        "--p",
        "4",
        "--lambda",
        "1",
        "--out",
        &base,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let e = stderr_error(&o);
    assert_eq!(e["error"]["code"], 2);
    assert_eq!(e["error"]["kind"], "invalid-input");
}

#[test]
fn parse_errors_exit_2() {
    let o = run(&["ground-state", "--dim", "3", "--q", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["error"]["code"], 2);
    let o = run(&[
        "normalized",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "5",
        "--c",
        "-1",
        "--out",
        "/tmp/unused",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_controls_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("c.kv");
    std::fs::write(&kv, "no_such_key = 1\n").unwrap();
    let o = run(&[
        "validate",
        "--controls",
        kv.to_str().unwrap(),
        "--out",
        &out_base(dir.path(), "v"),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("c.kv");
    std::fs::write(&kv, "r_max = 0.5\n").unwrap();
    let o = run(&[
        "ground-state",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "4",
        "--lambda",
        "1",
        "--controls",
        kv.to_str().unwrap(),
        "--out",
        &out_base(dir.path(), "s"),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_error(&o)["error"]["kind"], "solver-failure");
}

#[test]
fn four_dimensional_varpi_without_root_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "ground-state",
        "--dim",
        "4",
        "--q",
        "3",
        "--p",
        "3.5",
        "--lambda",
        "1",
        "--out",
        &out_base(dir.path(), "g"),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_error(&o)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("varpi"));
}

#[test]
fn equal_exponents_match_the_closed_form_varpi() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "pq");
    let o = run(&[
        "ground-state",
        "--dim",
        "3",
        "--q",
        "4",
        "--p",
        "4",
        "--lambda",
        "2",
        "--out",
        &base,
    ]);
    assert!(o.status.success());
    let r = read_json(format!("{base}.json"));
    let pp = ProblemParams::new(3, 1.0, 1.0, 4.0, 4.0, 2.0).unwrap();
    let exact = Solver::default().exact_pq_solution(&pp).unwrap();
    let varpi = r["varpi"].as_f64().unwrap();
    assert!(
        (varpi - exact.varpi).abs() / exact.varpi < 1e-9,
        "{varpi} vs {}",
        exact.varpi
    );
    assert_eq!(
        r["scaling"]["tag"],
        serde_json::to_value(exact.scaling.tag).unwrap()
    );
}

#[test]
fn report_floats_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "rt");
    assert!(run(&[
        "ground-state",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "4",
        "--lambda",
        "0.37",
        "--out",
        &base
    ])
    .status
    .success());
    let text = std::fs::read_to_string(format!("{base}.json")).unwrap();
    let r: Value = serde_json::from_str(&text).unwrap();
    let pp = ProblemParams::new(3, 1.0, 1.0, 3.0, 4.0, 0.37).unwrap();
    let g = Solver::default().ground_state(&pp).unwrap();
    assert_eq!(r["varpi"].as_f64().unwrap().to_bits(), g.varpi.to_bits());
    assert_eq!(
        r["norms"]["mass"].as_f64().unwrap().to_bits(),
        g.norms.mass.to_bits()
    );
    assert_eq!(r["peak"].as_f64().unwrap().to_bits(), g.peak.to_bits());
    let params: ProblemParams = serde_json::from_value(r["params"].clone()).unwrap();
    assert_eq!(params, pp);
}

#[test]
fn mass_curve_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "mc");
    let o = run(&[
        "mass-curve",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "4",
        "--lambda-min",
        "1e-4",
        "--lambda-max",
        "1e4",
        "--points",
        "33",
        "--out",
        &base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(format!("{base}.csv")).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("lambda,M,gradA,Lq,Lp,energy,varpi,peak")
    );
    assert_eq!(text.lines().count(), 34);
    let s = read_json(format!("{base}.json"));
    for f in s["fits"].as_array().unwrap() {
        let ratio = f["exponent_ratio"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 0.05, "{f}");
    }
    assert!(s["sign_checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["agrees"] == true));
    assert!(s["failures"].as_array().unwrap().is_empty());
}

#[test]
fn single_point_curve_omits_fits() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "one");
    let o = run(&[
        "mass-curve",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "4",
        "--points",
        "1",
        "--format",
        "json",
        "--out",
        &base,
    ]);
    assert!(o.status.success());
    let s = read_json(format!("{base}.json"));
    assert_eq!(s["samples"].as_array().unwrap().len(), 1);
    for f in s["fits"].as_array().unwrap() {
        assert!(f["fit"].is_null());
        assert!(f["omitted"].as_str().unwrap().contains("at least 4"));
    }
}

#[test]
fn closed_form_curve_deviation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "pq");
    assert!(run(&[
        "mass-curve",
        "--dim",
        "3",
        "--b",
        "0",
        "--q",
        "4",
        "--p",
        "4",
        "--points",
        "9",
        "--out",
        &base
    ])
    .status
    .success());
    let s = read_json(format!("{base}.json"));
    assert!(s["closed_form"]["max_relative_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn two_normalized_solutions_for_small_c() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "nz");
    let o = run(&[
        "normalized",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "5",
        "--c",
        "0.01",
        "--lambda-min",
        "1e-6",
        "--lambda-max",
        "1e6",
        "--points",
        "25",
        "--out",
        &base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(format!("{base}.json"));
    assert_eq!(r["count"], 2);
    assert_eq!(r["predicted"]["count"], 2);
    assert_eq!(r["predicted"]["label"], "small c");
    let roots = r["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 2);
    for root in roots {
        assert!(root["mass_residual"].as_f64().unwrap() < 1e-8);
        assert!((root["mass"].as_f64().unwrap() - 1e-4).abs() < 1e-11);
        let ratio = root["prediction"]["ratio"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "{root}");
    }
    let brackets = r["brackets"].as_array().unwrap();
    assert!(brackets[0]["lo"].is_null());
    assert!(brackets[1]["hi"].is_null());
}

#[test]
fn near_threshold_count_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "nt");
    // m1 is about 11.44 for q = 3, a = 1
    let o = run(&[
        "normalized",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "5",
        "--c",
        "11",
        "--points",
        "17",
        "--out",
        &base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(format!("{base}.json"));
    assert_eq!(r["predicted"]["label"], "unreliable: near threshold");
    assert!(r["predicted"]["count"].is_null());
}

#[test]
fn quick_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let base = out_base(dir.path(), "v");
    let o = run(&[
        "validate", "--suite", "quick", "--format", "json", "--out", &base,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(format!("{base}.json"));
    assert_eq!(r["passed"], true);
    assert!(r["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn failing_validation_exits_4_and_keeps_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("c.kv");
    std::fs::write(&kv, "identity_tol = 1e-30\n").unwrap();
    let base = out_base(dir.path(), "v");
    let o = run(&[
        "validate",
        "--controls",
        kv.to_str().unwrap(),
        "--out",
        &base,
    ]);
    assert_eq!(o.status.code(), Some(4));
    let r = read_json(format!("{base}.json"));
    assert_eq!(r["passed"], false);
    assert_eq!(r["controls"]["identity_tol"].as_f64().unwrap(), 1e-30);
}

#[test]
fn laws_export_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("laws.json");
    let o = run(&["laws", "export", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout_paths(&o), vec![path.clone()]);
    let t = read_json(&path);
    let rows = t.as_array().unwrap();
    assert_eq!(rows.len(), 65);
    assert!(rows
        .iter()
        .all(|r| r["id"].is_string() && r["exponent"].is_string()));
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (out_base(dir.path(), "w1"), out_base(dir.path(), "w4"));
    for (base, w) in [(&a, "1"), (&b, "4")] {
        assert!(run(&[
            "mass-curve",
            "--dim",
            "3",
            "--q",
            "3.5",
            "--p",
            "4.5",
            "--points",
            "12",
            "--workers",
            w,
            "--out",
            base
        ])
        .status
        .success());
    }
    assert_eq!(
        std::fs::read(format!("{a}.csv")).unwrap(),
        std::fs::read(format!("{b}.csv")).unwrap()
    );
    let o = run(&[
        "mass-curve",
        "--dim",
        "3",
        "--q",
        "3",
        "--p",
        "4",
        "--workers",
        "0",
        "--out",
        &a,
    ]);
    assert_eq!(o.status.code(), Some(2));
}
