use std::process::{Command, Output};

use serde_json::Value;

fn deform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deform"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const BOX: &str = "--rect=-2,2,-2,2";

#[test]
fn analyze_example_one() {
    let v = json(&deform(&["analyze", "--M", "2*x*y+1", "--N", "x^2+cos(y)", BOX]));
    assert_eq!(v["tag"], "exact_global_solution");
    assert_eq!(v["potential"]["kind"], "symbolic");
    assert_eq!(v["potential"]["F"], "x^2*y + x + sin(y)");
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys.len(), 7);
}

#[test]
fn analyze_example_two_reports_the_period() {
    let out = deform(&[
        "analyze",
        "--M",
        "-y/(x^2+y^2)",
        "--N",
        "x/(x^2+y^2)",
        BOX,
        "--puncture",
        "0,0",
    ]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"value\": 6.283185307179"), "{text}");
    let v = json(&out);
    assert_eq!(v["tag"], "obstruction_multivalued");
    assert_eq!(v["classification"]["kind"], "closed_not_exact");
    assert!(v["potential"].is_null());
}

#[test]
fn analyze_factor_scenarios() {
    let v = json(&deform(&["analyze", "--M", "y", "--N", "-x", "--rect", "0.5,2,-1,1"]));
    assert_eq!(v["tag"], "factor_found_global_solution");
    assert_eq!(v["mu"]["family"], "x_only");
    assert_eq!(v["mu"]["mu"], "1/x^2");
    let v = json(&deform(&["analyze", "--M", "-y", "--N", "x", BOX, "--puncture", "0,0"]));
    assert_eq!(v["tag"], "factor_found_obstruction_persists");
    assert_eq!(v["mu"]["family"], "radial");
}

#[test]
fn report_is_byte_identical_across_runs() {
    let args = ["analyze", "--M", "x/(x^2+y^2)", "--N", "y/(x^2+y^2)", BOX, "--puncture", "0,0"];
    let a = deform(&args);
    let b = deform(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn analyze_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = deform(&["analyze", "--M", "y", "--N", "x", BOX, "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["potential"]["F"], "x*y");
}

#[test]
fn periods_command() {
    let v = json(&deform(&[
        "periods",
        "--M",
        "-y/(x^2+y^2)",
        "--N",
        "x/(x^2+y^2)",
        BOX,
        "--puncture",
        "0,0",
        "--rtol",
        "1e-12",
    ]));
    let p = v["periods"][0]["value"].as_f64().unwrap();
    assert!((p - std::f64::consts::TAU).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    let parse_error = deform(&["analyze", "--M", "2*x*+1", "--N", "1", BOX]);
    assert_eq!(parse_error.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse_error.stderr).contains("position 4"));
    let bad_domain = deform(&["analyze", "--M", "1", "--N", "1", "--rect=2,-2,-2,2"]);
    assert_eq!(bad_domain.status.code(), Some(2));
    let too_close = deform(&["analyze", "--M", "1", "--N", "1", BOX, "--puncture", "1.9,0"]);
    assert_eq!(too_close.status.code(), Some(2));
    let missing_flag = deform(&["analyze", "--M", "1", BOX]);
    assert_eq!(missing_flag.status.code(), Some(2));
    let not_closed = deform(&["periods", "--M", "-y", "--N", "x", BOX, "--puncture", "0,0"]);
    assert_eq!(not_closed.status.code(), Some(3));
}

#[test]
fn curves_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = deform(&[
        "curves",
        "--M",
        "2*x*y+1",
        "--N",
        "x^2+cos(y)",
        BOX,
        "--seed",
        "1,1",
        "--seed=-1,0.5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("curve_id,t,x,y,F"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..4], ["0", "0", "1", "1"]);
    let f0: f64 = first[4].parse().unwrap();
    assert!((f0 - (2.0 + 1f64.sin())).abs() < 1e-12);
    assert!(text.lines().any(|l| l.starts_with("1,")));

    let svg = dir.path().join("t.svg");
    let out = deform(&[
        "curves",
        "--M",
        "x/(x^2+y^2)",
        "--N",
        "y/(x^2+y^2)",
        BOX,
        "--puncture",
        "0,0",
        "--format",
        "svg",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 8);
    assert_eq!(text.matches("<circle").count(), 1);
}

#[test]
fn curves_rejects_bad_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = deform(&[
        "curves",
        "--M",
        "1",
        "--N",
        "1",
        BOX,
        "--seed",
        "5,5",
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
