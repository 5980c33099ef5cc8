use std::path::Path;
use std::process::{Command, Output};

use glt_lab::discretizations::{curie_weiss_restricted, CWParams, CwConvention};
use glt_lab::io::read_matrix_csv;
use glt_lab::structured::{toeplitz, MultiIndex};
use glt_lab::symbols::TrigPolynomial;
use glt_lab::Matrix;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glt-lab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let o = run(args, dir);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn toeplitz_example() {
    let d = tempfile::tempdir().unwrap();
    ok(&["build", "--family", "toeplitz", "--n", "3", "--coeffs", "0:2,1:-1,-1:-1", "--out", "t.csv"], d.path());
    let m = read_matrix_csv(&d.path().join("t.csv")).unwrap();
    assert_eq!(m, Matrix::from_real_rows(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]));
}

#[test]
fn build_round_trip_is_exact() {
    let d = tempfile::tempdir().unwrap();
    ok(&["build", "--family", "toeplitz", "--n", "17", "--coeffs", "0:0.3:0,1:-0.7:0.1,-1:-0.7:-0.1,3:1e-9", "--out", "a.csv"], d.path());
    let p = TrigPolynomial::scalar_complex(&[
        (0, glt_lab::C64::new(0.3, 0.0)),
        (1, glt_lab::C64::new(-0.7, 0.1)),
        (-1, glt_lab::C64::new(-0.7, -0.1)),
        (3, glt_lab::C64::new(1e-9, 0.0)),
    ]);
    assert_eq!(read_matrix_csv(&d.path().join("a.csv")).unwrap(), toeplitz(&MultiIndex::uni(17), &p).unwrap());

    ok(&["build", "--family", "cw-restricted", "--n", "33", "--gamma", "1", "--b", "0.5", "--out", "c.csv"], d.path());
    let want = curie_weiss_restricted(&CWParams::new(1.0, 0.5, 32).unwrap(), CwConvention::Midpoint);
    assert_eq!(read_matrix_csv(&d.path().join("c.csv")).unwrap(), want);
}

#[test]
fn every_family_builds() {
    let d = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["--family", "circulant", "--n", "5", "--coeffs", "0:2,1:-1,-1:-1"],
        &["--family", "omega", "--n", "5", "--coeffs", "0:2,1:-1,-1:-1", "--omega", "0:1"],
        &["--family", "tau", "--n", "5", "--coeffs", "0:2,1:-1"],
        &["--family", "hankel", "--n", "4", "--coeffs", "0:1,6:2"],
        &["--family", "diag", "--n", "3,4", "--func", "x + y^2"],
        &["--family", "fd4", "--n", "9"],
        &["--family", "fd4-2d", "--n", "4,5", "--func", "1 + x"],
        &["--family", "bspline", "--n", "8", "--degree", "2", "--which", "mass"],
        &["--family", "cw-full", "--n", "4"],
    ];
    for c in cases {
        let mut args = vec!["build"];
        args.extend_from_slice(c);
        args.extend_from_slice(&["--out", "m.csv"]);
        ok(&args, d.path());
        assert!(read_matrix_csv(&d.path().join("m.csv")).is_ok(), "{c:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        vec!["build", "--family", "toeplitz", "--n", "3", "--coeffs", "0:1", "--out", "x.csv", "--bogus"],
        vec!["build", "--family", "nope", "--n", "3", "--out", "x.csv"],
        vec!["build", "--family", "toeplitz", "--n", "3", "--coeffs", "zero:1", "--out", "x.csv"],
        vec!["experiment", "--id", "nope", "--outdir", "o"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args, d.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn karcher_of_equal_inputs_returns_the_input() {
    let d = tempfile::tempdir().unwrap();
    ok(&["build", "--family", "toeplitz", "--n", "6", "--coeffs", "0:3,1:1,-1:1", "--out", "a.csv"], d.path());
    let out = ok(&["karcher", "--inputs", "a.csv,a.csv,a.csv", "--out", "k.csv"], d.path());
    let it: usize = out.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(it <= 1, "{out}");
    let a = read_matrix_csv(&d.path().join("a.csv")).unwrap();
    let k = read_matrix_csv(&d.path().join("k.csv")).unwrap();
    assert!(k.max_abs_diff(&a) <= 1e-13);
}

#[test]
fn non_hpd_input_exits_3() {
    let d = tempfile::tempdir().unwrap();
    ok(&["build", "--family", "diag", "--n", "4", "--func", "x - 0.5", "--out", "a.csv"], d.path());
    ok(&["build", "--family", "toeplitz", "--n", "4", "--coeffs", "0:2,1:-1,-1:-1", "--out", "b.csv"], d.path());
    assert_eq!(run(&["mean", "--a", "a.csv", "--b", "b.csv", "--out", "g.csv"], d.path()).status.code(), Some(3));
    assert_eq!(run(&["karcher", "--inputs", "b.csv,a.csv", "--out", "g.csv"], d.path()).status.code(), Some(3));
}

#[test]
fn mean_and_spectrum() {
    let d = tempfile::tempdir().unwrap();
    ok(&["build", "--family", "cw-restricted", "--n", "40", "--out", "cw.csv"], d.path());
    let out = ok(&["spectrum", "--matrix", "cw.csv", "--symbol", "cw", "--out", "ov.csv"], d.path());
    assert!(out.contains("lambda_min -9.93"), "{out}");
    let csv = std::fs::read_to_string(d.path().join("ov.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);

    ok(&["build", "--family", "toeplitz", "--n", "5", "--coeffs", "0:2,1:-1,-1:-1", "--out", "a.csv"], d.path());
    ok(&["build", "--family", "toeplitz", "--n", "5", "--coeffs", "0:3,1:1,-1:1", "--out", "b.csv"], d.path());
    ok(&["mean", "--a", "a.csv", "--b", "b.csv", "--out", "g.csv"], d.path());
    assert_eq!(read_matrix_csv(&d.path().join("g.csv")).unwrap().rows(), 5);
}

#[test]
fn decay_reports_alpha_column() {
    let d = tempfile::tempdir().unwrap();
    ok(&["decay", "--experiment", "gm2_ex1", "--sizes", "40,80,160", "--out", "dec.csv"], d.path());
    let csv = std::fs::read_to_string(d.path().join("dec.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,value,tau,alpha");
    let alpha: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((alpha - 2.0132).abs() < 0.05, "{alpha}");
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), r#"{"id": "cw", "sizes": [10, 20, 30], "b": 0.5}"#).unwrap();
    ok(&["experiment", "--config", "c.json", "--sizes", "12,24", "--outdir", "o"], d.path());
    let reports = std::fs::read_to_string(d.path().join("o/reports.csv")).unwrap();
    let ns: Vec<&str> = reports.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["12", "24"]);
    let summary = std::fs::read_to_string(d.path().join("o/summary.txt")).unwrap();
    assert!(summary.contains("reference -0.625"), "{summary}");
    std::fs::write(d.path().join("bad.json"), r#"{"id": "cw", "typo": 1}"#).unwrap();
    assert_eq!(run(&["experiment", "--config", "bad.json", "--outdir", "o2"], d.path()).status.code(), Some(2));
}
