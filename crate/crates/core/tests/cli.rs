//! End-to-end runs of the `lame` binary: exit codes, output formats and config replay.

use std::process::{Command, Output};

use lame_resolvent::field::{read_lamf, solve_residual, Domain, VectorField};
use lame_resolvent::symbols::LameParameters;
use num_complex::Complex64;

fn lame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lame")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_prints_tag() {
    let o = lame(&["regions", "classify", "--dim", "3", "--x", "4/5", "--y", "1/5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("tag=R1"));
}

#[test]
fn exit_codes_follow_error_class() {
    // Validation: point outside the unit square.
    assert_eq!(lame(&["regions", "classify", "--dim", "3", "--x", "4/5", "--y", "7/5"]).status.code(), Some(2));
    // Usage error from the parser.
    assert_eq!(lame(&["regions", "classify", "--dim", "3"]).status.code(), Some(2));
    // Domain: pole of the resolvent symbol.
    assert_eq!(lame(&["symbol", "eval", "--kind", "resolvent", "--xi", "1,0", "--z", "1"]).status.code(), Some(3));
    // Domain: dense order over the cap without a window.
    let o = lame(&["eigen", "report", "--p", "1.2", "--q", "3", "--c", "1", "--n", "64", "--dense-cap", "100"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_writes_a_field_that_solves_the_system() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.bin");
    let o = lame(&["--json", "solve", "--dim", "2", "--n", "64", "--z", "-1+0.5i", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(json["residual"].as_f64().unwrap() < 1e-12);

    let (grid, comps) = read_lamf(&path).unwrap();
    assert_eq!(grid.n(), &[64, 64]);
    let u = VectorField::new(grid.clone(), Domain::Space, comps).unwrap();
    // Rebuild the default Gaussian source independently of the binary.
    let f = VectorField::from_fn(grid, Domain::Space, 2, |x| {
        let g = (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
        vec![Complex64::new(g, 0.0), Complex64::new(0.0, 0.0)]
    })
    .unwrap();
    let params = LameParameters::new(1.0, 2.0).unwrap();
    let res = solve_residual(&u, &f, Complex64::new(-1.0, 0.5), &params).unwrap();
    assert!(res < 1e-10, "{res}");
}

#[test]
fn saved_config_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.toml");
    let cfg = cfg.to_str().unwrap();
    let args = ["--seed", "3", "--json", "eigen", "report", "--p", "1.2", "--q", "3", "--c", "1", "--n", "8", "--random", "0.5"];
    let mut first_args = args.to_vec();
    first_args.extend(["--save-config", cfg]);
    let first = lame(&first_args);
    assert_eq!(first.status.code(), Some(0));
    let replay = lame(&["--config", cfg]);
    assert_eq!(replay.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&replay));
    let json: serde_json::Value = serde_json::from_str(&stdout(&replay)).unwrap();
    assert_eq!(json["hypothesis_satisfied"], serde_json::Value::Bool(true));
}

#[test]
fn csv_polyline_is_exact() {
    let o = lame(&["--csv", "regions", "polyline", "--dim", "3", "--tag", "R1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,y\n2/3,0/1\n1/1,1/3\n5/6,1/3\n2/3,1/6\n");
}
