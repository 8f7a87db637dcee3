//! Argument parsing, exit codes and output formats of the command-line tool.

use farey_spectral::matrices::{build_system, BuildOptions, Sign};
use farey_spectral::solver::Problem;
use farey_spectral::SpectralParameter;
use farey_spectral_cli::config::{config_file_args, Command, Format};
use farey_spectral_cli::output::{fmt17, SCAN_HEADER};
use farey_spectral_cli::{parse_args, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use std::path::Path;
use std::process::Command as Process;

fn args(line: &str) -> Vec<String> {
    std::iter::once("farey-spectral".to_string())
        .chain(line.split_whitespace().map(String::from))
        .collect()
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_farey-spectral"))
}

fn complex(v: &serde_json::Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn scan_command_line_is_valid() {
    let cfg = parse_args(args(
        "scan --problem homogeneous-minus --re 0.5 --im-from 9 --im-to 10 --step 0.02 --order 100 --out s.csv",
    ))
    .unwrap();
    assert_eq!(cfg.command, Command::Scan);
    assert_eq!(cfg.problem, Problem::HomogeneousMinus);
    assert_eq!(cfg.order, 100);
    let grid = cfg.grid.unwrap();
    assert_eq!((grid.im_from, grid.im_to, grid.step), (9.0, 10.0, 0.02));
    assert_eq!(cfg.format, Format::Csv);
    assert_eq!(cfg.out_path.as_deref(), Some(Path::new("s.csv")));
}

#[test]
fn inadmissible_q_is_rejected() {
    let half = parse_args(args("entries --re 0.5 --im 0")).unwrap_err();
    assert!(half.0.contains("--re"), "{half}");
    let negative = parse_args(args("entries --re -0.1 --im 1")).unwrap_err();
    assert!(negative.0.contains("--re"), "{negative}");
    assert!(parse_args(args("scan --re 0 --im-from 1 --im-to 2 --step 0.1")).is_err());
}

#[test]
fn usage_errors_name_the_flag() {
    let cases = [
        ("entries --re 1 --bogus 3", "--bogus"),
        ("scan --re 0.5 --im-from 9 --im-to 10", "--step"),
        ("scan --re 0.5 --im-from 10 --im-to 9 --step 0.1", "--im-to"),
        ("entries --re 1 --step 0.1", "--step"),
        ("entries", "--re"),
        ("entries --re 1 --order 0", "--order"),
        ("solve-b --re 0.25 --im 7 --orders 80,40", "--orders"),
        ("verify --suite nothing", "--suite"),
        ("refine --re 0.5 --im 9.5 --tol -1", "--tol"),
    ];
    for (line, flag) in cases {
        let err = parse_args(args(line)).unwrap_err();
        assert!(err.0.contains(flag), "`{line}`: {err}");
    }
    assert!(parse_args(args("")).is_err());
}

#[test]
fn defaults_and_overrides() {
    let cfg = parse_args(args("solve-b --re 0.25 --im 7.0673626")).unwrap();
    assert_eq!(cfg.orders, vec![40, 80, 120]);
    assert_eq!(cfg.format, Format::Json);
    let cfg = parse_args(args("refine --re 0.5 --im 9.54 --radius 0.03 --tol 1e-4 --both --format csv")).unwrap();
    assert_eq!((cfg.radius, cfg.tol, cfg.both, cfg.format), (0.03, 1e-4, true, Format::Csv));
    let cfg = parse_args(args("entries --re 1 --sign minus --finite-nodes 400 --high-precision")).unwrap();
    assert_eq!(cfg.operator_sign, Sign::Minus);
    assert_eq!(cfg.quadrature.finite_nodes, 400);
    assert!(cfg.high_precision);
    let cfg = parse_args(args("verify")).unwrap();
    assert_eq!(cfg.suite, None);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# defaults for a scan\nre = 0.5\nim-from = 9\nim-to = 10\nstep = 0.5\norder = 30\nproblem = homogeneous-minus\nhigh-precision = true\n",
    )
    .unwrap();
    let line = format!("scan --config {} --order 12", path.display());
    let cfg = parse_args(args(&line)).unwrap();
    assert_eq!(cfg.order, 12, "flag beats file");
    assert_eq!(cfg.problem, Problem::HomogeneousMinus, "file beats default");
    assert_eq!(cfg.grid.unwrap().step, 0.5);
    assert!(cfg.high_precision);

    std::fs::write(&path, "frobnicate = 1\n").unwrap();
    let err = parse_args(args(&format!("entries --re 1 --config {}", path.display()))).unwrap_err();
    assert!(err.0.contains("frobnicate"), "{err}");
    assert!(config_file_args("no equals sign", &path).is_err());
    assert!(config_file_args("command = scan", &path).is_err());
}

#[test]
fn seventeen_digit_format_round_trips() {
    for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 9.533695] {
        let s = fmt17(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{s}");
    }
}

#[test]
fn entries_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("entries.json");
    let status = bin()
        .args(["entries", "--re", "1", "--im", "0", "--order", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // q = 1 (ξ = 1): a⁺₀₀ = m₀₀ + n₀₀ = 1/4 + 1/4
    let (re, im) = complex(&json["a_plus"][0][0]);
    assert!((re - 0.5).abs() < 1e-15 && im == 0.0);

    let q = SpectralParameter::from_parts(1.0, 0.0).unwrap();
    let system = build_system(q, 2, &BuildOptions::default()).unwrap();
    for (key, m) in [("a_plus", system.a_plus()), ("a_minus", system.a_minus())] {
        for k in 0..2 {
            for n in 0..2 {
                let (re, im) = complex(&json[key][k][n]);
                assert_eq!((re, im), (m[(k, n)].re, m[(k, n)].im), "{key}[{k}][{n}]");
            }
        }
    }
    for (k, d) in system.d().iter().enumerate() {
        assert_eq!(json["d"][k].as_f64().unwrap(), *d);
    }
}

#[test]
fn entries_on_the_critical_line_have_unit_a00() {
    // on ξ = 1/2, a⁺₀₀ = Γ(1)(2^{−1} + 2^{−1}) = 1
    let out = bin().args(["entries", "--re", "0.5", "--im", "2", "--order", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let (re, im) = complex(&json["a_plus"][0][0]);
    assert!((re - 1.0).abs() < 1e-14 && im.abs() < 1e-14, "{re} {im}");
}

#[test]
fn psi_vanishes_at_q_one() {
    let out = bin().args(["psi", "--re", "1", "--count", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let psi = json["psi"].as_array().unwrap();
    assert_eq!(psi.len(), 10);
    for v in psi {
        let (re, im) = complex(v);
        assert!(re.hypot(im) <= 1e-10, "{re} {im}");
    }
}

#[test]
fn scan_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let status = bin()
        .args([
            "scan", "--problem", "homogeneous-minus", "--re", "0.7", "--im-from", "1", "--im-to", "1.4", "--step", "0.2",
            "--order", "10", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SCAN_HEADER);
    assert_eq!(lines.len(), 4);
    let mut previous = f64::NEG_INFINITY;
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[2], "10");
        assert_eq!(cols[3], "homogeneous-minus");
        let im: f64 = cols[1].parse().unwrap();
        assert!(im > previous);
        previous = im;
        let indicator: f64 = cols[4].parse().unwrap();
        let eig_re: f64 = cols[5].parse().unwrap();
        let eig_im: f64 = cols[6].parse().unwrap();
        assert!(indicator >= 0.0);
        assert!(indicator <= (eig_re - 1.0).hypot(eig_im) * (1.0 + 1e-12));
        for c in [cols[0], cols[1], cols[4], cols[5], cols[6]] {
            assert_eq!(fmt17(c.parse().unwrap()), c);
        }
    }
    // no temporary files are left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn scan_keeps_one_row_per_grid_point() {
    // Im q = 0 on Re q = 1/2 is q = 1/2: skipped, reported as NaN
    let out = bin()
        .args(["scan", "--re", "0.5", "--im-from", "-0.1", "--im-to", "0.1", "--step", "0.1", "--order", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains("NaN"));
    assert!(!rows[0].contains("NaN") && !rows[2].contains("NaN"));
}

#[test]
fn exit_codes() {
    let usage = bin().args(["entries", "--re", "0.5"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("--re"));
    assert_eq!(bin().args(["frobnicate"]).status().unwrap().code(), Some(EXIT_USAGE));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(EXIT_OK));
    // a flat region has no interior minimum: numerical failure
    let flat = bin()
        .args(["refine", "--re", "0.7", "--im", "3", "--radius", "0.05", "--order", "8", "--tol", "1e-3"])
        .output()
        .unwrap();
    assert_eq!(flat.status.code(), Some(EXIT_NUMERICAL), "{}", String::from_utf8_lossy(&flat.stderr));
}

#[test]
fn solve_b_at_q_one_is_zero() {
    let out = bin().args(["solve-b", "--re", "1", "--orders", "4,8", "--format", "csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("order,solution_norm,residual,growth_exponent"));
    for line in lines {
        let norm: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(norm < 1e-9, "{line}");
    }
}

#[test]
fn verify_matrices_suite_passes() {
    let out = bin().args(["verify", "--suite", "matrices", "--format", "csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",PASS")));
    assert!(text.lines().count() > 1000);
}

#[test]
fn refine_degenerate_returns_seed() {
    let out = bin()
        .args(["refine", "--re", "0.7", "--im", "3", "--radius", "0.01", "--tol", "0.1", "--order", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(complex(&json["q"]), (0.7, 3.0));
    assert_eq!(json["evaluations"].as_u64(), Some(1));
}
