//! End-to-end checks of the command-line binary: certificate
//! round-trips through the file format, byte-stable outputs, and the
//! documented exit codes.

use std::process::Command;

use kakeya::construct::{verify_certificate, RepresentationCertificate};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kakeya"))
}

#[test]
fn represent_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.json");
    let path_b = dir.path().join("b.json");
    for path in [&path_a, &path_b] {
        let out = bin()
            .args([
                "represent",
                "--target",
                "1/2",
                "--theta",
                "1/4",
                "--M",
                "4",
                "--tol",
                "1/1000000",
                "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("verified=true"));
    }
    let a = std::fs::read(&path_a).unwrap();
    let b = std::fs::read(&path_b).unwrap();
    assert_eq!(a, b, "identical flags must give byte-identical files");

    // Separate verify path over the re-read file.
    let cert = RepresentationCertificate::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    let (ok, violations) = verify_certificate(&cert);
    assert!(ok, "{violations:?}");
}

#[test]
fn decimal_flags_parse_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let from_decimal = dir.path().join("dec.json");
    let from_fraction = dir.path().join("frac.json");
    for (path, target) in [(&from_decimal, "0.5"), (&from_fraction, "1/2")] {
        let out = bin()
            .args([
                "represent", "--target", target, "--theta", "0.25", "--M", "4", "--tol",
                "0.0001", "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(&from_decimal).unwrap(),
        std::fs::read(&from_fraction).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");

    // Parse error -> 2.
    let out = bin()
        .args(["represent", "--target", "x", "--theta", "1/4", "--M", "4", "--tol", "1/10"])
        .args(["--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Out of range -> 3.
    let out = bin()
        .args(["represent", "--target", "9", "--theta", "1/4", "--M", "4", "--tol", "1/10"])
        .args(["--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Degenerate bound precondition -> 3.
    let out = bin().args(["bounds", "--N", "2", "--M", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Unreachable digits -> 4 with a terms hint.
    let out = bin()
        .args(["verify-special", "--terms", "1", "--digits", "24"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--terms"));

    // Enumeration cap -> 5 (cap forced low through the environment).
    let csv = dir.path().join("l.csv");
    let out = bin()
        .args(["landscape", "--length", "7", "--ranges", "1:8", "--monotone", "--out"])
        .arg(&csv)
        .env("KAKEYA_ENUM_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));

    // Unknown series -> 2.
    let out = bin()
        .args(["classify", "--series", "unknown-series"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn landscape_csv_matches_figures() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig.csv");
    let out = bin()
        .args([
            "landscape",
            "--length",
            "7",
            "--ranges",
            "1:5,2:5,2:5,3:5,3:5,3:5,3:5",
            "--out",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("total=6480"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rank,sum_decimal,sum_rational,assignment"
    );
    assert_eq!(text.lines().count(), 3001);

    let out = bin()
        .args(["landscape", "--length", "7", "--ranges", "1:8", "--monotone", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("total=3432"));
}

#[test]
fn classify_families() {
    let out = bin()
        .args(["classify", "--series", "geometric(1/2)"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("single-interval [0/1,1/1]"));

    let out = bin()
        .args(["classify", "--series", "fat-cantor", "--depth", "30"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("empty-interior"));
    assert!(text.contains("measure_value_at_depth=["));

    let out = bin()
        .args(["classify", "--series", "eg-stage(2)", "--depth", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
}
