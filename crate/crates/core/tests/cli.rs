mod common;

use std::path::Path;
use std::process::Command;

use serde_json::Value;
use skewtent::cli::main_with_args;

fn run(args: &[&str]) -> Result<String, String> {
    let mut out = Vec::new();
    let argv = std::iter::once("skewtent").chain(args.iter().copied());
    main_with_args(argv, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&run(args).unwrap()).unwrap()
}

/// Structural equality with a relative tolerance on numbers.
fn assert_close(got: &Value, want: &Value, path: &str) {
    match (got, want) {
        (Value::Number(g), Value::Number(w)) => {
            let (g, w) = (g.as_f64().unwrap(), w.as_f64().unwrap());
            assert!(
                (g - w).abs() <= 1e-12 * w.abs().max(1.0),
                "{path}: {g} vs {w}"
            );
        }
        (Value::Array(g), Value::Array(w)) => {
            assert_eq!(g.len(), w.len(), "{path}");
            for (i, (g, w)) in g.iter().zip(w).enumerate() {
                assert_close(g, w, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(g), Value::Object(w)) => {
            let keys = |m: &serde_json::Map<String, Value>| m.keys().cloned().collect::<Vec<_>>();
            assert_eq!(keys(g), keys(w), "{path}");
            for (k, w) in w {
                assert_close(&g[k], w, &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(got, want, "{path}"),
    }
}

fn golden(name: &str, args: &[&str]) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    let want: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_close(&json(args), &want, name);
}

#[test]
fn golden_diagonal_rlc() {
    golden("diagonal_rlc.json", &["diagonal", "--seq", "RLC"]);
}

#[test]
fn golden_diagonal_rllrc() {
    golden("diagonal_rllrc.json", &["diagonal", "--seq", "RLLRC"]);
}

#[test]
fn golden_counterexample_preset() {
    golden(
        "counterexample_thex.json",
        &["counterexample", "--preset", "thex"],
    );
    golden(
        "counterexample_thex.json",
        &["--sequential", "counterexample", "--preset", "thex"],
    );
}

#[test]
fn help_lists_every_subcommand() {
    let help = run(&["--help"]).unwrap();
    for cmd in [
        "knead",
        "theta",
        "grad",
        "hessian",
        "isentrope",
        "diagonal",
        "counterexample",
        "raster",
        "entropy",
    ] {
        assert!(
            help.lines().any(|l| l.trim_start().starts_with(cmd)),
            "{cmd}"
        );
        assert!(run(&[cmd, "--help"]).unwrap().contains("Usage"), "{cmd}");
    }
}

#[test]
fn bad_input_is_rejected() {
    for args in [
        &[
            "theta", "--seq", "RLC", "--alpha", "0.6", "--beta", "0.7", "--bogus",
        ][..],
        &["frobnicate"],
        &[
            "theta", "--seq", "RLC", "--preset", "thex", "--alpha", "0.6", "--beta", "0.7",
        ],
        &["theta", "--seq", "RXC", "--alpha", "0.6", "--beta", "0.7"],
        &["diagonal", "--seq", "RL(R)"],
        &[
            "raster",
            "--field",
            "theta_sign",
            "--window",
            "0,1,0,1",
            "--size",
            "4x4",
            "--out",
            "x.txt",
        ],
    ] {
        let err = run(args).unwrap_err();
        let v: Value = serde_json::from_str(&err).unwrap();
        assert!(v["error"].is_string(), "{args:?}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_skewtent");
    let out = Command::new(bin)
        .args(["knead", "--alpha", "0.5", "--beta", "0.6", "--depth", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kneading"], "RLRR");

    let out = Command::new(bin).arg("--no-such-flag").output().unwrap();
    assert!(!out.status.success());
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn theta_on_the_diagonal_is_zero() {
    let v = json(&["theta", "--seq", "RLC", "--alpha", "0.62", "--beta", "0.62"]);
    assert!(v["value"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn theta_from_gap_text() {
    let v = json(&[
        "theta",
        "--gaps",
        "gaps=1;period=0,1",
        "--alpha",
        "0.6",
        "--beta",
        "0.8",
    ]);
    let mbar: Vec<usize> = (1..400).map(|k| k / 2 + k % 2).collect();
    let want = common::theta_brute(&mbar, 0.6, 0.8);
    assert!(
        (v["value"].as_f64().unwrap() - want).abs() <= 1e-12,
        "{v} vs {want}"
    );
}

#[test]
fn isentrope_csv() {
    let text = run(&[
        "isentrope",
        "--seq",
        "RLC",
        "--alpha-from",
        "0.55",
        "--alpha-to",
        "0.65",
        "--steps",
        "3",
    ])
    .unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,beta,value"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r[2].abs() <= 1e-8);
        assert_eq!(common::knead(r[0], r[1], 2), "RL");
    }
}

#[test]
fn raster_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let args = |out: &str| {
        vec![
            "raster".to_string(),
            "--field".into(),
            "theta_sign".into(),
            "--preset".into(),
            "thex".into(),
            "--window".into(),
            "0.3,0.9,0.5,1".into(),
            "--size".into(),
            "40x30".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let (a, b) = (path("a.pgm"), path("b.pgm"));
    for out in [&a, &b] {
        let argv: Vec<String> = std::iter::once("skewtent".to_string())
            .chain(args(out))
            .collect();
        main_with_args(argv, &mut Vec::new()).unwrap();
    }
    let (pa, pb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(pa, pb);
    assert!(pa.starts_with(b"P5\n40 30\n255\n"));
    assert_eq!(pa.len(), b"P5\n40 30\n255\n".len() + 40 * 30);
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(path("a.json")).unwrap()).unwrap();
    assert_eq!(sidecar["width"], 40);
    assert_eq!(sidecar["sentinel_gray"], 255);

    let csv = path("c.csv");
    let argv: Vec<String> = std::iter::once("skewtent".to_string())
        .chain(args(&csv))
        .collect();
    main_with_args(argv, &mut Vec::new()).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 40 * 30);
}

#[test]
fn entropy_subcommand() {
    let v = json(&["entropy", "--alpha", "0.5", "--beta", "1", "--depth", "20"]);
    assert!((v["entropy"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-9);
}
