mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{equal_superposition_target, random_unitary};
use qlgc::dynamics::TimeSeries;
use qlgc::linalg::MatrixDoc;
use qlgc::ComplexMatrix;
use rand::rngs::StdRng;
use rand::SeedableRng;
use tempfile::TempDir;

fn qlgc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlgc"))
        .args(args)
        .env_remove("QLGC_TOL")
        .output()
        .expect("spawn qlgc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_matrix(dir: &Path, name: &str, m: &ComplexMatrix) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&MatrixDoc::from_matrix(m)).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_series(dir: &Path) -> TimeSeries {
    TimeSeries::from_csv(&std::fs::read_to_string(dir.join("timeseries.csv")).unwrap()).unwrap()
}

/// Value after `key` on the first line starting with it.
fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn decompose_identity_has_no_factors() {
    let dir = TempDir::new().unwrap();
    let input = write_matrix(dir.path(), "u.json", &ComplexMatrix::identity(4, 4));
    let o = qlgc(&["decompose", "-i", &input, "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "factors:"), 0.0);
    assert_eq!(field(&text, "reconstruction error:"), 0.0);
    assert!(dir.path().join("factors.json").exists());
}

#[test]
fn decompose_superposition_target_gives_five_factors() {
    let dir = TempDir::new().unwrap();
    let input = write_matrix(dir.path(), "u.json", &equal_superposition_target());
    let o = qlgc(&["decompose", "-i", &input, "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "factors:"), 5.0);
}

#[test]
fn decompose_random_u6_both_modes() {
    let dir = TempDir::new().unwrap();
    let u = random_unitary(6, &mut StdRng::seed_from_u64(6));
    let input = write_matrix(dir.path(), "u.json", &u);
    for mode in ["mod-phase", "exact"] {
        let o = qlgc(&["decompose", "-i", &input, "--mode", mode, "-o", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(field(&stdout(&o), "reconstruction error:") < 1e-10);
    }
}

#[test]
fn decompose_exit_codes() {
    let dir = TempDir::new().unwrap();
    let mut m = ComplexMatrix::identity(3, 3);
    m[(0, 0)] *= 2.0;
    let bad = write_matrix(dir.path(), "bad.json", &m);
    let out = dir.path().to_str().unwrap();
    assert_eq!(qlgc(&["decompose", "-i", &bad, "-o", out]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"n\": 2, \"re\": [").unwrap();
    assert_eq!(qlgc(&["decompose", "-i", garbage.to_str().unwrap(), "-o", out]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(qlgc(&["decompose", "-i", missing.to_str().unwrap(), "-o", out]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qlgc(&[]).status.code(), Some(1));
    assert_eq!(qlgc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qlgc(&["scheme", "teleport"]).status.code(), Some(1));
    assert_eq!(
        qlgc(&["scheme", "transfer", "--pulse-length", "200ps", "--max-field", "1e5"]).status.code(),
        Some(1)
    );
    assert_eq!(qlgc(&["--help"]).status.code(), Some(0));
}

#[test]
fn scheme_transfer_on_rb() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qlgc(&[
        "scheme", "transfer", "--system", "rb4", "--shape", "swp", "--pulse-length", "200ps", "--tau0", "20ps", "-o",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((field(&stdout(&o), "total duration:") - 600.0).abs() < 1e-6);
    for name in ["factors.json", "schedule.json", "validation.json", "timeseries.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let series = read_series(dir.path());
    assert!(series.last().unwrap().populations[3] >= 0.999);
}

#[test]
fn scheme_invert_gwp_fixed_amplitude_on_hf() {
    let dir = TempDir::new().unwrap();
    let o = qlgc(&[
        "scheme",
        "invert",
        "--system",
        "hf4",
        "--weights",
        "0.4,0.3,0.2,0.1",
        "--shape",
        "gwp",
        "--max-field",
        "5e6",
        "--samples",
        "32",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let total_ps = field(&stdout(&o), "total duration:");
    assert!((total_ps - 2300.0).abs() / 2300.0 < 0.01, "{total_ps}");
}

#[test]
fn scheme_maximize_reaches_bound() {
    let dir = TempDir::new().unwrap();
    let o = qlgc(&[
        "scheme",
        "maximize",
        "--system",
        "hf4",
        "--weights",
        "0.4,0.3,0.2,0.1",
        "--samples",
        "32",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "achieved/predicted:") - 1.0).abs() < 1e-6);
}

#[test]
fn scheme_from_request_file() {
    let dir = TempDir::new().unwrap();
    let req = dir.path().join("req.json");
    std::fs::write(&req, r#"{"scheme": "superpose", "system": "hf4", "r": [0.5, 0.5, 0.5, 0.5]}"#).unwrap();
    let o = qlgc(&["scheme", "--request", req.to_str().unwrap(), "--samples", "8", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((field(&stdout(&o), "achieved/predicted:") - 1.0).abs() < 1e-9);

    std::fs::write(&req, r#"{"scheme": "superpose", "system": "hf4", "r": [1.0, 1.0]}"#).unwrap();
    let o = qlgc(&["scheme", "--request", req.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synthesize_then_simulate_with_both_engines() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qlgc(&["scheme", "transfer", "--system", "rb4", "--samples", "8", "-o", out]);
    assert_eq!(o.status.code(), Some(0));

    let synth = dir.path().join("synth");
    let factors = dir.path().join("factors.json");
    let o = qlgc(&[
        "synthesize",
        "--factors",
        factors.to_str().unwrap(),
        "--system",
        "rb4",
        "--shape",
        "gwp",
        "-o",
        synth.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let schedule = synth.join("schedule.json");

    let mut finals = Vec::new();
    for engine in ["analytic", "ode"] {
        let run = dir.path().join(engine);
        let o = qlgc(&[
            "simulate",
            "--schedule",
            schedule.to_str().unwrap(),
            "--engine",
            engine,
            "--samples",
            "16",
            "-o",
            run.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        finals.push(read_series(&run).last().unwrap().populations.clone());
    }
    for (a, b) in finals[0].iter().zip(&finals[1]) {
        assert!((a - b).abs() < 1e-6);
    }

    let o = qlgc(&["simulate", "--schedule", schedule.to_str().unwrap(), "--state", "weights:0.5,0.5", "-o", out]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_superposition_schedule_has_quarter_coherences() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qlgc(&["scheme", "superpose", "--system", "hf4", "--r", "0.5,0.5,0.5,0.5", "--samples", "8", "-o", out]);
    assert_eq!(o.status.code(), Some(0));
    let schedule = dir.path().join("schedule.json");
    let run = dir.path().join("ode");
    let o = qlgc(&[
        "simulate",
        "--schedule",
        schedule.to_str().unwrap(),
        "--engine",
        "ode",
        "--samples",
        "8",
        "-o",
        run.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let series = read_series(&run);
    let last = series.last().unwrap();
    assert_eq!(last.coherences.len(), 6);
    for c in &last.coherences {
        assert!((c - 0.25).abs() < 1e-3, "{c}");
    }
}

#[test]
fn simulate_empty_schedule_keeps_populations() {
    let dir = TempDir::new().unwrap();
    let schedule = dir.path().join("empty.json");
    std::fs::write(&schedule, r#"{"system": "hf4", "pulses": []}"#).unwrap();
    let o = qlgc(&[
        "simulate",
        "--schedule",
        schedule.to_str().unwrap(),
        "--state",
        "level:2",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for s in &read_series(dir.path()).samples {
        assert_eq!(s.populations, vec![0.0, 1.0, 0.0, 0.0]);
    }
}

#[test]
fn tolerance_environment_variable() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qlgc(&["scheme", "transfer", "--samples", "4", "-o", out]);
    assert_eq!(o.status.code(), Some(0));
    let schedule = dir.path().join("schedule.json");
    let sim = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_qlgc"))
            .args(["simulate", "--schedule", schedule.to_str().unwrap(), "--engine", "ode", "-o", out])
            .env("QLGC_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(sim("1e-7").status.code(), Some(0));
    assert_eq!(sim("not-a-number").status.code(), Some(1));
    assert_eq!(sim("0.5").status.code(), Some(1));
}

#[test]
fn presets() {
    let o = qlgc(&["presets", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("rb4") && text.contains("hf4"));

    let text = stdout(&qlgc(&["presets", "show", "hf4"]));
    assert!(text.contains("7.8e14"), "{text}");
    assert!(text.contains("4.19e-2"), "{text}");
    assert!(text.contains("3.24e-31"), "{text}");
    assert_eq!(qlgc(&["presets", "show", "xyz"]).status.code(), Some(1));
}

#[test]
fn runs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let o = qlgc(&["scheme", "superpose", "--system", "hf4", "--r", "0.5,0.5,0.5,0.5", "--samples", "8", "-o"]
            .into_iter()
            .chain([dir.path().to_str().unwrap()])
            .collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["factors.json", "schedule.json", "validation.json", "timeseries.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}
