use std::process::{Command, Output};

use lame_susy_cli::SampledCurve;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lame-susy")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lame-susy")).args(args).env(key, value).output().expect("binary runs")
}

fn curve(out: &Output) -> SampledCurve {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    SampledCurve::read_csv(out.stdout.as_slice()).expect("valid csv")
}

fn complex_list(s: &str) -> Vec<(f64, f64)> {
    s.split("; ")
        .map(|p| {
            let p = p.trim_end_matches('i');
            let bytes = p.as_bytes();
            let split = (1..p.len())
                .find(|&i| matches!(bytes[i], b'+' | b'-') && bytes[i - 1] != b'e')
                .expect("imaginary part");
            (p[..split].parse().unwrap(), p[split..].parse().unwrap())
        })
        .collect()
}

#[test]
fn band_edges_11() {
    let c = curve(&run(&["band-edges", "--m", "1", "--ell", "1", "--k2", "0.99"]));
    let analytic = c.column("analytic").unwrap();
    assert_eq!(analytic.len(), 3);
    for (a, e) in analytic.iter().zip([2.79, 3.19, 4.0]) {
        assert!((a - e).abs() < 1e-12);
    }
    assert!(c.column("deviation").unwrap().iter().all(|d| *d < 1e-6));
    assert_eq!(c.metadata_value("m"), Some("1"));
    assert!(c.metadata_value("normalization").is_some());
    assert!(c.metadata_value("version").is_some());
}

#[test]
fn band_edges_21() {
    let c = curve(&run(&["band-edges", "--m", "2", "--ell", "1", "--k2", "0.95"]));
    let analytic = c.column("analytic").unwrap();
    assert_eq!(analytic.len(), 5);
    assert!((analytic[0] - 3.8).abs() < 1e-12);
    assert!(c.column("deviation").unwrap().iter().all(|d| *d < 1e-5));
    assert_eq!(c.metadata_value("finite_bands"), Some("2"));
    assert_eq!(c.metadata_value("finite_gaps"), Some("2"));
}

#[test]
fn unsupported_model_exits_2() {
    let out = run(&["band-edges", "--m", "3", "--ell", "2", "--k2", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(1,1)") && err.contains("(2,1)"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["bloch", "--energy", "1", "--samples", "1"],
        vec!["bloch", "--energy", "1", "--x-min", "2", "--x-max", "1"],
        vec!["bloch"],
        vec!["partner", "--epsilon", "2", "--lambda", "abc"],
        vec!["band-edges", "--k2", "1.5"],
        vec!["figure", "figure3"],
        vec!["nonsense"],
    ] {
        assert_eq!(run(&args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bloch_reference_points() {
    let c = curve(&run(&["bloch", "--m", "1", "--ell", "1", "--k2", "0.99", "--energy", "2.4", "--samples", "101"]));
    let pts = complex_list(c.metadata_value("auxiliary_points").unwrap());
    assert!((pts[0].0 + 1.089).abs() < 2e-3 && (pts[1].0 - 2.607).abs() < 2e-3, "{pts:?}");
    let residual: f64 = c.metadata_value("residual").unwrap().parse().unwrap();
    assert!(residual < 1e-8);
    assert_eq!(c.rows(), 101);
    let x = c.column("x").unwrap();
    let k = c.metadata_value("period").unwrap().parse::<f64>().unwrap() / 2.0;
    assert!((x[0] + 4.0 * k).abs() < 1e-12 && (x[100] - 4.0 * k).abs() < 1e-12);
    let w = c.column("wronskian_re").unwrap();
    assert!(w.iter().all(|v| (v - w[0]).abs() < 1e-8 * w[0].abs()));
}

#[test]
fn bloch_residual_at_random_energies() {
    for e in ["0.37", "3.3", "5.91", "11.2"] {
        for model in [["1", "1"], ["2", "1"]] {
            let c = curve(&run(&["bloch", "--m", model[0], "--ell", model[1], "--k2", "0.8", "--energy", e, "--samples", "11"]));
            let r: f64 = c.metadata_value("residual").unwrap().parse().unwrap();
            assert!(r < 1e-8, "E={e} {model:?}: {r}");
        }
    }
}

#[test]
fn bloch_band_edge_is_degenerate() {
    for e in ["2.79", "4"] {
        let c = curve(&run(&["bloch", "--energy", e, "--samples", "41"]));
        assert_eq!(c.metadata_value("degenerate"), Some("true"));
        for part in ["re", "im"] {
            let a = c.column(&format!("psi1_{part}")).unwrap();
            let b = c.column(&format!("psi2_{part}")).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn partner_figure1_defect() {
    let c = curve(&run(&["partner", "--m", "1", "--ell", "1", "--k2", "0.99", "--epsilon", "2.4", "--lambda", "1.5", "--samples", "201"]));
    assert_eq!(c.metadata_value("partner"), Some("defect"));
    let names: Vec<&str> = c.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["x", "V", "Vtilde", "phi"]);
    let decay: f64 = c.metadata_value("decay_rate").unwrap().parse().unwrap();
    let floquet: f64 = c.metadata_value("floquet_rate").unwrap().parse().unwrap();
    assert!((decay - floquet).abs() < 0.01 * floquet);
    let residual: f64 = c.metadata_value("residual").unwrap().parse().unwrap();
    assert!(residual < 1e-6);
}

#[test]
fn partner_periodic_routes_agree() {
    for lambda in ["0", "inf"] {
        let c = curve(&run(&["partner", "--m", "2", "--ell", "1", "--k2", "0.95", "--epsilon", "3.5", "--lambda", lambda, "--samples", "301"]));
        assert_eq!(c.metadata_value("partner"), Some("periodic"));
        assert!(c.column("deviation").unwrap().iter().all(|d| *d < 1e-8));
        let pts = complex_list(c.metadata_value("auxiliary_points").unwrap());
        assert!((pts[1].0 - 1.26).abs() < 2e-3 && (pts[1].1 - 0.614).abs() < 2e-3, "{pts:?}");
    }
}

#[test]
fn singular_seeds_exit_3() {
    let out = run(&["partner", "--m", "1", "--ell", "1", "--k2", "0.99", "--epsilon", "2.4", "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node at x ="));
    let above = run(&["partner", "--epsilon", "3.0", "--lambda", "0"]);
    assert_eq!(above.status.code(), Some(3));
    let unsafe_in_band = run(&["partner", "--epsilon", "3.0", "--lambda", "1", "--allow-unsafe"]);
    assert_eq!(unsafe_in_band.status.code(), Some(3));
}

#[test]
fn figures_have_expected_schema() {
    for (name, roots) in [("figure1", vec![(-1.089, 0.0), (2.607, 0.0)]), ("figure2", vec![(-2.392, 0.0), (1.26, 0.614), (1.26, -0.614)])] {
        let c = curve(&run(&["figure", name]));
        let names: Vec<&str> = c.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["x", "V_gray", "Vtilde_black"]);
        assert_eq!(c.rows(), 2001);
        let pts = complex_list(c.metadata_value("auxiliary_points").unwrap());
        assert_eq!(pts.len(), roots.len());
        for (p, r) in pts.iter().zip(&roots) {
            assert!((p.0 - r.0).abs() < 2e-3 && (p.1 - r.1).abs() < 2e-3, "{name}: {pts:?}");
        }
        let x = c.column("x").unwrap();
        let k = c.metadata_value("period").unwrap().parse::<f64>().unwrap() / 2.0;
        assert!((x[0] + 4.0 * k).abs() < 1e-12 && (x[2000] - 4.0 * k).abs() < 1e-12);
    }
}

#[test]
fn output_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (fmt, file) in [("csv", "out.csv"), ("json", "out.json")] {
        let path = dir.path().join(file);
        let out = run(&["bloch", "--energy", "1.3", "--samples", "17", "--format", fmt, "--output", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        let bytes = std::fs::read(&path).unwrap();
        let c = match fmt {
            "csv" => SampledCurve::read_csv(bytes.as_slice()),
            _ => SampledCurve::read_json(bytes.as_slice()),
        }
        .unwrap();
        let mut again = Vec::new();
        match fmt {
            "csv" => c.write_csv(&mut again),
            _ => c.write_json(&mut again),
        }
        .unwrap();
        assert_eq!(again, bytes);
        assert_eq!(c.rows(), 17);
        assert_eq!(c.metadata_value("k2").unwrap().parse::<f64>().unwrap(), 0.99);
    }
}

#[test]
fn verify_default_passes_and_reports() {
    let out = run(&["verify"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("elliptic") && text.contains("spectral") && text.contains("tol"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn verify_single_suite_and_json() {
    let out = run(&["verify", "--suite", "elliptic", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = doc["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["suite"] == "elliptic" && c["passed"] == true));
    assert_eq!(doc["failed"], 0);
}

#[test]
fn verify_catches_injected_bug() {
    let out = run(&["verify", "--suite", "solutions", "--inject-bug"]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("[FAIL]") && l.contains("product equation residual")), "{text}");
}

#[test]
fn tolerance_env_scales_checks() {
    assert_eq!(run_env(&["verify", "--suite", "susy"], "LAME_SUSY_TOL", "1e-8").status.code(), Some(4));
    assert_eq!(run_env(&["verify", "--suite", "susy"], "LAME_SUSY_TOL", "10").status.code(), Some(0));
    assert_eq!(run_env(&["verify", "--suite", "susy"], "LAME_SUSY_TOL", "zero").status.code(), Some(1));
}
