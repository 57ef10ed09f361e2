use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use tempfile::TempDir;

fn dflow(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dflow"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Value {
    let o = dflow(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("summary JSON on stdout")
}

/// `(value, multiplicity or weight)` rows of a three-column table.
fn read_table(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

const TWO_ATOMS: &str = r#"{"type":"atoms","atoms":[{"z":[-1,0],"weight":0.5},{"z":[1,0],"weight":0.5}]}"#;

#[test]
fn rodrigues_flow_keeps_endpoint_atoms() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["flow", "--named", "rodrigues", "--n", "128", "--t", "0.25"]);
    assert_eq!(s["times"][0]["k"], 32);
    let rows = read_table(&dir.path().join("roots_t0.25.csv"));
    let mult = |x: f64| -> f64 { rows.iter().filter(|r| (r[0] - x).abs() < 1e-12).map(|r| r[2]).sum() };
    assert_eq!(mult(-1.0), 32.0);
    assert_eq!(mult(1.0), 32.0);
    assert_eq!(rows.iter().map(|r| r[2]).sum::<f64>(), 96.0);
}

#[test]
fn flow_at_time_zero_returns_input_roots() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["flow", "--poly", "[[-1,0],[0,0],[1,0]]", "--n", "1", "--t", "0"]);
    let rows = read_table(&dir.path().join("roots_t0.csv"));
    assert_eq!(rows, vec![vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]]);
}

#[test]
fn chebyshev_half_flow_is_inside_shrunken_interval() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["flow", "--named", "chebyshev", "--n", "256", "--t", "0.5"]);
    let rows = read_table(&dir.path().join("roots_t0.5.csv"));
    assert_eq!(rows.iter().map(|r| r[2]).sum::<f64>(), 128.0);
    let edge = 0.75f64.sqrt();
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[0].abs() < edge));
}

#[test]
fn hopf_matches_semicircle_closed_form() {
    let dir = TempDir::new().unwrap();
    let s = ok(
        dir.path(),
        &["hopf", "--named", "semicircle", "--radius", "3", "--samples", "100", "--t", "0.1,0.5,0.9"],
    );
    assert_eq!(s["points"], 300);
    assert!(s["oracle"]["max_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn hopf_two_atoms_solves_quadratic() {
    // (z^2 - 1) u^2 + (2t - 1) z u - t (1 - t) = 0, branch near (1 - t)/z
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["hopf", "--measure", TWO_ATOMS, "--radius", "3", "--samples", "32", "--t", "0.3,0.7"]);
    let rows = read_table(&dir.path().join("hopf.csv"));
    assert_eq!(rows.len(), 64);
    for r in rows {
        let (z, t, u) = (Complex64::new(r[0], r[1]), r[2], Complex64::new(r[3], r[4]));
        let a = z * z - 1.0;
        let b = (2.0 * t - 1.0) * z;
        let c = Complex64::new(-t * (1.0 - t), 0.0);
        let disc = (b * b - 4.0 * a * c).sqrt();
        let roots = [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)];
        let guess = (1.0 - t) / z;
        let want = if (roots[0] - guess).norm() < (roots[1] - guess).norm() { roots[0] } else { roots[1] };
        assert!((u - want).norm() < 1e-12, "z = {z}, t = {t}: {u} vs {want}");
    }
}

#[test]
fn hopf_at_time_zero_is_cauchy_transform() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["hopf", "--measure", TWO_ATOMS, "--radius", "2", "--samples", "16", "--t", "0"]);
    for r in read_table(&dir.path().join("hopf.csv")) {
        let z = Complex64::new(r[0], r[1]);
        let c = 0.5 / (z + 1.0) + 0.5 / (z - 1.0);
        assert!((Complex64::new(r[3], r[4]) - c).norm() < 1e-15);
    }
}

#[test]
fn moments_second_order_closed_form() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["moments", "--m0", "1,0,0.25", "--kmax", "4"]);
    assert_eq!(s["polynomials"]["kmax"], 2);
    assert_eq!(s["polynomials"]["polys"][2], serde_json::json!(["1/4", "-1/2", "1/4"]));
    assert!(s["terminal_limits"].as_array().unwrap().iter().all(|l| l["holds"] == true));
}

#[test]
fn moments_of_named_law_are_exact() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["moments", "--named", "semicircle", "--kmax", "6", "--t", "0.5"]);
    assert_eq!(s["polynomials"]["exact"], true);
    assert_eq!(s["max_recursion_residual"], 0.0);
    // semicircle on [-1, 1] at t: radius sqrt(1 - t), mass 1 - t, so m_2 = (1 - t)^2 / 4
    let m2 = s["values"][0]["moments"][2][0].as_f64().unwrap();
    assert!((m2 - 0.0625).abs() < 1e-15);
}

#[test]
fn density_matches_semicircle() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["density", "--named", "semicircle", "--t", "0.5", "--x", "-0.6,0.6,13"]);
    assert!(s["oracle_max_error"].as_f64().unwrap() < 1e-5);
    for r in read_table(&dir.path().join("density.csv")) {
        let want = 2.0 / PI * (0.5 - r[0] * r[0]).sqrt();
        assert!((r[2] - want).abs() < 1e-5, "x = {}", r[0]);
    }
}

#[test]
fn density_on_uniform_grid_reports_transport_residual() {
    let dir = TempDir::new().unwrap();
    let s = ok(
        dir.path(),
        &["density", "--named", "semicircle", "--t-range", "0.4,0.6,21", "--x", "-0.3,0.3,61"],
    );
    assert!(s["transport"]["max_residual"].as_f64().unwrap() < 1e-2);
    assert_eq!(s["transport"]["failed_cells"], 0);
}

#[test]
fn compare_self_is_zero() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["flow", "--poly", "[[-1,0],[0,0],[1,0]]", "--n", "1", "--t", "0"]);
    let table = dir.path().join("roots_t0.csv");
    let s = ok(
        dir.path(),
        &["compare", "--empirical", table.to_str().unwrap(), "--measure", TWO_ATOMS, "--t", "0"],
    );
    assert_eq!(s["sup_cauchy_err"], 0.0);
    assert_eq!(s["kolmogorov"], 0.0);
    assert_eq!(s["w1"], 0.0);
}

#[test]
fn compare_chebyshev_with_arcsine_flow() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["flow", "--named", "chebyshev", "--n", "256", "--t", "0.5"]);
    let table = dir.path().join("roots_t0.5.csv");
    let s = ok(
        dir.path(),
        &[
            "compare", "--empirical", table.to_str().unwrap(), "--named", "arcsine", "--t", "0.5", "--n", "256",
            "--radius", "3",
        ],
    );
    assert_eq!(s["k"], 128);
    assert!(s["sup_cauchy_err"].as_f64().unwrap() <= 0.03);
    assert!(s["w1"].as_f64().unwrap() <= 0.05);
}

#[test]
fn compare_rodrigues_with_closed_form() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["flow", "--named", "rodrigues", "--n", "128", "--t", "0.25"]);
    let table = dir.path().join("roots_t0.25.csv");
    let s = ok(
        dir.path(),
        &["compare", "--empirical", table.to_str().unwrap(), "--named", "rodrigues", "--t", "0.25", "--n", "128"],
    );
    assert!(s["w1"].as_f64().unwrap() <= 0.05);
}

#[test]
fn freeconv_chebyshev_error_is_small() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["freeconv", "--named", "chebyshev", "--n", "256", "--t", "0.5", "--radius", "4"]);
    assert!(s["checks"][0]["error"].as_f64().unwrap() <= 0.05);
}

#[test]
fn example_dumps_available_oracles() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["example", "--named", "rodrigues", "--t", "0.25"]);
    assert_eq!(s["atoms"][0]["atoms"], serde_json::json!([[-1.0, 0.25], [1.0, 0.25]]));
    let edges = read_table(&dir.path().join("example_endpoints.csv"));
    assert!((edges[1][1] - 0.75f64.sqrt()).abs() < 1e-15);
    let s = ok(dir.path(), &["example", "--named", "kalyagin", "--t", "0.5"]);
    assert_eq!(s["tables"], serde_json::json!(["example_endpoints.csv"]));
}

#[test]
fn manifest_echoes_config() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["--seed", "9", "example", "--named", "arcsine", "--t", "0.5"]);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config"]["global"]["seed"], 9);
    assert_eq!(m["config"]["command"]["named"], "arcsine");
    assert!(m["outputs"].as_array().unwrap().len() >= 3);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(dflow(dir.path(), &["nonsense"]).status.code(), Some(1));
    assert_eq!(dflow(dir.path(), &["flow", "--named", "chebyshev", "--n", "4", "--t", "1.5"]).status.code(), Some(1));
    assert_eq!(dflow(dir.path(), &["--tol", "0.5", "example", "--named", "arcsine"]).status.code(), Some(1));
    let pole = r#"{"type":"atoms","atoms":[{"z":[0,0],"weight":1}]}"#;
    let o = dflow(dir.path(), &["hopf", "--measure", pole, "--t", "0.5", "--re", "-1,1,3", "--im", "0,0.5,2"]);
    assert_eq!(o.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["error"]["kind"], "numerical");
    assert_eq!(dflow(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, jobs) in [(&a, "1"), (&b, "4")] {
        ok(out, &["--jobs", jobs, "flow", "--named", "hermite", "--n", "64", "--t", "0.5"]);
        let table = out.join("roots_t0.5.csv");
        ok(
            out,
            &["--jobs", jobs, "compare", "--empirical", table.to_str().unwrap(), "--named", "semicircle", "--t", "0.5"],
        );
        ok(out, &["--jobs", jobs, "hopf", "--named", "semicircle", "--t", "0.3,0.6"]);
    }
    for name in ["roots_t0.5.csv", "flow.json", "compare.json", "hopf.csv", "hopf.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn verify_suite_passes() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["--seed", "3", "verify", "--cases", "3"]);
    assert_eq!(s["passed"], true, "{s}");
    assert_eq!(s["checks"].as_array().unwrap().len(), 10);
}
