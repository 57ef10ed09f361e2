//! Seeded property suite behind `dflow verify`. Each check is small enough to
//! finish in seconds; the thresholds match the library's integration tests.

use std::f64::consts::PI;
use std::time::Instant;

use dflow_core::catalog::{Family, NamedFlow};
use dflow_core::cauchy::{univalence_check, verify_bounds};
use dflow_core::density_flow::{build_density_grid, transport_residual, uniform_grid, DEFAULT_EPS};
use dflow_core::freeconv::verify_steinerberger;
use dflow_core::hopf::{branch_points, discrete_hopf_residual, signed_example_branch_points, FlowSolution};
use dflow_core::measure::{circle_points, Atom, EmpiricalMeasure, MeasureSpec};
use dflow_core::moments_flow::{evolve_moments, exact_moments, moments_from_contour, terminal_limits, InitialMoments};
use dflow_core::polycore::{Polynomial, RootSet};
use dflow_core::rootfind::{derivative_flow, RootFindMode};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::args::{GlobalArgs, VerifyArgs};
use crate::failure::Failure;
use crate::output::Report;

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng, &Ctx) -> dflow_core::Result<(bool, String)>;

struct Ctx<'a> {
    cases: usize,
    global: &'a GlobalArgs,
}

const CHECKS: [(&str, Check); 10] = [
    ("discrete_hopf_identity", discrete_hopf_identity),
    ("interlacing", interlacing),
    ("exact_moments", exact_moment_identities),
    ("closed_form_flows", closed_form_flows),
    ("contour_vs_recursion", contour_vs_recursion),
    ("cauchy_bounds", cauchy_bounds),
    ("branch_points", branch_point_formulas),
    ("transport_residual", transport),
    ("free_convolution", free_convolution),
    ("mass_decay", mass_decay),
];

pub fn run(a: &VerifyArgs, g: &GlobalArgs) -> Result<Report, Failure> {
    if a.cases == 0 {
        return Err(Failure::usage("--cases must be positive"));
    }
    let ctx = Ctx { cases: a.cases, global: g };
    let mut results = Vec::new();
    for (i, (name, check)) in CHECKS.iter().enumerate() {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed.wrapping_add(i as u64));
        let (passed, detail) = match check(&mut rng, &ctx) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        log::info!("{name}: {} in {:.2}s", if passed { "pass" } else { "FAIL" }, start.elapsed().as_secs_f64());
        results.push(CheckResult { name, passed, detail });
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let mut report = Report::new(json!({
        "seed": g.seed,
        "cases": a.cases,
        "passed": failed.is_empty(),
        "checks": results,
    }));
    if !failed.is_empty() {
        report.failed_check = Some(format!("property checks failed: {}", failed.join(", ")));
    }
    Ok(report)
}

fn random_real_roots(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RootSet {
    RootSet::from_real((0..n).map(|_| rng.random_range(-scale..scale)))
}

fn discrete_hopf_identity(rng: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let cfg = ctx.global.rootfind(RootFindMode::RealInterlacing);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cases {
        let n = rng.random_range(10..=60);
        let scale = rng.random_range(0.5..3.0);
        let roots = random_real_roots(rng, n, scale);
        let k = n / 2;
        let flow = derivative_flow(&roots, k + 1, &cfg)?;
        for z in circle_points(3.0 * roots.max_modulus(), 20) {
            let res = discrete_hopf_residual(&flow[k - 1], &flow[k], n, z)?;
            let scale = (flow[k - 1].log_derivative(z)? / n as f64).norm();
            worst = worst.max(res.norm() / scale);
        }
    }
    Ok((worst <= 1e-10, format!("max relative residual {worst:.2e}")))
}

fn interlacing(rng: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let cfg = ctx.global.rootfind(RootFindMode::RealInterlacing);
    let mut bad = 0;
    for _ in 0..ctx.cases {
        let n = rng.random_range(3..40);
        let roots = random_real_roots(rng, n, 2.0);
        let flow = derivative_flow(&roots, 1, &cfg)?;
        let (outer, inner) = (roots.real_values(), flow[0].real_values());
        let ok = match (outer, inner) {
            (Some(o), Some(i)) => i.iter().enumerate().all(|(j, y)| o[j] <= *y && *y <= o[j + 1]),
            _ => false,
        };
        bad += usize::from(!ok);
    }
    Ok((bad == 0, format!("{bad} of {} derivatives fail to interlace", ctx.cases)))
}

fn exact_moment_identities(rng: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let kmax = 12;
    let mut failures = Vec::new();
    for trial in 0..ctx.cases {
        let mut m0 = vec!["1".to_string()];
        m0.extend((0..kmax).map(|_| format!("{}/{}", rng.random_range(-20i64..=20), rng.random_range(1i64..=20))));
        let entries: Vec<&str> = m0.iter().map(String::as_str).collect();
        let mp = evolve_moments(&InitialMoments::parse(&entries)?, kmax)?;
        let first = mp.t_coefficients(0)?;
        if first.len() != 2 || first[0].to_complex() != Complex64::new(1.0, 0.0) || first[1].to_complex() != Complex64::new(-1.0, 0.0) {
            failures.push(format!("{trial}: m_0"));
        }
        for k in 1..=kmax {
            if mp.degree(k)? > k || !mp.value_at_one(k)?.is_zero() {
                failures.push(format!("{trial}: m_{k}"));
            }
        }
        if !terminal_limits(&mp)?.iter().all(|l| l.holds()) {
            failures.push(format!("{trial}: terminal limits"));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} sequences exact to k = {kmax}", ctx.cases)
    } else {
        failures.join(", ")
    };
    Ok((failures.is_empty(), detail))
}

fn closed_form_flows(_: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for flow in [NamedFlow::Arcsine, NamedFlow::Semicircle] {
        let sol = FlowSolution::new(flow.initial_measure(), ctx.global.solver());
        for t in [0.1, 0.5, 0.9] {
            for z in circle_points(3.0, 50) {
                worst = worst.max((sol.solve_u(z, t)? - flow.oracle_u(z, t)?).norm());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max |u - closed form| {worst:.2e}")))
}

fn contour_vs_recursion(_: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let kmax = 8;
    let mut worst: f64 = 0.0;
    for spec in [MeasureSpec::Semicircle, MeasureSpec::Arcsine] {
        let exact = exact_moments(&spec, kmax).expect("named laws have exact moments");
        let mp = evolve_moments(&InitialMoments::Exact(exact), kmax)?;
        let sol = FlowSolution::new(std::sync::Arc::new(spec), ctx.global.solver());
        let u = |z: Complex64, t: f64| sol.solve_u(z, t);
        for t in [0.1, 0.5, 0.9] {
            for (k, mk) in moments_from_contour(&u, t, 2.0, kmax)?.iter().enumerate() {
                worst = worst.max((mk - mp.evaluate(k, t)?).norm());
            }
        }
    }
    Ok((worst <= 1e-8, format!("max discrepancy {worst:.2e}")))
}

fn cauchy_bounds(rng: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let (mut violations, mut univalence) = (0, 0);
    for _ in 0..ctx.cases {
        let r = rng.random_range(0.2..3.0);
        let count = rng.random_range(1..=30);
        let weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let atoms = weights
            .iter()
            .map(|w| {
                let rho = r * rng.random::<f64>().sqrt();
                Atom::new(Complex64::from_polar(rho, rng.random_range(0.0..2.0 * PI)), w / total)
            })
            .collect();
        let m = EmpiricalMeasure::new(atoms)?;
        violations += verify_bounds(&m, r, 2.5 * r, 64)?.bound_violations.len();
        univalence += usize::from(!univalence_check(&m, r, 2.5 * r, 64)?.passed);
    }
    Ok((
        violations == 0 && univalence == 0,
        format!("{violations} bound violations, {univalence} univalence failures"),
    ))
}

fn branch_point_formulas(_: &mut ChaCha8Rng, _: &Ctx) -> dflow_core::Result<(bool, String)> {
    let cubic = Polynomial::from_real(&[-1.0, 0.0, 0.0, 1.0]);
    let nearest = |set: &[Complex64], z: Complex64| set.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 0.9] {
        let found = branch_points(&cubic, t)?;
        for z in NamedFlow::CubicZ3m1.oracle_endpoints(t)? {
            worst = worst.max(nearest(&found, z));
        }
        for a in [1.0, 2.0, 10.0] {
            let (z1, z2) = signed_example_branch_points(a, t)?;
            worst = worst.max((z1.norm() - (a + 1.0 - t)).abs()).max((z2.norm() - (a + 1.0 - t)).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
}

fn transport(_: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let sol = FlowSolution::new(NamedFlow::Semicircle.initial_measure(), ctx.global.solver());
    let step = 1e-3;
    let ts = uniform_grid(0.4, 0.6, 201);
    let xs = uniform_grid(-0.3, 0.3, 601);
    debug_assert!((ts[1] - ts[0] - step).abs() < 1e-12);
    let grid = build_density_grid(&sol, &xs, &ts, DEFAULT_EPS)?;
    let worst = transport_residual(&grid)?.max_abs();
    Ok((worst <= 1e-4 && grid.failures.is_empty(), format!("max residual {worst:.2e} at step {step}")))
}

fn free_convolution(_: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let (n, k) = (128, 64);
    let zeros = Family::Chebyshev.zeros(n)?;
    let flow = derivative_flow(&zeros, k, &ctx.global.rootfind(RootFindMode::RealInterlacing))?;
    let sol = FlowSolution::new(NamedFlow::Arcsine.initial_measure(), ctx.global.solver());
    let err = verify_steinerberger(&flow[k - 1], n, k, &sol, 4.0, 128)?;
    Ok((err <= 0.05, format!("n = {n}, t = 1/2: error {err:.2e}")))
}

fn mass_decay(rng: &mut ChaCha8Rng, ctx: &Ctx) -> dflow_core::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cases {
        let count = rng.random_range(1..=10);
        let atoms = (0..count)
            .map(|_| Atom::new(Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), 1.0 / count as f64))
            .collect();
        let sol = FlowSolution::new(std::sync::Arc::new(MeasureSpec::atoms(atoms)), ctx.global.solver());
        let t = rng.random_range(0.05..0.95);
        let z = Complex64::new(1e6, 3e5);
        worst = worst.max((z * sol.solve_u(z, t)? - (1.0 - t)).norm());
    }
    Ok((worst <= 1e-5, format!("max |z u - (1 - t)| {worst:.2e} at |z| ~ 1e6")))
}
