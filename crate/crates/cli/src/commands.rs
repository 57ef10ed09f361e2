use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use dflow_core::catalog::NamedFlow;
use dflow_core::density_flow::{build_density_grid, summarize, transport_residual, uniform_grid};
use dflow_core::freeconv::verify_sequence;
use dflow_core::hopf::{Characteristic, FlowSolution};
use dflow_core::io::{read_empirical_csv, write_density_csv, write_hopf_csv, write_roots_csv, HopfRow};
use dflow_core::measure::{
    circle_points, compare_on_circle, distribution_distance, Measure, MeasureSpec, RealDistribution,
};
use dflow_core::moments_flow::{evolve_moments, exact_moments, terminal_limits, InitialMoments};
use dflow_core::polycore::{Polynomial, Root, RootSet};
use dflow_core::rootfind::{all_roots, derivative_flow, RootFindMode};
use dflow_core::Error;
use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::failure::Failure;
use crate::output::Report;
use crate::verify;

type Outcome = Result<Report, Failure>;

pub fn dispatch(cmd: &Command, g: &GlobalArgs) -> Outcome {
    match cmd {
        Command::Flow(a) => flow(a, g),
        Command::Hopf(a) => hopf(a, g),
        Command::Moments(a) => moments(a),
        Command::Density(a) => density(a, g),
        Command::Compare(a) => compare(a, g),
        Command::Freeconv(a) => freeconv(a, g),
        Command::Example(a) => example(a),
        Command::Verify(a) => verify::run(a, g),
    }
}

fn times_or_default(t: &[f64]) -> Vec<f64> {
    if t.is_empty() {
        DEFAULT_TIMES.to_vec()
    } else {
        t.to_vec()
    }
}

fn check_times(times: &[f64]) -> Result<(), Failure> {
    match times.iter().find(|t| !(0.0..1.0).contains(*t)) {
        Some(t) => Err(Failure::usage(format!("time {t} outside [0, 1)"))),
        None => Ok(()),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    let trimmed = text.trim_start();
    let body = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        text.to_string()
    } else {
        std::fs::read_to_string(text).map_err(|e| Failure::usage(format!("cannot read {what} {text:?}: {e}")))?
    };
    serde_json::from_str(&body).map_err(|e| Failure::usage(format!("bad {what}: {e}")))
}

/// A solver for the requested initial measure, with the catalogue entry if any.
fn solution(src: &MeasureSource, g: &GlobalArgs) -> Result<(FlowSolution, Option<NamedFlow>), Failure> {
    let (measure, named): (Arc<dyn Measure>, _) = match (&src.named, &src.measure) {
        (Some(flow), _) => (flow.initial_measure(), Some(*flow)),
        (None, Some(text)) => {
            let spec: MeasureSpec = parse_json(text, "measure specification")?;
            spec.validate()?;
            (Arc::new(spec), None)
        }
        (None, None) => return Err(Failure::usage("no measure given")),
    };
    Ok((FlowSolution::new(measure, g.solver()), named))
}

fn default_radius(support: f64) -> f64 {
    2.0 * support + 1.0
}

/// First error in input order, so reports do not depend on scheduling.
fn first_error<T>(results: Vec<dflow_core::Result<T>>) -> Result<Vec<T>, Failure> {
    results.into_iter().map(|r| r.map_err(Failure::from)).collect()
}

fn csv<F>(write: F) -> Result<Vec<u8>, Failure>
where
    F: FnOnce(&mut Vec<u8>) -> dflow_core::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Zeros of `p^n`, snapping to the real axis when `p` is real and a zero is
/// real up to rounding.
fn poly_power_roots(text: &str, n: usize, g: &GlobalArgs) -> Result<RootSet, Failure> {
    let p: Polynomial = parse_json(text, "polynomial")?;
    if p.degree() == 0 {
        return Err(Failure::usage("polynomial must be nonconstant"));
    }
    if n == 0 {
        return Err(Failure::usage("--n must be positive"));
    }
    let real_coeffs = p.coeffs().iter().all(|c| c.im == 0.0);
    let roots = all_roots(&p, &g.rootfind(RootFindMode::GeneralComplex))?;
    Ok(RootSet::new(
        roots
            .distinct()
            .iter()
            .map(|r| {
                let z = if real_coeffs && r.z.im.abs() <= 1e-7 * r.z.norm().max(1.0) {
                    Complex64::new(r.z.re, 0.0)
                } else {
                    r.z
                };
                Root {
                    z,
                    multiplicity: r.multiplicity * n,
                }
            })
            .collect(),
    ))
}

fn flow(a: &FlowArgs, g: &GlobalArgs) -> Outcome {
    let times = times_or_default(&a.t);
    check_times(&times)?;
    let (roots, source) = match (&a.source.named, &a.source.poly) {
        (Some(family), _) => (family.zeros(a.n)?, family.to_string()),
        (None, Some(text)) => (poly_power_roots(text, a.n, g)?, "poly".to_string()),
        (None, None) => return Err(Failure::usage("no polynomial given")),
    };
    let degree = roots.cardinality();
    let ks: Vec<usize> = times.iter().map(|t| (t * degree as f64).round() as usize).collect();
    let kmax = ks.iter().copied().max().unwrap_or(0);
    if kmax >= degree {
        return Err(Error::DerivativeOrderExhausted { k: kmax, degree }.into());
    }
    let mode = if roots.is_real() {
        RootFindMode::RealInterlacing
    } else {
        RootFindMode::GeneralComplex
    };
    debug!("flow of degree {degree} to k = {kmax} in {mode:?} mode");
    let table = if kmax > 0 {
        derivative_flow(&roots, kmax, &g.rootfind(mode))?
    } else {
        Vec::new()
    };
    let mut report = Report::new(Value::Null);
    let mut rows = Vec::new();
    for (&t, &k) in times.iter().zip(&ks) {
        let zeros = if k == 0 { &roots } else { &table[k - 1] };
        let name = format!("roots_t{t}.csv");
        report = report.table(name.clone(), csv(|b| write_roots_csv(b, zeros))?);
        let all = zeros.expanded();
        let mean = all.iter().sum::<Complex64>() / all.len() as f64;
        rows.push(json!({
            "t": t,
            "k": k,
            "zeros": degree - k,
            "distinct": zeros.distinct().len(),
            "real": zeros.is_real(),
            "max_modulus": zeros.max_modulus(),
            "mean": complex_json(mean),
            "file": name,
        }));
    }
    report.summary = json!({"source": source, "degree": degree, "times": rows});
    Ok(report)
}

fn hopf(a: &HopfArgs, g: &GlobalArgs) -> Outcome {
    let (sol, named) = solution(&a.source, g)?;
    let times = times_or_default(&a.t);
    check_times(&times)?;
    let (points, grid) = match (&a.re, &a.im) {
        (Some(re), Some(im)) => {
            let pts: Vec<Complex64> = im
                .values()
                .iter()
                .flat_map(|&y| re.values().into_iter().map(move |x| Complex64::new(x, y)))
                .collect();
            (pts, json!({"re": re, "im": im}))
        }
        _ => {
            let radius = a.radius.unwrap_or_else(|| default_radius(sol.support_radius()));
            if a.samples == 0 || !(radius > 0.0) {
                return Err(Failure::usage("need a positive radius and sample count"));
            }
            (circle_points(radius, a.samples), json!({"radius": radius, "samples": a.samples}))
        }
    };
    let jobs: Vec<(Complex64, f64)> = times.iter().flat_map(|&t| points.iter().map(move |&z| (z, t))).collect();
    let solved: Vec<Characteristic> = first_error(jobs.par_iter().map(|&(z, t)| sol.solve(z, t)).collect())?;
    let rows: Vec<HopfRow> = jobs
        .iter()
        .zip(&solved)
        .map(|(&(z, t), &solution)| HopfRow { z, t, solution })
        .collect();
    let oracle = named.and_then(|flow| {
        let errors: Vec<f64> = rows
            .iter()
            .filter_map(|r| flow.oracle_u(r.z, r.t).ok().map(|u| (u - r.solution.u).norm()))
            .collect();
        (!errors.is_empty()).then(|| {
            json!({"compared": errors.len(), "max_error": errors.iter().copied().fold(0.0, f64::max)})
        })
    });
    let summary = json!({
        "points": rows.len(),
        "times": times,
        "grid": grid,
        "max_residual": rows.iter().map(|r| r.solution.residual).fold(0.0, f64::max),
        "max_iterations": rows.iter().map(|r| r.solution.iterations).max().unwrap_or(0),
        "oracle": oracle,
    });
    Ok(Report::new(summary).table("hopf.csv", csv(|b| write_hopf_csv(b, &rows))?))
}

fn moments(a: &MomentsArgs) -> Outcome {
    let (m0, source) = if let Some(list) = &a.source.m0 {
        let entries: Vec<&str> = list.iter().map(String::as_str).collect();
        (InitialMoments::parse(&entries)?, "m0".to_string())
    } else {
        let (spec, measure, label): (Option<MeasureSpec>, Arc<dyn Measure>, String) = match (&a.source.named, &a.source.measure) {
            (Some(flow), _) => (flow.initial_spec(), flow.initial_measure(), flow.to_string()),
            (None, Some(text)) => {
                let spec: MeasureSpec = parse_json(text, "measure specification")?;
                spec.validate()?;
                (Some(spec.clone()), Arc::new(spec), "measure".to_string())
            }
            (None, None) => return Err(Failure::usage("no initial moments given")),
        };
        let m0 = match spec.as_ref().and_then(|s| exact_moments(s, a.kmax)) {
            Some(exact) => InitialMoments::Exact(exact),
            None => InitialMoments::Float(measure.moments(a.kmax)),
        };
        (m0, label)
    };
    if m0.is_empty() {
        return Err(Failure::usage("no initial moments given"));
    }
    let kmax = a.kmax.min(m0.len() - 1);
    if kmax < a.kmax {
        warn!("only {} initial moments given; kmax lowered to {kmax}", m0.len());
    }
    let times = a.t.clone();
    check_times(&times)?;
    let mp = evolve_moments(&m0, kmax)?;
    let limits: Vec<Value> = if kmax >= 1 {
        terminal_limits(&mp)?
            .into_iter()
            .map(|l| json!({"k": l.k, "value": l.value, "expected": l.expected, "holds": l.holds()}))
            .collect()
    } else {
        Vec::new()
    };
    let values: Vec<Value> = times
        .iter()
        .map(|&t| {
            let m: dflow_core::Result<Vec<Value>> =
                (0..=kmax).map(|k| mp.evaluate(k, t).map(complex_json)).collect();
            m.map(|m| json!({"t": t, "moments": m}))
        })
        .collect::<dflow_core::Result<_>>()?;
    let summary = json!({
        "source": source,
        "requested_kmax": a.kmax,
        "polynomials": mp,
        "terminal_limits": limits,
        "max_recursion_residual": mp.recursion_residual().into_iter().fold(0.0, f64::max),
        "values": values,
    });
    Ok(Report::new(summary))
}

fn is_uniform(v: &[f64]) -> bool {
    if v.len() < 3 {
        return false;
    }
    let h = v[1] - v[0];
    v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
}

fn density(a: &DensityArgs, g: &GlobalArgs) -> Outcome {
    let (sol, named) = solution(&a.source, g)?;
    let times = match &a.t_range {
        Some(r) => r.values(),
        None => times_or_default(&a.t),
    };
    check_times(&times)?;
    let reach = sol.support_radius();
    let xs = a.x.map(|r| r.values()).unwrap_or_else(|| uniform_grid(-reach, reach, 201));
    let grid = build_density_grid(&sol, &xs, &times, a.eps)?;
    let residual = if is_uniform(&times) && is_uniform(&xs) {
        Some(transport_residual(&grid)?)
    } else {
        None
    };
    let oracle = named.and_then(|flow| {
        let mut worst: Option<f64> = None;
        for (it, &t) in grid.t.iter().enumerate() {
            for (ix, &x) in grid.x.iter().enumerate() {
                if grid.failures.iter().any(|c| c.it == it && c.ix == ix) {
                    continue;
                }
                if let Ok((f, _)) = flow.oracle_density(x, t) {
                    worst = Some(worst.unwrap_or(0.0).max((f - grid.f[it][ix]).abs()));
                }
            }
        }
        worst
    });
    let summary = json!({
        "points": xs.len() * times.len(),
        "times": times,
        "masses": grid.row_masses(),
        "failed_cells": grid.failures.len(),
        "transport": residual.as_ref().map(|r| summarize(&grid, r)),
        "oracle_max_error": oracle,
    });
    let table = csv(|b| write_density_csv(b, &grid, residual.as_ref()))?;
    Ok(Report::new(summary).table("density.csv", table))
}

/// `mu_t` on the real line from the catalogue formulas.
fn catalogued_distribution(flow: NamedFlow, t: f64) -> Option<RealDistribution> {
    let edges = flow.oracle_endpoints(t).ok()?;
    let (lo, hi) = (edges.first()?.re, edges.last()?.re);
    flow.oracle_density(0.0, t).ok()?;
    let continuous = RealDistribution::from_edge_density(lo, hi, 4000, |x| {
        flow.oracle_density(x, t).map(|(f, _)| f).unwrap_or(0.0)
    });
    let mut dist = RealDistribution::atomic(flow.atoms(t).ok()?);
    dist.continuous = continuous.continuous;
    Some(dist)
}

fn compare(a: &CompareArgs, g: &GlobalArgs) -> Outcome {
    let file = File::open(&a.empirical)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", a.empirical.display())))?;
    let empirical = read_empirical_csv(BufReader::new(file))?;
    let (sol, named) = solution(&a.source, g)?;
    let t = a.t;
    check_times(&[t])?;
    let k = a.n.map(|n| (t * n as f64).round() as usize);
    let mass = match (a.n, k) {
        (Some(n), Some(k)) if k < n => (n - k) as f64 / n as f64,
        (Some(n), _) => return Err(Failure::usage(format!("t = {t} leaves no zeros of a degree-{n} polynomial"))),
        _ => 1.0 - t,
    };
    let total = empirical.total_mass();
    let scaled = empirical.reweighted(mass / total);
    let radius = a
        .radius
        .unwrap_or_else(|| default_radius(sol.support_radius().max(empirical.support_radius())));
    let sup_err = compare_on_circle(|z| scaled.cauchy(z), |z| sol.solve_u(z, t), radius, a.samples)?;
    let reference = if empirical.is_real() {
        match named {
            Some(flow) if t > 0.0 => catalogued_distribution(flow, t),
            _ if t == 0.0 => sol.initial().real_distribution().ok(),
            _ => None,
        }
    } else {
        None
    };
    let (kolmogorov, w1) = match reference {
        Some(reference) => {
            let share = reference.total_mass() / total;
            let atoms = empirical.atoms().iter().map(|x| (x.z.re, x.weight * share)).collect();
            let (ks, w) = distribution_distance(&RealDistribution::atomic(atoms), &reference)?;
            (Some(ks), Some(w))
        }
        None => {
            debug!("no real-line reference; distances skipped");
            (None, None)
        }
    };
    Ok(Report::new(json!({
        "sup_cauchy_err": sup_err,
        "kolmogorov": kolmogorov,
        "w1": w1,
        "n": a.n,
        "k": k,
        "t": t,
        "radius": radius,
        "samples": a.samples,
    })))
}

fn freeconv(a: &FreeconvArgs, g: &GlobalArgs) -> Outcome {
    let times = times_or_default(&a.t);
    check_times(&times)?;
    let zeros = a.named.zeros(a.n)?;
    let ks: Vec<usize> = times.iter().map(|t| (t * a.n as f64).round() as usize).collect();
    let kmax = ks.iter().copied().max().unwrap_or(0);
    if kmax >= a.n {
        return Err(Error::DerivativeOrderExhausted { k: kmax, degree: a.n }.into());
    }
    let mode = if a.named.is_real() {
        RootFindMode::RealInterlacing
    } else {
        RootFindMode::GeneralComplex
    };
    let table = if kmax > 0 {
        derivative_flow(&zeros, kmax, &g.rootfind(mode))?
    } else {
        Vec::new()
    };
    let sol = FlowSolution::new(a.named.limit().measure(), g.solver());
    let radius = a.radius.unwrap_or_else(|| default_radius(sol.support_radius()));
    let cases: Vec<(usize, usize, RootSet)> = ks
        .iter()
        .map(|&k| (a.n, k, if k == 0 { zeros.clone() } else { table[k - 1].clone() }))
        .collect();
    let checks = verify_sequence(&cases, &sol, radius, a.samples)?;
    let rows: Vec<Value> = checks
        .iter()
        .zip(&times)
        .map(|(c, t)| json!({"t": t, "k": c.k, "error": c.error}))
        .collect();
    Ok(Report::new(json!({
        "family": a.named.to_string(),
        "n": a.n,
        "radius": radius,
        "samples": a.samples,
        "checks": rows,
    })))
}

fn example(a: &ExampleArgs) -> Outcome {
    let flow = a.named;
    let times = times_or_default(&a.t);
    if let Some(t) = times.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Failure::usage(format!("time {t} outside (0, 1)")));
    }
    let mut report = Report::new(Value::Null);
    let mut tables = Vec::new();

    let points = circle_points(a.radius, a.samples);
    let probe = flow.oracle_u(points[0], times[0]);
    if !matches!(probe, Err(Error::Unsupported(_))) {
        let mut out = String::from("re_z,im_z,t,re_u,im_u\n");
        for &t in &times {
            for &z in &points {
                let u = flow.oracle_u(z, t)?;
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt(z.re),
                    fmt(z.im),
                    fmt(t),
                    fmt(u.re),
                    fmt(u.im)
                ));
            }
        }
        report = report.table("example_u.csv", out.into_bytes());
        tables.push("example_u.csv");
    }

    if !matches!(flow.oracle_density(0.0, times[0]), Err(Error::Unsupported(_))) {
        let reach = flow.initial_measure().support_radius();
        let xs = a.x.map(|r| r.values()).unwrap_or_else(|| uniform_grid(-reach, reach, 201));
        let mut out = String::from("x,t,f\n");
        for &t in &times {
            for &x in &xs {
                let (f, _) = flow.oracle_density(x, t)?;
                out.push_str(&format!("{},{},{}\n", fmt(x), fmt(t), fmt(f)));
            }
        }
        report = report.table("example_density.csv", out.into_bytes());
        tables.push("example_density.csv");
    }

    let mut out = String::from("t,re,im\n");
    let mut atoms = Vec::new();
    for &t in &times {
        for z in flow.oracle_endpoints(t)? {
            out.push_str(&format!("{},{},{}\n", fmt(t), fmt(z.re), fmt(z.im)));
        }
        atoms.push(json!({"t": t, "atoms": flow.atoms(t)?}));
    }
    report = report.table("example_endpoints.csv", out.into_bytes());
    tables.push("example_endpoints.csv");

    report.summary = json!({
        "flow": flow.to_string(),
        "times": times,
        "tables": tables,
        "atoms": atoms,
    });
    Ok(report)
}

fn fmt(x: f64) -> String {
    dflow_core::io::fmt_float(x)
}
