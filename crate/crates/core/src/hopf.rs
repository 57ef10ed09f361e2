//! The complex Hopf equation `u_t = u_z / u` with `u(z, 0) = C(z)`, solved by
//! characteristics, and its algebraic form for polynomial initial data.
//!
//! Along a characteristic `u` is constant: `u(z, t) = u0(s)` where
//! `z = s - t / u0(s)`. Far from the support the map `s -> z` is a small
//! perturbation of the identity and plain fixed-point iteration converges;
//! closer in, the solution is continued in `t` from `s = z` at `t = 0`.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::safe_radius;
use crate::error::{precondition, Error, Result};
use crate::measure::{circle_points, EmpiricalMeasure, Measure};
use crate::polycore::{Polynomial, RootSet};
use crate::rootfind::{all_roots, RootFindConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Characteristic residual target, relative to `max(1, |z|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest continuation step in `t`.
    pub t_step: f64,
    /// Continuation gives up (shock) once steps fall below this.
    pub min_step: f64,
    /// Newton steps are capped at `damping * |s|`.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 100,
            t_step: 0.05,
            min_step: 1e-4,
            damping: 0.5,
        }
    }
}

/// A solved characteristic through `(z, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    pub u: Complex64,
    /// Foot of the characteristic at `t = 0`.
    pub s: Complex64,
    /// `|z - s + t / u0(s)|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solution operator of the Hopf equation for one initial measure.
#[derive(Clone, Debug)]
pub struct FlowSolution {
    initial: Arc<dyn Measure>,
    r: f64,
    real: bool,
    config: SolverConfig,
}

impl FlowSolution {
    pub fn new(initial: Arc<dyn Measure>, config: SolverConfig) -> Self {
        let r = initial.support_radius();
        let real = initial.is_real();
        FlowSolution {
            initial,
            r,
            real,
            config,
        }
    }

    pub fn from_measure(initial: impl Measure + 'static) -> Self {
        Self::new(Arc::new(initial), SolverConfig::default())
    }

    pub fn initial(&self) -> &dyn Measure {
        self.initial.as_ref()
    }

    pub fn support_radius(&self) -> f64 {
        self.r
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn u0(&self, z: Complex64) -> Result<Complex64> {
        self.initial.cauchy(z)
    }

    /// `u(z, t)`.
    pub fn solve_u(&self, z: Complex64, t: f64) -> Result<Complex64> {
        self.solve(z, t).map(|c| c.u)
    }

    /// Full characteristic data for `(z, t)`.
    pub fn solve(&self, z: Complex64, t: f64) -> Result<Characteristic> {
        if !(0.0..1.0).contains(&t) {
            return precondition(format!("time {t} outside [0, 1)"));
        }
        if t == 0.0 {
            return Ok(Characteristic {
                u: self.u0(z)?,
                s: z,
                residual: 0.0,
                iterations: 0,
            });
        }
        let far = safe_radius(self.r.max(f64::MIN_POSITIVE), t.max(0.5))?;
        if z.norm() >= far {
            if let Ok(c) = self.direct(z, t) {
                return Ok(c);
            }
        }
        self.continuation(z, t)
    }

    fn residual_target(&self, z: Complex64) -> f64 {
        self.config.tolerance * z.norm().max(1.0)
    }

    /// `F(s) = z - s + t/u0(s)` and `F'(s)`.
    fn characteristic(&self, z: Complex64, t: f64, s: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let u = self.u0(s)?;
        if u.norm() < 1e-300 {
            return Err(Error::SingularCharacteristic { s });
        }
        let du = self.initial.cauchy_derivative(s)?;
        let f = z - s + t / u;
        let df = -1.0 - t * du / (u * u);
        Ok((f, df, u))
    }

    /// The characteristic foot lies on the same side of the real axis as `z`,
    /// and no closer to it, when the initial measure lives on the real line.
    fn on_sheet(&self, z: Complex64, s: Complex64) -> bool {
        if !self.real || z.im == 0.0 {
            return true;
        }
        s.im * z.im.signum() >= z.im.abs() * (1.0 - 1e-9)
    }

    fn direct(&self, z: Complex64, t: f64) -> Result<Characteristic> {
        let target = self.residual_target(z);
        let mut s = z;
        let mut last = f64::INFINITY;
        let mut stalls = 0;
        let mut iterations = 0;
        while iterations < self.config.max_iterations {
            iterations += 1;
            let u = self.u0(s)?;
            if u.norm() < 1e-300 {
                return Err(Error::SingularCharacteristic { s });
            }
            let next = z + t / u;
            let res = (next - s).norm();
            s = next;
            if res <= target {
                break;
            }
            if res > 0.9 * last {
                stalls += 1;
                if stalls >= 3 {
                    break;
                }
            }
            last = res;
        }
        let (s, more) = self.newton(z, t, s)?;
        self.finish(z, t, s, iterations + more)
    }

    fn finish(&self, z: Complex64, t: f64, s: Complex64, iterations: usize) -> Result<Characteristic> {
        let (f, _, u) = self.characteristic(z, t, s)?;
        if !self.on_sheet(z, s) {
            return Err(Error::Shock { z, t, last: s });
        }
        Ok(Characteristic {
            u,
            s,
            residual: f.norm(),
            iterations,
        })
    }

    /// Damped Newton on `F`; converges or fails with the last iterate.
    fn newton(&self, z: Complex64, t: f64, mut s: Complex64) -> Result<(Complex64, usize)> {
        let target = self.residual_target(z);
        let floor = self.r.max(1e-3);
        for it in 0..self.config.max_iterations {
            let (f, df, _) = self.characteristic(z, t, s)?;
            if f.norm() <= target {
                return Ok((s, it));
            }
            let mut step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            let cap = self.config.damping * s.norm().max(floor);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            s -= step;
        }
        let (f, _, _) = self.characteristic(z, t, s)?;
        if f.norm() <= target {
            return Ok((s, self.config.max_iterations));
        }
        Err(Error::Shock { z, t, last: s })
    }

    fn continuation(&self, z: Complex64, t: f64) -> Result<Characteristic> {
        let mut tau = 0.0;
        let mut s = z;
        let mut h = self.config.t_step;
        let mut iterations = 0;
        while tau < t {
            let (step, next_t) = if t - tau <= h { (t - tau, t) } else { (h, tau + h) };
            let predicted = self.slope(s, tau).map_or(s, |v| s + v * step);
            let attempt = self
                .newton(z, next_t, predicted)
                .ok()
                .filter(|(cand, _)| self.on_sheet(z, *cand));
            match attempt {
                Some((cand, it)) => {
                    tau = next_t;
                    s = cand;
                    iterations += it + 1;
                    h = (1.5 * h).min(self.config.t_step);
                }
                None => {
                    h = 0.5 * step;
                    if h < self.config.min_step {
                        return Err(Error::Shock { z, t: tau, last: s });
                    }
                }
            }
        }
        self.finish(z, t, s, iterations)
    }

    /// `ds/dt` along a fixed `z`: `(1/u0) / (1 + t u0'/u0^2)`.
    fn slope(&self, s: Complex64, t: f64) -> Result<Complex64> {
        let u = self.u0(s)?;
        let du = self.initial.cauchy_derivative(s)?;
        Ok(u.inv() / (1.0 + t * du / (u * u)))
    }

    /// `u^{-1}(w, t) = u^{-1}(w, 0) - t/w`, with the inverse at `t = 0` by
    /// Newton on `u0(s) = w` seeded at `mass/w`.
    pub fn inverse_u(&self, w: Complex64, t: f64) -> Result<Complex64> {
        if w.is_zero() {
            return precondition("inverse_u needs w != 0");
        }
        Ok(self.inverse_u0(w)? - t / w)
    }

    fn inverse_u0(&self, w: Complex64) -> Result<Complex64> {
        let eval = |s: Complex64| Ok((self.u0(s)?, self.initial.cauchy_derivative(s)?));
        invert_transform(&eval, w, self.initial.total_mass() / w, self.r.max(1e-3), &self.config)
    }

    /// `d/dz u(z, t) = u0'(s) / (1 + t u0'(s)/u0(s)^2)` along the characteristic.
    pub fn solve_u_z(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        let ch = self.solve(z, t)?;
        let du0 = self.initial.cauchy_derivative(ch.s)?;
        Ok((ch.u, du0 / (1.0 + t * du0 / (ch.u * ch.u))))
    }
}

/// Solves `g(s) = w` by damped Newton from `seed`, where `eval` returns
/// `(g(s), g'(s))`; steps are capped at `damping * max(|s|, floor)`.
pub fn invert_transform(
    eval: &dyn Fn(Complex64) -> Result<(Complex64, Complex64)>,
    w: Complex64,
    seed: Complex64,
    floor: f64,
    config: &SolverConfig,
) -> Result<Complex64> {
    let mut s = seed;
    for _ in 0..config.max_iterations {
        let (g, dg) = eval(s)?;
        let f = g - w;
        if f.norm() <= 1e-15 * w.norm() {
            return Ok(s);
        }
        let mut step = f / dg;
        let cap = config.damping * s.norm().max(floor);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        s -= step;
        if step.norm() <= 4.0 * f64::EPSILON * s.norm() {
            return Ok(s);
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        best: vec![s],
        residual: (eval(s)?.0 - w).norm(),
    })
}

/// Continuation state for choosing among the roots of the algebraic equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSelection {
    pub previous_t: f64,
    pub previous_w: Complex64,
}

impl BranchSelection {
    /// History at `t = 0`, where `u = P'/(mP)`.
    pub fn initial(p: &Polynomial, z: Complex64) -> Result<Self> {
        Ok(BranchSelection {
            previous_t: 0.0,
            previous_w: polynomial_u0(p, z)?,
        })
    }
}

fn polynomial_u0(p: &Polynomial, z: Complex64) -> Result<Complex64> {
    let (v, dv) = p.evaluate_with_derivative(z);
    if v.is_zero() {
        return Err(Error::Pole { z });
    }
    Ok(dv / (v * p.degree() as f64))
}

/// Coefficients in `w` (ascending) of the algebraic equation satisfied by
/// `u(z, t)` when `u0 = P'/(mP)`:
/// `sum_j (1 - j/(m t)) (P^(j)(z)/j!) t^j w^(m-j) = 0`, leading coefficient `P(z)`.
pub fn shapiro_coefficients(p: &Polynomial, z: Complex64, t: f64) -> Result<Polynomial> {
    let m = p.degree();
    if m < 1 {
        return precondition("algebraic equation needs degree at least 1");
    }
    if t == 0.0 {
        return precondition("t = 0 is degenerate; use the initial transform directly");
    }
    if !(t > 0.0 && t < 1.0) {
        return precondition(format!("time {t} outside (0, 1)"));
    }
    Ok(Polynomial::new(shapiro_raw(&p.taylor_at(z), m, t)))
}

fn shapiro_raw(taylor: &[Complex64], m: usize, t: f64) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::zero(); m + 1];
    let mut tj = 1.0;
    for (j, tay) in taylor.iter().enumerate().take(m + 1) {
        coeffs[m - j] = tay * ((1.0 - j as f64 / (m as f64 * t)) * tj);
        tj *= t;
    }
    coeffs
}

/// `u(z, t)` as the root of the algebraic equation nearest the continuation
/// history, or nearest `(1-t)/z` without history.
pub fn solve_u_algebraic(
    p: &Polynomial,
    z: Complex64,
    t: f64,
    sel: Option<&BranchSelection>,
) -> Result<Complex64> {
    if t == 0.0 {
        return polynomial_u0(p, z);
    }
    let eq = shapiro_coefficients(p, z, t)?;
    if eq.degree() == 0 {
        return Err(Error::Pole { z });
    }
    let anchor = sel.map_or((1.0 - t) / z, |s| s.previous_w);
    let roots = all_roots(&eq, &RootFindConfig::default())?;
    let mut by_distance: Vec<(f64, Complex64)> = roots
        .distinct()
        .iter()
        .map(|r| ((r.z - anchor).norm(), r.z))
        .collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nearest = by_distance[0];
    let double = roots.distinct().iter().any(|r| r.z == nearest.1 && r.multiplicity > 1);
    if double || by_distance.get(1).is_some_and(|second| second.0 - nearest.0 <= 1e-12) {
        return Err(Error::BranchAmbiguity { z, t });
    }
    Ok(nearest.1)
}

/// Follows the algebraic branch from `t = 0` through the increasing `times`.
pub fn algebraic_path(p: &Polynomial, z: Complex64, times: &[f64], max_step: f64) -> Result<Vec<Complex64>> {
    let mut sel = BranchSelection::initial(p, z)?;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < sel.previous_t {
            return precondition("times must increase");
        }
        while sel.previous_t < target {
            let next = (sel.previous_t + max_step).min(target);
            let w = solve_u_algebraic(p, z, next, Some(&sel))?;
            sel = BranchSelection {
                previous_t: next,
                previous_w: w,
            };
        }
        out.push(sel.previous_w);
    }
    Ok(out)
}

/// Points `z` where the algebraic equation for `u(., t)` has a repeated root.
///
/// For degree at most four the discriminant in `z` is recovered exactly (up
/// to rounding) by sampling `Res_w(A, A_w) / P(z)` on a circle and
/// interpolating; beyond that, the system `A = A_w = 0` is solved by Newton
/// from a grid of seeds.
pub fn branch_points(p: &Polynomial, t: f64) -> Result<Vec<Complex64>> {
    let m = p.degree();
    if !(t > 0.0 && t < 1.0) {
        return precondition(format!("time {t} outside (0, 1)"));
    }
    if m < 2 {
        return Ok(Vec::new());
    }
    let reach = all_roots(p, &RootFindConfig::default())?.max_modulus().max(1e-3);
    let candidates = if m <= 4 {
        discriminant_roots(p, t, reach)?
    } else {
        seeded_branch_points(p, t, reach)
    };
    Ok(candidates
        .into_iter()
        .map(|z| polish_branch_point(p, t, z))
        .collect())
}

fn discriminant_at(p: &Polynomial, t: f64, z: Complex64) -> Complex64 {
    let coeffs = shapiro_raw(&p.taylor_at(z), p.degree(), t);
    let a = Polynomial::new(coeffs.clone());
    let lead = coeffs[coeffs.len() - 1];
    let da = a.differentiate().map(|d| d.coeffs().to_vec()).unwrap_or_default();
    sylvester_resultant(&coeffs, &da) / lead
}

fn discriminant_roots(p: &Polynomial, t: f64, reach: f64) -> Result<Vec<Complex64>> {
    let m = p.degree();
    let degree_bound = (2 * m - 1) * m;
    let samples = (2 * degree_bound + 8).next_power_of_two();
    let rho = 1.5 * reach + 0.25;
    let values: Vec<Complex64> = circle_points(rho, samples)
        .par_iter()
        .map(|&z| discriminant_at(p, t, z))
        .collect();
    let mut coeffs: Vec<Complex64> = (0..=degree_bound)
        .map(|k| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v * Complex64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / samples as f64)
                })
                .sum();
            sum / (samples as f64 * rho.powi(k as i32))
        })
        .collect();
    let peak = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * rho.powi(k as i32))
        .fold(0.0, f64::max);
    for (k, c) in coeffs.iter_mut().enumerate() {
        if c.norm() * rho.powi(k as i32) <= 1e-10 * peak {
            *c = Complex64::zero();
        }
    }
    let disc = Polynomial::new(coeffs);
    if disc.degree() == 0 {
        return Ok(Vec::new());
    }
    Ok(all_roots(&disc, &RootFindConfig::default())?.expanded())
}

fn polish_branch_point(p: &Polynomial, t: f64, mut z: Complex64) -> Complex64 {
    for _ in 0..20 {
        let h = 1e-5 * z.norm().max(1e-3);
        let d0 = discriminant_at(p, t, z);
        if d0.is_zero() {
            break;
        }
        let dd = (discriminant_at(p, t, z + h) - discriminant_at(p, t, z - h)) / (2.0 * h);
        if dd.is_zero() {
            break;
        }
        let step = d0 / dd;
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1e-2 * z.norm().max(1e-3) {
            break;
        }
        z -= step;
        if step.norm() <= 2.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    z
}

fn seeded_branch_points(p: &Polynomial, t: f64, reach: f64) -> Vec<Complex64> {
    let m = p.degree();
    let grid = 16;
    let seeds: Vec<Complex64> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .map(|(i, j)| {
            let x = -1.2 * reach + 2.4 * reach * (i as f64 + 0.5) / grid as f64;
            let y = -1.2 * reach + 2.4 * reach * (j as f64 + 0.5) / grid as f64;
            Complex64::new(x, y)
        })
        .collect();
    let found: Vec<Complex64> = seeds
        .par_iter()
        .flat_map_iter(|&z0| {
            let eq = Polynomial::new(shapiro_raw(&p.taylor_at(z0), m, t));
            let ws = all_roots(&eq, &RootFindConfig::default())
                .map(|r| r.expanded())
                .unwrap_or_default();
            // every pair of roots may merge; seed the double root at their midpoint
            let mut hits = Vec::new();
            for i in 0..ws.len() {
                for j in i + 1..ws.len() {
                    if let Some(z) = newton_double_root(p, t, z0, 0.5 * (ws[i] + ws[j])) {
                        hits.push(z);
                    }
                }
            }
            hits
        })
        .collect();
    let mut out: Vec<Complex64> = Vec::new();
    for z in found {
        if out.iter().all(|w| (w - z).norm() > 1e-8 * z.norm().max(1.0)) {
            out.push(z);
        }
    }
    out
}

/// Newton on `(A, A_w) = 0` in `(z, w)`.
fn newton_double_root(p: &Polynomial, t: f64, mut z: Complex64, mut w: Complex64) -> Option<Complex64> {
    let m = p.degree();
    for _ in 0..60 {
        let taylor = p.taylor_at(z);
        // d/dz (P^(j)/j!) = (j+1) P^(j+1)/(j+1)!
        let dtaylor: Vec<Complex64> = (0..=m)
            .map(|j| taylor.get(j + 1).map_or(Complex64::zero(), |c| c * (j + 1) as f64))
            .collect();
        let a = Polynomial::new(shapiro_raw(&taylor, m, t));
        let az = Polynomial::new(shapiro_raw(&dtaylor, m, t));
        let aw = a.differentiate().ok()?;
        let aww = aw.differentiate().ok()?;
        let awz = az.differentiate().ok()?;
        let f1 = a.evaluate(w);
        let f2 = aw.evaluate(w);
        let (j11, j12) = (az.evaluate(w), f2);
        let (j21, j22) = (awz.evaluate(w), aww.evaluate(w));
        let det = j11 * j22 - j12 * j21;
        if det.is_zero() {
            return None;
        }
        let dz = (f1 * j22 - f2 * j12) / det;
        let dw = (j11 * f2 - j21 * f1) / det;
        z -= dz;
        w -= dw;
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        if dz.norm() <= 1e-14 * z.norm().max(1.0) && dw.norm() <= 1e-14 * w.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

/// Determinant of the Sylvester matrix of two polynomials (ascending coefficients).
fn sylvester_resultant(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let da = a.len().saturating_sub(1);
    let db = b.len().saturating_sub(1);
    let size = da + db;
    if size == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut mat = vec![vec![Complex64::zero(); size]; size];
    for row in 0..db {
        for (k, c) in a.iter().rev().enumerate() {
            mat[row][row + k] = *c;
        }
    }
    for row in 0..da {
        for (k, c) in b.iter().rev().enumerate() {
            mat[db + row][row + k] = *c;
        }
    }
    determinant(mat)
}

fn determinant(mut mat: Vec<Vec<Complex64>>) -> Complex64 {
    let n = mat.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| mat[i][col].norm().total_cmp(&mat[j][col].norm()))
            .unwrap_or(col);
        if mat[pivot][col].is_zero() {
            return Complex64::zero();
        }
        if pivot != col {
            mat.swap(pivot, col);
            det = -det;
        }
        let diag = mat[col][col];
        det *= diag;
        for row in col + 1..n {
            let factor = mat[row][col] / diag;
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let v = mat[col][k];
                mat[row][k] -= factor * v;
            }
        }
    }
    det
}

/// Roots of `z^2 - 2(1 - t + a(1 - 2t)) z + (a + 1 - t)^2` for the signed
/// initial measure `(a+1) delta_0 - a delta_1`.
pub fn signed_example_branch_points(a: f64, t: f64) -> Result<(Complex64, Complex64)> {
    if !(a > 0.0) {
        return precondition("a must be positive");
    }
    if !(t > 0.0 && t < 1.0) {
        return precondition(format!("time {t} outside (0, 1)"));
    }
    let half_b = 1.0 - t + a * (1.0 - 2.0 * t);
    let c = (a + 1.0 - t) * (a + 1.0 - t);
    let disc = Complex64::new(half_b * half_b - c, 0.0).sqrt();
    let (z1, z2) = (half_b + disc, half_b - disc);
    // imaginary root first, then its conjugate
    Ok(if z1.im >= z2.im { (z1, z2) } else { (z2, z1) })
}

/// Residual of `v_{k+1} - v_k = (1/n) v_k' / v_k` with `v_k = (1/n) sum 1/(z - r)`
/// over the zeros of `Q_{n,k}`.
pub fn discrete_hopf_residual(
    roots_k: &RootSet,
    roots_k1: &RootSet,
    n: usize,
    z: Complex64,
) -> Result<Complex64> {
    if roots_k1.cardinality() + 1 != roots_k.cardinality() {
        return precondition("successive root sets must differ by one in size");
    }
    let nf = n as f64;
    let vk = roots_k.log_derivative(z)? / nf;
    let dvk = roots_k.log_derivative_prime(z)? / nf;
    let vk1 = roots_k1.log_derivative(z)? / nf;
    if vk.is_zero() {
        return Err(Error::Pole { z });
    }
    Ok(vk1 - vk - dvk / (vk * nf))
}

/// Distance between the discrete and continuous inverses at one degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximitySample {
    pub n: usize,
    pub k: usize,
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityFit {
    pub samples: Vec<ProximitySample>,
    /// Least-squares slope of `log max_error` against `log n`; absent when
    /// some error vanishes.
    pub slope: Option<f64>,
}

/// Inverse of `v(s) = (1/n) sum m/(s - r)` near `w`, by Newton from `mass/w`.
pub fn discrete_inverse(roots: &RootSet, n: usize, w: Complex64) -> Result<Complex64> {
    let nf = n as f64;
    let mass = roots.cardinality() as f64 / nf;
    let mut s = mass / w;
    for _ in 0..100 {
        let f = roots.log_derivative(s)? / nf - w;
        let df = roots.log_derivative_prime(s)? / nf;
        let step = f / df;
        s -= step;
        if step.norm() <= 4.0 * f64::EPSILON * s.norm() {
            return Ok(s);
        }
    }
    let residual = (roots.log_derivative(s)? / nf - w).norm();
    if residual <= 1e-12 * w.norm() {
        return Ok(s);
    }
    Err(Error::NonConvergence {
        iterations: 100,
        best: vec![s],
        residual,
    })
}

/// For each `(n, zeros of Q_{n,k})` with `k = round(t n)`, the largest gap on
/// `|w| = radius` between the discrete inverse and `u^{-1}(w, k/n)`, and the
/// fitted decay exponent in `n`.
pub fn inverse_proximity_rate(
    limit: &FlowSolution,
    families: &[(usize, usize, RootSet)],
    radius: f64,
    samples: usize,
) -> Result<ProximityFit> {
    if families.is_empty() {
        return precondition("need at least one degree");
    }
    let ws = circle_points(radius, samples);
    let mut out = Vec::with_capacity(families.len());
    for (n, k, roots) in families {
        let tk = *k as f64 / *n as f64;
        let errs = ws
            .par_iter()
            .map(|&w| Ok((discrete_inverse(roots, *n, w)? - limit.inverse_u(w, tk)?).norm()))
            .collect::<Result<Vec<f64>>>()?;
        out.push(ProximitySample {
            n: *n,
            k: *k,
            max_error: errs.into_iter().fold(0.0, f64::max),
        });
    }
    let slope = if out.len() >= 2 && out.iter().all(|s| s.max_error > 0.0) {
        let xs: Vec<f64> = out.iter().map(|s| (s.n as f64).ln()).collect();
        let ys: Vec<f64> = out.iter().map(|s| s.max_error.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(ProximityFit { samples: out, slope })
}

/// `u` from an empirical zero distribution: `v(z) = (1/n) sum 1/(z - r)`.
pub fn empirical_u(roots: &RootSet, n: usize, z: Complex64) -> Result<Complex64> {
    EmpiricalMeasure::from_roots(roots, n).cauchy(z)
}
