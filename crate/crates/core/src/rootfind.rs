//! Zeros of polynomials and of their successive derivatives.
//!
//! Three routes are provided: Aberth–Ehrlich simultaneous iteration on
//! coefficients, an interlacing solver for real-rooted input, and a root-form
//! critical point iteration that never expands coefficients. Roots of higher
//! multiplicity are carried symbolically through differentiation.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::polycore::{ExactPolynomial, Polynomial, Root, RootSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootFindMode {
    GeneralComplex,
    RealInterlacing,
    ExactCoefficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootFindConfig {
    /// Relative tolerance on the final root locations.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mode: RootFindMode,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        RootFindConfig {
            tolerance: 1e-12,
            max_iterations: 200,
            mode: RootFindMode::GeneralComplex,
        }
    }
}

impl RootFindConfig {
    pub fn new(tolerance: f64, max_iterations: usize, mode: RootFindMode) -> Result<Self> {
        let cfg = RootFindConfig {
            tolerance,
            max_iterations,
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mode(mode: RootFindMode) -> Self {
        RootFindConfig {
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-3) {
            return precondition(format!(
                "tolerance {} outside (0, 1e-3]",
                self.tolerance
            ));
        }
        if self.max_iterations < 10 {
            return precondition("max_iterations must be at least 10");
        }
        Ok(())
    }
}

/// Evaluation of the function whose zeros are sought, at one point.
struct Probe {
    /// Logarithmic derivative of the target with all of its poles removed,
    /// i.e. `sum 1/(z - zeta)` over the sought zeros.
    zero_sum: Complex64,
    /// Residual is at the rounding level of the evaluation.
    settled: bool,
    /// Newton inclusion radius around `z`.
    radius: f64,
}

trait AberthTarget: Sync {
    fn count(&self) -> usize;
    fn probe(&self, z: Complex64) -> Option<Probe>;
    fn is_real(&self) -> bool;
    fn initial(&self) -> Vec<Complex64>;
    /// Newton step toward an `m`-fold zero near `z`, taken on the
    /// `(m-1)`-th derivative where that zero is simple.
    fn cluster_step(&self, z: Complex64, m: usize) -> Option<Complex64>;
}

/// Polishes a cluster centroid; keeps the centroid if Newton wanders off.
fn refine_cluster<T: AberthTarget>(target: &T, center: Complex64, m: usize, radius: f64) -> Complex64 {
    let mut z = center;
    for _ in 0..30 {
        let Some(step) = target.cluster_step(z, m) else {
            break;
        };
        if !step.re.is_finite() || !step.im.is_finite() {
            return center;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    if (z - center).norm() <= radius.max(1e-8 * center.norm()) {
        z
    } else {
        center
    }
}

struct CoefficientTarget<'a> {
    p: &'a Polynomial,
}

impl AberthTarget for CoefficientTarget<'_> {
    fn count(&self) -> usize {
        self.p.degree()
    }

    fn probe(&self, z: Complex64) -> Option<Probe> {
        let (v, dv) = self.p.evaluate_with_derivative(z);
        if v.is_zero() {
            return None;
        }
        let n = self.p.degree() as f64;
        let noise = 4.0 * n * f64::EPSILON * self.p.evaluation_bound(z.norm());
        Some(Probe {
            zero_sum: dv / v,
            settled: v.norm() <= noise,
            radius: n * (v.norm() + noise) / dv.norm(),
        })
    }

    fn is_real(&self) -> bool {
        self.p.coeffs().iter().all(|c| c.im == 0.0)
    }

    fn initial(&self) -> Vec<Complex64> {
        let lead = self.p.leading();
        let bound = 1.0
            + self.p.coeffs()[..self.p.degree()]
                .iter()
                .map(|c| (c / lead).norm())
                .fold(0.0, f64::max);
        circle(Complex64::zero(), bound, self.count())
    }

    fn cluster_step(&self, z: Complex64, m: usize) -> Option<Complex64> {
        let d = self.p.derivative_n(m - 1).ok()?;
        let (v, dv) = d.evaluate_with_derivative(z);
        (!v.is_zero()).then(|| v / dv)
    }
}

/// Zeros of `sum m_i / (z - a_i)`: the critical points of `prod (z - a_i)^m_i`
/// away from the `a_i`.
struct CriticalTarget<'a> {
    roots: &'a [Root],
}

impl AberthTarget for CriticalTarget<'_> {
    fn count(&self) -> usize {
        self.roots.len() - 1
    }

    fn probe(&self, z: Complex64) -> Option<Probe> {
        let mut g = Complex64::zero();
        let mut dg = Complex64::zero();
        let mut poles = Complex64::zero();
        let mut magnitude = 0.0;
        for r in self.roots {
            let d = z - r.z;
            if d.is_zero() {
                return Some(Probe {
                    zero_sum: Complex64::new(f64::INFINITY, 0.0),
                    settled: false,
                    radius: f64::INFINITY,
                });
            }
            let inv = d.inv();
            let m = r.multiplicity as f64;
            g += inv * m;
            dg -= inv * inv * m;
            poles += inv;
            magnitude += m * inv.norm();
        }
        if g.is_zero() {
            return None;
        }
        let noise = 4.0 * f64::EPSILON * magnitude;
        let count = self.count() as f64;
        Some(Probe {
            zero_sum: dg / g + poles,
            settled: g.norm() <= noise,
            radius: count * (g.norm() + noise) / dg.norm(),
        })
    }

    fn is_real(&self) -> bool {
        self.roots.iter().all(|r| r.z.im == 0.0)
    }

    fn initial(&self) -> Vec<Complex64> {
        let total: f64 = self.roots.iter().map(|r| r.multiplicity as f64).sum();
        let center = self
            .roots
            .iter()
            .fold(Complex64::zero(), |acc, r| acc + r.z * r.multiplicity as f64)
            / total;
        let spread = self
            .roots
            .iter()
            .map(|r| (r.z - center).norm())
            .fold(0.0, f64::max);
        circle(center, 0.9 * spread.max(f64::MIN_POSITIVE), self.count())
    }

    fn cluster_step(&self, z: Complex64, m: usize) -> Option<Complex64> {
        // the (m-1)-th derivative of sum m_i/(z-a_i) is proportional to
        // sum m_i/(z-a_i)^m, whose derivative is -m sum m_i/(z-a_i)^(m+1)
        let mut s = Complex64::zero();
        let mut ds = Complex64::zero();
        for r in self.roots {
            let inv = (z - r.z).inv();
            let p = inv.powu(m as u32) * r.multiplicity as f64;
            s += p;
            ds += p * inv;
        }
        (!s.is_zero()).then(|| -s / (ds * m as f64))
    }
}

fn circle(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / count as f64 + 0.7;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Simultaneous iteration; returns the approximations and their final inclusion radii.
fn aberth<T: AberthTarget>(target: &T, cfg: &RootFindConfig) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let m = target.count();
    let mut z = target.initial();
    let mut frozen = vec![false; m];
    let mut last_step = vec![f64::INFINITY; m];
    for _ in 0..cfg.max_iterations {
        let mut active = false;
        for i in 0..m {
            if frozen[i] {
                continue;
            }
            let Some(probe) = target.probe(z[i]) else {
                frozen[i] = true;
                continue;
            };
            if probe.settled {
                frozen[i] = true;
                continue;
            }
            let repulsion = (0..m)
                .filter(|&j| j != i)
                .fold(Complex64::zero(), |acc, j| acc + (z[i] - z[j]).inv());
            let step = (probe.zero_sum - repulsion).inv();
            if !step.re.is_finite() || !step.im.is_finite() {
                // coincident iterates: nudge apart
                let nudge = Complex64::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                z[i] += nudge;
                active = true;
                continue;
            }
            z[i] -= step;
            last_step[i] = step.norm();
            if step.norm() <= 1e-2 * cfg.tolerance * z[i].norm() {
                frozen[i] = true;
            } else {
                active = true;
            }
        }
        if !active {
            break;
        }
    }
    let radii: Vec<f64> = z
        .iter()
        .map(|&zi| target.probe(zi).map_or(0.0, |p| p.radius))
        .collect();
    let scale = z.iter().map(|w| w.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let unresolved: Vec<usize> = (0..m)
        .filter(|&i| !frozen[i] && last_step[i] > cfg.tolerance * scale)
        .collect();
    if !unresolved.is_empty() {
        let residual = unresolved.iter().map(|&i| last_step[i]).fold(0.0, f64::max) / scale;
        return Err(Error::NonConvergence {
            iterations: cfg.max_iterations,
            best: z,
            residual,
        });
    }
    Ok((z, radii))
}

/// Groups approximations whose inclusion disks overlap (or which lie within
/// `1e-8 * scale` of each other) into one root at the cluster centroid.
fn cluster<T: AberthTarget>(target: &T, z: &[Complex64], radii: &[f64]) -> Vec<Root> {
    let real_target = target.is_real();
    let n = z.len();
    let scale = z.iter().map(|w| w.norm()).fold(0.0, f64::max).max(1.0);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut j = i;
        while parent[j] != r {
            let next = parent[j];
            parent[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (z[i] - z[j]).norm();
            if d <= radii[i] + radii[j] || d <= 1e-8 * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<(Complex64, usize, f64)> = groups
        .values()
        .map(|members| {
            let c = members.iter().fold(Complex64::zero(), |acc, &i| acc + z[i])
                / members.len() as f64;
            let rad = members.iter().map(|&i| radii[i]).fold(0.0, f64::max);
            let spread = members.iter().map(|&i| (z[i] - c).norm()).fold(0.0, f64::max);
            let c = if members.len() > 1 {
                refine_cluster(target, c, members.len(), spread + rad)
            } else {
                c
            };
            (c, members.len(), rad)
        })
        .collect();
    if real_target {
        let snapshot = out.clone();
        for (idx, (c, _, rad)) in out.iter_mut().enumerate() {
            if c.im == 0.0 || c.im.abs() > *rad {
                continue;
            }
            let conj = c.conj();
            let paired = snapshot
                .iter()
                .enumerate()
                .any(|(j, (w, _, rw))| j != idx && (*w - conj).norm() <= *rad + rw);
            if !paired {
                c.im = 0.0;
            }
        }
    }
    out.into_iter()
        .map(|(z, multiplicity, _)| Root { z, multiplicity })
        .collect()
}

/// All zeros of `p`, clustered into multiple roots where they coalesce.
pub fn all_roots(p: &Polynomial, cfg: &RootFindConfig) -> Result<RootSet> {
    cfg.validate()?;
    if p.degree() < 1 {
        return precondition("all_roots needs degree at least 1");
    }
    let zeros_at_origin = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = Polynomial::new(p.coeffs()[zeros_at_origin..].to_vec());
    let mut roots = Vec::new();
    if zeros_at_origin > 0 {
        roots.push(Root {
            z: Complex64::zero(),
            multiplicity: zeros_at_origin,
        });
    }
    match reduced.degree() {
        0 => {}
        1 => roots.push(Root::simple(-reduced.coeffs()[0] / reduced.coeffs()[1])),
        _ => {
            let target = CoefficientTarget { p: &reduced };
            let (z, radii) = aberth(&target, cfg)?;
            for mut root in cluster(&target, &z, &radii) {
                if root.multiplicity == 1 {
                    root.z = newton_polish(&reduced, root.z);
                }
                roots.push(root);
            }
        }
    }
    Ok(RootSet::new(roots))
}

fn newton_polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (v, dv) = p.evaluate_with_derivative(z);
        if v.is_zero() || dv.is_zero() {
            break;
        }
        let next = z - v / dv;
        if p.evaluate(next).norm() < v.norm() {
            z = if z.im == 0.0 { Complex64::new(next.re, 0.0) } else { next };
        } else {
            break;
        }
    }
    z
}

/// Critical points of `prod (x - r_i)` from its sorted real zeros, with
/// multiplicities expressed by repetition.
pub fn critical_points_real(sorted_roots: &[f64]) -> Result<Vec<f64>> {
    if sorted_roots.is_empty() {
        return precondition("no roots given");
    }
    if sorted_roots.iter().any(|x| !x.is_finite()) {
        return precondition("roots must be finite");
    }
    if sorted_roots.windows(2).any(|w| w[0] > w[1]) {
        return precondition("roots must be sorted ascending");
    }
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &x in sorted_roots {
        match distinct.last_mut() {
            Some((v, m)) if *v == x => *m += 1,
            _ => distinct.push((x, 1)),
        }
    }
    Ok(critical_step_real(&distinct)
        .into_iter()
        .flat_map(|(x, m)| std::iter::repeat_n(x, m))
        .collect())
}

/// One differentiation step on distinct sorted real roots with multiplicities.
fn critical_step_real(distinct: &[(f64, usize)]) -> Vec<(f64, usize)> {
    let gaps: Vec<f64> = (0..distinct.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| gap_critical_point(distinct, i))
        .collect();
    let mut out = Vec::with_capacity(distinct.len() * 2);
    for (i, &(a, m)) in distinct.iter().enumerate() {
        if m > 1 {
            out.push((a, m - 1));
        }
        if let Some(&x) = gaps.get(i) {
            out.push((x, 1));
        }
    }
    out
}

/// The unique zero of `sum m_j / (x - a_j)` between `a_i` and `a_{i+1}`.
///
/// The unknown is the offset from the nearer endpoint, which keeps full
/// relative accuracy when the critical point hugs a root.
fn gap_critical_point(distinct: &[(f64, usize)], i: usize) -> f64 {
    let (left, ml) = distinct[i];
    let (right, mr) = distinct[i + 1];
    let width = right - left;
    let g = |x: f64| -> f64 {
        distinct
            .iter()
            .map(|&(a, m)| m as f64 / (x - a))
            .sum::<f64>()
    };
    let mid = left + 0.5 * width;
    if g(mid) == 0.0 {
        return mid;
    }
    // g decreases from +inf to -inf across the gap
    let from_left = !(mid > left && mid < right) || g(mid) < 0.0;
    let (origin, sign) = if from_left { (i, 1.0) } else { (i + 1, -1.0) };
    let base = distinct[origin].0;
    let (m_near, m_far) = if from_left {
        (ml as f64, mr as f64)
    } else {
        (mr as f64, ml as f64)
    };
    // x = base + sign*y, y in (0, width]; h(y) = g(x) * y * (width - y) * sign
    let offsets: Vec<(f64, f64)> = distinct
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i && j != i + 1)
        .map(|(_, &(a, m))| (sign * (base - a), m as f64))
        .collect();
    let h = |y: f64| -> (f64, f64) {
        let w = width - y;
        let (mut s, mut ds) = (0.0, 0.0);
        for &(d, m) in &offsets {
            let e = d + y;
            s += m / e;
            ds -= m / (e * e);
        }
        let val = m_near * w - m_far * y + y * w * s;
        let der = -m_near - m_far + (w - y) * s + y * w * ds;
        (val, der)
    };
    let (mut lo, mut hi) = (0.0f64, 0.5 * width);
    let mut y = m_near / (m_near + m_far) * hi;
    for _ in 0..200 {
        let (v, dv) = h(y);
        if v == 0.0 {
            break;
        }
        if v > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let mut next = y - v / dv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == y || (next - y).abs() <= 2.0 * f64::EPSILON * y.abs() {
            y = next;
            break;
        }
        y = next;
    }
    let x = base + sign * y;
    clamp_open(x, left, right)
}

fn clamp_open(x: f64, left: f64, right: f64) -> f64 {
    if x > left && x < right {
        return x;
    }
    let up = next_up(left);
    let down = next_down(right);
    if up < right {
        if x <= left {
            up
        } else {
            down
        }
    } else {
        left
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// One differentiation step in root form for arbitrary complex roots.
fn critical_step_general(roots: &RootSet, cfg: &RootFindConfig) -> Result<RootSet> {
    let distinct = roots.distinct();
    let mut out: Vec<Root> = distinct
        .iter()
        .filter(|r| r.multiplicity > 1)
        .map(|r| Root {
            z: r.z,
            multiplicity: r.multiplicity - 1,
        })
        .collect();
    if distinct.len() > 1 {
        let target = CriticalTarget { roots: distinct };
        let (z, radii) = aberth(&target, cfg)?;
        out.extend(cluster(&target, &z, &radii));
    }
    Ok(RootSet::new(out))
}

/// Zero sets of `Q_{n,1}, ..., Q_{n,k}` where `Q_{n,0}` has zeros `roots0`.
pub fn derivative_flow(roots0: &RootSet, k: usize, cfg: &RootFindConfig) -> Result<Vec<RootSet>> {
    cfg.validate()?;
    let n = roots0.cardinality();
    if k >= n {
        return Err(Error::DerivativeOrderExhausted { k, degree: n });
    }
    match cfg.mode {
        RootFindMode::RealInterlacing => {
            if !roots0.is_real() {
                return precondition("real-interlacing mode needs real roots");
            }
            let mut current: Vec<(f64, usize)> = roots0
                .distinct()
                .iter()
                .map(|r| (r.z.re, r.multiplicity))
                .collect();
            let mut out = Vec::with_capacity(k);
            for _ in 0..k {
                current = critical_step_real(&current);
                out.push(RootSet::new(
                    current
                        .iter()
                        .map(|&(x, m)| Root {
                            z: Complex64::new(x, 0.0),
                            multiplicity: m,
                        })
                        .collect(),
                ));
            }
            Ok(out)
        }
        RootFindMode::GeneralComplex => {
            let mut out = Vec::with_capacity(k);
            let mut current = roots0.clone();
            for _ in 0..k {
                current = critical_step_general(&current, cfg)?;
                out.push(current.clone());
            }
            Ok(out)
        }
        RootFindMode::ExactCoefficient => {
            let exact = exact_from_real_roots(roots0)?;
            derivative_flow_exact(roots0, &exact, k, cfg)
        }
    }
}

/// Like [`derivative_flow`], but every simple root is re-polished by Newton
/// steps evaluated exactly on the integer-coefficient derivative of `exact`,
/// whose zeros must be `roots0`.
pub fn derivative_flow_exact(
    roots0: &RootSet,
    exact: &ExactPolynomial,
    k: usize,
    cfg: &RootFindConfig,
) -> Result<Vec<RootSet>> {
    cfg.validate()?;
    let n = roots0.cardinality();
    if exact.degree() != n {
        return precondition("exact polynomial degree differs from root count");
    }
    if k >= n {
        return Err(Error::DerivativeOrderExhausted { k, degree: n });
    }
    let real = roots0.is_real();
    let mut current = roots0.clone();
    let mut derivative = exact.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let next = if real {
            let distinct: Vec<(f64, usize)> = current
                .distinct()
                .iter()
                .map(|r| (r.z.re, r.multiplicity))
                .collect();
            critical_step_real(&distinct)
                .into_iter()
                .map(|(x, m)| Root {
                    z: Complex64::new(x, 0.0),
                    multiplicity: m,
                })
                .collect::<Vec<_>>()
        } else {
            critical_step_general(&current, cfg)?.distinct().to_vec()
        };
        derivative = derivative.differentiate()?;
        let polished: Vec<Root> = next
            .par_iter()
            .enumerate()
            .map(|(idx, r)| {
                if r.multiplicity != 1 {
                    return *r;
                }
                let bracket = real.then(|| {
                    let lo = idx.checked_sub(1).map_or(f64::NEG_INFINITY, |j| next[j].z.re);
                    let hi = next.get(idx + 1).map_or(f64::INFINITY, |s| s.z.re);
                    (lo, hi)
                });
                Root::simple(exact_polish(&derivative, r.z, bracket))
            })
            .collect();
        current = RootSet::new(polished);
        out.push(current.clone());
    }
    Ok(out)
}

fn exact_polish(p: &ExactPolynomial, mut z: Complex64, bracket: Option<(f64, f64)>) -> Complex64 {
    let mut last = f64::INFINITY;
    for _ in 0..8 {
        let Some(corr) = p.newton_correction(z) else {
            break;
        };
        if corr.is_zero() || corr.norm() >= last {
            break;
        }
        let next = z - corr;
        if let Some((lo, hi)) = bracket {
            if !(next.re > lo && next.re < hi) {
                break;
            }
        }
        last = corr.norm();
        z = if bracket.is_some() {
            Complex64::new(next.re, 0.0)
        } else {
            next
        };
    }
    z
}

/// `prod (2^e x - M)^m` for real dyadic roots `M / 2^e`; zeros equal `roots` exactly.
fn exact_from_real_roots(roots: &RootSet) -> Result<ExactPolynomial> {
    if !roots.is_real() {
        return Err(Error::Unsupported(
            "exact-coefficient mode from complex roots".into(),
        ));
    }
    let mut acc = ExactPolynomial::from_i64(&[1]);
    for r in roots.distinct() {
        let x = r.z.re;
        let (num, den) = dyadic_parts(x);
        let factor = ExactPolynomial::new(vec![-num, den]);
        acc = acc.mul(&factor.pow(r.multiplicity as u32));
    }
    Ok(acc)
}

fn dyadic_parts(x: f64) -> (num_bigint::BigInt, num_bigint::BigInt) {
    use num_bigint::BigInt;
    let mut num = x;
    let mut shift = 0u32;
    while num.fract() != 0.0 {
        num *= 2.0;
        shift += 1;
    }
    (
        BigInt::from(num as i128),
        BigInt::from(1) << shift as usize,
    )
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `a[0..n]`
/// and off-diagonal `sqrt(b[1..n])`, i.e. the zeros of the n-th monic
/// orthogonal polynomial of the three-term recurrence
/// `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`. `b[0]` is not used.
pub fn tridiagonal_orthogonal_roots(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return precondition("n must be positive");
    }
    if a.len() < n || b.len() < n {
        return precondition("recurrence lists shorter than n");
    }
    if b[1..n].iter().any(|&v| !(v > 0.0)) {
        return precondition("off-diagonal recurrence entries must be positive");
    }
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    let off: Vec<f64> = b[1..n].iter().map(|v| v.sqrt()).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1] } else { 0.0 };
        let right = if i + 1 < n { off[i] } else { 0.0 };
        lo = lo.min(a[i] - left - right);
        hi = hi.max(a[i] + left + right);
    }
    let pivmin = f64::MIN_POSITIVE * b[1..n].iter().fold(1.0f64, |m, &v| m.max(v));
    // number of eigenvalues strictly below x
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = a[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            q = a[i] - x - b[i] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let widen = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin;
    let (lo, hi) = (lo - widen, hi + widen);
    let eig: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let (mut l, mut h) = (lo, hi);
            loop {
                let mid = 0.5 * (l + h);
                if mid <= l || mid >= h || h - l <= 1e-15 * l.abs().max(h.abs()) {
                    return mid;
                }
                if count_below(mid) > k {
                    h = mid;
                } else {
                    l = mid;
                }
            }
        })
        .collect();
    Ok(eig)
}

/// Three-term recurrence of monic Chebyshev polynomials of the first kind.
pub fn chebyshev_t_recurrence(n: usize) -> (Vec<f64>, Vec<f64>) {
    let b = (0..n.max(1))
        .map(|k| match k {
            0 => 0.0,
            1 => 0.5,
            _ => 0.25,
        })
        .collect();
    (vec![0.0; n.max(1)], b)
}

/// Monic Hermite polynomials for the weight `exp(-x^2)`.
pub fn hermite_recurrence(n: usize) -> (Vec<f64>, Vec<f64>) {
    (vec![0.0; n.max(1)], (0..n.max(1)).map(|k| k as f64 / 2.0).collect())
}

/// Monic generalized Laguerre polynomials for the weight `x^alpha exp(-x)`.
pub fn laguerre_recurrence(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    (
        (0..n.max(1)).map(|k| 2.0 * k as f64 + 1.0 + alpha).collect(),
        (0..n.max(1))
            .map(|k| k as f64 * (k as f64 + alpha))
            .collect(),
    )
}
