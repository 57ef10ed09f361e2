//! Measures on the plane, their Cauchy transforms, moments and distances.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::polycore::{Polynomial, RootSet};
use crate::rootfind::{all_roots, RootFindConfig};

/// A finite measure with an evaluable Cauchy transform `int dmu(y) / (z - y)`.
pub trait Measure: Send + Sync + Debug {
    fn cauchy(&self, z: Complex64) -> Result<Complex64>;
    fn cauchy_derivative(&self, z: Complex64) -> Result<Complex64>;
    fn total_mass(&self) -> f64;
    /// Radius of the smallest origin-centered closed disk containing the support.
    fn support_radius(&self) -> f64;
    /// `int z^j dmu` for `j = 0..=kmax`.
    fn moments(&self, kmax: usize) -> Vec<Complex64>;
    /// Cumulative distribution, for measures carried by the real line.
    fn real_distribution(&self) -> Result<RealDistribution>;
    /// Whether the support lies on the real line.
    fn is_real(&self) -> bool {
        self.real_distribution().is_ok()
    }
}

/// Point mass with a real (possibly negative) weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: Complex64,
    pub weight: f64,
}

impl Atom {
    pub fn new(z: Complex64, weight: f64) -> Self {
        Atom { z, weight }
    }

    pub fn real(x: f64, weight: f64) -> Self {
        Atom::new(Complex64::new(x, 0.0), weight)
    }
}

fn atoms_cauchy(atoms: &[Atom], z: Complex64) -> Result<Complex64> {
    let scale = atoms.iter().map(|a| a.z.norm()).fold(1.0, f64::max);
    atoms.iter().try_fold(Complex64::zero(), |acc, a| {
        let d = z - a.z;
        if d.norm() <= 1e-12 * scale {
            Err(Error::Pole { z })
        } else {
            Ok(acc + a.weight / d)
        }
    })
}

fn atoms_cauchy_derivative(atoms: &[Atom], z: Complex64) -> Result<Complex64> {
    let scale = atoms.iter().map(|a| a.z.norm()).fold(1.0, f64::max);
    atoms.iter().try_fold(Complex64::zero(), |acc, a| {
        let d = z - a.z;
        if d.norm() <= 1e-12 * scale {
            Err(Error::Pole { z })
        } else {
            Ok(acc - a.weight / (d * d))
        }
    })
}

fn atoms_moments(atoms: &[Atom], kmax: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); kmax + 1];
    for a in atoms {
        let mut p = Complex64::new(a.weight, 0.0);
        for m in out.iter_mut() {
            *m += p;
            p *= a.z;
        }
    }
    out
}

fn atoms_distribution(atoms: &[Atom]) -> Result<RealDistribution> {
    if atoms.iter().any(|a| a.z.im != 0.0) {
        return Err(Error::ComplexSupport);
    }
    Ok(RealDistribution::atomic(
        atoms.iter().map(|a| (a.z.re, a.weight)).collect(),
    ))
}

/// Normalized zero-counting measure: atoms with positive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().any(|a| !(a.weight > 0.0)) {
            return precondition("empirical weights must be positive");
        }
        let total_mass = atoms.iter().map(|a| a.weight).sum();
        Ok(EmpiricalMeasure { atoms, total_mass })
    }

    /// Each root gets weight `multiplicity / n`; the total is `|roots| / n`.
    pub fn from_roots(roots: &RootSet, n: usize) -> Self {
        let atoms = roots
            .distinct()
            .iter()
            .map(|r| Atom::new(r.z, r.multiplicity as f64 / n as f64))
            .collect();
        EmpiricalMeasure {
            atoms,
            total_mass: roots.cardinality() as f64 / n as f64,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Pushforward under `z -> z * factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        EmpiricalMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.z * factor, a.weight))
                .collect(),
            total_mass: self.total_mass,
        }
    }

    /// Same locations, weights multiplied by `factor`.
    pub fn reweighted(&self, factor: f64) -> Self {
        EmpiricalMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.z, a.weight * factor))
                .collect(),
            total_mass: self.total_mass * factor,
        }
    }
}

impl Measure for EmpiricalMeasure {
    fn cauchy(&self, z: Complex64) -> Result<Complex64> {
        atoms_cauchy(&self.atoms, z)
    }
    fn cauchy_derivative(&self, z: Complex64) -> Result<Complex64> {
        atoms_cauchy_derivative(&self.atoms, z)
    }
    fn total_mass(&self) -> f64 {
        self.total_mass
    }
    fn support_radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.z.norm()).fold(0.0, f64::max)
    }
    fn moments(&self, kmax: usize) -> Vec<Complex64> {
        atoms_moments(&self.atoms, kmax)
    }
    fn real_distribution(&self) -> Result<RealDistribution> {
        atoms_distribution(&self.atoms)
    }
}

/// Atomic measure whose weights may be negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasureSpec {
    pub atoms: Vec<Atom>,
}

impl SignedMeasureSpec {
    pub fn new(atoms: Vec<Atom>) -> Self {
        SignedMeasureSpec { atoms }
    }

    /// `(a + 1) delta_0 - a delta_1`: unit mass, total variation `2a + 1`.
    pub fn two_point(a: f64) -> Self {
        SignedMeasureSpec::new(vec![Atom::real(0.0, a + 1.0), Atom::real(1.0, -a)])
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }
}

impl Measure for SignedMeasureSpec {
    fn cauchy(&self, z: Complex64) -> Result<Complex64> {
        atoms_cauchy(&self.atoms, z)
    }
    fn cauchy_derivative(&self, z: Complex64) -> Result<Complex64> {
        atoms_cauchy_derivative(&self.atoms, z)
    }
    fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
    fn support_radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.z.norm()).fold(0.0, f64::max)
    }
    fn moments(&self, kmax: usize) -> Vec<Complex64> {
        atoms_moments(&self.atoms, kmax)
    }
    fn real_distribution(&self) -> Result<RealDistribution> {
        atoms_distribution(&self.atoms)
    }
}

/// Initial measures: atoms, the named laws, polynomial zero sets and tabulated densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureSpec {
    Atoms { atoms: Vec<Atom> },
    /// `dx / (pi sqrt(1 - x^2))` on `[-1, 1]`.
    Arcsine,
    /// `(2/pi) sqrt(1 - x^2)` on `[-1, 1]`.
    Semicircle,
    /// `sqrt(x (4 - x)) / (2 pi x)` on `[0, 4]`.
    MarchenkoPastur,
    /// `dx / 2` on `[-1, 1]`.
    Uniform,
    /// Normalized zero-counting measure of the polynomial.
    PolyRoots { coeffs: Polynomial },
    /// Piecewise-linear density through `(x_i, f_i)`, normalized to unit mass.
    DensityGrid { x: Vec<f64>, f: Vec<f64> },
}

impl MeasureSpec {
    pub fn atoms(atoms: Vec<Atom>) -> Self {
        MeasureSpec::Atoms { atoms }
    }

    pub fn density_grid(x: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        let spec = MeasureSpec::DensityGrid { x, f };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Atoms { atoms } => {
                if atoms.is_empty() || atoms.iter().any(|a| !(a.weight >= 0.0)) {
                    return precondition("atoms need nonnegative weights");
                }
            }
            MeasureSpec::PolyRoots { coeffs } => {
                if coeffs.degree() < 1 {
                    return precondition("poly_roots needs degree at least 1");
                }
            }
            MeasureSpec::DensityGrid { x, f } => {
                if x.len() < 2 || x.len() != f.len() {
                    return precondition("density grid needs matching x and f of length >= 2");
                }
                if x.windows(2).any(|w| !(w[0] < w[1])) {
                    return precondition("density grid x must be strictly increasing");
                }
                if f.iter().any(|v| !(*v >= 0.0)) {
                    return precondition("density values must be nonnegative");
                }
                if grid_mass(x, f) <= 0.0 {
                    return precondition("density grid has zero mass");
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn interval(&self) -> Option<(f64, f64)> {
        match self {
            MeasureSpec::Arcsine | MeasureSpec::Semicircle | MeasureSpec::Uniform => {
                Some((-1.0, 1.0))
            }
            MeasureSpec::MarchenkoPastur => Some((0.0, 4.0)),
            MeasureSpec::DensityGrid { x, .. } => Some((x[0], x[x.len() - 1])),
            _ => None,
        }
    }

    fn check_off_interval(&self, z: Complex64) -> Result<()> {
        if let Some((a, b)) = self.interval() {
            let scale = a.abs().max(b.abs()).max(1.0);
            if z.im.abs() <= 1e-14 * scale && z.re >= a && z.re <= b {
                return Err(Error::OnSupport { z });
            }
        }
        Ok(())
    }

    fn poly_monic(coeffs: &Polynomial) -> Polynomial {
        coeffs.monic().0
    }
}

impl Measure for MeasureSpec {
    fn cauchy(&self, z: Complex64) -> Result<Complex64> {
        self.check_off_interval(z)?;
        Ok(match self {
            MeasureSpec::Atoms { atoms } => return atoms_cauchy(atoms, z),
            MeasureSpec::Arcsine => sqrt_segment(z, -1.0, 1.0).inv(),
            MeasureSpec::Semicircle => 2.0 / (z + sqrt_segment(z, -1.0, 1.0)),
            MeasureSpec::MarchenkoPastur => 2.0 / (z + sqrt_segment(z, 0.0, 4.0)),
            MeasureSpec::Uniform => 0.5 * clog1p(2.0 / (z - 1.0)),
            MeasureSpec::PolyRoots { coeffs } => {
                let (p, dp) = coeffs.evaluate_with_derivative(z);
                if p.is_zero() {
                    return Err(Error::Pole { z });
                }
                dp / (p * coeffs.degree() as f64)
            }
            MeasureSpec::DensityGrid { x, f } => {
                let (c, _) = grid_cauchy(x, f, z);
                c / grid_mass(x, f)
            }
        })
    }

    fn cauchy_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_off_interval(z)?;
        Ok(match self {
            MeasureSpec::Atoms { atoms } => return atoms_cauchy_derivative(atoms, z),
            MeasureSpec::Arcsine => {
                let s = sqrt_segment(z, -1.0, 1.0);
                -z / (s * s * s)
            }
            MeasureSpec::Semicircle => {
                let s = sqrt_segment(z, -1.0, 1.0);
                -2.0 / (s * (z + s))
            }
            MeasureSpec::MarchenkoPastur => -(z * sqrt_segment(z, 0.0, 4.0)).inv(),
            MeasureSpec::Uniform => -((z - 1.0) * (z + 1.0)).inv(),
            MeasureSpec::PolyRoots { coeffs } => {
                // (P'/P)' = P''/P - (P'/P)^2
                let p = coeffs.evaluate(z);
                if p.is_zero() {
                    return Err(Error::Pole { z });
                }
                let d1 = coeffs.derivative_n(1).map(|d| d.evaluate(z))?;
                let d2 = if coeffs.degree() >= 2 {
                    coeffs.derivative_n(2)?.evaluate(z)
                } else {
                    Complex64::zero()
                };
                let g = d1 / p;
                (d2 / p - g * g) / coeffs.degree() as f64
            }
            MeasureSpec::DensityGrid { x, f } => {
                let (_, d) = grid_cauchy(x, f, z);
                d / grid_mass(x, f)
            }
        })
    }

    fn total_mass(&self) -> f64 {
        match self {
            MeasureSpec::Atoms { atoms } => atoms.iter().map(|a| a.weight).sum(),
            _ => 1.0,
        }
    }

    fn support_radius(&self) -> f64 {
        match self {
            MeasureSpec::Atoms { atoms } => atoms.iter().map(|a| a.z.norm()).fold(0.0, f64::max),
            MeasureSpec::Arcsine | MeasureSpec::Semicircle | MeasureSpec::Uniform => 1.0,
            MeasureSpec::MarchenkoPastur => 4.0,
            MeasureSpec::PolyRoots { coeffs } => all_roots(coeffs, &RootFindConfig::default())
                .map(|r| r.max_modulus())
                .unwrap_or_else(|_| cauchy_root_bound(coeffs)),
            MeasureSpec::DensityGrid { x, .. } => x[0].abs().max(x[x.len() - 1].abs()),
        }
    }

    fn moments(&self, kmax: usize) -> Vec<Complex64> {
        let real = |v: Vec<f64>| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        match self {
            MeasureSpec::Atoms { atoms } => atoms_moments(atoms, kmax),
            MeasureSpec::Arcsine => real(even_moments(kmax, |j| {
                // C(2j, j) / 4^j
                (1..=j).fold(1.0, |acc, i| acc * (2 * i - 1) as f64 / (2 * i) as f64)
            })),
            MeasureSpec::Semicircle => real(even_moments(kmax, |j| {
                // Catalan(j) / 4^j
                (1..=j).fold(1.0, |acc, i| acc * (2 * i - 1) as f64 / (2 * i) as f64)
                    / (j + 1) as f64
            })),
            MeasureSpec::Uniform => real(even_moments(kmax, |j| 1.0 / (2 * j + 1) as f64)),
            MeasureSpec::MarchenkoPastur => real(
                (0..=kmax)
                    .map(|k| {
                        (1..=k).fold(1.0, |acc, i| acc * (k + i) as f64 / i as f64)
                            / (k + 1) as f64
                    })
                    .collect(),
            ),
            MeasureSpec::PolyRoots { coeffs } => power_sums(&Self::poly_monic(coeffs), kmax),
            MeasureSpec::DensityGrid { x, f } => {
                let mass = grid_mass(x, f);
                real(grid_moments(x, f, kmax).into_iter().map(|m| m / mass).collect())
            }
        }
    }

    fn real_distribution(&self) -> Result<RealDistribution> {
        let continuous = |lo: f64, hi: f64, cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>| {
            Ok(RealDistribution {
                atoms: Vec::new(),
                continuous: Some(ContinuousPart { lo, hi, mass: 1.0, cdf }),
            })
        };
        match self {
            MeasureSpec::Atoms { atoms } => atoms_distribution(atoms),
            MeasureSpec::Arcsine => continuous(-1.0, 1.0, Arc::new(|x: f64| 0.5 + x.asin() / PI)),
            MeasureSpec::Semicircle => continuous(
                -1.0,
                1.0,
                Arc::new(|x: f64| 0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI),
            ),
            MeasureSpec::Uniform => continuous(-1.0, 1.0, Arc::new(|x: f64| 0.5 * (x + 1.0))),
            MeasureSpec::MarchenkoPastur => continuous(
                0.0,
                4.0,
                Arc::new(|x: f64| {
                    let theta = (x.sqrt() / 2.0).asin();
                    (2.0 * theta + (2.0 * theta).sin()) / PI
                }),
            ),
            MeasureSpec::PolyRoots { coeffs } => {
                let roots = all_roots(coeffs, &RootFindConfig::default())?;
                let n = roots.cardinality() as f64;
                let atoms: Vec<Atom> = roots
                    .distinct()
                    .iter()
                    .map(|r| Atom::new(r.z, r.multiplicity as f64 / n))
                    .collect();
                // roots of real-rooted polynomials come back with exact zero imaginary parts
                atoms_distribution(&atoms)
            }
            MeasureSpec::DensityGrid { x, f } => {
                let mass = grid_mass(x, f);
                let (x, f) = (x.clone(), f.clone());
                let (lo, hi) = (x[0], x[x.len() - 1]);
                continuous(lo, hi, Arc::new(move |y| grid_cdf(&x, &f, y) / mass))
            }
        }
    }
}

fn even_moments(kmax: usize, even: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..=kmax)
        .map(|k| if k % 2 == 0 { even(k / 2) } else { 0.0 })
        .collect()
}

fn cauchy_root_bound(p: &Polynomial) -> f64 {
    let lead = p.leading();
    1.0 + p.coeffs()[..p.degree()]
        .iter()
        .map(|c| (c / lead).norm())
        .fold(0.0, f64::max)
}

/// Normalized power sums `(1/n) sum r^k` of the zeros of a monic polynomial,
/// by Newton's identities.
fn power_sums(monic: &Polynomial, kmax: usize) -> Vec<Complex64> {
    let n = monic.degree();
    let c = monic.coeffs();
    // e-coefficient of z^(n-i)
    let a = |i: usize| c[n - i];
    let mut s = vec![Complex64::zero(); kmax + 1];
    s[0] = Complex64::new(n as f64, 0.0);
    for k in 1..=kmax {
        let mut acc = Complex64::zero();
        for i in 1..k.min(n + 1) {
            acc += a(i) * s[k - i];
        }
        if k <= n {
            acc += a(k) * k as f64;
        } else {
            acc += a(n) * s[k - n];
        }
        s[k] = -acc;
    }
    s.into_iter().map(|v| v / n as f64).collect()
}

/// `sqrt((z - a)(z - b))` with its cut on `[a, b]` and asymptotics `z - (a+b)/2`.
pub fn sqrt_segment(z: Complex64, a: f64, b: f64) -> Complex64 {
    let w = z - 0.5 * (a + b);
    let h = 0.5 * (b - a);
    if w.is_zero() {
        return Complex64::new(0.0, h);
    }
    let q = h / w;
    w * (1.0 - q * q).sqrt()
}

/// `log(1 + w)` accurate for small `w`, principal branch.
pub fn clog1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im)
}

/// `sqrt(z^2 - c^2)` branch asymptotic to `z`, cut on `[-c, c]`.
pub fn sqrt_centered(z: Complex64, c: f64) -> Complex64 {
    sqrt_segment(z, -c, c)
}

fn grid_mass(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2)
        .zip(f.windows(2))
        .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
        .sum()
}

/// Exact Cauchy transform and derivative of a piecewise-linear density.
fn grid_cauchy(x: &[f64], f: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut c = Complex64::zero();
    let mut d = Complex64::zero();
    for (xs, fs) in x.windows(2).zip(f.windows(2)) {
        let h = 0.5 * (xs[1] - xs[0]);
        let mid = 0.5 * (xs[0] + xs[1]);
        let fm = 0.5 * (fs[0] + fs[1]);
        let slope = (fs[1] - fs[0]) / (2.0 * h);
        let w = z - mid;
        let q = h / w;
        // L = log((w+h)/(w-h)); K = w L - 2h; M = L + w L'
        let (l, k, l_prime, m) = if q.norm() < 0.1 {
            let q2 = q * q;
            let mut term = q;
            let mut l = Complex64::zero();
            let mut k = Complex64::zero();
            let mut m = Complex64::zero();
            for j in 0..12 {
                let odd = (2 * j + 1) as f64;
                l += 2.0 * term / odd;
                if j > 0 {
                    k += 2.0 * h * (term / q) / odd;
                    m -= 4.0 * j as f64 * term / odd;
                }
                term *= q2;
            }
            let l_prime = -2.0 * h / ((w - h) * (w + h));
            (l, k, l_prime, m)
        } else {
            let l = ((w + h) / (w - h)).ln();
            let l_prime = -2.0 * h / ((w - h) * (w + h));
            (l, w * l - 2.0 * h, l_prime, l + w * l_prime)
        };
        c += fm * l + slope * k;
        d += fm * l_prime + slope * m;
    }
    (c, d)
}

fn grid_moments(x: &[f64], f: &[f64], kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    for (xs, fs) in x.windows(2).zip(f.windows(2)) {
        let (a, b) = (xs[0], xs[1]);
        let beta = (fs[1] - fs[0]) / (b - a);
        let alpha = fs[0] - beta * a;
        let (mut pa, mut pb) = (a, b);
        for (k, m) in out.iter_mut().enumerate() {
            let first = (pb - pa) / (k + 1) as f64;
            let (pa2, pb2) = (pa * a, pb * b);
            let second = (pb2 - pa2) / (k + 2) as f64;
            *m += alpha * first + beta * second;
            pa = pa2;
            pb = pb2;
        }
    }
    out
}

fn grid_cdf(x: &[f64], f: &[f64], y: f64) -> f64 {
    let mut acc = 0.0;
    for (xs, fs) in x.windows(2).zip(f.windows(2)) {
        if y <= xs[0] {
            break;
        }
        let top = y.min(xs[1]);
        let slope = (fs[1] - fs[0]) / (xs[1] - xs[0]);
        let dx = top - xs[0];
        acc += dx * (fs[0] + 0.5 * slope * dx);
    }
    acc
}

/// Absolutely continuous part of a distribution on the real line.
#[derive(Clone)]
pub struct ContinuousPart {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    /// Cumulative mass on `(-inf, x]`, from 0 at `lo` to `mass` at `hi`.
    pub cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Debug for ContinuousPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContinuousPart")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("mass", &self.mass)
            .finish()
    }
}

/// Measure on the real line as sorted atoms plus an optional continuous part.
#[derive(Clone, Debug)]
pub struct RealDistribution {
    pub atoms: Vec<(f64, f64)>,
    pub continuous: Option<ContinuousPart>,
}

impl RealDistribution {
    pub fn atomic(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        RealDistribution {
            atoms,
            continuous: None,
        }
    }

    /// Continuous distribution with density `f` on `[lo, hi]`, tabulated by
    /// composite Simpson on `nodes` panels.
    pub fn from_density(lo: f64, hi: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        let n = nodes.max(2);
        let h = (hi - lo) / n as f64;
        let mut x = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        x.push(lo);
        cum.push(0.0);
        for i in 0..n {
            let a = lo + i as f64 * h;
            let b = a + h;
            acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(b));
            x.push(b);
            cum.push(acc);
        }
        let mass = acc;
        RealDistribution {
            atoms: Vec::new(),
            continuous: Some(ContinuousPart {
                lo,
                hi,
                mass,
                cdf: Arc::new(move |y| interpolate(&x, &cum, y)),
            }),
        }
    }

    /// Like [`RealDistribution::from_density`] but integrating in `theta` with
    /// `x = mid + half sin(theta)`, which absorbs inverse square-root growth
    /// of `f` at the endpoints.
    pub fn from_edge_density(lo: f64, hi: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        let n = nodes.max(2);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let g = |th: f64| {
            let c = th.cos();
            let v = f(mid + half * th.sin()) * half * c;
            if c > 0.0 && v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let h = std::f64::consts::PI / n as f64;
        let mut x = Vec::with_capacity(n + 1);
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        x.push(lo);
        cum.push(0.0);
        for i in 0..n {
            let a = -std::f64::consts::FRAC_PI_2 + i as f64 * h;
            let b = a + h;
            // two-point Gauss-Legendre keeps clear of the endpoints
            let off = 0.5 * h / 3f64.sqrt();
            acc += 0.5 * h * (g(a + 0.5 * h - off) + g(a + 0.5 * h + off));
            x.push(if i + 1 == n { hi } else { mid + half * b.sin() });
            cum.push(acc);
        }
        RealDistribution {
            atoms: Vec::new(),
            continuous: Some(ContinuousPart {
                lo,
                hi,
                mass: acc,
                cdf: Arc::new(move |y| interpolate(&x, &cum, y)),
            }),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>()
            + self.continuous.as_ref().map_or(0.0, |c| c.mass)
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        match &self.continuous {
            Some(c) if x <= c.lo => 0.0,
            Some(c) if x >= c.hi => c.mass,
            Some(c) => (c.cdf)(x),
            None => 0.0,
        }
    }

    fn atom_prefix(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.atoms.len() + 1);
        out.push(0.0);
        for a in &self.atoms {
            acc += a.1;
            out.push(acc);
        }
        out
    }

    /// `F(x)` (right-continuous) and `F(x-)`.
    fn cdf_pair(&self, prefix: &[f64], x: f64) -> (f64, f64) {
        let right = self.atoms.partition_point(|a| a.0 <= x);
        let left = self.atoms.partition_point(|a| a.0 < x);
        let c = self.continuous_cdf(x);
        (prefix[right] + c, prefix[left] + c)
    }

    fn bounds(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.0);
            hi = hi.max(a.0);
        }
        if let Some(c) = &self.continuous {
            lo = lo.min(c.lo);
            hi = hi.max(c.hi);
        }
        (lo <= hi).then_some((lo, hi))
    }
}

fn interpolate(x: &[f64], y: &[f64], t: f64) -> f64 {
    if t <= x[0] {
        return y[0];
    }
    if t >= x[x.len() - 1] {
        return y[y.len() - 1];
    }
    let i = x.partition_point(|v| *v <= t) - 1;
    let s = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + s * (y[i + 1] - y[i])
}

/// Kolmogorov and Wasserstein-1 distances between two distributions on the
/// real line, after normalizing each to unit mass.
pub fn distribution_distance(a: &RealDistribution, b: &RealDistribution) -> Result<(f64, f64)> {
    let (ma, mb) = (a.total_mass(), b.total_mass());
    if (ma - mb).abs() > 1e-9 * ma.abs().max(mb.abs()).max(1.0) {
        return Err(Error::MassMismatch(ma, mb));
    }
    if !(ma > 0.0) {
        return precondition("distributions need positive mass");
    }
    let (Some((la, ha)), Some((lb, hb))) = (a.bounds(), b.bounds()) else {
        return precondition("empty distribution");
    };
    let (lo, hi) = (la.min(lb), ha.max(hb));
    const CELLS: usize = 20000;
    let mut points: Vec<f64> = (0..=CELLS)
        .map(|i| lo + (hi - lo) * i as f64 / CELLS as f64)
        .collect();
    points.extend(a.atoms.iter().map(|x| x.0));
    points.extend(b.atoms.iter().map(|x| x.0));
    for c in [&a.continuous, &b.continuous].into_iter().flatten() {
        points.push(c.lo);
        points.push(c.hi);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let (pa, pb) = (a.atom_prefix(), b.atom_prefix());
    let kolmogorov = points
        .par_iter()
        .map(|&x| {
            let (ra, la) = a.cdf_pair(&pa, x);
            let (rb, lb) = b.cdf_pair(&pb, x);
            ((ra / ma - rb / mb).abs()).max((la / ma - lb / mb).abs())
        })
        .reduce(|| 0.0, f64::max);
    // Gauss-Legendre on each cell; atomic CDFs are constant inside cells.
    // Summed in order so the result does not depend on the thread count.
    const NODES: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
    let cells: Vec<f64> = points
        .par_windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            let half = 0.5 * (x1 - x0);
            let mid = 0.5 * (x0 + x1);
            NODES
                .iter()
                .map(|t| {
                    let x = mid + half * t;
                    let (fa, _) = a.cdf_pair(&pa, x);
                    let (fb, _) = b.cdf_pair(&pb, x);
                    half * (fa / ma - fb / mb).abs()
                })
                .sum::<f64>()
        })
        .collect();
    let w1 = cells.iter().sum();
    Ok((kolmogorov, w1))
}

/// [`distribution_distance`] between two measures on the real line.
pub fn real_distance(m1: &dyn Measure, m2: &dyn Measure) -> Result<(f64, f64)> {
    distribution_distance(&m1.real_distribution()?, &m2.real_distribution()?)
}

/// Points `radius * exp(2 pi i j / samples)`.
pub fn circle_points(radius: f64, samples: usize) -> Vec<Complex64> {
    (0..samples)
        .map(|j| Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / samples as f64))
        .collect()
}

/// Largest discrepancy of two Cauchy transforms over equispaced points on `|z| = radius`.
pub fn compare_cauchy(m1: &dyn Measure, m2: &dyn Measure, radius: f64, samples: usize) -> Result<f64> {
    let reach = m1.support_radius().max(m2.support_radius());
    if !(radius > reach) {
        return precondition(format!(
            "comparison radius {radius} does not exceed support radius {reach}"
        ));
    }
    compare_on_circle(|z| m1.cauchy(z), |z| m2.cauchy(z), radius, samples)
}

/// Same as [`compare_cauchy`] for arbitrary evaluators.
pub fn compare_on_circle(
    f1: impl Fn(Complex64) -> Result<Complex64> + Sync,
    f2: impl Fn(Complex64) -> Result<Complex64> + Sync,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    if samples == 0 {
        return precondition("need at least one sample");
    }
    let diffs = circle_points(radius, samples)
        .into_par_iter()
        .map(|z| Ok((f1(z)? - f2(z)?).norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn named() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::Arcsine,
            MeasureSpec::Semicircle,
            MeasureSpec::MarchenkoPastur,
            MeasureSpec::Uniform,
            MeasureSpec::PolyRoots {
                coeffs: Polynomial::from_real(&[0.0, -3.0, 0.0, 4.0]),
            },
            MeasureSpec::density_grid(
                (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect(),
                (0..=200)
                    .map(|i| {
                        let x = -1.0 + i as f64 / 100.0;
                        1.0 - x.abs()
                    })
                    .collect(),
            )
            .unwrap(),
            MeasureSpec::atoms(vec![Atom::new(Complex64::new(0.0, 2.0), 0.25), Atom::real(-3.0, 0.75)]),
        ]
    }

    #[test]
    fn cauchy_examples() {
        let delta = MeasureSpec::atoms(vec![Atom::real(0.0, 1.0)]);
        assert_eq!(delta.cauchy(c(2.0)).unwrap(), c(0.5));
        assert_abs_diff_eq!(MeasureSpec::Arcsine.cauchy(c(2.0)).unwrap().re, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let semi = MeasureSpec::Semicircle.cauchy(c(2.0)).unwrap();
        assert_abs_diff_eq!(semi.re, 2.0 * (2.0 - 3f64.sqrt()), epsilon = 1e-15);
        assert!(matches!(delta.cauchy(c(0.0)), Err(Error::Pole { .. })));
        assert!(matches!(MeasureSpec::Semicircle.cauchy(c(0.3)), Err(Error::OnSupport { .. })));
    }

    #[test]
    fn uniform_cauchy_branch() {
        // principal log, cut on [-1, 1]; check against direct quadrature at an off-axis point
        let z = Complex64::new(0.3, 0.4);
        let got = MeasureSpec::Uniform.cauchy(z).unwrap();
        let n = 20000;
        let mut want = Complex64::zero();
        for i in 0..n {
            let y = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
            want += 0.5 * (2.0 / n as f64) / (z - y);
        }
        assert!((got - want).norm() < 1e-7);
    }

    #[test]
    fn asymptotic_normalization() {
        for m in named() {
            let r = m.support_radius();
            for theta in [0.3, 1.9, 4.0] {
                let z = Complex64::from_polar(1e6 * r, theta);
                let zc = z * m.cauchy(z).unwrap();
                assert!((zc - m.total_mass()).norm() < 1e-5, "{m:?}");
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for m in named() {
            let z = Complex64::new(0.7, 1.3) * (m.support_radius() + 1.0);
            let h = 1e-5;
            let fd = (m.cauchy(z + h).unwrap() - m.cauchy(z - h).unwrap()) / (2.0 * h);
            let d = m.cauchy_derivative(z).unwrap();
            assert!((fd - d).norm() < 1e-8 * (1.0 + d.norm()), "{m:?}: {fd} vs {d}");
        }
    }

    #[test]
    fn moment_examples() {
        let delta = MeasureSpec::atoms(vec![Atom::real(0.0, 1.0)]);
        assert_eq!(delta.moments(3), vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
        let pair = MeasureSpec::atoms(vec![Atom::real(-1.0, 0.5), Atom::real(1.0, 0.5)]);
        assert_eq!(pair.moments(4), vec![c(1.0), c(0.0), c(1.0), c(0.0), c(1.0)]);
        let semi = MeasureSpec::Semicircle.moments(4);
        for (m, want) in semi.iter().zip([1.0, 0.0, 0.25, 0.0, 0.125]) {
            assert_abs_diff_eq!(m.re, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn moments_match_laurent_coefficients() {
        for m in named() {
            let r = 2.0 * m.support_radius() + 1.0;
            let n = 512;
            let kmax = 8;
            let moments = m.moments(kmax);
            for (k, mk) in moments.iter().enumerate() {
                // m_k = (1/2 pi i) oint z^k C(z) dz
                let sum = circle_points(r, n)
                    .iter()
                    .map(|&z| z.powu(k as u32 + 1) * m.cauchy(z).unwrap())
                    .sum::<Complex64>()
                    / n as f64;
                assert!((sum - mk).norm() < 1e-8 * (1.0 + mk.norm()), "{m:?} k={k}: {sum} vs {mk}");
            }
        }
    }

    #[test]
    fn support_radius_examples() {
        let pair = MeasureSpec::atoms(vec![Atom::real(-1.0, 0.5), Atom::real(1.0, 0.5)]);
        assert_eq!(pair.support_radius(), 1.0);
        assert_eq!(MeasureSpec::Arcsine.support_radius(), 1.0);
        let m = MeasureSpec::atoms(vec![Atom::new(Complex64::new(0.0, 2.0), 0.5), Atom::real(-3.0, 0.5)]);
        assert_eq!(m.support_radius(), 3.0);
    }

    #[test]
    fn compare_examples() {
        let delta = MeasureSpec::atoms(vec![Atom::real(0.0, 1.0)]);
        assert_eq!(compare_cauchy(&delta, &delta, 2.0, 64).unwrap(), 0.0);
        let eps = 0.1;
        let split = MeasureSpec::atoms(vec![Atom::real(-eps, 0.5), Atom::real(eps, 0.5)]);
        // 1/z - z/(z^2 - eps^2) = -eps^2 / (z (z^2 - eps^2)), at most eps^2/(2 (4 - eps^2))
        let d = compare_cauchy(&delta, &split, 2.0, 256).unwrap();
        assert!(d <= eps * eps / (2.0 * (4.0 - eps * eps)) + 1e-15);
        assert!(d >= 0.9 * eps * eps / (2.0 * (4.0 + eps * eps)));
        assert!(compare_cauchy(&delta, &MeasureSpec::Semicircle, 0.5, 8).is_err());
    }

    #[test]
    fn compare_chebyshev_against_arcsine() {
        let n = 64;
        let zeros = (0..n).map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos());
        let emp = EmpiricalMeasure::from_roots(&RootSet::from_real(zeros), n);
        let d = compare_cauchy(&emp, &MeasureSpec::Arcsine, 2.0, 256).unwrap();
        assert!(d <= 0.02, "{d}");
    }

    #[test]
    fn real_distance_examples() {
        let delta0 = MeasureSpec::atoms(vec![Atom::real(0.0, 1.0)]);
        let delta1 = MeasureSpec::atoms(vec![Atom::real(1.0, 1.0)]);
        let (k, w) = real_distance(&delta0, &delta0).unwrap();
        assert_eq!((k, w), (0.0, 0.0));
        let (k, w) = real_distance(&delta0, &delta1).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-12);
        let n = 1000;
        let disc = MeasureSpec::atoms(
            (0..n)
                .map(|i| Atom::real(-1.0 + (2 * i + 1) as f64 / n as f64, 1.0 / n as f64))
                .collect(),
        );
        let (_, w) = real_distance(&MeasureSpec::Uniform, &disc).unwrap();
        assert!(w <= 2.0 / n as f64, "{w}");
        let heavy = MeasureSpec::atoms(vec![Atom::real(0.0, 2.0)]);
        assert!(matches!(real_distance(&delta0, &heavy), Err(Error::MassMismatch(..))));
        let complex = MeasureSpec::atoms(vec![Atom::new(Complex64::i(), 1.0)]);
        assert!(matches!(real_distance(&delta0, &complex), Err(Error::ComplexSupport)));
    }

    #[test]
    fn empirical_mass_is_fraction_of_degree() {
        let roots = RootSet::from_real([0.1, 0.2, 0.3]);
        let m = EmpiricalMeasure::from_roots(&roots, 5);
        assert_eq!(m.total_mass(), 3.0 / 5.0);
        let signed = SignedMeasureSpec::two_point(2.0);
        assert_eq!(signed.total_mass(), 1.0);
        assert_eq!(signed.total_variation(), 5.0);
    }

    #[test]
    fn spec_json_round_trip() {
        for m in named() {
            let s = serde_json::to_string(&m).unwrap();
            let back: MeasureSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m);
        }
        let s = serde_json::to_string(&MeasureSpec::MarchenkoPastur).unwrap();
        assert_eq!(s, r#"{"type":"marchenko_pastur"}"#);
    }

    #[test]
    fn edge_density_handles_inverse_sqrt_endpoints() {
        let arc = RealDistribution::from_edge_density(-1.0, 1.0, 2000, |x| 1.0 / (PI * (1.0 - x * x).sqrt()));
        assert!((arc.total_mass() - 1.0).abs() < 1e-6);
        let (k, w) = distribution_distance(&arc, &MeasureSpec::Arcsine.real_distribution().unwrap()).unwrap();
        assert!(k < 1e-4 && w < 1e-4, "{k} {w}");
    }
}
