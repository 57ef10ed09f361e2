//! Closed-form flows and the polynomial families whose zeros approximate them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::hopf::{signed_example_branch_points, SolverConfig};
use crate::measure::{sqrt_segment, Atom, Measure, MeasureSpec, SignedMeasureSpec};
use crate::polycore::{Polynomial, RootSet};
use crate::rootfind::{
    chebyshev_t_recurrence, hermite_recurrence, laguerre_recurrence, tridiagonal_orthogonal_roots,
};

/// Flows with explicit formulas for `u`, the density or the support edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedFlow {
    Arcsine,
    Semicircle,
    /// Zeros of derivatives of `(x^2 - 1)^(n/2)`.
    RodriguesX2m1,
    /// Zeros of derivatives of `(x^3 - x)^(n/3)`.
    KalyaginX3mx,
    /// Zeros of derivatives of `(z^3 - 1)^(n/3)`.
    CubicZ3m1,
    Uniform,
    /// `(a + 1) delta_0 - a delta_1`.
    SignedCounterexample { a: f64 },
}

impl fmt::Display for NamedFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedFlow::Arcsine => write!(f, "arcsine"),
            NamedFlow::Semicircle => write!(f, "semicircle"),
            NamedFlow::RodriguesX2m1 => write!(f, "rodrigues"),
            NamedFlow::KalyaginX3mx => write!(f, "kalyagin"),
            NamedFlow::CubicZ3m1 => write!(f, "cubic"),
            NamedFlow::Uniform => write!(f, "uniform"),
            NamedFlow::SignedCounterexample { a } => write!(f, "signed:{a}"),
        }
    }
}

impl FromStr for NamedFlow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "arcsine" | "chebyshev" => NamedFlow::Arcsine,
            "semicircle" | "hermite" => NamedFlow::Semicircle,
            "rodrigues" | "rodrigues_x2m1" => NamedFlow::RodriguesX2m1,
            "kalyagin" | "kalyagin_x3mx" => NamedFlow::KalyaginX3mx,
            "cubic" | "cubic_z3m1" => NamedFlow::CubicZ3m1,
            "uniform" => NamedFlow::Uniform,
            other => match other.strip_prefix("signed:") {
                Some(a) => NamedFlow::SignedCounterexample {
                    a: a.parse().map_err(|_| Error::Parse(format!("bad parameter in {s:?}")))?,
                },
                None => return Err(Error::Parse(format!("unknown flow {s:?}"))),
            },
        })
    }
}

fn unsupported<T>(flow: NamedFlow, what: &str) -> Result<T> {
    Err(Error::Unsupported(format!("no closed-form {what} for {flow}")))
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return precondition(format!("time {t} outside [0, 1)"));
    }
    Ok(())
}

impl NamedFlow {
    pub const ALL: [NamedFlow; 6] = [
        NamedFlow::Arcsine,
        NamedFlow::Semicircle,
        NamedFlow::RodriguesX2m1,
        NamedFlow::KalyaginX3mx,
        NamedFlow::CubicZ3m1,
        NamedFlow::Uniform,
    ];

    /// The initial measure as a specification, when it is a positive one.
    pub fn initial_spec(&self) -> Option<MeasureSpec> {
        let third = 1.0 / 3.0;
        Some(match self {
            NamedFlow::Arcsine => MeasureSpec::Arcsine,
            NamedFlow::Semicircle => MeasureSpec::Semicircle,
            NamedFlow::Uniform => MeasureSpec::Uniform,
            NamedFlow::RodriguesX2m1 => MeasureSpec::atoms(vec![Atom::real(-1.0, 0.5), Atom::real(1.0, 0.5)]),
            NamedFlow::KalyaginX3mx => MeasureSpec::atoms(vec![
                Atom::real(-1.0, third),
                Atom::real(0.0, third),
                Atom::real(1.0, third),
            ]),
            NamedFlow::CubicZ3m1 => MeasureSpec::atoms(
                (0..3)
                    .map(|j| Atom::new(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0), third))
                    .collect(),
            ),
            NamedFlow::SignedCounterexample { .. } => return None,
        })
    }

    pub fn initial_measure(&self) -> Arc<dyn Measure> {
        match (self.initial_spec(), self) {
            (Some(spec), _) => Arc::new(spec),
            (None, NamedFlow::SignedCounterexample { a }) => Arc::new(SignedMeasureSpec::two_point(*a)),
            (None, _) => unreachable!("every positive flow has a specification"),
        }
    }

    /// `P` with `Q_n = P^(n / deg P)`, for the flows started from zeros of a power.
    pub fn base_polynomial(&self) -> Option<Polynomial> {
        match self {
            NamedFlow::RodriguesX2m1 => Some(Polynomial::from_real(&[-1.0, 0.0, 1.0])),
            NamedFlow::KalyaginX3mx => Some(Polynomial::from_real(&[0.0, -1.0, 0.0, 1.0])),
            NamedFlow::CubicZ3m1 => Some(Polynomial::from_real(&[-1.0, 0.0, 0.0, 1.0])),
            _ => None,
        }
    }

    /// `u(z, t)` from its closed form, on the branch asymptotic to `(1 - t)/z`.
    pub fn oracle_u(&self, z: Complex64, t: f64) -> Result<Complex64> {
        check_time(t)?;
        let one = Complex64::new(1.0, 0.0);
        match self {
            NamedFlow::Arcsine => {
                let a = (1.0 - t * t).sqrt();
                let root = sqrt_segment(z, -a, a);
                let den = z * z - one;
                if den.norm() < 1e-6 {
                    // removable singularity at z = +-1; use the rationalized form
                    return Ok((1.0 - t * t) / (root + t * z));
                }
                Ok((root - t * z) / den)
            }
            NamedFlow::Semicircle => {
                let a = (1.0 - t).sqrt();
                Ok(2.0 * (z - sqrt_segment(z, -a, a)))
            }
            NamedFlow::RodriguesX2m1 => {
                let c = 2.0 * (t * (1.0 - t)).sqrt();
                let den = 2.0 * (z * z - one);
                if den.norm() == 0.0 {
                    return Err(Error::Pole { z });
                }
                Ok(((1.0 - 2.0 * t) * z + sqrt_segment(z, -c, c)) / den)
            }
            NamedFlow::Uniform => uniform_u(z, t),
            _ => unsupported(*self, "u"),
        }
    }

    /// Absolutely continuous density at `x` and the atoms at time `t`.
    pub fn oracle_density(&self, x: f64, t: f64) -> Result<(f64, Vec<(f64, f64)>)> {
        check_time(t)?;
        match self {
            NamedFlow::Arcsine => {
                let a2 = 1.0 - t * t;
                let f = if x * x < a2 { (a2 - x * x).sqrt() / (PI * (1.0 - x * x)) } else { 0.0 };
                Ok((f, Vec::new()))
            }
            NamedFlow::Semicircle => {
                let a2 = 1.0 - t;
                let f = if x * x < a2 { 2.0 / PI * (a2 - x * x).sqrt() } else { 0.0 };
                Ok((f, Vec::new()))
            }
            NamedFlow::RodriguesX2m1 => {
                let c2 = 4.0 * t * (1.0 - t);
                let f = if x * x < c2 { (c2 - x * x).sqrt() / (2.0 * PI * (1.0 - x * x)) } else { 0.0 };
                let w = (0.5 - t).max(0.0);
                let atoms = if w > 0.0 { vec![(-1.0, w), (1.0, w)] } else { Vec::new() };
                Ok((f, atoms))
            }
            _ => unsupported(*self, "density"),
        }
    }

    /// Edges of the support (real flows) or branch points (complex ones).
    pub fn oracle_endpoints(&self, t: f64) -> Result<Vec<Complex64>> {
        if !(t > 0.0 && t < 1.0) {
            return precondition(format!("time {t} outside (0, 1)"));
        }
        let pair = |e: f64| vec![Complex64::new(-e, 0.0), Complex64::new(e, 0.0)];
        Ok(match self {
            NamedFlow::Arcsine => pair((1.0 - t * t).sqrt()),
            NamedFlow::Semicircle => pair((1.0 - t).sqrt()),
            NamedFlow::RodriguesX2m1 => pair(2.0 * (t * (1.0 - t)).sqrt()),
            NamedFlow::KalyaginX3mx => kalyagin_quartic_roots(t).to_vec(),
            NamedFlow::CubicZ3m1 => {
                let rho = 3.0 * (t * (1.0 - t) * (1.0 - t) / 4.0).cbrt();
                (0..3).map(|j| Complex64::from_polar(rho, 2.0 * PI * j as f64 / 3.0)).collect()
            }
            NamedFlow::Uniform => pair(uniform_edge(t)?),
            NamedFlow::SignedCounterexample { a } => {
                let (z1, z2) = signed_example_branch_points(*a, t)?;
                vec![z1, z2]
            }
        })
    }

    /// Atoms of the flow at time `t`.
    pub fn atoms(&self, t: f64) -> Result<Vec<(f64, f64)>> {
        match self {
            NamedFlow::RodriguesX2m1 => Ok(self.oracle_density(0.0, t)?.1),
            _ => {
                check_time(t)?;
                Ok(Vec::new())
            }
        }
    }
}

/// Roots of `9 z^4 + 3 (9 t^2 - 6 t - 2) z^2 - (1 - t)(3 t - 1)^3`, as a
/// quadratic in `z^2`.
pub fn kalyagin_quartic_roots(t: f64) -> [Complex64; 4] {
    let b = 3.0 * (9.0 * t * t - 6.0 * t - 2.0);
    let c = -(1.0 - t) * (3.0 * t - 1.0).powi(3);
    let disc = Complex64::new(b * b - 36.0 * c, 0.0).sqrt();
    let y1 = (-b + disc) / 18.0;
    let y2 = (-b - disc) / 18.0;
    let (r1, r2) = (y1.sqrt(), y2.sqrt());
    [r1, -r1, r2, -r2]
}

/// `u` for the uniform law: with `v = (s + 1)/(s - 1)` the characteristic
/// equation reads `z = (v + 1)/(v - 1) - 2t / log v`, and `u = (1/2) log v`.
/// Solved by Newton in `v`, continued in `t` from `v = (z + 1)/(z - 1)`.
pub fn uniform_u(z: Complex64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let one = Complex64::new(1.0, 0.0);
    if (z - 1.0).norm() == 0.0 {
        return Err(Error::Pole { z });
    }
    let mut v = (z + one) / (z - one);
    if t == 0.0 {
        return Ok(0.5 * v.ln());
    }
    let cfg = SolverConfig::default();
    let g = |v: Complex64, tau: f64| (v + one) / (v - one) - 2.0 * tau / v.ln() - z;
    let dg = |v: Complex64, tau: f64| {
        let l = v.ln();
        -2.0 / ((v - one) * (v - one)) + 2.0 * tau / (v * l * l)
    };
    let target = cfg.tolerance * z.norm().max(1.0);
    let mut tau = 0.0;
    let mut h = cfg.t_step;
    while tau < t {
        let next = (tau + h).min(t);
        let mut cand = v;
        let mut ok = false;
        for _ in 0..cfg.max_iterations {
            let f = g(cand, next);
            if f.norm() <= target {
                ok = true;
                break;
            }
            let mut step = f / dg(cand, next);
            let cap = cfg.damping * (cand - one).norm();
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            cand -= step;
            if !cand.re.is_finite() || !cand.im.is_finite() {
                break;
            }
        }
        // stay on the sheet: log v keeps the sign of Im z opposite
        if ok && (z.im == 0.0 || cand.ln().im * z.im <= 0.0) {
            tau = next;
            v = cand;
            h = (1.5 * h).min(cfg.t_step);
        } else {
            h *= 0.5;
            if h < cfg.min_step {
                return Err(Error::Shock { z, t: tau, last: v });
            }
        }
    }
    Ok(0.5 * v.ln())
}

/// Right edge of the uniform flow's support: with `sinh(y)/y = 1/sqrt(t)`,
/// the edge is `coth(y) - t/y`, where `dz/dv` vanishes on the real axis.
pub fn uniform_edge(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return precondition(format!("time {t} outside (0, 1)"));
    }
    let target = 1.0 / t.sqrt();
    let phi = |y: f64| y.sinh() / y - target;
    let (mut lo, mut hi) = (1e-8, 1.0);
    while phi(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let y = 0.5 * (lo + hi);
    Ok(1.0 / y.tanh() - t / y)
}

/// Polynomial sequences with known zero limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `T_n`, zeros tend to the arcsine law.
    Chebyshev,
    /// `H_n(sqrt(2n) x)`, zeros tend to the semicircle on `[-1, 1]`.
    Hermite,
    /// `L_n(n x)`, zeros tend to the Marchenko-Pastur law on `[0, 4]`.
    Laguerre,
    /// Equispaced zeros, tending to the uniform law.
    Equispaced,
    /// `(x^2 - 1)^(n/2)`.
    Rodrigues,
    /// `(x^3 - x)^(n/3)`.
    Kalyagin,
    /// `(z^3 - 1)^(n/3)`.
    Cubic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Chebyshev => "chebyshev",
            Family::Hermite => "hermite",
            Family::Laguerre => "laguerre",
            Family::Equispaced => "equispaced",
            Family::Rodrigues => "rodrigues",
            Family::Kalyagin => "kalyagin",
            Family::Cubic => "cubic",
        };
        f.write_str(name)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "chebyshev" => Family::Chebyshev,
            "hermite" => Family::Hermite,
            "laguerre" => Family::Laguerre,
            "equispaced" | "uniform" => Family::Equispaced,
            "rodrigues" => Family::Rodrigues,
            "kalyagin" => Family::Kalyagin,
            "cubic" => Family::Cubic,
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        })
    }
}

impl Family {
    /// Zeros of the degree-`n` member.
    pub fn zeros(&self, n: usize) -> Result<RootSet> {
        if n == 0 {
            return precondition("degree must be positive");
        }
        let orthogonal = |(a, b): (Vec<f64>, Vec<f64>), scale: f64| -> Result<RootSet> {
            let z = tridiagonal_orthogonal_roots(&a, &b, n)?;
            Ok(RootSet::from_real(z.into_iter().map(|x| x / scale)))
        };
        let power = |base: Vec<Complex64>| -> Result<RootSet> {
            let d = base.len();
            if !n.is_multiple_of(d) {
                return precondition(format!("degree {n} must be a multiple of {d}"));
            }
            Ok(RootSet::new(
                base.into_iter()
                    .map(|z| crate::polycore::Root { z, multiplicity: n / d })
                    .collect(),
            ))
        };
        let real = |xs: &[f64]| xs.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        match self {
            Family::Chebyshev => orthogonal(chebyshev_t_recurrence(n), 1.0),
            Family::Hermite => orthogonal(hermite_recurrence(n), (2.0 * n as f64).sqrt()),
            Family::Laguerre => orthogonal(laguerre_recurrence(n, 0.0), n as f64),
            Family::Equispaced => Ok(RootSet::from_real(
                (0..n).map(|j| -1.0 + (2 * j + 1) as f64 / n as f64),
            )),
            Family::Rodrigues => power(real(&[-1.0, 1.0])),
            Family::Kalyagin => power(real(&[-1.0, 0.0, 1.0])),
            Family::Cubic => power((0..3).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0)).collect()),
        }
    }

    /// The limit of the normalized zero-counting measures.
    pub fn limit(&self) -> NamedFlowOrSpec {
        match self {
            Family::Chebyshev => NamedFlowOrSpec::Flow(NamedFlow::Arcsine),
            Family::Hermite => NamedFlowOrSpec::Flow(NamedFlow::Semicircle),
            Family::Laguerre => NamedFlowOrSpec::Spec(MeasureSpec::MarchenkoPastur),
            Family::Equispaced => NamedFlowOrSpec::Flow(NamedFlow::Uniform),
            Family::Rodrigues => NamedFlowOrSpec::Flow(NamedFlow::RodriguesX2m1),
            Family::Kalyagin => NamedFlowOrSpec::Flow(NamedFlow::KalyaginX3mx),
            Family::Cubic => NamedFlowOrSpec::Flow(NamedFlow::CubicZ3m1),
        }
    }

    /// Whether the zeros are real, so the interlacing mode applies.
    pub fn is_real(&self) -> bool {
        !matches!(self, Family::Cubic)
    }
}

/// A limit law, with its closed-form flow when one is catalogued.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedFlowOrSpec {
    Flow(NamedFlow),
    Spec(MeasureSpec),
}

impl NamedFlowOrSpec {
    pub fn spec(&self) -> Option<MeasureSpec> {
        match self {
            NamedFlowOrSpec::Flow(f) => f.initial_spec(),
            NamedFlowOrSpec::Spec(s) => Some(s.clone()),
        }
    }

    pub fn measure(&self) -> Arc<dyn Measure> {
        match self {
            NamedFlowOrSpec::Flow(f) => f.initial_measure(),
            NamedFlowOrSpec::Spec(s) => Arc::new(s.clone()),
        }
    }
}
