//! Estimates and transforms built on the Cauchy transform: growth bounds
//! outside a disk, univalence, Hilbert transform, and recovery of densities
//! from boundary values.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::measure::{circle_points, Measure, MeasureSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub z: Complex64,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    #[serde(rename = "radius_R")]
    pub radius: f64,
    #[serde(rename = "min_abs_zC")]
    pub min_abs_zc: f64,
    #[serde(rename = "max_abs_zC")]
    pub max_abs_zc: f64,
    #[serde(rename = "min_abs_z2dC")]
    pub min_abs_z2dc: f64,
    #[serde(rename = "max_abs_z2dC")]
    pub max_abs_z2dc: f64,
    pub bound_violations: Vec<BoundViolation>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.bound_violations.is_empty()
    }
}

/// The four envelopes for `|z C(z)|` and `|z^2 C'(z)|` valid on `|z| >= R`
/// for a probability measure supported in the disk of radius `r`.
pub fn bound_envelopes(r: f64, big_r: f64) -> [f64; 4] {
    let q = r / big_r;
    [
        (1.0 - q) / ((1.0 + q) * (1.0 + q)),
        1.0 / (1.0 - q),
        (1.0 - 2.0 * q) / (1.0 + q).powi(4),
        1.0 / ((1.0 - q) * (1.0 - q)),
    ]
}

/// Samples `|z| in {R, 2R, 10R}` and checks the envelopes of [`bound_envelopes`].
pub fn verify_bounds(m: &dyn Measure, r: f64, big_r: f64, samples: usize) -> Result<BoundsReport> {
    if !(r > 0.0) || m.support_radius() > r * (1.0 + 1e-12) {
        return precondition("support must lie in the closed disk of radius r");
    }
    if !(big_r > 2.0 * r) {
        return precondition("bounds need R > 2r");
    }
    if (m.total_mass() - 1.0).abs() > 1e-9 {
        return precondition("bounds need a probability measure");
    }
    if samples == 0 {
        return precondition("need at least one sample");
    }
    let [lo_zc, hi_zc, lo_d, hi_d] = bound_envelopes(r, big_r);
    let points: Vec<Complex64> = [1.0, 2.0, 10.0]
        .iter()
        .flat_map(|s| circle_points(s * big_r, samples))
        .collect();
    let values = points
        .par_iter()
        .map(|&z| Ok((z, (z * m.cauchy(z)?).norm(), (z * z * m.cauchy_derivative(z)?).norm())))
        .collect::<Result<Vec<_>>>()?;
    let slack = 1e-12;
    let mut report = BoundsReport {
        radius: big_r,
        min_abs_zc: f64::INFINITY,
        max_abs_zc: 0.0,
        min_abs_z2dc: f64::INFINITY,
        max_abs_z2dc: 0.0,
        bound_violations: Vec::new(),
    };
    let flag = |z, quantity: &str, value: f64, bound: f64| {
        BoundViolation {
            z,
            quantity: quantity.to_string(),
            value,
            bound,
        }
    };
    let mut violations = Vec::new();
    for &(z, zc, d) in &values {
        report.min_abs_zc = report.min_abs_zc.min(zc);
        report.max_abs_zc = report.max_abs_zc.max(zc);
        report.min_abs_z2dc = report.min_abs_z2dc.min(d);
        report.max_abs_z2dc = report.max_abs_z2dc.max(d);
        if zc < lo_zc * (1.0 - slack) {
            violations.push(flag(z, "|zC| lower", zc, lo_zc));
        }
        if zc > hi_zc * (1.0 + slack) {
            violations.push(flag(z, "|zC| upper", zc, hi_zc));
        }
        if d < lo_d * (1.0 - slack) {
            violations.push(flag(z, "|z^2 C'| lower", d, lo_d));
        }
        if d > hi_d * (1.0 + slack) {
            violations.push(flag(z, "|z^2 C'| upper", d, hi_d));
        }
    }
    report.bound_violations = violations;
    Ok(report)
}

/// Radius beyond which characteristics started at `|z|` stay well defined up
/// to time `t_max`: `1.1 max{2r, r(1+r), (1+r)(1+T)/(1-T)}`.
pub fn safe_radius(r: f64, t_max: f64) -> Result<f64> {
    if !(r > 0.0) {
        return precondition("safe_radius needs r > 0");
    }
    if !(t_max > 0.0 && t_max < 1.0) {
        return precondition(format!("safe_radius needs 0 < T < 1, got {t_max}"));
    }
    let candidates = [2.0 * r, r * (1.0 + r), (1.0 + r) * (1.0 + t_max) / (1.0 - t_max)];
    Ok(1.1 * candidates.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivalenceReport {
    pub passed: bool,
    /// Two distinct sample points with (nearly) equal images, if found.
    pub witness: Option<(Complex64, Complex64)>,
    /// Winding number of the image of `|z| = R` around the origin.
    pub winding: i64,
    /// Smallest `|C|` on `|z| = R`; must exceed `1/(4R)`.
    pub min_image_modulus: f64,
    /// Largest `|C|` on `|z| = R`; must not exceed `1/(R - r)`.
    pub max_image_modulus: f64,
}

/// Samples injectivity of `C` outside the disk of radius `R`, and checks that
/// the image of `|z| = R` winds once around the disk of radius `1/(4R)`.
pub fn univalence_check(m: &dyn Measure, r: f64, big_r: f64, samples: usize) -> Result<UnivalenceReport> {
    if !(big_r > (2f64.sqrt() + 1.0) * r) {
        return precondition("univalence needs R > (sqrt 2 + 1) r");
    }
    if samples < 8 {
        return precondition("need at least 8 samples per circle");
    }
    let mut points = Vec::new();
    for (ring, scale) in [1.0, 1.25, 1.75, 3.0, 10.0].iter().enumerate() {
        // stagger the rings so that no two share an angle
        let shift = ring as f64 * 0.37 / samples as f64;
        points.extend((0..samples).map(|j| {
            Complex64::from_polar(scale * big_r, TAU * (j as f64 / samples as f64 + shift))
        }));
    }
    let images = points
        .par_iter()
        .map(|&z| m.cauchy(z))
        .collect::<Result<Vec<_>>>()?;
    let witness = (0..points.len())
        .into_par_iter()
        .find_map_first(|i| {
            (i + 1..points.len())
                .find(|&j| (images[i] - images[j]).norm() <= 1e-12)
                .map(|j| (points[i], points[j]))
        });
    let boundary = circle_points(big_r, 8 * samples)
        .into_par_iter()
        .map(|z| m.cauchy(z))
        .collect::<Result<Vec<_>>>()?;
    let mut turn = 0.0;
    for j in 0..boundary.len() {
        let a = boundary[j];
        let b = boundary[(j + 1) % boundary.len()];
        turn += (b / a).arg();
    }
    let winding = (turn / TAU).round() as i64;
    let min_image_modulus = boundary.iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min);
    let max_image_modulus = boundary.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let passed = witness.is_none()
        && winding.abs() == 1
        && min_image_modulus > 1.0 / (4.0 * big_r)
        && max_image_modulus <= (1.0 + 1e-12) / (big_r - r);
    Ok(UnivalenceReport {
        passed,
        witness,
        winding,
        min_image_modulus,
        max_image_modulus,
    })
}

/// `(1/pi) p.v. int dmu(y) / (x - y)` for a measure on the real line.
pub fn hilbert_transform(m: &MeasureSpec, x: f64) -> Result<f64> {
    let z = Complex64::new(x, 0.0);
    let inside = |a: f64, b: f64| x > a && x < b;
    match m {
        MeasureSpec::Atoms { atoms } => {
            if atoms.iter().any(|a| a.z.im != 0.0) {
                return Err(Error::ComplexSupport);
            }
            atoms.iter().try_fold(0.0, |acc, a| {
                if a.z.re == x {
                    Err(Error::Pole { z })
                } else {
                    Ok(acc + a.weight / (PI * (x - a.z.re)))
                }
            })
        }
        MeasureSpec::Semicircle if inside(-1.0, 1.0) => Ok(2.0 * x / PI),
        MeasureSpec::Arcsine if inside(-1.0, 1.0) => Ok(0.0),
        MeasureSpec::Uniform if inside(-1.0, 1.0) => Ok(((1.0 + x) / (1.0 - x)).ln() / TAU),
        MeasureSpec::MarchenkoPastur if inside(0.0, 4.0) => Ok(1.0 / TAU),
        MeasureSpec::Semicircle | MeasureSpec::Uniform | MeasureSpec::MarchenkoPastur => {
            let hit_end = match m {
                MeasureSpec::MarchenkoPastur => x == 0.0 || x == 4.0,
                _ => x.abs() == 1.0,
            };
            if hit_end {
                // finite one-sided limit for the semicircle, log blow-up otherwise
                return match m {
                    MeasureSpec::Semicircle => Ok(2.0 * x / PI),
                    _ => Err(Error::Pole { z }),
                };
            }
            Ok(m.cauchy(z)?.re / PI)
        }
        MeasureSpec::Arcsine => {
            if x.abs() == 1.0 {
                return Err(Error::Pole { z });
            }
            Ok(m.cauchy(z)?.re / PI)
        }
        MeasureSpec::PolyRoots { .. } => {
            let dist = m.real_distribution()?;
            hilbert_transform(
                &MeasureSpec::atoms(
                    dist.atoms
                        .iter()
                        .map(|&(y, w)| crate::measure::Atom::real(y, w))
                        .collect(),
                ),
                x,
            )
        }
        MeasureSpec::DensityGrid { x: xs, f } => Ok(grid_hilbert(xs, f, x)),
    }
}

/// Principal value for a piecewise-linear density. Grouping the logarithms
/// by node leaves coefficients that vanish at the node itself.
fn grid_hilbert(xs: &[f64], f: &[f64], x: f64) -> f64 {
    let mass: f64 = xs
        .windows(2)
        .zip(f.windows(2))
        .map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1]))
        .sum();
    let n = xs.len();
    let line = |i: usize| -> (f64, f64) {
        // segment i between nodes i and i+1: value at x and slope
        let slope = (f[i + 1] - f[i]) / (xs[i + 1] - xs[i]);
        (f[i] + slope * (x - xs[i]), slope)
    };
    let mut total = 0.0;
    for j in 0..n {
        let starting = if j + 1 < n { line(j).0 } else { 0.0 };
        let ending = if j > 0 { line(j - 1).0 } else { 0.0 };
        let coeff = starting - ending;
        let d = (x - xs[j]).abs();
        if coeff != 0.0 && d > 0.0 {
            total += coeff * d.ln();
        }
    }
    for i in 0..n - 1 {
        total -= line(i).1 * (xs[i + 1] - xs[i]);
    }
    total / (PI * mass)
}

/// `lim u(x + i eps)` as `eps -> 0+`, by three-point Richardson extrapolation
/// over `eps0, eps0/2, eps0/4`.
pub fn boundary_value(
    u_eval: &(impl Fn(Complex64) -> Result<Complex64> + ?Sized),
    x: f64,
    eps0: f64,
) -> Result<Complex64> {
    let g: Vec<Complex64> = [eps0, eps0 / 2.0, eps0 / 4.0]
        .iter()
        .map(|&e| u_eval(Complex64::new(x, e)))
        .collect::<Result<_>>()?;
    let d1 = (g[1] - g[0]).norm();
    let d2 = (g[2] - g[1]).norm();
    let scale = g[2].norm().max(1.0);
    if !(d2.is_finite() && d1.is_finite()) || (d2 > 0.9 * d1 && d2 > 1e-10 * scale) {
        return Err(Error::InversionFailure { x });
    }
    let r1 = 2.0 * g[1] - g[0];
    let r2 = 2.0 * g[2] - g[1];
    Ok((4.0 * r2 - r1) / 3.0)
}

/// Density `-(1/pi) Im u(x + i0)` on a grid; small negative values are
/// clamped to zero, values below `-1e-6` are errors.
pub fn stieltjes_invert(
    u_eval: impl Fn(Complex64) -> Result<Complex64> + Sync,
    x_grid: &[f64],
    eps0: f64,
) -> Result<Vec<f64>> {
    if !(eps0 > 0.0) {
        return precondition("eps0 must be positive");
    }
    x_grid
        .par_iter()
        .map(|&x| {
            let f = -boundary_value(&u_eval, x, eps0)?.im / PI;
            if f < -1e-6 {
                Err(Error::NegativeDensity { x, value: f })
            } else {
                Ok(f.max(0.0))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{sqrt_segment, Atom};
    use approx::assert_abs_diff_eq;

    fn delta() -> MeasureSpec {
        MeasureSpec::atoms(vec![Atom::real(0.0, 1.0)])
    }

    #[test]
    fn safe_radius_examples() {
        assert_abs_diff_eq!(safe_radius(1.0, 0.5).unwrap(), 6.6, epsilon = 1e-12);
        assert_abs_diff_eq!(safe_radius(1.0, 1e-12).unwrap(), 2.2, epsilon = 1e-9);
        assert_abs_diff_eq!(safe_radius(2.0, 0.5).unwrap(), 9.9, epsilon = 1e-12);
        assert!(safe_radius(1.0, 1.0).is_err());
    }

    #[test]
    fn bounds_examples() {
        let rep = verify_bounds(&delta(), 1.0, 3.0, 32).unwrap();
        assert!(rep.passed());
        assert_abs_diff_eq!(rep.min_abs_zc, 1.0, epsilon = 1e-14);
        let pair = MeasureSpec::atoms(vec![Atom::real(-1.0, 0.5), Atom::real(1.0, 0.5)]);
        let rep = verify_bounds(&pair, 1.0, 2.5, 64).unwrap();
        assert!(rep.passed(), "{rep:?}");
        // z = 2.5 is sample 0; |zC| = z^2/(z^2-1)
        assert_abs_diff_eq!(rep.max_abs_zc, 6.25 / 5.25, epsilon = 1e-12);
        assert!(rep.max_abs_zc <= 5.0 / 3.0);
        assert!(rep.min_abs_zc > 2.0 / 9.0);
        assert!(verify_bounds(&pair, 1.0, 1.5, 8).is_err());
    }

    #[test]
    fn bounds_report_json_field_names() {
        let rep = verify_bounds(&delta(), 1.0, 3.0, 8).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in ["radius_R", "min_abs_zC", "max_abs_zC", "min_abs_z2dC", "max_abs_z2dC", "bound_violations"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn univalence_examples() {
        let rep = univalence_check(&delta(), 1.0, 2.5, 64).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.winding.abs(), 1);
        assert_abs_diff_eq!(rep.min_image_modulus, 1.0 / 2.5, epsilon = 1e-14);
        let rep = univalence_check(&MeasureSpec::Arcsine, 1.0, 2.5, 64).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(univalence_check(&delta(), 1.0, 2.0, 64).is_err());
    }

    #[test]
    fn hilbert_examples() {
        for x in [-0.8, -0.2, 0.0, 0.45, 0.9] {
            assert_abs_diff_eq!(hilbert_transform(&MeasureSpec::Semicircle, x).unwrap(), 2.0 * x / PI, epsilon = 1e-15);
            assert_eq!(hilbert_transform(&MeasureSpec::Arcsine, x).unwrap(), 0.0);
        }
        let pair = MeasureSpec::atoms(vec![Atom::real(-1.0, 0.5), Atom::real(1.0, 0.5)]);
        assert_eq!(hilbert_transform(&pair, 0.0).unwrap(), 0.0);
        assert!(matches!(hilbert_transform(&pair, 1.0), Err(Error::Pole { .. })));
        assert_abs_diff_eq!(hilbert_transform(&MeasureSpec::Uniform, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_hilbert_matches_closed_form() {
        // semicircle tabulated on a fine grid
        let n = 4000;
        let xs: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let f: Vec<f64> = xs.iter().map(|x| 2.0 / PI * (1.0 - x * x).max(0.0).sqrt()).collect();
        let grid = MeasureSpec::density_grid(xs, f).unwrap();
        for x in [-0.5, 0.0, 0.3, 0.7005] {
            let h = hilbert_transform(&grid, x).unwrap();
            assert!((h - 2.0 * x / PI).abs() < 2e-4, "{x}: {h}");
        }
        // at a node the log terms cancel
        assert!(hilbert_transform(&grid, 0.5).unwrap().is_finite());
    }

    #[test]
    fn inversion_examples() {
        let semi = |z: Complex64| Ok(2.0 / (z + sqrt_segment(z, -1.0, 1.0)));
        let f = stieltjes_invert(semi, &[0.0], 1e-3).unwrap();
        assert_abs_diff_eq!(f[0], 2.0 / PI, epsilon = 1e-9);
        let arc = |z: Complex64| Ok(sqrt_segment(z, -1.0, 1.0).inv());
        let f = stieltjes_invert(arc, &[0.0], 1e-3).unwrap();
        assert_abs_diff_eq!(f[0], 1.0 / PI, epsilon = 1e-9);
        let atom = |z: Complex64| Ok(z.inv());
        let f = stieltjes_invert(atom, &[-0.5, 0.25, 0.75], 1e-3).unwrap();
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn inversion_recovers_semicircle_density() {
        let xs: Vec<f64> = (0..=180).map(|i| -0.9 + i as f64 / 100.0).collect();
        let f = stieltjes_invert(|z| MeasureSpec::Semicircle.cauchy(z), &xs, 1e-3).unwrap();
        for (x, v) in xs.iter().zip(f) {
            assert!((v - 2.0 / PI * (1.0 - x * x).sqrt()).abs() <= 1e-6);
        }
    }

    #[test]
    fn boundary_values_follow_sign_convention() {
        // C(x + i0) = pi H(x) - i pi f(x)
        for x in [-0.6, 0.1, 0.8] {
            let b = boundary_value(&|z| MeasureSpec::Semicircle.cauchy(z), x, 1e-3).unwrap();
            let h = hilbert_transform(&MeasureSpec::Semicircle, x).unwrap();
            let f = 2.0 / PI * (1.0 - x * x).sqrt();
            assert!((b - Complex64::new(PI * h, -PI * f)).norm() < 1e-6);
            let below = MeasureSpec::Semicircle.cauchy(Complex64::new(x, -1e-9)).unwrap();
            assert!((below - Complex64::new(PI * h, PI * f)).norm() < 1e-6);
        }
    }

    #[test]
    fn inversion_flags_failures() {
        let wild = |z: Complex64| Ok(Complex64::new(0.0, 1.0 / z.im));
        assert!(matches!(stieltjes_invert(wild, &[0.0], 1e-3), Err(Error::InversionFailure { .. })));
        let negative = |_z: Complex64| Ok(Complex64::new(0.0, 1.0));
        assert!(matches!(stieltjes_invert(negative, &[0.0], 1e-3), Err(Error::NegativeDensity { .. })));
    }
}
