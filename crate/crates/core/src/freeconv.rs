//! R-transforms and fractional free additive convolution.
//!
//! `R(C(z)) = z - 1/C(z)`, and `mu^{boxplus s}` has R-transform `s R`. The Hopf
//! flow realizes this: `C` of `mu_0^{boxplus 1/(1-t)}` at `z` is
//! `u((1 - t) z, t)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::bound_envelopes;
use crate::error::{precondition, Error, Result};
use crate::hopf::{invert_transform, FlowSolution, SolverConfig};
use crate::measure::{circle_points, compare_on_circle, Atom, EmpiricalMeasure, Measure};
use crate::polycore::RootSet;

/// Order up to which free cumulants are computed.
pub const CUMULANT_ORDER: usize = 16;

/// Radius `2.5 r` outside which the transform is univalent, and the disk of
/// `w` its image is guaranteed to cover, shrunk by 0.9.
pub fn r_transform_trust_radius(m: &dyn Measure) -> f64 {
    let r = m.support_radius().max(1e-12);
    let outer = 2.5 * r;
    let env = bound_envelopes(r, outer);
    0.9 * m.total_mass() * env[0] / outer
}

/// `R(w) = C^{-1}(w) - 1/w`, inverting by Newton from `1/w`; at `w = 0` the
/// mean.
pub fn r_transform(m: &dyn Measure, w: Complex64) -> Result<Complex64> {
    let mass = m.total_mass();
    if w == Complex64::new(0.0, 0.0) {
        return Ok(m.moments(1)[1] / mass);
    }
    let trust = r_transform_trust_radius(m);
    if w.norm() >= trust {
        return precondition(format!("|w| = {} outside the inversion disk of radius {trust}", w.norm()));
    }
    let eval = |z: Complex64| Ok((m.cauchy(z)?, m.cauchy_derivative(z)?));
    let floor = m.support_radius().max(1e-3);
    let z = invert_transform(&eval, w, mass / w, floor, &SolverConfig::default())?;
    Ok(z - mass / w)
}

/// Free cumulants `k_1..k_K` from moments `m_0 = 1, m_1..m_K` by
/// `m_n = sum_s k_s [x^(n-s)] M(x)^s`, `M(x) = sum m_i x^i`.
pub fn free_cumulants(moments: &[Complex64]) -> Result<Vec<Complex64>> {
    let order = moments.len().saturating_sub(1);
    if order == 0 || moments[0] != Complex64::new(1.0, 0.0) {
        return precondition("free cumulants need m_0 = 1 and at least one more moment");
    }
    // powers[s] holds M(x)^s truncated to degree order
    let mut powers: Vec<Vec<Complex64>> = vec![{
        let mut one = vec![Complex64::new(0.0, 0.0); order + 1];
        one[0] = Complex64::new(1.0, 0.0);
        one
    }];
    for s in 1..=order {
        let prev = &powers[s - 1];
        let mut next = vec![Complex64::new(0.0, 0.0); order + 1];
        for (i, a) in prev.iter().enumerate() {
            for (j, b) in moments.iter().enumerate().take(order + 1 - i) {
                next[i + j] += a * b;
            }
        }
        powers.push(next);
    }
    let mut kappa = vec![Complex64::new(0.0, 0.0); order + 1];
    for n in 1..=order {
        let known: Complex64 = (1..n).map(|s| kappa[s] * powers[s][n - s]).sum();
        kappa[n] = moments[n] - known;
    }
    Ok(kappa[1..].to_vec())
}

/// Truncated series `sum_n k_{n+1} w^n`.
pub fn r_series(cumulants: &[Complex64], w: Complex64) -> Complex64 {
    cumulants.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * w + k)
}

/// Cauchy transform of `mu_0^{boxplus 1/(1-t)}` at `z`, i.e. `u((1-t) z, t)`.
pub fn fractional_convolution_cauchy(sol: &FlowSolution, t: f64, z: Complex64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&t) {
        return precondition(format!("time {t} outside [0, 1)"));
    }
    sol.solve_u((1.0 - t) * z, t)
}

/// R-transform of `mu_0^{boxplus 1/(1-t)}` by inverting
/// `z -> u((1-t) z, t)` directly.
pub fn fractional_r_transform(sol: &FlowSolution, t: f64, w: Complex64) -> Result<Complex64> {
    if w == Complex64::new(0.0, 0.0) {
        return precondition("w must be nonzero");
    }
    let eval = |z: Complex64| {
        let (u, du) = sol.solve_u_z((1.0 - t) * z, t)?;
        Ok((u, du * (1.0 - t)))
    };
    let floor = (sol.support_radius() / (1.0 - t)).max(1e-3);
    let z = invert_transform(&eval, w, w.inv(), floor, &SolverConfig::default())?;
    Ok(z - w.inv())
}

/// Zeros of `Q_{n,k}((1 - t) x)` with weight `1/(n - k)` each, `t = k/n`.
pub fn rescaled_counting_measure(roots: &RootSet, n: usize, k: usize) -> Result<EmpiricalMeasure> {
    if k >= n {
        return precondition("need k < n");
    }
    if roots.cardinality() != n - k {
        return precondition(format!("expected {} zeros, got {}", n - k, roots.cardinality()));
    }
    let t = k as f64 / n as f64;
    let w = 1.0 / (n - k) as f64;
    EmpiricalMeasure::new(
        roots
            .distinct()
            .iter()
            .map(|r| Atom::new(r.z / (1.0 - t), w * r.multiplicity as f64))
            .collect(),
    )
}

/// Sup distance on `|z| = radius` between the rescaled zero-counting measure
/// of `Q_{n,k}` and the fractional convolution power predicted by the flow.
pub fn verify_steinerberger(
    roots: &RootSet,
    n: usize,
    k: usize,
    sol: &FlowSolution,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    let t = k as f64 / n as f64;
    let empirical = rescaled_counting_measure(roots, n, k)?;
    let reach = empirical.support_radius();
    if !(radius > reach) {
        return precondition(format!("radius {radius} does not exceed support radius {reach}"));
    }
    compare_on_circle(
        |z| empirical.cauchy(z),
        |z| fractional_convolution_cauchy(sol, t, z),
        radius,
        samples,
    )
}

/// Convergence record of the convolution identity over several degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub n: usize,
    pub k: usize,
    pub error: f64,
}

/// `verify_steinerberger` over several `(n, k, zeros of Q_{n,k})` in parallel.
pub fn verify_sequence(
    families: &[(usize, usize, RootSet)],
    sol: &FlowSolution,
    radius: f64,
    samples: usize,
) -> Result<Vec<ConvolutionCheck>> {
    families
        .par_iter()
        .map(|(n, k, roots)| {
            Ok(ConvolutionCheck {
                n: *n,
                k: *k,
                error: verify_steinerberger(roots, *n, *k, sol, radius, samples)?,
            })
        })
        .collect()
}

/// Largest `|R_t(w) - R_0(w)/(1 - t)|` over `|w| = radius`.
pub fn r_linearity_error(sol: &FlowSolution, t: f64, radius: f64, samples: usize) -> Result<f64> {
    let ws = circle_points(radius, samples);
    ws.par_iter()
        .map(|&w| {
            let lhs = fractional_r_transform(sol, t, w)?;
            let rhs = r_transform(sol.initial(), w)? / (1.0 - t);
            Ok((lhs - rhs).norm())
        })
        .try_reduce(|| 0.0, |a, b| Ok::<f64, Error>(a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{sqrt_segment, MeasureSpec};
    use crate::rootfind::{chebyshev_t_recurrence, derivative_flow, tridiagonal_orthogonal_roots, RootFindConfig, RootFindMode};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn point_mass_r_transform_is_constant() {
        let m = MeasureSpec::atoms(vec![Atom::real(0.7, 1.0)]);
        for w in [c(0.05, 0.0), c(0.01, -0.03), c(0.0, 0.0)] {
            assert!((r_transform(&m, w).unwrap() - 0.7).norm() < 1e-12);
        }
    }

    #[test]
    fn semicircle_r_transform() {
        let m = MeasureSpec::Semicircle;
        for w in [c(0.05, 0.02), c(-0.03, 0.01)] {
            assert!((r_transform(&m, w).unwrap() - w / 4.0).norm() < 1e-12);
        }
        let kappa = free_cumulants(&m.moments(CUMULANT_ORDER)).unwrap();
        assert!((kappa[1] - 0.25).norm() < 1e-14);
        assert!(kappa.iter().enumerate().filter(|(i, _)| *i != 1).all(|(_, k)| k.norm() < 1e-12));
    }

    #[test]
    fn two_point_r_transform() {
        let m = MeasureSpec::atoms(vec![Atom::real(-1.0, 0.5), Atom::real(1.0, 0.5)]);
        let w = c(0.04, 0.03);
        let want = ((1.0 + 4.0 * w * w).sqrt() - 1.0) / (2.0 * w);
        assert!((r_transform(&m, w).unwrap() - want).norm() < 1e-12);
        let kappa = free_cumulants(&m.moments(CUMULANT_ORDER)).unwrap();
        assert!((r_series(&kappa, w) - want).norm() < 1e-12);
        assert!(r_transform(&m, c(10.0, 0.0)).is_err());
    }

    #[test]
    fn cumulants_of_marchenko_pastur_are_one() {
        let kappa = free_cumulants(&MeasureSpec::MarchenkoPastur.moments(10)).unwrap();
        for k in kappa {
            assert!((k - 1.0).norm() < 1e-9);
        }
        assert!(free_cumulants(&[c(2.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn convolution_examples() {
        let delta = FlowSolution::from_measure(MeasureSpec::atoms(vec![Atom::real(0.0, 1.0)]));
        let semi = FlowSolution::from_measure(MeasureSpec::Semicircle);
        let z = c(1.7, 0.9);
        for t in [0.0, 0.3, 0.6] {
            assert!((fractional_convolution_cauchy(&delta, t, z).unwrap() - z.inv()).norm() < 1e-12);
            // semicircle of variance 1/(4(1-t)): radius 1/sqrt(1-t)
            let a = 1.0 / (1.0f64 - t).sqrt();
            let want = 2.0 / (z + sqrt_segment(z, -a, a));
            let got = fractional_convolution_cauchy(&semi, t, z).unwrap();
            assert!((got - want).norm() < 1e-10, "{t}: {got} vs {want}");
        }
    }

    #[test]
    fn r_linearity_under_flow() {
        for spec in [MeasureSpec::Arcsine, MeasureSpec::Uniform] {
            let sol = FlowSolution::from_measure(spec);
            for t in [0.25, 0.6] {
                assert!(r_linearity_error(&sol, t, 0.03, 12).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let base = FlowSolution::from_measure(MeasureSpec::atoms(vec![Atom::real(-0.5, 0.3), Atom::real(0.4, 0.7)]));
        let shift = 0.8;
        let moved = FlowSolution::from_measure(MeasureSpec::atoms(vec![
            Atom::real(-0.5 + shift, 0.3),
            Atom::real(0.4 + shift, 0.7),
        ]));
        for z in [c(2.0, 1.0), c(0.1, 0.6)] {
            let a = moved.solve_u(z, 0.5).unwrap();
            let b = base.solve_u(z - shift, 0.5).unwrap();
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn chebyshev_convolution_converges() {
        let sol = FlowSolution::from_measure(MeasureSpec::Arcsine);
        let cfg = RootFindConfig::with_mode(RootFindMode::RealInterlacing);
        let mut errors = Vec::new();
        for n in [32, 64] {
            let (a, b) = chebyshev_t_recurrence(n);
            let zeros = RootSet::from_real(tridiagonal_orthogonal_roots(&a, &b, n).unwrap());
            let flow = derivative_flow(&zeros, n / 2, &cfg).unwrap();
            errors.push(verify_steinerberger(&flow[n / 2 - 1], n, n / 2, &sol, 4.0, 64).unwrap());
        }
        assert!(errors[1] < errors[0]);
        assert!(errors[1] < 0.05);
    }

    #[test]
    fn convolution_at_time_zero() {
        let sol = FlowSolution::from_measure(MeasureSpec::Arcsine);
        let n = 40;
        let (a, b) = chebyshev_t_recurrence(n);
        let zeros = RootSet::from_real(tridiagonal_orthogonal_roots(&a, &b, n).unwrap());
        let err = verify_steinerberger(&zeros, n, 0, &sol, 4.0, 64).unwrap();
        let direct = crate::measure::compare_cauchy(&EmpiricalMeasure::from_roots(&zeros, n), &MeasureSpec::Arcsine, 4.0, 64).unwrap();
        assert!((err - direct).abs() < 1e-15);
        assert!(rescaled_counting_measure(&zeros, n, n).is_err());
    }
}
