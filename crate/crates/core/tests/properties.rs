use num_complex::Complex64;
use proptest::prelude::*;

use dflow_core::hopf::FlowSolution;
use dflow_core::measure::{Atom, Measure, MeasureSpec};
use dflow_core::moments_flow::{evolve_moments, InitialMoments};
use dflow_core::polycore::RootSet;
use dflow_core::rootfind::{derivative_flow, RootFindConfig, RootFindMode};

fn real_roots() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3..25)
}

fn atoms() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0), 1..8)
}

fn measure_from(points: &[(f64, f64, f64)]) -> MeasureSpec {
    let total: f64 = points.iter().map(|p| p.2).sum();
    MeasureSpec::atoms(
        points
            .iter()
            .map(|&(x, y, w)| Atom::new(Complex64::new(x, y), w / total))
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_flow_interlaces(points in real_roots()) {
        let roots = RootSet::from_real(points);
        let cfg = RootFindConfig::with_mode(RootFindMode::RealInterlacing);
        let flow = derivative_flow(&roots, 2, &cfg).unwrap();
        let outer = roots.real_values().unwrap();
        let inner = flow[0].real_values().unwrap();
        prop_assert_eq!(inner.len() + 1, outer.len());
        for (i, y) in inner.iter().enumerate() {
            prop_assert!(outer[i] <= *y && *y <= outer[i + 1]);
        }
    }

    #[test]
    fn general_flow_stays_in_hull_disk(points in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..10)) {
        // zeros of P' lie in the convex hull, hence in the disk holding the zeros
        let roots = RootSet::from_points(points.iter().map(|&(x, y)| Complex64::new(x, y)));
        let flow = derivative_flow(&roots, 1, &RootFindConfig::default()).unwrap();
        let c: Complex64 = roots.expanded().iter().sum::<Complex64>() / roots.cardinality() as f64;
        let reach = roots.expanded().iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
        for z in flow[0].expanded() {
            prop_assert!((z - c).norm() <= reach * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn characteristics_are_consistent(points in atoms(), t in 0.05f64..0.95) {
        let m = measure_from(&points);
        let sol = FlowSolution::from_measure(m.clone());
        let z = Complex64::new(6.0, 2.5);
        let ch = sol.solve(z, t).unwrap();
        let u0 = m.cauchy(ch.s).unwrap();
        prop_assert!((z - ch.s + t / u0).norm() <= 1e-10 * z.norm());
        // mass of the flowing measure is 1 - t
        let far = Complex64::new(1e7, -3e6);
        let w = sol.solve_u(far, t).unwrap();
        prop_assert!((far * w - (1.0 - t)).norm() < 1e-5);
    }

    #[test]
    fn moment_recursion_is_solved(seq in prop::collection::vec(-3.0f64..3.0, 6)) {
        let mut m0 = vec![Complex64::new(1.0, 0.0)];
        m0.extend(seq.iter().map(|&x| Complex64::new(x, 0.5 * x)));
        let mp = evolve_moments(&InitialMoments::Float(m0), 6).unwrap();
        // residual terms are products of two coefficients
        let big = (0..=6)
            .flat_map(|k| mp.t_coefficients(k).unwrap())
            .map(|c| c.to_complex().norm())
            .fold(1.0, f64::max);
        let scale = big * big;
        for r in mp.recursion_residual() {
            prop_assert!(r < 1e-12 * scale, "residual {r} at scale {scale}");
        }
    }

    #[test]
    fn inverse_undoes_solution(points in atoms(), t in 0.05f64..0.9) {
        let sol = FlowSolution::from_measure(measure_from(&points));
        let z = Complex64::new(-5.0, 4.0);
        let w = sol.solve_u(z, t).unwrap();
        let back = sol.inverse_u(w, t).unwrap();
        prop_assert!((back - z).norm() < 1e-8 * z.norm());
    }
}
