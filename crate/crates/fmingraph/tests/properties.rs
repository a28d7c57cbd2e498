//! Property tests for the pieces with clean mathematical invariants.

use proptest::prelude::*;

use fmingraph::barrier::{
    build_gradient_barrier, build_height_barrier, smoothstep, smoothstep_d1,
};
use fmingraph::drift::DriftFunction;
use fmingraph::manifold::{cubic_ramp, euclidean, ModelManifold};
use fmingraph::solver::{solve_dirichlet_ball, InitialGuess};

proptest! {
    /// |<grad f, nu>| never exceeds the radial bound F = sqrt(m'^2 + r'^2),
    /// whatever the gradient of the graph.
    #[test]
    fn rhs_term_is_dominated_by_the_gradient_bound(
        c in 0.0f64..5.0,
        p in 0.0f64..4.0,
        rho in 0.0f64..50.0,
        ur in -100.0f64..100.0,
        uang in -100.0f64..100.0,
    ) {
        let d = DriftFunction::bounded(c, p);
        let f = d.gradient_bound(rho).unwrap();
        let rhs = d.rhs_term(rho, 0.3, ur, uang);
        prop_assert!(rhs.abs() <= f + 1e-12);
    }

    /// The quintic cutoff profile stays in [0,1] with nonpositive slope.
    #[test]
    fn smoothstep_is_a_monotone_unit_interpolant(x in -2.0f64..3.0) {
        let v = smoothstep(x);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(smoothstep_d1(x) >= 0.0);
        let ramp = cubic_ramp(x);
        prop_assert!((0.0..=1.0).contains(&ramp));
    }

    /// The height-barrier profile h grows with the distance to the boundary
    /// and its bound grows with the drift sup.
    #[test]
    fn height_barrier_monotonicity(
        a in 0.5f64..6.0,
        f1 in 0.0f64..2.0,
        df in 0.01f64..1.0,
        d1 in 0.0f64..1.0,
        dd in 0.01f64..1.0,
    ) {
        let hb = build_height_barrier(a, f1, 0.0).unwrap();
        prop_assert!(hb.h(d1 + dd) > hb.h(d1));
        let hb2 = build_height_barrier(a, f1 + df, 0.0).unwrap();
        prop_assert!(hb2.height_bound() > hb.height_bound());
    }

    /// The collar barrier psi vanishes at the boundary, increases, and its
    /// boundary slope is the advertised eps*K + 1.
    #[test]
    fn gradient_barrier_shape(eps in 0.01f64..0.49, kx in 0.0f64..6.0) {
        let k = ((1.0 - 2.0 * eps) / (eps * eps)).max(1.0) * (1.0 + kx);
        let gb = build_gradient_barrier(eps, k).unwrap();
        prop_assert!(gb.psi(0.0).abs() < 1e-15);
        prop_assert!(gb.psi(0.5) > gb.psi(0.1));
        prop_assert!((gb.boundary_bound() - (eps * k + 1.0)).abs() < 1e-9);
        // slope decreases away from the boundary (concavity)
        prop_assert!(gb.psi_prime(0.3) < gb.psi_prime(0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Discrete maximum principle: with a height-independent drift the
    /// solution stays inside the range of its boundary data.
    #[test]
    fn solutions_respect_the_boundary_range(
        a in -0.4f64..0.4,
        b in -0.4f64..0.4,
        c in -0.5f64..0.5,
    ) {
        let m = ModelManifold::new(euclidean(), 2, 10.0, 1e-3).unwrap();
        let d = DriftFunction::bounded(0.2, 2.0);
        let phi = move |t: f64| a * t.cos() + b * (3.0 * t).sin() + c;
        let sol = solve_dirichlet_ball(&m, &d, 2.0, &phi, 32, 24, 1e-9, InitialGuess::Harmonic)
            .unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..240 {
            let v = phi(j as f64 * std::f64::consts::PI / 120.0);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for &v in &sol.u {
            prop_assert!(v >= lo - 1e-8 && v <= hi + 1e-8);
        }
    }
}
