//! Asymptotic Dirichlet problem by exhaustion: solve on balls of doubling
//! radius with the extended boundary data, watch the solutions converge on a
//! fixed core ball, and squeeze the final solution between the cone barriers.

use fmingraph::asymptotic::{
    boundary_attainment, run_exhaustion, verify_sandwich, AsymptoticProblem, BoundaryData,
};
use fmingraph::barrier::{
    a0_by_name, build_angular_cutoff, build_asymptotic_psi, build_global_v, find_r3,
};
use fmingraph::drift::DriftFunction;
use fmingraph::manifold::{profile_by_name, ModelManifold};

fn main() -> fmingraph::Result<()> {
    let m = ModelManifold::new(profile_by_name("power(2,0.5)")?, 2, 150.0, 1e-2)?;
    let phi = BoundaryData::from_fn(512, &|theta: f64| theta.cos());
    let problem = AsymptoticProblem {
        manifold: m.clone(),
        drift: DriftFunction::zero(),
        phi: phi.clone(),
        radii: vec![4.0, 8.0, 16.0, 32.0, 64.0],
        h_r: 0.0625,
        n_theta: 64,
        tol: 1e-10,
    };

    let a0 = a0_by_name("powerlog(2)")?;
    let v = build_global_v(&m, a0, phi.sup_abs(), 140.0)?;
    let result = run_exhaustion(&problem, Some(&v))?;

    println!("k  radius  gap on core ball");
    for (k, g) in result.gaps.iter().enumerate() {
        println!("{}  {:6.1}  {:.6e}", k + 1, result.radii[k + 1], g);
    }
    println!("gaps monotone: {}", result.gaps_monotone);
    println!(
        "|u| <= V everywhere: {} (worst excess {:?})",
        result.height_bound_ok, result.height_excess
    );

    let att = boundary_attainment(&result, &phi);
    println!("attainment score at 0.9 R: {:.6e}", att.score);
    for (r, s) in result.radii.iter().zip(&att.scores_per_radius) {
        println!("  R = {r:6.1}: max |u(0.9R, theta) - phi(theta)| = {s:.6e}");
    }

    // squeeze at the data's maximum point
    let cutoff = build_angular_cutoff(4.0, 1.0, 1.0)?;
    let zero = |_r: f64| Ok(0.0);
    let r3 = find_r3(&m, &zero, 2.0 * phi.sup_abs(), 0.0625, &cutoff, 60.0, 200, 24)?;
    let psi = build_asymptotic_psi(&m, 2.0 * phi.sup_abs(), 0.0625, r3, cutoff)?;
    let sandwich = verify_sandwich(&result, &phi, 0.0, 0.1, &psi)?;
    println!(
        "sandwich at theta0 = 0, eps = 0.1: R3 = {r3:.2}, {} nodes, slacks ({:+.4e}, {:+.4e}), holds: {}",
        sandwich.nodes_checked,
        sandwich.lower_slack,
        sandwich.upper_slack,
        sandwich.holds_within(1e-9)
    );
    Ok(())
}
