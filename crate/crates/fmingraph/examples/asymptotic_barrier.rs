//! Cone barrier psi(r,theta) = A (R3^delta r^-delta + h) used to pin the
//! boundary values at infinity. find_r3 searches a radius ladder for the
//! smallest R3 at which psi verifies as a supersolution on the cone shell.

use fmingraph::barrier::{
    build_angular_cutoff, build_asymptotic_psi, delta1, find_r3, verify_supersolution, Region,
    VerifyMode,
};
use fmingraph::manifold::{profile_by_name, ModelManifold};

fn main() -> fmingraph::Result<()> {
    let m = ModelManifold::new(profile_by_name("power(2,0.5)")?, 2, 1100.0, 1e-2)?;
    let (phi1, d1) = delta1(m.profile.c1, m.profile.c4, m.n);
    println!("phi1 = {phi1:.6}, delta1 = {d1:.6}, eps = {}", m.profile.eps);
    let delta = 0.5 * d1.min(m.profile.eps);
    println!("using delta = {delta}");

    let cutoff = build_angular_cutoff(4.0, 1.0, 1.0)?;
    let zero = |_r: f64| Ok(0.0);
    let r3 = find_r3(&m, &zero, 2.0, delta, &cutoff, 500.0, 200, 24)?;
    println!("R3 = {r3}");

    let psi = build_asymptotic_psi(&m, 2.0, delta, r3, cutoff.clone())?;
    let shell = Region::ConeShell {
        r_min: r3,
        r_max: 1000.0,
        theta_max: 3.0 * cutoff.sigma / cutoff.l,
    };
    let report = verify_supersolution(&psi, &zero, &m, shell, 300, 32, VerifyMode::Supersolution)?;
    println!("{report}");

    // margin stability under refinement (a knife-edge R3 would drift)
    let fine = verify_supersolution(&psi, &zero, &m, shell, 600, 64, VerifyMode::Supersolution)?;
    println!(
        "margin 300x32 = {:.6e}, 600x64 = {:.6e}, drift = {:.2}%",
        report.worst_margin,
        fine.worst_margin,
        100.0 * (fine.worst_margin - report.worst_margin).abs() / report.worst_margin.abs()
    );

    // half the found radius is not enough; the verifier reports the failure
    let small = build_asymptotic_psi(&m, 2.0, delta, 0.5 * r3, cutoff.clone())?;
    let small_shell = Region::ConeShell {
        r_min: 0.5 * r3,
        r_max: 1000.0,
        theta_max: 3.0 * cutoff.sigma / cutoff.l,
    };
    let diag = verify_supersolution(&small, &zero, &m, small_shell, 300, 32, VerifyMode::Supersolution)?;
    println!(
        "undersized R3 = {}: pass = {}, worst margin = {:.3e} at r = {:.2}",
        0.5 * r3,
        diag.pass,
        diag.worst_margin,
        diag.worst_r
    );
    Ok(())
}
