//! Decay conditions a split drift must satisfy for the asymptotic problem:
//! (f1) F below both the weighted-barrier branch and the curvature branch,
//! (f2) the scaled ratio F f_a r^{1+eps} / f_a' vanishing at infinity.
//! Shipped fixtures pass; two violators fail with the expected diagnostics.

use fmingraph::barrier::{a0_by_name, build_g};
use fmingraph::drift::{check_f2, drift_condition_report, DriftFunction};
use fmingraph::manifold::{profile_by_name, ModelManifold};

fn main() -> fmingraph::Result<()> {
    let m = ModelManifold::new(profile_by_name("power(2,0.5)")?, 2, 1100.0, 1e-2)?;
    let a0 = a0_by_name("powerlog(2)")?;
    let g = build_g(&m, a0.as_ref(), 1050.0)?;

    for name in ["zero", "bounded(0.01,3)"] {
        let d = DriftFunction::by_name(name)?;
        let rep = drift_condition_report(&d, &m, a0.as_ref(), &g, 0.25, 1000.0)?;
        println!("{rep}");
    }

    // violator 1: F = 2 (n-1) f_a'/f_a exceeds the curvature branch everywhere
    let nm1 = m.n as f64 - 1.0;
    let fa = m.fa.clone();
    let too_big = DriftFunction::from_radial_bound("2x-curvature", move |r| {
        if r == 0.0 { 1.0 } else { 2.0 * nm1 * fa.ratio(r).unwrap_or(0.0) }
    });
    let rep = drift_condition_report(&too_big, &m, a0.as_ref(), &g, 0.25, 1000.0)?;
    println!(
        "violator {}: f1 ok = {}, worst margin = {:.3e}",
        too_big.name, rep.f1_ok, rep.f1_margin
    );

    // violator 2: F ~ 1/r on the hyperbolic model makes Psi grow like r^eps
    let hyp = ModelManifold::new(profile_by_name("hyperbolic(1)")?, 2, 600.0, 1e-2)?;
    let slow = DriftFunction::from_radial_bound("1/r", |r| if r == 0.0 { 1.0 } else { 1.0 / r });
    let (f2_ok, trend) = check_f2(&slow, &hyp, 0.5, 512.0)?;
    println!(
        "violator {}: f2 ok = {}, Psi(64) = {:.3e} -> Psi(512) = {:.3e} (growing)",
        slow.name,
        f2_ok,
        trend.iter().find(|p| p.r >= 64.0).unwrap().psi,
        trend.last().unwrap().psi
    );
    Ok(())
}
