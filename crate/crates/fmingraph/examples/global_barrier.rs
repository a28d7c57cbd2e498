//! Build the global radial supersolution V = H + phi_sup + int_r^inf g and
//! verify the differential inequality pointwise out to r = 1000. V dominates
//! any solution with boundary data below phi_sup and drift below its bound.

use fmingraph::barrier::{
    a0_by_name, build_global_v, verify_supersolution, Region, VerifyMode,
};
use fmingraph::manifold::{profile_by_name, ModelManifold};

fn main() -> fmingraph::Result<()> {
    let m = ModelManifold::new(profile_by_name("power(2,0.5)")?, 2, 1100.0, 1e-2)?;
    let a0 = a0_by_name("powerlog(2)")?;
    let v = build_global_v(&m, a0, 1.0, 1050.0)?;

    println!("V(0)    = {:.9}", v.value(0.0)?);
    println!("V(10)   = {:.9}", v.value(10.0)?);
    println!("V(1000) = {:.9}", v.value(1000.0)?);
    println!("limit constant H = {:.6e}", v.h_const);
    println!("H ladder converged: {} (gap {:.3e})", v.h_converged, v.h_gap);
    println!("V(1000) - phi_sup = {:.6e}  (slow log-weight tail)", v.value(1000.0)? - 1.0);

    // drifts up to half the admissible bound keep the margin strictly positive
    let f_half = |r: f64| Ok(0.5 * v.drift_bound(r)?);
    let report = verify_supersolution(
        &v,
        &f_half,
        &m,
        Region::Annulus { r_min: 0.0, r_max: 1000.0 },
        800,
        1,
        VerifyMode::Supersolution,
    )?;
    println!("\n{report}");

    // -V is the matching subsolution; the margins mirror exactly
    let sub = verify_supersolution(
        &v,
        &f_half,
        &m,
        Region::Annulus { r_min: 0.0, r_max: 1000.0 },
        800,
        1,
        VerifyMode::Subsolution,
    )?;
    println!("{sub}");
    Ok(())
}
