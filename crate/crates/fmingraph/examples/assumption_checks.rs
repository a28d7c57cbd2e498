//! Run the curvature pinching checks (A1)-(A7) on the shipped presets and on
//! a deliberate violator (flat space, whose lower pinching curve is
//! identically zero).

use fmingraph::manifold::{euclidean, profile_by_name, ModelManifold};

fn main() -> fmingraph::Result<()> {
    let power = ModelManifold::new(profile_by_name("power(2,0.5)")?, 2, 2100.0, 1e-2)?;
    println!("{}", power.check_assumptions(2048.0)?);

    let expo = ModelManifold::new(profile_by_name("exp(1,0.5)")?, 2, 70.0, 1e-3)?;
    println!("{}", expo.check_assumptions(64.0)?);

    // flat space: b == 0 cannot be bounded below by C3 (1+t)^-Q, so A5 fails
    let flat = ModelManifold::new(euclidean(), 2, 100.0, 1e-2)?;
    let report = flat.check_assumptions(64.0)?;
    let a5 = report.check("A5").unwrap();
    println!("euclidean A5: ok = {}, note: {}", a5.ok, a5.note);
    Ok(())
}
