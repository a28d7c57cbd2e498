//! The classical non-uniqueness picture on the Euclidean disk of radius 2
//! with the self-shrinker drift f = |x|^2/4 and zero boundary data: the upper
//! hemisphere, the lower hemisphere, and the flat disk all solve the same
//! boundary value problem. Different initial guesses select different
//! solutions.

use fmingraph::asymptotic::nonuniqueness_demo;
use fmingraph::manifold::{euclidean, ModelManifold};

fn main() -> fmingraph::Result<()> {
    let m = ModelManifold::new(euclidean(), 2, 10.0, 1e-3)?;
    let rep = nonuniqueness_demo(&m, 128, 64, 1e-10)?;

    for b in &rep.branches {
        println!(
            "{:<17} u(o) = {:+.6}  sup error vs analytic = {:.3e}  ({} iters)",
            b.label, b.origin_value, b.analytic_sup_err, b.solution.iterations
        );
    }
    for (a, b, dist) in &rep.pairwise {
        println!("sup distance {a} / {b} = {dist:.4}");
    }
    Ok(())
}
