//! Rotationally symmetric problems reduce to a one-dimensional two-point
//! boundary value problem. The self-shrinker drift depends on the graph
//! height, so even constant boundary data bends the profile; solve both ways
//! and compare.

use fmingraph::drift::DriftFunction;
use fmingraph::manifold::{euclidean, ModelManifold};
use fmingraph::solver::{solve_dirichlet_ball, solve_radial, InitialGuess};

fn main() -> fmingraph::Result<()> {
    let m = ModelManifold::new(euclidean(), 2, 10.0, 1e-3)?;
    let d = DriftFunction::selfshrinker(4.0);
    let r_ball = 1.5;

    let radial = solve_radial(&m, &d, r_ball, 0.5, 256, 1e-10)?;
    let full = solve_dirichlet_ball(
        &m,
        &d,
        r_ball,
        &|_theta| 0.5,
        256,
        16,
        1e-10,
        InitialGuess::Zero,
    )?;

    println!("r      radial u       2-D u          diff");
    let mut worst = 0.0f64;
    for i in [0, 32, 64, 128, 192, 255] {
        let r = r_ball * i as f64 / 256.0;
        let ur = radial.value_at(r)?;
        let u2 = full.value_at(r, 0.3)?;
        worst = worst.max((ur - u2).abs());
        println!("{r:6.3}  {ur:+.10}  {u2:+.10}  {:.2e}", (ur - u2).abs());
    }
    println!("\nmax |radial - 2D| over table: {worst:.3e}");
    println!("max theta-spread of the 2-D solution: {:.3e}", {
        let mut s = 0.0f64;
        for i in 1..=255 {
            s = s.max(full.ring_spread(i));
        }
        s
    });
    Ok(())
}
