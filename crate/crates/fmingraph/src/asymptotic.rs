//! The asymptotic Dirichlet problem as an experiment: extend continuous
//! data from the circle at infinity, solve on an exhaustion of balls with
//! warm starts, audit the uniform height bound against the global barrier,
//! check the sandwich inequality against the asymptotic barrier, and
//! measure how the traces attain the boundary data.

use crate::barrier::{AsymptoticBarrier, BarrierSurface, GlobalBarrier};
use crate::drift::DriftFunction;
use crate::error::{Error, Result};
use crate::manifold::{cubic_ramp, ModelManifold};
use crate::solver::{solve_dirichlet_ball, BallSolution, InitialGuess, PolarGrid};

/// Continuous function on the circle at infinity, stored as a uniform
/// piecewise-linear table with wraparound.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    vals: Vec<f64>,
}

impl BoundaryData {
    pub fn from_fn(n: usize, f: &dyn Fn(f64) -> f64) -> BoundaryData {
        assert!(n >= 4);
        let vals = (0..n)
            .map(|j| f(2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        BoundaryData { vals }
    }

    pub fn constant(c: f64) -> BoundaryData {
        BoundaryData { vals: vec![c; 4] }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.vals.len();
        let x = theta.rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
            * n as f64;
        let j = (x.floor() as usize).min(n - 1);
        let t = x - j as f64;
        (1.0 - t) * self.vals[j] + t * self.vals[(j + 1) % n]
    }

    pub fn sup_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// angle of the largest value (default sandwich direction)
    pub fn argmax(&self) -> f64 {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (j, &v) in self.vals.iter().enumerate() {
            if v > best.1 {
                best = (j, v);
            }
        }
        2.0 * std::f64::consts::PI * best.0 as f64 / self.vals.len() as f64
    }
}

/// Extends data from the circle at infinity into the manifold:
/// phi_tilde(r, theta) = ramp(r) phi(theta), with a C^1 monotone ramp that
/// vanishes on [0, 1] and is 1 from r = 2 outward.
pub fn extend_boundary_data(phi: &BoundaryData) -> impl Fn(f64, f64) -> f64 + '_ {
    move |r: f64, theta: f64| cubic_ramp(r - 1.0) * phi.eval(theta)
}

#[derive(Debug, Clone)]
pub struct AsymptoticProblem {
    pub manifold: ModelManifold,
    pub drift: DriftFunction,
    pub phi: BoundaryData,
    /// strictly increasing exhaustion radii
    pub radii: Vec<f64>,
    /// shared radial spacing so core-ball nodes coincide across radii
    pub h_r: f64,
    pub n_theta: usize,
    pub tol: f64,
}

impl AsymptoticProblem {
    fn validate(&self) -> Result<()> {
        if self.radii.len() < 2 || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "exhaustion needs at least two strictly increasing radii".into(),
            ));
        }
        for &r in &self.radii {
            let cells = r / self.h_r;
            if (cells - cells.round()).abs() > 1e-9 {
                return Err(Error::Parameter(format!(
                    "radius {r} is not a multiple of the grid spacing {}",
                    self.h_r
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExhaustionResult {
    pub radii: Vec<f64>,
    pub solutions: Vec<BallSolution>,
    pub sup_norms: Vec<f64>,
    /// Cauchy gaps sup over the core ball of |u_{k+1} - u_k|
    pub gaps: Vec<f64>,
    pub core_radius: f64,
    /// worst (u - barrier) excess over all solves, when a barrier was given
    pub height_excess: Option<f64>,
    pub height_bound_ok: bool,
    pub gaps_monotone: bool,
}

impl ExhaustionResult {
    pub fn final_solution(&self) -> &BallSolution {
        self.solutions.last().unwrap()
    }

    pub fn gaps_csv(&self) -> String {
        let mut out = String::from("k,radius,gap\n");
        for (k, &g) in self.gaps.iter().enumerate() {
            out.push_str(&format!("{},{:.6e},{:.6e}\n", k + 1, self.radii[k + 1], g));
        }
        out
    }

    /// gnuplot script plotting the trace u(0.9 R_k, theta) for each radius
    pub fn gnuplot_script(&self, traces_file: &str) -> String {
        let mut plots = Vec::new();
        for (k, &r) in self.radii.iter().enumerate() {
            plots.push(format!(
                "'{traces_file}' using 1:{} with lines title 'R = {r}'",
                k + 2
            ));
        }
        format!(
            "set xlabel 'theta'\nset ylabel 'u(0.9 R, theta)'\nset key outside\nset datafile separator ','\nplot {}\n",
            plots.join(", \\\n     ")
        )
    }

    /// CSV backing the gnuplot script: theta, one trace column per radius
    pub fn traces_csv(&self) -> String {
        let nt = self.solutions[0].grid.nt;
        let mut out = String::from("theta");
        for &r in &self.radii {
            out.push_str(&format!(",u_at_0.9x{r}"));
        }
        out.push('\n');
        for j in 0..nt {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
            out.push_str(&format!("{theta:.6e}"));
            for sol in &self.solutions {
                let v = sol.value_at(0.9 * sol.grid.r_ball, theta).unwrap_or(f64::NAN);
                out.push_str(&format!(",{v:.6e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Solves the Dirichlet problem on each exhaustion ball with the extended
/// data, warm-starting each solve from the previous one, and audits the
/// uniform height bound |u_k| <= V when a global barrier is supplied.
pub fn run_exhaustion(
    p: &AsymptoticProblem,
    barrier: Option<&GlobalBarrier>,
) -> Result<ExhaustionResult> {
    p.validate()?;
    let ext = extend_boundary_data(&p.phi);
    let core_radius = 0.5 * p.radii[0];
    let mut solutions: Vec<BallSolution> = Vec::new();
    let mut sup_norms = Vec::new();
    let mut gaps = Vec::new();
    let mut height_excess: Option<f64> = barrier.map(|_| f64::NEG_INFINITY);

    for (k, &r_ball) in p.radii.iter().enumerate() {
        let nr = (r_ball / p.h_r).round() as usize;
        let boundary = |theta: f64| ext(r_ball, theta);
        let guess = match solutions.last() {
            None => InitialGuess::Harmonic,
            Some(prev) => {
                // copy the previous ball where grids coincide, extend with
                // the data profile outside it
                let grid = PolarGrid::new(r_ball, nr, p.n_theta)?;
                let mut vals = vec![0.0; grid.storage_len()];
                let nr_prev = prev.grid.nr;
                vals[0] = prev.origin();
                for i in 1..=nr {
                    for j in 0..p.n_theta {
                        let idx = 1 + (i - 1) * p.n_theta + j;
                        vals[idx] = if i <= nr_prev {
                            prev.value(i, j as isize)
                        } else {
                            ext(grid.radius(i), grid.theta(j))
                        };
                    }
                }
                InitialGuess::Values(vals)
            }
        };
        let sol = solve_dirichlet_ball(
            &p.manifold,
            &p.drift,
            r_ball,
            &boundary,
            nr,
            p.n_theta,
            p.tol,
            guess,
        )
        .map_err(|e| {
            Error::NoConvergence(format!("exhaustion ball {k} (R = {r_ball}) failed: {e}"))
        })?;
        sup_norms.push(sol.height_sup());
        if let (Some(v), Some(excess)) = (barrier, height_excess.as_mut()) {
            for i in 0..=nr {
                let bound = v.value(sol.grid.radius(i))?;
                for j in 0..p.n_theta {
                    let u = if i == 0 { sol.origin() } else { sol.value(i, j as isize) };
                    *excess = excess.max(u.abs() - bound);
                    if i == 0 {
                        break;
                    }
                }
            }
        }
        if let Some(prev) = solutions.last() {
            let core_rings = (core_radius / p.h_r).round() as usize;
            let mut gap = (sol.origin() - prev.origin()).abs();
            for i in 1..=core_rings {
                for j in 0..p.n_theta as isize {
                    gap = gap.max((sol.value(i, j) - prev.value(i, j)).abs());
                }
            }
            gaps.push(gap);
        }
        solutions.push(sol);
    }

    let gaps_monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let height_bound_ok = height_excess.map(|e| e <= 0.0).unwrap_or(true);
    Ok(ExhaustionResult {
        radii: p.radii.clone(),
        solutions,
        sup_norms,
        gaps,
        core_radius,
        height_excess,
        height_bound_ok,
        gaps_monotone,
    })
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub theta0: f64,
    pub eps: f64,
    pub r3: f64,
    /// worst slack of u <= phi(theta0) + eps + psi (negative = violation)
    pub upper_slack: f64,
    /// worst slack of u >= phi(theta0) - eps - psi
    pub lower_slack: f64,
    pub nodes_checked: usize,
    pub rows: Vec<(f64, f64, f64, f64, f64)>, // r, theta, u, lower, upper
}

impl SandwichReport {
    pub fn holds_within(&self, slack_budget: f64) -> bool {
        self.upper_slack >= -slack_budget && self.lower_slack >= -slack_budget
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,u,lower,upper\n");
        for (r, th, u, lo, hi) in &self.rows {
            out.push_str(&format!("{r:.6e},{th:.6e},{u:.6e},{lo:.6e},{hi:.6e}\n"));
        }
        out
    }
}

/// Checks phi(theta0) - eps - psi <= u <= phi(theta0) + eps + psi on the
/// final solution's nodes in the cone around theta0 outside the ball of
/// radius psi.r3.
pub fn verify_sandwich(
    result: &ExhaustionResult,
    phi: &BoundaryData,
    theta0: f64,
    eps: f64,
    psi: &AsymptoticBarrier,
) -> Result<SandwichReport> {
    let sol = result.final_solution();
    let target = phi.eval(theta0);
    let cone_half = 3.0 * psi.cutoff.sigma / psi.cutoff.l;
    let mut upper = f64::INFINITY;
    let mut lower = f64::INFINITY;
    let mut rows = Vec::new();
    for i in 1..=sol.grid.nr {
        let r = sol.grid.radius(i);
        if r <= psi.r3 {
            continue;
        }
        for j in 0..sol.grid.nt {
            let theta = sol.grid.theta(j);
            let mut dth = (theta - theta0).rem_euclid(2.0 * std::f64::consts::PI);
            if dth > std::f64::consts::PI {
                dth -= 2.0 * std::f64::consts::PI;
            }
            if dth.abs() > cone_half {
                continue;
            }
            let psi_v = psi.jet(r, dth)?.v;
            let u = sol.value(i, j as isize);
            let hi = target + eps + psi_v;
            let lo = target - eps - psi_v;
            upper = upper.min(hi - u);
            lower = lower.min(u - lo);
            rows.push((r, theta, u, lo, hi));
        }
    }
    if rows.is_empty() {
        return Err(Error::Parameter(format!(
            "no nodes outside r = {} inside the cone; enlarge the final ball",
            psi.r3
        )));
    }
    Ok(SandwichReport {
        theta0,
        eps,
        r3: psi.r3,
        upper_slack: upper,
        lower_slack: lower,
        nodes_checked: rows.len(),
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct AttainmentTable {
    /// (theta, trace at 0.9 R_k for each k, data value)
    pub rows: Vec<(f64, Vec<f64>, f64)>,
    pub radii: Vec<f64>,
    /// max_theta |u(0.9 R_max, theta) - phi(theta)|
    pub score: f64,
    pub scores_per_radius: Vec<f64>,
}

impl AttainmentTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta");
        for &r in &self.radii {
            out.push_str(&format!(",u_at_0.9x{r}"));
        }
        out.push_str(",phi\n");
        for (theta, traces, target) in &self.rows {
            out.push_str(&format!("{theta:.6e}"));
            for v in traces {
                out.push_str(&format!(",{v:.6e}"));
            }
            out.push_str(&format!(",{target:.6e}\n"));
        }
        out
    }
}

/// Trace-vs-data comparison at radius 0.9 R_k for every exhaustion radius.
pub fn boundary_attainment(result: &ExhaustionResult, phi: &BoundaryData) -> AttainmentTable {
    let nt = result.solutions[0].grid.nt;
    let mut rows = Vec::with_capacity(nt);
    let mut scores = vec![0.0f64; result.radii.len()];
    for j in 0..nt {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
        let target = phi.eval(theta);
        let mut traces = Vec::with_capacity(result.radii.len());
        for (k, sol) in result.solutions.iter().enumerate() {
            let v = sol.value_at(0.9 * sol.grid.r_ball, theta).unwrap_or(f64::NAN);
            scores[k] = scores[k].max((v - target).abs());
            traces.push(v);
        }
        rows.push((theta, traces, target));
    }
    AttainmentTable {
        rows,
        radii: result.radii.clone(),
        score: *scores.last().unwrap(),
        scores_per_radius: scores,
    }
}

/// One branch of the non-uniqueness demonstration on the disk B(0, 2).
#[derive(Debug, Clone)]
pub struct NonuniquenessBranch {
    pub label: String,
    pub solution: BallSolution,
    pub origin_value: f64,
    /// sup distance to the analytic candidate (hemispheres, flat disk)
    pub analytic_sup_err: f64,
}

#[derive(Debug, Clone)]
pub struct NonuniquenessReport {
    pub branches: Vec<NonuniquenessBranch>,
    /// sup distances between branch pairs (upper/lower, upper/flat, lower/flat)
    pub pairwise: Vec<(String, String, f64)>,
}

/// Zero boundary data on B(0, 2) in the plane with the self-shrinker drift
/// admits (at least) the upper hemisphere, the lower hemisphere, and the
/// flat disk. Newton started from +bump, -bump and zero converges to the
/// three distinct solutions.
pub fn nonuniqueness_demo(
    m: &ModelManifold,
    nr: usize,
    nt: usize,
    tol: f64,
) -> Result<NonuniquenessReport> {
    let d = DriftFunction::selfshrinker(4.0);
    let analytic: Vec<(String, InitialGuess, Box<dyn Fn(f64) -> f64>)> = vec![
        (
            "upper-hemisphere".into(),
            InitialGuess::Bump(1.5),
            Box::new(|r: f64| (4.0 - r * r).max(0.0).sqrt()),
        ),
        (
            "lower-hemisphere".into(),
            InitialGuess::Bump(-1.5),
            Box::new(|r: f64| -(4.0 - r * r).max(0.0).sqrt()),
        ),
        ("flat-disk".into(), InitialGuess::Zero, Box::new(|_| 0.0)),
    ];
    let mut branches = Vec::new();
    for (label, guess, exact) in analytic {
        let sol = solve_dirichlet_ball(m, &d, 2.0, &|_| 0.0, nr, nt, tol, guess)?;
        let mut err = (sol.origin() - exact(0.0)).abs();
        for i in 1..=nr {
            let e = exact(sol.grid.radius(i));
            for j in 0..nt as isize {
                err = err.max((sol.value(i, j) - e).abs());
            }
        }
        branches.push(NonuniquenessBranch {
            label,
            origin_value: sol.origin(),
            analytic_sup_err: err,
            solution: sol,
        });
    }
    let mut pairwise = Vec::new();
    for a in 0..branches.len() {
        for b in a + 1..branches.len() {
            let (sa, sb) = (&branches[a].solution, &branches[b].solution);
            let mut dist = (sa.origin() - sb.origin()).abs();
            for k in 0..sa.u.len() {
                dist = dist.max((sa.u[k] - sb.u[k]).abs());
            }
            pairwise.push((branches[a].label.clone(), branches[b].label.clone(), dist));
        }
    }
    Ok(NonuniquenessReport { branches, pairwise })
}
