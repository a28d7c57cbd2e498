//! Experiment orchestration: dispatches a parsed config to the module
//! operations, writes CSV artifacts and a manifest, and reports a process
//! exit status (0 = pass, 2 = a verification check failed).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::asymptotic::{
    boundary_attainment, nonuniqueness_demo, run_exhaustion, verify_sandwich, AsymptoticProblem,
};
use crate::barrier::{
    build_angular_cutoff, build_asymptotic_psi, build_global_v, build_height_barrier,
    build_gradient_barrier, find_r3, gradient_barrier_params, a0_by_name, Region, VerifyMode,
    verify_supersolution,
};
use crate::config::{boundary_by_name, guess_by_name, to_manifest, ExperimentConfig, ExperimentKind};
use crate::drift::{drift_condition_report, DriftFunction};
use crate::error::{Error, Result};
use crate::manifold::{profile_by_name, ModelManifold};
use crate::solver::solve_dirichlet_ball;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAIL: i32 = 2;

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_manifest(cfg: &ExperimentConfig, raw_input: &str) -> Result<()> {
    let mut text = to_manifest(cfg);
    let hash = Sha256::digest(raw_input.as_bytes());
    let _ = write!(text, "\n# input-sha256 = {hash:x}\n");
    write_artifact(&cfg.out_dir, "manifest.txt", &text)
}

fn build_manifold(cfg: &ExperimentConfig) -> Result<ModelManifold> {
    let profile = profile_by_name(&cfg.manifold_preset)?;
    ModelManifold::new(profile, cfg.dimension, cfg.r_max, cfg.jacobi_step)
}

/// Runs the configured experiment; `raw_input` is the original config text
/// (hashed into the manifest). Returns the process exit status.
pub fn run(cfg: &ExperimentConfig, raw_input: &str) -> Result<i32> {
    write_manifest(cfg, raw_input)?;
    match cfg.kind {
        ExperimentKind::Jacobi => run_jacobi(cfg),
        ExperimentKind::Assumptions => run_assumptions(cfg),
        ExperimentKind::BarrierVerify => run_barrier_verify(cfg),
        ExperimentKind::SolveBall => run_solve_ball(cfg),
        ExperimentKind::Exhaustion => run_exhaustion_experiment(cfg),
        ExperimentKind::Nonuniqueness => run_nonuniqueness(cfg),
    }
}

fn run_jacobi(cfg: &ExperimentConfig) -> Result<i32> {
    let m = build_manifold(cfg)?;
    let stride = (m.fa.len() / 4000).max(1);
    write_artifact(&cfg.out_dir, "jacobi_a.csv", &m.fa.to_csv(stride))?;
    write_artifact(&cfg.out_dir, "jacobi_b.csv", &m.fb.to_csv(stride))?;
    let mut report = format!(
        "jacobi integration: preset {}, r_max {}, step {}\n",
        cfg.manifold_preset, cfg.r_max, cfg.jacobi_step
    );
    if let Some(r) = m.fa.switched_to_log_at() {
        let _ = writeln!(report, "f_a switched to log-space integration at r = {r}");
    }
    let _ = writeln!(
        report,
        "f_a({}) = {:.12e} (log {:.6e})",
        m.r_max(),
        m.fa.f(m.r_max()).unwrap_or(f64::INFINITY),
        m.fa.log_f(m.r_max())?
    );
    write_artifact(&cfg.out_dir, "report.txt", &report)?;
    Ok(EXIT_PASS)
}

fn run_assumptions(cfg: &ExperimentConfig) -> Result<i32> {
    let m = build_manifold(cfg)?;
    let d = DriftFunction::by_name(&cfg.drift_preset)?;
    let a0 = a0_by_name(&cfg.a0_preset)?;
    let r_probe = cfg.r_probe.min(0.95 * m.r_max());
    let assumptions = m.check_assumptions(r_probe)?;
    let g = crate::barrier::build_g(&m, a0.as_ref(), r_probe)?;
    let drift_rep = drift_condition_report(&d, &m, a0.as_ref(), &g, cfg.eps_sandwich, r_probe)?;
    write_artifact(&cfg.out_dir, "assumptions.csv", &assumptions.to_csv())?;
    write_artifact(&cfg.out_dir, "drift_conditions.csv", &drift_rep.to_csv())?;
    let report = format!("{assumptions}\n{drift_rep}");
    write_artifact(&cfg.out_dir, "report.txt", &report)?;
    let ok = assumptions.all_pass() && drift_rep.f1_ok && drift_rep.f2_ok;
    Ok(if ok { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

fn run_barrier_verify(cfg: &ExperimentConfig) -> Result<i32> {
    let m = build_manifold(cfg)?;
    let a0 = a0_by_name(&cfg.a0_preset)?;
    let r_probe = cfg.r_probe.min(0.95 * m.r_max());
    let phi = boundary_by_name(&cfg.boundary)?;
    let v = build_global_v(&m, a0, phi.sup_abs(), r_probe)?;
    let factor = cfg.drift_factor;
    let vb = v.clone();
    let v_report = verify_supersolution(
        &v,
        &move |r| Ok(factor * vb.drift_bound(r)?),
        &m,
        Region::Annulus { r_min: 0.0, r_max: r_probe },
        cfg.nr.max(500),
        1,
        VerifyMode::Supersolution,
    )?;
    write_artifact(&cfg.out_dir, "v_barrier.csv", &v_report.to_csv())?;

    let d = DriftFunction::by_name(&cfg.drift_preset)?;
    let cutoff = build_angular_cutoff(cfg.cone_l, cfg.r1, cfg.sigma)?;
    let psi_outcome = find_r3(
        &m,
        &|r| d.gradient_bound(r),
        cfg.amplitude,
        cfg.delta,
        &cutoff,
        r_probe,
        cfg.nr.max(200),
        cfg.nt.max(24),
    );
    let mut report = format!("{v_report}");
    let mut pass = v_report.pass;
    match psi_outcome {
        Ok(r3) => {
            let psi = build_asymptotic_psi(&m, cfg.amplitude, cfg.delta, r3, cutoff.clone())?;
            let psi_report = verify_supersolution(
                &psi,
                &|r| d.gradient_bound(r),
                &m,
                Region::ConeShell {
                    r_min: r3,
                    r_max: r_probe,
                    theta_max: 3.0 * cutoff.sigma / cutoff.l,
                },
                cfg.nr.max(200),
                cfg.nt.max(24),
                VerifyMode::Supersolution,
            )?;
            write_artifact(&cfg.out_dir, "psi_barrier.csv", &psi_report.to_csv())?;
            let _ = writeln!(report, "asymptotic barrier radius R3 = {r3}");
            let _ = write!(report, "{psi_report}");
            pass = pass && psi_report.pass;
        }
        Err(e) => {
            let _ = writeln!(report, "asymptotic barrier search failed: {e}");
            pass = false;
        }
    }
    let _ = writeln!(
        report,
        "V limit constant H = {:.6e} (truncation gap {:.3e}, converged: {})",
        v.h_const, v.h_gap, v.h_converged
    );
    write_artifact(&cfg.out_dir, "report.txt", &report)?;
    Ok(if pass { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

fn run_solve_ball(cfg: &ExperimentConfig) -> Result<i32> {
    let m = build_manifold(cfg)?;
    let d = DriftFunction::by_name(&cfg.drift_preset)?;
    let r = cfg.solve_radius;
    if !cfg.allow_unsolvable && !crate::drift::check_ball_solvability(&d, &m, r)? {
        // find the first radius where the solvability threshold fails
        let mut failing = r;
        for k in 1..=512 {
            let rr = r * k as f64 / 512.0;
            if d.gradient_bound(rr)? > m.sphere_mean_curvature(rr)? {
                failing = rr;
                break;
            }
        }
        return Err(Error::BallSolvability {
            radius: failing,
            f_value: d.gradient_bound(failing)?,
            bound: m.sphere_mean_curvature(failing)?,
        });
    }
    let phi = boundary_by_name(&cfg.boundary)?;
    let sol = solve_dirichlet_ball(
        &m,
        &d,
        r,
        &|th| phi.eval(th),
        cfg.nr,
        cfg.nt,
        cfg.tol,
        guess_by_name(&cfg.guess),
    )?;
    write_artifact(&cfg.out_dir, "solution.csv", &sol.to_csv())?;

    // height estimate audit: sup |u| <= sup |phi| + h(A)
    let f_sup = (0..=256)
        .map(|k| d.gradient_bound(r * k as f64 / 256.0))
        .try_fold(0.0f64, |acc, v| v.map(|x| acc.max(x)))?;
    let hb = build_height_barrier(2.0 * r, f_sup, phi.sup_abs())?;
    let height_bound = phi.sup_abs() + hb.height_bound();
    let height_ok = sol.height_sup() <= height_bound + 10.0 * cfg.tol;

    // boundary gradient audit: ring gradient <= psi'(0) + sup |grad phi~|
    let nt = cfg.nt;
    let dtheta = 2.0 * std::f64::consts::PI / nt as f64;
    let mut phi_grad = 0.0f64;
    let mut phi_c2 = phi.sup_abs();
    let f_bdry = m.fa.f(r)?;
    for j in 0..nt {
        let t = j as f64 * dtheta;
        let d1 = (phi.eval(t + dtheta) - phi.eval(t - dtheta)) / (2.0 * dtheta);
        let d2 = (phi.eval(t + dtheta) - 2.0 * phi.eval(t) + phi.eval(t - dtheta))
            / (dtheta * dtheta);
        phi_grad = phi_grad.max(d1.abs() / f_bdry);
        phi_c2 = phi_c2.max(d1.abs()).max(d2.abs());
    }
    let (eps, k) = gradient_barrier_params(
        sol.height_sup(),
        phi_c2,
        m.sphere_mean_curvature(r)?,
        phi_grad,
    );
    let gb = build_gradient_barrier(eps, k)?;
    let grad_bound = gb.boundary_bound() + phi_grad;
    let bdry_grad = sol.boundary_gradient_sup(&m)?;
    let grad_ok = bdry_grad <= grad_bound + 10.0 * cfg.tol;

    let report = format!(
        "solve-ball: preset {}, drift {}, R = {r}, grid {} x {}\n\
         converged in {} iterations, residual {:.3e}\n\
         height audit: sup|u| = {:.6e} <= {:.6e} -> {}\n\
         boundary gradient audit: {:.6e} <= {:.6e} (psi'(0) = {:.4e}, eps = {eps}, K = {k}) -> {}\n",
        cfg.manifold_preset,
        cfg.drift_preset,
        cfg.nr,
        cfg.nt,
        sol.iterations,
        sol.residual_norm,
        sol.height_sup(),
        height_bound,
        if height_ok { "pass" } else { "FAIL" },
        bdry_grad,
        grad_bound,
        gb.boundary_bound(),
        if grad_ok { "pass" } else { "FAIL" },
    );
    write_artifact(&cfg.out_dir, "report.txt", &report)?;
    Ok(if height_ok && grad_ok { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

fn run_exhaustion_experiment(cfg: &ExperimentConfig) -> Result<i32> {
    let m = build_manifold(cfg)?;
    let d = DriftFunction::by_name(&cfg.drift_preset)?;
    let phi = boundary_by_name(&cfg.boundary)?;
    let a0 = a0_by_name(&cfg.a0_preset)?;
    let r_last = *cfg.radii.last().unwrap();
    let barrier = build_global_v(&m, a0, phi.sup_abs(), cfg.r_probe.max(2.0 * r_last))?;
    let problem = AsymptoticProblem {
        manifold: m.clone(),
        drift: d.clone(),
        phi: phi.clone(),
        radii: cfg.radii.clone(),
        h_r: cfg.h_r,
        n_theta: cfg.nt,
        tol: cfg.tol,
    };
    let result = run_exhaustion(&problem, Some(&barrier))?;
    write_artifact(&cfg.out_dir, "gaps.csv", &result.gaps_csv())?;
    let att = boundary_attainment(&result, &phi);
    write_artifact(&cfg.out_dir, "attainment.csv", &att.to_csv())?;
    write_artifact(&cfg.out_dir, "traces.csv", &result.traces_csv())?;
    write_artifact(&cfg.out_dir, "traces.gp", &result.gnuplot_script("traces.csv"))?;

    let cutoff = build_angular_cutoff(cfg.cone_l, cfg.r1, cfg.sigma)?;
    let amplitude = 2.0 * phi.sup_abs().max(0.5);
    let mut report = format!(
        "exhaustion: radii {:?}, gaps {:?}\nheight bound |u| <= V: {} (worst excess {:?})\n\
         attainment score at 0.9 x {} = {:.6e}\n",
        result.radii,
        result.gaps,
        if result.height_bound_ok { "pass" } else { "FAIL" },
        result.height_excess,
        r_last,
        att.score
    );
    let mut pass = result.height_bound_ok;
    match find_r3(
        &m,
        &|r| d.gradient_bound(r),
        amplitude,
        cfg.delta,
        &cutoff,
        0.9 * r_last,
        200,
        24,
    ) {
        Ok(r3) => {
            let psi = build_asymptotic_psi(&m, amplitude, cfg.delta, r3, cutoff)?;
            let sandwich = verify_sandwich(&result, &phi, cfg.theta0, cfg.eps_sandwich, &psi)?;
            write_artifact(&cfg.out_dir, "sandwich.csv", &sandwich.to_csv())?;
            let ok = sandwich.holds_within(10.0 * cfg.tol);
            let _ = writeln!(
                report,
                "sandwich at theta0 = {}, eps = {}: R3 = {r3}, slacks ({:.4e}, {:.4e}) -> {}",
                cfg.theta0,
                cfg.eps_sandwich,
                sandwich.lower_slack,
                sandwich.upper_slack,
                if ok { "pass" } else { "FAIL" }
            );
            pass = pass && ok;
        }
        Err(e) => {
            let _ = writeln!(report, "sandwich skipped: barrier search failed: {e}");
            pass = false;
        }
    }
    write_artifact(&cfg.out_dir, "report.txt", &report)?;
    Ok(if pass { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

fn run_nonuniqueness(cfg: &ExperimentConfig) -> Result<i32> {
    let m = build_manifold(cfg)?;
    let rep = nonuniqueness_demo(&m, cfg.nr, cfg.nt, cfg.tol)?;
    let mut report = String::from("non-uniqueness on B(0,2), self-shrinker drift, zero data\n");
    for b in &rep.branches {
        write_artifact(
            &cfg.out_dir,
            &format!("{}.csv", b.label),
            &b.solution.to_csv(),
        )?;
        let _ = writeln!(
            report,
            "{}: u(o) = {:+.6e}, sup error vs analytic = {:.3e}",
            b.label, b.origin_value, b.analytic_sup_err
        );
    }
    for (a, b, dist) in &rep.pairwise {
        let _ = writeln!(report, "sup distance {a} / {b} = {dist:.6e}");
    }
    write_artifact(&cfg.out_dir, "report.txt", &report)?;
    let distinct = rep.pairwise.iter().all(|(_, _, d)| *d >= 1.0);
    Ok(if distinct { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

/// Arc-typed weight helper re-exported for callers assembling barriers.
pub fn weight(spec: &str) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    a0_by_name(spec)
}
