//! Split drift terms f(x,t) = m(rho) + r(t): the right-hand side
//! <grad_bar f, nu> of the graph equation, the gradient bound F, and the
//! decay conditions the asymptotic theory needs.

use std::sync::Arc;

use crate::barrier::RadialTable;
use crate::error::{Error, Result};
use crate::manifold::{radius_ladder, ModelManifold};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift in split form. `m_prime` is the radial derivative of the
/// rho-dependent part; the height-dependent part enters through r'(t) and
/// r''(t) (the solver's Jacobian needs the second derivative).
#[derive(Clone)]
pub struct DriftFunction {
    pub name: String,
    m_prime: ScalarFn,
    r_prime: ScalarFn,
    r_second: ScalarFn,
    /// sup over t of |r'(t)|; None means unbounded
    pub r_prime_sup: Option<f64>,
    /// slab half-width used to evaluate an unbounded r' sup
    pub slab: Option<f64>,
}

impl std::fmt::Debug for DriftFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftFunction")
            .field("name", &self.name)
            .field("r_prime_sup", &self.r_prime_sup)
            .field("slab", &self.slab)
            .finish()
    }
}

impl DriftFunction {
    pub fn zero() -> Self {
        DriftFunction {
            name: "zero".into(),
            m_prime: Arc::new(|_| 0.0),
            r_prime: Arc::new(|_| 0.0),
            r_second: Arc::new(|_| 0.0),
            r_prime_sup: Some(0.0),
            slab: None,
        }
    }

    /// f(x) = |x|^2 / 4 = (rho^2 + t^2)/4 in Euclidean space: the graph
    /// equation's solutions are self-shrinkers. r'(t) = t/2 is unbounded, so
    /// the condition checkers only see the slab-restricted sup.
    pub fn selfshrinker(t_slab: f64) -> Self {
        DriftFunction {
            name: "selfshrinker".into(),
            m_prime: Arc::new(|rho| 0.5 * rho),
            r_prime: Arc::new(|t| 0.5 * t),
            r_second: Arc::new(|_| 0.5),
            r_prime_sup: None,
            slab: Some(t_slab),
        }
    }

    /// Purely radial drift with F(r) = c (1+r)^{-p}.
    pub fn bounded(c: f64, p: f64) -> Self {
        DriftFunction {
            name: format!("bounded({c},{p})"),
            m_prime: Arc::new(move |rho| c * (1.0 + rho).powf(-p)),
            r_prime: Arc::new(|_| 0.0),
            r_second: Arc::new(|_| 0.0),
            r_prime_sup: Some(0.0),
            slab: None,
        }
    }

    /// Purely radial drift with a caller-supplied m'(rho); r(t) = 0.
    pub fn from_radial_bound(
        name: &str,
        m_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DriftFunction {
            name: name.into(),
            m_prime: Arc::new(m_prime),
            r_prime: Arc::new(|_| 0.0),
            r_second: Arc::new(|_| 0.0),
            r_prime_sup: Some(0.0),
            slab: None,
        }
    }

    /// Drift presets by name: "zero", "selfshrinker", "bounded(c,p)".
    pub fn by_name(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "zero" {
            return Ok(DriftFunction::zero());
        }
        if spec == "selfshrinker" {
            return Ok(DriftFunction::selfshrinker(4.0));
        }
        if let Some(inner) = spec.strip_prefix("bounded(").and_then(|s| s.strip_suffix(')')) {
            let parts: Vec<f64> = inner
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::UnknownPreset(spec.to_string()))?;
            if parts.len() == 2 {
                return Ok(DriftFunction::bounded(parts[0], parts[1]));
            }
        }
        Err(Error::UnknownPreset(spec.to_string()))
    }

    pub fn m_prime(&self, rho: f64) -> f64 {
        (self.m_prime)(rho)
    }

    pub fn r_prime(&self, t: f64) -> f64 {
        (self.r_prime)(t)
    }

    pub fn r_second(&self, t: f64) -> f64 {
        (self.r_second)(t)
    }

    pub fn is_t_dependent(&self) -> bool {
        !matches!(self.r_prime_sup, Some(s) if s == 0.0)
    }

    /// sup over t of |r'|, falling back to the slab when r' is unbounded.
    fn r_sup_effective(&self) -> Result<f64> {
        match (self.r_prime_sup, self.slab) {
            (Some(s), _) => Ok(s),
            (None, Some(t_slab)) => {
                let mut sup = 0.0f64;
                let n = 256;
                for i in 0..=n {
                    let t = -t_slab + 2.0 * t_slab * i as f64 / n as f64;
                    sup = sup.max(self.r_prime(t).abs());
                }
                Ok(sup)
            }
            (None, None) => Err(Error::UnboundedDrift),
        }
    }

    /// F(rho) = sqrt(m'(rho)^2 + sup_t r'(t)^2), the exact sup over t of
    /// |grad_bar f| on the cylinder over the sphere of radius rho.
    pub fn gradient_bound(&self, rho: f64) -> Result<f64> {
        let rs = self.r_sup_effective()?;
        let mp = self.m_prime(rho);
        Ok((mp * mp + rs * rs).sqrt())
    }

    /// <grad_bar f, nu> with nu the downward unit normal:
    /// (m'(rho) u_r - r'(t)) / W, W = sqrt(1 + u_r^2 + u_ang^2), where
    /// u_ang is the physical angular component u_theta / f_a.
    pub fn rhs_term(&self, rho: f64, t: f64, u_r: f64, u_ang: f64) -> f64 {
        let w = (1.0 + u_r * u_r + u_ang * u_ang).sqrt();
        (self.m_prime(rho) * u_r - self.r_prime(t)) / w
    }

    pub fn negated(&self) -> Self {
        let mp = self.m_prime.clone();
        let rp = self.r_prime.clone();
        let rs = self.r_second.clone();
        DriftFunction {
            name: format!("-({})", self.name),
            m_prime: Arc::new(move |rho| -mp(rho)),
            r_prime: Arc::new(move |t| -rp(t)),
            r_second: Arc::new(move |t| -rs(t)),
            r_prime_sup: self.r_prime_sup,
            slab: self.slab,
        }
    }
}

#[derive(Debug, Clone)]
pub struct F1Row {
    pub r: f64,
    pub f_value: f64,
    pub weighted_branch: f64,
    pub curvature_branch: f64,
}

#[derive(Debug, Clone)]
pub struct F2Row {
    pub r: f64,
    pub psi: f64,
}

/// Outcome of the decay-condition checks for one (drift, manifold) pair.
#[derive(Debug, Clone)]
pub struct DriftConditionReport {
    pub drift_name: String,
    pub manifold_name: String,
    pub f1_margin: f64,
    pub f1_ok: bool,
    pub f1_rows: Vec<F1Row>,
    pub f2_trend: Vec<F2Row>,
    pub f2_ok: bool,
    pub ball_solvability_ok: bool,
    pub notes: Vec<String>,
}

impl DriftConditionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,f_value,weighted_branch,curvature_branch,psi\n");
        for (i, row) in self.f1_rows.iter().enumerate() {
            let psi = self.f2_trend.get(i).map(|p| p.psi).unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                row.r, row.f_value, row.weighted_branch, row.curvature_branch, psi
            ));
        }
        out
    }
}

impl std::fmt::Display for DriftConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "drift conditions: {} on {}",
            self.drift_name, self.manifold_name
        )?;
        writeln!(
            f,
            "  decay vs barrier bound:   {}  (worst margin {:+.3e})",
            if self.f1_ok { "pass" } else { "FAIL" },
            self.f1_margin
        )?;
        let last_psi = self.f2_trend.last().map(|p| p.psi).unwrap_or(f64::NAN);
        writeln!(
            f,
            "  weighted decay trend:     {}  (final {:.3e})",
            if self.f2_ok { "pass" } else { "FAIL" },
            last_psi
        )?;
        writeln!(
            f,
            "  ball solvability:         {}",
            if self.ball_solvability_ok { "pass" } else { "FAIL" }
        )?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// First decay condition: F(r) must stay below
/// min{ (a0 + (n-1)(f_a'/f_a) g^3) / (1+g^2)^{3/2}, (n-1) f_a'/f_a }
/// on the radius ladder. Near r = 0 the weighted branch is evaluated by its
/// limit a0(0) (g(0) = 0).
pub fn check_f1(
    d: &DriftFunction,
    m: &ModelManifold,
    a0: &dyn Fn(f64) -> f64,
    g: &RadialTable,
    r_probe: f64,
) -> Result<(f64, bool, Vec<F1Row>)> {
    let nm1 = m.n as f64 - 1.0;
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut radii = vec![0.0];
    radii.extend(radius_ladder(0.125, r_probe));
    for r in radii {
        let fv = d.gradient_bound(r)?;
        let (weighted, curv) = if r == 0.0 {
            (a0(0.0), f64::INFINITY)
        } else {
            let ratio = m.fa.ratio(r)?;
            let gv = g.value(r)?;
            let w = (a0(r) + nm1 * ratio * gv.powi(3)) / (1.0 + gv * gv).powf(1.5);
            (w, nm1 * ratio)
        };
        let bound = weighted.min(curv);
        worst = worst.min(bound - fv);
        rows.push(F1Row {
            r,
            f_value: fv,
            weighted_branch: weighted,
            curvature_branch: curv,
        });
    }
    Ok((worst, worst > 0.0, rows))
}

/// Second decay condition, as a trend proxy: Psi(r) = F(r) f_a(r) r^{1+eps}
/// / f_a'(r) must decrease over the last decade and end below 1e-2.
pub fn check_f2(
    d: &DriftFunction,
    m: &ModelManifold,
    eps: f64,
    r_probe: f64,
) -> Result<(bool, Vec<F2Row>)> {
    let ladder = radius_ladder(1.0, r_probe);
    let mut rows = Vec::new();
    for &r in &ladder {
        let fv = d.gradient_bound(r)?;
        let psi = fv * r.powf(1.0 + eps) / m.fa.ratio(r)?;
        rows.push(F2Row { r, psi });
    }
    let decade: Vec<f64> = rows
        .iter()
        .filter(|p| p.r >= r_probe / 10.0)
        .map(|p| p.psi)
        .collect();
    let decreasing = decade.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let final_v = *decade.last().unwrap_or(&f64::NAN);
    Ok((decreasing && final_v < 1e-2, rows))
}

/// Solvability condition for the Dirichlet problem on B(o, R):
/// F(r) <= (n-1) f_a'(r)/f_a(r) for all probed radii r <= R.
pub fn check_ball_solvability(d: &DriftFunction, m: &ModelManifold, r_ball: f64) -> Result<bool> {
    let nm1 = m.n as f64 - 1.0;
    let n_samples = 512;
    for i in 1..=n_samples {
        let r = r_ball * i as f64 / n_samples as f64;
        let fv = d.gradient_bound(r)?;
        if fv > nm1 * m.fa.ratio(r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bundles the three checks into one report.
pub fn drift_condition_report(
    d: &DriftFunction,
    m: &ModelManifold,
    a0: &dyn Fn(f64) -> f64,
    g: &RadialTable,
    eps: f64,
    r_probe: f64,
) -> Result<DriftConditionReport> {
    let mut notes = Vec::new();
    if d.r_prime_sup.is_none() {
        match d.slab {
            Some(t) => notes.push(format!(
                "height derivative unbounded; sup taken over the slab |t| <= {t}"
            )),
            None => return Err(Error::UnboundedDrift),
        }
    }
    notes.push("r = 0 row uses the limit value a0(0) for the weighted branch".into());
    let (f1_margin, f1_ok, f1_rows) = check_f1(d, m, a0, g, r_probe)?;
    let (f2_ok, f2_trend) = check_f2(d, m, eps, r_probe)?;
    let ball_solvability_ok = check_ball_solvability(d, m, r_probe)?;
    Ok(DriftConditionReport {
        drift_name: d.name.clone(),
        manifold_name: m.profile.name.clone(),
        f1_margin,
        f1_ok,
        f1_rows,
        f2_trend,
        f2_ok,
        ball_solvability_ok,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::build_g;
    use crate::manifold::{euclidean, hyperbolic, power, ModelManifold};

    fn power_model() -> ModelManifold {
        ModelManifold::new(power(2.0, 0.5).unwrap(), 2, 600.0, 1e-2).unwrap()
    }

    #[test]
    fn selfshrinker_rhs_values() {
        let d = DriftFunction::selfshrinker(4.0);
        // flat slice u = 0: rhs vanishes at every radius
        for &rho in &[0.0, 0.5, 1.0, 1.999] {
            assert_eq!(d.rhs_term(rho, 0.0, 0.0, 0.0), 0.0);
        }
        // upper hemisphere u = sqrt(4 - rho^2): rhs = -1 everywhere inside
        for &rho in &[0.1, 0.5, 1.0, 1.5, 1.9] {
            let u = (4.0f64 - rho * rho).sqrt();
            let ur = -rho / u;
            let rhs = d.rhs_term(rho, u, ur, 0.0);
            assert!((rhs + 1.0).abs() < 1e-14, "rhs = {rhs} at rho = {rho}");
        }
    }

    #[test]
    fn zero_drift_rhs_vanishes() {
        let d = DriftFunction::zero();
        assert_eq!(d.rhs_term(1.0, 3.0, 2.0, -1.0), 0.0);
    }

    #[test]
    fn rhs_bounded_by_gradient_bound() {
        let d = DriftFunction::bounded(0.7, 2.0);
        for i in 0..200 {
            let rho = 0.05 * i as f64;
            let ur = (i as f64 * 0.37).sin() * 10.0;
            let ua = (i as f64 * 0.61).cos() * 10.0;
            let rhs = d.rhs_term(rho, 0.0, ur, ua).abs();
            let f = d.gradient_bound(rho).unwrap();
            assert!(rhs <= f + 1e-14, "|rhs| = {rhs} > F = {f}");
        }
    }

    #[test]
    fn negation_flips_rhs() {
        let d = DriftFunction::selfshrinker(4.0);
        let n = d.negated();
        let v = d.rhs_term(1.2, 0.7, -0.3, 0.4);
        let w = n.rhs_term(1.2, 0.7, -0.3, 0.4);
        assert!((v + w).abs() < 1e-15);
    }

    #[test]
    fn f1_passes_for_half_bound_drift() {
        let m = power_model();
        let a0 = |r: f64| ((1.0 + r).powi(2) * (std::f64::consts::E + r).ln().powi(2)).recip();
        let g = build_g(&m, &a0, 512.0).unwrap();
        // drift built as half of the weighted branch itself
        let mc = m.clone();
        let gc = g.clone();
        let a0c = a0;
        let d = DriftFunction::from_radial_bound("half-bound", move |r| {
            if r <= 0.0 {
                return 0.5 * a0c(0.0);
            }
            let ratio = mc.fa.ratio(r).unwrap();
            let gv = gc.value(r).unwrap();
            0.5 * (a0c(r) + ratio * gv.powi(3)) / (1.0 + gv * gv).powf(1.5)
        });
        let (margin, ok, rows) = check_f1(&d, &m, &a0, &g, 512.0).unwrap();
        assert!(ok, "margin {margin}");
        // F is half the weighted branch, so the margin is at least half of
        // the smaller branch wherever the weighted branch is the min
        for row in &rows {
            if row.weighted_branch <= row.curvature_branch {
                assert!(row.f_value <= 0.5 * row.weighted_branch + 1e-12);
            }
        }
    }

    #[test]
    fn f1_fails_for_double_curvature_branch() {
        let m = power_model();
        let a0 = |_: f64| 0.1;
        let g = build_g(&m, &a0, 512.0).unwrap();
        let mc = m.clone();
        let d = DriftFunction::from_radial_bound("double-curvature", move |r| {
            if r <= 0.0 {
                return 1e9; // the bound's r=0 limit row must also fail
            }
            2.0 * mc.fa.ratio(r).unwrap()
        });
        let (_, ok, rows) = check_f1(&d, &m, &a0, &g, 512.0).unwrap();
        assert!(!ok);
        // every positive radius exceeds the curvature branch by 2x
        for row in rows.iter().skip(1) {
            assert!(row.f_value > row.curvature_branch);
        }
    }

    #[test]
    fn f2_pass_and_fail_cases() {
        let m = power_model();
        let zero = DriftFunction::zero();
        assert!(check_f2(&zero, &m, 0.5, 512.0).unwrap().0);

        // F ~ r^-3 against f_a'/f_a ~ 2/r: Psi ~ r^{-0.75}/2, passes for eps = 0.25
        let d = DriftFunction::from_radial_bound("cubic-decay", |r| (1.0 + r).powi(-3));
        assert!(check_f2(&d, &m, 0.25, 512.0).unwrap().0);

        // hyperbolic with F = 1/r: Psi ~ r^eps grows
        let mh = ModelManifold::new(hyperbolic(1.0), 2, 600.0, 1e-2).unwrap();
        let dh = DriftFunction::from_radial_bound("inverse", |r| 1.0 / (1.0 + r));
        assert!(!check_f2(&dh, &mh, 0.5, 512.0).unwrap().0);
    }

    #[test]
    fn ball_solvability_cases() {
        let me = ModelManifold::new(euclidean(), 2, 10.0, 1e-3).unwrap();
        // F = 0.2 (1+r)^-2 <= 1/r on (0, 2]
        let d = DriftFunction::bounded(0.2, 2.0);
        assert!(check_ball_solvability(&d, &me, 2.0).unwrap());
        // constant F = 1 exceeds 1/r for r > 1
        let dc = DriftFunction::bounded(1.0, 0.0);
        assert!(!check_ball_solvability(&dc, &me, 2.0).unwrap());
        // unbounded drift without a slab errors
        let mut ds = DriftFunction::selfshrinker(4.0);
        ds.slab = None;
        assert!(matches!(
            check_ball_solvability(&ds, &me, 2.0),
            Err(Error::UnboundedDrift)
        ));
    }
}
