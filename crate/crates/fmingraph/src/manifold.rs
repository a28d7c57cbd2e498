//! Rotationally symmetric model manifolds: curvature profiles, the warping
//! ODE f'' = k^2 f, and the pinching-assumption checkers.

use crate::error::{Error, Result};

/// Building block for radial curvature functions. Values are combined by
/// [`CurvatureProfile`], which also applies the near-origin splice.
#[derive(Debug, Clone)]
pub enum CurveKind {
    Zero,
    Constant(f64),
    /// c / t
    InversePower { c: f64 },
    /// coeff * t^exponent
    PowerLaw { coeff: f64, exponent: f64 },
    /// t^exponent * e^{k t}
    ExpPoly { k: f64, exponent: f64 },
    /// inner evaluated at max(t, floor): freezes the value below `floor`
    Capped { inner: Box<CurveKind>, floor: f64 },
    /// pointwise maximum
    Max(Box<CurveKind>, Box<CurveKind>),
    /// piecewise-linear samples (t, value), constant extension outside
    Table(Vec<(f64, f64)>),
}

impl CurveKind {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CurveKind::Zero => 0.0,
            CurveKind::Constant(k) => *k,
            CurveKind::InversePower { c } => c / t,
            CurveKind::PowerLaw { coeff, exponent } => coeff * t.powf(*exponent),
            CurveKind::ExpPoly { k, exponent } => t.powf(*exponent) * (k * t).exp(),
            CurveKind::Capped { inner, floor } => inner.eval(t.max(*floor)),
            CurveKind::Max(p, q) => p.eval(t).max(q.eval(t)),
            CurveKind::Table(rows) => {
                if rows.is_empty() {
                    return 0.0;
                }
                if t <= rows[0].0 {
                    return rows[0].1;
                }
                if t >= rows[rows.len() - 1].0 {
                    return rows[rows.len() - 1].1;
                }
                let idx = rows.partition_point(|(s, _)| *s <= t);
                let (t0, v0) = rows[idx - 1];
                let (t1, v1) = rows[idx];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

/// C^1 ramp from 0 at x=0 to 1 at x=1.
pub fn cubic_ramp(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Curvature pinching -b(rho)^2 <= K <= -a(rho)^2 plus the constants used by
/// the asymptotic assumptions. `a` is zero on [0, T0] and ramped to its
/// asymptotic form over [T0, T1]; the ramp is skipped when T1 <= T0 (pure
/// space forms keep their closed-form warping).
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    pub name: String,
    pub a_kind: CurveKind,
    pub b_kind: CurveKind,
    pub t0: f64,
    pub t1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub q: f64,
    pub r0: f64,
    /// decay margin of the pinching preset; drives the default barrier exponent
    pub eps: f64,
}

impl CurvatureProfile {
    pub fn a(&self, t: f64) -> f64 {
        if self.r0 == 0.0 {
            // pure space-form presets: no gluing, keep the closed form
            return self.a_kind.eval(t);
        }
        if t <= self.t0 {
            0.0
        } else if t < self.t1 {
            cubic_ramp((t - self.t0) / (self.t1 - self.t0)) * self.a_kind.eval(t)
        } else {
            self.a_kind.eval(t)
        }
    }

    pub fn b(&self, t: f64) -> f64 {
        self.b_kind.eval(t)
    }

    /// Numerical b'(t) by central difference; the checkers only need trends.
    pub fn b_prime(&self, t: f64) -> f64 {
        let h = 1e-4 * t.max(1.0);
        (self.b(t + h) - self.b((t - h).max(0.0))) / (t + h - (t - h).max(0.0))
    }
}

/// Flat space: a = b = 0, f(r) = r.
pub fn euclidean() -> CurvatureProfile {
    CurvatureProfile {
        name: "euclidean".into(),
        a_kind: CurveKind::Zero,
        b_kind: CurveKind::Zero,
        t0: 0.0,
        t1: 0.0,
        c1: 1.0,
        c2: 1.0,
        c3: 1.0,
        c4: 0.5,
        q: 0.5,
        r0: 0.0,
        eps: 0.5,
    }
}

/// Constant curvature -k^2: f(r) = sinh(kr)/k.
pub fn hyperbolic(k: f64) -> CurvatureProfile {
    CurvatureProfile {
        name: format!("hyperbolic({k})"),
        a_kind: CurveKind::Constant(k),
        b_kind: CurveKind::Constant(k),
        t0: 0.0,
        t1: 1.0,
        c1: k, // a(t) = k >= k/t for t >= T1 = 1
        c2: k.max(1.0),
        c3: k,
        c4: 0.5,
        q: 0.5,
        r0: 0.0,
        eps: 0.5,
    }
}

/// Power-type pinching: a(t) = sqrt(phi(phi-1))/t for t >= 1, ramped up from
/// T0 = 1/2, with the lower bound b following t^{(phi-2)-eps/2} once it
/// dominates a. Below the crossing radius b tracks the decreasing envelope
/// max(a-tail, power tail) so that b >= a and b stays monotone.
pub fn power(phi: f64, eps: f64) -> Result<CurvatureProfile> {
    if phi <= 1.0 {
        return Err(Error::Parameter(format!("power preset needs phi > 1, got {phi}")));
    }
    if eps <= 0.0 || 2.0 * phi - 2.0 - eps <= 0.0 {
        return Err(Error::Parameter(format!(
            "power preset needs 0 < eps < 2(phi-1), got eps = {eps}"
        )));
    }
    let c1 = (phi * (phi - 1.0)).sqrt();
    let b_exp = (phi - 2.0) - eps / 2.0;
    // radius where t^{b_exp} meets c1/t; beyond it the power tail dominates
    let cross = c1.powf(1.0 / (b_exp + 1.0)).max(1.0);
    let b_kind = CurveKind::Max(
        Box::new(CurveKind::Capped {
            inner: Box::new(CurveKind::InversePower { c: c1 }),
            floor: 1.0,
        }),
        Box::new(CurveKind::Capped {
            inner: Box::new(CurveKind::PowerLaw { coeff: 1.0, exponent: b_exp }),
            floor: cross,
        }),
    );
    Ok(CurvatureProfile {
        name: format!("power({phi},{eps})"),
        a_kind: CurveKind::InversePower { c: c1 },
        b_kind,
        t0: 0.5,
        t1: 1.0,
        c1,
        c2: (c1.max(1.0)) * 1.5,
        c3: 0.0, // filled below
        c4: eps / 4.0,
        q: 0.5,
        r0: 1.0,
        eps,
    }
    .with_c3_fitted())
}

/// Exponential pinching: a ramps to the constant k over [1, 2]; b follows
/// t^{-1-eps/2} e^{kt}, frozen below its minimum so it stays monotone.
pub fn exponential(k: f64, eps: f64) -> Result<CurvatureProfile> {
    if k <= 0.0 || eps <= 0.0 {
        return Err(Error::Parameter(format!(
            "exp preset needs k > 0 and eps > 0, got k = {k}, eps = {eps}"
        )));
    }
    let b_exp = -1.0 - eps / 2.0;
    let t_min = (1.0 + eps / 2.0) / k; // where t^{b_exp} e^{kt} turns around
    let floor = t_min.max(2.0);
    Ok(CurvatureProfile {
        name: format!("exp({k},{eps})"),
        a_kind: CurveKind::Constant(k),
        b_kind: CurveKind::Capped {
            inner: Box::new(CurveKind::ExpPoly { k, exponent: b_exp }),
            floor,
        },
        t0: 1.0,
        t1: 2.0,
        c1: 2.0 * k, // a(t) = k >= 2k/t for t >= T1 = 2
        c2: k.max(1.0) * 3.0_f64.max((k * 1.0).exp()),
        c3: 0.0,
        // the e^{kt} factors in t^{1+C4} b / f_a' cancel, so C4 < eps/2 is
        // required for that ratio to vanish
        c4: eps / 4.0,
        q: 0.5,
        r0: 2.0,
        eps,
    }
    .with_c3_fitted())
}

impl CurvatureProfile {
    /// Fit C3 (and tighten C2) from samples so A2-A5 hold with margin when
    /// the family admits them at all.
    fn with_c3_fitted(mut self) -> CurvatureProfile {
        let mut c2 = 1.0f64;
        let mut c3 = f64::INFINITY;
        let mut t = 0.0;
        while t <= 200.0 {
            let b = self.b(t);
            let a = self.a(t);
            if b > 0.0 {
                c2 = c2.max(self.b(t + 1.0) / b).max(self.b(t / 2.0) / b);
                c3 = c3.min(b * (1.0 + t).powf(self.q));
            }
            c2 = c2.max(a / 1.0);
            t += 0.05;
        }
        self.c2 = self.c2.max(c2 * 1.01);
        if c3.is_finite() {
            self.c3 = 0.99 * c3;
        }
        self
    }
}

/// Preset lookup: "euclidean", "hyperbolic(k)", "power(phi,eps)", "exp(k,eps)".
pub fn profile_by_name(spec: &str) -> Result<CurvatureProfile> {
    let spec = spec.trim();
    if spec == "euclidean" {
        return Ok(euclidean());
    }
    let (head, args) = match spec.find('(') {
        Some(i) if spec.ends_with(')') => {
            let head = &spec[..i];
            let inner = &spec[i + 1..spec.len() - 1];
            let args: Vec<f64> = inner
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::UnknownPreset(spec.to_string()))?;
            (head, args)
        }
        _ => return Err(Error::UnknownPreset(spec.to_string())),
    };
    match (head, args.as_slice()) {
        ("hyperbolic", [k]) => Ok(hyperbolic(*k)),
        ("power", [phi, eps]) => power(*phi, *eps),
        ("exp", [k, eps]) => exponential(*k, *eps),
        _ => Err(Error::UnknownPreset(spec.to_string())),
    }
}

const LOG_SWITCH: f64 = 1e100;
const HARD_OVERFLOW: f64 = 1e300;

/// Tabulated solution of f'' = k^2 f, f(0) = 0, f'(0) = 1. Large-r growth is
/// tracked as (log f, f'/f) once f passes 1e100, so exponential profiles stay
/// representable; accessors expose both views.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    pub step: f64,
    pub r_max: f64,
    pub k_id: String,
    f: Vec<f64>,
    fp: Vec<f64>,
    logf: Vec<f64>,
    q: Vec<f64>,
    ksq: Vec<f64>,
    switch_index: Option<usize>,
}

/// RK4 increments for (f, f')' = (f', k^2 f).
fn rk4_linear(k2: impl Fn(f64) -> f64, t: f64, h: f64, f: f64, fp: f64) -> (f64, f64) {
    let deriv = |f: f64, fp: f64, k2v: f64| (fp, k2v * f);
    let k2a = k2(t);
    let k2m = k2(t + 0.5 * h);
    let k2b = k2(t + h);
    let (d1f, d1p) = deriv(f, fp, k2a);
    let (d2f, d2p) = deriv(f + 0.5 * h * d1f, fp + 0.5 * h * d1p, k2m);
    let (d3f, d3p) = deriv(f + 0.5 * h * d2f, fp + 0.5 * h * d2p, k2m);
    let (d4f, d4p) = deriv(f + h * d3f, fp + h * d3p, k2b);
    (
        h / 6.0 * (d1f + 2.0 * d2f + 2.0 * d3f + d4f),
        h / 6.0 * (d1p + 2.0 * d2p + 2.0 * d3p + d4p),
    )
}

/// RK4 increments for (log f, f'/f)' = (q, k^2 - q^2).
fn rk4_log(k2: impl Fn(f64) -> f64, t: f64, h: f64, q: f64) -> (f64, f64) {
    let k2a = k2(t);
    let k2m = k2(t + 0.5 * h);
    let k2b = k2(t + h);
    let deriv = |q: f64, k2v: f64| (q, k2v - q * q);
    let (d1l, d1q) = deriv(q, k2a);
    let (d2l, d2q) = deriv(q + 0.5 * h * d1q, k2m);
    let (d3l, d3q) = deriv(q + 0.5 * h * d2q, k2m);
    let (d4l, d4q) = deriv(q + h * d3q, k2b);
    (
        h / 6.0 * (d1l + 2.0 * d2l + 2.0 * d3l + d4l),
        h / 6.0 * (d1q + 2.0 * d2q + 2.0 * d3q + d4q),
    )
}

/// Compensated (Kahan) accumulation; the 10^4..10^6-step marches would
/// otherwise drown the RK4 truncation error in rounding noise.
fn kadd(value: &mut f64, comp: &mut f64, inc: f64) {
    let y = inc - *comp;
    let t = *value + y;
    *comp = (t - *value) - y;
    *value = t;
}

fn solve_jacobi_impl(
    profile_fn: &dyn Fn(f64) -> f64,
    r_max: f64,
    step: f64,
    k_id: &str,
    allow_log: bool,
) -> Result<JacobiSolution> {
    if !(step > 0.0) || !(r_max > 0.0) {
        return Err(Error::Parameter(format!(
            "need positive step and r_max, got step = {step}, r_max = {r_max}"
        )));
    }
    let n_steps = (r_max / step).ceil() as usize;
    let n = n_steps + 1;
    let mut f = Vec::with_capacity(n);
    let mut fp = Vec::with_capacity(n);
    let mut logf = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut ksq = Vec::with_capacity(n);
    let mut switch_index = None;

    let k2 = |t: f64| {
        let k = profile_fn(t);
        k * k
    };
    let k2_checked = |t: f64| -> Result<f64> {
        let v = k2(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteProfile { radius: t })
        }
    };

    // node 0
    f.push(0.0);
    fp.push(1.0);
    logf.push(f64::NEG_INFINITY);
    q.push(f64::INFINITY);
    ksq.push(k2_checked(0.0)?);

    let mut state_linear = true;
    let (mut cf, mut cfp) = (0.0f64, 1.0f64);
    let (mut ccf, mut ccfp) = (0.0f64, 0.0f64);
    let (mut cl, mut cq) = (0.0f64, 0.0f64);
    let (mut ccl, mut ccq) = (0.0f64, 0.0f64);

    for i in 0..n_steps {
        let t = i as f64 * step;
        // probe the stage abscissae once per step so non-finite profile
        // values surface with the offending radius
        k2_checked(t)?;
        k2_checked(t + 0.5 * step)?;
        k2_checked(t + step)?;
        if state_linear {
            let (df, dfp) = rk4_linear(k2, t, step, cf, cfp);
            kadd(&mut cf, &mut ccf, df);
            kadd(&mut cfp, &mut ccfp, dfp);
            if (!cf.is_finite() || !cfp.is_finite() || cf > HARD_OVERFLOW) && !allow_log {
                return Err(Error::WarpOverflow { radius: t + step });
            }
            f.push(cf);
            fp.push(cfp);
            logf.push(cf.ln());
            q.push(cfp / cf);
            ksq.push(k2(t + step));
            if allow_log && cf > LOG_SWITCH {
                state_linear = false;
                cl = cf.ln();
                cq = cfp / cf;
                switch_index = Some(i + 1);
            }
        } else {
            let (dl, dq) = rk4_log(k2, t, step, cq);
            kadd(&mut cl, &mut ccl, dl);
            kadd(&mut cq, &mut ccq, dq);
            logf.push(cl);
            q.push(cq);
            let fv = cl.exp();
            f.push(fv);
            fp.push(fv * cq);
            ksq.push(k2(t + step));
        }
    }

    Ok(JacobiSolution {
        step,
        r_max: n_steps as f64 * step,
        k_id: k_id.to_string(),
        f,
        fp,
        logf,
        q,
        ksq,
        switch_index,
    })
}

/// Fixed-step RK4 integration of the warping IVP. Errors if f overflows;
/// use [`solve_jacobi_auto`] for exponentially growing profiles.
pub fn solve_jacobi(
    profile_fn: &dyn Fn(f64) -> f64,
    r_max: f64,
    step: f64,
) -> Result<JacobiSolution> {
    solve_jacobi_impl(profile_fn, r_max, step, "custom", false)
}

/// Like [`solve_jacobi`] but hands over to log-space integration of
/// (log f, f'/f) once f exceeds 1e100.
pub fn solve_jacobi_auto(
    profile_fn: &dyn Fn(f64) -> f64,
    r_max: f64,
    step: f64,
) -> Result<JacobiSolution> {
    solve_jacobi_impl(profile_fn, r_max, step, "custom", true)
}

fn hermite(t: f64, h: f64, p0: f64, m0: f64, p1: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * p1
        + (t3 - t2) * h * m1
}

impl JacobiSolution {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn node_r(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn node_f(&self, i: usize) -> f64 {
        self.f[i]
    }

    pub fn node_f_prime(&self, i: usize) -> f64 {
        self.fp[i]
    }

    pub fn node_log_f(&self, i: usize) -> f64 {
        self.logf[i]
    }

    pub fn switched_to_log_at(&self) -> Option<f64> {
        self.switch_index.map(|i| self.node_r(i))
    }

    fn locate(&self, r: f64) -> Result<(usize, f64)> {
        if !(0.0..=self.r_max * (1.0 + 1e-12)).contains(&r) {
            return Err(Error::OutOfRange { radius: r, r_max: self.r_max });
        }
        let x = r / self.step;
        let i = (x.floor() as usize).min(self.len() - 2);
        Ok((i, x - i as f64))
    }

    fn in_log_region(&self, i: usize) -> bool {
        self.switch_index.map(|s| i + 1 > s).unwrap_or(false)
    }

    pub fn f(&self, r: f64) -> Result<f64> {
        let (i, t) = self.locate(r)?;
        if self.in_log_region(i) {
            return Ok(self.log_f(r)?.exp());
        }
        Ok(hermite(t, self.step, self.f[i], self.fp[i], self.f[i + 1], self.fp[i + 1]))
    }

    pub fn f_prime(&self, r: f64) -> Result<f64> {
        let (i, t) = self.locate(r)?;
        if self.in_log_region(i) {
            return Ok(self.log_f(r)?.exp() * self.ratio(r)?);
        }
        // f'' = k^2 f supplies the Hermite slopes for f'
        Ok(hermite(
            t,
            self.step,
            self.fp[i],
            self.ksq[i] * self.f[i],
            self.fp[i + 1],
            self.ksq[i + 1] * self.f[i + 1],
        ))
    }

    pub fn log_f(&self, r: f64) -> Result<f64> {
        let (i, t) = self.locate(r)?;
        if !self.in_log_region(i) {
            return Ok(self.f(r)?.ln());
        }
        Ok(hermite(t, self.step, self.logf[i], self.q[i], self.logf[i + 1], self.q[i + 1]))
    }

    /// f'(r) / f(r).
    pub fn ratio(&self, r: f64) -> Result<f64> {
        let (i, t) = self.locate(r)?;
        if r == 0.0 {
            return Ok(f64::INFINITY);
        }
        if self.in_log_region(i) {
            let dq0 = self.ksq[i] - self.q[i] * self.q[i];
            let dq1 = self.ksq[i + 1] - self.q[i + 1] * self.q[i + 1];
            return Ok(hermite(t, self.step, self.q[i], dq0, self.q[i + 1], dq1));
        }
        Ok(self.f_prime(r)? / self.f(r)?)
    }

    /// CSV rows r, f, f_prime, log_f with an optional node stride.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("r,f,f_prime,log_f\n");
        let mut i = 0;
        while i < self.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.node_r(i),
                self.f[i],
                self.fp[i],
                self.logf[i]
            ));
            if i + stride >= self.len() && i != self.len() - 1 {
                i = self.len() - 1;
            } else {
                i += stride;
            }
        }
        out
    }
}

/// Geometric radius ladder r0 * 2^{i/4} up to and including r_end.
pub fn radius_ladder(r0: f64, r_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let r = r0 * 2f64.powf(i as f64 / 4.0);
        if r >= r_end {
            out.push(r_end);
            break;
        }
        out.push(r);
        i += 1;
    }
    out
}

/// Outcome of the scalar curvature-comparison ODE check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiOutcome {
    Holds { min_h: f64 },
    FailsAt { radius: f64, h: f64 },
    HypothesisViolated { h_start: f64, f_const: f64 },
}

impl RiccatiOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, RiccatiOutcome::Holds { .. })
    }
}

#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub label: &'static str,
    pub ok: bool,
    pub witness_radius: f64,
    pub margin: f64,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub profile_name: String,
    pub r_probe: f64,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn check(&self, label: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("assumption,ok,witness_radius,margin,note\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{:.6e},{:.6e},{}\n",
                c.label, c.ok, c.witness_radius, c.margin, c.note
            ));
        }
        out
    }
}

impl std::fmt::Display for AssumptionReport {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(fm, "assumption report: {} (probe {})", self.profile_name, self.r_probe)?;
        for c in &self.checks {
            writeln!(
                fm,
                "  {:>3}  {}  margin {:+.3e} at r = {:.4}  {}",
                c.label,
                if c.ok { "pass" } else { "FAIL" },
                c.margin,
                c.witness_radius,
                c.note
            )?;
        }
        Ok(())
    }
}

/// Model manifold with metric dr^2 + f_a(r)^2 dtheta^2 built from a profile.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    pub n: usize,
    pub profile: CurvatureProfile,
    pub fa: JacobiSolution,
    pub fb: JacobiSolution,
}

impl ModelManifold {
    pub fn new(profile: CurvatureProfile, n: usize, r_max: f64, step: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("dimension must be >= 2, got {n}")));
        }
        let pa = profile.clone();
        let pb = profile.clone();
        let mut fa = solve_jacobi_impl(&move |t| pa.a(t), r_max, step, "a", true)?;
        let mut fb = solve_jacobi_impl(&move |t| pb.b(t), r_max, step, "b", true)?;
        fa.k_id = format!("a:{}", profile.name);
        fb.k_id = format!("b:{}", profile.name);
        Ok(ModelManifold { n, profile, fa, fb })
    }

    pub fn r_max(&self) -> f64 {
        self.fa.r_max
    }

    /// Laplacian of the distance function: (n-1) f_a'(rho) / f_a(rho),
    /// exact for the model metric.
    pub fn laplacian_rho(&self, rho: f64) -> Result<f64> {
        if rho == 0.0 {
            return Err(Error::PoleSingularity);
        }
        Ok((self.n as f64 - 1.0) * self.fa.ratio(rho)?)
    }

    /// Inward mean curvature of the geodesic sphere of radius rho.
    pub fn sphere_mean_curvature(&self, rho: f64) -> Result<f64> {
        self.laplacian_rho(rho)
    }

    /// Integrates H' = (H^2 - F^2)/(n-1) inward from the sphere at rho_start
    /// and confirms H stays above F_const, mirroring the mean-curvature
    /// comparison argument. H blowing up counts as holding (it only grows).
    pub fn riccati_comparison_check(
        &self,
        f_const: f64,
        rho_start: f64,
        rho_end: f64,
    ) -> Result<RiccatiOutcome> {
        if f_const < 0.0 {
            return Err(Error::Parameter(format!("F must be >= 0, got {f_const}")));
        }
        let h0 = self.sphere_mean_curvature(rho_start)?;
        if h0 < f_const {
            return Ok(RiccatiOutcome::HypothesisViolated { h_start: h0, f_const });
        }
        let span = (rho_end - rho_start).abs().max(1e-6);
        let n_steps = ((span / 1e-3).ceil() as usize).clamp(100, 2_000_000);
        let h_step = span / n_steps as f64;
        let nm1 = self.n as f64 - 1.0;
        let mut h = h0;
        let mut min_h = h0;
        for i in 0..n_steps {
            let deriv = |h: f64| (h * h - f_const * f_const) / nm1;
            let d1 = deriv(h);
            let d2 = deriv(h + 0.5 * h_step * d1);
            let d3 = deriv(h + 0.5 * h_step * d2);
            let d4 = deriv(h + h_step * d3);
            h += h_step / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
            if !h.is_finite() || h > 1e9 {
                return Ok(RiccatiOutcome::Holds { min_h });
            }
            min_h = min_h.min(h);
            if h < f_const {
                return Ok(RiccatiOutcome::FailsAt {
                    radius: rho_start + (i + 1) as f64 * h_step,
                    h,
                });
            }
        }
        Ok(RiccatiOutcome::Holds { min_h })
    }

    /// Checks the seven pinching assumptions on [0, r_probe]. The two limit
    /// assumptions are replaced by the documented proxy: monotone decrease
    /// over the last decade of the radius ladder and a value below 1e-3 at
    /// the probe radius.
    pub fn check_assumptions(&self, r_probe: f64) -> Result<AssumptionReport> {
        let p = &self.profile;
        if r_probe < p.t1 {
            return Err(Error::ProbeBeforeAsymptotic { r_probe, t1: p.t1 });
        }
        if r_probe > self.r_max() {
            return Err(Error::OutOfRange { radius: r_probe, r_max: self.r_max() });
        }
        let ladder = radius_ladder(p.t1.max(1.0), r_probe);
        let mut checks = Vec::new();

        // A1: branch on monotonicity of b
        let b_increasing = p.b(r_probe) > p.b(p.t1.max(1.0)) + 1e-14;
        {
            let mut worst = f64::INFINITY;
            let mut worst_r = ladder[0];
            let mut ok = true;
            let mut note = String::new();
            for &r in &ladder {
                if b_increasing {
                    let m = p.a(r) * r - p.c1;
                    if m < worst {
                        worst = m;
                        worst_r = r;
                    }
                } else {
                    let m = 1e-6 - (p.a(r) * r / p.c1 - 1.0).abs();
                    if m < worst {
                        worst = m;
                        worst_r = r;
                    }
                }
            }
            if worst < -1e-12 {
                ok = false;
            }
            note.push_str(if b_increasing {
                "b increasing: a(t) >= C1/t"
            } else {
                "b decreasing: a(t) = C1/t"
            });
            checks.push(AssumptionCheck {
                label: "A1",
                ok,
                witness_radius: worst_r,
                margin: worst,
                note,
            });
        }

        // A2-A5 quantify over all t >= 0: dense samples plus the ladder
        let mut samples: Vec<f64> = (0..=512).map(|i| r_probe * i as f64 / 512.0).collect();
        samples.extend(ladder.iter().copied());

        let worst_of = |vals: &dyn Fn(f64) -> f64| {
            let mut worst = f64::INFINITY;
            let mut worst_r = 0.0;
            for &r in &samples {
                let m = vals(r);
                if m < worst {
                    worst = m;
                    worst_r = r;
                }
            }
            (worst, worst_r)
        };

        let (m2, r2) = worst_of(&|r| p.c2 - p.a(r));
        checks.push(AssumptionCheck {
            label: "A2",
            ok: m2 >= 0.0,
            witness_radius: r2,
            margin: m2,
            note: format!("C2 = {:.4}", p.c2),
        });

        let (m3, r3) = worst_of(&|r| p.c2 * p.b(r) - p.b(r + 1.0));
        checks.push(AssumptionCheck {
            label: "A3",
            ok: m3 >= -1e-12,
            witness_radius: r3,
            margin: m3,
            note: "b(t+1) <= C2 b(t)".into(),
        });

        let (m4, r4) = worst_of(&|r| p.c2 * p.b(r) - p.b(r / 2.0));
        checks.push(AssumptionCheck {
            label: "A4",
            ok: m4 >= -1e-12,
            witness_radius: r4,
            margin: m4,
            note: "b(t/2) <= C2 b(t)".into(),
        });

        let (m5, r5) = worst_of(&|r| p.b(r) - p.c3 * (1.0 + r).powf(-p.q));
        checks.push(AssumptionCheck {
            label: "A5",
            ok: m5 > 0.0 && p.c3 > 0.0,
            witness_radius: r5,
            margin: if p.c3 > 0.0 { m5 } else { f64::NEG_INFINITY },
            note: format!("C3 = {:.4}, Q = {:.2}", p.c3, p.q),
        });

        // A6, A7: decreasing-trend proxy over the last decade of the ladder
        let decade: Vec<f64> =
            ladder.iter().copied().filter(|&r| r >= r_probe / 10.0).collect();
        let trend_check = |label: &'static str,
                           val: &dyn Fn(f64) -> Result<f64>|
         -> Result<AssumptionCheck> {
            let mut vals = Vec::new();
            for &r in &decade {
                vals.push(val(r)?.abs());
            }
            let final_v = *vals.last().unwrap();
            let decreasing = vals.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            Ok(AssumptionCheck {
                label,
                ok: decreasing && final_v < 1e-3,
                witness_radius: r_probe,
                margin: 1e-3 - final_v,
                note: format!(
                    "proxy: |value| {} over last decade, final {:.3e}",
                    if decreasing { "decreasing" } else { "NOT decreasing" },
                    final_v
                ),
            })
        };

        checks.push(trend_check("A6", &|r| {
            let b = p.b(r);
            if b == 0.0 {
                return Ok(0.0);
            }
            Ok(p.b_prime(r) / (b * b))
        })?);

        checks.push(trend_check("A7", &|r| {
            let b = p.b(r);
            if b == 0.0 {
                return Ok(0.0);
            }
            // t^{1+C4} b(t) / f_a'(t), computed in logs so exponential
            // warping stays representable
            let log_fp = self.fa.log_f(r)? + self.fa.ratio(r)?.ln();
            let log_v = (1.0 + p.c4) * r.ln() + b.ln() - log_fp;
            Ok(log_v.exp())
        })?);

        Ok(AssumptionReport {
            profile_name: p.name.clone(),
            r_probe,
            checks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_warp_is_identity() {
        let s = solve_jacobi(&|_| 0.0, 10.0, 1e-3).unwrap();
        let mut worst = 0.0f64;
        for i in 0..s.len() {
            worst = worst.max((s.node_f(i) - s.node_r(i)).abs());
        }
        assert!(worst < 1e-12, "max abs error {worst}");
    }

    #[test]
    fn constant_curvature_matches_sinh() {
        let s = solve_jacobi(&|_| 1.0, 5.0, 1e-3).unwrap();
        let mut worst = 0.0f64;
        for i in 1..s.len() {
            let r = s.node_r(i);
            worst = worst.max((s.node_f(i) - r.sinh()).abs() / r.sinh());
        }
        assert!(worst < 1e-9, "max rel error {worst}");
    }

    #[test]
    fn power_profile_matches_glued_closed_form() {
        // a(t) = sqrt(2)/t for t >= 1 gives f = c1 t^2 + c2 / t there; the
        // coefficients follow from C^1 matching of f, f' at t = 1. With the
        // ramp on [1/2, 1] the matching values come from the integrator
        // itself at t = 1, solved as a 2x2 linear system.
        let prof = power(2.0, 0.5).unwrap();
        let s = solve_jacobi(&|t| prof.a(t), 50.0, 1e-3).unwrap();
        let f1 = s.f(1.0).unwrap();
        let fp1 = s.f_prime(1.0).unwrap();
        // f1 = c1 + c2, fp1 = 2 c1 - c2  =>  c1 = (f1 + fp1)/3
        let c1 = (f1 + fp1) / 3.0;
        let c2 = f1 - c1;
        let mut worst = 0.0f64;
        for &r in &[1.0, 2.0, 5.0, 10.0, 25.0, 50.0] {
            let exact = c1 * r * r + c2 / r;
            worst = worst.max((s.f(r).unwrap() - exact).abs() / exact);
        }
        assert!(worst < 1e-7, "max rel error {worst}");
    }

    #[test]
    fn pure_power_profile_coefficients() {
        // without the ramp (a = sqrt(2)/t down to 0.5 is singular; glue at
        // exactly t=1 with f(t)=t below): c1 = 2/3, c2 = 1/3
        let c1: f64 = 2.0 / 3.0;
        let c2: f64 = 1.0 / 3.0;
        assert!((c1 + c2 - 1.0).abs() < 1e-15); // f(1) = 1
        assert!((2.0 * c1 - c2 - 1.0).abs() < 1e-15); // f'(1) = 1
    }

    #[test]
    fn log_space_handles_exponential_growth() {
        let s = solve_jacobi_auto(&|_| 1.0, 800.0, 1e-3).unwrap();
        assert!(s.switched_to_log_at().is_some());
        // log sinh(r) ~ r - log 2 for large r
        let lf = s.log_f(700.0).unwrap();
        assert!((lf - (700.0 - 2f64.ln())).abs() < 1e-6, "log f = {lf}");
        assert!((s.ratio(700.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn plain_solver_reports_overflow() {
        match solve_jacobi(&|_| 1.0, 800.0, 1e-2) {
            Err(Error::WarpOverflow { .. }) => {}
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn laplacian_rho_values() {
        let m = ModelManifold::new(euclidean(), 2, 10.0, 1e-3).unwrap();
        assert!((m.laplacian_rho(2.0).unwrap() - 0.5).abs() < 1e-10);
        let mh = ModelManifold::new(hyperbolic(1.0), 2, 10.0, 1e-3).unwrap();
        let coth1 = 1f64.cosh() / 1f64.sinh();
        assert!((mh.laplacian_rho(1.0).unwrap() - coth1).abs() < 1e-9);
        assert!(matches!(m.laplacian_rho(0.0), Err(Error::PoleSingularity)));
    }

    #[test]
    fn laplacian_rho_power_preset_slope() {
        let m = ModelManifold::new(power(2.0, 0.5).unwrap(), 3, 200.0, 1e-3).unwrap();
        // f_a ~ c1 r^2, so (n-1) f'/f -> 2 * (2/r)
        let v = m.laplacian_rho(150.0).unwrap();
        assert!((v * 150.0 - 4.0).abs() < 0.02, "r * laplacian = {}", v * 150.0);
    }

    #[test]
    fn riccati_comparison_cases() {
        let mh = ModelManifold::new(hyperbolic(1.0), 2, 30.0, 1e-3).unwrap();
        assert!(mh.riccati_comparison_check(0.0, 1.0, 20.0).unwrap().holds());
        assert!(mh.riccati_comparison_check(1.0, 1.0, 20.0).unwrap().holds());
        let me = ModelManifold::new(euclidean(), 2, 10.0, 1e-3).unwrap();
        match me.riccati_comparison_check(0.6, 2.0, 5.0).unwrap() {
            RiccatiOutcome::HypothesisViolated { h_start, f_const } => {
                assert!((h_start - 0.5).abs() < 1e-9);
                assert!((f_const - 0.6).abs() < 1e-15);
            }
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn assumptions_for_pinching_presets() {
        // A1-A6 hold at a probe deep enough for the trend proxies. The A7
        // ratio decays like t^{C4 - eps/2}, a power law too slow to dip
        // under the 1e-3 proxy threshold at any tabulable radius, so its
        // check reports the decreasing trend but fails the final-value test.
        let mp = ModelManifold::new(power(2.0, 0.5).unwrap(), 2, 2100.0, 1e-2).unwrap();
        let rp = mp.check_assumptions(2048.0).unwrap();
        for label in ["A1", "A2", "A3", "A4", "A5", "A6"] {
            assert!(rp.check(label).unwrap().ok, "{label} failed:\n{rp}");
        }
        let a7 = rp.check("A7").unwrap();
        assert!(!a7.ok && a7.note.contains("decreasing"), "{rp}");

        let mx = ModelManifold::new(exponential(1.0, 0.5).unwrap(), 2, 70.0, 1e-3).unwrap();
        let rx = mx.check_assumptions(64.0).unwrap();
        for label in ["A1", "A2", "A3", "A4", "A5", "A6"] {
            assert!(rx.check(label).unwrap().ok, "{label} failed:\n{rx}");
        }
        let a7x = rx.check("A7").unwrap();
        assert!(!a7x.ok && a7x.note.contains("decreasing"), "{rx}");
    }

    #[test]
    fn flat_space_fails_lower_bound() {
        let m = ModelManifold::new(euclidean(), 2, 100.0, 1e-2).unwrap();
        let r = m.check_assumptions(100.0).unwrap();
        assert!(!r.check("A5").unwrap().ok, "{r}");
    }

    #[test]
    fn probe_before_t1_rejected() {
        let m = ModelManifold::new(power(2.0, 0.5).unwrap(), 2, 10.0, 1e-2).unwrap();
        assert!(matches!(
            m.check_assumptions(0.7),
            Err(Error::ProbeBeforeAsymptotic { .. })
        ));
    }
}
