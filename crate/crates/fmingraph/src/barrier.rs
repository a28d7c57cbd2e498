//! Barrier construction and pointwise verification: the exponential height
//! barrier, the logarithmic boundary-gradient barrier, the global radial
//! supersolution V built from the weight a0, and the asymptotic cone barrier
//! psi = A (R3^d rho^-d + h) with a smooth angular cutoff h.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{radius_ladder, ModelManifold};
use crate::quad::{adaptive_simpson, power_tail};

/// Value/derivative table on a non-uniform radius grid with cubic Hermite
/// interpolation.
#[derive(Debug, Clone)]
pub struct RadialTable {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub d: Vec<f64>,
}

impl RadialTable {
    fn locate(&self, x: f64) -> Result<usize> {
        let last = *self.r.last().unwrap();
        if !(self.r[0]..=last * (1.0 + 1e-12)).contains(&x) {
            return Err(Error::OutOfRange { radius: x, r_max: last });
        }
        Ok(self.r.partition_point(|&s| s <= x).clamp(1, self.r.len() - 1) - 1)
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        let h = self.r[i + 1] - self.r[i];
        let t = ((x - self.r[i]) / h).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.v[i]
            + (t3 - 2.0 * t2 + t) * h * self.d[i]
            + (-2.0 * t3 + 3.0 * t2) * self.v[i + 1]
            + (t3 - t2) * h * self.d[i + 1])
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let i = self.locate(x)?;
        let h = self.r[i + 1] - self.r[i];
        let t = ((x - self.r[i]) / h).clamp(0.0, 1.0);
        // linear blend of endpoint slopes plus the Hermite correction
        let t2 = t * t;
        Ok((6.0 * t2 - 6.0 * t) * (self.v[i] - self.v[i + 1]) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.d[i]
            + (3.0 * t2 - 2.0 * t) * self.d[i + 1])
    }
}

/// Radius nodes for the barrier tables: uniform close to the pole, geometric
/// farther out.
fn barrier_nodes(r_max: f64) -> Vec<f64> {
    let mut nodes = Vec::new();
    let inner = 2.0f64.min(r_max);
    let n_inner = 200;
    for i in 0..=n_inner {
        nodes.push(inner * i as f64 / n_inner as f64);
    }
    let mut r = inner;
    while r < r_max {
        r = (r * 1.02).min(r_max);
        nodes.push(r);
    }
    nodes
}

/// g(r) = f_a^{1-n}(r) int_0^r a0(t) f_a^{n-1}(t) dt, computed cell by cell
/// in ratio form exp((n-1)(log f(t) - log f(r))) so exponentially growing
/// warping functions never overflow.
pub fn build_g(m: &ModelManifold, a0: &dyn Fn(f64) -> f64, r_max: f64) -> Result<RadialTable> {
    let nodes = barrier_nodes(r_max.min(m.r_max()));
    for &r in &nodes {
        let v = a0(r);
        if v < 0.0 || !v.is_finite() {
            return Err(Error::NegativeWeight { radius: r, value: v });
        }
    }
    let nm1 = m.n as f64 - 1.0;
    let mut v = vec![0.0f64];
    let mut d = vec![a0(0.0)]; // g'(0) = a0(0) - (n-1) lim (f'/f) g = a0(0)
    for w in nodes.windows(2) {
        let (ra, rb) = (w[0], w[1]);
        let lb = m.fa.log_f(rb)?;
        let integrand = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let lt = m.fa.log_f(t).unwrap_or(f64::NEG_INFINITY);
            a0(t) * (nm1 * (lt - lb)).exp()
        };
        let cell = adaptive_simpson(&integrand, ra, rb, 1e-10)?;
        let decay = if ra == 0.0 {
            0.0
        } else {
            (nm1 * (m.fa.log_f(ra)? - lb)).exp()
        };
        let g = decay * v.last().unwrap() + cell;
        d.push(a0(rb) - nm1 * m.fa.ratio(rb)? * g);
        v.push(g);
    }
    Ok(RadialTable { r: nodes, v, d })
}

/// Scaled outer integral itilde(r) = f_a^{n-1}(r) int_r^inf f_a^{1-n}(s) ds,
/// bounded even for exponential warping. The infinite tail is closed in the
/// profile's asymptotic regime: 1/((n-1) f'/f) when f'/f has stabilized
/// (exponential growth), r/((n-1) phi - 1) with phi = r f'/f otherwise.
fn build_itilde(m: &ModelManifold, r_max: f64) -> Result<RadialTable> {
    let nodes = barrier_nodes(r_max.min(m.r_max()));
    let nm1 = m.n as f64 - 1.0;
    let n_nodes = nodes.len();
    let r_end = nodes[n_nodes - 1];
    let q_end = m.fa.ratio(r_end)?;
    let q_half = m.fa.ratio(0.5 * r_end)?;
    let tail = if (q_end - q_half).abs() < 0.05 * q_end.abs() {
        1.0 / (nm1 * q_end)
    } else {
        let phi = r_end * q_end;
        if nm1 * phi <= 1.0 + 1e-9 {
            return Err(Error::DivergentIntegral {
                what: format!(
                    "outer warping integral: f_a grows like r^{phi:.3}, need (n-1) phi > 1"
                ),
            });
        }
        r_end / (nm1 * phi - 1.0)
    };
    let mut v = vec![0.0f64; n_nodes];
    let mut d = vec![0.0f64; n_nodes];
    v[n_nodes - 1] = tail;
    d[n_nodes - 1] = nm1 * q_end * tail - 1.0;
    for i in (0..n_nodes - 1).rev() {
        let (ra, rb) = (nodes[i], nodes[i + 1]);
        let la = m.fa.log_f(ra)?;
        let cell = if ra == 0.0 {
            // f^{n-1}(0) = 0 kills the scaled integral at the pole
            0.0
        } else {
            adaptive_simpson(
                &|s: f64| (nm1 * (la - m.fa.log_f(s).unwrap_or(f64::INFINITY))).exp(),
                ra,
                rb,
                1e-10,
            )?
        };
        let decay = if ra == 0.0 {
            0.0
        } else {
            (nm1 * (la - m.fa.log_f(rb)?)).exp()
        };
        v[i] = cell + decay * v[i + 1];
        d[i] = if ra == 0.0 {
            0.0
        } else {
            nm1 * m.fa.ratio(ra)? * v[i] - 1.0
        };
    }
    Ok(RadialTable { r: nodes, v, d })
}

/// Two-jet of a surface over the polar chart.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet2 {
    pub v: f64,
    pub vr: f64,
    pub vt: f64,
    pub vrr: f64,
    pub vrt: f64,
    pub vtt: f64,
}

impl Jet2 {
    pub fn negated(self) -> Jet2 {
        Jet2 {
            v: -self.v,
            vr: -self.vr,
            vt: -self.vt,
            vrr: -self.vrr,
            vrt: -self.vrt,
            vtt: -self.vtt,
        }
    }
}

/// Anything with analytic first and second derivatives that the operator
/// verifier can probe pointwise.
pub trait BarrierSurface {
    fn jet(&self, r: f64, theta: f64) -> Result<Jet2>;
    fn describe(&self) -> String;
    /// true when the surface has no angular dependence
    fn is_radial(&self) -> bool {
        true
    }
}

/// Height barrier phi_sup + h(d), h(d) = (e^{AC}/C)(1 - e^{-Cd}), on the ball
/// of radius A/2 with d the distance to the boundary sphere.
#[derive(Debug, Clone)]
pub struct HeightBarrier {
    pub a_diam: f64,
    pub c: f64,
    pub f_sup: f64,
    pub phi_sup: f64,
}

/// Default constant C = F_sup + 1 (any C > F_sup works).
pub fn build_height_barrier(a_diam: f64, f_sup: f64, phi_sup: f64) -> Result<HeightBarrier> {
    if !f_sup.is_finite() {
        return Err(Error::UnboundedDrift);
    }
    if a_diam < 0.0 {
        return Err(Error::Parameter(format!("diameter must be >= 0, got {a_diam}")));
    }
    Ok(HeightBarrier { a_diam, c: f_sup + 1.0, f_sup, phi_sup })
}

/// Caller-chosen C; lets experiments probe the failure mode C <= F_sup.
pub fn build_height_barrier_with_c(
    a_diam: f64,
    f_sup: f64,
    phi_sup: f64,
    c: f64,
) -> Result<HeightBarrier> {
    if !f_sup.is_finite() {
        return Err(Error::UnboundedDrift);
    }
    if c <= 0.0 {
        return Err(Error::Parameter(format!("C must be positive, got {c}")));
    }
    Ok(HeightBarrier { a_diam, c, f_sup, phi_sup })
}

impl HeightBarrier {
    pub fn ball_radius(&self) -> f64 {
        0.5 * self.a_diam
    }

    pub fn h(&self, dist: f64) -> f64 {
        ((self.a_diam * self.c).exp() / self.c) * (1.0 - (-self.c * dist).exp())
    }

    pub fn h_prime(&self, dist: f64) -> f64 {
        (self.c * (self.a_diam - dist)).exp()
    }

    /// The height estimate constant h(A): sup |u| <= sup |phi| + h(A).
    pub fn height_bound(&self) -> f64 {
        self.h(self.a_diam)
    }
}

impl BarrierSurface for HeightBarrier {
    fn jet(&self, r: f64, _theta: f64) -> Result<Jet2> {
        let dist = self.ball_radius() - r;
        if dist < 0.0 {
            return Err(Error::OutOfRange { radius: r, r_max: self.ball_radius() });
        }
        let hp = self.h_prime(dist);
        Ok(Jet2 {
            v: self.phi_sup + self.h(dist),
            vr: -hp,
            vrr: -self.c * hp,
            ..Default::default()
        })
    }

    fn describe(&self) -> String {
        format!(
            "height barrier (A = {}, C = {}, F_sup = {})",
            self.a_diam, self.c, self.f_sup
        )
    }
}

/// Boundary-gradient barrier psi(t) = C log(1+Kt)/log(1+K) in the collar
/// variable t = distance to the boundary.
#[derive(Debug, Clone)]
pub struct GradientBarrier {
    pub eps: f64,
    pub k: f64,
    pub c: f64,
}

pub fn build_gradient_barrier(eps: f64, k: f64) -> Result<GradientBarrier> {
    if !(0.0 < eps && eps < 0.5) {
        return Err(Error::Parameter(format!(
            "collar parameter eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let k_min = (1.0 - 2.0 * eps) / (eps * eps);
    if k < k_min {
        return Err(Error::Parameter(format!(
            "K must satisfy K >= (1-2 eps)/eps^2 = {k_min}, got {k}"
        )));
    }
    let c = (eps + 1.0 / k) * (1.0 + k).ln();
    Ok(GradientBarrier { eps, k, c })
}

impl GradientBarrier {
    pub fn psi(&self, t: f64) -> f64 {
        self.c * (1.0 + self.k * t).ln() / (1.0 + self.k).ln()
    }

    pub fn psi_prime(&self, t: f64) -> f64 {
        self.c * self.k / ((1.0 + self.k * t) * (1.0 + self.k).ln())
    }

    /// Boundary gradient bound psi'(0) = C K / log(1+K) = eps K + 1.
    pub fn boundary_bound(&self) -> f64 {
        self.psi_prime(0.0)
    }
}

/// Picks generous (eps, K) so that psi'(0) dominates the boundary slope
/// suggested by the interior height u_sup, the boundary data C^2 size, the
/// boundary mean curvature, and the data gradient bound p_grad.
pub fn gradient_barrier_params(
    u_sup: f64,
    phi_c2: f64,
    h_bdry: f64,
    p_grad: f64,
) -> (f64, f64) {
    let c1_sq = 1.0 / (2.0 + p_grad * p_grad);
    let c2 = (2.0 + p_grad * p_grad).sqrt() - 1.0;
    let rhs = ((c2 * h_bdry.abs() + phi_c2 + p_grad * p_grad * h_bdry.abs())
        / (c1_sq * (1.0 + p_grad * p_grad)))
        .max(2.0);
    let eps = (0.9 / rhs).min(0.45);
    let mut k = ((1.0 - 2.0 * eps) / (eps * eps)).max(8.0);
    // grow K until the barrier height C covers twice the solution scale
    while (eps + 1.0 / k) * (1.0 + k).ln() < 2.0 * (u_sup.abs() + phi_c2) {
        k *= 2.0;
        if k > 1e12 {
            break;
        }
    }
    (eps, k)
}

/// Global radial supersolution V with V' = -g, built from truncated improper
/// integrals with analytic tails. `h_const` is the finite limit constant in
/// its definition; `h_converged` records whether the truncation ladder met
/// the 1e-8 budget (slowly decaying weights only reach it asymptotically).
#[derive(Clone)]
pub struct GlobalBarrier {
    pub phi_sup: f64,
    pub table: RadialTable,
    pub g: RadialTable,
    pub h_const: f64,
    pub h_converged: bool,
    pub h_ladder: Vec<(f64, f64)>,
    pub h_gap: f64,
    manifold: ModelManifold,
    a0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for GlobalBarrier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GlobalBarrier")
            .field("phi_sup", &self.phi_sup)
            .field("h_const", &self.h_const)
            .field("h_converged", &self.h_converged)
            .field("h_gap", &self.h_gap)
            .finish()
    }
}

pub fn build_global_v(
    m: &ModelManifold,
    a0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    phi_sup: f64,
    r_max: f64,
) -> Result<GlobalBarrier> {
    let g = build_g(m, a0.as_ref(), r_max)?;
    if g.v.iter().all(|&x| x == 0.0) {
        // vanishing weight: V is the constant phi_sup regardless of the
        // warping integrals
        let nodes = g.r.clone();
        let n = nodes.len();
        return Ok(GlobalBarrier {
            phi_sup,
            table: RadialTable { r: nodes.clone(), v: vec![phi_sup; n], d: vec![0.0; n] },
            g,
            h_const: 0.0,
            h_converged: true,
            h_ladder: nodes.iter().rev().take(8).rev().map(|&r| (r, 0.0)).collect(),
            h_gap: 0.0,
            manifold: m.clone(),
            a0,
        });
    }
    let itilde = build_itilde(m, r_max)?;
    let nodes = g.r.clone();

    // k_cum(r) = int_0^r a0(t) itilde(t) dt, the inner double integral in
    // scaled form; its full value (plus tail) is the limit constant -H
    let mut k_cum = vec![0.0f64];
    for w in nodes.windows(2) {
        let cell = adaptive_simpson(
            &|t: f64| a0(t) * itilde.value(t).unwrap_or(0.0),
            w[0],
            w[1],
            1e-10,
        )?;
        k_cum.push(k_cum.last().unwrap() + cell);
    }
    let r_end = *nodes.last().unwrap();
    let w_tail = |t: f64| a0(t) * itilde.value(t.min(r_end)).unwrap_or(0.0);
    let tail = power_tail(&w_tail, r_end, "double integral of a0 against the warping kernel")?;
    let k_inf = k_cum.last().unwrap() + tail;

    // truncation ladder for the limit constant, with the convergence budget
    let mut h_ladder = Vec::new();
    for i in (0..8).rev() {
        let r = r_end / 2f64.powi(i);
        let idx = nodes.partition_point(|&s| s < r).min(nodes.len() - 1);
        let bracket = itilde.v[idx] * g.v[idx] - k_cum[idx];
        h_ladder.push((nodes[idx], bracket));
    }
    let h_gap = (h_ladder[h_ladder.len() - 1].1 - h_ladder[h_ladder.len() - 2].1).abs();
    let monotone = h_ladder.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-14);
    let h_converged = monotone && h_gap < 1e-8;
    let h_const = -k_inf;

    // V(r) = V(0) - int_0^r g with V(0) = -H + phi_sup; integrating the
    // derivative identity directly keeps the table exactly monotone even
    // where the bracket form suffers cancellation near the pole
    let mut v = Vec::with_capacity(nodes.len());
    let mut d = Vec::with_capacity(nodes.len());
    v.push(k_inf + phi_sup);
    d.push(0.0);
    for (i, w) in nodes.windows(2).enumerate() {
        let cell = adaptive_simpson(&|t: f64| g.value(t).unwrap_or(0.0), w[0], w[1], 1e-11)?;
        v.push(v[i] - cell);
        d.push(-g.v[i + 1]);
    }
    Ok(GlobalBarrier {
        phi_sup,
        table: RadialTable { r: nodes, v, d },
        g,
        h_const,
        h_converged,
        h_ladder,
        h_gap,
        manifold: m.clone(),
        a0,
    })
}

impl GlobalBarrier {
    pub fn value(&self, r: f64) -> Result<f64> {
        self.table.value(r)
    }

    /// The admissible drift bound of the construction:
    /// (a0 + (n-1)(f_a'/f_a) g^3) / (1 + g^2)^{3/2}.
    pub fn drift_bound(&self, r: f64) -> Result<f64> {
        let nm1 = self.manifold.n as f64 - 1.0;
        if r == 0.0 {
            return Ok((self.a0)(0.0));
        }
        let gv = self.g.value(r)?;
        Ok(((self.a0)(r) + nm1 * self.manifold.fa.ratio(r)? * gv.powi(3))
            / (1.0 + gv * gv).powf(1.5))
    }
}

impl BarrierSurface for GlobalBarrier {
    fn jet(&self, r: f64, _theta: f64) -> Result<Jet2> {
        let gv = self.g.value(r)?;
        let nm1 = self.manifold.n as f64 - 1.0;
        let ratio = if r == 0.0 { 0.0 } else { self.manifold.fa.ratio(r)? };
        let vrr = if r == 0.0 {
            -(self.a0)(0.0)
        } else {
            nm1 * ratio * gv - (self.a0)(r)
        };
        Ok(Jet2 {
            v: self.table.value(r)?,
            vr: -gv,
            vrr,
            ..Default::default()
        })
    }

    fn describe(&self) -> String {
        format!(
            "global supersolution V (phi_sup = {}, limit constant {:.6e})",
            self.phi_sup, self.h_const
        )
    }
}

/// Quintic C^2 ramp: 0 below 0, 1 above 1.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

pub fn smoothstep_d1(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

pub fn smoothstep_d2(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
}

/// Smooth angular cutoff h(r, theta) = S(max(2 - 2r, L |theta|) / sigma):
/// identically 1 on the half-radius ball and outside the cone
/// |theta| >= sigma/L for r >= 1, identically 0 near the axis for r >= 1.
#[derive(Debug, Clone)]
pub struct AngularCutoff {
    pub l: f64,
    pub sigma: f64,
    pub r1: f64,
}

pub fn build_angular_cutoff(l: f64, r1: f64, sigma: f64) -> Result<AngularCutoff> {
    if l <= 8.0 / std::f64::consts::PI {
        return Err(Error::Parameter(format!(
            "cone parameter L must exceed 8/pi = {:.6}, got {l}",
            8.0 / std::f64::consts::PI
        )));
    }
    if sigma <= 0.0 || r1 <= 0.0 {
        return Err(Error::Parameter(format!(
            "need sigma > 0 and R1 > 0, got sigma = {sigma}, R1 = {r1}"
        )));
    }
    Ok(AngularCutoff { l, sigma, r1 })
}

impl AngularCutoff {
    pub fn jet(&self, r: f64, theta: f64) -> Jet2 {
        let radial_arg = (2.0 - 2.0 * r) / self.sigma;
        let ang_arg = self.l * theta.abs() / self.sigma;
        if radial_arg > ang_arg {
            let s1 = smoothstep_d1(radial_arg);
            Jet2 {
                v: smoothstep(radial_arg),
                vr: s1 * (-2.0 / self.sigma),
                vrr: smoothstep_d2(radial_arg) * 4.0 / (self.sigma * self.sigma),
                ..Default::default()
            }
        } else {
            let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
            let s1 = smoothstep_d1(ang_arg);
            Jet2 {
                v: smoothstep(ang_arg),
                vt: s1 * sgn * self.l / self.sigma,
                vtt: smoothstep_d2(ang_arg) * (self.l / self.sigma).powi(2),
                ..Default::default()
            }
        }
    }

    /// Measured gradient constant: sup of |grad h| * f_a over the cone
    /// shell theta <= 3 sigma/L, r in [R1, r_max], on an nr x nt grid.
    pub fn measured_c1(&self, m: &ModelManifold, r_max: f64, nr: usize, nt: usize) -> Result<f64> {
        let mut sup = 0.0f64;
        let theta_max = 3.0 * self.sigma / self.l;
        for i in 0..nr {
            let r = self.r1 + (r_max - self.r1) * (i as f64 + 0.5) / nr as f64;
            let f = m.fa.f(r)?;
            for j in 0..nt {
                let th = theta_max * (j as f64 + 0.5) / nt as f64;
                let jet = self.jet(r, th);
                let grad = (jet.vr * jet.vr + (jet.vt / f).powi(2)).sqrt();
                sup = sup.max(grad * f);
            }
        }
        Ok(sup)
    }
}

/// phi_1 and the admissible exponent ceiling delta_1 of the asymptotic
/// barrier, from the profile constants.
pub fn delta1(c1: f64, c4: f64, n: usize) -> (f64, f64) {
    let phi1 = 0.5 * (1.0 + (1.0 + 4.0 * c1 * c1).sqrt());
    let nm1 = n as f64 - 1.0;
    let d1 = c4.min((-1.0 + nm1 * phi1) / (1.0 + nm1 * phi1));
    (phi1, d1)
}

/// Asymptotic barrier psi(r, theta) = A (R3^delta r^-delta + h(r, theta)).
#[derive(Debug, Clone)]
pub struct AsymptoticBarrier {
    pub a: f64,
    pub delta: f64,
    pub r3: f64,
    pub cutoff: AngularCutoff,
}

pub fn build_asymptotic_psi(
    m: &ModelManifold,
    a: f64,
    delta: f64,
    r3: f64,
    cutoff: AngularCutoff,
) -> Result<AsymptoticBarrier> {
    let (_, d1) = delta1(m.profile.c1, m.profile.c4, m.n);
    let cap = d1.min(m.profile.eps);
    if !(delta > 0.0 && delta < cap) {
        return Err(Error::Parameter(format!(
            "delta must lie in (0, min(delta1, eps)) = (0, {cap}), got {delta} (delta1 = {d1})"
        )));
    }
    if a <= 0.0 || r3 <= 0.0 {
        return Err(Error::Parameter(format!("need A > 0 and R3 > 0, got A = {a}, R3 = {r3}")));
    }
    Ok(AsymptoticBarrier { a, delta, r3, cutoff })
}

impl BarrierSurface for AsymptoticBarrier {
    fn jet(&self, r: f64, theta: f64) -> Result<Jet2> {
        if r <= 0.0 {
            return Err(Error::PoleSingularity);
        }
        let d = self.delta;
        let scale = self.a * self.r3.powf(d);
        let h = self.cutoff.jet(r, theta);
        Ok(Jet2 {
            v: scale * r.powf(-d) + self.a * h.v,
            vr: -d * scale * r.powf(-d - 1.0) + self.a * h.vr,
            vt: self.a * h.vt,
            vrr: d * (d + 1.0) * scale * r.powf(-d - 2.0) + self.a * h.vrr,
            vrt: self.a * h.vrt,
            vtt: self.a * h.vtt,
        })
    }

    fn describe(&self) -> String {
        format!(
            "asymptotic barrier (A = {}, delta = {}, R3 = {}, L = {})",
            self.a, self.delta, self.r3, self.cutoff.l
        )
    }

    fn is_radial(&self) -> bool {
        false
    }
}

/// Where a differential inequality is checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// r_min <= r <= r_max, all angles
    Annulus { r_min: f64, r_max: f64 },
    /// r_min <= r <= r_max, |theta| <= theta_max
    ConeShell { r_min: f64, r_max: f64, theta_max: f64 },
}

impl Region {
    fn bounds(&self) -> (f64, f64, f64) {
        match *self {
            Region::Annulus { r_min, r_max } => (r_min, r_max, std::f64::consts::PI),
            Region::ConeShell { r_min, r_max, theta_max } => (r_min, r_max, theta_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// require Q~[v] < 0 (margin = -Q~[v])
    Supersolution,
    /// require Q~_-[-v] = div(grad(-v)/W) - F > 0 on the negated surface
    Subsolution,
}

#[derive(Debug, Clone)]
pub struct BarrierReport {
    pub description: String,
    pub region: String,
    pub nr: usize,
    pub nt: usize,
    pub worst_margin: f64,
    pub worst_r: f64,
    pub worst_theta: f64,
    pub pass: bool,
    pub rows: Vec<(f64, f64, f64, f64)>,
}

impl BarrierReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,value,margin\n");
        for (r, th, v, mg) in &self.rows {
            out.push_str(&format!("{r:.6e},{th:.6e},{v:.6e},{mg:.6e}\n"));
        }
        out
    }
}

impl std::fmt::Display for BarrierReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "barrier check: {}", self.description)?;
        writeln!(f, "  region: {} ({} x {} nodes)", self.region, self.nr, self.nt)?;
        writeln!(
            f,
            "  verdict: {}  worst margin {:+.6e} at (r, theta) = ({:.4}, {:.4})",
            if self.pass { "pass" } else { "FAIL" },
            self.worst_margin,
            self.worst_r,
            self.worst_theta
        )
    }
}

/// The graph operator applied to an analytic two-jet on the model manifold:
/// div(grad v / sqrt(1+|grad v|^2)) expanded in polar coordinates.
pub fn mean_curvature_of_jet(m: &ModelManifold, r: f64, jet: &Jet2) -> Result<f64> {
    let f = m.fa.f(r)?;
    let ratio = m.fa.ratio(r)?;
    let nm1 = m.n as f64 - 1.0;
    let f2 = f * f;
    let g = jet.vr * jet.vr + jet.vt * jet.vt / f2;
    let lap = jet.vrr + nm1 * ratio * jet.vr + jet.vtt / f2;
    let g_r = 2.0 * jet.vr * jet.vrr + 2.0 * jet.vt * jet.vrt / f2
        - 2.0 * jet.vt * jet.vt * ratio / f2;
    let g_t = 2.0 * jet.vr * jet.vrt + 2.0 * jet.vt * jet.vtt / f2;
    let inner = g_r * jet.vr + g_t * jet.vt / f2;
    Ok(((1.0 + g) * lap - 0.5 * inner) / (1.0 + g).powf(1.5))
}

/// Evaluates the differential inequality of a barrier over a region grid.
/// F(r) is the drift gradient bound; for the supersolution mode the margin
/// at each node is -(div term + F), for the subsolution mode the surface is
/// negated and the margin is div term - F.
pub fn verify_supersolution(
    surface: &dyn BarrierSurface,
    f_bound: &dyn Fn(f64) -> Result<f64>,
    m: &ModelManifold,
    region: Region,
    nr: usize,
    nt: usize,
    mode: VerifyMode,
) -> Result<BarrierReport> {
    let (r_min, r_max, theta_max) = region.bounds();
    if r_min <= 0.0 && !surface.is_radial() {
        return Err(Error::PoleSingularity);
    }
    let nt = if surface.is_radial() { 1 } else { nt.max(1) };
    let mut worst = f64::INFINITY;
    let (mut worst_r, mut worst_th) = (r_min, 0.0);
    let mut rows = Vec::with_capacity(nr * nt);
    for i in 0..nr {
        let r = r_min + (r_max - r_min) * (i as f64 + 0.5) / nr as f64;
        let fb = f_bound(r)?;
        for j in 0..nt {
            let th = theta_max * (j as f64 + 0.5) / nt as f64;
            let jet = surface.jet(r, th)?;
            let (margin, value) = match mode {
                VerifyMode::Supersolution => {
                    let div = mean_curvature_of_jet(m, r, &jet)?;
                    (-(div + fb), jet.v)
                }
                VerifyMode::Subsolution => {
                    let neg = jet.negated();
                    let div = mean_curvature_of_jet(m, r, &neg)?;
                    (div - fb, neg.v)
                }
            };
            if margin < worst {
                worst = margin;
                worst_r = r;
                worst_th = th;
            }
            rows.push((r, th, value, margin));
        }
    }
    Ok(BarrierReport {
        description: format!(
            "{} [{}]",
            surface.describe(),
            match mode {
                VerifyMode::Supersolution => "supersolution",
                VerifyMode::Subsolution => "subsolution mirror",
            }
        ),
        region: match region {
            Region::Annulus { r_min, r_max } => format!("annulus [{r_min}, {r_max}]"),
            Region::ConeShell { r_min, r_max, theta_max } => {
                format!("cone shell [{r_min}, {r_max}] x [0, {theta_max}]")
            }
        },
        nr,
        nt,
        worst_margin: worst,
        worst_r,
        worst_theta: worst_th,
        pass: worst > 0.0,
        rows,
    })
}

/// Smallest ladder radius R for which the asymptotic barrier is a verified
/// supersolution on the cone shell from R out to the table edge.
pub fn find_r3(
    m: &ModelManifold,
    f_bound: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    delta: f64,
    cutoff: &AngularCutoff,
    cap: f64,
    nr: usize,
    nt: usize,
) -> Result<f64> {
    let r_out = m.r_max().min(cutoff_verification_radius(m)?);
    for r in radius_ladder(2.0f64.max(2.0 * cutoff.r1), cap) {
        if r >= r_out {
            break;
        }
        let psi = build_asymptotic_psi(m, a, delta, r, cutoff.clone())?;
        let region = Region::ConeShell {
            r_min: r,
            r_max: r_out,
            theta_max: 3.0 * cutoff.sigma / cutoff.l,
        };
        let report =
            verify_supersolution(&psi, f_bound, m, region, nr, nt, VerifyMode::Supersolution)?;
        if report.pass {
            // guard against grid luck at the knife edge: confirm at doubled
            // resolution before accepting the radius
            let confirm = verify_supersolution(
                &psi,
                f_bound,
                m,
                region,
                2 * nr,
                2 * nt,
                VerifyMode::Supersolution,
            )?;
            if confirm.pass {
                return Ok(r);
            }
        }
    }
    Err(Error::BarrierSearchFailed { cap })
}

fn cutoff_verification_radius(m: &ModelManifold) -> Result<f64> {
    // keep f_a representable in linear arithmetic when measuring gradients
    Ok(match m.fa.switched_to_log_at() {
        Some(r) => 0.5 * r,
        None => m.r_max(),
    })
}

/// Weight presets for the global barrier: "powerlog(alpha)" is
/// (1+r)^-2 log(e+r)^-alpha, "explog(alpha)" is (1+r)^-1 log(e+r)^-alpha,
/// "constant(c)" and "zero" are literal.
pub fn a0_by_name(spec: &str) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    let spec = spec.trim();
    if spec == "zero" {
        return Ok(Arc::new(|_| 0.0));
    }
    if let Some(inner) = spec.strip_prefix("constant(").and_then(|s| s.strip_suffix(')')) {
        let c: f64 = inner.trim().parse().map_err(|_| Error::UnknownPreset(spec.into()))?;
        return Ok(Arc::new(move |_| c));
    }
    if let Some(inner) = spec.strip_prefix("powerlog(").and_then(|s| s.strip_suffix(')')) {
        let alpha: f64 = inner.trim().parse().map_err(|_| Error::UnknownPreset(spec.into()))?;
        return Ok(Arc::new(move |r: f64| {
            (1.0 + r).powi(-2) * (std::f64::consts::E + r).ln().powf(-alpha)
        }));
    }
    if let Some(inner) = spec.strip_prefix("explog(").and_then(|s| s.strip_suffix(')')) {
        let alpha: f64 = inner.trim().parse().map_err(|_| Error::UnknownPreset(spec.into()))?;
        return Ok(Arc::new(move |r: f64| {
            (1.0 + r).powi(-1) * (std::f64::consts::E + r).ln().powf(-alpha)
        }));
    }
    Err(Error::UnknownPreset(spec.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{euclidean, hyperbolic, power, ModelManifold};
    use approx::assert_relative_eq;

    fn flat() -> ModelManifold {
        ModelManifold::new(euclidean(), 2, 40.0, 1e-3).unwrap()
    }

    #[test]
    fn g_for_constant_weight_flat_space() {
        let m = flat();
        let g = build_g(&m, &|_| 0.3, 10.0).unwrap();
        for &r in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            assert_relative_eq!(g.value(r).unwrap(), 0.15 * r, max_relative = 1e-8);
        }
    }

    #[test]
    fn g_vanishes_for_zero_weight() {
        let m = flat();
        let g = build_g(&m, &|_| 0.0, 10.0).unwrap();
        for &r in &[0.0, 1.0, 7.5] {
            assert!(g.value(r).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn g_hyperbolic_constant_weight() {
        let m = ModelManifold::new(hyperbolic(1.0), 2, 40.0, 1e-3).unwrap();
        let g = build_g(&m, &|_| 0.4, 30.0).unwrap();
        for &r in &[0.5f64, 1.0, 5.0, 20.0] {
            let exact = 0.4 * (r.cosh() - 1.0) / r.sinh();
            assert_relative_eq!(g.value(r).unwrap(), exact, max_relative = 1e-7);
        }
    }

    #[test]
    fn g_rejects_negative_weight() {
        let m = flat();
        assert!(matches!(
            build_g(&m, &|r| 1.0 - r, 10.0),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn height_barrier_values() {
        // F_sup = 0, A = 1, custom C = 1: h(1) = e (1 - 1/e)
        let hb = build_height_barrier_with_c(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(
            hb.height_bound(),
            std::f64::consts::E * (1.0 - (-1.0f64).exp()),
            max_relative = 1e-14
        );
        // degenerate domain: h vanishes identically
        let hb0 = build_height_barrier(0.0, 0.3, 2.0).unwrap();
        assert_eq!(hb0.height_bound(), 0.0);
        // h'(0) = e^{CA}
        let hb2 = build_height_barrier_with_c(2.0, 1.0, 0.0, 2.0).unwrap();
        assert_relative_eq!(hb2.h_prime(0.0), 4.0f64.exp(), max_relative = 1e-14);
        assert!(hb2.h_prime(0.0) >= 1.0);
    }

    #[test]
    fn gradient_barrier_plugin_values() {
        let gb = build_gradient_barrier(0.25, 8.0).unwrap();
        assert_relative_eq!(gb.boundary_bound(), 3.0, max_relative = 1e-14);
        // psi(eps) = C/2 exactly at the boundary-case K
        assert_relative_eq!(gb.psi(0.25), 0.5 * gb.c, max_relative = 1e-14);
        // psi'(0) = eps K + 1 grows without bound in K
        let mut prev = gb.boundary_bound();
        for &k in &[1e2, 1e4, 1e6] {
            let g = build_gradient_barrier(0.25, k).unwrap();
            assert!(g.boundary_bound() > prev);
            prev = g.boundary_bound();
        }
        assert!(build_gradient_barrier(0.7, 8.0).is_err());
        assert!(build_gradient_barrier(0.25, 1.0).is_err());
    }

    fn power_model() -> ModelManifold {
        ModelManifold::new(power(2.0, 0.5).unwrap(), 2, 1100.0, 1e-2).unwrap()
    }

    fn powerlog_weight() -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        a0_by_name("powerlog(2)").unwrap()
    }

    #[test]
    fn v_prime_equals_minus_g() {
        let m = power_model();
        let v = build_global_v(&m, powerlog_weight(), 1.0, 1000.0).unwrap();
        let g = build_g(&m, powerlog_weight().as_ref(), 1000.0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..v.table.r.len() {
            worst = worst.max((v.table.d[i] + g.v[i]).abs());
        }
        assert!(worst < 1e-10, "max |V' + g| = {worst}");
    }

    #[test]
    fn v_decreasing_and_above_phi_sup() {
        let m = power_model();
        let v = build_global_v(&m, powerlog_weight(), 1.0, 1000.0).unwrap();
        for (i, w) in v.table.v.windows(2).enumerate() {
            assert!(
                w[1] < w[0],
                "not decreasing at r = {} -> {}: {} -> {}",
                v.table.r[i],
                v.table.r[i + 1],
                w[0],
                w[1]
            );
        }
        for &val in &v.table.v {
            assert!(val > 1.0);
        }
    }

    #[test]
    fn v_degenerates_to_phi_sup_for_zero_weight() {
        let m = flat();
        let v = build_global_v(&m, Arc::new(|_| 0.0), 2.5, 10.0).unwrap();
        assert_eq!(v.h_const, 0.0);
        for &val in &v.table.v {
            assert!((val - 2.5).abs() < 1e-14);
        }
        assert!(v.h_converged);
    }

    #[test]
    fn v_supersolution_with_half_bound_drift() {
        let m = power_model();
        let v = build_global_v(&m, powerlog_weight(), 1.0, 1000.0).unwrap();
        let vb = v.clone();
        let report = verify_supersolution(
            &v,
            &move |r| Ok(0.5 * vb.drift_bound(r)?),
            &m,
            Region::Annulus { r_min: 0.0, r_max: 1000.0 },
            2000,
            1,
            VerifyMode::Supersolution,
        )
        .unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn v_supersolution_margin_for_zero_drift() {
        let m = power_model();
        let a0 = powerlog_weight();
        let a0c = a0.clone();
        let v = build_global_v(&m, a0, 1.0, 1000.0).unwrap();
        let report = verify_supersolution(
            &v,
            &|_| Ok(0.0),
            &m,
            Region::Annulus { r_min: 0.0, r_max: 1000.0 },
            1000,
            1,
            VerifyMode::Supersolution,
        )
        .unwrap();
        // margin at each node is at least a0/(1+g^2)^{3/2}
        for (r, _, _, margin) in &report.rows {
            let g = v.g.value(*r).unwrap();
            let floor = a0c(*r) / (1.0 + g * g).powf(1.5);
            assert!(*margin >= floor - 1e-12, "r = {r}: {margin} < {floor}");
        }
    }

    #[test]
    fn height_barrier_verification_pass_and_fail() {
        let m = flat();
        // C = F + 1 > F and H = 1/r >= F on the ball: supersolution
        let hb = build_height_barrier(4.0, 0.3, 0.0).unwrap();
        let rep = verify_supersolution(
            &hb,
            &|_| Ok(0.3),
            &m,
            Region::Annulus { r_min: 0.05, r_max: 1.999 },
            400,
            1,
            VerifyMode::Supersolution,
        )
        .unwrap();
        assert!(rep.pass, "{rep}");
        // C below the drift bound: hypothesis violated, detected as failure
        let hb_bad = build_height_barrier_with_c(4.0, 2.0, 0.0, 1.5).unwrap();
        let rep_bad = verify_supersolution(
            &hb_bad,
            &|_| Ok(2.0),
            &m,
            Region::Annulus { r_min: 0.05, r_max: 1.999 },
            400,
            1,
            VerifyMode::Supersolution,
        )
        .unwrap();
        assert!(!rep_bad.pass);
    }

    #[test]
    fn subsolution_mirror_is_sign_flip() {
        let m = power_model();
        let v = build_global_v(&m, powerlog_weight(), 1.0, 1000.0).unwrap();
        for &r in &[0.5, 3.0, 50.0, 800.0] {
            let jet = v.jet(r, 0.0).unwrap();
            let div = mean_curvature_of_jet(&m, r, &jet).unwrap();
            let div_neg = mean_curvature_of_jet(&m, r, &jet.negated()).unwrap();
            assert!((div + div_neg).abs() < 1e-12 * div.abs().max(1.0));
        }
        let sup = verify_supersolution(
            &v,
            &|_| Ok(0.0),
            &m,
            Region::Annulus { r_min: 0.0, r_max: 900.0 },
            200,
            1,
            VerifyMode::Supersolution,
        )
        .unwrap();
        let sub = verify_supersolution(
            &v,
            &|_| Ok(0.0),
            &m,
            Region::Annulus { r_min: 0.0, r_max: 900.0 },
            200,
            1,
            VerifyMode::Subsolution,
        )
        .unwrap();
        assert!((sup.worst_margin - sub.worst_margin).abs() < 1e-12);
    }

    #[test]
    fn cutoff_geometry() {
        let cut = build_angular_cutoff(4.0, 0.5, 1.0).unwrap();
        // outside the cone and past R1: exactly 1
        assert_eq!(cut.jet(2.0, 0.6).v, 1.0);
        // on the axis at large radius: exactly 0
        assert_eq!(cut.jet(5.0, 0.0).v, 0.0);
        // near the pole: the radial branch saturates to 1
        assert_eq!(cut.jet(0.25, 0.0).v, 1.0);
        assert!(build_angular_cutoff(2.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn cutoff_gradient_constant_stabilizes() {
        let m = power_model();
        let cut = build_angular_cutoff(4.0, 0.5, 1.0).unwrap();
        let c1_coarse = cut.measured_c1(&m, 200.0, 100, 40).unwrap();
        let c1_fine = cut.measured_c1(&m, 200.0, 200, 80).unwrap();
        assert!((c1_fine - c1_coarse).abs() <= 0.05 * c1_fine);
        // the analytic sup of |S'| * L is 1.875 L
        assert!(c1_fine <= 1.875 * cut.l + 1e-9);
    }

    #[test]
    fn asymptotic_psi_geometry() {
        let m = power_model();
        let cut = build_angular_cutoff(4.0, 0.5, 1.0).unwrap();
        let psi = build_asymptotic_psi(&m, 2.0, 0.0625, 60.0, cut).unwrap();
        // on the sphere r = R3 along the axis: psi = A (1 + h) = A (h = 0)
        let j = psi.jet(60.0, 0.0).unwrap();
        assert_relative_eq!(j.v, 2.0, max_relative = 1e-14);
        // outside the cone: h = 1, so psi >= A
        let j2 = psi.jet(200.0, 0.8).unwrap();
        assert!(j2.v >= 2.0);
        // along the axis the barrier decays toward 0
        let j3 = psi.jet(1000.0, 0.0).unwrap();
        assert!(j3.v < 2.0 * (60.0f64 / 1000.0).powf(0.0625) * 1.001);
        // inadmissible exponent rejected with the computed ceiling
        let cut2 = build_angular_cutoff(4.0, 0.5, 1.0).unwrap();
        match build_asymptotic_psi(&m, 2.0, 0.9, 60.0, cut2) {
            Err(Error::Parameter(msg)) => assert!(msg.contains("delta1")),
            other => panic!("expected parameter error, got {other:?}"),
        }
    }

    #[test]
    fn find_r3_power_preset_zero_drift() {
        let m = power_model();
        let cut = build_angular_cutoff(4.0, 0.5, 1.0).unwrap();
        let r3 = find_r3(&m, &|_| Ok(0.0), 2.0, 0.0625, &cut, 1000.0, 200, 24).unwrap();
        assert!(r3 <= 1000.0);
        let psi = build_asymptotic_psi(&m, 2.0, 0.0625, r3, cut).unwrap();
        let rep = verify_supersolution(
            &psi,
            &|_| Ok(0.0),
            &m,
            Region::ConeShell { r_min: r3, r_max: 1000.0, theta_max: 0.375 },
            300,
            30,
            VerifyMode::Supersolution,
        )
        .unwrap();
        assert!(rep.pass, "{rep}");
    }
}
