//! Adaptive Simpson quadrature and tail estimation for improper integrals.

use crate::error::{Error, Result};

/// Adaptive Simpson rule with recursive interval splitting.
///
/// Splits until the Richardson error estimate on each subinterval is below
/// its share of the tolerance (relative to the running magnitude, with an
/// absolute floor so integrals near zero terminate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::QuadratureFailure { a, b });
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = whole.abs().max(1e-300);
    let tol = rel_tol * scale + 1e-306;
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48).ok_or(Error::QuadratureFailure { a, b })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return None;
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 {
        // Richardson extrapolation term included.
        return Some(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Local log-log slope of a positive function, measured between r/2 and r.
/// Returns p such that w behaves like r^{-p} near r.
pub fn log_slope<F: Fn(f64) -> f64>(w: &F, r: f64) -> f64 {
    let w1 = w(0.5 * r);
    let w2 = w(r);
    if w1 <= 0.0 || w2 <= 0.0 {
        return f64::INFINITY; // already identically small; treat as fast decay
    }
    -(w2 / w1).ln() / 2f64.ln()
}

/// Tail estimate for int_r^inf w(t) dt assuming w ~ c t^{-p} with p measured
/// from the last octave. Errors when the measured decay does not give a
/// convergent tail.
pub fn power_tail<F: Fn(f64) -> f64>(w: &F, r: f64, what: &str) -> Result<f64> {
    let p = log_slope(w, r);
    if p == f64::INFINITY {
        return Ok(0.0);
    }
    if p <= 1.02 {
        return Err(Error::DivergentIntegral {
            what: format!("{what}: tail decays like r^(-{p:.3}) at r = {r:.3e}"),
        });
    }
    Ok(w(r) * r / (p - 1.0))
}
