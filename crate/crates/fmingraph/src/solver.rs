//! Finite-difference Dirichlet solver on geodesic balls.
//!
//! The equation div(grad u / W) = <grad_bar f, nu> is discretized in flux
//! form on a polar grid: face fluxes (f_a^{n-1} u_r / W on radial faces,
//! u_theta / (f_a W) on angular faces) differenced conservatively, with a
//! finite-volume cap at the pole. The nonlinear system is solved by damped
//! Newton iteration with an analytic block-tridiagonal Jacobian (one block
//! per ring) factored by block elimination.

use nalgebra::{DMatrix, DVector};

use crate::drift::DriftFunction;
use crate::error::{Error, Result};
use crate::linalg::block_thomas;
use crate::manifold::ModelManifold;
use crate::quad::adaptive_simpson;

const MAX_NEWTON: usize = 60;
const MIN_DAMPING: f64 = 1.0 / (1 << 20) as f64;

/// Uniform polar grid on the closed ball of radius `r_ball`: rings at
/// i * h_r for i = 0..=nr (ring nr is the Dirichlet boundary), angles at
/// j * h_t for j = 0..nt. Unknowns live at the origin and rings 1..nr-1.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub r_ball: f64,
    pub nr: usize,
    pub nt: usize,
    pub h_r: f64,
    pub h_t: f64,
}

impl PolarGrid {
    pub fn new(r_ball: f64, nr: usize, nt: usize) -> Result<Self> {
        if r_ball <= 0.0 || nr < 2 || nt < 4 {
            return Err(Error::Parameter(format!(
                "grid needs r_ball > 0, nr >= 2, nt >= 4; got ({r_ball}, {nr}, {nt})"
            )));
        }
        Ok(PolarGrid {
            r_ball,
            nr,
            nt,
            h_r: r_ball / nr as f64,
            h_t: 2.0 * std::f64::consts::PI / nt as f64,
        })
    }

    pub fn radius(&self, i: usize) -> f64 {
        i as f64 * self.h_r
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_t
    }

    /// full storage length: origin + rings 1..=nr (boundary included)
    pub fn storage_len(&self) -> usize {
        1 + self.nr * self.nt
    }

    pub fn n_unknowns(&self) -> usize {
        1 + (self.nr - 1) * self.nt
    }

    /// storage index of node (i, j), i >= 1, with cyclic j
    fn sidx(&self, i: usize, j: isize) -> usize {
        let nt = self.nt as isize;
        1 + (i - 1) * self.nt + j.rem_euclid(nt) as usize
    }

    fn value(&self, u: &[f64], i: usize, j: isize) -> f64 {
        if i == 0 {
            u[0]
        } else {
            u[self.sidx(i, j)]
        }
    }
}

/// Geometry coefficients precomputed per grid: area weights f_a^{n-1} at
/// nodes and faces, warping values at nodes, and the pole cap volume.
struct Stencil {
    w_face: Vec<f64>, // f^{n-1} at (i + 1/2) h_r, i = 0..nr-1
    w_node: Vec<f64>, // f^{n-1} at i h_r, i = 0..=nr (index 0 unused)
    f_node: Vec<f64>, // f at i h_r
    f_face: Vec<f64>, // f at (i + 1/2) h_r
    vol0: f64,        // int_0^{h_r/2} f^{n-1}
}

impl Stencil {
    fn build(m: &ModelManifold, grid: &PolarGrid) -> Result<Stencil> {
        let nm1 = m.n as i32 - 1;
        let mut w_face = Vec::with_capacity(grid.nr);
        let mut f_face = Vec::with_capacity(grid.nr);
        for i in 0..grid.nr {
            let f = m.fa.f((i as f64 + 0.5) * grid.h_r)?;
            f_face.push(f);
            w_face.push(f.powi(nm1));
        }
        let mut w_node = vec![0.0];
        let mut f_node = vec![0.0];
        for i in 1..=grid.nr {
            let f = m.fa.f(grid.radius(i))?;
            f_node.push(f);
            w_node.push(f.powi(nm1));
        }
        let mc = m.clone();
        let vol0 = adaptive_simpson(
            &|r: f64| mc.fa.f(r).map(|f| f.powi(nm1)).unwrap_or(0.0),
            0.0,
            0.5 * grid.h_r,
            1e-12,
        )?;
        Ok(Stencil { w_face, w_node, f_node, f_face, vol0 })
    }
}

fn radial_face(grid: &PolarGrid, st: &Stencil, u: &[f64], i: usize, j: isize) -> (f64, f64, f64) {
    let p = (grid.value(u, i + 1, j) - grid.value(u, i, j)) / grid.h_r;
    let qt = (grid.value(u, i, j + 1) - grid.value(u, i, j - 1)
        + grid.value(u, i + 1, j + 1)
        - grid.value(u, i + 1, j - 1))
        / (4.0 * grid.h_t * st.f_face[i]);
    let w = (1.0 + p * p + qt * qt).sqrt();
    (p, qt, w)
}

fn angular_face(grid: &PolarGrid, st: &Stencil, u: &[f64], i: usize, j: isize) -> (f64, f64, f64) {
    let q = (grid.value(u, i, j + 1) - grid.value(u, i, j)) / (grid.h_t * st.f_node[i]);
    // boundary-adjacent rings use a one-sided radial average so no ghost
    // layer outside the ball is needed
    let p_avg = if i + 1 <= grid.nr {
        (grid.value(u, i + 1, j) - grid.value(u, i - 1, j) + grid.value(u, i + 1, j + 1)
            - grid.value(u, i - 1, j + 1))
            / (4.0 * grid.h_r)
    } else {
        0.0
    };
    let w = (1.0 + q * q + p_avg * p_avg).sqrt();
    (q, p_avg, w)
}

/// Nonlinear residual of the full storage vector `u` (boundary ring filled
/// with the Dirichlet data). Entry 0 is the pole equation; entry
/// 1 + (i-1) nt + j is the node (i, j).
pub fn residual(
    m: &ModelManifold,
    d: &DriftFunction,
    grid: &PolarGrid,
    u: &[f64],
) -> Result<Vec<f64>> {
    assert_eq!(u.len(), grid.storage_len());
    let st = Stencil::build(m, grid)?;
    let mut res = vec![0.0; grid.n_unknowns()];

    // pole: finite-volume balance over the cap of radius h_r/2
    let mut acc = 0.0;
    for j in 0..grid.nt {
        let (p, _, w) = radial_face(grid, &st, u, 0, j as isize);
        acc += p / w;
    }
    res[0] = st.w_face[0] * acc / (grid.nt as f64 * st.vol0) - d.rhs_term(0.0, u[0], 0.0, 0.0);

    for i in 1..grid.nr {
        let r = grid.radius(i);
        for j in 0..grid.nt {
            let js = j as isize;
            let (p_out, _, w_out) = radial_face(grid, &st, u, i, js);
            let (p_in, _, w_in) = radial_face(grid, &st, u, i - 1, js);
            let radial = (st.w_face[i] * p_out / w_out - st.w_face[i - 1] * p_in / w_in)
                / (st.w_node[i] * grid.h_r);
            let (q_up, _, w_up) = angular_face(grid, &st, u, i, js);
            let (q_dn, _, w_dn) = angular_face(grid, &st, u, i, js - 1);
            let angular = (q_up / w_up - q_dn / w_dn) / (st.f_node[i] * grid.h_t);
            let p_c = (grid.value(u, i + 1, js) - grid.value(u, i - 1, js)) / (2.0 * grid.h_r);
            let q_c = (grid.value(u, i, js + 1) - grid.value(u, i, js - 1))
                / (2.0 * grid.h_t * st.f_node[i]);
            res[grid.sidx(i, js) ] = radial + angular
                - d.rhs_term(r, grid.value(u, i, js), p_c, q_c);
        }
    }
    Ok(res)
}

/// Block rows of the Jacobian: one block per ring (origin block is 1x1).
struct Assembler {
    nt: usize,
    nr: usize,
    lower: Vec<DMatrix<f64>>,
    diag: Vec<DMatrix<f64>>,
    upper: Vec<DMatrix<f64>>,
}

impl Assembler {
    fn new(nr: usize, nt: usize) -> Assembler {
        let size = |b: usize| if b == 0 { 1 } else { nt };
        let mut lower = Vec::with_capacity(nr);
        let mut diag = Vec::with_capacity(nr);
        let mut upper = Vec::with_capacity(nr);
        for b in 0..nr {
            lower.push(if b == 0 {
                DMatrix::zeros(0, 0)
            } else {
                DMatrix::zeros(size(b), size(b - 1))
            });
            diag.push(DMatrix::zeros(size(b), size(b)));
            upper.push(if b + 1 < nr {
                DMatrix::zeros(size(b), size(b + 1))
            } else {
                DMatrix::zeros(0, 0)
            });
        }
        Assembler { nt, nr, lower, diag, upper }
    }

    fn col(&self, j: isize) -> usize {
        j.rem_euclid(self.nt as isize) as usize
    }

    /// adds d res(row_i, row_j) / d u(col_i, col_j); boundary-ring columns
    /// (col_i == nr) are Dirichlet data and are skipped
    fn add(&mut self, row_i: usize, row_j: isize, col_i: usize, col_j: isize, val: f64) {
        if row_i >= self.nr || col_i >= self.nr + 1 {
            return;
        }
        if col_i == self.nr {
            return;
        }
        let rj = if row_i == 0 { 0 } else { self.col(row_j) };
        let cj = if col_i == 0 { 0 } else { self.col(col_j) };
        if col_i == row_i {
            self.diag[row_i][(rj, cj)] += val;
        } else if col_i + 1 == row_i {
            self.lower[row_i][(rj, cj)] += val;
        } else if col_i == row_i + 1 {
            self.upper[row_i][(rj, cj)] += val;
        } else {
            unreachable!("stencil couples adjacent rings only");
        }
    }
}

fn jacobian(
    _m: &ModelManifold,
    d: &DriftFunction,
    grid: &PolarGrid,
    u: &[f64],
    st: &Stencil,
) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let mut a = Assembler::new(grid.nr, grid.nt);
    let (h_r, h_t) = (grid.h_r, grid.h_t);

    // radial faces between ring i and i+1
    for i in 0..grid.nr {
        for j in 0..grid.nt as isize {
            let (p, qt, w) = radial_face(grid, st, u, i, j);
            let w3 = w * w * w;
            let dphi_dp = (1.0 + qt * qt) / w3;
            let dphi_dqt = -p * qt / w3;
            let aq = 1.0 / (4.0 * h_t * st.f_face[i]);
            // (column node, d p / d u, d qt / d u)
            let cols = [
                (i + 1, j, 1.0 / h_r, 0.0),
                (i, j, -1.0 / h_r, 0.0),
                (i, j + 1, 0.0, aq),
                (i, j - 1, 0.0, -aq),
                (i + 1, j + 1, 0.0, aq),
                (i + 1, j - 1, 0.0, -aq),
            ];
            // flux coefficient into each adjacent residual row
            let rows: [(usize, f64); 2] = [
                (
                    i,
                    if i == 0 {
                        st.w_face[0] / (grid.nt as f64 * st.vol0)
                    } else {
                        st.w_face[i] / (st.w_node[i] * h_r)
                    },
                ),
                (
                    i + 1,
                    if i + 1 < grid.nr {
                        -st.w_face[i] / (st.w_node[i + 1] * h_r)
                    } else {
                        0.0
                    },
                ),
            ];
            for &(ci, cj, dp, dqt) in &cols {
                let dphi = dphi_dp * dp + dphi_dqt * dqt;
                if dphi == 0.0 {
                    continue;
                }
                for &(ri, coef) in &rows {
                    if coef != 0.0 && ri < grid.nr {
                        a.add(ri, j, ci, cj, coef * dphi);
                    }
                }
            }
        }
    }

    // angular faces between angle j and j+1 on ring i
    for i in 1..grid.nr {
        for j in 0..grid.nt as isize {
            let (q, p_avg, w) = angular_face(grid, st, u, i, j);
            let w3 = w * w * w;
            let dphi_dq = (1.0 + p_avg * p_avg) / w3;
            let dphi_dpa = -q * p_avg / w3;
            let aq = 1.0 / (h_t * st.f_node[i]);
            let ap = 1.0 / (4.0 * h_r);
            let cols = [
                (i, j + 1, aq, 0.0),
                (i, j, -aq, 0.0),
                (i + 1, j, 0.0, ap),
                (i - 1, j, 0.0, -ap),
                (i + 1, j + 1, 0.0, ap),
                (i - 1, j + 1, 0.0, -ap),
            ];
            let coef = 1.0 / (st.f_node[i] * h_t);
            for &(ci, cj, dq, dpa) in &cols {
                let dphi = dphi_dq * dq + dphi_dpa * dpa;
                if dphi == 0.0 {
                    continue;
                }
                a.add(i, j, ci, cj, coef * dphi);
                a.add(i, j + 1, ci, cj, -coef * dphi);
            }
        }
    }

    // drift right-hand side: res -= (m'(r) u_r - r'(u)) / W_c
    a.add(0, 0, 0, 0, d.r_second(u[0]));
    for i in 1..grid.nr {
        let r = grid.radius(i);
        let mp = d.m_prime(r);
        for j in 0..grid.nt as isize {
            let t = grid.value(u, i, j);
            let p_c = (grid.value(u, i + 1, j) - grid.value(u, i - 1, j)) / (2.0 * h_r);
            let q_c =
                (grid.value(u, i, j + 1) - grid.value(u, i, j - 1)) / (2.0 * h_t * st.f_node[i]);
            let wc = (1.0 + p_c * p_c + q_c * q_c).sqrt();
            let num = mp * p_c - d.r_prime(t);
            let drhs_dt = -d.r_second(t) / wc;
            let drhs_dp = mp / wc - num * p_c / (wc * wc * wc);
            let drhs_dq = -num * q_c / (wc * wc * wc);
            a.add(i, j, i, j, -drhs_dt);
            a.add(i, j, i + 1, j, -drhs_dp / (2.0 * h_r));
            a.add(i, j, i - 1, j, drhs_dp / (2.0 * h_r));
            a.add(i, j, i, j + 1, -drhs_dq / (2.0 * h_t * st.f_node[i]));
            a.add(i, j, i, j - 1, drhs_dq / (2.0 * h_t * st.f_node[i]));
        }
    }
    (a.lower, a.diag, a.upper)
}

/// Relative mismatch between the analytic Jacobian and a central
/// finite-difference directional derivative of the residual, probed at a
/// deterministic wiggly state. Diagnostic for the Newton linearization.
pub fn jacobian_fd_mismatch(
    m: &ModelManifold,
    d: &DriftFunction,
    r_ball: f64,
    nr: usize,
    nt: usize,
) -> Result<f64> {
    let grid = PolarGrid::new(r_ball, nr, nt)?;
    let mut u: Vec<f64> = (0..grid.storage_len())
        .map(|k| 0.3 * ((k as f64) * 0.713).sin() + 0.1 * ((k as f64) * 0.291).cos())
        .collect();
    u[0] = 0.21;
    let st = Stencil::build(m, &grid)?;
    let (lower, diag, upper) = jacobian(m, d, &grid, &u, &st);
    let dir: Vec<f64> = (0..grid.n_unknowns()).map(|k| ((k as f64) * 1.37).sin()).collect();
    let mut blocks = vec![DVector::from_element(1, dir[0])];
    for i in 1..grid.nr {
        blocks.push(DVector::from_fn(grid.nt, |j, _| dir[1 + (i - 1) * grid.nt + j]));
    }
    let mut jv = vec![0.0; grid.n_unknowns()];
    for i in 0..grid.nr {
        let mut acc = &diag[i] * &blocks[i];
        if i > 0 {
            acc += &lower[i] * &blocks[i - 1];
        }
        if i + 1 < grid.nr {
            acc += &upper[i] * &blocks[i + 1];
        }
        if i == 0 {
            jv[0] = acc[0];
        } else {
            for j in 0..grid.nt {
                jv[1 + (i - 1) * grid.nt + j] = acc[j];
            }
        }
    }
    let eps = 1e-6;
    let perturbed = |sign: f64| -> Result<Vec<f64>> {
        let mut up = u.clone();
        up[0] += sign * eps * dir[0];
        for i in 1..grid.nr {
            for j in 0..grid.nt {
                let k = 1 + (i - 1) * grid.nt + j;
                up[k] += sign * eps * dir[k];
            }
        }
        residual(m, d, &grid, &up)
    };
    let rp = perturbed(1.0)?;
    let rm = perturbed(-1.0)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..grid.n_unknowns() {
        let fd = (rp[k] - rm[k]) / (2.0 * eps);
        worst = worst.max((jv[k] - fd).abs());
        scale = scale.max(fd.abs());
    }
    Ok(worst / scale.max(1.0))
}

/// Starting point for the Newton iteration.
#[derive(Clone)]
pub enum InitialGuess {
    Zero,
    /// one Newton step on the drift-free problem from zero (discrete
    /// harmonic-type extension of the boundary data)
    Harmonic,
    /// amp * (1 - (r / r_ball)^2)
    Bump(f64),
    /// full storage vector from a previous solve (boundary ring is
    /// overwritten with the current data)
    Values(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct BallSolution {
    pub grid: PolarGrid,
    /// full storage vector including the boundary ring
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

impl BallSolution {
    pub fn value(&self, i: usize, j: isize) -> f64 {
        self.grid.value(&self.u, i, j)
    }

    pub fn origin(&self) -> f64 {
        self.u[0]
    }

    /// bilinear interpolation in (r, theta)
    pub fn value_at(&self, r: f64, theta: f64) -> Result<f64> {
        if !(0.0..=self.grid.r_ball * (1.0 + 1e-12)).contains(&r) {
            return Err(Error::OutOfRange { radius: r, r_max: self.grid.r_ball });
        }
        let x = (r / self.grid.h_r).min(self.grid.nr as f64 - 1e-12);
        let i = x.floor() as usize;
        let tr = x - i as f64;
        let y = theta.rem_euclid(2.0 * std::f64::consts::PI) / self.grid.h_t;
        let j = y.floor() as isize;
        let tt = y - j as f64;
        let at = |i: usize, j: isize| self.grid.value(&self.u, i, j);
        let lo = (1.0 - tt) * at(i, j) + tt * at(i, j + 1);
        let hi = (1.0 - tt) * at(i + 1, j) + tt * at(i + 1, j + 1);
        Ok((1.0 - tr) * lo + tr * hi)
    }

    pub fn height_sup(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// sup of the physical gradient magnitude sqrt(u_r^2 + (u_theta/f_a)^2)
    /// over grid nodes; central differences inside, one-sided at the
    /// boundary ring.
    pub fn gradient_sup(&self, m: &ModelManifold) -> Result<f64> {
        let g = &self.grid;
        let mut sup = 0.0f64;
        for i in 1..=g.nr {
            let f = m.fa.f(g.radius(i))?;
            for j in 0..g.nt as isize {
                let p = if i < g.nr {
                    (g.value(&self.u, i + 1, j) - g.value(&self.u, i - 1, j)) / (2.0 * g.h_r)
                } else {
                    (g.value(&self.u, i, j) - g.value(&self.u, i - 1, j)) / g.h_r
                };
                let q = (g.value(&self.u, i, j + 1) - g.value(&self.u, i, j - 1))
                    / (2.0 * g.h_t * f);
                sup = sup.max((p * p + q * q).sqrt());
            }
        }
        Ok(sup)
    }

    /// sup of the physical gradient magnitude over the boundary ring only,
    /// with a one-sided radial difference
    pub fn boundary_gradient_sup(&self, m: &ModelManifold) -> Result<f64> {
        let g = &self.grid;
        let f = m.fa.f(g.r_ball)?;
        let mut sup = 0.0f64;
        for j in 0..g.nt as isize {
            let p = (g.value(&self.u, g.nr, j) - g.value(&self.u, g.nr - 1, j)) / g.h_r;
            let q =
                (g.value(&self.u, g.nr, j + 1) - g.value(&self.u, g.nr, j - 1)) / (2.0 * g.h_t * f);
            sup = sup.max((p * p + q * q).sqrt());
        }
        Ok(sup)
    }

    /// max - min over ring i (0 for a rotationally symmetric solution)
    pub fn ring_spread(&self, i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.grid.nt as isize {
            let v = self.grid.value(&self.u, i, j);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,u\n");
        out.push_str(&format!("{:.6e},{:.6e},{:.12e}\n", 0.0, 0.0, self.u[0]));
        for i in 1..=self.grid.nr {
            for j in 0..self.grid.nt as isize {
                out.push_str(&format!(
                    "{:.6e},{:.6e},{:.12e}\n",
                    self.grid.radius(i),
                    self.grid.theta(j as usize),
                    self.grid.value(&self.u, i, j)
                ));
            }
        }
        out
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

fn newton_loop(
    m: &ModelManifold,
    d: &DriftFunction,
    grid: &PolarGrid,
    u: &mut Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(usize, f64)> {
    let st = Stencil::build(m, grid)?;
    let mut res = residual(m, d, grid, u)?;
    let mut norm = sup_norm(&res);
    for iter in 0..max_iter {
        for (k, &x) in res.iter().enumerate() {
            if !x.is_finite() {
                let i = if k == 0 { 0 } else { (k - 1) / grid.nt + 1 };
                let j = if k == 0 { 0 } else { (k - 1) % grid.nt };
                return Err(Error::NonFiniteState { i, j });
            }
        }
        if norm < tol {
            return Ok((iter, norm));
        }
        let (lower, diag, upper) = jacobian(m, d, grid, u, &st);
        let mut rhs_blocks = Vec::with_capacity(grid.nr);
        rhs_blocks.push(DVector::from_element(1, -res[0]));
        for i in 1..grid.nr {
            rhs_blocks.push(DVector::from_fn(grid.nt, |j, _| -res[1 + (i - 1) * grid.nt + j]));
        }
        let delta = block_thomas(&lower, &diag, &upper, &rhs_blocks)?;

        // Armijo backtracking on the smooth merit |res|_2; convergence is
        // still judged in the sup norm
        let merit = l2_norm(&res);
        let mut lambda = 1.0;
        loop {
            let mut trial = u.clone();
            trial[0] += lambda * delta[0][0];
            for i in 1..grid.nr {
                for j in 0..grid.nt {
                    trial[1 + (i - 1) * grid.nt + j] += lambda * delta[i][j];
                }
            }
            let trial_res = residual(m, d, grid, &trial)?;
            let trial_merit = l2_norm(&trial_res);
            let trial_norm = sup_norm(&trial_res);
            if trial_merit.is_finite()
                && (trial_merit <= (1.0 - 0.25 * lambda) * merit || trial_norm < tol)
            {
                *u = trial;
                res = trial_res;
                norm = trial_norm;
                if std::env::var("FMG_DEBUG_NEWTON").is_ok() {
                    eprintln!("newton iter {iter}: norm {norm:.6e} (lambda {lambda})");
                }
                break;
            }
            lambda *= 0.5;
            if lambda < MIN_DAMPING {
                return Err(Error::NoConvergence(format!(
                    "line search stalled at residual {norm:.3e} (iteration {iter})"
                )));
            }
        }
    }
    if norm < tol {
        Ok((max_iter, norm))
    } else {
        Err(Error::NoConvergence(format!(
            "Newton did not reach {tol:.1e} in {max_iter} iterations (residual {norm:.3e})"
        )))
    }
}

/// Solves the Dirichlet problem on the ball of radius `r_ball` with data
/// `boundary(theta)` on an nr x nt grid to sup-norm residual `tol`.
pub fn solve_dirichlet_ball(
    m: &ModelManifold,
    d: &DriftFunction,
    r_ball: f64,
    boundary: &dyn Fn(f64) -> f64,
    nr: usize,
    nt: usize,
    tol: f64,
    guess: InitialGuess,
) -> Result<BallSolution> {
    let grid = PolarGrid::new(r_ball, nr, nt)?;
    let mut u = match &guess {
        InitialGuess::Values(v) => {
            if v.len() != grid.storage_len() {
                return Err(Error::Parameter(format!(
                    "warm start has {} values, grid stores {}",
                    v.len(),
                    grid.storage_len()
                )));
            }
            v.clone()
        }
        _ => vec![0.0; grid.storage_len()],
    };
    for j in 0..grid.nt {
        u[grid.sidx(grid.nr, j as isize)] = boundary(grid.theta(j));
    }
    match guess {
        InitialGuess::Bump(amp) => {
            u[0] = amp;
            for i in 1..grid.nr {
                let s = 1.0 - (grid.radius(i) / r_ball).powi(2);
                for j in 0..grid.nt {
                    u[grid.sidx(i, j as isize)] = amp * s;
                }
            }
        }
        InitialGuess::Harmonic => {
            // one undamped Newton step on the drift-free problem
            let zero = DriftFunction::zero();
            let _ = newton_loop(m, &zero, &grid, &mut u, f64::NEG_INFINITY, 1);
        }
        _ => {}
    }
    let (iterations, residual_norm) = newton_loop(m, d, &grid, &mut u, tol, MAX_NEWTON)?;
    Ok(BallSolution { grid, u, iterations, residual_norm })
}

/// Rotationally symmetric solution: the same flux scheme restricted to
/// radial functions, solved with a scalar tridiagonal Newton iteration.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub r_ball: f64,
    pub h_r: f64,
    /// values at radii i h_r, i = 0..=nr (last entry is the boundary value)
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

impl RadialSolution {
    pub fn value_at(&self, r: f64) -> Result<f64> {
        if !(0.0..=self.r_ball * (1.0 + 1e-12)).contains(&r) {
            return Err(Error::OutOfRange { radius: r, r_max: self.r_ball });
        }
        let x = (r / self.h_r).min(self.u.len() as f64 - 1.0 - 1e-12);
        let i = x.floor() as usize;
        let t = x - i as f64;
        Ok((1.0 - t) * self.u[i] + t * self.u[i + 1])
    }
}

pub fn solve_radial(
    m: &ModelManifold,
    d: &DriftFunction,
    r_ball: f64,
    boundary_value: f64,
    nr: usize,
    tol: f64,
) -> Result<RadialSolution> {
    if r_ball <= 0.0 || nr < 2 {
        return Err(Error::Parameter(format!(
            "radial solve needs r_ball > 0 and nr >= 2, got ({r_ball}, {nr})"
        )));
    }
    let h = r_ball / nr as f64;
    let nm1 = m.n as i32 - 1;
    let mut w_face = Vec::with_capacity(nr);
    for i in 0..nr {
        w_face.push(m.fa.f((i as f64 + 0.5) * h)?.powi(nm1));
    }
    let mut w_node = vec![0.0];
    for i in 1..=nr {
        w_node.push(m.fa.f(i as f64 * h)?.powi(nm1));
    }
    let mc = m.clone();
    let vol0 = adaptive_simpson(
        &|r: f64| mc.fa.f(r).map(|f| f.powi(nm1)).unwrap_or(0.0),
        0.0,
        0.5 * h,
        1e-12,
    )?;

    let mut u = vec![0.0f64; nr + 1];
    u[nr] = boundary_value;

    let res_of = |u: &[f64]| -> Vec<f64> {
        let mut res = vec![0.0; nr];
        let phi = |i: usize| {
            let p = (u[i + 1] - u[i]) / h;
            p / (1.0 + p * p).sqrt()
        };
        res[0] = w_face[0] * phi(0) / vol0 - d.rhs_term(0.0, u[0], 0.0, 0.0);
        for i in 1..nr {
            let p_c = (u[i + 1] - u[i - 1]) / (2.0 * h);
            res[i] = (w_face[i] * phi(i) - w_face[i - 1] * phi(i - 1)) / (w_node[i] * h)
                - d.rhs_term(i as f64 * h, u[i], p_c, 0.0);
        }
        res
    };

    let mut res = res_of(&u);
    let mut norm = sup_norm(&res);
    let mut iterations = 0;
    for iter in 0..MAX_NEWTON {
        if norm < tol {
            iterations = iter;
            break;
        }
        if !norm.is_finite() {
            return Err(Error::NonFiniteState { i: 0, j: 0 });
        }
        // scalar tridiagonal Jacobian
        let mut sub = vec![0.0; nr];
        let mut dia = vec![0.0; nr];
        let mut sup = vec![0.0; nr];
        let dphi = |i: usize| {
            let p = (u[i + 1] - u[i]) / h;
            1.0 / (1.0 + p * p).powf(1.5)
        };
        dia[0] = -w_face[0] * dphi(0) / (vol0 * h) + d.r_second(u[0]);
        sup[0] = w_face[0] * dphi(0) / (vol0 * h);
        for i in 1..nr {
            let c_out = w_face[i] / (w_node[i] * h);
            let c_in = w_face[i - 1] / (w_node[i] * h);
            let d_out = dphi(i);
            let d_in = dphi(i - 1);
            sub[i] = c_in * d_in / h;
            dia[i] = -c_out * d_out / h - c_in * d_in / h;
            sup[i] = c_out * d_out / h;
            let p_c = (u[i + 1] - u[i - 1]) / (2.0 * h);
            let wc = (1.0 + p_c * p_c).sqrt();
            let mp = d.m_prime(i as f64 * h);
            let num = mp * p_c - d.r_prime(u[i]);
            let drhs_dp = mp / wc - num * p_c / (wc * wc * wc);
            dia[i] += d.r_second(u[i]) / wc;
            sup[i] -= drhs_dp / (2.0 * h);
            sub[i] += drhs_dp / (2.0 * h);
        }
        // forbid the boundary column
        sup[nr - 1] = 0.0;

        // Thomas solve for J delta = -res
        let mut c_star = vec![0.0; nr];
        let mut d_star = vec![0.0; nr];
        c_star[0] = sup[0] / dia[0];
        d_star[0] = -res[0] / dia[0];
        for i in 1..nr {
            let mden = dia[i] - sub[i] * c_star[i - 1];
            if mden == 0.0 {
                return Err(Error::NoConvergence("singular radial Newton system".into()));
            }
            c_star[i] = sup[i] / mden;
            d_star[i] = (-res[i] - sub[i] * d_star[i - 1]) / mden;
        }
        let mut delta = vec![0.0; nr];
        delta[nr - 1] = d_star[nr - 1];
        for i in (0..nr - 1).rev() {
            delta[i] = d_star[i] - c_star[i] * delta[i + 1];
        }

        let merit = l2_norm(&res);
        let mut lambda = 1.0;
        loop {
            let mut trial = u.clone();
            for i in 0..nr {
                trial[i] += lambda * delta[i];
            }
            let trial_res = res_of(&trial);
            let trial_merit = l2_norm(&trial_res);
            let trial_norm = sup_norm(&trial_res);
            if trial_merit.is_finite()
                && (trial_merit <= (1.0 - 0.25 * lambda) * merit || trial_norm < tol)
            {
                u = trial;
                res = trial_res;
                norm = trial_norm;
                break;
            }
            lambda *= 0.5;
            if lambda < MIN_DAMPING {
                return Err(Error::NoConvergence(format!(
                    "radial line search stalled at residual {norm:.3e}"
                )));
            }
        }
        iterations = iter + 1;
    }
    if norm >= tol {
        return Err(Error::NoConvergence(format!(
            "radial Newton did not reach {tol:.1e} (residual {norm:.3e})"
        )));
    }
    Ok(RadialSolution { r_ball, h_r: h, u, iterations, residual_norm: norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::{mean_curvature_of_jet, Jet2};
    use crate::drift::DriftFunction;
    use crate::manifold::{euclidean, hyperbolic, ModelManifold};

    fn flat() -> ModelManifold {
        ModelManifold::new(euclidean(), 2, 10.0, 1e-3).unwrap()
    }

    #[test]
    fn constant_boundary_zero_drift_gives_constant() {
        let m = flat();
        let d = DriftFunction::zero();
        let sol =
            solve_dirichlet_ball(&m, &d, 1.0, &|_| 0.7, 16, 8, 1e-12, InitialGuess::Zero).unwrap();
        for &v in &sol.u {
            assert!((v - 0.7).abs() < 1e-11, "{v}");
        }
        assert!(sol.gradient_sup(&m).unwrap() < 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = flat();
        let d = DriftFunction::selfshrinker(4.0);
        let grid = PolarGrid::new(1.5, 6, 8).unwrap();
        // deterministic wiggly state
        let mut u: Vec<f64> = (0..grid.storage_len())
            .map(|k| 0.3 * ((k as f64) * 0.713).sin() + 0.1 * ((k as f64) * 0.291).cos())
            .collect();
        u[0] = 0.21;
        let st = Stencil::build(&m, &grid).unwrap();
        let (lower, diag, upper) = jacobian(&m, &d, &grid, &u, &st);
        let dir: Vec<f64> =
            (0..grid.n_unknowns()).map(|k| ((k as f64) * 1.37).sin()).collect();
        // J * dir through the block structure
        let blocks: Vec<DVector<f64>> = {
            let mut b = vec![DVector::from_element(1, dir[0])];
            for i in 1..grid.nr {
                b.push(DVector::from_fn(grid.nt, |j, _| dir[1 + (i - 1) * grid.nt + j]));
            }
            b
        };
        let mut jv = vec![0.0; grid.n_unknowns()];
        for i in 0..grid.nr {
            let mut acc = &diag[i] * &blocks[i];
            if i > 0 {
                acc += &lower[i] * &blocks[i - 1];
            }
            if i + 1 < grid.nr {
                acc += &upper[i] * &blocks[i + 1];
            }
            if i == 0 {
                jv[0] = acc[0];
            } else {
                for j in 0..grid.nt {
                    jv[1 + (i - 1) * grid.nt + j] = acc[j];
                }
            }
        }
        // central finite differences of the residual
        let eps = 1e-6;
        let perturb = |sign: f64| {
            let mut up = u.clone();
            up[0] += sign * eps * dir[0];
            for i in 1..grid.nr {
                for j in 0..grid.nt {
                    let k = 1 + (i - 1) * grid.nt + j;
                    up[k] += sign * eps * dir[k];
                }
            }
            residual(&m, &d, &grid, &up).unwrap()
        };
        let rp = perturb(1.0);
        let rm = perturb(-1.0);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..grid.n_unknowns() {
            let fd = (rp[k] - rm[k]) / (2.0 * eps);
            worst = worst.max((jv[k] - fd).abs());
            scale = scale.max(fd.abs());
        }
        assert!(worst < 1e-6 * scale.max(1.0), "worst {worst}, scale {scale}");
    }

    #[test]
    fn residual_is_second_order_on_smooth_function() {
        // u = r^2 cos^2 theta is a polynomial in Cartesian coordinates; the
        // discrete operator should converge to the analytic one at O(h^2)
        let m = flat();
        let d = DriftFunction::zero();
        let exact = |r: f64, th: f64| {
            let c = th.cos();
            let s = th.sin();
            let jet = Jet2 {
                v: r * r * c * c,
                vr: 2.0 * r * c * c,
                vt: -r * r * (2.0 * th).sin(),
                vrr: 2.0 * c * c,
                vrt: -2.0 * r * (2.0 * th).sin(),
                vtt: -2.0 * r * r * (2.0 * th).cos(),
            };
            let _ = s;
            mean_curvature_of_jet(&m, r, &jet).unwrap()
        };
        let err_for = |nr: usize, nt: usize| -> f64 {
            let grid = PolarGrid::new(1.0, nr, nt).unwrap();
            let mut u = vec![0.0; grid.storage_len()];
            for i in 1..=grid.nr {
                for j in 0..grid.nt {
                    let (r, th) = (grid.radius(i), grid.theta(j));
                    u[grid.sidx(i, j as isize)] = r * r * th.cos().powi(2);
                }
            }
            let res = residual(&m, &d, &grid, &u).unwrap();
            let mut worst = 0.0f64;
            for i in 1..grid.nr {
                for j in 0..grid.nt {
                    let k = 1 + (i - 1) * grid.nt + j;
                    worst = worst.max((res[k] - exact(grid.radius(i), grid.theta(j))).abs());
                }
            }
            worst
        };
        let e1 = err_for(32, 32);
        let e2 = err_for(64, 64);
        let order = (e1 / e2).log2();
        assert!(order > 1.7 && order < 2.3, "order {order} (errors {e1:.3e}, {e2:.3e})");
    }

    #[test]
    fn radial_solve_matches_2d_on_symmetric_data() {
        let m = flat();
        let d = DriftFunction::bounded(0.3, 1.0);
        let rad = solve_radial(&m, &d, 1.0, 0.2, 32, 1e-11).unwrap();
        let two_d =
            solve_dirichlet_ball(&m, &d, 1.0, &|_| 0.2, 32, 16, 1e-11, InitialGuess::Zero)
                .unwrap();
        for i in 0..=32usize {
            let v2 = if i == 0 { two_d.origin() } else { two_d.value(i, 0) };
            assert!(
                (rad.u[i] - v2).abs() < 1e-9,
                "i = {i}: radial {} vs 2d {v2}",
                rad.u[i]
            );
        }
    }

    #[test]
    fn rotational_symmetry_is_preserved() {
        let m = ModelManifold::new(hyperbolic(1.0), 2, 10.0, 1e-3).unwrap();
        let d = DriftFunction::selfshrinker(4.0);
        let sol =
            solve_dirichlet_ball(&m, &d, 2.0, &|_| 0.5, 32, 12, 1e-11, InitialGuess::Harmonic)
                .unwrap();
        for i in 1..=32usize {
            assert!(sol.ring_spread(i) < 1e-10, "ring {i}: {}", sol.ring_spread(i));
        }
    }

    #[test]
    fn maximum_principle_zero_drift() {
        let m = flat();
        let d = DriftFunction::zero();
        let bdry = |th: f64| 0.4 * th.cos() + 0.1 * (3.0 * th).sin();
        let sol = solve_dirichlet_ball(&m, &d, 1.0, &bdry, 24, 24, 1e-11, InitialGuess::Harmonic)
            .unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..24 {
            let v = bdry(sol.grid.theta(j));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for &v in &sol.u {
            assert!(v >= lo - 1e-10 && v <= hi + 1e-10, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn solutions_ordered_with_boundary_data() {
        let m = flat();
        let d = DriftFunction::bounded(0.2, 2.0);
        let bdry = |th: f64| 0.3 * th.cos();
        let lo = solve_dirichlet_ball(&m, &d, 1.0, &bdry, 20, 16, 1e-11, InitialGuess::Harmonic)
            .unwrap();
        let hi = solve_dirichlet_ball(
            &m,
            &d,
            1.0,
            &|th| bdry(th) + 0.2,
            20,
            16,
            1e-11,
            InitialGuess::Harmonic,
        )
        .unwrap();
        for k in 0..lo.u.len() {
            assert!(hi.u[k] >= lo.u[k] - 1e-10);
        }
    }
}
