//! Numerical laboratory for the Dirichlet problem of prescribed-mean-curvature
//! graphs, div(grad u / sqrt(1 + |grad u|^2)) = <grad_bar f, nu>, on
//! rotationally symmetric manifolds with metric dr^2 + f_a(r)^2 dtheta^2.
//!
//! The crate builds model manifolds from curvature pinching profiles,
//! represents split drifts f(x,t) = m(rho) + r(t), constructs and pointwise
//! verifies the classical barrier families (height, boundary gradient, global
//! radial supersolution, asymptotic cone barrier), solves the equation on
//! geodesic balls with a damped Newton finite-difference scheme, and runs the
//! exhaustion procedure for the asymptotic Dirichlet problem.

pub mod asymptotic;
pub mod barrier;
pub mod config;
pub mod drift;
pub mod experiment;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod solver;
pub mod quad;

pub use error::{Error, Result};
