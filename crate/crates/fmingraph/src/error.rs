use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curvature profile returned a non-finite value at r = {radius}")]
    NonFiniteProfile { radius: f64 },

    #[error("warping function overflowed near r = {radius}; use log-space integration (solve_jacobi_auto)")]
    WarpOverflow { radius: f64 },

    #[error("radius {radius} outside tabulated range [0, {r_max}]")]
    OutOfRange { radius: f64, r_max: f64 },

    #[error("quantity is singular at the pole (rho = 0)")]
    PoleSingularity,

    #[error("probe window precedes asymptotic regime: r_probe = {r_probe} < T1 = {t1}")]
    ProbeBeforeAsymptotic { r_probe: f64, t1: f64 },

    #[error("weight a0 must be non-negative: a0({radius}) = {value}")]
    NegativeWeight { radius: f64, value: f64 },

    #[error("improper integral diverges or converges too slowly: {what}")]
    DivergentIntegral { what: String },

    #[error("quadrature failed to reach requested tolerance on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("drift gradient bound is unbounded; restrict evaluation to a slab |t| <= T_slab")]
    UnboundedDrift,

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("ball solvability condition fails at r = {radius}: F = {f_value} > (n-1) f_a'/f_a = {bound}")]
    BallSolvability { radius: f64, f_value: f64, bound: f64 },

    #[error("non-finite grid function value at node ({i}, {j})")]
    NonFiniteState { i: usize, j: usize },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("supersolution search exhausted the radius ladder below cap {cap}")]
    BarrierSearchFailed { cap: f64 },

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
