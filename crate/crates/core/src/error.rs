//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by spectral operations, norms, the solver and the
/// bound machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A field that must represent a real function failed the Hermitian
    /// symmetry check.
    #[error("spectral field violates Hermitian symmetry (max deviation {max_dev:.3e}, tolerance {tol:.3e})")]
    SymmetryViolation { max_dev: f64, tol: f64 },

    /// Grid too coarse to resolve the requested mode cube.
    #[error("grid of {grid} points per axis cannot resolve modes up to {max_mode} (need at least {needed})")]
    Undersampled {
        grid: usize,
        max_mode: usize,
        needed: usize,
    },

    /// An exponential weight overflowed at some mode.
    #[error("Gevrey weight overflow at mode {mode:?} (log-magnitude {log_term:.1} exceeds f64 range)")]
    WeightOverflow { mode: Vec<i64>, log_term: f64 },

    /// Nonlinearity evaluation overflowed at a grid point.
    #[error("nonlinearity evaluation overflowed at grid point {index} (u = {value:.3e})")]
    EvalOverflow { index: usize, value: f64 },

    /// A majorising series failed to converge at the requested argument.
    #[error("majorising series diverges at s = {s:.3e} (term ratio {ratio:.3e} at k = {k})")]
    SeriesDivergence { s: f64, ratio: f64, k: usize },

    /// The lattice sum for C0 diverges (p <= n/2).
    #[error("lattice sum diverges: need p > n/2, got p = {p}, n = {n}")]
    DivergentSum { n: usize, p: f64 },

    /// The lattice sum failed to reach the target accuracy within the
    /// summation budget.
    #[error("lattice sum did not converge to {target:.1e} relative (achieved {achieved:.1e})")]
    SumNotConverged { target: f64, achieved: f64 },

    /// The time integration blew up.
    #[error("numerical divergence at t = {t:.6}: {detail}")]
    Divergence { t: f64, detail: String },

    /// Requested elliptic quantity is infinite.
    #[error("elliptic integral overflow: {0}")]
    EllipticOverflow(String),

    /// Traveling-wave parameters do not fit the torus.
    #[error("sn wave does not fit the torus: requested lambda = {requested}, nearest admissible lambda = {admissible}")]
    PeriodicityFit { requested: f64, admissible: f64 },

    /// A documented consistency gate failed (e.g. y(0) <= C0/2 * Y0).
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Closed-form and RK4 integrations of a tau ODE disagree.
    #[error("tau ODE cross-check failed: closed form vs RK4 differ by {delta:.3e} relative (limit {limit:.1e})")]
    CrossCheckFailed { delta: f64, limit: f64 },

    /// Configuration file errors.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
