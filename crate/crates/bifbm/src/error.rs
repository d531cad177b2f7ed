//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum BifbmError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("covariance matrix is not positive semi-definite (jitter escalated to {max_jitter:e} without success)")]
    NotPositiveSemiDefinite { max_jitter: f64 },

    #[error("conditioning set is numerically singular beyond the jitter policy")]
    SingularConditioners,

    #[error("quadrature did not reach tolerance {tol:e} within the iteration budget")]
    QuadratureNonConvergence { tol: f64 },

    #[error("circulant embedding is not nonnegative definite: min eigenvalue {min_eig:e} (relative floor {rel_floor:e})")]
    CirculantNotNonnegative { min_eig: f64, rel_floor: f64 },

    #[error("spectral tail mass {tail:e} exceeds requested tolerance {tol:e}; increase lambda_max")]
    TailMassTooLarge { tail: f64, tol: f64 },

    #[error("product grid has {total} points, above the configured cap {cap}")]
    GridSizeCap { total: usize, cap: usize },

    #[error("interval contains fewer than two grid points")]
    EmptyInterval,

    #[error("radius {0} must lie in (0, 1/e) so that log log(1/r) is positive")]
    RadiusOutOfRange(f64),

    #[error("no path satisfied the small-ball event at x = {0}")]
    ZeroCount(f64),

    #[error("holder exponent alpha = {alpha} must lie in (0, HK) = (0, {hk})")]
    AlphaOutOfRange { alpha: f64, hk: f64 },

    #[error("level set is empty: no grid point within {epsilon} of level {level}")]
    EmptyLevelSet { level: f64, epsilon: f64 },

    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),

    #[error("grid spacing {spacing} too coarse for epsilon {epsilon} (need spacing <= epsilon/8)")]
    GridTooCoarse { spacing: f64, epsilon: f64 },

    #[error("chaos convergence condition violated: sum_j 1/(H*_j K*_j) = {lhs} must exceed d = {d}")]
    ConvergenceCondition { lhs: f64, d: usize },

    #[error("quadrature resolution {0} is too small (need at least 2 nodes)")]
    QuadratureResolution(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, BifbmError>;
