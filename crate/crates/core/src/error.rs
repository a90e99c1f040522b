use thiserror::Error;

use crate::jet::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("direction too short for the slit tangent bundle: |y| = {0:e}")]
    DegenerateDirection(f64),
    #[error("singular {what}: condition estimate {condition:e}, smallest eigenvalue {min_eigenvalue:e}")]
    Singular {
        what: &'static str,
        condition: f64,
        min_eigenvalue: f64,
    },
    #[error("volume density {value} is not positive at x = {point:?}")]
    NonPositiveVolume { point: Vec<f64>, value: f64 },
    #[error("Randers positivity violated at x = {point:?}: |df| = {norm}")]
    RandersPositivity { point: Vec<f64>, norm: f64 },
    #[error("spray is not Berwald at x = {point:?}: max|B| = {max_berwald:e}")]
    NotBerwald { point: Vec<f64>, max_berwald: f64 },
    #[error("spray is not Douglas at x = {point:?}: max|D| = {max_douglas:e}")]
    NotDouglas { point: Vec<f64>, max_douglas: f64 },
    #[error(
        "spray is not locally projectively flat at x = {point:?}: max|W| = {max_weyl:e}, max|D| = {max_douglas:e}"
    )]
    NotProjectivelyFlat {
        point: Vec<f64>,
        max_weyl: f64,
        max_douglas: f64,
    },
    #[error("{what} varies with y by {spread:e}, above tolerance")]
    DirectionDependent { what: &'static str, spread: f64 },
    #[error("sprays are not projectively related: fit residual {residual:e}")]
    NotProjectivelyRelated { residual: f64 },
    #[error("u = {u} lies outside the solution grid [0, {u_max}]")]
    OutsideGrid { u: f64, u_max: f64 },
    #[error("step refinement did not show fourth-order convergence (observed {observed_order:.3}, differences {differences:?})")]
    NonConvergent {
        observed_order: f64,
        differences: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
