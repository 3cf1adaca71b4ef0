use thiserror::Error;

/// Errors produced while building grids, evaluating geometry, or configuring flows.
///
/// Mid-run stops (blow-up, lost admissibility, lost resolution) are *not* errors;
/// they are reported through [`crate::flow::Termination`]. An `Error` means the
/// requested computation could not be set up or a hard numerical fault occurred.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (grid sizes, flow parameters, shape parameters).
    #[error("configuration: {0}")]
    Config(String),

    /// Input data violates a domain requirement (e.g. non-positive radial value).
    #[error("domain: {0}")]
    Domain(String),

    /// Principal curvatures left the defining cone of the curvature function.
    #[error("inadmissible curvatures at node {node}: kappa = {kappa:?} not in {cone}")]
    Inadmissible {
        node: usize,
        kappa: Vec<f64>,
        cone: String,
    },

    /// A per-node numerical computation failed (non-finite values, eigen-solve).
    #[error("numerical failure at node {node}: {reason}")]
    Numerical { node: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
