//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the solvers and model constructors.
#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate was expected to lie on an interface point.
    #[error("not an interface point: y = {y}")]
    NotInterfacePoint { y: f64 },

    /// No blended control with zero normal velocity exists at this point.
    #[error("tangential control set is empty at y = {y}")]
    EmptyTangentialSet { y: f64 },

    /// The tangential set is nonempty but contains no regular control.
    #[error("no regular tangential control at y = {y}")]
    EmptyRegularSet { y: f64 },

    /// Invalid construction data or configuration value.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// An operation's documented precondition does not hold.
    #[error("{op}: precondition violated: {why}")]
    Precondition { op: &'static str, why: String },

    /// The fixed-point iteration ran out of sweeps.
    #[error(
        "iteration did not converge: rho = {rho}, {sweeps} sweeps, last change = {change:.3e}"
    )]
    NoConvergence {
        rho: f64,
        sweeps: usize,
        change: f64,
    },

    /// A slope left the tabulated p-range of an effective Hamiltonian table.
    #[error("slope {slope:.6} outside tabulated p range [{lo}, {hi}]")]
    PGridExceeded { slope: f64, lo: f64, hi: f64 },

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {why}")]
    GridMismatch { why: String },
}

impl Error {
    /// True for failures of an iterative scheme rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::PGridExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
