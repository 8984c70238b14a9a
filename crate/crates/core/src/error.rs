use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid argument `{name}` = {value}: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A higher waveguide mode propagates, i.e. the cavity is not narrow
    /// compared with the wavelength.
    #[error("mode {mode} propagates (kappa * width = {kappa_width:.6} >= {mode} * pi)")]
    PropagatingMode { mode: usize, kappa_width: f64 },

    /// A denominator of a trigonometric symbol is within the guard radius of zero.
    #[error("{what} pole: |denominator| = {magnitude:.3e} below guard {guard:.1e}")]
    Pole {
        what: &'static str,
        magnitude: f64,
        guard: f64,
    },

    /// Two evaluation points coincide where the kernel is singular.
    #[error("kernel is singular at the requested points ({reason})")]
    SingularPoint { reason: &'static str },

    /// A complex argument sits on or beyond the branch cut of the logarithm.
    #[error("branch ambiguity: Re(kappa) = {re:.3e} must be positive")]
    Branch { re: f64 },

    /// An iteration did not reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations (last change {last_change:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    /// The discretized operator is numerically singular.
    #[error("linear system is near-singular (condition estimate {condition:.3e}, grid {grid_size})")]
    SingularSystem { condition: f64, grid_size: usize },

    /// The density expansion has not decayed; a larger grid is needed.
    #[error("density unresolved on grid {grid_size} (tail ratio {tail_ratio:.3e}); increase the grid size")]
    Unresolved { grid_size: usize, tail_ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidArgument {
        name,
        value,
        reason,
    }
}
