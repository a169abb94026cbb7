use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested point sits on (or within the guard margin of) a pole or a
    /// zero of a logarithm argument.
    #[error("singular point: {0}")]
    Singular(String),

    /// A finite-difference stencil straddles the |kR| = π/4 branch switch.
    #[error("stencil [{r_lo}, {r_hi}] crosses the branch boundary kR = π/4 (k = {k})")]
    BranchCrossing { r_lo: f64, r_hi: f64, k: f64 },

    /// Riccati solution magnitude exceeded the pole guard.
    #[error("pole encountered: |y| exceeded {guard:e} after last good t = {t_last}")]
    PoleEncountered { t_last: f64, guard: f64 },

    /// Adaptive step size collapsed below the representable resolution.
    #[error("step size underflow at t = {t} (h = {h:e}); problem is stiff or singular")]
    StepUnderflow { t: f64, h: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }
}
