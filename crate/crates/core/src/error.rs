//! Error type shared by every module of the crate.

/// Crate-wide error type.
///
/// `Domain` covers invalid arguments (parameters outside the admissible
/// space, malformed grids, empty samples). `Numerical` covers quadrature or
/// root-finding trouble on inputs that are formally valid. `Divergent`
/// flags criterion evaluations whose defining integral does not converge,
/// so callers can distinguish "no finite value exists" from "we failed to
/// compute one".
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Invalid argument or parameter outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A defining integral diverges for the requested parameters.
    #[error("divergent integral: {0}")]
    Divergent(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error marks a divergent defining integral rather than
    /// a numerical failure.
    pub fn is_divergent(&self) -> bool {
        matches!(self, Error::Divergent(_))
    }
}
