use thiserror::Error;

/// Errors raised by the simulator.
///
/// Physical quantities inside variants are carried as `f64` regardless of the
/// scalar type the computation ran in, so the error type is not generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical argument outside its domain (non-positive temperature, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("energy cutoff {cutoff_j:e} J lies below the ground level {ground_j:e} J")]
    EmptySpectrum { cutoff_j: f64, ground_j: f64 },

    /// The Boltzmann weight above the energy cutoff is too large.
    #[error(
        "truncated spectrum: tail weight {tail:e} exceeds {limit:e}; \
         raise the cutoff to at least {required_cutoff_j:e} J"
    )]
    Truncation {
        tail: f64,
        limit: f64,
        required_cutoff_j: f64,
    },

    #[error("eigensolver did not converge after {iterations} iterations: {detail}")]
    Solver { iterations: usize, detail: String },

    /// Analytic boundary-layer formulas used where the compartment is
    /// narrower than the two boundary layers it must hold.
    #[error("outside validity: half length {half_length_m:e} m vs 2*delta {two_delta_m:e} m")]
    OutOfValidity { half_length_m: f64, two_delta_m: f64 },

    #[error("invariant violated: {name}: {detail}")]
    Invariant { name: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
