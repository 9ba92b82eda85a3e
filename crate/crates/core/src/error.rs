//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Parameter fails a hard invariant (negative rate, missing block, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The linearized model is unstable: the effective mechanical
    /// linewidth came out nonpositive, so no stationary state exists.
    #[error("unstable system: effective linewidth gamma_eff = {gamma_eff:.6e} <= 0")]
    Instability { gamma_eff: f64 },

    /// Input lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Normalized coherences are undefined: no sideband photon flux
    /// (n_m = beta = 0).
    #[error("zero sideband photon flux: n_m = beta = 0")]
    ZeroFlux,

    /// Fock-space cutoff too small for the requested state, or the
    /// truncation-doubling loop exceeded its cap.
    #[error("truncation failure: {0}")]
    Truncation(String),

    /// The Liouvillian spectral-gap diagnostic found a (near-)degenerate
    /// stationary subspace.
    #[error("no unique stationary state: spectral gap {gap:.3e} below threshold {threshold:.3e}")]
    NonUniqueSteadyState { gap: f64, threshold: f64 },

    /// Time propagation could not meet its error tolerance.
    #[error("propagation failure: {0}")]
    Propagation(String),

    /// Threshold refinement found no bracket or multiple sign changes.
    #[error("threshold search failed: {0}")]
    ThresholdSearch(String),

    /// Dense linear algebra failed (singular matrix, no convergence).
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}
