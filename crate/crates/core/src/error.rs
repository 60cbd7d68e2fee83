use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The perturbative or weak-coupling treatment breaks down.
    #[error("validity error: {0}")]
    Validity(String),

    /// An iterative procedure or quadrature failed to converge.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A fit or sweep received too little data.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The quadratic Hamiltonian has complex or zero normal-mode frequencies.
    #[error("dynamical instability / zero mode: {0}")]
    Instability(String),

    /// A matrix logarithm would need to cross the branch cut.
    #[error("branch error: {0}")]
    Branch(String),

    /// The ODE integrator could not advance.
    #[error("integrator failure at t = {t:.6e} (step {step:.3e}): {reason}")]
    Integrator { t: f64, step: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
