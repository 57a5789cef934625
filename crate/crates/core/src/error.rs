use thiserror::Error;

/// Errors raised by the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the operation's domain (bad symbol, bad parameter, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The shift is not topologically mixing; use `decompose_components`.
    #[error("shift is not topologically mixing ({0}); decompose it into components first")]
    NotMixing(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A certified enclosure was too wide to decide the question asked.
    #[error("indeterminate at tolerance: {what} in [{lower:e}, {upper:e}]")]
    Indeterminate { what: String, lower: f64, upper: f64 },

    /// The renewal tail envelope does not hold on the validation window.
    #[error("tail envelope not validated: |eps_n| = {residual:e} > {eps_bar:e} at n = {n}; supply more head data or a larger N0")]
    EnvelopeInvalid { n: usize, residual: f64, eps_bar: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
