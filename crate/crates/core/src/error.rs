//! Error type shared by all modules.

/// Errors surfaced by the numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside an operation's domain (`x ≤ 0` for log-gamma,
    /// constant symbol where a ray direction is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrand produced a non-finite value; the message names the node.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A declared-finite norm diverged numerically.
    #[error("divergent norm: {0}")]
    DivergentNorm(String),

    /// The phase function has no bracketed interior minimum.
    #[error("no bracketed minimum in [{lo}, {hi}]")]
    NoMinimum { lo: f64, hi: f64 },

    /// Second derivative at the located minimizer is not positive.
    #[error("degenerate phase: h''(r_x) = {c_x} at r_x = {r_x}")]
    DegeneratePhase { r_x: f64, c_x: f64 },

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
