use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error(
        "quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}"
    )]
    Quadrature { achieved: f64, requested: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("path exploded at step {step}: |x| = {value:e} exceeds cap {cap:e}")]
    PathExplosion { step: usize, value: f64, cap: f64 },

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("optimization failed: {0}")]
    Optimization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
