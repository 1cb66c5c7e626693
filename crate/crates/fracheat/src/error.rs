use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gamma function pole at {0}")]
    Pole(f64),
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("expected a {expected} field")]
    SideMismatch { expected: &'static str },
    #[error("imaginary residue {residue:e} above threshold, increase padding")]
    Aliasing { residue: f64 },
    #[error("input is not causal: max |g| on t <= 0 is {0:e}")]
    NonCausal(f64),
    #[error("negative input {value:e} at node {index}")]
    Negative { index: usize, value: f64 },
    #[error("monotonicity violated by {excess:e} at node {index} in iteration {n}")]
    Monotonicity { n: usize, index: usize, excess: f64 },
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("certificate search exhausted: {0}")]
    SearchExhausted(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("unknown check id: {0}")]
    UnknownCheck(String),
    #[error("comparison violated: {0}")]
    Comparison(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
