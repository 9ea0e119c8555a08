use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported sphere dimension N={0} (supported: 2..=6)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("point is not on the unit sphere (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("degree {degree} exceeds the grid budget {budget}; projections would lose accuracy")]
    DegreeBudget { degree: usize, budget: usize },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("quadrature did not converge: achieved {achieved:.3e}, wanted {target:.3e}")]
    QuadratureStalled { achieved: f64, target: f64 },

    #[error("value count {values} does not match node count {nodes}")]
    LengthMismatch { values: usize, nodes: usize },

    #[error("non-finite sample at node {0}")]
    NonFinite(usize),

    #[error("inequality violated: {0}")]
    Violation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
