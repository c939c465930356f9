use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Shape {
        op: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("{op}: dimension mismatch ({detail})")]
    Dimension { op: &'static str, detail: String },

    #[error("matrix and vector dimensions must be positive")]
    EmptyDimension,

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("result would have {elements} elements, cap is {cap}")]
    SizeCap { elements: usize, cap: usize },

    #[error("rank-deficient design: numerical rank {rank} of {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("under-determined regression: {rows} rows for {cols} unknowns per output")]
    Underdetermined { rows: usize, cols: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no admissible input strength: rho(A_0 kron A_0) = {rho} > 1")]
    Infeasible { rho: f64 },

    #[error("only {hits} conditioning events observed, need at least {required}")]
    InsufficientConditioning { hits: usize, required: usize },

    #[error("need at least {required} distinct horizons with successful rows, found {found}")]
    InsufficientData { found: usize, required: usize },
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn dimension(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }
}
