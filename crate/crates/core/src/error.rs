use thiserror::Error;

/// Which end of the grid window a tail diagnostic refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowEnd {
    /// Large grid points, `k` near `k_min`.
    Lower,
    /// Small grid points, `k` near `k_max`.
    Upper,
}

impl std::fmt::Display for WindowEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowEnd::Lower => f.write_str("k_min"),
            WindowEnd::Upper => f.write_str("k_max"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("series terms grow toward the {end} end of the window [{k_min}, {k_max}]")]
    TailDivergence { end: WindowEnd, k_min: i64, k_max: i64 },

    #[error("required precision of {required} bits exceeds the ceiling of {ceiling} bits")]
    PrecisionOverflow { required: u64, ceiling: u64 },

    #[error("outside the convergence domain: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {required}, have {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("non-positive pivot at index {index}; raise the working precision")]
    PositivityFailure { index: usize },

    #[error("grid function window [{found_min}, {found_max}] does not match context window [{k_min}, {k_max}]")]
    WindowMismatch {
        found_min: i64,
        found_max: i64,
        k_min: i64,
        k_max: i64,
    },
}

impl Error {
    /// Stable machine-readable category, used by the command line.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Pole(_) => "pole",
            Error::TailDivergence { .. } => "tail-divergence",
            Error::PrecisionOverflow { .. } => "precision-overflow",
            Error::Domain(_) => "domain",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::PositivityFailure { .. } => "positivity-failure",
            Error::WindowMismatch { .. } => "window-mismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
