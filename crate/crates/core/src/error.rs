use thiserror::Error;

/// Errors raised by the pricing and premium routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no root of the Laplace exponent for target {target}: searched [{lo}, {hi}]")]
    RootBracket { target: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}] after {panels} panels (last change {change:e})")]
    Quadrature {
        lo: f64,
        hi: f64,
        panels: usize,
        change: f64,
    },

    #[error("PSOR did not converge after {iterations} iterations (residual {residual:e})")]
    PsorDivergence { iterations: usize, residual: f64 },

    #[error("free-boundary equation has no sign change; bracket trace {trace:?}")]
    BoundaryBracket { trace: Vec<(f64, f64)> },

    #[error("free-boundary residual {residual:e} exceeds tolerance {tolerance:e}")]
    BoundaryResidual { residual: f64, tolerance: f64 },

    #[error("European value vanishes at x = {x}; illiquidity factor undefined")]
    DegenerateFactor { x: f64 },
}

impl Error {
    /// Stable machine-readable tag of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidParameter { .. } => "invalid_parameter",
            Self::Admissibility(_) => "admissibility",
            Self::InvalidGrid(_) => "invalid_grid",
            Self::RootBracket { .. } => "root_bracket",
            Self::Quadrature { .. } => "quadrature",
            Self::PsorDivergence { .. } => "psor_divergence",
            Self::BoundaryBracket { .. } => "boundary_bracket",
            Self::BoundaryResidual { .. } => "boundary_residual",
            Self::DegenerateFactor { .. } => "degenerate_factor",
        }
    }

    /// Whether the error stems from the inputs rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Self::InvalidParameter { .. } | Self::Admissibility(_) | Self::InvalidGrid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
