use thiserror::Error;

/// Errors raised by profile construction, geometry and solver setup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("input has {got} samples, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support coefficients are not strictly convex (margin {margin})")]
    Convexity { margin: f64 },

    #[error("profile does not close: defect ({defect_x}, {defect_y}) exceeds tolerance {tol}")]
    NotClosed {
        defect_x: f64,
        defect_y: f64,
        tol: f64,
    },

    #[error("geometry error: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, FlowError>;
