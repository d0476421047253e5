//! Nonlocal curvature flows of convex plane curves.
//!
//! Curves are stored as curvature over turning angle ([`curve::CurvatureProfile`])
//! and evolved by `k_t = k²(∂²_θF + F)` for a normal speed `F`. The
//! length-preserving flow uses `F = k − α` with `α = (1/2π)∫k² ds`.

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod oracle;
pub mod grid;
mod lp;
pub mod point;
pub mod spectral;
pub mod verify;

pub use curve::{CurvatureProfile, PolylineCurve, SupportCoefficients};
pub use diagnostics::DiagnosticsRecord;
pub use error::{FlowError, Result};
pub use flow::{evolve, FlowSpec, Scheme, SolverConfig, Termination, Trajectory};
pub use grid::AngleGrid;
pub use point::Point2;
