//! Time-dependent mechanics relative to reference frames: an exact symbolic
//! engine for brackets and quantization maps, classical trajectories, and
//! grid discretizations of the resulting Schrödinger operators.

pub mod chartkit;
pub mod clmech;
pub mod error;
pub mod qgrid;
pub mod scalar;
pub mod symcore;

pub use error::{ChartError, ClassicalError, GridError, SymbolicError};
pub use scalar::{Coefficient, GaussianRational};

/// Exact polynomial on phase space.
pub type PhasePolynomial = symcore::Polynomial<GaussianRational>;
/// Exact first-order differential operator.
pub type ExactOperator = symcore::FirstOrderOperator<GaussianRational>;
/// Reference frame with exact components.
pub type Frame = chartkit::ReferenceFrame<GaussianRational>;
/// Affine observable with exact coefficients.
pub type Observable = symcore::AffineObservable<GaussianRational>;
/// Flow of adapted coordinates in double precision.
pub type FrameFlow64 = chartkit::FrameFlow<f64>;
