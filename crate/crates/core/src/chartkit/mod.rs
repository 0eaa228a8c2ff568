//! Charts, reference frames as connections, adapted coordinates and lifts.

pub(crate) mod chart;
mod flow;
mod frame;
mod trivialization;

pub use chart::{Chart, Coordinate, Topology, Var};
pub use flow::{adapted_coordinates, adapted_flow, FlowOptions, FlowTrajectory, FrameFlow};
pub use frame::{lift_vector_field, relative_velocity, ReferenceFrame, VectorField};
pub use trivialization::{frame_from_trivialization, AffineTrivialization};
