//! Grid quantization.

mod assemble;
mod eigen;
mod evolve;
mod grid;
mod io;
pub mod linalg;
mod operator;
mod wave;

pub use assemble::{
    build_energy_operator, derivative, discretize_affine, discretize_affine_values, frame_hamiltonian_operator, frame_shift,
    inverse_mass, kinetic_operator, radial_operator, second_derivative,
};
pub use eigen::{eigensolve, eigensolve_near, Eigenpair, RESIDUAL_TOL};
pub use evolve::{evolve, Evolution, EvolveOptions, Generator};
pub use grid::{Axis, Boundary, Grid, Measure, RadialMeasure, Stencil};
pub use io::{read_snapshot, write_evolution_csv, write_snapshot, write_spectrum_csv, SNAPSHOT_MAGIC};
pub use operator::{GridOperator, HERMITIAN_TOL};
pub use wave::{WaveFunction, IMAG_DISCARD, IMAG_LIMIT};
