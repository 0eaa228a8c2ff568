//! Exact symbolic engine: polynomials, first-order operators, brackets and
//! quantization maps.

mod identities;
mod mechanics;
mod operator;
mod parse;
mod poly;
mod quantize;

pub use identities::{
    case_rng, random_affine, random_affine_frame, random_base_function, random_phase_polynomial, random_polynomial,
    suite_names, verify_identities, verify_identities_with, Counterexample, IdentityConfig, IdentityReport,
    SuiteResult,
};
pub use mechanics::{
    covariant_hamiltonian, energy_function, evolution_bracket, hamilton_field, poisson_t, poisson_v, symmetry_current,
};
pub use operator::FirstOrderOperator;
pub use parse::{parse_polynomial, parse_rational, Expression, Function, ParseError};
pub use poly::{Exponents, NumericPolynomial, Polynomial};
pub use quantize::{
    check_dirac, prequantum_op, quantum_connection_bracket, schrodinger_op, schrodinger_op_corrupted,
    schrodinger_op_with_divergence,
    AffineObservable, DiracReport, PhaseSpace, Quantization,
};
