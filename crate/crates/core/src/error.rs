use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolicError {
    #[error("polynomials live on different charts")]
    ChartMismatch,
    #[error("expected real coefficients")]
    ComplexCoefficients,
    #[error("{0} is not affine in momenta and lies outside the quantum algebra")]
    NotInQuantumAlgebra(String),
    #[error("{0} depends on the time momentum but must live on the vertical cotangent bundle")]
    DependsOnTimeMomentum(String),
    #[error("vector field component {0} depends on momenta")]
    NotProjectable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("chart dimension must be at least 1")]
    EmptyChart,
    #[error("duplicate coordinate name {0:?}")]
    DuplicateName(String),
    #[error("invalid coordinate name {0:?}")]
    InvalidName(String),
    #[error("circle coordinate {0:?} needs a strictly positive finite period")]
    BadPeriod(String),
    #[error("frame component {0} depends on momenta")]
    MomentumDependentFrame(usize),
    #[error("trivialization component {0} is not affine in the adapted coordinates")]
    NotAffine(usize),
    #[error("trivialization has a singular linear part")]
    NonInvertibleMap,
    #[error("frame components are not polynomial in (t, q)")]
    NonPolynomialResult,
    #[error("flow trajectory {trajectory} escaped the chart domain at t = {t}")]
    FlowEscape { trajectory: usize, t: f64 },
    #[error("flow step size underflow for trajectory {trajectory} at t = {t}")]
    StiffFlow { trajectory: usize, t: f64 },
    #[error("invalid flow request: {0}")]
    InvalidFlow(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("time step must be positive and finite")]
    BadStep,
    #[error("non-finite derivative at t = {t}")]
    BlowUp { t: f64, last_q: Vec<f64>, last_p: Vec<f64> },
    #[error("phase point dimension {got} does not match Hamiltonian dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operator has complex coefficients and cannot be Hermitian")]
    NotHermitian,
    #[error("mass tensor is not symmetric positive definite")]
    MassNotPositive,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge (achieved residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("expectation value has imaginary part {imag:e}")]
    HermiticityViolation { imag: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("angular momentum must be nonnegative, got {0}")]
    NegativeAngularMomentum(i64),
    #[error("radial grid touches r = 0")]
    GridTouchesOrigin,
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}
