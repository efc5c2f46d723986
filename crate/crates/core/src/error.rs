use thiserror::Error;

/// Errors raised by the simulator and the verification protocol.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (max |M - M^dagger| entry = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U^dagger U - I| entry = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("qubit index {index} out of range for a register of {size} qubits")]
    QubitOutOfRange { index: usize, size: usize },

    #[error("qubit index {0} appears more than once")]
    DuplicateQubit(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Pauli axis {axis} on qubit {qubit} lies outside the requested support")]
    OutsideSupport { qubit: usize, axis: char },

    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("register of {qubits} qubits exceeds the limit of {limit}{hint}")]
    Resource {
        qubits: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("measurement branch probabilities both vanish (p+ = {p_plus:e}, p- = {p_minus:e}); state is corrupted")]
    Integrity { p_plus: f64, p_minus: f64 },

    #[error("promise gap collapsed: b = {b}, a = {a} ({context})")]
    GapCollapse { a: f64, b: f64, context: String },

    #[error("plan needs {requested} energy tests, budget is {budget}")]
    BudgetExceeded { requested: u64, budget: u64 },

    #[error("circuit has no gates")]
    EmptyCircuit,

    #[error("malformed copy list: {0}")]
    MalformedCopies(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
