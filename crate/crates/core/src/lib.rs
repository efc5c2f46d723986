//! Desk-scale simulation of verifiable blind quantum computation through
//! Feynman-Kitaev history states and Pauli-sampled energy tests.
//!
//! The crate builds history states for a circuit and its complement, the
//! matching clock Hamiltonians `H0` and `H1`, and runs the full
//! prepare/test/decide protocol against honest and adversarial provers.

pub mod circuit;
pub mod error;
pub mod hamiltonian;
pub mod history;
pub mod pauli;
pub mod protocol;
pub mod rng;
pub mod stats;
pub mod statevector;

pub use circuit::{
    acceptance_probability, builtin_instances, complement_circuit, find_instance, parse_circuit, Gate, GateKind,
    Instance, Membership, QuantumCircuit,
};
pub use energy_test::{pass_probability, run_energy_test, sample_term, EnergyTestRecord};
pub use error::{Error, Result};
pub use hamiltonian::{
    alpha_beta, build_clock_hamiltonian, compute_thresholds, HamiltonianVariant, LocalHamiltonian, TermTag,
    Thresholds,
};
pub use history::{build_history_state, extract_output, ClockLayout, Extraction, HistoryVariant};
pub use pauli::{decompose_operator, string_to_matrix, PauliAxis, PauliString};
pub use protocol::{
    alice_verify, bob_prepare, estimate_statistics, plan_repetitions, run_protocol, BobStrategy, Conclusion,
    ProtocolTranscript, RepetitionPlan, StatsSummary,
};
pub use rng::RngStream;
pub use statevector::{expectation, ground_energy, run_prefixes, MeasurementOutcome, StateVector};
