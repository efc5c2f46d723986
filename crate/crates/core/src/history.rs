//! Feynman-Kitaev history states over a unary clock register.
//!
//! Work qubits occupy indices `0..n`, clock qubits `c_1..c_T` occupy
//! `n..n+T`. Time `t` is the clock word with `c_1..c_t` set and the rest clear.

use serde::Serialize;

use crate::circuit::{complement_circuit, QuantumCircuit};
use crate::error::{Error, Result};
use crate::pauli::PauliAxis;
use crate::rng::RngStream;
use crate::statevector::{run_prefixes, StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClockLayout {
    pub n: usize,
    pub steps: usize,
}

impl ClockLayout {
    pub fn new(n: usize, steps: usize) -> Result<Self> {
        if n + steps > MAX_QUBITS {
            return Err(Error::Resource {
                qubits: n + steps,
                limit: MAX_QUBITS,
                hint: " (work + clock)",
            });
        }
        Ok(ClockLayout { n, steps })
    }

    pub fn for_circuit(c: &QuantumCircuit) -> Result<Self> {
        Self::new(c.num_qubits(), c.depth())
    }

    /// Total register size `m = n + T`.
    pub fn num_qubits(&self) -> usize {
        self.n + self.steps
    }

    /// Global index of clock qubit `c_i`, `1 <= i <= T`.
    pub fn clock_qubit(&self, i: usize) -> usize {
        debug_assert!((1..=self.steps).contains(&i));
        self.n + i - 1
    }

    /// Clock word for time `t`, as an integer over the clock bits.
    pub fn codeword(&self, t: usize) -> usize {
        (1usize << t) - 1
    }

    /// Decodes a clock word; `None` if it is not a domain wall.
    pub fn decode(&self, word: usize) -> Option<usize> {
        let t = word.trailing_ones() as usize;
        (t <= self.steps && word == self.codeword(t)).then_some(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryVariant {
    Psi0,
    Psi1,
}

/// `(T+1)^{-1/2} sum_t U_t..U_1|0^n> (x) |t>`; `Psi1` uses the complement circuit.
pub fn build_history_state(c: &QuantumCircuit, variant: HistoryVariant) -> Result<StateVector> {
    match variant {
        HistoryVariant::Psi0 => history_of(c),
        HistoryVariant::Psi1 => history_of(&complement_circuit(c)?),
    }
}

fn history_of(c: &QuantumCircuit) -> Result<StateVector> {
    let layout = ClockLayout::for_circuit(c)?;
    let prefixes = run_prefixes(c)?;
    let work_dim = 1usize << layout.n;
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << layout.num_qubits()];
    let weight = 1.0 / ((layout.steps + 1) as f64).sqrt();
    for (t, prefix) in prefixes.iter().enumerate() {
        let base = layout.codeword(t) * work_dim;
        for (w, a) in prefix.amplitudes().iter().enumerate() {
            amps[base + w] = a * weight;
        }
    }
    StateVector::from_amplitudes(amps)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Extraction {
    /// Clock read `1^T`; the work register collapsed to the circuit output.
    Success(StateVector),
    /// A valid clock word for an earlier time.
    Failure { time: usize },
    /// The clock word was not a domain wall, so the input was not a history state.
    InvalidClock { word: usize },
}

impl Extraction {
    pub fn succeeded(&self) -> bool {
        matches!(self, Extraction::Success(_))
    }
}

/// Measures every clock qubit in Z and keeps the work register when `t = T`.
pub fn extract_output(psi: &StateVector, layout: &ClockLayout, rng: &mut RngStream) -> Result<Extraction> {
    if psi.num_qubits() != layout.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: layout.num_qubits(),
            actual: psi.num_qubits(),
        });
    }
    let mut post = psi.clone();
    let mut word = 0usize;
    for i in 1..=layout.steps {
        let outcome = post.measure_in_place(layout.clock_qubit(i), PauliAxis::Z, rng)?;
        if outcome.value == -1 {
            word |= 1 << (i - 1);
        }
    }
    match layout.decode(word) {
        None => Ok(Extraction::InvalidClock { word }),
        Some(t) if t == layout.steps => {
            let work_dim = 1usize << layout.n;
            let base = word * work_dim;
            let work = post.amplitudes()[base..base + work_dim].to_vec();
            Ok(Extraction::Success(StateVector::normalized(work)?))
        }
        Some(t) => Ok(Extraction::Failure { time: t }),
    }
}
