//! Circuits `V = U_T ... U_1` on `n` work qubits, their complements, and the
//! built-in instance catalog.
//!
//! Qubit 0 is the output qubit. A gate matrix acts on its targets with
//! `targets[j]` mapped to bit `j` of the local index, so `cnot c t` has the
//! control on the low bit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{tensor_lsb, CMatrix, PauliAxis};
use crate::statevector::StateVector;

const UNITARY_TOL: f64 = 1e-10;

/// Gates touch at most this many qubits (three only for complement composites).
pub const MAX_GATE_QUBITS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    X,
    Z,
    H,
    S,
    TPhase,
    Cnot,
    Cz,
    Custom,
}

impl GateKind {
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::TPhase => "t",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: CMatrix,
}

fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn unitary_deviation(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let id = CMatrix::identity(u.nrows(), u.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Gate {
    fn fixed(kind: GateKind, targets: Vec<usize>, matrix: CMatrix) -> Self {
        Gate {
            kind,
            targets,
            matrix,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::fixed(GateKind::X, vec![q], PauliAxis::X.matrix())
    }

    pub fn z(q: usize) -> Self {
        Self::fixed(GateKind::Z, vec![q], PauliAxis::Z.matrix())
    }

    pub fn h(q: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::fixed(
            GateKind::H,
            vec![q],
            CMatrix::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)]),
        )
    }

    pub fn s(q: usize) -> Self {
        let m = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), Complex64::i()]);
        Self::fixed(GateKind::S, vec![q], m)
    }

    pub fn t(q: usize) -> Self {
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let m = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), phase]);
        Self::fixed(GateKind::TPhase, vec![q], m)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        let mut m = CMatrix::identity(4, 4);
        // local index = control + 2 * target; swap |c=1,t=0> and |c=1,t=1>
        m.swap_rows(1, 3);
        Self::fixed(GateKind::Cnot, vec![control, target], m)
    }

    pub fn cz(a: usize, b: usize) -> Self {
        let mut m = CMatrix::identity(4, 4);
        m[(3, 3)] = cr(-1.0);
        Self::fixed(GateKind::Cz, vec![a, b], m)
    }

    pub fn custom(targets: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let g = Gate {
            kind: GateKind::Custom,
            targets,
            matrix,
        };
        g.validate_shape()?;
        Ok(g)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint_matrix(&self) -> CMatrix {
        self.matrix.adjoint()
    }

    fn validate_shape(&self) -> Result<()> {
        let k = self.targets.len();
        if k == 0 || k > MAX_GATE_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "gate must act on 1 to {MAX_GATE_QUBITS} qubits, got {k}"
            )));
        }
        for (j, &q) in self.targets.iter().enumerate() {
            if self.targets[..j].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let dim = 1usize << k;
        if self.matrix.nrows() != dim || self.matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.matrix.nrows().max(self.matrix.ncols()),
            });
        }
        let deviation = unitary_deviation(&self.matrix);
        if deviation.is_nan() || deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.validate_shape()?;
        if let Some(&q) = self.targets.iter().find(|&&q| q >= n) {
            return Err(Error::QubitOutOfRange { index: q, size: n });
        }
        Ok(())
    }

    /// `X` on `qubit` applied after this gate, as one gate.
    ///
    /// If `qubit` is not already a target it is appended as the highest local bit.
    pub fn then_x(&self, qubit: usize) -> Result<Gate> {
        let mut targets = self.targets.clone();
        let (base, slot) = match targets.iter().position(|&q| q == qubit) {
            Some(j) => (self.matrix.clone(), j),
            None => {
                targets.push(qubit);
                let j = targets.len() - 1;
                (tensor_lsb(&[self.matrix.clone(), CMatrix::identity(2, 2)]), j)
            }
        };
        // (X_slot U)[r, c] = U[r ^ slot_bit, c]
        let dim = base.nrows();
        let mut m = base.clone();
        for r in 0..dim {
            m.set_row(r, &base.row(r ^ (1 << slot)));
        }
        Gate::custom(targets, m)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.mnemonic())?;
        for q in &self.targets {
            write!(f, " {q}")?;
        }
        if self.kind == GateKind::Custom {
            for r in 0..self.matrix.nrows() {
                for c in 0..self.matrix.ncols() {
                    let z = self.matrix[(r, c)];
                    write!(f, " {:?} {:?}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCircuit {
    n: usize,
    gates: Vec<Gate>,
    label: String,
}

impl QuantumCircuit {
    pub fn new(n: usize, gates: Vec<Gate>, label: impl Into<String>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one qubit".into()));
        }
        if gates.is_empty() {
            return Err(Error::EmptyCircuit);
        }
        for g in &gates {
            g.validate(n)?;
        }
        Ok(QuantumCircuit {
            n,
            gates,
            label: label.into(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of time steps `T`.
    pub fn depth(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Circuit text: `qubits <n>` then one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for QuantumCircuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_circuit(s, "circuit")
    }
}

/// Parses the circuit text format. Blank lines and `#` comments are ignored.
pub fn parse_circuit(text: &str, label: &str) -> Result<QuantumCircuit> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        let Some(width) = n else {
            if head != "qubits" || rest.len() != 1 {
                return Err(err(format!("expected `qubits <n>`, got `{line}`")));
            }
            let w: usize = rest[0]
                .parse()
                .map_err(|e| err(format!("bad qubit count `{}`: {e}", rest[0])))?;
            if w == 0 || w > crate::statevector::MAX_QUBITS {
                return Err(err(format!(
                    "qubit count {w} outside 1..={}",
                    crate::statevector::MAX_QUBITS
                )));
            }
            n = Some(w);
            continue;
        };
        let index = |tok: &str| -> Result<usize> {
            let q: usize = tok
                .parse()
                .map_err(|e| err(format!("bad qubit index `{tok}`: {e}")))?;
            if q >= width {
                return Err(err(format!("qubit {q} out of range for {width} qubits")));
            }
            Ok(q)
        };
        let arity = |want: usize| -> Result<()> {
            if rest.len() != want {
                return Err(err(format!("`{head}` takes {want} target(s), got {}", rest.len())));
            }
            Ok(())
        };
        let gate = match head {
            "x" | "z" | "h" | "s" | "t" => {
                arity(1)?;
                let q = index(rest[0])?;
                match head {
                    "x" => Gate::x(q),
                    "z" => Gate::z(q),
                    "h" => Gate::h(q),
                    "s" => Gate::s(q),
                    _ => Gate::t(q),
                }
            }
            "cnot" | "cz" => {
                arity(2)?;
                let (a, b) = (index(rest[0])?, index(rest[1])?);
                if a == b {
                    return Err(err(format!("`{head}` needs distinct qubits")));
                }
                if head == "cnot" {
                    Gate::cnot(a, b)
                } else {
                    Gate::cz(a, b)
                }
            }
            "custom" => {
                let k = match rest.len() {
                    9 => 1,
                    34 => 2,
                    131 => 3,
                    other => {
                        return Err(err(format!(
                            "`custom` expects targets followed by 8, 32 or 128 numbers, got {other} tokens"
                        )))
                    }
                };
                let targets = rest[..k].iter().map(|t| index(t)).collect::<Result<Vec<_>>>()?;
                let nums = rest[k..]
                    .iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("bad matrix entry `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dim = 1usize << k;
                let entries: Vec<Complex64> = nums
                    .chunks_exact(2)
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect();
                let m = CMatrix::from_row_slice(dim, dim, &entries);
                Gate::custom(targets, m).map_err(|e| err(e.to_string()))?
            }
            other => return Err(err(format!("unknown gate `{other}`"))),
        };
        gates.push(gate);
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `qubits <n>` header".into(),
    })?;
    QuantumCircuit::new(n, gates, label)
}

/// Same circuit with `X` on the output qubit folded into the last gate.
pub fn complement_circuit(c: &QuantumCircuit) -> Result<QuantumCircuit> {
    let mut gates = c.gates.clone();
    let last = gates.pop().ok_or(Error::EmptyCircuit)?;
    gates.push(last.then_x(0)?);
    QuantumCircuit::new(c.n, gates, format!("complement({})", c.label))
}

/// Probability that the output qubit reads 0 after running `c` on `|0^n>`.
pub fn acceptance_probability(c: &QuantumCircuit) -> Result<f64> {
    let mut psi = StateVector::zero(c.n)?;
    for g in &c.gates {
        psi.apply_gate_in_place(g, 0)?;
    }
    Ok(psi.probability_zero(0).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Yes,
    No,
    PromiseViolating,
}

impl Membership {
    pub fn flipped(self) -> Membership {
        match self {
            Membership::Yes => Membership::No,
            Membership::No => Membership::Yes,
            Membership::PromiseViolating => Membership::PromiseViolating,
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Yes => "yes",
            Membership::No => "no",
            Membership::PromiseViolating => "promise_violating",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub circuit: QuantumCircuit,
    pub membership: Membership,
    /// Error exponent `r`; infinite for exact instances, `None` when the promise fails.
    pub r_bound: Option<f64>,
}

impl Instance {
    pub fn name(&self) -> &str {
        self.circuit.label()
    }

    /// Classifies a circuit from its acceptance probability, choosing the
    /// largest integer `r >= 1` the promise admits.
    pub fn classify(circuit: QuantumCircuit) -> Result<Instance> {
        let p = acceptance_probability(&circuit)?;
        let exact = 1e-12;
        let (membership, r_bound) = if p >= 1.0 - exact {
            (Membership::Yes, Some(f64::INFINITY))
        } else if p <= exact {
            (Membership::No, Some(f64::INFINITY))
        } else {
            let tail = p.min(1.0 - p);
            let r = (-tail.log2()).floor();
            if r < 1.0 || (p - 0.5).abs() < exact {
                (Membership::PromiseViolating, None)
            } else if p > 0.5 {
                (Membership::Yes, Some(r))
            } else {
                (Membership::No, Some(r))
            }
        };
        Ok(Instance {
            circuit,
            membership,
            r_bound,
        })
    }

    /// Whether the label agrees with the computed acceptance probability.
    pub fn satisfies_promise(&self) -> Result<bool> {
        let p = acceptance_probability(&self.circuit)?;
        let tol = 1e-10;
        Ok(match (self.membership, self.r_bound) {
            (Membership::Yes, Some(r)) => p >= 1.0 - (-r).exp2() - tol,
            (Membership::No, Some(r)) => p <= (-r).exp2() + tol,
            (Membership::PromiseViolating, None) => true,
            _ => false,
        })
    }

    /// The complement circuit with the opposite label.
    pub fn complement(&self, label: &str) -> Result<Instance> {
        Ok(Instance {
            circuit: complement_circuit(&self.circuit)?.with_label(label),
            membership: self.membership.flipped(),
            r_bound: self.r_bound,
        })
    }
}

fn ry(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[cr(c), cr(-s), cr(s), cr(c)])
}

/// The built-in desk-scale instances.
pub fn builtin_instances() -> Vec<Instance> {
    let build = || -> Result<Vec<Instance>> {
        let exact = Some(f64::INFINITY);
        let const0 = Instance {
            circuit: QuantumCircuit::new(
                2,
                vec![Gate::custom(vec![0], CMatrix::identity(2, 2))?],
                "const0",
            )?,
            membership: Membership::Yes,
            r_bound: exact,
        };
        let const1 = Instance {
            circuit: QuantumCircuit::new(2, vec![Gate::x(0)], "const1")?,
            membership: Membership::No,
            r_bound: exact,
        };
        let ent0 = Instance {
            circuit: QuantumCircuit::new(
                2,
                vec![Gate::h(1), Gate::cnot(1, 0), Gate::cnot(1, 0)],
                "ent0",
            )?,
            membership: Membership::Yes,
            r_bound: exact,
        };
        let ent1 = ent0.complement("ent1")?;
        let cascade1 = Instance {
            circuit: QuantumCircuit::new(
                3,
                vec![Gate::x(2), Gate::cnot(2, 1), Gate::cnot(1, 0)],
                "cascade1",
            )?,
            membership: Membership::No,
            r_bound: exact,
        };
        let cascade0 = cascade1.complement("cascade0")?;
        // sin^2(theta/2) = 1/32 leaves p_acc = 31/32 >= 1 - 2^-4
        let theta = 2.0 * (1.0f64 / 32.0).sqrt().asin();
        let tilt0 = Instance {
            circuit: QuantumCircuit::new(2, vec![Gate::custom(vec![0], ry(theta))?], "tilt0")?,
            membership: Membership::Yes,
            r_bound: Some(4.0),
        };
        let tilt1 = tilt0.complement("tilt1")?;
        let coin = Instance {
            circuit: QuantumCircuit::new(2, vec![Gate::h(0)], "coin")?,
            membership: Membership::PromiseViolating,
            r_bound: None,
        };
        let bell = Instance {
            circuit: QuantumCircuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)], "bell")?,
            membership: Membership::PromiseViolating,
            r_bound: None,
        };
        Ok(vec![
            const0, const1, ent0, ent1, cascade0, cascade1, tilt0, tilt1, coin, bell,
        ])
    };
    build().expect("built-in catalog is well formed")
}

pub fn find_instance(name: &str) -> Result<Instance> {
    builtin_instances()
        .into_iter()
        .find(|i| i.name() == name)
        .ok_or_else(|| Error::UnknownInstance(name.to_string()))
}
