//! Clock Hamiltonians `H_0`, `H_1` as merged Pauli sums, and the energy
//! thresholds derived from them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{complement_circuit, Instance, Membership, QuantumCircuit};
use crate::error::{Error, Result};
use crate::history::ClockLayout;
use crate::pauli::{decompose_operator, tensor_lsb, CMatrix, PauliAxis, PauliString, COEFF_CUTOFF};
use crate::statevector::{ground_energy, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermTag {
    Input,
    Clock,
    Propagation,
    Output,
}

impl TermTag {
    pub const ALL: [TermTag; 4] = [TermTag::Input, TermTag::Clock, TermTag::Propagation, TermTag::Output];

    pub fn name(self) -> &'static str {
        match self {
            TermTag::Input => "input",
            TermTag::Clock => "clock",
            TermTag::Propagation => "propagation",
            TermTag::Output => "output",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        TermTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for TermTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianVariant {
    H0,
    H1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    /// Keep the identity word in the sampled term list.
    pub keep_identity: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { keep_identity: true }
    }
}

/// `H = sum_S d_S S` with distinct words and nonzero weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHamiltonian {
    m: usize,
    terms: Vec<PauliString>,
    sum_abs: f64,
    term_tags: BTreeMap<TermTag, Vec<usize>>,
    parts: BTreeMap<TermTag, Vec<PauliString>>,
    identity_offset: f64,
}

fn merge(m: usize, terms: impl IntoIterator<Item = PauliString>) -> Result<Vec<PauliString>> {
    let mut acc: BTreeMap<Vec<PauliAxis>, f64> = BTreeMap::new();
    for t in terms {
        if t.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: t.len(),
            });
        }
        *acc.entry(t.axes().to_vec()).or_insert(0.0) += t.coeff();
    }
    acc.into_iter()
        .filter(|(_, c)| c.abs() >= COEFF_CUTOFF)
        .map(|(axes, c)| PauliString::new(axes, c))
        .collect()
}

impl LocalHamiltonian {
    /// Untagged Hamiltonian from arbitrary terms; duplicates are merged.
    pub fn from_terms(m: usize, terms: Vec<PauliString>) -> Result<Self> {
        Self::assemble(m, BTreeMap::new(), merge(m, terms)?, 0.0)
    }

    fn assemble(
        m: usize,
        parts: BTreeMap<TermTag, Vec<PauliString>>,
        terms: Vec<PauliString>,
        identity_offset: f64,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("Hamiltonian has no nonzero terms".into()));
        }
        let sum_abs = terms.iter().map(|t| t.coeff().abs()).sum();
        let term_tags = parts
            .iter()
            .map(|(tag, part_terms)| {
                let idx = terms
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| part_terms.iter().any(|p| p.axes() == t.axes()))
                    .map(|(i, _)| i)
                    .collect();
                (*tag, idx)
            })
            .collect();
        Ok(LocalHamiltonian {
            m,
            terms,
            sum_abs,
            term_tags,
            parts,
            identity_offset,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// `sum_S |d_S|` over the sampled terms.
    pub fn sum_abs(&self) -> f64 {
        self.sum_abs
    }

    pub fn term_tags(&self) -> &BTreeMap<TermTag, Vec<usize>> {
        &self.term_tags
    }

    /// Coefficient of the identity word removed from the term list (0 when kept).
    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    /// Terms of one structural part before merging across parts.
    pub fn part(&self, tag: TermTag) -> &[PauliString] {
        self.parts.get(&tag).map_or(&[], |v| v.as_slice())
    }

    /// `<psi| H_part |psi>`.
    pub fn part_energy(&self, psi: &StateVector, tag: TermTag) -> Result<f64> {
        psi.energy_of_terms(self.part(tag))
    }

    /// Tags whose expansion contributes to word `index`.
    pub fn tags_of(&self, index: usize) -> Vec<TermTag> {
        self.term_tags
            .iter()
            .filter(|(_, idx)| idx.contains(&index))
            .map(|(t, _)| *t)
            .collect()
    }

    /// JSON list of `{word, coeff, tag}`; `tag` joins contributing parts with `+`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<HamiltonianRow> = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| HamiltonianRow {
                word: t.word(),
                coeff: t.coeff(),
                tag: self
                    .tags_of(i)
                    .iter()
                    .map(|t| t.name())
                    .collect::<Vec<_>>()
                    .join("+"),
            })
            .collect();
        serde_json::to_value(rows).expect("rows serialize")
    }

    /// Parses the JSON produced by [`LocalHamiltonian::to_json`].
    ///
    /// Tags only annotate rows; per-part energies are not recoverable from the export.
    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<HamiltonianRow> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let m = rows.first().map(|r| r.word.chars().count()).unwrap_or(0);
        let mut terms = Vec::with_capacity(rows.len());
        let mut tagged: BTreeMap<TermTag, Vec<PauliString>> = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            let t = PauliString::from_word(&row.word, row.coeff).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if t.len() != m {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("word length {} differs from {m}", t.len()),
                });
            }
            if !row.tag.is_empty() {
                for name in row.tag.split('+') {
                    let tag = TermTag::from_name(name).ok_or_else(|| Error::Parse {
                        line: i + 1,
                        msg: format!("unknown tag `{name}`"),
                    })?;
                    tagged.entry(tag).or_default().push(t.clone());
                }
            }
            terms.push(t);
        }
        Self::assemble(m, tagged, merge(m, terms)?, 0.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct HamiltonianRow {
    word: String,
    coeff: f64,
    #[serde(default)]
    tag: String,
}

fn projector(bit: usize) -> CMatrix {
    let mut p = CMatrix::zeros(2, 2);
    p[(bit, bit)] = Complex64::new(1.0, 0.0);
    p
}

fn outer(dim: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(row, col)] = Complex64::new(1.0, 0.0);
    m
}

/// Local clock support and the local indices of times `t-1` and `t`.
fn transition_support(layout: &ClockLayout, t: usize) -> (Vec<usize>, usize, usize) {
    let steps = layout.steps;
    if steps == 1 {
        (vec![layout.clock_qubit(1)], 0, 1)
    } else if t == 1 {
        // (c_1, c_2): 00 -> 10
        (vec![layout.clock_qubit(1), layout.clock_qubit(2)], 0b00, 0b01)
    } else if t == steps {
        // (c_{T-1}, c_T): 10 -> 11
        (
            vec![layout.clock_qubit(steps - 1), layout.clock_qubit(steps)],
            0b01,
            0b11,
        )
    } else {
        // (c_{t-1}, c_t, c_{t+1}): 100 -> 110
        (
            vec![
                layout.clock_qubit(t - 1),
                layout.clock_qubit(t),
                layout.clock_qubit(t + 1),
            ],
            0b001,
            0b011,
        )
    }
}

fn clock_parts(c: &QuantumCircuit) -> Result<BTreeMap<TermTag, Vec<PauliString>>> {
    let layout = ClockLayout::for_circuit(c)?;
    let m = layout.num_qubits();
    let steps = layout.steps;
    let mut parts: BTreeMap<TermTag, Vec<PauliString>> = BTreeMap::new();

    let input_op = tensor_lsb(&[projector(1), projector(0)]);
    let mut input = Vec::new();
    for w in 0..layout.n {
        input.extend(decompose_operator(&input_op, &[w, layout.clock_qubit(1)], m)?);
    }
    parts.insert(TermTag::Input, merge(m, input)?);

    let clock_op = tensor_lsb(&[projector(0), projector(1)]);
    let mut clock = Vec::new();
    for t in 1..steps {
        clock.extend(decompose_operator(
            &clock_op,
            &[layout.clock_qubit(t), layout.clock_qubit(t + 1)],
            m,
        )?);
    }
    parts.insert(TermTag::Clock, merge(m, clock)?);

    let half = Complex64::new(0.5, 0.0);
    let mut prop = Vec::new();
    for (idx, gate) in c.gates().iter().enumerate() {
        let t = idx + 1;
        let (clock_support, prev, cur) = transition_support(&layout, t);
        let cdim = 1usize << clock_support.len();
        let u = gate.matrix();
        let id_u = CMatrix::identity(u.nrows(), u.ncols());
        let diag = outer(cdim, prev, prev) + outer(cdim, cur, cur);
        let fwd = tensor_lsb(&[u.clone(), outer(cdim, cur, prev)]);
        let op = (tensor_lsb(&[id_u, diag]) - &fwd - fwd.adjoint()) * half;
        let support: Vec<usize> = gate.targets().iter().copied().chain(clock_support).collect();
        prop.extend(decompose_operator(&op, &support, m)?);
    }
    parts.insert(TermTag::Propagation, merge(m, prop)?);

    let out_op = tensor_lsb(&[projector(1), projector(1)]);
    parts.insert(
        TermTag::Output,
        decompose_operator(&out_op, &[0, layout.clock_qubit(steps)], m)?,
    );
    Ok(parts)
}

/// `H_in + H_clock + H_prop + H_out` for `c` (H0) or its complement (H1).
pub fn build_clock_hamiltonian(c: &QuantumCircuit, variant: HamiltonianVariant) -> Result<LocalHamiltonian> {
    build_clock_hamiltonian_with(c, variant, BuildOptions::default())
}

pub fn build_clock_hamiltonian_with(
    c: &QuantumCircuit,
    variant: HamiltonianVariant,
    opts: BuildOptions,
) -> Result<LocalHamiltonian> {
    let parts = match variant {
        HamiltonianVariant::H0 => clock_parts(c)?,
        HamiltonianVariant::H1 => clock_parts(&complement_circuit(c)?)?,
    };
    let m = c.num_qubits() + c.depth();
    let mut terms = merge(m, parts.values().flatten().cloned())?;
    let mut offset = 0.0;
    if !opts.keep_identity {
        if let Some(pos) = terms.iter().position(|t| t.is_identity()) {
            offset = terms.remove(pos).coeff();
        }
    }
    LocalHamiltonian::assemble(m, parts, terms, offset)
}

/// Energy thresholds for one Hamiltonian and the pass probabilities they induce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub a: f64,
    pub b: f64,
    pub sum_abs: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gap: f64,
}

impl Thresholds {
    pub fn new(a: f64, b: f64, sum_abs: f64) -> Self {
        let (alpha, beta) = alpha_beta(a, b, sum_abs);
        Thresholds {
            a,
            b,
            sum_abs,
            alpha,
            beta,
            gap: (b - a) / (2.0 * sum_abs),
        }
    }

    /// Pass-fraction cutoff `(alpha + beta) / 2`.
    pub fn cutoff(&self) -> f64 {
        (self.alpha + self.beta) / 2.0
    }
}

/// `alpha = 1/2 - a / (2 sum|d_S|)`, `beta = 1/2 - b / (2 sum|d_S|)`.
pub fn alpha_beta(a: f64, b: f64, sum_abs: f64) -> (f64, f64) {
    let denom = 2.0 * sum_abs;
    (0.5 - a / denom, 0.5 - b / denom)
}

/// Thresholds for `H0` and `H1` of `inst`.
///
/// `a` and `a'` are the worst history energies the promise allows,
/// `2^-r / (T+1)`. `b` and `b'` are the ground energy of whichever of the
/// pair `(H0, H1)` belongs to the rejecting side: `H1` for a yes-instance,
/// `H0` for a no-instance. That Hamiltonian is also `H0` of the opposite
/// twin, since `H1(c) = H0(complement(c))`. Promise-violating instances use
/// `a = a' = 0` and each Hamiltonian's own ground energy.
pub fn compute_thresholds(
    h0: &LocalHamiltonian,
    h1: &LocalHamiltonian,
    inst: &Instance,
) -> Result<(Thresholds, Thresholds)> {
    let steps = inst.circuit.depth() as f64;
    let history_bound = match inst.r_bound {
        Some(r) => (-r).exp2() / (steps + 1.0),
        None => 0.0,
    };
    // ground energies including any dropped identity weight
    let full_ground = |h: &LocalHamiltonian| -> Result<f64> { Ok(ground_energy(h)? + h.identity_offset()) };
    let (b0_full, b1_full) = match inst.membership {
        Membership::Yes => {
            let b = full_ground(h1)?;
            (b, b)
        }
        Membership::No => {
            let b = full_ground(h0)?;
            (b, b)
        }
        Membership::PromiseViolating => (full_ground(h0)?, full_ground(h1)?),
    };
    let side = |h: &LocalHamiltonian, b_full: f64, which: &str| -> Result<Thresholds> {
        let a = history_bound - h.identity_offset();
        let b = b_full - h.identity_offset();
        if (b - a).is_nan() || b - a <= 1e-9 {
            return Err(Error::GapCollapse {
                a,
                b,
                context: format!("{} of instance `{}`", which, inst.name()),
            });
        }
        Ok(Thresholds::new(a, b, h.sum_abs()))
    };
    Ok((side(h0, b0_full, "H0")?, side(h1, b1_full, "H1")?))
}
