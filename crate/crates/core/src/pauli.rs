//! Weighted Pauli words and the decomposition of small local operators into them.
//!
//! Qubit `j` of a word is character `j` of its text form, and in every local
//! matrix the `j`-th qubit of the support is bit `j` of the row/column index
//! (least significant first).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Coefficients below this magnitude are dropped after decomposition.
pub const COEFF_CUTOFF: f64 = 1e-12;

/// Largest support accepted by [`decompose_operator`].
pub const MAX_DECOMPOSE_QUBITS: usize = 5;

/// Largest support accepted by [`string_to_matrix`].
pub const MAX_RESTRICT_QUBITS: usize = 8;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn as_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }

    /// The 2x2 matrix of this axis.
    pub fn matrix(self) -> CMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            PauliAxis::I => [l, o, o, l],
            PauliAxis::X => [o, l, l, o],
            PauliAxis::Y => [o, -i, i, o],
            PauliAxis::Z => [l, o, o, -l],
        };
        CMatrix::from_row_slice(2, 2, &entries)
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A tensor product of single-qubit Pauli operators with a real weight.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    axes: Vec<PauliAxis>,
    coeff: f64,
}

impl PauliString {
    pub fn new(axes: Vec<PauliAxis>, coeff: f64) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::NonFiniteCoefficient(coeff));
        }
        if axes.len() > 64 {
            return Err(Error::Resource {
                qubits: axes.len(),
                limit: 64,
                hint: "",
            });
        }
        Ok(PauliString { axes, coeff })
    }

    pub fn identity(m: usize, coeff: f64) -> Result<Self> {
        Self::new(vec![PauliAxis::I; m], coeff)
    }

    /// Parses a bare word such as `IXZY`.
    pub fn from_word(word: &str, coeff: f64) -> Result<Self> {
        let axes = word
            .chars()
            .enumerate()
            .map(|(pos, c)| {
                PauliAxis::from_char(c).ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("invalid Pauli axis `{c}` at position {pos}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes, coeff)
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.axes
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn word(&self) -> String {
        self.axes.iter().map(|a| a.as_char()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&a| a == PauliAxis::I)
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != PauliAxis::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.axes.iter().filter(|&&a| a != PauliAxis::I).count()
    }

    /// Bit flips: qubits with an X or Y factor.
    pub fn flip_mask(&self) -> u64 {
        self.mask(|a| matches!(a, PauliAxis::X | PauliAxis::Y))
    }

    /// Sign flips: qubits with a Z or Y factor.
    pub fn phase_mask(&self) -> u64 {
        self.mask(|a| matches!(a, PauliAxis::Z | PauliAxis::Y))
    }

    fn mask(&self, pred: impl Fn(PauliAxis) -> bool) -> u64 {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &a)| pred(a))
            .fold(0u64, |m, (q, _)| m | (1u64 << q))
    }

    pub fn y_count(&self) -> usize {
        self.axes.iter().filter(|&&a| a == PauliAxis::Y).count()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}", self.coeff, self.word())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `coeff * WORD`, e.g. `-0.25 * IZZI`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |msg: String| Error::Parse { line: 1, msg };
        let (lhs, rhs) = s
            .split_once('*')
            .ok_or_else(|| parse_err(format!("expected `coeff * WORD`, got `{s}`")))?;
        let coeff: f64 = lhs
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad coefficient `{}`: {e}", lhs.trim())))?;
        PauliString::from_word(rhs.trim(), coeff)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Phase of a Pauli word acting on a basis state: `S|i> = phase(i) |i ^ flip>`.
#[inline]
pub(crate) fn basis_phase(index: u64, phase_mask: u64, y_count: usize) -> Complex64 {
    // Y = i X Z, so each Y contributes a factor i on top of the Z sign.
    let sign = if (index & phase_mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let i_pow = match y_count % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    i_pow * sign
}

/// Kronecker product with `factors[j]` acting on local qubit `j` (bit `j`).
pub fn tensor_lsb(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| f.kronecker(&acc))
}

fn check_support(support: &[usize], m: usize) -> Result<()> {
    for (j, &q) in support.iter().enumerate() {
        if q >= m {
            return Err(Error::QubitOutOfRange { index: q, size: m });
        }
        if support[..j].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_deviation(op: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..op.nrows() {
        for c in r..op.ncols() {
            worst = worst.max((op[(r, c)] - op[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Expands a Hermitian operator on `support` into Pauli words over an
/// `m`-qubit register using `d_S = Tr(S M) / 2^k`.
pub fn decompose_operator(op: &CMatrix, support: &[usize], m: usize) -> Result<Vec<PauliString>> {
    let k = support.len();
    if k > MAX_DECOMPOSE_QUBITS {
        return Err(Error::Resource {
            qubits: k,
            limit: MAX_DECOMPOSE_QUBITS,
            hint: " for local decomposition",
        });
    }
    check_support(support, m)?;
    let dim = 1usize << k;
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: op.nrows().max(op.ncols()),
        });
    }
    let scale = op.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let deviation = hermitian_deviation(op);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }

    let mut out = Vec::new();
    let mut local = vec![PauliAxis::I; k];
    for code in 0..(1usize << (2 * k)) {
        for (j, axis) in local.iter_mut().enumerate() {
            *axis = PauliAxis::ALL[(code >> (2 * j)) & 3];
        }
        let word = PauliString::new(local.clone(), 1.0)?;
        let flip = word.flip_mask() as usize;
        let zmask = word.phase_mask();
        let ny = word.y_count();
        // Tr(S M) = sum_j <j^flip| S |j> M[j, j^flip]
        let trace: Complex64 = (0..dim)
            .map(|j| basis_phase(j as u64, zmask, ny) * op[(j, j ^ flip)])
            .sum();
        let d = trace / dim as f64;
        if d.re.abs() < COEFF_CUTOFF {
            continue;
        }
        let mut axes = vec![PauliAxis::I; m];
        for (j, &q) in support.iter().enumerate() {
            axes[q] = local[j];
        }
        out.push(PauliString::new(axes, d.re)?);
    }
    Ok(out)
}

/// Dense matrix of `coeff * S` restricted to the listed qubits.
pub fn string_to_matrix(s: &PauliString, restrict_to: &[usize]) -> Result<CMatrix> {
    if restrict_to.len() > MAX_RESTRICT_QUBITS {
        return Err(Error::Resource {
            qubits: restrict_to.len(),
            limit: MAX_RESTRICT_QUBITS,
            hint: " for dense restriction",
        });
    }
    check_support(restrict_to, s.len())?;
    for q in s.support() {
        if !restrict_to.contains(&q) {
            return Err(Error::OutsideSupport {
                qubit: q,
                axis: s.axes[q].as_char(),
            });
        }
    }
    let factors: Vec<CMatrix> = restrict_to.iter().map(|&q| s.axes[q].matrix()).collect();
    Ok(tensor_lsb(&factors) * Complex64::new(s.coeff, 0.0))
}
