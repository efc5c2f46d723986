//! Dense statevector simulation.
//!
//! Qubit 0 is the least significant bit of the amplitude index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, QuantumCircuit};
use crate::error::{Error, Result};
use crate::hamiltonian::LocalHamiltonian;
use crate::pauli::{basis_phase, CMatrix, PauliAxis, PauliString};
use crate::rng::RngStream;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 16;

/// Largest register [`ground_energy`] will handle.
pub const MAX_GROUND_QUBITS: usize = 14;

/// Above this size [`ground_energy`] switches from dense diagonalization to Lanczos.
pub const DENSE_GROUND_QUBITS: usize = 10;

const NORM_TOL: f64 = 1e-9;
const BRANCH_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    m: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub qubit: usize,
    pub axis: PauliAxis,
    pub value: i8,
}

fn check_size(m: usize) -> Result<()> {
    if m > MAX_QUBITS {
        return Err(Error::Resource {
            qubits: m,
            limit: MAX_QUBITS,
            hint: "",
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>` on `m` qubits.
    pub fn zero(m: usize) -> Result<Self> {
        Self::basis(m, 0)
    }

    pub fn basis(m: usize, index: usize) -> Result<Self> {
        check_size(m)?;
        let dim = 1usize << m;
        if index >= dim {
            return Err(Error::QubitOutOfRange {
                index,
                size: dim,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { m, amps })
    }

    /// Wraps amplitudes that are already unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(1),
                actual: dim,
            });
        }
        let m = dim.trailing_zeros() as usize;
        check_size(m)?;
        let psi = StateVector { m, amps };
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm is {norm}, expected 1")));
        }
        Ok(psi)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    /// Product state with `qubits[j]` the `(|0>, |1>)` amplitudes of qubit `j`.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        check_size(qubits.len())?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for q in qubits {
            let mut next = Vec::with_capacity(amps.len() * 2);
            next.extend(amps.iter().map(|a| a * q[0]));
            next.extend(amps.iter().map(|a| a * q[1]));
            amps = next;
        }
        Self::normalized(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `self` on the low qubits, `high` on the qubits above them.
    pub fn tensor(&self, high: &StateVector) -> Result<StateVector> {
        check_size(self.m + high.m)?;
        let mut amps = Vec::with_capacity(self.amps.len() * high.amps.len());
        for h in &high.amps {
            amps.extend(self.amps.iter().map(|l| l * h));
        }
        Ok(StateVector {
            m: self.m + high.m,
            amps,
        })
    }

    /// Probability that qubit `q` reads 0 in the computational basis.
    pub fn probability_zero(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply_gate(&self, g: &Gate, offset: usize) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_in_place(g, offset)?;
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, g: &Gate, offset: usize) -> Result<()> {
        let qubits: Vec<usize> = g.targets().iter().map(|&q| q + offset).collect();
        self.apply_matrix(g.matrix(), &qubits)
    }

    /// Applies a `2^k x 2^k` matrix with local bit `j` on `qubits[j]`.
    pub fn apply_matrix(&mut self, u: &CMatrix, qubits: &[usize]) -> Result<()> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.m) {
            return Err(Error::QubitOutOfRange { index: q, size: self.m });
        }
        let k = qubits.len();
        let dim = 1usize << k;
        if u.nrows() != dim || u.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: u.nrows(),
            });
        }
        let target_mask: usize = qubits.iter().fold(0, |m, &q| m | (1 << q));
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                qubits
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| local >> j & 1 == 1)
                    .fold(0, |acc, (_, &q)| acc | (1 << q))
            })
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (slot, &off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, b) in buf.iter().enumerate() {
                    acc += u[(r, c)] * b;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// `<psi| P_j |psi>` for a single-qubit Pauli.
    fn single_pauli_expectation(&self, j: usize, axis: PauliAxis) -> f64 {
        let bit = 1usize << j;
        let mut acc = 0.0;
        for i0 in (0..self.amps.len()).filter(|i| i & bit == 0) {
            let (a0, a1) = (self.amps[i0], self.amps[i0 | bit]);
            acc += match axis {
                PauliAxis::I => a0.norm_sqr() + a1.norm_sqr(),
                PauliAxis::Z => a0.norm_sqr() - a1.norm_sqr(),
                // <a|X|a> = 2 Re(a0* a1), <a|Y|a> = 2 Im(a0* a1)
                PauliAxis::X => 2.0 * (a0.conj() * a1).re,
                PauliAxis::Y => 2.0 * (a0.conj() * a1).im,
            };
        }
        acc
    }

    /// Projective measurement of qubit `j` in the eigenbasis of `axis`, in place.
    pub fn measure_in_place(
        &mut self,
        j: usize,
        axis: PauliAxis,
        rng: &mut RngStream,
    ) -> Result<MeasurementOutcome> {
        if j >= self.m {
            return Err(Error::QubitOutOfRange { index: j, size: self.m });
        }
        if axis == PauliAxis::I {
            return Ok(MeasurementOutcome {
                qubit: j,
                axis,
                value: 1,
            });
        }
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        let ev = self.single_pauli_expectation(j, axis);
        let p_plus = ((total + ev) / 2.0).max(0.0);
        let p_minus = ((total - ev) / 2.0).max(0.0);
        if p_plus < BRANCH_FLOOR && p_minus < BRANCH_FLOOR {
            return Err(Error::Integrity { p_plus, p_minus });
        }
        let u = rng.uniform() * (p_plus + p_minus);
        let (sign, p) = if u < p_plus { (1.0, p_plus) } else { (-1.0, p_minus) };
        // project with (I + sign P)/2 and renormalize
        let scale = 1.0 / (2.0 * p.sqrt());
        let bit = 1usize << j;
        let i = Complex64::i();
        for i0 in 0..self.amps.len() {
            if i0 & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[i0], self.amps[i0 | bit]);
            let (p0, p1) = match axis {
                PauliAxis::X => (a1, a0),
                PauliAxis::Y => (-i * a1, i * a0),
                PauliAxis::Z => (a0, -a1),
                PauliAxis::I => unreachable!(),
            };
            self.amps[i0] = (a0 + p0 * sign) * scale;
            self.amps[i0 | bit] = (a1 + p1 * sign) * scale;
        }
        Ok(MeasurementOutcome {
            qubit: j,
            axis,
            value: sign as i8,
        })
    }

    /// Measures a copy; `self` is left untouched.
    pub fn measure_qubit_pauli(
        &self,
        j: usize,
        axis: PauliAxis,
        rng: &mut RngStream,
    ) -> Result<(MeasurementOutcome, StateVector)> {
        let mut post = self.clone();
        let outcome = post.measure_in_place(j, axis, rng)?;
        Ok((outcome, post))
    }

    /// `<psi| S |psi>` without the coefficient of `s`.
    pub fn pauli_expectation(&self, s: &PauliString) -> Result<Complex64> {
        if s.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: s.len(),
            });
        }
        let flip = s.flip_mask() as usize;
        let zmask = s.phase_mask();
        let ny = s.y_count();
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| self.amps[i ^ flip].conj() * basis_phase(i as u64, zmask, ny) * a)
            .sum())
    }

    /// `sum_S d_S <psi| S |psi>` over the given terms.
    pub fn energy_of_terms<'a>(&self, terms: impl IntoIterator<Item = &'a PauliString>) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in terms {
            acc += self.pauli_expectation(t)? * t.coeff();
        }
        Ok(acc.re)
    }

    /// JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.amps
                .iter()
                .map(|a| serde_json::json!([a.re, a.im]))
                .collect(),
        )
    }
}

/// `<psi| H |psi>`.
pub fn expectation(psi: &StateVector, h: &LocalHamiltonian) -> Result<f64> {
    if h.num_qubits() != psi.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: psi.num_qubits(),
            actual: h.num_qubits(),
        });
    }
    psi.energy_of_terms(h.terms())
}

/// `U_t ... U_1 |0^n>` for `t = 0..=T`.
pub fn run_prefixes(c: &QuantumCircuit) -> Result<Vec<StateVector>> {
    let mut psi = StateVector::zero(c.num_qubits())?;
    let mut out = Vec::with_capacity(c.depth() + 1);
    out.push(psi.clone());
    for g in c.gates() {
        psi.apply_gate_in_place(g, 0)?;
        out.push(psi.clone());
    }
    Ok(out)
}

/// Dense matrix of a sum of Pauli words on `m` qubits.
pub fn dense_matrix(terms: &[PauliString], m: usize) -> Result<CMatrix> {
    if m > DENSE_GROUND_QUBITS + 2 {
        return Err(Error::Resource {
            qubits: m,
            limit: DENSE_GROUND_QUBITS + 2,
            hint: " for a dense matrix",
        });
    }
    let dim = 1usize << m;
    let mut out = DMatrix::zeros(dim, dim);
    for t in terms {
        if t.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: t.len(),
            });
        }
        let flip = t.flip_mask() as usize;
        let zmask = t.phase_mask();
        let ny = t.y_count();
        for col in 0..dim {
            out[(col ^ flip, col)] += basis_phase(col as u64, zmask, ny) * t.coeff();
        }
    }
    Ok(out)
}

fn apply_terms(terms: &[PauliString], v: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
    for t in terms {
        let flip = t.flip_mask() as usize;
        let zmask = t.phase_mask();
        let ny = t.y_count();
        for (i, a) in v.iter().enumerate() {
            out[i ^ flip] += basis_phase(i as u64, zmask, ny) * t.coeff() * a;
        }
    }
}

/// Smallest eigenvalue of `H`: dense up to [`DENSE_GROUND_QUBITS`], Lanczos above.
pub fn ground_energy(h: &LocalHamiltonian) -> Result<f64> {
    let m = h.num_qubits();
    if m > MAX_GROUND_QUBITS {
        return Err(Error::Resource {
            qubits: m,
            limit: MAX_GROUND_QUBITS,
            hint: "; supply analytic thresholds for larger registers",
        });
    }
    if m <= DENSE_GROUND_QUBITS {
        dense_ground_energy(h.terms(), m)
    } else {
        lanczos_ground_energy(h.terms(), m)
    }
}

pub fn dense_ground_energy(terms: &[PauliString], m: usize) -> Result<f64> {
    let mat = dense_matrix(terms, m)?;
    let evals = mat.symmetric_eigenvalues();
    Ok(evals.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Lanczos with full reorthogonalization, matrix-free over the Pauli terms.
pub fn lanczos_ground_energy(terms: &[PauliString], m: usize) -> Result<f64> {
    check_size(m)?;
    let dim = 1usize << m;
    let max_iter = dim.min(400);
    let mut rng = RngStream::from_seed(0x006c_616e_637a_6f73);
    let start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5))
        .collect();
    let norm = start.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<Complex64>> = vec![start.into_iter().map(|a| a / norm).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut best = f64::INFINITY;

    for k in 0..max_iter {
        apply_terms(terms, &basis[k], &mut w);
        let alpha: f64 = basis[k]
            .iter()
            .zip(&w)
            .map(|(v, x)| (v.conj() * x).re)
            .sum();
        alphas.push(alpha);
        // two passes of Gram-Schmidt against the whole Krylov basis
        for _ in 0..2 {
            for v in &basis {
                let proj: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                w.iter_mut().zip(v).for_each(|(x, a)| *x -= proj * a);
            }
        }
        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();

        let size = alphas.len();
        let tri = DMatrix::<f64>::from_fn(size, size, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = tri.symmetric_eigen();
        let (idx, &lowest) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty tridiagonal");
        best = lowest;
        let residual = beta * eig.eigenvectors[(size - 1, idx)].abs();
        if residual < 1e-11 || beta < 1e-12 {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|a| a / beta).collect());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::tensor_lsb;
    use nalgebra::DVector;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &StateVector, b: &[Complex64]) -> bool {
        a.amplitudes().iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn gate_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let one = StateVector::zero(1).unwrap().apply_gate(&Gate::x(0), 0).unwrap();
        assert!(close(&one, &[c(0.0), c(1.0)]));
        let plus = StateVector::zero(1).unwrap().apply_gate(&Gate::h(0), 0).unwrap();
        assert!(close(&plus, &[c(s), c(s)]));
        // |10> means qubit 0 = 1, qubit 1 = 0: index 1
        let psi = StateVector::basis(2, 1).unwrap().apply_gate(&Gate::cnot(0, 1), 0).unwrap();
        assert!(close(&psi, &[c(0.0), c(0.0), c(0.0), c(1.0)]));
    }

    #[test]
    fn gate_offset_and_range() {
        let psi = StateVector::zero(3).unwrap().apply_gate(&Gate::x(0), 2).unwrap();
        assert_eq!(psi.amplitudes()[4], c(1.0));
        assert!(matches!(
            StateVector::zero(2).unwrap().apply_gate(&Gate::x(1), 1),
            Err(Error::QubitOutOfRange { index: 2, size: 2 })
        ));
    }

    #[test]
    fn prefixes_of_bell_preparation() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let circ = QuantumCircuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1)], "bell").unwrap();
        let pre = run_prefixes(&circ).unwrap();
        assert_eq!(pre.len(), 3);
        assert!(close(&pre[0], &[c(1.0), c(0.0), c(0.0), c(0.0)]));
        assert!(close(&pre[1], &[c(s), c(s), c(0.0), c(0.0)]));
        assert!(close(&pre[2], &[c(s), c(0.0), c(0.0), c(s)]));
    }

    #[test]
    fn deterministic_measurements() {
        let mut rng = RngStream::from_seed(1);
        let zero = StateVector::zero(1).unwrap();
        for _ in 0..50 {
            let (o, post) = zero.measure_qubit_pauli(0, PauliAxis::Z, &mut rng).unwrap();
            assert_eq!(o.value, 1);
            assert_eq!(post, zero);
        }
        let plus = zero.apply_gate(&Gate::h(0), 0).unwrap();
        for _ in 0..50 {
            let (o, post) = plus.measure_qubit_pauli(0, PauliAxis::X, &mut rng).unwrap();
            assert_eq!(o.value, 1);
            assert!(post.fidelity(&plus) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn x_measurement_of_zero_is_fair_and_collapses() {
        let mut rng = RngStream::from_seed(2);
        let zero = StateVector::zero(1).unwrap();
        let plus = zero.apply_gate(&Gate::h(0), 0).unwrap();
        let minus = StateVector::basis(1, 1).unwrap().apply_gate(&Gate::h(0), 0).unwrap();
        let n = 100_000;
        let mut ups = 0usize;
        for _ in 0..n {
            let (o, post) = zero.measure_qubit_pauli(0, PauliAxis::X, &mut rng).unwrap();
            let target = if o.value == 1 {
                ups += 1;
                &plus
            } else {
                &minus
            };
            assert!(post.fidelity(target) > 1.0 - 1e-12);
        }
        let f = ups as f64 / n as f64;
        assert!((f - 0.5).abs() < 5.0 * (0.25 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn born_rule_frequencies_for_y_axis() {
        // Ry-like state: cos(0.3)|0> + i sin(0.3)|1>, <Y> = sin(0.6)
        let psi = StateVector::from_amplitudes(vec![c(0.3f64.cos()), Complex64::new(0.0, 0.3f64.sin())])
            .unwrap();
        let p = (1.0 + 0.6f64.sin()) / 2.0;
        let mut rng = RngStream::from_seed(3);
        let n = 100_000;
        let ups = (0..n)
            .filter(|_| psi.measure_qubit_pauli(0, PauliAxis::Y, &mut rng).unwrap().0.value == 1)
            .count();
        let f = ups as f64 / n as f64;
        assert!((f - p).abs() < 5.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
    }

    #[test]
    fn repeated_measurement_is_idempotent() {
        let mut rng = RngStream::from_seed(4);
        let circ = QuantumCircuit::new(2, vec![Gate::h(0), Gate::cnot(0, 1), Gate::t(1)], "x").unwrap();
        let psi = run_prefixes(&circ).unwrap().pop().unwrap();
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            for _ in 0..200 {
                let (first, post) = psi.measure_qubit_pauli(1, axis, &mut rng).unwrap();
                let (second, _) = post.measure_qubit_pauli(1, axis, &mut rng).unwrap();
                assert_eq!(first.value, second.value);
                assert!((post.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn corrupted_state_reports_integrity_error() {
        let mut psi = StateVector::zero(1).unwrap();
        psi.amps[0] = c(0.0);
        let mut rng = RngStream::from_seed(5);
        assert!(matches!(
            psi.measure_qubit_pauli(0, PauliAxis::Z, &mut rng),
            Err(Error::Integrity { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let z = LocalHamiltonian::from_terms(1, vec![PauliString::from_word("Z", 1.0).unwrap()]).unwrap();
        assert!((expectation(&StateVector::zero(1).unwrap(), &z).unwrap() - 1.0).abs() < 1e-12);
        let zz = LocalHamiltonian::from_terms(2, vec![PauliString::from_word("ZZ", 1.0).unwrap()]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        assert!((expectation(&bell, &zz).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            expectation(&StateVector::zero(1).unwrap(), &zz),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ground_energy_of_single_z() {
        let z = LocalHamiltonian::from_terms(1, vec![PauliString::from_word("Z", 1.0).unwrap()]).unwrap();
        assert!((ground_energy(&z).unwrap() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn lanczos_matches_dense() {
        // transverse-field Ising chain on 6 qubits
        let m = 6;
        let mut terms = Vec::new();
        for q in 0..m {
            let mut w = vec!['I'; m];
            w[q] = 'X';
            terms.push(PauliString::from_word(&w.iter().collect::<String>(), -0.7).unwrap());
            if q + 1 < m {
                let mut w = vec!['I'; m];
                w[q] = 'Z';
                w[q + 1] = 'Z';
                terms.push(PauliString::from_word(&w.iter().collect::<String>(), -1.0).unwrap());
            }
        }
        terms.push(PauliString::from_word("YIIIIY", 0.3).unwrap());
        let dense = dense_ground_energy(&terms, m).unwrap();
        let lanczos = lanczos_ground_energy(&terms, m).unwrap();
        assert!((dense - lanczos).abs() < 1e-8, "{dense} vs {lanczos}");
    }

    #[test]
    fn ground_energy_rejects_oversize() {
        let h = LocalHamiltonian::from_terms(15, vec![PauliString::identity(15, 1.0).unwrap()]).unwrap();
        assert!(matches!(ground_energy(&h), Err(Error::Resource { .. })));
    }

    #[test]
    fn product_and_tensor() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::product(&[[c(0.0), c(1.0)], [c(s), c(s)]]).unwrap();
        let low = StateVector::basis(1, 1).unwrap();
        let high = StateVector::from_amplitudes(vec![c(s), c(s)]).unwrap();
        assert_eq!(low.tensor(&high).unwrap(), psi);
        assert!(close(&psi, &[c(0.0), c(s), c(0.0), c(s)]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state(m: usize) -> impl Strategy<Value = StateVector> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << m).prop_filter_map(
                "nonzero",
                |v| StateVector::normalized(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).ok(),
            )
        }

        fn word(m: usize) -> impl Strategy<Value = PauliString> {
            (prop::collection::vec(0usize..4, m), -2.0f64..2.0)
                .prop_map(|(ax, c)| PauliString::new(ax.into_iter().map(|a| PauliAxis::ALL[a]).collect(), c).unwrap())
        }

        proptest! {
            #[test]
            fn gates_preserve_norm(psi in state(3), th in -3.0f64..3.0, q in 0usize..3) {
                let (s, co) = th.sin_cos();
                let u = CMatrix::from_row_slice(2, 2, &[c(co), Complex64::new(0.0, -s), Complex64::new(0.0, -s), c(co)]);
                let g = Gate::custom(vec![q], u).unwrap();
                let out = psi.apply_gate(&g, 0).unwrap();
                prop_assert!((out.norm() - 1.0).abs() < 1e-10);
                let out2 = out.apply_gate(&Gate::cnot(q, (q + 1) % 3), 0).unwrap();
                prop_assert!((out2.norm() - 1.0).abs() < 1e-10);
            }

            #[test]
            fn expectation_matches_dense_oracle(psi in state(3), terms in prop::collection::vec(word(3), 1..6)) {
                let dense = dense_matrix(&terms, 3).unwrap();
                let v = DVector::from_vec(psi.amplitudes().to_vec());
                let oracle = (v.adjoint() * &dense * &v)[(0, 0)];
                let got = psi.energy_of_terms(&terms).unwrap();
                prop_assert!((oracle.re - got).abs() < 1e-9);
                prop_assert!(oracle.im.abs() < 1e-10);
            }

            #[test]
            fn ground_energy_bounds_expectation(psi in state(3), terms in prop::collection::vec(word(3), 1..6)) {
                let h = LocalHamiltonian::from_terms(3, terms).unwrap();
                let e0 = ground_energy(&h).unwrap();
                prop_assert!(e0 <= expectation(&psi, &h).unwrap() + 1e-9);
            }

            #[test]
            fn apply_matrix_matches_kron(psi in state(3)) {
                // H on qubit 2 through apply_matrix equals the explicit Kronecker product
                let h = Gate::h(0).matrix().clone();
                let full = tensor_lsb(&[CMatrix::identity(4, 4), h.clone()]);
                let v = DVector::from_vec(psi.amplitudes().to_vec());
                let oracle = &full * v;
                let mut got = psi.clone();
                got.apply_matrix(&h, &[2]).unwrap();
                prop_assert!(got.amplitudes().iter().zip(oracle.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
            }
        }
    }
}
