//! The verification protocol: Bob prepares `k0` copies for `H0` and `k1`
//! copies for `H1`, Alice runs one energy test per copy, thresholds the pass
//! counts into `(xi0, xi1)` and maps that pair to a conclusion.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{builtin_instances, complement_circuit, Instance, Membership, QuantumCircuit};
use crate::energy_test::{run_energy_test_with, EnergyTestRecord, TermSampler};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_clock_hamiltonian_with, compute_thresholds, BuildOptions, HamiltonianVariant, LocalHamiltonian, Thresholds,
};
use crate::history::{build_history_state, HistoryVariant};
use crate::rng::RngStream;
use crate::stats::Proportion;
use crate::statevector::StateVector;

pub const DEFAULT_U: f64 = 3.0;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepetitionPlan {
    pub u: f64,
    pub k0: u64,
    pub k1: u64,
    pub thresholds0: Thresholds,
    pub thresholds1: Thresholds,
}

impl RepetitionPlan {
    pub fn total_tests(&self) -> u64 {
        self.k0 + self.k1
    }

    pub fn check_budget(&self, budget: u64) -> Result<()> {
        if self.total_tests() > budget {
            return Err(Error::BudgetExceeded {
                requested: self.total_tests(),
                budget,
            });
        }
        Ok(())
    }
}

/// `k = ceil(2u / gap^2)` for each battery.
pub fn plan_repetitions(th0: Thresholds, th1: Thresholds, u: f64) -> Result<RepetitionPlan> {
    if !u.is_finite() || u <= 0.0 {
        return Err(Error::InvalidArgument(format!("u must be positive, got {u}")));
    }
    let count = |th: &Thresholds, which: &str| -> Result<u64> {
        if th.gap.is_nan() || th.gap <= 0.0 {
            return Err(Error::GapCollapse {
                a: th.a,
                b: th.b,
                context: format!("{which} planning"),
            });
        }
        let k = (2.0 * u / (th.gap * th.gap)).ceil();
        if !k.is_finite() || k > u64::MAX as f64 {
            return Err(Error::BudgetExceeded {
                requested: u64::MAX,
                budget: 0,
            });
        }
        Ok((k as u64).max(1))
    };
    Ok(RepetitionPlan {
        u,
        k0: count(&th0, "H0")?,
        k1: count(&th1, "H1")?,
        thresholds0: th0,
        thresholds1: th1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum BobStrategy {
    Honest,
    /// Every copy is the given state; `None` means `|0^m>`.
    FixedState(Option<StateVector>),
    /// History states of another circuit on the same layout; `None` picks one
    /// from the catalog.
    WrongInstance(Option<QuantumCircuit>),
    /// Each copy an independent uniformly random computational basis state.
    MaximallyMixedSample,
    /// `psi1` where `psi0` is expected and vice versa.
    SwapPsi,
}

impl BobStrategy {
    pub const NAMES: [&'static str; 5] = [
        "honest",
        "fixed_state",
        "wrong_instance",
        "maximally_mixed_sample",
        "swap_psi",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BobStrategy::Honest => "honest",
            BobStrategy::FixedState(_) => "fixed_state",
            BobStrategy::WrongInstance(_) => "wrong_instance",
            BobStrategy::MaximallyMixedSample => "maximally_mixed_sample",
            BobStrategy::SwapPsi => "swap_psi",
        }
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, BobStrategy::Honest)
    }

    /// Every strategy other than `Honest`, with default settings.
    pub fn adversaries() -> Vec<BobStrategy> {
        vec![
            BobStrategy::FixedState(None),
            BobStrategy::WrongInstance(None),
            BobStrategy::MaximallyMixedSample,
            BobStrategy::SwapPsi,
        ]
    }
}

impl fmt::Display for BobStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BobStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(BobStrategy::Honest),
            "fixed_state" => Ok(BobStrategy::FixedState(None)),
            "wrong_instance" => Ok(BobStrategy::WrongInstance(None)),
            "maximally_mixed_sample" => Ok(BobStrategy::MaximallyMixedSample),
            "swap_psi" => Ok(BobStrategy::SwapPsi),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy `{other}` (expected one of {})",
                BobStrategy::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyKind {
    Psi0,
    Psi1,
}

/// One register Bob hands over, tagged with the slot it fills.
#[derive(Clone, Debug)]
pub struct PreparedCopy {
    pub kind: CopyKind,
    pub state: Arc<StateVector>,
}

fn same_gates(a: &QuantumCircuit, b: &QuantumCircuit) -> bool {
    a.num_qubits() == b.num_qubits()
        && a.depth() == b.depth()
        && a.gates().iter().zip(b.gates()).all(|(x, y)| {
            x.targets() == y.targets() && (x.matrix() - y.matrix()).iter().all(|z| z.norm() < 1e-12)
        })
}

/// A catalog circuit with the same `(n, T)` that is neither `c` nor its complement.
pub fn decoy_circuit(c: &QuantumCircuit) -> Result<QuantumCircuit> {
    let complement = complement_circuit(c)?;
    let fits = |d: &QuantumCircuit| d.num_qubits() == c.num_qubits() && d.depth() == c.depth();
    let catalog: Vec<QuantumCircuit> = builtin_instances().into_iter().map(|i| i.circuit).collect();
    catalog
        .iter()
        .find(|d| fits(d) && !same_gates(d, c) && !same_gates(d, &complement))
        .or_else(|| catalog.iter().find(|d| fits(d) && !same_gates(d, c)))
        .cloned()
        .map_or(Ok(complement), Ok)
}

/// Bob's registers: `k0` slots for `psi0` followed by `k1` slots for `psi1`.
pub fn bob_prepare(
    strategy: &BobStrategy,
    c: &QuantumCircuit,
    plan: &RepetitionPlan,
    rng: &mut RngStream,
) -> Result<Vec<PreparedCopy>> {
    let m = c.num_qubits() + c.depth();
    let slots = || {
        std::iter::repeat_n(CopyKind::Psi0, plan.k0 as usize)
            .chain(std::iter::repeat_n(CopyKind::Psi1, plan.k1 as usize))
    };
    let pair = |circuit: &QuantumCircuit| -> Result<(Arc<StateVector>, Arc<StateVector>)> {
        Ok((
            Arc::new(build_history_state(circuit, HistoryVariant::Psi0)?),
            Arc::new(build_history_state(circuit, HistoryVariant::Psi1)?),
        ))
    };
    let from_pair = |(p0, p1): (Arc<StateVector>, Arc<StateVector>)| -> Vec<PreparedCopy> {
        slots()
            .map(|kind| PreparedCopy {
                kind,
                state: match kind {
                    CopyKind::Psi0 => p0.clone(),
                    CopyKind::Psi1 => p1.clone(),
                },
            })
            .collect()
    };
    match strategy {
        BobStrategy::Honest => Ok(from_pair(pair(c)?)),
        BobStrategy::SwapPsi => {
            let (p0, p1) = pair(c)?;
            Ok(from_pair((p1, p0)))
        }
        BobStrategy::WrongInstance(other) => {
            let decoy = match other {
                Some(d) => d.clone(),
                None => decoy_circuit(c)?,
            };
            if decoy.num_qubits() + decoy.depth() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: decoy.num_qubits() + decoy.depth(),
                });
            }
            Ok(from_pair(pair(&decoy)?))
        }
        BobStrategy::FixedState(state) => {
            let s = Arc::new(match state {
                Some(s) if s.num_qubits() == m => s.clone(),
                Some(s) => {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        actual: s.num_qubits(),
                    })
                }
                None => StateVector::zero(m)?,
            });
            Ok(slots()
                .map(|kind| PreparedCopy {
                    kind,
                    state: s.clone(),
                })
                .collect())
        }
        BobStrategy::MaximallyMixedSample => {
            let dim = 1u64 << m;
            let mut cache: Vec<Option<Arc<StateVector>>> = vec![None; dim as usize];
            slots()
                .map(|kind| {
                    let idx = rng.gen_range(0..dim) as usize;
                    let state = match &cache[idx] {
                        Some(s) => s.clone(),
                        None => {
                            let s = Arc::new(StateVector::basis(m, idx)?);
                            cache[idx] = Some(s.clone());
                            s
                        }
                    };
                    Ok(PreparedCopy { kind, state })
                })
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Conclusion {
    #[serde(rename = "in_L")]
    InL,
    #[serde(rename = "not_in_L")]
    NotInL,
    #[serde(rename = "dishonest")]
    Dishonest,
}

impl Conclusion {
    pub const ALL: [Conclusion; 3] = [Conclusion::InL, Conclusion::NotInL, Conclusion::Dishonest];

    /// `(1,0)` accepts, `(0,1)` rejects, anything else flags Bob.
    pub fn from_bits(xi0: bool, xi1: bool) -> Conclusion {
        match (xi0, xi1) {
            (true, false) => Conclusion::InL,
            (false, true) => Conclusion::NotInL,
            _ => Conclusion::Dishonest,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Conclusion::InL => "in_L",
            Conclusion::NotInL => "not_in_L",
            Conclusion::Dishonest => "dishonest",
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolTranscript {
    pub records0: Vec<EnergyTestRecord>,
    pub records1: Vec<EnergyTestRecord>,
    pub eta0: u64,
    pub eta1: u64,
    pub xi0: bool,
    pub xi1: bool,
    pub conclusion: Conclusion,
}

#[derive(Serialize)]
struct RecordLine<'a> {
    battery: u8,
    copy: usize,
    #[serde(flatten)]
    record: &'a EnergyTestRecord,
}

#[derive(Serialize)]
struct SummaryLine {
    summary: bool,
    k0: usize,
    k1: usize,
    eta0: u64,
    eta1: u64,
    xi0: u8,
    xi1: u8,
    conclusion: Conclusion,
}

impl ProtocolTranscript {
    /// One JSON object per energy test, then a summary object.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (battery, records) in [(0u8, &self.records0), (1u8, &self.records1)] {
            for (copy, record) in records.iter().enumerate() {
                let line = RecordLine { battery, copy, record };
                out.push_str(&serde_json::to_string(&line).expect("record serializes"));
                out.push('\n');
            }
        }
        let summary = SummaryLine {
            summary: true,
            k0: self.records0.len(),
            k1: self.records1.len(),
            eta0: self.eta0,
            eta1: self.eta1,
            xi0: self.xi0 as u8,
            xi1: self.xi1 as u8,
            conclusion: self.conclusion,
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}

/// Decision for one battery: `eta / k >= cutoff`.
pub fn threshold_bit(eta: u64, k: u64, th: &Thresholds) -> bool {
    eta as f64 / k as f64 >= th.cutoff()
}

/// Alice's side: one energy test per copy, thresholds, and the step-5 mapping.
pub fn alice_verify(
    copies: &[PreparedCopy],
    h0: &LocalHamiltonian,
    h1: &LocalHamiltonian,
    plan: &RepetitionPlan,
    rng: &mut RngStream,
) -> Result<ProtocolTranscript> {
    let s0 = TermSampler::new(h0)?;
    let s1 = TermSampler::new(h1)?;
    alice_verify_with(copies, (h0, &s0), (h1, &s1), plan, rng)
}

fn alice_verify_with(
    copies: &[PreparedCopy],
    (h0, s0): (&LocalHamiltonian, &TermSampler),
    (h1, s1): (&LocalHamiltonian, &TermSampler),
    plan: &RepetitionPlan,
    rng: &mut RngStream,
) -> Result<ProtocolTranscript> {
    let (k0, k1) = (plan.k0 as usize, plan.k1 as usize);
    if copies.len() != k0 + k1 {
        return Err(Error::MalformedCopies(format!(
            "expected {} copies, got {}",
            k0 + k1,
            copies.len()
        )));
    }
    let mut records0 = Vec::with_capacity(k0);
    let mut records1 = Vec::with_capacity(k1);
    for (i, copy) in copies.iter().enumerate() {
        let expected = if i < k0 { CopyKind::Psi0 } else { CopyKind::Psi1 };
        if copy.kind != expected {
            return Err(Error::MalformedCopies(format!(
                "slot {i} holds {:?}, expected {:?}",
                copy.kind, expected
            )));
        }
        let (h, sampler, sink) = match expected {
            CopyKind::Psi0 => (h0, s0, &mut records0),
            CopyKind::Psi1 => (h1, s1, &mut records1),
        };
        if copy.state.num_qubits() != h.num_qubits() {
            return Err(Error::MalformedCopies(format!(
                "slot {i} has {} qubits, expected {}",
                copy.state.num_qubits(),
                h.num_qubits()
            )));
        }
        sink.push(run_energy_test_with((*copy.state).clone(), h, sampler, rng)?);
    }
    let eta0 = records0.iter().filter(|r| r.passed).count() as u64;
    let eta1 = records1.iter().filter(|r| r.passed).count() as u64;
    let xi0 = threshold_bit(eta0, plan.k0, &plan.thresholds0);
    let xi1 = threshold_bit(eta1, plan.k1, &plan.thresholds1);
    Ok(ProtocolTranscript {
        records0,
        records1,
        eta0,
        eta1,
        xi0,
        xi1,
        conclusion: Conclusion::from_bits(xi0, xi1),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolOptions {
    pub build: BuildOptions,
    /// Abort planning when `k0 + k1` exceeds this.
    pub budget: u64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            build: BuildOptions::default(),
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Everything about a protocol run that does not depend on randomness.
#[derive(Clone, Debug)]
pub struct ProtocolSetup {
    pub instance: Instance,
    pub h0: LocalHamiltonian,
    pub h1: LocalHamiltonian,
    pub plan: RepetitionPlan,
    sampler0: TermSampler,
    sampler1: TermSampler,
}

impl ProtocolSetup {
    pub fn new(inst: &Instance, u: f64, opts: ProtocolOptions) -> Result<Self> {
        let h0 = build_clock_hamiltonian_with(&inst.circuit, HamiltonianVariant::H0, opts.build)?;
        let h1 = build_clock_hamiltonian_with(&inst.circuit, HamiltonianVariant::H1, opts.build)?;
        let (th0, th1) = compute_thresholds(&h0, &h1, inst)?;
        let plan = plan_repetitions(th0, th1, u)?;
        plan.check_budget(opts.budget)?;
        Ok(ProtocolSetup {
            instance: inst.clone(),
            sampler0: TermSampler::new(&h0)?,
            sampler1: TermSampler::new(&h1)?,
            h0,
            h1,
            plan,
        })
    }

    /// One protocol run on `stream`: Bob draws from substream 0, Alice from 1.
    pub fn run_trial(&self, strategy: &BobStrategy, stream: &RngStream) -> Result<ProtocolTranscript> {
        let mut bob_rng = stream.substream(0);
        let mut alice_rng = stream.substream(1);
        let copies = bob_prepare(strategy, &self.instance.circuit, &self.plan, &mut bob_rng)?;
        alice_verify_with(
            &copies,
            (&self.h0, &self.sampler0),
            (&self.h1, &self.sampler1),
            &self.plan,
            &mut alice_rng,
        )
    }

    /// Stream for trial `index` under `seed`.
    pub fn trial_stream(seed: u64, index: u64) -> RngStream {
        RngStream::from_seed(seed).substream(index)
    }
}

/// Full protocol for one instance, deterministic in `seed`.
pub fn run_protocol(inst: &Instance, u: f64, strategy: &BobStrategy, seed: u64) -> Result<ProtocolTranscript> {
    run_protocol_with(inst, u, strategy, seed, ProtocolOptions::default())
}

pub fn run_protocol_with(
    inst: &Instance,
    u: f64,
    strategy: &BobStrategy,
    seed: u64,
    opts: ProtocolOptions,
) -> Result<ProtocolTranscript> {
    let setup = ProtocolSetup::new(inst, u, opts)?;
    setup.run_trial(strategy, &ProtocolSetup::trial_stream(seed, 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Promise-violating instance; frequencies only.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsSummary {
    pub instance: String,
    pub membership: Membership,
    pub strategy: String,
    pub u: f64,
    pub trials: u64,
    pub k0: u64,
    pub k1: u64,
    pub in_l: Proportion,
    pub not_in_l: Proportion,
    pub dishonest: Proportion,
    /// Concluding the wrong membership; `None` for promise-violating instances.
    pub wrong_membership: Option<Proportion>,
    /// Honest runs: the completeness floor `(1 - e^-u)^2`; otherwise the soundness ceiling `e^-u`.
    pub bound: f64,
    pub verdict: Verdict,
}

impl StatsSummary {
    pub fn of(&self, c: Conclusion) -> &Proportion {
        match c {
            Conclusion::InL => &self.in_l,
            Conclusion::NotInL => &self.not_in_l,
            Conclusion::Dishonest => &self.dishonest,
        }
    }

    /// Correct-membership frequency; `None` for promise-violating instances.
    pub fn correct(&self) -> Option<&Proportion> {
        match self.membership {
            Membership::Yes => Some(&self.in_l),
            Membership::No => Some(&self.not_in_l),
            Membership::PromiseViolating => None,
        }
    }

    pub const CSV_HEADER: &'static str = "# vbqc-stats v1\ninstance,membership,strategy,u,trials,k0,k1,\
in_l_freq,in_l_lo,in_l_hi,not_in_l_freq,not_in_l_lo,not_in_l_hi,\
dishonest_freq,dishonest_lo,dishonest_hi,wrong_freq,wrong_lo,wrong_hi,bound,verdict";

    pub fn csv_row(&self) -> String {
        let triple = |p: &Proportion| format!("{},{},{}", p.freq, p.lower, p.upper);
        let wrong = self
            .wrong_membership
            .as_ref()
            .map_or_else(|| ",,".to_string(), triple);
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.membership,
            self.strategy,
            self.u,
            self.trials,
            self.k0,
            self.k1,
            triple(&self.in_l),
            triple(&self.not_in_l),
            triple(&self.dishonest),
            wrong,
            self.bound,
            verdict
        )
    }
}

/// Monte-Carlo estimate of the conclusion distribution over `trials` runs.
///
/// Trial `i` uses substream `i` of `seed`, so trial 0 reproduces
/// [`run_protocol`] with the same seed.
pub fn estimate_statistics(
    inst: &Instance,
    u: f64,
    strategy: &BobStrategy,
    trials: u64,
    seed: u64,
) -> Result<StatsSummary> {
    estimate_statistics_with(inst, u, strategy, trials, seed, ProtocolOptions::default())
}

pub fn estimate_statistics_with(
    inst: &Instance,
    u: f64,
    strategy: &BobStrategy,
    trials: u64,
    seed: u64,
    opts: ProtocolOptions,
) -> Result<StatsSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let setup = ProtocolSetup::new(inst, u, opts)?;
    let conclusions = (0..trials)
        .into_par_iter()
        .map(|i| {
            setup
                .run_trial(strategy, &ProtocolSetup::trial_stream(seed, i))
                .map(|t| t.conclusion)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&setup, strategy, u, &conclusions))
}

fn summarize(setup: &ProtocolSetup, strategy: &BobStrategy, u: f64, conclusions: &[Conclusion]) -> StatsSummary {
    let trials = conclusions.len() as u64;
    let count = |c: Conclusion| conclusions.iter().filter(|&&x| x == c).count() as u64;
    let prop = |c: Conclusion| Proportion::wilson(count(c), trials);
    let membership = setup.instance.membership;
    let wrong_membership = match membership {
        Membership::Yes => Some(prop(Conclusion::NotInL)),
        Membership::No => Some(prop(Conclusion::InL)),
        Membership::PromiseViolating => None,
    };
    let completeness_floor = (1.0 - (-u).exp()).powi(2);
    let soundness_ceiling = (-u).exp();
    let (bound, verdict) = if strategy.is_honest() {
        let verdict = match membership {
            Membership::Yes | Membership::No => {
                let correct = if membership == Membership::Yes {
                    prop(Conclusion::InL)
                } else {
                    prop(Conclusion::NotInL)
                };
                if correct.freq >= completeness_floor - correct.half_width() {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            Membership::PromiseViolating => Verdict::NotApplicable,
        };
        (completeness_floor, verdict)
    } else {
        let verdict = match &wrong_membership {
            Some(w) if w.freq <= soundness_ceiling + w.half_width() => Verdict::Pass,
            Some(_) => Verdict::Fail,
            None => Verdict::NotApplicable,
        };
        (soundness_ceiling, verdict)
    };
    StatsSummary {
        instance: setup.instance.name().to_string(),
        membership,
        strategy: strategy.name().to_string(),
        u,
        trials,
        k0: setup.plan.k0,
        k1: setup.plan.k1,
        in_l: prop(Conclusion::InL),
        not_in_l: prop(Conclusion::NotInL),
        dishonest: prop(Conclusion::Dishonest),
        wrong_membership,
        bound,
        verdict,
    }
}
