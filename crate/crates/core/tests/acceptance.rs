//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;

use vbqc_core::energy_test::{run_energy_test_with, TermSampler};
use vbqc_core::hamiltonian::TermTag;
use vbqc_core::stats::Proportion;
use vbqc_core::{
    build_clock_hamiltonian, build_history_state, builtin_instances, compute_thresholds, estimate_statistics,
    extract_output, find_instance, ground_energy, run_prefixes, run_protocol, BobStrategy, ClockLayout, Extraction,
    HamiltonianVariant, HistoryVariant, LocalHamiltonian, Membership, PauliAxis, RngStream, StateVector,
};

const U: f64 = 3.0;
const TRIALS: u64 = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn pauli(axis: PauliAxis) -> DMatrix<Complex64> {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::i());
    match axis {
        PauliAxis::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        PauliAxis::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        PauliAxis::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        PauliAxis::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// `<psi|H|psi>` from an explicit Kronecker product per term (qubit 0 least significant).
fn kron_energy(psi: &StateVector, h: &LocalHamiltonian) -> f64 {
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let mut total = 0.0;
    for t in h.terms() {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for &axis in t.axes().iter().rev() {
            m = m.kronecker(&pauli(axis));
        }
        total += t.coeff() * (v.adjoint() * m * &v)[(0, 0)].re;
    }
    total
}

/// Probability that qubit 0 of the final circuit state reads 0.
fn accept_oracle(c: &vbqc_core::QuantumCircuit) -> f64 {
    let last = run_prefixes(c).unwrap().pop().unwrap();
    last.amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & 1 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

fn history_energy_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for inst in builtin_instances() {
        let c = &inst.circuit;
        let steps = c.depth() as f64;
        let p = accept_oracle(c);
        let h0 = build_clock_hamiltonian(c, HamiltonianVariant::H0).unwrap();
        let h1 = build_clock_hamiltonian(c, HamiltonianVariant::H1).unwrap();
        let psi0 = build_history_state(c, HistoryVariant::Psi0).unwrap();
        let psi1 = build_history_state(c, HistoryVariant::Psi1).unwrap();
        worst = worst.max((kron_energy(&psi0, &h0) - (1.0 - p) / (steps + 1.0)).abs());
        worst = worst.max((kron_energy(&psi1, &h1) - p / (steps + 1.0)).abs());
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:.2e} over {} instances", builtin_instances().len()))
}

fn annihilation() -> Outcome {
    let mut worst: f64 = 0.0;
    for inst in builtin_instances() {
        let h0 = build_clock_hamiltonian(&inst.circuit, HamiltonianVariant::H0).unwrap();
        let psi0 = build_history_state(&inst.circuit, HistoryVariant::Psi0).unwrap();
        let e: f64 = [TermTag::Input, TermTag::Clock, TermTag::Propagation]
            .into_iter()
            .map(|tag| h0.part_energy(&psi0, tag).unwrap())
            .sum();
        worst = worst.max(e.abs());
    }
    outcome(worst <= 1e-9, format!("max |<H_in+H_clock+H_prop>| {worst:.2e}"))
}

fn pass_probability_formula() -> Outcome {
    let n = 100_000u64;
    let hist = |name: &str, v: HistoryVariant| {
        let inst = find_instance(name).unwrap();
        build_history_state(&inst.circuit, v).unwrap()
    };
    let ham = |name: &str, v: HamiltonianVariant| {
        let inst = find_instance(name).unwrap();
        build_clock_hamiltonian(&inst.circuit, v).unwrap()
    };
    let mut mixed = RngStream::from_seed(99);
    let random_basis = StateVector::basis(6, rand::Rng::gen_range(&mut mixed, 0..64)).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus_minus = StateVector::product(&[
        [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
    ])
    .unwrap();
    let pairs = vec![
        ("const1 psi0/H0", hist("const1", HistoryVariant::Psi0), ham("const1", HamiltonianVariant::H0)),
        ("tilt0 psi0/H0", hist("tilt0", HistoryVariant::Psi0), ham("tilt0", HamiltonianVariant::H0)),
        ("ent0 psi0/H0", hist("ent0", HistoryVariant::Psi0), ham("ent0", HamiltonianVariant::H0)),
        ("const0 swapped psi1/H0", hist("const0", HistoryVariant::Psi1), ham("const0", HamiltonianVariant::H0)),
        ("const1 |000>/H1", StateVector::zero(3).unwrap(), ham("const1", HamiltonianVariant::H1)),
        ("coin product/H0", plus_minus, ham("coin", HamiltonianVariant::H0)),
        ("cascade1 basis/H1", random_basis, ham("cascade1", HamiltonianVariant::H1)),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for (i, (label, psi, h)) in pairs.into_iter().enumerate() {
        let started = Instant::now();
        let p = 0.5 - kron_energy(&psi, &h) / (2.0 * h.sum_abs());
        let sampler = TermSampler::new(&h).unwrap();
        let mut rng = RngStream::from_seed(1000 + i as u64);
        let passes = (0..n)
            .filter(|_| run_energy_test_with(psi.clone(), &h, &sampler, &mut rng).unwrap().passed)
            .count();
        let freq = passes as f64 / n as f64;
        let tol = 5.0 * (p * (1.0 - p) / n as f64).sqrt();
        let ok = (freq - p).abs() <= tol && started.elapsed() < Duration::from_secs(30);
        pass &= ok;
        if !ok {
            details.push(format!("{label}: freq {freq:.5} vs {p:.5} (tol {tol:.5})"));
        }
    }
    if pass {
        details.push("7 pairs, N = 1e5 each".into());
    }
    outcome(pass, details.join("; "))
}

fn completeness() -> Outcome {
    let floor = (1.0 - (-U).exp()).powi(2);
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["const0", "const1"] {
        let inst = find_instance(name).unwrap();
        let s = estimate_statistics(&inst, U, &BobStrategy::Honest, TRIALS, 4).unwrap();
        let correct = match inst.membership {
            Membership::Yes => s.in_l,
            _ => s.not_in_l,
        };
        let ok = correct.freq >= floor - correct.half_width();
        pass &= ok;
        details.push(format!(
            "{name} correct {:.3} [{:.3}, {:.3}]",
            correct.freq, correct.lower, correct.upper
        ));
    }
    outcome(pass, format!("floor {floor:.4}; {}", details.join(", ")))
}

fn soundness() -> Outcome {
    let ceiling = (-U).exp();
    let mut worst: Option<(String, Proportion)> = None;
    let mut pass = true;
    for name in ["const0", "const1"] {
        let inst = find_instance(name).unwrap();
        for strategy in BobStrategy::adversaries() {
            let s = estimate_statistics(&inst, U, &strategy, TRIALS, 5).unwrap();
            let wrong = s.wrong_membership.unwrap();
            pass &= wrong.freq <= ceiling + wrong.half_width();
            if worst.as_ref().is_none_or(|(_, w)| wrong.freq > w.freq) {
                worst = Some((format!("{name}/{strategy}"), wrong));
            }
        }
    }
    let (label, w) = worst.unwrap();
    outcome(
        pass,
        format!("ceiling {ceiling:.4}; worst {label} wrong {:.3} (+{:.3})", w.freq, w.half_width()),
    )
}

fn ground_energy_gap() -> Outcome {
    let inst = find_instance("const1").unwrap();
    let h0 = build_clock_hamiltonian(&inst.circuit, HamiltonianVariant::H0).unwrap();
    let h1 = build_clock_hamiltonian(&inst.circuit, HamiltonianVariant::H1).unwrap();
    let e0 = ground_energy(&h0).unwrap();
    let (t0, _) = compute_thresholds(&h0, &h1, &inst).unwrap();
    let catalog_ok = builtin_instances().iter().all(|i| {
        let a = build_clock_hamiltonian(&i.circuit, HamiltonianVariant::H0).unwrap();
        let b = build_clock_hamiltonian(&i.circuit, HamiltonianVariant::H1).unwrap();
        compute_thresholds(&a, &b, i).is_ok()
    });
    outcome(
        e0 > 0.0 && e0 - t0.a >= 1e-3 && catalog_ok,
        format!("ground {e0:.6}, a {:.6}, catalog thresholds ok: {catalog_ok}", t0.a),
    )
}

fn extraction() -> Outcome {
    let inst = find_instance("bell").unwrap();
    let layout = ClockLayout::for_circuit(&inst.circuit).unwrap();
    let psi0 = build_history_state(&inst.circuit, HistoryVariant::Psi0).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = StateVector::from_amplitudes(vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
    ])
    .unwrap();
    let n = 100_000u64;
    let mut rng = RngStream::from_seed(7);
    let mut hits = 0u64;
    let mut worst_fid: f64 = 0.0;
    let mut invalid = 0u64;
    for _ in 0..n {
        match extract_output(&psi0, &layout, &mut rng).unwrap() {
            Extraction::Success(work) => {
                hits += 1;
                worst_fid = worst_fid.max((1.0 - work.fidelity(&bell)).abs());
            }
            Extraction::Failure { .. } => {}
            Extraction::InvalidClock { .. } => invalid += 1,
        }
    }
    let p = 1.0 / 3.0;
    let freq = hits as f64 / n as f64;
    let tol = 5.0 * (p * (1.0 - p) / n as f64).sqrt();
    outcome(
        (freq - p).abs() <= tol && worst_fid <= 1e-9 && invalid == 0,
        format!("success {freq:.5} vs 1/3 (tol {tol:.5}), max |1 - F| {worst_fid:.1e}"),
    )
}

fn determinism() -> Outcome {
    let mut pass = true;
    for (name, strategy) in [
        ("const0", BobStrategy::Honest),
        ("const1", BobStrategy::MaximallyMixedSample),
        ("tilt1", BobStrategy::SwapPsi),
    ] {
        let inst = find_instance(name).unwrap();
        let a = run_protocol(&inst, U, &strategy, 2024).unwrap().to_json_lines();
        let b = run_protocol(&inst, U, &strategy, 2024).unwrap().to_json_lines();
        pass &= a.as_bytes() == b.as_bytes();
    }
    let inst = find_instance("const1").unwrap();
    let s1 = estimate_statistics(&inst, U, &BobStrategy::Honest, 20, 8).unwrap();
    let s2 = estimate_statistics(&inst, U, &BobStrategy::Honest, 20, 8).unwrap();
    pass &= s1.csv_row() == s2.csv_row();
    outcome(pass, "transcripts and statistics byte-identical under a fixed seed")
}

fn main() -> ExitCode {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("history-energy identity", Duration::from_secs(1), history_energy_identity),
        ("annihilation", Duration::from_secs(1), annihilation),
        ("pass-probability formula", Duration::from_secs(7 * 30), pass_probability_formula),
        ("completeness", Duration::from_secs(2 * 300), completeness),
        ("soundness", Duration::from_secs(8 * 300), soundness),
        ("ground-energy gap", Duration::from_secs(10), ground_energy_gap),
        ("output extraction", Duration::from_secs(30), extraction),
        ("determinism", Duration::from_secs(10), determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = run();
        let elapsed = started.elapsed();
        let pass = result.pass && elapsed <= *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {} {:<26} {}  {} [{:.2?}]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
