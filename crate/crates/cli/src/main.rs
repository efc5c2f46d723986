use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vbqc_core::hamiltonian::{build_clock_hamiltonian_with, BuildOptions, TermTag, Thresholds};
use vbqc_core::protocol::{
    estimate_statistics_with, run_protocol_with, ProtocolOptions, StatsSummary, DEFAULT_BUDGET, DEFAULT_U,
};
use vbqc_core::{
    acceptance_probability, build_history_state, compute_thresholds, expectation, find_instance, parse_circuit,
    plan_repetitions, BobStrategy, Error, HamiltonianVariant, HistoryVariant, Instance, LocalHamiltonian,
    StateVector,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GAP_COLLAPSE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "vbqc", version, about = "Simulate verifiable delegated quantum computation via history-state energy tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hamiltonians, thresholds, repetition plan and history-state diagnostics as JSON.
    Dump(DumpArgs),
    /// One protocol run, written as a JSON-lines transcript.
    Run(RunArgs),
    /// Monte-Carlo conclusion frequencies with Wilson intervals, written as CSV.
    Stats(StatsArgs),
    /// The Pauli decomposition of one clock Hamiltonian as JSON.
    DumpHamiltonian(DumpHamiltonianArgs),
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Built-in instance name.
    #[arg(long, env = "VBQC_INSTANCE", group = "source")]
    instance: Option<String>,
    /// Circuit text file; membership is derived from its acceptance probability.
    #[arg(long, env = "VBQC_CIRCUIT", group = "source")]
    circuit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    #[command(flatten)]
    source: Source,
    /// Keep the identity word among the sampled terms.
    #[arg(long, env = "VBQC_KEEP_IDENTITY_TERM", default_value_t = true, action = clap::ArgAction::Set)]
    keep_identity_term: bool,
    /// Output file; standard output when absent.
    #[arg(long, env = "VBQC_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Confidence parameter u.
    #[arg(long, env = "VBQC_U", default_value_t = DEFAULT_U, value_parser = positive_f64)]
    u: f64,
    /// Maximum number of energy tests per protocol run.
    #[arg(long, env = "VBQC_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    plan: PlanArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    plan: PlanArgs,
    /// Bob's strategy.
    #[arg(long, env = "VBQC_STRATEGY", default_value = "honest", value_parser = parse_strategy)]
    strategy: BobStrategy,
    #[arg(long, env = "VBQC_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    plan: PlanArgs,
    /// Bob's strategy; a comma-separated list yields one row per strategy.
    #[arg(long, env = "VBQC_STRATEGY", default_value = "honest", value_delimiter = ',', value_parser = parse_strategy)]
    strategy: Vec<BobStrategy>,
    #[arg(long, env = "VBQC_TRIALS", default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, env = "VBQC_SEED")]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    H0,
    H1,
}

#[derive(Args, Debug)]
struct DumpHamiltonianArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, env = "VBQC_VARIANT", value_enum, default_value_t = VariantArg::H0)]
    variant: VariantArg,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive finite number, got {s}"))
    }
}

fn parse_strategy(s: &str) -> Result<BobStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Io(PathBuf, io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::GapCollapse { .. }) => EXIT_GAP_COLLAPSE,
            Failure::Core(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            Failure::Core(Error::UnknownInstance(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }

    fn report(&self) {
        match self {
            Failure::Core(e @ Error::GapCollapse { .. }) => eprintln!(
                "error: {e}\nthe rejecting-side ground energy does not exceed the history-state energy bound, \
                 so no number of repetitions separates the two cases"
            ),
            Failure::Core(e @ Error::BudgetExceeded { .. }) => {
                eprintln!("error: {e}\nraise --budget or lower --u to run this instance")
            }
            Failure::Core(e) => eprintln!("error: {e}"),
            Failure::Io(path, e) => eprintln!("error: {}: {e}", path.display()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_instance(source: &Source) -> CliResult<Instance> {
    match (&source.instance, &source.circuit) {
        (Some(name), _) => Ok(find_instance(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(path.clone(), e))?;
            let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit");
            Ok(Instance::classify(parse_circuit(&text, label)?)?)
        }
        (None, None) => unreachable!("clap enforces one source"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

fn options(common: &Common, plan: &PlanArgs) -> ProtocolOptions {
    ProtocolOptions {
        build: BuildOptions {
            keep_identity: common.keep_identity_term,
        },
        budget: plan.budget,
    }
}

fn thresholds_json(t: &Thresholds) -> Value {
    json!({
        "a": t.a,
        "b": t.b,
        "sum_abs": t.sum_abs,
        "alpha": t.alpha,
        "beta": t.beta,
        "gap": t.gap,
        "cutoff": t.cutoff(),
    })
}

fn history_json(psi: &StateVector, h: &LocalHamiltonian) -> CliResult<Value> {
    let mut parts = serde_json::Map::new();
    for tag in TermTag::ALL {
        parts.insert(tag.name().to_string(), json!(h.part_energy(psi, tag)?));
    }
    Ok(json!({
        "norm": psi.norm(),
        "energy": expectation(psi, h)?,
        "part_energies": parts,
        "pass_probability": vbqc_core::pass_probability(h, psi)?,
    }))
}

fn cmd_dump(args: &DumpArgs) -> CliResult<()> {
    let inst = load_instance(&args.common.source)?;
    let opts = options(&args.common, &args.plan);
    let h0 = build_clock_hamiltonian_with(&inst.circuit, HamiltonianVariant::H0, opts.build)?;
    let h1 = build_clock_hamiltonian_with(&inst.circuit, HamiltonianVariant::H1, opts.build)?;
    let (t0, t1) = compute_thresholds(&h0, &h1, &inst)?;
    let plan = plan_repetitions(t0, t1, args.plan.u)?;
    let psi0 = build_history_state(&inst.circuit, HistoryVariant::Psi0)?;
    let psi1 = build_history_state(&inst.circuit, HistoryVariant::Psi1)?;
    let ham = |h: &LocalHamiltonian| {
        json!({
            "terms": h.to_json(),
            "num_terms": h.terms().len(),
            "sum_abs": h.sum_abs(),
            "identity_offset": h.identity_offset(),
        })
    };
    let report = json!({
        "instance": inst.name(),
        "membership": inst.membership,
        "r": inst.r_bound.map(|r| if r.is_finite() { json!(r) } else { json!("inf") }),
        "acceptance_probability": acceptance_probability(&inst.circuit)?,
        "n": inst.circuit.num_qubits(),
        "steps": inst.circuit.depth(),
        "m": h0.num_qubits(),
        "keep_identity_term": opts.build.keep_identity,
        "hamiltonians": { "h0": ham(&h0), "h1": ham(&h1) },
        "thresholds": { "h0": thresholds_json(&t0), "h1": thresholds_json(&t1) },
        "plan": {
            "u": plan.u,
            "k0": plan.k0,
            "k1": plan.k1,
            "total": plan.total_tests(),
            "budget": opts.budget,
            "within_budget": plan.check_budget(opts.budget).is_ok(),
        },
        "history": {
            "psi0_on_h0": history_json(&psi0, &h0)?,
            "psi1_on_h1": history_json(&psi1, &h1)?,
        },
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(args.common.out.as_deref(), &text)
}

fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let inst = load_instance(&args.common.source)?;
    let opts = options(&args.common, &args.plan);
    let transcript = run_protocol_with(&inst, args.plan.u, &args.strategy, args.seed, opts)?;
    emit(args.common.out.as_deref(), &transcript.to_json_lines())?;
    if args.common.out.is_some() {
        eprintln!("{}: {}", inst.name(), transcript.conclusion);
    }
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> CliResult<()> {
    let inst = load_instance(&args.common.source)?;
    let opts = options(&args.common, &args.plan);
    let mut text = String::from(StatsSummary::CSV_HEADER);
    text.push('\n');
    for strategy in &args.strategy {
        let summary = estimate_statistics_with(&inst, args.plan.u, strategy, args.trials, args.seed, opts)?;
        text.push_str(&summary.csv_row());
        text.push('\n');
    }
    emit(args.common.out.as_deref(), &text)
}

fn cmd_dump_hamiltonian(args: &DumpHamiltonianArgs) -> CliResult<()> {
    let inst = load_instance(&args.common.source)?;
    let variant = match args.variant {
        VariantArg::H0 => HamiltonianVariant::H0,
        VariantArg::H1 => HamiltonianVariant::H1,
    };
    let build = BuildOptions {
        keep_identity: args.common.keep_identity_term,
    };
    let h = build_clock_hamiltonian_with(&inst.circuit, variant, build)?;
    let mut text = serde_json::to_string_pretty(&h.to_json()).expect("terms serialize");
    text.push('\n');
    emit(args.common.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Dump(a) => cmd_dump(a),
        Command::Run(a) => cmd_run(a),
        Command::Stats(a) => cmd_stats(a),
        Command::DumpHamiltonian(a) => cmd_dump_hamiltonian(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.exit_code())
        }
    }
}
