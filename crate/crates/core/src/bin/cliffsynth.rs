//! Command-line front end: database construction, optimal synthesis,
//! peephole optimization, encoder synthesis, sampling, and verification.
//!
//! Exit codes: 0 success, 2 invalid flags or malformed input, 3 memory
//! budget stop (partial database written), 4 target not found within the
//! search budget, 5 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cliffsynth::canonical::{canonicalize, EquivMode};
use cliffsynth::circuit::{emit_circuit, parse_circuit, Circuit, CostModel, GateKind, Metric};
use cliffsynth::database::{BuildOptions, Database, DatabaseError};
use cliffsynth::peephole;
use cliffsynth::qecc;
use cliffsynth::sample;
use cliffsynth::synth::{self, SynthError};
use cliffsynth::tableau::SymplecticTableau;

const JSON_SCHEMA_VERSION: u32 = 1;

const EXIT_USAGE: u8 = 2;
const EXIT_MEMORY: u8 = 3;
const EXIT_NOT_FOUND: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(name = "cliffsynth", version, about = "Optimal Clifford circuit synthesis toolkit")]
struct Cli {
    /// Cap the worker thread pool (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a cost database by breadth-first search and write it to disk.
    BuildDb(BuildDbArgs),
    /// Synthesize an optimal circuit for a tableau target.
    Synth(SynthArgs),
    /// Peephole-optimize a circuit against a database.
    Optimize(OptimizeArgs),
    /// Synthesize a stabilizer-code encoder.
    Qecc(QeccArgs),
    /// Sample random Cliffords and estimate the optimal-cost distribution.
    Sample(SampleArgs),
    /// Check circuit-versus-target equivalence in a chosen mode.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Simultaneous,
    Independent,
}

impl ModeArg {
    fn to_mode(self) -> EquivMode {
        match self {
            ModeArg::Exact => EquivMode::Exact,
            ModeArg::Simultaneous => EquivMode::Simultaneous,
            ModeArg::Independent => EquivMode::Independent,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    /// Gate count over the gate set.
    Gates,
    /// Circuit depth with parallel moves.
    Depth,
    /// Controlled-Z count: {H, S, Sdg, CZ}, weight 1 on CZ.
    Cz,
    /// Gate count with explicit per-gate weights.
    Weighted,
}

#[derive(Args)]
struct BuildDbArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long, value_enum, default_value = "simultaneous")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "gates")]
    metric: MetricArg,
    /// Comma-separated gate set, e.g. "H,S,CX" (defaults per metric).
    #[arg(long)]
    gates: Option<String>,
    /// Comma-separated weights for the weighted metric, e.g. "H=0,CZ=1".
    #[arg(long)]
    weights: Option<String>,
    /// Restrict to CNOT-only linear-reversible maps.
    #[arg(long)]
    linear: bool,
    /// Stop after this many cost layers.
    #[arg(long)]
    max_cost: Option<usize>,
    /// Memory budget in bytes for stored keys.
    #[arg(long)]
    mem_limit: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also print the orbit-weighted total (group elements covered).
    #[arg(long)]
    totals: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    db: PathBuf,
    /// Target: tableau text ("n <n>" header) or circuit ("qubits <n>").
    #[arg(long)]
    target: PathBuf,
    /// Allow meet-in-the-middle beyond the database depth.
    #[arg(long)]
    mim: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    /// Cap on gathered-subcircuit qubits (defaults to the database size).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum QeccAlgo {
    Staged,
    Unstaged,
    Optimal,
}

#[derive(Args)]
struct QeccArgs {
    #[arg(long)]
    stabilizers: PathBuf,
    #[arg(long, value_enum, default_value = "staged")]
    algo: QeccAlgo,
    /// Metric for --algo optimal (gates or depth).
    #[arg(long, value_enum, default_value = "gates")]
    metric: MetricArg,
    /// Search bound for --algo optimal.
    #[arg(long, default_value_t = 24)]
    max_cost: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    db: PathBuf,
    /// Expected qubit count; checked against the database.
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Confidence parameter for the Hoeffding half-width.
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Tableau text or reference circuit.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long)]
    json: bool,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn parse_gate_list(s: &str) -> Result<Vec<GateKind>, String> {
    s.split(',')
        .map(|tok| match tok.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(GateKind::H),
            "S" | "P" => Ok(GateKind::S),
            "SDG" | "PDG" => Ok(GateKind::Sdg),
            "CX" | "CNOT" => Ok(GateKind::Cx),
            "CZ" => Ok(GateKind::Cz),
            "SWAP" => Ok(GateKind::Swap),
            other => Err(format!("unknown gate '{other}'")),
        })
        .collect()
}

fn build_cost_model(
    metric: MetricArg,
    gates: &Option<String>,
    weights: &Option<String>,
) -> Result<CostModel, String> {
    let mut model = match metric {
        MetricArg::Gates => CostModel::gate_count(),
        MetricArg::Depth => CostModel::depth(),
        MetricArg::Cz => CostModel::cz_count(),
        MetricArg::Weighted => {
            CostModel { metric: Metric::Weighted, ..CostModel::gate_count() }
        }
    };
    if let Some(g) = gates {
        model.gate_set = parse_gate_list(g)?;
    }
    if let Some(w) = weights {
        if model.metric != Metric::Weighted {
            return Err("--weights requires --metric weighted or cz".into());
        }
        for tok in w.split(',') {
            let (name, val) = tok
                .split_once('=')
                .ok_or_else(|| format!("bad weight entry '{tok}' (want GATE=W)"))?;
            let kinds = parse_gate_list(name)?;
            let val: u16 =
                val.trim().parse().map_err(|_| format!("bad weight value '{val}'"))?;
            for k in kinds {
                model.set_weight(k, val);
            }
        }
    }
    model.check().map_err(|e| e.to_string())?;
    Ok(model)
}

/// Target file dispatch: tableau text starts with `n`, circuits with
/// `qubits`.
fn load_target(path: &PathBuf) -> Result<SymplecticTableau, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let head = text
        .lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if head.starts_with("qubits") {
        let c = parse_circuit(&text).map_err(|e| e.to_string())?;
        SymplecticTableau::from_circuit(&c).map_err(|e| e.to_string())
    } else {
        SymplecticTableau::parse_text(&text).map_err(|e| e.to_string())
    }
}

fn load_circuit(path: &PathBuf) -> Result<Circuit, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_circuit(&text).map_err(|e| e.to_string())
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, content).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            return fail(EXIT_USAGE, "could not configure the thread pool");
        }
    }
    match cli.command {
        Command::BuildDb(a) => cmd_build_db(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Qecc(a) => cmd_qecc(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

#[derive(Serialize)]
struct BuildReport {
    schema: u32,
    qubits: usize,
    mode: String,
    linear: bool,
    complete: bool,
    layers: Vec<usize>,
    total_classes: usize,
    total_elements: Option<String>,
    runtime_ms: u128,
}

fn emit_db_report(db: &Database, totals: bool, json: bool, runtime_ms: u128) {
    let report = BuildReport {
        schema: JSON_SCHEMA_VERSION,
        qubits: db.n,
        mode: format!("{:?}", db.mode).to_lowercase(),
        linear: db.linear,
        complete: db.complete,
        layers: db.layer_sizes(),
        total_classes: db.total_keys(),
        total_elements: totals.then(|| db.total_elements().to_string()),
        runtime_ms,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return;
    }
    println!("cost  classes");
    for (c, size) in report.layers.iter().enumerate() {
        println!("{c:>4}  {size}");
    }
    println!("total classes: {}", report.total_classes);
    if let Some(t) = &report.total_elements {
        println!("total group elements covered: {t}");
    }
    println!(
        "{} after {} ms",
        if report.complete { "complete" } else { "truncated" },
        report.runtime_ms
    );
}

fn cmd_build_db(a: BuildDbArgs) -> ExitCode {
    let mut model = match build_cost_model(a.metric, &a.gates, &a.weights) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if a.linear && a.gates.is_none() {
        model.gate_set = vec![GateKind::Cx];
    }
    let opts = BuildOptions { max_cost: a.max_cost, max_bytes: a.mem_limit };
    let start = std::time::Instant::now();
    match Database::build(a.qubits, a.mode.to_mode(), a.linear, model, opts) {
        Ok(db) => {
            if let Err(e) = db.save(&a.out) {
                return fail(EXIT_USAGE, e);
            }
            emit_db_report(&db, a.totals, a.json, start.elapsed().as_millis());
            ExitCode::SUCCESS
        }
        Err(DatabaseError::MemoryBudget { budget, layer, used, partial }) => {
            eprintln!(
                "memory budget stop: {used} bytes stored (> {budget}) at layer {layer}; \
                 writing the partial database"
            );
            if let Err(e) = partial.save(&a.out) {
                return fail(EXIT_USAGE, e);
            }
            emit_db_report(&partial, a.totals, a.json, start.elapsed().as_millis());
            ExitCode::from(EXIT_MEMORY)
        }
        Err(e) => fail(EXIT_USAGE, e),
    }
}

#[derive(Serialize)]
struct SynthReport {
    schema: u32,
    cost: usize,
    metric: String,
    gates: usize,
    depth: usize,
    runtime_ms: u128,
}

fn cmd_synth(a: SynthArgs) -> ExitCode {
    let db = match Database::load(&a.db) {
        Ok(db) => db,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let target = match load_target(&a.target) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let start = std::time::Instant::now();
    let result = if a.mim {
        synth::synthesize(&db, &target)
    } else {
        synth::reconstruct(&db, &target)
    };
    let res = match result {
        Ok(r) => r,
        Err(e @ SynthError::NotCovered { .. }) => return fail(EXIT_NOT_FOUND, e),
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let report = SynthReport {
        schema: JSON_SCHEMA_VERSION,
        cost: res.cost,
        metric: format!("{:?}", db.cost_model.metric).to_lowercase(),
        gates: res.circuit.gate_count(),
        depth: res.circuit.depth(),
        runtime_ms: start.elapsed().as_millis(),
    };
    if let Err(e) = write_or_print(&a.out, &emit_circuit(&res.circuit)) {
        return fail(EXIT_USAGE, e);
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        eprintln!("optimal cost {} ({} ms)", report.cost, report.runtime_ms);
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct OptimizeReport {
    schema: u32,
    input_cost: u64,
    optimized_cost: u64,
    runtime_ms: u128,
    passes: usize,
    replacements: usize,
    gates_before: usize,
    gates_after: usize,
    reduction: f64,
}

fn cmd_optimize(a: OptimizeArgs) -> ExitCode {
    let db = match Database::load(&a.db) {
        Ok(db) => db,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let circuit = match load_circuit(&a.circuit) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let start = std::time::Instant::now();
    let (out, rep) = match peephole::optimize_windowed(&circuit, &db, a.window) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let report = OptimizeReport {
        schema: JSON_SCHEMA_VERSION,
        input_cost: rep.cost_before,
        optimized_cost: rep.cost_after,
        runtime_ms: start.elapsed().as_millis(),
        passes: rep.passes,
        replacements: rep.replacements,
        gates_before: rep.gates_before,
        gates_after: rep.gates_after,
        reduction: rep.reduction,
    };
    if let Err(e) = write_or_print(&a.out, &emit_circuit(&out)) {
        return fail(EXIT_USAGE, e);
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        eprintln!(
            "cost {} -> {} ({:.1}% reduction, {} ms)",
            report.input_cost,
            report.optimized_cost,
            report.reduction * 100.0,
            report.runtime_ms
        );
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct QeccReport {
    schema: u32,
    qubits: usize,
    generators: usize,
    algo: String,
    gates: usize,
    depth: usize,
    optimal_cost: Option<usize>,
    verified: bool,
    runtime_ms: u128,
}

fn cmd_qecc(a: QeccArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&a.stabilizers) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_USAGE, format!("{}: {e}", a.stabilizers.display())),
    };
    let group = match qecc::parse_stabilizers(&text) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let start = std::time::Instant::now();
    let (circuit, optimal_cost, algo) = match a.algo {
        QeccAlgo::Staged => (qecc::encode_staged(&group), None, "staged"),
        QeccAlgo::Unstaged => (qecc::encode_unstaged(&group), None, "unstaged"),
        QeccAlgo::Optimal => {
            let model = match a.metric {
                MetricArg::Gates => CostModel::gate_count(),
                MetricArg::Depth => CostModel::depth(),
                _ => return fail(EXIT_USAGE, "--algo optimal supports gates or depth"),
            };
            match qecc::optimal_encoder(&group, &model, a.max_cost) {
                Ok(r) => (r.circuit, Some(r.cost), "optimal"),
                Err(e @ qecc::QeccError::NotFound { .. }) => return fail(EXIT_NOT_FOUND, e),
                Err(e) => return fail(EXIT_USAGE, e),
            }
        }
    };
    let verified = qecc::verify_encoder(&circuit, &group);
    let report = QeccReport {
        schema: JSON_SCHEMA_VERSION,
        qubits: group.n,
        generators: group.r(),
        algo: algo.into(),
        gates: circuit.gate_count(),
        depth: circuit.depth(),
        optimal_cost,
        verified,
        runtime_ms: start.elapsed().as_millis(),
    };
    if let Err(e) = write_or_print(&a.out, &emit_circuit(&circuit)) {
        return fail(EXIT_USAGE, e);
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        eprintln!(
            "{} encoder: {} gates, depth {}, verified: {} ({} ms)",
            report.algo, report.gates, report.depth, report.verified, report.runtime_ms
        );
    }
    if !verified {
        return fail(EXIT_VERIFY, "encoder failed verification");
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct SampleReport {
    schema: u32,
    qubits: usize,
    samples: u64,
    seed: u64,
    epsilon: f64,
    proportions: Vec<f64>,
    counts: Vec<u64>,
    not_found: u64,
    runtime_ms: u128,
}

fn cmd_sample(a: SampleArgs) -> ExitCode {
    let db = match Database::load(&a.db) {
        Ok(db) => db,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if db.linear {
        return fail(EXIT_USAGE, "sampling needs a full-tableau database");
    }
    if a.qubits.is_some_and(|q| q != db.n) {
        return fail(EXIT_USAGE, format!("database holds {}-qubit circuits", db.n));
    }
    if a.samples == 0 {
        return fail(EXIT_USAGE, "--samples must be positive");
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let start = std::time::Instant::now();
    let hist = sample::cost_histogram(&db, &mut rng, a.samples);
    let report = SampleReport {
        schema: JSON_SCHEMA_VERSION,
        qubits: db.n,
        samples: a.samples,
        seed: a.seed,
        epsilon: sample::hoeffding_epsilon(a.samples, a.alpha),
        proportions: hist.frequencies(),
        counts: hist.counts.clone(),
        not_found: hist.uncovered,
        runtime_ms: start.elapsed().as_millis(),
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("cost  count  proportion");
        for (c, (&k, &p)) in report.counts.iter().zip(&report.proportions).enumerate() {
            println!("{c:>4}  {k:>6}  {p:.6}");
        }
        if report.not_found > 0 {
            println!("uncovered: {}", report.not_found);
        }
        println!(
            "epsilon {:.6} (Hoeffding, alpha {}), {} ms",
            report.epsilon, a.alpha, report.runtime_ms
        );
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct VerifyReport {
    schema: u32,
    mode: String,
    equivalent: bool,
}

fn cmd_verify(a: VerifyArgs) -> ExitCode {
    let circuit = match load_circuit(&a.circuit) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let lhs = match SymplecticTableau::from_circuit(&circuit) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let rhs = match load_target(&a.target) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if lhs.n() != rhs.n() {
        return fail(EXIT_USAGE, "circuit and target act on different qubit counts");
    }
    let mode = a.mode.to_mode();
    let equivalent = canonicalize(&lhs, mode) == canonicalize(&rhs, mode);
    let report = VerifyReport {
        schema: JSON_SCHEMA_VERSION,
        mode: format!("{mode:?}").to_lowercase(),
        equivalent,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!(
            "{} ({} mode)",
            if equivalent { "equivalent" } else { "NOT equivalent" },
            report.mode
        );
    }
    if equivalent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
