use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qcons::bounds::{
    bd_hitting_bound, birth_death_chain, corollary_formulas, theorem3_bounds, BdReading, CorollaryFamily,
};
use qcons::dynamics::{OpinionProfile, RunOptions};
use qcons::exact::{
    exact_meeting_times, hidden_vertex, hitting_from_resistance, lazy_hitting_table, lazy_transition_matrix,
    potential_table, resistance_table, simple_walk_matrix, visit_voltage_profile, PairTable,
};
use qcons::graph::load_graph;
use qcons::harness::report::{num, text};
use qcons::harness::{
    load_corpus, run_experiment, run_suite, simulate_table, standard_corpus, sweep_ratio, sweep_table,
    ExperimentConfig, ExperimentKind, OutputFormat, SweepFamily, SweepMode, Table,
};
use qcons::spectral::{
    contraction_factor, kbar_report, laplacian_max_eig_report, product_spectrum_check, random_target_residual,
    symmetric_spectrum,
};
use qcons::time_varying::{meeting_time_tv, mixing_trace, point_mass, GraphSequence};
use qcons::walkers::{estimate_max_meeting, Process, WalkerPair, DEFAULT_STEP_CAP};
use qcons::{Error, Graph};

#[derive(Parser)]
#[command(name = "qcons", version, about = "Quantized consensus simulator and meeting-time laboratory")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structure and degree-sum report for a graph.
    Graph(GraphArgs),
    /// Run the consensus protocol.
    Simulate(SimulateArgs),
    /// Monte Carlo meeting times of the coupled walkers.
    Walkers(WalkersArgs),
    /// Exact hitting, resistance and meeting-time tables.
    Exact(ExactArgs),
    /// Spectral identities and diagnostics.
    Spectral(SpectralArgs),
    /// Bound calculators against the exact values.
    Bounds(BoundsArgs),
    /// Time-varying schedules.
    Tv(TvArgs),
    /// Ratio of the maximum meeting time to m n D across graph families.
    Sweep(SweepArgs),
    /// Exact identity suite over a corpus, or a config-driven experiment.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Family spec (e.g. `cycle:8`, `double_star:i=4,k=2,n=9`) or graph file.
    #[arg(long)]
    graph: String,
    /// Print the graph in the text file format instead of a report.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: String,
    /// Comma-separated initial opinions.
    #[arg(long, conflicts_with = "x_set")]
    profile: Option<String>,
    /// `a,b`: node `a` holds 0, node `b` holds 2, the rest hold 1.
    #[arg(long)]
    x_set: Option<WalkerPair>,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Args)]
struct WalkersArgs {
    #[arg(long)]
    graph: String,
    #[arg(long, default_value = "original")]
    process: Process,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    /// Start pair `a,b`; repeatable. All pairs when omitted.
    #[arg(long = "start")]
    starts: Vec<WalkerPair>,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    cap: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactWhat {
    Meeting,
    Hitting,
    Resistance,
    Phi,
    Hidden,
    Voltage,
    ResistanceHitting,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    graph: String,
    #[arg(long, value_enum, default_value = "meeting")]
    what: ExactWhat,
    #[arg(long, default_value = "original")]
    process: Process,
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectralWhat {
    Spectrum,
    RandomTarget,
    Product,
    Lemma7,
    Kbar,
    Contraction,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    Laplacian,
    Lazy,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long)]
    graph: String,
    #[arg(long, value_enum, default_value = "spectrum")]
    what: SpectralWhat,
    #[arg(long, value_enum, default_value = "laplacian")]
    matrix: MatrixKind,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    graph: Option<String>,
    /// `cycle` or `line`: closed forms over a range of sizes.
    #[arg(long, requires = "n_range")]
    family: Option<CorollaryFamily>,
    /// Inclusive range `a..b`.
    #[arg(long, value_parser = parse_range)]
    n_range: Option<(usize, usize)>,
}

#[derive(Args)]
struct TvArgs {
    /// Schedule file: one graph spec per line, optional `random <seed>` first.
    #[arg(long)]
    schedule: PathBuf,
    #[command(subcommand)]
    action: TvAction,
}

#[derive(Subcommand)]
enum TvAction {
    /// Monte Carlo meeting time over the schedule.
    Meet {
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value = "0,1")]
        start: WalkerPair,
        #[arg(long, default_value = "original")]
        process: Process,
    },
    /// Distance to uniform of the pair-space recursion.
    Mix {
        #[arg(long, default_value_t = 100)]
        horizon: u64,
        /// Initial point mass `a,b`; `a` may equal `b`.
        #[arg(long, default_value = "0,1")]
        start: String,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "line,star,lollipop,semi_regular")]
    families: Vec<SweepFamily>,
    #[arg(long, value_parser = parse_range, default_value = "3..24")]
    n_range: (usize, usize),
    #[arg(long, default_value = "auto")]
    mode: SweepMode,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Args)]
struct SuiteArgs {
    /// TOML experiment config; overrides the other suite options.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph specs; the standard corpus when omitted.
    #[arg(long = "graph")]
    graphs: Vec<String>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

/// What a command produced: a JSON document, a table for CSV output,
/// hard failures (exit code 1) and raised diagnostic flags.
struct Output {
    json: Value,
    table: Table,
    default_format: OutputFormat,
    failures: Vec<String>,
    flags: Vec<String>,
}

impl Output {
    fn new(json: Value, table: Table, default_format: OutputFormat) -> Self {
        Output {
            json,
            table,
            default_format,
            failures: Vec::new(),
            flags: Vec::new(),
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

/// `key,value` table from the scalar fields of a JSON object.
fn kv_table(v: &Value) -> Table {
    let mut t = Table::new(["key", "value"]);
    if let Value::Object(map) = v {
        for (k, v) in map {
            let cell = match v {
                Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
                Value::String(s) => s.clone(),
                Value::Bool(b) => b.to_string(),
                Value::Null => String::new(),
                other => other.to_string(),
            };
            t.push(vec![k.clone(), cell]);
        }
    }
    t
}

fn pair_table(table: &PairTable) -> Table {
    let mut t = Table::new(["x", "y", "value"]);
    for (x, y, v) in table.entries() {
        t.push(vec![text(x), text(y), num(v)]);
    }
    t
}

fn load(spec: &str) -> qcons::Result<Graph> {
    load_graph(spec, None)
}

fn require(name: &str, v: Option<usize>) -> qcons::Result<usize> {
    v.ok_or_else(|| Error::Config(format!("--{name} is required here")))
}

fn cmd_graph(a: &GraphArgs) -> qcons::Result<Output> {
    let g = load(&a.graph)?;
    if a.text {
        let mut t = Table::new(["u", "v"]);
        for &(u, v) in g.edges() {
            t.push(vec![text(u), text(v)]);
        }
        return Ok(Output::new(Value::String(g.to_text()), t, OutputFormat::Json));
    }
    let report = g.assumption_check()?;
    let json = json!({
        "n": g.n(),
        "m": g.m(),
        "diameter": g.diameter()?,
        "degrees": g.degrees(),
        "assumption_holds": report.holds,
        "classification": report.classification,
        "max_degree_sum": report.max_degree_sum,
        "worst_edge": [report.worst_edge.0, report.worst_edge.1],
    });
    let t = kv_table(&json);
    Ok(Output::new(json, t, OutputFormat::Json))
}

fn cmd_simulate(a: &SimulateArgs, seed: u64) -> qcons::Result<Output> {
    let g = load(&a.graph)?;
    let x0 = match (&a.profile, a.x_set) {
        (Some(p), _) => OpinionProfile::new(
            p.split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<qcons::Result<Vec<_>>>()?,
        ),
        (None, Some(w)) => OpinionProfile::x_set(g.n(), w.pos0, w.pos2)?,
        (None, None) => return Err(Error::Config("give --profile or --x-set".into())),
    };
    let opts = RunOptions {
        max_steps: a.max_steps.unwrap_or(RunOptions::default().max_steps),
        record_lyapunov: false,
    };
    let res = simulate_table(&g, &x0, a.runs, seed, opts, ExperimentKind::Simulate)?;
    let mut out = Output::new(to_json(&res), res.table.clone(), OutputFormat::Csv);
    out.failures = res.failures;
    Ok(out)
}

fn cmd_walkers(a: &WalkersArgs, seed: u64) -> qcons::Result<Output> {
    let g = load(&a.graph)?;
    let starts = (!a.starts.is_empty()).then_some(a.starts.as_slice());
    let est = estimate_max_meeting(a.process, &g, starts, a.trials, seed, a.cap)?;
    let mut t = Table::new(["pos0", "pos2", "mean", "stderr", "trials", "censored"]);
    for p in &est.per_pair {
        t.push(vec![
            text(p.start.pos0),
            text(p.start.pos2),
            num(p.mean),
            num(p.stderr),
            text(p.trials),
            text(p.censored),
        ]);
    }
    Ok(Output::new(to_json(&est), t, OutputFormat::Json))
}

fn cmd_exact(a: &ExactArgs) -> qcons::Result<Output> {
    let g = load(&a.graph)?;
    let table_out = |t: PairTable| {
        let json = json!({ "max": t.max(), "argmax": t.argmax(), "table": t });
        Output::new(json, pair_table(&t), OutputFormat::Json)
    };
    Ok(match a.what {
        ExactWhat::Meeting => table_out(exact_meeting_times(&g, a.process)?),
        ExactWhat::Hitting => table_out(lazy_hitting_table(&g)?),
        ExactWhat::Phi => table_out(potential_table(&g)?),
        ExactWhat::Resistance => {
            let r = resistance_table(&g)?;
            table_out(PairTable::from_fn(g.n(), |x, y| r[(x, y)]))
        }
        ExactWhat::Hidden => {
            let json = json!({
                "lazy": hidden_vertex(&lazy_transition_matrix(&g)?)?,
                "simple": hidden_vertex(&simple_walk_matrix(&g)?)?,
            });
            let t = kv_table(&json);
            Output::new(json, t, OutputFormat::Json)
        }
        ExactWhat::Voltage => {
            let (from, to) = (require("from", a.from)?, require("to", a.to)?);
            let vp = visit_voltage_profile(&g, from, to)?;
            let mut t = Table::new(["x", "from_visits", "from_resistance"]);
            for (x, (u, v)) in vp.from_visits.iter().zip(&vp.from_resistance).enumerate() {
                t.push(vec![text(x), num(*u), num(*v)]);
            }
            Output::new(to_json(&vp), t, OutputFormat::Json)
        }
        ExactWhat::ResistanceHitting => {
            let (from, to) = (require("from", a.from)?, require("to", a.to)?);
            let r = hitting_from_resistance(&g, from, to)?;
            let json = to_json(&r);
            Output::new(json.clone(), kv_table(&json), OutputFormat::Json)
        }
    })
}

fn cmd_spectral(a: &SpectralArgs) -> qcons::Result<Output> {
    let g = load(&a.graph)?;
    let mut flags = Vec::new();
    let json = match a.what {
        SpectralWhat::Spectrum => {
            let m = match a.matrix {
                MatrixKind::Laplacian => qcons::exact::laplacian_matrix(&g)?,
                MatrixKind::Lazy => lazy_transition_matrix(&g)?,
            };
            let s = symmetric_spectrum(&m)?;
            let mut t = Table::new(["index", "eigenvalue"]);
            for (i, v) in s.values.iter().enumerate() {
                t.push(vec![text(i + 1), num(*v)]);
            }
            return Ok(Output::new(to_json(&s), t, OutputFormat::Json));
        }
        SpectralWhat::RandomTarget => to_json(&random_target_residual(&lazy_transition_matrix(&g)?)?),
        SpectralWhat::Product => to_json(&product_spectrum_check(&g)?),
        SpectralWhat::Lemma7 => {
            let r = laplacian_max_eig_report(&g)?;
            if r.violated {
                flags.push(format!("alpha1(L) = {} exceeds m - 1/2 = {}", num(r.alpha1), num(r.refined_bound)));
            }
            to_json(&r)
        }
        SpectralWhat::Kbar => to_json(&kbar_report(&g)?),
        SpectralWhat::Contraction => {
            let r = contraction_factor(&g)?;
            if r.flagged {
                flags.push(format!("contraction factor {} exceeds {}", num(r.exact), num(r.claimed)));
            }
            to_json(&r)
        }
    };
    let t = kv_table(&json);
    let mut out = Output::new(json, t, OutputFormat::Json);
    out.flags = flags;
    Ok(out)
}

fn cmd_bounds(a: &BoundsArgs, tol: f64) -> qcons::Result<Output> {
    if let (Some(family), Some((lo, hi))) = (a.family, a.n_range) {
        let mut t = Table::new(["n", "tbar", "formula", "value", "violated"]);
        let mut reports = Vec::new();
        let mut flags = Vec::new();
        for n in lo..=hi {
            let r = corollary_formulas(family, n, tol)?;
            let tbar = r.value("tbar");
            for (name, v) in &r.values {
                if name == "tbar" {
                    continue;
                }
                let violated = r.checks.iter().any(|c| c.violated && c.name.contains(name.as_str()));
                if violated {
                    flags.push(format!("n={n}: {name} = {} vs exact {}", num(*v), tbar.map(num).unwrap_or_default()));
                }
                t.push(vec![text(n), tbar.map(num).unwrap_or_default(), name.clone(), num(*v), text(violated)]);
            }
            reports.push(r);
        }
        let mut out = Output::new(to_json(&reports), t, OutputFormat::Csv);
        out.flags = flags;
        return Ok(out);
    }
    let g = load(a.graph.as_deref().expect("clap enforces --graph or --family"))?;
    let t3 = theorem3_bounds(&g, tol)?;
    let mut chains = Vec::new();
    for reading in [BdReading::ClassMass, BdReading::SingleTarget] {
        let chain = birth_death_chain(&g, reading)?;
        let bound = bd_hitting_bound(&chain, chain.top())?;
        chains.push(json!({ "reading": reading.to_string(), "chain": chain, "hitting_bound": bound }));
    }
    let mut t = Table::new(["check", "lhs", "rhs", "slack", "violated"]);
    for c in &t3.checks {
        t.push(vec![c.name.clone(), num(c.lhs), num(c.rhs), num(c.slack), text(c.violated)]);
    }
    let failures = t3
        .checks
        .iter()
        .filter(|c| c.violated)
        .map(|c| format!("{} violated: {} > {}", c.name, num(c.lhs), num(c.rhs)))
        .collect();
    let mut out = Output::new(json!({ "sandwich": t3, "birth_death": chains }), t, OutputFormat::Json);
    out.failures = failures;
    Ok(out)
}

fn cmd_tv(a: &TvArgs, seed: u64) -> qcons::Result<Output> {
    let seq = GraphSequence::load(&a.schedule)?;
    match &a.action {
        TvAction::Meet { trials, start, process } => {
            let r = meeting_time_tv(&seq, *process, *start, *trials, seed)?;
            let json = to_json(&r);
            let mut out = Output::new(json.clone(), kv_table(&json), OutputFormat::Json);
            if !r.within_bound {
                out.failures.push(format!("mean {} exceeds bound {}", num(r.mean), num(r.bound)));
            }
            Ok(out)
        }
        TvAction::Mix { horizon, start } => {
            let (x, y) = start
                .split_once(',')
                .and_then(|(x, y)| Some((x.trim().parse::<usize>().ok()?, y.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| Error::Parse(format!("expected a,b, got {start:?}")))?;
            let n = seq.graphs()[0].n();
            for node in [x, y] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            let tr = mixing_trace(&seq, &point_mass(n, WalkerPair::new(x, y)), *horizon)?;
            let mut t = Table::new(["t", "norm", "claimed_bound", "observed_factor", "claimed_factor", "flagged"]);
            for s in &tr.steps {
                t.push(vec![
                    text(s.t),
                    num(s.norm),
                    num(s.claimed_bound),
                    num(s.observed_factor),
                    num(s.claimed_factor),
                    text(s.flagged),
                ]);
            }
            let mut out = Output::new(to_json(&tr), t, OutputFormat::Csv);
            if tr.any_flagged {
                out.flags.push("per-step contraction exceeded the claimed factor".into());
            }
            Ok(out)
        }
    }
}

fn cmd_sweep(a: &SweepArgs, seed: u64) -> qcons::Result<Output> {
    let rows = sweep_ratio(&a.families, a.n_range.0..=a.n_range.1, a.mode, a.trials, seed)?;
    let mut out = Output::new(to_json(&rows), sweep_table(&rows), OutputFormat::Csv);
    out.failures = rows
        .iter()
        .filter(|r| r.ratio > 1.0)
        .map(|r| format!("{} n={}: ratio {} > 1", r.family, r.n, num(r.ratio)))
        .collect();
    Ok(out)
}

fn cmd_suite(a: &SuiteArgs, tol: f64) -> qcons::Result<Output> {
    if let Some(path) = &a.config {
        let cfg = ExperimentConfig::load(path)?;
        let res = run_experiment(&cfg, path.parent())?;
        let mut out = Output::new(to_json(&res), res.table.clone(), cfg.experiment.format);
        out.failures = res.failures;
        out.flags = res.flags;
        return Ok(out);
    }
    let corpus = if a.graphs.is_empty() {
        standard_corpus()?
    } else {
        load_corpus(a.graphs.iter().map(String::as_str), None)?
    };
    let rep = run_suite(&corpus, tol)?;
    let describe = |r: &qcons::harness::SuiteRow| format!("{}: {} = {} (limit {})", r.graph, r.check, num(r.value), num(r.limit));
    let mut out = Output::new(to_json(&rep), rep.table(), OutputFormat::Csv);
    out.failures = rep.hard_failures().map(describe).collect();
    out.flags = rep.flags().map(describe).collect();
    Ok(out)
}

fn emit(out: &Output, format: OutputFormat, path: Option<&Path>) -> qcons::Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = sink;
    match format {
        OutputFormat::Csv => out.table.write_csv(&mut sink)?,
        OutputFormat::Json if out.json.is_string() => write!(sink, "{}", out.json.as_str().unwrap_or_default())?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut sink, &out.json).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Bad input exits with 2, failed computations with 1.
fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::Singular | Error::InvalidChain(_) | Error::NegativeEntry { .. } | Error::Io(_) => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> qcons::Result<Output> {
    match &cli.command {
        Command::Graph(a) => cmd_graph(a),
        Command::Simulate(a) => cmd_simulate(a, cli.seed),
        Command::Walkers(a) => cmd_walkers(a, cli.seed),
        Command::Exact(a) => cmd_exact(a),
        Command::Spectral(a) => cmd_spectral(a),
        Command::Bounds(a) => cmd_bounds(a, cli.tolerance),
        Command::Tv(a) => cmd_tv(a, cli.seed),
        Command::Sweep(a) => cmd_sweep(a, cli.seed),
        Command::Suite(a) => cmd_suite(a, cli.tolerance),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_exit_code(&e));
        }
    };
    let format = cli.format.map(OutputFormat::from).unwrap_or(out.default_format);
    if let Err(e) = emit(&out, format, cli.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    for f in &out.flags {
        eprintln!("flag: {f}");
    }
    for f in &out.failures {
        eprintln!("FAILED: {f}");
    }
    if out.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
