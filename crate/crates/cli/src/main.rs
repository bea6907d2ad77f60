//! Command-line interface to the causal toolkit: d-separation queries, path
//! listings, adjustment-set checks, interventions, simulation, estimation,
//! scenario reproduction, and DOT export.
//!
//! Exit codes are uniform across subcommands: 0 for success or a positive
//! verdict (d-separated, valid adjustment set, all reproduction rows as
//! expected), 1 for a negative domain verdict (d-connected, invalid set, an
//! estimator refusal, a reproduction mismatch), and 2 for usage, I/O, or
//! validation errors. Stochastic subcommands require an explicit seed, and
//! identical invocations produce byte-identical output. Set CAUSAL_THREADS
//! to cap worker parallelism (bootstrap replicates and simulation batches).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use causal_core::dag::CausalDag;
use causal_core::data::Dataset;
use causal_core::estimators::report::fmt_sig;
use causal_core::estimators::{
    bootstrap_ci, fit_msm, fit_ols, g_formula, g_formula_msm, iptw_weights_with, its_segmented,
    rd_estimate, standardize, CoefficientReport, EstimatorError, WeightConfig,
};
use causal_core::scenarios::{catalog, reproduce, Method, ReproductionReport};
use causal_core::scm::StructuralModel;

const PARALLELISM_VAR: &str = "CAUSAL_THREADS";

// ── Command definitions ──────────────────────────────────────────────────────

#[derive(Parser)]
#[command(
    name = "causal",
    version,
    about = "Causal graphs, structural-model simulation, and effect estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // parsed once; the spread is flag structs
enum Command {
    /// Test whether two nodes are d-separated given a conditioning set.
    Dsep(DsepArgs),
    /// List paths between two nodes and whether each is open.
    Paths(PathsArgs),
    /// Check a candidate backdoor adjustment set.
    AdjustCheck(AdjustCheckArgs),
    /// Cut incoming edges (DAG file) or fix node values (model file).
    Intervene(InterveneArgs),
    /// Draw a dataset from a structural model file as CSV.
    Simulate(SimulateArgs),
    /// Fit an estimator to a CSV dataset.
    Estimate(EstimateArgs),
    /// Re-run a built-in scenario and grade each estimate against its truth.
    Reproduce(ReproduceArgs),
    /// List the built-in scenarios, or export one as a model file.
    Catalog(CatalogArgs),
    /// Render a DAG or model file as Graphviz DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct DsepArgs {
    /// DAG file (JSON).
    dag: PathBuf,
    x: String,
    y: String,
    /// Conditioning set, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    given: Vec<String>,
    /// When d-connected, also list the open paths.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct PathsArgs {
    /// DAG file (JSON).
    dag: PathBuf,
    from: String,
    to: String,
    /// Conditioning set used to classify each path as open or blocked.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    given: Vec<String>,
    /// Only paths whose first edge points into the source.
    #[arg(long)]
    backdoor_only: bool,
}

#[derive(Args)]
struct AdjustCheckArgs {
    /// DAG file (JSON).
    dag: PathBuf,
    treatment: String,
    outcome: String,
    /// Candidate adjustment set, comma separated (may be empty).
    #[arg(long = "set", value_delimiter = ',', num_args = 0..)]
    set: Vec<String>,
    /// When invalid, list the backdoor paths left open.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct InterveneArgs {
    /// DAG or model file (JSON; model files carry an "equations" object).
    file: PathBuf,
    /// Interventions, comma separated: NAME=VALUE for model files, bare
    /// NAME is enough for DAG files.
    #[arg(long = "set", value_delimiter = ',', required = true)]
    set: Vec<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model file (JSON).
    model: PathBuf,
    /// Number of rows to draw (at least 1).
    #[arg(long)]
    n: usize,
    /// Noise seed; the same seed always reproduces the same rows.
    #[arg(long)]
    seed: u64,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Dataset file (CSV with a header row).
    data: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Outcome column.
    #[arg(long)]
    outcome: String,
    /// Regression terms, comma separated; '*' builds products ("X1,X2,X1*X2").
    /// Required for ols; optional for iptw-msm (default: all treatment products).
    #[arg(long, value_delimiter = ',')]
    terms: Vec<String>,
    /// Treatment column (standardize).
    #[arg(long)]
    treatment: Option<String>,
    /// Treatment columns in time order (iptw-msm, g-formula).
    #[arg(long, value_delimiter = ',')]
    treatments: Vec<String>,
    /// Adjustment columns (standardize), comma separated (may be empty).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    adjust: Vec<String>,
    /// Per-period confounder blocks for g-formula: "L1,L2|L3" ('|' separates
    /// periods; a leading empty block is allowed).
    #[arg(long)]
    confounders: Option<String>,
    /// Per-period denominator conditioning sets for iptw-msm: "X1,L2|X2,L3".
    #[arg(long)]
    denominators: Option<String>,
    /// Per-period numerator conditioning sets for iptw-msm (default: all
    /// periods marginal).
    #[arg(long)]
    numerators: Option<String>,
    /// Use raw instead of stabilized weights (iptw-msm).
    #[arg(long)]
    unstabilized: bool,
    /// Treatment regime for g-formula, e.g. "1,0,1"; omit for the full
    /// coefficient table over every regime.
    #[arg(long, value_delimiter = ',')]
    regime: Option<Vec<u8>>,
    /// Time column (its).
    #[arg(long)]
    time: Option<String>,
    /// Interruption time (its).
    #[arg(long)]
    interruption: Option<f64>,
    /// Running-variable column (rd).
    #[arg(long)]
    running: Option<String>,
    /// Cutoff in the running variable (rd).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Half-width of the estimation window around the cutoff (rd).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Bootstrap replicate count for percentile intervals (needs --seed;
    /// ols, iptw-msm, and g-formula tables only).
    #[arg(long, requires = "seed")]
    bootstrap: Option<usize>,
    /// Interval coverage level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Resampling seed (required with --bootstrap).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Scenario id (see `causal catalog`).
    id: String,
    /// Methods to run, comma separated (default: the scenario's full set).
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Sample size for the simulated dataset.
    #[arg(long)]
    n: usize,
    /// Simulation seed.
    #[arg(long)]
    seed: u64,
    /// Bootstrap replicates per estimate (0 for none).
    #[arg(long, default_value_t = 0)]
    replicates: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct CatalogArgs {
    /// Print this scenario's structural model as JSON instead of the list.
    #[arg(long)]
    export: Option<String>,
}

#[derive(Args)]
struct ExportDotArgs {
    /// DAG or model file (JSON).
    file: PathBuf,
    /// Highlight edges on backdoor paths between TREATMENT,OUTCOME.
    #[arg(long, value_delimiter = ',')]
    highlight: Option<Vec<String>>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Ols,
    Standardize,
    IptwMsm,
    GFormula,
    Its,
    Rd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

// ── Failure plumbing ─────────────────────────────────────────────────────────

/// Everything that can go wrong, sorted by exit code: usage, I/O, and
/// validation problems exit 2; refusals on well-formed input (an estimator
/// declining the data) exit 1.
enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure::Usage(message.into())
    }
}

impl From<EstimatorError> for Failure {
    fn from(e: EstimatorError) -> Failure {
        // Malformed requests (bad column names, out-of-range knobs) are usage
        // errors; everything else is the estimator declining the data.
        match e {
            EstimatorError::UnknownColumn { .. }
            | EstimatorError::NonBinaryColumn { .. }
            | EstimatorError::InsufficientReplicates { .. }
            | EstimatorError::InvalidLevel { .. }
            | EstimatorError::LengthMismatch { .. }
            | EstimatorError::SingleTreatmentRequired { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    if let Ok(value) = std::env::var(PARALLELISM_VAR) {
        match value.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                // Ignore the error if a pool already exists; the variable is
                // best-effort by design.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
            _ => {
                eprintln!("{PARALLELISM_VAR} must be a positive integer, not {value:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(message)) => {
            eprintln!("{message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Dsep(args) => cmd_dsep(args),
        Command::Paths(args) => cmd_paths(args),
        Command::AdjustCheck(args) => cmd_adjust_check(args),
        Command::Intervene(args) => cmd_intervene(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Catalog(args) => cmd_catalog(args),
        Command::ExportDot(args) => cmd_export_dot(args),
    }
}

// ── Graph queries ────────────────────────────────────────────────────────────

fn cmd_dsep(args: DsepArgs) -> CmdResult {
    let dag = load_dag(&args.dag)?;
    let given: BTreeSet<String> = args.given.into_iter().collect();
    let separated =
        dag.d_separated(&args.x, &args.y, &given).map_err(|e| Failure::usage(e.to_string()))?;
    if separated {
        println!("d-separated");
        return Ok(ExitCode::SUCCESS);
    }
    println!("d-connected");
    if args.verbose {
        let open =
            dag.open_paths(&args.x, &args.y, &given).map_err(|e| Failure::usage(e.to_string()))?;
        for path in open {
            println!("  {}", path.render());
        }
    }
    Ok(ExitCode::from(1))
}

fn cmd_paths(args: PathsArgs) -> CmdResult {
    let dag = load_dag(&args.dag)?;
    let given: BTreeSet<String> = args.given.into_iter().collect();
    let listed = if args.backdoor_only {
        dag.backdoor_paths(&args.from, &args.to)
    } else {
        dag.all_paths(&args.from, &args.to)
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let open = dag
        .open_paths(&args.from, &args.to, &given)
        .map_err(|e| Failure::usage(e.to_string()))?;
    if listed.is_empty() {
        println!("no paths");
        return Ok(ExitCode::SUCCESS);
    }
    for path in &listed {
        let status = if open.contains(path) { "open" } else { "blocked" };
        let kind = if path.is_backdoor() { ", backdoor" } else { "" };
        println!("{}  [{status}{kind}]", path.render());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_adjust_check(args: AdjustCheckArgs) -> CmdResult {
    let dag = load_dag(&args.dag)?;
    let set: BTreeSet<String> = args.set.into_iter().collect();
    let valid = dag
        .is_valid_adjustment_set(&args.treatment, &args.outcome, &set)
        .map_err(|e| Failure::usage(e.to_string()))?;
    if valid {
        println!("valid adjustment set");
        return Ok(ExitCode::SUCCESS);
    }
    println!("invalid adjustment set");
    if args.verbose {
        let backdoor = dag
            .backdoor_paths(&args.treatment, &args.outcome)
            .map_err(|e| Failure::usage(e.to_string()))?;
        let open = dag
            .open_paths(&args.treatment, &args.outcome, &set)
            .map_err(|e| Failure::usage(e.to_string()))?;
        for path in backdoor {
            if open.contains(&path) {
                println!("  open backdoor: {}", path.render());
            }
        }
    }
    Ok(ExitCode::from(1))
}

// ── Interventions and simulation ─────────────────────────────────────────────

fn cmd_intervene(args: InterveneArgs) -> CmdResult {
    let text = read_file(&args.file)?;
    let assignments = parse_assignments(&args.set)?;
    let output = if is_model_file(&text) {
        let model = StructuralModel::from_json(&text).map_err(Failure::usage)?;
        let mut values = BTreeMap::new();
        for (name, value) in assignments {
            let value = value.ok_or_else(|| {
                Failure::usage(format!("model intervention needs {name}=VALUE"))
            })?;
            values.insert(name, value);
        }
        let cut = model.apply_intervention(&values).map_err(|e| Failure::usage(e.to_string()))?;
        cut.to_json()
    } else {
        let dag = CausalDag::from_json(&text).map_err(Failure::usage)?;
        let targets: BTreeSet<String> = assignments.into_iter().map(|(name, _)| name).collect();
        let cut = dag.intervene(&targets).map_err(|e| Failure::usage(e.to_string()))?;
        cut.to_json()
    };
    emit(args.out.as_deref(), &ensure_newline(output))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    if args.n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let model = StructuralModel::from_json(&read_file(&args.model)?).map_err(Failure::usage)?;
    let data = model.simulate(args.n, args.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let csv = data.to_csv_string().map_err(|e| Failure::usage(e.to_string()))?;
    emit(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

// ── Estimation ───────────────────────────────────────────────────────────────

fn cmd_estimate(args: EstimateArgs) -> CmdResult {
    let file = fs::File::open(&args.data)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.data.display())))?;
    let data = Dataset::from_csv_reader(file).map_err(|e| Failure::usage(e.to_string()))?;
    if args.bootstrap.is_some()
        && !matches!(args.method, MethodArg::Ols | MethodArg::IptwMsm | MethodArg::GFormula)
    {
        return Err(Failure::usage("--bootstrap only applies to ols, iptw-msm, and g-formula"));
    }

    match args.method {
        MethodArg::Ols => {
            let terms = parse_terms(&args.terms, "--terms")?;
            let fit = |d: &Dataset| fit_ols(d, &args.outcome, &terms);
            let report = maybe_bootstrap(&data, fit, &args)?;
            emit_report(&report, args.format);
        }
        MethodArg::Standardize => {
            let treatment = args
                .treatment
                .as_deref()
                .ok_or_else(|| Failure::usage("standardize needs --treatment"))?;
            let result = standardize(&data, treatment, &args.outcome, &args.adjust)?;
            match args.format {
                Format::Text => {
                    println!("term       estimate");
                    println!("untreated  {}", fmt_sig(result.mean_untreated));
                    println!("treated    {}", fmt_sig(result.mean_treated));
                    println!("ate        {}", fmt_sig(result.ate));
                    println!("n={} strata={}", result.n, result.n_strata);
                }
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&result).expect("means serialize")
                    );
                }
                Format::Csv => {
                    println!("mean_untreated,mean_treated,ate,n,n_strata");
                    println!(
                        "{},{},{},{},{}",
                        result.mean_untreated, result.mean_treated, result.ate, result.n,
                        result.n_strata
                    );
                }
            }
        }
        MethodArg::IptwMsm => {
            let config = weight_config(&args)?;
            let terms = if args.terms.is_empty() {
                treatment_products(&config.treatments)
            } else {
                parse_terms(&args.terms, "--terms")?
            };
            let stabilized = !args.unstabilized;
            let fit = |d: &Dataset| {
                let weights = iptw_weights_with(d, &config, stabilized)?;
                fit_msm(d, &weights, &args.outcome, &terms)
            };
            let report = maybe_bootstrap(&data, fit, &args)?;
            emit_report(&report, args.format);
        }
        MethodArg::GFormula => {
            if args.treatments.is_empty() {
                return Err(Failure::usage("g-formula needs --treatments"));
            }
            let blocks = parse_blocks(
                args.confounders.as_deref().unwrap_or_default(),
                args.treatments.len(),
                "--confounders",
            )?;
            match &args.regime {
                Some(regime) => {
                    let mean =
                        g_formula(&data, &args.treatments, &blocks, &args.outcome, regime)?;
                    match args.format {
                        Format::Text => {
                            println!("regime {} mean {}", join_bits(regime), fmt_sig(mean));
                        }
                        Format::Json => println!(
                            "{}",
                            serde_json::to_string_pretty(
                                &serde_json::json!({ "regime": regime, "mean": mean })
                            )
                            .expect("mean serializes")
                        ),
                        Format::Csv => {
                            println!("regime,mean");
                            println!("{},{mean}", join_bits(regime));
                        }
                    }
                }
                None => {
                    let fit = |d: &Dataset| {
                        g_formula_msm(d, &args.treatments, &blocks, &args.outcome)
                    };
                    let report = maybe_bootstrap(&data, fit, &args)?;
                    emit_report(&report, args.format);
                }
            }
        }
        MethodArg::Its => {
            let time = args.time.as_deref().ok_or_else(|| Failure::usage("its needs --time"))?;
            let interruption = args
                .interruption
                .ok_or_else(|| Failure::usage("its needs --interruption"))?;
            let t = data.column(time).map_err(|e| Failure::usage(e.to_string()))?;
            let y = data.column(&args.outcome).map_err(|e| Failure::usage(e.to_string()))?;
            let series: Vec<(f64, f64)> = t.iter().copied().zip(y.iter().copied()).collect();
            let report = its_segmented(&series, interruption)?;
            emit_report(&report, args.format);
        }
        MethodArg::Rd => {
            let running =
                args.running.as_deref().ok_or_else(|| Failure::usage("rd needs --running"))?;
            let cutoff = args.cutoff.ok_or_else(|| Failure::usage("rd needs --cutoff"))?;
            let bandwidth =
                args.bandwidth.ok_or_else(|| Failure::usage("rd needs --bandwidth"))?;
            let report = rd_estimate(&data, running, &args.outcome, cutoff, bandwidth)?;
            emit_report(&report, args.format);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Run the fit directly, or wrap it in percentile-bootstrap resampling when
/// `--bootstrap` was given.
fn maybe_bootstrap<F>(data: &Dataset, fit: F, args: &EstimateArgs) -> Result<CoefficientReport, Failure>
where
    F: Fn(&Dataset) -> Result<CoefficientReport, EstimatorError> + Sync,
{
    match args.bootstrap {
        Some(replicates) => {
            let seed = args.seed.expect("clap enforces --seed with --bootstrap");
            Ok(bootstrap_ci(data, fit, replicates, args.level, seed)?)
        }
        None => Ok(fit(data)?),
    }
}

// ── Scenario reproduction and catalog ────────────────────────────────────────

fn cmd_reproduce(args: ReproduceArgs) -> CmdResult {
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|name| name.parse().map_err(|e: causal_core::ScenarioError| Failure::usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let report = reproduce(&args.id, &methods, args.n, args.seed, args.replicates)
        .map_err(|e| Failure::usage(e.to_string()))?;
    match args.format {
        Format::Text => print!("{}", ensure_newline(report.text_table())),
        Format::Json => println!("{}", report.to_json()),
        Format::Csv => print_reproduction_csv(&report),
    }
    if report.all_expected() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_catalog(args: CatalogArgs) -> CmdResult {
    match args.export {
        Some(id) => {
            let spec = catalog()
                .into_iter()
                .find(|s| s.id == id)
                .ok_or_else(|| Failure::usage(format!("unknown scenario: {id}")))?;
            println!("{}", spec.model.to_json());
        }
        None => {
            for spec in catalog() {
                println!("{:<24} {}", spec.id, spec.description);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_export_dot(args: ExportDotArgs) -> CmdResult {
    let text = read_file(&args.file)?;
    let dag = if is_model_file(&text) {
        StructuralModel::from_json(&text).map_err(Failure::usage)?.dag().clone()
    } else {
        CausalDag::from_json(&text).map_err(Failure::usage)?
    };
    let highlight = match &args.highlight {
        Some(pair) if pair.len() == 2 => Some((pair[0].as_str(), pair[1].as_str())),
        Some(_) => return Err(Failure::usage("--highlight takes exactly TREATMENT,OUTCOME")),
        None => None,
    };
    let dot = dag.to_dot(highlight).map_err(|e| Failure::usage(e.to_string()))?;
    emit(args.out.as_deref(), &dot)?;
    Ok(ExitCode::SUCCESS)
}

// ── Small helpers ────────────────────────────────────────────────────────────

fn read_file(path: &std::path::Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_dag(path: &std::path::Path) -> Result<CausalDag, Failure> {
    CausalDag::from_json(&read_file(path)?).map_err(Failure::usage)
}

/// Model files carry an "equations" object; plain DAG files do not.
fn is_model_file(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .map(|v| v.get("equations").is_some())
        .unwrap_or(false)
}

fn emit(out: Option<&std::path::Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn ensure_newline(mut text: String) -> String {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text
}

/// "X=1" → (X, Some(1.0)); "X" → (X, None).
fn parse_assignments(items: &[String]) -> Result<Vec<(String, Option<f64>)>, Failure> {
    items
        .iter()
        .map(|item| match item.split_once('=') {
            Some((name, value)) => {
                let parsed = value
                    .parse::<f64>()
                    .map_err(|_| Failure::usage(format!("bad value in {item:?}")))?;
                Ok((name.trim().to_string(), Some(parsed)))
            }
            None => Ok((item.trim().to_string(), None)),
        })
        .collect()
}

/// "X1,X2,X1*X2" (already comma-split by clap) → term component lists.
fn parse_terms(items: &[String], flag: &str) -> Result<Vec<Vec<String>>, Failure> {
    if items.is_empty() {
        return Err(Failure::usage(format!("{flag} must name at least one term")));
    }
    Ok(items
        .iter()
        .map(|item| item.split('*').map(|part| part.trim().to_string()).collect())
        .collect())
}

/// "X1,L2|X2,L3" → one column list per period; empty segments are empty
/// blocks. The block count must match the treatment count.
fn parse_blocks(text: &str, periods: usize, flag: &str) -> Result<Vec<Vec<String>>, Failure> {
    let blocks: Vec<Vec<String>> = text
        .split('|')
        .map(|block| {
            block
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .collect();
    if text.is_empty() {
        return Ok(vec![Vec::new(); periods]);
    }
    if blocks.len() != periods {
        return Err(Failure::usage(format!(
            "{flag} has {} block(s) for {periods} treatment(s)",
            blocks.len()
        )));
    }
    Ok(blocks)
}

fn weight_config(args: &EstimateArgs) -> Result<WeightConfig, Failure> {
    if args.treatments.is_empty() {
        return Err(Failure::usage("iptw-msm needs --treatments"));
    }
    let denominators = args
        .denominators
        .as_deref()
        .ok_or_else(|| Failure::usage("iptw-msm needs --denominators"))?;
    let denominator_given = parse_blocks(denominators, args.treatments.len(), "--denominators")?;
    let numerator_given = parse_blocks(
        args.numerators.as_deref().unwrap_or_default(),
        args.treatments.len(),
        "--numerators",
    )?;
    Ok(WeightConfig {
        treatments: args.treatments.clone(),
        denominator_given,
        numerator_given,
    })
}

/// Every non-empty product of the treatments, smallest first — the saturated
/// design without its intercept.
fn treatment_products(treatments: &[String]) -> Vec<Vec<String>> {
    causal_core::scm::saturated_terms(treatments)
        .into_iter()
        .filter(|term| term.mask != 0)
        .map(|term| {
            treatments
                .iter()
                .enumerate()
                .filter(|(i, _)| term.mask >> i & 1 == 1)
                .map(|(_, name)| name.clone())
                .collect()
        })
        .collect()
}

fn join_bits(regime: &[u8]) -> String {
    regime.iter().map(u8::to_string).collect::<Vec<String>>().join(",")
}

fn emit_report(report: &CoefficientReport, format: Format) {
    match format {
        Format::Text => print!("{}", ensure_newline(report.text_table())),
        Format::Json => println!("{}", report.to_json()),
        Format::Csv => {
            println!("term,estimate,se,t,p,ci_low,ci_high");
            for row in &report.rows {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                let (lo, hi) = match row.ci {
                    Some((lo, hi)) => (lo.to_string(), hi.to_string()),
                    None => (String::new(), String::new()),
                };
                println!(
                    "{},{},{},{},{},{lo},{hi}",
                    csv_field(&row.term),
                    row.estimate,
                    opt(row.se),
                    opt(row.t),
                    opt(row.p)
                );
            }
        }
    }
}

fn print_reproduction_csv(report: &ReproductionReport) {
    println!("term,method,truth,reported,estimate,ci_low,ci_high,verdict,note");
    for row in &report.rows {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let (lo, hi) = match row.ci {
            Some((lo, hi)) => (lo.to_string(), hi.to_string()),
            None => (String::new(), String::new()),
        };
        println!(
            "{},{},{},{},{},{lo},{hi},{},{}",
            csv_field(&row.term),
            row.method,
            row.truth,
            opt(row.reported),
            opt(row.estimate),
            row.verdict,
            csv_field(row.note.as_deref().unwrap_or_default())
        );
    }
}

/// Quote a CSV field only when it needs it.
fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}
