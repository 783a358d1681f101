//! `modbisect`: generate graph models, run the bisection pipelines, evaluate
//! bounds and run batch experiments. All numbers come from the library.

mod experiment;
mod provenance;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modbisect::bisection::ActiveUpdate;
use modbisect::bounds::{
    bound_main, bound_moments, bound_no_cutoff, bound_powerlaw, bound_removed_degrees, pk_evaluate,
    powerlaw_tail_a, spectral_gap, Prefactor,
};
use modbisect::generators::ModelSpec;
use modbisect::io::{parse_partition, read_graph, write_edge_list, write_partition};
use modbisect::modularity::score_report;
use modbisect::pipeline::{partition_bulk_split, partition_no_cutoff, split_bulk, BulkWeights};
use modbisect::{Graph, MatchingMode, MatchingOptions, PipelineOptions, PipelineResult, Route, SimplifyReport};
use serde::Serialize;
use serde_json::json;

use provenance::Provenance;

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: unreadable input or unwritable output.
    Io(String),
    /// Exit 2: invalid parameters or inputs the library rejects.
    Invalid(String),
    /// Exit 3: `--strict` and the bisection bound was never reached.
    NotAchieved(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::NotAchieved(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Invalid(m) | CliError::NotAchieved(m) => m,
        }
    }
}

impl From<modbisect::Error> for CliError {
    fn from(e: modbisect::Error) -> Self {
        match e {
            modbisect::Error::Parse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "modbisect", version = env!("MODBISECT_VERSION"))]
#[command(about = "High-modularity bipartitions via matching-based weight-balanced bisection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph model and write it as an edge list.
    Generate(GenerateArgs),
    /// Run a bisection pipeline on an edge list.
    Partition(PartitionArgs),
    /// Score a partition of an edge list.
    Score(ScoreArgs),
    /// Evaluate a closed-form bound.
    Bound(BoundArgs),
    /// Normalized-Laplacian spectral gap of an edge list.
    Spectral(SpectralArgs),
    /// Run the experiments of a TOML config and write per-seed JSON plus aggregate tables.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Gnp,
    ChungLu,
    Pam,
    Regular,
    CompleteBipartite,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Vertex count (all models but complete-bipartite).
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (gnp).
    #[arg(long)]
    p: Option<f64>,
    /// Weight, or the largest weight of a ramp (chung-lu).
    #[arg(long)]
    w: Option<f64>,
    /// Smallest weight of a linear ramp (chung-lu); constant weights when absent.
    #[arg(long)]
    w_min: Option<f64>,
    /// Edges per arriving vertex (pam).
    #[arg(long)]
    m: Option<usize>,
    /// Attachment offset, -m < delta < m (pam).
    #[arg(long)]
    delta: Option<f64>,
    /// Degree (regular).
    #[arg(long)]
    d: Option<usize>,
    /// Part sizes (complete-bipartite).
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn need<T: Copy>(value: Option<T>, flag: &str, model: ModelKind) -> CliResult<T> {
    value.ok_or_else(|| CliError::Invalid(format!("--{flag} is required for model {model:?}")))
}

impl GenerateArgs {
    fn spec(&self) -> CliResult<ModelSpec> {
        let k = self.model;
        Ok(match k {
            ModelKind::Gnp => ModelSpec::Gnp { n: need(self.n, "n", k)?, p: need(self.p, "p", k)? },
            ModelKind::ChungLu => ModelSpec::ChungLu { n: need(self.n, "n", k)?, w: need(self.w, "w", k)?, w_min: self.w_min },
            ModelKind::Pam => {
                ModelSpec::Pam { m: need(self.m, "m", k)?, delta: need(self.delta, "delta", k)?, n: need(self.n, "n", k)? }
            }
            ModelKind::Regular => ModelSpec::Regular { n: need(self.n, "n", k)?, d: need(self.d, "d", k)? },
            ModelKind::CompleteBipartite => ModelSpec::CompleteBipartite { a: need(self.a, "a", k)?, b: need(self.b, "b", k)? },
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum RouteArg {
    NoCutoff,
    BulkSplit,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum UpdateArg {
    Flip,
    Resample,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum MatchingArg {
    Permissive,
    Strict,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum WeightsArg {
    Induced,
    Full,
}

#[derive(Args, Serialize)]
struct PipelineFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bisection retry budget.
    #[arg(long, default_value_t = modbisect::bisection::DEFAULT_MAX_RETRIES)]
    max_retries: usize,
    /// High-degree randomizations (bulk-split route).
    #[arg(long, default_value_t = modbisect::pipeline::DEFAULT_OUTER_RETRIES)]
    outer_retries: usize,
    /// Second-step rule of the bisection.
    #[arg(long, value_enum, default_value_t = UpdateArg::Flip)]
    update: UpdateArg,
    /// Greedy matching mode.
    #[arg(long, value_enum, default_value_t = MatchingArg::Permissive)]
    matching: MatchingArg,
    /// Alternation depth 1..=3 of the permissive matching; automatic when absent.
    #[arg(long)]
    depth: Option<usize>,
    /// Vertex weights of the bulk bisection.
    #[arg(long, value_enum, default_value_t = WeightsArg::Induced)]
    bulk_weights: WeightsArg,
    /// Skip the exhaustive short-loop verification.
    #[arg(long)]
    no_verify: bool,
}

impl PipelineFlags {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            seed: self.seed,
            max_retries: self.max_retries,
            outer_retries: self.outer_retries,
            update: match self.update {
                UpdateArg::Flip => ActiveUpdate::Flip,
                UpdateArg::Resample => ActiveUpdate::Resample,
            },
            matching: MatchingOptions {
                mode: match self.matching {
                    MatchingArg::Permissive => MatchingMode::Permissive,
                    MatchingArg::Strict => MatchingMode::Strict,
                },
                depth: self.depth,
                record_trace: false,
            },
            verify: !self.no_verify,
            bulk_weights: match self.bulk_weights {
                WeightsArg::Induced => BulkWeights::Induced,
                WeightsArg::Full => BulkWeights::Full,
            },
        }
    }
}

#[derive(Args, Serialize)]
struct InputFlags {
    /// Edge-list file.
    #[arg(long)]
    input: PathBuf,
    /// Accept loops and parallel edges and remove them before processing.
    #[arg(long)]
    simplify: bool,
}

#[derive(Serialize)]
struct InputInfo {
    path: String,
    sha256: String,
    n: usize,
    m: usize,
    simplified: Option<SimplifyReport>,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

impl InputFlags {
    fn load(&self) -> CliResult<(Graph, InputInfo)> {
        let text = read_text(&self.input)?;
        let (g, simplified) = if self.simplify {
            let (g, report) = read_graph(&text, true)?.simplify();
            (g, Some(report))
        } else {
            (read_graph(&text, false)?, None)
        };
        let info = InputInfo {
            path: self.input.display().to_string(),
            sha256: provenance::sha256_hex(text.as_bytes()),
            n: g.n(),
            m: g.m(),
            simplified,
        };
        Ok((g, info))
    }
}

#[derive(Args, Serialize)]
struct PartitionArgs {
    #[command(flatten)]
    input: InputFlags,
    #[arg(long, value_enum, default_value_t = RouteArg::BulkSplit)]
    route: RouteArg,
    /// Degree cutoff C (> 1) of the bulk-split route; comma separated for a sweep.
    #[arg(long = "c", value_delimiter = ',', default_values_t = vec![2.0])]
    c_grid: Vec<f64>,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Result JSON; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    json: Option<PathBuf>,
    /// Partition file of the best run (`vertex part` per line).
    #[arg(long)]
    #[serde(skip)]
    partition_out: Option<PathBuf>,
    /// Exit with code 3 when the bisection bound was never reached.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Serialize)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputFlags,
    /// Partition file (one part label per line).
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    json: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[command(subcommand)]
    bound: BoundCommand,
    #[arg(long, global = true)]
    #[serde(skip)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum PrefactorArg {
    Statement,
    Proof,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
enum BoundCommand {
    /// Main bound from explicit parameters.
    Main {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dbar: f64,
        #[arg(long)]
        delta_max: usize,
        #[arg(long = "c")]
        c_cutoff: f64,
        #[arg(long)]
        gamma: f64,
    },
    /// Main bound with parameters measured on a graph (gamma from the bulk split).
    Graph {
        #[command(flatten)]
        input: InputFlags,
        #[arg(long = "c", default_value_t = 2.0)]
        c_cutoff: f64,
    },
    /// Bound for graphs of small maximum degree.
    NoCutoff {
        #[command(flatten)]
        input: InputFlags,
    },
    /// Power-law bound; `a` is fitted from `--input` when not given.
    Powerlaw {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        dbar: Option<f64>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Bound from a bounded kappa-th degree moment.
    Moments {
        #[command(flatten)]
        input: InputFlags,
        #[arg(long)]
        kappa: f64,
    },
    /// Bound with high degrees removed.
    Removed {
        #[command(flatten)]
        input: InputFlags,
        #[arg(long = "c", default_value_t = 2.0)]
        c_cutoff: f64,
        #[arg(long, value_enum, default_value_t = PrefactorArg::Statement)]
        prefactor: PrefactorArg,
    },
    /// Limiting degree law p_k of PA(m, delta).
    Pk {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        k_max: usize,
    },
}

#[derive(Args, Serialize)]
struct SpectralArgs {
    #[command(flatten)]
    input: InputFlags,
    /// Include the full spectrum.
    #[arg(long)]
    eigenvalues: bool,
    #[arg(long)]
    #[serde(skip)]
    json: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides `output_dir` of the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; all available cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
}

pub fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            }
            fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(path: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
    text.push('\n');
    write_output(path, &text)
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let spec = args.spec()?;
    let g = spec.generate(args.seed)?;
    let prov = Provenance::new("generate", args, Some(args.seed));
    let model = serde_json::to_string(&spec).map_err(|e| CliError::Invalid(e.to_string()))?;
    let comments = vec![
        format!("modbisect {} generate", prov.version),
        format!("model {model}"),
        format!("seed {} config_hash {}", args.seed, prov.config_hash),
    ];
    write_output(args.out.as_deref(), &write_edge_list(&g, &comments))
}

#[derive(Serialize)]
struct PartitionRun {
    c_cutoff: Option<f64>,
    result: PipelineResult,
}

fn cmd_partition(args: &PartitionArgs) -> CliResult<()> {
    let (g, info) = args.input.load()?;
    let opts = args.pipeline.options();
    let runs: Vec<PartitionRun> = match args.route {
        RouteArg::NoCutoff => vec![PartitionRun { c_cutoff: None, result: partition_no_cutoff(&g, &opts)? }],
        RouteArg::BulkSplit => {
            if args.c_grid.is_empty() {
                return Err(CliError::Invalid("--c needs at least one value".into()));
            }
            args.c_grid
                .iter()
                .map(|&c| Ok(PartitionRun { c_cutoff: Some(c), result: partition_bulk_split(&g, c, &opts)? }))
                .collect::<CliResult<_>>()?
        }
    };
    // First maximum, so ties resolve to the earliest C.
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.result.q_achieved > runs[b].result.q_achieved { i } else { b });
    let prov = Provenance::new("partition", args, Some(args.pipeline.seed));
    let route = match args.route {
        RouteArg::NoCutoff => Route::NoCutoff,
        RouteArg::BulkSplit => Route::BulkSplit,
    };
    let report = json!({
        "provenance": prov,
        "input": info,
        "route": route,
        "options": opts,
        "best_run": best,
        "best_c": runs[best].c_cutoff,
        "runs": runs,
    });
    emit_json(args.json.as_deref(), &report)?;
    if let Some(path) = &args.partition_out {
        write_output(Some(path), &write_partition(&runs[best].result.partition))?;
    }
    let achieved = runs[best].result.diagnostics.bisection_achieved;
    if args.strict && !achieved {
        return Err(CliError::NotAchieved(format!(
            "bisection bound not reached within {} retries",
            opts.max_retries
        )));
    }
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> CliResult<()> {
    let (g, info) = args.input.load()?;
    let p = parse_partition(&read_text(&args.partition)?, g.n())?;
    let report = score_report(&g, &p)?;
    let prov = Provenance::new("score", args, None);
    emit_json(args.json.as_deref(), &json!({ "provenance": prov, "input": info, "score": report }))
}

fn cmd_bound(args: &BoundArgs) -> CliResult<()> {
    let prov = Provenance::new("bound", args, None);
    let (report, input) = match &args.bound {
        BoundCommand::Main { n, dbar, delta_max, c_cutoff, gamma } => {
            (json!(bound_main(*n, *dbar, *delta_max, *c_cutoff, *gamma)?), None)
        }
        BoundCommand::Graph { input, c_cutoff } => {
            let (g, info) = input.load()?;
            let split = split_bulk(&g, *c_cutoff)?;
            let report = bound_main(g.n(), g.average_degree(), g.max_degree(), *c_cutoff, split.gamma)?;
            (json!(report), Some(info))
        }
        BoundCommand::NoCutoff { input } => {
            let (g, info) = input.load()?;
            (json!(bound_no_cutoff(&g.degrees())?), Some(info))
        }
        BoundCommand::Powerlaw { tau, a, dbar, input } => {
            let graph = match input {
                Some(path) => Some(InputFlags { input: path.clone(), simplify: true }.load()?),
                None => None,
            };
            let a = match (a, &graph) {
                (Some(a), _) => *a,
                (None, Some((g, _))) => powerlaw_tail_a(&g.degrees(), *tau)?,
                (None, None) => return Err(CliError::Invalid("powerlaw needs --a or --input".into())),
            };
            let dbar = match (dbar, &graph) {
                (Some(d), _) => *d,
                (None, Some((g, _))) => g.average_degree(),
                (None, None) => return Err(CliError::Invalid("powerlaw needs --dbar or --input".into())),
            };
            (json!(bound_powerlaw(*tau, a, dbar)?), graph.map(|(_, info)| info))
        }
        BoundCommand::Moments { input, kappa } => {
            let (g, info) = input.load()?;
            (json!(bound_moments(&g.degrees(), *kappa)?), Some(info))
        }
        BoundCommand::Removed { input, c_cutoff, prefactor } => {
            let (g, info) = input.load()?;
            let pref = match prefactor {
                PrefactorArg::Statement => Prefactor::Statement,
                PrefactorArg::Proof => Prefactor::Proof,
            };
            (json!(bound_removed_degrees(&g, *c_cutoff, pref)?), Some(info))
        }
        BoundCommand::Pk { m, delta, k_max } => (json!(pk_evaluate(*m, *delta, *k_max)?), None),
    };
    emit_json(args.json.as_deref(), &json!({ "provenance": prov, "input": input, "report": report }))
}

fn cmd_spectral(args: &SpectralArgs) -> CliResult<()> {
    let (g, info) = args.input.load()?;
    let gap = spectral_gap(&g)?;
    let prov = Provenance::new("spectral", args, None);
    let mut out = json!({
        "provenance": prov,
        "input": info,
        "lambda_bar": gap.lambda_bar,
        "mu_min": gap.mu_min,
        "mu_max": gap.mu_max,
    });
    if args.eigenvalues {
        out["eigenvalues"] = json!(gap.eigenvalues);
    }
    emit_json(args.json.as_deref(), &out)
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Score(a) => cmd_score(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Spectral(a) => cmd_spectral(a),
        Command::Experiment(a) => experiment::cmd_experiment(&a.config, a.out_dir.as_deref(), a.jobs),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
