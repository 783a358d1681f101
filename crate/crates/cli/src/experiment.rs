//! Batch experiments: one TOML config, per-seed JSON records, an aggregate
//! table and a checks table. Seeds run concurrently; every table is ordered
//! by config position, cutoff and seed, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use modbisect::bounds::{chung_lu_upper_report, pk_evaluate, spectral_gap};
use modbisect::generators::ModelSpec;
use modbisect::matching::{claim_window_check, greedy_matching_with, verify_no_short_loops, MatchingSummary};
use modbisect::pipeline::{partition_bulk_split, partition_no_cutoff};
use modbisect::report::{degree_law_fit, Summary};
use modbisect::{MatchingOptions, PipelineOptions, PipelineResult, Route};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::provenance::{config_hash, Provenance};
use crate::{write_output, CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Report directory, relative to the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Bisection pipeline on each sample.
    Pipeline,
    /// Strict greedy matching with exhaustive verification and the window check.
    Matching,
    /// Empirical degree law against the limiting `p_k` (PA models).
    DegreeLaw,
    /// Normalized-Laplacian gap, with the Chung-Lu benchmark for Chung-Lu models.
    Spectral,
}

fn default_route() -> Route {
    Route::BulkSplit
}

fn default_c_grid() -> Vec<f64> {
    vec![2.0]
}

fn default_k_range() -> [usize; 2] {
    [3, 30]
}

fn default_pk_k_max() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub task: Task,
    pub model: ModelSpec,
    pub seeds: Vec<u64>,
    #[serde(default = "default_route")]
    pub route: Route,
    /// Cutoffs of the bulk-split route.
    #[serde(default = "default_c_grid")]
    pub c_grid: Vec<f64>,
    /// Pipeline options; the seed is replaced by each run's seed.
    #[serde(default)]
    pub options: PipelineOptions,
    /// Degree range compared by the degree-law task.
    #[serde(default = "default_k_range")]
    pub k_range: [usize; 2],
    #[serde(default = "default_pk_k_max")]
    pub pk_k_max: usize,
    #[serde(default)]
    pub checks: Vec<Check>,
}

/// Gate on a per-seed metric: at least `min_count` seeds (all when absent)
/// satisfy the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub metric: String,
    #[serde(default)]
    pub at_least: Option<f64>,
    #[serde(default)]
    pub at_most: Option<f64>,
    #[serde(default)]
    pub min_count: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
struct Record {
    c_cutoff: Option<f64>,
    metrics: BTreeMap<String, f64>,
    detail: Value,
}

struct SeedOutput {
    records: Vec<Record>,
    degrees: Option<Vec<usize>>,
}

fn flag(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

fn pipeline_metrics(r: &PipelineResult) -> BTreeMap<String, f64> {
    let d = &r.diagnostics;
    let mut m = BTreeMap::new();
    m.insert("q_achieved".into(), r.q_achieved);
    m.insert("theoretical_bound".into(), r.theoretical_bound);
    m.insert("bound_vacuous".into(), flag(r.bound_vacuous));
    m.insert("cut_fraction".into(), d.cut_fraction);
    m.insert("c_eff".into(), d.c_eff);
    m.insert("bisection_achieved".into(), flag(d.bisection_achieved));
    m.insert("retries".into(), d.retries as f64);
    m.insert("remainder_size".into(), d.remainder_size as f64);
    m.insert("short_loops_verified".into(), flag(d.short_loops_verified == Some(true)));
    if let Some(c) = r.corrected_bound {
        m.insert("corrected_bound".into(), c);
    }
    if let Some(g) = d.gamma {
        m.insert("gamma".into(), g);
    }
    if let Some(t) = d.theta {
        m.insert("theta".into(), t);
    }
    if let Some(l) = r.leading_term {
        m.insert("leading_term".into(), l);
    }
    if let Some(l) = r.leading_ratio {
        m.insert("leading_ratio".into(), l);
    }
    m
}

fn run_seed(spec: &ExperimentSpec, seed: u64) -> CliResult<SeedOutput> {
    let g = spec.model.generate(seed)?;
    let mut records = Vec::new();
    let mut degrees = None;
    match spec.task {
        Task::Pipeline => {
            let opts = PipelineOptions { seed, ..spec.options.clone() };
            let cutoffs: Vec<Option<f64>> = match spec.route {
                Route::NoCutoff => vec![None],
                Route::BulkSplit => spec.c_grid.iter().copied().map(Some).collect(),
            };
            for c in cutoffs {
                let r = match c {
                    None => partition_no_cutoff(&g, &opts)?,
                    Some(c) => partition_bulk_split(&g, c, &opts)?,
                };
                records.push(Record { c_cutoff: c, metrics: pipeline_metrics(&r), detail: json!(r) });
            }
        }
        Task::Matching => {
            let opts = MatchingOptions { record_trace: true, ..spec.options.matching.clone() };
            let run = greedy_matching_with(&g, &opts)?;
            let verify = verify_no_short_loops(&g, &run.matching)?;
            let claim = run.trace.as_ref().map(|t| claim_window_check(&g, t)).transpose()?;
            let summary = MatchingSummary::from(&run.matching);
            let m = &run.matching;
            let mut metrics = BTreeMap::new();
            metrics.insert("pairs".into(), m.len() as f64);
            metrics.insert("unmatched".into(), m.unmatched_count() as f64);
            metrics.insert("bandwidth".into(), m.bandwidth_observed() as f64);
            metrics.insert("delta9_budget".into(), m.delta9_budget() as f64);
            metrics.insert("verified".into(), flag(verify.passed()));
            metrics.insert("unmatched_in_tail".into(), flag(m.unmatched_in_tail()));
            if let Some(c) = &claim {
                metrics.insert("claim_passed".into(), flag(c.passed()));
            }
            records.push(Record {
                c_cutoff: None,
                metrics,
                detail: json!({ "matching": summary, "short_loops": verify, "claim": claim }),
            });
        }
        Task::DegreeLaw => {
            let ModelSpec::Pam { m, delta, .. } = spec.model else {
                return Err(CliError::Invalid(format!("experiment {}: degree_law needs a pam model", spec.name)));
            };
            let law = pk_evaluate(m, delta, spec.pk_k_max)?;
            let d = g.degrees();
            let fit = degree_law_fit(std::slice::from_ref(&d), &law, spec.k_range[0], spec.k_range[1])?;
            let mut metrics = BTreeMap::new();
            metrics.insert("max_rel_error".into(), fit.max_rel_error);
            metrics.insert("loops".into(), g.loop_count() as f64);
            metrics.insert("multi_edges".into(), g.multi_edge_count() as f64);
            records.push(Record { c_cutoff: None, metrics, detail: json!({ "fit": fit }) });
            degrees = Some(d);
        }
        Task::Spectral => {
            let gap = spectral_gap(&g)?;
            let mut metrics = BTreeMap::new();
            metrics.insert("lambda_bar".into(), gap.lambda_bar);
            metrics.insert("mu_min".into(), gap.mu_min);
            metrics.insert("mu_max".into(), gap.mu_max);
            let mut detail = json!({ "lambda_bar": gap.lambda_bar, "mu_min": gap.mu_min, "mu_max": gap.mu_max });
            if let Some(w) = spec.model.chung_lu_weights()? {
                let r = chung_lu_upper_report(&w, &g)?;
                metrics.insert("benchmark".into(), r.benchmark);
                metrics.insert("within".into(), flag(r.within));
                detail["chung_lu"] = json!(r);
            }
            records.push(Record { c_cutoff: None, metrics, detail });
        }
    }
    Ok(SeedOutput { records, degrees })
}

fn validate(config: &ExperimentConfig) -> CliResult<()> {
    if config.experiments.is_empty() {
        return Err(CliError::Invalid("config lists no experiments".into()));
    }
    let mut names = std::collections::BTreeSet::new();
    for e in &config.experiments {
        if !names.insert(&e.name) {
            return Err(CliError::Invalid(format!("duplicate experiment name {:?}", e.name)));
        }
        if e.name.is_empty() || e.name.contains(['/', '\\']) || e.name.starts_with('.') {
            return Err(CliError::Invalid(format!("experiment name {:?} is not a plain directory name", e.name)));
        }
        if e.seeds.is_empty() {
            return Err(CliError::Invalid(format!("experiment {} has 0 seeds", e.name)));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(s) = e.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(CliError::Invalid(format!("experiment {} repeats seed {s}", e.name)));
        }
        if e.task == Task::Pipeline && e.route == Route::BulkSplit && e.c_grid.is_empty() {
            return Err(CliError::Invalid(format!("experiment {} has an empty c_grid", e.name)));
        }
        if e.k_range[0] > e.k_range[1] {
            return Err(CliError::Invalid(format!("experiment {} has an empty k_range", e.name)));
        }
        for c in &e.checks {
            if c.at_least.is_none() == c.at_most.is_none() {
                return Err(CliError::Invalid(format!(
                    "experiment {}: check on {} needs exactly one of at_least, at_most",
                    e.name, c.metric
                )));
            }
        }
    }
    Ok(())
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        format!("{x:.6}")
    } else {
        format!("{x:.6e}")
    }
}

fn fmt_c(c: Option<f64>) -> String {
    c.map_or_else(|| "-".into(), |c| c.to_string())
}

struct ExperimentResult<'a> {
    spec: &'a ExperimentSpec,
    /// `(seed, output)` in config seed order.
    seeds: Vec<(u64, SeedOutput)>,
}

impl ExperimentResult<'_> {
    fn cutoffs(&self) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for r in self.seeds.iter().flat_map(|(_, s)| &s.records) {
            if !out.contains(&r.c_cutoff) {
                out.push(r.c_cutoff);
            }
        }
        out
    }

    /// Per-seed values of `metric` at cutoff `c`, in seed order.
    fn values(&self, c: Option<f64>, metric: &str) -> Vec<f64> {
        self.seeds
            .iter()
            .flat_map(|(_, s)| &s.records)
            .filter(|r| r.c_cutoff == c)
            .filter_map(|r| r.metrics.get(metric).copied())
            .collect()
    }

    fn metric_names(&self, c: Option<f64>) -> Vec<String> {
        let mut names: Vec<String> = self
            .seeds
            .iter()
            .flat_map(|(_, s)| &s.records)
            .filter(|r| r.c_cutoff == c)
            .flat_map(|r| r.metrics.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    fn pooled(&self) -> CliResult<Option<BTreeMap<String, f64>>> {
        let lists: Vec<Vec<usize>> = self.seeds.iter().filter_map(|(_, s)| s.degrees.clone()).collect();
        let ModelSpec::Pam { m, delta, .. } = self.spec.model else { return Ok(None) };
        if lists.is_empty() {
            return Ok(None);
        }
        let law = pk_evaluate(m, delta, self.spec.pk_k_max)?;
        let fit = degree_law_fit(&lists, &law, self.spec.k_range[0], self.spec.k_range[1])?;
        let mut out = BTreeMap::new();
        out.insert("pooled_max_rel_error".to_string(), fit.max_rel_error);
        out.insert("pooled_worst_k".to_string(), fit.worst_k as f64);
        Ok(Some(out))
    }
}

const AGGREGATE_HEADER: &str = "experiment\ttask\tc\tmetric\tcount\tmean\tmin\tmax\n";
const CHECKS_HEADER: &str = "experiment\tc\tmetric\tcondition\tpassing\tseeds\trequired\tverdict\n";

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Pipeline => "pipeline",
        Task::Matching => "matching",
        Task::DegreeLaw => "degree_law",
        Task::Spectral => "spectral",
    }
}

fn aggregate(results: &[ExperimentResult]) -> CliResult<(String, String, usize)> {
    let mut table = String::from(AGGREGATE_HEADER);
    let mut checks = String::from(CHECKS_HEADER);
    let mut failed = 0;
    for res in results {
        let name = &res.spec.name;
        let task = task_name(res.spec.task);
        let pooled = res.pooled()?;
        for c in res.cutoffs() {
            for metric in res.metric_names(c) {
                if let Some(s) = Summary::of(&res.values(c, &metric)) {
                    table.push_str(&format!(
                        "{name}\t{task}\t{}\t{metric}\t{}\t{}\t{}\t{}\n",
                        fmt_c(c),
                        s.count,
                        fmt_num(s.mean),
                        fmt_num(s.min),
                        fmt_num(s.max)
                    ));
                }
            }
            for check in &res.spec.checks {
                let pooled_value = pooled.as_ref().and_then(|p| p.get(&check.metric).copied());
                let (values, seeds) = match pooled_value {
                    Some(v) if c.is_none() => (vec![v], 1),
                    _ => (res.values(c, &check.metric), res.spec.seeds.len()),
                };
                let (condition, passing) = match (check.at_least, check.at_most) {
                    (Some(t), _) => (format!(">= {t}"), Summary::count_at_least(&values, t)),
                    (_, Some(t)) => (format!("<= {t}"), Summary::count_at_most(&values, t)),
                    _ => unreachable!("validated"),
                };
                let required = check.min_count.unwrap_or(seeds);
                let pass = !values.is_empty() && passing >= required;
                failed += usize::from(!pass);
                checks.push_str(&format!(
                    "{name}\t{}\t{}\t{condition}\t{passing}\t{}\t{required}\t{}\n",
                    fmt_c(c),
                    check.metric,
                    values.len(),
                    if pass { "PASS" } else { "FAIL" }
                ));
            }
        }
        if let Some(pooled) = pooled {
            for (metric, v) in pooled {
                let f = fmt_num(v);
                table.push_str(&format!("{name}\t{task}\t-\t{metric}\t{}\t{f}\t{f}\t{f}\n", res.seeds.len()));
            }
        }
    }
    Ok((table, checks, failed))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let config: ExperimentConfig =
        toml::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    validate(&config)?;
    Ok(config)
}

pub fn cmd_experiment(config_path: &Path, out_dir: Option<&Path>, jobs: Option<usize>) -> CliResult<()> {
    let mut config = load_config(config_path)?;
    let out = match (out_dir, &config.output_dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("reports").join(&config.name),
    };
    config.output_dir = Some(out.clone());
    // The report location does not change any number.
    let hash = config_hash(&ExperimentConfig { output_dir: None, ..config.clone() });

    let work: Vec<(usize, u64)> = config
        .experiments
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let outputs: Vec<CliResult<SeedOutput>> =
        pool.install(|| work.par_iter().map(|&(i, seed)| run_seed(&config.experiments[i], seed)).collect());

    let mut results: Vec<ExperimentResult> =
        config.experiments.iter().map(|spec| ExperimentResult { spec, seeds: Vec::new() }).collect();
    for (&(i, seed), output) in work.iter().zip(outputs) {
        results[i].seeds.push((seed, output?));
    }

    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    for res in &results {
        let dir = out.join(&res.spec.name);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        for (seed, output) in &res.seeds {
            let prov = Provenance { config_hash: hash.clone(), ..Provenance::new("experiment", &(), Some(*seed)) };
            let record = json!({
                "provenance": prov,
                "experiment": res.spec.name,
                "task": res.spec.task,
                "model": res.spec.model,
                "records": output.records,
            });
            let text = serde_json::to_string_pretty(&record).map_err(|e| CliError::Invalid(e.to_string()))? + "\n";
            write_output(Some(&dir.join(format!("seed_{seed}.json"))), &text)?;
        }
    }
    let (table, checks, failed) = aggregate(&results)?;
    write_output(Some(&out.join("aggregate.tsv")), &table)?;
    write_output(Some(&out.join("checks.tsv")), &checks)?;
    let emitted = toml::to_string(&config).map_err(|e| CliError::Invalid(e.to_string()))?;
    write_output(Some(&out.join("config.toml")), &emitted)?;
    let manifest = json!({
        "provenance": Provenance { config_hash: hash.clone(), ..Provenance::new("experiment", &(), None) },
        "config": config.name,
        "experiments": config.experiments.len(),
        "seed_runs": work.len(),
        "checks_failed": failed,
    });
    write_output(Some(&out.join("manifest.json")), &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
    print!("{checks}");
    eprintln!("wrote {} seed runs to {} ({failed} checks failed)", work.len(), out.display());
    Ok(())
}
