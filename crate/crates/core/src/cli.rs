//! Command-line front end: ingest, query, simulate, bench, stats, prune
//! and set.
//!
//! Machine-readable results go to stdout as JSON; diagnostics go to
//! stderr. Exit codes: 0 success, 1 runtime failure, 2 validation failure.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ConfigError, ConfigFile, MemoryConfig, Profile, Violations};
use crate::harness::{run_workload, RunOptions};
use crate::memory::{MemoryStore, StoreError};
use crate::metrics::{aggregate, load_judgments, Judgment, Metric, MetricError, QrelsError};
use crate::persistence::{ingest_jsonl, load, save, IngestError, PersistError};
use crate::telemetry::{check_stabilization, export_csv, summarize, LatencyRecord, StatsSnapshot};
use crate::workload::{dump_stream, generate, synthetic_corpus, WorkloadError, WorkloadKind, WorkloadSpec};

/// Fraction of the run over which the remembered count must be constant.
pub const PLATEAU_FRACTION: f64 = 0.2;

#[derive(Debug, Parser)]
#[command(name = "arm", version, about = "Vector memory with selective remembrance and decay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a snapshot from a JSON Lines file of precomputed vectors
    Ingest(IngestArgs),
    /// Run one query against a snapshot
    Query(QueryArgs),
    /// Drive a synthetic workload and record memory dynamics
    Simulate(SimulateArgs),
    /// Score a judged query set (NDCG/Precision/Recall)
    Bench(BenchArgs),
    /// Print store statistics as JSON
    Stats(StatsArgs),
    /// Remove unremembered items below a strength threshold
    Prune(PruneArgs),
    /// Change theta, gamma or alpha of a snapshot
    Set(SetArgs),
}

/// theta/gamma/alpha overrides shared by several commands.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long)]
    pub theta: Option<i64>,
    #[arg(long)]
    pub gamma: Option<i64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub prune_threshold: Option<f64>,
}

impl Overrides {
    fn is_empty(&self) -> bool {
        self.theta.is_none() && self.gamma.is_none() && self.alpha.is_none() && self.prune_threshold.is_none()
    }

    fn apply(&self, base: MemoryConfig) -> Result<MemoryConfig, ConfigError> {
        ConfigFile {
            theta: self.theta,
            gamma: self.gamma,
            alpha: self.alpha,
            prune_threshold: self.prune_threshold,
            dimension: None,
        }
        .merge(base)
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "balanced")]
    pub profile: String,
    /// JSON config file; its values replace the profile's
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// L2-normalize every vector on ingest
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["vector", "target_id"])))]
pub struct QueryArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Comma-separated query components
    #[arg(long, allow_hyphen_values = true)]
    pub vector: Option<String>,
    /// Use a stored item's base vector as the query
    #[arg(long)]
    pub target_id: Option<String>,
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    /// Write the updated store back to the snapshot
    #[arg(long)]
    pub save_back: bool,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("corpus").required(true).args(["snapshot", "synthetic"])))]
pub struct SimulateArgs {
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Random unit-norm corpus: N D SEED
    #[arg(long, num_args = 3, value_names = ["N", "D", "SEED"])]
    pub synthetic: Option<Vec<u64>>,
    /// uniform | zipf:S | drift:S:T
    #[arg(long, default_value = "zipf:1.1")]
    pub workload: String,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Defaults to balanced for synthetic corpora, the snapshot's own
    /// settings otherwise
    #[arg(long)]
    pub profile: Option<String>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    /// Workload seed
    #[arg(long, env = "ARM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Per-step StatsSnapshot CSV
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-step latency CSV
    #[arg(long)]
    pub latency: Option<PathBuf>,
    /// Dump the query stream as step,target_id CSV
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Save the final store
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value = "ndcg,precision,recall", value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Update memory after every query (default)
    #[arg(long, conflicts_with = "frozen")]
    pub dynamic: bool,
    /// Static index: never update memory
    #[arg(long)]
    pub frozen: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Defaults to the snapshot's prune_threshold
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SetArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::InvalidValue(_) | StoreError::InvalidThreshold(_) | StoreError::InvalidK => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<WorkloadError> for CliError {
    fn from(e: WorkloadError) -> Self {
        match e {
            WorkloadError::InvalidSpec(_) => CliError::Validation(e.to_string()),
            WorkloadError::EmptyStore => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::UnknownMetric(_) | MetricError::InvalidK => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(PersistError, IngestError, QrelsError, std::io::Error, serde_json::Error);

fn invalid(v: Violations) -> CliError {
    CliError::Validation(format!("invalid configuration: {v}"))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a, out, err),
        Command::Query(a) => cmd_query(&a, out, err),
        Command::Simulate(a) => cmd_simulate(&a, out, err),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Prune(a) => cmd_prune(&a, out, err),
        Command::Set(a) => cmd_set(&a, out, err),
    }
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn cmd_ingest(a: &IngestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let profile: Profile = a.profile.parse()?;
    let items = ingest_jsonl(&a.input, a.normalize)?;
    let data_dim = items.first().map(|(_, v)| v.len());

    let mut config = MemoryConfig::profile(profile, data_dim.unwrap_or(0));
    if let Some(path) = &a.config {
        config = MemoryConfig::from_json_file(path, config)?;
    }
    config = a.overrides.apply(config)?;
    config.validate().map_err(invalid)?;
    if let Some(d) = data_dim {
        if d != config.dimension {
            return Err(StoreError::DimensionMismatch {
                expected: config.dimension,
                found: d,
            }
            .into());
        }
    }

    let mut store = MemoryStore::new(config)?;
    for (id, v) in &items {
        store.insert(id.as_str(), v)?;
    }
    save(&store, &a.out)?;
    writeln!(err, "ingested {} items (d={})", store.len(), store.dimension())?;
    print_json(
        out,
        &json!({"items": store.len(), "dimension": store.dimension(), "snapshot": a.out}),
    )
}

fn parse_vector(text: &str) -> Result<Vec<f32>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f32>()
                .map_err(|_| CliError::Validation(format!("'{t}' is not a number")))
        })
        .collect()
}

pub fn cmd_query(a: &QueryArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut store = load(&a.snapshot)?;
    let query = match (&a.vector, &a.target_id) {
        (Some(v), _) => parse_vector(v)?,
        (None, Some(id)) => store
            .get(id)
            .ok_or_else(|| StoreError::UnknownId(id.clone()))?
            .base_vector
            .to_vec(),
        (None, None) => unreachable!("clap enforces one query source"),
    };
    let (result, report) = store.query(&query, a.k)?;
    if a.save_back {
        save(&store, &a.snapshot)?;
        writeln!(err, "saved store at step {}", store.clock())?;
    }
    for p in &report.promoted {
        writeln!(err, "promoted {p}")?;
    }
    print_json(
        out,
        &json!({"step": result.step, "results": result.entries, "promoted": report.promoted}),
    )
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    #[serde(flatten)]
    run: crate::telemetry::RunSummary,
    stabilization: &'static str,
    target_hit_rate: f64,
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let kind: WorkloadKind = a.workload.parse()?;
    let mut store = match (&a.snapshot, &a.synthetic) {
        (Some(path), _) => {
            let mut store = load(path)?;
            let mut target = *store.config();
            if let Some(p) = &a.profile {
                let p = MemoryConfig::from_profile_name(p, target.dimension)?;
                (target.theta, target.gamma, target.alpha) = (p.theta, p.gamma, p.alpha);
            }
            let target = a.overrides.apply(target)?;
            store.set_gamma(target.gamma)?;
            store.set_alpha(target.alpha)?;
            store.set_theta(target.theta)?;
            store.set_prune_threshold(target.prune_threshold)?;
            store
        }
        (None, Some(syn)) => {
            let (n, d, seed) = (syn[0] as usize, syn[1] as usize, syn[2]);
            if n == 0 || d == 0 {
                return Err(CliError::Validation("--synthetic needs N >= 1 and D >= 1".into()));
            }
            let profile = a.profile.as_deref().unwrap_or("balanced");
            let config = a.overrides.apply(MemoryConfig::from_profile_name(profile, d)?)?;
            let mut store = MemoryStore::new(config)?;
            for (id, v) in synthetic_corpus(n, d, seed) {
                store.insert(id.as_str(), &v)?;
            }
            store
        }
        (None, None) => unreachable!("clap enforces one corpus source"),
    };
    if a.k == 0 {
        return Err(StoreError::InvalidK.into());
    }

    let spec = WorkloadSpec {
        kind,
        n_steps: a.steps,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    let queries = if a.steps == 0 {
        Vec::new()
    } else {
        let (ids, vecs): (Vec<_>, Vec<_>) = store
            .iter_sorted()
            .map(|v| (v.id.clone(), v.base_vector.to_vec()))
            .unzip();
        generate(&spec, &ids, &vecs)?
    };
    if let Some(path) = &a.dump {
        dump_stream(path, &spec, &queries)?;
    }

    let log = run_workload(&mut store, &queries, RunOptions::new(a.k))?;
    if let Some(path) = &a.report {
        export_csv::<StatsSnapshot>(&log.stats, path)?;
    }
    if let Some(path) = &a.latency {
        export_csv::<LatencyRecord>(&log.latency, path)?;
    }
    if let Some(path) = &a.out {
        save(&store, path)?;
    }

    let final_stats = store.stats();
    let stab = check_stabilization(&log.stats, PLATEAU_FRACTION);
    let verdict = match (log.stats.is_empty(), stab.passed()) {
        (true, _) => "SKIP",
        (false, true) => "PASS",
        (false, false) => "FAIL",
    };
    writeln!(
        err,
        "stabilization: {verdict} (non-decreasing: {}, constant over final {} steps: {})",
        stab.non_decreasing, stab.window, stab.plateau
    )?;
    let summary = SimulateSummary {
        run: summarize(&log.stats, &log.latency, &final_stats),
        stabilization: verdict,
        target_hit_rate: if queries.is_empty() {
            0.0
        } else {
            log.target_hits as f64 / queries.len() as f64
        },
    };
    print_json(out, &summary)
}

#[derive(Debug, Deserialize)]
struct BenchQuery {
    query_id: String,
    #[serde(default)]
    vector: Option<Vec<f32>>,
    #[serde(default)]
    target_id: Option<String>,
}

fn load_bench_queries(path: &Path) -> Result<Vec<BenchQuery>, CliError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q: BenchQuery =
            serde_json::from_str(&line).map_err(|e| CliError::Runtime(format!("queries line {}: {e}", i + 1)))?;
        if q.vector.is_none() == q.target_id.is_none() {
            return Err(CliError::Runtime(format!(
                "queries line {}: give exactly one of vector or target_id",
                i + 1
            )));
        }
        out.push(q);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct BenchSummary {
    mode: &'static str,
    k: usize,
    queries: usize,
    evaluated: usize,
    skipped: Vec<String>,
    metrics: BTreeMap<String, f64>,
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let metrics: Vec<Metric> = a.metrics.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
    if a.k == 0 {
        return Err(StoreError::InvalidK.into());
    }
    let mut store = load(&a.snapshot)?;
    let queries = load_bench_queries(&a.queries)?;
    let qrels: HashMap<String, Judgment> = load_judgments(&a.qrels)?
        .into_iter()
        .map(|j| (j.query_id.clone(), j))
        .collect();

    let mut per_metric: Vec<Vec<f64>> = vec![Vec::new(); metrics.len()];
    let mut skipped = Vec::new();
    for q in &queries {
        let vector = match (&q.vector, &q.target_id) {
            (Some(v), _) => v.clone(),
            (None, Some(id)) => store
                .get(id)
                .ok_or_else(|| StoreError::UnknownId(id.clone()))?
                .base_vector
                .to_vec(),
            (None, None) => unreachable!("checked on load"),
        };
        let result = if a.frozen {
            store.top_k(&vector, a.k)?
        } else {
            store.query(&vector, a.k)?.0
        };
        let Some(judgment) = qrels.get(&q.query_id) else {
            writeln!(err, "warning: no judgments for query '{}', skipped", q.query_id)?;
            skipped.push(q.query_id.clone());
            continue;
        };
        let ranked: Vec<&str> = result.ids().map(|id| id.as_str()).collect();
        for (m, values) in metrics.iter().zip(&mut per_metric) {
            values.push(m.evaluate(&ranked, judgment, a.k)?);
        }
    }

    let evaluated = queries.len() - skipped.len();
    let mut means = BTreeMap::new();
    if evaluated == 0 {
        writeln!(err, "warning: no judged queries; no metrics reported")?;
    } else {
        for (m, values) in metrics.iter().zip(&per_metric) {
            let mean = aggregate(values)?;
            writeln!(err, "{m}@{} = {mean:.4}", a.k)?;
            means.insert(format!("{m}@{}", a.k), mean);
        }
    }
    print_json(
        out,
        &BenchSummary {
            mode: if a.frozen { "frozen" } else { "dynamic" },
            k: a.k,
            queries: queries.len(),
            evaluated,
            skipped,
            metrics: means,
        },
    )
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let store = load(&a.snapshot)?;
    print_json(out, &store.stats())
}

pub fn cmd_prune(a: &PruneArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut store = load(&a.snapshot)?;
    let threshold = a.threshold.unwrap_or(store.config().prune_threshold);
    let removed = store.prune(threshold)?;
    if let Some(path) = &a.out {
        save(&store, path)?;
    }
    writeln!(err, "removed {}", removed.len())?;
    print_json(
        out,
        &json!({"removed": removed.len(), "ids": removed, "remaining": store.len()}),
    )
}

pub fn cmd_set(a: &SetArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if a.overrides.is_empty() {
        return Err(CliError::Validation(
            "nothing to set: pass --alpha, --theta, --gamma or --prune-threshold".into(),
        ));
    }
    let mut store = load(&a.snapshot)?;
    let target = a.overrides.apply(*store.config())?;
    // all values validated above; apply gamma before alpha so pending decay
    // is folded under the old settings
    store.set_gamma(target.gamma)?;
    store.set_alpha(target.alpha)?;
    store.set_theta(target.theta)?;
    store.set_prune_threshold(target.prune_threshold)?;
    match &a.out {
        Some(path) => {
            save(&store, path)?;
            writeln!(err, "saved to {}", path.display())?;
        }
        None => writeln!(err, "dry run: pass --out to persist")?,
    }
    print_json(out, store.config())
}
