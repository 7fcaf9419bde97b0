//! Experiment grids: seeded batch runs, per-generation aggregation with
//! confidence intervals, best-window summaries and Welch comparisons.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ga::{
    read_trace_csv, run, write_trace_csv, GaConfig, GenerationRecord, StopReason, StopVersion,
};
use crate::improve::{identity_operator, repair_operator, ImprovementOperator, NeuralOperator};
use crate::io::{read_instance, read_json, write_json};
use crate::model::Instance;
use crate::stats::{confidence_interval, mean, sample_std, welch_t_test};

/// Significance level of every interval and test.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "v1")]
    V1,
    #[serde(rename = "v1+op")]
    V1Op,
    #[serde(rename = "v2")]
    V2,
    #[serde(rename = "v2+op")]
    V2Op,
    /// `v2+op` capped at the wall time of the `v2` run with the same instance and index.
    #[serde(rename = "v2+op_timeboxed")]
    V2OpTimeboxed,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::V1,
        Variant::V1Op,
        Variant::V2,
        Variant::V2Op,
        Variant::V2OpTimeboxed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::V1 => "v1",
            Variant::V1Op => "v1+op",
            Variant::V2 => "v2",
            Variant::V2Op => "v2+op",
            Variant::V2OpTimeboxed => "v2+op_timeboxed",
        }
    }

    pub fn stop_version(self) -> StopVersion {
        match self {
            Variant::V1 | Variant::V1Op => StopVersion::V1,
            _ => StopVersion::V2,
        }
    }

    pub fn uses_operator(self) -> bool {
        !matches!(self, Variant::V1 | Variant::V2)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown variant {s:?}")))
    }
}

/// Parses `a:b,c:d` into variant pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(Variant, Variant)>> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p.trim().split_once(':').ok_or_else(|| {
                Error::Configuration(format!("pair {p:?} is not of the form a:b"))
            })?;
            Ok((a.parse()?, b.parse()?))
        })
        .collect()
}

/// Improvement operator used by the `+op` variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Identity,
    Repair,
    /// A neural operator reached over TCP (`endpoint`) or spawned as `command`.
    Neural {
        #[serde(default)]
        endpoint: Option<String>,
        #[serde(default)]
        command: Option<Vec<String>>,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl OperatorSpec {
    /// A fresh operator; every run gets its own connection.
    pub fn build(&self) -> Result<Box<dyn ImprovementOperator>> {
        Ok(match self {
            OperatorSpec::Identity => Box::new(identity_operator()),
            OperatorSpec::Repair => Box::new(repair_operator()),
            OperatorSpec::Neural {
                endpoint,
                command,
                timeout_ms,
            } => {
                let timeout = Duration::from_millis(*timeout_ms);
                match (endpoint, command) {
                    (Some(addr), None) => Box::new(NeuralOperator::connect(addr, timeout)?),
                    (None, Some(argv)) if !argv.is_empty() => {
                        let mut cmd = Command::new(&argv[0]);
                        cmd.args(&argv[1..]);
                        Box::new(NeuralOperator::spawn(cmd, timeout)?)
                    }
                    _ => {
                        return Err(Error::Configuration(
                            "neural operator needs exactly one of endpoint or command".into(),
                        ))
                    }
                }
            }
        })
    }
}

fn default_runs() -> usize {
    10
}
fn default_window() -> usize {
    1000
}
fn default_workers() -> usize {
    1
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}
fn default_operator() -> OperatorSpec {
    OperatorSpec::Repair
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Instance files; relative paths resolve against the config file's directory.
    pub instances: Vec<PathBuf>,
    #[serde(default = "default_runs")]
    pub runs_per_instance: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Shared GA settings; each variant overrides the stopping rule, the
    /// improver switch, the seed and the wall-time cap.
    #[serde(default)]
    pub ga: GaConfig,
    pub variants: Vec<Variant>,
    #[serde(default = "default_operator")]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub pairs: Vec<(Variant, Variant)>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: ExperimentConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in &mut cfg.instances {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(m));
        if self.instances.is_empty() || self.variants.is_empty() {
            return bad("experiment needs at least one instance and one variant".into());
        }
        if self.runs_per_instance == 0 || self.window == 0 || self.workers == 0 {
            return bad("runs_per_instance, window and workers must be positive".into());
        }
        let set: HashSet<_> = self.variants.iter().collect();
        if set.len() != self.variants.len() {
            return bad("variants are listed twice".into());
        }
        if set.contains(&Variant::V2OpTimeboxed) && !set.contains(&Variant::V2) {
            return bad("v2+op_timeboxed needs the v2 variant to source wall times".into());
        }
        for (a, b) in &self.pairs {
            if !set.contains(a) || !set.contains(b) || a == b {
                return bad(format!(
                    "pair {a}:{b} must name two distinct configured variants"
                ));
            }
        }
        self.ga.validate()
    }
}

/// `base ⊕` the first 8 bytes of SHA-256 over the cell's identity.
pub fn derive_seed(base: u64, variant: Variant, instance: &str, run: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(variant.name().as_bytes());
    h.update([0]);
    h.update(instance.as_bytes());
    h.update([0]);
    h.update((run as u64).to_le_bytes());
    let digest = h.finalize();
    base ^ u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// One finished grid cell, as listed in `runs.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: Variant,
    pub instance: String,
    pub run: usize,
    pub seed: u64,
    /// Relative to the output directory.
    pub trace: PathBuf,
    pub stop_reason: StopReason,
    pub epochs: usize,
    pub first_optimal_epoch: Option<usize>,
    pub best_fitness: f64,
    pub elapsed_seconds: f64,
    pub max_wall_seconds: Option<f64>,
}

/// Record with the highest `max_fitness` among the last `window` generations, earliest on ties.
pub fn aggregate_best_window(
    records: &[GenerationRecord],
    window: usize,
) -> Result<&GenerationRecord> {
    if records.is_empty() {
        return Err(Error::InvalidInput("empty trace".into()));
    }
    let tail = &records[records.len().saturating_sub(window.max(1))..];
    let mut best = &tail[0];
    for r in &tail[1..] {
        if r.max_fitness > best.max_fitness {
            best = r;
        }
    }
    Ok(best)
}

struct Cell {
    variant: Variant,
    instance: usize,
    run: usize,
    seed: u64,
}

fn instance_names(paths: &[PathBuf]) -> Result<Vec<String>> {
    let names: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| Error::Configuration(format!("{} has no file name", p.display())))
        })
        .collect::<Result<_>>()?;
    let unique: HashSet<_> = names.iter().collect();
    if unique.len() != names.len() {
        return Err(Error::Configuration(
            "instance file names must be unique".into(),
        ));
    }
    Ok(names)
}

/// Path of a trace relative to the output directory.
pub fn trace_path(variant: Variant, instance: &str, run: usize) -> PathBuf {
    PathBuf::from("traces")
        .join(variant.name())
        .join(instance)
        .join(format!("run_{run:03}.csv"))
}

/// Runs the grid, writes traces, `runs.json` and the report files under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Report> {
    cfg.validate()?;
    let names = instance_names(&cfg.instances)?;
    let instances: Vec<Instance> = cfg
        .instances
        .iter()
        .map(read_instance)
        .collect::<Result<_>>()?;
    if cfg
        .variants
        .iter()
        .any(|v| v.stop_version() == StopVersion::V1)
    {
        for (name, inst) in names.iter().zip(&instances) {
            if inst.reference_min_soft.is_none() {
                return Err(Error::Configuration(format!(
                    "instance {name} lacks reference_min_soft, required by v1 variants"
                )));
            }
        }
    }

    let mut cells = Vec::new();
    let mut seeds = HashSet::new();
    for &variant in &cfg.variants {
        for (i, name) in names.iter().enumerate() {
            for run in 0..cfg.runs_per_instance {
                let seed = derive_seed(cfg.base_seed, variant, name, run);
                if !seeds.insert(seed) {
                    return Err(Error::Configuration(format!(
                        "seed collision at {variant}/{name}/{run}"
                    )));
                }
                cells.push(Cell {
                    variant,
                    instance: i,
                    run,
                    seed,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Configuration(e.to_string()))?;
    let exec = |cell: &Cell, cap: Option<f64>| -> Result<RunRecord> {
        let ga = GaConfig {
            stop_cond_version: cell.variant.stop_version(),
            use_improver: cell.variant.uses_operator(),
            seed: cell.seed,
            max_wall_seconds: cap.or(cfg.ga.max_wall_seconds),
            ..cfg.ga.clone()
        };
        let mut op: Box<dyn ImprovementOperator> = if ga.use_improver {
            cfg.operator.build()?
        } else {
            Box::new(identity_operator())
        };
        let trace = run(&instances[cell.instance], &ga, &mut op)?;
        let rel = trace_path(cell.variant, &names[cell.instance], cell.run);
        write_trace_csv(out.join(&rel), &trace.records)?;
        log::info!(
            "{} {} run {}: {:?} after {} generations",
            cell.variant,
            names[cell.instance],
            cell.run,
            trace.stop_reason,
            trace.epochs()
        );
        Ok(RunRecord {
            variant: cell.variant,
            instance: names[cell.instance].clone(),
            run: cell.run,
            seed: cell.seed,
            trace: rel,
            stop_reason: trace.stop_reason,
            epochs: trace.epochs(),
            first_optimal_epoch: trace.first_optimal_epoch,
            best_fitness: trace.best_fitness,
            elapsed_seconds: trace.elapsed_seconds,
            max_wall_seconds: ga.max_wall_seconds,
        })
    };

    let (boxed, plain): (Vec<&Cell>, Vec<&Cell>) = cells
        .iter()
        .partition(|c| c.variant == Variant::V2OpTimeboxed);
    let mut records: Vec<RunRecord> = pool.install(|| {
        plain
            .par_iter()
            .map(|c| exec(c, None))
            .collect::<Result<_>>()
    })?;
    let wall: BTreeMap<(usize, usize), f64> = plain
        .iter()
        .zip(&records)
        .filter(|(c, _)| c.variant == Variant::V2)
        .map(|(c, r)| ((c.instance, c.run), r.elapsed_seconds))
        .collect();
    let timed: Vec<RunRecord> = pool.install(|| {
        boxed
            .par_iter()
            .map(|c| {
                let cap = wall.get(&(c.instance, c.run)).copied().ok_or_else(|| {
                    Error::Configuration(format!(
                        "no v2 run {} on {} to time-match",
                        c.run, names[c.instance]
                    ))
                })?;
                exec(c, Some(cap))
            })
            .collect::<Result<_>>()
    })?;
    records.extend(timed);

    write_json(out.join("runs.json"), &records)?;
    let report = build_report(out, &records, &cfg.variants, &cfg.pairs, cfg.window)?;
    report.write(out)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantStat {
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: Variant,
    pub b: Variant,
    pub t: Option<f64>,
    pub p: Option<f64>,
    /// Set only when `p < 0.05`.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub stats: BTreeMap<Variant, VariantStat>,
    pub comparisons: Vec<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub window: usize,
    pub variants: Vec<Variant>,
    pub rows: Vec<SummaryRow>,
}

/// Summary metrics in table order.
pub const SUMMARY_METRICS: [&str; 12] = [
    "fitness_mean",
    "fitness_max",
    "soft_penalty_min",
    "soft_penalty_mean",
    "hard_penalty_min",
    "hard_penalty_mean",
    "feasible_schedules",
    "optimal_schedules",
    "crowding_distance_mean",
    "crowding_distance_max",
    "total_time_1_run",
    "stop_generation",
];

/// Metrics whose values depend on wall-clock time.
pub const WALL_CLOCK_METRICS: [&str; 1] = ["total_time_1_run"];

fn summary_values(best: &GenerationRecord, run: &RunRecord) -> [Option<f64>; 12] {
    [
        Some(best.mean_fitness),
        Some(best.max_fitness),
        best.min_soft_feasible,
        best.mean_soft_feasible,
        Some(best.min_hard as f64),
        Some(best.mean_hard),
        Some(best.num_feasible as f64),
        best.num_optimal.map(|n| n as f64),
        best.mean_crowding,
        best.max_crowding.map(|c| c as f64),
        Some(run.elapsed_seconds),
        Some(run.epochs as f64),
    ]
}

/// Per-generation metrics in aggregate-CSV order.
pub const AGGREGATE_METRICS: [&str; 11] = [
    "mean_fitness",
    "max_fitness",
    "min_soft_feasible",
    "mean_soft_feasible",
    "min_hard",
    "mean_hard",
    "num_feasible",
    "num_optimal",
    "mean_crowding",
    "max_crowding",
    "elapsed_seconds",
];

fn aggregate_values(r: &GenerationRecord) -> [Option<f64>; 11] {
    [
        Some(r.mean_fitness),
        Some(r.max_fitness),
        r.min_soft_feasible,
        r.mean_soft_feasible,
        Some(r.min_hard as f64),
        Some(r.mean_hard),
        Some(r.num_feasible as f64),
        r.num_optimal.map(|n| n as f64),
        r.mean_crowding,
        r.max_crowding.map(|c| c as f64),
        Some(r.elapsed_seconds),
    ]
}

fn variant_stat(values: &[f64]) -> VariantStat {
    VariantStat {
        n: values.len(),
        mean: (!values.is_empty()).then(|| mean(values)),
        std: (values.len() >= 2).then(|| sample_std(values)),
    }
}

/// Summary table over per-run values taken at each run's best-window generation.
pub fn summarize(
    per_run: &BTreeMap<Variant, Vec<[Option<f64>; 12]>>,
    variants: &[Variant],
    pairs: &[(Variant, Variant)],
    window: usize,
) -> Summary {
    let rows = SUMMARY_METRICS
        .iter()
        .enumerate()
        .map(|(m, name)| {
            let column = |v: &Variant| -> Vec<f64> {
                per_run
                    .get(v)
                    .map_or(Vec::new(), |rs| rs.iter().filter_map(|r| r[m]).collect())
            };
            let stats = variants
                .iter()
                .map(|v| (*v, variant_stat(&column(v))))
                .collect();
            let comparisons = pairs
                .iter()
                .map(|&(a, b)| {
                    let w = welch_t_test(&column(&a), &column(&b)).ok();
                    Comparison {
                        a,
                        b,
                        t: w.map(|w| w.t),
                        p: w.map(|w| w.p),
                        significant: w.is_some_and(|w| w.p < ALPHA),
                    }
                })
                .collect();
            SummaryRow {
                metric: (*name).to_string(),
                stats,
                comparisons,
            }
        })
        .collect();
    Summary {
        window,
        variants: variants.to_vec(),
        rows,
    }
}

/// Per-generation aggregate: `epoch` then `variant:metric_{mean,ci_low,ci_high}` columns.
///
/// One row per generation up to the longest run; runs that already stopped
/// contribute nothing, and cells without values stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn aggregate_traces(
    traces: &BTreeMap<Variant, Vec<Vec<GenerationRecord>>>,
    variants: &[Variant],
) -> Aggregate {
    let mut header = vec!["epoch".to_string()];
    for v in variants {
        header.push(format!("{v}:runs"));
        for m in AGGREGATE_METRICS {
            for part in ["mean", "ci_low", "ci_high"] {
                header.push(format!("{v}:{m}_{part}"));
            }
        }
    }
    let len = traces.values().flatten().map(Vec::len).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(len);
    for g in 0..len {
        let mut row = vec![Some(g as f64)];
        for v in variants {
            let recs: Vec<&GenerationRecord> = traces.get(v).map_or(Vec::new(), |ts| {
                ts.iter().filter_map(|t| t.get(g)).collect()
            });
            row.push((!recs.is_empty()).then_some(recs.len() as f64));
            let values: Vec<[Option<f64>; 11]> = recs.iter().map(|r| aggregate_values(r)).collect();
            for m in 0..AGGREGATE_METRICS.len() {
                let xs: Vec<f64> = values.iter().filter_map(|v| v[m]).collect();
                let ci = confidence_interval(&xs, ALPHA).ok();
                row.push((!xs.is_empty()).then(|| mean(&xs)));
                row.push(ci.map(|c| c.0));
                row.push(ci.map(|c| c.1));
            }
        }
        rows.push(row);
    }
    Aggregate { header, rows }
}

fn cell(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

/// Report files derived from finished runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
    pub summary: Summary,
}

pub fn build_report(
    dir: &Path,
    runs: &[RunRecord],
    variants: &[Variant],
    pairs: &[(Variant, Variant)],
    window: usize,
) -> Result<Report> {
    let mut traces: BTreeMap<Variant, Vec<Vec<GenerationRecord>>> = BTreeMap::new();
    let mut per_run: BTreeMap<Variant, Vec<[Option<f64>; 12]>> = BTreeMap::new();
    for r in runs {
        let recs = read_trace_csv(dir.join(&r.trace))?;
        let best = aggregate_best_window(&recs, window)?;
        per_run
            .entry(r.variant)
            .or_default()
            .push(summary_values(best, r));
        traces.entry(r.variant).or_default().push(recs);
    }
    Ok(Report {
        runs: runs.to_vec(),
        aggregate: aggregate_traces(&traces, variants),
        summary: summarize(&per_run, variants, pairs, window),
    })
}

/// Rebuilds the report of a finished experiment directory.
pub fn report_from_dir(dir: &Path, pairs: &[(Variant, Variant)], window: usize) -> Result<Report> {
    let runs: Vec<RunRecord> = read_json(dir.join("runs.json"))?;
    let mut variants: Vec<Variant> = runs.iter().map(|r| r.variant).collect();
    variants.sort();
    variants.dedup();
    for (a, b) in pairs {
        if !variants.contains(a) || !variants.contains(b) {
            return Err(Error::Configuration(format!(
                "pair {a}:{b} names a variant with no runs"
            )));
        }
    }
    build_report(dir, &runs, &variants, pairs, window)
}

impl Report {
    /// Writes `aggregate.csv`, `summary.json` and `summary.csv`.
    pub fn write(&self, out: &Path) -> Result<()> {
        let path = out.join("aggregate.csv");
        crate::io::ensure_parent(&path)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.aggregate.header)?;
        for row in &self.aggregate.rows {
            w.write_record(row.iter().map(|x| cell(*x)))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        write_json(out.join("summary.json"), &self.summary)?;
        let path = out.join("summary.csv");
        let mut w = csv::Writer::from_path(&path)?;
        let s = &self.summary;
        let pairs: Vec<(Variant, Variant)> = s.rows.first().map_or(Vec::new(), |r| {
            r.comparisons.iter().map(|c| (c.a, c.b)).collect()
        });
        let mut header = vec!["metric".to_string()];
        for v in &s.variants {
            header.push(format!("{v}_mean"));
            header.push(format!("{v}_std"));
        }
        for (a, b) in &pairs {
            header.push(format!("{a}_vs_{b}_p"));
            header.push(format!("{a}_vs_{b}_significant"));
        }
        w.write_record(&header)?;
        for row in &s.rows {
            let mut rec = vec![row.metric.clone()];
            for v in &s.variants {
                let st = row.stats.get(v);
                rec.push(cell(st.and_then(|s| s.mean)));
                rec.push(cell(st.and_then(|s| s.std)));
            }
            for c in &row.comparisons {
                rec.push(cell(c.p));
                rec.push(c.significant.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }
}
