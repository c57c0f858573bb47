//! Parameter sweeps: a grid over one varied parameter, crossed with kernels,
//! weight modes and graph instances, each cell one [`run_single`] (or
//! [`run_threshold_cell`] when the varied parameter is the pruning quantile).
//!
//! Rows are appended to `<out>.partial` as jobs finish, so an interrupted
//! sweep resumes where it stopped; the final CSV is sorted by cell
//! coordinates and renamed into place.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use weightwalk_core::analysis::{run_single, run_threshold_cell, summarize, NullTarget, RunConfig, WeightMode};
use weightwalk_core::embedder::TrainConfig;
use weightwalk_core::generators::{
    ba_m_for_degree, BaVariant, GraphSpec, SbmWeightMode, WeightDist, DEFAULT_WAXMAN_BETA,
};
use weightwalk_core::graph::WeightedGraph;
use weightwalk_core::rng::derive_seed;
use weightwalk_core::walker::{Kernel, WalkConfig};

use crate::fsutil;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Er,
    Sbm,
    Waxman,
    BaWsf,
    BaWe,
    Complete,
    /// One of the catalog networks, by name.
    Dataset(String),
}

impl Model {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "er" => Model::Er,
            "sbm" => Model::Sbm,
            "waxman" | "wax" => Model::Waxman,
            "ba-wsf" | "ba_wsf" | "ba" => Model::BaWsf,
            "ba-we" | "ba_we" => Model::BaWe,
            "complete" => Model::Complete,
            other => Model::Dataset(other.strip_prefix("dataset:")?.to_string()),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Model::Er => "er".into(),
            Model::Sbm => "sbm".into(),
            Model::Waxman => "waxman".into(),
            Model::BaWsf => "ba-wsf".into(),
            Model::BaWe => "ba-we".into(),
            Model::Complete => "complete".into(),
            Model::Dataset(name) => format!("dataset:{name}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Varied {
    GraphSize,
    AvgDegree,
    WalksPerNode,
    WalkLength,
    Features,
    Threshold,
}

impl Varied {
    pub fn name(&self) -> &'static str {
        match self {
            Varied::GraphSize => "graph_size",
            Varied::AvgDegree => "avg_degree",
            Varied::WalksPerNode => "walks_per_node",
            Varied::WalkLength => "walk_length",
            Varied::Features => "features",
            Varied::Threshold => "threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Varied::GraphSize,
            Varied::AvgDegree,
            Varied::WalksPerNode,
            Varied::WalkLength,
            Varied::Features,
            Varied::Threshold,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }

    fn integral(&self) -> bool {
        !matches!(self, Varied::AvgDegree | Varied::Threshold)
    }
}

/// Generator parameters that are not being varied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed {
    pub nodes: usize,
    pub avg_degree: f64,
    pub er_weights: WeightDist,
    pub sbm_ratio: f64,
    pub sbm_weights: SbmWeightMode,
    pub waxman_beta: f64,
    pub features: usize,
}

impl Default for Fixed {
    fn default() -> Self {
        Self {
            nodes: 1024,
            avg_degree: 16.0,
            er_weights: WeightDist::uniform(),
            sbm_ratio: 0.2,
            sbm_weights: SbmWeightMode::Jitter,
            waxman_beta: DEFAULT_WAXMAN_BETA,
            features: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: Model,
    pub varied: Varied,
    pub grid: Vec<f64>,
    pub fixed: Fixed,
    pub instances: usize,
    pub kernels: Vec<Kernel>,
    pub weight_modes: Vec<WeightMode>,
    pub null_target: NullTarget,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub seed: u64,
    /// Jobs run concurrently.
    pub workers: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            model: Model::Er,
            varied: Varied::GraphSize,
            grid: vec![128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0],
            fixed: Fixed::default(),
            instances: 10,
            kernels: Kernel::ALL.to_vec(),
            weight_modes: vec![WeightMode::Original],
            null_target: NullTarget::Seen,
            walk: WalkConfig::default(),
            train: TrainConfig::default(),
            seed: 0,
            workers: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("{path} belongs to a different sweep; delete it or use another output path")]
    ForeignPartial { path: PathBuf },
    #[error("malformed partial file {path}: {reason}")]
    BadPartial { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::Invalid(m));
        if self.grid.is_empty() {
            return bad("empty grid".into());
        }
        if self.instances == 0 {
            return bad("instances must be >= 1".into());
        }
        if self.kernels.is_empty() || self.weight_modes.is_empty() {
            return bad("need at least one kernel and one weight mode".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        for &v in &self.grid {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("grid value {v} is not a finite non-negative number"));
            }
            if self.varied.integral() && v.fract() != 0.0 {
                return bad(format!("{} takes integers, got {v}", self.varied.name()));
            }
            if self.varied == Varied::Threshold && v >= 1.0 {
                return bad(format!("threshold quantile {v} outside [0, 1)"));
            }
        }
        if self.varied == Varied::Threshold && self.weight_modes != [WeightMode::Original] {
            return bad("threshold sweeps correlate against the original weights only".into());
        }
        let generated = !matches!(self.model, Model::Dataset(_));
        match self.varied {
            Varied::GraphSize | Varied::AvgDegree if !generated => {
                bad(format!("{} cannot vary for a dataset", self.varied.name()))
            }
            Varied::Features if self.model != Model::Complete => {
                bad("features only applies to the complete-graph model".into())
            }
            Varied::AvgDegree if self.model == Model::Complete => {
                bad("the complete graph has no degree parameter".into())
            }
            _ => Ok(()),
        }
    }

    /// Stable hash of everything that determines the rows (not `workers`).
    pub fn fingerprint(&self) -> String {
        let text = format!(
            "{:?}|{:?}|{:?}|{:?}|{}|{:?}|{:?}|{:?}|{:?}|{:?}|{}",
            self.model,
            self.varied,
            self.grid,
            self.fixed,
            self.instances,
            self.kernels,
            self.weight_modes,
            self.null_target,
            self.walk,
            TrainConfig { workers: 1, ..self.train },
            self.seed,
        );
        hex::encode(&Sha256::digest(text.as_bytes())[..16])
    }

    /// Seed shared by every job of one instance.
    pub fn instance_seed(&self, instance: usize) -> u64 {
        derive_seed(self.seed, &[instance as u64])
    }

    fn graph_spec(&self, value: f64) -> Option<GraphSpec> {
        let f = &self.fixed;
        let (mut n, mut k, mut features) = (f.nodes, f.avg_degree, f.features);
        match self.varied {
            Varied::GraphSize => n = value as usize,
            Varied::AvgDegree => k = value,
            Varied::Features => features = value as usize,
            _ => {}
        }
        Some(match self.model {
            Model::Er => GraphSpec::Er {
                n,
                avg_degree: k,
                weights: f.er_weights,
            },
            Model::Sbm => GraphSpec::Sbm {
                n,
                avg_degree: k,
                ratio: f.sbm_ratio,
                mode: f.sbm_weights,
            },
            Model::Waxman => GraphSpec::Waxman {
                n,
                avg_degree: k,
                beta: f.waxman_beta,
            },
            Model::BaWsf | Model::BaWe => GraphSpec::Ba {
                n,
                m: ba_m_for_degree(k),
                variant: if self.model == Model::BaWsf { BaVariant::Wsf } else { BaVariant::We },
            },
            Model::Complete => GraphSpec::Complete { n, features },
            Model::Dataset(_) => return None,
        })
    }

    fn run_config(&self, value: f64, kernel: Kernel, mode: WeightMode, seed: u64) -> RunConfig {
        let mut walk = WalkConfig { kernel, ..self.walk };
        match self.varied {
            Varied::WalksPerNode => walk.walks_per_node = value as usize,
            Varied::WalkLength => walk.walk_length = value as usize,
            _ => {}
        }
        RunConfig {
            walk,
            train: self.train,
            weight_mode: mode,
            null_target: self.null_target,
            seed: derive_seed(seed, &[RUN_STREAM]),
            keep_pairs: false,
            walk_threads: 1,
        }
    }

    fn jobs(&self) -> Vec<JobKey> {
        let mut jobs = Vec::new();
        for cell in 0..self.grid.len() {
            for &kernel in &self.kernels {
                for &mode in &self.weight_modes {
                    for instance in 0..self.instances {
                        jobs.push(JobKey {
                            cell,
                            kernel,
                            mode,
                            instance,
                        });
                    }
                }
            }
        }
        jobs
    }
}

const GRAPH_STREAM: u64 = 0x47;
const RUN_STREAM: u64 = 0x52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct JobKey {
    cell: usize,
    kernel: Kernel,
    mode: WeightMode,
    instance: usize,
}

/// One result row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: String,
    pub varied: Varied,
    pub cell_value: f64,
    pub kernel: Kernel,
    pub weight_mode: WeightMode,
    pub instance: usize,
    pub seed: u64,
    pub pearson_r: Option<f64>,
    pub n_pairs: usize,
    pub wall_ms: u64,
    pub spearman_r: Option<f64>,
    /// Threshold sweeps: correlation over the surviving edges only.
    pub surviving_r: Option<f64>,
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 13] = [
    "model",
    "varied",
    "cell_value",
    "kernel",
    "weight_mode",
    "instance",
    "seed",
    "pearson_r",
    "n_pairs",
    "wall_ms",
    "spearman_r",
    "surviving_r",
    "error",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("bad number {s:?}"))
    }
}

impl SweepRow {
    pub fn record(&self) -> [String; 13] {
        [
            self.model.clone(),
            self.varied.name().into(),
            self.cell_value.to_string(),
            self.kernel.name().into(),
            self.weight_mode.name().into(),
            self.instance.to_string(),
            self.seed.to_string(),
            opt(self.pearson_r),
            self.n_pairs.to_string(),
            self.wall_ms.to_string(),
            opt(self.spearman_r),
            opt(self.surviving_r),
            self.error.clone().unwrap_or_default(),
        ]
    }

    pub fn from_record(r: &csv::StringRecord) -> Result<Self, String> {
        if r.len() != CSV_HEADER.len() {
            return Err(format!("expected {} fields, found {}", CSV_HEADER.len(), r.len()));
        }
        let int = |i: usize| r[i].parse::<u64>().map_err(|_| format!("bad integer {:?}", &r[i]));
        Ok(Self {
            model: r[0].to_string(),
            varied: Varied::parse(&r[1]).ok_or_else(|| format!("bad varied {:?}", &r[1]))?,
            cell_value: r[2].parse().map_err(|_| format!("bad cell value {:?}", &r[2]))?,
            kernel: Kernel::parse(&r[3]).ok_or_else(|| format!("bad kernel {:?}", &r[3]))?,
            weight_mode: WeightMode::parse(&r[4]).ok_or_else(|| format!("bad weight mode {:?}", &r[4]))?,
            instance: int(5)? as usize,
            seed: int(6)?,
            pearson_r: parse_opt(&r[7])?,
            n_pairs: int(8)? as usize,
            wall_ms: int(9)?,
            spearman_r: parse_opt(&r[10])?,
            surviving_r: parse_opt(&r[11])?,
            error: (!r[12].is_empty()).then(|| r[12].to_string()),
        })
    }

    fn key(&self, spec: &SweepSpec) -> Option<JobKey> {
        Some(JobKey {
            cell: spec.grid.iter().position(|&v| v == self.cell_value)?,
            kernel: self.kernel,
            mode: self.weight_mode,
            instance: self.instance,
        })
    }
}

/// Run one job. Errors become an in-row message.
fn run_job(spec: &SweepSpec, key: JobKey, dataset: Option<&WeightedGraph>) -> SweepRow {
    let value = spec.grid[key.cell];
    let seed = spec.instance_seed(key.instance);
    let start = Instant::now();
    let mut row = SweepRow {
        model: spec.model.name(),
        varied: spec.varied,
        cell_value: value,
        kernel: key.kernel,
        weight_mode: key.mode,
        instance: key.instance,
        seed,
        pearson_r: None,
        n_pairs: 0,
        wall_ms: 0,
        spearman_r: None,
        surviving_r: None,
        error: None,
    };
    let generated;
    let graph = match (spec.graph_spec(value), dataset) {
        (Some(gs), _) => match gs.generate(derive_seed(seed, &[GRAPH_STREAM])) {
            Ok(g) => {
                generated = g;
                &generated
            }
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        },
        (None, Some(g)) => g,
        (None, None) => {
            row.error = Some("dataset graph not loaded".into());
            return row;
        }
    };
    let cfg = spec.run_config(value, key.kernel, key.mode, seed);
    let outcome = if spec.varied == Varied::Threshold {
        run_threshold_cell(graph, value, &cfg).map(|t| (t.all_pairs, t.surviving_r))
    } else {
        run_single(graph, &cfg).map(|r| (r, None))
    };
    match outcome {
        Ok((r, surviving)) => {
            row.pearson_r = r.pearson_r;
            row.spearman_r = r.spearman_r;
            row.n_pairs = r.n_pairs;
            row.surviving_r = surviving;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.wall_ms = start.elapsed().as_millis() as u64;
    row
}

/// Per-(cell, kernel, weight mode) aggregate over instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell_value: f64,
    pub kernel: Kernel,
    pub weight_mode: WeightMode,
    pub count: usize,
    pub undefined: usize,
    pub mean_r: Option<f64>,
    pub sd_r: Option<f64>,
    pub median_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Sorted by cell, kernel, weight mode, instance.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn summary(&self) -> Vec<CellSummary> {
        let mut groups: BTreeMap<(usize, Kernel, WeightMode), Vec<Option<f64>>> = BTreeMap::new();
        for row in &self.rows {
            let cell = row.key(&self.spec).map_or(usize::MAX, |k| k.cell);
            groups.entry((cell, row.kernel, row.weight_mode)).or_default().push(row.pearson_r);
        }
        groups
            .into_iter()
            .map(|((cell, kernel, weight_mode), rs)| {
                let s = summarize(&rs);
                CellSummary {
                    cell_value: self.spec.grid.get(cell).copied().unwrap_or(f64::NAN),
                    kernel,
                    weight_mode,
                    count: s.count,
                    undefined: s.undefined,
                    mean_r: s.mean,
                    sd_r: s.sd,
                    median_r: s.median,
                }
            })
            .collect()
    }

    pub fn cell(&self, value: f64, kernel: Kernel, mode: WeightMode) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.cell_value == value && r.kernel == kernel && r.weight_mode == mode)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_rows(&self.rows, out)
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "model",
            "varied",
            "cell_value",
            "kernel",
            "weight_mode",
            "count",
            "undefined",
            "mean_r",
            "sd_r",
            "median_r",
        ])?;
        let model = self.spec.model.name();
        for s in self.summary() {
            w.write_record([
                model.clone(),
                self.spec.varied.name().into(),
                s.cell_value.to_string(),
                s.kernel.name().into(),
                s.weight_mode.name().into(),
                s.count.to_string(),
                s.undefined.to_string(),
                opt(s.mean_r),
                opt(s.sd_r),
                opt(s.median_r),
            ])?;
        }
        w.flush()
    }
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()
}

/// Read a sweep CSV written by [`write_rows`].
pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>, SweepError> {
    let bad = |reason: String| SweepError::BadPartial {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        rows.push(SweepRow::from_record(&rec).map_err(bad)?);
    }
    Ok(rows)
}

/// Run the whole sweep in memory.
pub fn run_sweep(spec: &SweepSpec, dataset: Option<&WeightedGraph>) -> Result<SweepResult, SweepError> {
    run_sweep_with(spec, dataset, Vec::new(), &mut |_| Ok(()))
}

fn run_sweep_with(
    spec: &SweepSpec,
    dataset: Option<&WeightedGraph>,
    done: Vec<SweepRow>,
    sink: &mut (dyn FnMut(&SweepRow) -> io::Result<()> + Send),
) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    if matches!(spec.model, Model::Dataset(_)) && dataset.is_none() {
        return Err(SweepError::Invalid("dataset model needs a loaded graph".into()));
    }
    let finished: HashSet<JobKey> = done.iter().filter_map(|r| r.key(spec)).collect();
    let pending: Vec<JobKey> = spec.jobs().into_iter().filter(|k| !finished.contains(k)).collect();
    info!("{} jobs, {} already done", pending.len() + finished.len(), finished.len());

    let rows = Mutex::new(done);
    let sink = Mutex::new(sink);
    let io_error: Mutex<Option<io::Error>> = Mutex::new(None);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| SweepError::Invalid(e.to_string()))?;
    pool.install(|| {
        pending.par_iter().for_each(|&key| {
            let row = run_job(spec, key, dataset);
            if let Some(e) = &row.error {
                warn!("{} {} {} #{}: {e}", row.cell_value, row.kernel, row.weight_mode.name(), row.instance);
            }
            if let Err(e) = (sink.lock().unwrap())(&row) {
                io_error.lock().unwrap().get_or_insert(e);
            }
            rows.lock().unwrap().push(row);
        })
    });
    if let Some(e) = io_error.into_inner().unwrap() {
        return Err(e.into());
    }
    let mut rows = rows.into_inner().unwrap();
    rows.retain(|r| r.key(spec).is_some());
    rows.sort_by_key(|r| r.key(spec));
    rows.dedup_by_key(|r| r.key(spec));
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

pub fn partial_path(out: &Path) -> PathBuf {
    fsutil::sibling(out, ".partial")
}

pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn meta_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.meta.json"))
}

const PARTIAL_TAG: &str = "# sweep ";

fn read_partial(path: &Path, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut lines = BufReader::new(file).lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.strip_prefix(PARTIAL_TAG) != Some(spec.fingerprint().as_str()) {
        return Err(SweepError::ForeignPartial {
            path: path.to_path_buf(),
        });
    }
    let mut body = String::new();
    for line in lines {
        writeln!(body, "{}", line?).unwrap();
    }
    // a torn final line from a crash fails to parse and is dropped
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let Ok(rec) = rec else { continue };
        match SweepRow::from_record(&rec) {
            Ok(row) => rows.push(row),
            Err(reason) => warn!("skipping partial row: {reason}"),
        }
    }
    Ok(rows)
}

/// Run a sweep writing `<out>`, `<out stem>.summary.csv` and
/// `<out stem>.meta.json`, resuming from `<out>.partial` when present.
pub fn run_sweep_to_file(
    spec: &SweepSpec,
    dataset: Option<&WeightedGraph>,
    out: &Path,
    meta: serde_json::Value,
) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let partial = partial_path(out);
    let done = read_partial(&partial, spec)?;
    let fresh = done.is_empty();
    let mut file = OpenOptions::new().create(true).append(true).open(&partial)?;
    if fresh {
        file.set_len(0)?;
        writeln!(file, "{PARTIAL_TAG}{}", spec.fingerprint())?;
        writeln!(file, "{}", CSV_HEADER.join(","))?;
    } else {
        info!("resuming {} rows from {}", done.len(), partial.display());
    }
    let mut sink = move |row: &SweepRow| -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(row.record())?;
        file.write_all(&w.into_inner().map_err(|e| e.into_error())?)?;
        file.flush()
    };
    let result = run_sweep_with(spec, dataset, done, &mut sink)?;
    fsutil::write_atomic(out, |w| result.write_csv(w))?;
    fsutil::write_atomic(&summary_path(out), |w| result.write_summary_csv(w))?;
    fsutil::write_atomic(&meta_path(out), |w| {
        serde_json::to_writer_pretty(&mut *w, &meta)?;
        writeln!(w)
    })?;
    fs::remove_file(&partial)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepSpec {
        SweepSpec {
            grid: vec![24.0, 32.0],
            fixed: Fixed {
                avg_degree: 4.0,
                ..Fixed::default()
            },
            instances: 2,
            kernels: vec![Kernel::Rw, Kernel::Wrw],
            walk: WalkConfig {
                walks_per_node: 2,
                walk_length: 10,
                ..WalkConfig::default()
            },
            train: TrainConfig {
                dim: 8,
                epochs: 1,
                ..TrainConfig::default()
            },
            ..SweepSpec::default()
        }
    }

    #[test]
    fn factorial_rows_sorted() {
        let res = run_sweep(&tiny(), None).unwrap();
        assert_eq!(res.rows.len(), 8);
        let keys: Vec<_> = res.rows.iter().map(|r| (r.cell_value as u32, r.kernel, r.instance)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(res.rows.iter().all(|r| r.error.is_none() && r.pearson_r.is_some()));
        // instances share a seed across cells and kernels
        assert_eq!(res.rows[0].seed, res.rows[2].seed);
        assert_ne!(res.rows[0].seed, res.rows[1].seed);
        assert_eq!(res.summary().len(), 4);
    }

    #[test]
    fn record_round_trip() {
        let res = run_sweep(&tiny(), None).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        let back: Vec<SweepRow> = r.records().map(|x| SweepRow::from_record(&x.unwrap()).unwrap()).collect();
        assert_eq!(back, res.rows);
    }

    #[test]
    fn validation() {
        let mut s = tiny();
        s.grid = vec![10.5];
        assert!(s.validate().is_err());
        s = tiny();
        s.varied = Varied::Threshold;
        s.grid = vec![1.0];
        assert!(s.validate().is_err());
        s = tiny();
        s.varied = Varied::Features;
        assert!(s.validate().is_err());
        s.model = Model::Complete;
        assert!(s.validate().is_ok());
        s = tiny();
        s.model = Model::Dataset("netscience".into());
        assert!(s.validate().is_err());
        s.varied = Varied::WalkLength;
        assert!(matches!(run_sweep(&s, None), Err(SweepError::Invalid(_))));
    }

    #[test]
    fn model_names_parse_back() {
        for m in [
            Model::Er,
            Model::Sbm,
            Model::Waxman,
            Model::BaWsf,
            Model::BaWe,
            Model::Complete,
            Model::Dataset("netscience".into()),
        ] {
            assert_eq!(Model::parse(&m.name()), Some(m));
        }
        assert_eq!(Model::parse("karate"), None);
    }

    #[test]
    fn generator_failures_stay_in_row() {
        let mut s = tiny();
        s.grid = vec![2.0];
        s.model = Model::Sbm;
        let res = run_sweep(&s, None).unwrap();
        assert!(res.rows.iter().all(|r| r.error.is_some() && r.pearson_r.is_none()));
        assert_eq!(res.summary()[0].undefined, 2);
    }
}
