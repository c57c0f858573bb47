//! The real-network table: every catalog dataset under every kernel, on the
//! original and on shuffled weights.

use std::io::{self, Write};
use std::path::Path;

use log::warn;
use weightwalk_core::analysis::{summarize, NullTarget, WeightMode};
use weightwalk_core::embedder::TrainConfig;
use weightwalk_core::graph::WeightedGraph;
use weightwalk_core::walker::{Kernel, WalkConfig};

use crate::datasets::{self, Dataset, LoadOptions, Transport};
use crate::sweep::{self, Model, SweepRow, SweepSpec, Varied};

#[derive(Debug, Clone)]
pub struct Table2Spec {
    pub datasets: Vec<&'static Dataset>,
    pub kernels: Vec<Kernel>,
    pub instances: usize,
    pub null_target: NullTarget,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub seed: u64,
    pub workers: usize,
    pub load: LoadOptions,
}

impl Default for Table2Spec {
    fn default() -> Self {
        Self {
            datasets: datasets::DATASETS.iter().collect(),
            kernels: Kernel::ALL.to_vec(),
            instances: 5,
            null_target: NullTarget::Seen,
            walk: WalkConfig::default(),
            train: TrainConfig::default(),
            seed: 0,
            workers: 1,
            load: LoadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub dataset: &'static str,
    /// Size of the graph actually walked; zero when it failed to load.
    pub nodes: usize,
    pub edges: usize,
    pub row: SweepRow,
}

impl Table2Spec {
    /// The sweep run on one dataset: a single cell at the configured walk
    /// length.
    pub fn sweep_for(&self, d: &Dataset) -> SweepSpec {
        SweepSpec {
            model: Model::Dataset(d.name.to_string()),
            varied: Varied::WalkLength,
            grid: vec![self.walk.walk_length as f64],
            instances: self.instances,
            kernels: self.kernels.clone(),
            weight_modes: vec![WeightMode::Original, WeightMode::Shuffled],
            null_target: self.null_target,
            walk: self.walk,
            train: self.train,
            seed: self.seed,
            workers: self.workers,
            ..SweepSpec::default()
        }
    }
}

/// Run the table on already loaded graphs. A dataset whose graph is an
/// error gets error rows for every job.
pub fn run_table2_on(
    spec: &Table2Spec,
    graphs: &[(&'static Dataset, Result<WeightedGraph, String>)],
) -> Vec<Table2Row> {
    let mut out = Vec::new();
    for (d, g) in graphs {
        let sweep = spec.sweep_for(d);
        let rows = match g {
            Ok(g) => match sweep::run_sweep(&sweep, Some(g)) {
                Ok(res) => res.rows,
                Err(e) => failed_rows(&sweep, &e.to_string()),
            },
            Err(e) => failed_rows(&sweep, e),
        };
        let (nodes, edges) = g.as_ref().map_or((0, 0), |g| (g.node_count(), g.edge_count()));
        out.extend(rows.into_iter().map(|row| Table2Row {
            dataset: d.name,
            nodes,
            edges,
            row,
        }));
    }
    out
}

fn failed_rows(spec: &SweepSpec, error: &str) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &kernel in &spec.kernels {
        for &weight_mode in &spec.weight_modes {
            for instance in 0..spec.instances {
                rows.push(SweepRow {
                    model: spec.model.name(),
                    varied: spec.varied,
                    cell_value: spec.grid[0],
                    kernel,
                    weight_mode,
                    instance,
                    seed: spec.instance_seed(instance),
                    pearson_r: None,
                    n_pairs: 0,
                    wall_ms: 0,
                    spearman_r: None,
                    surviving_r: None,
                    error: Some(error.to_string()),
                });
            }
        }
    }
    rows
}

/// Fetch (or read from cache) and load every dataset, then run the table.
pub fn run_table2(spec: &Table2Spec, cache: &Path, transport: &dyn Transport, offline: bool) -> Vec<Table2Row> {
    let graphs: Vec<_> = spec
        .datasets
        .iter()
        .map(|&d| {
            let g = datasets::load_dataset(d.name, cache, transport, offline, &spec.load)
                .map(|l| l.graph)
                .map_err(|e| {
                    warn!("{}: {e}", d.name);
                    e.to_string()
                });
            (d, g)
        })
        .collect();
    run_table2_on(spec, &graphs)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_table2<W: Write>(rows: &[Table2Row], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dataset",
        "nodes",
        "edges",
        "kernel",
        "weight_mode",
        "instance",
        "seed",
        "pearson_r",
        "n_pairs",
        "wall_ms",
        "spearman_r",
        "error",
    ])?;
    for t in rows {
        let r = &t.row;
        w.write_record([
            t.dataset.to_string(),
            t.nodes.to_string(),
            t.edges.to_string(),
            r.kernel.name().into(),
            r.weight_mode.name().into(),
            r.instance.to_string(),
            r.seed.to_string(),
            opt(r.pearson_r),
            r.n_pairs.to_string(),
            r.wall_ms.to_string(),
            opt(r.spearman_r),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}

/// Median r per dataset, kernel and weight mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2Cell {
    pub dataset: &'static str,
    pub kernel: Kernel,
    pub weight_mode: WeightMode,
    pub median_r: Option<f64>,
    pub mean_r: Option<f64>,
    pub sd_r: Option<f64>,
    pub count: usize,
    pub undefined: usize,
}

pub fn summarize_table2(rows: &[Table2Row]) -> Vec<Table2Cell> {
    let mut cells: Vec<Table2Cell> = Vec::new();
    let mut keys: Vec<(&'static str, Kernel, WeightMode)> = Vec::new();
    for t in rows {
        let k = (t.dataset, t.row.kernel, t.row.weight_mode);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for (dataset, kernel, weight_mode) in keys {
        let rs: Vec<Option<f64>> = rows
            .iter()
            .filter(|t| t.dataset == dataset && t.row.kernel == kernel && t.row.weight_mode == weight_mode)
            .map(|t| t.row.pearson_r)
            .collect();
        let s = summarize(&rs);
        cells.push(Table2Cell {
            dataset,
            kernel,
            weight_mode,
            median_r: s.median,
            mean_r: s.mean,
            sd_r: s.sd,
            count: s.count,
            undefined: s.undefined,
        });
    }
    cells
}

pub fn write_table2_summary<W: Write>(cells: &[Table2Cell], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dataset",
        "kernel",
        "weight_mode",
        "count",
        "undefined",
        "median_r",
        "mean_r",
        "sd_r",
    ])?;
    for c in cells {
        w.write_record([
            c.dataset.to_string(),
            c.kernel.name().into(),
            c.weight_mode.name().into(),
            c.count.to_string(),
            c.undefined.to_string(),
            opt(c.median_r),
            opt(c.mean_r),
            opt(c.sd_r),
        ])?;
    }
    w.flush()
}
