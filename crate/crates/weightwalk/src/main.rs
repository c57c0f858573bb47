use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use weightwalk::config::{self, ExperimentConfig};
use weightwalk::datasets::{self, HttpTransport, LoadOptions};
use weightwalk::edgelist::{self, DirectedCollapse, DuplicatePolicy, ParseOptions};
use weightwalk::export;
use weightwalk::fsutil::write_atomic;
use weightwalk::plot;
use weightwalk::sweep::{self, Fixed, Model, SweepSpec, Varied};
use weightwalk::table2::{self, Table2Spec};
use weightwalk_core::analysis::{run_single, NullTarget, RunConfig, WeightMode};
use weightwalk_core::embedder::{train_with_report, TrainConfig};
use weightwalk_core::generators::{ba_m_for_degree, BaVariant, GraphSpec, DEFAULT_WAXMAN_BETA};
use weightwalk_core::graph::WeightedGraph;
use weightwalk_core::walker::{build_corpus, build_corpus_parallel, Kernel, WalkConfig};

const SWEEP_HELP: &str = r#"Config schema (JSON, unknown keys rejected):
  schema         1 (required)
  model          er | sbm | waxman | ba-wsf | ba-we | complete | dataset:<name> (required)
  varied         graph_size | avg_degree | walks_per_node | walk_length | features | threshold (required)
  grid           list of values for the varied parameter (required)
  fixed          {nodes, avg_degree, er_weights, sbm_ratio, sbm_weights, waxman_beta, features}
  instances      graph instances per cell (10)
  kernels        subset of ["RW", "SRW", "WRW"] (all)
  weight_mode    original | shuffled | both (original)
  null_target    seen | original (seen)
  walk           {walks_per_node, walk_length}
  train          {dim, window, negatives, epochs, initial_lr, min_lr, architecture, subsample, workers}
  seed           base seed (0)
  deterministic  single-worker training (true)
  workers        concurrent jobs (1)
  output         result CSV path, used when --out is absent
  dataset        {cache, duplicate_policy, directed_collapse, weight_column, min_weight_epsilon, largest_component}"#;

#[derive(Parser)]
#[command(name = "weightwalk", version, about = "Weighted random walks, skip-gram embeddings and edge-weight recovery")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Single-worker training (bit-reproducible results).
    #[arg(long, global = true)]
    deterministic: bool,
    /// Concurrent jobs (sweeps) or walk threads (single runs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Never touch the network; also set by WEIGHTWALK_OFFLINE=1.
    #[arg(long, global = true)]
    offline: bool,
    /// Log progress (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl Global {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or(1).max(1)
    }

    fn offline(&self) -> bool {
        self.offline || datasets::offline_from_env()
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic weighted graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Sample a walk corpus from a graph.
    Walk {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train embeddings on a walk corpus.
    Embed {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Walk, train and correlate edge weights with embedding cosines.
    Run(RunArgs),
    /// Run a parameter sweep from a JSON config.
    #[command(after_long_help = SWEEP_HELP)]
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Result CSV; a summary and a metadata file are written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prune a complete graph at increasing weight quantiles.
    Threshold(ThresholdArgs),
    /// Correlations for the catalog networks, original and shuffled weights.
    Table2(Table2Args),
    /// Download catalog networks into the cache.
    Fetch {
        /// Dataset names; see `--list`.
        names: Vec<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value = "data")]
        cache: PathBuf,
    },
    /// Draw a sweep CSV as an SVG line chart.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// er, sbm, waxman, ba-wsf, ba-we or complete.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 1024)]
    nodes: usize,
    #[arg(long, default_value_t = 16.0)]
    avg_degree: f64,
    /// ER weights: uniform, normal or exponential.
    #[arg(long, default_value = "uniform")]
    weights: String,
    /// SBM p_out / p_in.
    #[arg(long, default_value_t = 0.2)]
    ratio: f64,
    /// SBM weights: exact or jitter.
    #[arg(long, default_value = "jitter")]
    sbm_weights: String,
    /// Waxman distance decay.
    #[arg(long, default_value_t = DEFAULT_WAXMAN_BETA)]
    beta: f64,
    /// BA attachments per node; defaults to avg-degree / 2.
    #[arg(long)]
    m: Option<usize>,
    /// Complete-graph feature dimension.
    #[arg(long, default_value_t = 16)]
    features: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphSource {
    /// Edge-list file.
    #[arg(long, conflicts_with = "dataset")]
    graph: Option<PathBuf>,
    /// Catalog network name.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, default_value = "data")]
    cache: PathBuf,
    /// Same-direction repeated rows: sum or reject.
    #[arg(long, default_value = "sum")]
    duplicates: String,
    /// Combining u->v with v->u: max, sum or mean.
    #[arg(long, default_value = "sum")]
    directed: String,
    /// Weight column name or 0-based index.
    #[arg(long)]
    weight_column: Option<String>,
    /// Raise zero weights to 1e-12 instead of rejecting them.
    #[arg(long)]
    min_weight_epsilon: bool,
    /// Keep only the largest connected component.
    #[arg(long)]
    largest_component: bool,
}

impl GraphSource {
    fn parse_options(&self) -> Result<ParseOptions> {
        Ok(ParseOptions {
            duplicate_policy: DuplicatePolicy::parse(&self.duplicates)
                .ok_or_else(|| anyhow!("--duplicates must be sum or reject"))?,
            directed_collapse: DirectedCollapse::parse(&self.directed)
                .ok_or_else(|| anyhow!("--directed must be max, sum or mean"))?,
            weight_column: self.weight_column.clone(),
            min_weight_epsilon: self.min_weight_epsilon,
        })
    }

    fn load(&self, g: &Global) -> Result<(WeightedGraph, serde_json::Value)> {
        let opts = self.parse_options()?;
        match (&self.graph, &self.dataset) {
            (Some(path), None) => {
                let p = edgelist::parse_edge_list(path, &opts).with_context(|| format!("reading {}", path.display()))?;
                let graph = if self.largest_component {
                    p.graph.largest_component().0
                } else {
                    p.graph
                };
                let meta = json!({
                    "graph": path,
                    "duplicate_policy": opts.duplicate_policy.name(),
                    "directed_collapse": opts.directed_collapse.name(),
                    "merged_duplicates": p.merged_duplicates,
                    "reciprocal_pairs": p.reciprocal_pairs,
                });
                Ok((graph, meta))
            }
            (None, Some(name)) => {
                let load = LoadOptions {
                    parse: opts.clone(),
                    largest_component: self.largest_component.then_some(true),
                };
                let d = datasets::load_dataset(name, &self.cache, &HttpTransport::default(), g.offline(), &load)?;
                let meta = json!({
                    "dataset": d.fetched.dataset.name,
                    "sha256": d.fetched.sha256,
                    "largest_component": d.largest_component,
                    "duplicate_policy": opts.duplicate_policy.name(),
                    "directed_collapse": opts.directed_collapse.name(),
                    "merged_duplicates": d.parsed.merged_duplicates,
                    "reciprocal_pairs": d.parsed.reciprocal_pairs,
                });
                Ok((d.graph, meta))
            }
            _ => bail!("give exactly one of --graph or --dataset"),
        }
    }
}

#[derive(Args)]
struct WalkArgs {
    /// RW, SRW or WRW.
    #[arg(long, default_value = "WRW")]
    kernel: String,
    #[arg(long, default_value_t = 16)]
    walks_per_node: usize,
    #[arg(long, default_value_t = 128)]
    walk_length: usize,
}

impl WalkArgs {
    fn config(&self, seed: u64) -> Result<WalkConfig> {
        let cfg = WalkConfig {
            kernel: parse_kernel(&self.kernel)?,
            walks_per_node: self.walks_per_node,
            walk_length: self.walk_length,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_kernel(s: &str) -> Result<Kernel> {
    Kernel::parse(s).ok_or_else(|| anyhow!("unknown kernel {s:?}; expected RW, SRW or WRW"))
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    initial_lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    min_lr: f64,
    /// skipgram or cbow.
    #[arg(long, default_value = "skipgram")]
    architecture: String,
    /// Frequent-node subsampling threshold.
    #[arg(long)]
    subsample: Option<f64>,
    /// Lock-free training threads; forced to 1 by --deterministic.
    #[arg(long, default_value_t = 1)]
    train_workers: usize,
}

impl TrainArgs {
    fn config(&self, seed: u64, g: &Global) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            initial_lr: self.initial_lr,
            min_lr: self.min_lr,
            architecture: config::parse_architecture(&self.architecture)
                .ok_or_else(|| anyhow!("unknown architecture {:?}", self.architecture))?,
            subsample: self.subsample,
            workers: if g.deterministic { 1 } else { self.train_workers.max(1) },
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    walk: WalkArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// original or shuffled.
    #[arg(long, default_value = "original")]
    weight_mode: String,
    /// For shuffled runs: correlate against the seen (shuffled) or the original weights.
    #[arg(long, default_value = "seen")]
    null_target: String,
    /// Write per-edge weight and cosine rows here.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    #[arg(long, default_value_t = 16)]
    features: usize,
    /// Quantiles to prune at.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    instances: usize,
    /// Comma-separated kernels.
    #[arg(long, value_delimiter = ',', default_value = "WRW")]
    kernels: Vec<String>,
    #[arg(long, default_value_t = 16)]
    walks_per_node: usize,
    #[arg(long, default_value_t = 128)]
    walk_length: usize,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Table2Args {
    #[arg(long, default_value = "data")]
    cache: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Subset of dataset names (all eleven by default).
    #[arg(long, value_delimiter = ',')]
    datasets: Vec<String>,
    #[arg(long, default_value_t = 5)]
    instances: usize,
    #[arg(long, value_delimiter = ',', default_value = "RW,SRW,WRW")]
    kernels: Vec<String>,
    #[arg(long, default_value = "seen")]
    null_target: String,
    #[arg(long, default_value_t = 16)]
    walks_per_node: usize,
    #[arg(long, default_value_t = 128)]
    walk_length: usize,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value = "sum")]
    duplicates: String,
    #[arg(long, default_value = "sum")]
    directed: String,
}

fn null_target(s: &str) -> Result<NullTarget> {
    NullTarget::parse(s).ok_or_else(|| anyhow!("--null-target must be seen or original"))
}

fn write_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn generate(a: &GenerateArgs, g: &Global) -> Result<()> {
    let model = Model::parse(&a.model).filter(|m| !matches!(m, Model::Dataset(_)));
    let spec = match model.ok_or_else(|| anyhow!("unknown model {:?}", a.model))? {
        Model::Er => GraphSpec::Er {
            n: a.nodes,
            avg_degree: a.avg_degree,
            weights: config::parse_weight_dist(&a.weights).ok_or_else(|| anyhow!("unknown weights {:?}", a.weights))?,
        },
        Model::Sbm => GraphSpec::Sbm {
            n: a.nodes,
            avg_degree: a.avg_degree,
            ratio: a.ratio,
            mode: config::parse_sbm_weights(&a.sbm_weights)
                .ok_or_else(|| anyhow!("unknown sbm weights {:?}", a.sbm_weights))?,
        },
        Model::Waxman => GraphSpec::Waxman {
            n: a.nodes,
            avg_degree: a.avg_degree,
            beta: a.beta,
        },
        m @ (Model::BaWsf | Model::BaWe) => GraphSpec::Ba {
            n: a.nodes,
            m: a.m.unwrap_or_else(|| ba_m_for_degree(a.avg_degree)),
            variant: if m == Model::BaWsf { BaVariant::Wsf } else { BaVariant::We },
        },
        Model::Complete => GraphSpec::Complete {
            n: a.nodes,
            features: a.features,
        },
        Model::Dataset(_) => unreachable!(),
    };
    let graph = spec.generate(g.seed())?;
    edgelist::write_edge_list_file(&graph, &a.out)?;
    write_json(&json!({
        "out": a.out,
        "model": a.model,
        "seed": g.seed(),
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "mean_degree": graph.mean_degree(),
    }))
}

fn walk(source: &GraphSource, w: &WalkArgs, out: &Path, g: &Global) -> Result<()> {
    let (graph, _) = source.load(g)?;
    let cfg = w.config(g.seed())?;
    let corpus = if g.workers() > 1 {
        build_corpus_parallel(&graph, &cfg, g.workers())?
    } else {
        build_corpus(&graph, &cfg)?
    };
    write_atomic(out, |f| export::write_corpus(&corpus, f))?;
    write_json(&json!({
        "out": out,
        "walks": corpus.len(),
        "tokens": corpus.token_count(),
        "truncated_walks": corpus.truncated().len(),
        "fingerprint": format!("{:016x}", corpus.fingerprint()),
    }))
}

fn embed(corpus_path: &Path, t: &TrainArgs, out: &Path, g: &Global) -> Result<()> {
    let corpus = export::read_corpus(BufReader::new(
        File::open(corpus_path).with_context(|| format!("opening {}", corpus_path.display()))?,
    ))?;
    let cfg = t.config(g.seed(), g)?;
    let start = Instant::now();
    let (emb, report) = train_with_report(&corpus, &cfg)?;
    write_atomic(out, |f| export::write_embeddings(&emb, f))?;
    write_json(&json!({
        "out": out,
        "nodes": emb.node_count(),
        "dim": emb.dim(),
        "epoch_loss": report.epoch_loss,
        "wall_ms": start.elapsed().as_millis() as u64,
    }))
}

fn run(a: &RunArgs, g: &Global) -> Result<()> {
    let (graph, source) = a.source.load(g)?;
    let cfg = RunConfig {
        walk: a.walk.config(0)?,
        train: a.train.config(0, g)?,
        weight_mode: WeightMode::parse(&a.weight_mode)
            .ok_or_else(|| anyhow!("--weight-mode must be original or shuffled"))?,
        null_target: null_target(&a.null_target)?,
        seed: g.seed(),
        keep_pairs: a.pairs_out.is_some(),
        walk_threads: g.workers(),
    };
    let start = Instant::now();
    let res = run_single(&graph, &cfg)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    if let (Some(path), Some(pairs)) = (&a.pairs_out, &res.pairs) {
        write_atomic(path, |f| export::write_pairs(pairs, graph.labels(), f))?;
    }
    let mut out = export::result_json(&res);
    out["source"] = source;
    out["nodes"] = json!(graph.node_count());
    out["edges"] = json!(graph.edge_count());
    out["wall_ms"] = json!(wall_ms);
    write_json(&out)
}

fn sweep_meta(spec: &SweepSpec, extra: serde_json::Value) -> serde_json::Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "model": spec.model.name(),
        "varied": spec.varied.name(),
        "grid": spec.grid,
        "fixed": format!("{:?}", spec.fixed),
        "instances": spec.instances,
        "kernels": spec.kernels.iter().map(|k| k.name()).collect::<Vec<_>>(),
        "weight_modes": spec.weight_modes.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "null_target": spec.null_target.name(),
        "walk": export::walk_json(&spec.walk),
        "train": export::train_json(&spec.train),
        "seed": spec.seed,
        "fingerprint": spec.fingerprint(),
        "source": extra,
    })
}

fn report_sweep(res: &sweep::SweepResult, out: &Path) -> Result<()> {
    let failed = res.rows.iter().filter(|r| r.error.is_some()).count();
    let summary: Vec<_> = res
        .summary()
        .iter()
        .map(|s| {
            json!({
                "cell_value": s.cell_value,
                "kernel": s.kernel.name(),
                "weight_mode": s.weight_mode.name(),
                "mean_r": s.mean_r,
                "sd_r": s.sd_r,
                "median_r": s.median_r,
                "count": s.count,
                "undefined": s.undefined,
            })
        })
        .collect();
    write_json(&json!({
        "out": out,
        "summary_out": sweep::summary_path(out),
        "rows": res.rows.len(),
        "failed_rows": failed,
        "summary": summary,
    }))
}

fn run_sweep_cmd(config_path: &Path, out: Option<&Path>, g: &Global) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(config_path)
        .with_context(|| format!("{} (see `weightwalk sweep --help` for the schema)", config_path.display()))?;
    if g.deterministic {
        cfg.deterministic = true;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(w) = g.workers {
        cfg.workers = Some(w);
    }
    let mut spec = cfg.to_spec()?;
    spec.workers = spec.workers.max(1);
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| anyhow!("no output path: pass --out or set \"output\""))?;
    let (dataset, source) = match &spec.model {
        Model::Dataset(name) => {
            let load = LoadOptions {
                parse: cfg.parse_options()?,
                largest_component: cfg.dataset.largest_component,
            };
            let cache = cfg.dataset.cache.clone().unwrap_or_else(|| PathBuf::from("data"));
            let d = datasets::load_dataset(name, &cache, &HttpTransport::default(), g.offline(), &load)?;
            let meta = json!({
                "dataset": d.fetched.dataset.name,
                "sha256": d.fetched.sha256,
                "largest_component": d.largest_component,
                "duplicate_policy": load.parse.duplicate_policy.name(),
                "directed_collapse": load.parse.directed_collapse.name(),
            });
            (Some(d.graph), meta)
        }
        _ => (None, json!("generated")),
    };
    let meta = sweep_meta(&spec, source);
    let res = sweep::run_sweep_to_file(&spec, dataset.as_ref(), &out, meta)?;
    report_sweep(&res, &out)
}

fn threshold(a: &ThresholdArgs, g: &Global) -> Result<()> {
    let spec = SweepSpec {
        model: Model::Complete,
        varied: Varied::Threshold,
        grid: a.grid.clone(),
        fixed: Fixed {
            nodes: a.nodes,
            features: a.features,
            ..Fixed::default()
        },
        instances: a.instances,
        kernels: a.kernels.iter().map(|k| parse_kernel(k)).collect::<Result<_>>()?,
        weight_modes: vec![WeightMode::Original],
        null_target: NullTarget::Seen,
        walk: WalkConfig {
            walks_per_node: a.walks_per_node,
            walk_length: a.walk_length,
            ..WalkConfig::default()
        },
        train: a.train.config(0, g)?,
        seed: g.seed(),
        workers: g.workers(),
    };
    let meta = sweep_meta(&spec, json!("generated"));
    let res = sweep::run_sweep_to_file(&spec, None, &a.out, meta)?;
    report_sweep(&res, &a.out)
}

fn table2_cmd(a: &Table2Args, g: &Global) -> Result<()> {
    let picked = if a.datasets.is_empty() {
        datasets::DATASETS.iter().collect()
    } else {
        a.datasets.iter().map(|n| datasets::lookup(n)).collect::<Result<Vec<_>, _>>()?
    };
    let spec = Table2Spec {
        datasets: picked,
        kernels: a.kernels.iter().map(|k| parse_kernel(k)).collect::<Result<_>>()?,
        instances: a.instances,
        null_target: null_target(&a.null_target)?,
        walk: WalkConfig {
            walks_per_node: a.walks_per_node,
            walk_length: a.walk_length,
            ..WalkConfig::default()
        },
        train: a.train.config(0, g)?,
        seed: g.seed(),
        workers: g.workers(),
        load: LoadOptions {
            parse: ParseOptions {
                duplicate_policy: DuplicatePolicy::parse(&a.duplicates)
                    .ok_or_else(|| anyhow!("--duplicates must be sum or reject"))?,
                directed_collapse: DirectedCollapse::parse(&a.directed)
                    .ok_or_else(|| anyhow!("--directed must be max, sum or mean"))?,
                ..ParseOptions::default()
            },
            largest_component: None,
        },
    };
    spec.walk.validate()?;
    let rows = table2::run_table2(&spec, &a.cache, &HttpTransport::default(), g.offline());
    let cells = table2::summarize_table2(&rows);
    write_atomic(&a.out, |f| table2::write_table2(&rows, f))?;
    let summary_out = sweep::summary_path(&a.out);
    write_atomic(&summary_out, |f| table2::write_table2_summary(&cells, f))?;
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": spec.seed,
        "instances": spec.instances,
        "null_target": spec.null_target.name(),
        "duplicate_policy": spec.load.parse.duplicate_policy.name(),
        "directed_collapse": spec.load.parse.directed_collapse.name(),
        "walk": export::walk_json(&spec.walk),
        "train": export::train_json(&spec.train),
    });
    write_atomic(&sweep::meta_path(&a.out), |f| {
        serde_json::to_writer_pretty(&mut *f, &meta)?;
        writeln!(f)
    })?;
    let failed: Vec<&str> = {
        let mut v: Vec<&str> = rows.iter().filter(|t| t.row.error.is_some()).map(|t| t.dataset).collect();
        v.dedup();
        v
    };
    write_json(&json!({
        "out": a.out,
        "summary_out": summary_out,
        "rows": rows.len(),
        "datasets_failed": failed,
    }))
}

fn fetch(names: &[String], all: bool, list: bool, cache: &Path, g: &Global) -> Result<()> {
    if list {
        let rows: Vec<_> = datasets::DATASETS
            .iter()
            .map(|d| json!({"name": d.name, "title": d.title, "nodes": d.nodes, "edges": d.edges, "url": d.url()}))
            .collect();
        return write_json(&json!(rows));
    }
    let picked: Vec<&str> = if all {
        datasets::DATASETS.iter().map(|d| d.name).collect()
    } else if names.is_empty() {
        bail!("name at least one dataset, or pass --all or --list");
    } else {
        names.iter().map(String::as_str).collect()
    };
    let transport = HttpTransport::default();
    let mut out = Vec::new();
    for name in picked {
        let f = datasets::fetch_dataset(name, cache, &transport, g.offline())?;
        info!("{} -> {}", f.dataset.name, f.path.display());
        out.push(json!({
            "name": f.dataset.name,
            "path": f.path,
            "sha256": f.sha256,
            "from_cache": f.from_cache,
        }));
    }
    write_json(&json!(out))
}

fn plot_cmd(input: &Path, out: &Path, title: Option<&str>) -> Result<()> {
    let rows = sweep::read_rows(input)?;
    if rows.is_empty() {
        bail!("{} has no rows", input.display());
    }
    let default_title = format!("{} vs {}", rows[0].model, rows[0].varied.name());
    let svg = plot::render_svg(&rows, title.unwrap_or(&default_title));
    write_atomic(out, |f| f.write_all(svg.as_bytes()))?;
    write_json(&json!({ "out": out }))
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Generate(a) => generate(a, g),
        Cmd::Walk { source, walk: w, out } => walk(source, w, out, g),
        Cmd::Embed { corpus, train, out } => embed(corpus, train, out, g),
        Cmd::Run(a) => run(a, g),
        Cmd::Sweep { config, out } => run_sweep_cmd(config, out.as_deref(), g),
        Cmd::Threshold(a) => threshold(a, g),
        Cmd::Table2(a) => table2_cmd(a, g),
        Cmd::Fetch { names, all, list, cache } => fetch(names, *all, *list, cache, g),
        Cmd::Plot { input, out, title } => plot_cmd(input, out, title.as_deref()),
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    use weightwalk::datasets::DatasetError;
    for cause in e.chain() {
        if let Some(d) = cause.downcast_ref::<DatasetError>() {
            return match d {
                DatasetError::UnknownDataset { .. } => "unknown_dataset",
                DatasetError::NetworkUnavailable { .. } => "network_unavailable",
                DatasetError::UpstreamFormatChanged { .. } => "upstream_format_changed",
                DatasetError::EdgeList(_) => "parse_error",
                DatasetError::Io(_) => "io_error",
            };
        }
        if cause.is::<edgelist::EdgeListError>() {
            return "parse_error";
        }
        if cause.is::<config::ConfigError>() {
            return "config_error";
        }
        if cause.is::<sweep::SweepError>() {
            return "sweep_error";
        }
        if cause.is::<io::Error>() {
            return "io_error";
        }
    }
    "error"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let causes: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            let body = json!({"error": {"kind": error_kind(&e), "message": causes.join(": ")}});
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
