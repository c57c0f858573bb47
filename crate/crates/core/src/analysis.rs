//! Edge-level cosine similarity, correlation with edge weights, and the
//! single-run and threshold-cell drivers the sweeps are built from.

use alloc::borrow::Cow;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embedder::{self, EmbeddingMatrix, TrainConfig, TrainError};
use crate::graph::{GraphError, NodeId, WeightedGraph};
use crate::math;
use crate::rng;
use crate::walker::{self, Kernel, WalkConfig, WalkError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("a sequence has zero variance")]
    DegenerateVariance,
    #[error("node {0} has a zero embedding vector")]
    ZeroVector(NodeId),
    #[error("embedding has {embedded} rows but graph has {graph} nodes")]
    NodeCountMismatch { embedded: usize, graph: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSimilarity {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
    pub cosine: f64,
}

/// One record per edge of `g`, in edge order.
pub fn edge_cosine_similarities(
    g: &WeightedGraph,
    emb: &EmbeddingMatrix,
) -> Result<Vec<EdgeSimilarity>, AnalysisError> {
    if emb.node_count() < g.node_count() {
        return Err(AnalysisError::NodeCountMismatch {
            embedded: emb.node_count(),
            graph: g.node_count(),
        });
    }
    g.edges()
        .iter()
        .map(|e| {
            let cosine = emb
                .cosine(e.u as usize, e.v as usize)
                .ok_or_else(|| AnalysisError::ZeroVector(zero_row(emb, e.u, e.v)))?;
            Ok(EdgeSimilarity {
                u: e.u,
                v: e.v,
                weight: e.w,
                cosine,
            })
        })
        .collect()
}

fn zero_row(emb: &EmbeddingMatrix, u: NodeId, v: NodeId) -> NodeId {
    if emb.vector(u as usize).iter().all(|&x| x == 0.0) {
        u
    } else {
        v
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson correlation (two-pass).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(AnalysisError::TooFewPoints(x.len()));
    }
    // the rounded mean of a constant need not equal it, so check exactly
    if x.iter().all(|&a| a == x[0]) || y.iter().all(|&b| b == y[0]) {
        return Err(AnalysisError::DegenerateVariance);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 || !sxx.is_finite() || !syy.is_finite() {
        return Err(AnalysisError::DegenerateVariance);
    }
    Ok((sxy / (math::sqrt(sxx) * math::sqrt(syy))).clamp(-1.0, 1.0))
}

/// Ranks starting at 1; ties share their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = alloc::vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    pearson(&ranks(x), &ranks(y))
}

/// `Ok(None)` for degenerate variance, which is an expected outcome (e.g.
/// constant weights) rather than a failure.
pub fn pearson_or_undefined(x: &[f64], y: &[f64]) -> Result<Option<f64>, AnalysisError> {
    match pearson(x, y) {
        Ok(r) => Ok(Some(r)),
        Err(AnalysisError::DegenerateVariance) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightMode {
    Original,
    Shuffled,
}

impl WeightMode {
    pub fn name(&self) -> &'static str {
        match self {
            WeightMode::Original => "original",
            WeightMode::Shuffled => "shuffled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Some(WeightMode::Original),
            "shuffled" => Some(WeightMode::Shuffled),
            _ => None,
        }
    }
}

/// Which weights a shuffled run is correlated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullTarget {
    /// The shuffled weights the walk was driven by.
    Seen,
    /// The weights before shuffling.
    Original,
}

impl NullTarget {
    pub fn name(&self) -> &'static str {
        match self {
            NullTarget::Seen => "seen",
            NullTarget::Original => "original",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seen" => Some(NullTarget::Seen),
            "original" => Some(NullTarget::Original),
            _ => None,
        }
    }
}

/// One walk + train + correlate run. `seed` overrides the seeds inside
/// `walk` and `train`: the shuffle, walk and training streams are all
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub weight_mode: WeightMode,
    pub null_target: NullTarget,
    pub seed: u64,
    /// Keep the per-edge records in the result.
    pub keep_pairs: bool,
    /// Corpus generation threads (the corpus does not depend on this).
    pub walk_threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            walk: WalkConfig::default(),
            train: TrainConfig::default(),
            weight_mode: WeightMode::Original,
            null_target: NullTarget::Seen,
            seed: 0,
            keep_pairs: false,
            walk_threads: 1,
        }
    }
}

impl RunConfig {
    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.walk.kernel = kernel;
        self
    }

    fn seeded_walk(&self) -> WalkConfig {
        WalkConfig {
            seed: rng::derive_seed(self.seed, &[WALK_STREAM]),
            ..self.walk
        }
    }

    fn seeded_train(&self) -> TrainConfig {
        TrainConfig {
            seed: rng::derive_seed(self.seed, &[TRAIN_STREAM]),
            ..self.train
        }
    }

    fn shuffle_seed(&self) -> u64 {
        rng::derive_seed(self.seed, &[SHUFFLE_STREAM])
    }
}

const WALK_STREAM: u64 = 0x57;
const TRAIN_STREAM: u64 = 0x54;
const SHUFFLE_STREAM: u64 = 0x53;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    /// `None` when either variable has zero variance.
    pub pearson_r: Option<f64>,
    pub spearman_r: Option<f64>,
    pub n_pairs: usize,
    pub pairs: Option<Vec<EdgeSimilarity>>,
    pub kernel: Kernel,
    pub weight_mode: WeightMode,
    pub null_target: NullTarget,
    pub seed: u64,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub components: usize,
    pub largest_component: usize,
    /// Nodes whose walks stopped immediately (no neighbors).
    pub truncated_walks: usize,
    pub corpus_fingerprint: u64,
    pub epoch_loss: Vec<f64>,
}

struct Trained {
    emb: EmbeddingMatrix,
    walk: WalkConfig,
    train: TrainConfig,
    truncated: usize,
    fingerprint: u64,
    epoch_loss: Vec<f64>,
}

fn walk_and_train(g: &WeightedGraph, cfg: &RunConfig) -> Result<Trained, AnalysisError> {
    let walk = cfg.seeded_walk();
    let train = cfg.seeded_train();
    let corpus = corpus(g, &walk, cfg.walk_threads)?;
    let (emb, report) = embedder::train_with_report(&corpus, &train)?;
    Ok(Trained {
        emb,
        walk,
        train,
        truncated: corpus.truncated().len(),
        fingerprint: corpus.fingerprint(),
        epoch_loss: report.epoch_loss,
    })
}

#[cfg(feature = "std")]
fn corpus(g: &WeightedGraph, walk: &WalkConfig, threads: usize) -> Result<walker::WalkCorpus, WalkError> {
    if threads > 1 {
        walker::build_corpus_parallel(g, walk, threads)
    } else {
        walker::build_corpus(g, walk)
    }
}

#[cfg(not(feature = "std"))]
fn corpus(g: &WeightedGraph, walk: &WalkConfig, _threads: usize) -> Result<walker::WalkCorpus, WalkError> {
    walker::build_corpus(g, walk)
}

fn correlate(pairs: &[EdgeSimilarity]) -> Result<(Option<f64>, Option<f64>), AnalysisError> {
    let w: Vec<f64> = pairs.iter().map(|p| p.weight).collect();
    let c: Vec<f64> = pairs.iter().map(|p| p.cosine).collect();
    let r = pearson_or_undefined(&w, &c)?;
    let s = match spearman(&w, &c) {
        Ok(s) => Some(s),
        Err(_) => None,
    };
    Ok((r, s))
}

/// Walk `g` (or a weight-shuffled copy), train, and correlate edge weights
/// with embedding cosines.
pub fn run_single(g: &WeightedGraph, cfg: &RunConfig) -> Result<CorrelationResult, AnalysisError> {
    let walked: Cow<'_, WeightedGraph> = match cfg.weight_mode {
        WeightMode::Original => Cow::Borrowed(g),
        WeightMode::Shuffled => Cow::Owned(g.shuffle_weights(cfg.shuffle_seed())),
    };
    let t = walk_and_train(&walked, cfg)?;
    let mut pairs = edge_cosine_similarities(&walked, &t.emb)?;
    if cfg.weight_mode == WeightMode::Shuffled && cfg.null_target == NullTarget::Original {
        for (p, e) in pairs.iter_mut().zip(g.edges()) {
            p.weight = e.w;
        }
    }
    let (pearson_r, spearman_r) = correlate(&pairs)?;
    let (components, largest_component) = walked.component_summary();
    Ok(CorrelationResult {
        pearson_r,
        spearman_r,
        n_pairs: pairs.len(),
        pairs: cfg.keep_pairs.then_some(pairs),
        kernel: cfg.walk.kernel,
        weight_mode: cfg.weight_mode,
        null_target: cfg.null_target,
        seed: cfg.seed,
        walk: t.walk,
        train: t.train,
        components,
        largest_component,
        truncated_walks: t.truncated,
        corpus_fingerprint: t.fingerprint,
        epoch_loss: t.epoch_loss,
    })
}

/// Result of one pruning level of the threshold experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub q: f64,
    pub threshold: f64,
    pub surviving_edges: usize,
    pub active_nodes: usize,
    /// Against the original weights over every original edge whose endpoints
    /// both keep at least one edge after pruning.
    pub all_pairs: CorrelationResult,
    /// Against the original weights over surviving edges only.
    pub surviving_r: Option<f64>,
    pub surviving_pairs: usize,
}

/// Prune `g` at weight quantile `q`, walk and train on the pruned graph, and
/// correlate cosines with the pre-pruning weights.
pub fn run_threshold_cell(
    g: &WeightedGraph,
    q: f64,
    cfg: &RunConfig,
) -> Result<ThresholdResult, AnalysisError> {
    let threshold = g.weight_quantile(q).ok_or(GraphError::EmptyGraph)?;
    let pruned = g.threshold_by_percentile(q)?;
    let t = walk_and_train(&pruned, cfg)?;
    let active = |u: NodeId| pruned.degree(u) > 0;
    let mut all = Vec::new();
    for e in g.edges().iter().filter(|e| active(e.u) && active(e.v)) {
        let cosine = t
            .emb
            .cosine(e.u as usize, e.v as usize)
            .ok_or_else(|| AnalysisError::ZeroVector(zero_row(&t.emb, e.u, e.v)))?;
        all.push(EdgeSimilarity {
            u: e.u,
            v: e.v,
            weight: e.w,
            cosine,
        });
    }
    let surviving = edge_cosine_similarities(&pruned, &t.emb)?;
    let (pearson_r, spearman_r) = correlate(&all)?;
    let (surviving_r, _) = correlate(&surviving)?;
    let (components, largest_component) = pruned.component_summary();
    let active_nodes = (0..pruned.node_count() as NodeId).filter(|&u| active(u)).count();
    Ok(ThresholdResult {
        q,
        threshold,
        surviving_edges: pruned.edge_count(),
        active_nodes,
        surviving_pairs: surviving.len(),
        surviving_r,
        all_pairs: CorrelationResult {
            pearson_r,
            spearman_r,
            n_pairs: all.len(),
            pairs: cfg.keep_pairs.then_some(all),
            kernel: cfg.walk.kernel,
            weight_mode: WeightMode::Original,
            null_target: NullTarget::Seen,
            seed: cfg.seed,
            walk: t.walk,
            train: t.train,
            components,
            largest_component,
            truncated_walks: t.truncated,
            corpus_fingerprint: t.fingerprint,
            epoch_loss: t.epoch_loss,
        },
    })
}

/// Aggregate of a set of per-instance correlations. Undefined values are
/// counted but excluded from the statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub undefined: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation (n - 1); needs two defined values.
    pub sd: Option<f64>,
    pub median: Option<f64>,
}

pub fn summarize(values: &[Option<f64>]) -> Summary {
    let mut v: Vec<f64> = values.iter().flatten().copied().collect();
    let undefined = values.len() - v.len();
    if v.is_empty() {
        return Summary {
            count: 0,
            undefined,
            mean: None,
            sd: None,
            median: None,
        };
    }
    let m = mean(&v);
    let sd = (v.len() > 1).then(|| {
        math::sqrt(v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64)
    });
    v.sort_by(f64::total_cmp);
    let k = v.len();
    let median = if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    };
    Summary {
        count: k,
        undefined,
        mean: Some(m),
        sd,
        median: Some(median),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y2: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y2).unwrap() - 1.0).abs() < 1e-15);
        let yn: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &yn).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[2.0; 4]), Err(AnalysisError::DegenerateVariance));
        assert_eq!(pearson(&x[..2], &x[..2]), Err(AnalysisError::TooFewPoints(2)));
        assert_eq!(pearson(&x, &x[..3]), Err(AnalysisError::LengthMismatch(4, 3)));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), [2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn spearman_of_monotone_map_is_one() {
        let x = [0.1, 0.5, 0.2, 0.9, 0.3];
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[Some(1.0), None, Some(3.0), Some(2.0)]);
        assert_eq!(s.count, 3);
        assert_eq!(s.undefined, 1);
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.sd, Some(1.0));
        assert_eq!(s.median, Some(2.0));
        let e = summarize(&[None]);
        assert_eq!((e.count, e.mean), (0, None));
    }

    fn small_ring(weights: &[f64]) -> WeightedGraph {
        let n = weights.len();
        let edges = (0..n)
            .map(|i| Edge::new(i as NodeId, ((i + 1) % n) as NodeId, weights[i]))
            .collect();
        WeightedGraph::build(edges, n).unwrap()
    }

    fn small_cfg() -> RunConfig {
        RunConfig {
            walk: WalkConfig {
                walks_per_node: 4,
                walk_length: 10,
                ..WalkConfig::default()
            },
            train: TrainConfig {
                dim: 8,
                epochs: 1,
                ..TrainConfig::default()
            },
            keep_pairs: true,
            ..RunConfig::default()
        }
    }

    #[test]
    fn constant_weights_give_undefined_r() {
        let g = small_ring(&[1.0; 8]);
        for k in Kernel::ALL {
            let r = run_single(&g, &small_cfg().with_kernel(k)).unwrap();
            assert_eq!(r.pearson_r, None);
            assert_eq!(r.n_pairs, 8);
        }
    }

    #[test]
    fn null_target_switches_weight_column() {
        let w: Vec<f64> = (1..=10).map(f64::from).collect();
        let g = small_ring(&w);
        let base = RunConfig {
            weight_mode: WeightMode::Shuffled,
            ..small_cfg()
        };
        let seen = run_single(&g, &base).unwrap();
        let orig = run_single(&g, &RunConfig { null_target: NullTarget::Original, ..base }).unwrap();
        let (ps, po) = (seen.pairs.unwrap(), orig.pairs.unwrap());
        assert!(ps.iter().zip(&po).all(|(a, b)| a.cosine == b.cosine));
        assert!(po.iter().zip(g.edges()).all(|(p, e)| p.weight == e.w));
        assert!(ps.iter().zip(g.edges()).any(|(p, e)| p.weight != e.w));
    }

    #[test]
    fn threshold_q0_matches_run_single() {
        let w: Vec<f64> = (1..=12).map(|i| f64::from(i) * 0.1).collect();
        let g = small_ring(&w);
        let cfg = small_cfg();
        let single = run_single(&g, &cfg).unwrap();
        let cell = run_threshold_cell(&g, 0.0, &cfg).unwrap();
        assert_eq!(cell.all_pairs.pearson_r, single.pearson_r);
        assert_eq!(cell.all_pairs.pairs, single.pairs);
        assert_eq!(cell.surviving_r, single.pearson_r);
    }

    #[test]
    fn threshold_restricts_pairs_to_active_nodes() {
        // Ring of 12; pruning the lowest 50% leaves edges with w >= quantile.
        let w: Vec<f64> = (1..=12).map(f64::from).collect();
        let g = small_ring(&w);
        let cell = run_threshold_cell(&g, 0.5, &small_cfg()).unwrap();
        assert_eq!(cell.surviving_edges, 6);
        // Surviving edges (6,7)..(11,0) touch nodes 6..=11 and 0.
        assert_eq!(cell.active_nodes, 7);
        // Original edges among active nodes: the 6 survivors plus none else.
        assert_eq!(cell.all_pairs.n_pairs, 6);
    }

    #[test]
    fn cosine_examples() {
        let emb = EmbeddingMatrix::from_rows(3, 2, alloc::vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0], alloc::vec![0.0; 6]);
        let g = WeightedGraph::build(
            alloc::vec![Edge::new(0, 1, 1.0), Edge::new(0, 2, 2.0), Edge::new(1, 2, 3.0)],
            3,
        )
        .unwrap();
        let s = edge_cosine_similarities(&g, &emb).unwrap();
        assert!((s[0].cosine - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        assert!(s[1].cosine.abs() < 1e-15);
        let zero = EmbeddingMatrix::from_rows(3, 2, alloc::vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0], alloc::vec![0.0; 6]);
        assert_eq!(edge_cosine_similarities(&g, &zero), Err(AnalysisError::ZeroVector(1)));
    }
}
