//! Weighted random graph families.
//!
//! Every generator is a pure function of its parameters and seed. All
//! generated weights are finite and strictly positive.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use thiserror::Error;

use crate::graph::{Edge, GraphError, NodeId, WeightedGraph};
use crate::math;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("degenerate parameters: {0}")]
    DegenerateParams(&'static str),
    #[error("waxman calibration failed: alpha = 1 gives mean degree {achievable:.3}, target {target}")]
    CalibrationFailed { achievable: f64, target: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Edge-weight distribution for the Erdős–Rényi family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { scale: f64 },
}

impl WeightDist {
    pub const fn uniform() -> Self {
        WeightDist::Uniform { low: 0.1, high: 1.0 }
    }

    pub const fn normal() -> Self {
        WeightDist::Normal { mean: 0.55, sd: 0.15 }
    }

    pub const fn exponential() -> Self {
        WeightDist::Exponential { scale: 0.45 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightDist::Uniform { .. } => "uniform",
            WeightDist::Normal { .. } => "normal",
            WeightDist::Exponential { .. } => "exponential",
        }
    }

    /// Draw one weight; non-positive draws are rejected and redrawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let w = match *self {
                WeightDist::Uniform { low, high } => rng.random_range(low..=high),
                WeightDist::Normal { mean, sd } => Normal::new(mean, sd)
                    .expect("finite normal parameters")
                    .sample(rng),
                WeightDist::Exponential { scale } => Exp::new(1.0 / scale)
                    .expect("positive exponential rate")
                    .sample(rng),
            };
            if w > 0.0 && w.is_finite() {
                return w;
            }
        }
    }
}

/// G(n, p) with `p = target_k / (n - 1)` and i.i.d. weights.
pub fn gen_er(n: usize, target_k: f64, wd: WeightDist, seed: u64) -> Result<WeightedGraph, GenError> {
    if n < 2 {
        return Err(GenError::DegenerateParams("er needs n >= 2"));
    }
    let p = target_k / (n - 1) as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(GenError::DegenerateParams("er edge probability outside (0, 1]"));
    }
    let mut rng = rng::stream(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push(Edge::new(u as NodeId, v as NodeId, wd.sample(&mut rng)));
            }
        }
    }
    Ok(WeightedGraph::build(edges, n)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbmWeightMode {
    /// Weight is the block-pair connection probability.
    Exact,
    /// Block-pair probability times an independent `U[0.5, 1.5]` factor.
    Jitter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
}

impl SbmParams {
    pub const BLOCKS: usize = 5;

    /// Block sizes for `n` nodes in five blocks, remainder spread over the
    /// first blocks, and `p_in`, `p_out = ratio * p_in` solved so the expected
    /// mean degree is `target_k`.
    pub fn solve(n: usize, target_k: f64, ratio: f64) -> Result<Self, GenError> {
        if n < Self::BLOCKS {
            return Err(GenError::DegenerateParams("sbm needs at least one node per block"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(GenError::DegenerateParams("sbm ratio p_out/p_in must lie in (0, 1)"));
        }
        if !(target_k > 0.0) {
            return Err(GenError::DegenerateParams("sbm target degree must be positive"));
        }
        let base = n / Self::BLOCKS;
        let extra = n % Self::BLOCKS;
        let block_sizes: Vec<usize> =
            (0..Self::BLOCKS).map(|b| base + usize::from(b < extra)).collect();
        // E[k] averaged over nodes: p_in (b - 1) + p_out (n - b) per node of a size-b block
        let denom: f64 = block_sizes
            .iter()
            .map(|&b| b as f64 * ((b as f64 - 1.0) + ratio * (n - b) as f64))
            .sum();
        let p_in = target_k * n as f64 / denom;
        if p_in > 1.0 {
            return Err(GenError::DegenerateParams("sbm solved p_in exceeds 1"));
        }
        Ok(Self {
            block_sizes,
            p_in,
            p_out: ratio * p_in,
        })
    }

    pub fn block_of(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| core::iter::repeat_n(b, s))
            .collect()
    }

    pub fn expected_mean_degree(&self) -> f64 {
        let n: usize = self.block_sizes.iter().sum();
        self.block_sizes
            .iter()
            .map(|&b| {
                b as f64 * (self.p_in * (b as f64 - 1.0) + self.p_out * (n - b) as f64)
            })
            .sum::<f64>()
            / n as f64
    }
}

/// Five-block stochastic block model.
pub fn gen_sbm(
    n: usize,
    target_k: f64,
    ratio: f64,
    mode: SbmWeightMode,
    seed: u64,
) -> Result<WeightedGraph, GenError> {
    let params = SbmParams::solve(n, target_k, ratio)?;
    let block = params.block_of();
    let mut rng = rng::stream(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] { params.p_in } else { params.p_out };
            if rng.random::<f64>() < p {
                let w = match mode {
                    SbmWeightMode::Exact => p,
                    SbmWeightMode::Jitter => p * rng.random_range(0.5..=1.5),
                };
                edges.push(Edge::new(u as NodeId, v as NodeId, w));
            }
        }
    }
    Ok(WeightedGraph::build(edges, n)?)
}

/// Default distance decay. At n = 1024, k = 16 the unweighted-walk
/// correlation peaks near beta = 0.1; 0.15 keeps most of that signal while
/// k = 16 stays reachable (alpha capped) down to n = 128.
pub const DEFAULT_WAXMAN_BETA: f64 = 0.15;

/// `alpha * exp(-d / beta)`.
pub fn waxman_probability(alpha: f64, beta: f64, d: f64) -> f64 {
    alpha * math::exp(-d / beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaxmanGraph {
    pub graph: WeightedGraph,
    pub alpha: f64,
    pub beta: f64,
    /// `true` when the target degree needed `alpha > 1` and alpha was capped.
    pub alpha_capped: bool,
    pub positions: Vec<[f64; 2]>,
}

/// Waxman graph on uniform points in the unit square. `alpha` is set so the
/// expected edge count (given the drawn positions) is `n * target_k / 2`.
/// Each realized edge carries its connection probability as weight.
pub fn gen_waxman(n: usize, target_k: f64, beta: f64, seed: u64) -> Result<WaxmanGraph, GenError> {
    if n < 2 {
        return Err(GenError::DegenerateParams("waxman needs n >= 2"));
    }
    if !(beta > 0.0) {
        return Err(GenError::DegenerateParams("waxman beta must be positive"));
    }
    if !(target_k > 0.0) {
        return Err(GenError::DegenerateParams("waxman target degree must be positive"));
    }
    let mut rng = rng::stream(seed);
    let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let dist = |u: usize, v: usize| {
        let dx = positions[u][0] - positions[v][0];
        let dy = positions[u][1] - positions[v][1];
        math::sqrt(dx * dx + dy * dy)
    };
    // Expected edges are linear in alpha, so the calibration has a closed form.
    let mut mass = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            mass += waxman_probability(1.0, beta, dist(u, v));
        }
    }
    let achievable = 2.0 * mass / n as f64;
    if achievable < 0.5 * target_k {
        return Err(GenError::CalibrationFailed {
            achievable,
            target: target_k,
        });
    }
    let wanted = n as f64 * target_k / 2.0;
    let (alpha, alpha_capped) = if wanted > mass { (1.0, true) } else { (wanted / mass, false) };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = waxman_probability(alpha, beta, dist(u, v));
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push(Edge::new(u as NodeId, v as NodeId, p));
            }
        }
    }
    Ok(WaxmanGraph {
        graph: WeightedGraph::build(edges, n)?,
        alpha,
        beta,
        alpha_capped,
        positions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaVariant {
    /// Weighted scale-free: attachment weights from final degrees.
    Wsf,
    /// Weighted exponential: attachment weights from degrees at insertion time.
    We,
}

impl BaVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BaVariant::Wsf => "wsf",
            BaVariant::We => "we",
        }
    }
}

/// Preferential attachment from an `m`-clique seed. Each new node attaches to
/// `m` distinct targets drawn from the repeated-endpoints urn; its `m` edge
/// weights are `k_j / sum(k_j')` over its targets, so they sum to 1.
pub fn gen_ba(n: usize, m: usize, variant: BaVariant, seed: u64) -> Result<WeightedGraph, GenError> {
    if m == 0 {
        return Err(GenError::DegenerateParams("ba needs m >= 1"));
    }
    if m >= n {
        return Err(GenError::DegenerateParams("ba needs m < n"));
    }
    let mut rng = rng::stream(seed);
    let mut degree = vec![0usize; n];
    let mut urn: Vec<NodeId> = Vec::with_capacity(2 * n * m);
    let mut edges: Vec<Edge> = Vec::with_capacity(n * m);
    let seed_weight = 1.0 / m as f64;
    for u in 0..m {
        for v in (u + 1)..m {
            edges.push(Edge::new(u as NodeId, v as NodeId, seed_weight));
            degree[u] += 1;
            degree[v] += 1;
            urn.push(u as NodeId);
            urn.push(v as NodeId);
        }
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for i in m..n {
        targets.clear();
        if urn.is_empty() {
            // only for m = 1: the seed is a lone node
            targets.extend((0..m).map(|u| u as NodeId));
        } else {
            while targets.len() < m {
                let t = urn[rng.random_range(0..urn.len())];
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
        }
        let first = edges.len();
        for &t in &targets {
            edges.push(Edge::new(i as NodeId, t, 1.0));
            degree[i] += 1;
            degree[t as usize] += 1;
            urn.push(i as NodeId);
            urn.push(t);
        }
        if variant == BaVariant::We {
            normalize_attachment(&mut edges[first..], &degree);
        }
    }
    if variant == BaVariant::Wsf {
        let seed_edges = m * (m - 1) / 2;
        for chunk in edges[seed_edges..].chunks_mut(m) {
            normalize_attachment(chunk, &degree);
        }
    }
    Ok(WeightedGraph::build(edges, n)?)
}

fn normalize_attachment(edges: &mut [Edge], degree: &[usize]) {
    let total: usize = edges.iter().map(|e| degree[e.v as usize]).sum();
    for e in edges {
        e.w = degree[e.v as usize] as f64 / total as f64;
    }
}

/// Row-major `rows x cols` matrix of node features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn standard_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
        Self { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Cosine similarity of rows `a` and `b`, clamped to `[-1, 1]`.
    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.row(a), self.row(b));
        let mut dot = 0.0;
        let mut nx = 0.0;
        let mut ny = 0.0;
        for (p, q) in x.iter().zip(y) {
            dot += p * q;
            nx += p * p;
            ny += q * q;
        }
        let denom = math::sqrt(nx) * math::sqrt(ny);
        if denom == 0.0 {
            return 0.0;
        }
        (dot / denom).clamp(-1.0, 1.0)
    }
}

/// Smallest weight stored by the complete-graph builder; a raw cosine of
/// exactly -1 would otherwise map to zero.
pub const MIN_COMPLETE_WEIGHT: f64 = 1e-12;

/// Map a cosine in `[-1, 1]` to a positive weight in `(0, 1]`.
pub fn cosine_to_weight(c: f64) -> f64 {
    ((c + 1.0) / 2.0).max(MIN_COMPLETE_WEIGHT)
}

/// Complete graph whose weights are shifted cosine similarities
/// `(cos + 1) / 2` between standard-normal feature rows.
pub fn gen_complete_from_features(
    n: usize,
    f: usize,
    seed: u64,
) -> Result<(WeightedGraph, FeatureMatrix), GenError> {
    if n < 2 {
        return Err(GenError::DegenerateParams("complete graph needs n >= 2"));
    }
    if f == 0 {
        return Err(GenError::DegenerateParams("complete graph needs f >= 1"));
    }
    let mut rng = rng::stream(seed);
    let features = FeatureMatrix::standard_normal(n, f, &mut rng);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push(Edge::new(
                u as NodeId,
                v as NodeId,
                cosine_to_weight(features.cosine(u, v)),
            ));
        }
    }
    Ok((WeightedGraph::build(edges, n)?, features))
}

/// Declarative description of one graph family instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSpec {
    Er { n: usize, avg_degree: f64, weights: WeightDist },
    Sbm { n: usize, avg_degree: f64, ratio: f64, mode: SbmWeightMode },
    Waxman { n: usize, avg_degree: f64, beta: f64 },
    Ba { n: usize, m: usize, variant: BaVariant },
    Complete { n: usize, features: usize },
}

impl GraphSpec {
    pub fn generate(&self, seed: u64) -> Result<WeightedGraph, GenError> {
        match *self {
            GraphSpec::Er { n, avg_degree, weights } => gen_er(n, avg_degree, weights, seed),
            GraphSpec::Sbm { n, avg_degree, ratio, mode } => gen_sbm(n, avg_degree, ratio, mode, seed),
            GraphSpec::Waxman { n, avg_degree, beta } => {
                gen_waxman(n, avg_degree, beta, seed).map(|w| w.graph)
            }
            GraphSpec::Ba { n, m, variant } => gen_ba(n, m, variant, seed),
            GraphSpec::Complete { n, features } => {
                gen_complete_from_features(n, features, seed).map(|(g, _)| g)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GraphSpec::Er { n, .. }
            | GraphSpec::Sbm { n, .. }
            | GraphSpec::Waxman { n, .. }
            | GraphSpec::Ba { n, .. }
            | GraphSpec::Complete { n, .. } => n,
        }
    }
}

/// BA attachment count for a target mean degree (`m = k / 2`, at least 1).
pub fn ba_m_for_degree(avg_degree: f64) -> usize {
    let m = math::floor(avg_degree / 2.0 + 0.5) as usize;
    m.max(1)
}
