//! First-order random walks on weighted graphs.
//!
//! Three transition kernels:
//!
//! * [`Kernel::Rw`]: uniform over the neighbors of the current node.
//! * [`Kernel::Srw`]: proportional to the strength of the destination node.
//! * [`Kernel::Wrw`]: proportional to the weight of the traversed edge.
//!
//! Walks of a corpus are keyed by `(seed, start node, walk index)`: each walk
//! owns a ChaCha8 stream, so the corpus is bit-identical no matter how the
//! walks are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::graph::{NodeId, WeightedGraph};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    Rw,
    Srw,
    Wrw,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Rw, Kernel::Srw, Kernel::Wrw];

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Rw => "RW",
            Kernel::Srw => "SRW",
            Kernel::Wrw => "WRW",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rw" => Some(Kernel::Rw),
            "srw" => Some(Kernel::Srw),
            "wrw" => Some(Kernel::Wrw),
            _ => None,
        }
    }
}

impl core::fmt::Display for Kernel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("node {0} has no neighbors")]
    IsolatedNode(NodeId),
    #[error("invalid walk config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub kernel: Kernel,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Wrw,
            walks_per_node: 16,
            walk_length: 128,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if self.walks_per_node == 0 {
            return Err(WalkError::InvalidConfig("walks_per_node must be >= 1"));
        }
        if self.walk_length < 2 {
            return Err(WalkError::InvalidConfig("walk_length must be >= 2"));
        }
        Ok(())
    }
}

/// Exact transition probabilities from `u`, aligned with `g.neighbors(u)`.
///
/// Masses are divided by their maximum before normalizing, so equal masses
/// give exactly `1 / k` for every kernel.
pub fn transition_distribution(
    g: &WeightedGraph,
    u: NodeId,
    kernel: Kernel,
) -> Result<Vec<f64>, WalkError> {
    let k = g.degree(u);
    if k == 0 {
        return Err(WalkError::IsolatedNode(u));
    }
    let mass: Vec<f64> = match kernel {
        Kernel::Rw => return Ok(vec![1.0 / k as f64; k]),
        Kernel::Srw => g.neighbors(u).iter().map(|&v| g.strength(v)).collect(),
        Kernel::Wrw => g.neighbor_weights(u).to_vec(),
    };
    let max = mass.iter().copied().fold(0.0, f64::max);
    let rel: Vec<f64> = mass.iter().map(|m| m / max).collect();
    let total: f64 = rel.iter().sum();
    Ok(rel.into_iter().map(|r| r / total).collect())
}

/// Per-(graph, kernel) sampling tables. SRW precomputes prefix sums of
/// neighbor strengths; WRW reuses the graph's weight prefix arrays.
pub struct KernelSampler<'g> {
    graph: &'g WeightedGraph,
    kernel: Kernel,
    strength_prefix: Vec<f64>,
}

impl<'g> KernelSampler<'g> {
    pub fn new(graph: &'g WeightedGraph, kernel: Kernel) -> Self {
        let strength_prefix = if kernel == Kernel::Srw {
            let mut p = Vec::with_capacity(2 * graph.edge_count());
            for u in 0..graph.node_count() as NodeId {
                let mut acc = 0.0;
                for &v in graph.neighbors(u) {
                    acc += graph.strength(v);
                    p.push(acc);
                }
            }
            p
        } else {
            Vec::new()
        };
        Self {
            graph,
            kernel,
            strength_prefix,
        }
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    fn srw_prefix(&self, u: NodeId) -> &[f64] {
        &self.strength_prefix[self.graph.slot_range(u)]
    }

    /// One transition from `u`, or `None` if `u` is isolated.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, u: NodeId, rng: &mut R) -> Option<NodeId> {
        let nbrs = self.graph.neighbors(u);
        if nbrs.is_empty() {
            return None;
        }
        let idx = match self.kernel {
            Kernel::Rw => rng.random_range(0..nbrs.len()),
            Kernel::Srw => pick(self.srw_prefix(u), rng),
            Kernel::Wrw => pick(self.graph.weight_prefix(u), rng),
        };
        Some(nbrs[idx])
    }

    /// Append a walk of at most `length` nodes starting at `start` to `out`.
    /// An isolated start yields the single node `start`.
    pub fn walk_into<R: Rng + ?Sized>(
        &self,
        start: NodeId,
        length: usize,
        rng: &mut R,
        out: &mut Vec<NodeId>,
    ) {
        out.push(start);
        let mut cur = start;
        for _ in 1..length {
            match self.step(cur, rng) {
                Some(next) => {
                    out.push(next);
                    cur = next;
                }
                None => break,
            }
        }
    }
}

// Binary search on a cumulative array: first slot whose prefix exceeds x.
#[inline]
fn pick<R: Rng + ?Sized>(prefix: &[f64], rng: &mut R) -> usize {
    let total = prefix[prefix.len() - 1];
    let x = rng.random::<f64>() * total;
    prefix.partition_point(|&p| p <= x).min(prefix.len() - 1)
}

/// A single walk from `start` with the kernel and length in `cfg`.
pub fn sample_walk<R: Rng + ?Sized>(
    g: &WeightedGraph,
    start: NodeId,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(cfg.walk_length);
    KernelSampler::new(g, cfg.kernel).walk_into(start, cfg.walk_length, rng, &mut out);
    out
}

/// Node sequences produced by [`build_corpus`], stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    tokens: Vec<NodeId>,
    // sequence i is tokens[offsets[i]..offsets[i + 1]]
    offsets: Vec<usize>,
    node_count: usize,
    config: WalkConfig,
    /// Start nodes whose walk stopped early (isolated starts).
    truncated: Vec<NodeId>,
}

impl WalkCorpus {
    /// Build a corpus directly from sequences; used for hand-made corpora.
    pub fn from_sequences(node_count: usize, sequences: &[Vec<NodeId>], config: WalkConfig) -> Self {
        let mut tokens = Vec::new();
        let mut offsets = vec![0];
        for s in sequences {
            tokens.extend_from_slice(s);
            offsets.push(tokens.len());
        }
        Self {
            tokens,
            offsets,
            node_count,
            config,
            truncated: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sequence(&self, i: usize) -> &[NodeId] {
        &self.tokens[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn sequences(&self) -> impl ExactSizeIterator<Item = &[NodeId]> + '_ {
        (0..self.len()).map(move |i| self.sequence(i))
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[NodeId] {
        &self.tokens
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn truncated(&self) -> &[NodeId] {
        &self.truncated
    }

    /// Occurrences of each node id in the corpus.
    pub fn node_frequencies(&self) -> Vec<u64> {
        let mut f = vec![0u64; self.node_count];
        for &t in &self.tokens {
            f[t as usize] += 1;
        }
        f
    }

    /// FNV-1a hash of the sequences, for provenance records.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for s in self.sequences() {
            feed(s.len() as u64);
            for &t in s {
                feed(t as u64);
            }
        }
        h
    }
}

#[inline]
fn walk_key(u: NodeId, i: usize) -> u64 {
    ((u as u64) << 32) | i as u64
}

/// `walks_per_node` walks from every node. Sequences are ordered round by
/// round (all nodes for walk 0, then all nodes for walk 1, ...).
pub fn build_corpus(g: &WeightedGraph, cfg: &WalkConfig) -> Result<WalkCorpus, WalkError> {
    cfg.validate()?;
    let sampler = KernelSampler::new(g, cfg.kernel);
    let n = g.node_count();
    let mut tokens = Vec::with_capacity(n * cfg.walks_per_node * cfg.walk_length);
    let mut offsets = Vec::with_capacity(n * cfg.walks_per_node + 1);
    offsets.push(0);
    for i in 0..cfg.walks_per_node {
        for u in 0..n as NodeId {
            let mut rng = rng::keyed_stream(cfg.seed, walk_key(u, i));
            sampler.walk_into(u, cfg.walk_length, &mut rng, &mut tokens);
            offsets.push(tokens.len());
        }
    }
    Ok(finish(tokens, offsets, g, cfg))
}

fn finish(tokens: Vec<NodeId>, offsets: Vec<usize>, g: &WeightedGraph, cfg: &WalkConfig) -> WalkCorpus {
    let truncated = (0..g.node_count() as NodeId).filter(|&u| g.degree(u) == 0).collect();
    WalkCorpus {
        tokens,
        offsets,
        node_count: g.node_count(),
        config: *cfg,
        truncated,
    }
}

/// Same corpus as [`build_corpus`], generated on `threads` OS threads.
#[cfg(feature = "std")]
pub fn build_corpus_parallel(
    g: &WeightedGraph,
    cfg: &WalkConfig,
    threads: usize,
) -> Result<WalkCorpus, WalkError> {
    cfg.validate()?;
    let threads = threads.max(1);
    let sampler = KernelSampler::new(g, cfg.kernel);
    let n = g.node_count();
    let total = n * cfg.walks_per_node;
    let chunk = total.div_ceil(threads);
    let parts: Vec<(Vec<NodeId>, Vec<usize>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let sampler = &sampler;
                scope.spawn(move || {
                    let mut tokens = Vec::new();
                    let mut lens = Vec::new();
                    for w in (t * chunk)..((t + 1) * chunk).min(total) {
                        let (i, u) = (w / n, (w % n) as NodeId);
                        let before = tokens.len();
                        let mut rng = rng::keyed_stream(cfg.seed, walk_key(u, i));
                        sampler.walk_into(u, cfg.walk_length, &mut rng, &mut tokens);
                        lens.push(tokens.len() - before);
                    }
                    (tokens, lens)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("walk thread")).collect()
    });
    let mut tokens = Vec::with_capacity(total * cfg.walk_length);
    let mut offsets = Vec::with_capacity(total + 1);
    offsets.push(0);
    for (t, lens) in parts {
        tokens.extend_from_slice(&t);
        for l in lens {
            offsets.push(offsets.last().unwrap() + l);
        }
    }
    Ok(finish(tokens, offsets, g, cfg))
}
