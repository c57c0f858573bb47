//! Weighted graph generators, first-order random walks (uniform, strength-biased
//! and weight-biased), skip-gram embeddings with negative sampling, and the
//! correlation analysis that measures how much edge-weight information ends up
//! in the embedding space.
//!
//! The crate is `no_std` with `alloc`. The `std` feature (on by default) adds
//! the multi-threaded corpus builder and the lock-free parallel trainer.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod embedder;
pub mod generators;
pub mod graph;
pub(crate) mod math;
pub mod rng;
pub mod walker;

pub use analysis::{
    edge_cosine_similarities, pearson, spearman, AnalysisError, CorrelationResult, EdgeSimilarity,
    NullTarget, RunConfig, WeightMode,
};
pub use embedder::{
    init_embeddings, sgns_pair_loss, train, Architecture, EmbeddingMatrix, NoiseTable,
    PairLoss, TrainConfig, TrainError, TrainReport,
};
pub use generators::{GenError, GraphSpec, WeightDist};
pub use graph::{build_graph, node_stats, Edge, GraphError, NodeId, NodeStats, WeightedGraph};
pub use walker::{build_corpus, Kernel, WalkConfig, WalkCorpus};
