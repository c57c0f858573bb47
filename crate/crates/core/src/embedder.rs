//! Skip-gram (and CBOW) node embeddings trained with negative sampling.
//!
//! Rows of the input matrix are the node embeddings. The output matrix holds
//! context vectors and starts at zero. Noise nodes are drawn from the corpus
//! unigram distribution raised to the 3/4 power.
//!
//! With `workers == 1` training is single-threaded and bit-reproducible from
//! the seed. With more workers (requires `std`) threads update the shared
//! matrices without locks; results then vary run to run.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::graph::NodeId;
use crate::math;
use crate::rng;
use crate::walker::WalkCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    SkipGram,
    Cbow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub architecture: Architecture,
    /// Frequent-node subsampling threshold (word2vec `sample`); `None` keeps
    /// every token.
    pub subsample: Option<f64>,
    /// 1 = deterministic single worker.
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            window: 10,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_lr: 1e-4,
            architecture: Architecture::SkipGram,
            subsample: None,
            workers: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m| Err(TrainError::InvalidConfig(m));
        if self.dim < 2 {
            return bad("dim must be >= 2");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1");
        }
        if !(self.initial_lr > 0.0) || !(self.min_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0) {
                return bad("subsample threshold must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid train config: {0}")]
    InvalidConfig(&'static str),
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("corpus token {token} >= node count {node_count}")]
    NodeOutOfRange { token: NodeId, node_count: usize },
    #[error("non-finite embedding entry after epoch {epoch}: node {node}, dim {dim}")]
    NonFiniteUpdate { epoch: usize, node: usize, dim: usize },
    #[error("parallel training requires the `std` feature")]
    ParallelUnavailable,
}

/// Input and output vectors, `n x dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
    pub config: TrainConfig,
    pub corpus_fingerprint: u64,
}

impl EmbeddingMatrix {
    pub fn from_rows(n: usize, dim: usize, input: Vec<f32>, output: Vec<f32>) -> Self {
        assert_eq!(input.len(), n * dim);
        assert_eq!(output.len(), n * dim);
        Self {
            n,
            dim,
            input,
            output,
            config: TrainConfig { dim, ..TrainConfig::default() },
            corpus_fingerprint: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The embedding of node `u`.
    pub fn vector(&self, u: usize) -> &[f32] {
        &self.input[u * self.dim..(u + 1) * self.dim]
    }

    pub fn output_vector(&self, u: usize) -> &[f32] {
        &self.output[u * self.dim..(u + 1) * self.dim]
    }

    pub fn input(&self) -> &[f32] {
        &self.input
    }

    pub fn output(&self) -> &[f32] {
        &self.output
    }

    /// Cosine similarity of the input vectors of `u` and `v` (f64
    /// accumulation); `None` if either has zero norm.
    pub fn cosine(&self, u: usize, v: usize) -> Option<f64> {
        let (a, b) = (self.vector(u), self.vector(v));
        let mut dot = 0.0f64;
        let mut na = 0.0f64;
        let mut nb = 0.0f64;
        for (&x, &y) in a.iter().zip(b) {
            let (x, y) = (x as f64, y as f64);
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
        if na == 0.0 || nb == 0.0 {
            return None;
        }
        Some(dot / (math::sqrt(na) * math::sqrt(nb)))
    }

    fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.input
            .iter()
            .chain(&self.output)
            .position(|x| !x.is_finite())
            .map(|i| {
                let i = i % (self.n * self.dim);
                (i / self.dim, i % self.dim)
            })
    }
}

const INIT_STREAM: u64 = 0x1;
const TRAIN_STREAM: u64 = 0x2;

/// Input vectors uniform in `[-0.5/dim, 0.5/dim]`, output vectors zero.
pub fn init_embeddings(n: usize, cfg: &TrainConfig) -> EmbeddingMatrix {
    let mut rng = rng::stream(rng::derive_seed(cfg.seed, &[INIT_STREAM]));
    let h = 0.5 / cfg.dim as f32;
    let input = (0..n * cfg.dim).map(|_| rng.random_range(-h..=h)).collect();
    EmbeddingMatrix {
        n,
        dim: cfg.dim,
        input,
        output: vec![0.0; n * cfg.dim],
        config: *cfg,
        corpus_fingerprint: 0,
    }
}

/// Noise distribution: unigram counts to the 3/4 power, normalized.
///
/// Draws use Walker's alias method over the nodes: one 64-bit random word
/// picks a column and flips its biased coin, so each draw is O(1) and the
/// table stays small enough to remain in cache.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
    /// Per column: keep-own-index threshold scaled to 2^32, and the alias.
    columns: Vec<(u64, NodeId)>,
}

impl NoiseTable {
    pub fn from_frequencies(freq: &[u64]) -> Self {
        let mass: Vec<f64> = freq.iter().map(|&f| math::powf(f as f64, 0.75)).collect();
        let total: f64 = mass.iter().sum();
        let probabilities: Vec<f64> = if total > 0.0 {
            mass.iter().map(|m| m / total).collect()
        } else {
            vec![0.0; freq.len()]
        };
        let mut cumulative = Vec::with_capacity(freq.len());
        let mut acc = 0.0;
        for p in &probabilities {
            acc += p;
            cumulative.push(acc);
        }
        let columns = if total > 0.0 { alias_columns(&probabilities) } else { Vec::new() };
        Self {
            probabilities,
            cumulative,
            columns,
        }
    }

    pub fn from_corpus(corpus: &WalkCorpus) -> Self {
        Self::from_frequencies(&corpus.node_frequencies())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        let r = rng.next_u64();
        let i = (((r >> 32) * self.columns.len() as u64) >> 32) as usize;
        let (keep, alias) = self.columns[i];
        if (r & 0xffff_ffff) < keep {
            i as NodeId
        } else {
            alias
        }
    }
}

// Vose's construction. Zero-probability columns always redirect to their
// alias, which is a node with positive probability.
fn alias_columns(p: &[f64]) -> Vec<(u64, NodeId)> {
    const ONE: f64 = (1u64 << 32) as f64;
    let n = p.len();
    let fallback = p.iter().rposition(|&x| x > 0.0).unwrap() as NodeId;
    let mut scaled: Vec<f64> = p.iter().map(|&x| x * n as f64).collect();
    let mut columns = vec![(0u64, fallback); n];
    let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        columns[s] = ((scaled[s] * ONE) as u64, l as NodeId);
        scaled[l] -= 1.0 - scaled[s];
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for i in large.into_iter().chain(small) {
        columns[i] = if p[i] > 0.0 { (1u64 << 32, i as NodeId) } else { (0, fallback) };
    }
    columns
}

pub fn build_noise_table(corpus: &WalkCorpus) -> NoiseTable {
    NoiseTable::from_corpus(corpus)
}

/// `1 / (1 + e^-x)` without overflow.
#[inline]
pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `ln(1 + e^x)` without overflow; equals `-ln sigmoid(-x)`.
#[inline]
pub fn softplus<F: Float>(x: F) -> F {
    x.max(F::zero()) + (-x.abs()).exp().ln_1p()
}

/// Loss of one (center, context, negatives) example and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLoss<F> {
    pub loss: F,
    pub grad_center: Vec<F>,
    pub grad_context: Vec<F>,
    pub grad_negatives: Vec<Vec<F>>,
}

#[inline]
pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    let n = a.len().min(b.len());
    let (ca, ra) = a[..n].as_chunks::<16>();
    let (cb, rb) = b[..n].as_chunks::<16>();
    let mut acc = [F::zero(); 16];
    for (x, y) in ca.iter().zip(cb) {
        for k in 0..16 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    for k in 0..8 {
        acc[k] = acc[k] + acc[k + 8];
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s = s + *x * *y;
    }
    s
}

#[inline]
pub fn axpy<F: Float>(y: &mut [F], a: F, x: &[F]) {
    let n = y.len().min(x.len());
    let (cy, ry) = y[..n].as_chunks_mut::<16>();
    let (cx, rx) = x[..n].as_chunks::<16>();
    for (yc, xc) in cy.iter_mut().zip(cx) {
        for k in 0..16 {
            yc[k] = yc[k] + a * xc[k];
        }
    }
    for (yi, &xi) in ry.iter_mut().zip(rx) {
        *yi = *yi + a * xi;
    }
}

/// `(coef, loss)` for one target: the loss is `-ln sigmoid(s)` for the true
/// context and `-ln sigmoid(-s)` for a noise node, where `s` is the score.
/// `coef` is minus the derivative of the loss with respect to `s`.
#[inline]
fn target_terms<F: Float>(score: F, positive: bool) -> (F, F) {
    (target_coef(score, positive), target_loss(score, positive))
}

#[inline]
fn target_coef<F: Float>(score: F, positive: bool) -> F {
    if positive {
        F::one() - sigmoid(score)
    } else {
        -sigmoid(score)
    }
}

#[inline]
fn target_loss<F: Float>(score: F, positive: bool) -> F {
    if positive {
        softplus(-score)
    } else {
        softplus(score)
    }
}

/// `L = -ln sigmoid(c . ctx) - sum_neg ln sigmoid(-c . neg)` and its gradient
/// with respect to every vector.
pub fn sgns_pair_loss<F: Float>(center: &[F], context: &[F], negatives: &[&[F]]) -> PairLoss<F> {
    let d = center.len();
    assert_eq!(context.len(), d);
    let mut grad_center = vec![F::zero(); d];
    let (coef, mut loss) = target_terms(dot(center, context), true);
    axpy(&mut grad_center, -coef, context);
    let grad_context = center.iter().map(|&c| -coef * c).collect();
    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        assert_eq!(neg.len(), d);
        let (coef, l) = target_terms(dot(center, neg), false);
        loss = loss + l;
        axpy(&mut grad_center, -coef, neg);
        grad_negatives.push(center.iter().map(|&c| -coef * c).collect());
    }
    PairLoss {
        loss,
        grad_center,
        grad_context,
        grad_negatives,
    }
}

/// One SGD step on a (hidden, targets) example in place: every score is
/// taken before any row moves, so the step is exactly `-lr` times the
/// gradient of the pair loss. `hidden` is the center input vector
/// (skip-gram) or the context mean (CBOW); `targets` are `(row, is_context)`
/// rows of `output`; `scores` is scratch space of at least `targets.len()`.
/// The hidden-side step is accumulated into `neu1e` and left for the caller
/// to apply. Returns the loss before the step if `with_loss`, else zero.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn sgns_step<F: Float>(
    hidden: &[F],
    output: &mut [F],
    dim: usize,
    targets: &[(usize, bool)],
    lr: F,
    neu1e: &mut [F],
    scores: &mut [F],
    with_loss: bool,
) -> F {
    let mut loss = F::zero();
    let scores = &mut scores[..targets.len()];
    for (s, &(t, _)) in scores.iter_mut().zip(targets) {
        *s = dot(hidden, &output[t * dim..(t + 1) * dim]);
    }
    // scores become step sizes
    for (s, &(t, positive)) in scores.iter_mut().zip(targets) {
        if with_loss {
            loss = loss + target_loss(*s, positive);
        }
        *s = target_coef(*s, positive) * lr;
        axpy(neu1e, *s, &output[t * dim..(t + 1) * dim]);
    }
    for (&g, &(t, _)) in scores.iter().zip(targets) {
        axpy(&mut output[t * dim..(t + 1) * dim], g, hidden);
    }
    loss
}

/// Per-epoch statistics from training.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean loss after each epoch on a fixed probe sample of examples drawn
    /// once from the corpus.
    pub epoch_loss: Vec<f64>,
    /// Running loss during each epoch, measured on every 16th example before
    /// its update. Biased low early on, while the learning rate is high.
    pub epoch_online_loss: Vec<f64>,
    /// Training examples (center/context pairs for skip-gram, windows for CBOW) per epoch.
    pub epoch_examples: Vec<u64>,
}

/// Train embeddings for the nodes of `corpus`.
pub fn train(corpus: &WalkCorpus, cfg: &TrainConfig) -> Result<EmbeddingMatrix, TrainError> {
    train_with_report(corpus, cfg).map(|(m, _)| m)
}

pub fn train_with_report(
    corpus: &WalkCorpus,
    cfg: &TrainConfig,
) -> Result<(EmbeddingMatrix, TrainReport), TrainError> {
    train_observed(corpus, cfg, &mut |_, _| {})
}

/// Like [`train_with_report`], calling `observer(epoch, &matrix)` after each
/// epoch.
pub fn train_observed(
    corpus: &WalkCorpus,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(usize, &EmbeddingMatrix),
) -> Result<(EmbeddingMatrix, TrainReport), TrainError> {
    cfg.validate()?;
    if corpus.token_count() == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let n = corpus.node_count();
    if let Some(&token) = corpus.tokens().iter().find(|&&t| t as usize >= n) {
        return Err(TrainError::NodeOutOfRange { token, node_count: n });
    }
    let mut emb = init_embeddings(n, cfg);
    emb.corpus_fingerprint = corpus.fingerprint();
    let noise = NoiseTable::from_corpus(corpus);
    let keep = keep_probabilities(corpus, cfg.subsample);
    let mut report = TrainReport::default();
    let probe = LossProbe::new(corpus, cfg, &noise);
    if cfg.workers > 1 {
        #[cfg(feature = "std")]
        {
            let mut observer = |epoch: usize, m: &EmbeddingMatrix| {
                report.epoch_loss.push(probe.loss(m));
                observer(epoch, m);
            };
            let mut online = TrainReport::default();
            parallel::train(corpus, cfg, &noise, keep.as_deref(), &mut emb, &mut online, &mut observer)?;
            report.epoch_online_loss = online.epoch_online_loss;
            report.epoch_examples = online.epoch_examples;
            return Ok((emb, report));
        }
        #[cfg(not(feature = "std"))]
        return Err(TrainError::ParallelUnavailable);
    }
    let mut st = SerialState {
        rng: rng::stream(rng::derive_seed(cfg.seed, &[TRAIN_STREAM])),
        scratch: Scratch::new(cfg),
        processed: 0,
        total_centers: (corpus.token_count() * cfg.epochs) as f64,
    };
    for epoch in 0..cfg.epochs {
        let stats = train_epoch(corpus, cfg, &noise, keep.as_deref(), &mut emb, &mut st);
        if let Some((node, dim)) = emb.first_non_finite() {
            return Err(TrainError::NonFiniteUpdate { epoch, node, dim });
        }
        stats.record(&mut report);
        report.epoch_loss.push(probe.loss(&emb));
        observer(epoch, &emb);
    }
    Ok((emb, report))
}

struct SerialState {
    rng: rand_chacha::ChaCha8Rng,
    scratch: Scratch,
    processed: usize,
    total_centers: f64,
}

fn train_epoch(
    corpus: &WalkCorpus,
    cfg: &TrainConfig,
    noise: &NoiseTable,
    keep: Option<&[f64]>,
    emb: &mut EmbeddingMatrix,
    st: &mut SerialState,
) -> EpochStats {
    let mut stats = EpochStats::default();
    for seq in corpus.sequences() {
        let seq = subsampled(seq, keep, &mut st.rng);
        let lr = schedule(cfg, st.processed as f64 / st.total_centers);
        train_sequence(
            &seq, cfg, noise, lr, &mut st.rng, &mut emb.input, &mut emb.output, &mut st.scratch,
            &mut stats,
        );
        st.processed += seq.len();
    }
    stats
}

const LOSS_SAMPLE_EVERY: u64 = 16;
const PROBE_STREAM: u64 = 0x3;
const PROBE_EXAMPLES: usize = 4096;

struct ProbeExample {
    /// One center node (skip-gram) or the context nodes (CBOW).
    hidden: Vec<NodeId>,
    targets: Vec<(usize, bool)>,
}

/// Fixed examples drawn like training examples from their own stream, so the
/// loss after each epoch is measured on the same sample.
struct LossProbe(Vec<ProbeExample>);

impl LossProbe {
    fn new(corpus: &WalkCorpus, cfg: &TrainConfig, noise: &NoiseTable) -> Self {
        let mut rng = rng::stream(rng::derive_seed(cfg.seed, &[PROBE_STREAM]));
        let mut out = Vec::with_capacity(PROBE_EXAMPLES);
        let mut targets = Vec::new();
        for _ in 0..PROBE_EXAMPLES * 4 {
            if out.len() == PROBE_EXAMPLES {
                break;
            }
            let seq = corpus.sequence(rng.random_range(0..corpus.len()));
            if seq.len() < 2 {
                continue;
            }
            let i = rng.random_range(0..seq.len());
            let radius = rng.random_range(1..=cfg.window);
            let (lo, hi) = (i.saturating_sub(radius), (i + radius).min(seq.len() - 1));
            let (hidden, target) = match cfg.architecture {
                Architecture::SkipGram => {
                    let mut j = rng.random_range(lo..hi);
                    if j >= i {
                        j += 1;
                    }
                    (vec![seq[i]], seq[j])
                }
                Architecture::Cbow => ((lo..=hi).filter(|&j| j != i).map(|j| seq[j]).collect(), seq[i]),
            };
            fill_targets(&mut targets, target, cfg.negatives, noise, &mut rng);
            out.push(ProbeExample {
                hidden,
                targets: targets.clone(),
            });
        }
        Self(out)
    }

    fn loss(&self, m: &EmbeddingMatrix) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        let mut hidden = vec![0.0f64; m.dim];
        let mut total = 0.0;
        for ex in &self.0 {
            hidden.fill(0.0);
            for &h in &ex.hidden {
                for (a, &x) in hidden.iter_mut().zip(m.vector(h as usize)) {
                    *a += x as f64;
                }
            }
            let inv = 1.0 / ex.hidden.len() as f64;
            hidden.iter_mut().for_each(|a| *a *= inv);
            for &(t, positive) in &ex.targets {
                let score: f64 = hidden.iter().zip(m.output_vector(t)).map(|(a, &b)| a * b as f64).sum();
                total += target_loss(score, positive);
            }
        }
        total / self.0.len() as f64
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct EpochStats {
    loss: f64,
    examples: u64,
    sampled: u64,
}

impl EpochStats {
    /// Whether the next example should have its loss evaluated.
    #[inline]
    fn sample_next(&self) -> bool {
        self.examples % LOSS_SAMPLE_EVERY == 0
    }

    #[inline]
    fn add(&mut self, loss: Option<f64>) {
        if let Some(l) = loss {
            self.loss += l;
            self.sampled += 1;
        }
        self.examples += 1;
    }

    fn merge(&mut self, o: &EpochStats) {
        self.loss += o.loss;
        self.examples += o.examples;
        self.sampled += o.sampled;
    }

    fn record(&self, report: &mut TrainReport) {
        let mean = if self.sampled > 0 { self.loss / self.sampled as f64 } else { 0.0 };
        report.epoch_online_loss.push(mean);
        report.epoch_examples.push(self.examples);
    }
}

fn schedule(cfg: &TrainConfig, progress: f64) -> f32 {
    let lr = cfg.initial_lr - (cfg.initial_lr - cfg.min_lr) * progress.min(1.0);
    lr.max(cfg.min_lr) as f32
}

fn keep_probabilities(corpus: &WalkCorpus, threshold: Option<f64>) -> Option<Vec<f64>> {
    let t = threshold?;
    let total = corpus.token_count() as f64;
    Some(
        corpus
            .node_frequencies()
            .iter()
            .map(|&f| {
                if f == 0 {
                    return 0.0;
                }
                let r = f as f64 / (t * total);
                ((math::sqrt(r) + 1.0) / r).min(1.0)
            })
            .collect(),
    )
}

fn subsampled<'a, R: Rng + ?Sized>(
    seq: &'a [NodeId],
    keep: Option<&[f64]>,
    rng: &mut R,
) -> alloc::borrow::Cow<'a, [NodeId]> {
    match keep {
        None => alloc::borrow::Cow::Borrowed(seq),
        Some(keep) => alloc::borrow::Cow::Owned(
            seq.iter().copied().filter(|&t| rng.random::<f64>() < keep[t as usize]).collect(),
        ),
    }
}

struct Scratch {
    neu1e: Vec<f32>,
    hidden: Vec<f32>,
    targets: Vec<(usize, bool)>,
    scores: Vec<f32>,
}

impl Scratch {
    fn new(cfg: &TrainConfig) -> Self {
        Self {
            neu1e: vec![0.0; cfg.dim],
            hidden: vec![0.0; cfg.dim],
            targets: Vec::with_capacity(cfg.negatives + 1),
            scores: vec![0.0; cfg.negatives + 1],
        }
    }
}

// Noise draws equal to the true context are skipped.
#[inline]
fn fill_targets<R: Rng + ?Sized>(
    targets: &mut Vec<(usize, bool)>,
    context: NodeId,
    negatives: usize,
    noise: &NoiseTable,
    rng: &mut R,
) {
    targets.clear();
    targets.push((context as usize, true));
    for _ in 0..negatives {
        let t = noise.sample(rng);
        if t != context {
            targets.push((t as usize, false));
        }
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn train_sequence<R: Rng + ?Sized>(
    seq: &[NodeId],
    cfg: &TrainConfig,
    noise: &NoiseTable,
    lr: f32,
    rng: &mut R,
    input: &mut [f32],
    output: &mut [f32],
    s: &mut Scratch,
    stats: &mut EpochStats,
) {
    let d = cfg.dim;
    for (i, &center) in seq.iter().enumerate() {
        let radius = rng.random_range(1..=cfg.window);
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(seq.len() - 1);
        match cfg.architecture {
            Architecture::SkipGram => {
                let c = center as usize;
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    fill_targets(&mut s.targets, seq[j], cfg.negatives, noise, rng);
                    s.neu1e.fill(0.0);
                    let row = &mut input[c * d..(c + 1) * d];
                    s.hidden.copy_from_slice(row);
                    let track = stats.sample_next();
                    let l = sgns_step(&s.hidden, output, d, &s.targets, lr, &mut s.neu1e, &mut s.scores, track);
                    axpy(row, 1.0, &s.neu1e);
                    stats.add(track.then_some(l as f64));
                }
            }
            Architecture::Cbow => {
                let count = hi - lo;
                if count == 0 {
                    continue;
                }
                s.hidden.fill(0.0);
                for j in (lo..=hi).filter(|&j| j != i) {
                    let c = seq[j] as usize;
                    axpy(&mut s.hidden, 1.0, &input[c * d..(c + 1) * d]);
                }
                let inv = 1.0 / count as f32;
                s.hidden.iter_mut().for_each(|h| *h *= inv);
                fill_targets(&mut s.targets, center, cfg.negatives, noise, rng);
                s.neu1e.fill(0.0);
                let track = stats.sample_next();
                let l = sgns_step(&s.hidden, output, d, &s.targets, lr, &mut s.neu1e, &mut s.scores, track);
                for j in (lo..=hi).filter(|&j| j != i) {
                    let c = seq[j] as usize;
                    axpy(&mut input[c * d..(c + 1) * d], 1.0, &s.neu1e);
                }
                stats.add(track.then_some(l as f64));
            }
        }
    }
}

#[cfg(feature = "std")]
mod parallel {
    //! Lock-free shared-matrix training. Entries are `f32` bit patterns in
    //! relaxed atomics; threads copy rows in, update locally and store back.

    use super::*;
    use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering::Relaxed};

    struct Shared(Vec<AtomicU32>);

    impl Shared {
        fn new(v: &[f32]) -> Self {
            Self(v.iter().map(|x| AtomicU32::new(x.to_bits())).collect())
        }
        fn load(&self, row: usize, d: usize, out: &mut [f32]) {
            for (o, a) in out.iter_mut().zip(&self.0[row * d..(row + 1) * d]) {
                *o = f32::from_bits(a.load(Relaxed));
            }
        }
        fn store(&self, row: usize, d: usize, v: &[f32]) {
            for (a, x) in self.0[row * d..(row + 1) * d].iter().zip(v) {
                a.store(x.to_bits(), Relaxed);
            }
        }
        fn into_vec(self) -> Vec<f32> {
            self.0.into_iter().map(|a| f32::from_bits(a.into_inner())).collect()
        }
    }

    pub(super) fn train(
        corpus: &WalkCorpus,
        cfg: &TrainConfig,
        noise: &NoiseTable,
        keep: Option<&[f64]>,
        emb: &mut EmbeddingMatrix,
        report: &mut TrainReport,
        observer: &mut dyn FnMut(usize, &EmbeddingMatrix),
    ) -> Result<(), TrainError> {
        let d = cfg.dim;
        let input = Shared::new(&emb.input);
        let output = Shared::new(&emb.output);
        let processed = AtomicUsize::new(0);
        let total_centers = (corpus.token_count() * cfg.epochs) as f64;
        let nseq = corpus.len();
        let chunk = nseq.div_ceil(cfg.workers);
        for epoch in 0..cfg.epochs {
            let results: Vec<EpochStats> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..cfg.workers)
                    .map(|w| {
                        let (input, output, processed) = (&input, &output, &processed);
                        scope.spawn(move || {
                            let mut rng = rng::stream(rng::derive_seed(
                                cfg.seed,
                                &[TRAIN_STREAM, epoch as u64, w as u64],
                            ));
                            let mut s = Scratch::new(cfg);
                            let mut center_row = vec![0.0f32; d];
                            let mut rows: Vec<Vec<f32>> = vec![vec![0.0; d]; cfg.negatives + 1];
                            let mut ctx_rows: Vec<Vec<f32>> = Vec::new();
                            let mut stats = EpochStats::default();
                            for i in (w * chunk)..((w + 1) * chunk).min(nseq) {
                                let seq = subsampled(corpus.sequence(i), keep, &mut rng);
                                let p = processed.fetch_add(seq.len(), Relaxed) as f64;
                                let lr = schedule(cfg, p / total_centers);
                                for (pos, &center) in seq.iter().enumerate() {
                                    let radius = rng.random_range(1..=cfg.window);
                                    let lo = pos.saturating_sub(radius);
                                    let hi = (pos + radius).min(seq.len() - 1);
                                    match cfg.architecture {
                                        Architecture::SkipGram => {
                                            for j in (lo..=hi).filter(|&j| j != pos) {
                                                fill_targets(&mut s.targets, seq[j], cfg.negatives, noise, &mut rng);
                                                input.load(center as usize, d, &mut center_row);
                                                s.neu1e.fill(0.0);
                                                let track = stats.sample_next();
                                                let l = step_rows(&center_row, output, d, &s.targets, &mut rows, lr, &mut s.neu1e, track);
                                                axpy(&mut center_row, 1.0, &s.neu1e);
                                                input.store(center as usize, d, &center_row);
                                                stats.add(track.then_some(l));
                                            }
                                        }
                                        Architecture::Cbow => {
                                            let ctx: Vec<usize> = (lo..=hi).filter(|&j| j != pos).map(|j| seq[j] as usize).collect();
                                            if ctx.is_empty() {
                                                continue;
                                            }
                                            ctx_rows.resize(ctx.len(), vec![0.0; d]);
                                            s.hidden.fill(0.0);
                                            for (r, &c) in ctx_rows.iter_mut().zip(&ctx) {
                                                input.load(c, d, r);
                                                axpy(&mut s.hidden, 1.0, r);
                                            }
                                            let inv = 1.0 / ctx.len() as f32;
                                            s.hidden.iter_mut().for_each(|h| *h *= inv);
                                            fill_targets(&mut s.targets, center, cfg.negatives, noise, &mut rng);
                                            s.neu1e.fill(0.0);
                                            let hidden = s.hidden.clone();
                                            let track = stats.sample_next();
                                            let l = step_rows(&hidden, output, d, &s.targets, &mut rows, lr, &mut s.neu1e, track);
                                            for (r, &c) in ctx_rows.iter_mut().zip(&ctx) {
                                                input.load(c, d, r);
                                                axpy(r, 1.0, &s.neu1e);
                                                input.store(c, d, r);
                                            }
                                            stats.add(track.then_some(l));
                                        }
                                    }
                                }
                            }
                            stats
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("train worker")).collect()
            });
            let mut stats = EpochStats::default();
            results.iter().for_each(|r| stats.merge(r));
            emb.input = input.0.iter().map(|a| f32::from_bits(a.load(Relaxed))).collect();
            emb.output = output.0.iter().map(|a| f32::from_bits(a.load(Relaxed))).collect();
            if let Some((node, dim)) = emb.first_non_finite() {
                return Err(TrainError::NonFiniteUpdate { epoch, node, dim });
            }
            stats.record(report);
            observer(epoch, emb);
        }
        emb.input = input.into_vec();
        emb.output = output.into_vec();
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn step_rows(
        hidden: &[f32],
        output: &Shared,
        d: usize,
        targets: &[(usize, bool)],
        rows: &mut [Vec<f32>],
        lr: f32,
        neu1e: &mut [f32],
        with_loss: bool,
    ) -> f64 {
        let mut loss = 0.0f64;
        for (&(t, positive), row) in targets.iter().zip(rows.iter_mut()) {
            output.load(t, d, row);
            let score = dot(hidden, row);
            if with_loss {
                loss += target_loss(score, positive) as f64;
            }
            let g = target_coef(score, positive) * lr;
            axpy(neu1e, g, row);
            axpy(row, g, hidden);
            output.store(t, d, row);
        }
        loss
    }
}
