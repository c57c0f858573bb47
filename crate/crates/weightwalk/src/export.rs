//! Embedding, corpus and per-edge CSV files.

use std::io::{self, BufRead, Write};

use serde_json::json;
use thiserror::Error;
use weightwalk_core::analysis::{CorrelationResult, EdgeSimilarity};
use weightwalk_core::embedder::{EmbeddingMatrix, TrainConfig};
use weightwalk_core::graph::NodeId;
use weightwalk_core::walker::{Kernel, WalkConfig, WalkCorpus};

/// `node_id,dim_0,...,dim_{k-1}`, one row per node, input vectors.
pub fn write_embeddings<W: Write>(emb: &EmbeddingMatrix, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node_id".to_string()];
    header.extend((0..emb.dim()).map(|i| format!("dim_{i}")));
    w.write_record(&header)?;
    for u in 0..emb.node_count() {
        let mut rec = Vec::with_capacity(emb.dim() + 1);
        rec.push(u.to_string());
        rec.extend(emb.vector(u).iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Rows of an embedding CSV, in node order. Only the input vectors are
/// stored, so the returned matrix has zero output vectors.
pub fn read_embeddings<R: io::Read>(input: R) -> Result<EmbeddingMatrix, ReadError> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.len().saturating_sub(1);
    let mut rows: Vec<(usize, Vec<f32>)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |message: String| ReadError::Parse { line, message };
        let id: usize = rec[0].parse().map_err(|_| bad(format!("bad node id {:?}", &rec[0])))?;
        let v = rec
            .iter()
            .skip(1)
            .map(|x| x.parse::<f32>().map_err(|_| bad(format!("bad value {x:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((id, v));
    }
    rows.sort_by_key(|r| r.0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(ReadError::Parse {
            line: 0,
            message: "node ids are not 0..n".into(),
        });
    }
    let n = rows.len();
    let input: Vec<f32> = rows.into_iter().flat_map(|r| r.1).collect();
    Ok(EmbeddingMatrix::from_rows(n, dim, input, vec![0.0; n * dim]))
}

/// One walk per line, node ids separated by spaces, after a header comment
/// recording the node count and walk parameters.
pub fn write_corpus<W: Write>(corpus: &WalkCorpus, mut out: W) -> io::Result<()> {
    let c = corpus.config();
    writeln!(
        out,
        "# nodes={} kernel={} walks_per_node={} walk_length={} seed={}",
        corpus.node_count(),
        c.kernel,
        c.walks_per_node,
        c.walk_length,
        c.seed
    )?;
    let mut line = String::new();
    for seq in corpus.sequences() {
        line.clear();
        for (i, u) in seq.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&u.to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn read_corpus<R: BufRead>(input: R) -> Result<WalkCorpus, ReadError> {
    let mut cfg = WalkConfig::default();
    let mut declared: Option<usize> = None;
    let mut seqs: Vec<Vec<NodeId>> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let bad = |message: String| ReadError::Parse { line: i + 1, message };
        if let Some(meta) = line.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                let Some((k, v)) = kv.split_once('=') else { continue };
                let num = || v.parse::<usize>().map_err(|_| bad(format!("bad {k}={v}")));
                match k {
                    "nodes" => declared = Some(num()?),
                    "kernel" => cfg.kernel = Kernel::parse(v).ok_or_else(|| bad(format!("bad kernel {v}")))?,
                    "walks_per_node" => cfg.walks_per_node = num()?,
                    "walk_length" => cfg.walk_length = num()?,
                    "seed" => cfg.seed = v.parse().map_err(|_| bad(format!("bad seed {v}")))?,
                    _ => {}
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let seq = line
            .split_whitespace()
            .map(|t| t.parse::<NodeId>().map_err(|_| bad(format!("bad node id {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        seqs.push(seq);
    }
    let seen = seqs.iter().flatten().map(|&u| u as usize + 1).max().unwrap_or(0);
    let n = declared.unwrap_or(seen);
    if seen > n {
        return Err(ReadError::Parse {
            line: 0,
            message: format!("node id {} exceeds declared count {n}", seen - 1),
        });
    }
    Ok(WalkCorpus::from_sequences(n, &seqs, cfg))
}

pub fn write_pairs<W: Write>(pairs: &[EdgeSimilarity], labels: Option<&[String]>, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v", "u_label", "v_label", "weight", "cosine"])?;
    let label = |u: NodeId| labels.map(|l| l[u as usize].clone()).unwrap_or_else(|| u.to_string());
    for p in pairs {
        w.write_record([
            p.u.to_string(),
            p.v.to_string(),
            label(p.u),
            label(p.v),
            p.weight.to_string(),
            p.cosine.to_string(),
        ])?;
    }
    w.flush()
}

pub fn walk_json(w: &WalkConfig) -> serde_json::Value {
    json!({
        "kernel": w.kernel.name(),
        "walks_per_node": w.walks_per_node,
        "walk_length": w.walk_length,
        "seed": w.seed,
    })
}

pub fn train_json(t: &TrainConfig) -> serde_json::Value {
    json!({
        "dim": t.dim,
        "window": t.window,
        "negatives": t.negatives,
        "epochs": t.epochs,
        "initial_lr": t.initial_lr,
        "min_lr": t.min_lr,
        "architecture": format!("{:?}", t.architecture).to_ascii_lowercase(),
        "subsample": t.subsample,
        "workers": t.workers,
        "seed": t.seed,
    })
}

/// Everything in a run result except the per-edge records.
pub fn result_json(r: &CorrelationResult) -> serde_json::Value {
    json!({
        "pearson_r": r.pearson_r,
        "spearman_r": r.spearman_r,
        "n_pairs": r.n_pairs,
        "kernel": r.kernel.name(),
        "weight_mode": r.weight_mode.name(),
        "null_target": r.null_target.name(),
        "seed": r.seed,
        "walk": walk_json(&r.walk),
        "train": train_json(&r.train),
        "components": r.components,
        "largest_component": r.largest_component,
        "truncated_walks": r.truncated_walks,
        "corpus_fingerprint": format!("{:016x}", r.corpus_fingerprint),
        "epoch_loss": r.epoch_loss,
    })
}
