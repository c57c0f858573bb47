//! Weighted edge-list files: `source<sep>target<sep>weight` rows, tab, comma
//! or whitespace separated (detected from the first data row).
//!
//! `#` lines are comments, with two exceptions on the first line(s):
//! `# node_count: N` declares the node count (written by [`write_edge_list`]
//! so isolated nodes survive a round trip), and a `# source,target,...` line
//! names the columns (the catalog CSV exports start this way).

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;
use weightwalk_core::graph::{Edge, GraphError, NodeId, WeightedGraph};

/// What to do with a row repeating an earlier `source -> target` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    #[default]
    Sum,
    Reject,
}

/// How `u -> v` and `v -> u` rows combine into one undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectedCollapse {
    Max,
    #[default]
    Sum,
    Mean,
}

impl DuplicatePolicy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sum" => Some(Self::Sum),
            "reject" => Some(Self::Reject),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sum => "sum",
            Self::Reject => "reject",
        }
    }
}

impl DirectedCollapse {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max" => Some(Self::Max),
            "sum" => Some(Self::Sum),
            "mean" => Some(Self::Mean),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Max => "max",
            Self::Sum => "sum",
            Self::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub duplicate_policy: DuplicatePolicy,
    pub directed_collapse: DirectedCollapse,
    /// Column holding the weight: a header name, or a 0-based index. Defaults
    /// to the column named `weight`, or the third column without a header.
    pub weight_column: Option<String>,
    /// Replace exact-zero weights with 1e-12 instead of rejecting them.
    pub min_weight_epsilon: bool,
}

pub const ZERO_WEIGHT_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no weight column: {0}")]
    MissingWeightColumn(String),
    #[error("no edge rows")]
    Empty,
    #[error("duplicate pair {source_label} -> {target} on line {line}")]
    Duplicate {
        line: usize,
        source_label: String,
        target: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A parsed edge list with the label of every node id.
#[derive(Debug, Clone)]
pub struct ParsedEdgeList {
    pub graph: WeightedGraph,
    pub labels: Vec<String>,
    /// Rows merged into an earlier row with the same direction.
    pub merged_duplicates: usize,
    /// Undirected pairs that appeared in both directions.
    pub reciprocal_pairs: usize,
    /// Zero weights raised to [`ZERO_WEIGHT_EPSILON`].
    pub clamped_zero_weights: usize,
}

pub fn parse_edge_list(path: &Path, opts: &ParseOptions) -> Result<ParsedEdgeList, EdgeListError> {
    parse_edge_list_str(&fs::read_to_string(path)?, opts)
}

#[derive(Clone, Copy, PartialEq)]
enum Sep {
    Tab,
    Comma,
    Space,
}

impl Sep {
    fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Sep::Tab
        } else if line.contains(',') {
            Sep::Comma
        } else {
            Sep::Space
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Sep::Tab => line.split('\t').map(str::trim).collect(),
            Sep::Comma => split_csv(line),
            Sep::Space => line.split_whitespace().collect(),
        }
    }
}

// Comma split honoring double quotes (labels in catalog exports can contain
// commas). Quotes are stripped; doubled quotes inside are left as-is.
fn split_csv(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => {
                out.push(line[start..i].trim().trim_matches('"'));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(line[start..].trim().trim_matches('"'));
    out
}

fn node_count_directive(line: &str) -> Option<usize> {
    let rest = line.trim_start_matches('#').trim();
    rest.strip_prefix("node_count:")
        .and_then(|v| v.trim().parse().ok())
}

fn is_header_comment(line: &str) -> bool {
    let rest = line.trim_start_matches('#').trim().to_ascii_lowercase();
    rest.starts_with("source") && rest.contains("target")
}

pub fn parse_edge_list_str(text: &str, opts: &ParseOptions) -> Result<ParsedEdgeList, EdgeListError> {
    let mut declared_nodes = None;
    let mut header: Option<Vec<String>> = None;
    let mut sep = None;
    let mut rows: Vec<(usize, String, String, f64)> = Vec::new();
    let mut weight_idx: Option<usize> = None;
    let mut clamped = 0;
    let mut seen_data = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if !seen_data {
                if let Some(n) = node_count_directive(line) {
                    declared_nodes = Some(n);
                } else if header.is_none() && is_header_comment(line) {
                    let body = line.trim_start_matches('#').trim();
                    let s = Sep::detect(body);
                    sep = Some(s);
                    header = Some(s.split(body).iter().map(|c| c.to_string()).collect());
                }
            }
            continue;
        }
        let s = *sep.get_or_insert_with(|| Sep::detect(line));
        let fields = s.split(line);
        if !seen_data && header.is_none() && fields.len() >= 2 && looks_like_header(&fields, opts) {
            header = Some(fields.iter().map(|c| c.to_string()).collect());
            continue;
        }
        seen_data = true;
        let w_idx = match weight_idx {
            Some(w) => w,
            None => {
                let w = resolve_weight_column(header.as_deref(), fields.len(), opts)?;
                weight_idx = Some(w);
                w
            }
        };
        if fields.len() <= w_idx.max(1) {
            return Err(EdgeListError::Parse {
                line: line_no,
                message: format!("expected at least {} fields, found {}", w_idx.max(1) + 1, fields.len()),
            });
        }
        let w: f64 = fields[w_idx].parse().map_err(|_| EdgeListError::Parse {
            line: line_no,
            message: format!("weight {:?} is not a number", fields[w_idx]),
        })?;
        let w = if w == 0.0 && opts.min_weight_epsilon {
            clamped += 1;
            ZERO_WEIGHT_EPSILON
        } else {
            w
        };
        rows.push((line_no, fields[0].to_string(), fields[1].to_string(), w));
    }
    if rows.is_empty() {
        return Err(EdgeListError::Empty);
    }

    let (ids, labels) = intern(&rows, declared_nodes);
    let node_count = labels.len();

    // Same-direction repeats first, then reciprocal pairs.
    let mut directed: HashMap<(NodeId, NodeId), (f64, usize)> = HashMap::new();
    let mut order: Vec<(NodeId, NodeId)> = Vec::new();
    let mut merged = 0;
    for ((line, src, dst, w), &(u, v)) in rows.iter().zip(&ids) {
        match directed.get_mut(&(u, v)) {
            Some(entry) => match opts.duplicate_policy {
                DuplicatePolicy::Sum => {
                    entry.0 += w;
                    merged += 1;
                }
                DuplicatePolicy::Reject => {
                    return Err(EdgeListError::Duplicate {
                        line: *line,
                        source_label: src.clone(),
                        target: dst.clone(),
                    })
                }
            },
            None => {
                directed.insert((u, v), (*w, *line));
                order.push((u, v));
            }
        }
    }
    let mut reciprocal = 0;
    let mut edges = Vec::with_capacity(order.len());
    for &(u, v) in &order {
        let key = (u.min(v), u.max(v));
        if u != v && directed.contains_key(&(v, u)) {
            // emit once, at the first of the two directions
            if (u, v) != first_of(&directed, u, v) {
                continue;
            }
            reciprocal += 1;
            let a = directed[&(u, v)].0;
            let b = directed[&(v, u)].0;
            let w = match opts.directed_collapse {
                DirectedCollapse::Max => a.max(b),
                DirectedCollapse::Sum => a + b,
                DirectedCollapse::Mean => (a + b) / 2.0,
            };
            edges.push(Edge::new(key.0, key.1, w));
        } else {
            edges.push(Edge::new(u, v, directed[&(u, v)].0));
        }
    }
    let graph = WeightedGraph::build(edges, node_count)?.with_labels(labels.clone())?;
    Ok(ParsedEdgeList {
        graph,
        labels,
        merged_duplicates: merged,
        reciprocal_pairs: reciprocal,
        clamped_zero_weights: clamped,
    })
}

fn first_of(directed: &HashMap<(NodeId, NodeId), (f64, usize)>, u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if directed[&(u, v)].1 <= directed[&(v, u)].1 {
        (u, v)
    } else {
        (v, u)
    }
}

fn looks_like_header(fields: &[&str], opts: &ParseOptions) -> bool {
    let named = |f: &&str| {
        let f = f.to_ascii_lowercase();
        f == "source" || f == "target" || f == "weight"
            || opts.weight_column.as_deref().is_some_and(|c| c.eq_ignore_ascii_case(&f))
    };
    if fields.iter().any(named) {
        return true;
    }
    // Unnamed header: a non-numeric third column.
    fields.len() >= 3 && fields[2].parse::<f64>().is_err()
}

fn resolve_weight_column(
    header: Option<&[String]>,
    width: usize,
    opts: &ParseOptions,
) -> Result<usize, EdgeListError> {
    let find = |h: &[String], name: &str| h.iter().position(|c| c.eq_ignore_ascii_case(name));
    match (&opts.weight_column, header) {
        (Some(col), Some(h)) => find(h, col)
            .or_else(|| col.parse().ok())
            .ok_or_else(|| EdgeListError::MissingWeightColumn(format!("no column {col:?} in header {h:?}"))),
        (Some(col), None) => col
            .parse()
            .map_err(|_| EdgeListError::MissingWeightColumn(format!("no header to look up column {col:?}"))),
        (None, Some(h)) => find(h, "weight").ok_or_else(|| {
            EdgeListError::MissingWeightColumn(format!(
                "header {h:?} has no \"weight\" column; pass a weight column explicitly"
            ))
        }),
        (None, None) if width >= 3 => Ok(2),
        (None, None) => Err(EdgeListError::MissingWeightColumn(
            "rows have no third column; unweighted edge lists are not supported".into(),
        )),
    }
}

// Ids follow the integer labels when a node count is declared and every
// label is an integer below it; otherwise labels are numbered in order of
// first appearance.
fn intern<'a>(rows: &'a [(usize, String, String, f64)], declared: Option<usize>) -> (Vec<(NodeId, NodeId)>, Vec<String>) {
    if let Some(n) = declared {
        let numeric: Option<Vec<(NodeId, NodeId)>> = rows
            .iter()
            .map(|(_, a, b, _)| {
                let a: usize = a.parse().ok().filter(|&x| x < n)?;
                let b: usize = b.parse().ok().filter(|&x| x < n)?;
                Some((a as NodeId, b as NodeId))
            })
            .collect();
        if let Some(ids) = numeric {
            return (ids, (0..n).map(|i| i.to_string()).collect());
        }
    }
    let mut index: HashMap<&str, NodeId> = HashMap::new();
    let mut labels = Vec::new();
    let mut ids = Vec::with_capacity(rows.len());
    for (_, a, b, _) in rows {
        let mut id_of = |s: &'a str| -> NodeId {
            *index.entry(s).or_insert_with(|| {
                labels.push(s.to_string());
                (labels.len() - 1) as NodeId
            })
        };
        let u = id_of(a);
        let v = id_of(b);
        ids.push((u, v));
    }
    (ids, labels)
}

/// Tab-separated, with a node-count directive and header. Weights use the
/// shortest representation that parses back to the same `f64`.
pub fn write_edge_list<W: Write>(g: &WeightedGraph, mut out: W) -> io::Result<()> {
    writeln!(out, "# node_count: {}", g.node_count())?;
    writeln!(out, "source\ttarget\tweight")?;
    for e in g.edges() {
        writeln!(out, "{}\t{}\t{}", e.u, e.v, e.w)?;
    }
    out.flush()
}

pub fn write_edge_list_file(g: &WeightedGraph, path: &Path) -> io::Result<()> {
    crate::fsutil::write_atomic(path, |w| write_edge_list(g, w))
}
