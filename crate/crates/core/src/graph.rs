//! Undirected, simple, positively weighted graphs in compressed adjacency form.
//!
//! A [`WeightedGraph`] is immutable once built. Operations that change the
//! graph ([`WeightedGraph::shuffle_weights`], [`WeightedGraph::threshold_by_percentile`])
//! return a new value.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::math;
use crate::rng;

/// Dense node identifier in `0..node_count`.
pub type NodeId = u32;

/// One undirected edge `{u, v}` with weight `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: f64,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId, w: f64) -> Self {
        Self { u, v, w }
    }

    /// The endpoints with the smaller id first.
    pub fn key(&self) -> (NodeId, NodeId) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    SelfLoop,
    DuplicatePair,
    NonPositiveWeight,
    NonFiniteWeight,
    IdOutOfRange,
}

impl core::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            RejectReason::SelfLoop => "self-loop",
            RejectReason::DuplicatePair => "duplicate pair",
            RejectReason::NonPositiveWeight => "non-positive weight",
            RejectReason::NonFiniteWeight => "non-finite weight",
            RejectReason::IdOutOfRange => "node id out of range",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("rejected edge #{index} ({}, {}, {}): {reason}", edge.u, edge.v, edge.w)]
    RejectedEdge {
        index: usize,
        edge: Edge,
        reason: RejectReason,
    },
    #[error("graph must have at least one node")]
    NoNodes,
    #[error("no edges left in graph")]
    EmptyGraph,
    #[error("quantile {0} outside [0, 1)")]
    InvalidQuantile(f64),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
}

/// Per-node degree and strength.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub degree: Vec<usize>,
    pub strength: Vec<f64>,
}

impl NodeStats {
    pub fn mean_degree(&self) -> f64 {
        if self.degree.is_empty() {
            return 0.0;
        }
        self.degree.iter().sum::<usize>() as f64 / self.degree.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    // CSR adjacency: slots offsets[u]..offsets[u + 1] belong to node u.
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    weights: Vec<f64>,
    // Running sum of `weights` within each node's slot range.
    prefix: Vec<f64>,
    // Edge index backing each adjacency slot.
    slot_edge: Vec<usize>,
    strength: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl WeightedGraph {
    /// Validate `edges` and build adjacency. Edge order is kept and drives the
    /// neighbor order of every node.
    pub fn build(edges: Vec<Edge>, node_count: usize) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::NoNodes);
        }
        let reject = |index: usize, edge: Edge, reason| GraphError::RejectedEdge {
            index,
            edge,
            reason,
        };
        for (i, e) in edges.iter().enumerate() {
            if e.u as usize >= node_count || e.v as usize >= node_count {
                return Err(reject(i, *e, RejectReason::IdOutOfRange));
            }
            if e.u == e.v {
                return Err(reject(i, *e, RejectReason::SelfLoop));
            }
            if !e.w.is_finite() {
                return Err(reject(i, *e, RejectReason::NonFiniteWeight));
            }
            if e.w <= 0.0 {
                return Err(reject(i, *e, RejectReason::NonPositiveWeight));
            }
        }
        let mut keys: Vec<(NodeId, NodeId, usize)> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (a, b) = e.key();
                (a, b, i)
            })
            .collect();
        keys.sort_unstable();
        for pair in keys.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                let i = pair[1].2.max(pair[0].2);
                return Err(reject(i, edges[i], RejectReason::DuplicatePair));
            }
        }
        Ok(Self::assemble(edges, node_count, None))
    }

    fn assemble(edges: Vec<Edge>, node_count: usize, labels: Option<Vec<String>>) -> Self {
        let mut degree = vec![0usize; node_count];
        for e in &edges {
            degree[e.u as usize] += 1;
            degree[e.v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let slots = *offsets.last().unwrap();
        let mut neighbors = vec![0; slots];
        let mut weights = vec![0.0; slots];
        let mut slot_edge = vec![0; slots];
        let mut cursor: Vec<usize> = offsets[..node_count].to_vec();
        for (i, e) in edges.iter().enumerate() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let s = cursor[a as usize];
                neighbors[s] = b;
                weights[s] = e.w;
                slot_edge[s] = i;
                cursor[a as usize] += 1;
            }
        }
        let mut prefix = vec![0.0; slots];
        let mut strength = vec![0.0; node_count];
        for u in 0..node_count {
            let mut acc = 0.0;
            for s in offsets[u]..offsets[u + 1] {
                acc += weights[s];
                prefix[s] = acc;
            }
            strength[u] = acc;
        }
        Self {
            node_count,
            edges,
            offsets,
            neighbors,
            weights,
            prefix,
            slot_edge,
            strength,
            labels,
        }
    }

    /// Attach node labels (one per node).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.node_count {
            return Err(GraphError::LabelCount {
                expected: self.node_count,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Weights aligned with [`neighbors`](Self::neighbors).
    pub fn neighbor_weights(&self, u: NodeId) -> &[f64] {
        let u = u as usize;
        &self.weights[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Cumulative weights aligned with [`neighbors`](Self::neighbors); the last
    /// entry is the strength of `u`.
    pub fn weight_prefix(&self, u: NodeId) -> &[f64] {
        let u = u as usize;
        &self.prefix[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Adjacency slot range of `u`; per-slot side tables can be indexed with it.
    pub fn slot_range(&self, u: NodeId) -> core::ops::Range<usize> {
        let u = u as usize;
        self.offsets[u]..self.offsets[u + 1]
    }

    /// Edge indices aligned with [`neighbors`](Self::neighbors).
    pub fn neighbor_edges(&self, u: NodeId) -> &[usize] {
        let u = u as usize;
        &self.slot_edge[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn strength(&self, u: NodeId) -> f64 {
        self.strength[u as usize]
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strength
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.node_count as f64
    }

    pub fn node_stats(&self) -> NodeStats {
        NodeStats {
            degree: (0..self.node_count as NodeId).map(|u| self.degree(u)).collect(),
            strength: self.strength.clone(),
        }
    }

    /// Weight of `{u, v}` if the edge exists.
    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a)
            .iter()
            .position(|&x| x == b)
            .map(|i| self.neighbor_weights(a)[i])
    }

    /// Weight multiset in edge order.
    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.w).collect()
    }

    /// Same edge set with a new weight per edge (in edge order).
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self, GraphError> {
        assert_eq!(weights.len(), self.edges.len(), "one weight per edge");
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| Edge::new(e.u, e.v, w))
            .collect();
        let mut g = Self::build(edges, self.node_count)?;
        g.labels = self.labels.clone();
        Ok(g)
    }

    /// Uniformly permute the weight multiset over the fixed edge set.
    pub fn shuffle_weights(&self, seed: u64) -> Self {
        let mut w = self.weights();
        w.shuffle(&mut rng::stream(seed));
        let edges = self
            .edges
            .iter()
            .zip(w)
            .map(|(e, w)| Edge::new(e.u, e.v, w))
            .collect();
        Self::assemble(edges, self.node_count, self.labels.clone())
    }

    /// The `q`-quantile of the edge weights (linear interpolation between
    /// order statistics).
    pub fn weight_quantile(&self, q: f64) -> Option<f64> {
        let mut w = self.weights();
        w.sort_by(f64::total_cmp);
        quantile_sorted(&w, q)
    }

    /// Keep exactly the edges with `w >= t`, where `t` is the `q`-quantile of
    /// the weights. All nodes are kept, including ones left isolated.
    pub fn threshold_by_percentile(&self, q: f64) -> Result<Self, GraphError> {
        if !(0.0..1.0).contains(&q) {
            return Err(GraphError::InvalidQuantile(q));
        }
        let t = self.weight_quantile(q).ok_or(GraphError::EmptyGraph)?;
        self.threshold_at(t)
    }

    /// Keep exactly the edges with `w >= t`.
    pub fn threshold_at(&self, t: f64) -> Result<Self, GraphError> {
        let edges: Vec<Edge> = self.edges.iter().copied().filter(|e| e.w >= t).collect();
        if edges.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        Ok(Self::assemble(edges, self.node_count, self.labels.clone()))
    }

    /// Connected component id per node, numbered in order of lowest member.
    pub fn components(&self) -> Vec<u32> {
        const UNSEEN: u32 = u32::MAX;
        let mut comp = vec![UNSEEN; self.node_count];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for s in 0..self.node_count {
            if comp[s] != UNSEEN {
                continue;
            }
            comp[s] = next;
            stack.push(s as NodeId);
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    if comp[v as usize] == UNSEEN {
                        comp[v as usize] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Number of connected components and size of the largest one.
    pub fn component_summary(&self) -> (usize, usize) {
        let comp = self.components();
        let count = comp.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut sizes = vec![0usize; count];
        for c in comp {
            sizes[c as usize] += 1;
        }
        (count, sizes.into_iter().max().unwrap_or(0))
    }

    /// The induced subgraph on the largest connected component, with ids
    /// renumbered in increasing order of the original ids. Also returns the
    /// original id of each new node.
    pub fn largest_component(&self) -> (Self, Vec<NodeId>) {
        let comp = self.components();
        let count = comp.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut sizes = vec![0usize; count];
        for &c in &comp {
            sizes[c as usize] += 1;
        }
        // first maximum wins on ties
        let mut best = 0;
        for (c, &s) in sizes.iter().enumerate() {
            if s > sizes[best] {
                best = c;
            }
        }
        let mut new_id = vec![NodeId::MAX; self.node_count];
        let mut kept = Vec::new();
        for (u, &c) in comp.iter().enumerate() {
            if c as usize == best {
                new_id[u] = kept.len() as NodeId;
                kept.push(u as NodeId);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| comp[e.u as usize] as usize == best)
            .map(|e| Edge::new(new_id[e.u as usize], new_id[e.v as usize], e.w))
            .collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| kept.iter().map(|&u| l[u as usize].clone()).collect());
        (Self::assemble(edges, kept.len(), labels), kept)
    }
}

/// Validate an edge list and build the graph.
pub fn build_graph(edges: Vec<Edge>, node_count: usize) -> Result<WeightedGraph, GraphError> {
    WeightedGraph::build(edges, node_count)
}

pub fn node_stats(g: &WeightedGraph) -> NodeStats {
    g.node_stats()
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = math::floor(h) as usize;
    let hi = (math::ceil(h) as usize).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(edges: &[(u32, u32, f64)], n: usize) -> WeightedGraph {
        WeightedGraph::build(edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect(), n)
            .unwrap()
    }

    #[test]
    fn path_degrees_and_strengths() {
        let g = g(&[(0, 1, 1.0), (1, 2, 2.0)], 3);
        let s = g.node_stats();
        assert_eq!(s.degree, vec![1, 2, 1]);
        assert_eq!(s.strength, vec![1.0, 3.0, 2.0]);
        assert_eq!(g.weight_prefix(1), &[1.0, 3.0]);
    }

    #[test]
    fn rejects_self_loop() {
        let err = WeightedGraph::build(vec![Edge::new(0, 0, 1.0)], 1).unwrap_err();
        assert!(matches!(
            err,
            GraphError::RejectedEdge { index: 0, reason: RejectReason::SelfLoop, .. }
        ));
    }

    #[test]
    fn rejects_bad_edges() {
        let cases = [
            (Edge::new(0, 3, 1.0), RejectReason::IdOutOfRange),
            (Edge::new(0, 1, 0.0), RejectReason::NonPositiveWeight),
            (Edge::new(0, 1, -1.0), RejectReason::NonPositiveWeight),
            (Edge::new(0, 1, f64::NAN), RejectReason::NonFiniteWeight),
            (Edge::new(0, 1, f64::INFINITY), RejectReason::NonFiniteWeight),
        ];
        for (e, want) in cases {
            match WeightedGraph::build(vec![e], 3) {
                Err(GraphError::RejectedEdge { reason, .. }) => assert_eq!(reason, want),
                other => panic!("{e:?}: {other:?}"),
            }
        }
        let dup = WeightedGraph::build(
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(1, 0, 2.0)],
            3,
        );
        assert!(matches!(
            dup,
            Err(GraphError::RejectedEdge { index: 2, reason: RejectReason::DuplicatePair, .. })
        ));
        assert_eq!(WeightedGraph::build(vec![], 0), Err(GraphError::NoNodes));
    }

    #[test]
    fn triangle_and_star() {
        let t = g(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], 3);
        assert!(t.strengths().iter().all(|&s| s == 2.0));
        assert!((0..3).all(|u| t.degree(u) == 2));
        let s = g(&[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0)], 4);
        assert_eq!(s.strength(0), 6.0);
    }

    #[test]
    fn weight_lookup() {
        let g = g(&[(0, 1, 1.5), (1, 2, 2.5)], 4);
        assert_eq!(g.weight(1, 0), Some(1.5));
        assert_eq!(g.weight(2, 1), Some(2.5));
        assert_eq!(g.weight(0, 2), None);
        assert_eq!(g.weight(3, 0), None);
    }

    #[test]
    fn threshold_ten_weights_at_thirty_percent() {
        let edges: Vec<_> = (1..=10).map(|i| (0, i as u32, i as f64)).collect();
        let g = g(&edges, 11);
        // order statistics 1..10, h = 9 * 0.3 = 2.7, t = 3 + 0.7 * (4 - 3) = 3.7
        assert!((g.weight_quantile(0.3).unwrap() - 3.7).abs() < 1e-12);
        let t = g.threshold_by_percentile(0.3).unwrap();
        assert_eq!(t.edge_count(), 7);
        assert!(t.edges().iter().all(|e| e.w >= 4.0));
        assert_eq!(t.node_count(), 11);
        assert_eq!(t.degree(1), 0);
    }

    #[test]
    fn threshold_zero_is_identity_and_ties_survive() {
        let g = g(&[(0, 1, 2.0), (1, 2, 2.0), (2, 3, 2.0), (3, 0, 1.0)], 4);
        assert_eq!(g.threshold_by_percentile(0.0).unwrap().edges(), g.edges());
        // t = 2.0 for q = 0.5; the three tied edges stay
        assert_eq!(g.threshold_by_percentile(0.5).unwrap().edge_count(), 3);
        assert!(matches!(
            g.threshold_by_percentile(1.0),
            Err(GraphError::InvalidQuantile(_))
        ));
    }

    #[test]
    fn shuffle_keeps_multiset_and_pairs() {
        let g = g(&[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 3.0)], 3);
        let s = g.shuffle_weights(5);
        let mut w = s.weights();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, vec![1.0, 2.0, 3.0]);
        for (a, b) in g.edges().iter().zip(s.edges()) {
            assert_eq!(a.key(), b.key());
        }
    }

    #[test]
    fn shuffle_of_constant_weights_is_identity() {
        let g = g(&[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)], 4);
        assert_eq!(g.shuffle_weights(11), g);
    }

    #[test]
    fn largest_component_renumbers() {
        let g = g(&[(0, 4, 1.0), (1, 2, 1.0), (2, 3, 2.0)], 5);
        assert_eq!(g.component_summary(), (2, 3));
        let (lc, ids) = g.largest_component();
        assert_eq!(ids, vec![1, 2, 3]);
        assert_eq!(lc.node_count(), 3);
        assert_eq!(lc.weight(1, 2), Some(2.0));
    }
}
