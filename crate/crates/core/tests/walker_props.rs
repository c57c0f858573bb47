//! Walk kernels against closed-form transition probabilities.

use rand::Rng;
use weightwalk_core::graph::{Edge, NodeId, WeightedGraph};
use weightwalk_core::rng;
use weightwalk_core::walker::{
    build_corpus, build_corpus_parallel, transition_distribution, Kernel, KernelSampler, WalkConfig,
};

/// Random graph on 2..=6 nodes with log-uniform weights in [0.01, 100].
fn small_graph(seed: u64) -> WeightedGraph {
    let mut r = rng::stream(seed);
    let n = r.random_range(2..=6usize);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            if r.random_bool(0.6) {
                edges.push(Edge::new(u, v, 10f64.powf(r.random_range(-2.0..2.0))));
            }
        }
    }
    if edges.is_empty() {
        edges.push(Edge::new(0, 1, 1.0));
    }
    WeightedGraph::build(edges, n).unwrap()
}

/// Transition probabilities computed from the definitions, independently of
/// the library: RW 1/k, SRW s_v / sum s, WRW w_uv / sum w.
fn oracle(g: &WeightedGraph, u: NodeId, kernel: Kernel) -> Vec<(NodeId, f64)> {
    let nbrs: Vec<(NodeId, f64)> = g
        .edges()
        .iter()
        .filter_map(|e| match (e.u == u, e.v == u) {
            (true, _) => Some((e.v, e.w)),
            (_, true) => Some((e.u, e.w)),
            _ => None,
        })
        .collect();
    let strength = |v: NodeId| -> f64 {
        g.edges().iter().filter(|e| e.u == v || e.v == v).map(|e| e.w).sum()
    };
    let mass: Vec<f64> = nbrs
        .iter()
        .map(|&(v, w)| match kernel {
            Kernel::Rw => 1.0,
            Kernel::Srw => strength(v),
            Kernel::Wrw => w,
        })
        .collect();
    let total: f64 = mass.iter().sum();
    nbrs.iter().zip(mass).map(|(&(v, _), m)| (v, m / total)).collect()
}

#[test]
fn analytic_kernel_matches_oracle() {
    for seed in 0..100 {
        let g = small_graph(seed);
        for kernel in Kernel::ALL {
            for u in 0..g.node_count() as NodeId {
                if g.degree(u) == 0 {
                    continue;
                }
                let p = transition_distribution(&g, u, kernel).unwrap();
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for (v, q) in oracle(&g, u, kernel) {
                    let i = g.neighbors(u).iter().position(|&x| x == v).unwrap();
                    assert!((p[i] - q).abs() < 1e-12, "seed {seed} {kernel} {u}->{v}");
                }
            }
        }
    }
}

#[test]
fn empirical_frequencies_match_oracle() {
    // 100 graphs; 10^5 steps from every node under every kernel
    const STEPS: usize = 100_000;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let g = small_graph(seed);
        for kernel in Kernel::ALL {
            let sampler = KernelSampler::new(&g, kernel);
            let mut r = rng::stream(rng::derive_seed(seed, &[kernel as u64]));
            for u in 0..g.node_count() as NodeId {
                if g.degree(u) == 0 {
                    continue;
                }
                let mut counts = vec![0usize; g.node_count()];
                for _ in 0..STEPS {
                    counts[sampler.step(u, &mut r).unwrap() as usize] += 1;
                }
                for (v, q) in oracle(&g, u, kernel) {
                    let f = counts[v as usize] as f64 / STEPS as f64;
                    worst = worst.max((f - q).abs());
                }
                let off: usize = (0..g.node_count())
                    .filter(|&v| g.weight(u, v as NodeId).is_none())
                    .map(|v| counts[v])
                    .sum();
                assert_eq!(off, 0, "step to a non-neighbor");
            }
        }
    }
    assert!(worst < 0.01, "worst deviation {worst}");
}

#[test]
fn equal_weights_make_wrw_identical_to_rw() {
    for seed in 0..100 {
        let g = small_graph(seed);
        let g = g.with_weights(&vec![0.37; g.edge_count()]).unwrap();
        for u in 0..g.node_count() as NodeId {
            if g.degree(u) == 0 {
                continue;
            }
            let rw = transition_distribution(&g, u, Kernel::Rw).unwrap();
            let wrw = transition_distribution(&g, u, Kernel::Wrw).unwrap();
            assert_eq!(
                rw.iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
                wrw.iter().map(|p| p.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn regular_equal_weight_graph_makes_srw_identical_to_rw() {
    // cycles, a complete graph and a 3-regular graph (the 3-cube)
    let mut graphs = Vec::new();
    for n in [3u32, 5, 8] {
        graphs.push(WeightedGraph::build((0..n).map(|i| Edge::new(i, (i + 1) % n, 2.5)).collect(), n as usize).unwrap());
    }
    let k5: Vec<Edge> = (0..5u32).flat_map(|u| (u + 1..5).map(move |v| Edge::new(u, v, 0.1))).collect();
    graphs.push(WeightedGraph::build(k5, 5).unwrap());
    let cube: Vec<Edge> = (0..8u32)
        .flat_map(|u| [1u32, 2, 4].into_iter().filter(move |b| u & b == 0).map(move |b| Edge::new(u, u | b, 7.0)))
        .collect();
    graphs.push(WeightedGraph::build(cube, 8).unwrap());
    for g in &graphs {
        for u in 0..g.node_count() as NodeId {
            let rw = transition_distribution(g, u, Kernel::Rw).unwrap();
            let srw = transition_distribution(g, u, Kernel::Srw).unwrap();
            assert_eq!(
                rw.iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
                srw.iter().map(|p| p.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}

/// Stationary distribution of the explicit transition matrix by power
/// iteration.
fn stationary(g: &WeightedGraph, kernel: Kernel) -> Vec<f64> {
    let n = g.node_count();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        for u in 0..n as NodeId {
            for (v, q) in oracle(g, u, kernel) {
                next[v as usize] += p[u as usize] * q;
            }
        }
        // lazy averaging avoids oscillation on bipartite graphs
        for (a, b) in p.iter_mut().zip(&next) {
            *a = 0.5 * *a + 0.5 * b;
        }
    }
    p
}

#[test]
fn long_walk_visits_match_stationary_distribution() {
    let edges = vec![
        Edge::new(0, 1, 1.0),
        Edge::new(1, 2, 4.0),
        Edge::new(2, 3, 0.5),
        Edge::new(3, 0, 2.0),
        Edge::new(0, 2, 3.0),
        Edge::new(3, 4, 6.0),
    ];
    let g = WeightedGraph::build(edges, 5).unwrap();
    for kernel in Kernel::ALL {
        let pi = stationary(&g, kernel);
        let sampler = KernelSampler::new(&g, kernel);
        let mut r = rng::stream(77);
        let steps = 1_000_000;
        let mut visits = vec![0usize; 5];
        let mut cur = 0;
        for _ in 0..steps {
            cur = sampler.step(cur, &mut r).unwrap();
            visits[cur as usize] += 1;
        }
        let tv: f64 = visits
            .iter()
            .zip(&pi)
            .map(|(&c, p)| (c as f64 / steps as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "{kernel}: tv {tv}, pi {pi:?}");
    }
    // WRW on an undirected graph is reversible with pi proportional to strength
    let pi = stationary(&g, Kernel::Wrw);
    let total: f64 = g.strengths().iter().sum();
    for (p, s) in pi.iter().zip(g.strengths()) {
        assert!((p - s / total).abs() < 1e-9);
    }
}

#[test]
fn corpus_shape_and_adjacency() {
    let g = small_graph(3);
    let cfg = WalkConfig {
        kernel: Kernel::Srw,
        walks_per_node: 7,
        walk_length: 9,
        seed: 1,
    };
    let c = build_corpus(&g, &cfg).unwrap();
    assert_eq!(c.len(), 7 * g.node_count());
    for seq in c.sequences() {
        assert!(seq.len() <= 9);
        if g.degree(seq[0]) > 0 {
            assert_eq!(seq.len(), 9);
        }
        for w in seq.windows(2) {
            assert!(g.weight(w[0], w[1]).is_some());
        }
    }
}

#[test]
fn parallel_corpus_is_bit_identical() {
    let g = small_graph(11);
    for kernel in Kernel::ALL {
        let cfg = WalkConfig {
            kernel,
            walks_per_node: 5,
            walk_length: 20,
            seed: 4,
        };
        let a = build_corpus(&g, &cfg).unwrap();
        for threads in [2, 3, 8] {
            let b = build_corpus_parallel(&g, &cfg, threads).unwrap();
            assert_eq!(a.tokens(), b.tokens());
            assert_eq!(a.fingerprint(), b.fingerprint());
        }
    }
}
