//! Statistical checks of the generators against closed-form moments.

use weightwalk_core::generators::{gen_ba, gen_er, gen_sbm, gen_waxman, BaVariant, SbmParams, SbmWeightMode, WeightDist};

#[test]
fn er_edge_count_within_three_sigma() {
    let (n, k) = (1024usize, 16.0);
    let p = k / (n - 1) as f64;
    let pairs = (n * (n - 1) / 2) as f64;
    let sigma = (pairs * p * (1.0 - p)).sqrt();
    let seeds = 100;
    let mean = (0..seeds)
        .map(|s| gen_er(n, k, WeightDist::uniform(), s).unwrap().edge_count() as f64)
        .sum::<f64>()
        / seeds as f64;
    // the mean of 100 draws has sd sigma / 10; the per-graph band is the looser check
    assert!((mean - pairs * p).abs() < 3.0 * sigma, "mean {mean}, expected {}", pairs * p);
    assert!((mean - pairs * p).abs() < 3.0 * sigma / 10.0, "mean {mean}");
}

#[test]
fn er_weight_distributions_have_expected_means() {
    for (wd, mean) in [
        (WeightDist::uniform(), 0.55),
        (WeightDist::normal(), 0.55),
        (WeightDist::exponential(), 0.45),
    ] {
        let g = gen_er(2000, 20.0, wd, 1).unwrap();
        let w = g.weights();
        let m = w.iter().sum::<f64>() / w.len() as f64;
        assert!((m - mean).abs() < 0.01, "{}: {m}", wd.name());
        assert!(w.iter().all(|&x| x > 0.0 && x.is_finite()));
    }
}

#[test]
fn sbm_mean_degree_and_block_contrast() {
    let (n, k, ratio) = (2048, 16.0, 0.2);
    let params = SbmParams::solve(n, k, ratio).unwrap();
    assert!((params.expected_mean_degree() - k).abs() < 1e-9);
    assert!((params.p_out / params.p_in - ratio).abs() < 1e-12);
    let block = params.block_of();
    for seed in 0..10 {
        let g = gen_sbm(n, k, ratio, SbmWeightMode::Jitter, seed).unwrap();
        assert!((g.mean_degree() - k).abs() < 1.0, "seed {seed}: {}", g.mean_degree());
        let (mut inside, mut across) = (0usize, 0usize);
        for e in g.edges() {
            if block[e.u as usize] == block[e.v as usize] {
                inside += 1;
                // jitter keeps weights within [0.5, 1.5] x p
                assert!(e.w >= 0.5 * params.p_in - 1e-15 && e.w <= 1.5 * params.p_in + 1e-15);
            } else {
                across += 1;
                assert!(e.w >= 0.5 * params.p_out - 1e-15 && e.w <= 1.5 * params.p_out + 1e-15);
            }
        }
        // realized densities reproduce the ratio
        let b = n / SbmParams::BLOCKS;
        let inside_pairs = (SbmParams::BLOCKS * b * (b - 1) / 2) as f64;
        let across_pairs = (n * (n - 1) / 2) as f64 - inside_pairs;
        let realized = (across as f64 / across_pairs) / (inside as f64 / inside_pairs);
        assert!((realized - ratio).abs() < 0.03, "ratio {realized}");
    }
}

#[test]
fn sbm_exact_weights_are_two_valued() {
    let g = gen_sbm(200, 8.0, 0.25, SbmWeightMode::Exact, 4).unwrap();
    let mut w = g.weights();
    w.sort_by(f64::total_cmp);
    w.dedup();
    assert_eq!(w.len(), 2);
    assert!((w[0] / w[1] - 0.25).abs() < 1e-12);
}

#[test]
fn waxman_realized_degree() {
    for seed in 0..10 {
        let wax = gen_waxman(512, 16.0, 0.3, seed).unwrap();
        let k = wax.graph.mean_degree();
        assert!((k - 16.0).abs() < 1.5, "seed {seed}: {k}");
        assert!(!wax.alpha_capped);
        // weights are the connection probabilities of the realized pairs
        for e in wax.graph.edges().iter().take(50) {
            let [x0, y0] = wax.positions[e.u as usize];
            let [x1, y1] = wax.positions[e.v as usize];
            let d = ((x0 - x1).powi(2) + (y0 - y1).powi(2)).sqrt();
            let p = wax.alpha * (-d / wax.beta).exp();
            assert!((e.w - p).abs() < 1e-12);
        }
    }
}

/// Discrete power-law MLE (Clauset et al.) over degrees >= kmin.
fn powerlaw_exponent(degrees: &[usize], kmin: usize) -> f64 {
    let tail: Vec<f64> = degrees.iter().filter(|&&k| k >= kmin).map(|&k| k as f64).collect();
    let s: f64 = tail.iter().map(|k| (k / (kmin as f64 - 0.5)).ln()).sum();
    1.0 + tail.len() as f64 / s
}

#[test]
fn ba_degree_exponent_near_three() {
    for variant in [BaVariant::Wsf, BaVariant::We] {
        let mut gammas = Vec::new();
        for seed in 0..5 {
            let g = gen_ba(4096, 3, variant, seed).unwrap();
            let degrees: Vec<usize> = (0..g.node_count() as u32).map(|u| g.degree(u)).collect();
            gammas.push(powerlaw_exponent(&degrees, 6));
        }
        let mean = gammas.iter().sum::<f64>() / gammas.len() as f64;
        assert!((mean - 3.0).abs() < 0.5, "{}: {gammas:?}", variant.name());
    }
}

#[test]
fn generators_are_pure_functions_of_seed() {
    let a = gen_waxman(128, 8.0, 0.3, 9).unwrap();
    let b = gen_waxman(128, 8.0, 0.3, 9).unwrap();
    assert_eq!(a.graph.edges(), b.graph.edges());
    assert_eq!(
        gen_ba(300, 2, BaVariant::We, 2).unwrap().edges(),
        gen_ba(300, 2, BaVariant::We, 2).unwrap().edges()
    );
    assert_ne!(
        gen_er(300, 6.0, WeightDist::normal(), 1).unwrap().edges(),
        gen_er(300, 6.0, WeightDist::normal(), 2).unwrap().edges()
    );
}
