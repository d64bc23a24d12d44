//! Seeded Monte-Carlo checks on the randomness the algorithms rely on.

use std::collections::HashMap;

use streammatch_core::graph::{Edge, Graph};
use streammatch_core::instances::hiding_failure_rate;
use streammatch_core::stream::{make_stream, rng_for, sample_binomial, Phase, PhaseSplit, PHASE_SUBSTREAM};

#[test]
fn three_edge_orders_are_uniform() {
    let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let samples = 6000;
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for seed in 0..samples {
        *counts
            .entry(make_stream(&g, seed).unwrap().order().to_vec())
            .or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let expected = samples as f64 / 6.0;
    let mut chi2 = 0.0;
    for &c in counts.values() {
        let f = c as f64 / samples as f64;
        assert!((f - 1.0 / 6.0).abs() <= 0.02, "frequency {f}");
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    // 99.9% quantile of chi-square with 5 degrees of freedom.
    assert!(chi2 < 20.515, "chi2 = {chi2}");
}

#[test]
fn binomial_mean() {
    let mut rng = rng_for(42, PHASE_SUBSTREAM);
    let mean = (0..100)
        .map(|_| sample_binomial(9000, 2.0 / 3.0, &mut rng) as f64)
        .sum::<f64>()
        / 100.0;
    let sd_of_mean = (9000.0f64 * 2.0 / 9.0).sqrt() / 10.0;
    assert!((mean - 6000.0).abs() <= 3.0 * sd_of_mean, "mean {mean}");
    assert!((mean - 6000.0).abs() <= 134.0);
}

#[test]
fn phase_two_edges_land_in_the_first_subphase_with_probability_gamma() {
    let gamma = 2.0 / 3.0;
    let g = Graph::new(10, (0..10).flat_map(|u| (u + 1..10).map(move |v| (u, v))).take(40)).unwrap();
    let watched = Edge::new(0, 1);
    let (mut in_two, mut in_a) = (0usize, 0usize);
    let (mut pooled_two, mut pooled_a) = (0usize, 0usize);
    for seed in 0..2000u64 {
        let s = make_stream(&g, seed).unwrap();
        let split = PhaseSplit::draw(s.len(), 0.1, gamma, &mut rng_for(seed, PHASE_SUBSTREAM)).unwrap();
        for pos in split.phase_two() {
            let a = split.phase_at(pos) == Phase::IIA;
            pooled_two += 1;
            pooled_a += a as usize;
            if s.at(pos) == watched {
                in_two += 1;
                in_a += a as usize;
            }
        }
    }
    let check = |hits: usize, total: usize| {
        let f = hits as f64 / total as f64;
        let sigma = (gamma * (1.0 - gamma) / total as f64).sqrt();
        assert!(
            (f - gamma).abs() <= 3.0 * sigma,
            "frequency {f} over {total}, sigma {sigma}"
        );
    };
    check(in_a, in_two);
    // Pooled over 36 edges per trial; the per-trial indicators are correlated through
    // τ, so the spread is that of τ/36 averaged over trials.
    let f = pooled_a as f64 / pooled_two as f64;
    let sigma = (gamma * (1.0 - gamma) / 36.0 / 2000.0).sqrt();
    assert!((f - gamma).abs() <= 3.0 * sigma, "pooled {f}");
}

#[test]
fn hiding_failure_stays_under_the_union_bound() {
    for (vertices, k) in [(4usize, 7usize), (6, 9), (10, 11)] {
        let rate = hiding_failure_rate(vertices, k, 4000, &mut rng_for(vertices as u64, 2)).unwrap();
        let bound = vertices as f64 * 0.75f64.powi(k as i32);
        // Tolerance: three standard errors of a Bernoulli(bound) mean.
        let se = (bound * (1.0 - bound) / 4000.0).sqrt();
        assert!(rate <= bound + 3.0 * se, "vertices {vertices}, k {k}: {rate} > {bound}");
    }
}
