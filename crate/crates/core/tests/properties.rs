use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use streammatch_core::analyzer::{check_edcs, classify_lucky, path_census, phase_map};
use streammatch_core::augmenter::{build_t, greedy_match, soundness_violations};
use streammatch_core::augpath::find_augmenting_path;
use streammatch_core::graph::{Edge, Graph};
use streammatch_core::instances::{build_hard_instance, xor_gadget, InducedFamily};
use streammatch_core::matching::{apply_augmenting_path, symmetric_difference, EdgeSet, Matching, Path};
use streammatch_core::oracle::{brute_force_matching_size, hall_witness, max_matching};
use streammatch_core::sparsifier::{derive_params, phase1_build_h, phase2_collect_u, AlgoParams};
use streammatch_core::stream::{make_stream, rng_for, PhaseSplit};
use streammatch_core::{beats23_match, matching_number};

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

/// Any simple graph on 1..=max_n vertices.
fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let all = pairs(n);
        proptest::collection::vec(any::<bool>(), all.len())
            .prop_map(move |mask| Graph::new(n, all.iter().zip(&mask).filter(|(_, &k)| k).map(|(&e, _)| e)).unwrap())
    })
}

/// A bipartite graph with `l` left and `r` right vertices.
fn bipartite(max_side: usize) -> impl Strategy<Value = Graph> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(l, r)| {
        proptest::collection::vec(any::<bool>(), l * r).prop_map(move |mask| {
            let edges = (0..l * r).filter(|&i| mask[i]).map(|i| (i / r, l + i % r));
            Graph::bipartite(l, r, edges).unwrap()
        })
    })
}

/// A graph plus a (not necessarily maximum) matching of it, built greedily in a random order.
fn graph_with_matching(max_n: usize) -> impl Strategy<Value = (Graph, Matching)> {
    (graph(max_n), any::<u64>()).prop_map(|(g, seed)| {
        let m = if g.m() == 0 {
            Matching::new(g.n())
        } else {
            greedy_match(&make_stream(&g, seed).unwrap())
        };
        (g, m)
    })
}

/// All augmenting paths of odd length ≤ `max_len`, by exhaustive DFS over simple paths.
fn brute_force_has_augmenting_path(g: &Graph, m: &Matching, max_len: usize) -> bool {
    fn walk(g: &Graph, m: &Matching, path: &mut Vec<usize>, max_len: usize) -> bool {
        let len = path.len() - 1;
        let last = *path.last().unwrap();
        if len % 2 == 1 && !m.is_matched(last) {
            return true;
        }
        if len == max_len {
            return false;
        }
        for &w in g.neighbors(last) {
            if path.contains(&w) {
                continue;
            }
            // Edge number `len` (0-based) must be a non-matching edge when even.
            let in_m = m.contains(Edge::new(last, w));
            if in_m != (len % 2 == 1) {
                continue;
            }
            path.push(w);
            if walk(g, m, path, max_len) {
                return true;
            }
            path.pop();
        }
        false
    }
    (0..g.n())
        .filter(|&v| !m.is_matched(v))
        .any(|s| walk(g, m, &mut vec![s], max_len))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn oracle_agrees_with_brute_force(g in graph(10)) {
        prop_assert_eq!(max_matching(&g).len(), brute_force_matching_size(&g).unwrap());
    }

    #[test]
    fn bipartite_oracle_agrees_with_brute_force(g in bipartite(6)) {
        let m = max_matching(&g);
        prop_assert!(m.is_subset_of(&g));
        prop_assert_eq!(m.len(), brute_force_matching_size(&g).unwrap());
    }

    #[test]
    fn augmentation_adds_exactly_one((g, m) in graph_with_matching(10)) {
        let allowed: EdgeSet = g.edges().iter().copied().collect();
        if let Some(p) = find_augmenting_path(&m, &allowed, 9) {
            let next = apply_augmenting_path(&m, &p).unwrap();
            prop_assert_eq!(next.len(), m.len() + 1);
            prop_assert!(next.is_subset_of(&g));
            for v in 0..g.n() {
                if let Some(w) = next.mate(v) {
                    prop_assert_eq!(next.mate(w), Some(v));
                }
            }
        }
    }

    #[test]
    fn symmetric_difference_has_degree_at_most_two((g, m) in graph_with_matching(10)) {
        let star = max_matching(&g);
        let d = symmetric_difference(&m, &star);
        prop_assert!(d.max_degree() <= 2);
    }

    #[test]
    fn hall_deficiency_matches_matching_number(g in bipartite(7)) {
        let w = hall_witness(&g).unwrap();
        let sides = g.bipartition().unwrap();
        let side_size = match w.side {
            streammatch_core::oracle::Side::Left => sides.left_count(),
            streammatch_core::oracle::Side::Right => sides.right_count(),
        };
        let mu = matching_number(&g);
        prop_assert_eq!(w.deficiency, side_size - mu);
        prop_assert_eq!(w.set.len() - w.neighbors.len(), w.deficiency);
        prop_assert_eq!(
            w.deficiency,
            (sides.left_count() - mu).max(sides.right_count() - mu)
        );
    }

    #[test]
    fn bounded_search_agrees_with_enumeration((g, m) in graph_with_matching(12), max_len in prop::sample::select(vec![1usize, 3, 5, 7])) {
        let allowed: EdgeSet = g.edges().iter().copied().collect();
        let found = find_augmenting_path(&m, &allowed, max_len);
        prop_assert_eq!(found.is_some(), brute_force_has_augmenting_path(&g, &m, max_len));
        if let Some(p) = found {
            prop_assert!(p.len() <= max_len);
            prop_assert!(p.is_augmenting_for(&m));
        }
    }

    #[test]
    fn phases_partition_every_stream(m in 1usize..400, eps in 0.01f64..0.5, gamma in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = rng_for(seed, 1);
        match PhaseSplit::draw(m, eps, gamma, &mut rng) {
            Ok(s) => {
                prop_assert_eq!(s.phase_one().len(), (eps * m as f64 - 1e-9).ceil() as usize);
                prop_assert_eq!(s.phase_one().end, s.phase_two_a().start);
                prop_assert_eq!(s.phase_two_a().end, s.phase_two_b().start);
                prop_assert_eq!(s.phase_two_b().end, m);
                prop_assert_eq!(s.phase_two_a().len(), s.tau);
            }
            Err(_) => prop_assert!((m as f64) < (1.0 / eps - 1e-9).ceil()),
        }
    }

    #[test]
    fn stream_is_a_permutation(g in graph(9), seed in any::<u64>()) {
        prop_assume!(g.m() > 0);
        let s = make_stream(&g, seed).unwrap();
        let mut seen: Vec<Edge> = s.iter().collect();
        seen.sort_unstable();
        prop_assert_eq!(&seen[..], g.edges());
        prop_assert_eq!(s.slice(1, s.len()).unwrap(), s.iter().collect::<Vec<_>>());
    }

    #[test]
    fn sparsifier_invariants(seed in any::<u64>(), p in 0.05f64..0.5, bp in 3.0f64..12.0, gap in 0.05f64..0.45) {
        let g = random_graph(24, p, seed);
        prop_assume!(g.m() >= 10);
        let params = desk_params(bp, bp * (1.0 - gap));
        let s = make_stream(&g, seed).unwrap();
        let split = PhaseSplit::without_subphases(s.len(), params.eps).unwrap();
        let prefix = s.range(split.phase_one());
        let suffix = s.range(split.phase_two());
        let h = phase1_build_h(&g, &prefix, &params);
        prop_assert!(h.m() as f64 <= g.n() as f64 * params.beta_plus);
        let u = phase2_collect_u(&suffix, &h, &params);
        let report = check_edcs(&g, &h, &u, &params, &suffix);
        prop_assert!(report.passed(), "{:?}", report);
    }

    #[test]
    fn t_respects_caps_and_is_maximal(seed in any::<u64>(), b in 2usize..6) {
        let g = random_graph(30, 0.2, seed);
        prop_assume!(g.m() > 0);
        let s = make_stream(&g, seed).unwrap();
        let half = s.len() / 2;
        let prefix = Graph::new(g.n(), s.range(0..half)).unwrap();
        let m_h = max_matching(&prefix);
        let arrivals = s.range(half..s.len());
        let t = build_t(&arrivals, &m_h, b);
        prop_assert!(t.verify(&arrivals).is_ok());
        for v in 0..g.n() {
            let cap = if m_h.is_matched(v) { 2 } else { b };
            prop_assert!(t.degree(v) <= cap);
        }
    }

    #[test]
    fn beats23_runs_are_sound(seed in any::<u64>(), p in 0.05f64..0.4, bp in 3.0f64..10.0) {
        let g = random_graph(30, p, seed);
        prop_assume!(g.m() >= 20);
        let params = desk_params(bp, bp * 0.8);
        let s = make_stream(&g, seed).unwrap();
        let (out, diag) = beats23_match(&s, &params, &mut rng_for(seed, 1)).unwrap();
        let v = soundness_violations(&s, &diag, &out);
        prop_assert!(v.is_empty(), "{:?}", v);
        prop_assert!(diag.augmented.matching.len() >= diag.m_h.len());
        prop_assert!(out.len() <= matching_number(&g));
    }

    #[test]
    fn census_paths_are_augmenting_and_disjoint((g, m) in graph_with_matching(12)) {
        let star = max_matching(&g);
        let c = path_census(&star, &m);
        prop_assert!(c.observation_holds());
        let mut used = vec![false; g.n()];
        for p in &c.paths {
            prop_assert!(matches!(p.len(), 1 | 3 | 5));
            let path = Path::new(p.vertices.clone(), &g.edges().iter().copied().collect()).unwrap();
            prop_assert!(path.is_augmenting_for(&m));
            for &v in &p.vertices {
                prop_assert!(!std::mem::replace(&mut used[v], true));
            }
        }
    }

    #[test]
    fn lucky_classification_is_idempotent(seed in any::<u64>()) {
        let g = random_graph(24, 0.2, seed);
        prop_assume!(g.m() >= 10);
        let s = make_stream(&g, seed).unwrap();
        let split = PhaseSplit::draw(s.len(), 0.1, 2.0 / 3.0, &mut rng_for(seed, 1)).unwrap();
        let prefix = Graph::new(g.n(), s.range(split.phase_one())).unwrap();
        let late = Graph::new(g.n(), s.range(split.phase_two())).unwrap();
        let phases = phase_map(&s, &split);
        let c = path_census(&max_matching(&late), &max_matching(&prefix));
        let once = classify_lucky(&c, |e| phases.get(&e).copied()).unwrap();
        let twice = classify_lucky(&once, |e| phases.get(&e).copied()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.lucky.as_ref().unwrap().iter().all(|&i| i < once.paths.len()));
    }

    #[test]
    fn gadget_parity_law(k in prop::sample::select(vec![3usize, 5, 7, 9]), mask in any::<u32>()) {
        let bits: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        let gadget = xor_gadget(&bits).unwrap();
        prop_assert_eq!(gadget.graph.m(), 2 * k - 2);
        let want = if gadget.parity() { k - 1 } else { k };
        prop_assert_eq!(matching_number(&gadget.graph), want);
    }

    #[test]
    fn hard_instance_parities_and_upper_bound(seed in any::<u64>()) {
        let base = random_bipartite(5, 0.4, seed);
        prop_assume!(base.m() > 0);
        let fam = InducedFamily::trivial(base).unwrap();
        let inst = build_hard_instance(&fam, 3, &mut rng_for(seed, 2)).unwrap();
        for (v, bits) in inst.truth.bits.iter().enumerate() {
            prop_assert_eq!(bits.iter().fold(false, |a, &b| a ^ b), inst.truth.parity[v]);
        }
        prop_assert!(matching_number(&inst.without_special().unwrap()) <= inst.truth.upper_bound());
    }
}

fn desk_params(bp: f64, bm: f64) -> AlgoParams {
    derive_params(0.1).unwrap().with_betas(bp, bm).unwrap()
}

fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = pairs(n).into_iter().filter(|_| rng.gen_bool(p)).collect();
    Graph::new(n, edges).unwrap()
}

fn random_bipartite(side: usize, p: f64, seed: u64) -> Graph {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (0..side)
        .flat_map(|u| (side..2 * side).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::bipartite(side, side, edges).unwrap()
}
