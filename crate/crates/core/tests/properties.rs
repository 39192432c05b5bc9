use proptest::prelude::*;

use irgdev_core::asymptotics::{j_rate, solve_c_a};
use irgdev_core::conditional::{conditional_expected_cliques, conditional_expected_subgraphs};
use irgdev_core::model::{edge_probability, sample_graph, sample_weights};
use irgdev_core::optimizer::{solve_b, solve_r};
use irgdev_core::{
    canonical_form, count_cliques, count_subgraph_copies, CountMode, GraphSample, RandomSeed, SubgraphPattern,
    WeightVector,
};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = GraphSample> {
    (4..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(proptest::bool::weighted(0.45), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut idx = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[idx] {
                        edges.push((u, v));
                    }
                    idx += 1;
                }
            }
            GraphSample::from_edges(n, &edges).unwrap()
        })
    })
}

fn connected_pattern(max_k: usize) -> impl Strategy<Value = SubgraphPattern> {
    (3..=max_k).prop_flat_map(|k| {
        let pairs = k * (k - 1) / 2;
        (proptest::collection::vec(any::<bool>(), pairs), Just(k)).prop_filter_map("connected", |(bits, k)| {
            // a spanning path keeps the pattern connected
            let mut edges: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
            let mut idx = 0;
            for u in 0..k {
                for v in u + 1..k {
                    if bits[idx] && v != u + 1 {
                        edges.push((u, v));
                    }
                    idx += 1;
                }
            }
            SubgraphPattern::new(k, edges).ok()
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clique_pattern_counts_agree(g in graph_strategy(11)) {
        for k in 2..=5 {
            let h = SubgraphPattern::clique(k).unwrap();
            prop_assert_eq!(count_subgraph_copies(&g, &h), count_cliques(&g, k));
        }
    }

    #[test]
    fn counts_are_relabeling_invariant(
        (g, perm) in graph_strategy(10).prop_flat_map(|g| { let n = g.n(); (Just(g), permutation(n)) }),
        h in connected_pattern(4),
    ) {
        let r = g.relabel(&perm).unwrap();
        prop_assert_eq!(count_subgraph_copies(&g, &h), count_subgraph_copies(&r, &h));
        prop_assert_eq!(count_cliques(&g, 3), count_cliques(&r, 3));
    }

    #[test]
    fn adding_an_edge_never_lowers_counts(g in graph_strategy(9), h in connected_pattern(4), u in 0usize..9, v in 0usize..9) {
        let (u, v) = (u % g.n(), v % g.n());
        prop_assume!(u != v);
        let bigger = g.with_edge(u, v).unwrap();
        prop_assert!(count_subgraph_copies(&bigger, &h).value() >= count_subgraph_copies(&g, &h).value());
    }

    #[test]
    fn canonical_code_ignores_labels((h, perm) in connected_pattern(6).prop_flat_map(|h| { let k = h.k(); (Just(h), permutation(k)) })) {
        let r = h.relabel(&perm).unwrap();
        prop_assert_eq!(r.canonical_code(), h.canonical_code());
        prop_assert_eq!(canonical_form(r.k(), r.edges()).unwrap(), h.canonical_code());
        prop_assert_eq!(r.aut_count(), h.aut_count());
    }

    #[test]
    fn kernel_is_symmetric_and_monotone(a in 1.0f64..1e4, b in 1.0f64..1e4, bump in 1.0f64..10.0, alpha in 1.05f64..1.95) {
        let p = edge_probability(a, b, 500, alpha);
        prop_assert_eq!(p, edge_probability(b, a, 500, alpha));
        prop_assert!(p <= 1.0);
        prop_assert!(edge_probability(a * bump, b, 500, alpha) >= p);
    }

    #[test]
    fn sampled_graphs_are_simple(seed in any::<u64>(), alpha in 1.1f64..1.9) {
        let w = sample_weights(300, alpha, RandomSeed::new(seed)).unwrap();
        let g = sample_graph(&w, RandomSeed::new(seed).child(1));
        for u in 0..g.n() {
            prop_assert!(!g.has_edge(u, u));
            for &v in g.neighbors(u) {
                prop_assert!(g.has_edge(v as usize, u));
            }
        }
    }

    #[test]
    fn conditional_cliques_match_pattern_form(seed in any::<u64>(), k in 2usize..=4) {
        let w = sample_weights(25, 1.4, RandomSeed::new(seed)).unwrap();
        let s = RandomSeed::new(0);
        let a = conditional_expected_cliques(&w, k, CountMode::Exact, s).unwrap().value;
        let b = conditional_expected_subgraphs(&w, &SubgraphPattern::clique(k).unwrap(), CountMode::Exact, s).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
    }

    #[test]
    fn raising_a_weight_never_lowers_conditional_counts(seed in any::<u64>(), h in connected_pattern(4), i in 0usize..15, f in 1.0f64..50.0) {
        let w = sample_weights(15, 1.5, RandomSeed::new(seed)).unwrap();
        let mut raised = w.as_slice().to_vec();
        raised[i] *= f;
        let raised = WeightVector::new(raised, 1.5).unwrap();
        let s = RandomSeed::new(0);
        let before = conditional_expected_subgraphs(&w, &h, CountMode::Exact, s).unwrap().value;
        let after = conditional_expected_subgraphs(&raised, &h, CountMode::Exact, s).unwrap().value;
        prop_assert!(after >= before * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rates_are_nonpositive_and_monotone(h in connected_pattern(5), alpha in 1.1f64..1.9, g1 in 0.1f64..2.5, g2 in 0.1f64..2.5) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let r_lo = solve_r(&h, alpha, lo).unwrap();
        let r_hi = solve_r(&h, alpha, hi).unwrap();
        if r_hi.feasible {
            prop_assert!(r_lo.feasible);
            prop_assert!(r_lo.value.unwrap() >= r_hi.value.unwrap() - 1e-9);
        }
        if let Some(v) = r_lo.value {
            prop_assert!(v <= 1e-12);
        }
    }

    #[test]
    fn relabeling_permutes_the_optimizer(
        (h, perm) in connected_pattern(5).prop_flat_map(|h| { let k = h.k(); (Just(h), permutation(k)) }),
        alpha in 1.1f64..1.9,
        gamma in 0.2f64..2.0,
    ) {
        let r = h.relabel(&perm).unwrap();
        let (a, b) = (solve_r(&h, alpha, gamma).unwrap(), solve_r(&r, alpha, gamma).unwrap());
        prop_assert_eq!(a.feasible, b.feasible);
        if let (Some(x), Some(y)) = (a.value, b.value) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        let (ba, bb) = (solve_b(&h, alpha).unwrap().value.unwrap(), solve_b(&r, alpha).unwrap().value.unwrap());
        prop_assert!((ba - bb).abs() <= 1e-9);
    }
}

#[test]
fn hub_threshold_increases_in_a_and_n() {
    let (k, alpha) = (3, 1.75);
    let grid: Vec<Vec<f64>> = [10_000usize, 100_000, 1_000_000]
        .iter()
        .map(|&n| [0.5, 1.0, 2.0].iter().map(|&a| solve_c_a(n, a, k, alpha, 1e-6).unwrap()).collect())
        .collect();
    for row in &grid {
        assert!(row.windows(2).all(|w| w[1] > w[0]), "{row:?}");
    }
    for j in 0..3 {
        assert!(grid.windows(2).all(|w| w[1][j] > w[0][j]), "{grid:?}");
    }
}

#[test]
fn j_rate_is_nonnegative_and_increasing() {
    let values: Vec<f64> = (0..100).map(|i| j_rate(i as f64 * 0.1).unwrap()).collect();
    assert!(values.iter().all(|&v| v >= 0.0));
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    assert!(j_rate(-0.1).is_err());
}
