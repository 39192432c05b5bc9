//! Exact clique and pattern-copy counting on a realized graph.

use serde::Serialize;

use crate::catalog::SubgraphPattern;
use crate::graph::GraphSample;

/// Number of distinct (non-induced) copies of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CopyCount(pub u64);

impl CopyCount {
    pub fn value(self) -> u64 {
        self.0
    }
}

/// Vertices in degeneracy order (repeatedly remove a minimum-degree vertex).
pub fn degeneracy_order(g: &GraphSample) -> Vec<usize> {
    let n = g.n();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[degree[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    while order.len() < n {
        // lazy deletion: bucket entries may be stale
        let mut found = None;
        while found.is_none() {
            while buckets[d].is_empty() {
                d += 1;
            }
            let v = buckets[d].pop().unwrap();
            if !removed[v] && degree[v] == d {
                found = Some(v);
            }
        }
        let v = found.unwrap();
        removed[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            let u = u as usize;
            if !removed[u] {
                degree[u] -= 1;
                buckets[degree[u]].push(u);
                if degree[u] < d {
                    d = degree[u];
                }
            }
        }
    }
    order
}

fn intersect_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

fn count_in(cands: &[u32], need: usize, forward: &[Vec<u32>], scratch: &mut Vec<Vec<u32>>) -> u64 {
    if need == 1 {
        return cands.len() as u64;
    }
    let mut buf = scratch.pop().unwrap_or_default();
    let mut total = 0;
    for &v in cands {
        intersect_sorted(cands, &forward[v as usize], &mut buf);
        if buf.len() + 1 >= need {
            total += count_in(&buf, need - 1, forward, scratch);
        }
    }
    scratch.push(buf);
    total
}

/// Number of `k`-vertex subsets inducing a complete graph.
///
/// Edges are oriented along a degeneracy order, so every clique is reached
/// exactly once from its first vertex by intersecting forward neighborhoods.
/// By convention `k = 0` gives 1 and `k = 1` gives `n`.
pub fn count_cliques(g: &GraphSample, k: usize) -> CopyCount {
    match k {
        0 => return CopyCount(1),
        1 => return CopyCount(g.n() as u64),
        2 => return CopyCount(g.edge_count() as u64),
        _ => {}
    }
    if k > g.n() {
        return CopyCount(0);
    }
    let order = degeneracy_order(g);
    let mut position = vec![0usize; g.n()];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    let forward: Vec<Vec<u32>> = (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .copied()
                .filter(|&u| position[u as usize] > position[v])
                .collect()
        })
        .collect();
    let mut scratch = Vec::new();
    let total = (0..g.n())
        .filter(|&v| forward[v].len() + 1 >= k)
        .map(|v| count_in(&forward[v], k - 1, &forward, &mut scratch))
        .sum();
    CopyCount(total)
}

const BITSET_MAX_N: usize = 10_000;

/// Adjacency test backed by a bit matrix for small graphs and by binary
/// search in the sorted neighbor lists otherwise.
enum AdjacencyIndex<'a> {
    Bits { words: usize, bits: Vec<u64> },
    Sorted(&'a GraphSample),
}

impl<'a> AdjacencyIndex<'a> {
    fn build(g: &'a GraphSample) -> Self {
        if g.n() > BITSET_MAX_N {
            return AdjacencyIndex::Sorted(g);
        }
        let words = g.n().div_ceil(64);
        let mut bits = vec![0u64; words * g.n()];
        for (u, v) in g.edges() {
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        AdjacencyIndex::Bits { words, bits }
    }

    #[inline]
    fn adjacent(&self, u: usize, v: usize) -> bool {
        match self {
            AdjacencyIndex::Bits { words, bits } => bits[u * words + v / 64] & (1 << (v % 64)) != 0,
            AdjacencyIndex::Sorted(g) => g.has_edge(u, v),
        }
    }
}

/// Matching order for a pattern: start at a maximum-degree vertex, then
/// repeatedly take the vertex with the most already-placed neighbors.
/// Returns, per position, the pattern vertex, an anchor position among its
/// earlier neighbors, and the other earlier neighbor positions.
pub(crate) fn matching_plan(h: &SubgraphPattern) -> Vec<(usize, Option<usize>, Vec<usize>)> {
    let k = h.k();
    let mut placed: Vec<usize> = Vec::with_capacity(k);
    let first = (0..k).max_by_key(|&v| (h.degree(v), std::cmp::Reverse(v))).unwrap();
    placed.push(first);
    while placed.len() < k {
        let next = (0..k)
            .filter(|v| !placed.contains(v))
            .max_by_key(|&v| {
                let back = placed.iter().filter(|&&u| h.has_edge(u, v)).count();
                (back, h.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        placed.push(next);
    }
    placed
        .iter()
        .enumerate()
        .map(|(p, &v)| {
            let back: Vec<usize> = (0..p).filter(|&q| h.has_edge(placed[q], v)).collect();
            let anchor = back.first().copied();
            let rest = back.iter().copied().skip(1).collect();
            (v, anchor, rest)
        })
        .collect()
}

/// Number of (not necessarily induced) copies of `h` in `g`: injective
/// adjacency-preserving maps divided by `|Aut(h)|`.
pub fn count_subgraph_copies(g: &GraphSample, h: &SubgraphPattern) -> CopyCount {
    let k = h.k();
    if k > g.n() {
        return CopyCount(0);
    }
    let plan = matching_plan(h);
    let min_degree: Vec<usize> = plan.iter().map(|(v, _, _)| h.degree(*v)).collect();
    let adj = AdjacencyIndex::build(g);
    let mut image = vec![0usize; k];

    fn extend(
        p: usize,
        g: &GraphSample,
        adj: &AdjacencyIndex<'_>,
        plan: &[(usize, Option<usize>, Vec<usize>)],
        min_degree: &[usize],
        image: &mut [usize],
    ) -> u128 {
        let k = plan.len();
        let (_, anchor, rest) = &plan[p];
        let anchor = anchor.expect("connected pattern");
        let mut total = 0u128;
        for &c in g.neighbors(image[anchor]) {
            let c = c as usize;
            if g.degree(c) < min_degree[p] || image[..p].contains(&c) {
                continue;
            }
            if !rest.iter().all(|&q| adj.adjacent(image[q], c)) {
                continue;
            }
            if p + 1 == k {
                total += 1;
            } else {
                image[p] = c;
                total += extend(p + 1, g, adj, plan, min_degree, image);
            }
        }
        total
    }

    let mut embeddings = 0u128;
    for v in 0..g.n() {
        if g.degree(v) < min_degree[0] {
            continue;
        }
        if k == 1 {
            embeddings += 1;
            continue;
        }
        image[0] = v;
        embeddings += extend(1, g, &adj, &plan, &min_degree, &mut image);
    }
    CopyCount((embeddings / h.aut_count() as u128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_graph, WeightVector};
    use crate::seed::RandomSeed;
    use proptest::prelude::*;
    use rand::Rng;

    fn petersen() -> GraphSample {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((i, i + 5));
            e.push((i + 5, (i + 2) % 5 + 5));
        }
        GraphSample::from_edges(10, &e).unwrap()
    }

    fn gnp(n: usize, p: f64, seed: u64) -> GraphSample {
        let mut rng = RandomSeed::new(seed).rng();
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    e.push((u, v));
                }
            }
        }
        GraphSample::from_edges(n, &e).unwrap()
    }

    /// Oracle: all ordered injections of pattern vertices, divided by |Aut|.
    fn brute_copies(g: &GraphSample, h: &SubgraphPattern) -> u64 {
        fn rec(g: &GraphSample, h: &SubgraphPattern, img: &mut Vec<usize>) -> u64 {
            if img.len() == h.k() {
                let ok = h.edges().iter().all(|&(a, b)| g.has_edge(img[a], img[b]));
                return ok as u64;
            }
            let mut t = 0;
            for v in 0..g.n() {
                if !img.contains(&v) {
                    img.push(v);
                    t += rec(g, h, img);
                    img.pop();
                }
            }
            t
        }
        rec(g, h, &mut Vec::new()) / h.aut_count()
    }

    #[test]
    fn clique_counts() {
        assert_eq!(count_cliques(&GraphSample::complete(5), 3).value(), 10);
        assert_eq!(count_cliques(&GraphSample::complete(6), 4).value(), 15);
        assert_eq!(count_cliques(&GraphSample::empty(7), 3).value(), 0);
        assert_eq!(count_cliques(&GraphSample::empty(7), 2).value(), 0);
        assert_eq!(count_cliques(&GraphSample::complete(3), 4).value(), 0);
    }

    #[test]
    fn petersen_has_no_triangles() {
        let g = petersen();
        let brute = (0..10)
            .flat_map(|a| (a + 1..10).flat_map(move |b| (b + 1..10).map(move |c| (a, b, c))))
            .filter(|&(a, b, c)| g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c))
            .count();
        assert_eq!(brute, 0);
        assert_eq!(count_cliques(&g, 3).value(), 0);
        assert_eq!(count_subgraph_copies(&g, &SubgraphPattern::cycle(5).unwrap()).value(), 12);
    }

    #[test]
    fn pattern_counts_small_cases() {
        let k4 = GraphSample::complete(4);
        assert_eq!(count_subgraph_copies(&k4, &SubgraphPattern::cycle(4).unwrap()).value(), 3);
        let k3 = GraphSample::complete(3);
        assert_eq!(count_subgraph_copies(&k3, &SubgraphPattern::clique(3).unwrap()).value(), 1);
    }

    #[test]
    fn pattern_counts_match_injection_brute_force() {
        let g = gnp(20, 0.3, 4);
        let patterns = [
            SubgraphPattern::path(3).unwrap(),
            SubgraphPattern::clique(3).unwrap(),
            SubgraphPattern::cycle(4).unwrap(),
            SubgraphPattern::path(4).unwrap(),
            SubgraphPattern::star(3).unwrap(),
            SubgraphPattern::new(4, vec![(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap(),
        ];
        for h in &patterns {
            assert_eq!(count_subgraph_copies(&g, h).value(), brute_copies(&g, h), "{}", h.edge_string());
        }
    }

    #[test]
    fn large_graph_uses_sorted_lists() {
        let w = WeightVector::new(vec![3.0; 12_000], 1.5).unwrap();
        let g = sample_graph(&w, RandomSeed::new(3));
        let k3 = SubgraphPattern::clique(3).unwrap();
        assert_eq!(count_subgraph_copies(&g, &k3), count_cliques(&g, 3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cliques_equal_clique_pattern(seed in 0u64..10_000, p in 0.1f64..0.7) {
            let g = gnp(16, p, seed);
            for k in 2..=6 {
                let h = SubgraphPattern::clique(k).unwrap();
                prop_assert_eq!(count_subgraph_copies(&g, &h), count_cliques(&g, k));
            }
        }

        #[test]
        fn counts_are_relabeling_invariant(seed in 0u64..10_000) {
            let g = gnp(14, 0.35, seed);
            let mut perm: Vec<usize> = (0..14).collect();
            let mut rng = RandomSeed::new(seed ^ 77).rng();
            for i in (1..perm.len()).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let g2 = g.relabel(&perm).unwrap();
            let c4 = SubgraphPattern::cycle(4).unwrap();
            prop_assert_eq!(count_cliques(&g, 3), count_cliques(&g2, 3));
            prop_assert_eq!(count_subgraph_copies(&g, &c4), count_subgraph_copies(&g2, &c4));
        }

        #[test]
        fn adding_an_edge_never_decreases(seed in 0u64..10_000, u in 0usize..12, v in 0usize..12) {
            prop_assume!(u != v);
            let g = gnp(12, 0.3, seed);
            let g2 = g.with_edge(u, v).unwrap();
            for h in [SubgraphPattern::path(4).unwrap(), SubgraphPattern::clique(3).unwrap(), SubgraphPattern::cycle(4).unwrap()] {
                prop_assert!(count_subgraph_copies(&g2, &h) >= count_subgraph_copies(&g, &h));
            }
        }
    }
}
