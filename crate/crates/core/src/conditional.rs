//! Expected clique and pattern counts conditional on the weight vector.
//!
//! `C_n = E[#k-cliques | W]` and `C^{(n)}(H) = E[N(H) | W]` are sums over
//! k-subsets of edge-probability products. Exact mode sums them
//! exhaustively (with a hub/bulk split for cliques); sampled mode estimates
//! them from uniformly drawn k-subsets, stratified on subsets that touch a
//! vertex of weight above `n^{1/2}`.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::SubgraphPattern;
use crate::counting::{count_cliques, count_subgraph_copies};
use crate::error::{Error, Result};
use crate::model::{sample_graph, WeightVector};
use crate::seed::RandomSeed;
use crate::util::{binomial, next_combination, CompensatedSum};

/// Largest number of tuple evaluations exact mode will perform.
pub const EXACT_BUDGET: f64 = 1e8;

const SHARDS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountMode {
    Exact,
    Sampled { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalCount {
    pub value: f64,
    pub stderr: f64,
    pub mode: CountKind,
}

impl ConditionalCount {
    fn exact(value: f64) -> Self {
        ConditionalCount {
            value,
            stderr: 0.0,
            mode: CountKind::Exact,
        }
    }
}

/// Probability that `k` vertices with the given weights form a clique:
/// `∏_{i<j} min(h_i h_j / (μ n), 1)`.
pub fn clique_tuple_weight(weights: &[f64], n: usize, alpha: f64) -> f64 {
    let mu_n = alpha / (alpha - 1.0) * n as f64;
    let mut prod = 1.0;
    for (i, &a) in weights.iter().enumerate() {
        for &b in &weights[i + 1..] {
            prod *= (a * b / mu_n).min(1.0);
        }
    }
    prod
}

/// The distinct labelled copies of `H` on positions `0..k`, each as a list
/// of position pairs. There are `k! / |Aut(H)|` of them.
#[derive(Debug, Clone)]
struct LabelledCopies {
    k: usize,
    copies: Vec<Vec<(usize, usize)>>,
}

impl LabelledCopies {
    fn new(h: &SubgraphPattern) -> Self {
        let k = h.k();
        let mut seen = HashSet::new();
        let mut copies = Vec::new();
        let mut perm: Vec<usize> = (0..k).collect();
        loop {
            let mut mapped: Vec<(usize, usize)> = h
                .edges()
                .iter()
                .map(|&(u, v)| {
                    let (a, b) = (perm[u], perm[v]);
                    (a.min(b), a.max(b))
                })
                .collect();
            mapped.sort_unstable();
            if seen.insert(mapped.clone()) {
                copies.push(mapped);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        LabelledCopies { k, copies }
    }

    /// Expected number of copies of `H` on one k-subset.
    fn subset_weight(&self, ws: &[f64], mu_n: f64, probs: &mut Vec<f64>) -> f64 {
        let k = self.k;
        probs.clear();
        probs.resize(k * k, 0.0);
        for i in 0..k {
            for j in i + 1..k {
                probs[i * k + j] = (ws[i] * ws[j] / mu_n).min(1.0);
            }
        }
        self.copies
            .iter()
            .map(|c| c.iter().map(|&(a, b)| probs[a * k + b]).product::<f64>())
            .sum()
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive sum of `f` over all k-subsets of `0..n`, parallel over the
/// smallest element with an order-fixed compensated reduction.
fn enumerate_subsets<F>(n: usize, k: usize, f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if k == 0 || k > n {
        return if k == 0 { f(&[]) } else { 0.0 };
    }
    let partial: Vec<f64> = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut idx: Vec<usize> = (first..first + k).collect();
            let mut sum = CompensatedSum::default();
            loop {
                sum.add(f(&idx));
                // advance the tail while keeping idx[0] fixed
                if k == 1 || !next_combination(&mut idx[1..], n) {
                    break;
                }
            }
            sum.value()
        })
        .collect();
    partial.into_iter().collect::<CompensatedSum>().value()
}

/// Exact clique sum via the hub/bulk split. Vertices below `sqrt(μn)` have
/// all pairwise products below `μn`, so for a fixed set `S` of heavier
/// vertices the bulk part factorizes into an elementary symmetric
/// polynomial.
fn hub_split_cliques(weights: &WeightVector, k: usize) -> f64 {
    let w = weights.as_slice();
    let mu_n = weights.mu_n();
    let root = mu_n.sqrt();
    let (big, small): (Vec<usize>, Vec<usize>) = (0..w.len()).partition(|&i| w[i] >= root);

    let mut total = CompensatedSum::default();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut visit = |chosen: &[usize]| {
        let j = chosen.len();
        let mut hub_part = 1.0;
        for (a, &u) in chosen.iter().enumerate() {
            for &v in &chosen[a + 1..] {
                hub_part *= (w[u] * w[v] / mu_n).min(1.0);
            }
        }
        if hub_part == 0.0 {
            return;
        }
        let m = k - j;
        if m == 0 {
            total.add(hub_part);
            return;
        }
        let mut e = vec![CompensatedSum::default(); m + 1];
        let mut e_val = vec![0.0; m + 1];
        e_val[0] = 1.0;
        for &l in &small {
            let mut a = (w[l] / root).powi(m as i32 - 1);
            for &b in chosen {
                a *= (w[b] * w[l] / mu_n).min(1.0);
            }
            for r in (1..=m).rev() {
                e[r].add(a * e_val[r - 1]);
                e_val[r] = e[r].value();
            }
        }
        total.add(hub_part * e_val[m]);
    };

    fn rec(
        start: usize,
        big: &[usize],
        k: usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        visit(chosen);
        if chosen.len() == k {
            return;
        }
        for i in start..big.len() {
            chosen.push(big[i]);
            rec(i + 1, big, k, chosen, visit);
            chosen.pop();
        }
    }
    rec(0, &big, k, &mut chosen, &mut visit);
    total.value()
}

fn hub_split_cost(weights: &WeightVector, k: usize) -> f64 {
    let root = weights.mu_n().sqrt();
    let big = weights.as_slice().iter().filter(|&&x| x >= root).count();
    let subsets: f64 = (0..=k.min(big)).map(|j| binomial(big, j)).sum();
    subsets * weights.n() as f64
}

/// Running mean/variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }

    fn variance_of_mean(&self) -> f64 {
        if self.count < 2.0 {
            0.0
        } else {
            self.m2 / (self.count - 1.0) / self.count
        }
    }
}

/// Uniform j-subset of `pool` (Floyd), returned sorted.
fn draw_subset<R: Rng>(rng: &mut R, pool: &[usize], j: usize, out: &mut Vec<usize>) {
    let n = pool.len();
    let mut picked: Vec<usize> = Vec::with_capacity(j);
    for i in n - j..n {
        let t = rng.random_range(0..=i);
        if picked.contains(&t) {
            picked.push(i);
        } else {
            picked.push(t);
        }
    }
    out.extend(picked.into_iter().map(|p| pool[p]));
}

/// Stratified Monte Carlo estimate of `Σ_{k-subsets} f`.
fn sampled_total<F>(weights: &WeightVector, k: usize, samples: usize, seed: RandomSeed, f: F) -> (f64, f64)
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let n = weights.n();
    let w = weights.as_slice();
    let threshold = (n as f64).sqrt();
    let (top, rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| w[i] > threshold);
    let total_subsets = binomial(n, k);
    let all: Vec<usize> = (0..n).collect();

    if top.is_empty() || samples < 2 {
        let m = sample_stratum(&all, &[], k, 0, samples, seed, &f);
        return (total_subsets * m.mean, total_subsets * m.variance_of_mean().sqrt());
    }

    let m = top.len();
    let bulk_size = binomial(n - m, k);
    let hub_size = total_subsets - bulk_size;
    let (mut value, mut var) = (0.0, 0.0);

    let hub_samples;
    if hub_size <= samples as f64 {
        // small stratum: enumerate it
        let mut sum = CompensatedSum::default();
        let mut buf = Vec::with_capacity(k);
        for j in 1..=k.min(m) {
            let mut ti: Vec<usize> = (0..j).collect();
            loop {
                if k - j <= rest.len() {
                    let mut ri: Vec<usize> = (0..k - j).collect();
                    loop {
                        buf.clear();
                        buf.extend(ti.iter().map(|&t| top[t]));
                        buf.extend(ri.iter().map(|&r| rest[r]));
                        buf.sort_unstable();
                        sum.add(f(&buf));
                        if k == j || !next_combination(&mut ri, rest.len()) {
                            break;
                        }
                    }
                }
                if !next_combination(&mut ti, m) {
                    break;
                }
            }
        }
        value += sum.value();
        hub_samples = 0;
    } else {
        hub_samples = samples / 2;
        let hm = sample_stratum(&rest, &top, k, 1, hub_samples, seed.child(1), &f);
        value += hub_size * hm.mean;
        var += hub_size * hub_size * hm.variance_of_mean();
    }
    if bulk_size > 0.0 {
        let bm = sample_stratum(&rest, &[], k, 0, samples - hub_samples, seed.child(0), &f);
        value += bulk_size * bm.mean;
        var += bulk_size * bulk_size * bm.variance_of_mean();
    }
    (value, var.sqrt())
}

/// Samples `count` uniform k-subsets of `pool ∪ top` that contain at least
/// `min_top` vertices from `top` (0 or 1).
fn sample_stratum<F>(
    pool: &[usize],
    top: &[usize],
    k: usize,
    min_top: usize,
    count: usize,
    seed: RandomSeed,
    f: &F,
) -> Moments
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    // P(j top vertices) ∝ C(|top|, j) C(|pool|, k - j)
    let jmax = k.min(top.len());
    let mut cum = Vec::new();
    let mut acc = 0.0;
    for j in min_top..=jmax {
        acc += binomial(top.len(), j) * binomial(pool.len(), k - j);
        cum.push((j, acc));
    }
    let shard_moments: Vec<Moments> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let share = count / SHARDS as usize + usize::from((s as usize) < count % SHARDS as usize);
            let mut rng = seed.child(s).rng();
            let mut moments = Moments::default();
            let mut buf = Vec::with_capacity(k);
            for _ in 0..share {
                let u = rng.random::<f64>() * acc;
                let j = cum.iter().find(|(_, c)| u < *c).map_or(cum.last().unwrap().0, |(j, _)| *j);
                buf.clear();
                draw_subset(&mut rng, top, j, &mut buf);
                draw_subset(&mut rng, pool, k - j, &mut buf);
                buf.sort_unstable();
                moments.push(f(&buf));
            }
            moments
        })
        .collect();
    shard_moments.into_iter().fold(Moments::default(), Moments::merge)
}

fn check_mode(mode: CountMode) -> Result<()> {
    if let CountMode::Sampled { samples } = mode {
        if samples == 0 {
            return Err(Error::param("sampled mode needs at least one sample"));
        }
    }
    Ok(())
}

/// `C_n`: expected number of k-cliques given the weights.
pub fn conditional_expected_cliques(
    weights: &WeightVector,
    k: usize,
    mode: CountMode,
    seed: RandomSeed,
) -> Result<ConditionalCount> {
    if k < 2 {
        return Err(Error::param("clique size must be at least 2"));
    }
    check_mode(mode)?;
    let n = weights.n();
    let w = weights.as_slice();
    let mu_n = weights.mu_n();
    let tuple = |idx: &[usize]| {
        let mut prod = 1.0;
        for (a, &u) in idx.iter().enumerate() {
            for &v in &idx[a + 1..] {
                prod *= (w[u] * w[v] / mu_n).min(1.0);
            }
        }
        prod
    };
    match mode {
        CountMode::Exact => {
            let brute = binomial(n, k);
            let split = hub_split_cost(weights, k);
            if brute.min(split) > EXACT_BUDGET {
                return Err(Error::BudgetExceeded {
                    required: brute.min(split),
                    budget: EXACT_BUDGET,
                });
            }
            let value = if brute <= split {
                enumerate_subsets(n, k, tuple)
            } else {
                hub_split_cliques(weights, k)
            };
            Ok(ConditionalCount::exact(value))
        }
        CountMode::Sampled { samples } => {
            let (value, stderr) = sampled_total(weights, k, samples, seed, tuple);
            Ok(ConditionalCount {
                value,
                stderr,
                mode: CountKind::Sampled,
            })
        }
    }
}

/// `C^{(n)}(H)`: expected number of copies of `H` given the weights.
pub fn conditional_expected_subgraphs(
    weights: &WeightVector,
    h: &SubgraphPattern,
    mode: CountMode,
    seed: RandomSeed,
) -> Result<ConditionalCount> {
    check_mode(mode)?;
    let n = weights.n();
    let k = h.k();
    let w = weights.as_slice();
    let mu_n = weights.mu_n();
    let copies = LabelledCopies::new(h);
    let eval = |idx: &[usize]| {
        let ws: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
        let mut probs = Vec::new();
        copies.subset_weight(&ws, mu_n, &mut probs)
    };
    match mode {
        CountMode::Exact => {
            let required = binomial(n, k);
            if required > EXACT_BUDGET {
                return Err(Error::BudgetExceeded {
                    required,
                    budget: EXACT_BUDGET,
                });
            }
            Ok(ConditionalCount::exact(enumerate_subsets(n, k, eval)))
        }
        CountMode::Sampled { samples } => {
            let (value, stderr) = sampled_total(weights, k, samples, seed, eval);
            Ok(ConditionalCount {
                value,
                stderr,
                mode: CountKind::Sampled,
            })
        }
    }
}

/// Exact when affordable, otherwise sampled with `fallback_samples`.
pub fn conditional_expected_auto(
    weights: &WeightVector,
    h: &SubgraphPattern,
    fallback_samples: usize,
    seed: RandomSeed,
) -> Result<ConditionalCount> {
    let exact = if h.is_clique() {
        conditional_expected_cliques(weights, h.k(), CountMode::Exact, seed)
    } else {
        conditional_expected_subgraphs(weights, h, CountMode::Exact, seed)
    };
    match exact {
        Err(Error::BudgetExceeded { .. }) => {
            let mode = CountMode::Sampled {
                samples: fallback_samples,
            };
            if h.is_clique() {
                conditional_expected_cliques(weights, h.k(), mode, seed)
            } else {
                conditional_expected_subgraphs(weights, h, mode, seed)
            }
        }
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub replicas: usize,
    pub realized_mean: f64,
    pub realized_stderr: f64,
    pub conditional: ConditionalCount,
    /// `(realized mean - conditional) / combined standard error`; a large
    /// magnitude points at a counting or kernel inconsistency.
    pub z: f64,
}

/// Compares the mean realized count over `replicas` graphs drawn on the same
/// weights with the conditional expectation.
pub fn realized_vs_conditional_check(
    weights: &WeightVector,
    h: &SubgraphPattern,
    replicas: usize,
    seed: RandomSeed,
) -> Result<ConsistencyReport> {
    if replicas < 30 {
        return Err(Error::param(format!("need at least 30 replicas, got {replicas}")));
    }
    let conditional = conditional_expected_auto(weights, h, 1_000_000, seed.child(u64::MAX))?;
    let counts: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let g = sample_graph(weights, seed.child(r));
            let c = if h.is_clique() {
                count_cliques(&g, h.k())
            } else {
                count_subgraph_copies(&g, h)
            };
            c.value() as f64
        })
        .collect();
    let mut m = Moments::default();
    counts.iter().for_each(|&c| m.push(c));
    let realized_stderr = m.variance_of_mean().sqrt();
    let se = (realized_stderr.powi(2) + conditional.stderr.powi(2)).sqrt();
    let diff = m.mean - conditional.value;
    let z = if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-9 * conditional.value.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(ConsistencyReport {
        replicas,
        realized_mean: m.mean,
        realized_stderr,
        conditional,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_weights;
    use approx::assert_relative_eq;

    #[test]
    fn tuple_weight_values() {
        assert_eq!(clique_tuple_weight(&[100.0, 100.0, 100.0], 3, 1.5), 1.0);
        assert_relative_eq!(clique_tuple_weight(&[1.0, 1.0, 1.0], 3, 1.5), 1.0 / 729.0, epsilon = 1e-15);
        let a = clique_tuple_weight(&[2.0, 5.0, 9.0, 1.5], 40, 1.3);
        let b = clique_tuple_weight(&[9.0, 1.5, 2.0, 5.0], 40, 1.3);
        assert_relative_eq!(a, b, epsilon = 1e-15);
    }

    #[test]
    fn single_forced_clique() {
        let w = WeightVector::new(vec![50.0; 4], 1.5).unwrap();
        let c = conditional_expected_cliques(&w, 4, CountMode::Exact, RandomSeed::new(0)).unwrap();
        assert_eq!(c.value, 1.0);
        assert_eq!(c.stderr, 0.0);
        let w = WeightVector::new(vec![1.0; 3], 1.5).unwrap();
        let c = conditional_expected_cliques(&w, 3, CountMode::Exact, RandomSeed::new(0)).unwrap();
        assert_relative_eq!(c.value, 1.3717421e-3, epsilon = 1e-9);
    }

    #[test]
    fn single_edge_closed_form() {
        let n = 40;
        let w = WeightVector::new(vec![1.0; n], 1.5).unwrap();
        let c = conditional_expected_subgraphs(&w, &SubgraphPattern::path(2).unwrap(), CountMode::Exact, RandomSeed::new(0))
            .unwrap();
        assert_relative_eq!(c.value, binomial(n, 2) / (3.0 * n as f64), epsilon = 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let w = sample_weights(5_000, 1.5, RandomSeed::new(1)).unwrap();
        let c4 = SubgraphPattern::cycle(4).unwrap();
        let err = conditional_expected_subgraphs(&w, &c4, CountMode::Exact, RandomSeed::new(0)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert!(conditional_expected_cliques(&w, 3, CountMode::Sampled { samples: 0 }, RandomSeed::new(0)).is_err());
    }

    #[test]
    fn hub_split_matches_enumeration() {
        for (seed, alpha) in [(1u64, 1.5), (2, 1.2), (3, 1.8)] {
            let mut w = sample_weights(120, alpha, RandomSeed::new(seed)).unwrap();
            // force a few heavy vertices so the split has hubs to handle
            w = crate::model::plant_hubs(&w, &[300.0, 80.0, 25.0]).unwrap();
            let mu_n = w.mu_n();
            for k in 2..=4 {
                let brute = enumerate_subsets(w.n(), k, |idx| {
                    let ws: Vec<f64> = idx.iter().map(|&i| w.as_slice()[i]).collect();
                    clique_tuple_weight(&ws, w.n(), alpha)
                });
                let split = hub_split_cliques(&w, k);
                assert_relative_eq!(brute, split, max_relative = 1e-10);
                let _ = mu_n;
            }
        }
    }

    #[test]
    fn subset_enumeration_counts_each_once() {
        for (n, k) in [(7, 3), (6, 1), (9, 4), (5, 5)] {
            assert_eq!(enumerate_subsets(n, k, |_| 1.0), binomial(n, k));
        }
    }

    #[test]
    fn cliques_agree_with_clique_pattern() {
        let w = sample_weights(60, 1.4, RandomSeed::new(5)).unwrap();
        for k in 2..=4 {
            let a = conditional_expected_cliques(&w, k, CountMode::Exact, RandomSeed::new(0)).unwrap();
            let b = conditional_expected_subgraphs(&w, &SubgraphPattern::clique(k).unwrap(), CountMode::Exact, RandomSeed::new(0))
                .unwrap();
            assert_relative_eq!(a.value, b.value, max_relative = 1e-9);
        }
    }

    #[test]
    fn four_cycle_matches_injection_sum() {
        let n = 30;
        let w = sample_weights(n, 1.5, RandomSeed::new(8)).unwrap();
        let ws = w.as_slice();
        let mu_n = w.mu_n();
        let p = |a: usize, b: usize| (ws[a] * ws[b] / mu_n).min(1.0);
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if a == b || a == c || a == d || b == c || b == d || c == d {
                            continue;
                        }
                        total += p(a, b) * p(b, c) * p(c, d) * p(d, a);
                    }
                }
            }
        }
        let c4 = SubgraphPattern::cycle(4).unwrap();
        let oracle = total / c4.aut_count() as f64;
        let got = conditional_expected_subgraphs(&w, &c4, CountMode::Exact, RandomSeed::new(0)).unwrap();
        assert_relative_eq!(got.value, oracle, max_relative = 1e-10);
    }

    #[test]
    fn sampled_estimate_within_three_stderr() {
        let w = sample_weights(100, 1.5, RandomSeed::new(12)).unwrap();
        let exact = conditional_expected_cliques(&w, 3, CountMode::Exact, RandomSeed::new(0)).unwrap();
        let est = conditional_expected_cliques(&w, 3, CountMode::Sampled { samples: 1_000_000 }, RandomSeed::new(99)).unwrap();
        assert!(est.stderr > 0.0);
        assert!((est.value - exact.value).abs() <= 3.0 * est.stderr, "{est:?} vs {exact:?}");
    }

    #[test]
    fn sampled_mode_is_unbiased() {
        // 100 independent runs: the grand mean sits within 3 pooled stderr
        let w = sample_weights(80, 1.5, RandomSeed::new(21)).unwrap();
        let w = crate::model::plant_hubs(&w, &[40.0]).unwrap();
        let c4 = SubgraphPattern::cycle(4).unwrap();
        let exact = conditional_expected_subgraphs(&w, &c4, CountMode::Exact, RandomSeed::new(0)).unwrap().value;
        let runs: Vec<ConditionalCount> = (0..100)
            .map(|r| {
                conditional_expected_subgraphs(&w, &c4, CountMode::Sampled { samples: 2_000 }, RandomSeed::with_stream(4, r))
                    .unwrap()
            })
            .collect();
        let mean = runs.iter().map(|c| c.value).sum::<f64>() / 100.0;
        let pooled = (runs.iter().map(|c| c.stderr * c.stderr).sum::<f64>()).sqrt() / 100.0;
        assert!((mean - exact).abs() <= 3.0 * pooled, "mean {mean} exact {exact} pooled {pooled}");
    }

    #[test]
    fn monotone_in_weights() {
        let w = sample_weights(25, 1.5, RandomSeed::new(2)).unwrap();
        let p4 = SubgraphPattern::path(4).unwrap();
        let base = conditional_expected_subgraphs(&w, &p4, CountMode::Exact, RandomSeed::new(0)).unwrap().value;
        for i in [0, 7, 24] {
            let mut ws = w.as_slice().to_vec();
            ws[i] *= 3.0;
            let bumped = WeightVector::new(ws, 1.5).unwrap();
            let v = conditional_expected_subgraphs(&bumped, &p4, CountMode::Exact, RandomSeed::new(0)).unwrap().value;
            assert!(v >= base);
        }
    }

    #[test]
    fn degenerate_weights_realized_equals_conditional() {
        let w = WeightVector::new(vec![1e4; 8], 1.5).unwrap();
        let r = realized_vs_conditional_check(&w, &SubgraphPattern::clique(3).unwrap(), 30, RandomSeed::new(1)).unwrap();
        assert_eq!(r.realized_mean, 56.0);
        assert_eq!(r.conditional.value, 56.0);
        assert_eq!(r.z, 0.0);
        assert!(realized_vs_conditional_check(&w, &SubgraphPattern::clique(3).unwrap(), 10, RandomSeed::new(1)).is_err());
    }

    #[test]
    fn realized_counts_match_conditional_expectation() {
        let w = sample_weights(200, 1.5, RandomSeed::new(31)).unwrap();
        for h in [SubgraphPattern::clique(3).unwrap(), SubgraphPattern::path(4).unwrap()] {
            let r = realized_vs_conditional_check(&w, &h, 500, RandomSeed::new(32)).unwrap();
            assert!(r.z.abs() <= 4.0, "{}: {r:?}", h.edge_string());
        }
    }

    #[test]
    fn weight_average_matches_two_level_monte_carlo() {
        // E_W[C_n] equals E[#triangles]; compare the mean of exact C_n over
        // weight draws with realized counts over (weights, graph) draws.
        let (n, reps) = (60, 4_000u64);
        let seed = RandomSeed::new(77);
        let cond: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let w = sample_weights(n, 1.8, seed.child(r)).unwrap();
                conditional_expected_cliques(&w, 3, CountMode::Exact, seed).unwrap().value
            })
            .collect();
        let real: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let s = seed.child(reps + r);
                let w = sample_weights(n, 1.8, s.child(0)).unwrap();
                count_cliques(&sample_graph(&w, s.child(1)), 3).value() as f64
            })
            .collect();
        let stats = |v: &[f64]| {
            let mut m = Moments::default();
            v.iter().for_each(|&x| m.push(x));
            m
        };
        let (a, b) = (stats(&cond), stats(&real));
        let se = (a.variance_of_mean() + b.variance_of_mean()).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * se, "{} vs {} (se {se})", a.mean, b.mean);
    }
}
