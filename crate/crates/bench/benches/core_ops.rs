use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use irgdev_core::asymptotics::{expected_clique_mean, solve_c_a};
use irgdev_core::conditional::conditional_expected_cliques;
use irgdev_core::model::{sample_graph, sample_weights};
use irgdev_core::optimizer::{grid_oracle_r, solve_r};
use irgdev_core::{count_cliques, count_subgraph_copies, enumerate_connected, CountMode, RandomSeed, SubgraphPattern};

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_graph");
    for n in [10_000usize, 100_000] {
        let w = sample_weights(n, 1.5, RandomSeed::new(1)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| sample_graph(black_box(w), RandomSeed::new(2)))
        });
    }
    group.finish();
}

fn counting(c: &mut Criterion) {
    let w = sample_weights(20_000, 1.5, RandomSeed::new(1)).unwrap();
    let g = sample_graph(&w, RandomSeed::new(2));
    c.bench_function("count_cliques/k3/n20000", |b| b.iter(|| count_cliques(black_box(&g), 3)));
    c.bench_function("count_cliques/k4/n20000", |b| b.iter(|| count_cliques(black_box(&g), 4)));
    let c4 = SubgraphPattern::cycle(4).unwrap();
    let small = sample_graph(&sample_weights(3_000, 1.5, RandomSeed::new(3)).unwrap(), RandomSeed::new(4));
    c.bench_function("count_subgraph_copies/c4/n3000", |b| {
        b.iter(|| count_subgraph_copies(black_box(&small), &c4))
    });
}

fn conditional(c: &mut Criterion) {
    let w = sample_weights(100_000, 1.75, RandomSeed::new(1)).unwrap();
    c.bench_function("conditional_cliques/exact/k3/n100000", |b| {
        b.iter(|| conditional_expected_cliques(black_box(&w), 3, CountMode::Exact, RandomSeed::new(0)).unwrap())
    });
    c.bench_function("conditional_cliques/sampled/k4/n100000", |b| {
        b.iter(|| {
            conditional_expected_cliques(black_box(&w), 4, CountMode::Sampled { samples: 100_000 }, RandomSeed::new(0))
                .unwrap()
        })
    });
}

fn asymptotics(c: &mut Criterion) {
    c.bench_function("expected_clique_mean/k3/n1e6", |b| {
        b.iter(|| expected_clique_mean(black_box(1_000_000), 3, 1.5).unwrap())
    });
    c.bench_function("solve_c_a/k3/n1e6", |b| b.iter(|| solve_c_a(black_box(1_000_000), 1.0, 3, 1.75, 1e-6).unwrap()));
}

fn optimizer(c: &mut Criterion) {
    let six = enumerate_connected(6).unwrap();
    let dense = six.last().unwrap().clone();
    c.bench_function("solve_r/k6_clique", |b| b.iter(|| solve_r(black_box(&dense), 1.5, 2.0).unwrap()));
    c.bench_function("solve_r/all_k6", |b| {
        b.iter(|| {
            for h in &six {
                black_box(solve_r(h, 1.5, 2.0).unwrap());
            }
        })
    });
    let tri = SubgraphPattern::clique(3).unwrap();
    c.bench_function("grid_oracle_r/k3/g100", |b| b.iter(|| grid_oracle_r(black_box(&tri), 1.5, 1.0, 100).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sampling, counting, conditional, asymptotics, optimizer
}
criterion_main!(benches);
