use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coordlang::abstraction::{build_abstraction, conflict_graph, greedy_color, verify_perfect, ColorOrder, Scope};
use coordlang::domain::{build_state_graph, DomainSpec};
use coordlang::plan::all_pairs_distances;
use coordlang::rc::{build_rc_graph, RcOptions};

fn problems() -> Vec<(&'static str, DomainSpec)> {
    vec![
        ("GW #1", DomainSpec::grid_loop(2, 2).unwrap()),
        ("GW #2", DomainSpec::grid_loop(3, 3).unwrap()),
        ("T&O #2", DomainSpec::turn_and_open(2, 1).unwrap()),
    ]
}

fn state_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("state_graph");
    for (label, spec) in problems() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &spec, |b, spec| {
            b.iter(|| {
                let g = build_state_graph(spec).unwrap();
                all_pairs_distances(&g)
            })
        });
    }
    group.finish();
}

fn rc_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("rc_graph");
    group.sample_size(10);
    for (label, spec) in problems() {
        let g = build_state_graph(&spec).unwrap();
        let d = all_pairs_distances(&g);
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| build_rc_graph(&g, &d, RcOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn colour_and_verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("colour_and_verify");
    group.sample_size(10);
    for (label, spec) in problems() {
        let g = build_state_graph(&spec).unwrap();
        let d = all_pairs_distances(&g);
        let cg = conflict_graph(&build_rc_graph(&g, &d, RcOptions::default()).unwrap());
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| {
                let coloring = greedy_color(&cg, ColorOrder::Saturation);
                let abs = build_abstraction(&g, &cg, &coloring).unwrap();
                verify_perfect(&abs, &g, &d, Scope::Sample { k: 200, seed: 0 }).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, state_graph, rc_graph, colour_and_verify);
criterion_main!(benches);
