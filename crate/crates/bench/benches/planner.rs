use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netupdate_bench::workload;
use netupdate_core::{fixture, plan_optimal, plan_sequential, search_min_rounds, verify_plan};

fn fixtures(c: &mut Criterion) {
    let mut group = c.benchmark_group("fixtures");
    for name in ["fig1_trivial", "fig4_removable_dd", "fig5_wait_example"] {
        let net = fixture(name).unwrap().instance;
        group.bench_function(BenchmarkId::new("optimal", name), |b| b.iter(|| plan_optimal(&net)));
        group.bench_function(BenchmarkId::new("sequential", name), |b| {
            b.iter(|| plan_sequential(&net))
        });
    }
    let fig4 = fixture("fig4_removable_dd").unwrap().instance;
    let plan = plan_optimal(&fig4);
    group.bench_function("verify/fig4_removable_dd", |b| {
        b.iter(|| verify_plan(&fig4, &plan).unwrap())
    });
    group.bench_function("oracle/fig4_removable_dd", |b| {
        b.iter(|| search_min_rounds(&fig4, 10).unwrap())
    });
    group.finish();
}

fn generated(c: &mut Criterion) {
    let mut group = c.benchmark_group("generated");
    group.sample_size(20);
    for nodes in [50, 100, 200, 400] {
        for (mode, net) in workload(nodes, 1) {
            group.bench_with_input(BenchmarkId::new(format!("optimal/{mode}"), nodes), &net, |b, net| {
                b.iter(|| plan_optimal(net))
            });
            group.bench_with_input(BenchmarkId::new(format!("sequential/{mode}"), nodes), &net, |b, net| {
                b.iter(|| plan_sequential(net))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, fixtures, generated);
criterion_main!(benches);
