use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rsc_core::sim::sample_msbm_with;
use rsc_core::sketch::sparsify_with;
use rsc_core::{build_operator, draw_test_matrix, model_preset, Execution, SamplingConfig, TestDistribution, Variant};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn operator_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply");
    group.sample_size(20);
    for n in [2_000, 10_000] {
        let net = sample_msbm_with(&model_preset(1, n, 8, 20.0 / n as f64).unwrap(), 1, Execution::Parallel).unwrap();
        let sampled = sparsify_with(&net, SamplingConfig::new(0.7, 2).unwrap(), Execution::Parallel).unwrap();
        let op = build_operator(&sampled, 0.7, Variant::Undirected).unwrap();
        let x = draw_test_matrix(n, 3, TestDistribution::Gaussian, 3).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &x, |b, x| {
                b.iter(|| op.apply_with(x, exec).unwrap());
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_and_sparsify");
    group.sample_size(10);
    let model = model_preset(1, 10_000, 8, 2e-3).unwrap();
    let net = sample_msbm_with(&model, 1, Execution::Parallel).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("generate", name), |b| {
            b.iter(|| sample_msbm_with(&model, 1, exec).unwrap());
        });
        group.bench_function(BenchmarkId::new("sparsify", name), |b| {
            b.iter(|| sparsify_with(&net, SamplingConfig::new(0.7, 2).unwrap(), exec).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, operator_apply, sampling);
criterion_main!(benches);
