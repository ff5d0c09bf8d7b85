use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use platelab_core::baselines::standard_sweep;
use platelab_core::carleman::{ratio_sweep, EstimateKind};
use platelab_core::conformal::{build_map_with, BoundaryGraph};
use platelab_core::doubling::{caccioppoli_scan, reference_solution};
use platelab_core::Execution;

const POLICIES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn carleman_sweep(c: &mut Criterion) {
    let mut cfg = standard_sweep(EstimateKind::Bilaplacian);
    cfg.family_size = 8;
    let family = cfg.family();
    let mut group = c.benchmark_group("carleman-sweep");
    group.sample_size(10);
    for exec in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| ratio_sweep(black_box(&family), &cfg, exec).unwrap().max_q())
        });
    }
    group.finish();
}

fn caccioppoli(c: &mut Criterion) {
    let u = reference_solution(0.5, 1.0 / 128.0).unwrap();
    let radii = [0.25, 0.125, 0.0625];
    let mut group = c.benchmark_group("caccioppoli-scan");
    group.sample_size(10);
    for exec in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| caccioppoli_scan(black_box(&u), (0.0, 0.0), &radii, 6, exec).unwrap())
        });
    }
    group.finish();
}

fn conformal_map(c: &mut Criterion) {
    let graph = BoundaryGraph::quadratic(0.1, 1.0, 0.5).unwrap();
    let mut group = c.benchmark_group("conformal-map");
    group.sample_size(10);
    for exec in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| build_map_with(black_box(&graph), 64, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, carleman_sweep, caccioppoli, conformal_map);
criterion_main!(benches);
