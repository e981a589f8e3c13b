use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use schmlab::constructions::{default_rotation_state, isotropic_state, DEFAULT_DECAY};
use schmlab::par::ExecMode;
use schmlab::schmidt::{best_subtraction, min_overlap_sr_with, sn_upper_bound, OverlapOptions, SearchOptions, UpperOptions};
use schmlab::states::Tolerances;
use schmlab::PureState;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn overlap(c: &mut Criterion) {
    let delta = PureState::maximally_entangled(4).unwrap().density();
    let p = delta.matrix().clone();
    let mut group = c.benchmark_group("min_overlap_sr");
    for (name, exec) in MODES {
        let opts = OverlapOptions { restarts: 64, exec, ..OverlapOptions::default() };
        group.bench_function(BenchmarkId::new(name, "maxent 4, r = 2"), |b| {
            b.iter(|| min_overlap_sr_with(black_box(&p), 2, delta.dims(), &opts).unwrap())
        });
    }
    group.finish();
}

fn upper(c: &mut Criterion) {
    let omega = isotropic_state(3, 0.5).unwrap();
    let mut group = c.benchmark_group("sn_upper_bound");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = UpperOptions { floor: 2, ..UpperOptions::new(SearchOptions::default().with_exec(exec)) };
        group.bench_function(BenchmarkId::new(name, "isotropic 3, F = 0.5"), |b| {
            b.iter(|| sn_upper_bound(black_box(&omega), &opts).unwrap())
        });
    }
    group.finish();
}

fn subtraction(c: &mut Criterion) {
    let omega = default_rotation_state(3, DEFAULT_DECAY, 16).unwrap().state;
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("best_subtraction");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "rotation N = 16"), |b| {
            b.iter(|| best_subtraction(black_box(&omega), 1, 64, 3, exec, &tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, overlap, upper, subtraction);
criterion_main!(benches);
