//! Hot paths worth tracking: protocol synthesis (quadrature-heavy) and a
//! short end-to-end expansion (FFT-heavy split-step plus ground-state
//! relaxation).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use scaledrive_core::propagator::{run_cd_expansion, RunSettings};
use scaledrive_core::protocol::{synthesize, FrequencyRamp};
use scaledrive_core::qstate::Grid1D;
use scaledrive_core::{Drive, Regime};

fn bench_synthesize(c: &mut Criterion) {
    let ramp = FrequencyRamp::new(1.0, 0.25, 5.0).expect("valid ramp");
    c.bench_function("synthesize_1001_samples", |b| {
        b.iter(|| synthesize(black_box(&ramp), 1, 2.0, 1001).expect("synthesis succeeds"))
    });
}

fn bench_expansion(c: &mut Criterion) {
    let ramp = FrequencyRamp::new(1.0, 0.25, 1.0).expect("valid ramp");
    let protocol = synthesize(&ramp, 1, 2.0, 1001).expect("synthesis succeeds");
    let grid = Grid1D::new(256, 40.0).expect("valid grid");
    let settings = RunSettings {
        dt: 2e-3,
        output_stride: 1000,
    };
    let mut group = c.benchmark_group("expansion");
    group.sample_size(10);
    group.bench_function("linear_cd_grid256_tF1", |b| {
        b.iter(|| {
            run_cd_expansion(
                black_box(&protocol),
                Regime::Linear,
                Drive::Cd,
                0.0,
                &grid,
                &settings,
            )
            .expect("expansion succeeds")
        })
    });
    group.finish();
}

criterion_group!(benches, bench_synthesize, bench_expansion);
criterion_main!(benches);
