use std::hint::black_box;

use acfilter_core::{
    classify_steady, energy, imex1_step_2d, odd_filter_1d, sym_filter_2d, GroundCurve, NoiseParity, NoiseSource,
    PerturbationConfig, PeriodicGrid1D, PeriodicGrid2D, SchemeConfig, SchemeKind, SpectralField1D, SpectralField2D,
    Stepper,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn sine(n: usize) -> SpectralField1D {
    let g = PeriodicGrid1D::new(n).unwrap();
    SpectralField1D::from_fn(&g, |x| x.sin() + 0.3 * (3.0 * x).sin())
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for n in [128, 256, 1024] {
        let u = sine(n);
        let g = u.grid().clone();
        group.bench_with_input(BenchmarkId::new("forward_inverse", n), &n, |b, _| {
            b.iter(|| {
                let c = g.forward(black_box(u.values())).unwrap();
                g.inverse(&c).unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("odd_filter", n), &n, |b, _| {
            b.iter(|| odd_filter_1d(black_box(&u)))
        });
        group.bench_with_input(BenchmarkId::new("energy", n), &n, |b, _| {
            b.iter(|| energy(black_box(&u), 0.9).unwrap())
        });
    }
    group.finish();
}

fn schemes(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_n256");
    let u = sine(256);
    for kind in SchemeKind::ALL {
        let cfg = SchemeConfig::new(kind, 0.01, 0.9).unwrap();
        let mut st = Stepper::new(cfg, u.grid()).unwrap();
        group.bench_function(kind.to_string(), |b| b.iter(|| st.step(black_box(&u)).unwrap()));
    }
    group.finish();
}

fn two_dimensional(c: &mut Criterion) {
    let mut group = c.benchmark_group("2d");
    for n in [64, 128] {
        let g = PeriodicGrid2D::new(n, n).unwrap();
        let u = SpectralField2D::from_fn(&g, |x, y| x.sin() * y.sin());
        group.bench_with_input(BenchmarkId::new("imex1_step", n), &n, |b, _| {
            b.iter(|| imex1_step_2d(black_box(&u), 0.01, 0.1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sym_filter", n), &n, |b, _| {
            b.iter(|| sym_filter_2d(black_box(&u)))
        });
        let mut src = NoiseSource::new(&PerturbationConfig::new(1e-13, NoiseParity::Even, 1));
        group.bench_with_input(BenchmarkId::new("noise_sample", n), &n, |b, _| {
            b.iter(|| src.sample_2d(&g).unwrap())
        });
    }
    group.finish();
}

fn ground_state(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_state");
    for kappa in [0.05, 0.5, 0.95] {
        group.bench_with_input(BenchmarkId::new("curve", kappa), &kappa, |b, &k| {
            b.iter(|| GroundCurve::new(black_box(k)).unwrap().energy())
        });
    }
    let g = PeriodicGrid1D::new(256).unwrap();
    let curve = GroundCurve::new(0.3).unwrap();
    let u = SpectralField1D::from_fn(&g, |x| -curve.eval(x + 0.4));
    group.bench_function("classify_n256", |b| b.iter(|| classify_steady(black_box(&u), 0.3).unwrap()));
    group.finish();
}

criterion_group!(benches, transforms, schemes, two_dimensional, ground_state);
criterion_main!(benches);
