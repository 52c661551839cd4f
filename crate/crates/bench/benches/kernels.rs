use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sparsesv::ensemble::{sample, EnsembleSpec, EntryShape, Params};
use sparsesv::probe::{exact_rademacher_small_ball, Comparison};
use sparsesv::spectra::{singular_values, smallest_singular};

fn params() -> Params {
    Params { r: 3.0, mu: 2.0, a1: 4.0, a2: 1.0, a3: 1.0, a4: 1.0 }
}

fn gaussian(rows: usize, cols: usize) -> EnsembleSpec {
    EnsembleSpec::homogeneous(rows, cols, EntryShape::Gaussian, 1.0, params()).unwrap()
}

fn jacobi(c: &mut Criterion) {
    let mut g = c.benchmark_group("singular_values");
    for (rows, cols) in [(12, 8), (50, 50), (200, 10), (120, 40)] {
        let m = sample(&gaussian(rows, cols), 1).matrix;
        g.bench_with_input(BenchmarkId::from_parameter(format!("{rows}x{cols}")), &m, |b, m| {
            b.iter(|| singular_values(black_box(m)).unwrap())
        });
    }
    g.finish();
    let m = sample(&gaussian(200, 10), 2).matrix;
    c.bench_function("smallest_singular/200x10", |b| b.iter(|| smallest_singular(black_box(&m)).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let spec = gaussian(200, 10);
    c.bench_function("sample/gaussian 200x10", |b| b.iter(|| sample(black_box(&spec), 7)));
    let spec = EnsembleSpec::homogeneous(120, 40, EntryShape::Rademacher, 1.0, params()).unwrap();
    c.bench_function("sample/rademacher 120x40", |b| b.iter(|| sample(black_box(&spec), 7)));
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_rademacher_small_ball");
    for n in [10usize, 16, 20] {
        let x: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| exact_rademacher_small_ball(black_box(x), 0.5, Comparison::Greater).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, jacobi, sampling, enumeration);
criterion_main!(benches);
