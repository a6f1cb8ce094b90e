use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lpp_bench::bench_field;
use lpp_core::geodesic::trace_geodesic;
use lpp_core::passage::{constrained_diag, diagonal_profile, passage_checkpointed, passage_full, passage_time};
use lpp_core::{Environment, LatticePoint};

fn weights(c: &mut Criterion) {
    let f = bench_field(0, 1023);
    let mut g = c.benchmark_group("weights");
    g.throughput(Throughput::Elements(1 << 20));
    g.bench_function("1024x1024", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for y in 0..1024 {
                for x in 0..1024 {
                    s += f.weight_at(x, y);
                }
            }
            black_box(s)
        })
    });
    g.finish();
}

fn passage(c: &mut Criterion) {
    let mut g = c.benchmark_group("passage");
    g.sample_size(20);
    for n in [250u32, 500, 1000] {
        let f = bench_field(1, n);
        let cells = (n as u64 + 1).pow(2);
        g.throughput(Throughput::Elements(cells));
        g.bench_with_input(BenchmarkId::new("wavefront", n), &n, |b, &n| {
            b.iter(|| passage_time(&f, LatticePoint::ORIGIN, LatticePoint::diag(n)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("diagonal_profile", n), &n, |b, &n| {
            b.iter(|| diagonal_profile(&f, n).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("full_grid", n), &n, |b, &n| {
            b.iter(|| passage_full(&f, LatticePoint::ORIGIN, LatticePoint::diag(n)).unwrap())
        });
    }
    g.finish();
}

fn geodesics(c: &mut Criterion) {
    let n = 1000;
    let f = bench_field(2, n);
    let top = LatticePoint::diag(n);
    let full = passage_full(&f, LatticePoint::ORIGIN, top).unwrap();
    let checkpointed = passage_checkpointed(&f, LatticePoint::ORIGIN, top, 256).unwrap();
    let mut g = c.benchmark_group("trace");
    g.sample_size(20);
    g.bench_function("full_grid_1000", |b| b.iter(|| trace_geodesic(&full, top).unwrap()));
    g.bench_function("checkpointed_1000", |b| b.iter(|| trace_geodesic(&checkpointed, top).unwrap()));
    g.finish();
}

fn constrained(c: &mut Criterion) {
    let f = bench_field(3, 1000);
    let mut g = c.benchmark_group("constrained");
    g.sample_size(20);
    for theta in [0.25, 1.0, 4.0] {
        g.bench_with_input(BenchmarkId::new("strip_1000", theta), &theta, |b, &theta| {
            b.iter(|| constrained_diag(&f, 1000, theta).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, weights, passage, geodesics, constrained);
criterion_main!(benches);
