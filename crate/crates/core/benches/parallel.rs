use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use skewtent::curves::{linspace, raster, trace_isentrope, BisectOptions, Field, Window};
use skewtent::exec::Execution;
use skewtent::symbolic::KneadingSeq;
use skewtent::theta::ThetaSpec;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn theta_raster(c: &mut Criterion) {
    let field = Field::ThetaValue(ThetaSpec::counterexample());
    let window = Window::new(0.0, 1.0, 0.5, 1.0).unwrap();
    let mut g = c.benchmark_group("theta_raster_128");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| raster(&field, window, 128, 128, exec).unwrap())
        });
    }
    g.finish();
}

fn kneading_raster(c: &mut Criterion) {
    let field = Field::KneadingClass { depth: 32 };
    let window = Window::new(0.0, 1.0, 0.5, 1.0).unwrap();
    let mut g = c.benchmark_group("kneading_raster_128");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| raster(&field, window, 128, 128, exec).unwrap())
        });
    }
    g.finish();
}

fn isentrope_trace(c: &mut Criterion) {
    let m: KneadingSeq = "RLLRC".parse().unwrap();
    let nodes = linspace(0.52, 0.72, 256);
    let mut g = c.benchmark_group("rllrc_trace_256");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| trace_isentrope(&m, &nodes, BisectOptions::default(), exec))
        });
    }
    g.finish();
}

criterion_group!(benches, theta_raster, kneading_raster, isentrope_trace);
criterion_main!(benches);
