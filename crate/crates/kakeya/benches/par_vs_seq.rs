//! Sequential vs data-parallel execution of the enumeration-heavy
//! operations, with identical (byte-stable) outputs in both modes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kakeya::achievement::truncation_cover;
use kakeya::cover::{landscape, LandscapeSpec, DEFAULT_ENUMERATION_CAP};
use kakeya::exec::ExecMode;
use kakeya::families;
use kakeya::rational::Rat;

fn modes() -> [(&'static str, ExecMode); 2] {
    [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ]
}

fn bench_landscape(c: &mut Criterion) {
    let mut group = c.benchmark_group("landscape");
    group.sample_size(10);
    let specs = [
        ("free_6480", LandscapeSpec::figure_free()),
        ("monotone_2097k", LandscapeSpec::figure_monotone()),
        (
            "free_390k",
            LandscapeSpec {
                ranges: vec![(1, 6), (2, 7), (2, 7), (3, 8), (3, 8), (3, 8), (3, 7)],
                monotone: false,
                top_count: 3000,
            },
        ),
    ];
    for (spec_name, spec) in &specs {
        for (mode_name, mode) in modes() {
            group.bench_with_input(
                BenchmarkId::new(*spec_name, mode_name),
                &mode,
                |b, &mode| {
                    b.iter(|| landscape(spec, DEFAULT_ENUMERATION_CAP, mode).unwrap())
                },
            );
        }
    }
    group.finish();
}

fn bench_truncation_cover(c: &mut Criterion) {
    let mut group = c.benchmark_group("truncation_cover");
    group.sample_size(10);
    let triadic = families::triadic(20);
    let geometric = families::geometric(Rat::ratio(2, 3), 16).unwrap();
    for (seq_name, seq, depth) in [("triadic_d16", &triadic, 16), ("geometric_d14", &geometric, 14)]
    {
        for (mode_name, mode) in modes() {
            group.bench_with_input(
                BenchmarkId::new(seq_name, mode_name),
                &mode,
                |b, &mode| {
                    b.iter(|| truncation_cover(seq, depth, DEFAULT_ENUMERATION_CAP, mode).unwrap())
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_landscape, bench_truncation_cover);
criterion_main!(benches);
