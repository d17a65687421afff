use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dynpat::hamiltonian::HoppingRule;
use dynpat::pattern::{Frequency, PatternSpec};
use dynpat::spectral::{butterfly_sweep, SweepConfig};
use dynpat::Parallelism;

const MODES: [Parallelism; 2] = [Parallelism::Sequential, Parallelism::Auto];

fn sweep(c: &mut Criterion) {
    let template = PatternSpec::example_i(Frequency::zero(), 0.4);
    let config = SweepConfig {
        q_max: 8,
        size_floor: 60,
        ..SweepConfig::default()
    };
    let mut group = c.benchmark_group("butterfly_sweep");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(mode), &mode, |b, &m| {
            b.iter(|| butterfly_sweep(&template, &config, &HoppingRule::default(), m).unwrap())
        });
    }
    group.finish();
}

fn bundle(c: &mut Criterion) {
    let spec = PatternSpec::example_i(Frequency::ratio(21, 34).unwrap(), 0.4);
    let cuts: Vec<i64> = (0..32).collect();
    let gaps = vec![dynpat::spectral::GapRecord {
        alpha: spec.alpha.clone(),
        gap_lo: 0.8,
        gap_hi: 1.4,
        ids: 21.0 / 34.0,
    }];
    let mut group = c.benchmark_group("edge_bundle");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(mode), &mode, |b, &m| {
            b.iter(|| {
                dynpat::edge::bundle_edge_spectrum(
                    &spec,
                    0,
                    &cuts,
                    &[102],
                    &HoppingRule::default(),
                    &[0.0],
                    &gaps,
                    &dynpat::edge::EdgeConfig::default(),
                    m,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, bundle);
criterion_main!(benches);
