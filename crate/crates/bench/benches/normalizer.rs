use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use atn_core::attacks::{apply_attack, AttackKind, AttackSpec};
use atn_core::normalizer::{normalize, NormalizerConfig, Pass, PassSet};

fn full_pipeline(c: &mut Criterion) {
    let corpus = atn_bench::corpus();
    let cfg = NormalizerConfig::default();
    let mut g = c.benchmark_group("normalize");
    g.throughput(Throughput::Elements(corpus.len() as u64));
    g.bench_function("clean", |b| {
        b.iter(|| {
            for t in &corpus {
                black_box(normalize(t, &cfg));
            }
        })
    });
    for kind in AttackKind::ALL {
        let attacked: Vec<String> =
            corpus.iter().enumerate().map(|(i, t)| apply_attack(t, &AttackSpec::sampled(kind, i as u64)).unwrap()).collect();
        g.bench_with_input(BenchmarkId::new("attacked", kind), &attacked, |b, texts| {
            b.iter(|| {
                for t in texts {
                    black_box(normalize(t, &cfg));
                }
            })
        });
    }
    g.finish();
}

fn single_pass(c: &mut Criterion) {
    let corpus: Vec<String> = atn_bench::corpus()
        .iter()
        .enumerate()
        .map(|(i, t)| apply_attack(t, &AttackSpec::sampled(AttackKind::InsertPunctuationChars, i as u64)).unwrap())
        .collect();
    let mut g = c.benchmark_group("pass");
    g.throughput(Throughput::Elements(corpus.len() as u64));
    for pass in Pass::ALL {
        let cfg = NormalizerConfig::default().with_passes([pass].into_iter().collect::<PassSet>());
        g.bench_function(pass.as_str(), |b| {
            b.iter(|| {
                for t in &corpus {
                    black_box(normalize(t, &cfg));
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, full_pipeline, single_pass);
criterion_main!(benches);
