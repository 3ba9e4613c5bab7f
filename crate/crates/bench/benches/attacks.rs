use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};

use atn_core::attacks::{apply_attack, AttackKind, AttackSpec};

fn attacks(c: &mut Criterion) {
    let corpus = atn_bench::corpus();
    let mut g = c.benchmark_group("attack");
    g.throughput(Throughput::Elements(corpus.len() as u64));
    for kind in AttackKind::ALL {
        g.bench_function(kind.as_str(), |b| {
            b.iter(|| {
                for (i, t) in corpus.iter().enumerate() {
                    black_box(apply_attack(t, &AttackSpec::sampled(kind, i as u64)).unwrap());
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, attacks);
criterion_main!(benches);
