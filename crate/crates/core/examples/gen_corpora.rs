//! Regenerates the shipped bench and demo corpora under `data/`.
//!
//! cargo run -p atn-core --example gen_corpora

use std::io::Write;
use std::path::Path;

use atn_core::classifier::LexiconClassifier;
use atn_core::corpus::{clean_sentences, synthetic_binary_corpus, BENCH_SEED, DEMO_SEED};

fn main() -> std::io::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");

    let mut bench = std::fs::File::create(data.join("bench_corpus.txt"))?;
    for line in clean_sentences(BENCH_SEED, 1000) {
        writeln!(bench, "{line}")?;
    }

    let lexicon = LexiconClassifier::builtin().lexicon().to_vec();
    let mut demo = std::fs::File::create(data.join("demo_binary.jsonl"))?;
    for record in synthetic_binary_corpus(DEMO_SEED, 200, &lexicon, 0.06) {
        writeln!(demo, "{}", record.to_json())?;
    }
    Ok(())
}
