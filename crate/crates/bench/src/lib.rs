//! Shared inputs for the criterion benches.

use atn_core::corpus::{clean_sentences, BENCH_SEED};

/// The bench corpus: 1000 clean sentences of about 100 codepoints.
pub fn corpus() -> Vec<String> {
    clean_sentences(BENCH_SEED, 1000)
}
