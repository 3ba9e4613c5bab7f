//! Reversal of character-level adversarial attacks on text.
//!
//! * [`mappings`] holds confusable tables and character classes.
//! * [`normalizer`] is the reversal pipeline.
//! * [`attacks`] generates seeded attacked text.
//! * [`classifier`] scores text with a lexicon oracle or an external endpoint.
//! * [`evaluation`] runs the baseline / augmented / normalized matrix.
//! * [`corpus`] builds synthetic clean sentences and demo datasets.

pub mod attacks;
pub mod classifier;
pub mod corpus;
pub mod evaluation;
pub mod labels;
pub mod mappings;
pub mod normalizer;

pub use attacks::{apply_attack, sample_params, AttackError, AttackKind, AttackParams, AttackSpec, FieldSelector, Granularity};
pub use classifier::{ClassifierError, ClassifierHandle, LexiconClassifier, Prediction, Score};
pub use evaluation::{EvalRecord, EvalReport, RecordInput};
pub use labels::{Label, Task};
pub use mappings::{CharClass, CharClassSet, ConfusableTable, TableError};
pub use normalizer::{
    normalize, normalize_text, ConfigError, Edit, NormalizationResult, NormalizerConfig, NormalizerTables, Pass, PassSet,
};
