//! Detection and classification of Brazilian Portuguese verbal negation
//! (pre-verbal `NEG1`, double `NEG2`, post-verbal `NEG3`) in transcribed
//! sociolinguistic interviews, plus the agreement and evaluation measures
//! used to validate the classifications against human annotators.
//!
//! The pipeline is:
//!
//! 1. [`ingest`]: header extraction, disfluency cleaning, utterance segmentation.
//! 2. [`token_stream`]: tokenization and UPOS tagging (lexicon tagger or CoNLL-U).
//! 3. [`matcher`]: a declarative token-attribute pattern matcher.
//! 4. [`classifier`]: the three negation patterns applied over a corpus.
//! 5. [`agreement`] and [`evaluation`]: kappa statistics, majority
//!    unification, confusion matrices and per-class metrics.
//!
//! Numeric results are generic over the scalar type (see [`Real`]); the
//! aliases at the crate root fix it to `f64`.

pub mod agreement;
pub mod classifier;
pub mod evaluation;
pub mod ingest;
pub mod matcher;
pub mod scalar;
pub mod synthetic;
pub mod token_stream;

pub use scalar::Real;

pub use classifier::{Label, NegOccurrence};
pub use ingest::{SpeakerMetadata, TranscriptDocument, Utterance};
pub use matcher::{MatchSpan, Matcher, OverlapPolicy, TokenPattern, TokenSpec};
pub use token_stream::{TaggedUtterance, Token, Upos, VerbLexicon};

/// Inter-annotator agreement report in double precision.
pub type AgreementReport = agreement::AgreementReport<f64>;
/// Single-precision agreement report.
pub type AgreementReportF32 = agreement::AgreementReport<f32>;
/// Classification metrics in double precision.
pub type MetricsReport = evaluation::MetricsReport<f64>;
/// Single-precision classification metrics.
pub type MetricsReportF32 = evaluation::MetricsReport<f32>;
/// Per-class metrics in double precision.
pub type ClassMetrics = evaluation::ClassMetrics<f64>;
/// Corpus label tallies in double precision.
pub type CorpusSummary = classifier::CorpusSummary<f64>;
