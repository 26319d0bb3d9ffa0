//! Human-in-the-loop relevance filtering for short social-media texts.
//!
//! The pipeline runs in this order:
//!
//! 1. [`ingest`]: parse line-delimited JSON records, normalize text (emoji
//!    indexing, `LINK`/`NUMBER` tokens, punctuation stripping), drop
//!    stopwords, and apply the corpus-level keyword, script, and duplicate
//!    filters.
//! 2. [`features`]: binary bag-of-ngrams over lemma and POS streams.
//! 3. [`svm`]: a linear soft-margin classifier trained by dual coordinate
//!    descent. Scores are raw decision values `w·x + b`.
//! 4. [`harness`]: cross-validated learning curves for random and
//!    uncertainty-sampled training sets, plus the kappa-stabilization
//!    stopping rule.
//! 5. [`confidence`]: threshold sweeps over `|score|` and a logistic
//!    regression of correctness on `|score|` with Wald tests.
//! 6. [`service`]: a persistent annotation session behind an HTTP API.

pub mod cli;
pub mod confidence;
pub mod error;
pub mod features;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod rng;
pub mod service;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{AnalyzedTweet, Label, Tweet};
