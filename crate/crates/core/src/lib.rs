//! Corpus analytics for metadata-tagged document collections.
//!
//! - [`corpus`]: ingestion (raw text, CoNLL-U), preprocessing, subcorpus views
//! - [`topics`]: collapsed-Gibbs LDA, covariate effects on topic prevalence,
//!   candidate-K diagnostics
//! - [`colloc`]: frequencies, logDice collocations, word sketches and sketch
//!   differences
//! - [`concord`]: KWIC concordances and token patterns
//! - [`metaphor`]: source-domain lexicons and metaphor-candidate flagging
//! - [`report`]: figure-data emission and run manifests

pub mod colloc;
pub mod concord;
pub mod corpus;
pub mod metaphor;
pub mod report;
pub mod synthetic;
pub mod topics;

pub use corpus::{Corpus, Document, DocumentId, SubcorpusFilter, Token};
pub use topics::{ModelConfig, TopicModel};
