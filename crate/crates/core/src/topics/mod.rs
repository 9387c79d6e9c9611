//! Topic modeling with document covariates.
//!
//! Topics are fit with a collapsed Gibbs sampler for LDA. Covariate effects
//! on topical prevalence are estimated afterwards by regressing saved
//! posterior draws of the document-topic proportions on the covariate,
//! pooling per-draw least-squares fits (method of composition).

mod effects;
mod gibbs;
mod prevalence;
mod search;
mod words;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocumentId};

pub use effects::{estimate_effect, write_effects_csv, Covariate, EffectEstimate};
pub use gibbs::fit;
pub use prevalence::{prevalence_by, GroupPrevalence, PrevalenceTable};
pub use search::{search_k, write_search_csv, KSearchRow};
pub use words::{frex_scores, top_words, RankedWord, Weighting};

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("corpus has no tokens to model")]
    EmptyCorpus,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("topic {topic} out of range for a {k}-topic model")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("model does not match corpus: {0}")]
    ModelCorpusMismatch(String),
    #[error("unsupported model container: {0}")]
    Container(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Sampler settings. `alpha` defaults to `50 / k` when unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: None,
            beta: 0.01,
            iterations: 2000,
            burnin: 1000,
            thin: 50,
            seed: 42,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_schedule(mut self, iterations: usize, burnin: usize, thin: usize) -> Self {
        self.iterations = iterations;
        self.burnin = burnin;
        self.thin = thin;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    /// Number of saved posterior draws: `(iterations - burnin) / thin`.
    pub fn draw_count(&self) -> usize {
        (self.iterations - self.burnin) / self.thin
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |m: String| Err(TopicError::InvalidConfig(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.k > u16::MAX as usize {
            return bad(format!("k = {} is too large", self.k));
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {alpha}"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.burnin >= self.iterations {
            return bad(format!(
                "burnin ({}) must be below iterations ({})",
                self.burnin, self.iterations
            ));
        }
        if self.thin == 0 {
            return bad("thin must be at least 1".into());
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::new(3)
    }
}

/// A fitted topic model.
///
/// `phi` is K x V (topic-word), `theta` is D x K (document-topic); rows of
/// both are probability vectors. `draws` holds the saved post-burnin theta
/// snapshots used for uncertainty propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub config: ModelConfig,
    pub vocabulary: Vec<String>,
    pub term_frequency: Vec<u64>,
    pub doc_ids: Vec<DocumentId>,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub assignments: Vec<Vec<u16>>,
    pub draws: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

const MODEL_FORMAT: &str = "metaphora-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelContainerRef<'a> {
    format: &'a str,
    version: u32,
    seed: u64,
    model: &'a TopicModel,
}

#[derive(Deserialize)]
struct ModelContainer {
    format: String,
    version: u32,
    model: TopicModel,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.phi.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn document_count(&self) -> usize {
        self.theta.len()
    }

    pub fn label(&self, topic: usize) -> String {
        self.labels
            .get(topic)
            .cloned()
            .unwrap_or_else(|| format!("Topic {}", topic + 1))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, TopicError> {
        if !labels.is_empty() && labels.len() != self.k() {
            return Err(TopicError::InvalidConfig(format!(
                "{} labels for {} topics",
                labels.len(),
                self.k()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Index of the document's largest topic share; ties go to the lowest
    /// topic index.
    pub fn dominant_topic(&self, doc: usize) -> usize {
        argmax(&self.theta[doc])
    }

    pub fn doc_index(&self, id: &DocumentId) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == id)
    }

    /// Corpus-wide mean of theta.
    pub fn proportions(&self) -> Vec<f64> {
        column_means(&self.theta, self.k())
    }

    /// Relabels topics: new topic `i` is old topic `perm[i]`.
    pub fn permute_topics(&self, perm: &[usize]) -> Result<TopicModel, TopicError> {
        let k = self.k();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(TopicError::InvalidConfig("not a permutation of the topics".into()));
        }
        let mut inverse = vec![0u16; k];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new as u16;
        }
        let reorder = |row: &Vec<f64>| perm.iter().map(|&old| row[old]).collect::<Vec<f64>>();
        Ok(TopicModel {
            config: self.config.clone(),
            vocabulary: self.vocabulary.clone(),
            term_frequency: self.term_frequency.clone(),
            doc_ids: self.doc_ids.clone(),
            phi: perm.iter().map(|&old| self.phi[old].clone()).collect(),
            theta: self.theta.iter().map(reorder).collect(),
            assignments: self
                .assignments
                .iter()
                .map(|z| z.iter().map(|&t| inverse[t as usize]).collect())
                .collect(),
            draws: self
                .draws
                .iter()
                .map(|d| d.iter().map(reorder).collect())
                .collect(),
            labels: if self.labels.is_empty() {
                Vec::new()
            } else {
                perm.iter().map(|&old| self.labels[old].clone()).collect()
            },
        })
    }

    /// Checks that every modeled document exists in `corpus`, returning the
    /// corpus index of each.
    pub fn align(&self, corpus: &Corpus) -> Result<Vec<usize>, TopicError> {
        let index: std::collections::HashMap<&DocumentId, usize> = corpus
            .documents()
            .enumerate()
            .map(|(i, d)| (&d.id, i))
            .collect();
        self.doc_ids
            .iter()
            .map(|id| {
                index.get(id).copied().ok_or_else(|| {
                    TopicError::ModelCorpusMismatch(format!("document {id} not in corpus"))
                })
            })
            .collect()
    }

    /// Theta draws used for uncertainty; the point estimate when no draws
    /// were saved.
    pub(crate) fn theta_draws(&self) -> Vec<&Vec<Vec<f64>>> {
        if self.draws.is_empty() {
            vec![&self.theta]
        } else {
            self.draws.iter().collect()
        }
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), TopicError> {
        let container = ModelContainerRef {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            seed: self.config.seed,
            model: self,
        };
        serde_json::to_writer(writer, &container)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<TopicModel, TopicError> {
        let container: ModelContainer = serde_json::from_reader(reader)?;
        if container.format != MODEL_FORMAT || container.version != MODEL_VERSION {
            return Err(TopicError::Container(format!(
                "{} v{}",
                container.format, container.version
            )));
        }
        Ok(container.model)
    }

    pub fn load(path: &Path) -> Result<TopicModel, TopicError> {
        let file = std::fs::File::open(path)?;
        Self::read_json(std::io::BufReader::new(file))
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn column_means(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    if rows.is_empty() {
        return out;
    }
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    let n = rows.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}
