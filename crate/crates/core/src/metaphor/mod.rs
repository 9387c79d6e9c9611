//! Lexicon-based flagging of metaphor candidates and their distribution
//! over topics. Candidates are for human review, not metaphor judgments.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{normalize_lemma, Corpus, DocumentId};
use crate::topics::TopicModel;

mod lexicon;

pub use lexicon::{
    load_lexicons, Lexicon, LexiconPack, Mapping, BUILDING, LIVING_ORGANISM, MACHINE, NATURAL_DISASTER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetaphorError {
    #[error("malformed lexicon: {0}")]
    MalformedLexicon(String),
    #[error("lemma {lemma:?} appears in domains {first} and {second}")]
    OverlappingDomains { lemma: String, first: String, second: String },
    #[error("model and corpus do not match: {0}")]
    ModelCorpusMismatch(String),
}

/// How close a trigger must be to a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    #[default]
    Sentence,
    /// At most `n` tokens apart, within one sentence.
    Window(usize),
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "sentence" {
            return Ok(Scope::Sentence);
        }
        let n = s
            .strip_prefix("window:")
            .or_else(|| s.strip_prefix("window(").and_then(|r| r.strip_suffix(')')))
            .and_then(|n| n.parse().ok());
        n.map(Scope::Window)
            .ok_or_else(|| format!("unknown scope {s:?} (expected sentence or window:N)"))
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Sentence => f.write_str("sentence"),
            Scope::Window(n) => write!(f, "window:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaphorCandidate {
    pub doc_id: DocumentId,
    pub sent: u32,
    pub target: String,
    /// Token position of the target within the document.
    pub target_position: usize,
    pub domain: String,
    pub trigger: String,
    pub trigger_position: usize,
    /// The sentence, as surface forms.
    pub snippet: String,
}

/// One candidate per (target occurrence, trigger occurrence) pair in scope,
/// ordered by document, sentence, target position, trigger position.
pub fn flag_candidates(
    view: &Corpus,
    targets: &BTreeSet<String>,
    pack: &LexiconPack,
    scope: Scope,
) -> Vec<MetaphorCandidate> {
    let targets: BTreeSet<String> = targets.iter().map(|t| normalize_lemma(t.trim())).collect();
    let mut out = Vec::new();
    for doc in view.documents() {
        let mut start = 0usize;
        for sentence in doc.sentences() {
            let triggers: Vec<(usize, &str)> = sentence
                .iter()
                .enumerate()
                .filter_map(|(j, t)| pack.domain_of(&t.lemma).map(|d| (j, d)))
                .collect();
            if !triggers.is_empty() {
                let mut snippet: Option<String> = None;
                for (i, t) in sentence.iter().enumerate() {
                    if !targets.contains(&t.lemma) {
                        continue;
                    }
                    for &(j, domain) in &triggers {
                        let in_scope = match scope {
                            Scope::Sentence => true,
                            Scope::Window(n) => i.abs_diff(j) <= n,
                        };
                        if i == j || !in_scope {
                            continue;
                        }
                        let snippet = snippet.get_or_insert_with(|| {
                            sentence.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ")
                        });
                        out.push(MetaphorCandidate {
                            doc_id: doc.id.clone(),
                            sent: t.sent,
                            target: t.lemma.clone(),
                            target_position: start + i,
                            domain: domain.to_string(),
                            trigger: sentence[j].lemma.clone(),
                            trigger_position: start + j,
                            snippet: snippet.clone(),
                        });
                    }
                }
            }
            start += sentence.len();
        }
    }
    out
}

/// CSV with header `doc,sent,target,domain,trigger`.
pub fn write_candidates_csv<W: Write>(candidates: &[MetaphorCandidate], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["doc", "sent", "target", "domain", "trigger"])?;
    for c in candidates {
        w.write_record([
            c.doc_id.to_string(),
            c.sent.to_string(),
            c.target.clone(),
            c.domain.clone(),
            c.trigger.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Candidate counts by (dominant topic, source domain).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicDomainMatrix {
    pub topics: Vec<String>,
    pub domains: Vec<String>,
    /// `counts[topic][domain]`.
    pub counts: Vec<Vec<usize>>,
    /// Tokens in the documents each topic dominates.
    pub topic_tokens: Vec<u64>,
}

impl TopicDomainMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn cell(&self, topic: usize, domain: &str) -> usize {
        self.domains
            .iter()
            .position(|d| d == domain)
            .map_or(0, |j| self.counts[topic][j])
    }

    /// Counts per million tokens of the documents each topic dominates.
    pub fn per_million(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .zip(&self.topic_tokens)
            .map(|(row, &n)| {
                row.iter()
                    .map(|&c| if n == 0 { 0.0 } else { c as f64 * 1e6 / n as f64 })
                    .collect()
            })
            .collect()
    }

    /// CSV with header `topic,domain,count,pmw`; topics are 1-based.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let pmw = self.per_million();
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["topic", "domain", "count", "pmw"])?;
        for (t, row) in self.counts.iter().enumerate() {
            for (d, &c) in row.iter().enumerate() {
                w.write_record([
                    (t + 1).to_string(),
                    self.domains[d].clone(),
                    c.to_string(),
                    format!("{:.2}", pmw[t][d]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Attributes each candidate to the dominant topic of its document (argmax
/// theta, lowest index on ties). `corpus` supplies token counts for the
/// per-million view and must contain every modeled document.
pub fn topic_domain_matrix(
    candidates: &[MetaphorCandidate],
    model: &TopicModel,
    pack: &LexiconPack,
    corpus: &Corpus,
) -> Result<TopicDomainMatrix, MetaphorError> {
    let k = model.k();
    let domains: Vec<String> = pack.domains().map(str::to_string).collect();
    let doc_index: HashMap<&DocumentId, usize> =
        model.doc_ids.iter().enumerate().map(|(i, id)| (id, i)).collect();

    let mut topic_tokens = vec![0u64; k];
    for (d, id) in model.doc_ids.iter().enumerate() {
        let (_, doc) = corpus
            .find(id)
            .ok_or_else(|| MetaphorError::ModelCorpusMismatch(format!("document {id} not in corpus")))?;
        topic_tokens[model.dominant_topic(d)] += doc.len() as u64;
    }

    let mut counts = vec![vec![0usize; domains.len()]; k];
    for c in candidates {
        let d = *doc_index.get(&c.doc_id).ok_or_else(|| {
            MetaphorError::ModelCorpusMismatch(format!("document {} not scored by the model", c.doc_id))
        })?;
        let j = domains.iter().position(|x| *x == c.domain).ok_or_else(|| {
            MetaphorError::MalformedLexicon(format!("candidate domain {} not in the pack", c.domain))
        })?;
        counts[model.dominant_topic(d)][j] += 1;
    }
    Ok(TopicDomainMatrix {
        topics: (0..k).map(|t| model.label(t)).collect(),
        domains,
        counts,
        topic_tokens,
    })
}

#[cfg(test)]
mod tests;
