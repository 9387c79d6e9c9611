//! Corpora sampled from the LDA generative process with known parameters.
//!
//! Used to check parameter recovery, planted covariate effects and the
//! end-to-end pipeline without a real annotated collection.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::corpus::{Annotation, Corpus, Document, DocumentId, Month, Token, Upos};

/// Mean topic proportions as a function of the document id.
pub type MeanFn = Arc<dyn Fn(&DocumentId) -> Vec<f64> + Send + Sync>;

/// How each document's topic proportions are drawn.
#[derive(Clone)]
pub enum ThetaPlan {
    /// Symmetric Dirichlet with the given concentration per topic.
    Symmetric(f64),
    /// Dirichlet with mean `mean(id)` and total concentration `concentration`.
    Mean {
        mean: MeanFn,
        concentration: f64,
    },
}

impl ThetaPlan {
    /// Topic shares depend on phase only.
    pub fn by_phase(phase1: Vec<f64>, phase2: Vec<f64>, concentration: f64) -> Self {
        ThetaPlan::Mean {
            mean: Arc::new(move |id| if id.phase() == 1 { phase1.clone() } else { phase2.clone() }),
            concentration,
        }
    }
}

#[derive(Clone)]
pub struct SyntheticSpec {
    /// True topic-word distributions, K x V.
    pub phi: Vec<Vec<f64>>,
    pub documents: usize,
    pub doc_length: usize,
    pub theta: ThetaPlan,
    /// Tokens per sentence when laying out documents.
    pub sentence_length: usize,
    pub seed: u64,
}

pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    /// Generating topic of each token, per document.
    pub topics: Vec<Vec<usize>>,
}

impl SyntheticSpec {
    pub fn new(phi: Vec<Vec<f64>>, documents: usize, doc_length: usize, seed: u64) -> Self {
        Self {
            phi,
            documents,
            doc_length,
            theta: ThetaPlan::Symmetric(0.1),
            sentence_length: 20,
            seed,
        }
    }

    pub fn generate(&self) -> SyntheticCorpus {
        let k = self.phi.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let ids = synthetic_ids(self.documents);
        let mut theta = Vec::with_capacity(self.documents);
        let mut topics = Vec::with_capacity(self.documents);
        let mut docs = Vec::with_capacity(self.documents);
        for id in ids {
            let shares = match &self.theta {
                ThetaPlan::Symmetric(c) => dirichlet(&vec![*c; k], &mut rng),
                ThetaPlan::Mean { mean, concentration } => {
                    let m = mean(&id);
                    assert_eq!(m.len(), k, "mean proportions must have one entry per topic");
                    let params: Vec<f64> = m.iter().map(|x| (x * concentration).max(1e-3)).collect();
                    dirichlet(&params, &mut rng)
                }
            };
            let mut doc_topics = Vec::with_capacity(self.doc_length);
            let mut tokens = Vec::with_capacity(self.doc_length);
            for i in 0..self.doc_length {
                let t = categorical(&shares, &mut rng);
                let w = categorical(&self.phi[t], &mut rng);
                let lemma = word_name(w);
                let sent = (i / self.sentence_length.max(1)) as u32;
                tokens.push(Token {
                    surface: lemma.clone(),
                    lemma,
                    pos: Upos::Unknown,
                    index: (i % self.sentence_length.max(1)) as u32 + 1,
                    head: None,
                    deprel: None,
                    sent,
                    offset: i as u32,
                });
                doc_topics.push(t);
            }
            theta.push(shares);
            topics.push(doc_topics);
            docs.push(Document { id, source: None, tokens });
        }
        SyntheticCorpus {
            corpus: Corpus::new(docs, Annotation::Raw),
            phi: self.phi.clone(),
            theta,
            topics,
        }
    }
}

impl SyntheticCorpus {
    /// True probability of `lemma` under topic `topic`.
    pub fn phi_for(&self, topic: usize, lemma: &str) -> f64 {
        word_index(lemma).map_or(0.0, |w| self.phi[topic].get(w).copied().unwrap_or(0.0))
    }

    /// Topic holding the largest share of the document's generated tokens.
    pub fn dominant(&self, doc: usize) -> usize {
        let mut counts = vec![0usize; self.phi.len()];
        for &t in &self.topics[doc] {
            counts[t] += 1;
        }
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    }

    /// True phi projected onto the corpus vocabulary order, renormalized
    /// over the words that were actually generated.
    pub fn phi_on_vocabulary(&self, vocabulary: &[String]) -> Vec<Vec<f64>> {
        (0..self.phi.len())
            .map(|t| {
                let row: Vec<f64> = vocabulary.iter().map(|l| self.phi_for(t, l)).collect();
                let s: f64 = row.iter().sum();
                row.into_iter().map(|x| x / s).collect()
            })
            .collect()
    }
}

/// Lemma for word index `w`; zero-padded so lexicographic order equals
/// index order.
pub fn word_name(w: usize) -> String {
    format!("w{w:04}")
}

fn word_index(lemma: &str) -> Option<usize> {
    lemma.strip_prefix('w')?.parse().ok()
}

/// `k` topics over `k * words_per_topic` words; topic `t` is uniform over
/// its own block and zero elsewhere.
pub fn disjoint_topics(k: usize, words_per_topic: usize) -> Vec<Vec<f64>> {
    let v = k * words_per_topic;
    (0..k)
        .map(|t| {
            (0..v)
                .map(|w| if w / words_per_topic == t { 1.0 / words_per_topic as f64 } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `k` topics drawn from a symmetric Dirichlet over `v` words.
pub fn dirichlet_topics(k: usize, v: usize, concentration: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| dirichlet(&vec![concentration; v], &mut rng)).collect()
}

/// Document ids spread over 98 days from 25 February: weeks 1-14, phase 1
/// for weeks 1-9 and phase 2 afterwards, sequence letters for same-day
/// documents.
pub fn synthetic_ids(n: usize) -> Vec<DocumentId> {
    const DAYS: usize = 98;
    let month_lengths = [(Month::February, 29u8), (Month::March, 31), (Month::April, 30), (Month::May, 31), (Month::June, 30)];
    let mut per_day = [0usize; DAYS];
    (0..n)
        .map(|i| {
            let day_index = i * DAYS / n.max(1);
            let seq_n = per_day[day_index];
            per_day[day_index] += 1;
            let week = (day_index / 7) as u32 + 1;
            let phase = if week <= 9 { 1 } else { 2 };
            let mut day = 25 + day_index;
            let mut month = month_lengths[0].0;
            for &(m, len) in &month_lengths {
                month = m;
                if day <= len as usize {
                    break;
                }
                day -= len as usize;
            }
            let seq = match seq_n {
                0 => None,
                s if s < 26 => Some((b'a' + s as u8) as char),
                _ => panic!("more than 26 synthetic documents on one day"),
            };
            DocumentId::new(phase, week, month, day as u8, seq).expect("valid synthetic id")
        })
        .collect()
}

fn dirichlet(params: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut draws: Vec<f64> = params
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.iter_mut().for_each(|x| *x /= total);
    } else {
        let pick = rng.random_range(0..draws.len());
        draws.iter_mut().enumerate().for_each(|(i, x)| *x = if i == pick { 1.0 } else { 0.0 });
    }
    draws
}

fn categorical(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = p.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_cover_fourteen_weeks() {
        let ids = synthetic_ids(500);
        assert_eq!(ids.len(), 500);
        assert_eq!(ids[0].to_string(), "phase1_week1_february_25");
        assert_eq!(ids.last().unwrap().week(), 14);
        assert_eq!(ids.last().unwrap().phase(), 2);
        let unique: std::collections::BTreeSet<_> = ids.iter().collect();
        assert_eq!(unique.len(), 500);
        // 25 Feb + 35 days (week 6 start) is 31 March.
        assert!(ids.iter().any(|id| id.month() == Month::March && id.day() == 31));
    }

    #[test]
    fn generated_shapes() {
        let s = SyntheticSpec::new(dirichlet_topics(3, 60, 0.1, 1), 50, 80, 2).generate();
        assert_eq!(s.corpus.len(), 50);
        assert_eq!(s.corpus.token_count(), 4000);
        assert!(s.theta.iter().all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-9));
        let phi = s.phi_on_vocabulary(s.corpus.lemmas());
        assert!(phi.iter().all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn phase_plan_shifts_means() {
        let mut spec = SyntheticSpec::new(disjoint_topics(2, 5), 200, 10, 3);
        spec.theta = ThetaPlan::by_phase(vec![0.8, 0.2], vec![0.2, 0.8], 20.0);
        let s = spec.generate();
        let mean = |phase: u8| {
            let rows: Vec<&Vec<f64>> = s
                .corpus
                .documents()
                .zip(&s.theta)
                .filter(|(d, _)| d.id.phase() == phase)
                .map(|(_, t)| t)
                .collect();
            rows.iter().map(|r| r[0]).sum::<f64>() / rows.len() as f64
        };
        assert!((mean(1) - 0.8).abs() < 0.05);
        assert!((mean(2) - 0.2).abs() < 0.05);
    }
}
