use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, TopicError, TopicModel};
use crate::corpus::Corpus;

/// Collapsed Gibbs sampler state for LDA.
pub(crate) struct Sampler<'a> {
    docs: &'a [Vec<u32>],
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_total: Vec<u32>,
    z: Vec<Vec<u16>>,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(docs: &'a [Vec<u32>], v: usize, cfg: &ModelConfig) -> Self {
        let k = cfg.k;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut word_topic = vec![0u32; v * k];
        let mut topic_total = vec![0u32; k];
        let z = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        doc_topic[d * k + t] += 1;
                        word_topic[w as usize * k + t] += 1;
                        topic_total[t] += 1;
                        t as u16
                    })
                    .collect()
            })
            .collect();
        Self {
            docs,
            k,
            v,
            alpha: cfg.alpha(),
            beta: cfg.beta,
            doc_topic,
            word_topic,
            topic_total,
            z,
            rng,
        }
    }

    /// One full pass resampling every token's topic.
    pub(crate) fn sweep(&mut self) {
        let k = self.k;
        let vbeta = self.v as f64 * self.beta;
        let mut cumulative = vec![0.0f64; k];
        for (d, words) in self.docs.iter().enumerate() {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (i, &w) in words.iter().enumerate() {
                let w = w as usize;
                let old = self.z[d][i] as usize;
                let wt = &mut self.word_topic[w * k..(w + 1) * k];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_total[old] -= 1;

                let mut acc = 0.0;
                for t in 0..k {
                    acc += (dt[t] as f64 + self.alpha) * (wt[t] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + vbeta);
                    cumulative[t] = acc;
                }
                let u = self.rng.random::<f64>() * acc;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                dt[new] += 1;
                wt[new] += 1;
                self.topic_total[new] += 1;
                self.z[d][i] = new as u16;
            }
        }
    }

    pub(crate) fn theta(&self) -> Vec<Vec<f64>> {
        let k = self.k;
        let kalpha = k as f64 * self.alpha;
        self.docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                let denom = words.len() as f64 + kalpha;
                (0..k)
                    .map(|t| (self.doc_topic[d * k + t] as f64 + self.alpha) / denom)
                    .collect()
            })
            .collect()
    }

    pub(crate) fn phi(&self) -> Vec<Vec<f64>> {
        let k = self.k;
        let vbeta = self.v as f64 * self.beta;
        (0..k)
            .map(|t| {
                let denom = self.topic_total[t] as f64 + vbeta;
                (0..self.v)
                    .map(|w| (self.word_topic[w * k + t] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    pub(crate) fn assignments(self) -> Vec<Vec<u16>> {
        self.z
    }
}

pub(crate) struct Chain {
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub draws: Vec<Vec<Vec<f64>>>,
    pub assignments: Vec<Vec<u16>>,
}

/// Runs the configured schedule. Point estimates average the saved draws;
/// with no saved draws they come from the final sweep.
pub(crate) fn run_chain(docs: &[Vec<u32>], v: usize, cfg: &ModelConfig) -> Chain {
    let mut sampler = Sampler::new(docs, v, cfg);
    let mut draws = Vec::with_capacity(cfg.draw_count());
    let mut phi_sum: Option<Vec<Vec<f64>>> = None;
    for sweep in 0..cfg.iterations {
        sampler.sweep();
        if sweep >= cfg.burnin && (sweep + 1 - cfg.burnin).is_multiple_of(cfg.thin) {
            draws.push(sampler.theta());
            let phi = sampler.phi();
            match phi_sum.as_mut() {
                None => phi_sum = Some(phi),
                Some(sum) => add_assign(sum, &phi),
            }
        }
    }

    let (phi, theta) = if draws.is_empty() {
        (sampler.phi(), sampler.theta())
    } else {
        let n = draws.len() as f64;
        let mut phi = phi_sum.expect("draws imply phi snapshots");
        scale(&mut phi, n);
        let mut theta = draws[0].clone();
        for draw in &draws[1..] {
            add_assign(&mut theta, draw);
        }
        scale(&mut theta, n);
        (phi, theta)
    };
    Chain {
        phi,
        theta,
        draws,
        assignments: sampler.assignments(),
    }
}

fn add_assign(acc: &mut [Vec<f64>], other: &[Vec<f64>]) {
    for (a, b) in acc.iter_mut().zip(other) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
}

/// Divides by `n` and renormalizes each row so it sums to one.
fn scale(rows: &mut [Vec<f64>], n: f64) {
    for row in rows.iter_mut() {
        row.iter_mut().for_each(|x| *x /= n);
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
}

/// Lemma ids of each document's tokens.
pub(crate) fn encode(corpus: &Corpus) -> Vec<Vec<u32>> {
    corpus
        .documents()
        .map(|d| {
            d.tokens
                .iter()
                .map(|t| corpus.lemma_id(&t.lemma).expect("corpus lemma indexed"))
                .collect()
        })
        .collect()
}

/// Fits an LDA model to a preprocessed corpus. Deterministic for a fixed
/// `cfg.seed`.
pub fn fit(corpus: &Corpus, cfg: &ModelConfig) -> Result<TopicModel, TopicError> {
    cfg.validate()?;
    if corpus.is_empty() || corpus.token_count() == 0 {
        return Err(TopicError::EmptyCorpus);
    }
    let docs = encode(corpus);
    let chain = run_chain(&docs, corpus.vocabulary_size(), cfg);
    let mut config = cfg.clone();
    config.alpha = Some(cfg.alpha());
    Ok(TopicModel {
        config,
        vocabulary: corpus.lemmas().to_vec(),
        term_frequency: corpus.frequencies().to_vec(),
        doc_ids: corpus.documents().map(|d| d.id.clone()).collect(),
        phi: chain.phi,
        theta: chain.theta,
        assignments: chain.assignments,
        draws: chain.draws,
        labels: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::raw_corpus;
    use crate::synthetic::{disjoint_topics, SyntheticSpec, ThetaPlan};

    fn row_sums_ok(rows: &[Vec<f64>]) -> bool {
        rows.iter()
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && r.iter().all(|&x| x >= 0.0))
    }

    #[test]
    fn single_topic_theta_is_one() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "crisi tsunami crisi"),
            ("phase2_week10_may_04", "motore ponte"),
        ]);
        let m = fit(&c, &ModelConfig::new(1).with_schedule(20, 10, 5)).unwrap();
        assert!(m.theta.iter().all(|r| r == &vec![1.0]));
        assert_eq!(m.draws.len(), 2);
        assert!(row_sums_ok(&m.phi));
    }

    #[test]
    fn empty_corpus_rejected() {
        let c = raw_corpus(&[]);
        assert!(matches!(fit(&c, &ModelConfig::new(2)), Err(TopicError::EmptyCorpus)));
    }

    #[test]
    fn invalid_config_rejected() {
        let c = raw_corpus(&[("phase1_week1_february_27", "a b")]);
        assert!(matches!(
            fit(&c, &ModelConfig::new(2).with_schedule(5, 5, 1)),
            Err(TopicError::InvalidConfig(_))
        ));
    }

    #[test]
    fn seeded_fits_are_identical() {
        let s = SyntheticSpec::new(disjoint_topics(2, 10), 40, 30, 7);
        let c = s.generate().corpus;
        let cfg = ModelConfig::new(2).with_schedule(60, 30, 10).with_seed(9);
        let a = fit(&c, &cfg).unwrap();
        let b = fit(&c, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(row_sums_ok(&a.theta) && row_sums_ok(&a.phi));
        assert_eq!(a.draws.len(), 3);
        // Different seeds give different initial states.
        let short = ModelConfig::new(2).with_schedule(1, 0, 1);
        let x = fit(&c, &short.clone().with_seed(9)).unwrap();
        let y = fit(&c, &short.with_seed(10)).unwrap();
        assert_ne!(x.assignments, y.assignments);
    }

    #[test]
    fn disjoint_vocabularies_recovered() {
        let mut spec = SyntheticSpec::new(disjoint_topics(2, 15), 100, 50, 3);
        spec.theta = ThetaPlan::Symmetric(0.1);
        let synth = spec.generate();
        let m = fit(&synth.corpus, &ModelConfig::new(2).with_schedule(200, 100, 10)).unwrap();
        // Match fitted topic to true topic by phi overlap.
        let overlap = |fit_t: usize, true_t: usize| -> f64 {
            m.vocabulary
                .iter()
                .enumerate()
                .map(|(w, lemma)| m.phi[fit_t][w].min(synth.phi_for(true_t, lemma)))
                .sum()
        };
        let swap = overlap(0, 1) + overlap(1, 0) > overlap(0, 0) + overlap(1, 1);
        let correct = (0..m.document_count())
            .filter(|&d| {
                let fitted = m.dominant_topic(d);
                let fitted = if swap { 1 - fitted } else { fitted };
                fitted == synth.dominant(d)
            })
            .count();
        assert!(correct as f64 >= 0.95 * m.document_count() as f64, "{correct}/100");
    }
}
