use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::gibbs::{encode, run_chain};
use super::words::{frex_scores, top_indices};
use super::{ModelConfig, TopicError, TopicModel};
use crate::corpus::Corpus;

const TOP_WORDS: usize = 10;
const FREX_WEIGHT: f64 = 0.7;
const HELD_OUT_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSearchRow {
    pub k: usize,
    /// Mean per-token log-likelihood of held-out tokens.
    pub held_out_log_lik: f64,
    /// Mean semantic coherence over topics (top 10 words).
    pub coherence: f64,
    /// Mean summed FREX of each topic's top 10 words.
    pub exclusivity: f64,
}

struct Split {
    train: Vec<Vec<u32>>,
    /// (document, held-out word ids)
    held_out: Vec<(usize, Vec<u32>)>,
}

/// Holds out every second token of a seeded sample of documents.
fn split(docs: &[Vec<u32>], seed: u64) -> Split {
    let mut eligible: Vec<usize> = (0..docs.len()).filter(|&d| docs[d].len() >= 2).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eligible.shuffle(&mut rng);
    let n = ((docs.len() as f64 * HELD_OUT_SHARE).round() as usize).max(1).min(eligible.len());
    let mut chosen: Vec<usize> = eligible[..n].to_vec();
    chosen.sort_unstable();

    let mut train = docs.to_vec();
    let held_out = chosen
        .into_iter()
        .map(|d| {
            let (keep, out): (Vec<_>, Vec<_>) = docs[d].iter().copied().enumerate().partition(|(i, _)| i % 2 == 0);
            train[d] = keep.into_iter().map(|(_, w)| w).collect();
            (d, out.into_iter().map(|(_, w)| w).collect())
        })
        .collect();
    Split { train, held_out }
}

fn held_out_log_lik(split: &Split, phi: &[Vec<f64>], theta: &[Vec<f64>]) -> f64 {
    let per_doc: Vec<f64> = split
        .held_out
        .iter()
        .map(|(d, words)| {
            let total: f64 = words
                .iter()
                .map(|&w| {
                    let p: f64 = theta[*d].iter().zip(phi).map(|(th, row)| th * row[w as usize]).sum();
                    p.ln()
                })
                .sum();
            total / words.len() as f64
        })
        .collect();
    per_doc.iter().sum::<f64>() / per_doc.len() as f64
}

/// Mimno et al. coherence averaged over topics, from document co-occurrence.
fn coherence(phi: &[Vec<f64>], doc_sets: &[HashSet<u32>]) -> f64 {
    let df = |a: u32| doc_sets.iter().filter(|s| s.contains(&a)).count() as f64;
    let co = |a: u32, b: u32| doc_sets.iter().filter(|s| s.contains(&a) && s.contains(&b)).count() as f64;
    let scores: Vec<f64> = phi
        .iter()
        .map(|row| {
            let top: Vec<u32> = top_indices(row, TOP_WORDS).into_iter().map(|w| w as u32).collect();
            let mut s = 0.0;
            for m in 1..top.len() {
                for l in 0..m {
                    let d_l = df(top[l]);
                    if d_l > 0.0 {
                        s += ((co(top[m], top[l]) + 1.0) / d_l).ln();
                    }
                }
            }
            s
        })
        .collect();
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn exclusivity(model: &TopicModel) -> Result<f64, TopicError> {
    let mut total = 0.0;
    for t in 0..model.k() {
        let frex = frex_scores(model, t, FREX_WEIGHT)?;
        total += top_indices(&model.phi[t], TOP_WORDS).iter().map(|&w| frex[w]).sum::<f64>();
    }
    Ok(total / model.k() as f64)
}

/// Fits one model per candidate K on the same train/held-out split and
/// reports fit diagnostics. The schedule, priors and seed come from
/// `template`; `template.k` and an explicit `template.alpha` are ignored so
/// that each K uses its own default prior.
pub fn search_k(corpus: &Corpus, ks: &[usize], template: &ModelConfig) -> Result<Vec<KSearchRow>, TopicError> {
    if corpus.is_empty() || corpus.token_count() == 0 {
        return Err(TopicError::EmptyCorpus);
    }
    if ks.is_empty() {
        return Err(TopicError::InvalidConfig("no candidate K values".into()));
    }
    let configs: Vec<ModelConfig> = ks
        .iter()
        .map(|&k| {
            let cfg = ModelConfig { k, alpha: None, ..template.clone() };
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<_, _>>()?;

    let docs = encode(corpus);
    let split = split(&docs, template.seed);
    if split.held_out.is_empty() {
        return Err(TopicError::InvalidConfig("no document has enough tokens to hold out".into()));
    }
    let doc_sets: Vec<HashSet<u32>> = docs.iter().map(|d| d.iter().copied().collect()).collect();
    let v = corpus.vocabulary_size();

    configs
        .par_iter()
        .map(|cfg| {
            let chain = run_chain(&split.train, v, cfg);
            let model = TopicModel {
                config: cfg.clone(),
                vocabulary: corpus.lemmas().to_vec(),
                term_frequency: corpus.frequencies().to_vec(),
                doc_ids: Vec::new(),
                phi: chain.phi,
                theta: chain.theta,
                assignments: Vec::new(),
                draws: Vec::new(),
                labels: Vec::new(),
            };
            Ok(KSearchRow {
                k: cfg.k,
                held_out_log_lik: held_out_log_lik(&split, &model.phi, &model.theta),
                coherence: coherence(&model.phi, &doc_sets),
                exclusivity: exclusivity(&model)?,
            })
        })
        .collect()
}

/// CSV with header `k,heldout,semcoh,exclus`.
pub fn write_search_csv<W: Write>(rows: &[KSearchRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "heldout", "semcoh", "exclus"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            format!("{:.6}", r.held_out_log_lik),
            format!("{:.6}", r.coherence),
            format!("{:.6}", r.exclusivity),
        ])?;
    }
    w.flush()?;
    Ok(())
}
