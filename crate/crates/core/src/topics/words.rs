use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{TopicError, TopicModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Probability,
    /// Harmonic mean of within-topic frequency rank and exclusivity rank.
    Frex,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "probability" | "prob" => Ok(Weighting::Probability),
            "frex" => Ok(Weighting::Frex),
            other => Err(format!("unknown weighting {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedWord {
    pub lemma: String,
    pub weight: f64,
    pub probability: f64,
}

/// Average ranks (1-based, ties share the mean rank) divided by n.
fn ecdf_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg / n as f64;
        }
        i = j + 1;
    }
    ranks
}

/// FREX score of every word for one topic, with weight `w` on exclusivity.
pub fn frex_scores(model: &TopicModel, topic: usize, w: f64) -> Result<Vec<f64>, TopicError> {
    check_topic(model, topic)?;
    let v = model.vocabulary_size();
    let exclusivity: Vec<f64> = (0..v)
        .map(|word| {
            let total: f64 = model.phi.iter().map(|row| row[word]).sum();
            model.phi[topic][word] / total
        })
        .collect();
    let ex_rank = ecdf_ranks(&exclusivity);
    let fr_rank = ecdf_ranks(&model.phi[topic]);
    Ok(ex_rank
        .iter()
        .zip(&fr_rank)
        .map(|(e, f)| 1.0 / (w / e + (1.0 - w) / f))
        .collect())
}

fn check_topic(model: &TopicModel, topic: usize) -> Result<(), TopicError> {
    if topic >= model.k() {
        return Err(TopicError::TopicOutOfRange { topic, k: model.k() });
    }
    Ok(())
}

/// Highest-weighted words of a topic. Ties fall back to corpus frequency
/// (descending), then lemma order. `n` is clamped to the vocabulary size.
pub fn top_words(
    model: &TopicModel,
    topic: usize,
    n: usize,
    weighting: Weighting,
) -> Result<Vec<RankedWord>, TopicError> {
    check_topic(model, topic)?;
    let weights = match weighting {
        Weighting::Probability => model.phi[topic].clone(),
        Weighting::Frex => frex_scores(model, topic, 0.5)?,
    };
    let mut order: Vec<usize> = (0..model.vocabulary_size()).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .total_cmp(&weights[a])
            .then_with(|| model.term_frequency[b].cmp(&model.term_frequency[a]))
            .then_with(|| model.vocabulary[a].cmp(&model.vocabulary[b]))
    });
    Ok(order
        .into_iter()
        .take(n)
        .map(|w| RankedWord {
            lemma: model.vocabulary[w].clone(),
            weight: weights[w],
            probability: model.phi[topic][w],
        })
        .collect())
}

pub(crate) fn top_indices(row: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order.truncate(n);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::raw_corpus;
    use crate::topics::{fit, ModelConfig};

    #[test]
    fn single_topic_ranks_by_smoothed_counts() {
        let c = raw_corpus(&[("phase1_week1_february_27", "a a a a a b b b c")]);
        let m = fit(&c, &ModelConfig::new(1).with_schedule(5, 1, 1)).unwrap();
        // phi = (n + beta) / (N + V beta) with N = 9, V = 3, beta = 0.01.
        let expected = [5.01 / 9.03, 3.01 / 9.03, 1.01 / 9.03];
        for (p, e) in m.phi[0].iter().zip(expected) {
            assert!((p - e).abs() < 1e-12, "{p} vs {e}");
        }
        let words: Vec<String> = top_words(&m, 0, 3, Weighting::Probability)
            .unwrap()
            .into_iter()
            .map(|w| w.lemma)
            .collect();
        assert_eq!(words, vec!["a", "b", "c"]);
    }

    #[test]
    fn full_list_is_permutation() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "a b c d"),
            ("phase1_week1_february_28", "d e f a"),
        ]);
        let m = fit(&c, &ModelConfig::new(2).with_schedule(20, 10, 5)).unwrap();
        for weighting in [Weighting::Probability, Weighting::Frex] {
            let mut words: Vec<String> = top_words(&m, 1, 6, weighting)
                .unwrap()
                .into_iter()
                .map(|w| w.lemma)
                .collect();
            words.sort();
            assert_eq!(words, m.vocabulary);
        }
        assert_eq!(top_words(&m, 0, 100, Weighting::Probability).unwrap().len(), 6);
    }

    #[test]
    fn ties_use_frequency_then_lemma() {
        let model = TopicModel {
            config: ModelConfig::new(1),
            vocabulary: vec!["b".into(), "a".into(), "c".into()],
            term_frequency: vec![3, 3, 7],
            doc_ids: vec![],
            phi: vec![vec![1.0 / 3.0; 3]],
            theta: vec![],
            assignments: vec![],
            draws: vec![],
            labels: vec![],
        };
        let words: Vec<String> = top_words(&model, 0, 3, Weighting::Probability)
            .unwrap()
            .into_iter()
            .map(|w| w.lemma)
            .collect();
        assert_eq!(words, vec!["c", "a", "b"]);
    }

    #[test]
    fn out_of_range_topic() {
        let c = raw_corpus(&[("phase1_week1_february_27", "a b")]);
        let m = fit(&c, &ModelConfig::new(1).with_schedule(3, 1, 1)).unwrap();
        assert!(matches!(
            top_words(&m, 1, 2, Weighting::Probability),
            Err(TopicError::TopicOutOfRange { topic: 1, k: 1 })
        ));
    }

    #[test]
    fn ecdf_ranks_average_ties() {
        assert_eq!(ecdf_ranks(&[0.1, 0.3, 0.1, 0.2]), vec![0.375, 1.0, 0.375, 0.75]);
    }

    #[test]
    fn frex_favours_exclusive_words() {
        let model = TopicModel {
            config: ModelConfig::new(2),
            vocabulary: vec!["shared".into(), "own".into(), "other".into()],
            term_frequency: vec![10, 5, 5],
            doc_ids: vec![],
            phi: vec![vec![0.4, 0.55, 0.05], vec![0.5, 0.05, 0.45]],
            theta: vec![],
            assignments: vec![],
            draws: vec![],
            labels: vec![],
        };
        let top = top_words(&model, 0, 1, Weighting::Frex).unwrap();
        assert_eq!(top[0].lemma, "own");
    }
}
