use std::collections::BTreeMap;

use serde::Serialize;

use super::{Covariate, TopicError, TopicModel};
use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPrevalence {
    /// Covariate level (phase number or week number).
    pub level: u32,
    pub documents: usize,
    /// Mean topic proportions; sums to one.
    pub mean: Vec<f64>,
    /// Standard error per topic, pooling draw-to-draw variation with the
    /// sampling error of the group mean.
    pub stderr: Vec<f64>,
}

impl GroupPrevalence {
    /// 95% normal band around the mean, clipped to [0, 1].
    pub fn band(&self, topic: usize) -> (f64, f64) {
        let half = 1.959_963_984_540_054 * self.stderr[topic];
        (
            (self.mean[topic] - half).max(0.0),
            (self.mean[topic] + half).min(1.0),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrevalenceTable {
    pub grouping: Covariate,
    pub groups: Vec<GroupPrevalence>,
}

/// Mean document-topic proportions per covariate level.
pub fn prevalence_by(
    model: &TopicModel,
    corpus: &Corpus,
    grouping: Covariate,
) -> Result<PrevalenceTable, TopicError> {
    model.align(corpus)?;
    let k = model.k();
    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (d, id) in model.doc_ids.iter().enumerate() {
        members.entry(grouping.level(id)).or_default().push(d);
    }

    let draws = model.theta_draws();
    let m = draws.len() as f64;
    let groups = members
        .into_iter()
        .map(|(level, docs)| {
            let n = docs.len() as f64;
            let mean_of = |theta: &Vec<Vec<f64>>| -> Vec<f64> {
                let mut acc = vec![0.0; k];
                for &d in &docs {
                    for (a, v) in acc.iter_mut().zip(&theta[d]) {
                        *a += v;
                    }
                }
                acc.iter_mut().for_each(|a| *a /= n);
                acc
            };

            let mut mean = mean_of(&model.theta);
            let total: f64 = mean.iter().sum();
            mean.iter_mut().for_each(|x| *x /= total);

            let mut draw_means = vec![0.0; k];
            let mut draw_sq = vec![0.0; k];
            let mut within = vec![0.0; k];
            for theta in &draws {
                let gm = mean_of(theta);
                for t in 0..k {
                    draw_means[t] += gm[t];
                    draw_sq[t] += gm[t] * gm[t];
                    if docs.len() > 1 {
                        let ss: f64 = docs.iter().map(|&d| (theta[d][t] - gm[t]).powi(2)).sum();
                        within[t] += ss / (n - 1.0) / n;
                    }
                }
            }
            let stderr = (0..k)
                .map(|t| {
                    let dm = draw_means[t] / m;
                    let between = (draw_sq[t] / m - dm * dm).max(0.0);
                    (within[t] / m + between).sqrt()
                })
                .collect();
            GroupPrevalence { level, documents: docs.len(), mean, stderr }
        })
        .collect();
    Ok(PrevalenceTable { grouping, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::raw_corpus;
    use crate::synthetic::{disjoint_topics, SyntheticSpec, ThetaPlan};
    use crate::topics::{fit, ModelConfig};

    #[test]
    fn single_group_equals_corpus_mean() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "a b c a"),
            ("phase1_week2_march_03", "c c b d"),
            ("phase1_week3_march_10", "d a d b"),
        ]);
        let m = fit(&c, &ModelConfig::new(2).with_schedule(30, 10, 5)).unwrap();
        let table = prevalence_by(&m, &c, Covariate::Phase).unwrap();
        assert_eq!(table.groups.len(), 1);
        let overall = m.proportions();
        for (a, b) in table.groups[0].mean.iter().zip(&overall) {
            assert!((a - b).abs() < 1e-12);
        }
        let by_week = prevalence_by(&m, &c, Covariate::Week).unwrap();
        assert_eq!(by_week.groups.iter().map(|g| g.level).collect::<Vec<_>>(), vec![1, 2, 3]);
        for g in &by_week.groups {
            assert!((g.mean.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_topic_rows_are_one() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "a b"),
            ("phase2_week10_may_04", "b c"),
        ]);
        let m = fit(&c, &ModelConfig::new(1).with_schedule(5, 1, 1)).unwrap();
        let table = prevalence_by(&m, &c, Covariate::Phase).unwrap();
        assert!(table.groups.iter().all(|g| g.mean == vec![1.0]));
    }

    #[test]
    fn planted_shift_reproduced() {
        let mut spec = SyntheticSpec::new(disjoint_topics(2, 20), 200, 50, 11);
        spec.theta = ThetaPlan::by_phase(vec![0.8, 0.2], vec![0.2, 0.8], 10.0);
        let s = spec.generate();
        // A flat prior: the default 50/K pulls 50-token documents toward 1/K,
        // while a sparse one pushes them toward a single topic.
        let mut cfg = ModelConfig::new(2).with_schedule(150, 100, 10);
        cfg.alpha = Some(1.0);
        let m = fit(&s.corpus, &cfg).unwrap();
        let table = prevalence_by(&m, &s.corpus, Covariate::Phase).unwrap();
        // Orient fitted topic 0 to the planted topic 0.
        let topic = if m.phi[0][0] > m.phi[1][0] { 0 } else { 1 };
        let truth = |phase: u8| -> f64 {
            let rows: Vec<f64> = s
                .corpus
                .documents()
                .zip(&s.theta)
                .filter(|(d, _)| d.id.phase() == phase)
                .map(|(_, t)| t[0])
                .collect();
            rows.iter().sum::<f64>() / rows.len() as f64
        };
        for (g, phase) in table.groups.iter().zip([1u8, 2]) {
            assert!(
                (g.mean[topic] - truth(phase)).abs() <= 0.05,
                "phase {phase}: fitted {} vs planted {}",
                g.mean[topic],
                truth(phase)
            );
        }
    }
}
