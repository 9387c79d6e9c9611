use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{TopicError, TopicModel};
use crate::corpus::{Corpus, DocumentId};

/// Document covariate, treated as a categorical factor whose lowest
/// observed level is the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Covariate {
    Phase,
    Week,
}

impl Covariate {
    pub fn level(self, id: &DocumentId) -> u32 {
        match self {
            Covariate::Phase => id.phase() as u32,
            Covariate::Week => id.week(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Covariate::Phase => "phase",
            Covariate::Week => "week",
        }
    }
}

impl std::str::FromStr for Covariate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "phase" => Ok(Covariate::Phase),
            "week" => Ok(Covariate::Week),
            other => Err(format!("unknown covariate {other:?} (expected phase or week)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectEstimate {
    pub topic: usize,
    /// `(Intercept)` or `<covariate><level>`, e.g. `phase2`, `week8`.
    pub term: String,
    pub coefficient: f64,
    pub stderr: f64,
    pub p_value: f64,
}

/// Regresses each topic's proportion on a categorical covariate.
///
/// For every saved theta draw an ordinary least-squares fit gives
/// coefficients and their sampling variance. Draws are pooled by the law of
/// total variance (mean within-draw variance plus between-draw variance of
/// the coefficients), which is the variance of the method-of-composition
/// mixture. p-values are two-sided under a normal approximation.
pub fn estimate_effect(
    model: &TopicModel,
    corpus: &Corpus,
    covariate: Covariate,
) -> Result<Vec<EffectEstimate>, TopicError> {
    model.align(corpus)?;
    let n = model.document_count();
    let levels: BTreeSet<u32> = model.doc_ids.iter().map(|id| covariate.level(id)).collect();
    if levels.len() < 2 {
        return Err(TopicError::DegenerateDesign(format!(
            "{} takes a single value across the corpus",
            covariate.name()
        )));
    }
    let levels: Vec<u32> = levels.into_iter().collect();
    let p = levels.len();
    if n <= p {
        return Err(TopicError::DegenerateDesign(format!(
            "{n} documents for {p} coefficients"
        )));
    }

    let x = DMatrix::from_fn(n, p, |row, col| {
        if col == 0 || covariate.level(&model.doc_ids[row]) == levels[col] {
            1.0
        } else {
            0.0
        }
    });
    let xt = x.transpose();
    let xtx_inv = (&xt * &x)
        .cholesky()
        .ok_or_else(|| TopicError::DegenerateDesign("design matrix is rank deficient".into()))?
        .inverse();
    let hat = &xtx_inv * &xt;
    let dof = (n - p) as f64;

    let draws = model.theta_draws();
    let m = draws.len() as f64;
    let normal = Normal::standard();
    let mut out = Vec::with_capacity(model.k() * p);
    for topic in 0..model.k() {
        let mut coef_sum = DVector::zeros(p);
        let mut coef_sq = DVector::zeros(p);
        let mut within = DVector::zeros(p);
        for draw in &draws {
            let y = DVector::from_iterator(n, draw.iter().map(|row| row[topic]));
            let beta = &hat * &y;
            let resid = &y - &x * &beta;
            let sigma2 = resid.norm_squared() / dof;
            coef_sum += &beta;
            coef_sq += beta.component_mul(&beta);
            within += xtx_inv.diagonal() * sigma2;
        }
        for j in 0..p {
            let mean = coef_sum[j] / m;
            let between = (coef_sq[j] / m - mean * mean).max(0.0);
            let variance = within[j] / m + between;
            let stderr = variance.sqrt();
            let p_value = if stderr > 0.0 {
                2.0 * normal.sf((mean / stderr).abs())
            } else if mean == 0.0 {
                1.0
            } else {
                0.0
            };
            let term = if j == 0 {
                "(Intercept)".to_string()
            } else {
                format!("{}{}", covariate.name(), levels[j])
            };
            out.push(EffectEstimate {
                topic,
                term,
                coefficient: mean,
                stderr,
                p_value: p_value.clamp(0.0, 1.0),
            });
        }
    }
    Ok(out)
}

/// CSV with header `topic,term,coef,se,p`; topics are 1-based.
pub fn write_effects_csv<W: Write>(effects: &[EffectEstimate], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["topic", "term", "coef", "se", "p"])?;
    for e in effects {
        w.write_record([
            (e.topic + 1).to_string(),
            e.term.clone(),
            format!("{:.6}", e.coefficient),
            format!("{:.6}", e.stderr),
            format!("{:.6}", e.p_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_document_id, test_support::raw_corpus};
    use crate::topics::ModelConfig;

    fn model_from_theta(ids: &[&str], theta: Vec<Vec<f64>>, draws: Vec<Vec<Vec<f64>>>) -> TopicModel {
        TopicModel {
            config: ModelConfig::new(theta[0].len()),
            vocabulary: vec!["x".into()],
            term_frequency: vec![1],
            doc_ids: ids.iter().map(|s| parse_document_id(s).unwrap()).collect(),
            phi: vec![vec![1.0]; theta[0].len()],
            theta,
            assignments: vec![],
            draws,
            labels: vec![],
        }
    }

    const IDS: [&str; 6] = [
        "phase1_week1_february_27",
        "phase1_week1_february_28",
        "phase1_week2_march_03",
        "phase2_week10_may_04",
        "phase2_week10_may_05",
        "phase2_week11_may_12",
    ];

    fn corpus() -> Corpus {
        let docs: Vec<(&str, &str)> = IDS.iter().map(|id| (*id, "x")).collect();
        raw_corpus(&docs)
    }

    #[test]
    fn single_draw_matches_ols_by_hand() {
        let y = [0.9, 0.8, 0.7, 0.3, 0.2, 0.1];
        let theta: Vec<Vec<f64>> = y.iter().map(|&v| vec![v, 1.0 - v]).collect();
        let m = model_from_theta(&IDS, theta, vec![]);
        let eff = estimate_effect(&m, &corpus(), Covariate::Phase).unwrap();
        assert_eq!(eff.len(), 4);
        // Group means 0.8 and 0.2; residual SS = 0.04, dof 4, sigma2 = 0.01;
        // var(phase2) = sigma2 * (1/3 + 1/3).
        let slope = &eff[1];
        assert_eq!(slope.term, "phase2");
        assert!((eff[0].coefficient - 0.8).abs() < 1e-12);
        assert!((slope.coefficient + 0.6).abs() < 1e-12);
        assert!((slope.stderr - (0.01f64 * 2.0 / 3.0).sqrt()).abs() < 1e-12);
        let z: f64 = 0.6 / (0.01f64 * 2.0 / 3.0).sqrt();
        let expected_p = 2.0 * Normal::standard().sf(z);
        assert!((slope.p_value - expected_p).abs() < 1e-15);
        assert!(slope.p_value < 1e-10);
        // Topic 1 mirrors topic 0.
        assert!((eff[3].coefficient - 0.6).abs() < 1e-12);
    }

    #[test]
    fn draws_add_between_variance() {
        let base = [0.9, 0.8, 0.7, 0.3, 0.2, 0.1];
        let draw = |shift: f64| -> Vec<Vec<f64>> {
            base.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let v = if i >= 3 { v + shift } else { v };
                    vec![v, 1.0 - v]
                })
                .collect()
        };
        let draws = vec![draw(-0.05), draw(0.05)];
        let m = model_from_theta(&IDS, draw(0.0), draws);
        let eff = estimate_effect(&m, &corpus(), Covariate::Phase).unwrap();
        let slope = &eff[1];
        assert!((slope.coefficient + 0.6).abs() < 1e-12);
        // within = 0.01 * 2/3, between = 0.05^2.
        let expected = (0.01 * 2.0 / 3.0 + 0.0025f64).sqrt();
        assert!((slope.stderr - expected).abs() < 1e-12);
    }

    #[test]
    fn week_levels_use_lowest_as_reference() {
        let theta: Vec<Vec<f64>> = (0..6).map(|i| vec![0.1 * i as f64, 1.0 - 0.1 * i as f64]).collect();
        let m = model_from_theta(&IDS, theta, vec![]);
        let eff = estimate_effect(&m, &corpus(), Covariate::Week).unwrap();
        let terms: Vec<&str> = eff.iter().filter(|e| e.topic == 0).map(|e| e.term.as_str()).collect();
        assert_eq!(terms, vec!["(Intercept)", "week2", "week10", "week11"]);
    }

    #[test]
    fn constant_covariate_is_degenerate() {
        let ids = &IDS[..3];
        let theta = vec![vec![0.5, 0.5]; 3];
        let m = model_from_theta(ids, theta, vec![]);
        let docs: Vec<(&str, &str)> = ids.iter().map(|id| (*id, "x")).collect();
        assert!(matches!(
            estimate_effect(&m, &raw_corpus(&docs), Covariate::Phase),
            Err(TopicError::DegenerateDesign(_))
        ));
    }

    #[test]
    fn saturated_design_is_degenerate() {
        let ids = [IDS[0], IDS[3]];
        let m = model_from_theta(&ids, vec![vec![0.5, 0.5]; 2], vec![]);
        let docs: Vec<(&str, &str)> = ids.iter().map(|id| (*id, "x")).collect();
        assert!(matches!(
            estimate_effect(&m, &raw_corpus(&docs), Covariate::Phase),
            Err(TopicError::DegenerateDesign(_))
        ));
    }

    #[test]
    fn unknown_documents_rejected() {
        let m = model_from_theta(&IDS, vec![vec![0.5, 0.5]; 6], vec![]);
        let c = raw_corpus(&[("phase1_week1_february_27", "x")]);
        assert!(matches!(
            estimate_effect(&m, &c, Covariate::Phase),
            Err(TopicError::ModelCorpusMismatch(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let e = vec![EffectEstimate {
            topic: 0,
            term: "phase2".into(),
            coefficient: -0.25,
            stderr: 0.05,
            p_value: 5.7e-7,
        }];
        let mut out = Vec::new();
        write_effects_csv(&e, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "topic,term,coef,se,p\n1,phase2,-0.250000,0.050000,0.000001\n"
        );
    }
}
