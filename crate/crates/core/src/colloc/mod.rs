//! Frequencies, logDice collocations, word sketches and sketch differences.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{normalize_lemma, Corpus};

mod relations;
mod sketch;

pub use relations::{collocations, CollocConfig, Collocation, Relation};
pub use sketch::{
    sketch_diff, word_sketch, write_collocations_csv, SketchDiffRow, SketchGraph, SketchNode,
    SketchOptions, WordSketch,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollocError {
    #[error("subcorpus has no tokens")]
    EmptySubcorpus,
    #[error("invalid counts: f_head={f_head}, f_coll={f_coll}, f_pair={f_pair}")]
    InvalidCounts { f_head: u64, f_coll: u64, f_pair: u64 },
    #[error("the {0} relation needs dependency annotation, which this corpus lacks")]
    RelationsUnavailable(Relation),
}

/// logDice = 14 + log2(2 f_pair / (f_head + f_coll)).
pub fn logdice(f_head: u64, f_coll: u64, f_pair: u64) -> Result<f64, CollocError> {
    if f_pair < 1 || f_pair > f_head || f_pair > f_coll {
        return Err(CollocError::InvalidCounts { f_head, f_coll, f_pair });
    }
    Ok(14.0 + (2.0 * f_pair as f64 / (f_head as f64 + f_coll as f64)).log2())
}

/// Rounds half away from zero to `decimals` places, for display.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqReport {
    pub lemma: String,
    pub hits: u64,
    pub token_count: u64,
    /// Hits per million tokens, full precision.
    pub pmw: f64,
}

/// Wire form of a frequency query: hits and display-rounded pmw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqPayload {
    pub hits: u64,
    pub pmw: f64,
}

impl FreqReport {
    pub fn new(lemma: impl Into<String>, hits: u64, token_count: u64) -> Result<Self, CollocError> {
        if token_count == 0 {
            return Err(CollocError::EmptySubcorpus);
        }
        Ok(Self {
            lemma: lemma.into(),
            hits,
            token_count,
            pmw: hits as f64 * 1e6 / token_count as f64,
        })
    }

    /// pmw rounded half-up to two decimals. Computed in integers so that
    /// exact halves are not lost to binary representation.
    pub fn pmw_display(&self) -> f64 {
        let num = self.hits as u128 * 100_000_000 * 2 + self.token_count as u128;
        let hundredths = num / (2 * self.token_count as u128);
        hundredths as f64 / 100.0
    }

    pub fn payload(&self) -> FreqPayload {
        FreqPayload { hits: self.hits, pmw: self.pmw_display() }
    }
}

/// Lemma frequency in a corpus view. The query is normalized the same way
/// lemmas are at ingest.
pub fn freq(view: &Corpus, lemma: &str) -> Result<FreqReport, CollocError> {
    let lemma = normalize_lemma(lemma.trim());
    let hits = view.frequency(&lemma);
    FreqReport::new(lemma, hits, view.token_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::raw_corpus;
    use crate::corpus::SubcorpusFilter;
    use proptest::prelude::*;

    #[test]
    fn logdice_hand_values() {
        assert_eq!(logdice(5, 5, 5).unwrap(), 14.0);
        assert_eq!(logdice(10, 6, 4).unwrap(), 13.0);
        let v = logdice(1000, 1000, 1).unwrap();
        assert!((v - (14.0 + 0.001f64.log2())).abs() < 1e-9);
        assert!((v - 4.034).abs() < 1e-3);
    }

    #[test]
    fn logdice_rejects_bad_counts() {
        for (h, c, p) in [(5, 5, 0), (3, 10, 4), (10, 3, 4)] {
            assert_eq!(
                logdice(h, c, p),
                Err(CollocError::InvalidCounts { f_head: h, f_coll: c, f_pair: p })
            );
        }
    }

    #[test]
    fn pmw_anchors() {
        let a = FreqReport::new("tsunami", 81, 232_532).unwrap();
        let b = FreqReport::new("tsunami", 83, 190_219).unwrap();
        assert_eq!(a.pmw_display(), 348.34);
        assert_eq!(b.pmw_display(), 436.34);
        assert_eq!(serde_json::to_string(&a.payload()).unwrap(), r#"{"hits":81,"pmw":348.34}"#);
    }

    #[test]
    fn pmw_rounds_exact_halves_up() {
        // 1 / 800_000 * 1e6 = 1.25 exactly; 1 / 1_600_000 * 1e6 = 0.625.
        assert_eq!(FreqReport::new("x", 1, 800_000).unwrap().pmw_display(), 1.25);
        assert_eq!(FreqReport::new("x", 1, 1_600_000).unwrap().pmw_display(), 0.63);
        assert_eq!(FreqReport::new("x", 1, 3).unwrap().pmw_display(), 333_333.33);
    }

    #[test]
    fn freq_on_views() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "Tsunami tsunami crisi"),
            ("phase2_week10_may_04", "tsunami economia"),
        ]);
        let all = freq(&c, "TSUNAMI").unwrap();
        assert_eq!(all.hits, 3);
        assert_eq!(all.token_count, 5);
        assert_eq!(all.pmw, 600_000.0);
        let absent = freq(&c, "motore").unwrap();
        assert_eq!(absent.payload(), FreqPayload { hits: 0, pmw: 0.0 });
        let empty = c.subcorpus(&SubcorpusFilter::weeks(3..=4));
        assert_eq!(freq(&empty, "tsunami"), Err(CollocError::EmptySubcorpus));
    }

    #[test]
    fn hits_additive_over_partition() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "a b a c"),
            ("phase1_week2_march_03", "a d"),
            ("phase2_week10_may_04", "b a a"),
        ]);
        let f = SubcorpusFilter::phase(1);
        for lemma in ["a", "b", "c", "d", "z"] {
            let full = c.frequency(lemma);
            assert_eq!(c.subcorpus(&f).frequency(lemma) + c.complement(&f).frequency(lemma), full);
        }
    }

    proptest! {
        #[test]
        fn logdice_bounded_and_scale_invariant(h in 1u64..5000, c in 1u64..5000, p in 1u64..5000, s in 1u64..50) {
            prop_assume!(p <= h && p <= c);
            let v = logdice(h, c, p).unwrap();
            prop_assert!(v <= 14.0);
            let scaled = logdice(h * s, c * s, p * s).unwrap();
            prop_assert!((v - scaled).abs() < 1e-9);
            if p < h.min(c) {
                prop_assert!(logdice(h, c, p + 1).unwrap() > v);
            }
        }

        #[test]
        fn logdice_max_when_all_equal(n in 1u64..1_000_000) {
            prop_assert!((logdice(n, n, n).unwrap() - 14.0).abs() <= 1e-9);
        }
    }
}
