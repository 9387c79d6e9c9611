use std::collections::{BTreeSet, HashMap, HashSet};

use super::{default_stoplist, Corpus, CorpusError, Document, Token, Upos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub stoplist: BTreeSet<String>,
    pub drop_punctuation: bool,
    pub drop_numbers: bool,
    pub drop_hapax: bool,
    pub lowercase: bool,
    /// Must stay false; stemming is rejected.
    pub stem: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stoplist: default_stoplist(),
            drop_punctuation: true,
            drop_numbers: true,
            drop_hapax: true,
            lowercase: true,
            stem: false,
        }
    }
}

/// A token made only of punctuation or symbol characters, or tagged PUNCT.
pub fn is_punctuation(token: &Token) -> bool {
    token.pos == Upos::Punct || token.surface.chars().all(|c| !c.is_alphanumeric())
}

/// A numeral written with digits (`2020`, `3,5`, `1.000`, `25%`).
pub fn is_numeric(token: &Token) -> bool {
    let s = token.surface.as_str();
    s.chars().any(|c| c.is_numeric())
        && s.chars().all(|c| c.is_numeric() || matches!(c, '.' | ',' | '\'' | '%' | '-' | '+'))
}

/// Vocabulary pruning for topic modeling.
///
/// Order: lowercase, then stoplist/punctuation/number removal, then hapax
/// removal counted on the surviving lemmas. Documents left empty are dropped
/// with a warning. Dependency heads pointing at removed tokens are cleared.
pub fn preprocess(corpus: &Corpus, cfg: &PreprocessConfig) -> Result<Corpus, CorpusError> {
    if cfg.stem {
        return Err(CorpusError::StemmingUnsupported);
    }

    let keep = |t: &Token| {
        !(cfg.drop_punctuation && is_punctuation(t)
            || cfg.drop_numbers && is_numeric(t)
            || cfg.stoplist.contains(&t.lemma))
    };

    let mut filtered: Vec<Document> = corpus
        .documents()
        .map(|doc| {
            let tokens = doc
                .tokens
                .iter()
                .map(|t| {
                    let mut t = t.clone();
                    if cfg.lowercase {
                        t.lemma = t.lemma.to_lowercase();
                    }
                    t
                })
                .filter(|t| keep(t))
                .collect();
            Document { id: doc.id.clone(), source: doc.source.clone(), tokens }
        })
        .collect();

    if cfg.drop_hapax {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for t in filtered.iter().flat_map(|d| &d.tokens) {
            *freq.entry(t.lemma.as_str()).or_default() += 1;
        }
        let hapax: HashSet<String> = freq
            .into_iter()
            .filter(|&(_, n)| n == 1)
            .map(|(l, _)| l.to_string())
            .collect();
        for doc in &mut filtered {
            doc.tokens.retain(|t| !hapax.contains(&t.lemma));
        }
    }

    let mut documents = Vec::with_capacity(filtered.len());
    for mut doc in filtered {
        if doc.tokens.is_empty() {
            log::warn!("document {} is empty after preprocessing; dropped", doc.id);
            continue;
        }
        clear_dangling_heads(&mut doc.tokens);
        documents.push(doc);
    }
    Ok(Corpus::new(documents, corpus.annotation()))
}

fn clear_dangling_heads(tokens: &mut [Token]) {
    for sentence in tokens.chunk_by_mut(|a, b| a.sent == b.sent) {
        let present: HashSet<u32> = sentence.iter().map(|t| t.index).collect();
        for t in sentence.iter_mut() {
            if let Some(h) = t.head {
                if h != 0 && !present.contains(&h) {
                    t.head = None;
                    t.deprel = None;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::raw_corpus;
    use proptest::prelude::*;

    fn no_stoplist() -> PreprocessConfig {
        PreprocessConfig { stoplist: BTreeSet::new(), ..PreprocessConfig::default() }
    }

    #[test]
    fn hapax_removed_after_filtering() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "crisi crisi tsunami"),
            ("phase2_week10_may_04", "crisi ponte"),
        ]);
        let p = preprocess(&c, &no_stoplist()).unwrap();
        assert_eq!(p.lemmas(), &["crisi".to_string()]);
        assert_eq!(p.frequency("crisi"), 3);
    }

    #[test]
    fn default_stoplist_removes_domain_terms() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "Il coronavirus e la crisi. Coronavirus, crisi, Covid-19!"),
            ("phase1_week2_march_03", "La crisi del Covid e il coronavirus"),
        ]);
        let p = preprocess(&c, &PreprocessConfig::default()).unwrap();
        assert!(p.lemma_id("coronavirus").is_none());
        assert!(p.lemma_id("covid").is_none());
        assert_eq!(p.lemmas(), &["crisi".to_string()]);
    }

    #[test]
    fn punctuation_and_numbers_dropped() {
        let c = raw_corpus(&[("phase1_week1_february_27", "crisi, 2020 crisi; 3,5 crisi 25% ... «crisi»")]);
        let p = preprocess(&c, &no_stoplist()).unwrap();
        assert_eq!(p.lemmas(), &["crisi".to_string()]);
        assert_eq!(p.token_count(), 4);
    }

    #[test]
    fn emptied_documents_dropped() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "crisi crisi"),
            ("phase1_week1_february_28", "il la ."),
        ]);
        let p = preprocess(&c, &PreprocessConfig::default()).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn stemming_rejected() {
        let c = raw_corpus(&[("phase1_week1_february_27", "crisi")]);
        let cfg = PreprocessConfig { stem: true, ..PreprocessConfig::default() };
        assert!(matches!(preprocess(&c, &cfg), Err(CorpusError::StemmingUnsupported)));
    }

    #[test]
    fn offsets_stay_increasing() {
        let c = raw_corpus(&[("phase1_week1_february_27", "x il y x , y z z")]);
        let p = preprocess(&c, &PreprocessConfig::default()).unwrap();
        let offs: Vec<u32> = p.document(0).unwrap().tokens.iter().map(|t| t.offset).collect();
        assert_eq!(offs, vec![0, 2, 3, 5, 6, 7]);
    }

    proptest! {
        #[test]
        fn idempotent_and_hapax_free(
            docs in proptest::collection::vec(
                proptest::collection::vec(
                    prop_oneof![
                        Just("crisi"), Just("tsunami"), Just("il"), Just("motore"),
                        Just(","), Just("2020"), Just("ponte"), Just("economia"), Just("covid"),
                    ],
                    1..30,
                ),
                1..8,
            )
        ) {
            let texts: Vec<String> = docs.iter().map(|d| d.join(" ")).collect();
            let ids: Vec<String> = (0..texts.len())
                .map(|i| format!("phase1_week1_march_{:02}", i + 1))
                .collect();
            let pairs: Vec<(&str, &str)> = ids.iter().map(String::as_str).zip(texts.iter().map(String::as_str)).collect();
            let c = raw_corpus(&pairs);
            let cfg = PreprocessConfig::default();
            let once = preprocess(&c, &cfg).unwrap();
            let twice = preprocess(&once, &cfg).unwrap();
            prop_assert_eq!(once.to_json_string(), twice.to_json_string());
            prop_assert!(once.frequencies().iter().all(|&f| f >= 2));
            prop_assert!(once.lemma_id("il").is_none() && once.lemma_id("covid").is_none());
        }
    }
}
