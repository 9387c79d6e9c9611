use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{logdice, CollocError};
use crate::corpus::{default_stoplist, is_punctuation, normalize_lemma, Corpus, Token, Upos};

/// Grammatical or positional link from a head lemma to its collocates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Adjectival (optionally nominal) dependents of the head.
    Modifier,
    /// Verbs taking the head as subject.
    SubjectOf,
    /// Verbs taking the head as direct object.
    ObjectOf,
    /// Lemmas within a token window around the head, in the same sentence.
    Window,
}

impl Relation {
    pub const DEPENDENCY: [Relation; 3] = [Relation::Modifier, Relation::SubjectOf, Relation::ObjectOf];

    pub fn name(self) -> &'static str {
        match self {
            Relation::Modifier => "modifier",
            Relation::SubjectOf => "subject-of",
            Relation::ObjectOf => "object-of",
            Relation::Window => "window",
        }
    }

    pub fn is_dependency(self) -> bool {
        self != Relation::Window
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "modifier" | "modifiers" | "amod" => Ok(Relation::Modifier),
            "subject-of" | "subj" => Ok(Relation::SubjectOf),
            "object-of" | "obj" => Ok(Relation::ObjectOf),
            "window" => Ok(Relation::Window),
            other => Err(format!(
                "unknown relation {other:?} (expected modifier, subject-of, object-of or window)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocConfig {
    /// Tokens on each side of the head for the window relation.
    pub window: usize,
    /// Lemmas never counted as window collocates.
    pub stoplist: BTreeSet<String>,
    /// Count `nmod` dependents as modifiers alongside `amod`.
    pub nmod_modifiers: bool,
}

impl Default for CollocConfig {
    fn default() -> Self {
        Self { window: 5, stoplist: default_stoplist(), nmod_modifiers: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collocation {
    pub head: String,
    pub collocate: String,
    pub relation: Relation,
    pub f_head: u64,
    pub f_coll: u64,
    pub f_pair: u64,
    pub logdice: f64,
}

/// Token position: (document index in the view, token position in the document).
type TokenKey = (u32, u32);

#[derive(Default)]
struct PairTokens {
    heads: BTreeSet<TokenKey>,
    collocates: BTreeSet<TokenKey>,
}

/// Collocates of `head` under `relation`, counted in `view` only.
///
/// `f_head` and `f_coll` are the lemmas' frequencies in the view. `f_pair` is
/// the smaller of the number of head tokens linked to the collocate and the
/// number of collocate tokens linked to the head, which keeps it within both
/// marginals and makes the window relation symmetric. Results are sorted by
/// logDice, then `f_pair` (both descending), then collocate.
pub fn collocations(
    view: &Corpus,
    head: &str,
    relation: Relation,
    min_pair: u64,
    cfg: &CollocConfig,
) -> Result<Vec<Collocation>, CollocError> {
    if relation.is_dependency() && !view.has_dependencies() {
        return Err(CollocError::RelationsUnavailable(relation));
    }
    let head = normalize_lemma(head.trim());
    let f_head = view.frequency(&head);
    if f_head == 0 {
        return Ok(Vec::new());
    }

    let mut pairs: BTreeMap<&str, PairTokens> = BTreeMap::new();
    for &(d, _) in view.postings(&head) {
        let doc = view.document(d as usize).expect("posting within view");
        let mut start = 0u32;
        for sentence in doc.sentences() {
            scan_sentence(sentence, start, &head, relation, cfg, |coll_lemma, h, c| {
                let entry = pairs.entry(coll_lemma).or_default();
                entry.heads.insert((d, h));
                entry.collocates.insert((d, c));
            });
            start += sentence.len() as u32;
        }
    }

    let mut out: Vec<Collocation> = pairs
        .into_iter()
        .filter_map(|(collocate, tokens)| {
            let f_pair = tokens.heads.len().min(tokens.collocates.len()) as u64;
            if f_pair < min_pair.max(1) {
                return None;
            }
            let f_coll = view.frequency(collocate);
            let score = logdice(f_head, f_coll, f_pair).expect("pair counts within marginals");
            Some(Collocation {
                head: head.clone(),
                collocate: collocate.to_string(),
                relation,
                f_head,
                f_coll,
                f_pair,
                logdice: score,
            })
        })
        .collect();
    sort_collocations(&mut out);
    Ok(out)
}

pub(crate) fn sort_collocations(rows: &mut [Collocation]) {
    rows.sort_by(|a, b| {
        b.logdice
            .total_cmp(&a.logdice)
            .then(b.f_pair.cmp(&a.f_pair))
            .then_with(|| a.collocate.cmp(&b.collocate))
    });
}

/// Reports every (collocate lemma, head position, collocate position) link
/// for occurrences of `head` in one sentence. Positions are document-level,
/// `start` being the position of the sentence's first token.
fn scan_sentence<'t>(
    sentence: &'t [Token],
    start: u32,
    head: &str,
    relation: Relation,
    cfg: &CollocConfig,
    mut emit: impl FnMut(&'t str, u32, u32),
) {
    let position_of = |index: u32| sentence.binary_search_by_key(&index, |t| t.index).ok();
    for (i, tok) in sentence.iter().enumerate() {
        if tok.lemma != head {
            continue;
        }
        let here = start + i as u32;
        match relation {
            Relation::Window => {
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(sentence.len() - 1);
                for (j, other) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if j != i && !is_punctuation(other) && !cfg.stoplist.contains(&other.lemma) {
                        emit(&other.lemma, here, start + j as u32);
                    }
                }
            }
            Relation::Modifier => {
                for (j, child) in sentence.iter().enumerate() {
                    if j != i && child.head == Some(tok.index) && is_modifier(child, cfg) {
                        emit(&child.lemma, here, start + j as u32);
                    }
                }
            }
            Relation::SubjectOf | Relation::ObjectOf => {
                let wanted = matches!(
                    (relation, tok.base_deprel()),
                    (Relation::SubjectOf, Some("nsubj")) | (Relation::ObjectOf, Some("obj" | "dobj"))
                );
                if !wanted {
                    continue;
                }
                let governor = tok.head.filter(|&h| h > 0).and_then(position_of).filter(|&g| g != i);
                if let Some(g) = governor {
                    if sentence[g].pos == Upos::Verb {
                        emit(&sentence[g].lemma, here, start + g as u32);
                    }
                }
            }
        }
    }
}

fn is_modifier(child: &Token, cfg: &CollocConfig) -> bool {
    match child.base_deprel() {
        Some("amod") => true,
        Some("nmod") => cfg.nmod_modifiers,
        _ => false,
    }
}
