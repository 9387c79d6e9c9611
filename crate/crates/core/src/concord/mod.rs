//! Keyword-in-context concordances and token-pattern search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{is_punctuation, normalize_lemma, Corpus, Document, DocumentId, Token, Upos};

mod pattern;

pub use pattern::{Slot, TokenPattern};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcordError {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid page request: {0}")]
    InvalidPage(String),
}

/// What a concordance searches for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Lemma(String),
    /// Surface form, case-insensitive.
    Surface(String),
    Pattern(TokenPattern),
}

impl Query {
    fn as_pattern(&self) -> TokenPattern {
        let slot = match self {
            Query::Lemma(l) => Slot::lemma(l),
            Query::Surface(w) => Slot { word: vec![normalize_lemma(w)], ..Slot::default() },
            Query::Pattern(p) => return p.clone(),
        };
        TokenPattern::new(vec![slot]).expect("single required slot")
    }
}

/// `[...]` is a token pattern, `word:x` a surface form, `lemma:x` or a bare
/// string a lemma.
impl FromStr for Query {
    type Err = ConcordError;

    fn from_str(s: &str) -> Result<Self, ConcordError> {
        let s = s.trim();
        if s.starts_with('[') {
            return s.parse().map(Query::Pattern);
        }
        let (kind, value) = match s.split_once(':') {
            Some((k @ ("word" | "surface" | "lemma"), v)) => (k, v.trim()),
            _ => ("lemma", s),
        };
        if value.is_empty() || value.contains(char::is_whitespace) {
            return Err(ConcordError::InvalidPattern(format!(
                "{s:?} is not a single word; use [..] slots for sequences"
            )));
        }
        Ok(match kind {
            "lemma" => Query::Lemma(normalize_lemma(value)),
            _ => Query::Surface(value.to_string()),
        })
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Lemma(l) => f.write_str(l),
            Query::Surface(w) => write!(f, "word:{w}"),
            Query::Pattern(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KwicSort {
    /// Corpus order.
    #[default]
    Position,
    /// By left context, nearest word first.
    Left,
    /// By right context, nearest word first.
    Right,
}

impl FromStr for KwicSort {
    type Err = ConcordError;

    fn from_str(s: &str) -> Result<Self, ConcordError> {
        match s {
            "position" | "pos" => Ok(KwicSort::Position),
            "left" => Ok(KwicSort::Left),
            "right" => Ok(KwicSort::Right),
            other => Err(ConcordError::InvalidPage(format!(
                "unknown sort {other:?} (expected position, left or right)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceLine {
    pub doc_id: DocumentId,
    pub sent: u32,
    /// Token position of the first node token within the document.
    pub position: usize,
    pub left: Vec<String>,
    pub node: Vec<String>,
    pub node_lemmas: Vec<String>,
    pub right: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KwicOptions {
    /// Tokens shown on each side; context stops at document boundaries.
    pub context_width: usize,
    pub sort: KwicSort,
    /// 1-based.
    pub page: usize,
    pub page_size: usize,
}

impl Default for KwicOptions {
    fn default() -> Self {
        Self { context_width: 8, sort: KwicSort::Position, page: 1, page_size: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KwicPage {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub lines: Vec<ConcordanceLine>,
}

struct Hit<'a> {
    doc: &'a Document,
    sent: u32,
    from: usize,
    to: usize,
}

impl Hit<'_> {
    fn line(&self, context_width: usize) -> ConcordanceLine {
        let toks = &self.doc.tokens;
        let surfaces = |r: std::ops::Range<usize>| -> Vec<String> { toks[r].iter().map(|t| t.surface.clone()).collect() };
        ConcordanceLine {
            doc_id: self.doc.id.clone(),
            sent: self.sent,
            position: self.from,
            left: surfaces(self.from.saturating_sub(context_width)..self.from),
            node: surfaces(self.from..self.to),
            node_lemmas: toks[self.from..self.to].iter().map(|t| t.lemma.clone()).collect(),
            right: surfaces(self.to..(self.to + context_width).min(toks.len())),
        }
    }
}

/// Matches in corpus order.
fn hits<'a>(view: &'a Corpus, query: &Query) -> Vec<Hit<'a>> {
    let pattern = query.as_pattern();
    let mut out = Vec::new();
    for doc in view.documents() {
        let mut start = 0usize;
        for sentence in doc.sentences() {
            for (a, b) in pattern.find_all(sentence) {
                out.push(Hit { doc, sent: sentence[a].sent, from: start + a, to: start + b });
            }
            start += sentence.len();
        }
    }
    out
}

/// Hits reordered for `sort`. The cached-key sort is stable and hits come
/// in corpus order, so corpus order is the final tie-break.
fn sorted_hits<'a>(view: &'a Corpus, query: &Query, context_width: usize, sort: KwicSort) -> Vec<Hit<'a>> {
    let mut all = hits(view, query);
    let lower = |toks: &[Token]| -> Vec<String> { toks.iter().map(|t| t.surface.to_lowercase()).collect() };
    match sort {
        KwicSort::Position => {}
        KwicSort::Left => all.sort_by_cached_key(|h| {
            let mut k = lower(&h.doc.tokens[h.from.saturating_sub(context_width)..h.from]);
            k.reverse();
            k
        }),
        KwicSort::Right => all.sort_by_cached_key(|h| {
            lower(&h.doc.tokens[h.to..(h.to + context_width).min(h.doc.tokens.len())])
        }),
    }
    all
}

/// Every match of `query` in the view, sorted as requested.
pub fn concordance(view: &Corpus, query: &Query, context_width: usize, sort: KwicSort) -> Vec<ConcordanceLine> {
    sorted_hits(view, query, context_width, sort).iter().map(|h| h.line(context_width)).collect()
}

/// One page of the concordance.
pub fn kwic(view: &Corpus, query: &Query, opts: &KwicOptions) -> Result<KwicPage, ConcordError> {
    if opts.page == 0 {
        return Err(ConcordError::InvalidPage("page numbers start at 1".into()));
    }
    if opts.page_size == 0 {
        return Err(ConcordError::InvalidPage("page size must be positive".into()));
    }
    let all = sorted_hits(view, query, opts.context_width, opts.sort);
    let lines = all
        .iter()
        .skip((opts.page - 1).saturating_mul(opts.page_size))
        .take(opts.page_size)
        .map(|h| h.line(opts.context_width))
        .collect();
    let total = all.len();
    Ok(KwicPage { total, page: opts.page, page_size: opts.page_size, lines })
}

/// TSV with header `doc_id, sent, position, left, node, right`; spans are
/// space-joined surfaces.
pub fn write_kwic_tsv<W: Write>(lines: &[ConcordanceLine], writer: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(writer);
    w.write_record(["doc_id", "sent", "position", "left", "node", "right"])?;
    for l in lines {
        w.write_record([
            l.doc_id.to_string(),
            l.sent.to_string(),
            l.position.to_string(),
            l.left.join(" "),
            l.node.join(" "),
            l.right.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Word lists for the "X is (a) Y" pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaConfig {
    /// Copula lemmas in tagged text.
    pub lemmas: BTreeSet<String>,
    /// Copula forms accepted on untagged tokens.
    pub forms: BTreeSet<String>,
    /// Determiners accepted on untagged tokens.
    pub determiners: BTreeSet<String>,
}

impl Default for CopulaConfig {
    fn default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            lemmas: set(&["essere", "be"]),
            forms: set(&["è", "sono", "era", "erano", "fu", "sarà", "is", "are", "was", "were"]),
            determiners: set(&["un", "uno", "una", "un'", "il", "lo", "la", "l'", "i", "gli", "le", "a", "an", "the"]),
        }
    }
}

impl CopulaConfig {
    fn is_copula(&self, t: &Token) -> bool {
        self.lemmas.contains(&t.lemma) || (t.pos == Upos::Unknown && self.forms.contains(&t.lemma))
    }

    fn is_determiner(&self, t: &Token) -> bool {
        match t.pos {
            Upos::Unknown => self.determiners.contains(&t.lemma),
            pos => pos == Upos::Det,
        }
    }
}

fn is_subject_candidate(t: &Token) -> bool {
    match t.pos {
        Upos::Noun | Upos::Propn => true,
        Upos::Unknown => !is_punctuation(t),
        _ => false,
    }
}

/// Subjects X of "X <copula> [determiner] Y" sentences, with counts, most
/// frequent first. Untagged tokens fall back to word lists for the copula
/// and determiner and accept any non-punctuation X.
pub fn copular_pattern(view: &Corpus, y: &str, cfg: &CopulaConfig) -> Vec<(String, usize)> {
    let y = normalize_lemma(y.trim());
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in view.documents() {
        for sentence in doc.sentences() {
            for (i, t) in sentence.iter().enumerate() {
                if t.lemma != y || i < 2 {
                    continue;
                }
                let mut c = i - 1;
                if cfg.is_determiner(&sentence[c]) && !cfg.is_copula(&sentence[c]) {
                    if c == 0 {
                        continue;
                    }
                    c -= 1;
                }
                if c == 0 || !cfg.is_copula(&sentence[c]) {
                    continue;
                }
                let x = &sentence[c - 1];
                if is_subject_candidate(x) {
                    *counts.entry(x.lemma.clone()).or_default() += 1;
                }
            }
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
