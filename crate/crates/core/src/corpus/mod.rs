//! Document collections: ingestion from raw text and CoNLL-U, preprocessing
//! for topic modeling, and metadata-filtered subcorpus views.
//!
//! A [`Corpus`] is immutable once built. Documents are reference counted, so
//! subcorpus views share token storage with the corpus they were cut from.

mod conllu;
mod filter;
mod id;
mod ingest;
mod preprocess;
mod stoplist;
mod tokenize;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{conllu_corpus, ingest_conllu, parse_conllu};
pub use filter::{FilterParseError, SubcorpusFilter};
pub use id::{parse_document_id, DocumentId, Month};
pub use ingest::{ingest_raw, normalize_lemma, Manifest, ManifestRow};
pub use preprocess::{is_numeric, is_punctuation, preprocess, PreprocessConfig};
pub use stoplist::{default_stoplist, load_stoplist, parse_stoplist};
pub use tokenize::{tokenize, RawToken};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed document id: {0}")]
    MalformedId(String),
    #[error("invalid phase {0}: must be 1 or 2")]
    InvalidPhase(u32),
    #[error("no document id for {0}: filename is not an id and no manifest row matches")]
    MissingMetadata(String),
    #[error("document {0} has no tokens")]
    EmptyDocument(String),
    #[error("duplicate document id {0}")]
    DuplicateDocument(DocumentId),
    #[error("{file}:{line}: {message}")]
    ParseError {
        file: String,
        line: usize,
        message: String,
    },
    #[error("stemming is not supported")]
    StemmingUnsupported,
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("unsupported corpus container: {0}")]
    Container(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Universal POS tag set, plus `UNKNOWN` for untagged text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
    Unknown,
}

impl FromStr for Upos {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "ADJ" => Upos::Adj,
            "ADP" => Upos::Adp,
            "ADV" => Upos::Adv,
            "AUX" => Upos::Aux,
            "CCONJ" => Upos::Cconj,
            "DET" => Upos::Det,
            "INTJ" => Upos::Intj,
            "NOUN" => Upos::Noun,
            "NUM" => Upos::Num,
            "PART" => Upos::Part,
            "PRON" => Upos::Pron,
            "PROPN" => Upos::Propn,
            "PUNCT" => Upos::Punct,
            "SCONJ" => Upos::Sconj,
            "SYM" => Upos::Sym,
            "VERB" => Upos::Verb,
            "X" => Upos::X,
            "UNKNOWN" | "_" => Upos::Unknown,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
            Upos::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Original form, kept for display.
    pub surface: String,
    /// Lowercased lemma; counting and modeling operate on this.
    pub lemma: String,
    pub pos: Upos,
    /// 1-based position within the sentence (the CoNLL-U ID column).
    pub index: u32,
    /// Index of the governing token within the sentence; 0 is the root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deprel: Option<String>,
    pub sent: u32,
    /// Position in the document as ingested; survives preprocessing.
    pub offset: u32,
}

impl Token {
    /// Dependency label without its subtype (`nsubj:pass` -> `nsubj`).
    pub fn base_deprel(&self) -> Option<&str> {
        self.deprel
            .as_deref()
            .map(|d| d.split_once(':').map_or(d, |(base, _)| base))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: DocumentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub tokens: Vec<Token>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokenizes raw text; lemmas are lowercased surface forms.
    pub fn from_text(id: DocumentId, source: Option<String>, text: &str) -> Document {
        ingest::document_from_text(id, source, text)
    }

    /// Token slices, one per sentence, in document order.
    pub fn sentences(&self) -> impl Iterator<Item = &[Token]> + '_ {
        self.tokens
            .chunk_by(|a, b| a.sent == b.sent)
    }
}

/// Whether tokens carry dependency annotation usable for relation queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    Raw,
    Dependency,
}

/// Immutable document collection with lemma indexes.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Arc<Document>>,
    annotation: Annotation,
    vocabulary: BTreeMap<String, u32>,
    lemmas: Vec<String>,
    lemma_freq: Vec<u64>,
    postings: Vec<Vec<(u32, u32)>>,
    token_count: u64,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, annotation: Annotation) -> Self {
        Self::from_shared(documents.into_iter().map(Arc::new).collect(), annotation)
    }

    fn from_shared(documents: Vec<Arc<Document>>, annotation: Annotation) -> Self {
        let mut counts: BTreeMap<&str, BTreeMap<u32, u32>> = BTreeMap::new();
        let mut token_count = 0u64;
        for (d, doc) in documents.iter().enumerate() {
            token_count += doc.tokens.len() as u64;
            for tok in &doc.tokens {
                *counts
                    .entry(tok.lemma.as_str())
                    .or_default()
                    .entry(d as u32)
                    .or_default() += 1;
            }
        }

        let mut vocabulary = BTreeMap::new();
        let mut lemmas = Vec::with_capacity(counts.len());
        let mut lemma_freq = Vec::with_capacity(counts.len());
        let mut postings = Vec::with_capacity(counts.len());
        for (i, (lemma, per_doc)) in counts.into_iter().enumerate() {
            vocabulary.insert(lemma.to_string(), i as u32);
            lemmas.push(lemma.to_string());
            lemma_freq.push(per_doc.values().map(|&c| c as u64).sum());
            postings.push(per_doc.into_iter().collect());
        }

        Self {
            documents,
            annotation,
            vocabulary,
            lemmas,
            lemma_freq,
            postings,
            token_count,
        }
    }

    pub fn documents(&self) -> impl ExactSizeIterator<Item = &Document> + '_ {
        self.documents.iter().map(|d| d.as_ref())
    }

    pub fn document(&self, index: usize) -> Option<&Document> {
        self.documents.get(index).map(|d| d.as_ref())
    }

    pub fn find(&self, id: &DocumentId) -> Option<(usize, &Document)> {
        self.documents
            .iter()
            .enumerate()
            .find(|(_, d)| &d.id == id)
            .map(|(i, d)| (i, d.as_ref()))
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn annotation(&self) -> Annotation {
        self.annotation
    }

    pub fn has_dependencies(&self) -> bool {
        self.annotation == Annotation::Dependency
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    /// Lemma to integer id; ids follow lexicographic lemma order.
    pub fn vocabulary(&self) -> &BTreeMap<String, u32> {
        &self.vocabulary
    }

    pub fn vocabulary_size(&self) -> usize {
        self.lemmas.len()
    }

    pub fn lemma_id(&self, lemma: &str) -> Option<u32> {
        self.vocabulary.get(lemma).copied()
    }

    pub fn lemma(&self, id: u32) -> &str {
        &self.lemmas[id as usize]
    }

    pub fn lemmas(&self) -> &[String] {
        &self.lemmas
    }

    /// Corpus-level frequency of a lemma (0 when absent).
    pub fn frequency(&self, lemma: &str) -> u64 {
        self.lemma_id(lemma)
            .map_or(0, |id| self.lemma_freq[id as usize])
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.lemma_freq
    }

    /// `(document index, count)` pairs for a lemma, ascending by document.
    pub fn postings(&self, lemma: &str) -> &[(u32, u32)] {
        self.lemma_id(lemma)
            .map_or(&[][..], |id| &self.postings[id as usize])
    }

    /// Number of documents containing the lemma.
    pub fn document_frequency(&self, id: u32) -> usize {
        self.postings[id as usize].len()
    }

    /// View over the documents matching `filter`. Token data is shared.
    pub fn subcorpus(&self, filter: &SubcorpusFilter) -> Corpus {
        let docs = self
            .documents
            .iter()
            .filter(|d| filter.matches(&d.id))
            .cloned()
            .collect();
        Corpus::from_shared(docs, self.annotation)
    }

    /// Documents rejected by `filter`; together with [`Corpus::subcorpus`]
    /// this partitions the corpus.
    pub fn complement(&self, filter: &SubcorpusFilter) -> Corpus {
        let docs = self
            .documents
            .iter()
            .filter(|d| !filter.matches(&d.id))
            .cloned()
            .collect();
        Corpus::from_shared(docs, self.annotation)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), CorpusError> {
        let container = CorpusContainerRef {
            format: CONTAINER_FORMAT,
            version: CONTAINER_VERSION,
            annotation: self.annotation,
            documents: self.documents().collect(),
        };
        serde_json::to_writer(writer, &container)?;
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("in-memory serialization");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Corpus, CorpusError> {
        let container: CorpusContainer = serde_json::from_reader(reader)?;
        if container.format != CONTAINER_FORMAT {
            return Err(CorpusError::Container(format!(
                "expected format {CONTAINER_FORMAT:?}, found {:?}",
                container.format
            )));
        }
        if container.version != CONTAINER_VERSION {
            return Err(CorpusError::Container(format!(
                "unsupported version {}",
                container.version
            )));
        }
        Ok(Corpus::new(container.documents, container.annotation))
    }

    pub fn load(path: impl Into<PathBuf>) -> Result<Corpus, CorpusError> {
        let path = path.into();
        let file = std::fs::File::open(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        Corpus::read_json(std::io::BufReader::new(file))
    }
}

const CONTAINER_FORMAT: &str = "metaphora-corpus";
const CONTAINER_VERSION: u32 = 1;

#[derive(Serialize)]
struct CorpusContainerRef<'a> {
    format: &'a str,
    version: u32,
    annotation: Annotation,
    documents: Vec<&'a Document>,
}

#[derive(Deserialize)]
struct CorpusContainer {
    format: String,
    version: u32,
    annotation: Annotation,
    documents: Vec<Document>,
}

pub(crate) fn check_unique_ids(docs: &[Document]) -> Result<(), CorpusError> {
    let mut seen = std::collections::BTreeSet::new();
    for d in docs {
        if !seen.insert(&d.id) {
            return Err(CorpusError::DuplicateDocument(d.id.clone()));
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::test_support::raw_corpus;
    use super::*;

    #[test]
    fn indexes_are_consistent() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "crisi crisi tsunami."),
            ("phase2_week10_may_04", "crisi ponte"),
        ]);
        assert_eq!(c.token_count(), 6);
        assert_eq!(c.frequency("crisi"), 3);
        assert_eq!(c.postings("crisi"), &[(0, 2), (1, 1)]);
        let total: u64 = c.frequencies().iter().sum();
        assert_eq!(total, c.token_count());
    }

    #[test]
    fn subcorpus_partitions() {
        let c = raw_corpus(&[
            ("phase1_week1_february_27", "a b c"),
            ("phase1_week2_march_03", "a b"),
            ("phase2_week10_may_04", "c d e f"),
        ]);
        let f: SubcorpusFilter = "phase=1".parse().unwrap();
        let a = c.subcorpus(&f);
        let b = c.complement(&f);
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 1);
        assert_eq!(a.token_count() + b.token_count(), c.token_count());
        assert!(Arc::ptr_eq(&a.documents[0], &c.documents[0]));

        let none = c.subcorpus(&"week=20-30".parse().unwrap());
        assert!(none.is_empty());
        assert_eq!(none.token_count(), 0);
    }

    #[test]
    fn json_round_trip_is_stable() {
        let c = raw_corpus(&[("phase1_week1_february_27b", "La crisi è uno tsunami.")]);
        let text = c.to_json_string();
        let back = Corpus::read_json(text.as_bytes()).unwrap();
        assert_eq!(back.to_json_string(), text);
        assert!(Corpus::read_json(r#"{"format":"x","version":1,"annotation":"raw","documents":[]}"#.as_bytes()).is_err());
    }

    #[test]
    fn sentences_group_tokens() {
        let c = raw_corpus(&[("phase1_week1_february_27", "Uno due. Tre quattro cinque.")]);
        let lens: Vec<usize> = c.document(0).unwrap().sentences().map(|s| s.len()).collect();
        assert_eq!(lens, vec![3, 4]);
    }
}
