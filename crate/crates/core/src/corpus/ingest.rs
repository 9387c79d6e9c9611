use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{
    check_unique_ids, parse_document_id, tokenize, Annotation, Corpus, CorpusError, Document,
    DocumentId, Token, Upos,
};

/// One row of a `file,id,source` manifest.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub id: String,
    #[serde(default)]
    pub source: Option<String>,
}

/// Document metadata table keyed by file name.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    rows: BTreeMap<String, ManifestRow>,
}

impl Manifest {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, CorpusError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| CorpusError::Manifest(e.to_string()))?
            .clone();
        for required in ["file", "id"] {
            if !headers.iter().any(|h| h == required) {
                return Err(CorpusError::Manifest(format!("missing column {required:?}")));
            }
        }
        let mut rows = BTreeMap::new();
        for row in rdr.deserialize::<ManifestRow>() {
            let mut row = row.map_err(|e| CorpusError::Manifest(e.to_string()))?;
            if row.source.as_deref() == Some("") {
                row.source = None;
            }
            rows.insert(row.file.clone(), row);
        }
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_rows(rows: impl IntoIterator<Item = ManifestRow>) -> Self {
        Self {
            rows: rows.into_iter().map(|r| (r.file.clone(), r)).collect(),
        }
    }

    /// Looks a key up as given, then by file name.
    pub fn lookup(&self, key: &str) -> Option<&ManifestRow> {
        self.rows.get(key).or_else(|| {
            Path::new(key)
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| self.rows.get(n))
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Resolves id and source for a file: the manifest row wins over the
/// filename stem.
pub(crate) fn resolve_metadata(
    path: &Path,
    manifest: Option<&Manifest>,
) -> Result<(DocumentId, Option<String>), CorpusError> {
    let key = path.to_string_lossy();
    if let Some(row) = manifest.and_then(|m| m.lookup(&key)) {
        return Ok((parse_document_id(&row.id)?, row.source.clone()));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    parse_document_id(stem)
        .map(|id| (id, None))
        .map_err(|_| CorpusError::MissingMetadata(key.into_owned()))
}

pub(crate) fn read_utf8(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lowercases and folds typographic apostrophes to ASCII.
pub fn normalize_lemma(s: &str) -> String {
    s.to_lowercase().replace('\u{2019}', "'")
}

pub(crate) fn document_from_text(id: DocumentId, source: Option<String>, text: &str) -> Document {
    let mut index_in_sent = 0u32;
    let mut last_sent = u32::MAX;
    let tokens = tokenize(text)
        .into_iter()
        .enumerate()
        .map(|(offset, raw)| {
            if raw.sent != last_sent {
                last_sent = raw.sent;
                index_in_sent = 0;
            }
            index_in_sent += 1;
            Token {
                surface: raw.surface.to_string(),
                lemma: normalize_lemma(raw.surface),
                pos: Upos::Unknown,
                index: index_in_sent,
                head: None,
                deprel: None,
                sent: raw.sent,
                offset: offset as u32,
            }
        })
        .collect();
    Document { id, source, tokens }
}

/// Ingests UTF-8 text files. Lemmas are lowercased surfaces; no POS or
/// dependency annotation is produced. Paths are processed in sorted order.
pub fn ingest_raw<P: AsRef<Path>>(
    paths: &[P],
    manifest: Option<&Manifest>,
) -> Result<Corpus, CorpusError> {
    let mut sorted: Vec<PathBuf> = paths.iter().map(|p| p.as_ref().to_path_buf()).collect();
    sorted.sort();

    let mut documents = Vec::with_capacity(sorted.len());
    for path in &sorted {
        let (id, source) = resolve_metadata(path, manifest)?;
        let text = read_utf8(path)?;
        let doc = document_from_text(id, source, &text);
        if doc.is_empty() {
            return Err(CorpusError::EmptyDocument(path.display().to_string()));
        }
        documents.push(doc);
    }
    check_unique_ids(&documents)?;
    Ok(Corpus::new(documents, Annotation::Raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SubcorpusFilter;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn ingests_filename_ids() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "phase1_week1_february_27.txt", "La crisi è uno tsunami.");
        let b = write(dir.path(), "phase2_week10_may_04.txt", "Il motore della ripresa.");
        let c = ingest_raw(&[b, a], None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.document(0).unwrap().id.to_string(), "phase1_week1_february_27");
        let doc = c.document(0).unwrap();
        assert_eq!(doc.tokens[0].surface, "La");
        assert_eq!(doc.tokens[0].lemma, "la");
        assert!(doc.tokens.iter().all(|t| t.pos == Upos::Unknown && t.head.is_none()));
    }

    #[test]
    fn missing_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "articolo.txt", "testo");
        assert!(matches!(ingest_raw(&[a], None), Err(CorpusError::MissingMetadata(_))));
    }

    #[test]
    fn manifest_overrides_filename() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "phase1_week1_february_27.txt", "testo");
        let b = write(dir.path(), "articolo.txt", "altro testo");
        let manifest = Manifest::from_reader(
            "file,id,source\nphase1_week1_february_27.txt,phase2_week11_may_12,Il Mattino\narticolo.txt,phase1_week2_march_03b,\n"
                .as_bytes(),
        )
        .unwrap();
        let c = ingest_raw(&[a, b], Some(&manifest)).unwrap();
        let ids: Vec<String> = c.documents().map(|d| d.id.to_string()).collect();
        assert_eq!(ids, vec!["phase1_week2_march_03b", "phase2_week11_may_12"]);
        assert_eq!(c.document(1).unwrap().source.as_deref(), Some("Il Mattino"));
        assert_eq!(c.document(0).unwrap().source, None);
    }

    #[test]
    fn manifest_requires_columns() {
        assert!(Manifest::from_reader("name,id\n".as_bytes()).is_err());
    }

    #[test]
    fn empty_document_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "phase1_week1_february_27.txt", "  \n ");
        assert!(matches!(ingest_raw(&[a], None), Err(CorpusError::EmptyDocument(_))));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "phase1_week1_february_27.txt", "uno");
        let b = write(dir.path(), "phase1_week1_february_27.md", "due");
        assert!(matches!(ingest_raw(&[a, b], None), Err(CorpusError::DuplicateDocument(_))));
    }

    #[test]
    fn phase_split_of_511_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        let mut n = 0;
        for (phase, count, weeks) in [(1u8, 300usize, 1..=9u32), (2, 211, 10..=14)] {
            let weeks: Vec<u32> = weeks.collect();
            for i in 0..count {
                let week = weeks[i % weeks.len()];
                let day = 1 + (i / weeks.len()) % 28;
                let seq = (b'a' + (i / (weeks.len() * 28)) as u8) as char;
                let name = format!("phase{phase}_week{week}_march_{day:02}{seq}.txt");
                paths.push(write(dir.path(), &name, "parola"));
                n += 1;
            }
        }
        assert_eq!(n, 511);
        let c = ingest_raw(&paths, None).unwrap();
        assert_eq!(c.len(), 511);
        let phase1: SubcorpusFilter = "phase=1".parse().unwrap();
        assert_eq!(c.subcorpus(&phase1).len(), 300);
        assert_eq!(c.complement(&phase1).len(), 211);
    }

    #[test]
    fn ingestion_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "phase1_week1_february_27.txt", "Prima frase. Seconda frase, con 3 parole.");
        let b = write(dir.path(), "phase2_week10_may_04.txt", "L'economia riparte.");
        let one = ingest_raw(&[a.clone(), b.clone()], None).unwrap().to_json_string();
        let two = ingest_raw(&[b, a], None).unwrap().to_json_string();
        assert_eq!(one, two);
    }
}
