use std::path::{Path, PathBuf};

use super::ingest::{normalize_lemma, read_utf8, resolve_metadata};
use super::{
    check_unique_ids, parse_document_id, Annotation, Corpus, CorpusError, Document, DocumentId,
    Manifest, Token, Upos,
};

struct PendingDoc {
    raw_id: Option<String>,
    tokens: Vec<Token>,
    sent: u32,
}

impl PendingDoc {
    fn new(raw_id: Option<String>) -> Self {
        Self { raw_id, tokens: Vec::new(), sent: 0 }
    }
}

/// Parses CoNLL-U text into documents.
///
/// Multiword-token ranges (`1-2`) and empty nodes (`8.1`) are skipped; their
/// component words are kept. `# newdoc` comments start a new document; a
/// `# newdoc id = ...` value is resolved through `resolve_id`. Text before
/// any `newdoc` marker belongs to a document resolved with `None`.
pub fn parse_conllu(
    text: &str,
    file: &str,
    mut resolve_id: impl FnMut(Option<&str>) -> Result<(DocumentId, Option<String>), CorpusError>,
) -> Result<Vec<Document>, CorpusError> {
    let err = |line: usize, message: String| CorpusError::ParseError {
        file: file.to_string(),
        line,
        message,
    };

    let mut finished: Vec<PendingDoc> = Vec::new();
    let mut current = PendingDoc::new(None);
    let mut sentence: Vec<(Token, usize)> = Vec::new();
    let mut offset = 0u32;

    let flush_sentence =
        |doc: &mut PendingDoc, sentence: &mut Vec<(Token, usize)>| -> Result<(), CorpusError> {
            if sentence.is_empty() {
                return Ok(());
            }
            let n = sentence.len() as u32;
            for (tok, line) in sentence.iter() {
                if let Some(h) = tok.head {
                    if h > n {
                        return Err(err(*line, format!("HEAD {h} outside sentence of {n} words")));
                    }
                }
            }
            for (mut tok, _) in sentence.drain(..) {
                tok.sent = doc.sent;
                doc.tokens.push(tok);
            }
            doc.sent += 1;
            Ok(())
        };

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            flush_sentence(&mut current, &mut sentence)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("newdoc") {
                if !sentence.is_empty() {
                    return Err(err(lineno, "newdoc inside a sentence".into()));
                }
                let raw_id = rest
                    .trim()
                    .strip_prefix("id")
                    .and_then(|r| r.trim_start().strip_prefix('='))
                    .map(|r| r.trim().to_string())
                    .filter(|r| !r.is_empty());
                let prev = std::mem::replace(&mut current, PendingDoc::new(raw_id));
                if !prev.tokens.is_empty() || prev.raw_id.is_some() {
                    finished.push(prev);
                }
                offset = 0;
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(lineno, format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: u32 = id
            .parse()
            .map_err(|_| err(lineno, format!("invalid ID {id:?}")))?;
        if index as usize != sentence.len() + 1 {
            return Err(err(
                lineno,
                format!("ID {index} out of sequence, expected {}", sentence.len() + 1),
            ));
        }
        let form = cols[1];
        if form.is_empty() {
            return Err(err(lineno, "empty FORM".into()));
        }
        let lemma = match cols[2] {
            "_" | "" if form != "_" => normalize_lemma(form),
            l => normalize_lemma(l),
        };
        let pos = cols[3]
            .parse::<Upos>()
            .map_err(|_| err(lineno, format!("unknown UPOS {:?}", cols[3])))?;
        let head = match cols[6] {
            "_" => None,
            h => Some(
                h.parse::<u32>()
                    .map_err(|_| err(lineno, format!("invalid HEAD {h:?}")))?,
            ),
        };
        let deprel = match cols[7] {
            "_" | "" => None,
            d => Some(d.to_string()),
        };
        sentence.push((
            Token {
                surface: form.to_string(),
                lemma,
                pos,
                index,
                head,
                deprel,
                sent: 0,
                offset,
            },
            lineno,
        ));
        offset += 1;
    }
    flush_sentence(&mut current, &mut sentence)?;
    finished.push(current);

    let mut docs = Vec::new();
    for pending in finished {
        if pending.tokens.is_empty() {
            if pending.raw_id.is_some() {
                let name = pending.raw_id.unwrap_or_default();
                return Err(CorpusError::EmptyDocument(format!("{file}#{name}")));
            }
            continue;
        }
        let (id, source) = resolve_id(pending.raw_id.as_deref())?;
        docs.push(Document { id, source, tokens: pending.tokens });
    }
    if docs.is_empty() {
        return Err(CorpusError::EmptyDocument(file.to_string()));
    }
    Ok(docs)
}

/// Ingests CoNLL-U files. Each `# newdoc id = ...` value must be a document
/// id or a manifest key; files without newdoc markers are one document
/// identified by manifest row or filename.
pub fn ingest_conllu<P: AsRef<Path>>(
    paths: &[P],
    manifest: Option<&Manifest>,
) -> Result<Corpus, CorpusError> {
    let mut sorted: Vec<PathBuf> = paths.iter().map(|p| p.as_ref().to_path_buf()).collect();
    sorted.sort();

    let mut documents = Vec::new();
    for path in &sorted {
        let text = read_utf8(path)?;
        let file = path.display().to_string();
        let docs = parse_conllu(&text, &file, |raw_id| match raw_id {
            Some(raw) => {
                if let Some(row) = manifest.and_then(|m| m.lookup(raw)) {
                    return Ok((parse_document_id(&row.id)?, row.source.clone()));
                }
                parse_document_id(raw).map(|id| (id, None)).map_err(|e| match e {
                    CorpusError::MalformedId(_) => CorpusError::MissingMetadata(format!("{file}#{raw}")),
                    other => other,
                })
            }
            None => resolve_metadata(path, manifest),
        })?;
        documents.extend(docs);
    }
    corpus_from_parsed(documents)
}

/// Builds a corpus from CoNLL-U text held in memory. Every document must
/// open with `# newdoc id = <document id>`.
pub fn conllu_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let docs = parse_conllu(text, "<memory>", |raw_id| match raw_id {
        Some(raw) => Ok((parse_document_id(raw)?, None)),
        None => Err(CorpusError::MissingMetadata("<memory>: text before # newdoc id".into())),
    })?;
    corpus_from_parsed(docs)
}

fn corpus_from_parsed(documents: Vec<Document>) -> Result<Corpus, CorpusError> {
    check_unique_ids(&documents)?;
    let annotation = if documents
        .iter()
        .flat_map(|d| &d.tokens)
        .any(|t| t.deprel.is_some())
    {
        Annotation::Dependency
    } else {
        Annotation::Raw
    };
    Ok(Corpus::new(documents, annotation))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TSUNAMI: &str = "# newdoc id = phase1_week3_march_10\n\
# sent_id = 1\n\
# text = la crisi è uno tsunami\n\
1\tla\til\tDET\t_\t_\t2\tdet\t_\t_\n\
2\tcrisi\tcrisi\tNOUN\t_\t_\t5\tnsubj\t_\t_\n\
3\tè\tessere\tAUX\t_\t_\t5\tcop\t_\t_\n\
4\tuno\tuno\tDET\t_\t_\t5\tdet\t_\t_\n\
5\ttsunami\ttsunami\tNOUN\t_\t_\t0\troot\t_\t_\n\
\n";

    fn fixed_id(raw: Option<&str>) -> Result<(DocumentId, Option<String>), CorpusError> {
        let raw = raw.unwrap_or("phase1_week1_february_27");
        Ok((parse_document_id(raw)?, None))
    }

    #[test]
    fn parses_single_sentence() {
        let docs = parse_conllu(TSUNAMI, "t.conllu", fixed_id).unwrap();
        assert_eq!(docs.len(), 1);
        let toks = &docs[0].tokens;
        assert_eq!(docs[0].id.to_string(), "phase1_week3_march_10");
        assert_eq!(toks.len(), 5);
        let lemmas: Vec<&str> = toks.iter().map(|t| t.lemma.as_str()).collect();
        assert_eq!(lemmas, vec!["il", "crisi", "essere", "uno", "tsunami"]);
        let heads: Vec<Option<u32>> = toks.iter().map(|t| t.head).collect();
        assert_eq!(heads, vec![Some(2), Some(5), Some(5), Some(5), Some(0)]);
        assert_eq!(toks[1].pos, Upos::Noun);
        assert_eq!(toks[1].deprel.as_deref(), Some("nsubj"));
        assert_eq!(toks[4].index, 5);
        assert!(toks.iter().all(|t| t.sent == 0));
    }

    #[test]
    fn nine_columns_is_a_parse_error() {
        let text = "1\tla\til\tDET\t_\t_\t0\troot\t_\n";
        match parse_conllu(text, "bad.conllu", fixed_id) {
            Err(CorpusError::ParseError { line, file, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(file, "bad.conllu");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn multiword_ranges_and_empty_nodes_skipped() {
        let text = "1-2\tdella\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdi\tdi\tADP\t_\t_\t3\tcase\t_\t_\n\
2\tla\til\tDET\t_\t_\t3\tdet\t_\t_\n\
2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\
3\tripresa\tripresa\tNOUN\t_\t_\t0\troot\t_\t_\n";
        let docs = parse_conllu(text, "m.conllu", fixed_id).unwrap();
        let forms: Vec<&str> = docs[0].tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(forms, vec!["di", "la", "ripresa"]);
    }

    #[test]
    fn head_out_of_range() {
        let text = "1\tcrisi\tcrisi\tNOUN\t_\t_\t4\tnsubj\t_\t_\n";
        assert!(matches!(
            parse_conllu(text, "h.conllu", fixed_id),
            Err(CorpusError::ParseError { line: 1, .. })
        ));
    }

    #[test]
    fn ids_must_be_sequential() {
        let text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n3\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(text, "s.conllu", fixed_id),
            Err(CorpusError::ParseError { line: 2, .. })
        ));
    }

    #[test]
    fn newdoc_splits_documents_and_resets_offsets() {
        let text = format!(
            "{TSUNAMI}# newdoc id = phase2_week10_may_04\n1\tmotore\tmotore\tNOUN\t_\t_\t0\troot\t_\t_\n\n1\tripartire\tripartire\tVERB\t_\t_\t0\troot\t_\t_\n"
        );
        let docs = parse_conllu(&text, "two.conllu", fixed_id).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].tokens.len(), 2);
        assert_eq!(docs[1].tokens[0].offset, 0);
        assert_eq!(docs[1].tokens[1].offset, 1);
        assert_eq!(docs[1].tokens[1].sent, 1);
    }

    #[test]
    fn unresolvable_newdoc_is_missing_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.conllu");
        std::fs::write(&p, "# newdoc id = articolo-7\n1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n").unwrap();
        assert!(matches!(ingest_conllu(&[p], None), Err(CorpusError::MissingMetadata(_))));
    }

    #[test]
    fn ingest_marks_dependency_annotation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("phase1_week1_february_27.conllu");
        std::fs::write(&p, TSUNAMI).unwrap();
        let c = ingest_conllu(&[p], None).unwrap();
        assert!(c.has_dependencies());
        assert_eq!(c.token_count(), 5);
    }
}
