use std::collections::BTreeSet;
use std::path::Path;

use super::CorpusError;

const DEFAULT_STOPLIST: &str = include_str!("../../data/stopwords-it.txt");

/// Parses a one-lemma-per-line list. Blank lines and `#` comments are
/// ignored; entries are lowercased.
pub fn parse_stoplist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase().replace('\u{2019}', "'"))
        .collect()
}

/// Italian function words plus `coronavirus` and `covid`.
pub fn default_stoplist() -> BTreeSet<String> {
    parse_stoplist(DEFAULT_STOPLIST)
}

pub fn load_stoplist(path: &Path) -> Result<BTreeSet<String>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_stoplist(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_contains_domain_terms() {
        let s = default_stoplist();
        assert!(s.contains("coronavirus"));
        assert!(s.contains("covid"));
        assert!(s.contains("il"));
        assert!(s.contains("l'"));
        assert!(!s.contains("tsunami"));
    }

    #[test]
    fn parse_skips_comments() {
        let s = parse_stoplist("# header\nIl\n\n  la \n");
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec!["il", "la"]);
    }
}
