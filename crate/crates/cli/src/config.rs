use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Settings read from `--config`. Every key is optional and a flag given
/// on the command line wins over the file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub filter: Option<String>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub min_score: Option<f64>,
    pub window: Option<usize>,
    pub top_words: Option<usize>,
    pub lexicons: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.corpus, &mut cfg.model, &mut cfg.lexicons, &mut cfg.stoplist].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_files() {
        let cfg = Config::parse("seed = 7\nk = 3\nfilter = \"phase=1\"\n").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.k, Some(3));
        assert_eq!(cfg.filter.as_deref(), Some("phase=1"));
        assert_eq!(cfg.alpha, None);
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(Config::parse("sed = 7").is_err());
        assert!(Config::parse("k = \"three\"").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "corpus = \"data/corpus.json\"\nmodel = \"/abs/model.json\"\n").unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.corpus.unwrap(), dir.path().join("data/corpus.json"));
        assert_eq!(cfg.model.unwrap(), PathBuf::from("/abs/model.json"));
    }
}
