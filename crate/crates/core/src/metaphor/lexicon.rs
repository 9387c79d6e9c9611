use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetaphorError;
use crate::corpus::normalize_lemma;

pub const NATURAL_DISASTER: &str = "NATURAL_DISASTER";
pub const BUILDING: &str = "BUILDING";
pub const MACHINE: &str = "MACHINE";
pub const LIVING_ORGANISM: &str = "LIVING_ORGANISM";

/// Trigger lemmas for one source domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lexicon {
    pub domain: String,
    pub entries: BTreeSet<String>,
}

/// A conceptual mapping a domain takes part in, e.g. ECONOMY AND SOCIETY ARE
/// MACHINES. `in_metanet` records whether the mapping is listed in MetaNet;
/// it is carried as metadata and not verified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub name: String,
    pub domain: String,
    #[serde(default)]
    pub in_metanet: bool,
}

/// Disjoint source-domain lexicons for one language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconPack {
    pub language: String,
    lexicons: Vec<Lexicon>,
    pub mappings: Vec<Mapping>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LexiconFile {
    Full {
        language: String,
        domains: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        mappings: Vec<Mapping>,
    },
    Plain(BTreeMap<String, Vec<String>>),
}

impl LexiconPack {
    /// Builds a pack, normalizing lemmas and upper-casing domain names.
    pub fn new(
        language: impl Into<String>,
        domains: BTreeMap<String, Vec<String>>,
        mappings: Vec<Mapping>,
    ) -> Result<Self, MetaphorError> {
        let mut lexicons: Vec<Lexicon> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut by_name: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (domain, lemmas) in domains {
            let name = domain.trim().to_uppercase();
            if name.is_empty() {
                return Err(MetaphorError::MalformedLexicon("empty domain name".into()));
            }
            let entries: BTreeSet<String> =
                lemmas.iter().map(|l| normalize_lemma(l.trim())).filter(|l| !l.is_empty()).collect();
            if entries.is_empty() {
                return Err(MetaphorError::MalformedLexicon(format!("domain {name} has no entries")));
            }
            if by_name.insert(name.clone(), entries).is_some() {
                return Err(MetaphorError::MalformedLexicon(format!("domain {name} listed twice")));
            }
        }
        for (i, (domain, entries)) in by_name.into_iter().enumerate() {
            for lemma in &entries {
                if let Some(&other) = index.get(lemma) {
                    return Err(MetaphorError::OverlappingDomains {
                        lemma: lemma.clone(),
                        first: lexicons[other].domain.clone(),
                        second: domain,
                    });
                }
                index.insert(lemma.clone(), i);
            }
            lexicons.push(Lexicon { domain, entries });
        }
        for m in &mappings {
            if !lexicons.iter().any(|l| l.domain == m.domain.to_uppercase()) {
                return Err(MetaphorError::MalformedLexicon(format!(
                    "mapping {:?} names unknown domain {}",
                    m.name, m.domain
                )));
            }
        }
        let mappings = mappings
            .into_iter()
            .map(|m| Mapping { domain: m.domain.to_uppercase(), ..m })
            .collect();
        Ok(Self { language: language.into(), lexicons, mappings, index })
    }

    /// Italian pack: the four source domains and their mappings. War imagery
    /// is deliberately absent; add it through a lexicon file if needed.
    pub fn default_pack() -> Self {
        let domains = BTreeMap::from([
            (NATURAL_DISASTER.to_string(), words(&["tsunami", "crollo", "macerie"])),
            (BUILDING.to_string(), words(&["fondamenta", "pilastri", "ricostruire", "edificare"])),
            (MACHINE.to_string(), words(&["motore", "carburante", "congegni", "riavviare", "ripartire"])),
            (
                LIVING_ORGANISM.to_string(),
                words(&["malato", "ferita", "cicatrici", "coma", "ibernazione", "infettare", "partorire"]),
            ),
        ]);
        let mapping = |name: &str, domain: &str| Mapping {
            name: name.to_string(),
            domain: domain.to_string(),
            in_metanet: true,
        };
        let mappings = vec![
            mapping("HEALTH CRISES ARE NATURAL DISASTERS", NATURAL_DISASTER),
            mapping("SOCIOECONOMIC CRISES ARE NATURAL DISASTERS", NATURAL_DISASTER),
            mapping("ECONOMY AND SOCIETY ARE BUILDINGS", BUILDING),
            mapping("ECONOMY AND SOCIETY ARE MACHINES", MACHINE),
            mapping("ECONOMY AND SOCIETY ARE PATIENTS", LIVING_ORGANISM),
        ];
        Self::new("it", domains, mappings).expect("default pack is well formed")
    }

    /// Parses `{"DOMAIN": ["lemma", ...]}` or
    /// `{"language": "it", "domains": {...}, "mappings": [...]}`.
    pub fn from_json(text: &str) -> Result<Self, MetaphorError> {
        let file: LexiconFile =
            serde_json::from_str(text).map_err(|e| MetaphorError::MalformedLexicon(e.to_string()))?;
        match file {
            LexiconFile::Full { language, domains, mappings } => Self::new(language, domains, mappings),
            LexiconFile::Plain(domains) => Self::new("it", domains, Vec::new()),
        }
    }

    pub fn lexicons(&self) -> &[Lexicon] {
        &self.lexicons
    }

    pub fn domains(&self) -> impl Iterator<Item = &str> + '_ {
        self.lexicons.iter().map(|l| l.domain.as_str())
    }

    pub fn domain_of(&self, lemma: &str) -> Option<&str> {
        self.index.get(lemma).map(|&i| self.lexicons[i].domain.as_str())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            language: &'a str,
            domains: BTreeMap<&'a str, &'a BTreeSet<String>>,
            mappings: &'a [Mapping],
        }
        let out = Out {
            language: &self.language,
            domains: self.lexicons.iter().map(|l| (l.domain.as_str(), &l.entries)).collect(),
            mappings: &self.mappings,
        };
        serde_json::to_string_pretty(&out).expect("serializable")
    }
}

fn words(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn load_lexicons(path: &Path) -> Result<LexiconPack, MetaphorError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MetaphorError::MalformedLexicon(format!("{}: {e}", path.display())))?;
    LexiconPack::from_json(&text)
}
