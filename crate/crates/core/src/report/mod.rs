//! Figure-data files for a fitted model and corpus, and the run manifest
//! that records how they were produced.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::colloc::{word_sketch, CollocError, SketchGraph, SketchOptions};
use crate::corpus::Corpus;
use crate::topics::{
    estimate_effect, prevalence_by, top_words, write_effects_csv, Covariate, TopicError, TopicModel, Weighting,
};

mod svg;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no fitted model available; run `fit` first")]
    MissingModel,
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Colloc(#[from] CollocError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub top_words: usize,
    /// Heads to draw sketch graphs for.
    pub sketch_heads: Vec<String>,
    pub sketch: SketchOptions,
    /// Nodes scoring below this are left out of sketch graphs.
    pub min_score: Option<f64>,
    pub svg: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            top_words: 10,
            sketch_heads: Vec::new(),
            sketch: SketchOptions::default(),
            min_score: Some(9.0),
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWords {
    pub topic: usize,
    pub label: String,
    pub words: Vec<WeightedLemma>,
    pub frex: Vec<WeightedLemma>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedLemma {
    pub lemma: String,
    pub weight: f64,
}

/// One row of the per-week prevalence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekEstimate {
    pub week: u32,
    /// 1-based.
    pub topic: usize,
    pub documents: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// First week in which topic `b` (1-based) is estimated above topic `a`.
pub fn crossover_week(rows: &[WeekEstimate], a: usize, b: usize) -> Option<u32> {
    let mut by_week: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for r in rows {
        let e = by_week.entry(r.week).or_insert((f64::NAN, f64::NAN));
        if r.topic == a {
            e.0 = r.mean;
        } else if r.topic == b {
            e.1 = r.mean;
        }
    }
    by_week.into_iter().find(|(_, (ma, mb))| mb > ma).map(|(w, _)| w)
}

pub fn topic_words(model: &TopicModel, n: usize) -> Result<Vec<TopicWords>, TopicError> {
    let weighted = |t, weighting| -> Result<Vec<WeightedLemma>, TopicError> {
        Ok(top_words(model, t, n, weighting)?
            .into_iter()
            .map(|w| WeightedLemma { lemma: w.lemma, weight: w.weight })
            .collect())
    };
    (0..model.k())
        .map(|t| {
            Ok(TopicWords {
                topic: t + 1,
                label: model.label(t),
                words: weighted(t, Weighting::Probability)?,
                frex: weighted(t, Weighting::Frex)?,
            })
        })
        .collect()
}

pub fn week_estimates(model: &TopicModel, corpus: &Corpus) -> Result<Vec<WeekEstimate>, TopicError> {
    let table = prevalence_by(model, corpus, Covariate::Week)?;
    let mut rows = Vec::new();
    for g in &table.groups {
        for t in 0..model.k() {
            let (lower, upper) = g.band(t);
            rows.push(WeekEstimate {
                week: g.level,
                topic: t + 1,
                documents: g.documents,
                mean: g.mean[t],
                lower,
                upper,
            });
        }
    }
    Ok(rows)
}

/// Writes the figure-data files into `dir` and returns their names, sorted:
///
/// - `topic_words.json`: top words per topic by probability and FREX
/// - `topic_proportions.csv`: corpus-wide share of each topic
/// - `phase_effects.csv`, `phase_effects.json`: phase contrast per topic,
///   when the corpus spans both phases
/// - `week_estimates.csv`: mean share per week with a 95% band
/// - `sketch_<head>.json`: sketch graph per requested head
/// - `topic_proportions.svg`, `week_estimates.svg` when `svg` is set
pub fn emit_report(
    model: Option<&TopicModel>,
    corpus: &Corpus,
    dir: &Path,
    opts: &ReportOptions,
) -> Result<Vec<String>, ReportError> {
    let model = model.ok_or(ReportError::MissingModel)?;
    model.align(corpus)?;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, bytes: Vec<u8>| -> io::Result<()> {
        fs::write(dir.join(name), bytes)?;
        written.push(name.to_string());
        Ok(())
    };

    emit("topic_words.json", json_bytes(&topic_words(model, opts.top_words)?)?)?;

    let proportions = model.proportions();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["topic", "label", "proportion"])?;
    for (t, p) in proportions.iter().enumerate() {
        w.write_record([(t + 1).to_string(), model.label(t), format!("{p:.6}")])?;
    }
    emit("topic_proportions.csv", csv_bytes(w)?)?;

    match estimate_effect(model, corpus, Covariate::Phase) {
        Ok(effects) => {
            let mut buf = Vec::new();
            write_effects_csv(&effects, &mut buf)?;
            emit("phase_effects.csv", buf)?;
            emit("phase_effects.json", json_bytes(&effects)?)?;
        }
        Err(TopicError::DegenerateDesign(why)) => log::warn!("skipping phase effects: {why}"),
        Err(e) => return Err(e.into()),
    }

    let weeks = week_estimates(model, corpus)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["week", "topic", "documents", "mean", "lower", "upper"])?;
    for r in &weeks {
        w.write_record([
            r.week.to_string(),
            r.topic.to_string(),
            r.documents.to_string(),
            format!("{:.6}", r.mean),
            format!("{:.6}", r.lower),
            format!("{:.6}", r.upper),
        ])?;
    }
    emit("week_estimates.csv", csv_bytes(w)?)?;

    for head in &opts.sketch_heads {
        let sketch = word_sketch(corpus, head, &opts.sketch)?;
        let graph = SketchGraph::from_sketch(&sketch, opts.min_score);
        emit(&format!("sketch_{}.json", file_stem(&sketch.head)), json_bytes(&graph)?)?;
    }

    if opts.svg {
        let labels: Vec<String> = (0..model.k()).map(|t| model.label(t)).collect();
        emit("topic_proportions.svg", svg::bars(&labels, &proportions).into_bytes())?;
        emit("week_estimates.svg", svg::week_lines(&labels, &weeks).into_bytes())?;
    }

    written.sort();
    Ok(written)
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, ReportError> {
    w.into_inner().map_err(|e| ReportError::Io(e.into_error()))
}

/// Lemma made safe for a file name.
fn file_stem(lemma: &str) -> String {
    lemma
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Hashes a file, or every file under a directory keyed by relative path.
pub fn hash_path(path: &Path) -> io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if path.is_dir() {
        let mut files = Vec::new();
        collect_files(path, &mut files)?;
        for f in files {
            let rel = f.strip_prefix(path).unwrap_or(&f);
            let key = format!("{}/{}", path.display(), rel.display());
            out.insert(key, sha256_hex(&fs::read(&f)?));
        }
    } else {
        out.insert(path.display().to_string(), sha256_hex(&fs::read(path)?));
    }
    Ok(out)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Record of one command run: what went in, what came out, and the
/// settings that matter for reproducing it.
///
/// The timestamp comes from `SOURCE_DATE_EPOCH` (0 when unset) so that
/// identical runs write identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config_paths: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub settings: BTreeMap<String, String>,
    /// Input path to SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name (relative to the run directory) to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub module_versions: BTreeMap<String, String>,
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        let version = env!("CARGO_PKG_VERSION").to_string();
        let module_versions = ["corpus", "topics", "colloc", "concord", "metaphor", "report"]
            .iter()
            .map(|m| (m.to_string(), version.clone()))
            .collect();
        Self {
            command,
            config_paths: Vec::new(),
            seeds: BTreeMap::new(),
            settings: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            module_versions,
            timestamp: source_date_epoch(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> io::Result<()> {
        self.inputs.extend(hash_path(path)?);
        Ok(())
    }

    /// Hashes every file in `dir` except the manifest itself.
    pub fn record_outputs(&mut self, dir: &Path) -> io::Result<()> {
        let mut files = Vec::new();
        collect_files(dir, &mut files)?;
        self.outputs.clear();
        for f in files {
            let rel = f.strip_prefix(dir).unwrap_or(&f).to_string_lossy().replace('\\', "/");
            if rel != MANIFEST_FILE {
                self.outputs.insert(rel, sha256_hex(&fs::read(&f)?));
            }
        }
        Ok(())
    }

    /// Records outputs and writes `manifest.json` into `dir`.
    pub fn finish(&mut self, dir: &Path) -> Result<PathBuf, ReportError> {
        self.record_outputs(dir)?;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, json_bytes(self)?)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<(), ReportError> {
        writer.write_all(&json_bytes(self)?)?;
        Ok(())
    }
}

fn source_date_epoch() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}
