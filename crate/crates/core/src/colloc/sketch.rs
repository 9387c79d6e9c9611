use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::relations::{collocations, CollocConfig, Collocation, Relation};
use super::CollocError;
use crate::corpus::{normalize_lemma, Corpus};

#[derive(Debug, Clone, PartialEq)]
pub struct SketchOptions {
    pub relations: Vec<Relation>,
    pub max_per_relation: usize,
    /// Drops collocates scoring below this after truncation.
    pub min_score: Option<f64>,
    pub min_pair: u64,
    pub config: CollocConfig,
}

impl Default for SketchOptions {
    fn default() -> Self {
        Self {
            relations: Relation::DEPENDENCY.to_vec(),
            max_per_relation: 10,
            min_score: None,
            min_pair: 1,
            config: CollocConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSketch {
    pub head: String,
    pub f_head: u64,
    pub relations: BTreeMap<Relation, Vec<Collocation>>,
}

/// Top collocates of `head` for each requested relation.
pub fn word_sketch(view: &Corpus, head: &str, opts: &SketchOptions) -> Result<WordSketch, CollocError> {
    let head = normalize_lemma(head.trim());
    let mut relations = BTreeMap::new();
    for &relation in &opts.relations {
        let mut rows = collocations(view, &head, relation, opts.min_pair, &opts.config)?;
        rows.truncate(opts.max_per_relation);
        if let Some(min) = opts.min_score {
            rows.retain(|c| c.logdice >= min);
        }
        relations.insert(relation, rows);
    }
    Ok(WordSketch { f_head: view.frequency(&head), head, relations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SketchDiffRow {
    pub head: String,
    pub relation: Relation,
    pub collocate: String,
    /// logDice in the first view; `None` when the pair does not occur there.
    pub score_a: Option<f64>,
    pub score_b: Option<f64>,
    /// `score_a - score_b`, present only when both sides are.
    pub delta: Option<f64>,
}

impl SketchDiffRow {
    pub fn only_in_a(&self) -> bool {
        self.score_a.is_some() && self.score_b.is_none()
    }

    pub fn only_in_b(&self) -> bool {
        self.score_b.is_some() && self.score_a.is_none()
    }
}

/// Contrasts the collocates of `head` between two views. Every collocate
/// found in either view is listed, without truncation, ordered by relation
/// then collocate. `max_per_relation` and `min_score` are not applied.
pub fn sketch_diff(
    a: &Corpus,
    b: &Corpus,
    head: &str,
    opts: &SketchOptions,
) -> Result<Vec<SketchDiffRow>, CollocError> {
    if a.token_count() == 0 || b.token_count() == 0 {
        return Err(CollocError::EmptySubcorpus);
    }
    let head = normalize_lemma(head.trim());
    let mut out = Vec::new();
    for &relation in &opts.relations {
        let mut merged: BTreeMap<String, (Option<f64>, Option<f64>)> = BTreeMap::new();
        for c in collocations(a, &head, relation, opts.min_pair, &opts.config)? {
            merged.entry(c.collocate).or_default().0 = Some(c.logdice);
        }
        for c in collocations(b, &head, relation, opts.min_pair, &opts.config)? {
            merged.entry(c.collocate).or_default().1 = Some(c.logdice);
        }
        out.extend(merged.into_iter().map(|(collocate, (score_a, score_b))| SketchDiffRow {
            head: head.clone(),
            relation,
            collocate,
            score_a,
            score_b,
            delta: score_a.zip(score_b).map(|(x, y)| x - y),
        }));
    }
    out.sort_by(|x, y| x.relation.cmp(&y.relation).then_with(|| x.collocate.cmp(&y.collocate)));
    Ok(out)
}

/// CSV with header `head,relation,collocate,f_head,f_coll,f_pair,logdice`.
pub fn write_collocations_csv<W: Write>(rows: &[Collocation], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["head", "relation", "collocate", "f_head", "f_coll", "f_pair", "logdice"])?;
    for c in rows {
        w.write_record([
            c.head.clone(),
            c.relation.to_string(),
            c.collocate.clone(),
            c.f_head.to_string(),
            c.f_coll.to_string(),
            c.f_pair.to_string(),
            format!("{:.6}", c.logdice),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SketchNode {
    pub relation: Relation,
    pub collocate: String,
    pub score: f64,
    pub f_pair: u64,
    /// Score relative to the logDice maximum; drives label size.
    pub size: f64,
}

/// Sketch laid out as graph nodes around the head, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SketchGraph {
    pub head: String,
    pub min_score: Option<f64>,
    pub nodes: Vec<SketchNode>,
}

impl SketchGraph {
    pub fn from_sketch(sketch: &WordSketch, min_score: Option<f64>) -> Self {
        let nodes = sketch
            .relations
            .iter()
            .flat_map(|(&relation, rows)| rows.iter().map(move |c| (relation, c)))
            .filter(|(_, c)| min_score.is_none_or(|m| c.logdice >= m))
            .map(|(relation, c)| SketchNode {
                relation,
                collocate: c.collocate.clone(),
                score: c.logdice,
                f_pair: c.f_pair,
                size: c.logdice / 14.0,
            })
            .collect();
        SketchGraph { head: sketch.head.clone(), min_score, nodes }
    }
}
