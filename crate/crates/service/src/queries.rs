//! Request parameters and the pure query functions behind each endpoint.
//! The CLI calls the same functions for its `--json` output.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use metaphora_core::colloc::{
    freq, sketch_diff, word_sketch, FreqPayload, Relation, SketchDiffRow, SketchOptions, WordSketch,
};
use metaphora_core::concord::{kwic, KwicOptions, KwicPage, KwicSort, Query};
use metaphora_core::corpus::normalize_lemma;
use metaphora_core::metaphor::{flag_candidates, topic_domain_matrix, MetaphorCandidate, Scope, TopicDomainMatrix};
use metaphora_core::report::{topic_words, WeightedLemma};
use metaphora_core::topics::{estimate_effect, prevalence_by, Covariate, EffectEstimate, PrevalenceTable};
use metaphora_core::{Corpus, SubcorpusFilter};

use crate::{ApiError, ServiceState};

pub const MAX_PAGE_SIZE: usize = 500;
pub const MAX_PER_RELATION: usize = 100;
pub const MAX_TOP_WORDS: usize = 100;

impl ServiceState {
    /// The corpus restricted by a `key=value[,key=value]` filter.
    pub fn view(&self, filter: Option<&str>) -> Result<Cow<'_, Corpus>, ApiError> {
        let filter: SubcorpusFilter = filter.unwrap_or("").parse()?;
        Ok(if filter.is_all() { Cow::Borrowed(&self.corpus) } else { Cow::Owned(self.corpus.subcorpus(&filter)) })
    }

    fn known_lemma(&self, lemma: &str) -> Result<String, ApiError> {
        let lemma = normalize_lemma(lemma.trim());
        if lemma.is_empty() {
            return Err(ApiError::bad_request("lemma must not be empty"));
        }
        if self.corpus.frequency(&lemma) == 0 {
            return Err(ApiError::not_found(format!("lemma {lemma:?} does not occur in the corpus")));
        }
        Ok(lemma)
    }

    fn model(&self) -> Result<&metaphora_core::TopicModel, ApiError> {
        self.model.as_ref().ok_or_else(|| ApiError::not_found("no topic model loaded"))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct KwicParams {
    pub q: String,
    pub filter: Option<String>,
    pub page: Option<usize>,
    pub page_size: Option<usize>,
    pub sort: Option<String>,
    pub width: Option<usize>,
}

pub fn kwic_query(state: &ServiceState, p: &KwicParams) -> Result<KwicPage, ApiError> {
    let query: Query = p.q.parse()?;
    let defaults = KwicOptions::default();
    let page_size = p.page_size.unwrap_or(defaults.page_size);
    if page_size > MAX_PAGE_SIZE {
        return Err(ApiError::bad_request(format!("page_size is capped at {MAX_PAGE_SIZE}")));
    }
    let opts = KwicOptions {
        context_width: p.width.unwrap_or(defaults.context_width).min(50),
        sort: p.sort.as_deref().map(str::parse::<KwicSort>).transpose()?.unwrap_or_default(),
        page: p.page.unwrap_or(1),
        page_size,
    };
    Ok(kwic(&*state.view(p.filter.as_deref())?, &query, &opts)?)
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FreqParams {
    pub lemma: String,
    pub filter: Option<String>,
}

pub fn freq_query(state: &ServiceState, p: &FreqParams) -> Result<FreqPayload, ApiError> {
    let lemma = state.known_lemma(&p.lemma)?;
    Ok(freq(&*state.view(p.filter.as_deref())?, &lemma)?.payload())
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SketchParams {
    pub lemma: String,
    pub filter: Option<String>,
    pub min_score: Option<f64>,
    pub max_per_rel: Option<usize>,
    /// Comma-separated relation names; the dependency relations by default.
    pub relation: Option<String>,
    pub window: Option<usize>,
}

fn relations(spec: Option<&str>) -> Result<Vec<Relation>, ApiError> {
    match spec {
        None | Some("") => Ok(Relation::DEPENDENCY.to_vec()),
        Some(s) => {
            let set: BTreeSet<Relation> =
                s.split(',').map(|r| r.trim().parse().map_err(ApiError::bad_request)).collect::<Result<_, _>>()?;
            Ok(set.into_iter().collect())
        }
    }
}

fn sketch_options(
    base: &SketchOptions,
    relation: Option<&str>,
    window: Option<usize>,
    max_per_rel: Option<usize>,
    min_score: Option<f64>,
) -> Result<SketchOptions, ApiError> {
    let mut opts = base.clone();
    opts.relations = relations(relation)?;
    if let Some(w) = window {
        opts.config.window = w.min(20);
    }
    if let Some(m) = max_per_rel {
        if m > MAX_PER_RELATION {
            return Err(ApiError::bad_request(format!("max_per_rel is capped at {MAX_PER_RELATION}")));
        }
        opts.max_per_relation = m;
    }
    if let Some(s) = min_score {
        if !s.is_finite() {
            return Err(ApiError::bad_request("min_score must be a number"));
        }
        opts.min_score = Some(s);
    }
    Ok(opts)
}

pub fn sketch_query(state: &ServiceState, p: &SketchParams) -> Result<WordSketch, ApiError> {
    let opts = sketch_options(&state.sketch, p.relation.as_deref(), p.window, p.max_per_rel, p.min_score)?;
    let lemma = state.known_lemma(&p.lemma)?;
    Ok(word_sketch(&*state.view(p.filter.as_deref())?, &lemma, &opts)?)
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SketchDiffParams {
    pub lemma: String,
    pub a: Option<String>,
    pub b: Option<String>,
    pub relation: Option<String>,
    pub window: Option<usize>,
}

pub fn sketchdiff_query(state: &ServiceState, p: &SketchDiffParams) -> Result<Vec<SketchDiffRow>, ApiError> {
    let opts = sketch_options(&state.sketch, p.relation.as_deref(), p.window, None, None)?;
    let lemma = state.known_lemma(&p.lemma)?;
    let a = state.view(p.a.as_deref())?;
    let b = state.view(p.b.as_deref())?;
    Ok(sketch_diff(&a, &b, &lemma, &opts)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupStats {
    pub value: String,
    pub documents: usize,
    pub tokens: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub documents: usize,
    pub tokens: u64,
    pub types: usize,
    pub dependencies: bool,
    pub phases: Vec<GroupStats>,
    pub weeks: Vec<GroupStats>,
    pub months: Vec<GroupStats>,
    pub topics: Option<usize>,
    pub domains: Vec<String>,
}

pub fn meta(state: &ServiceState) -> Meta {
    let mut phases: BTreeMap<u8, (usize, u64)> = BTreeMap::new();
    let mut weeks: BTreeMap<u32, (usize, u64)> = BTreeMap::new();
    let mut months: BTreeMap<u32, (String, usize, u64)> = BTreeMap::new();
    for d in state.corpus.documents() {
        let n = d.len() as u64;
        let p = phases.entry(d.id.phase()).or_default();
        p.0 += 1;
        p.1 += n;
        let w = weeks.entry(d.id.week()).or_default();
        w.0 += 1;
        w.1 += n;
        let m = months.entry(d.id.month().number()).or_insert_with(|| (d.id.month().to_string(), 0, 0));
        m.1 += 1;
        m.2 += n;
    }
    let stats = |value: String, (documents, tokens): (usize, u64)| GroupStats { value, documents, tokens };
    Meta {
        documents: state.corpus.len(),
        tokens: state.corpus.token_count(),
        types: state.corpus.vocabulary_size(),
        dependencies: state.corpus.has_dependencies(),
        phases: phases.into_iter().map(|(k, v)| stats(k.to_string(), v)).collect(),
        weeks: weeks.into_iter().map(|(k, v)| stats(k.to_string(), v)).collect(),
        months: months.into_values().map(|(name, d, t)| stats(name, (d, t))).collect(),
        topics: state.model.as_ref().map(|m| m.k()),
        domains: state.pack.domains().map(str::to_string).collect(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct TopicsParams {
    pub n: Option<usize>,
    /// 1-based; all topics when absent.
    pub topic: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicEntry {
    pub topic: usize,
    pub label: String,
    pub proportion: f64,
    pub words: Vec<WeightedLemma>,
    pub frex: Vec<WeightedLemma>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicsPayload {
    pub k: usize,
    pub topics: Vec<TopicEntry>,
}

pub fn topics_query(state: &ServiceState, p: &TopicsParams) -> Result<TopicsPayload, ApiError> {
    let model = state.model()?;
    let n = p.n.unwrap_or(10);
    if n > MAX_TOP_WORDS {
        return Err(ApiError::bad_request(format!("n is capped at {MAX_TOP_WORDS}")));
    }
    if let Some(t) = p.topic {
        if t == 0 || t > model.k() {
            return Err(ApiError::not_found(format!("topic {t} does not exist (1..={})", model.k())));
        }
    }
    let proportions = model.proportions();
    let topics = topic_words(model, n)?
        .into_iter()
        .filter(|t| p.topic.is_none_or(|want| want == t.topic))
        .map(|t| TopicEntry {
            proportion: proportions[t.topic - 1],
            topic: t.topic,
            label: t.label,
            words: t.words,
            frex: t.frex,
        })
        .collect();
    Ok(TopicsPayload { k: model.k(), topics })
}

fn covariate(s: Option<&str>) -> Result<Covariate, ApiError> {
    s.unwrap_or("phase").parse().map_err(ApiError::bad_request)
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct EffectsParams {
    pub covariate: Option<String>,
}

pub fn effects_query(state: &ServiceState, p: &EffectsParams) -> Result<Vec<EffectEstimate>, ApiError> {
    let covariate = covariate(p.covariate.as_deref())?;
    Ok(estimate_effect(state.model()?, &state.corpus, covariate)?)
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct PrevalenceParams {
    pub by: Option<String>,
}

pub fn prevalence_query(state: &ServiceState, p: &PrevalenceParams) -> Result<PrevalenceTable, ApiError> {
    let by = covariate(p.by.as_deref())?;
    Ok(prevalence_by(state.model()?, &state.corpus, by)?)
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct MetaphorParams {
    /// Comma-separated target lemmas.
    pub target: String,
    pub filter: Option<String>,
    pub scope: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetaphorPayload {
    pub candidates: Vec<MetaphorCandidate>,
    /// Present when a model is loaded and scores every candidate document.
    pub matrix: Option<TopicDomainMatrix>,
}

pub fn metaphors_query(state: &ServiceState, p: &MetaphorParams) -> Result<MetaphorPayload, ApiError> {
    let targets: BTreeSet<String> =
        p.target.split(',').map(|t| normalize_lemma(t.trim())).filter(|t| !t.is_empty()).collect();
    if targets.is_empty() {
        return Err(ApiError::bad_request("target must name at least one lemma"));
    }
    let scope: Scope = p.scope.as_deref().unwrap_or("sentence").parse().map_err(ApiError::bad_request)?;
    let candidates = flag_candidates(&*state.view(p.filter.as_deref())?, &targets, &state.pack, scope);
    let matrix = match &state.model {
        Some(model) => match topic_domain_matrix(&candidates, model, &state.pack, &state.corpus) {
            Ok(m) => Some(m),
            Err(e) => {
                log::warn!("no topic matrix for /metaphors: {e}");
                None
            }
        },
        None => None,
    };
    Ok(MetaphorPayload { candidates, matrix })
}
