use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use metaphora_core::concord::KwicSort;
use metaphora_core::metaphor::Scope;
use metaphora_core::topics::Covariate;
use metaphora_core::SubcorpusFilter;

#[derive(Debug, Parser)]
#[command(name = "metaphora", version, about = "Corpus analytics: topics, collocations, concordances, metaphor candidates")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Corpus file, or a run directory holding corpus.json.
    #[arg(long, global = true, env = "METAPHORA_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Model file, or a run directory holding model.json.
    #[arg(long, global = true, env = "METAPHORA_MODEL")]
    pub model: Option<PathBuf>,
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory; outputs and manifest.json are written here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Restrict to a subcorpus, e.g. `phase=1` or `month=march,week=5`.
    #[arg(long, global = true, value_parser = parse_filter)]
    pub filter: Option<String>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

fn parse_sort(s: &str) -> Result<String, String> {
    s.parse::<KwicSort>().map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn parse_filter(s: &str) -> Result<String, String> {
    s.parse::<SubcorpusFilter>().map(|_| s.to_string()).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read raw text or CoNLL-U files into corpus.json.
    Ingest(IngestArgs),
    /// Apply stopword, punctuation, number and hapax filtering.
    Preprocess(PreprocessArgs),
    /// Fit a topic model.
    Fit(FitArgs),
    /// Compare candidate numbers of topics.
    Searchk(SearchkArgs),
    /// Regress topic proportions on a covariate.
    Effects(EffectsArgs),
    /// Mean topic proportions per covariate level.
    Prevalence(PrevalenceArgs),
    /// Hits and per-million rate of a lemma.
    Freq(FreqArgs),
    /// Collocates of a lemma under one relation.
    Colloc(CollocArgs),
    /// Word sketch of a lemma.
    Sketch(SketchArgs),
    /// Compare a lemma's sketch between two subcorpora.
    Sketchdiff(SketchdiffArgs),
    /// Keyword-in-context concordance.
    Kwic(KwicArgs),
    /// Nouns in the "X is (a) Y" pattern for a given Y.
    Pattern(PatternArgs),
    /// Flag metaphor candidates and cross them with topics.
    Metaphors(MetaphorArgs),
    /// Write figure-data files for a fitted model.
    Report(ReportArgs),
    /// Start the HTTP query service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Raw,
    Conllu,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Files or directories (.txt, .conllu, .conll).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: InputFormat,
    /// CSV with columns file,id[,source].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// One stopword per line; replaces the built-in list.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    #[arg(long)]
    pub keep_hapax: bool,
    #[arg(long)]
    pub keep_numbers: bool,
    #[arg(long)]
    pub keep_punctuation: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Schedule {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub schedule: Schedule,
}

#[derive(Debug, Args)]
pub struct SearchkArgs {
    /// Candidate K values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[command(flatten)]
    pub schedule: Schedule,
}

#[derive(Debug, Args)]
pub struct EffectsArgs {
    #[arg(long, default_value = "phase")]
    pub covariate: Covariate,
}

#[derive(Debug, Args)]
pub struct PrevalenceArgs {
    #[arg(long, default_value = "week")]
    pub by: Covariate,
}

#[derive(Debug, Args)]
pub struct FreqArgs {
    #[arg(long)]
    pub lemma: String,
}

#[derive(Debug, Args)]
pub struct CollocArgs {
    #[arg(long)]
    pub lemma: String,
    /// subject, object, modifier, coordination or window.
    #[arg(long, default_value = "window")]
    pub relation: metaphora_core::colloc::Relation,
    #[arg(long, default_value_t = 1)]
    pub min_pair: u64,
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SketchArgs {
    #[arg(long)]
    pub lemma: String,
    #[arg(long)]
    pub min_score: Option<f64>,
    #[arg(long)]
    pub max_per_rel: Option<usize>,
    /// Comma-separated relations; dependency relations by default.
    #[arg(long)]
    pub relation: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SketchdiffArgs {
    #[arg(long)]
    pub lemma: String,
    /// Filter for the first subcorpus.
    #[arg(long, value_parser = parse_filter)]
    pub a: String,
    /// Filter for the second subcorpus.
    #[arg(long, value_parser = parse_filter)]
    pub b: String,
    #[arg(long)]
    pub relation: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KwicArgs {
    /// A lemma, or a token pattern such as `[lemma="crisi"] [pos="ADJ"]`.
    #[arg(long, short)]
    pub query: String,
    /// position, left or right.
    #[arg(long, value_parser = parse_sort)]
    pub sort: Option<String>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub page: Option<usize>,
    #[arg(long)]
    pub page_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    /// The predicate noun Y.
    #[arg(long)]
    pub y: String,
}

#[derive(Debug, Args)]
pub struct MetaphorArgs {
    /// Target lemmas, comma separated.
    #[arg(long, required = true)]
    pub target: String,
    #[arg(long, default_value = "sentence")]
    pub scope: Scope,
    /// Lexicon pack JSON; the built-in pack by default.
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub top_words: Option<usize>,
    /// Draw a sketch graph for this lemma; repeatable.
    #[arg(long)]
    pub sketch: Vec<String>,
    /// Leave sketch nodes scoring below this out (default 9).
    #[arg(long)]
    pub min_score: Option<f64>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long, default_value = "*")]
    pub cors_origin: String,
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
}
