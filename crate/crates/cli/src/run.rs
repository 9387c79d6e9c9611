use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;

use metaphora_core::colloc::{collocations, write_collocations_csv, CollocConfig};
use metaphora_core::concord::{copular_pattern, write_kwic_tsv, CopulaConfig};
use metaphora_core::corpus::{ingest_conllu, ingest_raw, load_stoplist, preprocess, Manifest, PreprocessConfig};
use metaphora_core::metaphor::{flag_candidates, load_lexicons, topic_domain_matrix, write_candidates_csv, LexiconPack};
use metaphora_core::report::{emit_report, ReportOptions, RunManifest};
use metaphora_core::topics::{estimate_effect, fit, prevalence_by, search_k, write_effects_csv, write_search_csv};
use metaphora_core::{Corpus, ModelConfig, SubcorpusFilter, TopicModel};
use metaphora_service::queries::{self, FreqParams, KwicParams, SketchDiffParams, SketchParams};
use metaphora_service::{ApiError, ServiceState};

use crate::args::*;
use crate::config::Config;

pub const CORPUS_FILE: &str = "corpus.json";
pub const MODEL_FILE: &str = "model.json";

/// A mistake in how the command was invoked; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Bad requests are the caller's fault; everything else is about the data.
fn api(e: ApiError) -> anyhow::Error {
    if e.status.as_u16() == 400 {
        usage(e.message)
    } else {
        anyhow::anyhow!(e.message)
    }
}

/// What a command prints and, under `--out`, the files it leaves behind.
#[derive(Default)]
struct Outcome {
    stdout: String,
    files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn text(stdout: String) -> Self {
        Self { stdout, files: Vec::new() }
    }

    fn file(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.files.push((name.to_string(), bytes));
        self
    }
}

struct Ctx {
    global: Global,
    config: Config,
    manifest: RunManifest,
}

impl Ctx {
    fn filter(&self) -> Option<String> {
        self.global.filter.clone().or_else(|| self.config.filter.clone())
    }

    fn filter_parsed(&self) -> Result<SubcorpusFilter> {
        self.filter().as_deref().unwrap_or("").parse().map_err(|e: metaphora_core::corpus::FilterParseError| usage(e.to_string()))
    }

    fn out(&self, command: &str) -> Result<&Path> {
        self.global.out.as_deref().ok_or_else(|| usage(format!("{command} needs --out <DIR>")))
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(path).with_context(|| format!("hashing {}", path.display()))
    }

    fn corpus(&mut self) -> Result<Corpus> {
        let path = self
            .global
            .corpus
            .clone()
            .or_else(|| self.config.corpus.clone())
            .ok_or_else(|| usage("no corpus given; pass --corpus or set METAPHORA_CORPUS"))?;
        let path = in_dir(path, CORPUS_FILE);
        self.input(&path)?;
        Corpus::load(&path).with_context(|| format!("loading corpus {}", path.display()))
    }

    fn model(&mut self) -> Result<TopicModel> {
        self.model_opt()?.ok_or_else(|| usage("no model given; pass --model or set METAPHORA_MODEL"))
    }

    fn model_opt(&mut self) -> Result<Option<TopicModel>> {
        let Some(path) = self.global.model.clone().or_else(|| self.config.model.clone()) else {
            return Ok(None);
        };
        let path = in_dir(path, MODEL_FILE);
        self.input(&path)?;
        let model = TopicModel::load(&path).with_context(|| format!("loading model {}", path.display()))?;
        Ok(Some(model))
    }

    fn lexicons(&mut self, flag: Option<&PathBuf>) -> Result<LexiconPack> {
        match flag.cloned().or_else(|| self.config.lexicons.clone()) {
            Some(path) => {
                self.input(&path)?;
                Ok(load_lexicons(&path)?)
            }
            None => Ok(LexiconPack::default_pack()),
        }
    }

    fn model_config(&mut self, k: usize, s: &Schedule) -> Result<ModelConfig> {
        let c = &self.config;
        let defaults = ModelConfig::new(k);
        let cfg = ModelConfig {
            k,
            alpha: s.alpha.or(c.alpha),
            beta: s.beta.or(c.beta).unwrap_or(defaults.beta),
            iterations: s.iterations.or(c.iterations).unwrap_or(defaults.iterations),
            burnin: s.burnin.or(c.burnin).unwrap_or(defaults.burnin),
            thin: s.thin.or(c.thin).unwrap_or(defaults.thin),
            seed: s.seed.or(c.seed).unwrap_or(defaults.seed),
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        let m = &mut self.manifest;
        m.seeds.insert("gibbs".into(), cfg.seed);
        m.settings.insert("alpha".into(), cfg.alpha().to_string());
        m.settings.insert("beta".into(), cfg.beta.to_string());
        m.settings.insert("schedule".into(), format!("{}/{}/{}", cfg.iterations, cfg.burnin, cfg.thin));
        Ok(cfg)
    }

    fn state(&mut self, window: Option<usize>) -> Result<ServiceState> {
        let mut state = ServiceState::new(self.corpus()?);
        if let Some(w) = window.or(self.config.window) {
            state.sketch.config.window = w;
        }
        Ok(state)
    }
}

/// `dir/name` when `path` is a directory, `path` otherwise.
fn in_dir(path: PathBuf, name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(name)
    } else {
        path
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn utf8(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

pub fn run(cli: Cli) -> Result<()> {
    let Cli { global, command } = cli;
    let config = match &global.config {
        Some(p) => Config::load(p).map_err(|e| usage(format!("config {}: {e}", p.display())))?,
        None => Config::default(),
    };
    if let Some(f) = &config.filter {
        f.parse::<SubcorpusFilter>().map_err(|e| usage(format!("config filter: {e}")))?;
    }
    let mut manifest = RunManifest::new(std::env::args().skip(1).collect());
    manifest.config_paths = global.config.iter().map(|p| p.display().to_string()).collect();
    let mut ctx = Ctx { global, config, manifest };

    if let Command::Serve(args) = command {
        return serve(&mut ctx, &args);
    }
    let outcome = match command {
        Command::Ingest(a) => ingest(&mut ctx, &a)?,
        Command::Preprocess(a) => preprocess_cmd(&mut ctx, &a)?,
        Command::Fit(a) => fit_cmd(&mut ctx, &a)?,
        Command::Searchk(a) => searchk(&mut ctx, &a)?,
        Command::Effects(a) => effects(&mut ctx, &a)?,
        Command::Prevalence(a) => prevalence(&mut ctx, &a)?,
        Command::Freq(a) => freq(&mut ctx, &a)?,
        Command::Colloc(a) => colloc(&mut ctx, &a)?,
        Command::Sketch(a) => sketch(&mut ctx, &a)?,
        Command::Sketchdiff(a) => sketchdiff(&mut ctx, &a)?,
        Command::Kwic(a) => kwic(&mut ctx, &a)?,
        Command::Pattern(a) => pattern(&mut ctx, &a)?,
        Command::Metaphors(a) => metaphors(&mut ctx, &a)?,
        Command::Report(a) => report(&mut ctx, &a)?,
        Command::Serve(_) => unreachable!(),
    };
    print!("{}", outcome.stdout);
    if let Some(dir) = ctx.global.out.clone() {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &outcome.files {
            fs::write(dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
        }
        let path = ctx.manifest.finish(&dir)?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            for entry in fs::read_dir(p).with_context(|| format!("reading {}", p.display()))? {
                let path = entry?.path();
                let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
                if path.is_file() && matches!(ext, "txt" | "conllu" | "conll") {
                    files.push(path);
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(usage("no .txt, .conllu or .conll files among the inputs"));
    }
    Ok(files)
}

fn detect_format(files: &[PathBuf]) -> Result<InputFormat> {
    let conllu = |p: &PathBuf| matches!(p.extension().and_then(|e| e.to_str()), Some("conllu" | "conll"));
    match files.iter().filter(|p| conllu(p)).count() {
        0 => Ok(InputFormat::Raw),
        n if n == files.len() => Ok(InputFormat::Conllu),
        _ => Err(usage("inputs mix CoNLL-U and raw text; pass --format")),
    }
}

fn ingest(ctx: &mut Ctx, a: &IngestArgs) -> Result<Outcome> {
    ctx.out("ingest")?;
    let files = collect_inputs(&a.inputs)?;
    let format = match a.format {
        InputFormat::Auto => detect_format(&files)?,
        f => f,
    };
    let manifest = match &a.manifest {
        Some(p) => {
            ctx.input(p)?;
            Some(Manifest::load(p)?)
        }
        None => None,
    };
    for f in &files {
        ctx.input(f)?;
    }
    let corpus = match format {
        InputFormat::Conllu => ingest_conllu(&files, manifest.as_ref())?,
        _ => ingest_raw(&files, manifest.as_ref())?,
    };
    let summary = format!("{} documents, {} tokens, {} types\n", corpus.len(), corpus.token_count(), corpus.vocabulary_size());
    Ok(Outcome::text(summary).file(CORPUS_FILE, corpus.to_json_string().into_bytes()))
}

fn preprocess_cmd(ctx: &mut Ctx, a: &PreprocessArgs) -> Result<Outcome> {
    ctx.out("preprocess")?;
    let corpus = ctx.corpus()?;
    let mut cfg = PreprocessConfig {
        drop_hapax: !a.keep_hapax,
        drop_numbers: !a.keep_numbers,
        drop_punctuation: !a.keep_punctuation,
        ..PreprocessConfig::default()
    };
    if let Some(p) = a.stoplist.clone().or_else(|| ctx.config.stoplist.clone()) {
        ctx.input(&p)?;
        cfg.stoplist = load_stoplist(&p)?;
    }
    let s = &mut ctx.manifest.settings;
    s.insert("stoplist_size".into(), cfg.stoplist.len().to_string());
    s.insert("drop_hapax".into(), cfg.drop_hapax.to_string());
    s.insert("drop_numbers".into(), cfg.drop_numbers.to_string());
    s.insert("drop_punctuation".into(), cfg.drop_punctuation.to_string());
    let out = preprocess(&corpus, &cfg)?;
    let summary = format!(
        "{} documents, {} -> {} tokens, {} types\n",
        out.len(),
        corpus.token_count(),
        out.token_count(),
        out.vocabulary_size()
    );
    Ok(Outcome::text(summary).file(CORPUS_FILE, out.to_json_string().into_bytes()))
}

fn fit_cmd(ctx: &mut Ctx, a: &FitArgs) -> Result<Outcome> {
    ctx.out("fit")?;
    let k = a.k.or(ctx.config.k).ok_or_else(|| usage("fit needs --k"))?;
    let cfg = ctx.model_config(k, &a.schedule)?;
    ctx.manifest.settings.insert("k".into(), k.to_string());
    let corpus = ctx.corpus()?;
    let model = fit(&corpus, &cfg)?;
    let mut bytes = Vec::new();
    model.write_json(&mut bytes)?;
    let mut summary = String::new();
    let words = metaphora_core::report::topic_words(&model, 8)?;
    for (t, p) in model.proportions().iter().enumerate() {
        let list: Vec<&str> = words[t].words.iter().map(|w| w.lemma.as_str()).collect();
        writeln!(summary, "{}\t{:.3}\t{}", model.label(t), p, list.join(" "))?;
    }
    Ok(Outcome::text(summary).file(MODEL_FILE, bytes))
}

fn searchk(ctx: &mut Ctx, a: &SearchkArgs) -> Result<Outcome> {
    let template = ctx.model_config(a.ks[0], &a.schedule)?;
    let ks: BTreeSet<usize> = a.ks.iter().copied().collect();
    ctx.manifest.settings.insert("ks".into(), ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
    let ks: Vec<usize> = ks.into_iter().collect();
    let corpus = ctx.corpus()?;
    let rows = search_k(&corpus, &ks, &template)?;
    let table = csv_bytes(|w| write_search_csv(&rows, w))?;
    let stdout = if ctx.global.json { json(&rows)? + "\n" } else { utf8(&table) };
    Ok(Outcome::text(stdout).file("searchk.csv", table))
}

fn effects(ctx: &mut Ctx, a: &EffectsArgs) -> Result<Outcome> {
    let corpus = ctx.corpus()?;
    let model = ctx.model()?;
    ctx.manifest.settings.insert("covariate".into(), a.covariate.name().into());
    let rows = estimate_effect(&model, &corpus, a.covariate)?;
    let table = csv_bytes(|w| write_effects_csv(&rows, w))?;
    let stdout = if ctx.global.json { json(&rows)? + "\n" } else { utf8(&table) };
    Ok(Outcome::text(stdout).file("effects.csv", table))
}

fn prevalence(ctx: &mut Ctx, a: &PrevalenceArgs) -> Result<Outcome> {
    let corpus = ctx.corpus()?;
    let model = ctx.model()?;
    ctx.manifest.settings.insert("by".into(), a.by.name().into());
    let table = prevalence_by(&model, &corpus, a.by)?;
    let mut text = format!("{},topic,documents,mean,lower,upper\n", a.by.name());
    for g in &table.groups {
        for t in 0..model.k() {
            let (lo, hi) = g.band(t);
            writeln!(text, "{},{},{},{:.6},{:.6},{:.6}", g.level, t + 1, g.documents, g.mean[t], lo, hi)?;
        }
    }
    let stdout = if ctx.global.json { json(&table)? + "\n" } else { text.clone() };
    Ok(Outcome::text(stdout).file("prevalence.csv", text.into_bytes()))
}

fn freq(ctx: &mut Ctx, a: &FreqArgs) -> Result<Outcome> {
    let state = ctx.state(None)?;
    let p = FreqParams { lemma: a.lemma.clone(), filter: ctx.filter() };
    let payload = queries::freq_query(&state, &p).map_err(api)?;
    let body = json(&payload)?;
    let stdout = if ctx.global.json { format!("{body}\n") } else { format!("{} {:.2}\n", payload.hits, payload.pmw) };
    Ok(Outcome::text(stdout).file("freq.json", body.into_bytes()))
}

fn colloc(ctx: &mut Ctx, a: &CollocArgs) -> Result<Outcome> {
    let view = ctx.corpus()?.subcorpus(&ctx.filter_parsed()?);
    let mut cfg = CollocConfig::default();
    if let Some(w) = a.window.or(ctx.config.window) {
        cfg.window = w;
    }
    let rows = collocations(&view, &a.lemma, a.relation, a.min_pair, &cfg)?;
    let table = csv_bytes(|w| write_collocations_csv(&rows, w))?;
    let stdout = if ctx.global.json { json(&rows)? + "\n" } else { utf8(&table) };
    Ok(Outcome::text(stdout).file("collocations.csv", table))
}

fn sketch(ctx: &mut Ctx, a: &SketchArgs) -> Result<Outcome> {
    let state = ctx.state(a.window)?;
    let p = SketchParams {
        lemma: a.lemma.clone(),
        filter: ctx.filter(),
        min_score: a.min_score.or(ctx.config.min_score),
        max_per_rel: a.max_per_rel,
        relation: a.relation.clone(),
        window: a.window.or(ctx.config.window),
    };
    let sk = queries::sketch_query(&state, &p).map_err(api)?;
    let body = json(&sk)?;
    let stdout = if ctx.global.json {
        format!("{body}\n")
    } else {
        let mut s = format!("{} ({})\n", sk.head, sk.f_head);
        for (rel, rows) in &sk.relations {
            writeln!(s, "{rel}")?;
            for c in rows {
                writeln!(s, "  {}\t{}\t{:.2}", c.collocate, c.f_pair, c.logdice)?;
            }
        }
        s
    };
    Ok(Outcome::text(stdout).file("sketch.json", body.into_bytes()))
}

fn sketchdiff(ctx: &mut Ctx, a: &SketchdiffArgs) -> Result<Outcome> {
    let state = ctx.state(a.window)?;
    let p = SketchDiffParams {
        lemma: a.lemma.clone(),
        a: Some(a.a.clone()),
        b: Some(a.b.clone()),
        relation: a.relation.clone(),
        window: a.window.or(ctx.config.window),
    };
    let rows = queries::sketchdiff_query(&state, &p).map_err(api)?;
    let body = json(&rows)?;
    let stdout = if ctx.global.json {
        format!("{body}\n")
    } else {
        let num = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        let mut s = String::from("relation\tcollocate\tscore_a\tscore_b\tdelta\n");
        for r in &rows {
            writeln!(s, "{}\t{}\t{}\t{}\t{}", r.relation, r.collocate, num(r.score_a), num(r.score_b), num(r.delta))?;
        }
        s
    };
    Ok(Outcome::text(stdout).file("sketchdiff.json", body.into_bytes()))
}

fn kwic(ctx: &mut Ctx, a: &KwicArgs) -> Result<Outcome> {
    let state = ctx.state(None)?;
    let p = KwicParams {
        q: a.query.clone(),
        filter: ctx.filter(),
        page: a.page,
        page_size: a.page_size,
        sort: a.sort.clone(),
        width: a.width,
    };
    let page = queries::kwic_query(&state, &p).map_err(api)?;
    let table = csv_bytes(|w| write_kwic_tsv(&page.lines, w))?;
    let stdout = if ctx.global.json { json(&page)? + "\n" } else { utf8(&table) };
    Ok(Outcome::text(stdout).file("kwic.tsv", table))
}

fn pattern(ctx: &mut Ctx, a: &PatternArgs) -> Result<Outcome> {
    let view = ctx.corpus()?.subcorpus(&ctx.filter_parsed()?);
    let rows = copular_pattern(&view, &a.y, &CopulaConfig::default());
    let mut text = String::from("x\tcount\n");
    for (x, n) in &rows {
        writeln!(text, "{x}\t{n}")?;
    }
    let stdout = if ctx.global.json { json(&rows)? + "\n" } else { text.clone() };
    Ok(Outcome::text(stdout).file("pattern.tsv", text.into_bytes()))
}

fn metaphors(ctx: &mut Ctx, a: &MetaphorArgs) -> Result<Outcome> {
    let corpus = ctx.corpus()?;
    let model = ctx.model_opt()?;
    let pack = ctx.lexicons(a.lexicons.as_ref())?;
    let targets: BTreeSet<String> =
        a.target.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
    if targets.is_empty() {
        return Err(usage("--target must name at least one lemma"));
    }
    ctx.manifest.settings.insert("scope".into(), a.scope.to_string());
    let view = corpus.subcorpus(&ctx.filter_parsed()?);
    let candidates = flag_candidates(&view, &targets, &pack, a.scope);
    let table = csv_bytes(|w| write_candidates_csv(&candidates, w))?;
    let mut outcome = Outcome::default();
    let matrix = match &model {
        Some(m) => Some(topic_domain_matrix(&candidates, m, &pack, &corpus)?),
        None => None,
    };
    outcome.stdout = if ctx.global.json {
        json(&queries::MetaphorPayload { candidates, matrix: matrix.clone() })? + "\n"
    } else {
        utf8(&table)
    };
    outcome = outcome.file("candidates.csv", table);
    if let Some(m) = matrix {
        outcome = outcome.file("matrix.csv", csv_bytes(|w| m.write_csv(w))?);
    }
    Ok(outcome)
}

fn report(ctx: &mut Ctx, a: &ReportArgs) -> Result<Outcome> {
    let dir = ctx.out("report")?.to_path_buf();
    let corpus = ctx.corpus()?;
    let model = ctx.model()?;
    let mut opts = ReportOptions { sketch_heads: a.sketch.clone(), svg: a.svg, ..ReportOptions::default() };
    if let Some(n) = a.top_words.or(ctx.config.top_words) {
        opts.top_words = n;
    }
    if let Some(s) = a.min_score.or(ctx.config.min_score) {
        opts.min_score = Some(s);
    }
    if let Some(w) = ctx.config.window {
        opts.sketch.config.window = w;
    }
    ctx.manifest.settings.insert("min_score".into(), format!("{:?}", opts.min_score));
    fs::create_dir_all(&dir)?;
    let names = emit_report(Some(&model), &corpus, &dir, &opts)?;
    Ok(Outcome::text(names.iter().map(|n| format!("{n}\n")).collect()))
}

fn serve(ctx: &mut Ctx, a: &ServeArgs) -> Result<()> {
    let mut state = ctx.state(None)?.with_cors_origin(a.cors_origin.clone());
    state.pack = ctx.lexicons(a.lexicons.as_ref())?;
    if let Some(model) = ctx.model_opt()? {
        state = state.with_model(model)?;
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(metaphora_service::serve(Arc::new(state), a.addr))?;
    Ok(())
}
