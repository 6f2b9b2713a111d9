//! End-to-end consolidation run over a bill.
//!
//! Each bill article is split into simple modifications; each modification
//! is matched to the law article it targets; the modifications targeting a
//! law article are then applied in bill order, each backend carrying its own
//! running text from one modification to the next. One record is written per
//! simple modification and backend.
//!
//! Output directory layout:
//!
//! * `records.jsonl`: consolidation records, the review queue for predictions
//! * `references.jsonl`: one reference-verification item per modification
//! * `consolidated.jsonl`: final text of every targeted article per backend
//! * `summary.json`: stage counts and per-item errors

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};

use crate::dataset::{self, DatasetError};
use crate::engine::{TemplateError, TemplateTable};
use crate::llm::{
    build_prompt, contains_table, default_few_shot, gate, BackendConfig, CompletionClient,
    EstimatingTokenizer, HttpCompletionClient, LlmError,
};
use crate::model::{
    Backend, Bill, ConsolidationRecord, ConsolidationTriplet, GateOutcome, LawArticle,
    LegalReference, ReviewStatus,
};
use crate::references::{
    extract_references, normalize_act, normalize_article_id, AliasTable, Corpus, CorpusError,
};
use crate::span::{read_span_labels, reconstruct, SpanFileError, SpanLabels};
use crate::splitter::{flatten_simple_modifications, split_article, HierarchyConfig};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("bill: {0}")]
    Bill(String),
    #[error("templates: {0}")]
    Templates(#[from] TemplateError),
    #[error("span predictions: {0}")]
    SpanPredictions(#[from] SpanFileError),
    #[error("llm backend: {0}")]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Rule,
    Span,
    Llm,
    All,
}

impl std::str::FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule" => Ok(BackendKind::Rule),
            "span" => Ok(BackendKind::Span),
            "llm" => Ok(BackendKind::Llm),
            "all" => Ok(BackendKind::All),
            other => Err(format!("unknown backend {other:?} (rule, span, llm, all)")),
        }
    }
}

/// Expands `all` and removes duplicates, keeping rule, span, llm order.
pub fn expand_backends(kinds: &[BackendKind]) -> Vec<BackendKind> {
    let mut out: Vec<BackendKind> = kinds
        .iter()
        .flat_map(|k| match k {
            BackendKind::All => vec![BackendKind::Rule, BackendKind::Span, BackendKind::Llm],
            other => vec![*other],
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn default_backends() -> Vec<BackendKind> {
    vec![BackendKind::Rule]
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

fn default_workers() -> usize {
    4
}

/// Run configuration, read from TOML. Relative paths are taken relative to
/// the configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// JSONL law-article store.
    pub corpus: PathBuf,
    /// JSON bill.
    pub bill: PathBuf,
    pub output: PathBuf,
    #[serde(default = "default_backends")]
    pub backends: Vec<BackendKind>,
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Span-label JSONL whose `triplet_id` is the modification id.
    #[serde(default)]
    pub span_predictions: Option<PathBuf>,
    /// JSON object mapping record or modification ids to gold texts.
    #[serde(default)]
    pub gold: Option<PathBuf>,
    /// TOML template table replacing the built-in one.
    #[serde(default)]
    pub templates: Option<PathBuf>,
    #[serde(default)]
    pub llm: BackendConfig,
    #[serde(default)]
    pub hierarchy: HierarchyConfig,
    /// Extra act aliases, alias to canonical act name.
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<PathBuf>, bill: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            corpus: corpus.into(),
            bill: bill.into(),
            output: output.into(),
            backends: default_backends(),
            bind: default_bind(),
            workers: default_workers(),
            span_predictions: None,
            gold: None,
            templates: None,
            llm: BackendConfig::default(),
            hierarchy: HierarchyConfig::default(),
            aliases: BTreeMap::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut config: PipelineConfig =
            toml::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut config.corpus);
        rebase(&mut config.bill);
        rebase(&mut config.output);
        for p in [&mut config.span_predictions, &mut config.gold, &mut config.templates]
            .into_iter()
            .flatten()
        {
            rebase(p);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if expand_backends(&self.backends).is_empty() {
            return Err(PipelineError::Config("no backend selected".into()));
        }
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        for (name, path) in [("corpus", &self.corpus), ("bill", &self.bill)] {
            if !path.is_file() {
                return Err(PipelineError::Config(format!(
                    "{name} file {} does not exist",
                    path.display()
                )));
            }
        }
        if expand_backends(&self.backends).contains(&BackendKind::Llm) {
            self.llm.validate()?;
        }
        Ok(())
    }
}

/// Item of the reference-verification queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceItem {
    pub id: String,
    pub bill_article: String,
    pub path: Vec<String>,
    pub section_text: String,
    pub references: Vec<LegalReference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<LegalReference>,
    pub resolution: Resolution,
    pub review_status: ReviewStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Resolution {
    Resolved { act: Option<String>, article_id: String },
    Unresolved { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsolidatedArticle {
    pub article_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<String>,
    pub backend: Backend,
    pub modifications: Vec<String>,
    pub applied: usize,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub records: usize,
    /// Records that passed the table and length gates.
    pub passed_gate: usize,
    pub excluded_table: usize,
    pub excluded_length: usize,
    /// Gate passed and a prediction was produced.
    pub consolidated: usize,
    /// Gate passed but the backend failed.
    pub errored: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemError {
    pub item: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub bill_id: String,
    pub articles: usize,
    pub split_errors: usize,
    pub simple_modifications: usize,
    pub resolved_modifications: usize,
    /// Distinct law articles targeted by resolved modifications.
    pub resolved_articles: usize,
    pub per_backend: BTreeMap<String, StageCounts>,
    pub errors: Vec<ItemError>,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "bill {}", self.bill_id)?;
        writeln!(f, "  articles                {}", self.articles)?;
        writeln!(f, "  split errors            {}", self.split_errors)?;
        writeln!(f, "  simple modifications    {}", self.simple_modifications)?;
        writeln!(f, "  resolved modifications  {}", self.resolved_modifications)?;
        writeln!(f, "  targeted law articles   {}", self.resolved_articles)?;
        for (backend, c) in &self.per_backend {
            writeln!(
                f,
                "  {backend}: {} records, {} passed gate ({} consolidated, {} errored), {} excluded for tables, {} for length",
                c.records, c.passed_gate, c.consolidated, c.errored, c.excluded_table, c.excluded_length
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<ConsolidationRecord>,
    pub references: Vec<ReferenceItem>,
    pub consolidated: Vec<ConsolidatedArticle>,
    pub summary: RunSummary,
}

pub const RECORDS_FILE: &str = "records.jsonl";
pub const REFERENCES_FILE: &str = "references.jsonl";
pub const CONSOLIDATED_FILE: &str = "consolidated.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

fn id_part(s: &str) -> String {
    s.trim()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn backend_slug(kind: BackendKind) -> &'static str {
    match kind {
        BackendKind::Rule => "rule",
        BackendKind::Span => "span",
        BackendKind::Llm | BackendKind::All => "llm",
    }
}

/// Picks the target among the references of a simple modification: the
/// first cited in the leaf itself, else the last one cited by its
/// preambles.
pub fn pick_target(references: &[LegalReference], leaf_offset: usize) -> Option<&LegalReference> {
    references
        .iter()
        .find(|r| r.raw_span().start >= leaf_offset)
        .or_else(|| references.iter().rev().find(|r| r.raw_span().start < leaf_offset))
}

/// Counting semaphore bounding concurrent remote calls.
struct Limiter {
    free: Mutex<usize>,
    cond: Condvar,
}

impl Limiter {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cond: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
            while *free == 0 {
                free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
            }
            *free -= 1;
        }
        let out = f();
        *self.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.cond.notify_one();
        out
    }
}

struct Modification {
    order: (usize, usize),
    id: String,
    text: String,
    references: Vec<LegalReference>,
}

struct Group<'c> {
    article: &'c LawArticle,
    modifications: Vec<Modification>,
}

/// The selected backends and what they need: the template table, span
/// predictions keyed by modification id, and a completion client.
pub struct BackendSet<'a> {
    kinds: Vec<BackendKind>,
    templates: &'a TemplateTable,
    spans: HashMap<String, SpanLabels>,
    llm: Option<(Arc<dyn CompletionClient>, &'a BackendConfig)>,
    few_shot: Vec<ConsolidationTriplet>,
    limiter: Limiter,
}

impl<'a> BackendSet<'a> {
    pub fn new(
        kinds: &[BackendKind],
        templates: &'a TemplateTable,
        spans: HashMap<String, SpanLabels>,
        llm: Option<(Arc<dyn CompletionClient>, &'a BackendConfig)>,
    ) -> Self {
        let (few_shot, concurrency) = match &llm {
            Some((_, c)) if c.few_shot => (default_few_shot(), c.concurrency),
            Some((_, c)) => (Vec::new(), c.concurrency),
            None => (Vec::new(), 1),
        };
        Self {
            kinds: expand_backends(kinds),
            templates,
            spans,
            llm,
            few_shot,
            limiter: Limiter::new(concurrency),
        }
    }

    pub fn kinds(&self) -> &[BackendKind] {
        &self.kinds
    }

    /// Runs one backend on one triplet and wraps the outcome in a record.
    pub fn record(
        &self,
        kind: BackendKind,
        id: impl Into<String>,
        modification_id: &str,
        triplet: ConsolidationTriplet,
        references: Vec<LegalReference>,
    ) -> ConsolidationRecord {
        let (outcome, prediction, tokens) = self.consolidate(kind, modification_id, &triplet);
        ConsolidationRecord::new(
            id,
            modification_id,
            triplet,
            self.backend(kind),
            prediction,
            outcome,
            references,
            tokens,
        )
        .expect("prediction is present exactly when possible")
    }

    pub fn backend(&self, kind: BackendKind) -> Backend {
        match kind {
            BackendKind::Rule => Backend::RuleBased,
            BackendKind::Span => Backend::SpanBaseline,
            _ => Backend::Llm(self.llm.as_ref().map_or_else(String::new, |(_, c)| c.model.clone())),
        }
    }

    /// Gate verdict, prediction when consolidated, and prompt length.
    fn consolidate(
        &self,
        kind: BackendKind,
        modification_id: &str,
        triplet: &ConsolidationTriplet,
    ) -> (GateOutcome, Option<String>, usize) {
        let tokenizer = EstimatingTokenizer;
        let has_table = contains_table(triplet.instruction()) || contains_table(triplet.input());
        let failed = |reason: String| (GateOutcome::Failed { reason }, None);
        let (outcome, prediction, tokens) = match kind {
            BackendKind::Rule | BackendKind::Span => {
                let tokens = build_prompt(triplet, &[], &tokenizer).token_count;
                if has_table {
                    (GateOutcome::ExcludedTable, None, tokens)
                } else {
                    let (g, p) = match kind {
                        BackendKind::Rule => match self.templates.consolidate(triplet) {
                            Ok(text) => (GateOutcome::Possible, Some(text)),
                            Err(e) => failed(e.to_string()),
                        },
                        _ => match self.spans.get(modification_id) {
                            Some(labels) => {
                                match reconstruct(triplet.input(), triplet.instruction(), labels) {
                                    Ok(text) => (GateOutcome::Possible, Some(text)),
                                    Err(e) => failed(e.to_string()),
                                }
                            }
                            None => failed("no span prediction for this modification".into()),
                        },
                    };
                    (g, p, tokens)
                }
            }
            BackendKind::Llm | BackendKind::All => {
                let Some((client, config)) = &self.llm else {
                    return (
                        GateOutcome::Failed {
                            reason: "llm backend not configured".into(),
                        },
                        None,
                        0,
                    );
                };
                let prompt = build_prompt(triplet, &self.few_shot, &tokenizer);
                let tokens = prompt.token_count;
                match gate(&prompt, triplet, config) {
                    GateOutcome::Possible => {
                        match self.limiter.run(|| client.complete(&prompt)) {
                            Ok(text) => (GateOutcome::Possible, Some(text), tokens),
                            Err(e) => {
                                let (g, p) = failed(e.to_string());
                                (g, p, tokens)
                            }
                        }
                    }
                    other => (other, None, tokens),
                }
            }
        };
        (outcome, prediction, tokens)
    }
}

fn process_group(group: &Group<'_>, backends: &BackendSet<'_>) -> (Vec<(usize, ConsolidationRecord)>, Vec<ConsolidatedArticle>) {
    let original = group.article.text();
    let mut records = Vec::new();
    let mut finals = Vec::new();
    for (slot, &kind) in backends.kinds.iter().enumerate() {
        let mut current = original.clone();
        let mut applied = 0;
        for m in &group.modifications {
            let triplet = ConsolidationTriplet::new(m.text.clone(), current.clone(), None);
            let record_id = format!("{}.{}", m.id, backend_slug(kind));
            let record = match triplet {
                Ok(triplet) => {
                    let record = backends.record(kind, record_id, &m.id, triplet, m.references.clone());
                    if let Some(p) = record.prediction() {
                        current = p.to_owned();
                        applied += 1;
                    }
                    Ok(record)
                }
                // The article was emptied (repealed) by an earlier
                // modification; keep a record of the attempt anyway.
                Err(_) => ConsolidationTriplet::new(m.text.clone(), "(empty)", None).and_then(|t| {
                    ConsolidationRecord::new(
                        record_id,
                        m.id.clone(),
                        t,
                        backends.backend(kind),
                        None,
                        GateOutcome::Failed {
                            reason: "target article is empty".into(),
                        },
                        m.references.clone(),
                        0,
                    )
                }),
            };
            records.push((slot, record.expect("record fields are valid")));
        }
        let reference = group.article.reference();
        finals.push(ConsolidatedArticle {
            article_id: reference.article_id().to_owned(),
            act: reference.act().map(str::to_owned),
            backend: backends.backend(kind),
            modifications: group.modifications.iter().map(|m| m.id.clone()).collect(),
            applied,
            text: current,
        });
    }
    (records, finals)
}

struct Located<'c> {
    references: Vec<ReferenceItem>,
    groups: Vec<Group<'c>>,
    summary: RunSummary,
}

/// Splits, extracts and resolves: everything before consolidation.
fn locate<'c>(bill: &Bill, corpus: &'c Corpus, hierarchy: &HierarchyConfig) -> Located<'c> {
    let aliases: AliasTable = corpus.alias_table();
    let mut summary = RunSummary {
        bill_id: bill.id().to_owned(),
        articles: bill.articles().len(),
        ..RunSummary::default()
    };
    let mut reference_items = Vec::new();
    let mut groups: Vec<Group<'_>> = Vec::new();
    let mut group_index: HashMap<(String, String), usize> = HashMap::new();

    for (a, article) in bill.articles().iter().enumerate() {
        let root = match split_article(article, hierarchy) {
            Ok(root) => root,
            Err(e) => {
                summary.split_errors += 1;
                summary.errors.push(ItemError {
                    item: format!("article {}", article.number()),
                    message: e.to_string(),
                });
                continue;
            }
        };
        for (k, m) in flatten_simple_modifications(&root).into_iter().enumerate() {
            summary.simple_modifications += 1;
            let id = format!("{}.{}", id_part(article.number()), k + 1);
            let references = extract_references(&m.text, &aliases);
            let target = pick_target(&references, m.leaf_offset).cloned();
            let resolution = match &target {
                None => Err("no article reference found".to_owned()),
                Some(r) => corpus.resolve(r).map_err(|e| e.to_string()),
            };
            let resolution = match resolution {
                Ok(law) => {
                    summary.resolved_modifications += 1;
                    let key = (
                        normalize_act(law.reference().act().unwrap_or_default()),
                        normalize_article_id(law.reference().article_id()),
                    );
                    let g = *group_index.entry(key).or_insert_with(|| {
                        groups.push(Group {
                            article: law,
                            modifications: Vec::new(),
                        });
                        groups.len() - 1
                    });
                    groups[g].modifications.push(Modification {
                        order: (a, k),
                        id: id.clone(),
                        text: m.text.clone(),
                        references: references.clone(),
                    });
                    Resolution::Resolved {
                        act: law.reference().act().map(str::to_owned),
                        article_id: law.reference().article_id().to_owned(),
                    }
                }
                Err(reason) => {
                    summary.errors.push(ItemError {
                        item: id.clone(),
                        message: reason.clone(),
                    });
                    Resolution::Unresolved { reason }
                }
            };
            reference_items.push(ReferenceItem {
                id,
                bill_article: article.number().to_owned(),
                path: m.path.clone(),
                section_text: m.text,
                references,
                target,
                resolution,
                review_status: ReviewStatus::Pending,
            });
        }
    }
    summary.resolved_articles = groups.len();
    Located {
        references: reference_items,
        groups,
        summary,
    }
}

/// Reference-verification items and stage counts, without consolidating.
pub fn extract_stage(bill: &Bill, corpus: &Corpus, hierarchy: &HierarchyConfig) -> (Vec<ReferenceItem>, RunSummary) {
    let located = locate(bill, corpus, hierarchy);
    (located.references, located.summary)
}

/// Runs the pipeline with the HTTP completion client when the llm backend
/// is selected.
pub fn run(config: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    let client = if expand_backends(&config.backends).contains(&BackendKind::Llm) {
        Some(http_client(&config.llm)?)
    } else {
        None
    };
    run_with_client(config, client)
}

pub fn http_client(config: &BackendConfig) -> Result<Arc<dyn CompletionClient>, PipelineError> {
    let mut client = HttpCompletionClient::new(config.clone())?;
    if let Some(path) = &config.transcript {
        client = client.with_transcript(path)?;
    }
    Ok(Arc::new(client))
}

pub fn load_bill(path: &Path) -> Result<Bill, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Bill(format!("{}: {e}", path.display())))
}

pub fn load_corpus(config: &PipelineConfig) -> Result<Corpus, PipelineError> {
    let mut corpus = Corpus::load_jsonl(&config.corpus)?;
    for (alias, canonical) in &config.aliases {
        corpus.add_alias(alias, canonical)?;
    }
    Ok(corpus)
}

pub fn load_templates(path: Option<&Path>) -> Result<TemplateTable, PipelineError> {
    Ok(match path {
        Some(path) => TemplateTable::load(path)?,
        None => TemplateTable::default(),
    })
}

/// Span labels keyed by their `triplet_id`.
pub fn load_span_predictions(path: Option<&Path>) -> Result<HashMap<String, SpanLabels>, PipelineError> {
    Ok(match path {
        Some(path) => read_span_labels(path)
            .map_err(|e| match e {
                SpanFileError::Io(source) => PipelineError::Io {
                    path: path.to_owned(),
                    source,
                },
                other => other.into(),
            })?
            .into_iter()
            .map(|r| (r.triplet_id.clone(), r.labels()))
            .collect(),
        None => HashMap::new(),
    })
}

/// Runs the pipeline, writes the output files and returns what was written.
pub fn run_with_client(
    config: &PipelineConfig,
    client: Option<Arc<dyn CompletionClient>>,
) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let corpus = load_corpus(config)?;
    let bill = load_bill(&config.bill)?;
    let templates = load_templates(config.templates.as_deref())?;
    let spans = load_span_predictions(config.span_predictions.as_deref())?;
    let output = run_on(&bill, &corpus, &templates, spans, config, client)?;
    write_outputs(&config.output, &output)?;
    Ok(output)
}

/// The pipeline on already loaded inputs; writes nothing.
pub fn run_on(
    bill: &Bill,
    corpus: &Corpus,
    templates: &TemplateTable,
    spans: HashMap<String, SpanLabels>,
    config: &PipelineConfig,
    client: Option<Arc<dyn CompletionClient>>,
) -> Result<RunOutput, PipelineError> {
    let backends = BackendSet::new(&config.backends, templates, spans, client.map(|c| (c, &config.llm)));
    if backends.kinds().is_empty() {
        return Err(PipelineError::Config("no backend selected".into()));
    }
    let Located {
        references: reference_items,
        groups,
        mut summary,
    } = locate(bill, corpus, &config.hierarchy);

    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(groups.len()).max(1) {
            scope.spawn(|| loop {
                let g = next.fetch_add(1, Ordering::Relaxed);
                let Some(group) = groups.get(g) else {
                    break;
                };
                let out = process_group(group, &backends);
                results.lock().unwrap_or_else(|e| e.into_inner()).push((g, out));
            });
        }
    });
    let mut results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    results.sort_by_key(|(g, _)| *g);

    let order: HashMap<&str, (usize, usize)> = groups
        .iter()
        .flat_map(|g| g.modifications.iter().map(|m| (m.id.as_str(), m.order)))
        .collect();
    let mut keyed_records = Vec::new();
    let mut consolidated = Vec::new();
    for (_, (records, finals)) in results {
        keyed_records.extend(records);
        consolidated.extend(finals);
    }
    keyed_records.sort_by_key(|(slot, r)| (order[r.modification_id()], *slot));
    let records: Vec<ConsolidationRecord> = keyed_records.into_iter().map(|(_, r)| r).collect();

    for record in &records {
        let counts = summary
            .per_backend
            .entry(record.backend().to_string())
            .or_default();
        counts.records += 1;
        match record.gate() {
            GateOutcome::Possible => {
                counts.passed_gate += 1;
                counts.consolidated += 1;
            }
            GateOutcome::Failed { reason } => {
                counts.passed_gate += 1;
                counts.errored += 1;
                summary.errors.push(ItemError {
                    item: record.id().to_owned(),
                    message: reason.clone(),
                });
            }
            GateOutcome::ExcludedTable => counts.excluded_table += 1,
            GateOutcome::ExcludedLength { .. } => counts.excluded_length += 1,
        }
    }

    Ok(RunOutput {
        records,
        references: reference_items,
        consolidated,
        summary,
    })
}

pub fn write_outputs(dir: &Path, output: &RunOutput) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.to_owned(),
        source,
    })?;
    dataset::save_records(dir.join(RECORDS_FILE), &output.records)?;
    dataset::write_jsonl(&dir.join(REFERENCES_FILE), &output.references)?;
    dataset::write_jsonl(&dir.join(CONSOLIDATED_FILE), &output.consolidated)?;
    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serializes");
    let path = dir.join(SUMMARY_FILE);
    std::fs::write(&path, summary + "\n").map_err(|source| PipelineError::Io { path, source })
}

pub fn load_gold(path: impl AsRef<Path>) -> Result<HashMap<String, String>, PipelineError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}
