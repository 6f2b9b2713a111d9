//! Human verification of pipeline output over HTTP.
//!
//! Two queues are served: extracted references (one item per simple
//! modification) and consolidation records. A reviewer approves an item as
//! is or amends it with a corrected text; every transition is written back
//! to the run directory before the response is sent.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/records?queue=consolidations&status=pending&page=1&per_page=50` | paged listing |
//! | GET | `/records/{id}` | full item, with a word diff against the gold text when known |
//! | POST | `/records/{id}/approve` | mark as correct |
//! | POST | `/records/{id}/amend` | body `{"gold_text": "..."}` |
//! | GET | `/stats` | review progress and rates, recomputed on each call |
//! | GET | `/stats/curve.csv?backend=...&step=100` | correctness by prompt length |

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::{self, DatasetError};
use crate::evaluation::{
    consolidation_report, correctness_curve, curve_csv, default_thresholds, gold_for, word_diff,
    word_error, ConsolidationReport, CurveSample,
};
use crate::model::{ConsolidationRecord, ReviewStatus};
use crate::pipeline::{ReferenceItem, RECORDS_FILE, REFERENCES_FILE};

#[derive(Debug, thiserror::Error)]
pub enum ReviewError {
    #[error("no item with id {0:?}")]
    NotFound(String),
    #[error("item {0:?} has already been reviewed")]
    AlreadyFinal(String),
    #[error("gold_text must not be empty")]
    EmptyGold,
    #[error("item {0:?} has no prediction to approve; amend it instead")]
    NothingToApprove(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Storage(#[from] DatasetError),
    #[error("refusing to bind {0}: not a loopback address")]
    NotLoopback(SocketAddr),
    #[error("server: {0}")]
    Server(#[from] std::io::Error),
}

impl ReviewError {
    fn status(&self) -> StatusCode {
        match self {
            ReviewError::NotFound(_) => StatusCode::NOT_FOUND,
            ReviewError::AlreadyFinal(_) => StatusCode::CONFLICT,
            ReviewError::EmptyGold | ReviewError::NothingToApprove(_) | ReviewError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ReviewError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Queue {
    #[default]
    Consolidations,
    References,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusFilter {
    #[default]
    Pending,
    Approved,
    Amended,
    All,
}

impl StatusFilter {
    fn accepts(self, status: &ReviewStatus) -> bool {
        matches!(
            (self, status),
            (StatusFilter::All, _)
                | (StatusFilter::Pending, ReviewStatus::Pending)
                | (StatusFilter::Approved, ReviewStatus::Approved)
                | (StatusFilter::Amended, ReviewStatus::Amended { .. })
        )
    }
}

pub const MAX_PER_PAGE: usize = 500;

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ListQuery {
    #[serde(default)]
    pub queue: Queue,
    #[serde(default)]
    pub status: StatusFilter,
    #[serde(default = "first_page")]
    pub page: usize,
    #[serde(default = "default_per_page")]
    pub per_page: usize,
}

fn first_page() -> usize {
    1
}

fn default_per_page() -> usize {
    50
}

impl Default for ListQuery {
    fn default() -> Self {
        Self {
            queue: Queue::default(),
            status: StatusFilter::default(),
            page: first_page(),
            per_page: default_per_page(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Page {
    pub queue: Queue,
    pub status: StatusFilter,
    pub page: usize,
    pub per_page: usize,
    pub total: usize,
    pub items: Vec<Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueProgress {
    pub pending: usize,
    pub approved: usize,
    pub amended: usize,
}

impl QueueProgress {
    fn count<'a>(statuses: impl Iterator<Item = &'a ReviewStatus>) -> Self {
        let mut p = Self::default();
        for s in statuses {
            match s {
                ReviewStatus::Pending => p.pending += 1,
                ReviewStatus::Approved => p.approved += 1,
                ReviewStatus::Amended { .. } => p.amended += 1,
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewStats {
    pub consolidations: QueueProgress,
    pub references: QueueProgress,
    /// Possible records still lacking a gold text, left out of `report`.
    pub unscored: usize,
    pub report: Option<ConsolidationReport>,
    pub table: Option<String>,
}

/// Review state: the records and reference items of one run, plus any
/// gold texts supplied up front.
#[derive(Debug, Default)]
pub struct ReviewStore {
    dir: Option<PathBuf>,
    records: Vec<ConsolidationRecord>,
    references: Vec<ReferenceItem>,
    gold: HashMap<String, String>,
}

impl ReviewStore {
    pub fn in_memory(
        records: Vec<ConsolidationRecord>,
        references: Vec<ReferenceItem>,
        gold: HashMap<String, String>,
    ) -> Self {
        Self {
            dir: None,
            records,
            references,
            gold,
        }
    }

    /// Loads a run directory. `references.jsonl` is optional.
    pub fn open(dir: impl AsRef<Path>, gold: HashMap<String, String>) -> Result<Self, ReviewError> {
        let dir = dir.as_ref();
        let records = dataset::load_records(dir.join(RECORDS_FILE))?;
        let refs_path = dir.join(REFERENCES_FILE);
        let references = if refs_path.exists() {
            dataset::read_jsonl(&refs_path)?
        } else {
            Vec::new()
        };
        Ok(Self {
            dir: Some(dir.to_owned()),
            records,
            references,
            gold,
        })
    }

    pub fn records(&self) -> &[ConsolidationRecord] {
        &self.records
    }

    pub fn references(&self) -> &[ReferenceItem] {
        &self.references
    }

    fn reviewed_by_modification(&self) -> HashMap<&str, &str> {
        let mut out = HashMap::new();
        for r in &self.records {
            if let Some(g) = r.reviewed_gold() {
                out.entry(r.modification_id()).or_insert(g);
            }
        }
        out
    }

    pub fn list(&self, q: ListQuery) -> Result<Page, ReviewError> {
        if q.page == 0 || q.per_page == 0 || q.per_page > MAX_PER_PAGE {
            return Err(ReviewError::BadRequest(format!(
                "page must be at least 1 and per_page between 1 and {MAX_PER_PAGE}"
            )));
        }
        let matching: Vec<Value> = match q.queue {
            Queue::Consolidations => self
                .records
                .iter()
                .filter(|r| q.status.accepts(r.review_status()))
                .map(|r| {
                    json!({
                        "id": r.id(),
                        "modification_id": r.modification_id(),
                        "backend": r.backend(),
                        "gate": r.gate(),
                        "has_prediction": r.prediction().is_some(),
                        "review_status": r.review_status(),
                    })
                })
                .collect(),
            Queue::References => self
                .references
                .iter()
                .filter(|r| q.status.accepts(&r.review_status))
                .map(|r| serde_json::to_value(r).expect("reference item serializes"))
                .collect(),
        };
        let total = matching.len();
        let items = matching
            .into_iter()
            .skip((q.page - 1) * q.per_page)
            .take(q.per_page)
            .collect();
        Ok(Page {
            queue: q.queue,
            status: q.status,
            page: q.page,
            per_page: q.per_page,
            total,
            items,
        })
    }

    /// Full view of a record or reference item.
    pub fn detail(&self, id: &str) -> Result<Value, ReviewError> {
        if let Some(record) = self.records.iter().find(|r| r.id() == id) {
            let reviewed = self.reviewed_by_modification();
            let gold = gold_for(record, &reviewed, &self.gold);
            let (diff, error) = match (record.prediction(), gold) {
                (Some(p), Some(g)) => (Some(word_diff(p, g)), Some(word_error(p, g))),
                _ => (None, None),
            };
            let mut value = serde_json::to_value(record).expect("record serializes");
            let obj = value.as_object_mut().expect("record is an object");
            obj.insert("queue".into(), json!(Queue::Consolidations));
            obj.insert("gold".into(), json!(gold));
            obj.insert("word_diff".into(), json!(diff));
            obj.insert("word_error".into(), json!(error));
            return Ok(value);
        }
        if let Some(item) = self.references.iter().find(|r| r.id == id) {
            let mut value = serde_json::to_value(item).expect("reference item serializes");
            value
                .as_object_mut()
                .expect("item is an object")
                .insert("queue".into(), json!(Queue::References));
            return Ok(value);
        }
        Err(ReviewError::NotFound(id.to_owned()))
    }

    pub fn approve(&mut self, id: &str) -> Result<Value, ReviewError> {
        self.transition(id, None)
    }

    pub fn amend(&mut self, id: &str, gold_text: &str) -> Result<Value, ReviewError> {
        if gold_text.trim().is_empty() {
            return Err(ReviewError::EmptyGold);
        }
        self.transition(id, Some(gold_text.to_owned()))
    }

    fn transition(&mut self, id: &str, amended: Option<String>) -> Result<Value, ReviewError> {
        let status = match amended {
            Some(gold_text) => ReviewStatus::Amended { gold_text },
            None => ReviewStatus::Approved,
        };
        if let Some(i) = self.records.iter().position(|r| r.id() == id) {
            let record = &self.records[i];
            if record.review_status().is_final() {
                return Err(ReviewError::AlreadyFinal(id.to_owned()));
            }
            if status == ReviewStatus::Approved && record.prediction().is_none() {
                return Err(ReviewError::NothingToApprove(id.to_owned()));
            }
            let updated = record
                .clone()
                .with_review(status)
                .map_err(|_| ReviewError::EmptyGold)?;
            let previous = std::mem::replace(&mut self.records[i], updated);
            if let Err(e) = self.persist(Queue::Consolidations) {
                self.records[i] = previous;
                return Err(e);
            }
        } else if let Some(i) = self.references.iter().position(|r| r.id == id) {
            if self.references[i].review_status.is_final() {
                return Err(ReviewError::AlreadyFinal(id.to_owned()));
            }
            let previous = std::mem::replace(&mut self.references[i].review_status, status);
            if let Err(e) = self.persist(Queue::References) {
                self.references[i].review_status = previous;
                return Err(e);
            }
        } else {
            return Err(ReviewError::NotFound(id.to_owned()));
        }
        self.detail(id)
    }

    fn persist(&self, queue: Queue) -> Result<(), ReviewError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        match queue {
            Queue::Consolidations => dataset::save_records(dir.join(RECORDS_FILE), &self.records)?,
            Queue::References => dataset::write_jsonl(&dir.join(REFERENCES_FILE), &self.references)?,
        }
        Ok(())
    }

    /// Records that can be scored now: excluded ones, and possible ones
    /// with a known gold text.
    fn scorable(&self) -> (Vec<ConsolidationRecord>, usize) {
        let reviewed = self.reviewed_by_modification();
        let (mut keep, mut unscored) = (Vec::new(), 0);
        for r in &self.records {
            if r.prediction().is_none() || gold_for(r, &reviewed, &self.gold).is_some() {
                keep.push(r.clone());
            } else {
                unscored += 1;
            }
        }
        (keep, unscored)
    }

    pub fn stats(&self) -> ReviewStats {
        let (scorable, unscored) = self.scorable();
        let report = consolidation_report(&scorable, &self.gold).ok();
        ReviewStats {
            consolidations: QueueProgress::count(self.records.iter().map(|r| r.review_status())),
            references: QueueProgress::count(self.references.iter().map(|r| &r.review_status)),
            unscored,
            table: report.as_ref().map(ConsolidationReport::render_table),
            report,
        }
    }

    /// Correctness curve of one backend, or of all backends pooled.
    pub fn curve_csv(&self, backend: Option<&str>, step: usize) -> Result<String, ReviewError> {
        if step == 0 {
            return Err(ReviewError::BadRequest("step must be at least 1".into()));
        }
        let (scorable, _) = self.scorable();
        let samples: Vec<CurveSample> = match consolidation_report(&scorable, &self.gold) {
            Ok(report) => match backend {
                Some(b) => report
                    .samples
                    .get(b)
                    .cloned()
                    .ok_or_else(|| ReviewError::NotFound(b.to_owned()))?,
                None => report.samples.into_values().flatten().collect(),
            },
            Err(_) => Vec::new(),
        };
        let thresholds = default_thresholds(&samples, step);
        Ok(curve_csv(&correctness_curve(&samples, &thresholds)))
    }
}

type Shared = Arc<Mutex<ReviewStore>>;

fn lock(state: &Shared) -> std::sync::MutexGuard<'_, ReviewStore> {
    state.lock().unwrap_or_else(|e| e.into_inner())
}

async fn list(State(state): State<Shared>, Query(q): Query<ListQuery>) -> Result<Json<Page>, ReviewError> {
    lock(&state).list(q).map(Json)
}

async fn detail(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ReviewError> {
    lock(&state).detail(&id).map(Json)
}

async fn approve(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ReviewError> {
    lock(&state).approve(&id).map(Json)
}

#[derive(Debug, Deserialize)]
struct AmendBody {
    #[serde(default)]
    gold_text: String,
}

async fn amend(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<AmendBody>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<Value>, ReviewError> {
    let Json(body) = body.map_err(|e| ReviewError::BadRequest(e.body_text()))?;
    lock(&state).amend(&id, &body.gold_text).map(Json)
}

async fn stats(State(state): State<Shared>) -> Json<ReviewStats> {
    Json(lock(&state).stats())
}

#[derive(Debug, Deserialize)]
struct CurveQuery {
    backend: Option<String>,
    #[serde(default = "default_step")]
    step: usize,
}

fn default_step() -> usize {
    100
}

async fn curve(State(state): State<Shared>, Query(q): Query<CurveQuery>) -> Result<Response, ReviewError> {
    let csv = lock(&state).curve_csv(q.backend.as_deref(), q.step)?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

pub fn router(store: ReviewStore) -> Router {
    let state: Shared = Arc::new(Mutex::new(store));
    Router::new()
        .route("/records", get(list))
        .route("/records/{id}", get(detail))
        .route("/records/{id}/approve", post(approve))
        .route("/records/{id}/amend", post(amend))
        .route("/stats", get(stats))
        .route("/stats/curve.csv", get(curve))
        .with_state(state)
}

/// Serves until the process is stopped. Non-loopback addresses are refused
/// unless `allow_remote` is set.
pub fn serve(store: ReviewStore, bind: &str, allow_remote: bool) -> Result<(), ReviewError> {
    let addr: SocketAddr = bind
        .parse()
        .map_err(|e| ReviewError::BadRequest(format!("bind address {bind:?}: {e}")))?;
    if !addr.ip().is_loopback() && !allow_remote {
        return Err(ReviewError::NotLoopback(addr));
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!("review service listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(store)).await
    })?;
    Ok(())
}

/// Totals per backend name of records still pending review.
pub fn pending_by_backend(records: &[ConsolidationRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records.iter().filter(|r| !r.review_status().is_final()) {
        *out.entry(r.backend().to_string()).or_insert(0) += 1;
    }
    out
}
