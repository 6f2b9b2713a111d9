//! Consolidation of legislative texts.
//!
//! A bill article is split into simple modifications ([`splitter`]), the law
//! articles they target are located ([`references`]), and each modification is
//! applied to the current text of its target by one of three backends: the
//! deterministic amendment interpreter ([`engine`]), the two-span edit
//! representation ([`span`]), or a remote text-generation model ([`llm`]).
//! Predictions are scored with word error and normalized equality
//! ([`evaluation`]), and the [`pipeline`] ties the stages together, with a
//! small HTTP service ([`review`]) for human verification.

pub mod dataset;
pub mod engine;
pub mod evaluation;
pub mod llm;
pub mod model;
pub mod pipeline;
pub mod references;
pub mod review;
pub mod span;
pub mod splitter;
pub mod text;

pub use model::{
    Backend, Bill, BillArticle, ConsolidationRecord, ConsolidationTriplet, GateOutcome,
    LawArticle, LegalReference, ReviewStatus,
};
