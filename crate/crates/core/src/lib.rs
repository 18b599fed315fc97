//! Budgeted verification of uncertain schema-matching results.
//!
//! A probabilistic schema matcher emits several candidate matchings with a
//! probability for each. This crate picks which correspondences to verify under a
//! token budget (maximizing expected entropy reduction), asks a noisy oracle
//! (simulated, replayed, or an LLM), and updates the distribution with Bayes' rule,
//! round after round.
//!
//! Module map:
//! - [`model`]: candidate result sets, the view transformation, validation
//! - [`objective`]: entropy and expected uncertainty reduction
//! - [`selection`]: brute-force, greedy with partial enumeration, random
//! - [`oracle`]: prompt templates, LLM client, simulated and replay oracles
//! - [`update`]: Bayesian update from answers
//! - [`engine`]: the multi-round select / verify / update loop
//! - [`eval`]: F1, MRR, ranking, experiment grids, demo data

pub mod engine;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod selection;
pub mod synth;
pub mod update;

pub use error::{Error, Result};
pub use model::{
    build_view_set, marginal_probability, validate_crs, AttributeRef, CandidateResult,
    CandidateResultSet, Correspondence, SchemaSide, ValidationReport, ViewSet,
};
pub use objective::{
    entropy, expected_reduction, neg_conditional_entropy, AnswerFamily, EvalMode,
    PlanningAccuracy,
};

/// Serializes with sorted object keys and two-space indentation plus a trailing
/// newline, so equal values always produce identical bytes.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> String {
    // serde_json::Value keeps object keys in a BTreeMap.
    let value = serde_json::to_value(value).expect("serializable value");
    let mut out = serde_json::to_string_pretty(&value).expect("serializable value");
    out.push('\n');
    out
}
