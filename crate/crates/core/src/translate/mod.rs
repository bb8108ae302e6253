//! Translations between the three acceptor kinds.
//!
//! * [`ltl_to_uhat`]: every subformula becomes a 0/1 component; since and
//!   until are single masked attention layers.
//! * [`brasp_to_uhat`]: programs whose scores only read `j`, or compare
//!   bit vectors for equality between `i` and `j`, become UHATs with one
//!   component per program vector.
//! * [`uhat_to_ltl`]: for each layer and each reachable value, a formula
//!   that holds exactly where the layer outputs that value.

mod circuit;
mod from_brasp;
mod from_ltl;
mod to_ltl;

use serde::Serialize;
use thiserror::Error;

use crate::ltl::Ltl;
use crate::numeric::NumericError;
use crate::uhat::{Uhat, UhatError};

pub use from_brasp::{brasp_to_uhat, build_equality_layer, classify_score, BraspToUhat, ScoreClass};
pub use from_ltl::{ltl_to_uhat, LtlToUhat};
pub use to_ltl::{uhat_to_ltl, UhatToLtl};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("definition {0:?}: score predicate is neither j-only nor an equality block")]
    UnsupportedScore(String),
    #[error(transparent)]
    Uhat(#[from] UhatError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Size summary of a translation result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranslationReport {
    pub source: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attention_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_nodes: Option<usize>,
    pub notes: Vec<String>,
}

impl TranslationReport {
    pub fn for_uhat(source: &str, uhat: &Uhat, notes: Vec<String>) -> Self {
        TranslationReport {
            source: source.to_string(),
            target: "uhat".into(),
            layers: Some(uhat.layers().len()),
            attention_layers: Some(uhat.attention_layers()),
            max_width: uhat.widths().into_iter().max(),
            formula_nodes: None,
            notes,
        }
    }

    pub fn for_ltl(source: &str, formula: &Ltl, notes: Vec<String>) -> Self {
        TranslationReport {
            source: source.to_string(),
            target: "ltl".into(),
            layers: None,
            attention_layers: None,
            max_width: None,
            formula_nodes: Some(formula.node_count()),
            notes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
