//! JSON model document shared by both model kinds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Dialect, SyntaxError};

/// Default scheme for formula relations that carry no explicit override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RelDefault {
    /// R_φ(w) = ‖φ‖ ∩ W_N
    #[default]
    TruthsetNormal,
    /// R_φ(w) = ‖φ‖
    TruthsetAll,
    /// R_φ(w) = ∅
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub dialect: Dialect,
    pub states: Vec<String>,
    pub normal: Vec<String>,
    #[serde(default)]
    pub term_rels: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    pub formula_rels: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    pub formula_rel_default: RelDefault,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nonnormal_valuation: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub star: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ternary: Vec<(String, String, String)>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("model needs at least one state and one normal state")]
    Empty,
    #[error("in `{context}`: {source}")]
    Syntax {
        context: String,
        #[source]
        source: SyntaxError,
    },
    #[error("formula relation for `{formula}` leaves the normal states at ({from}, {to})")]
    NonNormalOverride { formula: String, from: String, to: String },
    #[error("valuation entry for state `{0}` has the wrong kind for its normality")]
    ValuationKind(String),
    #[error("model has dialect {found}, expected {expected}")]
    WrongKind { expected: &'static str, found: Dialect },
    #[error("formula is not well-formed in {dialect}: {reason}")]
    Dialect { dialect: Dialect, reason: String },
    #[error("invalid model document: {0}")]
    Json(#[from] serde_json::Error),
}

impl ModelDoc {
    pub fn from_json(text: &str) -> Result<ModelDoc, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialize")
    }
}

/// Maps state names to dense indices, rejecting duplicates.
pub(crate) fn index_states(names: &[String]) -> Result<BTreeMap<String, usize>, ModelError> {
    let mut idx = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if idx.insert(n.clone(), i).is_some() {
            return Err(ModelError::DuplicateState(n.clone()));
        }
    }
    Ok(idx)
}

pub(crate) fn lookup(idx: &BTreeMap<String, usize>, name: &str) -> Result<usize, ModelError> {
    idx.get(name).copied().ok_or_else(|| ModelError::UnknownState(name.to_string()))
}
