//! Truth values, truth sources, conflict policies, and the hallucination
//! verdict.
//!
//! A claim never has a single absolute truth value here: it is evaluated
//! against each *source* (the live game state, each document shown to the
//! model, the model's own parametric memory), and a [`ConflictPolicy`]
//! decides which source's answer stands when they disagree. The same answer
//! can therefore be graded "faithful to the documents" or "true of the
//! world" by swapping policies, without touching the evaluator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{BoardState, MoveHistory};

/// Three-valued truth. `Unknown` is a first-class outcome (missing
/// information, ill-posed hypothetical, exhausted search budget) and is
/// never collapsed into `False`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthValue {
    True,
    False,
    Unknown,
}

impl TruthValue {
    pub fn from_bool(b: bool) -> TruthValue {
        if b {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TruthValue::True => "true",
            TruthValue::False => "false",
            TruthValue::Unknown => "unknown",
        }
    }
}

/// The three classes a source can belong to. Policies rank classes, not
/// individual documents; documents keep their instance order within the
/// `Document` class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceClass {
    Environment,
    Document,
    Parametric,
}

/// Identifies one concrete source: the environment, a specific document, or
/// the model's parametric memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceKind {
    Environment,
    Document { doc_id: String },
    Parametric,
}

impl SourceKind {
    pub fn class(&self) -> SourceClass {
        match self {
            SourceKind::Environment => SourceClass::Environment,
            SourceKind::Document { .. } => SourceClass::Document,
            SourceKind::Parametric => SourceClass::Parametric,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SourceKind::Environment => "environment".to_string(),
            SourceKind::Document { doc_id } => format!("document:{doc_id}"),
            SourceKind::Parametric => "parametric".to_string(),
        }
    }
}

/// One queryable source of truth. Environment and document sources carry the
/// state they describe (for documents, the state the document was rendered
/// from — which is exactly where planted corruptions live). Sources derived
/// from a move log also carry that history, so history claims can be
/// answered from the log's point of view. The parametric source carries
/// nothing and answers every claim `Unknown`: the harness cannot inspect
/// model weights.
#[derive(Debug, Clone)]
pub struct TruthSource {
    pub kind: SourceKind,
    pub state: Option<BoardState>,
    pub history: Option<MoveHistory>,
}

impl TruthSource {
    pub fn environment(state: BoardState, history: Option<MoveHistory>) -> TruthSource {
        TruthSource { kind: SourceKind::Environment, state: Some(state), history }
    }

    pub fn document(
        doc_id: impl Into<String>,
        state: BoardState,
        history: Option<MoveHistory>,
    ) -> TruthSource {
        TruthSource {
            kind: SourceKind::Document { doc_id: doc_id.into() },
            state: Some(state),
            history,
        }
    }

    pub fn parametric() -> TruthSource {
        TruthSource { kind: SourceKind::Parametric, state: None, history: None }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("policy {0:?} has an empty priority list")]
    EmptyPriority(String),
    #[error("policy {name:?} lists {class:?} more than once")]
    DuplicateClass { name: String, class: SourceClass },
    #[error("unknown policy preset {0:?} (available: doc_authoritative, world_authoritative, docs_override)")]
    UnknownPreset(String),
}

pub const PRESET_NAMES: [&str; 3] =
    ["doc_authoritative", "world_authoritative", "docs_override"];

/// An ordered ranking of source classes, plus whether the ranking is
/// disclosed to the model in its prompt. Classes not listed are not
/// consulted at all under the policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictPolicy {
    pub name: String,
    pub priority: Vec<SourceClass>,
    pub disclosure: bool,
}

impl ConflictPolicy {
    pub fn new(
        name: impl Into<String>,
        priority: Vec<SourceClass>,
        disclosure: bool,
    ) -> Result<ConflictPolicy, PolicyError> {
        let name = name.into();
        if priority.is_empty() {
            return Err(PolicyError::EmptyPriority(name));
        }
        for (i, class) in priority.iter().enumerate() {
            if priority[..i].contains(class) {
                return Err(PolicyError::DuplicateClass { name, class: *class });
            }
        }
        Ok(ConflictPolicy { name, priority, disclosure })
    }

    /// Look up one of the built-in presets by its serialized name.
    ///
    /// - `doc_authoritative`: the documents are the standard of truth (the
    ///   summarization stance); the live state is not consulted.
    /// - `world_authoritative`: the live state is the standard of truth;
    ///   documents are treated as unreliable commentary.
    /// - `docs_override`: documents win where they speak, the live state
    ///   fills the gaps (the retrieval stance).
    pub fn preset(name: &str) -> Result<ConflictPolicy, PolicyError> {
        use SourceClass::*;
        let (priority, disclosure) = match name {
            "doc_authoritative" => (vec![Document, Parametric], true),
            "world_authoritative" => (vec![Environment, Parametric], true),
            "docs_override" => (vec![Document, Environment, Parametric], true),
            other => return Err(PolicyError::UnknownPreset(other.to_string())),
        };
        ConflictPolicy::new(name, priority, disclosure)
    }

    /// Arrange sources into this policy's consultation order: priority
    /// classes in order, original order within a class, unlisted classes
    /// dropped.
    pub fn arrange<'a>(&self, sources: &'a [TruthSource]) -> Vec<&'a TruthSource> {
        self.priority
            .iter()
            .flat_map(|&class| sources.iter().filter(move |s| s.kind.class() == class))
            .collect()
    }

    /// One-sentence statement of the policy for inclusion in prompts.
    pub fn prompt_statement(&self) -> String {
        let ranking: Vec<&str> = self
            .priority
            .iter()
            .map(|class| match class {
                SourceClass::Environment => "the current game state",
                SourceClass::Document => "the provided documents",
                SourceClass::Parametric => "your own chess knowledge",
            })
            .collect();
        format!(
            "When sources of information disagree, trust them in this order: {}.",
            ranking.join(", then ")
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("no sources to combine for claim {claim:?}")]
    NoSources { claim: String },
}

/// Resolve one claim's per-source answers into a single truth value: the
/// first non-`Unknown` answer wins. `per_source` must already be in policy
/// order (see [`ConflictPolicy::arrange`]); an empty list is a configuration
/// error, not an `Unknown`.
pub fn combine_sources(
    claim_id: &str,
    per_source: &[(SourceKind, TruthValue)],
) -> Result<TruthValue, CoreError> {
    if per_source.is_empty() {
        return Err(CoreError::NoSources { claim: claim_id.to_string() });
    }
    Ok(per_source
        .iter()
        .map(|&(_, value)| value)
        .find(|&value| value != TruthValue::Unknown)
        .unwrap_or(TruthValue::Unknown))
}

/// Like [`combine_sources`], also reporting which source settled the answer
/// (`None` when every source answered `Unknown`).
pub fn combine_sources_traced(
    claim_id: &str,
    per_source: &[(SourceKind, TruthValue)],
) -> Result<(TruthValue, Option<SourceKind>), CoreError> {
    if per_source.is_empty() {
        return Err(CoreError::NoSources { claim: claim_id.to_string() });
    }
    Ok(per_source
        .iter()
        .find(|&&(_, value)| value != TruthValue::Unknown)
        .map(|(kind, value)| (*value, Some(kind.clone())))
        .unwrap_or((TruthValue::Unknown, None)))
}

/// The per-answer outcome: hallucinated exactly when at least one claim came
/// out `False`. `Unknown` claims are recorded but never count against the
/// answer, and an empty claim set (abstention) is never a hallucination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub hallucinated: bool,
    pub false_claims: Vec<String>,
    pub unknown_claims: Vec<String>,
}

pub fn hallucination_verdict(labels: &[(String, TruthValue)]) -> Verdict {
    let false_claims: Vec<String> = labels
        .iter()
        .filter(|(_, v)| *v == TruthValue::False)
        .map(|(id, _)| id.clone())
        .collect();
    let unknown_claims: Vec<String> = labels
        .iter()
        .filter(|(_, v)| *v == TruthValue::Unknown)
        .map(|(id, _)| id.clone())
        .collect();
    Verdict { hallucinated: !false_claims.is_empty(), false_claims, unknown_claims }
}
