//! Dataset generation: turn a config and a master seed into a finished,
//! reproducible set of benchmark instances.
//!
//! Each instance draws every random decision from its own seed stream,
//! derived from `(master_seed, index)` with a splitmix64 finalizer — so the
//! i-th instance is identical across runs regardless of how many instances
//! surround it, and two runs of the same config produce byte-identical
//! datasets. Views, policies, and query kinds cycle by index, which spreads
//! every combination evenly through the dataset without any randomness.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::AtomicClaim;
use crate::dataset::{
    write_dataset, BenchInstance, DatasetError, DatasetMeta, GoldRecord, Manifest, Seeds,
};
use crate::oracle::EvalBudget;
use crate::querygen::{make_query, GoldAnswer, QueryError, QueryKind};
use crate::truth::{ConflictPolicy, PolicyError, TruthValue};
use crate::views::{Resolver, ViewConfig, ViewError};
use crate::worldgen::{
    corrupt_document, render_documents, sample_position, CorruptionError, DifficultySpec,
    DocKind, Document, GenerationError, RenderError,
};

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Generation config, usually loaded from a TOML file. Only `count` and
/// `master_seed` are required; everything else has spread-everything
/// defaults.
///
/// ```toml
/// count = 100
/// master_seed = 42
/// views = ["board_only", "docs_only"]
/// policies = ["world_authoritative", "doc_authoritative"]
/// query_kinds = ["mcq_boolean", "claim_list_freeform"]
/// doc_kinds = ["fen_text", "board_prose", "pgn_log", "commentary"]
/// corrupt_fraction = 0.25
/// distractors = 3
///
/// [difficulty]
/// min_pieces = 4
/// max_pieces = 32
/// min_ply = 0
/// max_ply = 60
/// require_ongoing = true
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    #[serde(default)]
    pub dataset_id: Option<String>,
    pub count: usize,
    pub master_seed: u64,
    #[serde(default = "default_views")]
    pub views: Vec<String>,
    #[serde(default = "default_policies")]
    pub policies: Vec<String>,
    #[serde(default = "default_query_kinds")]
    pub query_kinds: Vec<QueryKind>,
    #[serde(default = "default_doc_kinds")]
    pub doc_kinds: Vec<DocKind>,
    /// Share of instances that get exactly one corrupted document.
    #[serde(default = "default_corrupt_fraction")]
    pub corrupt_fraction: f64,
    /// Number of placement/log deltas per corrupted document.
    #[serde(default = "default_corrupt_deltas")]
    pub corrupt_deltas: usize,
    #[serde(default = "default_distractors")]
    pub distractors: usize,
    #[serde(default)]
    pub difficulty: DifficultySpec,
}

fn default_views() -> Vec<String> {
    crate::views::VIEW_PRESET_NAMES.iter().map(|s| s.to_string()).collect()
}

fn default_policies() -> Vec<String> {
    crate::truth::PRESET_NAMES.iter().map(|s| s.to_string()).collect()
}

fn default_query_kinds() -> Vec<QueryKind> {
    QueryKind::ALL.to_vec()
}

fn default_doc_kinds() -> Vec<DocKind> {
    DocKind::ALL.to_vec()
}

fn default_corrupt_fraction() -> f64 {
    0.25
}

fn default_corrupt_deltas() -> usize {
    1
}

fn default_distractors() -> usize {
    crate::querygen::DEFAULT_DISTRACTORS
}

impl GenerateConfig {
    pub fn from_toml_str(text: &str) -> Result<GenerateConfig, GenerateError> {
        toml::from_str(text)
            .map_err(|e| GenerateError::BadConfig(format!("could not parse config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<GenerateConfig, GenerateError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            GenerateError::BadConfig(format!("could not read {}: {e}", path.display()))
        })?;
        GenerateConfig::from_toml_str(&text)
    }

    pub fn dataset_id(&self) -> String {
        self.dataset_id
            .clone()
            .unwrap_or_else(|| format!("claimcheck-{:016x}-{}", self.master_seed, self.count))
    }

    /// Resolve preset names and check cross-field consistency.
    fn resolve(&self) -> Result<ResolvedConfig, GenerateError> {
        if self.count == 0 {
            return Err(GenerateError::BadConfig(
                "count must be at least 1; refusing to generate an empty dataset".to_string(),
            ));
        }
        if self.views.is_empty()
            || self.policies.is_empty()
            || self.query_kinds.is_empty()
            || self.doc_kinds.is_empty()
        {
            return Err(GenerateError::BadConfig(
                "views, policies, query_kinds, and doc_kinds must all be non-empty".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.corrupt_fraction) {
            return Err(GenerateError::BadConfig(format!(
                "corrupt_fraction must be within [0, 1], got {}",
                self.corrupt_fraction
            )));
        }
        if self.corrupt_deltas == 0 {
            return Err(GenerateError::BadConfig(
                "corrupt_deltas must be at least 1".to_string(),
            ));
        }
        if !(1..=10).contains(&self.distractors) {
            return Err(GenerateError::BadConfig(format!(
                "distractors must be within 1..=10, got {}",
                self.distractors
            )));
        }
        let views: Vec<ViewConfig> = self
            .views
            .iter()
            .map(|name| ViewConfig::preset(name))
            .collect::<Result<_, _>>()?;
        for view in &views {
            for kind in view.included_docs() {
                if !self.doc_kinds.contains(kind) {
                    return Err(GenerateError::BadConfig(format!(
                        "view {} includes {kind} documents, but doc_kinds does not render them",
                        view.name()
                    )));
                }
            }
        }
        let policies: Vec<ConflictPolicy> = self
            .policies
            .iter()
            .map(|name| ConflictPolicy::preset(name))
            .collect::<Result<_, _>>()?;
        Ok(ResolvedConfig { views, policies })
    }
}

struct ResolvedConfig {
    views: Vec<ViewConfig>,
    policies: Vec<ConflictPolicy>,
}

// ---------------------------------------------------------------------------
// Seed derivation
// ---------------------------------------------------------------------------

/// splitmix64 finalizer; the standard 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The per-instance seed: mix the index into the master seed so consecutive
/// indices land in unrelated parts of the stream.
pub fn instance_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Independent sub-streams of one instance seed (world sampling, documents,
/// corruption, query, ...).
fn substream(instance_seed: u64, lane: u64) -> u64 {
    splitmix64(instance_seed ^ lane)
}

const LANE_SAMPLE: u64 = 1;
const LANE_DOCS: u64 = 2;
const LANE_CORRUPT: u64 = 3;
const LANE_QUERY: u64 = 4;
const LANE_CORRUPT_PICK: u64 = 5;

/// Map a u64 to the unit interval using its top 53 bits.
fn unit_float(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("config: {0}")]
    BadConfig(String),
    #[error("instance {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: GenerationError,
    },
    #[error("instance {index}: {source}")]
    Render {
        index: usize,
        #[source]
        source: RenderError,
    },
    #[error("instance {index}: could not corrupt any document: {source}")]
    Corrupt {
        index: usize,
        #[source]
        source: CorruptionError,
    },
    #[error("instance {index}: {source}")]
    Query {
        index: usize,
        #[source]
        source: QueryError,
    },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    View(#[from] ViewError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Generate the full instance list for a config. Deterministic: the same
/// config yields identical instances, byte for byte once serialized.
pub fn generate_dataset(config: &GenerateConfig) -> Result<Vec<BenchInstance>, GenerateError> {
    let resolved = config.resolve()?;
    let mut instances = Vec::with_capacity(config.count);
    for index in 0..config.count {
        instances.push(generate_instance(config, &resolved, index)?);
    }
    Ok(instances)
}

/// Generate and write a dataset, returning its manifest.
pub fn generate_to_file(config: &GenerateConfig, out: &Path) -> Result<Manifest, GenerateError> {
    let instances = generate_dataset(config)?;
    let meta = DatasetMeta {
        dataset_id: config.dataset_id(),
        master_seed: config.master_seed,
        difficulty: config.difficulty,
    };
    Ok(write_dataset(&instances, out, &meta)?)
}

fn generate_instance(
    config: &GenerateConfig,
    resolved: &ResolvedConfig,
    index: usize,
) -> Result<BenchInstance, GenerateError> {
    let seed = instance_seed(config.master_seed, index as u64);
    let view = resolved.views[index % resolved.views.len()].clone();
    let policy = resolved.policies[index % resolved.policies.len()].clone();
    let query_kind = config.query_kinds[index % config.query_kinds.len()];

    let (state, history) = sample_position(substream(seed, LANE_SAMPLE), &config.difficulty)
        .map_err(|source| GenerateError::Sample { index, source })?;

    let mut documents =
        render_documents(&state, Some(&history), &config.doc_kinds, substream(seed, LANE_DOCS))
            .map_err(|source| GenerateError::Render { index, source })?;

    let corrupt_draw = substream(seed, LANE_CORRUPT_PICK);
    if unit_float(corrupt_draw) < config.corrupt_fraction {
        corrupt_documents(
            &mut documents,
            &state,
            &history,
            substream(seed, LANE_CORRUPT),
            config.corrupt_deltas,
            corrupt_draw,
        )
        .map_err(|source| GenerateError::Corrupt { index, source })?;
    }

    let resolver = Resolver::for_instance(
        &state,
        Some(&history),
        &documents,
        &policy,
        EvalBudget::default(),
    );
    let resolve = |claim: &AtomicClaim| resolver.resolve(claim).unwrap_or(TruthValue::Unknown);
    let query = make_query(
        &state,
        Some(&history),
        query_kind,
        substream(seed, LANE_QUERY),
        &resolve,
        config.distractors,
    )
    .map_err(|source| GenerateError::Query { index, source })?;

    let gold = match query.gold() {
        GoldAnswer::OptionIndex { index: gold_index } => GoldRecord::Option {
            index: gold_index,
            option_text: query.options()[gold_index].clone(),
            probe_truth: resolve(query.probe_claim().expect("MCQ queries carry a probe")),
        },
        GoldAnswer::GradeEmittedClaims => GoldRecord::GradeEmittedClaims,
    };

    Ok(BenchInstance::new(
        format!("i{index:06}"),
        &state,
        &history,
        documents,
        view,
        policy,
        query,
        gold,
        Seeds { master: config.master_seed, instance: seed },
    ))
}

/// Corrupt this instance's documents so they tell one consistent wrong
/// story against the reference world.
///
/// A *state* perturbation re-renders every state-bearing document (all but
/// the move log) from the same perturbed state — same seed, so they share
/// identical deltas — guaranteeing that whichever document a
/// document-priority policy consults first answers witness claims from the
/// corrupted story. A *log* perturbation touches only the move log: the
/// other documents answer history claims Unknown, so the altered log decides
/// under document priority either way.
///
/// The draw picks which story leads; an infeasible story (no move log or an
/// empty history; no material to edit) falls back to the other.
fn corrupt_documents(
    documents: &mut [Document],
    state: &crate::chess::BoardState,
    history: &crate::chess::MoveHistory,
    seed: u64,
    n_deltas: usize,
    draw: u64,
) -> Result<(), CorruptionError> {
    let picked = (draw % documents.len() as u64) as usize;
    let log_story_first = documents[picked].kind() == DocKind::PgnLog;
    if log_story_first {
        corrupt_log_story(documents, state, history, seed, n_deltas)
            .or_else(|_| corrupt_state_story(documents, state, history, seed, n_deltas))
    } else {
        corrupt_state_story(documents, state, history, seed, n_deltas).or_else(|state_err| {
            corrupt_log_story(documents, state, history, seed, n_deltas).map_err(|_| state_err)
        })
    }
}

fn corrupt_log_story(
    documents: &mut [Document],
    state: &crate::chess::BoardState,
    history: &crate::chess::MoveHistory,
    seed: u64,
    n_deltas: usize,
) -> Result<(), CorruptionError> {
    let Some(i) = documents.iter().position(|d| d.kind() == DocKind::PgnLog) else {
        return Err(CorruptionError::EmptyHistory);
    };
    documents[i] = corrupt_document(
        documents[i].doc_id().to_string(),
        DocKind::PgnLog,
        state,
        Some(history),
        seed,
        n_deltas,
    )?;
    Ok(())
}

fn corrupt_state_story(
    documents: &mut [Document],
    state: &crate::chess::BoardState,
    history: &crate::chess::MoveHistory,
    seed: u64,
    n_deltas: usize,
) -> Result<(), CorruptionError> {
    let targets: Vec<usize> = (0..documents.len())
        .filter(|&i| documents[i].kind() != DocKind::PgnLog)
        .collect();
    if targets.is_empty() {
        return Err(CorruptionError::Budget { attempts: 0 });
    }
    let mut replacements = Vec::with_capacity(targets.len());
    for &i in &targets {
        replacements.push((
            i,
            corrupt_document(
                documents[i].doc_id().to_string(),
                documents[i].kind(),
                state,
                Some(history),
                seed,
                n_deltas,
            )?,
        ));
    }
    for (i, doc) in replacements {
        documents[i] = doc;
    }
    Ok(())
}
