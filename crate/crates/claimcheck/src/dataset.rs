//! Benchmark instance and dataset serialization.
//!
//! A dataset is a UTF-8 JSONL file — one self-describing [`BenchInstance`]
//! per line — plus a sidecar manifest (`<dataset>.manifest.json`) recording
//! the generation parameters and a SHA-256 digest over the instance lines.
//! [`read_dataset`] refuses files whose digest, line count, or schema version
//! disagree with the manifest, and re-derives the gold labels of a sampled
//! share of instances through the oracle, so silent drift between stored and
//! recomputable truth cannot pass unnoticed.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chess::{parse_fen, render_fen, BoardState, MoveHistory};
use crate::claims::{AtomicClaim, ClaimKind};
use crate::oracle::EvalBudget;
use crate::querygen::{GoldAnswer, QueryInstance};
use crate::truth::{ConflictPolicy, TruthValue};
use crate::views::{assemble_prompt, Resolver, ViewConfig, ViewError};
use crate::worldgen::{DifficultySpec, Document};
use crate::SCHEMA_VERSION;

/// Share of instances whose gold labels are recomputed on read.
pub const DEFAULT_AUDIT_FRACTION: f64 = 0.05;

// ---------------------------------------------------------------------------
// Instance schema
// ---------------------------------------------------------------------------

/// The reference world, stored as plain text codecs so a dataset line is
/// readable (and diffable) without this crate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldRecord {
    pub fen: String,
    pub movetext: String,
}

/// The seeds an instance was generated from: the dataset-wide master seed
/// and the per-instance stream derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub instance: u64,
}

/// The stored gold label, denormalized from the query for direct use by
/// graders and for read-time auditing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GoldRecord {
    /// MCQ: the correct option, plus the policy-resolved truth of the probe
    /// claim behind it.
    Option { index: usize, option_text: String, probe_truth: TruthValue },
    /// Freeform: no single answer; every emitted claim is graded.
    GradeEmittedClaims,
}

/// One benchmark instance: everything needed to pose the question, grade any
/// answer to it, and re-derive its gold labels from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    schema_version: u32,
    instance_id: String,
    environment_kind: String,
    world: WorldRecord,
    documents: Vec<Document>,
    view: ViewConfig,
    policy: ConflictPolicy,
    query: QueryInstance,
    gold: GoldRecord,
    seeds: Seeds,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance {instance_id}: bad world FEN: {message}")]
    BadFen { instance_id: String, message: String },
    #[error("instance {instance_id}: bad world movetext: {message}")]
    BadMovetext { instance_id: String, message: String },
    #[error("instance {instance_id}: movetext does not replay to the stored FEN")]
    WorldMismatch { instance_id: String },
    #[error("instance {instance_id}: {0}", instance_id = .1)]
    View(ViewError, String),
}

impl BenchInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        instance_id: String,
        state: &BoardState,
        history: &MoveHistory,
        documents: Vec<Document>,
        view: ViewConfig,
        policy: ConflictPolicy,
        query: QueryInstance,
        gold: GoldRecord,
        seeds: Seeds,
    ) -> BenchInstance {
        BenchInstance {
            schema_version: SCHEMA_VERSION,
            instance_id,
            environment_kind: "chess".to_string(),
            world: WorldRecord { fen: render_fen(state), movetext: history.to_movetext() },
            documents,
            view,
            policy,
            query,
            gold,
            seeds,
        }
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn environment_kind(&self) -> &str {
        &self.environment_kind
    }

    pub fn world(&self) -> &WorldRecord {
        &self.world
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn view(&self) -> &ViewConfig {
        &self.view
    }

    pub fn policy(&self) -> &ConflictPolicy {
        &self.policy
    }

    pub fn query(&self) -> &QueryInstance {
        &self.query
    }

    pub fn gold(&self) -> &GoldRecord {
        &self.gold
    }

    pub fn seeds(&self) -> Seeds {
        self.seeds
    }

    /// Parse the stored reference position.
    pub fn world_state(&self) -> Result<BoardState, InstanceError> {
        parse_fen(&self.world.fen).map_err(|e| InstanceError::BadFen {
            instance_id: self.instance_id.clone(),
            message: e.to_string(),
        })
    }

    /// Replay the stored reference history, checking it reaches the stored
    /// position.
    pub fn world_history(&self) -> Result<MoveHistory, InstanceError> {
        let history =
            MoveHistory::from_movetext(&self.world.movetext).map_err(|e| {
                InstanceError::BadMovetext {
                    instance_id: self.instance_id.clone(),
                    message: e.to_string(),
                }
            })?;
        let state = self.world_state()?;
        if history.final_state() != &state {
            return Err(InstanceError::WorldMismatch { instance_id: self.instance_id.clone() });
        }
        Ok(history)
    }

    /// The policy resolver over this instance's sources.
    pub fn resolver(&self, budget: EvalBudget) -> Result<Resolver, InstanceError> {
        let state = self.world_state()?;
        let history = self.world_history()?;
        Ok(Resolver::for_instance(&state, Some(&history), &self.documents, &self.policy, budget))
    }

    /// Assemble the exact prompt this instance poses under its view/policy.
    pub fn prompt(&self) -> Result<String, InstanceError> {
        let state = self.world_state()?;
        let history = self.world_history()?;
        assemble_prompt(&state, Some(&history), &self.documents, &self.query, &self.view, &self.policy)
            .map_err(|e| InstanceError::View(e, self.instance_id.clone()))
    }

    /// The difficulty bucket this instance falls into, by total piece count
    /// of the reference position. Used as a metrics breakdown key.
    pub fn piece_bucket(&self) -> Result<&'static str, InstanceError> {
        Ok(piece_bucket(self.world_state()?.total_pieces()))
    }
}

/// Bucket a total piece count for metric breakdowns.
pub fn piece_bucket(total_pieces: usize) -> &'static str {
    match total_pieces {
        0..=8 => "pieces_02_08",
        9..=20 => "pieces_09_20",
        _ => "pieces_21_32",
    }
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// Generation parameters plus a content digest, written alongside the
/// dataset as `<dataset>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_id: String,
    pub schema_version: u32,
    pub count: usize,
    pub master_seed: u64,
    pub difficulty: DifficultySpec,
    pub template_version: String,
    /// SHA-256 (hex) over the dataset's instance lines, newlines included.
    pub content_digest: String,
}

/// The manifest-relevant generation parameters [`write_dataset`] cannot
/// recover from the instances themselves.
#[derive(Debug, Clone)]
pub struct DatasetMeta {
    pub dataset_id: String,
    pub master_seed: u64,
    pub difficulty: DifficultySpec,
}

pub fn manifest_path(dataset_path: &Path) -> PathBuf {
    let mut name = dataset_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    dataset_path.with_file_name(name)
}

// ---------------------------------------------------------------------------
// Write / read
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("refusing to write an empty dataset")]
    Empty,
    #[error("duplicate instance id {0:?}")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed instance: {message}")]
    MalformedLine { path: String, line: usize, message: String },
    #[error("{path}: schema version {found} but this build expects {expected}")]
    SchemaVersion { path: String, found: u32, expected: u32 },
    #[error("{path}: content digest mismatch: manifest records {expected}, file hashes to {actual}")]
    DigestMismatch { path: String, expected: String, actual: String },
    #[error("{path}: manifest records {expected} instances, file has {actual}")]
    CountMismatch { path: String, expected: usize, actual: usize },
    #[error("gold audit failed on instance {instance_id}: {message}")]
    AuditFailure { instance_id: String, message: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io { path: path.display().to_string(), source }
}

/// Serialize instances to JSONL at `path` and the manifest alongside it.
/// Keys appear in fixed struct order, so identical instances produce a
/// byte-identical file.
pub fn write_dataset(
    instances: &[BenchInstance],
    path: &Path,
    meta: &DatasetMeta,
) -> Result<Manifest, DatasetError> {
    if instances.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut seen = HashSet::new();
    for instance in instances {
        if !seen.insert(instance.instance_id.as_str()) {
            return Err(DatasetError::DuplicateId(instance.instance_id.clone()));
        }
    }

    let mut hasher = Sha256::new();
    let mut buffer = Vec::new();
    for instance in instances {
        let line = serde_json::to_string(instance)
            .expect("instances serialize: all fields are serializable");
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
        buffer.extend_from_slice(line.as_bytes());
        buffer.push(b'\n');
    }
    let content_digest = hex::encode(hasher.finalize());

    let manifest = Manifest {
        dataset_id: meta.dataset_id.clone(),
        schema_version: SCHEMA_VERSION,
        count: instances.len(),
        master_seed: meta.master_seed,
        difficulty: meta.difficulty,
        template_version: crate::querygen::TEMPLATE_VERSION.to_string(),
        content_digest,
    };

    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&buffer).map_err(|e| io_err(path, e))?;
    let manifest_file = manifest_path(path);
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .expect("manifest serializes: all fields are serializable");
    fs::write(&manifest_file, manifest_json.as_bytes())
        .map_err(|e| io_err(&manifest_file, e))?;
    Ok(manifest)
}

/// Read a dataset with the default 5% gold audit.
pub fn read_dataset(path: &Path) -> Result<(Vec<BenchInstance>, Manifest), DatasetError> {
    read_dataset_with_audit(path, DEFAULT_AUDIT_FRACTION)
}

/// Read and verify a dataset. Every line must parse and carry the expected
/// schema version; the file digest and count must match the manifest; and a
/// deterministic `audit_fraction` sample of instances has its gold labels
/// recomputed through the oracle.
pub fn read_dataset_with_audit(
    path: &Path,
    audit_fraction: f64,
) -> Result<(Vec<BenchInstance>, Manifest), DatasetError> {
    let manifest_file = manifest_path(path);
    let manifest_text =
        fs::read_to_string(&manifest_file).map_err(|e| io_err(&manifest_file, e))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text).map_err(|e| {
        DatasetError::MalformedLine {
            path: manifest_file.display().to_string(),
            line: 1,
            message: e.to_string(),
        }
    })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(DatasetError::SchemaVersion {
            path: manifest_file.display().to_string(),
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }

    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut hasher = Sha256::new();
    let mut instances = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
        let instance: BenchInstance = serde_json::from_str(line).map_err(|e| {
            DatasetError::MalformedLine {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            }
        })?;
        if instance.schema_version != SCHEMA_VERSION {
            return Err(DatasetError::SchemaVersion {
                path: path.display().to_string(),
                found: instance.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        instances.push(instance);
    }

    let actual_digest = hex::encode(hasher.finalize());
    if actual_digest != manifest.content_digest {
        return Err(DatasetError::DigestMismatch {
            path: path.display().to_string(),
            expected: manifest.content_digest.clone(),
            actual: actual_digest,
        });
    }
    if instances.len() != manifest.count {
        return Err(DatasetError::CountMismatch {
            path: path.display().to_string(),
            expected: manifest.count,
            actual: instances.len(),
        });
    }

    // Deterministic audit sample: every k-th instance, where k covers the
    // requested fraction. fraction <= 0 disables the audit; >= 1 audits all.
    if audit_fraction > 0.0 {
        let stride = if audit_fraction >= 1.0 {
            1
        } else {
            (1.0 / audit_fraction).round().max(1.0) as usize
        };
        for instance in instances.iter().step_by(stride) {
            audit_gold(instance).map_err(|message| DatasetError::AuditFailure {
                instance_id: instance.instance_id.clone(),
                message,
            })?;
        }
    }

    Ok((instances, manifest))
}

/// Recompute an instance's gold labels from its world, documents, and policy
/// through the oracle, and compare with what is stored.
pub fn audit_gold(instance: &BenchInstance) -> Result<(), String> {
    let resolver =
        instance.resolver(EvalBudget::default()).map_err(|e| e.to_string())?;
    match (instance.query.gold(), &instance.gold) {
        (GoldAnswer::GradeEmittedClaims, GoldRecord::GradeEmittedClaims) => {
            if instance.query.probe_claim().is_some() {
                return Err("freeform query unexpectedly carries a probe claim".to_string());
            }
            Ok(())
        }
        (
            GoldAnswer::OptionIndex { index },
            GoldRecord::Option { index: stored, option_text, probe_truth },
        ) => {
            if index != *stored {
                return Err(format!(
                    "query says gold option {index}, instance records {stored}"
                ));
            }
            let options = instance.query.options();
            let Some(stored_text) = options.get(index) else {
                return Err(format!("gold index {index} out of range"));
            };
            if stored_text != option_text {
                return Err(format!(
                    "gold option text {option_text:?} does not match option {index} ({stored_text:?})"
                ));
            }
            let Some(probe) = instance.query.probe_claim() else {
                return Err("MCQ query lacks a probe claim".to_string());
            };
            let resolved = resolver.resolve(probe).map_err(|e| e.to_string())?;
            if resolved != *probe_truth {
                return Err(format!(
                    "stored probe truth {} but oracle resolves {} for {probe}",
                    probe_truth.as_str(),
                    resolved.as_str()
                ));
            }
            if resolved == TruthValue::Unknown {
                return Err(format!("probe {probe} resolves Unknown under the policy"));
            }
            audit_option_semantics(instance, &resolver, probe, index)
        }
        (query_gold, stored) => Err(format!(
            "gold shape mismatch: query carries {query_gold:?}, instance stores {stored:?}"
        )),
    }
}

/// Check the option list against the probe: the gold option must assert the
/// resolved-true probe, and for multichoice shapes every distractor's claim
/// must resolve false.
fn audit_option_semantics(
    instance: &BenchInstance,
    resolver: &Resolver,
    probe: &AtomicClaim,
    gold_index: usize,
) -> Result<(), String> {
    let options = instance.query.options();
    // Boolean options assert the probe (Yes) or its denial (No).
    if options == ["Yes", "No"] {
        let truth = resolver.resolve(probe).map_err(|e| e.to_string())?;
        let expected = if truth == TruthValue::True { 0 } else { 1 };
        if gold_index != expected {
            return Err(format!(
                "boolean gold index {gold_index} inconsistent with probe truth {}",
                truth.as_str()
            ));
        }
        return Ok(());
    }
    // Multichoice options instantiate the probe's shape.
    for (i, option) in options.iter().enumerate() {
        let claim = match &probe.kind {
            ClaimKind::PieceAt { occupant, .. } => {
                let square = option.parse().map_err(|_| {
                    format!("option {option:?} is not a square for probe {probe}")
                })?;
                AtomicClaim::new(ClaimKind::PieceAt { square, occupant: *occupant })
            }
            ClaimKind::MaterialCount { color, piece, .. } => {
                let count = option.parse().map_err(|_| {
                    format!("option {option:?} is not a count for probe {probe}")
                })?;
                AtomicClaim::new(ClaimKind::MaterialCount { color: *color, piece: *piece, count })
            }
            other => return Err(format!("unexpected multichoice probe shape {other:?}")),
        };
        let truth = resolver.resolve(&claim).map_err(|e| e.to_string())?;
        let expected =
            if i == gold_index { TruthValue::True } else { TruthValue::False };
        if truth != expected {
            return Err(format!(
                "option {i} ({option:?}) resolves {} but should be {}",
                truth.as_str(),
                expected.as_str()
            ));
        }
    }
    Ok(())
}
