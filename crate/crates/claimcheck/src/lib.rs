//! claimcheck: a benchmark factory and grader for claim-level factuality,
//! built on chess as a fully specified world.
//!
//! The core idea: an answer is judged not as a blob of text but as a set of
//! atomic claims, each of which is evaluated against an explicit source of
//! truth — the actual board state, the documents shown to the model, or
//! nothing at all. A conflict policy ranks those sources, so the same answer
//! can be graded "faithful to the documents" or "true of the world" without
//! changing the grader. Because the world is chess, every gold label is
//! computed by the rules engine rather than annotated by hand.
//!
//! Pipeline stages, each usable on its own:
//!
//! - [`chess`] — the rules engine (board, movegen, FEN/SAN, histories)
//! - [`claims`] — the typed claim language and its text grammar
//! - [`truth`] — truth values, sources, conflict policies, verdicts
//! - [`oracle`] — evaluates one claim against one world
//! - [`worldgen`] — samples positions, renders documents, plants corruptions
//! - [`querygen`] — builds MCQ and free-form queries with verified gold
//! - [`views`] — assembles prompts from a chosen slice of the world
//! - [`dataset`] — JSONL datasets with manifests and integrity digests
//! - [`generate`] — the seeded end-to-end dataset builder
//! - [`client`] / [`runner`] — query an OpenAI-compatible endpoint
//! - [`grader`] — parse responses, grade claims, aggregate metrics

pub mod chess;
pub mod claims;
pub mod client;
pub mod dataset;
pub mod generate;
pub mod grader;
pub mod oracle;
pub mod querygen;
pub mod runner;
pub mod truth;
pub mod views;
pub mod worldgen;

/// Dataset schema version written into every instance and manifest.
pub const SCHEMA_VERSION: u32 = 1;
