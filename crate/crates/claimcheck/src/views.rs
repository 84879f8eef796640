//! Observability control and prompt assembly.
//!
//! A [`ViewConfig`] decides what the model gets to *see*: the raw board, the
//! move history, and/or the rendered documents. It never affects what is
//! *true* — truth is resolved by a [`Resolver`] against the instance's full
//! source list under its conflict policy, whether or not those sources were
//! shown. That separation (the world keeps existing when the view hides it)
//! is load-bearing for the whole benchmark and is pinned by tests.
//!
//! [`assemble_prompt`] renders the final prompt in a fixed order — world
//! facets and documents, then the question, then the response-format
//! instructions, then (if the policy discloses itself) a one-paragraph
//! statement of the source priority — so identical inputs produce
//! byte-identical prompts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{render_fen, BoardState, MoveHistory};
use crate::claims::AtomicClaim;
use crate::oracle::{eval_claim, EvalBudget, World};
use crate::querygen::{QueryInstance, QueryKind};
use crate::truth::{
    combine_sources, combine_sources_traced, ConflictPolicy, CoreError, SourceClass, SourceKind,
    TruthSource, TruthValue,
};
use crate::worldgen::{DocKind, Document};

// ---------------------------------------------------------------------------
// View configuration
// ---------------------------------------------------------------------------

/// Which parts of the world appear in the prompt. The query itself is always
/// visible; everything else is opt-in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewConfig {
    name: String,
    included_docs: Vec<DocKind>,
    include_board: bool,
    include_history: bool,
}

/// The named view presets, from full direct observability to documents-only.
pub const VIEW_PRESET_NAMES: [&str; 4] =
    ["board_only", "board_plus_history", "history_only", "docs_only"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ViewError {
    #[error("unknown view preset {0:?}; expected one of board_only, board_plus_history, history_only, docs_only")]
    UnknownPreset(String),
    #[error("the view includes {kind} documents but the instance has none")]
    MissingDocKind { kind: DocKind },
}

impl ViewConfig {
    pub fn new(
        name: impl Into<String>,
        included_docs: Vec<DocKind>,
        include_board: bool,
        include_history: bool,
    ) -> ViewConfig {
        ViewConfig { name: name.into(), included_docs, include_board, include_history }
    }

    /// Look up one of the named presets.
    pub fn preset(name: &str) -> Result<ViewConfig, ViewError> {
        match name {
            "board_only" => Ok(ViewConfig::new("board_only", vec![], true, false)),
            "board_plus_history" => {
                Ok(ViewConfig::new("board_plus_history", vec![], true, true))
            }
            "history_only" => Ok(ViewConfig::new("history_only", vec![], false, true)),
            "docs_only" => {
                Ok(ViewConfig::new("docs_only", DocKind::ALL.to_vec(), false, false))
            }
            other => Err(ViewError::UnknownPreset(other.to_string())),
        }
    }

    /// All four presets, in [`VIEW_PRESET_NAMES`] order.
    pub fn presets() -> Vec<ViewConfig> {
        VIEW_PRESET_NAMES
            .iter()
            .map(|name| ViewConfig::preset(name).expect("preset names are valid"))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn included_docs(&self) -> &[DocKind] {
        &self.included_docs
    }

    pub fn include_board(&self) -> bool {
        self.include_board
    }

    pub fn include_history(&self) -> bool {
        self.include_history
    }
}

// ---------------------------------------------------------------------------
// Per-source truth and policy resolution
// ---------------------------------------------------------------------------

/// Evaluate one claim against one truth source.
///
/// * `Environment` answers from the reference state (and history, when the
///   source carries one).
/// * `Document` answers from the document's own derived state; only a move
///   log carries a history, so other document kinds answer `Unknown` to
///   history-dependent claims.
/// * `Parametric` holds no world at all and always answers `Unknown` — it
///   stands for whatever the model brought with it, which the oracle cannot
///   inspect.
pub fn source_truth(claim: &AtomicClaim, source: &TruthSource, budget: &EvalBudget) -> TruthValue {
    let Some(state) = &source.state else {
        return TruthValue::Unknown;
    };
    match World::new(state.clone(), source.history.clone()) {
        Ok(world) => eval_claim(claim, &world, budget),
        // A source whose history does not replay to its state is malformed;
        // treat it as unable to answer rather than panicking mid-grade.
        Err(_) => TruthValue::Unknown,
    }
}

/// The standard source list for an instance: the environment first, then one
/// source per document (in instance order), then the parametric placeholder.
/// [`ConflictPolicy::arrange`] reorders this by class priority.
pub fn instance_sources(
    state: &BoardState,
    history: Option<&MoveHistory>,
    documents: &[Document],
) -> Vec<TruthSource> {
    let mut sources = Vec::with_capacity(documents.len() + 2);
    sources.push(TruthSource::environment(state.clone(), history.cloned()));
    for doc in documents {
        sources.push(TruthSource::document(
            doc.doc_id(),
            doc.derived_state().clone(),
            doc.derived_history().cloned(),
        ));
    }
    sources.push(TruthSource::parametric());
    sources
}

/// A claim-to-truth mapping for one instance: the instance's sources, already
/// arranged in policy-priority order, plus the evaluation budget. This is the
/// single place where "what is true here?" gets answered — query generation
/// and grading both go through it.
#[derive(Debug, Clone)]
pub struct Resolver {
    ordered: Vec<TruthSource>,
    budget: EvalBudget,
}

impl Resolver {
    pub fn new(sources: &[TruthSource], policy: &ConflictPolicy, budget: EvalBudget) -> Resolver {
        let ordered = policy.arrange(sources).into_iter().cloned().collect();
        Resolver { ordered, budget }
    }

    /// Build a resolver straight from instance parts.
    pub fn for_instance(
        state: &BoardState,
        history: Option<&MoveHistory>,
        documents: &[Document],
        policy: &ConflictPolicy,
        budget: EvalBudget,
    ) -> Resolver {
        Resolver::new(&instance_sources(state, history, documents), policy, budget)
    }

    /// The policy-resolved truth of a claim: the first non-`Unknown` answer
    /// in priority order.
    pub fn resolve(&self, claim: &AtomicClaim) -> Result<TruthValue, CoreError> {
        combine_sources(&claim.id(), &self.answers(claim))
    }

    /// Like [`Resolver::resolve`], also naming the source that settled it.
    pub fn resolve_traced(
        &self,
        claim: &AtomicClaim,
    ) -> Result<(TruthValue, Option<SourceKind>), CoreError> {
        combine_sources_traced(&claim.id(), &self.answers(claim))
    }

    fn answers(&self, claim: &AtomicClaim) -> Vec<(SourceKind, TruthValue)> {
        self.ordered
            .iter()
            .map(|source| (source.kind.clone(), source_truth(claim, source, &self.budget)))
            .collect()
    }

    /// The sources this resolver consults, in priority order.
    pub fn sources(&self) -> &[TruthSource] {
        &self.ordered
    }
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

/// Instructions appended to every prompt, fixing the exact response grammar
/// the grader parses.
pub fn response_instructions(kind: QueryKind) -> &'static str {
    match kind {
        QueryKind::McqBoolean | QueryKind::McqMultichoice => {
            "Answer with exactly one line containing the letter of your chosen option \
             (for example: A).\n\
             If you cannot commit to an answer, reply with the single word ABSTAIN instead."
        }
        QueryKind::ClaimListFreeform => {
            "Reply with one atomic claim per line, using only this grammar:\n\
             \x20 piece_at(<square>, <occupant>)        e.g. piece_at(e4, white_pawn) or piece_at(c3, empty)\n\
             \x20 side_to_move(<color>)                 color: white | black\n\
             \x20 in_check(<color>)\n\
             \x20 castling_right(<color>, <wing>)       wing: kingside | queenside\n\
             \x20 en_passant_available(<square> | any)\n\
             \x20 material_count(<color>, <piece>, <n>) piece: pawn | knight | bishop | rook | queen | king\n\
             \x20 move_legal(<move>)                    move in coordinate form, e.g. g1f3 or e7e8q\n\
             \x20 can_capture_in_one(<color>, <piece>)\n\
             \x20 mate_in(<color>, <k>)                 k: 1 | 2\n\
             \x20 game_status(<status>)                 status: ongoing | checkmate | stalemate | draw_rule\n\
             \x20 move_was_played(<ply>, <move>)        ply: 1-based half-move number\n\
             \x20 history_length(<n>)\n\
             Claims you omit are not penalized; false claims count against you.\n\
             If you cannot answer, reply with the single word ABSTAIN on its own line."
        }
    }
}

/// Render the full prompt for one instance. Layout, in order: a fixed
/// preamble; the board (FEN) if the view includes it; the move history if
/// the view includes it; each included document; the question (with lettered
/// options for MCQ kinds); the response-format instructions; and the policy
/// disclosure paragraph iff the policy asks for it.
///
/// Errors if the view includes a document kind the instance does not have.
pub fn assemble_prompt(
    state: &BoardState,
    history: Option<&MoveHistory>,
    documents: &[Document],
    query: &QueryInstance,
    view: &ViewConfig,
    policy: &ConflictPolicy,
) -> Result<String, ViewError> {
    let mut blocks: Vec<String> = Vec::new();
    blocks.push("You are answering a question about a single chess position.".to_string());

    if view.include_board {
        blocks.push(format!("Current position (FEN):\n{}", render_fen(state)));
    }
    if view.include_history {
        let movetext = match history {
            Some(h) if !h.is_empty() => h.to_movetext(),
            _ => "(no moves have been played)".to_string(),
        };
        blocks.push(format!("Game so far:\n{movetext}"));
    }
    for &kind in &view.included_docs {
        let mut found = false;
        for doc in documents.iter().filter(|d| d.kind() == kind) {
            found = true;
            blocks.push(format!("Document {} ({}):\n{}", doc.doc_id(), doc.kind(), doc.body()));
        }
        if !found {
            return Err(ViewError::MissingDocKind { kind });
        }
    }

    let mut question = format!("Question:\n{}", query.prompt_text());
    if query.kind().is_mcq() {
        for (i, option) in query.options().iter().enumerate() {
            let letter = (b'A' + i as u8) as char;
            question.push_str(&format!("\n  {letter}. {option}"));
        }
    }
    blocks.push(question);
    blocks.push(response_instructions(query.kind()).to_string());

    if policy.disclosure {
        blocks.push(policy.prompt_statement());
    }
    Ok(blocks.join("\n\n"))
}

/// The class of source that would decide claims under this policy when every
/// source can answer: simply the first class in its priority order.
pub fn leading_class(policy: &ConflictPolicy) -> Option<SourceClass> {
    policy.priority.first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::{Color, Piece, PieceKind, Square};
    use crate::claims::ClaimKind;
    use crate::querygen::{make_query, DEFAULT_DISTRACTORS};
    use crate::worldgen::{corrupt_document, render_documents};

    fn sample_world() -> (BoardState, MoveHistory) {
        let history = MoveHistory::from_movetext("1. e4 e5 2. Nf3").unwrap();
        (history.final_state().clone(), history)
    }

    fn sample_query(state: &BoardState, history: &MoveHistory) -> QueryInstance {
        let world = World::new(state.clone(), Some(history.clone())).unwrap();
        let budget = EvalBudget::default();
        let resolve = move |claim: &AtomicClaim| eval_claim(claim, &world, &budget);
        make_query(
            state,
            Some(history),
            QueryKind::McqBoolean,
            3,
            &resolve,
            DEFAULT_DISTRACTORS,
        )
        .unwrap()
    }

    #[test]
    fn presets_cover_the_named_views() {
        for name in VIEW_PRESET_NAMES {
            assert_eq!(ViewConfig::preset(name).unwrap().name(), name);
        }
        assert!(matches!(
            ViewConfig::preset("everything"),
            Err(ViewError::UnknownPreset(_))
        ));
        assert!(ViewConfig::preset("board_only").unwrap().included_docs().is_empty());
        assert_eq!(ViewConfig::preset("docs_only").unwrap().included_docs().len(), 4);
    }

    #[test]
    fn board_only_shows_fen_and_no_documents() {
        let (state, history) = sample_world();
        let docs = render_documents(&state, Some(&history), &DocKind::ALL, 0).unwrap();
        let query = sample_query(&state, &history);
        let policy = ConflictPolicy::preset("world_authoritative").unwrap();
        let view = ViewConfig::preset("board_only").unwrap();
        let prompt =
            assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy).unwrap();
        assert!(prompt.contains(&render_fen(&state)));
        assert!(!prompt.contains("Game so far:"));
        assert!(!prompt.contains("Document "));
        assert!(prompt.contains("Question:"));
    }

    #[test]
    fn history_only_shows_the_move_log_and_no_board() {
        let (state, history) = sample_world();
        let docs = render_documents(&state, Some(&history), &DocKind::ALL, 0).unwrap();
        let query = sample_query(&state, &history);
        let policy = ConflictPolicy::preset("world_authoritative").unwrap();
        let view = ViewConfig::preset("history_only").unwrap();
        let prompt =
            assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy).unwrap();
        assert!(prompt.contains("Game so far:\n1. e4 e5 2. Nf3"));
        assert!(!prompt.contains("Current position (FEN):"));
        assert!(!prompt.contains(&render_fen(&state)));
    }

    #[test]
    fn docs_only_shows_every_document_and_errors_when_one_is_missing() {
        let (state, history) = sample_world();
        let docs = render_documents(&state, Some(&history), &DocKind::ALL, 0).unwrap();
        let query = sample_query(&state, &history);
        let policy = ConflictPolicy::preset("doc_authoritative").unwrap();
        let view = ViewConfig::preset("docs_only").unwrap();
        let prompt =
            assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy).unwrap();
        for doc in &docs {
            assert!(prompt.contains(doc.body()), "missing body of {}", doc.doc_id());
        }

        let partial = &docs[..2]; // fen_text and board_prose only
        let err = assemble_prompt(&state, Some(&history), partial, &query, &view, &policy)
            .unwrap_err();
        assert!(matches!(err, ViewError::MissingDocKind { kind: DocKind::PgnLog }));
    }

    #[test]
    fn disclosure_appends_exactly_one_policy_paragraph() {
        let (state, history) = sample_world();
        let docs = render_documents(&state, Some(&history), &DocKind::ALL, 0).unwrap();
        let query = sample_query(&state, &history);
        let view = ViewConfig::preset("board_plus_history").unwrap();
        let disclosed = ConflictPolicy::preset("docs_override").unwrap();
        let silent =
            ConflictPolicy::new(disclosed.name.clone(), disclosed.priority.clone(), false)
                .unwrap();

        let with = assemble_prompt(&state, Some(&history), &docs, &query, &view, &disclosed)
            .unwrap();
        let without =
            assemble_prompt(&state, Some(&history), &docs, &query, &view, &silent).unwrap();
        let statement = disclosed.prompt_statement();
        assert!(with.contains(&statement));
        assert!(!without.contains(&statement));
        // The disclosure is a pure suffix: everything else is byte-identical.
        assert_eq!(with, format!("{without}\n\n{statement}"));
    }

    #[test]
    fn prompts_are_byte_deterministic() {
        let (state, history) = sample_world();
        let docs = render_documents(&state, Some(&history), &DocKind::ALL, 0).unwrap();
        let query = sample_query(&state, &history);
        let view = ViewConfig::preset("docs_only").unwrap();
        let policy = ConflictPolicy::preset("doc_authoritative").unwrap();
        let a = assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy).unwrap();
        let b = assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mcq_options_are_rendered_with_letters() {
        let (state, history) = sample_world();
        let docs = render_documents(&state, Some(&history), &DocKind::ALL, 0).unwrap();
        let query = sample_query(&state, &history);
        let view = ViewConfig::preset("board_only").unwrap();
        let policy = ConflictPolicy::preset("world_authoritative").unwrap();
        let prompt =
            assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy).unwrap();
        assert!(prompt.contains("\n  A. Yes"));
        assert!(prompt.contains("\n  B. No"));
    }

    #[test]
    fn source_truth_distinguishes_environment_document_and_parametric() {
        // Corrupt the initial position by construction: move the white queen
        // d1 -> d4, then check the queen's location against each source.
        let reference = BoardState::initial();
        let corrupted = reference
            .with_placement_edits([
                ("d1".parse::<Square>().unwrap(), None),
                (
                    "d4".parse::<Square>().unwrap(),
                    Some(Piece::new(Color::White, PieceKind::Queen)),
                ),
            ])
            .unwrap();
        let claim = AtomicClaim::new(ClaimKind::PieceAt {
            square: "d4".parse().unwrap(),
            occupant: Some(Piece::new(Color::White, PieceKind::Queen)),
        });
        let budget = EvalBudget::default();

        let env = TruthSource::environment(reference, None);
        let doc = TruthSource::document("doc0", corrupted, None);
        let param = TruthSource::parametric();
        assert_eq!(source_truth(&claim, &env, &budget), TruthValue::False);
        assert_eq!(source_truth(&claim, &doc, &budget), TruthValue::True);
        assert_eq!(source_truth(&claim, &param, &budget), TruthValue::Unknown);
    }

    #[test]
    fn resolver_follows_policy_priority_on_corrupted_documents() {
        let (state, history) = sample_world();
        let doc = corrupt_document(
            "doc0-fen_text".to_string(),
            DocKind::FenText,
            &state,
            Some(&history),
            99,
            1,
        )
        .unwrap();
        let witness = doc.deltas()[0].witness().clone();
        let docs = [doc];
        let budget = EvalBudget::default();

        let world_first = Resolver::for_instance(
            &state,
            Some(&history),
            &docs,
            &ConflictPolicy::preset("world_authoritative").unwrap(),
            budget.clone(),
        );
        let docs_first = Resolver::for_instance(
            &state,
            Some(&history),
            &docs,
            &ConflictPolicy::preset("doc_authoritative").unwrap(),
            budget,
        );
        let on_world = world_first.resolve(&witness).unwrap();
        let on_docs = docs_first.resolve(&witness).unwrap();
        assert_ne!(on_world, on_docs, "witness {witness} must flip across policies");

        let (_, deciding) = docs_first.resolve_traced(&witness).unwrap();
        assert_eq!(
            deciding,
            Some(SourceKind::Document { doc_id: "doc0-fen_text".to_string() })
        );
    }

    #[test]
    fn history_claims_resolve_unknown_from_state_only_documents() {
        let (state, history) = sample_world();
        let docs =
            render_documents(&state, Some(&history), &[DocKind::FenText], 0).unwrap();
        let claim = AtomicClaim::new(ClaimKind::MoveWasPlayed {
            ply: 1,
            mv: "e2e4".parse().unwrap(),
        });
        let budget = EvalBudget::default();
        let source = TruthSource::document(
            docs[0].doc_id(),
            docs[0].derived_state().clone(),
            None,
        );
        assert_eq!(source_truth(&claim, &source, &budget), TruthValue::Unknown);

        // But a pgn_log document carries its history and can answer.
        let pgn = render_documents(&state, Some(&history), &[DocKind::PgnLog], 0).unwrap();
        let pgn_source = TruthSource::document(
            pgn[0].doc_id(),
            pgn[0].derived_state().clone(),
            pgn[0].derived_history().cloned(),
        );
        assert_eq!(source_truth(&claim, &pgn_source, &budget), TruthValue::True);
    }
}
