//! World sampling and document rendering.
//!
//! This module produces the *environment* half of a benchmark instance:
//!
//! 1. [`sample_position`] draws a reachable `(position, history)` pair by
//!    playing random legal moves from the standard initial position until a
//!    [`DifficultySpec`] is satisfied. Sampling by playout (rather than by
//!    random piece placement) guarantees every position is reachable under
//!    the rules, so no retrograde-analysis checker is needed.
//! 2. [`render_documents`] turns the world into textual artifacts — a FEN
//!    line, an exhaustive prose description, a replayable move log, or
//!    template commentary — each carrying the exact [`BoardState`] its text
//!    was rendered from.
//! 3. [`corrupt`] / [`corrupt_history`] manufacture *controlled* source
//!    conflicts: they perturb a position or a move log, keep the result
//!    structurally valid, and record each edit together with a stored
//!    *witness claim* whose truth value provably differs between the
//!    corrupted artifact and the reference world.
//!
//! Everything here is deterministic in the seed: the same `(seed, spec)`
//! produces byte-identical output on every run and platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{
    is_in_check, legal_moves, render_fen, BoardState, CastleSide, Color, Move, MoveHistory, Piece,
    PieceKind, Square,
};
use crate::claims::{AtomicClaim, ClaimKind};
use crate::oracle::{eval_claim, EvalBudget, World};

/// How many independent playouts [`sample_position`] tries before declaring
/// the spec unsatisfiable.
const SAMPLE_ATTEMPTS: u32 = 400;

/// How many fresh perturbation attempts [`corrupt`] makes before giving up.
const CORRUPT_ATTEMPTS: u32 = 64;

/// How many replacement moves per candidate ply [`corrupt_history`] test-replays.
const REPLACEMENTS_PER_PLY: usize = 8;

// ---------------------------------------------------------------------------
// Difficulty
// ---------------------------------------------------------------------------

/// Bounds on the sampled world: total piece count of the final position,
/// length of the game in plies, and whether the game must still be ongoing
/// (neither checkmate nor stalemate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDifficultySpec", into = "RawDifficultySpec")]
pub struct DifficultySpec {
    min_pieces: u32,
    max_pieces: u32,
    min_ply: u32,
    max_ply: u32,
    require_ongoing: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DifficultyError {
    #[error("piece bounds must satisfy 2 <= min <= max <= 32, got {min}..={max}")]
    PieceBounds { min: u32, max: u32 },
    #[error("ply bounds must satisfy min <= max, got {min}..={max}")]
    PlyBounds { min: u32, max: u32 },
}

impl DifficultySpec {
    pub fn new(
        min_pieces: u32,
        max_pieces: u32,
        min_ply: u32,
        max_ply: u32,
        require_ongoing: bool,
    ) -> Result<DifficultySpec, DifficultyError> {
        if min_pieces < 2 || min_pieces > max_pieces || max_pieces > 32 {
            return Err(DifficultyError::PieceBounds { min: min_pieces, max: max_pieces });
        }
        if min_ply > max_ply {
            return Err(DifficultyError::PlyBounds { min: min_ply, max: max_ply });
        }
        Ok(DifficultySpec { min_pieces, max_pieces, min_ply, max_ply, require_ongoing })
    }

    pub fn min_pieces(&self) -> u32 {
        self.min_pieces
    }

    pub fn max_pieces(&self) -> u32 {
        self.max_pieces
    }

    pub fn min_ply(&self) -> u32 {
        self.min_ply
    }

    pub fn max_ply(&self) -> u32 {
        self.max_ply
    }

    pub fn require_ongoing(&self) -> bool {
        self.require_ongoing
    }
}

impl Default for DifficultySpec {
    /// A broad middle-of-the-road band: anywhere from a sparse endgame to a
    /// full opening board, up to 60 plies deep, game still ongoing.
    fn default() -> DifficultySpec {
        DifficultySpec::new(4, 32, 0, 60, true).expect("default bounds are valid")
    }
}

/// Serde mirror of [`DifficultySpec`] so deserialized specs pass through the
/// same validation as constructed ones.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawDifficultySpec {
    min_pieces: u32,
    max_pieces: u32,
    min_ply: u32,
    max_ply: u32,
    #[serde(default = "default_require_ongoing")]
    require_ongoing: bool,
}

fn default_require_ongoing() -> bool {
    true
}

impl TryFrom<RawDifficultySpec> for DifficultySpec {
    type Error = DifficultyError;

    fn try_from(raw: RawDifficultySpec) -> Result<Self, Self::Error> {
        DifficultySpec::new(
            raw.min_pieces,
            raw.max_pieces,
            raw.min_ply,
            raw.max_ply,
            raw.require_ongoing,
        )
    }
}

impl From<DifficultySpec> for RawDifficultySpec {
    fn from(spec: DifficultySpec) -> RawDifficultySpec {
        RawDifficultySpec {
            min_pieces: spec.min_pieces,
            max_pieces: spec.max_pieces,
            min_ply: spec.min_ply,
            max_ply: spec.max_ply,
            require_ongoing: spec.require_ongoing,
        }
    }
}

// ---------------------------------------------------------------------------
// Position sampling
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error(transparent)]
    BadSpec(#[from] DifficultyError),
    #[error(
        "no playout satisfied the difficulty spec within {attempts} attempts \
         (pieces {min_pieces}..={max_pieces}, ply {min_ply}..={max_ply})"
    )]
    Unsatisfiable { attempts: u32, min_pieces: u32, max_pieces: u32, min_ply: u32, max_ply: u32 },
}

/// Draw a `(position, history)` pair by random legal playout from the
/// standard initial position. The returned position is always
/// `history.final_state()`, so `replay(history) = position` holds by
/// construction. Deterministic in `seed`.
///
/// While the board still holds more pieces than `max_pieces`, captures are
/// preferred whenever one is legal, steering playouts toward sparse
/// positions; at `min_pieces` the bias reverses to quiet moves so the floor
/// is not crossed. A playout that fails the spec is discarded and retried
/// with the next stretch of the seeded stream, up to a fixed attempt budget.
pub fn sample_position(
    seed: u64,
    spec: &DifficultySpec,
) -> Result<(BoardState, MoveHistory), GenerationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SAMPLE_ATTEMPTS {
        let target_ply = rng.gen_range(spec.min_ply..=spec.max_ply);
        if let Some(history) = try_playout(&mut rng, target_ply, spec) {
            let state = history.final_state().clone();
            return Ok((state, history));
        }
    }
    Err(GenerationError::Unsatisfiable {
        attempts: SAMPLE_ATTEMPTS,
        min_pieces: spec.min_pieces,
        max_pieces: spec.max_pieces,
        min_ply: spec.min_ply,
        max_ply: spec.max_ply,
    })
}

/// One playout attempt: play toward `target_ply`, then check the spec.
fn try_playout(rng: &mut ChaCha8Rng, target_ply: u32, spec: &DifficultySpec) -> Option<MoveHistory> {
    let mut history = MoveHistory::empty();
    while (history.len() as u32) < target_ply {
        let state = history.final_state();
        let moves = legal_moves(state);
        if moves.is_empty() {
            break; // game over before reaching the target length
        }
        let picked = pick_move(rng, state, &moves, spec);
        history.push(picked).expect("picked move comes from legal_moves");
    }

    let final_state = history.final_state();
    let pieces = final_state.total_pieces() as u32;
    if pieces < spec.min_pieces || pieces > spec.max_pieces {
        return None;
    }
    let len = history.len() as u32;
    if len < spec.min_ply || len > spec.max_ply {
        return None;
    }
    if spec.require_ongoing && legal_moves(final_state).is_empty() {
        return None;
    }
    Some(history)
}

fn pick_move(rng: &mut ChaCha8Rng, state: &BoardState, moves: &[Move], spec: &DifficultySpec) -> Move {
    let total = state.total_pieces() as u32;
    if total > spec.max_pieces {
        // Too crowded: always capture when possible.
        let captures: Vec<Move> =
            moves.iter().copied().filter(|m| is_capture(state, *m)).collect();
        if let Some(&mv) = captures.choose(rng) {
            return mv;
        }
    } else if total <= spec.min_pieces {
        // At the floor: avoid captures so the floor is not crossed.
        let quiet: Vec<Move> = moves.iter().copied().filter(|m| !is_capture(state, *m)).collect();
        if let Some(&mv) = quiet.choose(rng) {
            return mv;
        }
    }
    *moves.choose(rng).expect("moves is non-empty")
}

/// Whether the move removes an enemy piece (including en passant, where the
/// destination square itself is empty).
fn is_capture(state: &BoardState, mv: Move) -> bool {
    if state.piece_at(mv.to).is_some() {
        return true;
    }
    let is_pawn = state
        .piece_at(mv.from)
        .is_some_and(|p| p.kind == PieceKind::Pawn);
    is_pawn && state.en_passant() == Some(mv.to)
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

/// The textual forms a world can be rendered into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    /// The bare FEN line of the position.
    FenText,
    /// English prose naming the occupant of every occupied square, in a fixed
    /// square order (a1, b1, ... h8), plus turn/castling/en-passant notes.
    BoardProse,
    /// The movetext of the game so far; replayable by the movetext parser.
    PgnLog,
    /// A few template-rendered remarks about the position. Which remarks are
    /// chosen varies with the seed; every remark is derived from the state.
    Commentary,
}

impl DocKind {
    pub const ALL: [DocKind; 4] = [
        DocKind::FenText,
        DocKind::BoardProse,
        DocKind::PgnLog,
        DocKind::Commentary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocKind::FenText => "fen_text",
            DocKind::BoardProse => "board_prose",
            DocKind::PgnLog => "pgn_log",
            DocKind::Commentary => "commentary",
        }
    }
}

impl std::fmt::Display for DocKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DocKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DocKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown document kind {s:?}"))
    }
}

/// A textual artifact describing a position, bundled with the exact state
/// (and, for move logs, the exact history) its text was rendered from. A
/// document with a non-empty `deltas` list was deliberately corrupted:
/// `derived_state` then disagrees with the reference world in precisely the
/// recorded ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    doc_id: String,
    kind: DocKind,
    body: String,
    derived_state: BoardState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derived_history: Option<MoveHistory>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    deltas: Vec<Corruption>,
}

impl Document {
    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn kind(&self) -> DocKind {
        self.kind
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// The state this document's text describes. For faithful documents this
    /// equals the reference state; for corrupted ones it differs.
    pub fn derived_state(&self) -> &BoardState {
        &self.derived_state
    }

    /// The move log behind a `pgn_log` document; `None` for other kinds.
    pub fn derived_history(&self) -> Option<&MoveHistory> {
        self.derived_history.as_ref()
    }

    pub fn deltas(&self) -> &[Corruption] {
        &self.deltas
    }

    pub fn is_faithful(&self) -> bool {
        self.deltas.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("a move log document requires a game history")]
    HistoryRequired,
}

/// Render one faithful document per requested kind. Document ids are
/// `doc<index>-<kind>`. Bodies are deterministic in `seed`.
pub fn render_documents(
    state: &BoardState,
    history: Option<&MoveHistory>,
    kinds: &[DocKind],
    seed: u64,
) -> Result<Vec<Document>, RenderError> {
    kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let doc_id = format!("doc{i}-{kind}");
            make_document(doc_id, kind, state, history, seed.wrapping_add(i as u64))
        })
        .collect()
}

/// Render a single faithful document of the given kind.
pub fn make_document(
    doc_id: String,
    kind: DocKind,
    state: &BoardState,
    history: Option<&MoveHistory>,
    seed: u64,
) -> Result<Document, RenderError> {
    let body = render_body(kind, state, history, seed)?;
    let derived_history = match kind {
        DocKind::PgnLog => Some(history.expect("render_body checked history").clone()),
        _ => None,
    };
    Ok(Document {
        doc_id,
        kind,
        body,
        derived_state: state.clone(),
        derived_history,
        deltas: Vec::new(),
    })
}

fn render_body(
    kind: DocKind,
    state: &BoardState,
    history: Option<&MoveHistory>,
    seed: u64,
) -> Result<String, RenderError> {
    match kind {
        DocKind::FenText => Ok(render_fen(state)),
        DocKind::BoardProse => Ok(render_board_prose(state)),
        DocKind::PgnLog => history
            .map(|h| h.to_movetext())
            .ok_or(RenderError::HistoryRequired),
        DocKind::Commentary => Ok(render_commentary(state, seed)),
    }
}

/// One sentence per occupied square, visiting squares in index order
/// (a1, b1, ..., h1, a2, ... h8), followed by turn, castling, and en-passant
/// notes. Piece sentences always use the verb "stands on".
fn render_board_prose(state: &BoardState) -> String {
    let mut sentences = Vec::new();
    for sq in Square::all() {
        if let Some(piece) = state.piece_at(sq) {
            let article = if piece.kind == PieceKind::King { "The" } else { "A" };
            sentences.push(format!(
                "{article} {} {} stands on {sq}.",
                piece.color.as_str(),
                piece.kind.as_str()
            ));
        }
    }
    sentences.push(format!("It is {}'s turn to move.", state.side_to_move().as_str()));
    sentences.push(castling_sentence(state));
    if let Some(ep) = state.en_passant() {
        sentences.push(format!("An en passant capture on {ep} is available."));
    }
    sentences.join(" ")
}

fn castling_sentence(state: &BoardState) -> String {
    let wings = |color: Color| {
        let king = state.castling().get(color, CastleSide::Kingside);
        let queen = state.castling().get(color, CastleSide::Queenside);
        match (king, queen) {
            (true, true) => Some("kingside and queenside"),
            (true, false) => Some("kingside"),
            (false, true) => Some("queenside"),
            (false, false) => None,
        }
    };
    match (wings(Color::White), wings(Color::Black)) {
        (None, None) => "Neither side retains castling rights.".to_string(),
        (Some(w), None) => format!("White may still castle {w}; Black has no castling rights."),
        (None, Some(b)) => format!("White has no castling rights; Black may still castle {b}."),
        (Some(w), Some(b)) => format!("White may still castle {w}; Black may still castle {b}."),
    }
}

/// A seed-selected handful of remarks, each computed from the state. The
/// remark pool is fixed, so the body is regenerable from `(state, seed)`.
fn render_commentary(state: &BoardState, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mover = state.side_to_move();
    let white_total: usize = PieceKind::ALL.iter().map(|&k| state.count(Color::White, k)).sum();
    let black_total: usize = PieceKind::ALL.iter().map(|&k| state.count(Color::Black, k)).sum();

    let mut remarks = vec![
        format!("White has {white_total} pieces on the board to Black's {black_total}."),
        format!(
            "White still has {} pawns and Black {}.",
            state.count(Color::White, PieceKind::Pawn),
            state.count(Color::Black, PieceKind::Pawn)
        ),
        format!(
            "The kings stand on {} and {}.",
            state.king_square(Color::White),
            state.king_square(Color::Black)
        ),
        if is_in_check(state, mover) {
            format!("{} is currently in check.", capitalize(mover.as_str()))
        } else {
            "Neither king is in check.".to_string()
        },
        format!(
            "{} has {} legal moves to choose from.",
            capitalize(mover.as_str()),
            legal_moves(state).len()
        ),
    ];
    remarks.shuffle(&mut rng);
    remarks.truncate(3);
    format!("Notes from the game in progress: {}", remarks.join(" "))
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

// ---------------------------------------------------------------------------
// Corruption
// ---------------------------------------------------------------------------

/// The kinds of controlled edit a corrupted document can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionOp {
    MovePiece,
    DeletePiece,
    AddPiece,
    AlterLoggedMove,
}

impl CorruptionOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionOp::MovePiece => "move_piece",
            CorruptionOp::DeletePiece => "delete_piece",
            CorruptionOp::AddPiece => "add_piece",
            CorruptionOp::AlterLoggedMove => "alter_logged_move",
        }
    }
}

impl std::fmt::Display for CorruptionOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The placement-editing ops, i.e. everything [`corrupt`] can apply to a
/// position. `alter_logged_move` is excluded: it edits a move log and lives
/// in [`corrupt_history`].
pub const STATE_OPS: [CorruptionOp; 3] =
    [CorruptionOp::MovePiece, CorruptionOp::DeletePiece, CorruptionOp::AddPiece];

/// One recorded edit, together with a *witness*: a claim whose truth value
/// differs between the corrupted artifact and the reference world. The
/// witness is verified through the claim oracle at generation time, so a
/// stored corruption is guaranteed to be detectable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Corruption {
    MovePiece { piece: Piece, from: Square, to: Square, witness: AtomicClaim },
    DeletePiece { piece: Piece, square: Square, witness: AtomicClaim },
    AddPiece { piece: Piece, square: Square, witness: AtomicClaim },
    AlterLoggedMove { ply: u32, original: Move, replacement: Move, witness: AtomicClaim },
}

impl Corruption {
    pub fn op(&self) -> CorruptionOp {
        match self {
            Corruption::MovePiece { .. } => CorruptionOp::MovePiece,
            Corruption::DeletePiece { .. } => CorruptionOp::DeletePiece,
            Corruption::AddPiece { .. } => CorruptionOp::AddPiece,
            Corruption::AlterLoggedMove { .. } => CorruptionOp::AlterLoggedMove,
        }
    }

    pub fn witness(&self) -> &AtomicClaim {
        match self {
            Corruption::MovePiece { witness, .. }
            | Corruption::DeletePiece { witness, .. }
            | Corruption::AddPiece { witness, .. }
            | Corruption::AlterLoggedMove { witness, .. } => witness,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorruptionError {
    #[error("at least one corruption delta must be requested")]
    NoDeltasRequested,
    #[error("the allowed-operation list is empty")]
    NoOpsAllowed,
    #[error("alter_logged_move edits a move log, not a position; use corrupt_history")]
    LogOpOnState,
    #[error("cannot alter a move in an empty history")]
    EmptyHistory,
    #[error("a move log document requires a game history")]
    HistoryRequired,
    #[error(
        "no valid witnessed corruption found within {attempts} attempts \
         (the position may lack material for the allowed operations)"
    )]
    Budget { attempts: u32 },
}

/// Perturb a position with `n_deltas` placement edits drawn from
/// [`STATE_OPS`]. See [`corrupt_with_ops`] for the contract.
pub fn corrupt(
    state: &BoardState,
    seed: u64,
    n_deltas: usize,
) -> Result<(BoardState, Vec<Corruption>), CorruptionError> {
    corrupt_with_ops(state, seed, n_deltas, &STATE_OPS)
}

/// Perturb a position with `n_deltas` edits drawn from `ops`, retrying until
/// the perturbed position is structurally valid (kings intact, pawn and
/// piece-count limits respected, the side not on move not in check), differs
/// from the original, and every recorded delta has a verified witness claim.
/// Kings are never moved, deleted, or added. Deterministic in `seed`.
pub fn corrupt_with_ops(
    state: &BoardState,
    seed: u64,
    n_deltas: usize,
    ops: &[CorruptionOp],
) -> Result<(BoardState, Vec<Corruption>), CorruptionError> {
    if n_deltas == 0 {
        return Err(CorruptionError::NoDeltasRequested);
    }
    if ops.is_empty() {
        return Err(CorruptionError::NoOpsAllowed);
    }
    if ops.contains(&CorruptionOp::AlterLoggedMove) {
        return Err(CorruptionError::LogOpOnState);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CORRUPT_ATTEMPTS {
        if let Some(result) = try_corrupt_once(state, &mut rng, n_deltas, ops) {
            return Ok(result);
        }
    }
    Err(CorruptionError::Budget { attempts: CORRUPT_ATTEMPTS })
}

/// A delta that has been applied to the working placement but not yet
/// witnessed.
enum PendingDelta {
    MovePiece { piece: Piece, from: Square, to: Square },
    DeletePiece { piece: Piece, square: Square },
    AddPiece { piece: Piece, square: Square },
}

fn try_corrupt_once(
    original: &BoardState,
    rng: &mut ChaCha8Rng,
    n_deltas: usize,
    ops: &[CorruptionOp],
) -> Option<(BoardState, Vec<Corruption>)> {
    let mut cells: Vec<Option<Piece>> = Square::all().map(|sq| original.piece_at(sq)).collect();
    let mut pending = Vec::with_capacity(n_deltas);
    for _ in 0..n_deltas {
        let op = *ops.choose(rng).expect("ops checked non-empty");
        pending.push(apply_op(&mut cells, rng, op)?);
    }

    let edits: Vec<(Square, Option<Piece>)> = Square::all()
        .filter(|sq| cells[sq.index()] != original.piece_at(*sq))
        .map(|sq| (sq, cells[sq.index()]))
        .collect();
    if edits.is_empty() {
        return None; // the deltas cancelled out
    }
    let perturbed = original.with_placement_edits(edits).ok()?;

    let budget = EvalBudget::default();
    let perturbed_world = World::from_state(perturbed.clone());
    let original_world = World::from_state(original.clone());
    let corruptions = pending
        .into_iter()
        .map(|delta| {
            let witness = find_witness(&delta, &perturbed_world, &original_world, &budget)?;
            Some(seal_delta(delta, witness))
        })
        .collect::<Option<Vec<_>>>()?;
    Some((perturbed, corruptions))
}

/// Apply one randomly instantiated op to the working placement, or `None`
/// when the op has no legal instantiation (e.g. deleting from a bare-kings
/// board, or adding to a full color).
fn apply_op(cells: &mut [Option<Piece>], rng: &mut ChaCha8Rng, op: CorruptionOp) -> Option<PendingDelta> {
    let movable: Vec<Square> = Square::all()
        .filter(|sq| cells[sq.index()].is_some_and(|p| p.kind != PieceKind::King))
        .collect();
    let empty: Vec<Square> = Square::all().filter(|sq| cells[sq.index()].is_none()).collect();
    match op {
        CorruptionOp::MovePiece => {
            let from = *movable.choose(rng)?;
            let piece = cells[from.index()].expect("movable squares are occupied");
            let targets: Vec<Square> = empty
                .iter()
                .copied()
                .filter(|sq| piece.kind != PieceKind::Pawn || !is_back_rank(*sq))
                .collect();
            let to = *targets.choose(rng)?;
            cells[from.index()] = None;
            cells[to.index()] = Some(piece);
            Some(PendingDelta::MovePiece { piece, from, to })
        }
        CorruptionOp::DeletePiece => {
            let square = *movable.choose(rng)?;
            let piece = cells[square.index()].expect("movable squares are occupied");
            cells[square.index()] = None;
            Some(PendingDelta::DeletePiece { piece, square })
        }
        CorruptionOp::AddPiece => {
            let square = *empty.choose(rng)?;
            let color = if rng.gen::<bool>() { Color::White } else { Color::Black };
            let mut kinds = vec![
                PieceKind::Knight,
                PieceKind::Bishop,
                PieceKind::Rook,
                PieceKind::Queen,
            ];
            if !is_back_rank(square) {
                kinds.push(PieceKind::Pawn);
            }
            let kind = *kinds.choose(rng).expect("kinds is non-empty");
            let piece = Piece::new(color, kind);
            if !addition_fits(cells, piece) {
                return None;
            }
            cells[square.index()] = Some(piece);
            Some(PendingDelta::AddPiece { piece, square })
        }
        CorruptionOp::AlterLoggedMove => None,
    }
}

fn is_back_rank(sq: Square) -> bool {
    sq.rank() == 0 || sq.rank() == 7
}

/// Would adding this piece stay within the structural limits (at most 16
/// pieces and 8 pawns per color)?
fn addition_fits(cells: &[Option<Piece>], piece: Piece) -> bool {
    let total = cells.iter().flatten().filter(|p| p.color == piece.color).count();
    if total >= 16 {
        return false;
    }
    if piece.kind == PieceKind::Pawn {
        let pawns = cells
            .iter()
            .flatten()
            .filter(|p| p.color == piece.color && p.kind == PieceKind::Pawn)
            .count();
        if pawns >= 8 {
            return false;
        }
    }
    true
}

/// Find a claim whose truth differs between the perturbed and original
/// worlds, trying the most specific candidates for this delta first. With
/// several deltas in one batch a later edit can mask an earlier one, so the
/// check runs against the final composed state; `None` forces a retry of the
/// whole batch.
fn find_witness(
    delta: &PendingDelta,
    perturbed: &World,
    original: &World,
    budget: &EvalBudget,
) -> Option<AtomicClaim> {
    let candidates: Vec<AtomicClaim> = match delta {
        PendingDelta::MovePiece { piece, from, to } => vec![
            AtomicClaim::new(ClaimKind::PieceAt { square: *to, occupant: Some(*piece) }),
            AtomicClaim::new(ClaimKind::PieceAt { square: *from, occupant: None }),
        ],
        PendingDelta::DeletePiece { piece, square } => vec![
            AtomicClaim::new(ClaimKind::PieceAt { square: *square, occupant: None }),
            AtomicClaim::new(ClaimKind::MaterialCount {
                color: piece.color,
                piece: piece.kind,
                count: perturbed.state().count(piece.color, piece.kind) as u32,
            }),
        ],
        PendingDelta::AddPiece { piece, square } => vec![
            AtomicClaim::new(ClaimKind::PieceAt { square: *square, occupant: Some(*piece) }),
            AtomicClaim::new(ClaimKind::MaterialCount {
                color: piece.color,
                piece: piece.kind,
                count: perturbed.state().count(piece.color, piece.kind) as u32,
            }),
        ],
    };
    candidates
        .into_iter()
        .find(|claim| eval_claim(claim, perturbed, budget) != eval_claim(claim, original, budget))
}

fn seal_delta(delta: PendingDelta, witness: AtomicClaim) -> Corruption {
    match delta {
        PendingDelta::MovePiece { piece, from, to } => {
            Corruption::MovePiece { piece, from, to, witness }
        }
        PendingDelta::DeletePiece { piece, square } => {
            Corruption::DeletePiece { piece, square, witness }
        }
        PendingDelta::AddPiece { piece, square } => Corruption::AddPiece { piece, square, witness },
    }
}

/// Rewrite `n_deltas` logged moves of a history. Each altered ply keeps the
/// log fully legal: the replacement is a legal move in the position before
/// that ply, and every later logged move still replays. The corrupted log
/// has the same length as the original, each altered ply carries a
/// `move_was_played` witness that is true of the corrupted log and false of
/// the reference history, and no ply is altered twice. Deterministic in
/// `seed`.
pub fn corrupt_history(
    history: &MoveHistory,
    seed: u64,
    n_deltas: usize,
) -> Result<(MoveHistory, Vec<Corruption>), CorruptionError> {
    if n_deltas == 0 {
        return Err(CorruptionError::NoDeltasRequested);
    }
    if history.is_empty() {
        return Err(CorruptionError::EmptyHistory);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = history.clone();
    let mut touched: Vec<usize> = Vec::new();
    let mut corruptions = Vec::with_capacity(n_deltas);
    for _ in 0..n_deltas {
        let (next, corruption) = alter_one_ply(history, &current, &touched, &mut rng)?;
        touched.push(match corruption {
            Corruption::AlterLoggedMove { ply, .. } => ply as usize,
            _ => unreachable!("alter_one_ply only returns log alterations"),
        });
        corruptions.push(corruption);
        current = next;
    }
    Ok((current, corruptions))
}

/// Alter one not-yet-touched ply of `current`, keeping the tail legal.
/// Candidate plies are tried in seeded random order with the final ply
/// appended as a fallback, since an empty tail always replays.
fn alter_one_ply(
    reference: &MoveHistory,
    current: &MoveHistory,
    touched: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<(MoveHistory, Corruption), CorruptionError> {
    let len = current.len();
    let mut plies: Vec<usize> = (1..=len).filter(|p| !touched.contains(p)).collect();
    plies.shuffle(rng);
    // Cap how many deep-tail replays get attempted, but always end on the
    // final ply, whose empty tail cannot fail to replay.
    plies.truncate(24);
    if !touched.contains(&len) && !plies.contains(&len) {
        plies.push(len);
    }

    let mut attempts = 0u32;
    for ply in plies {
        let before = current.state_before(ply).expect("ply <= len");
        let reference_move = reference.move_at(ply).expect("ply <= len");
        let current_move = current.move_at(ply).expect("ply <= len");
        let mut replacements: Vec<Move> = legal_moves(before)
            .into_iter()
            .filter(|&m| m != reference_move && m != current_move)
            .collect();
        replacements.shuffle(rng);
        replacements.truncate(REPLACEMENTS_PER_PLY);
        for replacement in replacements {
            attempts += 1;
            let Some(next) = rebuild_with_replacement(current, ply, replacement) else {
                continue;
            };
            let witness = AtomicClaim::new(ClaimKind::MoveWasPlayed {
                ply: ply as u32,
                mv: replacement,
            });
            // By construction the witness holds in the corrupted log and not
            // in the reference; verify through the oracle anyway so a stored
            // witness is never unchecked.
            let budget = EvalBudget::default();
            let corrupted_world = World::from_history(next.clone());
            let reference_world = World::from_history(reference.clone());
            if eval_claim(&witness, &corrupted_world, &budget)
                == eval_claim(&witness, &reference_world, &budget)
            {
                continue;
            }
            let corruption = Corruption::AlterLoggedMove {
                ply: ply as u32,
                original: reference_move,
                replacement,
                witness,
            };
            return Ok((next, corruption));
        }
    }
    Err(CorruptionError::Budget { attempts })
}

/// Replay `history` with `replacement` at `ply`; `None` if any later logged
/// move becomes illegal.
fn rebuild_with_replacement(history: &MoveHistory, ply: usize, replacement: Move) -> Option<MoveHistory> {
    let mut rebuilt = MoveHistory::empty();
    for p in 1..=history.len() {
        let mv = if p == ply { replacement } else { history.move_at(p).expect("p <= len") };
        rebuilt.push(mv).ok()?;
    }
    Some(rebuilt)
}

/// Render a *corrupted* document: the artifact's text describes a perturbed
/// world, and the perturbation is recorded delta-by-delta. Position kinds
/// (`fen_text`, `board_prose`, `commentary`) get placement corruption; a
/// `pgn_log` gets its move log rewritten.
pub fn corrupt_document(
    doc_id: String,
    kind: DocKind,
    state: &BoardState,
    history: Option<&MoveHistory>,
    seed: u64,
    n_deltas: usize,
) -> Result<Document, CorruptionError> {
    match kind {
        DocKind::PgnLog => {
            let reference = history.ok_or(CorruptionError::HistoryRequired)?;
            let (corrupted, deltas) = corrupt_history(reference, seed, n_deltas)?;
            Ok(Document {
                doc_id,
                kind,
                body: corrupted.to_movetext(),
                derived_state: corrupted.final_state().clone(),
                derived_history: Some(corrupted),
                deltas,
            })
        }
        _ => {
            let (perturbed, deltas) = corrupt(state, seed, n_deltas)?;
            let body = render_body(kind, &perturbed, None, seed)
                .expect("position kinds never require a history");
            Ok(Document {
                doc_id,
                kind,
                body,
                derived_state: perturbed,
                derived_history: None,
                deltas,
            })
        }
    }
}
