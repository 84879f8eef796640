//! Query sampling with oracle-computed gold labels.
//!
//! A query probes the world through one of three shapes:
//!
//! * `mcq_boolean` — a yes/no question about a single sampled claim;
//! * `mcq_multichoice` — a lettered question ("On which square…", "How
//!   many…") whose gold option is verified true and whose distractors are
//!   each verified false;
//! * `claim_list_freeform` — an open request to describe the position as
//!   atomic claims, graded claim-by-claim rather than against a single gold.
//!
//! Truth never comes from this module. [`make_query`] receives a `resolve`
//! callback that maps a claim to its policy-resolved truth value, so gold
//! labels automatically follow whichever sources the instance's conflict
//! policy trusts (a corrupted but authoritative document included). A probe
//! whose resolved truth is `Unknown` is discarded and redrawn: every emitted
//! MCQ has a decided gold answer.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{
    legal_moves, BoardState, CastleSide, Color, Move, MoveHistory, Piece, PieceKind, Square,
};
use crate::claims::{AtomicClaim, ClaimKind, GameStatusKind};
use crate::truth::TruthValue;

/// Version tag for the prompt templates below; recorded in dataset manifests
/// so a dataset pins the wording it was generated with.
pub const TEMPLATE_VERSION: &str = "query-templates-v1";

/// Default number of false options accompanying the gold option.
pub const DEFAULT_DISTRACTORS: usize = 3;

const PROBE_ATTEMPTS: u32 = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    McqBoolean,
    McqMultichoice,
    ClaimListFreeform,
}

impl QueryKind {
    pub const ALL: [QueryKind; 3] =
        [QueryKind::McqBoolean, QueryKind::McqMultichoice, QueryKind::ClaimListFreeform];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::McqBoolean => "mcq_boolean",
            QueryKind::McqMultichoice => "mcq_multichoice",
            QueryKind::ClaimListFreeform => "claim_list_freeform",
        }
    }

    pub fn is_mcq(self) -> bool {
        matches!(self, QueryKind::McqBoolean | QueryKind::McqMultichoice)
    }
}

impl std::fmt::Display for QueryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for QueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown query kind {s:?}"))
    }
}

/// What counts as a correct answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GoldAnswer {
    /// The single correct option (0-based index into `options`).
    OptionIndex { index: usize },
    /// No single gold: every claim the model emits is graded individually.
    GradeEmittedClaims,
}

/// One generated query. For MCQ kinds, `options` holds the candidate answer
/// texts (rendered with letters A, B, … in the prompt) and `probe_claim` is
/// the claim the gold option asserts; for freeform queries both are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryInstance {
    query_id: String,
    kind: QueryKind,
    prompt_text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    options: Vec<String>,
    gold: GoldAnswer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probe_claim: Option<AtomicClaim>,
}

impl QueryInstance {
    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn kind(&self) -> QueryKind {
        self.kind
    }

    pub fn prompt_text(&self) -> &str {
        &self.prompt_text
    }

    pub fn options(&self) -> &[String] {
        &self.options
    }

    pub fn gold(&self) -> GoldAnswer {
        self.gold
    }

    pub fn probe_claim(&self) -> Option<&AtomicClaim> {
        self.probe_claim.as_ref()
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("no probe claim with a decided truth value was found within {attempts} attempts")]
    NoProbeFound { attempts: u32 },
    #[error("could not assemble {needed} decided options for a multiple-choice query")]
    NotEnoughOptions { needed: usize },
}

/// The claim a responder asserts by picking `option_text` on a query whose
/// probe claim is `probe`. Boolean options assert the probe itself ("Yes") or
/// its denial ("No" — not expressible as an atomic claim, so `None`).
/// Multichoice options instantiate the probe's shape at the option's value.
pub fn option_claim(probe: &AtomicClaim, option_text: &str) -> Option<AtomicClaim> {
    if option_text == "Yes" {
        return Some(probe.clone());
    }
    if option_text == "No" {
        return None;
    }
    match &probe.kind {
        ClaimKind::PieceAt { occupant, .. } => option_text
            .parse()
            .ok()
            .map(|square| AtomicClaim::new(ClaimKind::PieceAt { square, occupant: *occupant })),
        ClaimKind::MaterialCount { color, piece, .. } => option_text.parse().ok().map(|count| {
            AtomicClaim::new(ClaimKind::MaterialCount { color: *color, piece: *piece, count })
        }),
        _ => None,
    }
}

/// Sample one query about the world. `state`/`history` supply raw material
/// for candidate claims; `resolve` supplies their truth under the instance's
/// conflict policy and is the only authority on gold labels. Deterministic
/// in `seed`.
pub fn make_query(
    state: &BoardState,
    history: Option<&MoveHistory>,
    kind: QueryKind,
    seed: u64,
    resolve: &dyn Fn(&AtomicClaim) -> TruthValue,
    distractors: usize,
) -> Result<QueryInstance, QueryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let query_id = format!("q-{seed:016x}");
    match kind {
        QueryKind::McqBoolean => make_boolean(state, history, query_id, &mut rng, resolve),
        QueryKind::McqMultichoice => {
            make_multichoice(state, query_id, &mut rng, resolve, distractors)
        }
        QueryKind::ClaimListFreeform => Ok(QueryInstance {
            query_id,
            kind: QueryKind::ClaimListFreeform,
            prompt_text: "Describe this chess position. State every fact you are confident of \
                          as atomic claims, one per line."
                .to_string(),
            options: Vec::new(),
            gold: GoldAnswer::GradeEmittedClaims,
            probe_claim: None,
        }),
    }
}

// ---------------------------------------------------------------------------
// Boolean queries
// ---------------------------------------------------------------------------

fn make_boolean(
    state: &BoardState,
    history: Option<&MoveHistory>,
    query_id: String,
    rng: &mut ChaCha8Rng,
    resolve: &dyn Fn(&AtomicClaim) -> TruthValue,
) -> Result<QueryInstance, QueryError> {
    for _ in 0..PROBE_ATTEMPTS {
        let claim = sample_probe(state, history, rng);
        let truth = resolve(&claim);
        if truth == TruthValue::Unknown {
            continue;
        }
        let gold_index = if truth == TruthValue::True { 0 } else { 1 };
        return Ok(QueryInstance {
            query_id,
            kind: QueryKind::McqBoolean,
            prompt_text: boolean_question(&claim),
            options: vec!["Yes".to_string(), "No".to_string()],
            gold: GoldAnswer::OptionIndex { index: gold_index },
            probe_claim: Some(claim),
        });
    }
    Err(QueryError::NoProbeFound { attempts: PROBE_ATTEMPTS })
}

/// Draw one candidate claim. Roughly half the candidates are built to match
/// the reference world and half to contradict it, so gold answers split
/// between Yes and No; checkmate-search probes are kept deliberately rare.
fn sample_probe(state: &BoardState, history: Option<&MoveHistory>, rng: &mut ChaCha8Rng) -> AtomicClaim {
    // A weighted pool, expressed by repetition. History-dependent kinds stay
    // in the pool even for empty histories: their resolved truth is still
    // decided (e.g. `move_was_played` beyond the log is false).
    const POOL: &[(ProbeKind, u32)] = &[
        (ProbeKind::PieceAt, 4),
        (ProbeKind::SideToMove, 1),
        (ProbeKind::InCheck, 2),
        (ProbeKind::CastlingRight, 2),
        (ProbeKind::EnPassant, 1),
        (ProbeKind::MaterialCount, 3),
        (ProbeKind::MoveLegal, 3),
        (ProbeKind::CanCapture, 2),
        (ProbeKind::GameStatus, 1),
        (ProbeKind::MoveWasPlayed, 2),
        (ProbeKind::HistoryLength, 1),
        (ProbeKind::MateIn, 2),
    ];
    let total: u32 = POOL.iter().map(|&(_, w)| w).sum();
    let mut ticket = rng.gen_range(0..total);
    let mut chosen = ProbeKind::PieceAt;
    for &(kind, weight) in POOL {
        if ticket < weight {
            chosen = kind;
            break;
        }
        ticket -= weight;
    }

    let kind = match chosen {
        ProbeKind::PieceAt => {
            let square = random_square(rng);
            let actual = state.piece_at(square);
            let occupant = if rng.gen::<bool>() {
                actual
            } else {
                random_occupant_excluding(rng, actual)
            };
            ClaimKind::PieceAt { square, occupant }
        }
        ProbeKind::SideToMove => {
            let color = if rng.gen::<bool>() {
                state.side_to_move()
            } else {
                state.side_to_move().opposite()
            };
            ClaimKind::SideToMove { color }
        }
        ProbeKind::InCheck => ClaimKind::InCheck { color: random_color(rng) },
        ProbeKind::CastlingRight => ClaimKind::CastlingRight {
            color: random_color(rng),
            side: if rng.gen::<bool>() { CastleSide::Kingside } else { CastleSide::Queenside },
        },
        ProbeKind::EnPassant => {
            let square = match state.en_passant() {
                Some(sq) if rng.gen::<bool>() => Some(sq),
                _ if rng.gen::<bool>() => None, // "any square"
                _ => Some(random_square(rng)),
            };
            ClaimKind::EnPassantAvailable { square }
        }
        ProbeKind::MaterialCount => {
            let color = random_color(rng);
            let piece = random_piece_kind(rng, true);
            let actual = state.count(color, piece) as u32;
            let count = if rng.gen::<bool>() {
                actual
            } else if actual == 0 || rng.gen::<bool>() {
                actual + 1
            } else {
                actual - 1
            };
            ClaimKind::MaterialCount { color, piece, count }
        }
        ProbeKind::MoveLegal => {
            let moves = legal_moves(state);
            let mv = match moves.choose(rng) {
                Some(&mv) if rng.gen::<bool>() => mv,
                _ => random_move(rng),
            };
            ClaimKind::MoveLegal { mv }
        }
        ProbeKind::CanCapture => ClaimKind::CanCaptureInOne {
            color: random_color(rng),
            target: random_piece_kind(rng, false),
        },
        ProbeKind::GameStatus => {
            let status = *[
                GameStatusKind::Ongoing,
                GameStatusKind::Checkmate,
                GameStatusKind::Stalemate,
                GameStatusKind::DrawRule,
            ]
            .choose(rng)
            .expect("status list is non-empty");
            ClaimKind::GameStatus { status }
        }
        ProbeKind::MoveWasPlayed => match history.filter(|h| !h.is_empty()) {
            Some(h) => {
                let ply = rng.gen_range(1..=h.len());
                let actual = h.move_at(ply).expect("ply is in range");
                let mv = if rng.gen::<bool>() {
                    actual
                } else {
                    let before = h.state_before(ply).expect("ply is in range");
                    legal_moves(before)
                        .into_iter()
                        .filter(|&m| m != actual)
                        .collect::<Vec<_>>()
                        .choose(rng)
                        .copied()
                        .unwrap_or_else(|| random_move(rng))
                };
                ClaimKind::MoveWasPlayed { ply: ply as u32, mv }
            }
            None => ClaimKind::MoveWasPlayed { ply: rng.gen_range(1..=4), mv: random_move(rng) },
        },
        ProbeKind::HistoryLength => {
            let actual = history.map(|h| h.len() as u32).unwrap_or(0);
            let len = if rng.gen::<bool>() || actual == 0 { actual } else { actual - 1 };
            ClaimKind::HistoryLength { len }
        }
        ProbeKind::MateIn => ClaimKind::MateInK {
            color: random_color(rng),
            k: if rng.gen_range(0..5) < 4 { 1 } else { 2 },
        },
    };
    AtomicClaim::new(kind)
}

#[derive(Clone, Copy)]
enum ProbeKind {
    PieceAt,
    SideToMove,
    InCheck,
    CastlingRight,
    EnPassant,
    MaterialCount,
    MoveLegal,
    CanCapture,
    GameStatus,
    MoveWasPlayed,
    HistoryLength,
    MateIn,
}

/// Render a claim as the yes/no question the prompt asks.
pub fn boolean_question(claim: &AtomicClaim) -> String {
    match &claim.kind {
        ClaimKind::PieceAt { square, occupant: Some(p) } => {
            format!("Is there a {} {} on {square}?", p.color.as_str(), p.kind.as_str())
        }
        ClaimKind::PieceAt { square, occupant: None } => format!("Is {square} empty?"),
        ClaimKind::SideToMove { color } => format!("Is it {}'s turn to move?", color.as_str()),
        ClaimKind::InCheck { color } => format!("Is {} currently in check?", color.as_str()),
        ClaimKind::CastlingRight { color, side } => format!(
            "Does {} still have the right to castle {}?",
            color.as_str(),
            wing_word(*side)
        ),
        ClaimKind::EnPassantAvailable { square: Some(sq) } => {
            format!("Is an en passant capture on {sq} available right now?")
        }
        ClaimKind::EnPassantAvailable { square: None } => {
            "Is any en passant capture available right now?".to_string()
        }
        ClaimKind::MaterialCount { color, piece, count } => format!(
            "Does {} have exactly {count} {}{} on the board?",
            color.as_str(),
            piece.as_str(),
            plural(*count)
        ),
        ClaimKind::MoveLegal { mv } => {
            format!("Is {mv} (coordinate notation) a legal move for the side to move?")
        }
        ClaimKind::CanCaptureInOne { color, target } => format!(
            "Moving now, could {} capture an enemy {} with a single legal move?",
            color.as_str(),
            target.as_str()
        ),
        ClaimKind::MateInK { color, k } => format!(
            "Moving now, can {} force checkmate within {k} move{}?",
            color.as_str(),
            plural(*k)
        ),
        ClaimKind::GameStatus { status } => match status {
            GameStatusKind::Ongoing => "Is the game still ongoing?".to_string(),
            GameStatusKind::Checkmate => "Has the game ended in checkmate?".to_string(),
            GameStatusKind::Stalemate => "Has the game ended in stalemate?".to_string(),
            GameStatusKind::DrawRule => {
                "Has a rule-based draw condition (fifty-move rule or threefold repetition) \
                 been reached?"
                    .to_string()
            }
        },
        ClaimKind::MoveWasPlayed { ply, mv } => {
            format!("Was {mv} (coordinate notation) played as half-move number {ply}?")
        }
        ClaimKind::HistoryLength { len } => {
            format!("Have exactly {len} half-move{} been played so far?", plural(*len))
        }
    }
}

fn wing_word(side: CastleSide) -> &'static str {
    match side {
        CastleSide::Kingside => "kingside",
        CastleSide::Queenside => "queenside",
    }
}

fn plural(n: u32) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

// ---------------------------------------------------------------------------
// Multiple-choice queries
// ---------------------------------------------------------------------------

fn make_multichoice(
    state: &BoardState,
    query_id: String,
    rng: &mut ChaCha8Rng,
    resolve: &dyn Fn(&AtomicClaim) -> TruthValue,
    distractors: usize,
) -> Result<QueryInstance, QueryError> {
    let needed = distractors + 1;
    // Try the location template first on a random piece ordering, then fall
    // back to the counting template, which almost always has enough decided
    // options.
    let try_location_first = rng.gen::<bool>();
    let attempts: [fn(
        &BoardState,
        &mut ChaCha8Rng,
        &dyn Fn(&AtomicClaim) -> TruthValue,
        usize,
    ) -> Option<(String, Vec<String>, usize, AtomicClaim)>; 2] = if try_location_first {
        [location_template, count_template]
    } else {
        [count_template, location_template]
    };
    for template in attempts {
        if let Some((prompt_text, options, gold_index, probe)) =
            template(state, rng, resolve, distractors)
        {
            return Ok(QueryInstance {
                query_id,
                kind: QueryKind::McqMultichoice,
                prompt_text,
                options,
                gold: GoldAnswer::OptionIndex { index: gold_index },
                probe_claim: Some(probe),
            });
        }
    }
    Err(QueryError::NotEnoughOptions { needed })
}

/// "On which square is the white queen?" — applicable when exactly one
/// square resolves true for some (color, piece) pair. Distractor squares
/// each resolve false for the same piece.
fn location_template(
    state: &BoardState,
    rng: &mut ChaCha8Rng,
    resolve: &dyn Fn(&AtomicClaim) -> TruthValue,
    distractors: usize,
) -> Option<(String, Vec<String>, usize, AtomicClaim)> {
    let mut pairs: Vec<Piece> = Color::iter_both()
        .flat_map(|c| PieceKind::ALL.iter().map(move |&k| Piece::new(c, k)))
        .collect();
    pairs.shuffle(rng);

    for piece in pairs {
        // Cheap pre-filter on the reference state; the authoritative check is
        // the resolver scan below.
        if state.count(piece.color, piece.kind) != 1 {
            continue;
        }
        let mut true_squares = Vec::new();
        for sq in Square::all() {
            let claim = AtomicClaim::new(ClaimKind::PieceAt { square: sq, occupant: Some(piece) });
            if resolve(&claim) == TruthValue::True {
                true_squares.push(sq);
            }
        }
        let [gold_square] = true_squares[..] else { continue };

        let mut false_squares: Vec<Square> = Square::all()
            .filter(|&sq| {
                sq != gold_square
                    && resolve(&AtomicClaim::new(ClaimKind::PieceAt {
                        square: sq,
                        occupant: Some(piece),
                    })) == TruthValue::False
            })
            .collect();
        if false_squares.len() < distractors {
            continue;
        }
        false_squares.shuffle(rng);
        false_squares.truncate(distractors);

        let mut options: Vec<String> = false_squares.iter().map(Square::to_string).collect();
        let gold_index = rng.gen_range(0..=options.len());
        options.insert(gold_index, gold_square.to_string());
        let prompt_text = format!(
            "On which square is the {} {}?",
            piece.color.as_str(),
            piece.kind.as_str()
        );
        let probe =
            AtomicClaim::new(ClaimKind::PieceAt { square: gold_square, occupant: Some(piece) });
        return Some((prompt_text, options, gold_index, probe));
    }
    None
}

/// "How many white pawns are on the board?" — the gold count is the one the
/// resolver rates true; distractor counts each resolve false.
fn count_template(
    _state: &BoardState,
    rng: &mut ChaCha8Rng,
    resolve: &dyn Fn(&AtomicClaim) -> TruthValue,
    distractors: usize,
) -> Option<(String, Vec<String>, usize, AtomicClaim)> {
    let mut pairs: Vec<(Color, PieceKind)> = Color::iter_both()
        .flat_map(|c| {
            [PieceKind::Pawn, PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen]
                .into_iter()
                .map(move |k| (c, k))
        })
        .collect();
    pairs.shuffle(rng);

    for (color, piece) in pairs {
        let count_claim = |count: u32| {
            AtomicClaim::new(ClaimKind::MaterialCount { color, piece, count })
        };
        let gold_count =
            (0..=10u32).find(|&n| resolve(&count_claim(n)) == TruthValue::True)?;
        let mut false_counts: Vec<u32> = (0..=10u32)
            .filter(|&n| n != gold_count && resolve(&count_claim(n)) == TruthValue::False)
            .collect();
        if false_counts.len() < distractors {
            continue;
        }
        false_counts.shuffle(rng);
        false_counts.truncate(distractors);

        let mut options: Vec<String> = false_counts.iter().map(u32::to_string).collect();
        let gold_index = rng.gen_range(0..=options.len());
        options.insert(gold_index, gold_count.to_string());
        let prompt_text =
            format!("How many {} {}s are on the board?", color.as_str(), piece.as_str());
        return Some((prompt_text, options, gold_index, count_claim(gold_count)));
    }
    None
}

// ---------------------------------------------------------------------------
// Random raw material
// ---------------------------------------------------------------------------

fn random_square(rng: &mut ChaCha8Rng) -> Square {
    Square::from_index(rng.gen_range(0..64)).expect("index is in range")
}

fn random_color(rng: &mut ChaCha8Rng) -> Color {
    if rng.gen::<bool>() {
        Color::White
    } else {
        Color::Black
    }
}

fn random_piece_kind(rng: &mut ChaCha8Rng, include_king: bool) -> PieceKind {
    let kinds: &[PieceKind] = if include_king {
        &PieceKind::ALL
    } else {
        &[PieceKind::Pawn, PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen]
    };
    *kinds.choose(rng).expect("kind list is non-empty")
}

/// A random piece-or-empty occupant other than `not`.
fn random_occupant_excluding(rng: &mut ChaCha8Rng, not: Option<Piece>) -> Option<Piece> {
    loop {
        let candidate = if rng.gen_range(0..6) == 0 {
            None
        } else {
            Some(Piece::new(random_color(rng), random_piece_kind(rng, true)))
        };
        if candidate != not {
            return candidate;
        }
    }
}

/// An arbitrary (usually illegal) coordinate move.
fn random_move(rng: &mut ChaCha8Rng) -> Move {
    loop {
        let from = random_square(rng);
        let to = random_square(rng);
        if from != to {
            return Move::new(from, to);
        }
    }
}

// Color::iter_both is small enough to define here rather than widening the
// chess API; keep it private to query sampling.
trait BothColors {
    fn iter_both() -> std::array::IntoIter<Color, 2>;
}

impl BothColors for Color {
    fn iter_both() -> std::array::IntoIter<Color, 2> {
        [Color::White, Color::Black].into_iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eval_claim, EvalBudget, World};

    /// Plain reference-world resolver: no documents, no policy games.
    fn reference_resolver(world: World) -> impl Fn(&AtomicClaim) -> TruthValue {
        let budget = EvalBudget::default();
        move |claim| eval_claim(claim, &world, &budget)
    }

    #[test]
    fn boolean_query_has_decided_gold_matching_the_oracle() {
        let state = BoardState::initial();
        let history = MoveHistory::empty();
        let world = World::new(state.clone(), Some(history.clone())).unwrap();
        let resolve = reference_resolver(world.clone());
        for seed in 0..40 {
            let q = make_query(
                &state,
                Some(&history),
                QueryKind::McqBoolean,
                seed,
                &resolve,
                DEFAULT_DISTRACTORS,
            )
            .unwrap();
            assert_eq!(q.kind(), QueryKind::McqBoolean);
            assert_eq!(q.options(), ["Yes", "No"]);
            let probe = q.probe_claim().expect("boolean queries carry a probe");
            let truth = eval_claim(probe, &world, &EvalBudget::default());
            let GoldAnswer::OptionIndex { index } = q.gold() else {
                panic!("boolean queries have an option gold");
            };
            match truth {
                TruthValue::True => assert_eq!(index, 0, "probe {probe}"),
                TruthValue::False => assert_eq!(index, 1, "probe {probe}"),
                TruthValue::Unknown => panic!("probe {probe} resolved Unknown"),
            }
            assert!(!q.prompt_text().is_empty());
        }
    }

    #[test]
    fn boolean_golds_cover_both_answers() {
        let state = BoardState::initial();
        let history = MoveHistory::empty();
        let resolve = reference_resolver(World::new(state.clone(), Some(history.clone())).unwrap());
        let mut yes = 0;
        let mut no = 0;
        for seed in 0..200 {
            let q = make_query(&state, Some(&history), QueryKind::McqBoolean, seed, &resolve, 3)
                .unwrap();
            match q.gold() {
                GoldAnswer::OptionIndex { index: 0 } => yes += 1,
                GoldAnswer::OptionIndex { index: 1 } => no += 1,
                other => panic!("unexpected gold {other:?}"),
            }
        }
        assert!(yes >= 30, "only {yes} yes-golds in 200 queries");
        assert!(no >= 30, "only {no} no-golds in 200 queries");
    }

    #[test]
    fn multichoice_gold_is_true_and_distractors_false() {
        let state = BoardState::initial();
        let resolve = reference_resolver(World::from_state(state.clone()));
        for seed in 0..40 {
            let q = make_query(&state, None, QueryKind::McqMultichoice, seed, &resolve, 3)
                .unwrap();
            assert_eq!(q.options().len(), 4);
            let distinct: std::collections::HashSet<&String> = q.options().iter().collect();
            assert_eq!(distinct.len(), 4, "options must be distinct: {:?}", q.options());
            let GoldAnswer::OptionIndex { index } = q.gold() else {
                panic!("multichoice queries have an option gold");
            };
            assert!(index < q.options().len());

            let probe = q.probe_claim().expect("multichoice queries carry a probe");
            assert_eq!(resolve(probe), TruthValue::True, "gold probe {probe} must be true");
            // Rebuild each distractor's claim from the probe shape and check
            // the oracle rejects it.
            for (i, option) in q.options().iter().enumerate() {
                if i == index {
                    continue;
                }
                let claim = match &probe.kind {
                    ClaimKind::PieceAt { occupant, .. } => AtomicClaim::new(ClaimKind::PieceAt {
                        square: option.parse().unwrap(),
                        occupant: *occupant,
                    }),
                    ClaimKind::MaterialCount { color, piece, .. } => {
                        AtomicClaim::new(ClaimKind::MaterialCount {
                            color: *color,
                            piece: *piece,
                            count: option.parse().unwrap(),
                        })
                    }
                    other => panic!("unexpected probe shape {other:?}"),
                };
                assert_eq!(resolve(&claim), TruthValue::False, "distractor {claim}");
            }
        }
    }

    #[test]
    fn freeform_query_has_no_single_gold() {
        let state = BoardState::initial();
        let resolve = reference_resolver(World::from_state(state.clone()));
        let q =
            make_query(&state, None, QueryKind::ClaimListFreeform, 1, &resolve, 3).unwrap();
        assert_eq!(q.gold(), GoldAnswer::GradeEmittedClaims);
        assert!(q.probe_claim().is_none());
        assert!(q.options().is_empty());
    }

    #[test]
    fn queries_are_deterministic_in_seed() {
        let state = BoardState::initial();
        let history = MoveHistory::empty();
        let resolve = reference_resolver(World::new(state.clone(), Some(history.clone())).unwrap());
        for kind in QueryKind::ALL {
            let a = make_query(&state, Some(&history), kind, 17, &resolve, 3).unwrap();
            let b = make_query(&state, Some(&history), kind, 17, &resolve, 3).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn all_unknown_resolver_exhausts_probe_attempts() {
        let state = BoardState::initial();
        let always_unknown = |_: &AtomicClaim| TruthValue::Unknown;
        let err = make_query(&state, None, QueryKind::McqBoolean, 0, &always_unknown, 3)
            .unwrap_err();
        assert!(matches!(err, QueryError::NoProbeFound { .. }));
        let err = make_query(&state, None, QueryKind::McqMultichoice, 0, &always_unknown, 3)
            .unwrap_err();
        assert!(matches!(err, QueryError::NotEnoughOptions { .. }));
    }

    #[test]
    fn gold_follows_the_resolver_not_the_reference_state() {
        // A resolver that answers from a different world than the reference
        // state passed in: the white queen was "moved" d1 -> d4.
        let reference = BoardState::initial();
        let moved = reference
            .with_placement_edits([
                ("d1".parse::<Square>().unwrap(), None),
                (
                    "d4".parse::<Square>().unwrap(),
                    Some(Piece::new(Color::White, PieceKind::Queen)),
                ),
            ])
            .unwrap();
        let resolve = reference_resolver(World::from_state(moved));
        // Find a location query about the white queen.
        for seed in 0..200 {
            let q = make_query(&reference, None, QueryKind::McqMultichoice, seed, &resolve, 3)
                .unwrap();
            let Some(AtomicClaim {
                kind: ClaimKind::PieceAt { square, occupant: Some(p) },
            }) = q.probe_claim()
            else {
                continue;
            };
            if (p.color, p.kind) == (Color::White, PieceKind::Queen) {
                assert_eq!(square.to_string(), "d4");
                return;
            }
        }
        panic!("no white-queen location query sampled in 200 seeds");
    }
}
