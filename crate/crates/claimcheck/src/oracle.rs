//! The claim evaluator: one atomic claim against one world, deterministically,
//! into {true, false, unknown}.
//!
//! A [`World`] is a validated (state, optional history) pair. Claims about
//! the position alone read the state; claims about how the game went need
//! the history and come out `Unknown` without one. Two claim kinds pose
//! hypotheticals ("could white capture the queen?") that may require flipping
//! the side to move; when the flipped position is unreachable the
//! hypothetical is ill-posed and the answer is `Unknown` rather than a
//! guess. Evaluation never fails and never consults anything beyond its
//! arguments, so labels are reproducible by construction.

use thiserror::Error;

use crate::chess::{
    is_in_check, legal_moves, BoardState, Color, MoveHistory, PieceKind,
};
use crate::claims::{AtomicClaim, ClaimKind, GameStatusKind};
use crate::truth::TruthValue;

/// Bounds on the mate search. `max_mate_k` is capped at 2: within that
/// horizon the full-width search is exact, so labels stay trustworthy.
/// `node_cap` bounds searched positions; blowing it yields `Unknown`,
/// never a wrong answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalBudget {
    max_mate_k: u32,
    node_cap: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("max mate depth {0} exceeds the exact-search cap of 2")]
    MateDepthTooDeep(u32),
    #[error("node cap must be positive")]
    ZeroNodeCap,
}

impl EvalBudget {
    pub fn new(max_mate_k: u32, node_cap: u64) -> Result<EvalBudget, BudgetError> {
        if max_mate_k > 2 {
            return Err(BudgetError::MateDepthTooDeep(max_mate_k));
        }
        if node_cap == 0 {
            return Err(BudgetError::ZeroNodeCap);
        }
        Ok(EvalBudget { max_mate_k, node_cap })
    }

    pub fn max_mate_k(&self) -> u32 {
        self.max_mate_k
    }

    pub fn node_cap(&self) -> u64 {
        self.node_cap
    }
}

impl Default for EvalBudget {
    fn default() -> EvalBudget {
        EvalBudget { max_mate_k: 2, node_cap: 4_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("history replays to {replayed:?}, which is not the supplied state {state:?}")]
    HistoryMismatch { state: String, replayed: String },
}

/// One source's complete picture: a position, and optionally the game that
/// led to it. Consistency (history replays to the state) is checked once
/// here, which is what lets [`eval_claim`] be total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    state: BoardState,
    history: Option<MoveHistory>,
}

impl World {
    pub fn new(state: BoardState, history: Option<MoveHistory>) -> Result<World, WorldError> {
        if let Some(h) = &history {
            if h.final_state() != &state {
                return Err(WorldError::HistoryMismatch {
                    state: crate::chess::render_fen(&state),
                    replayed: crate::chess::render_fen(h.final_state()),
                });
            }
        }
        Ok(World { state, history })
    }

    pub fn from_state(state: BoardState) -> World {
        World { state, history: None }
    }

    pub fn from_history(history: MoveHistory) -> World {
        World { state: history.final_state().clone(), history: Some(history) }
    }

    pub fn state(&self) -> &BoardState {
        &self.state
    }

    pub fn history(&self) -> Option<&MoveHistory> {
        self.history.as_ref()
    }
}

/// Evaluate one claim against one world. Total: every outcome, including
/// missing information, a busted search budget, and ill-posed hypotheticals,
/// is expressed in the returned [`TruthValue`].
pub fn eval_claim(claim: &AtomicClaim, world: &World, budget: &EvalBudget) -> TruthValue {
    use TruthValue::{False, True, Unknown};
    let state = &world.state;
    match &claim.kind {
        ClaimKind::PieceAt { square, occupant } => {
            TruthValue::from_bool(state.piece_at(*square) == *occupant)
        }
        ClaimKind::SideToMove { color } => {
            TruthValue::from_bool(state.side_to_move() == *color)
        }
        ClaimKind::InCheck { color } => TruthValue::from_bool(is_in_check(state, *color)),
        ClaimKind::CastlingRight { color, side } => {
            TruthValue::from_bool(state.castling().get(*color, *side))
        }
        ClaimKind::EnPassantAvailable { square } => match square {
            Some(sq) => TruthValue::from_bool(state.en_passant() == Some(*sq)),
            None => TruthValue::from_bool(state.en_passant().is_some()),
        },
        ClaimKind::MaterialCount { color, piece, count } => {
            TruthValue::from_bool(state.count(*color, *piece) == *count as usize)
        }
        ClaimKind::MoveLegal { mv } => {
            TruthValue::from_bool(legal_moves(state).contains(mv))
        }
        ClaimKind::CanCaptureInOne { color, target } => {
            can_capture_in_one(state, *color, *target)
        }
        ClaimKind::MateInK { color, k } => mate_in_k(state, *color, *k, budget),
        ClaimKind::GameStatus { status } => {
            let has_moves = !legal_moves(state).is_empty();
            match status {
                GameStatusKind::Ongoing => TruthValue::from_bool(has_moves),
                GameStatusKind::Checkmate => TruthValue::from_bool(
                    !has_moves && is_in_check(state, state.side_to_move()),
                ),
                GameStatusKind::Stalemate => TruthValue::from_bool(
                    !has_moves && !is_in_check(state, state.side_to_move()),
                ),
                GameStatusKind::DrawRule => {
                    if state.halfmove_clock() >= 100 {
                        True
                    } else if let Some(h) = &world.history {
                        TruthValue::from_bool(h.final_position_occurrences() >= 3)
                    } else {
                        // The clock rules nothing out and repetitions are
                        // invisible without the game.
                        Unknown
                    }
                }
            }
        }
        ClaimKind::MoveWasPlayed { ply, mv } => match &world.history {
            None => Unknown,
            Some(h) => match h.move_at(*ply as usize) {
                Some(played) => TruthValue::from_bool(played == *mv),
                None => False, // the full game is known and is shorter
            },
        },
        ClaimKind::HistoryLength { len } => match &world.history {
            None => Unknown,
            Some(h) => TruthValue::from_bool(h.len() == *len as usize),
        },
    }
}

/// Put `color` on move, clearing the en-passant square (the hypothetical
/// discards the last-move context). `None` when the resulting position is
/// unreachable (the new non-mover would be in check).
fn override_side(state: &BoardState, color: Color) -> Option<BoardState> {
    if state.side_to_move() == color {
        return Some(state.clone());
    }
    state.with_side_to_move(color).ok()
}

/// Could `color`, moving now, capture an enemy piece of type `target` with
/// one legal move? `Unknown` when putting `color` on move is inadmissible.
pub fn can_capture_in_one(state: &BoardState, color: Color, target: PieceKind) -> TruthValue {
    let Some(board) = override_side(state, color) else {
        return TruthValue::Unknown;
    };
    let hit = legal_moves(&board).iter().any(|mv| {
        if let Some(victim) = board.piece_at(mv.to) {
            return victim.color != color && victim.kind == target;
        }
        // En-passant: the only capture whose destination square is empty.
        target == PieceKind::Pawn
            && board.en_passant() == Some(mv.to)
            && board.piece_at(mv.from).is_some_and(|p| p.kind == PieceKind::Pawn)
    });
    TruthValue::from_bool(hit)
}

/// Can `color`, moving now, force checkmate within `k` of its own moves
/// against any defense? Full-width search, exact up to the budget's depth
/// cap; `Unknown` past the cap, after the node cap, or when putting `color`
/// on move is inadmissible.
pub fn mate_in_k(state: &BoardState, color: Color, k: u32, budget: &EvalBudget) -> TruthValue {
    if k > budget.max_mate_k {
        return TruthValue::Unknown;
    }
    let Some(board) = override_side(state, color) else {
        return TruthValue::Unknown;
    };
    let mut search = MateSearch { nodes: 0, cap: budget.node_cap };
    match search.mover_mates_within(&board, k) {
        Ok(found) => TruthValue::from_bool(found),
        Err(NodeCapExceeded) => TruthValue::Unknown,
    }
}

struct NodeCapExceeded;

struct MateSearch {
    nodes: u64,
    cap: u64,
}

impl MateSearch {
    fn tick(&mut self) -> Result<(), NodeCapExceeded> {
        self.nodes += 1;
        if self.nodes > self.cap {
            Err(NodeCapExceeded)
        } else {
            Ok(())
        }
    }

    /// The side to move in `board` mates within `k` of its own moves.
    fn mover_mates_within(
        &mut self,
        board: &BoardState,
        k: u32,
    ) -> Result<bool, NodeCapExceeded> {
        if k == 0 {
            return Ok(false);
        }
        self.tick()?;
        for mv in legal_moves(board) {
            let next = board.apply_move(mv).expect("searching only legal moves");
            self.tick()?;
            let replies = legal_moves(&next);
            if replies.is_empty() {
                if is_in_check(&next, next.side_to_move()) {
                    return Ok(true); // checkmate delivered
                }
                continue; // stalemate rescues the defender
            }
            if k > 1 {
                let mut forced = true;
                for reply in replies {
                    let answered = next.apply_move(reply).expect("searching only legal moves");
                    if !self.mover_mates_within(&answered, k - 1)? {
                        forced = false;
                        break;
                    }
                }
                if forced {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::parse_fen;
    use crate::claims::parse_claim;

    fn eval_on(fen: &str, claim: &str) -> TruthValue {
        let world = World::from_state(parse_fen(fen).unwrap());
        eval_claim(&parse_claim(claim).unwrap(), &world, &EvalBudget::default())
    }

    fn eval_game(movetext: &str, claim: &str) -> TruthValue {
        let world = World::from_history(MoveHistory::from_movetext(movetext).unwrap());
        eval_claim(&parse_claim(claim).unwrap(), &world, &EvalBudget::default())
    }

    const INITIAL: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

    #[test]
    fn state_claims_on_initial_position() {
        use TruthValue::*;
        assert_eq!(eval_on(INITIAL, "piece_at(e4, empty)"), True);
        assert_eq!(eval_on(INITIAL, "piece_at(e1, white_king)"), True);
        assert_eq!(eval_on(INITIAL, "piece_at(e1, white_queen)"), False);
        assert_eq!(eval_on(INITIAL, "side_to_move(white)"), True);
        assert_eq!(eval_on(INITIAL, "side_to_move(black)"), False);
        assert_eq!(eval_on(INITIAL, "in_check(white)"), False);
        assert_eq!(eval_on(INITIAL, "castling_right(black, queenside)"), True);
        assert_eq!(eval_on(INITIAL, "en_passant_available(any)"), False);
        assert_eq!(eval_on(INITIAL, "material_count(white, pawn, 8)"), True);
        assert_eq!(eval_on(INITIAL, "material_count(black, queen, 2)"), False);
        assert_eq!(eval_on(INITIAL, "move_legal(e2e4)"), True);
        assert_eq!(eval_on(INITIAL, "move_legal(e2e5)"), False);
        assert_eq!(eval_on(INITIAL, "can_capture_in_one(white, queen)"), False);
        assert_eq!(eval_on(INITIAL, "mate_in(white, 1)"), False);
        assert_eq!(eval_on(INITIAL, "game_status(ongoing)"), True);
        assert_eq!(eval_on(INITIAL, "game_status(checkmate)"), False);
    }

    #[test]
    fn history_claims_without_history_are_unknown() {
        use TruthValue::*;
        assert_eq!(eval_on(INITIAL, "move_was_played(1, f2f3)"), Unknown);
        assert_eq!(eval_on(INITIAL, "history_length(0)"), Unknown);
        assert_eq!(eval_on(INITIAL, "game_status(draw_rule)"), Unknown);
    }

    #[test]
    fn history_claims_with_history() {
        use TruthValue::*;
        let game = "1. f3 e5 2. g4";
        assert_eq!(eval_game(game, "move_was_played(1, f2f3)"), True);
        assert_eq!(eval_game(game, "move_was_played(1, e2e4)"), False);
        assert_eq!(eval_game(game, "move_was_played(3, g2g4)"), True);
        // A ply beyond the game: the full game is known, so this is False.
        assert_eq!(eval_game(game, "move_was_played(9, e2e4)"), False);
        assert_eq!(eval_game(game, "history_length(3)"), True);
        assert_eq!(eval_game(game, "history_length(4)"), False);
    }

    #[test]
    fn mate_in_one_after_the_fools_opening() {
        use TruthValue::*;
        let game = "1. f3 e5 2. g4";
        assert_eq!(eval_game(game, "mate_in(black, 1)"), True);
        // Monotonicity: a mate in 1 is a mate in 2.
        assert_eq!(eval_game(game, "mate_in(black, 2)"), True);
        // Putting White on move is admissible here; White just has no mate.
        assert_eq!(eval_game(game, "mate_in(white, 1)"), False);
    }

    #[test]
    fn mate_in_two_is_found() {
        use TruthValue::*;
        // King+rook vs cornered king: 1. Kg6 Kg8 (forced) 2. Ra8#, and no
        // rook check mates immediately (1. Ra8+ Kg7 and 1. Rh1+ Kg7 escape).
        let fen = "7k/8/8/6K1/8/8/8/R7 w - - 0 1";
        assert_eq!(eval_on(fen, "mate_in(white, 2)"), True);
        assert_eq!(eval_on(fen, "mate_in(white, 1)"), False);
    }

    #[test]
    fn stalemated_side_has_no_mate() {
        let fen = "7k/5Q2/6K1/8/8/8/8/8 b - - 0 1";
        assert_eq!(eval_on(fen, "mate_in(black, 1)"), TruthValue::False);
        assert_eq!(eval_on(fen, "game_status(stalemate)"), TruthValue::True);
        assert_eq!(eval_on(fen, "game_status(ongoing)"), TruthValue::False);
    }

    #[test]
    fn can_capture_finds_the_hanging_queen() {
        use TruthValue::*;
        let fen = "8/7q/8/7Q/8/8/8/K5k1 w - - 0 1";
        assert_eq!(eval_on(fen, "can_capture_in_one(white, queen)"), True);
        assert_eq!(eval_on(fen, "can_capture_in_one(black, queen)"), True);
        assert_eq!(eval_on(fen, "can_capture_in_one(white, king)"), False);
    }

    #[test]
    fn side_override_on_unreachable_position_is_unknown() {
        use TruthValue::*;
        // White to move and in check; putting Black on move is unreachable.
        let fen = "4k3/8/8/8/8/8/4r3/4K3 w - - 0 1";
        assert_eq!(eval_on(fen, "can_capture_in_one(black, pawn)"), Unknown);
        assert_eq!(eval_on(fen, "mate_in(black, 1)"), Unknown);
        // The side actually to move still evaluates normally: White can take
        // the checking rook (Kxe2) but there is no queen to capture.
        assert_eq!(eval_on(fen, "can_capture_in_one(white, rook)"), True);
        assert_eq!(eval_on(fen, "can_capture_in_one(white, queen)"), False);
    }

    #[test]
    fn en_passant_capture_counts_as_pawn_capture() {
        use TruthValue::*;
        let fen = "8/8/8/2k5/3Pp3/8/8/4K3 b - d3 0 1";
        assert_eq!(eval_on(fen, "en_passant_available(d3)"), True);
        assert_eq!(eval_on(fen, "en_passant_available(e3)"), False);
        assert_eq!(eval_on(fen, "en_passant_available(any)"), True);
        assert_eq!(eval_on(fen, "can_capture_in_one(black, pawn)"), True);
    }

    #[test]
    fn checkmate_status() {
        use TruthValue::*;
        let fen = "r1bqkb1r/pppp1Qpp/2n2n2/4p3/2B1P3/8/PPPP1PPP/RNB1K1NR b KQkq - 0 4";
        assert_eq!(eval_on(fen, "game_status(checkmate)"), True);
        assert_eq!(eval_on(fen, "game_status(ongoing)"), False);
        assert_eq!(eval_on(fen, "in_check(black)"), True);
    }

    #[test]
    fn draw_rule_by_clock_and_by_repetition() {
        use TruthValue::*;
        // Clock at 100 halfmoves: claimable regardless of history.
        let fen = "4k3/8/8/8/8/8/8/4K3 w - - 100 80";
        assert_eq!(eval_on(fen, "game_status(draw_rule)"), True);
        let fen = "4k3/8/8/8/8/8/8/4K3 w - - 99 80";
        assert_eq!(eval_on(fen, "game_status(draw_rule)"), Unknown);

        // Threefold via the actual game.
        let shuffle = "1. Nf3 Nf6 2. Ng1 Ng8 3. Nf3 Nf6 4. Ng1 Ng8";
        assert_eq!(eval_game(shuffle, "game_status(draw_rule)"), True);
        assert_eq!(eval_game("1. Nf3 Nf6 2. Ng1 Ng8", "game_status(draw_rule)"), False);
    }

    #[test]
    fn world_rejects_inconsistent_state_history_pair() {
        let history = MoveHistory::from_movetext("1. e4").unwrap();
        let err = World::new(BoardState::initial(), Some(history)).unwrap_err();
        assert!(matches!(err, WorldError::HistoryMismatch { .. }));
    }

    #[test]
    fn node_cap_exhaustion_reports_unknown() {
        let budget = EvalBudget::new(2, 1).unwrap();
        let world = World::from_state(BoardState::initial());
        let claim = parse_claim("mate_in(white, 2)").unwrap();
        assert_eq!(eval_claim(&claim, &world, &budget), TruthValue::Unknown);
        // A roomy cap gives the exact answer.
        assert_eq!(
            eval_claim(&claim, &world, &EvalBudget::default()),
            TruthValue::False
        );
    }

    #[test]
    fn budget_construction_is_validated() {
        assert!(EvalBudget::new(3, 1000).is_err());
        assert!(EvalBudget::new(2, 0).is_err());
        assert!(EvalBudget::new(1, 1).is_ok());
    }

    #[test]
    fn mate_deeper_than_budget_is_unknown() {
        let budget = EvalBudget::new(1, 1_000_000).unwrap();
        let world =
            World::from_history(MoveHistory::from_movetext("1. f3 e5 2. g4").unwrap());
        let claim = parse_claim("mate_in(black, 2)").unwrap();
        assert_eq!(eval_claim(&claim, &world, &budget), TruthValue::Unknown);
        let claim = parse_claim("mate_in(black, 1)").unwrap();
        assert_eq!(eval_claim(&claim, &world, &budget), TruthValue::True);
    }
}
