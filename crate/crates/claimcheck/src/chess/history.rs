//! Game histories: a validated move sequence from the standard initial
//! position, plus the movetext codec ("1. e4 e5 2. Nf3 Nc6").
//!
//! A `MoveHistory` is checked once at construction by replaying every move
//! through the rules engine. After that, replay cannot fail, so accessors
//! like [`MoveHistory::final_state`] are infallible.

use std::collections::HashMap;
use std::str::FromStr;

use thiserror::Error;

use super::board::{BoardState, MoveError};
use super::san::{self, SanError};
use super::types::Move;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HistoryError {
    #[error("ply {ply}: {source}")]
    IllegalMove {
        ply: usize,
        #[source]
        source: MoveError,
    },
    #[error("movetext token {token:?} at ply {ply}: {source}")]
    BadSan {
        ply: usize,
        token: String,
        #[source]
        source: SanError,
    },
    #[error("movetext: expected move number {expected} before {token:?}")]
    BadMoveNumber { expected: u32, token: String },
    #[error("movetext: unexpected token {0:?}")]
    UnexpectedToken(String),
    #[error("movetext: game-result token {0:?} may only appear at the end")]
    MisplacedResult(String),
}

/// A legal move sequence starting from the standard initial position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveHistory {
    moves: Vec<Move>,
    san: Vec<String>,
    states: Vec<BoardState>, // states[i] = position before ply i; last = final
}

impl MoveHistory {
    /// The empty history: just the initial position.
    pub fn empty() -> MoveHistory {
        MoveHistory {
            moves: Vec::new(),
            san: Vec::new(),
            states: vec![BoardState::initial()],
        }
    }

    /// Validate `moves` by replay from the initial position.
    pub fn from_moves(moves: &[Move]) -> Result<MoveHistory, HistoryError> {
        let mut history = MoveHistory::empty();
        for &mv in moves {
            history.push(mv)?;
        }
        Ok(history)
    }

    /// Append one move, validating it against the current final position.
    pub fn push(&mut self, mv: Move) -> Result<(), HistoryError> {
        let ply = self.moves.len() + 1;
        let current = self.states.last().expect("states is never empty");
        let next =
            current.apply_move(mv).map_err(|source| HistoryError::IllegalMove { ply, source })?;
        let san = san::render_san(current, mv).expect("move was just validated");
        self.moves.push(mv);
        self.san.push(san);
        self.states.push(next);
        Ok(())
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    /// SAN token for each ply, without move numbers.
    pub fn san_tokens(&self) -> &[String] {
        &self.san
    }

    /// Number of plies (half-moves) played.
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// The position after all moves.
    pub fn final_state(&self) -> &BoardState {
        self.states.last().expect("states is never empty")
    }

    /// The position before 1-based ply `ply` (so `state_before(1)` is the
    /// initial position). `None` when out of range.
    pub fn state_before(&self, ply: usize) -> Option<&BoardState> {
        if ply == 0 || ply > self.moves.len() + 1 {
            return None;
        }
        self.states.get(ply - 1)
    }

    /// The move played at 1-based ply `ply`.
    pub fn move_at(&self, ply: usize) -> Option<Move> {
        if ply == 0 {
            return None;
        }
        self.moves.get(ply - 1).copied()
    }

    /// How many times the final position has occurred in the game, counting
    /// the initial position and every position after a move. Placement, side
    /// to move, castling rights, and en-passant target must all match.
    pub fn final_position_occurrences(&self) -> usize {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for state in &self.states {
            *counts.entry(state.repetition_key()).or_insert(0) += 1;
        }
        counts[&self.final_state().repetition_key()]
    }

    /// Render as movetext: `1. e4 e5 2. Nf3`. Empty history renders as "".
    pub fn to_movetext(&self) -> String {
        let mut out = String::new();
        for (i, token) in self.san.iter().enumerate() {
            if i % 2 == 0 {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("{}. ", i / 2 + 1));
            } else {
                out.push(' ');
            }
            out.push_str(token);
        }
        out
    }

    /// Parse movetext: whitespace-separated moves in SAN (`Nf3`) or
    /// coordinate form (`g1f3`), with optional move numbers, which may be
    /// glued to the move (`1.e4`). A game-result token (`1-0`, `0-1`,
    /// `1/2-1/2`, `*`) is allowed only as the final token. Comments,
    /// variations, and annotation glyphs are rejected.
    pub fn from_movetext(text: &str) -> Result<MoveHistory, HistoryError> {
        let mut history = MoveHistory::empty();
        let mut result_seen: Option<&str> = None;

        for raw in text.split_whitespace() {
            if let Some(result) = result_seen {
                return Err(HistoryError::MisplacedResult(result.to_string()));
            }
            if ["1-0", "0-1", "1/2-1/2", "*"].contains(&raw) {
                result_seen = Some(raw);
                continue;
            }
            for token in split_numbered_token(raw) {
                let token = token.map_err(|t| {
                    let expected = history.len() as u32 / 2 + 1;
                    if t.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                        HistoryError::BadMoveNumber { expected, token: t }
                    } else {
                        HistoryError::UnexpectedToken(t)
                    }
                })?;
                match token {
                    NumberedToken::MoveNumber { number, continuation } => {
                        // "N." must precede a white move, "N..." a black one.
                        let expected = history.len() as u32 / 2 + 1;
                        let parity_ok = if continuation {
                            history.len() % 2 == 1
                        } else {
                            history.len() % 2 == 0
                        };
                        if number != expected || !parity_ok {
                            let dots = if continuation { "..." } else { "." };
                            return Err(HistoryError::BadMoveNumber {
                                expected,
                                token: format!("{number}{dots}"),
                            });
                        }
                    }
                    NumberedToken::San(san_token) => {
                        let ply = history.len() + 1;
                        let current = history.final_state();
                        // SAN first; fall back to coordinate form ("e2e4",
                        // "e7e8q"), whose legality `push` then enforces.
                        let mv = match san::parse_san(current, &san_token) {
                            Ok(mv) => mv,
                            Err(source) => match san_token.parse::<Move>() {
                                Ok(mv) => mv,
                                Err(_) => {
                                    return Err(HistoryError::BadSan {
                                        ply,
                                        token: san_token,
                                        source,
                                    })
                                }
                            },
                        };
                        history.push(mv)?;
                    }
                }
            }
        }
        Ok(history)
    }
}

impl FromStr for MoveHistory {
    type Err = HistoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MoveHistory::from_movetext(s)
    }
}

// A history serializes as its movetext. Replaying the movetext on
// deserialization rebuilds the cached per-ply states, so a stored history can
// never get out of sync with the moves it records.
impl serde::Serialize for MoveHistory {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_movetext())
    }
}

impl<'de> serde::Deserialize<'de> for MoveHistory {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text: String = serde::Deserialize::deserialize(deserializer)?;
        MoveHistory::from_movetext(&text).map_err(serde::de::Error::custom)
    }
}

enum NumberedToken {
    MoveNumber { number: u32, continuation: bool },
    San(String),
}

/// Split one whitespace-separated chunk into a possible move-number prefix
/// and a SAN body: `"1.e4"` -> [MoveNumber(1), San("e4")], `"1."` ->
/// [MoveNumber(1)], `"e4"` -> [San("e4")]. `Err` carries the bad chunk.
fn split_numbered_token(raw: &str) -> Vec<Result<NumberedToken, String>> {
    let digits: String = raw.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return vec![Ok(NumberedToken::San(raw.to_string()))];
    }
    let rest = &raw[digits.len()..];
    let Ok(number) = digits.parse::<u32>() else {
        return vec![Err(raw.to_string())];
    };
    // A digit prefix must be a move number: "N." before a white move,
    // "N..." before a black one, either optionally glued to its move.
    let (rest, continuation) = if let Some(r) = rest.strip_prefix("...") {
        (r, true)
    } else if let Some(r) = rest.strip_prefix('.') {
        (r, false)
    } else {
        return vec![Err(raw.to_string())];
    };
    let mut out = vec![Ok(NumberedToken::MoveNumber { number, continuation })];
    if !rest.is_empty() {
        out.push(Ok(NumberedToken::San(rest.to_string())));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::fen::render_fen;
    use crate::chess::types::Color;

    #[test]
    fn empty_history_is_initial_position() {
        let h = MoveHistory::empty();
        assert_eq!(h.len(), 0);
        assert_eq!(h.final_state(), &BoardState::initial());
        assert_eq!(h.to_movetext(), "");
        assert_eq!(MoveHistory::from_movetext("").unwrap(), h);
    }

    #[test]
    fn movetext_round_trip() {
        let text = "1. e4 e5 2. Nf3 Nc6 3. Bb5 a6";
        let h = MoveHistory::from_movetext(text).unwrap();
        assert_eq!(h.len(), 6);
        assert_eq!(h.to_movetext(), text);
        assert_eq!(h.final_state().side_to_move(), Color::White);
    }

    #[test]
    fn glued_move_numbers_parse() {
        let h = MoveHistory::from_movetext("1.e4 e5 2.Nf3").unwrap();
        assert_eq!(h.to_movetext(), "1. e4 e5 2. Nf3");
    }

    #[test]
    fn coordinate_moves_parse_and_render_as_san() {
        let h = MoveHistory::from_movetext("1. e2e4 e7e5 2. g1f3 Nc6").unwrap();
        assert_eq!(h.to_movetext(), "1. e4 e5 2. Nf3 Nc6");
        // Coordinate spelling still has to be legal.
        let err = MoveHistory::from_movetext("1. e2e5").unwrap_err();
        assert!(matches!(err, HistoryError::IllegalMove { ply: 1, .. }));
    }

    #[test]
    fn black_continuation_numbers_parse() {
        let h = MoveHistory::from_movetext("1. e4 1... e5").unwrap();
        assert_eq!(h.to_movetext(), "1. e4 e5");
    }

    #[test]
    fn result_token_only_at_end() {
        let h = MoveHistory::from_movetext("1. f3 e5 2. g4 Qh4# 0-1").unwrap();
        assert_eq!(h.len(), 4);
        let err = MoveHistory::from_movetext("1. e4 1-0 e5").unwrap_err();
        assert!(matches!(err, HistoryError::MisplacedResult(_)));
    }

    #[test]
    fn rejects_wrong_move_number() {
        let err = MoveHistory::from_movetext("2. e4").unwrap_err();
        assert!(matches!(err, HistoryError::BadMoveNumber { expected: 1, .. }));
        let err = MoveHistory::from_movetext("1. e4 e5 3. Nf3").unwrap_err();
        assert!(matches!(err, HistoryError::BadMoveNumber { expected: 2, .. }));
    }

    #[test]
    fn rejects_comments_and_annotations() {
        assert!(MoveHistory::from_movetext("1. e4 {best by test} e5").is_err());
        assert!(MoveHistory::from_movetext("1. e4 e5 2. Nf3!?").is_err());
        assert!(MoveHistory::from_movetext("1. e4 (1. d4) e5").is_err());
    }

    #[test]
    fn rejects_illegal_move_with_ply() {
        let err = MoveHistory::from_movetext("1. e4 e5 2. Ke2 Ke7 3. O-O").unwrap_err();
        match err {
            HistoryError::BadSan { ply, token, .. } => {
                assert_eq!(ply, 5);
                assert_eq!(token, "O-O");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn state_before_and_move_at() {
        let h = MoveHistory::from_movetext("1. e4 e5").unwrap();
        assert_eq!(h.state_before(1), Some(&BoardState::initial()));
        assert_eq!(
            render_fen(h.state_before(2).unwrap()),
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1"
        );
        assert_eq!(h.move_at(1).unwrap().to_string(), "e2e4");
        assert_eq!(h.move_at(2).unwrap().to_string(), "e7e5");
        assert_eq!(h.move_at(3), None);
        assert_eq!(h.state_before(3), Some(h.final_state()));
        assert_eq!(h.state_before(4), None);
        assert_eq!(h.state_before(0), None);
    }

    #[test]
    fn threefold_counting() {
        // Knights shuffle back and forth: initial position recurs.
        let h = MoveHistory::from_movetext(
            "1. Nf3 Nf6 2. Ng1 Ng8 3. Nf3 Nf6 4. Ng1 Ng8",
        )
        .unwrap();
        assert_eq!(h.final_position_occurrences(), 3);
        let h = MoveHistory::from_movetext("1. Nf3 Nf6 2. Ng1 Ng8").unwrap();
        assert_eq!(h.final_position_occurrences(), 2);
    }

    #[test]
    fn mate_line_renders_with_suffix() {
        let h = MoveHistory::from_movetext("1. f3 e5 2. g4 Qh4#").unwrap();
        assert_eq!(h.to_movetext(), "1. f3 e5 2. g4 Qh4#");
        assert_eq!(h.final_state().side_to_move(), Color::White);
    }
}
