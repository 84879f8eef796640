//! A complete, self-contained chess rules engine: board representation,
//! legal move generation, FEN and SAN codecs, and validated game histories.
//!
//! This is the reference world the rest of the crate measures claims
//! against, so correctness is prioritized over speed everywhere; `perft`
//! cross-checks in the test suite keep the move generator honest.

pub mod board;
pub mod fen;
pub mod history;
pub mod movegen;
pub mod san;
pub mod types;

pub use board::{BoardState, MoveError, PositionError};
pub use fen::{parse_fen, render_fen, FenError, INITIAL_FEN};
pub use history::{HistoryError, MoveHistory};
pub use movegen::{is_attacked, is_in_check, legal_moves, perft};
pub use san::{parse_san, render_san, SanError};
pub use types::{
    CastleSide, CastlingRights, Color, Move, Piece, PieceKind, Square,
};
