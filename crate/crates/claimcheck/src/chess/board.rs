//! The board position: piece placement plus side to move, castling rights,
//! en-passant target, and the move clocks.
//!
//! `BoardState` values are only handed out after structural validation, so
//! downstream rule queries (legal moves, check detection, claim evaluation)
//! never have to re-check invariants like "exactly one king per side".

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::movegen;
use super::types::{CastleSide, CastlingRights, Color, Move, Piece, PieceKind, Square};

/// Why a position fails structural validation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PositionError {
    #[error("{color} has {count} kings (expected exactly 1)")]
    KingCount { color: Color, count: usize },
    #[error("{color} has {count} pieces (maximum 16)")]
    TooManyPieces { color: Color, count: usize },
    #[error("{color} has {count} pawns (maximum 8)")]
    TooManyPawns { color: Color, count: usize },
    #[error("{color} pawn on back rank at {square}")]
    PawnOnBackRank { color: Color, square: Square },
    #[error("{color} is in check but it is not their turn")]
    NonMoverInCheck { color: Color },
    #[error("en-passant square {square} is inconsistent: {reason}")]
    BadEnPassant { square: Square, reason: String },
    #[error("castling right {right} requires king and rook on their home squares")]
    BadCastlingRight { right: char },
}

/// Why a move is rejected by [`BoardState::apply_move`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("no piece on {0}")]
    EmptyFromSquare(Square),
    #[error("piece on {square} belongs to {color}, who is not to move")]
    WrongColor { square: Square, color: Color },
    #[error("{piece} cannot move from {from} to {to} in this position")]
    IllegalMovement { piece: PieceKind, from: Square, to: Square },
    #[error("move {0} would leave the mover's king in check")]
    LeavesKingInCheck(Move),
    #[error("move {mv} {reason} promotion choice")]
    BadPromotion { mv: Move, reason: &'static str },
}

/// A full chess position. Construct via [`BoardState::initial`], FEN parsing,
/// or [`BoardState::from_parts`]; all three guarantee structural validity.
///
/// Serializes as its FEN string, so invalid positions cannot round-trip
/// through a dataset either.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoardState {
    placement: [Option<Piece>; 64],
    side_to_move: Color,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

impl BoardState {
    /// The standard initial position.
    pub fn initial() -> BoardState {
        let mut placement = [None; 64];
        let back = [
            PieceKind::Rook,
            PieceKind::Knight,
            PieceKind::Bishop,
            PieceKind::Queen,
            PieceKind::King,
            PieceKind::Bishop,
            PieceKind::Knight,
            PieceKind::Rook,
        ];
        for (file, &kind) in back.iter().enumerate() {
            let file = file as u8;
            placement[Square::from_coords(file, 0).unwrap().index()] =
                Some(Piece::new(Color::White, kind));
            placement[Square::from_coords(file, 1).unwrap().index()] =
                Some(Piece::new(Color::White, PieceKind::Pawn));
            placement[Square::from_coords(file, 6).unwrap().index()] =
                Some(Piece::new(Color::Black, PieceKind::Pawn));
            placement[Square::from_coords(file, 7).unwrap().index()] =
                Some(Piece::new(Color::Black, kind));
        }
        BoardState {
            placement,
            side_to_move: Color::White,
            castling: CastlingRights::full(),
            en_passant: None,
            halfmove_clock: 0,
            fullmove_number: 1,
        }
    }

    /// Assemble a position from raw parts, validating every structural rule.
    pub fn from_parts(
        placement: [Option<Piece>; 64],
        side_to_move: Color,
        castling: CastlingRights,
        en_passant: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Result<BoardState, PositionError> {
        let state = BoardState {
            placement,
            side_to_move,
            castling,
            en_passant,
            halfmove_clock,
            fullmove_number: fullmove_number.max(1),
        };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<(), PositionError> {
        for color in [Color::White, Color::Black] {
            let mut kings = 0;
            let mut pawns = 0;
            let mut pieces = 0;
            for sq in Square::all() {
                let Some(piece) = self.piece_at(sq) else { continue };
                if piece.color != color {
                    continue;
                }
                pieces += 1;
                match piece.kind {
                    PieceKind::King => kings += 1,
                    PieceKind::Pawn => {
                        pawns += 1;
                        if sq.rank() == 0 || sq.rank() == 7 {
                            return Err(PositionError::PawnOnBackRank { color, square: sq });
                        }
                    }
                    _ => {}
                }
            }
            if kings != 1 {
                return Err(PositionError::KingCount { color, count: kings });
            }
            if pieces > 16 {
                return Err(PositionError::TooManyPieces { color, count: pieces });
            }
            if pawns > 8 {
                return Err(PositionError::TooManyPawns { color, count: pawns });
            }
        }

        // The side that just moved must not still be in check.
        let non_mover = self.side_to_move.opposite();
        if movegen::is_in_check(self, non_mover) {
            return Err(PositionError::NonMoverInCheck { color: non_mover });
        }

        if let Some(ep) = self.en_passant {
            self.validate_en_passant(ep)?;
        }

        self.validate_castling()?;
        Ok(())
    }

    /// An en-passant target is only meaningful when the previous move was a
    /// double pawn push: correct rank for the side to move, the pushed pawn
    /// standing in front of the target, and both the target and origin
    /// squares empty.
    fn validate_en_passant(&self, ep: Square) -> Result<(), PositionError> {
        let bad = |reason: &str| PositionError::BadEnPassant {
            square: ep,
            reason: reason.to_string(),
        };
        let (expected_rank, pusher_color, pusher_rank, origin_rank) = match self.side_to_move {
            Color::White => (5, Color::Black, 4, 6),
            Color::Black => (2, Color::White, 3, 1),
        };
        if ep.rank() != expected_rank {
            return Err(bad(&format!(
                "rank {} does not match side to move ({})",
                ep.rank() + 1,
                self.side_to_move
            )));
        }
        let pusher_sq = Square::from_coords(ep.file(), pusher_rank).unwrap();
        match self.piece_at(pusher_sq) {
            Some(p) if p.color == pusher_color && p.kind == PieceKind::Pawn => {}
            _ => return Err(bad(&format!("no {pusher_color} pawn on {pusher_sq}"))),
        }
        if self.piece_at(ep).is_some() {
            return Err(bad("target square is occupied"));
        }
        let origin_sq = Square::from_coords(ep.file(), origin_rank).unwrap();
        if self.piece_at(origin_sq).is_some() {
            return Err(bad(&format!("pawn origin square {origin_sq} is occupied")));
        }
        Ok(())
    }

    fn validate_castling(&self) -> Result<(), PositionError> {
        let checks = [
            ('K', Color::White, CastleSide::Kingside, "e1", "h1"),
            ('Q', Color::White, CastleSide::Queenside, "e1", "a1"),
            ('k', Color::Black, CastleSide::Kingside, "e8", "h8"),
            ('q', Color::Black, CastleSide::Queenside, "e8", "a8"),
        ];
        for (right, color, side, king_sq, rook_sq) in checks {
            if !self.castling.get(color, side) {
                continue;
            }
            let king_sq: Square = king_sq.parse().unwrap();
            let rook_sq: Square = rook_sq.parse().unwrap();
            let king_ok = self.piece_at(king_sq) == Some(Piece::new(color, PieceKind::King));
            let rook_ok = self.piece_at(rook_sq) == Some(Piece::new(color, PieceKind::Rook));
            if !king_ok || !rook_ok {
                return Err(PositionError::BadCastlingRight { right });
            }
        }
        Ok(())
    }

    pub fn piece_at(&self, square: Square) -> Option<Piece> {
        self.placement[square.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    /// All squares holding a piece of `color`.
    pub fn pieces_of(&self, color: Color) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| {
            self.piece_at(sq).filter(|p| p.color == color).map(|p| (sq, p))
        })
    }

    /// All occupied squares.
    pub fn occupied(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| self.piece_at(sq).map(|p| (sq, p)))
    }

    pub fn king_square(&self, color: Color) -> Square {
        // Validation guarantees exactly one king per side.
        Square::all()
            .find(|&sq| self.piece_at(sq) == Some(Piece::new(color, PieceKind::King)))
            .expect("validated position has a king of each color")
    }

    pub fn count(&self, color: Color, kind: PieceKind) -> usize {
        self.pieces_of(color).filter(|(_, p)| p.kind == kind).count()
    }

    pub fn total_pieces(&self) -> usize {
        self.occupied().count()
    }

    /// Apply a move after checking it is fully legal in this position.
    pub fn apply_move(&self, mv: Move) -> Result<BoardState, MoveError> {
        let piece = self.piece_at(mv.from).ok_or(MoveError::EmptyFromSquare(mv.from))?;
        if piece.color != self.side_to_move {
            return Err(MoveError::WrongColor { square: mv.from, color: piece.color });
        }
        let last_rank = match self.side_to_move {
            Color::White => 7,
            Color::Black => 0,
        };
        let is_promotion_move = piece.kind == PieceKind::Pawn && mv.to.rank() == last_rank;
        if is_promotion_move && mv.promotion.is_none() {
            return Err(MoveError::BadPromotion { mv, reason: "is missing a" });
        }
        if !is_promotion_move && mv.promotion.is_some() {
            return Err(MoveError::BadPromotion { mv, reason: "carries a spurious" });
        }
        if mv.promotion == Some(PieceKind::King) || mv.promotion == Some(PieceKind::Pawn) {
            return Err(MoveError::BadPromotion { mv, reason: "names an invalid" });
        }
        if !movegen::pseudo_legal_moves(self).contains(&mv) {
            return Err(MoveError::IllegalMovement {
                piece: piece.kind,
                from: mv.from,
                to: mv.to,
            });
        }
        let next = self.apply_move_unchecked(mv);
        if movegen::is_in_check(&next, self.side_to_move) {
            return Err(MoveError::LeavesKingInCheck(mv));
        }
        Ok(next)
    }

    /// Apply a move assuming it is pseudo-legal. Used by the move generator's
    /// legality filter and by [`BoardState::apply_move`] after its own checks.
    pub(crate) fn apply_move_unchecked(&self, mv: Move) -> BoardState {
        let mut next = self.clone();
        let piece = self.piece_at(mv.from).expect("apply_move_unchecked: empty from-square");
        let mover = piece.color;
        let captured = self.piece_at(mv.to);

        next.placement[mv.from.index()] = None;
        next.placement[mv.to.index()] = Some(match mv.promotion {
            Some(kind) => Piece::new(mover, kind),
            None => piece,
        });

        // En-passant capture removes the pawn behind the target square.
        let mut is_ep_capture = false;
        if piece.kind == PieceKind::Pawn && Some(mv.to) == self.en_passant {
            let victim_rank = match mover {
                Color::White => mv.to.rank() - 1,
                Color::Black => mv.to.rank() + 1,
            };
            let victim = Square::from_coords(mv.to.file(), victim_rank).unwrap();
            next.placement[victim.index()] = None;
            is_ep_capture = true;
        }

        // Castling also moves the rook.
        if piece.kind == PieceKind::King && mv.from.file() == 4 {
            let rank = mv.from.rank();
            if mv.to.file() == 6 {
                let rook_from = Square::from_coords(7, rank).unwrap();
                let rook_to = Square::from_coords(5, rank).unwrap();
                next.placement[rook_to.index()] = next.placement[rook_from.index()].take();
            } else if mv.to.file() == 2 {
                let rook_from = Square::from_coords(0, rank).unwrap();
                let rook_to = Square::from_coords(3, rank).unwrap();
                next.placement[rook_to.index()] = next.placement[rook_from.index()].take();
            }
        }

        // Castling rights lapse when the king or a rook moves, or a rook is
        // captured on its home square.
        if piece.kind == PieceKind::King {
            next.castling.clear_color(mover);
        }
        for (corner, color, side) in [
            ("a1", Color::White, CastleSide::Queenside),
            ("h1", Color::White, CastleSide::Kingside),
            ("a8", Color::Black, CastleSide::Queenside),
            ("h8", Color::Black, CastleSide::Kingside),
        ] {
            let corner: Square = corner.parse().unwrap();
            if mv.from == corner || mv.to == corner {
                next.castling.set(color, side, false);
            }
        }

        // New en-passant target appears only after a double pawn push.
        next.en_passant = None;
        if piece.kind == PieceKind::Pawn {
            let from_rank = mv.from.rank() as i8;
            let to_rank = mv.to.rank() as i8;
            if (from_rank - to_rank).abs() == 2 {
                let mid_rank = ((from_rank + to_rank) / 2) as u8;
                next.en_passant = Square::from_coords(mv.from.file(), mid_rank);
            }
        }

        if piece.kind == PieceKind::Pawn || captured.is_some() || is_ep_capture {
            next.halfmove_clock = 0;
        } else {
            next.halfmove_clock = self.halfmove_clock + 1;
        }
        if mover == Color::Black {
            next.fullmove_number = self.fullmove_number + 1;
        }
        next.side_to_move = mover.opposite();
        next
    }

    /// Raw placement mutation for position synthesis. The result is
    /// re-validated through [`BoardState::from_parts`], so corrupted or
    /// hand-built placements cannot leak invalid states.
    pub fn with_placement_edits(
        &self,
        edits: impl IntoIterator<Item = (Square, Option<Piece>)>,
    ) -> Result<BoardState, PositionError> {
        let mut placement = self.placement;
        for (sq, piece) in edits {
            placement[sq.index()] = piece;
        }
        // Derive coherent castling rights and en-passant from the edited
        // placement rather than trusting the old flags.
        let mut castling = self.castling;
        for (right, color, side, king_sq, rook_sq) in [
            ('K', Color::White, CastleSide::Kingside, "e1", "h1"),
            ('Q', Color::White, CastleSide::Queenside, "e1", "a1"),
            ('k', Color::Black, CastleSide::Kingside, "e8", "h8"),
            ('q', Color::Black, CastleSide::Queenside, "e8", "a8"),
        ] {
            let _ = right;
            let king: Square = king_sq.parse().unwrap();
            let rook: Square = rook_sq.parse().unwrap();
            let ok = placement[king.index()] == Some(Piece::new(color, PieceKind::King))
                && placement[rook.index()] == Some(Piece::new(color, PieceKind::Rook));
            if !ok {
                castling.set(color, side, false);
            }
        }
        let mut candidate = BoardState {
            placement,
            side_to_move: self.side_to_move,
            castling,
            en_passant: self.en_passant,
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
        };
        if let Some(ep) = candidate.en_passant {
            if candidate.validate_en_passant(ep).is_err() {
                candidate.en_passant = None;
            }
        }
        candidate.validate()?;
        Ok(candidate)
    }

    /// Same position with the other side to move and no en-passant target.
    /// Fails when the new non-mover would be in check.
    pub fn with_side_to_move(&self, color: Color) -> Result<BoardState, PositionError> {
        let mut next = self.clone();
        next.side_to_move = color;
        next.en_passant = None;
        next.validate()?;
        Ok(next)
    }

    /// An ASCII rendering of the board, rank 8 at the top.
    pub fn ascii(&self) -> String {
        let mut out = String::new();
        for rank in (0..8).rev() {
            out.push_str(&format!("{} ", rank + 1));
            for file in 0..8 {
                let sq = Square::from_coords(file, rank).unwrap();
                let cell = self.piece_at(sq).map_or('.', |p| p.fen_char());
                out.push(' ');
                out.push(cell);
            }
            out.push('\n');
        }
        out.push_str("   a b c d e f g h\n");
        out
    }

    /// The position-identity key used for repetition detection: placement,
    /// side to move, castling rights, and en-passant target (clocks excluded).
    pub fn repetition_key(&self) -> String {
        let fen = super::fen::render_fen(self);
        fen.split_whitespace().take(4).collect::<Vec<_>>().join(" ")
    }
}

impl Serialize for BoardState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::fen::render_fen(self))
    }
}

impl<'de> Deserialize<'de> for BoardState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let fen = String::deserialize(deserializer)?;
        super::fen::parse_fen(&fen).map_err(serde::de::Error::custom)
    }
}
