//! FEN parsing and rendering.
//!
//! Parsing is strict: exactly six fields, every field checked, and the
//! resulting position must pass full structural validation. Errors name the
//! offending field so bad records in a dataset are diagnosable.

use thiserror::Error;

use super::board::{BoardState, PositionError};
use super::types::{CastlingRights, Color, Piece, Square};

pub const INITIAL_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FenError {
    #[error("expected 6 fields, found {0}")]
    FieldCount(usize),
    #[error("placement field: {0}")]
    Placement(String),
    #[error("side-to-move field {0:?} (expected \"w\" or \"b\")")]
    SideToMove(String),
    #[error("castling field {0:?}")]
    Castling(String),
    #[error("en-passant field {0:?}")]
    EnPassant(String),
    #[error("halfmove clock field {0:?}")]
    HalfmoveClock(String),
    #[error("fullmove number field {0:?}")]
    FullmoveNumber(String),
    #[error("position invalid: {0}")]
    Invalid(#[from] PositionError),
}

pub fn parse_fen(fen: &str) -> Result<BoardState, FenError> {
    let fields: Vec<&str> = fen.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }

    let placement = parse_placement(fields[0])?;

    let side_to_move = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::SideToMove(other.to_string())),
    };

    let castling = parse_castling(fields[2])?;

    let en_passant = match fields[3] {
        "-" => None,
        s => Some(s.parse::<Square>().map_err(|_| FenError::EnPassant(s.to_string()))?),
    };

    let halfmove_clock: u32 =
        fields[4].parse().map_err(|_| FenError::HalfmoveClock(fields[4].to_string()))?;
    let fullmove_number: u32 =
        fields[5].parse().map_err(|_| FenError::FullmoveNumber(fields[5].to_string()))?;
    if fullmove_number == 0 {
        return Err(FenError::FullmoveNumber(fields[5].to_string()));
    }

    Ok(BoardState::from_parts(
        placement,
        side_to_move,
        castling,
        en_passant,
        halfmove_clock,
        fullmove_number,
    )?)
}

fn parse_placement(field: &str) -> Result<[Option<Piece>; 64], FenError> {
    let err = |msg: String| FenError::Placement(msg);
    let ranks: Vec<&str> = field.split('/').collect();
    if ranks.len() != 8 {
        return Err(err(format!("expected 8 ranks, found {}", ranks.len())));
    }
    let mut placement = [None; 64];
    for (i, rank_str) in ranks.iter().enumerate() {
        let rank = 7 - i as u8; // FEN lists rank 8 first
        let mut file: u8 = 0;
        let mut last_was_digit = false;
        for c in rank_str.chars() {
            if let Some(skip) = c.to_digit(10) {
                if last_was_digit {
                    return Err(err(format!("consecutive digits in rank {}", rank + 1)));
                }
                if skip == 0 || skip > 8 {
                    return Err(err(format!("bad empty-square count {skip} in rank {}", rank + 1)));
                }
                file += skip as u8;
                last_was_digit = true;
            } else {
                let piece = Piece::from_fen_char(c)
                    .ok_or_else(|| err(format!("unknown piece character {c:?}")))?;
                let sq = Square::from_coords(file, rank)
                    .ok_or_else(|| err(format!("rank {} overflows 8 files", rank + 1)))?;
                placement[sq.index()] = Some(piece);
                file += 1;
                last_was_digit = false;
            }
            if file > 8 {
                return Err(err(format!("rank {} overflows 8 files", rank + 1)));
            }
        }
        if file != 8 {
            return Err(err(format!("rank {} covers {file} files (expected 8)", rank + 1)));
        }
    }
    Ok(placement)
}

fn parse_castling(field: &str) -> Result<CastlingRights, FenError> {
    if field == "-" {
        return Ok(CastlingRights::none());
    }
    if field.is_empty() {
        return Err(FenError::Castling(field.to_string()));
    }
    let mut rights = CastlingRights::none();
    // FEN order is KQkq; repeated or out-of-order flags are rejected.
    let mut remaining = "KQkq";
    for c in field.chars() {
        let Some(pos) = remaining.find(c) else {
            return Err(FenError::Castling(field.to_string()));
        };
        remaining = &remaining[pos + 1..];
        match c {
            'K' => rights.white_kingside = true,
            'Q' => rights.white_queenside = true,
            'k' => rights.black_kingside = true,
            'q' => rights.black_queenside = true,
            _ => unreachable!(),
        }
    }
    Ok(rights)
}

pub fn render_fen(board: &BoardState) -> String {
    let mut placement = String::new();
    for rank in (0..8).rev() {
        let mut empty = 0;
        for file in 0..8 {
            let sq = Square::from_coords(file, rank).unwrap();
            match board.piece_at(sq) {
                None => empty += 1,
                Some(piece) => {
                    if empty > 0 {
                        placement.push_str(&empty.to_string());
                        empty = 0;
                    }
                    placement.push(piece.fen_char());
                }
            }
        }
        if empty > 0 {
            placement.push_str(&empty.to_string());
        }
        if rank > 0 {
            placement.push('/');
        }
    }

    let stm = match board.side_to_move() {
        Color::White => "w",
        Color::Black => "b",
    };
    let ep = board.en_passant().map_or("-".to_string(), |sq| sq.to_string());
    format!(
        "{placement} {stm} {} {ep} {} {}",
        board.castling().fen_field(),
        board.halfmove_clock(),
        board.fullmove_number()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_fen_round_trips() {
        let board = parse_fen(INITIAL_FEN).unwrap();
        assert_eq!(board, BoardState::initial());
        assert_eq!(render_fen(&board), INITIAL_FEN);
    }

    #[test]
    fn move_then_render_matches_known_fen() {
        let board = BoardState::initial().apply_move("e2e4".parse().unwrap()).unwrap();
        assert_eq!(
            render_fen(&board),
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1"
        );
    }

    #[test]
    fn rejects_wrong_field_count() {
        assert_eq!(
            parse_fen("8/8/8/8/8/8/8/8 w - -"),
            Err(FenError::FieldCount(4))
        );
    }

    #[test]
    fn rejects_bad_placement() {
        let e = parse_fen("9/8/8/8/8/8/8/8 w - - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Placement(_)));
        let e = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP w KQkq - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Placement(_)));
        let e = parse_fen("rnbqkbnx/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Placement(_)));
        // 4+4 hides a rank that only covers 8 via consecutive digits
        let e = parse_fen("rnbqkbnr/pppppppp/44/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Placement(_)));
    }

    #[test]
    fn rejects_bad_side_to_move() {
        let e = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1").unwrap_err();
        assert_eq!(e, FenError::SideToMove("x".to_string()));
    }

    #[test]
    fn rejects_bad_castling_field() {
        let e = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQKQ - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Castling(_)));
        let e = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w qK - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Castling(_)));
    }

    #[test]
    fn rejects_bad_en_passant_square() {
        let e = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e9 0 1").unwrap_err();
        assert_eq!(e, FenError::EnPassant("e9".to_string()));
    }

    #[test]
    fn rejects_structurally_invalid_position() {
        // Two white kings.
        let e = parse_fen("4k3/8/8/8/8/8/8/K3K3 w - - 0 1").unwrap_err();
        assert!(matches!(e, FenError::Invalid(_)));
    }

    #[test]
    fn rejects_zero_fullmove_number() {
        let e = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 0").unwrap_err();
        assert!(matches!(e, FenError::FullmoveNumber(_)));
    }

    #[test]
    fn kiwipete_parses_and_round_trips() {
        let fen = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1";
        let board = parse_fen(fen).unwrap();
        assert_eq!(render_fen(&board), fen);
    }
}
