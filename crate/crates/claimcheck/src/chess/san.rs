//! Standard algebraic notation for single moves.
//!
//! The parser works by constraint matching: a token is decomposed into piece
//! kind, optional disambiguation, capture flag, destination, and promotion,
//! then matched against the position's legal moves. That keeps parsing and
//! the rules engine from ever disagreeing — a token is accepted exactly when
//! exactly one legal move fits it. Over-disambiguated but unambiguous tokens
//! (e.g. `Ngf3` with one knight) are accepted; ambiguous ones are not.

use thiserror::Error;

use super::board::BoardState;
use super::movegen::{is_in_check, legal_moves};
use super::types::{Move, PieceKind, Square};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SanError {
    #[error("cannot parse SAN token {0:?}")]
    Malformed(String),
    #[error("SAN token {0:?} matches no legal move in this position")]
    NoMatch(String),
    #[error("SAN token {token:?} is ambiguous: matches {candidates:?}")]
    Ambiguous { token: String, candidates: Vec<String> },
}

/// The constraints extracted from a SAN token body.
#[derive(Debug)]
struct SanPattern {
    piece: PieceKind,
    from_file: Option<u8>,
    from_rank: Option<u8>,
    is_capture: bool,
    to: Square,
    promotion: Option<PieceKind>,
}

/// Parse a SAN token in the context of `board`, returning the unique legal
/// move it denotes.
pub fn parse_san(board: &BoardState, token: &str) -> Result<Move, SanError> {
    let stripped = token.trim_end_matches(['+', '#']);
    if stripped.is_empty() {
        return Err(SanError::Malformed(token.to_string()));
    }

    // Castling first: letter O or digit 0 spellings both occur in the wild.
    let castle_target = match stripped {
        "O-O" | "0-0" => Some(6u8),
        "O-O-O" | "0-0-0" => Some(2u8),
        _ => None,
    };
    if let Some(target_file) = castle_target {
        let home_rank = match board.side_to_move() {
            super::types::Color::White => 0,
            super::types::Color::Black => 7,
        };
        let mv = Move::new(
            Square::from_coords(4, home_rank).unwrap(),
            Square::from_coords(target_file, home_rank).unwrap(),
        );
        return if legal_moves(board).contains(&mv) {
            Ok(mv)
        } else {
            Err(SanError::NoMatch(token.to_string()))
        };
    }

    let pattern = decompose(stripped).ok_or_else(|| SanError::Malformed(token.to_string()))?;

    let candidates: Vec<Move> = legal_moves(board)
        .into_iter()
        .filter(|mv| {
            let piece = board.piece_at(mv.from).expect("legal move has a mover");
            if piece.kind != pattern.piece {
                return false;
            }
            if mv.to != pattern.to {
                return false;
            }
            if let Some(f) = pattern.from_file {
                if mv.from.file() != f {
                    return false;
                }
            }
            if let Some(r) = pattern.from_rank {
                if mv.from.rank() != r {
                    return false;
                }
            }
            if mv.promotion != pattern.promotion {
                return false;
            }
            let is_capture =
                board.piece_at(mv.to).is_some() || (piece.kind == PieceKind::Pawn
                    && board.en_passant() == Some(mv.to));
            is_capture == pattern.is_capture
        })
        .collect();

    match candidates.len() {
        0 => Err(SanError::NoMatch(token.to_string())),
        1 => Ok(candidates[0]),
        _ => Err(SanError::Ambiguous {
            token: token.to_string(),
            candidates: candidates.iter().map(|m| m.to_string()).collect(),
        }),
    }
}

/// Split a (suffix-stripped) SAN body into its constraints.
fn decompose(body: &str) -> Option<SanPattern> {
    let mut chars: Vec<char> = body.chars().collect();

    // Promotion tail: "=Q" etc.
    let mut promotion = None;
    if chars.len() >= 2 && chars[chars.len() - 2] == '=' {
        promotion = Some(match chars[chars.len() - 1] {
            'Q' => PieceKind::Queen,
            'R' => PieceKind::Rook,
            'B' => PieceKind::Bishop,
            'N' => PieceKind::Knight,
            _ => return None,
        });
        chars.truncate(chars.len() - 2);
    }

    // Destination square is always the last two characters.
    if chars.len() < 2 {
        return None;
    }
    let to_str: String = chars[chars.len() - 2..].iter().collect();
    let to: Square = to_str.parse().ok()?;
    chars.truncate(chars.len() - 2);

    // Leading piece letter (absent for pawn moves).
    let piece = match chars.first() {
        Some('N') => PieceKind::Knight,
        Some('B') => PieceKind::Bishop,
        Some('R') => PieceKind::Rook,
        Some('Q') => PieceKind::Queen,
        Some('K') => PieceKind::King,
        _ => PieceKind::Pawn,
    };
    if piece != PieceKind::Pawn {
        chars.remove(0);
    }
    if promotion.is_some() && piece != PieceKind::Pawn {
        return None;
    }

    // What remains is [file][rank]["x"] in some order: disambiguation then
    // an optional capture marker.
    let mut is_capture = false;
    if chars.last() == Some(&'x') {
        is_capture = true;
        chars.pop();
    }
    let mut from_file = None;
    let mut from_rank = None;
    for c in chars {
        match c {
            'a'..='h' if from_file.is_none() => from_file = Some(c as u8 - b'a'),
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as u8 - b'1'),
            _ => return None,
        }
    }

    // A pawn capture must name its file ("exd5"); a bare pawn move may not
    // carry disambiguation.
    if piece == PieceKind::Pawn {
        if is_capture && from_file.is_none() {
            return None;
        }
        if !is_capture && (from_file.is_some() || from_rank.is_some()) {
            return None;
        }
    }

    Some(SanPattern { piece, from_file, from_rank, is_capture, to, promotion })
}

/// Render `mv` (which must be legal in `board`) as SAN with minimal
/// disambiguation and a `+`/`#` suffix when it gives check or mate.
pub fn render_san(board: &BoardState, mv: Move) -> Result<String, SanError> {
    let legal = legal_moves(board);
    if !legal.contains(&mv) {
        return Err(SanError::NoMatch(mv.to_string()));
    }
    let piece = board.piece_at(mv.from).expect("legal move has a mover");

    let mut out = String::new();
    let is_castle = piece.kind == PieceKind::King && mv.from.file() == 4
        && (mv.to.file() == 6 || mv.to.file() == 2)
        && mv.from.rank() == mv.to.rank();
    if is_castle {
        out = if mv.to.file() == 6 { "O-O".to_string() } else { "O-O-O".to_string() };
    } else {
        let is_capture = board.piece_at(mv.to).is_some()
            || (piece.kind == PieceKind::Pawn && board.en_passant() == Some(mv.to));

        if let Some(letter) = piece.kind.san_letter() {
            out.push(letter);
            // Minimal disambiguation among same-kind pieces that can also
            // reach the destination: file if it suffices, else rank, else both.
            let rivals: Vec<Square> = legal
                .iter()
                .filter(|m| {
                    m.to == mv.to
                        && m.from != mv.from
                        && board.piece_at(m.from).is_some_and(|p| p.kind == piece.kind)
                })
                .map(|m| m.from)
                .collect();
            if !rivals.is_empty() {
                let file_unique = rivals.iter().all(|sq| sq.file() != mv.from.file());
                let rank_unique = rivals.iter().all(|sq| sq.rank() != mv.from.rank());
                if file_unique {
                    out.push((b'a' + mv.from.file()) as char);
                } else if rank_unique {
                    out.push((b'1' + mv.from.rank()) as char);
                } else {
                    out.push_str(&mv.from.to_string());
                }
            }
        } else if is_capture {
            out.push((b'a' + mv.from.file()) as char);
        }

        if is_capture {
            out.push('x');
        }
        out.push_str(&mv.to.to_string());
        if let Some(kind) = mv.promotion {
            out.push('=');
            out.push(kind.san_letter().expect("promotion is never to pawn"));
        }
    }

    let next = board.apply_move_unchecked(mv);
    if is_in_check(&next, next.side_to_move()) {
        let mate = legal_moves(&next).is_empty();
        out.push(if mate { '#' } else { '+' });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::fen::parse_fen;

    fn initial() -> BoardState {
        BoardState::initial()
    }

    #[test]
    fn parses_simple_pawn_and_piece_moves() {
        let board = initial();
        assert_eq!(parse_san(&board, "e4").unwrap().to_string(), "e2e4");
        assert_eq!(parse_san(&board, "Nf3").unwrap().to_string(), "g1f3");
    }

    #[test]
    fn accepts_over_disambiguation_when_unique() {
        let board = initial();
        assert_eq!(parse_san(&board, "Ngf3").unwrap().to_string(), "g1f3");
        assert_eq!(parse_san(&board, "Ng1f3").unwrap().to_string(), "g1f3");
    }

    #[test]
    fn rejects_ambiguous_token() {
        // Two knights can reach d2.
        let board = parse_fen("4k3/8/8/8/8/5N2/8/1N2K3 w - - 0 1").unwrap();
        let err = parse_san(&board, "Nd2").unwrap_err();
        assert!(matches!(err, SanError::Ambiguous { .. }));
        assert_eq!(parse_san(&board, "Nbd2").unwrap().to_string(), "b1d2");
        assert_eq!(parse_san(&board, "Nfd2").unwrap().to_string(), "f3d2");
    }

    #[test]
    fn pawn_captures_need_file() {
        let board = parse_fen(
            "rnbqkbnr/ppp1pppp/8/3p4/4P3/8/PPPP1PPP/RNBQKBNR w KQkq d6 0 2",
        )
        .unwrap();
        assert_eq!(parse_san(&board, "exd5").unwrap().to_string(), "e4d5");
        assert!(matches!(parse_san(&board, "xd5"), Err(SanError::Malformed(_))));
    }

    #[test]
    fn capture_marker_must_match() {
        let board = initial();
        // "Nxf3" names a capture, but f3 is empty.
        assert!(matches!(parse_san(&board, "Nxf3"), Err(SanError::NoMatch(_))));
    }

    #[test]
    fn castling_spellings() {
        let board = parse_fen("4k3/8/8/8/8/8/8/4K2R w K - 0 1").unwrap();
        assert_eq!(parse_san(&board, "O-O").unwrap().to_string(), "e1g1");
        assert_eq!(parse_san(&board, "0-0").unwrap().to_string(), "e1g1");
        assert!(matches!(parse_san(&board, "O-O-O"), Err(SanError::NoMatch(_))));
    }

    #[test]
    fn promotion_round_trip() {
        // The black king on h3 stays out of the new queen's lines.
        let board = parse_fen("8/P7/8/8/8/7k/8/K7 w - - 0 1").unwrap();
        let mv = parse_san(&board, "a8=Q").unwrap();
        assert_eq!(mv.to_string(), "a7a8q");
        assert_eq!(render_san(&board, mv).unwrap(), "a8=Q");
        assert!(matches!(parse_san(&board, "a8"), Err(SanError::NoMatch(_))));
        assert!(matches!(parse_san(&board, "a8=K"), Err(SanError::Malformed(_))));
    }

    #[test]
    fn check_and_mate_suffixes_are_tolerated_and_rendered() {
        // 1. f3 e5 2. g4 and now Qh4 is mate.
        let board = initial();
        let board = board.apply_move(parse_san(&board, "f3").unwrap()).unwrap();
        let board = board.apply_move(parse_san(&board, "e5").unwrap()).unwrap();
        let board = board.apply_move(parse_san(&board, "g4").unwrap()).unwrap();
        let mate = parse_san(&board, "Qh4").unwrap();
        assert_eq!(parse_san(&board, "Qh4#").unwrap(), mate);
        assert_eq!(render_san(&board, mate).unwrap(), "Qh4#");
    }

    #[test]
    fn render_uses_minimal_disambiguation() {
        let board = parse_fen("4k3/8/8/8/8/5N2/8/1N2K3 w - - 0 1").unwrap();
        let mv: Move = "b1d2".parse().unwrap();
        assert_eq!(render_san(&board, mv).unwrap(), "Nbd2");

        // Same file, different ranks: rank disambiguation.
        let board = parse_fen("4k3/8/8/8/5N2/8/5N2/4K3 w - - 0 1").unwrap();
        let mv: Move = "f2d3".parse().unwrap();
        assert_eq!(render_san(&board, mv).unwrap(), "N2d3");
    }

    #[test]
    fn render_rejects_illegal_move() {
        let board = initial();
        let mv: Move = "e2e5".parse().unwrap();
        assert!(render_san(&board, mv).is_err());
    }

    #[test]
    fn san_round_trip_over_legal_moves() {
        let board = parse_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1")
            .unwrap();
        for mv in legal_moves(&board) {
            let san = render_san(&board, mv).unwrap();
            let back = parse_san(&board, &san).unwrap();
            assert_eq!(back, mv, "token {san} did not round-trip");
        }
    }
}
