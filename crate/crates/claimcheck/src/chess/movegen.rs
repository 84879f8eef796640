//! Legal move generation and check detection.
//!
//! Generation is pseudo-legal first (piece geometry, blocking, castling
//! prerequisites), then filtered by applying each candidate and rejecting
//! those that leave the mover's king attacked. `perft` counts leaf nodes of
//! the legal move tree and is the standard cross-check for all of this
//! machinery.

use super::board::BoardState;
use super::types::{CastleSide, Color, Move, Piece, PieceKind, Square};

const KNIGHT_DELTAS: [(i8, i8); 8] =
    [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_DELTAS: [(i8, i8); 8] =
    [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];
const BISHOP_RAYS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, -1), (-1, 1)];
const ROOK_RAYS: [(i8, i8); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
const PROMOTION_KINDS: [PieceKind; 4] =
    [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

/// Is `color`'s king attacked by the other side?
pub fn is_in_check(board: &BoardState, color: Color) -> bool {
    is_attacked(board, board.king_square(color), color.opposite())
}

/// Is `square` attacked by any piece of `attacker`?
pub fn is_attacked(board: &BoardState, square: Square, attacker: Color) -> bool {
    // Pawn attacks: a pawn of `attacker` sits one step diagonally "behind"
    // the square, relative to its push direction.
    let pawn_rank_delta = match attacker {
        Color::White => -1,
        Color::Black => 1,
    };
    for file_delta in [-1, 1] {
        if let Some(from) = square.offset(file_delta, pawn_rank_delta) {
            if board.piece_at(from) == Some(Piece::new(attacker, PieceKind::Pawn)) {
                return true;
            }
        }
    }

    for (df, dr) in KNIGHT_DELTAS {
        if let Some(from) = square.offset(df, dr) {
            if board.piece_at(from) == Some(Piece::new(attacker, PieceKind::Knight)) {
                return true;
            }
        }
    }

    for (df, dr) in KING_DELTAS {
        if let Some(from) = square.offset(df, dr) {
            if board.piece_at(from) == Some(Piece::new(attacker, PieceKind::King)) {
                return true;
            }
        }
    }

    // Sliding attacks: walk each ray outward until the first piece.
    for (rays, kinds) in [
        (BISHOP_RAYS, [PieceKind::Bishop, PieceKind::Queen]),
        (ROOK_RAYS, [PieceKind::Rook, PieceKind::Queen]),
    ] {
        for (df, dr) in rays {
            let mut current = square;
            while let Some(next) = current.offset(df, dr) {
                current = next;
                match board.piece_at(current) {
                    None => continue,
                    Some(p) => {
                        if p.color == attacker && kinds.contains(&p.kind) {
                            return true;
                        }
                        break;
                    }
                }
            }
        }
    }

    false
}

/// All moves satisfying piece geometry and castling prerequisites, before
/// the king-safety filter. Castling through/out of check is already rejected
/// here; castling *into* check is caught by the filter like any king move.
pub(crate) fn pseudo_legal_moves(board: &BoardState) -> Vec<Move> {
    let mover = board.side_to_move();
    let mut moves = Vec::with_capacity(64);
    for (from, piece) in board.pieces_of(mover) {
        match piece.kind {
            PieceKind::Pawn => pawn_moves(board, from, mover, &mut moves),
            PieceKind::Knight => leaper_moves(board, from, mover, &KNIGHT_DELTAS, &mut moves),
            PieceKind::King => {
                leaper_moves(board, from, mover, &KING_DELTAS, &mut moves);
                castling_moves(board, from, mover, &mut moves);
            }
            PieceKind::Bishop => slider_moves(board, from, mover, &BISHOP_RAYS, &mut moves),
            PieceKind::Rook => slider_moves(board, from, mover, &ROOK_RAYS, &mut moves),
            PieceKind::Queen => {
                slider_moves(board, from, mover, &BISHOP_RAYS, &mut moves);
                slider_moves(board, from, mover, &ROOK_RAYS, &mut moves);
            }
        }
    }
    moves
}

fn push_pawn_move(from: Square, to: Square, mover: Color, moves: &mut Vec<Move>) {
    let last_rank = match mover {
        Color::White => 7,
        Color::Black => 0,
    };
    if to.rank() == last_rank {
        for kind in PROMOTION_KINDS {
            moves.push(Move::promoting(from, to, kind));
        }
    } else {
        moves.push(Move::new(from, to));
    }
}

fn pawn_moves(board: &BoardState, from: Square, mover: Color, moves: &mut Vec<Move>) {
    let (dir, start_rank) = match mover {
        Color::White => (1, 1),
        Color::Black => (-1, 6),
    };

    if let Some(one) = from.offset(0, dir) {
        if board.piece_at(one).is_none() {
            push_pawn_move(from, one, mover, moves);
            if from.rank() == start_rank {
                let two = from.offset(0, 2 * dir).expect("double push stays on board");
                if board.piece_at(two).is_none() {
                    moves.push(Move::new(from, two));
                }
            }
        }
    }

    for file_delta in [-1, 1] {
        let Some(to) = from.offset(file_delta, dir) else { continue };
        let is_capture = board.piece_at(to).is_some_and(|p| p.color != mover);
        let is_ep = board.en_passant() == Some(to);
        if is_capture || is_ep {
            push_pawn_move(from, to, mover, moves);
        }
    }
}

fn leaper_moves(
    board: &BoardState,
    from: Square,
    mover: Color,
    deltas: &[(i8, i8)],
    moves: &mut Vec<Move>,
) {
    for &(df, dr) in deltas {
        let Some(to) = from.offset(df, dr) else { continue };
        if board.piece_at(to).is_none_or(|p| p.color != mover) {
            moves.push(Move::new(from, to));
        }
    }
}

fn slider_moves(
    board: &BoardState,
    from: Square,
    mover: Color,
    rays: &[(i8, i8)],
    moves: &mut Vec<Move>,
) {
    for &(df, dr) in rays {
        let mut current = from;
        while let Some(to) = current.offset(df, dr) {
            current = to;
            match board.piece_at(to) {
                None => moves.push(Move::new(from, to)),
                Some(p) => {
                    if p.color != mover {
                        moves.push(Move::new(from, to));
                    }
                    break;
                }
            }
        }
    }
}

fn castling_moves(board: &BoardState, from: Square, mover: Color, moves: &mut Vec<Move>) {
    let home_rank = match mover {
        Color::White => 0,
        Color::Black => 7,
    };
    if from != Square::from_coords(4, home_rank).unwrap() {
        return;
    }
    let enemy = mover.opposite();
    // The king may not castle out of or through an attacked square.
    if is_attacked(board, from, enemy) {
        return;
    }
    for (side, empty_files, pass_file, target_file) in [
        (CastleSide::Kingside, &[5u8, 6][..], 5u8, 6u8),
        (CastleSide::Queenside, &[1, 2, 3][..], 3, 2),
    ] {
        if !board.castling().get(mover, side) {
            continue;
        }
        let clear = empty_files.iter().all(|&f| {
            board.piece_at(Square::from_coords(f, home_rank).unwrap()).is_none()
        });
        if !clear {
            continue;
        }
        let pass = Square::from_coords(pass_file, home_rank).unwrap();
        if is_attacked(board, pass, enemy) {
            continue;
        }
        moves.push(Move::new(from, Square::from_coords(target_file, home_rank).unwrap()));
    }
}

/// All fully legal moves for the side to move.
pub fn legal_moves(board: &BoardState) -> Vec<Move> {
    let mover = board.side_to_move();
    pseudo_legal_moves(board)
        .into_iter()
        .filter(|&mv| !is_in_check(&board.apply_move_unchecked(mv), mover))
        .collect()
}

/// Leaf-node count of the legal move tree at `depth`.
pub fn perft(board: &BoardState, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = legal_moves(board);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|&mv| perft(&board.apply_move_unchecked(mv), depth - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::fen::parse_fen;

    #[test]
    fn initial_position_has_twenty_moves() {
        let board = BoardState::initial();
        assert_eq!(legal_moves(&board).len(), 20);
    }

    #[test]
    fn perft_initial_shallow() {
        let board = BoardState::initial();
        assert_eq!(perft(&board, 1), 20);
        assert_eq!(perft(&board, 2), 400);
        assert_eq!(perft(&board, 3), 8_902);
    }

    #[test]
    fn bare_kings_corner_moves() {
        let board = parse_fen("8/8/8/8/8/8/8/K6k w - - 0 1").unwrap();
        let mut moves: Vec<String> =
            legal_moves(&board).iter().map(|m| m.to_string()).collect();
        moves.sort();
        assert_eq!(moves, ["a1a2", "a1b1", "a1b2"]);
    }

    #[test]
    fn check_detection_basics() {
        // Rook gives check along the file.
        let board = parse_fen("4k3/8/8/8/8/8/8/4RK2 b - - 0 1").unwrap();
        assert!(is_in_check(&board, Color::Black));
        assert!(!is_in_check(&board, Color::White));

        // A blocker on the file cancels it.
        let board = parse_fen("4k3/8/4n3/8/8/8/8/4RK2 b - - 0 1").unwrap();
        assert!(!is_in_check(&board, Color::Black));

        // Pawn checks come from the diagonal, not the front.
        let board = parse_fen("4k3/3P4/8/8/8/8/8/4K3 b - - 0 1").unwrap();
        assert!(is_in_check(&board, Color::Black));
        let board = parse_fen("4k3/8/4P3/8/8/8/8/4K3 b - - 0 1").unwrap();
        assert!(!is_in_check(&board, Color::Black));
    }

    #[test]
    fn pinned_piece_cannot_move_away() {
        // The e-file knight is pinned against the black king by the rook.
        let board = parse_fen("4k3/8/4n3/8/8/8/8/4RK2 b - - 0 1").unwrap();
        let from: Square = "e6".parse().unwrap();
        assert!(legal_moves(&board).iter().all(|m| m.from != from));
    }

    #[test]
    fn castling_blocked_through_check() {
        // Black rook on f8 covers f1, so white kingside castling is out;
        // queenside (through d1) is fine.
        let board = parse_fen("4kr2/8/8/8/8/8/8/R3K2R w KQ - 0 1").unwrap();
        let moves = legal_moves(&board);
        let kingside: Move = "e1g1".parse().unwrap();
        let queenside: Move = "e1c1".parse().unwrap();
        assert!(!moves.contains(&kingside));
        assert!(moves.contains(&queenside));
    }

    #[test]
    fn castling_requires_empty_between() {
        let board = BoardState::initial();
        let moves = legal_moves(&board);
        assert!(!moves.iter().any(|m| m.to_string() == "e1g1"));
    }

    #[test]
    fn en_passant_is_generated() {
        let board = parse_fen(
            "rnbqkbnr/ppp1p1pp/8/3pPp2/8/8/PPPP1PPP/RNBQKBNR w KQkq f6 0 3",
        )
        .unwrap();
        let ep: Move = "e5f6".parse().unwrap();
        assert!(legal_moves(&board).contains(&ep));
    }

    #[test]
    fn promotion_generates_all_four_choices() {
        let board = parse_fen("8/P7/8/8/8/k7/8/K7 w - - 0 1").unwrap();
        let promos: Vec<Move> = legal_moves(&board)
            .into_iter()
            .filter(|m| m.promotion.is_some())
            .collect();
        assert_eq!(promos.len(), 4);
    }

    #[test]
    fn checkmate_has_no_legal_moves() {
        // Final position of the scholar's mate.
        let board = parse_fen(
            "r1bqkb1r/pppp1Qpp/2n2n2/4p3/2B1P3/8/PPPP1PPP/RNB1K1NR b KQkq - 0 4",
        )
        .unwrap();
        assert!(is_in_check(&board, Color::Black));
        assert!(legal_moves(&board).is_empty());
    }

    #[test]
    fn stalemate_has_no_legal_moves_and_no_check() {
        let board = parse_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(!is_in_check(&board, Color::Black));
        assert!(legal_moves(&board).is_empty());
    }
}
