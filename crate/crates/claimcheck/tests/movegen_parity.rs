//! Cross-checks of the production move generator against the independent
//! candidate-scan oracle in `common`, on positions chosen to exercise the
//! awkward rules: en-passant pins, castling through attacks, promotions,
//! and the classic perft stress positions.

mod common;

use claimcheck::chess::{parse_fen, perft, BoardState};
use common::*;

fn assert_move_set_parity(fen: &str) {
    let board = parse_fen(fen).unwrap();
    let pos = sim_from_board(&board);
    assert_eq!(
        production_moves_sorted(&board),
        sim_moves_sorted(&pos),
        "move sets disagree for {fen}"
    );
}

#[test]
fn move_sets_match_on_tricky_positions() {
    for fen in [
        // initial
        "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
        // kiwipete: castling both ways, pins, promotions nearby
        "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
        "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R b KQkq - 0 1",
        // en-passant capture available, capturing pawn pinned to its king
        "8/8/8/2k5/3Pp3/8/8/4K3 b - d3 0 1",
        "8/8/8/8/k2Pp2Q/8/8/4K3 b - d3 0 1",
        // promotion with captures on both corners
        "rnbq1bnr/ppppkP1p/8/4p3/8/8/PPPP1PPP/RNBQKBNR w KQ - 1 5",
        // stalemate and checkmate positions (empty move sets)
        "7k/5Q2/6K1/8/8/8/8/8 b - - 0 1",
        "r1bqkb1r/pppp1Qpp/2n2n2/4p3/2B1P3/8/PPPP1PPP/RNB1K1NR b KQkq - 0 4",
        // double check (knight + rook): only king moves escape, even though
        // the queen could otherwise capture the rook
        "4k3/8/3N4/q7/8/8/8/4R1K1 b - - 0 1",
        // castling rights present but path attacked
        "4kr2/8/8/8/8/8/8/R3K2R w KQ - 0 1",
        // bare kings
        "8/8/8/8/8/8/8/K6k w - - 0 1",
    ] {
        assert_move_set_parity(fen);
    }
}

#[test]
fn perft_matches_oracle_from_initial() {
    let board = BoardState::initial();
    let pos = sim_from_board(&board);
    for depth in 1..=3 {
        assert_eq!(perft(&board, depth), sim_perft(&pos, depth), "depth {depth}");
    }
    // Published reference values pin both implementations at once.
    assert_eq!(perft(&board, 4), 197_281);
}

#[test]
fn perft_matches_oracle_on_kiwipete() {
    let fen = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1";
    let board = parse_fen(fen).unwrap();
    let pos = sim_from_board(&board);
    assert_eq!(perft(&board, 1), 48);
    assert_eq!(perft(&board, 2), 2_039);
    assert_eq!(perft(&board, 3), 97_862);
    assert_eq!(sim_perft(&pos, 2), 2_039);
}

#[test]
fn parity_holds_along_random_playouts() {
    // Walk a few games forward using the production generator, checking the
    // full move set against the oracle at every step.
    for seed in 0..4u64 {
        let mut board = BoardState::initial();
        let mut steps = 0;
        while steps < 30 {
            let pos = sim_from_board(&board);
            let prod = production_moves_sorted(&board);
            assert_eq!(prod, sim_moves_sorted(&pos), "disagreement after {steps} plies (seed {seed})");
            if prod.is_empty() {
                break;
            }
            // Deterministic pseudo-random pick without an RNG dependency.
            let idx = ((seed + 1) * 2_654_435_761 + steps * 40_503) as usize % prod.len();
            board = board.apply_move(triple_to_move(prod[idx])).unwrap();
            steps += 1;
        }
    }
}
