//! Tour of the rules engine: positions, legal moves, codecs, and perft.
//!
//! Run with: cargo run --example world_rules

use claimcheck::chess::{
    legal_moves, parse_fen, perft, render_fen, render_san, BoardState, Color, MoveHistory,
    INITIAL_FEN,
};

fn main() {
    // Every game starts here; the FEN codec is the canonical position format.
    let start = BoardState::initial();
    assert_eq!(render_fen(&start), INITIAL_FEN);
    println!("initial position:\n{}", start.ascii());

    // Legal move generation is fully law-abiding: checks, pins, castling,
    // en passant, promotion. perft(n) counts leaf nodes of the full game
    // tree to depth n — the standard way to audit a move generator.
    let moves = legal_moves(&start);
    println!("legal first moves: {}", moves.len());
    for depth in 1..=4 {
        println!("  perft({depth}) = {}", perft(&start, depth));
    }

    // Histories are validated move-by-move; SAN rendering is disambiguated
    // against the actual position.
    let mut history = MoveHistory::empty();
    for uci in ["e2e4", "e7e5", "g1f3", "b8c6", "f1b5"] {
        let mv = uci.parse().expect("long-algebraic move");
        let san = render_san(history.final_state(), mv).expect("legal move renders");
        history.push(mv).expect("legal move extends the game");
        print!("{san} ");
    }
    println!("\nafter the Ruy Lopez setup:\n{}", history.final_state().ascii());
    println!("movetext: {}", history.to_movetext());

    // Round-trip: any reachable position survives FEN encode/decode exactly.
    let fen = render_fen(history.final_state());
    let back = parse_fen(&fen).expect("rendered FEN parses");
    assert_eq!(&back, history.final_state());
    println!("FEN round-trips: {fen}");

    // Fool's Mate, the shortest possible game: check detection plus an empty
    // legal-move list is exactly what "checkmate" means downstream.
    let fen = "rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3";
    let board = parse_fen(fen).expect("valid FEN");
    println!(
        "\n{fen}\nwhite to move: {}, white in check: {}",
        board.side_to_move() == Color::White,
        claimcheck::chess::is_in_check(&board, Color::White),
    );
    println!(
        "white has {} legal replies - checkmate, game over",
        legal_moves(&board).len()
    );
}
