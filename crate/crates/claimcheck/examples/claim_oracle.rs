//! Evaluate atomic claims against a position: the oracle that makes every
//! gold label computable instead of annotated.
//!
//! Run with: cargo run --example claim_oracle

use claimcheck::chess::parse_fen;
use claimcheck::claims::AtomicClaim;
use claimcheck::oracle::{eval_claim, EvalBudget, World};

fn main() {
    // A rook endgame where White mates in two: 1.Ra8+ lets the king slip to
    // h7, but 1.Kg6 first forces 2.Ra8#.
    let fen = "7k/8/8/6K1/8/8/8/R7 w - - 0 1";
    let world = World::from_state(parse_fen(fen).expect("valid FEN"));
    let budget = EvalBudget::default();

    println!("position: {fen}\n");

    // Claims are plain text with a strict grammar; parsing and evaluation
    // are separate steps, so graded responses use the same pipeline.
    let claims = [
        "piece_at(a1, white_rook)",      // direct observation
        "piece_at(a1, black_rook)",      // wrong color -> False
        "side_to_move(white)",
        "in_check(black)",
        "material_count(white, rook, 1)",
        "move_legal(a1a8)",              // delivers check along the file
        "can_capture_in_one(white, king)", // kings are never capturable
        "mate_in(white, 1)",             // not yet: the king must step up first
        "mate_in(white, 2)",             // forced: Kg6 then Ra8#
        "mate_in(black, 1)",             // Black, if it were to move, has no mate
        "game_status(ongoing)",
        "game_status(draw_rule)",        // needs history we don't have -> Unknown
        "history_length(4)",             // same: state-only world -> Unknown
    ];

    for text in claims {
        let claim: AtomicClaim = text.parse().expect("canonical claim text");
        let value = eval_claim(&claim, &world, &budget);
        println!("  {text:38} -> {value:?}");
    }

    println!(
        "\nUnknown is a first-class answer: missing information (no game \
         history), ill-posed\nhypotheticals (a side-to-move flip that leaves \
         an illegal position), and exhausted\nsearch budgets all resolve to \
         Unknown, never silently to False."
    );
}
