//! The same claim, three answers: conflict policies rank the sources of
//! truth, and corrupted documents flip exactly the claims they lie about.
//!
//! Run with: cargo run --example conflict_policies

use claimcheck::chess::render_fen;
use claimcheck::claims::AtomicClaim;
use claimcheck::oracle::EvalBudget;
use claimcheck::truth::{ConflictPolicy, PRESET_NAMES};
use claimcheck::views::Resolver;
use claimcheck::worldgen::{corrupt_document, sample_position, DifficultySpec, DocKind};

fn main() {
    // A reproducible midgame position with plenty of material to lie about.
    let spec = DifficultySpec::new(10, 32, 8, 40, true).expect("valid difficulty");
    let (state, history) = sample_position(0xD0C5, &spec).expect("position found");
    println!("world state: {}", render_fen(&state));

    // Two documents telling the same consistent lie: corrupting both from
    // the same seed plants identical placement edits, so the documents agree
    // with each other and disagree with the world. Each edit is recorded
    // with a *witness* claim — true of the documents' world, false of the
    // real one, or vice versa.
    let docs = vec![
        corrupt_document("doc0-fen_text".into(), DocKind::FenText, &state, Some(&history), 22, 2)
            .expect("corruption planted"),
        corrupt_document(
            "doc1-board_prose".into(),
            DocKind::BoardProse,
            &state,
            Some(&history),
            22,
            2,
        )
        .expect("corruption planted"),
    ];

    println!("\ncorrupted FEN document:\n  {}", docs[0].body());
    println!("docs' world: {}", render_fen(docs[0].derived_state()));
    assert_eq!(docs[0].derived_state(), docs[1].derived_state(), "one consistent story");
    for delta in docs[0].deltas() {
        println!("  planted {}: witness {}", delta.op().as_str(), delta.witness());
    }

    // Three stances toward the same evidence. Sources not listed by a
    // policy are not consulted at all. The witnesses flip between the
    // doc-first and world-first stances; a claim the corruption never
    // touched resolves identically everywhere.
    let untouched: AtomicClaim = "side_to_move(white)".parse().expect("canonical claim");
    let mut rows: Vec<(&str, AtomicClaim)> = docs[0]
        .deltas()
        .iter()
        .map(|d| ("witness", d.witness().clone()))
        .collect();
    rows.push(("untouched", untouched));

    println!();
    println!(
        "{:>10} {:>32} | {:^21} {:^21} {:^21}",
        "", "claim", PRESET_NAMES[0], PRESET_NAMES[1], PRESET_NAMES[2]
    );
    for (tag, claim) in &rows {
        print!("{:>10} {:>32} |", tag, claim.to_string());
        for name in PRESET_NAMES {
            let policy = ConflictPolicy::preset(name).expect("preset exists");
            let resolver = Resolver::for_instance(
                &state,
                Some(&history),
                &docs,
                &policy,
                EvalBudget::default(),
            );
            let (value, settled_by) = resolver.resolve_traced(claim).expect("sources exist");
            let class =
                settled_by.map(|k| format!("{:?}", k.class())).unwrap_or_else(|| "-".into());
            print!(" {:^21}", format!("{value:?} ({class})"));
        }
        println!();
    }

    println!(
        "\ndoc_authoritative grades against what the documents say; \
         world_authoritative grades\nagainst the live position; docs_override \
         lets documents win where they speak and\nfalls back to the world \
         elsewhere. Same claim, same evidence — the policy decides."
    );
}
