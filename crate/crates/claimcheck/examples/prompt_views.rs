//! Views change what the model sees, never what is true: the same world
//! rendered through four different observation channels.
//!
//! Run with: cargo run --example prompt_views

use claimcheck::claims::AtomicClaim;
use claimcheck::oracle::EvalBudget;
use claimcheck::querygen::{make_query, QueryKind};
use claimcheck::truth::ConflictPolicy;
use claimcheck::views::{assemble_prompt, Resolver, ViewConfig, VIEW_PRESET_NAMES};
use claimcheck::worldgen::{render_documents, sample_position, DifficultySpec, DocKind};

fn main() {
    let spec = DifficultySpec::new(8, 32, 6, 30, true).expect("valid difficulty");
    let (state, history) = sample_position(0x51DE, &spec).expect("position found");
    let docs = render_documents(&state, Some(&history), &DocKind::ALL, 7).expect("docs render");
    let policy = ConflictPolicy::preset("docs_override").expect("preset exists");
    let budget = EvalBudget::default();

    // One question, asked identically under every view.
    let resolver = Resolver::for_instance(&state, Some(&history), &docs, &policy, budget);
    let resolve = |claim: &AtomicClaim| resolver.resolve(claim).expect("sources exist");
    let query = make_query(&state, Some(&history), QueryKind::McqBoolean, 42, &resolve, 3)
        .expect("query built");
    println!("question: {}\n", query.prompt_text());

    let probe = query.probe_claim().expect("boolean queries probe one claim");
    for name in VIEW_PRESET_NAMES {
        let view = ViewConfig::preset(name).expect("preset exists");
        let prompt = assemble_prompt(&state, Some(&history), &docs, &query, &view, &policy)
            .expect("prompt assembles");

        // The prompt varies with the view...
        println!("--- view {name}: {} chars ---", prompt.len());
        for line in prompt.lines().take(4) {
            println!("|  {line}");
        }
        println!("|  ...");

        // ...but the gold label does not. Truth is resolved from the world
        // and the documents through the policy; the view is not consulted.
        let value = resolve(probe);
        println!("|  gold for {probe}: {value:?}\n");
    }

    println!(
        "board_only shows the position; history_only shows the moves; \
         docs_only shows prose\nand logs; board_plus_history shows both. \
         Abstention becomes *correct* behavior when\nthe view withholds the \
         fact a question needs."
    );
}
