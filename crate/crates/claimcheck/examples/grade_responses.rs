//! Grade model replies claim-by-claim: wrong picks, honest abstentions,
//! unparseable rambling, and freeform claim lists all get exact labels.
//!
//! Run with: cargo run --example grade_responses

use claimcheck::generate::{generate_dataset, GenerateConfig};
use claimcheck::grader::{grade, metrics_from_reports, parse_response, render_stats_table};
use claimcheck::oracle::EvalBudget;
use claimcheck::querygen::QueryKind;

fn main() {
    // A small all-MCQ dataset plus one freeform instance.
    let config = GenerateConfig::from_toml_str(
        "count = 8\nmaster_seed = 99\nquery_kinds = [\"mcq_boolean\", \"claim_list_freeform\"]\n",
    )
    .expect("valid config");
    let instances = generate_dataset(&config).expect("generation succeeds");
    let budget = EvalBudget::default();

    let mut reports = Vec::new();
    let mut mcq_seen = 0usize;
    for instance in &instances {
        // Simulate a model with four moods: correct, wrong, silent, and lost.
        let raw = match instance.query().kind() {
            QueryKind::ClaimListFreeform => {
                // Freeform answers are split into atomic claims, each graded
                // independently against the instance's conflict policy.
                "side_to_move(white)\nmaterial_count(black, queen, 9)".to_string()
            }
            _ => {
                let claimcheck::dataset::GoldRecord::Option { index, .. } = instance.gold()
                else {
                    unreachable!("MCQ instances carry option gold")
                };
                let mood = mcq_seen % 4;
                mcq_seen += 1;
                match mood {
                    0 => format!("{}", char::from(b'A' + *index as u8)),
                    1 => {
                        let wrong = (index + 1) % instance.query().options().len();
                        format!("{}", char::from(b'A' + wrong as u8))
                    }
                    2 => "ABSTAIN".to_string(),
                    _ => "Well, it depends on many factors...".to_string(),
                }
            }
        };

        let parsed = parse_response(&raw, instance.query());
        let report = grade(&parsed, instance, budget).expect("grading succeeds");
        println!(
            "{}: reply {:?} -> hallucinated={} false={} unknown={} abstained={} unparseable={}",
            instance.instance_id(),
            raw.lines().next().unwrap_or(""),
            report.verdict.hallucinated,
            report.verdict.false_claims.len(),
            report.verdict.unknown_claims.len(),
            report.abstained,
            report.unparseable,
        );
        for graded in &report.per_claim {
            println!("    {} -> {:?}", graded.claim, graded.truth);
        }
        reports.push(report);
    }

    // Aggregation slices the same reports by difficulty bucket, view,
    // policy, and query kind.
    let metrics = metrics_from_reports(&reports).expect("aggregation succeeds");
    println!("\n{}", render_stats_table(&metrics));
}
