//! Response parsing and grading: turn raw model output into typed claims,
//! evaluate each claim against the instance's policy-ordered sources, and
//! aggregate verdicts into metrics.
//!
//! Parsing never fails with an error — malformed output becomes the
//! `Unparseable` outcome, which is reported in its own rate and never counts
//! as a hallucination (a hallucination requires an evaluable claim that comes
//! out false). Grading uses only the reference world and the conflict policy;
//! the view that produced the prompt plays no role.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::{parse_claim, AtomicClaim};
use crate::dataset::{BenchInstance, GoldRecord, InstanceError};
use crate::oracle::EvalBudget;
use crate::querygen::{option_claim, QueryInstance, QueryKind};
use crate::truth::{hallucination_verdict, CoreError, SourceKind, TruthValue, Verdict};

/// The exact line a model must send to decline answering.
pub const ABSTAIN_TOKEN: &str = "ABSTAIN";

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// A raw model reply plus what it parsed into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub raw: String,
    pub parsed: ParsedResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParsedResponse {
    /// A multiple-choice pick, as an index into the query's options.
    McqAnswer { index: usize },
    /// Freeform answer decomposed into one atomic claim per line.
    ClaimList { claims: Vec<AtomicClaim> },
    /// The literal abstention token and nothing else.
    Abstain,
    /// Anything the expected grammar does not cover; carries the first
    /// offending line. An outcome, not an error.
    Unparseable { reason: String },
}

/// Parse a raw reply against the query it answers. Infallible: failures
/// come back as [`ParsedResponse::Unparseable`].
pub fn parse_response(raw: &str, query: &QueryInstance) -> ModelResponse {
    ModelResponse { raw: raw.to_string(), parsed: parse_body(raw, query) }
}

fn parse_body(raw: &str, query: &QueryInstance) -> ParsedResponse {
    let trimmed = raw.trim();
    if trimmed == ABSTAIN_TOKEN {
        return ParsedResponse::Abstain;
    }
    if trimmed.is_empty() {
        return ParsedResponse::Unparseable { reason: "empty response".to_string() };
    }
    if query.kind().is_mcq() {
        parse_mcq(trimmed, query.options())
    } else {
        parse_claim_list(trimmed)
    }
}

/// Accept a letter label ("B", "b.", "(b)") or the option's own text,
/// case-insensitively, on the first non-blank line.
fn parse_mcq(text: &str, options: &[String]) -> ParsedResponse {
    let first_line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
    let core = first_line
        .trim_start_matches(['(', '['])
        .trim_end_matches(['.', ')', ']', ':'])
        .trim();
    let mut chars = core.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_ascii_alphabetic() {
            let index = (c.to_ascii_uppercase() as u8 - b'A') as usize;
            if index < options.len() {
                return ParsedResponse::McqAnswer { index };
            }
        }
    }
    if let Some(index) = options.iter().position(|o| o.eq_ignore_ascii_case(core)) {
        return ParsedResponse::McqAnswer { index };
    }
    ParsedResponse::Unparseable { reason: format!("not an option label: {first_line:?}") }
}

/// Parse each non-blank line as one atomic claim; the first line outside the
/// grammar makes the whole response unparseable.
fn parse_claim_list(text: &str) -> ParsedResponse {
    let mut claims = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match parse_claim(line) {
            Ok(claim) => claims.push(claim),
            Err(e) => {
                return ParsedResponse::Unparseable { reason: format!("line {line:?}: {e}") };
            }
        }
    }
    ParsedResponse::ClaimList { claims }
}

// ---------------------------------------------------------------------------
// Grading
// ---------------------------------------------------------------------------

/// One claim's evaluation: the policy-resolved truth value and the source
/// that settled it (`None` when every source answered Unknown).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimGrade {
    pub claim: AtomicClaim,
    pub truth: TruthValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceKind>,
}

/// The grading outcome for one instance. Carries the instance's view,
/// policy, and difficulty bucket so metrics can be computed from reports
/// alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub instance_id: String,
    pub per_claim: Vec<ClaimGrade>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcq_correct: Option<bool>,
    pub abstained: bool,
    pub unparseable: bool,
    pub view: String,
    pub policy: String,
    pub bucket: String,
}

#[derive(Debug, Error)]
pub enum GradeError {
    #[error("instance {instance_id}: {response} response does not match query kind {expected}")]
    KindMismatch { instance_id: String, expected: QueryKind, response: &'static str },
    #[error("instance {instance_id}: option index {index} is out of range")]
    OptionOutOfRange { instance_id: String, index: usize },
    #[error("instance {instance_id}: stored gold does not match its query shape")]
    GoldShape { instance_id: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("nothing to aggregate")]
    EmptyAggregation,
    #[error("duplicate report for instance {0}")]
    DuplicateReport(String),
    #[error("report for instance {0}, which the dataset does not contain")]
    UnknownInstance(String),
    #[error("no report for instance {0}")]
    MissingReport(String),
}

/// Grade one parsed response against its instance.
///
/// Claim lists are evaluated claim by claim through the instance's conflict
/// policy. A multiple-choice pick asserts the chosen option's propositional
/// content: it is graded as exactly one claim, true when the choice matches
/// gold and false otherwise. Abstentions and unparseable replies carry no
/// claims and are never hallucinations.
pub fn grade(
    response: &ModelResponse,
    instance: &BenchInstance,
    budget: EvalBudget,
) -> Result<GradeReport, GradeError> {
    let resolver = instance.resolver(budget)?;
    let kind = instance.query().kind();
    let instance_id = instance.instance_id().to_string();

    let mut mcq_correct = None;
    let mut abstained = false;
    let mut unparseable = false;
    let mut per_claim: Vec<ClaimGrade> = Vec::new();

    match &response.parsed {
        ParsedResponse::Abstain => abstained = true,
        ParsedResponse::Unparseable { .. } => unparseable = true,
        ParsedResponse::McqAnswer { index } => {
            if !kind.is_mcq() {
                return Err(GradeError::KindMismatch {
                    instance_id,
                    expected: kind,
                    response: "multiple-choice",
                });
            }
            let GoldRecord::Option { index: gold_index, .. } = instance.gold() else {
                return Err(GradeError::GoldShape { instance_id });
            };
            let Some(chosen_text) = instance.query().options().get(*index) else {
                return Err(GradeError::OptionOutOfRange { instance_id, index: *index });
            };
            let Some(probe) = instance.query().probe_claim() else {
                return Err(GradeError::GoldShape { instance_id });
            };
            let correct = index == gold_index;
            mcq_correct = Some(correct);
            // The recorded claim is the chosen option's assertion; for a
            // boolean "No" (the probe's denial, which the claim grammar
            // cannot spell) the probe itself stands in as the claim at stake.
            let asserted = option_claim(probe, chosen_text).unwrap_or_else(|| probe.clone());
            let (_, source) = resolver.resolve_traced(&asserted)?;
            let truth = if correct { TruthValue::True } else { TruthValue::False };
            per_claim.push(ClaimGrade { claim: asserted, truth, source });
        }
        ParsedResponse::ClaimList { claims } => {
            if kind != QueryKind::ClaimListFreeform {
                return Err(GradeError::KindMismatch {
                    instance_id,
                    expected: kind,
                    response: "claim-list",
                });
            }
            for claim in claims {
                let (truth, source) = resolver.resolve_traced(claim)?;
                per_claim.push(ClaimGrade { claim: claim.clone(), truth, source });
            }
        }
    }

    let labels: Vec<(String, TruthValue)> =
        per_claim.iter().map(|c| (c.claim.id(), c.truth)).collect();
    let verdict = hallucination_verdict(&labels);

    Ok(GradeReport {
        instance_id,
        per_claim,
        verdict,
        mcq_correct,
        abstained,
        unparseable,
        view: instance.view().name().to_string(),
        policy: instance.policy().name.clone(),
        bucket: instance.piece_bucket()?.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Rates over one group of reports. All rates lie in [0, 1].
///
/// * `hallucination_rate`: reports with a hallucinated verdict / n.
/// * `false_claim_rate` / `unknown_claim_rate`: claims with that label over
///   all graded claims (unparseable replies contribute no claims).
/// * `mcq_accuracy`: correct picks over answered multiple-choice questions;
///   absent when nothing was answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub n: usize,
    pub hallucination_rate: f64,
    pub false_claim_rate: f64,
    pub unknown_claim_rate: f64,
    pub abstention_rate: f64,
    pub unparseable_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcq_accuracy: Option<f64>,
}

/// Aggregated grading results: overall rates plus per-group breakdowns keyed
/// `"{view}|{policy}|{bucket}"`. Breakdown `n`s sum to the overall `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub overall: RateSet,
    pub breakdowns: BTreeMap<String, RateSet>,
}

#[derive(Debug, Default, Clone)]
struct Tally {
    n: usize,
    hallucinated: usize,
    abstained: usize,
    unparseable: usize,
    claims: usize,
    false_claims: usize,
    unknown_claims: usize,
    mcq_answered: usize,
    mcq_correct: usize,
}

impl Tally {
    fn add(&mut self, report: &GradeReport) {
        self.n += 1;
        if report.verdict.hallucinated {
            self.hallucinated += 1;
        }
        if report.abstained {
            self.abstained += 1;
        }
        if report.unparseable {
            self.unparseable += 1;
        }
        if !report.unparseable {
            self.claims += report.per_claim.len();
            self.false_claims +=
                report.per_claim.iter().filter(|c| c.truth == TruthValue::False).count();
            self.unknown_claims +=
                report.per_claim.iter().filter(|c| c.truth == TruthValue::Unknown).count();
        }
        if let Some(correct) = report.mcq_correct {
            self.mcq_answered += 1;
            if correct {
                self.mcq_correct += 1;
            }
        }
    }

    fn rates(&self) -> RateSet {
        let frac = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        RateSet {
            n: self.n,
            hallucination_rate: frac(self.hallucinated, self.n),
            false_claim_rate: frac(self.false_claims, self.claims),
            unknown_claim_rate: frac(self.unknown_claims, self.claims),
            abstention_rate: frac(self.abstained, self.n),
            unparseable_rate: frac(self.unparseable, self.n),
            mcq_accuracy: (self.mcq_answered > 0)
                .then(|| frac(self.mcq_correct, self.mcq_answered)),
        }
    }
}

/// Compute metrics from reports alone (reports carry their breakdown keys).
pub fn metrics_from_reports(reports: &[GradeReport]) -> Result<Metrics, GradeError> {
    if reports.is_empty() {
        return Err(GradeError::EmptyAggregation);
    }
    let mut seen = BTreeSet::new();
    let mut overall = Tally::default();
    let mut groups: BTreeMap<String, Tally> = BTreeMap::new();
    for report in reports {
        if !seen.insert(report.instance_id.as_str()) {
            return Err(GradeError::DuplicateReport(report.instance_id.clone()));
        }
        overall.add(report);
        let key = format!("{}|{}|{}", report.view, report.policy, report.bucket);
        groups.entry(key).or_default().add(report);
    }
    Ok(Metrics {
        overall: overall.rates(),
        breakdowns: groups.into_iter().map(|(k, t)| (k, t.rates())).collect(),
    })
}

/// Compute metrics after checking the reports cover `instances` exactly:
/// one report per instance, no extras, no duplicates.
pub fn aggregate(
    reports: &[GradeReport],
    instances: &[BenchInstance],
) -> Result<Metrics, GradeError> {
    let instance_ids: BTreeSet<&str> = instances.iter().map(|i| i.instance_id()).collect();
    let mut report_ids = BTreeSet::new();
    for report in reports {
        if !instance_ids.contains(report.instance_id.as_str()) {
            return Err(GradeError::UnknownInstance(report.instance_id.clone()));
        }
        if !report_ids.insert(report.instance_id.as_str()) {
            return Err(GradeError::DuplicateReport(report.instance_id.clone()));
        }
    }
    for id in &instance_ids {
        if !report_ids.contains(id) {
            return Err(GradeError::MissingReport(id.to_string()));
        }
    }
    metrics_from_reports(reports)
}

/// Render metrics as a fixed-width text table, one row per group.
pub fn render_stats_table(metrics: &Metrics) -> String {
    let mut rows: Vec<(&str, &RateSet)> = vec![("overall", &metrics.overall)];
    rows.extend(metrics.breakdowns.iter().map(|(k, v)| (k.as_str(), v)));
    let key_width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max("group".len());

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<key_width$}  {:>6}  {:>8}  {:>9}  {:>9}  {:>8}  {:>8}  {:>7}",
        "group", "n", "halluc", "false-cl", "unknown", "abstain", "unparse", "mcq-acc"
    );
    for (key, r) in rows {
        let mcq = r.mcq_accuracy.map_or_else(|| "-".to_string(), |a| format!("{a:.3}"));
        let _ = writeln!(
            out,
            "{key:<key_width$}  {:>6}  {:>8.3}  {:>9.3}  {:>9.3}  {:>8.3}  {:>8.3}  {mcq:>7}",
            r.n,
            r.hallucination_rate,
            r.false_claim_rate,
            r.unknown_claim_rate,
            r.abstention_rate,
            r.unparseable_rate,
        );
    }
    out
}
