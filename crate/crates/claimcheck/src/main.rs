//! Command-line surface over the claimcheck library: generate datasets,
//! run them against a model endpoint, grade the responses, and inspect
//! individual instances. All logic lives in the library; this binary only
//! parses arguments, wires stages together, and prints results.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use claimcheck::client::{ChatClient, EndpointConfig};
use claimcheck::dataset::{manifest_path, read_dataset, BenchInstance, GoldRecord};
use claimcheck::generate::{generate_to_file, GenerateConfig};
use claimcheck::grader::{
    aggregate, grade, metrics_from_reports, parse_response, render_stats_table, GradeReport,
};
use claimcheck::oracle::EvalBudget;
use claimcheck::runner::{read_responses, run_dataset, RunOptions, RunOutcome};

#[derive(Parser)]
#[command(
    name = "claimcheck",
    version,
    about = "Build, run, and grade chess-world factuality benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a TOML config; writes JSONL plus a manifest.
    Generate {
        /// Path to the generation config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output dataset path (JSONL; manifest lands beside it).
        #[arg(long)]
        out: PathBuf,
    },
    /// Send every instance's prompt to an OpenAI-compatible endpoint.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        /// Endpoint base URL, e.g. http://localhost:8000/v1
        #[arg(long)]
        base_url: String,
        #[arg(long)]
        model: String,
        /// Output responses path (JSONL, appended; reruns resume).
        #[arg(long)]
        out: PathBuf,
        /// Environment variable holding the API key (key is read at startup,
        /// never stored).
        #[arg(long)]
        api_key_env: Option<String>,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
        #[arg(long, default_value_t = 3)]
        max_retries: u32,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        /// Parallel request workers.
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Re-query every instance even if the responses file already has an
        /// answer for it.
        #[arg(long)]
        no_resume: bool,
    },
    /// Grade stored responses against their dataset; writes per-instance
    /// reports (JSONL) and aggregate metrics (JSON sidecar).
    Grade {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute and print the metrics table from a grade-report file.
    Stats {
        #[arg(long)]
        reports: PathBuf,
    },
    /// Pretty-print one instance: board, documents, query, gold.
    Inspect {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        id: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprint!("error: {err}");
            let mut source = err.source();
            while let Some(cause) = source {
                eprint!(": {cause}");
                source = cause.source();
            }
            eprintln!();
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Generate { config, out } => cmd_generate(&config, &out),
        Command::Run {
            dataset,
            base_url,
            model,
            out,
            api_key_env,
            timeout_secs,
            max_retries,
            temperature,
            concurrency,
            no_resume,
        } => {
            let endpoint = EndpointConfig {
                base_url,
                model,
                api_key_env,
                timeout_secs,
                max_retries,
                temperature,
            };
            cmd_run(&dataset, endpoint, &out, concurrency, !no_resume)
        }
        Command::Grade { dataset, responses, out } => cmd_grade(&dataset, &responses, &out),
        Command::Stats { reports } => cmd_stats(&reports),
        Command::Inspect { dataset, id } => cmd_inspect(&dataset, &id),
    }
}

fn cmd_generate(config_path: &Path, out: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let config = GenerateConfig::from_path(config_path)?;
    let manifest = generate_to_file(&config, out)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    eprintln!(
        "wrote {} instances to {} (manifest: {})",
        manifest.count,
        out.display(),
        manifest_path(out).display()
    );
    Ok(())
}

fn cmd_run(
    dataset_path: &Path,
    endpoint: EndpointConfig,
    out: &Path,
    concurrency: usize,
    resume: bool,
) -> Result<(), Box<dyn std::error::Error>> {
    let client = ChatClient::new(endpoint)?;
    let (instances, manifest) = read_dataset(dataset_path)?;
    let summary =
        run_dataset(&instances, &client, out, RunOptions { concurrency, resume })?;

    // Record how the run was configured (the key itself is never written).
    let run_record = serde_json::json!({
        "dataset_id": manifest.dataset_id,
        "endpoint": client.config(),
        "summary": summary,
    });
    let record_path = sibling(out, ".run.json");
    std::fs::write(&record_path, serde_json::to_string_pretty(&run_record)? + "\n")?;

    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!(
        "answered {} of {} instances ({} resumed, {} failed); responses in {}",
        summary.succeeded,
        summary.total,
        summary.resumed,
        summary.failed,
        out.display()
    );
    Ok(())
}

fn cmd_grade(
    dataset_path: &Path,
    responses_path: &Path,
    out: &Path,
) -> Result<(), Box<dyn std::error::Error>> {
    let (instances, _) = read_dataset(dataset_path)?;
    let responses = read_responses(responses_path)?;

    let mut reports = Vec::new();
    let mut graded_instances = Vec::new();
    let mut unanswered = 0usize;
    for instance in instances {
        let answer = responses
            .get(instance.instance_id())
            .filter(|r| r.outcome == RunOutcome::Ok)
            .and_then(|r| r.raw.as_deref());
        match answer {
            Some(raw) => {
                let response = parse_response(raw, instance.query());
                reports.push(grade(&response, &instance, EvalBudget::default())?);
                graded_instances.push(instance);
            }
            None => unanswered += 1,
        }
    }
    if unanswered > 0 {
        eprintln!("warning: {unanswered} instances have no stored response; skipped");
    }

    let mut file = std::io::BufWriter::new(std::fs::File::create(out)?);
    for report in &reports {
        writeln!(file, "{}", serde_json::to_string(report)?)?;
    }
    file.flush()?;

    let metrics = aggregate(&reports, &graded_instances)?;
    let metrics_path = sibling(out, ".metrics.json");
    std::fs::write(&metrics_path, serde_json::to_string_pretty(&metrics)? + "\n")?;

    print!("{}", render_stats_table(&metrics));
    eprintln!(
        "graded {} responses; reports in {}, metrics in {}",
        reports.len(),
        out.display(),
        metrics_path.display()
    );
    Ok(())
}

fn cmd_stats(reports_path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(reports_path)?;
    let mut reports: Vec<GradeReport> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let report: GradeReport = serde_json::from_str(line)
            .map_err(|e| format!("{}:{}: {e}", reports_path.display(), i + 1))?;
        reports.push(report);
    }
    let metrics = metrics_from_reports(&reports)?;
    print!("{}", render_stats_table(&metrics));
    Ok(())
}

fn cmd_inspect(dataset_path: &Path, id: &str) -> Result<(), Box<dyn std::error::Error>> {
    let (instances, _) = read_dataset(dataset_path)?;
    let instance = instances
        .iter()
        .find(|i| i.instance_id() == id)
        .ok_or_else(|| format!("no instance {id} in {}", dataset_path.display()))?;
    print!("{}", describe_instance(instance)?);
    Ok(())
}

fn describe_instance(instance: &BenchInstance) -> Result<String, Box<dyn std::error::Error>> {
    use std::fmt::Write as _;
    let state = instance.world_state()?;
    let history = instance.world_history()?;
    let mut out = String::new();

    writeln!(out, "instance {} ({})", instance.instance_id(), instance.environment_kind())?;
    writeln!(
        out,
        "view: {}   policy: {}{}   bucket: {}",
        instance.view().name(),
        instance.policy().name,
        if instance.policy().disclosure { " (disclosed)" } else { "" },
        instance.piece_bucket()?
    )?;
    let seeds = instance.seeds();
    writeln!(out, "seeds: master={} instance={:#018x}", seeds.master, seeds.instance)?;

    writeln!(out, "\n{}", state.ascii())?;
    writeln!(out, "FEN: {}", instance.world().fen)?;
    let movetext = instance.world().movetext.as_str();
    writeln!(out, "moves: {}", if movetext.is_empty() { "(none)" } else { movetext })?;
    writeln!(out, "plies: {}   pieces: {}", history.len(), state.total_pieces())?;

    writeln!(out, "\ndocuments:")?;
    for doc in instance.documents() {
        let fidelity = if doc.is_faithful() {
            "faithful".to_string()
        } else {
            let ops: Vec<&str> = doc.deltas().iter().map(|d| d.op().as_str()).collect();
            format!("corrupted: {}", ops.join(", "))
        };
        writeln!(out, "  {} ({})", doc.doc_id(), fidelity)?;
        for line in doc.body().lines() {
            writeln!(out, "    {line}")?;
        }
        for delta in doc.deltas() {
            writeln!(out, "    witness: {}", delta.witness())?;
        }
    }

    let query = instance.query();
    writeln!(out, "\nquery {} ({})", query.query_id(), query.kind())?;
    for line in query.prompt_text().lines() {
        writeln!(out, "  {line}")?;
    }
    for (i, option) in query.options().iter().enumerate() {
        writeln!(out, "  {}. {option}", (b'A' + i as u8) as char)?;
    }
    match instance.gold() {
        GoldRecord::Option { index, option_text, probe_truth } => {
            writeln!(
                out,
                "gold: option {} ({option_text:?}), probe resolves {}",
                (b'A' + *index as u8) as char,
                probe_truth.as_str()
            )?;
            if let Some(probe) = query.probe_claim() {
                writeln!(out, "probe claim: {probe}")?;
            }
        }
        GoldRecord::GradeEmittedClaims => {
            writeln!(out, "gold: grade whatever claims the answer asserts")?;
        }
    }
    Ok(out)
}

/// `<path><suffix>` next to `path` (e.g. `responses.jsonl.run.json`).
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(suffix);
    path.with_file_name(name)
}
