//! The full pipeline against a local scripted endpoint: generate a dataset,
//! query a "model" over the OpenAI-compatible wire protocol, grade the
//! responses, and print the metrics — no API key, no network.
//!
//! Run with: cargo run --example mock_model_run

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use claimcheck::client::{ChatClient, EndpointConfig};
use claimcheck::generate::{generate_dataset, GenerateConfig};
use claimcheck::grader::{aggregate, grade, parse_response, render_stats_table};
use claimcheck::oracle::EvalBudget;
use claimcheck::runner::{read_responses, run_dataset, RunOptions, RunOutcome};

/// Serve `n` chat completions from a throwaway local port. This stands in
/// for any OpenAI-compatible server; the "model" always answers "A".
fn scripted_endpoint(n: usize) -> (String, std::thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind a local port");
    let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        for _ in 0..n {
            let (stream, _) = listener.accept().expect("accept connection");
            let mut reader = BufReader::new(stream);
            let mut content_length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).expect("read header");
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                if let Some(rest) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = rest.trim().parse().unwrap_or(0);
                }
            }
            let mut body = vec![0u8; content_length];
            reader.read_exact(&mut body).expect("read request body");

            let reply = serde_json::json!({
                "id": "chatcmpl-scripted",
                "object": "chat.completion",
                "choices": [{
                    "index": 0,
                    "message": { "role": "assistant", "content": "A" },
                    "finish_reason": "stop"
                }]
            })
            .to_string();
            let response = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\n\
                 content-length: {}\r\nconnection: close\r\n\r\n{}",
                reply.len(),
                reply
            );
            reader.into_inner().write_all(response.as_bytes()).expect("write response");
        }
    });
    (base_url, handle)
}

fn main() {
    // Boolean MCQs only, so "always answer A" is a well-formed strategy.
    let config = GenerateConfig::from_toml_str(
        "count = 16\nmaster_seed = 2024\nquery_kinds = [\"mcq_boolean\"]\ncorrupt_fraction = 0.5\n",
    )
    .expect("valid config");
    let instances = generate_dataset(&config).expect("generation succeeds");

    let (base_url, server) = scripted_endpoint(instances.len());
    println!("scripted endpoint at {base_url}");

    // No api_key_env: local endpoints don't need credentials. Against a real
    // provider, set api_key_env = "OPENAI_API_KEY" (or similar) and the
    // client reads the key from that variable at construction.
    let client =
        ChatClient::new(EndpointConfig::new(&base_url, "always-a")).expect("client builds");

    let dir = std::env::temp_dir().join("claimcheck-example-run");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let out = dir.join("responses.jsonl");
    let _ = std::fs::remove_file(&out); // fresh run each time

    let summary = run_dataset(&instances, &client, &out, RunOptions { concurrency: 2, resume: true })
        .expect("run completes");
    server.join().expect("endpoint thread");
    println!(
        "queried {} instances: {} ok, {} failed -> {}",
        summary.total,
        summary.succeeded,
        summary.failed,
        out.display()
    );

    // Grade straight from the response log.
    let records = read_responses(&out).expect("responses read back");
    let budget = EvalBudget::default();
    let mut reports = Vec::new();
    for instance in &instances {
        let record = &records[instance.instance_id()];
        assert_eq!(record.outcome, RunOutcome::Ok);
        let raw = record.raw.as_deref().expect("ok records carry text");
        let parsed = parse_response(raw, instance.query());
        reports.push(grade(&parsed, instance, budget).expect("grading succeeds"));
    }

    let metrics = aggregate(&reports, &instances).expect("metrics aggregate");
    println!("\n{}", render_stats_table(&metrics));
    println!(
        "\"Always A\" is right exactly when A is the gold option — the \
         hallucination rate above\nis the measured cost of guessing."
    );
}
