//! Drive a dataset against a model endpoint: assemble each instance's
//! prompt, collect raw replies, and append them to a JSONL record file
//! keyed by instance id.
//!
//! The dataset file is never touched. Responses append to their own file,
//! flushed per line, so an interrupted run resumes by skipping instances
//! whose latest record already succeeded (the last record per id wins).
//! Requests run on a bounded pool of worker threads; an authentication
//! failure flips a shared halt flag so every worker stops promptly.

use std::collections::{BTreeMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{ChatClient, ClientError};
use crate::dataset::BenchInstance;

/// One line of the responses file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub instance_id: String,
    pub outcome: RunOutcome,
    /// The raw model reply (present iff outcome is `ok`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Transient-failure retries spent on this instance.
    pub retries: u32,
    pub model: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Ok,
    Error,
}

/// How a run went, in counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    /// Instances skipped because a previous run already answered them.
    pub resumed: usize,
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub concurrency: usize,
    /// Skip instances whose latest stored record succeeded.
    pub resume: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions { concurrency: 4, resume: true }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("could not access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed response record: {message}")]
    MalformedLine { path: PathBuf, line: usize, message: String },
    #[error("concurrency must be at least 1")]
    ZeroConcurrency,
    #[error(transparent)]
    Client(#[from] ClientError),
}

/// Read a responses file into its effective state: the last record per
/// instance id wins, in file order.
pub fn read_responses(path: &Path) -> Result<BTreeMap<String, ResponseRecord>, RunError> {
    let file = File::open(path).map_err(|e| RunError::Io { path: path.to_path_buf(), source: e })?;
    let mut records = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| RunError::Io { path: path.to_path_buf(), source: e })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ResponseRecord =
            serde_json::from_str(&line).map_err(|e| RunError::MalformedLine {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        records.insert(record.instance_id.clone(), record);
    }
    Ok(records)
}

/// Send every instance's prompt to the endpoint, appending one record per
/// attempt outcome to `out_path`. Per-instance failures (timeouts after
/// retries, HTTP errors, unassemblable prompts) are recorded and skipped;
/// authentication failures abort the whole run.
pub fn run_dataset(
    instances: &[BenchInstance],
    client: &ChatClient,
    out_path: &Path,
    options: RunOptions,
) -> Result<RunSummary, RunError> {
    if options.concurrency == 0 {
        return Err(RunError::ZeroConcurrency);
    }
    let answered: BTreeMap<String, ResponseRecord> = if options.resume && out_path.exists() {
        read_responses(out_path)?
    } else {
        BTreeMap::new()
    };
    let already_ok = |id: &str| {
        answered.get(id).map(|r| r.outcome == RunOutcome::Ok).unwrap_or(false)
    };

    let mut queue = VecDeque::new();
    let mut resumed = 0usize;
    for instance in instances {
        if already_ok(instance.instance_id()) {
            resumed += 1;
        } else {
            queue.push_back(instance);
        }
    }

    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_path)
        .map_err(|e| RunError::Io { path: out_path.to_path_buf(), source: e })?;
    let writer = Mutex::new(BufWriter::new(file));
    let queue = Mutex::new(queue);
    let halt = AtomicBool::new(false);
    let fatal: Mutex<Option<ClientError>> = Mutex::new(None);
    let succeeded = std::sync::atomic::AtomicUsize::new(0);
    let failed = std::sync::atomic::AtomicUsize::new(0);
    let io_error: Mutex<Option<RunError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..options.concurrency {
            scope.spawn(|| loop {
                if halt.load(Ordering::SeqCst) {
                    return;
                }
                let Some(instance) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let record = answer_one(instance, client);
                match &record {
                    Err(fatal_err) => {
                        halt.store(true, Ordering::SeqCst);
                        let mut slot = fatal.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(clone_fatal(fatal_err));
                        }
                        return;
                    }
                    Ok(record) => {
                        match record.outcome {
                            RunOutcome::Ok => succeeded.fetch_add(1, Ordering::SeqCst),
                            RunOutcome::Error => failed.fetch_add(1, Ordering::SeqCst),
                        };
                        let mut writer = writer.lock().unwrap();
                        let write = serde_json::to_string(record)
                            .map_err(std::io::Error::other)
                            .and_then(|line| {
                                writeln!(writer, "{line}")?;
                                writer.flush()
                            });
                        if let Err(e) = write {
                            halt.store(true, Ordering::SeqCst);
                            let mut slot = io_error.lock().unwrap();
                            if slot.is_none() {
                                *slot = Some(RunError::Io {
                                    path: out_path.to_path_buf(),
                                    source: e,
                                });
                            }
                            return;
                        }
                    }
                }
            });
        }
    });

    if let Some(err) = fatal.into_inner().unwrap() {
        return Err(RunError::Client(err));
    }
    if let Some(err) = io_error.into_inner().unwrap() {
        return Err(err);
    }
    Ok(RunSummary {
        total: instances.len(),
        resumed,
        succeeded: succeeded.into_inner(),
        failed: failed.into_inner(),
    })
}

/// Ask the endpoint about one instance. `Err` means the whole run must stop
/// (authentication); recoverable failures come back as error records.
fn answer_one(
    instance: &BenchInstance,
    client: &ChatClient,
) -> Result<ResponseRecord, ClientError> {
    let model = client.config().model.clone();
    let id = instance.instance_id().to_string();
    let prompt = match instance.prompt() {
        Ok(prompt) => prompt,
        Err(e) => {
            return Ok(ResponseRecord {
                instance_id: id,
                outcome: RunOutcome::Error,
                raw: None,
                error: Some(format!("prompt assembly failed: {e}")),
                retries: 0,
                model,
            });
        }
    };
    match client.complete(&prompt) {
        Ok(completion) => Ok(ResponseRecord {
            instance_id: id,
            outcome: RunOutcome::Ok,
            raw: Some(completion.text),
            error: None,
            retries: completion.retries,
            model,
        }),
        Err(err @ (ClientError::Auth { .. } | ClientError::MissingApiKey { .. })) => Err(err),
        Err(err) => Ok(ResponseRecord {
            instance_id: id,
            outcome: RunOutcome::Error,
            raw: None,
            error: Some(err.to_string()),
            retries: 0,
            model,
        }),
    }
}

/// [`ClientError`] is not `Clone` (it wraps `reqwest::Error`); rebuild the
/// fatal variants, which carry only plain data.
fn clone_fatal(err: &ClientError) -> ClientError {
    match err {
        ClientError::Auth { status } => ClientError::Auth { status: *status },
        ClientError::MissingApiKey { var } => {
            ClientError::MissingApiKey { var: var.clone() }
        }
        other => ClientError::MalformedReply(other.to_string()),
    }
}
