//! Run results and the files a run writes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::engine::TickMetrics;
use crate::events::EventLog;
use crate::governance::DecisionRecord;
use crate::lifecycle::{ProposalId, ProposalStage};
use crate::num::fixed;

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const RESULT_FILE: &str = "result.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalResult {
    pub proposal_id: ProposalId,
    /// Final stage; `approved` or `rejected` once decided.
    pub outcome: ProposalStage,
    pub decided: bool,
    pub created_tick: u64,
    pub decided_tick: Option<u64>,
    pub ticks_to_decision: Option<u64>,
    pub revision_rounds: u32,
    pub assessments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub seed: u64,
    pub config_hash: String,
    pub ticks_executed: u64,
    /// Some proposal was still undecided when the tick budget ran out.
    pub budget_exhausted: bool,
    pub proposals: Vec<ProposalResult>,
    #[serde(with = "fixed")]
    pub final_support_share: f64,
    pub metrics_file: String,
    pub events_file: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: RunResult,
    pub metrics: Vec<TickMetrics>,
    pub events: EventLog,
    /// Council decisions with their ticks.
    pub decisions: Vec<(u64, DecisionRecord)>,
}

impl RunOutput {
    pub fn metrics_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            out.push_str(&serde_json::to_string(m).expect("metrics serialise"));
            out.push('\n');
        }
        out
    }

    pub fn result_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.result).expect("result serialises");
        s.push('\n');
        s
    }

    /// Writes `metrics.jsonl`, `events.jsonl` and `result.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(METRICS_FILE), self.metrics_jsonl())?;
        let mut events = io::BufWriter::new(fs::File::create(dir.join(EVENTS_FILE))?);
        self.events.write_jsonl(&mut events)?;
        events.flush()?;
        fs::write(dir.join(RESULT_FILE), self.result_json())
    }
}

/// What `summarize` reports for a run directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub result: RunResult,
    pub last_metrics: Option<TickMetrics>,
    pub metrics_records: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum SummaryError {
    #[error("run directory is missing `{0}`")]
    Missing(String),
    #[error("cannot read `{file}`: {source}")]
    Io { file: String, source: io::Error },
    #[error("`{file}` is malformed: {message}")]
    Malformed { file: String, message: String },
}

/// Reads a run directory back.
pub fn read_run(dir: &Path) -> Result<RunSummary, SummaryError> {
    for f in [RESULT_FILE, METRICS_FILE, EVENTS_FILE] {
        if !dir.join(f).is_file() {
            return Err(SummaryError::Missing(f.to_string()));
        }
    }
    let read =
        |f: &str| fs::read_to_string(dir.join(f)).map_err(|source| SummaryError::Io { file: f.to_string(), source });
    let result: RunResult = serde_json::from_str(&read(RESULT_FILE)?)
        .map_err(|e| SummaryError::Malformed { file: RESULT_FILE.into(), message: e.to_string() })?;
    let metrics_text = read(METRICS_FILE)?;
    let mut last = None;
    let mut n = 0;
    for (i, line) in metrics_text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let m: TickMetrics = serde_json::from_str(line).map_err(|e| SummaryError::Malformed {
            file: METRICS_FILE.into(),
            message: format!("line {}: {e}", i + 1),
        })?;
        last = Some(m);
        n += 1;
    }
    Ok(RunSummary { result, last_metrics: last, metrics_records: n })
}
