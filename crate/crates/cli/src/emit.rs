//! Output files: every emitted file embeds the seed, the config hash,
//! and the artifact version, so equal (seed, config, version) triples
//! produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use nullstate_core::scenario::ScenarioReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which file formats a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmitFormat {
    Text,
    Csv,
    Json,
}

/// Run identity embedded in every artifact.
#[derive(Debug, Clone)]
pub struct Meta {
    pub seed: u64,
    pub config_hash: String,
}

impl Meta {
    pub fn new(seed: u64, config_text: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        let digest = hasher.finalize();
        let mut hash = String::with_capacity(12);
        for byte in digest.iter().take(6) {
            let _ = write!(hash, "{byte:02x}");
        }
        Meta {
            seed,
            config_hash: hash,
        }
    }

    /// Comment header line for text and CSV artifacts.
    pub fn header_line(&self) -> String {
        format!(
            "# nullstate v{VERSION} seed={} config={}",
            self.seed, self.config_hash
        )
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// The fixed report row schema:
/// `scenario,phase,context,functionality,null_fraction,cost_steps,seed`.
pub fn report_csv(report: &ScenarioReport, meta: &Meta) -> String {
    let mut out = String::new();
    out.push_str(&meta.header_line());
    out.push('\n');
    out.push_str("scenario,phase,context,functionality,null_fraction,cost_steps,seed\n");
    for m in &report.measurements {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{},{}",
            report.scenario,
            m.phase,
            m.context,
            m.functionality,
            m.null_fraction,
            m.cost_steps,
            report.seed
        );
    }
    out
}

pub fn report_text(report: &ScenarioReport, meta: &Meta) -> String {
    let mut out = String::new();
    out.push_str(&meta.header_line());
    out.push('\n');
    let _ = writeln!(out, "scenario: {}", report.scenario);
    let _ = writeln!(out, "seed: {}", report.seed);
    out.push_str("\nmeasurements:\n");
    for m in &report.measurements {
        let _ = writeln!(
            out,
            "  {:<28} context={:<12} functionality={:.2} null={:.2} cost={}",
            m.phase, m.context, m.functionality, m.null_fraction, m.cost_steps
        );
    }
    if !report.follow_trace.is_empty() {
        out.push_str("\nfollow policy:\n");
        for step in &report.follow_trace {
            let _ = writeln!(
                out,
                "  {:<20} -> {:<6} (stay={:.2} rotate={:.2} move={:.2})",
                step.position.label(),
                step.action.label(),
                step.scores[0],
                step.scores[1],
                step.scores[2]
            );
        }
    }
    if !report.qa.is_empty() {
        out.push_str("\nQ&A:\n");
        for line in &report.qa {
            let _ = writeln!(out, "  {} {}", line.question, line.answer);
        }
    }
    if !report.notes.is_empty() {
        out.push_str("\nnotes:\n");
        for note in &report.notes {
            let _ = writeln!(out, "  {note}");
        }
    }
    let _ = writeln!(out, "\nsummary: {}", report.summary_line());
    out
}

#[derive(Serialize)]
struct JsonMeasurement<'a> {
    phase: &'a str,
    context: &'a str,
    functionality: f64,
    null_fraction: f64,
    cost_steps: u64,
}

#[derive(Serialize)]
struct JsonFollowStep<'a> {
    position: &'a str,
    action: &'a str,
    scores: [f64; 3],
}

#[derive(Serialize)]
struct JsonQa<'a> {
    question: &'a str,
    answer: &'a str,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    version: &'a str,
    seed: u64,
    config_hash: &'a str,
    scenario: &'a str,
    before: f64,
    after: f64,
    measurements: Vec<JsonMeasurement<'a>>,
    follow_trace: Vec<JsonFollowStep<'a>>,
    qa: Vec<JsonQa<'a>>,
    notes: &'a [String],
}

pub fn report_json(report: &ScenarioReport, meta: &Meta) -> String {
    let json = JsonReport {
        version: VERSION,
        seed: report.seed,
        config_hash: &meta.config_hash,
        scenario: &report.scenario,
        before: report.before,
        after: report.after,
        measurements: report
            .measurements
            .iter()
            .map(|m| JsonMeasurement {
                phase: &m.phase,
                context: &m.context,
                functionality: m.functionality,
                null_fraction: m.null_fraction,
                cost_steps: m.cost_steps,
            })
            .collect(),
        follow_trace: report
            .follow_trace
            .iter()
            .map(|s| JsonFollowStep {
                position: s.position.label(),
                action: s.action.label(),
                scores: s.scores,
            })
            .collect(),
        qa: report
            .qa
            .iter()
            .map(|l| JsonQa {
                question: &l.question,
                answer: &l.answer,
            })
            .collect(),
        notes: &report.notes,
    };
    let mut text = serde_json::to_string_pretty(&json).expect("serializable report");
    text.push('\n');
    text
}
