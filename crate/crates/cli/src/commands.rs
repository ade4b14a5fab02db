//! The three subcommands: train, scenario, qa.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use nullstate_core::net::{square_verb_training_set, Network, TrainSample};
use nullstate_core::scenario::{
    dump_qa_state, load_qa_state, qa_transcript, run_scenario, QaLine, RecoveryStrategy,
    ScenarioKind,
};

use crate::config::{context_by_label, FileConfig};
use crate::emit::{self, write_file, EmitFormat, Meta};

/// Exit code for budget/constraint failures (training did not reach
/// 100% accuracy).
pub const EXIT_BUDGET: i32 = 2;

fn wants(formats: &[EmitFormat], f: EmitFormat) -> bool {
    formats.contains(&f)
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub fn cmd_train(
    cfg: &FileConfig,
    meta: &Meta,
    out_dir: &Path,
    formats: &[EmitFormat],
) -> Result<i32> {
    let context = context_by_label(&cfg.train.context)?;
    let samples: Vec<TrainSample> = match cfg.train.dataset.as_str() {
        "square-verb" => square_verb_training_set(context),
        "square-verb-varied-location" => {
            let mut s = Vec::new();
            for label in ["alice-lab", "alice-lab-2", "alice-lab-3"] {
                s.extend(square_verb_training_set(context_by_label(label)?));
            }
            s
        }
        other => bail!("unknown dataset {other:?} (square-verb|square-verb-varied-location)"),
    };

    let mut net = Network::with_init_range(
        &cfg.net.widths,
        cfg.net.bias_floor,
        cfg.net.init_range,
        meta.seed,
    )
    .map_err(|e| anyhow!("invalid network config: {e}"))?;
    let train_cfg = cfg.train.train_config(meta.seed);
    let report = net
        .train(&samples, &train_cfg)
        .map_err(|e| anyhow!("training failed: {e}"))?;

    log::info!(
        "seed {}: accuracy {:.2} after {} epochs",
        meta.seed,
        report.final_accuracy,
        report.history.len() - 1
    );

    // checkpoint carries the meta header as comment lines the loader strips
    let mut checkpoint = String::new();
    checkpoint.push_str(&meta.header_line());
    checkpoint.push('\n');
    checkpoint.push_str(&net.checkpoint_text());
    write_file(out_dir, "checkpoint.txt", &checkpoint)?;

    if wants(formats, EmitFormat::Csv) {
        let mut csv = String::new();
        csv.push_str(&meta.header_line());
        csv.push('\n');
        csv.push_str("epoch,loss,train_accuracy\n");
        for r in &report.history {
            let _ = writeln!(csv, "{},{:.9},{:.6}", r.epoch, r.loss, r.accuracy);
        }
        write_file(out_dir, "loss.csv", &csv)?;
    }

    let converged = report.final_accuracy == 1.0;
    let summary = format!(
        "train seed={} samples={} accuracy={:.2} epochs={} converged={}",
        meta.seed,
        samples.len(),
        report.final_accuracy,
        report.converged_epoch.unwrap_or(train_cfg.epochs),
        converged,
    );
    if wants(formats, EmitFormat::Text) {
        write_file(
            out_dir,
            "train.txt",
            &format!("{}\n{summary}\n", meta.header_line()),
        )?;
    }
    if wants(formats, EmitFormat::Json) {
        let json = serde_json::json!({
            "version": emit::VERSION,
            "seed": meta.seed,
            "config_hash": meta.config_hash,
            "samples": samples.len(),
            "accuracy": report.final_accuracy,
            "converged_epoch": report.converged_epoch,
            "epochs_run": report.history.len() - 1,
        });
        write_file(
            out_dir,
            "train.json",
            &format!("{}\n", serde_json::to_string_pretty(&json)?),
        )?;
    }
    println!("{summary}");
    Ok(if converged { 0 } else { EXIT_BUDGET })
}

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

pub fn cmd_scenario(
    name: &str,
    cfg: &FileConfig,
    meta: &Meta,
    out_dir: &Path,
    formats: &[EmitFormat],
) -> Result<i32> {
    let kind = ScenarioKind::from_token(name).ok_or_else(|| {
        anyhow!(
            "unknown scenario {name:?}; valid: {}",
            ScenarioKind::ALL
                .iter()
                .map(|k| k.token())
                .collect::<Vec<_>>()
                .join(", ")
        )
    })?;
    let scenario_cfg = cfg.scenario_config(meta.seed)?;
    let report = run_scenario(kind, &scenario_cfg);

    if wants(formats, EmitFormat::Text) {
        write_file(out_dir, "report.txt", &emit::report_text(&report, meta))?;
    }
    if wants(formats, EmitFormat::Csv) {
        write_file(out_dir, "report.csv", &emit::report_csv(&report, meta))?;
    }
    if wants(formats, EmitFormat::Json) {
        write_file(out_dir, "report.json", &emit::report_json(&report, meta))?;
    }
    // the final state feeds the qa command; the meta line is a comment
    // the state parser skips
    let state = format!("{}\n{}", meta.header_line(), dump_qa_state(&report.final_state));
    write_file(out_dir, "state.txt", &state)?;

    println!("{}", report.summary_line());
    Ok(0)
}

// ---------------------------------------------------------------------------
// qa
// ---------------------------------------------------------------------------

fn preset_transcript(preset: &str, cfg: &FileConfig, seed: u64) -> Result<Vec<QaLine>> {
    let mut scenario_cfg = cfg.scenario_config(seed)?;
    let state = match preset {
        "post-tag-strip" => {
            scenario_cfg.strategies = vec![RecoveryStrategy::LearnTagStrip];
            run_scenario(ScenarioKind::GriefResponse, &scenario_cfg).final_state
        }
        "bob-baseline" => run_scenario(ScenarioKind::Grief, &scenario_cfg).final_state,
        "alice-present" => nullstate_core::scenario::training_state(&scenario_cfg),
        other => bail!("unknown qa preset {other:?} (post-tag-strip|bob-baseline|alice-present)"),
    };
    Ok(qa_transcript(&state.working, &state.store))
}

pub fn cmd_qa(
    cfg: &FileConfig,
    meta: &Meta,
    out_dir: &Path,
    formats: &[EmitFormat],
) -> Result<i32> {
    let lines = if let Some(state_path) = &cfg.qa.state {
        let text = std::fs::read_to_string(state_path)
            .with_context(|| format!("cannot read state {}", state_path.display()))?;
        let (working, store, _) =
            load_qa_state(&text).map_err(|e| anyhow!("cannot parse state: {e}"))?;
        qa_transcript(&working, &store)
    } else if let Some(preset) = &cfg.qa.preset {
        preset_transcript(preset, cfg, meta.seed)?
    } else {
        bail!("qa needs either `state` or `preset` in the [qa] config section");
    };

    let mut transcript = String::new();
    for line in &lines {
        let _ = writeln!(transcript, "{} {}", line.question, line.answer);
    }
    print!("{transcript}");
    if wants(formats, EmitFormat::Text) {
        write_file(
            out_dir,
            "transcript.txt",
            &format!("{}\n{transcript}", meta.header_line()),
        )?;
    }
    Ok(0)
}
