use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cpzreach::harness::emit::{self, write_artifacts};
use cpzreach::harness::experiments::{LABEL_OFFLINE, LABEL_REFINED};
use cpzreach::harness::{
    compare_widths, negative_control, run_experiment, run_experiment_1, run_experiment_2, verify_run,
    ExperimentArtifacts, ExperimentConfig, ExperimentData, LabeledRun, Scenario,
};
use cpzreach::SetError;

/// Reachability analysis of unknown linear systems from noisy data.
#[derive(Parser)]
#[command(name = "cpzreach", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the online loop from a config and summarize the reachable sets.
    Reach(Common),
    /// Non-convex initial set: offline-only versus refined propagation.
    Experiment1(Common),
    /// Convex initial set: refined versus pooled-data propagation.
    Experiment2(Common),
    /// Check sampled true trajectories against the reachable sets.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Also rerun with the noise bound scaled by this factor and require
        /// the check to fail.
        #[arg(long)]
        negative_control: Option<f64>,
    },
    /// Per-step, per-coordinate width table of the two runs.
    Compare(Common),
    /// Projection samples and metadata for plotting.
    EmitPlotData(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON). Defaults to the built-in config of the
    /// subcommand, or of experiment 1.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Verification trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Sampled points per set and projection.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Set(SetError),
    Io(String),
    Verification(serde_json::Value),
}

impl From<SetError> for Failure {
    fn from(e: SetError) -> Self {
        Failure::Set(e)
    }
}

impl Common {
    fn load(&self, fallback: fn() -> ExperimentConfig) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => fallback(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(n) = self.samples {
            cfg.samples_per_set = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn files_json(files: &emit::WrittenFiles) -> serde_json::Value {
    json!({
        "projections": files.projections,
        "metadata": files.metadata,
        "widths": files.widths,
    })
}

fn experiment(common: &Common, art: ExperimentArtifacts) -> Result<serde_json::Value, Failure> {
    let files = write_artifacts(&art, &common.out_dir)?;
    let mut out = json!({ "name": art.config.name, "files": files_json(&files) });
    if let Some(w) = &art.widths {
        out["fraction_refined_not_wider"] = json!(w.fraction_a_not_wider());
    }
    Ok(out)
}

fn reach(common: &Common) -> Result<serde_json::Value, Failure> {
    let cfg = common.load(ExperimentConfig::experiment1)?;
    let scenario = Scenario::from_config(&cfg)?;
    let data = ExperimentData::generate(&cfg, &scenario)?;
    let run = LabeledRun::execute(
        LABEL_REFINED,
        &scenario.problem(&cfg, scenario.noise.clone()),
        &data,
        data.offline.clone(),
        &data.online_chunks(cfg.horizon)?,
        scenario.first_free_id(),
    )?;
    let enclosures: Vec<serde_json::Value> = run
        .reach_sets()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (lo, hi) = s.interval_enclosure();
            json!({ "k": k, "lower": lo.as_slice(), "upper": hi.as_slice() })
        })
        .collect();
    let summary = json!({
        "name": cfg.name,
        "seed": cfg.seed,
        "refinement_steps": run.run.refinement_steps(),
        "steps": run.run.metrics,
        "interval_enclosures": enclosures,
    });
    let path = write_json(&common.out_dir, &format!("{}_reach.json", cfg.name), &summary)?;
    Ok(json!({ "name": cfg.name, "files": { "reach": path } }))
}

fn verify(common: &Common, negative: Option<f64>) -> Result<serde_json::Value, Failure> {
    let cfg = common.load(ExperimentConfig::experiment1)?;
    let art = run_experiment(&cfg)?;
    let mut reports = Vec::new();
    for run in &art.runs {
        reports.push(verify_run(run, &art.scenario, &art.data, cfg.trials, cfg.seed)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    let mut out = json!({ "name": cfg.name, "passed": passed, "reports": reports });
    let mut detected = true;
    if let Some(factor) = negative {
        let r = negative_control(&art, factor, cfg.trials, cfg.seed)?;
        detected = !r.passed;
        out["negative_control"] = json!({ "factor": factor, "detected": detected, "report": r });
    }
    let path = write_json(&common.out_dir, &format!("{}_verify.json", cfg.name), &out)?;
    out["files"] = json!({ "verify": path });
    if passed && detected {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

fn compare(common: &Common) -> Result<serde_json::Value, Failure> {
    let cfg = common.load(ExperimentConfig::experiment2)?;
    let art = run_experiment(&cfg)?;
    let table = match &art.widths {
        Some(t) => t.clone(),
        None => {
            let (a, b) = (art.run(LABEL_REFINED), art.run(LABEL_OFFLINE));
            let (a, b) = (a.expect("refined run"), b.expect("offline run"));
            compare_widths(
                (&a.label, &a.reach_sets()[1..]),
                (&b.label, &b.reach_sets()[1..]),
                1,
                cfg.samples_per_set,
                cfg.seed,
            )?
        }
    };
    std::fs::create_dir_all(&common.out_dir)
        .map_err(|e| Failure::Io(format!("creating {}: {e}", common.out_dir.display())))?;
    let path = common.out_dir.join(format!("{}_widths.csv", cfg.name));
    std::fs::write(&path, table.to_csv()).map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))?;
    Ok(json!({
        "name": cfg.name,
        "label_a": table.label_a,
        "label_b": table.label_b,
        "cells": table.rows.len(),
        "fraction_a_not_wider": table.fraction_a_not_wider(),
        "files": { "widths": path },
    }))
}

fn dispatch(cli: Cli) -> Result<serde_json::Value, Failure> {
    match cli.command {
        Command::Reach(c) => reach(&c),
        Command::Experiment1(c) => {
            let cfg = c.load(ExperimentConfig::experiment1)?;
            experiment(&c, run_experiment_1(&cfg)?)
        }
        Command::Experiment2(c) => {
            let cfg = c.load(ExperimentConfig::experiment2)?;
            experiment(&c, run_experiment_2(&cfg)?)
        }
        Command::Verify { common, negative_control } => verify(&common, negative_control),
        Command::Compare(c) => compare(&c),
        Command::EmitPlotData(c) => {
            let cfg = c.load(ExperimentConfig::experiment1)?;
            experiment(&c, run_experiment(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    match dispatch(cli) {
        Ok(mut v) => {
            v["seconds"] = json!(start.elapsed().as_secs_f64());
            println!("{}", serde_json::to_string_pretty(&v).expect("json serializes"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (code, body) = match f {
                Failure::Set(e) => (2, json!({ "error": e.kind(), "message": e.to_string() })),
                Failure::Io(msg) => (2, json!({ "error": "io", "message": msg })),
                Failure::Verification(report) => (
                    3,
                    json!({ "error": "verification_failed", "message": "witness check exceeded tolerance", "report": report }),
                ),
            };
            eprintln!("{}", serde_json::to_string(&body).expect("json serializes"));
            ExitCode::from(code)
        }
    }
}
