use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::data_driven::StepMetrics;
use crate::error::{Result, SetError};
use crate::harness::experiments::{ExperimentArtifacts, LABEL_INITIAL};
use crate::sets::{sample_cpz_with, ConstrainedPolyZonotope, SampleOptions, RESIDUAL_TOL};

pub const PROJECTION_HEADER: &str = "set_label,k,dim_i,dim_j,xi,xj";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sampled points of one set projected on one coordinate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionDump {
    pub label: String,
    pub k: usize,
    /// One-based coordinates.
    pub pair: [usize; 2],
    pub points: Vec<[f64; 2]>,
}

/// Samples `n` feasible points of `set` (each checked against
/// [`RESIDUAL_TOL`]) from the stream `stream` of `seed`.
pub fn sample_points(set: &ConstrainedPolyZonotope, n: usize, seed: u64, stream: u64) -> Result<Vec<DVector<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    if set.num_factors() == 0 {
        return Ok(vec![set.center().clone(); n]);
    }
    sample_cpz_with(set, n, &mut rng, &SampleOptions::default())
}

/// The sets that go into an experiment's projection file: the initial set
/// once, then every run at every configured step after the first.
pub fn plotted_sets(art: &ExperimentArtifacts) -> Vec<(String, usize, &ConstrainedPolyZonotope)> {
    let steps = art.config.plot_steps();
    let mut out = Vec::new();
    if steps.contains(&0) {
        out.push((LABEL_INITIAL.to_string(), 0, &art.scenario.initial));
    }
    for run in &art.runs {
        for &k in steps.iter().filter(|&&k| k > 0) {
            if let Some(set) = run.reach_sets().get(k) {
                out.push((run.label.clone(), k, set));
            }
        }
    }
    out
}

pub fn projection_dumps(art: &ExperimentArtifacts) -> Result<Vec<ProjectionDump>> {
    let cfg = &art.config;
    let sets = plotted_sets(art);
    let sample = |(idx, (_, _, set)): (usize, &(String, usize, &ConstrainedPolyZonotope))| {
        sample_points(set, cfg.samples_per_set, cfg.seed, 1000 + idx as u64)
    };
    #[cfg(feature = "parallel")]
    let clouds: Vec<Vec<DVector<f64>>> = {
        use rayon::prelude::*;
        sets.par_iter().enumerate().map(sample).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let clouds: Vec<Vec<DVector<f64>>> = sets.iter().enumerate().map(sample).collect::<Result<_>>()?;

    let mut dumps = Vec::new();
    for ((label, k, _), cloud) in sets.iter().zip(&clouds) {
        for &[i, j] in &cfg.projections {
            dumps.push(ProjectionDump {
                label: label.clone(),
                k: *k,
                pair: [i, j],
                points: cloud.iter().map(|p| [p[i - 1], p[j - 1]]).collect(),
            });
        }
    }
    Ok(dumps)
}

pub fn projection_csv(dumps: &[ProjectionDump]) -> String {
    let mut out = String::with_capacity(64 * dumps.iter().map(|d| d.points.len()).sum::<usize>());
    out.push_str(PROJECTION_HEADER);
    out.push('\n');
    for d in dumps {
        for [xi, xj] in &d.points {
            writeln!(out, "{},{},{},{},{},{}", d.label, d.k, d.pair[0], d.pair[1], fmt_float(*xi), fmt_float(*xj))
                .expect("writing to a String");
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct ModelSummary {
    step: Option<usize>,
    generators: usize,
    constraint_rows: usize,
    data_columns: usize,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    label: &'a str,
    refinement_steps: Vec<usize>,
    models: Vec<ModelSummary>,
    steps: &'a [StepMetrics],
}

/// Run statistics, sampling parameters and per-panel axis ranges.
pub fn metadata(art: &ExperimentArtifacts, dumps: &[ProjectionDump]) -> serde_json::Value {
    let cfg = &art.config;
    let runs: Vec<RunSummary> = art
        .runs
        .iter()
        .map(|r| RunSummary {
            label: &r.label,
            refinement_steps: r.run.refinement_steps(),
            models: r
                .run
                .models
                .iter()
                .map(|m| ModelSummary {
                    step: m.step,
                    generators: m.model.num_generators(),
                    constraint_rows: m.model.num_constraint_rows(),
                    data_columns: m.data_len,
                })
                .collect(),
            steps: &r.run.metrics,
        })
        .collect();
    let ranges: Vec<serde_json::Value> = cfg
        .projections
        .iter()
        .map(|&pair| {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for d in dumps.iter().filter(|d| d.pair == pair) {
                for p in &d.points {
                    for c in 0..2 {
                        lo[c] = lo[c].min(p[c]);
                        hi[c] = hi[c].max(p[c]);
                    }
                }
            }
            json!({ "dims": pair, "x_range": [lo[0], hi[0]], "y_range": [lo[1], hi[1]] })
        })
        .collect();
    let mut meta = json!({
        "name": cfg.name,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "rng": "ChaCha8Rng",
        "samples_per_set": cfg.samples_per_set,
        "residual_tolerance": RESIDUAL_TOL,
        "plot_steps": cfg.plot_steps(),
        "projections": cfg.projections,
        "horizon": cfg.horizon,
        "data_length": cfg.data_length(),
        "reach": cfg.reach,
        "runs": runs,
        "axis_ranges": ranges,
    });
    if let Some(w) = &art.widths {
        meta["widths"] = json!({
            "label_a": w.label_a,
            "label_b": w.label_b,
            "cells": w.rows.len(),
            "fraction_a_not_wider": w.fraction_a_not_wider(),
        });
    }
    meta
}

/// Files written by [`write_artifacts`].
#[derive(Debug, Clone, Default)]
pub struct WrittenFiles {
    pub projections: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub widths: Option<PathBuf>,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SetError::Config(format!("writing {}: {e}", path.display())))
}

/// Writes `<name>_projections.csv`, `<name>_metadata.json` and, when a width
/// table exists, `<name>_widths.csv` into `dir`.
pub fn write_artifacts(art: &ExperimentArtifacts, dir: &Path) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir).map_err(|e| SetError::Config(format!("creating {}: {e}", dir.display())))?;
    let dumps = projection_dumps(art)?;
    let name = &art.config.name;
    let mut files = WrittenFiles::default();
    let p = dir.join(format!("{name}_projections.csv"));
    write(&p, &projection_csv(&dumps))?;
    files.projections = Some(p);
    let m = dir.join(format!("{name}_metadata.json"));
    let meta = serde_json::to_string_pretty(&metadata(art, &dumps)).expect("metadata serializes");
    write(&m, &(meta + "\n"))?;
    files.metadata = Some(m);
    if let Some(w) = &art.widths {
        let path = dir.join(format!("{name}_widths.csv"));
        write(&path, &w.to_csv())?;
        files.widths = Some(path);
    }
    Ok(files)
}
