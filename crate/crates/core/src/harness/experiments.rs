use std::ops::Range;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data_driven::{run_algorithm1, DataBatch, ReachProblem, ReachRun};
use crate::error::{Result, SetError};
use crate::harness::compare::{compare_widths, WidthTable};
use crate::harness::config::{ExperimentConfig, ExperimentKind};
use crate::harness::system::{simulate, LtiSystem, SampledPoint};
use crate::ids::FactorContext;
use crate::sets::{sample_factors, ConstrainedPolyZonotope, SampleOptions, Zonotope};

/// Everything an experiment needs besides the data.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub system: LtiSystem,
    pub initial: ConstrainedPolyZonotope,
    pub input: Zonotope,
    pub noise: Zonotope,
}

impl Scenario {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Scenario {
            system: cfg.system.build()?,
            initial: cfg.initial_set.build(&FactorContext::new())?,
            input: cfg.input_set.build("input_set.generators")?,
            noise: cfg.noise_set.build("noise_set.generators")?,
        })
    }

    /// First id not used by the initial set.
    pub fn first_free_id(&self) -> u64 {
        self.initial.ids().iter().map(|id| id.get()).max().unwrap_or(0) + 1
    }

    pub fn problem(&self, cfg: &ExperimentConfig, noise: Zonotope) -> ReachProblem {
        ReachProblem {
            initial: self.initial.clone(),
            input: self.input.clone(),
            noise,
            horizon: cfg.horizon,
            options: cfg.reach,
        }
    }

    /// A point of the initial set with its factors.
    pub fn sample_initial(&self, rng: &mut ChaCha8Rng) -> Result<SampledPoint> {
        let factors = sample_factors(&self.initial, 1, rng, &SampleOptions::default())?
            .pop()
            .expect("one sample requested");
        Ok(SampledPoint {
            point: self.initial.evaluate_aligned(&factors).point,
            factors,
        })
    }
}

/// Identification data: the columns of every collected trajectory, in order,
/// with the noise realized at each column and its factor values.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub batch: DataBatch,
    pub noise: Vec<DVector<f64>>,
    pub noise_factors: Vec<Vec<f64>>,
    pub offline: Range<usize>,
    /// Arrival step and column range of each online segment.
    pub online: Vec<(usize, Range<usize>)>,
}

impl ExperimentData {
    pub fn generate(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let total = cfg.data_length();
        let start = cfg.data.initial_set.as_ref().map(|z| z.build("data.initial_set.generators")).transpose()?;
        let input = match &cfg.data.input_set {
            Some(z) => z.build("data.input_set.generators")?,
            None => scenario.input.clone(),
        };
        let per = cfg.data.trajectory_length.unwrap_or(total).max(1);
        let mut batch = DataBatch::empty(scenario.system.state_dim(), scenario.system.input_dim());
        let mut noise = Vec::with_capacity(total);
        let mut noise_factors = Vec::with_capacity(total);
        while batch.len() < total {
            let x0 = match &start {
                Some(z) => SampledPoint::uniform(z, &mut rng),
                None => scenario.sample_initial(&mut rng)?,
            };
            let len = per.min(total - batch.len());
            let traj = simulate(&scenario.system, &x0, len, &input, &scenario.noise, true, &mut rng)?;
            batch.append(&traj.batch(0..len)?)?;
            noise.extend(traj.noise);
            noise_factors.extend(traj.witness.expect("recorded").noise);
        }
        let mut at = cfg.offline_length;
        let online = cfg
            .online_segments
            .iter()
            .map(|s| {
                let r = at..at + s.length;
                at += s.length;
                (s.step, r)
            })
            .collect();
        Ok(ExperimentData {
            batch,
            noise,
            noise_factors,
            offline: 0..cfg.offline_length,
            online,
        })
    }

    /// Per-step chunks for a run of `horizon` steps.
    pub fn online_chunks(&self, horizon: usize) -> Result<Vec<DataBatch>> {
        let empty = DataBatch::empty(self.batch.state_dim(), self.batch.input_dim());
        let mut chunks = vec![empty; horizon];
        for (step, range) in &self.online {
            if *step >= horizon {
                log::warn!("online segment at step {step} is beyond the horizon {horizon}; ignored");
                continue;
            }
            chunks[*step].append(&self.batch.columns(range.clone())?)?;
        }
        Ok(chunks)
    }

    pub fn all(&self) -> Range<usize> {
        0..self.batch.len()
    }
}

/// A run together with the data columns behind each of its models.
#[derive(Debug)]
pub struct LabeledRun {
    pub label: String,
    pub run: ReachRun,
    pub model_data: Vec<Range<usize>>,
    /// Noise bound the pipeline assumed.
    pub noise: Zonotope,
}

impl LabeledRun {
    /// Runs the online loop on `offline` and optional online chunks.
    pub fn execute(
        label: &str,
        problem: &ReachProblem,
        data: &ExperimentData,
        offline: Range<usize>,
        online: &[DataBatch],
        first_id: u64,
    ) -> Result<Self> {
        let batch = data.batch.columns(offline.clone())?;
        let run = run_algorithm1(problem, &batch, online, FactorContext::starting_at(first_id))?;
        let mut model_data = vec![offline.clone()];
        let mut cursor = data.online.first().map_or(offline.end, |(_, r)| r.start);
        for record in &run.models[1..] {
            model_data.push(cursor..cursor + record.data_len);
            cursor += record.data_len;
        }
        Ok(LabeledRun {
            label: label.to_string(),
            run,
            model_data,
            noise: problem.noise.clone(),
        })
    }

    pub fn reach_sets(&self) -> &[ConstrainedPolyZonotope] {
        &self.run.reach_sets
    }
}

#[derive(Debug)]
pub struct ExperimentArtifacts {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
    pub data: ExperimentData,
    pub runs: Vec<LabeledRun>,
    pub widths: Option<WidthTable>,
}

impl ExperimentArtifacts {
    pub fn run(&self, label: &str) -> Option<&LabeledRun> {
        self.runs.iter().find(|r| r.label == label)
    }
}

pub const LABEL_INITIAL: &str = "X0";
pub const LABEL_OFFLINE: &str = "R_tilde";
pub const LABEL_REFINED: &str = "R_hat";
pub const LABEL_POOLED: &str = "R_bar";

fn refined_run(cfg: &ExperimentConfig, scenario: &Scenario, data: &ExperimentData) -> Result<LabeledRun> {
    LabeledRun::execute(
        LABEL_REFINED,
        &scenario.problem(cfg, scenario.noise.clone()),
        data,
        data.offline.clone(),
        &data.online_chunks(cfg.horizon)?,
        scenario.first_free_id(),
    )
}

/// Offline-only propagation next to propagation with online refinement.
pub fn run_experiment_1(cfg: &ExperimentConfig) -> Result<ExperimentArtifacts> {
    let scenario = Scenario::from_config(cfg)?;
    let data = ExperimentData::generate(cfg, &scenario)?;
    let offline = LabeledRun::execute(
        LABEL_OFFLINE,
        &scenario.problem(cfg, scenario.noise.clone()),
        &data,
        data.offline.clone(),
        &[],
        scenario.first_free_id(),
    )?;
    let refined = refined_run(cfg, &scenario, &data)?;
    Ok(ExperimentArtifacts {
        config: cfg.clone(),
        scenario,
        data,
        runs: vec![offline, refined],
        widths: None,
    })
}

/// Refined propagation next to a single model identified from all data,
/// plus the width comparison of the two.
pub fn run_experiment_2(cfg: &ExperimentConfig) -> Result<ExperimentArtifacts> {
    match cfg.online_segments.as_slice() {
        [seg] if seg.length == cfg.offline_length => {}
        _ => {
            return Err(SetError::Config(
                "comparison needs exactly one online segment as long as the offline segment".into(),
            ))
        }
    }
    let scenario = Scenario::from_config(cfg)?;
    let data = ExperimentData::generate(cfg, &scenario)?;
    let refined = refined_run(cfg, &scenario, &data)?;
    let pooled = LabeledRun::execute(
        LABEL_POOLED,
        &scenario.problem(cfg, scenario.noise.clone()),
        &data,
        data.all(),
        &[],
        scenario.first_free_id(),
    )?;
    let widths = compare_widths(
        (LABEL_REFINED, &refined.reach_sets()[1..]),
        (LABEL_POOLED, &pooled.reach_sets()[1..]),
        1,
        cfg.samples_per_set,
        cfg.seed,
    )?;
    Ok(ExperimentArtifacts {
        config: cfg.clone(),
        scenario,
        data,
        runs: vec![refined, pooled],
        widths: Some(widths),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentArtifacts> {
    match cfg.kind {
        ExperimentKind::Refinement => run_experiment_1(cfg),
        ExperimentKind::Comparison => run_experiment_2(cfg),
    }
}
