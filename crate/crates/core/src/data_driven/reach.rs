use serde::{Deserialize, Serialize};

use crate::data_driven::model::{model_set_from_data, noise_witness, refine_model_set, DataBatch};
use crate::error::{Result, SetError};
use crate::exact_mult::exact_multiply;
use crate::ids::{FactorAssignment, FactorContext, FactorId};
use crate::matrix::{ConstrainedMatZonotope, ConstrainedPolyMatZonotope};
use crate::sets::{ConstrainedPolyZonotope, Zonotope};

pub const DEFAULT_GENERATOR_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReachOptions {
    /// Merge equal monomials and drop zero generators after every step.
    pub compact: bool,
    /// Upper bound on the generator count produced by a single product.
    pub max_generators: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            compact: false,
            max_generators: DEFAULT_GENERATOR_LIMIT,
        }
    }
}

/// Fresh factors introduced by one reach step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepFactors {
    pub input: Vec<FactorId>,
    pub noise: Vec<FactorId>,
}

/// Generator count of `reach_step`'s output before compaction.
pub fn predicted_generators(model_gens: usize, state_gens: usize, input_gens: usize, noise_gens: usize) -> usize {
    let h = state_gens + input_gens;
    model_gens + h * (1 + model_gens) + noise_gens
}

/// One propagation step: `model * (r_k x u_k) + z_w`, with the model's
/// factors kept and fresh factors for the input and the noise.
pub fn reach_step(
    model: &ConstrainedMatZonotope,
    r_k: &ConstrainedPolyZonotope,
    u_k: &Zonotope,
    z_w: &Zonotope,
    ctx: &FactorContext,
    opts: &ReachOptions,
) -> Result<(ConstrainedPolyZonotope, StepFactors)> {
    let (nx, cols) = model.shape();
    if r_k.dim() != nx || cols != nx + u_k.dim() || z_w.dim() != nx {
        return Err(SetError::dims(
            "reach_step",
            format!("model {nx}x{}", nx + u_k.dim()),
            format!("model {nx}x{cols}, state {}, noise {}", r_k.dim(), z_w.dim()),
        ));
    }
    let count = predicted_generators(
        model.num_generators(),
        r_k.num_generators(),
        u_k.num_generators(),
        z_w.num_generators(),
    );
    if count > opts.max_generators {
        return Err(SetError::GeneratorOverflow {
            count,
            limit: opts.max_generators,
        });
    }
    let before = ctx.peek_next();
    let joint = r_k.cartesian_product(u_k, ctx);
    let input: Vec<FactorId> = joint
        .ids()
        .iter()
        .copied()
        .filter(|id| id.get() >= before)
        .collect();
    let product = exact_multiply(&ConstrainedPolyMatZonotope::from(model), &joint)?;
    let noise = ConstrainedPolyZonotope::from_zonotope(z_w, ctx);
    let next = product.exact_add(&noise)?;
    let factors = StepFactors {
        input,
        noise: noise.ids().to_vec(),
    };
    Ok((if opts.compact { next.compact() } else { next }, factors))
}

/// Sets and data describing one reachability problem.
#[derive(Debug, Clone)]
pub struct ReachProblem {
    pub initial: ConstrainedPolyZonotope,
    pub input: Zonotope,
    pub noise: Zonotope,
    pub horizon: usize,
    pub options: ReachOptions,
}

/// A model set used by the run, with the step at which it was formed
/// (`None` for the offline model) and the number of data columns behind it.
#[derive(Debug, Clone)]
pub struct ModelRecord {
    pub step: Option<usize>,
    pub model: ConstrainedMatZonotope,
    pub data_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepMetrics {
    pub step: usize,
    pub model_index: usize,
    pub generators: usize,
    pub factors: usize,
    pub constraints: usize,
    /// Wall-clock time; left out of serialized output so files stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

/// State and history of one run of the online loop.
#[derive(Debug)]
pub struct ReachRun {
    pub models: Vec<ModelRecord>,
    /// `reach_sets[k]` is the set at step `k`; `reach_sets[0]` is the initial set.
    pub reach_sets: Vec<ConstrainedPolyZonotope>,
    pub step_factors: Vec<StepFactors>,
    /// Index into `models` of the model used for step `k -> k+1`.
    pub model_used: Vec<usize>,
    pub buffers: DataBatch,
    pub ctx: FactorContext,
    pub metrics: Vec<StepMetrics>,
}

impl ReachRun {
    pub fn refined_model(&self) -> &ConstrainedMatZonotope {
        &self.models.last().expect("a run always holds the offline model").model
    }

    pub fn refinement_steps(&self) -> Vec<usize> {
        self.models.iter().filter_map(|m| m.step).collect()
    }

    /// Factor values under which each model evaluates to the matrix that
    /// generated the data, given the recorded noise factors of each model's
    /// data (`segments[i][c]` for column `c` of model `i`'s batch).
    pub fn model_witnesses(&self, segments: &[Vec<Vec<f64>>]) -> Result<Vec<FactorAssignment>> {
        if segments.len() != self.models.len() {
            return Err(SetError::dims("model_witnesses segments", self.models.len(), segments.len()));
        }
        let mut out: Vec<FactorAssignment> = Vec::with_capacity(self.models.len());
        let mut prev: Vec<f64> = Vec::new();
        for (record, seg) in self.models.iter().zip(segments) {
            if seg.len() != record.data_len {
                return Err(SetError::dims("model_witnesses segment length", record.data_len, seg.len()));
            }
            let mut values = noise_witness(seg);
            values.extend_from_slice(&prev);
            let a = FactorAssignment::from_pairs(record.model.ids(), &values)?;
            prev = values;
            out.push(a);
        }
        Ok(out)
    }
}

#[cfg(not(target_arch = "wasm32"))]
fn stopwatch() -> impl FnOnce() -> f64 {
    let t = std::time::Instant::now();
    move || t.elapsed().as_secs_f64()
}

#[cfg(target_arch = "wasm32")]
fn stopwatch() -> impl FnOnce() -> f64 {
    || 0.0
}

/// Offline identification followed by `horizon` online steps. Before step
/// `k` the chunk `online[k]` (if any) is appended to the buffers; whenever the
/// buffered data has full row rank the model is refined and the buffers are
/// cleared. Every step propagates the reachable set with the current model.
pub fn run_algorithm1(
    problem: &ReachProblem,
    offline: &DataBatch,
    online: &[DataBatch],
    ctx: FactorContext,
) -> Result<ReachRun> {
    let noise = &problem.noise;
    let initial_model = model_set_from_data(offline, noise)?.to_cmz(&ctx);
    let mut run = ReachRun {
        models: vec![ModelRecord {
            step: None,
            model: initial_model,
            data_len: offline.len(),
        }],
        reach_sets: vec![problem.initial.clone()],
        step_factors: Vec::with_capacity(problem.horizon),
        model_used: Vec::with_capacity(problem.horizon),
        buffers: DataBatch::empty(offline.state_dim(), offline.input_dim()),
        ctx,
        metrics: Vec::with_capacity(problem.horizon),
    };

    for k in 0..problem.horizon {
        let elapsed = stopwatch();
        if let Some(chunk) = online.get(k) {
            run.buffers.append(chunk)?;
        }
        if !run.buffers.is_empty() && run.buffers.has_full_row_rank() {
            let fresh = model_set_from_data(&run.buffers, noise)?;
            let refined = refine_model_set(run.refined_model(), &fresh, &run.ctx)?;
            log::debug!("step {k}: refined model with {} columns", run.buffers.len());
            run.models.push(ModelRecord {
                step: Some(k),
                model: refined,
                data_len: run.buffers.len(),
            });
            run.buffers.clear();
        }
        let model_index = run.models.len() - 1;
        let (next, factors) = reach_step(
            &run.models[model_index].model,
            run.reach_sets.last().expect("non-empty"),
            &problem.input,
            noise,
            &run.ctx,
            &problem.options,
        )?;
        run.metrics.push(StepMetrics {
            step: k + 1,
            model_index,
            generators: next.num_generators(),
            factors: next.num_factors(),
            constraints: next.num_constraints(),
            seconds: elapsed(),
        });
        log::info!("step {}: {} generators, {} factors", k + 1, next.num_generators(), next.num_factors());
        run.reach_sets.push(next);
        run.step_factors.push(factors);
        run.model_used.push(model_index);
    }
    Ok(run)
}
