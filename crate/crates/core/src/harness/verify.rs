use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::harness::experiments::{ExperimentArtifacts, ExperimentData, LabeledRun, Scenario};
use crate::harness::system::simulate;
use crate::ids::{FactorAssignment, FactorId};
use crate::sets::Zonotope;

/// Largest mismatch, residual or factor-range excess a passing run may show.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCheck {
    pub k: usize,
    /// `max |R_k(witness) - x_k|_inf` over trials.
    pub max_mismatch: f64,
    pub max_residual: f64,
    /// How far the witness had to leave `[-1, 1]` before clamping.
    pub max_range_excess: f64,
}

impl StepCheck {
    fn worst(&self) -> f64 {
        self.max_mismatch.max(self.max_residual).max(self.max_range_excess)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub label: String,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub steps: Vec<StepCheck>,
    /// Number of (trial, step) pairs above tolerance.
    pub violations: usize,
    pub passed: bool,
}

/// Factor values of `bound` reproducing `w`: the recorded ones when the
/// pipeline used the true bound, otherwise the least-squares fit.
fn noise_factors(pipeline: &Zonotope, truth: &Zonotope, w: &DVector<f64>, recorded: &[f64]) -> Vec<f64> {
    if pipeline == truth {
        recorded.to_vec()
    } else {
        pipeline.factors_for(w).0
    }
}

/// Inserts `values` clamped to the box, returning the largest overshoot.
fn assign(a: &mut FactorAssignment, ids: &[FactorId], values: &[f64]) -> Result<f64> {
    let mut excess = 0.0f64;
    for (&id, &v) in ids.iter().zip(values) {
        excess = excess.max(v.abs() - 1.0);
        a.set(id, v.clamp(-1.0, 1.0))?;
    }
    Ok(excess)
}

/// Model factors making every model of `run` evaluate to the data-generating
/// matrix, with the largest box overshoot.
pub fn model_witness(run: &LabeledRun, data: &ExperimentData, truth: &Zonotope) -> Result<(FactorAssignment, f64)> {
    let segments: Vec<Vec<Vec<f64>>> = run
        .model_data
        .iter()
        .map(|r| {
            r.clone()
                .map(|t| noise_factors(&run.noise, truth, &data.noise[t], &data.noise_factors[t]))
                .collect()
        })
        .collect();
    let mut excess = 0.0f64;
    for seg in &segments {
        for col in seg {
            for v in col {
                excess = excess.max(v.abs() - 1.0);
            }
        }
    }
    let clamped: Vec<Vec<Vec<f64>>> = segments
        .iter()
        .map(|s| s.iter().map(|c| c.iter().map(|v| v.clamp(-1.0, 1.0)).collect()).collect())
        .collect();
    let mut all = FactorAssignment::new();
    for a in run.run.model_witnesses(&clamped)? {
        all.extend(&a);
    }
    Ok((all, excess))
}

/// Simulates `trials` trajectories of the true system from the initial set
/// and checks that each state is the evaluation of the matching reachable
/// set at the trajectory's witness.
pub fn verify_run(
    run: &LabeledRun,
    scenario: &Scenario,
    data: &ExperimentData,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let steps = run.reach_sets().len();
    let mut checks: Vec<StepCheck> = (0..steps)
        .map(|k| StepCheck {
            k,
            max_mismatch: 0.0,
            max_residual: 0.0,
            max_range_excess: 0.0,
        })
        .collect();
    if trials == 0 {
        return Ok(VerifyReport {
            label: run.label.clone(),
            trials,
            seed,
            tolerance: VERIFY_TOL,
            steps: Vec::new(),
            violations: 0,
            passed: true,
        });
    }
    let (models, model_excess) = model_witness(run, data, &scenario.noise)?;

    let trial = |t: usize| -> Result<Vec<StepCheck>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let x0 = scenario.sample_initial(&mut rng)?;
        let traj = simulate(&scenario.system, &x0, steps - 1, &scenario.input, &scenario.noise, true, &mut rng)?;
        let wit = traj.witness.as_ref().expect("recorded");
        let mut a = models.clone();
        let mut excess = model_excess.max(assign(&mut a, run.reach_sets()[0].ids(), &x0.factors)?);
        let mut out = Vec::with_capacity(steps);
        for k in 0..steps {
            if k > 0 {
                let f = &run.run.step_factors[k - 1];
                excess = excess.max(assign(&mut a, &f.input, &wit.inputs[k - 1])?);
                let w = noise_factors(&run.noise, &scenario.noise, &traj.noise[k - 1], &wit.noise[k - 1]);
                excess = excess.max(assign(&mut a, &f.noise, &w)?);
            }
            let e = run.reach_sets()[k].evaluate(&a)?;
            out.push(StepCheck {
                k,
                max_mismatch: (e.point - &traj.states[k]).amax(),
                max_residual: e.residual,
                max_range_excess: excess.max(0.0),
            });
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Vec<StepCheck>> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(trial).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Vec<StepCheck>> = (0..trials).map(trial).collect::<Result<_>>()?;

    let mut violations = 0;
    for per_trial in &results {
        for (c, s) in checks.iter_mut().zip(per_trial) {
            c.max_mismatch = c.max_mismatch.max(s.max_mismatch);
            c.max_residual = c.max_residual.max(s.max_residual);
            c.max_range_excess = c.max_range_excess.max(s.max_range_excess);
            if s.worst() > VERIFY_TOL {
                violations += 1;
            }
        }
    }
    Ok(VerifyReport {
        label: run.label.clone(),
        trials,
        seed,
        tolerance: VERIFY_TOL,
        steps: checks,
        violations,
        passed: violations == 0,
    })
}

/// Reruns the refined pipeline of `art` with the noise bound scaled by
/// `factor` (below one, so the bound no longer covers the true noise) and
/// verifies it against the true system.
pub fn negative_control(art: &ExperimentArtifacts, factor: f64, trials: usize, seed: u64) -> Result<VerifyReport> {
    let cfg = &art.config;
    let scenario = &art.scenario;
    let problem = scenario.problem(cfg, scenario.noise.scaled(factor));
    let run = LabeledRun::execute(
        "R_hat_shrunk_noise",
        &problem,
        &art.data,
        art.data.offline.clone(),
        &art.data.online_chunks(cfg.horizon)?,
        scenario.first_free_id(),
    )?;
    verify_run(&run, scenario, &art.data, trials, seed)
}
