//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layout is given per
//! function. The plain-Rust versions (`*_points`) are what the wasm exports
//! wrap, so they can be tested natively.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use cpzreach::data_driven::ReachOptions;
use cpzreach::harness::experiments::{run_experiment_1, LABEL_OFFLINE, LABEL_REFINED};
use cpzreach::harness::ExperimentConfig;
use cpzreach::ids::ids;
use cpzreach::sets::{sample_cpz, SampleOptions};
use cpzreach::{ConstrainedPolyZonotope, ExponentMatrix, FactorContext, MatrixZonotope};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Samples of `[c1 - r1, c1 + r1]` intersected with `[c2 - r2, c2 + r2]`,
/// both as interval matrix zonotopes. Layout: `[lo, hi, x_0, x_1, ...]`
/// where `lo`/`hi` are the extreme sampled values.
pub fn interval_intersection_points(c1: f64, r1: f64, c2: f64, r2: f64, samples: usize, seed: u64) -> Result<Vec<f64>, String> {
    let ctx = FactorContext::new();
    let interval = |c: f64, r: f64| {
        MatrixZonotope::new(DMatrix::from_element(1, 1, c), vec![DMatrix::from_element(1, 1, r)])
            .map(|z| z.to_cmz(&ctx))
            .map_err(|e| e.to_string())
    };
    let both = interval(c1, r1)?.intersect(&interval(c2, r2)?, &ctx).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<f64> = both
        .sample(samples, &mut rng, &SampleOptions::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(|m| m[(0, 0)])
        .collect();
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = vec![lo, hi];
    out.extend(pts);
    Ok(out)
}

#[wasm_bindgen]
pub fn interval_intersection(c1: f64, r1: f64, c2: f64, r2: f64, samples: usize, seed: u64) -> Result<js_sys::Float64Array, JsValue> {
    let v = interval_intersection_points(c1, r1, c2, r2, samples, seed).map_err(js_err)?;
    Ok(js_sys::Float64Array::from(v.as_slice()))
}

/// Samples of the two-factor polynomial zonotope
/// `{ a1^e11 a2^e21 g1 + a1^e12 a2^e22 g2 }` with `g1 = (1, 0)`, `g2 = (0, 1)`
/// plus a coupling generator `(0.5, 0.5)` on `a1 a2`.
/// Layout: `[x_0, y_0, x_1, y_1, ...]`.
pub fn polynomial_zonotope_points(exponents: [u32; 4], samples: usize, seed: u64) -> Result<Vec<f64>, String> {
    let [e11, e12, e21, e22] = exponents;
    let e = ExponentMatrix::from_rows(&[vec![e11, e12, 1], vec![e21, e22, 1]]).map_err(|e| e.to_string())?;
    let g = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.5]);
    let p = ConstrainedPolyZonotope::polynomial(DVector::zeros(2), g, e, ids(&[1, 2])).map_err(|e| e.to_string())?;
    let pts = sample_cpz(&p, samples, seed).map_err(|e| e.to_string())?;
    Ok(pts.iter().flat_map(|x| [x[0], x[1]]).collect())
}

#[wasm_bindgen]
pub fn polynomial_zonotope(e11: u32, e12: u32, e21: u32, e22: u32, samples: usize, seed: u64) -> Result<js_sys::Float64Array, JsValue> {
    let v = polynomial_zonotope_points([e11, e12, e21, e22], samples, seed).map_err(js_err)?;
    Ok(js_sys::Float64Array::from(v.as_slice()))
}

/// Reachable sets of the built-in non-convex experiment, projected on the
/// one-based coordinates `(i, j)`. Layout: records of
/// `[run, k, x_i, x_j]` where `run` is 0 for the initial set, 1 for the
/// offline-only run and 2 for the refined run.
pub fn reach_projection_points(horizon: usize, i: usize, j: usize, samples: usize, seed: u64) -> Result<Vec<f64>, String> {
    if !(1..=5).contains(&i) || !(1..=5).contains(&j) || i == j {
        return Err(format!("coordinates ({i}, {j}) must be distinct and within 1..=5"));
    }
    if horizon == 0 || horizon > 3 {
        return Err("horizon must be between 1 and 3 in the browser".into());
    }
    let mut cfg = ExperimentConfig::experiment1();
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.reach = ReachOptions { compact: true, ..ReachOptions::default() };
    let art = run_experiment_1(&cfg).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let mut push = |run: f64, k: usize, set: &ConstrainedPolyZonotope, stream: u64| -> Result<(), String> {
        for x in sample_cpz(set, samples, seed.wrapping_add(stream)).map_err(|e| e.to_string())? {
            out.extend([run, k as f64, x[i - 1], x[j - 1]]);
        }
        Ok(())
    };
    push(0.0, 0, &art.scenario.initial, 0)?;
    for (run, label) in [(1.0, LABEL_OFFLINE), (2.0, LABEL_REFINED)] {
        let sets = art.run(label).ok_or("missing run")?.reach_sets();
        for (k, set) in sets.iter().enumerate().skip(1) {
            push(run, k, set, 100 * run as u64 + k as u64)?;
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn reach_projection(horizon: usize, i: usize, j: usize, samples: usize, seed: u64) -> Result<js_sys::Float64Array, JsValue> {
    let v = reach_projection_points(horizon, i, j, samples, seed).map_err(js_err)?;
    Ok(js_sys::Float64Array::from(v.as_slice()))
}
