//! Acceptance suite. Runs every primary criterion, prints one line per
//! criterion and exits non-zero when any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cpzreach::data_driven::{
    model_set_from_data, noise_witness, predicted_generators, run_algorithm1, DataBatch, ReachOptions,
};
use cpzreach::exact_mult::exact_multiply;
use cpzreach::harness::experiments::{LABEL_OFFLINE, LABEL_REFINED};
use cpzreach::harness::{
    run_experiment_1, run_experiment_2, verify_run, ExperimentConfig, ExperimentData, Scenario,
};
use cpzreach::ids::ids;
use cpzreach::matrix::MEMBERSHIP_TOL;
use cpzreach::sets::SampleOptions;
use cpzreach::{ConstrainedMatZonotope, ConstrainedPolyZonotope, ExponentMatrix, FactorContext, MatrixZonotope, Zonotope};

mod common;
use common::{random_assignment, random_cmz, random_cpmz, random_cpz, random_matrix};

type Check = std::result::Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn exps(rows: &[Vec<u32>]) -> ExponentMatrix {
    ExponentMatrix::from_rows(rows).unwrap()
}

// ---------------------------------------------------------------- merge id

fn merge_id_golden() -> Check {
    let p1 = ConstrainedPolyZonotope::new(
        DVector::from_vec(vec![0.0, 2.0, 1.0]),
        mat(3, 2, &[0.0, 1.0, 3.0, 2.0, 1.0, 5.0]),
        exps(&[vec![4, 1], vec![0, 2]]),
        mat(3, 2, &[1.0, 2.0, 0.0, 0.0, 3.0, 4.0]),
        DVector::from_vec(vec![2.0, 0.0, 2.0]),
        exps(&[vec![4, 2], vec![0, 2]]),
        ids(&[1, 2]),
    )
    .map_err(err)?;
    let p2 = ConstrainedPolyZonotope::new(
        DVector::from_vec(vec![3.0, 3.0, 4.0]),
        mat(3, 2, &[2.0, 2.0, 3.0, 0.0, 1.0, 4.0]),
        exps(&[vec![3, 2], vec![3, 0]]),
        mat(2, 2, &[1.0, 3.0, 2.0, 4.0]),
        DVector::from_vec(vec![2.0, 5.0]),
        exps(&[vec![2, 0], vec![2, 3]]),
        ids(&[1, 3]),
    )
    .map_err(err)?;
    let (b1, b2) = p1.merge_id(&p2);
    let want_ids = ids(&[1, 2, 3]);
    ensure(b1.ids() == want_ids.as_slice() && b2.ids() == want_ids.as_slice(), || {
        format!("merged ids {:?} / {:?}", b1.ids(), b2.ids())
    })?;
    let checks = [
        ("E1", b1.exponents().to_rows(), vec![vec![4, 1], vec![0, 2], vec![0, 0]]),
        ("R1", b1.constraint_exponents().to_rows(), vec![vec![4, 2], vec![0, 2], vec![0, 0]]),
        ("E2", b2.exponents().to_rows(), vec![vec![3, 2], vec![0, 0], vec![3, 0]]),
        ("R2", b2.constraint_exponents().to_rows(), vec![vec![2, 0], vec![0, 0], vec![2, 3]]),
    ];
    for (name, got, want) in checks {
        ensure(got == want, || format!("{name}: got {got:?}, want {want:?}"))?;
    }
    ensure(
        b1.center() == p1.center()
            && b1.generators() == p1.generators()
            && b1.constraints() == p1.constraints()
            && b1.offset() == p1.offset()
            && b2.center() == p2.center()
            && b2.generators() == p2.generators()
            && b2.constraints() == p2.constraints()
            && b2.offset() == p2.offset(),
        || "numeric blocks changed".into(),
    )?;
    Ok("ids [1, 2, 3], all exponent blocks exact".into())
}

// ---------------------------------------------------- exact multiplication

fn exact_multiplication_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_point, mut worst_res) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let y = random_cpmz(&mut rng, m, n);
        let p = random_cpz(&mut rng, n);
        let prod = exact_multiply(&y, &p).map_err(err)?;
        for _ in 0..100 {
            let a = random_assignment(&mut rng);
            let ey = y.evaluate(&a).map_err(err)?;
            let ep = p.evaluate(&a).map_err(err)?;
            let e = prod.evaluate(&a).map_err(err)?;
            worst_point = worst_point.max((&e.point - &ey.matrix * &ep.point).amax());
            worst_res = worst_res.max((e.residual - ey.residual.max(ep.residual)).abs());
        }
    }
    ensure(worst_point <= 1e-9 && worst_res <= 1e-9, || {
        format!("point error {worst_point:.3e}, residual error {worst_res:.3e}")
    })?;
    Ok(format!("20000 evaluations, point error {worst_point:.1e}, residual error {worst_res:.1e}"))
}

// ---------------------------------------------------------- exact addition

fn exact_addition_homomorphism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let (p1, p2) = (random_cpz(&mut rng, n), random_cpz(&mut rng, n));
        let sum = p1.exact_add(&p2).map_err(err)?;
        let (m1, m2) = p1.merge_id(&p2);
        ensure(m1.ids() == m2.ids(), || "merge_id ids differ".into())?;
        for _ in 0..100 {
            let a = random_assignment(&mut rng);
            let (e1, e2) = (p1.evaluate(&a).map_err(err)?, p2.evaluate(&a).map_err(err)?);
            let es = sum.evaluate(&a).map_err(err)?;
            worst = worst.max((&es.point - (&e1.point + &e2.point)).amax());
            worst = worst.max((es.residual - e1.residual.max(e2.residual)).abs());
            for (orig, merged) in [(&e1, &m1), (&e2, &m2)] {
                let em = merged.evaluate(&a).map_err(err)?;
                worst = worst.max((&em.point - &orig.point).amax());
                worst = worst.max((em.residual - orig.residual).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("worst deviation {worst:.3e}"))?;
    Ok(format!("20000 evaluations, worst deviation {worst:.1e}"))
}

// ------------------------------------------------------------ intersection

fn interval_cmz(center: f64, radius: f64, ctx: &FactorContext) -> ConstrainedMatZonotope {
    MatrixZonotope::new(mat(1, 1, &[center]), vec![mat(1, 1, &[radius])])
        .unwrap()
        .to_cmz(ctx)
}

/// A second set sharing the point `x` with the first.
fn cmz_through(rng: &mut ChaCha8Rng, x: &DMatrix<f64>, ctx: &FactorContext) -> ConstrainedMatZonotope {
    let (m, n) = x.shape();
    let gens = rng.gen_range(1..=4);
    let generators: Vec<DMatrix<f64>> = (0..gens).map(|_| random_matrix(rng, m, n) * 0.5).collect();
    let beta: Vec<f64> = (0..gens).map(|_| rng.gen_range(-0.8..0.8)).collect();
    let mut center = x.clone();
    for (b, g) in beta.iter().zip(&generators) {
        center -= g * *b;
    }
    MatrixZonotope::new(center, generators).unwrap().to_cmz(ctx)
}

fn cmz_intersection() -> Check {
    let ctx = FactorContext::new();
    let opts = SampleOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let both = interval_cmz(0.0, 1.0, &ctx).intersect(&interval_cmz(1.0, 1.0, &ctx), &ctx).map_err(err)?;
    let pts = both.sample(4000, &mut rng, &opts).map_err(err)?;
    let lo = pts.iter().map(|m| m[(0, 0)]).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|m| m[(0, 0)]).fold(f64::NEG_INFINITY, f64::max);
    ensure(lo >= -1e-9 && hi <= 1.0 + 1e-9, || format!("interval hull [{lo}, {hi}] leaves [0, 1]"))?;
    ensure(lo.abs() <= 1e-6 && (hi - 1.0).abs() <= 1e-6, || format!("endpoints not attained: [{lo}, {hi}]"))?;

    let (mut sound, mut complete) = (0usize, 0usize);
    for _ in 0..50 {
        let shape = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let s1 = random_cmz(&mut rng, shape, &ctx);
        let anchor = s1.sample(1, &mut rng, &opts).map_err(err)?.remove(0);
        let s2 = cmz_through(&mut rng, &anchor, &ctx);
        let inter = s1.intersect(&s2, &ctx).map_err(err)?;
        for m in inter.sample(20, &mut rng, &opts).map_err(err)? {
            for parent in [&s1, &s2] {
                let r = parent.membership(&m, MEMBERSHIP_TOL).map_err(err)?;
                ensure(r.is_member, || format!("intersection sample outside a parent, residual {:.3e}", r.residual))?;
            }
            sound += 1;
        }
        let mut candidates = vec![anchor];
        candidates.extend(s1.sample(20, &mut rng, &opts).map_err(err)?);
        for m in candidates {
            if s2.membership(&m, MEMBERSHIP_TOL).map_err(err)?.is_member {
                let r = inter.membership(&m, MEMBERSHIP_TOL).map_err(err)?;
                ensure(r.is_member, || format!("common point missing from intersection, residual {:.3e}", r.residual))?;
                complete += 1;
            }
        }
    }
    Ok(format!(
        "interval hull [{lo:.2e}, {hi:.9}]; {sound} sound samples, {complete} common points recovered"
    ))
}

// ----------------------------------------------------------------- lemma 1

fn paper_system() -> (DMatrix<f64>, Scenario, ExperimentConfig) {
    let cfg = ExperimentConfig::experiment1();
    let scenario = Scenario::from_config(&cfg).unwrap();
    let truth = scenario.system.stacked();
    (truth, scenario, cfg)
}

fn lemma1_containment() -> Check {
    let (truth, scenario, mut cfg) = paper_system();
    cfg.offline_length = 60;
    cfg.online_segments.clear();
    cfg.data = Default::default();
    let mut worst_eval = 0.0f64;
    let mut worst_member = 0.0f64;
    for seed in 0..20 {
        cfg.seed = 100 + seed;
        let data = ExperimentData::generate(&cfg, &scenario).map_err(err)?;
        let m = model_set_from_data(&data.batch, &scenario.noise).map_err(err)?;
        let beta = noise_witness(&data.noise_factors);
        worst_eval = worst_eval.max((m.evaluate_aligned(&beta) - &truth).amax());
        let r = m.to_cmz(&FactorContext::new()).membership(&truth, MEMBERSHIP_TOL).map_err(err)?;
        ensure(r.is_member, || format!("seed {seed}: true model not a member, residual {:.3e}", r.residual))?;
        worst_member = worst_member.max(r.residual);
    }
    ensure(worst_eval <= 1e-6, || format!("recorded-noise witness off by {worst_eval:.3e}"))?;

    let noiseless = Zonotope::point(DVector::zeros(5));
    let data = ExperimentData::generate(&cfg, &scenario).map_err(err)?;
    let clean = DataBatch::new(
        &truth * data.batch.regressor(),
        data.batch.x_minus().clone(),
        data.batch.u_minus().clone(),
    )
    .map_err(err)?;
    let m = model_set_from_data(&clean, &noiseless).map_err(err)?;
    let control = (m.center() - &truth).amax();
    ensure(m.num_generators() == 0 && control <= 1e-10, || {
        format!("noiseless control off by {control:.3e} with {} generators", m.num_generators())
    })?;
    Ok(format!(
        "20 datasets, witness error {worst_eval:.1e}, membership residual {worst_member:.1e}, noiseless error {control:.1e}"
    ))
}

// ------------------------------------------------------------ experiment 1

fn experiment1_reproduction() -> Check {
    let cfg = ExperimentConfig::experiment1();
    ensure(cfg.horizon == 4, || format!("horizon {}", cfg.horizon))?;
    let art = run_experiment_1(&cfg).map_err(err)?;
    let mut lines = Vec::new();
    for label in [LABEL_REFINED, LABEL_OFFLINE] {
        let run = art.run(label).ok_or("missing run")?;
        let r = verify_run(run, &art.scenario, &art.data, 1000, cfg.seed).map_err(err)?;
        let worst = r
            .steps
            .iter()
            .map(|s| s.max_mismatch.max(s.max_residual).max(s.max_range_excess))
            .fold(0.0, f64::max);
        ensure(r.passed && r.steps.len() == 5, || format!("{label}: {} violations, worst {worst:.3e}", r.violations))?;
        lines.push(format!("{label} worst {worst:.1e}"));
    }
    Ok(format!("1000 trajectories, N = 4; {}", lines.join(", ")))
}

// -------------------------------------------------------------- refinement

fn refinement_membership() -> Check {
    let cfg = ExperimentConfig::experiment2();
    let art = run_experiment_2(&cfg).map_err(err)?;
    let run = art.run(LABEL_REFINED).ok_or("missing refined run")?;
    let truth = art.scenario.system.stacked();
    let ctx = FactorContext::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut events = 0;
    let mut worst = 0.0f64;
    for i in 1..run.run.models.len() {
        let refined = &run.run.models[i].model;
        let prev = &run.run.models[i - 1].model;
        let batch = art.data.batch.columns(run.model_data[i].clone()).map_err(err)?;
        let fresh = model_set_from_data(&batch, &run.noise).map_err(err)?.to_cmz(&ctx);
        let t = refined.membership(&truth, MEMBERSHIP_TOL).map_err(err)?;
        ensure(t.is_member, || format!("event {i}: true model residual {:.3e}", t.residual))?;
        for m in refined.sample(200, &mut rng, &SampleOptions::default()).map_err(err)? {
            for parent in [prev, &fresh] {
                let r = parent.membership(&m, MEMBERSHIP_TOL).map_err(err)?;
                ensure(r.is_member, || format!("event {i}: sample residual {:.3e}", r.residual))?;
                worst = worst.max(r.residual);
            }
        }
        events += 1;
    }
    ensure(events > 0, || "no refinement happened".into())?;
    Ok(format!("{events} refinement event(s), 200 samples each, worst parent residual {worst:.1e}"))
}

// ----------------------------------------------------------- experiment 2

fn experiment2_widths() -> Check {
    let cfg = ExperimentConfig::experiment2();
    let art = run_experiment_2(&cfg).map_err(err)?;
    let table = art.widths.as_ref().ok_or("no width table")?;
    let csv = table.to_csv();
    ensure(csv.lines().count() == table.rows.len() + 1, || "width CSV row count".into())?;
    let f = table.fraction_a_not_wider();
    ensure(f >= 0.6, || format!("refined not wider in {:.1}% of cells", 100.0 * f))?;
    Ok(format!("refined not wider in {:.1}% of {} cells", 100.0 * f, table.rows.len()))
}

// ------------------------------------------------------------------ shapes

fn shape_smoke_test() -> Check {
    let (_, scenario, mut cfg) = paper_system();
    cfg.horizon = 3;
    cfg.reach = ReachOptions { compact: false, ..ReachOptions::default() };
    let data = ExperimentData::generate(&cfg, &scenario).map_err(err)?;
    let problem = scenario.problem(&cfg, scenario.noise.clone());
    let offline = data.batch.columns(data.offline.clone()).map_err(err)?;
    let run = run_algorithm1(
        &problem,
        &offline,
        &data.online_chunks(cfg.horizon).map_err(err)?,
        FactorContext::starting_at(scenario.first_free_id()),
    )
    .map_err(err)?;
    let (gu, gw) = (scenario.input.num_generators(), scenario.noise.num_generators());
    let mut counts = Vec::new();
    for k in 0..cfg.horizon {
        let gamma = run.models[run.model_used[k]].model.num_generators();
        let h = run.reach_sets[k].num_generators();
        let want = predicted_generators(gamma, h, gu, gw);
        let got = run.reach_sets[k + 1].num_generators();
        ensure(got == want, || format!("step {}: {got} generators, recursion gives {want}", k + 1))?;
        counts.push(got);
    }

    let refined = run.refined_model();
    let prev = &run.models[0].model;
    let (m, n) = refined.shape();
    ensure(refined.num_constraint_rows() == prev.num_constraint_rows() + m * n, || {
        format!("refined model has {} constraint rows", refined.num_constraint_rows())
    })?;
    let ctx = FactorContext::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let shape = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (a, b) = (random_cmz(&mut rng, shape, &ctx), random_cmz(&mut rng, shape, &ctx));
        let c = a.intersect(&b, &ctx).map_err(err)?;
        let want = a.num_constraint_rows() + b.num_constraint_rows() + shape.0 * shape.1;
        ensure(c.num_constraint_rows() == want, || format!("{} rows, want {want}", c.num_constraint_rows()))?;
    }
    Ok(format!("generator counts {counts:?}; intersection rows match on 21 cases"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "merge-id golden example", budget: Duration::from_secs(1), run: merge_id_golden },
        Criterion { name: "exact multiplication oracle", budget: Duration::from_secs(30), run: exact_multiplication_oracle },
        Criterion { name: "exact addition homomorphism", budget: Duration::from_secs(30), run: exact_addition_homomorphism },
        Criterion { name: "matrix zonotope intersection", budget: Duration::from_secs(60), run: cmz_intersection },
        Criterion { name: "model set contains true model", budget: Duration::from_secs(60), run: lemma1_containment },
        Criterion { name: "experiment 1 witness check", budget: Duration::from_secs(120), run: experiment1_reproduction },
        Criterion { name: "refinement keeps parents' members", budget: Duration::from_secs(60), run: refinement_membership },
        Criterion { name: "experiment 2 width comparison", budget: Duration::from_secs(60), run: experiment2_widths },
        Criterion { name: "generator and constraint counts", budget: Duration::from_secs(60), run: shape_smoke_test },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > c.budget => Err(format!("{msg}; took {took:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS  {:<36} {took:>9.2?}  {msg}", c.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {:<36} {took:>9.2?}  {msg}", c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
