use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cpzreach::data_driven::{model_set_from_data, run_algorithm1, DataBatch, ReachOptions, ReachProblem};
use cpzreach::exact_mult::exact_multiply;
use cpzreach::harness::{ExperimentConfig, ExperimentData, Scenario};
use cpzreach::sets::sample_cpz;
use cpzreach::{
    ConstrainedPolyMatZonotope, ConstrainedPolyZonotope, ConstrainedZonotope, ExponentMatrix, FactorAssignment,
    FactorContext, Zonotope,
};

mod common;
use common::{random_assignment, random_cmz, random_cpmz, random_cpz};

fn zonotope(n: usize, gens: usize) -> impl Strategy<Value = Zonotope> {
    (
        prop::collection::vec(-5.0f64..5.0, n),
        prop::collection::vec(-2.0f64..2.0, n * gens),
    )
        .prop_map(move |(c, g)| {
            Zonotope::new(DVector::from_vec(c), DMatrix::from_vec(n, gens, g)).unwrap()
        })
}

fn degree_one(e: &ExponentMatrix) -> bool {
    e.columns().all(|c| c.iter().sum::<u32>() == 1 && c.iter().all(|&v| v <= 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_id_keeps_values(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let (p1, p2) = (random_cpz(&mut rng, n), random_cpz(&mut rng, n));
        let (m1, m2) = p1.merge_id(&p2);
        prop_assert_eq!(m1.ids(), m2.ids());
        for _ in 0..20 {
            let a = random_assignment(&mut rng);
            prop_assert_eq!(m1.evaluate(&a).unwrap(), p1.evaluate(&a).unwrap());
            // Reordered factor rows change the multiplication order.
            let (e, f) = (m2.evaluate(&a).unwrap(), p2.evaluate(&a).unwrap());
            prop_assert!((e.point - f.point).amax() <= 1e-12 && (e.residual - f.residual).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_add_is_pointwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let (p1, p2) = (random_cpz(&mut rng, n), random_cpz(&mut rng, n));
        let s = p1.exact_add(&p2).unwrap();
        for _ in 0..100 {
            let a = random_assignment(&mut rng);
            let (e1, e2, es) = (p1.evaluate(&a).unwrap(), p2.evaluate(&a).unwrap(), s.evaluate(&a).unwrap());
            prop_assert!((&es.point - (&e1.point + &e2.point)).amax() <= 1e-12);
            prop_assert!((es.residual - e1.residual.max(e2.residual)).abs() <= 1e-12);
        }
    }

    #[test]
    fn zonotope_lift_round_trip(z in zonotope(3, 4), alpha in prop::collection::vec(-1.0f64..=1.0, 4)) {
        let p = ConstrainedPolyZonotope::from_zonotope(&z, &FactorContext::new());
        let e = p.evaluate_aligned(&alpha);
        let direct = z.center() + z.generators() * DVector::from_vec(alpha);
        prop_assert!((e.point - direct).amax() <= 1e-12);
        prop_assert_eq!(e.residual, 0.0);
    }

    #[test]
    fn enclosure_holds_samples(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let p = random_cpz(&mut rng, n);
        let p = ConstrainedPolyZonotope::polynomial(
            p.center().clone(),
            p.generators().clone(),
            p.exponents().clone(),
            p.ids().to_vec(),
        )
        .unwrap();
        let (lo, hi) = p.interval_enclosure();
        for x in sample_cpz(&p, 50, seed).unwrap() {
            for i in 0..n {
                prop_assert!(x[i] >= lo[i] - 1e-12 && x[i] <= hi[i] + 1e-12);
            }
        }
    }

    #[test]
    fn constrained_enclosure_holds_samples(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = rng.gen_range(2..=4);
        let g = DMatrix::from_fn(2, gens, |_, _| rng.gen_range(-1.0..1.0));
        let a = DMatrix::from_fn(1, gens, |_, _| rng.gen_range(-1.0..1.0));
        let x0: Vec<f64> = (0..gens).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let b = &a * DVector::from_vec(x0);
        let cz = ConstrainedZonotope::new(DVector::zeros(2), g, a, b, FactorContext::new().allocate(gens)).unwrap();
        let p = cz.to_cpz();
        let (lo, hi) = p.interval_enclosure();
        for x in sample_cpz(&p, 50, seed).unwrap() {
            for i in 0..2 {
                prop_assert!(x[i] >= lo[i] - 1e-12 && x[i] <= hi[i] + 1e-12);
            }
        }
    }

    #[test]
    fn cmz_lift_evaluates_identically(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = FactorContext::new();
        let shape = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let cmz = random_cmz(&mut rng, shape, &ctx);
        let cpmz = ConstrainedPolyMatZonotope::from(&cmz);
        prop_assert_eq!(cpmz.ids(), cmz.ids());
        for _ in 0..20 {
            let alpha: Vec<f64> = (0..cmz.num_generators()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let (a, b) = (cmz.evaluate_aligned(&alpha), cpmz.evaluate_aligned(&alpha));
            prop_assert!((&a.matrix - &b.matrix).amax() <= 1e-12);
            prop_assert!((a.residual - b.residual).abs() <= 1e-12);
        }
    }

    #[test]
    fn intersection_shape(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = FactorContext::new();
        let shape = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (a, b) = (random_cmz(&mut rng, shape, &ctx), random_cmz(&mut rng, shape, &ctx));
        let c = a.intersect(&b, &ctx).unwrap();
        prop_assert_eq!(c.num_generators(), a.num_generators() + b.num_generators());
        prop_assert_eq!(
            c.num_constraint_rows(),
            a.num_constraint_rows() + b.num_constraint_rows() + shape.0 * shape.1
        );
    }

    #[test]
    fn product_shape_and_feasibility(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let y = random_cpmz(&mut rng, m, n);
        let p = random_cpz(&mut rng, n);
        let yp = exact_multiply(&y, &p).unwrap();
        let (gy, hp) = (y.num_generators(), p.num_generators());
        prop_assert_eq!(yp.num_generators(), gy + hp + gy * hp);
        prop_assert_eq!(yp.num_constraint_terms(), y.constraints().ncols() + p.num_constraint_terms());
        for _ in 0..50 {
            let a = random_assignment(&mut rng);
            let (ry, rp) = (y.evaluate(&a).unwrap().residual, p.evaluate(&a).unwrap().residual);
            let r = yp.evaluate(&a).unwrap().residual;
            prop_assert_eq!(r <= 1e-9, ry <= 1e-9 && rp <= 1e-9);
        }
    }

    #[test]
    fn product_keeps_degree_one_constraints(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = FactorContext::new();
        let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let y = ConstrainedPolyMatZonotope::from(&random_cmz(&mut rng, (m, n), &ctx));
        let gens = rng.gen_range(1..=3);
        let g = DMatrix::from_fn(n, gens, |_, _| rng.gen_range(-1.0..1.0));
        let a = DMatrix::from_fn(1, gens, |_, _| rng.gen_range(-1.0..1.0));
        let b = DVector::from_element(1, 0.0);
        let p = ConstrainedZonotope::new(DVector::zeros(n), g, a, b, ctx.allocate(gens)).unwrap().to_cpz();
        let yp = exact_multiply(&y, &p).unwrap();
        prop_assert!(degree_one(yp.constraint_exponents()));
    }
}

fn small_problem(horizon: usize) -> (Scenario, ExperimentConfig, ExperimentData) {
    let mut cfg = ExperimentConfig::experiment1();
    cfg.horizon = horizon;
    let scenario = Scenario::from_config(&cfg).unwrap();
    let data = ExperimentData::generate(&cfg, &scenario).unwrap();
    (scenario, cfg, data)
}

#[test]
fn pipeline_constraints_stay_degree_one() {
    let (scenario, mut cfg, data) = small_problem(3);
    cfg.reach = ReachOptions { compact: false, ..ReachOptions::default() };
    let problem = scenario.problem(&cfg, scenario.noise.clone());
    let offline = data.batch.columns(data.offline.clone()).unwrap();
    let run = run_algorithm1(
        &problem,
        &offline,
        &data.online_chunks(cfg.horizon).unwrap(),
        FactorContext::starting_at(scenario.first_free_id()),
    )
    .unwrap();
    for set in &run.reach_sets[1..] {
        assert!(set.is_constrained());
        assert!(degree_one(set.constraint_exponents()));
    }
}

#[test]
fn refinement_waits_for_full_rank() {
    let (scenario, cfg, data) = small_problem(3);
    let problem = ReachProblem {
        horizon: 3,
        ..scenario.problem(&cfg, scenario.noise.clone())
    };
    let offline = data.batch.columns(data.offline.clone()).unwrap();
    let (nx, nu) = (offline.state_dim(), offline.input_dim());
    let online = data.batch.columns(data.online[0].1.clone()).unwrap();
    let chunks = vec![
        online.columns(0..3).unwrap(),
        online.columns(3..5).unwrap(),
        online.columns(5..6).unwrap(),
    ];
    let run = run_algorithm1(&problem, &offline, &chunks, FactorContext::starting_at(scenario.first_free_id())).unwrap();
    assert_eq!(run.refinement_steps(), vec![2]);
    assert_eq!(run.model_used, vec![0, 0, 1]);
    assert_eq!(run.models[1].data_len, nx + nu);

    let thin = DataBatch::empty(nx, nu);
    let none = run_algorithm1(&problem, &offline, &[thin], FactorContext::starting_at(scenario.first_free_id())).unwrap();
    assert!(none.refinement_steps().is_empty());
}

#[test]
fn rank_deficient_data_is_rejected() {
    let (scenario, _, data) = small_problem(1);
    let short = data.batch.columns(0..4).unwrap();
    assert!(!short.has_full_row_rank());
    let e = model_set_from_data(&short, &scenario.noise).unwrap_err();
    assert!(matches!(e, cpzreach::SetError::RankDeficient { rank: 4, required: 6 }), "{e}");
}

#[test]
fn witness_assignment_reproduces_states() {
    let (scenario, cfg, data) = small_problem(2);
    let art = cpzreach::harness::run_experiment_1(&cfg).unwrap();
    for run in &art.runs {
        let r = cpzreach::harness::verify_run(run, &scenario, &data, 50, 9).unwrap();
        assert!(r.passed, "{r:?}");
    }
    let mut a = FactorAssignment::new();
    for (id, v) in art.scenario.initial.ids().iter().zip([0.5, -0.25, 0.0, 1.0, -1.0]) {
        a.set(*id, v).unwrap();
    }
    assert_eq!(art.scenario.initial.evaluate(&a).unwrap().residual, 0.0);
}
