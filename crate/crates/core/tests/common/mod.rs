//! Random set builders shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cpzreach::ids::ids;
use cpzreach::{
    ConstrainedMatZonotope, ConstrainedPolyMatZonotope, ConstrainedPolyZonotope, ExponentMatrix,
    FactorAssignment, FactorContext, FactorId, MatrixZonotope,
};

pub const ID_POOL: u64 = 6;

pub fn random_ids(rng: &mut ChaCha8Rng, max: usize) -> Vec<FactorId> {
    let mut pool: Vec<u64> = (1..=ID_POOL).collect();
    let k = rng.gen_range(0..=max.min(pool.len()));
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let i = rng.gen_range(0..pool.len());
        out.push(pool.swap_remove(i));
    }
    ids(&out)
}

pub fn random_exponents(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ExponentMatrix {
    ExponentMatrix::from_columns(rows, (0..cols).map(|_| (0..rows).map(|_| rng.gen_range(0..=3)).collect()))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-2.0..2.0))
}

pub fn random_constraints(
    rng: &mut ChaCha8Rng,
    p: usize,
) -> (DMatrix<f64>, DVector<f64>, ExponentMatrix) {
    if p == 0 || rng.gen_bool(0.5) {
        return (DMatrix::zeros(0, 0), DVector::zeros(0), ExponentMatrix::zeros(p, 0));
    }
    let (m, q) = (rng.gen_range(1..=3), rng.gen_range(1..=4));
    let b = DVector::from_fn(m, |_, _| rng.gen_range(-2.0..2.0));
    (random_matrix(rng, m, q), b, random_exponents(rng, p, q))
}

pub fn random_cpz(rng: &mut ChaCha8Rng, n: usize) -> ConstrainedPolyZonotope {
    let id = random_ids(rng, 4);
    let p = id.len();
    let h = if p == 0 { 0 } else { rng.gen_range(0..=5) };
    let (a, b, r) = random_constraints(rng, p);
    ConstrainedPolyZonotope::new(
        DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0)),
        random_matrix(rng, n, h),
        random_exponents(rng, p, h),
        a,
        b,
        r,
        id,
    )
    .expect("consistent random CPZ")
}

pub fn random_cpmz(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ConstrainedPolyMatZonotope {
    let id = random_ids(rng, 4);
    let p = id.len();
    let h = if p == 0 { 0 } else { rng.gen_range(0..=5) };
    let (a, b, r) = random_constraints(rng, p);
    ConstrainedPolyMatZonotope::new(
        random_matrix(rng, m, n),
        (0..h).map(|_| random_matrix(rng, m, n)).collect(),
        random_exponents(rng, p, h),
        a,
        b,
        r,
        id,
    )
    .expect("consistent random CPMZ")
}

pub fn random_assignment(rng: &mut ChaCha8Rng) -> FactorAssignment {
    let all = ids(&(1..=ID_POOL).collect::<Vec<_>>());
    let values: Vec<f64> = (0..all.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    FactorAssignment::from_pairs(&all, &values).unwrap()
}

pub fn random_cmz(rng: &mut ChaCha8Rng, shape: (usize, usize), ctx: &FactorContext) -> ConstrainedMatZonotope {
    let (m, n) = shape;
    let gens = rng.gen_range(1..=4);
    let generators: Vec<DMatrix<f64>> = (0..gens).map(|_| random_matrix(rng, m, n) * 0.5).collect();
    let center = random_matrix(rng, m, n);
    let mz = MatrixZonotope::new(center.clone(), generators.clone()).unwrap();
    if rng.gen_bool(0.5) {
        return mz.to_cmz(ctx);
    }
    let (nc, na) = (1, rng.gen_range(1..=2));
    let blocks: Vec<DMatrix<f64>> = (0..gens).map(|_| random_matrix(rng, nc, na)).collect();
    let alpha0: Vec<f64> = (0..gens).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut offset = DMatrix::zeros(nc, na);
    for (a, blk) in alpha0.iter().zip(&blocks) {
        offset += blk * *a;
    }
    ConstrainedMatZonotope::new(center, generators, blocks, offset, ctx.allocate(gens)).unwrap()
}

