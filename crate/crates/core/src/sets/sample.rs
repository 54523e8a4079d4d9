//! Drawing feasible factor values and points from constrained sets.
//!
//! Linear constraints (every constraint monomial of degree at most one) are
//! handled exactly: the feasible factors form the polytope
//! `{a in [-1,1]^d : A a = b}`, which is explored by hit-and-run from a
//! bounded-least-squares starting point. Higher-degree constraints fall back
//! to random restarts projected by Gauss-Newton and accepted only when the
//! residual is below [`RESIDUAL_TOL`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SetError};
use crate::exponents::monomial;
use crate::linalg;
use crate::sets::ConstrainedPolyZonotope;

/// Largest constraint residual a returned sample may have.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Feasibility tolerance for the starting point, relative to `1 + |b|_inf`.
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    /// Share of samples pushed to the boundary: unconstrained factors at
    /// `+-1`, constrained factors at the end of a random chord.
    pub extreme_fraction: f64,
    /// Hit-and-run steps between consecutive samples.
    pub thin: usize,
    /// Attempts per sample in the higher-degree fallback.
    pub max_attempts: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            extreme_fraction: 0.25,
            thin: 3,
            max_attempts: 200,
        }
    }
}

/// Hit-and-run walker over `{x in [-1,1]^d : A x = b}`.
#[derive(Debug, Clone)]
pub struct PolytopeSampler {
    a: DMatrix<f64>,
    b: DVector<f64>,
    a_pinv: DMatrix<f64>,
    row_basis: DMatrix<f64>,
    x: DVector<f64>,
}

impl PolytopeSampler {
    /// Finds a feasible point and burns in. Fails with
    /// [`SetError::Infeasible`] when no box point satisfies the equalities.
    pub fn new<R: Rng + ?Sized>(a: &DMatrix<f64>, b: &DVector<f64>, rng: &mut R) -> Result<Self> {
        let d = a.ncols();
        let sol = linalg::bounded_least_squares(a, b, -1.0, 1.0, 1e-14, 10_000);
        let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if a.nrows() > 0 && sol.residual_inf() > FEASIBILITY_TOL * scale {
            return Err(SetError::Infeasible {
                residual: sol.residual_inf(),
            });
        }
        let mut sampler = PolytopeSampler {
            a: a.clone(),
            b: b.clone(),
            a_pinv: linalg::pseudo_inverse(a),
            row_basis: linalg::row_space_basis(a),
            x: sol.x,
        };
        for _ in 0..(10 * d + 50) {
            sampler.step(rng);
        }
        Ok(sampler)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Dimension of the affine hull the walker moves in.
    pub fn free_dim(&self) -> usize {
        self.dim() - self.row_basis.ncols()
    }

    pub fn current(&self) -> &DVector<f64> {
        &self.x
    }

    fn direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<DVector<f64>> {
        if self.free_dim() == 0 {
            return None;
        }
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let d = &z - &self.row_basis * (self.row_basis.transpose() * &z);
        let norm = d.norm();
        (norm > 1e-12).then(|| d / norm)
    }

    /// Feasible step interval `[t_lo, t_hi]` along `d`.
    fn chord(&self, d: &DVector<f64>) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (xi, di) in self.x.iter().zip(d.iter()) {
            if di.abs() < 1e-14 {
                continue;
            }
            let a = (-1.0 - xi) / di;
            let b = (1.0 - xi) / di;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        if hi < lo {
            (0.0, 0.0)
        } else {
            (lo.min(0.0), hi.max(0.0))
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let Some(d) = self.direction(rng) else { return };
        let (lo, hi) = self.chord(&d);
        if hi - lo <= 0.0 {
            return;
        }
        let t = rng.gen_range(lo..=hi);
        let moved = &self.x + d * t;
        self.x = self.repair(moved);
    }

    /// Pulls a point back onto `A x = b` and into the box, undoing the
    /// rounding drift of a step.
    fn repair(&self, mut x: DVector<f64>) -> DVector<f64> {
        x.apply(|v| *v = v.clamp(-1.0, 1.0));
        if self.a.nrows() > 0 {
            let r = &self.a * &x - &self.b;
            x -= &self.a_pinv * r;
            x.apply(|v| *v = v.clamp(-1.0, 1.0));
        }
        x
    }

    /// A boundary point on a random chord through the current point; the
    /// walker itself does not move.
    pub fn extreme<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let Some(d) = self.direction(rng) else {
            return self.x.clone();
        };
        let (lo, hi) = self.chord(&d);
        let t = if rng.gen_bool(0.5) { lo } else { hi };
        self.repair(&self.x + d * t)
    }
}

/// Linear view of a CPZ's constraints when all constraint monomials have
/// degree at most one.
struct LinearConstraints {
    /// Factor positions (into `ids()`) that appear in some constraint.
    factors: Vec<usize>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

fn linear_constraints(p: &ConstrainedPolyZonotope) -> Option<LinearConstraints> {
    let r = p.constraint_exponents();
    let a = p.constraints();
    let mut b = p.offset().clone();
    let mut factors: Vec<usize> = Vec::new();
    let mut columns: Vec<(usize, usize)> = Vec::new(); // (A column, factor slot)
    for j in 0..r.cols() {
        let degree: u32 = r.column(j).iter().sum();
        match degree {
            0 => b -= a.column(j),
            1 => {
                let k = r.unit_row(j)?;
                let slot = match factors.iter().position(|&f| f == k) {
                    Some(s) => s,
                    None => {
                        factors.push(k);
                        factors.len() - 1
                    }
                };
                columns.push((j, slot));
            }
            _ => return None,
        }
    }
    let mut lin = DMatrix::zeros(p.num_constraints(), factors.len());
    for (j, slot) in columns {
        let mut col = lin.column_mut(slot);
        col += a.column(j);
    }
    Some(LinearConstraints { factors, a: lin, b })
}

/// Draws `n` feasible factor vectors (aligned with `p.ids()`).
pub fn sample_factors<R: Rng + ?Sized>(
    p: &ConstrainedPolyZonotope,
    n: usize,
    rng: &mut R,
    opts: &SampleOptions,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let np = p.num_factors();
    let free_value = |rng: &mut R, extreme: bool| -> f64 {
        if extreme {
            if rng.gen_bool(0.5) {
                1.0
            } else {
                -1.0
            }
        } else {
            rng.gen_range(-1.0..=1.0)
        }
    };

    if !p.is_constrained() {
        return Ok((0..n)
            .map(|_| {
                let extreme = rng.gen_bool(opts.extreme_fraction);
                (0..np).map(|_| free_value(rng, extreme)).collect()
            })
            .collect());
    }

    match linear_constraints(p) {
        Some(lin) => {
            let mut walker = PolytopeSampler::new(&lin.a, &lin.b, rng)?;
            let mut constrained = vec![false; np];
            for &k in &lin.factors {
                constrained[k] = true;
            }
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                for _ in 0..opts.thin.max(1) {
                    walker.step(rng);
                }
                let extreme = rng.gen_bool(opts.extreme_fraction);
                let inner = if extreme {
                    walker.extreme(rng)
                } else {
                    walker.current().clone()
                };
                let mut alpha: Vec<f64> = (0..np)
                    .map(|k| if constrained[k] { 0.0 } else { free_value(rng, extreme) })
                    .collect();
                for (slot, &k) in lin.factors.iter().enumerate() {
                    alpha[k] = inner[slot];
                }
                out.push(alpha);
            }
            Ok(out)
        }
        None => sample_polynomial_constraints(p, n, rng, opts),
    }
}

fn sample_polynomial_constraints<R: Rng + ?Sized>(
    p: &ConstrainedPolyZonotope,
    n: usize,
    rng: &mut R,
    opts: &SampleOptions,
) -> Result<Vec<Vec<f64>>> {
    let np = p.num_factors();
    let mut out = Vec::with_capacity(n);
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let mut accepted = None;
        for _ in 0..opts.max_attempts {
            let start: Vec<f64> = (0..np).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let alpha = gauss_newton_project(p, start);
            let res = p.constraint_residual_aligned(&alpha);
            best = best.min(res);
            if res <= RESIDUAL_TOL * 1e-2 {
                accepted = Some(alpha);
                break;
            }
        }
        match accepted {
            Some(a) => out.push(a),
            None => return Err(SetError::Infeasible { residual: best }),
        }
    }
    Ok(out)
}

/// Projected Gauss-Newton on the constraint residual, staying in the box.
fn gauss_newton_project(p: &ConstrainedPolyZonotope, mut alpha: Vec<f64>) -> Vec<f64> {
    let r = p.constraint_exponents();
    let a = p.constraints();
    let np = alpha.len();
    for _ in 0..60 {
        let terms = DVector::from_vec(r.monomials(&alpha));
        let residual = a * &terms - p.offset();
        if residual.amax() <= RESIDUAL_TOL * 1e-3 {
            break;
        }
        // d(term_j)/d(alpha_k)
        let mut dterms = DMatrix::zeros(r.cols(), np);
        for j in 0..r.cols() {
            let col = r.column(j);
            for k in 0..np {
                if col[k] == 0 {
                    continue;
                }
                let mut e = col.to_vec();
                e[k] -= 1;
                dterms[(j, k)] = col[k] as f64 * monomial(&e, &alpha);
            }
        }
        let jac = a * dterms;
        let delta = linalg::lstsq(&jac, &residual);
        for k in 0..np {
            alpha[k] = (alpha[k] - delta[k]).clamp(-1.0, 1.0);
        }
    }
    alpha
}

/// `n` points of `p` drawn with default options from a seeded generator.
pub fn sample_cpz(p: &ConstrainedPolyZonotope, n: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_cpz_with(p, n, &mut rng, &SampleOptions::default())
}

/// Points of `p`, each with constraint residual at most [`RESIDUAL_TOL`].
pub fn sample_cpz_with<R: Rng + ?Sized>(
    p: &ConstrainedPolyZonotope,
    n: usize,
    rng: &mut R,
    opts: &SampleOptions,
) -> Result<Vec<DVector<f64>>> {
    let factors = sample_factors(p, n, rng, opts)?;
    let mut out = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for alpha in factors {
        let e = p.evaluate_aligned(&alpha);
        worst = worst.max(e.residual);
        if e.residual <= RESIDUAL_TOL {
            out.push(e.point);
        }
    }
    if out.len() < n {
        return Err(SetError::Infeasible { residual: worst });
    }
    Ok(out)
}
