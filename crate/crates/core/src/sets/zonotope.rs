use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SetError};
use crate::linalg;

/// `<c, G> = { c + G a : a in [-1, 1]^gamma }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
}

impl Zonotope {
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() != center.len() {
            return Err(SetError::dims("Zonotope::new", center.len(), generators.nrows()));
        }
        Ok(Zonotope { center, generators })
    }

    pub fn point(center: DVector<f64>) -> Self {
        let n = center.len();
        Zonotope {
            center,
            generators: DMatrix::zeros(n, 0),
        }
    }

    /// Scalar interval `[center - radius, center + radius]`.
    pub fn interval(center: f64, radius: f64) -> Self {
        Zonotope {
            center: DVector::from_element(1, center),
            generators: DMatrix::from_element(1, 1, radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Zonotope {
            center: self.center.clone(),
            generators: &self.generators * factor,
        }
    }

    /// `c + G a`.
    pub fn evaluate(&self, factors: &[f64]) -> DVector<f64> {
        &self.center + &self.generators * DVector::from_column_slice(factors)
    }

    /// Minimum-norm factors reproducing `point`, with the max-norm of the
    /// reconstruction error. The factors may leave `[-1, 1]`, in which case
    /// `point` is not reached through this representation.
    pub fn factors_for(&self, point: &DVector<f64>) -> (Vec<f64>, f64) {
        let rhs = point - &self.center;
        let a = linalg::lstsq(&self.generators, &rhs);
        let err = (&self.generators * &a - rhs).amax();
        (a.iter().copied().collect(), err)
    }

    pub fn contains_origin_hint(&self) -> bool {
        let (a, err) = self.factors_for(&DVector::zeros(self.dim()));
        err <= 1e-12 && a.iter().all(|v| v.abs() <= 1.0 + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_for_recovers_coefficients() {
        let z = Zonotope::new(
            DVector::from_vec(vec![1.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]),
        )
        .unwrap();
        let p = z.evaluate(&[0.25, -0.75]);
        let (a, err) = z.factors_for(&p);
        assert!(err < 1e-14);
        assert!((a[0] - 0.25).abs() < 1e-14 && (a[1] + 0.75).abs() < 1e-14);
    }

    #[test]
    fn origin_check() {
        assert!(Zonotope::interval(0.0, 0.005).contains_origin_hint());
        assert!(!Zonotope::interval(10.0, 0.25).contains_origin_hint());
    }
}
