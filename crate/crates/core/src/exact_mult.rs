//! Dependency-preserving product of a matrix set and a vector set.

use nalgebra::DMatrix;

use crate::error::{Result, SetError};
use crate::exponents::ExponentMatrix;
use crate::ids::merge_id_lists;
use crate::linalg;
use crate::matrix::ConstrainedPolyMatZonotope;
use crate::sets::ConstrainedPolyZonotope;

/// Brings a matrix set and a vector set onto the id list
/// `[Y ids, P ids not in Y]`.
pub fn merge_id_mixed(
    y: &ConstrainedPolyMatZonotope,
    p: &ConstrainedPolyZonotope,
) -> (ConstrainedPolyMatZonotope, ConstrainedPolyZonotope) {
    let merged = merge_id_lists(y.ids(), p.ids());
    (y.with_ids(&merged), p.with_ids(&merged))
}

/// `{ Y x | Y in y, x in p }` with shared factors evaluated jointly.
///
/// Generator layout: `G_Y^i c_P` for each `i`, then `C_Y G_P`, then the
/// cross terms `G_Y^i G_P(:,j)` with `j` running fastest.
pub fn exact_multiply(
    y: &ConstrainedPolyMatZonotope,
    p: &ConstrainedPolyZonotope,
) -> Result<ConstrainedPolyZonotope> {
    let (m, n) = y.shape();
    if n != p.dim() {
        return Err(SetError::dims("exact_multiply", format!("{m}x{n} times {n}"), p.dim()));
    }
    let (y, p) = merge_id_mixed(y, p);
    let rows = y.ids().len();
    let (hy, hp) = (y.num_generators(), p.num_generators());
    let cp = p.center();
    let gp = p.generators();

    let total = hy + hp + hy * hp;
    let mut generators = DMatrix::zeros(m, total);
    for (i, g) in y.generators().iter().enumerate() {
        generators.set_column(i, &(g * cp));
    }
    generators
        .view_mut((0, hy), (m, hp))
        .copy_from(&(y.center() * gp));
    for (i, g) in y.generators().iter().enumerate() {
        generators
            .view_mut((0, hy + hp + i * hp), (m, hp))
            .copy_from(&(g * gp));
    }

    let ey = y.exponents().as_slice();
    let ep = p.exponents().as_slice();
    let mut data = Vec::with_capacity(rows * total);
    data.extend_from_slice(ey);
    data.extend_from_slice(ep);
    for i in 0..hy {
        let col_y = &ey[i * rows..(i + 1) * rows];
        for j in 0..hp {
            let col_p = &ep[j * rows..(j + 1) * rows];
            data.extend(col_y.iter().zip(col_p).map(|(a, b)| a + b));
        }
    }
    let exponents = ExponentMatrix::from_column_major(rows, total, data);

    ConstrainedPolyZonotope::new(
        y.center() * cp,
        generators,
        exponents,
        linalg::block_diag(y.constraints(), p.constraints()),
        linalg::vstack(y.offset(), p.offset()),
        ExponentMatrix::hcat(rows, &[y.constraint_exponents(), p.constraint_exponents()]),
        y.ids().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{ids, FactorAssignment};
    use crate::matrix::{ConstrainedMatZonotope, MatrixZonotope};
    use nalgebra::DVector;

    fn model() -> ConstrainedPolyMatZonotope {
        let n = ConstrainedMatZonotope::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
            vec![
                DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]),
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, -1.0]),
            ],
            vec![DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 1.0)],
            DMatrix::from_element(1, 1, 0.5),
            ids(&[1, 5]),
        )
        .unwrap();
        ConstrainedPolyMatZonotope::from(&n)
    }

    fn vector_set() -> ConstrainedPolyZonotope {
        ConstrainedPolyZonotope::new(
            DVector::from_vec(vec![1.0, -1.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 2.0, 0.0]),
            ExponentMatrix::from_rows(&[vec![1, 2], vec![0, 1]]).unwrap(),
            DMatrix::from_row_slice(1, 1, &[2.0]),
            DVector::from_vec(vec![0.5]),
            ExponentMatrix::from_rows(&[vec![0], vec![1]]).unwrap(),
            ids(&[5, 2]),
        )
        .unwrap()
    }

    #[test]
    fn product_evaluates_as_product_of_evaluations() {
        let (y, p) = (model(), vector_set());
        let prod = exact_multiply(&y, &p).unwrap();
        assert_eq!(prod.ids(), ids(&[1, 5, 2]).as_slice());
        assert_eq!(prod.num_generators(), 2 + 2 + 4);
        for vals in [[0.3, -0.2, 0.9], [1.0, 1.0, -1.0], [0.0, 0.0, 0.0]] {
            let a = FactorAssignment::from_pairs(&ids(&[1, 5, 2]), &vals).unwrap();
            let ey = y.evaluate(&a).unwrap();
            let ep = p.evaluate(&a).unwrap();
            let ex = prod.evaluate(&a).unwrap();
            assert!((&ey.matrix * &ep.point - &ex.point).amax() < 1e-14);
            assert!((ey.residual.max(ep.residual) - ex.residual).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_generator_operands() {
        let y = ConstrainedPolyMatZonotope::from(
            &MatrixZonotope::new(DMatrix::identity(2, 2) * 3.0, vec![])
                .unwrap()
                .with_ids(vec![])
                .unwrap(),
        );
        let p = ConstrainedPolyZonotope::point(DVector::from_vec(vec![1.0, 2.0]));
        let prod = exact_multiply(&y, &p).unwrap();
        assert_eq!(prod.num_generators(), 0);
        assert_eq!(prod.center().as_slice(), &[3.0, 6.0]);
        let prod = exact_multiply(&model(), &p).unwrap();
        assert_eq!(prod.num_generators(), 2);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = ConstrainedPolyZonotope::point(DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(matches!(
            exact_multiply(&model(), &p),
            Err(SetError::DimensionMismatch { .. })
        ));
    }
}
