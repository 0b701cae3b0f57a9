use super::{Lu, Matrix};
use crate::error::{Error, Result};

/// Inverse of a low-rank update `A + U C V`, given `A⁻¹`.
///
/// Evaluates `A⁻¹ − A⁻¹U (C⁻¹ + V A⁻¹ U)⁻¹ V A⁻¹`, so only `k×k` systems are
/// solved for a rank-`k` update.
pub fn woodbury_inverse(a_inv: &Matrix, u: &Matrix, c: &Matrix, v: &Matrix) -> Result<Matrix> {
    let n = a_inv.rows();
    let k = c.rows();
    if !a_inv.is_square() || !c.is_square() {
        return Err(Error::dims("woodbury_inverse", "A⁻¹ and C must be square"));
    }
    if u.shape() != (n, k) || v.shape() != (k, n) {
        return Err(Error::dims(
            "woodbury_inverse",
            format!(
                "expected U {n}x{k} and V {k}x{n}, got U {}x{} and V {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            ),
        ));
    }
    let singular = |_| Error::Singular { op: "woodbury_inverse" };
    let c_inv = Lu::new(c).map_err(singular)?.inverse();
    let a_inv_u = a_inv.matmul(u)?;
    let v_a_inv = v.matmul(a_inv)?;
    let inner = c_inv.add(&v.matmul(&a_inv_u)?)?;
    let correction = Lu::new(&inner).map_err(singular)?.solve(&v_a_inv)?;
    a_inv.sub(&a_inv_u.matmul(&correction)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_update_leaves_inverse() {
        let a_inv = Matrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
        let u = Matrix::zeros(2, 1);
        let c = Matrix::identity(1);
        let v = Matrix::zeros(1, 2);
        assert_eq!(woodbury_inverse(&a_inv, &u, &c, &v).unwrap(), a_inv);
    }

    #[test]
    fn scalar_closed_form() {
        let one = Matrix::identity(1);
        let r = woodbury_inverse(&one, &one, &one, &one).unwrap();
        assert_eq!(r[(0, 0)], 0.5);
    }

    #[test]
    fn singular_inner_matrix() {
        // C⁻¹ + V A⁻¹ U = 1 + (-1) = 0
        let one = Matrix::identity(1);
        let minus = Matrix::diag(&[-1.0]);
        assert!(matches!(
            woodbury_inverse(&one, &one, &one, &minus),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::identity(3);
        let err = woodbury_inverse(&a, &Matrix::zeros(2, 1), &Matrix::identity(1), &Matrix::zeros(1, 3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }
}
