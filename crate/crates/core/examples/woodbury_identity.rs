//! Inverting a low-rank update of a matrix whose inverse is already known.

use enkf_lab::linalg::{solve_spd, woodbury_inverse, Matrix};

fn main() -> enkf_lab::Result<()> {
    let a = Matrix::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 0.5], &[0.0, 0.5, 2.0]])?;
    let a_inv = solve_spd(&a, &Matrix::identity(3))?;

    // Rank-one correction u c vᵀ.
    let u = Matrix::from_rows(&[&[1.0], &[0.0], &[2.0]])?;
    let v = Matrix::from_rows(&[&[0.5, -1.0, 1.0]])?;
    let c = Matrix::diag(&[0.25]);

    let updated = a.add(&u.matmul(&c)?.matmul(&v)?)?;
    let inv = woodbury_inverse(&a_inv, &u, &c, &v)?;
    let residual = inv.matmul(&updated)?.sub(&Matrix::identity(3))?.frobenius_norm();

    println!("(A + UCV)^-1 =\n{inv}");
    println!("‖W (A + UCV) − I‖_F = {residual:.2e}");
    Ok(())
}
