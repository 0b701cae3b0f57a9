#![allow(dead_code)]

use enkf_lab::linalg::{Matrix, Vector};
use enkf_lab::randomness::RngStream;

pub fn uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_uniform()
}

pub fn dim(rng: &mut RngStream, lo: usize, hi: usize) -> usize {
    let span = (hi - lo + 1) as f64;
    lo + ((rng.next_uniform() * span).ceil() as usize - 1).min(hi - lo)
}

pub fn random_matrix(rng: &mut RngStream, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| uniform(rng, -1.0, 1.0))
}

pub fn random_vector(rng: &mut RngStream, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_| uniform(rng, -scale, scale))
}

/// `B Bᵀ + floor · I`, symmetric to the last bit.
pub fn random_spd(rng: &mut RngStream, n: usize, floor: f64) -> Matrix {
    let b = random_matrix(rng, n, n);
    b.matmul(&b.transpose()).unwrap().add_diagonal(floor).symmetrize().unwrap()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

pub fn relative_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn to_nalgebra(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn report(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
