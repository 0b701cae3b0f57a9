//! Triangular factorizations backing every inverse in the filter formulas.

use super::Matrix;
use crate::error::{Error, Result};

/// Diagonal jitter added on the single retry after a failed factorization.
pub const JITTER: f64 = 1e-12;

/// Relative pivot tolerance of the semidefinite factorization.
const PSD_PIVOT_TOL: f64 = 1e-12;

/// Square-root-free symmetric factorization `A = L D Lᵀ` with unit lower
/// triangular `L` and positive diagonal `D`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    unit_lower: Matrix,
    diag: Vec<f64>,
}

impl Cholesky {
    /// Factorizes the symmetrized `a`, failing on any pivot `<= 0`.
    pub fn new(a: &Matrix) -> Result<Self> {
        let sym = symmetrized(a, "cholesky")?;
        factor_ldl(&sym).ok_or(Error::Singular { op: "cholesky" })
    }

    /// Like [`Cholesky::new`], but retries once with `JITTER·I` added.
    pub fn with_jitter(a: &Matrix) -> Result<Self> {
        let sym = symmetrized(a, "cholesky")?;
        factor_ldl(&sym)
            .or_else(|| factor_ldl(&sym.add_diagonal(JITTER)))
            .ok_or(Error::Singular { op: "cholesky" })
    }

    /// The conventional factor `L √D`.
    pub fn lower(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.unit_lower[(i, j)] * self.diag[j].sqrt())
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::dims("cholesky solve", format!("{n}x{n} system with {} rhs rows", b.rows())));
        }
        let l = &self.unit_lower;
        let mut x = b.clone();
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in 0..n {
                x[(i, c)] /= self.diag[i];
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
        }
        Ok(x)
    }
}

fn symmetrized(a: &Matrix, op: &'static str) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dims(op, format!("{}x{} is not square", a.rows(), a.cols())));
    }
    a.symmetrize()
}

fn factor_ldl(a: &Matrix) -> Option<Cholesky> {
    let n = a.rows();
    let mut l = Matrix::identity(n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = a[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if !(dj > 0.0) || !dj.is_finite() {
            return None;
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(Cholesky { unit_lower: l, diag: d })
}

/// Factor `L` with `L Lᵀ = A` for symmetric positive *semi*definite `A`.
///
/// Pivots within a relative tolerance of zero produce zero columns, so a
/// rank-deficient covariance yields a factor whose columns stay in its
/// column space. A clearly negative pivot triggers one retry with
/// `JITTER·I`; if that fails too the matrix is rejected.
pub fn psd_factor(a: &Matrix) -> Result<Matrix> {
    let sym = symmetrized(a, "psd factor")?;
    factor_semidefinite(&sym)
        .or_else(|| factor_semidefinite(&sym.add_diagonal(JITTER)))
        .ok_or(Error::Singular { op: "psd factor" })
}

fn factor_semidefinite(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let scale = a.diagonal().into_iter().fold(0.0_f64, f64::max);
    let tol = PSD_PIVOT_TOL * scale;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_finite() || d < -tol {
            return None;
        }
        if d <= tol {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `A X = B` for symmetric positive definite `A` without forming an
/// inverse. `A` is symmetrized first and the factorization is retried once
/// with diagonal jitter.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    Cholesky::with_jitter(a)
        .map_err(|_| Error::Singular { op: "solve_spd" })?
        .solve(b)
}

/// LU factorization with partial pivoting for general square systems.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("lu", format!("{}x{} is not square", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tol = f64::EPSILON * n as f64 * a.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
                .unwrap_or(k);
            if !(lu[(p, k)].abs() > tol) {
                return Err(Error::Singular { op: "lu" });
            }
            if p != k {
                perm.swap(p, k);
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(p, c)];
                    lu[(p, c)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for c in (k + 1)..n {
                    lu[(i, c)] -= f * lu[(k, c)];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::dims("lu solve", format!("{n}x{n} system with {} rhs rows", b.rows())));
        }
        let lu = &self.lu;
        let mut x = Matrix::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lu.rows();
        self.solve(&Matrix::identity(n)).expect("identity has matching rows")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_returns_rhs() {
        let b = Matrix::from_rows(&[&[1.0, -2.0], &[3.5, 0.25], &[7.0, 1.0]]).unwrap();
        assert_eq!(solve_spd(&Matrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_system_gives_reciprocals() {
        let x = solve_spd(&Matrix::diag(&[2.0, 4.0]), &Matrix::identity(2)).unwrap();
        assert_eq!(x, Matrix::diag(&[0.5, 0.25]));
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = Matrix::diag(&[1.0, -1.0]);
        assert!(matches!(solve_spd(&a, &Matrix::identity(2)), Err(Error::Singular { .. })));
    }

    #[test]
    fn zero_matrix_is_rescued_only_by_jitter() {
        assert!(Cholesky::new(&Matrix::zeros(2, 2)).is_err());
        let c = Cholesky::with_jitter(&Matrix::zeros(2, 2)).unwrap();
        assert_eq!(c.pivots(), &[JITTER, JITTER]);
    }

    #[test]
    fn psd_factor_of_zero_is_zero() {
        assert!(psd_factor(&Matrix::zeros(3, 3)).unwrap().is_zero());
    }

    #[test]
    fn psd_factor_rank_one() {
        let v = crate::linalg::Vector::from_slice(&[1.0, 2.0, -1.0]).unwrap();
        let a = Matrix::outer(&v, &v);
        let l = psd_factor(&a).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.sub(&a).unwrap().max_abs() < 1e-14);
        assert_eq!(l[(1, 1)], 0.0);
        assert_eq!(l[(2, 2)], 0.0);
    }

    #[test]
    fn psd_factor_rejects_negative() {
        assert!(psd_factor(&Matrix::diag(&[1.0, -0.5])).is_err());
    }

    #[test]
    fn lu_solves_nonsymmetric() {
        let a = Matrix::from_rows(&[&[0.0, 2.0], &[3.0, 1.0]]).unwrap();
        let inv = Lu::new(&a).unwrap().inverse();
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-15);
        let singular = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(Lu::new(&singular).is_err());
    }
}
