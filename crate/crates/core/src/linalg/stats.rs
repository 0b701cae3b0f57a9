use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Componentwise arithmetic mean of equally sized vectors.
pub fn sample_mean(members: &[Vector]) -> Result<Vector> {
    let first = members
        .first()
        .ok_or_else(|| Error::InvalidInput("sample mean of an empty set".into()))?;
    let n = first.dim();
    let mut acc = vec![0.0; n];
    for (idx, m) in members.iter().enumerate() {
        if m.dim() != n {
            return Err(Error::dims("sample_mean", format!("member {idx} has dim {} not {n}", m.dim())));
        }
        for (a, x) in acc.iter_mut().zip(m) {
            *a += x;
        }
    }
    let inv = 1.0 / members.len() as f64;
    Ok(Vector::from_vec_unchecked(acc.into_iter().map(|a| a * inv).collect()))
}

/// Unbiased sample covariance `1/(N−1) Σ (v−m)(v−m)ᵀ` about `mean`.
///
/// The result is exactly symmetric: the upper triangle is accumulated and
/// mirrored.
pub fn sample_covariance(members: &[Vector], mean: &Vector) -> Result<Matrix> {
    if members.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "sample covariance needs at least 2 members, got {}",
            members.len()
        )));
    }
    let n = mean.dim();
    let mut cov = Matrix::zeros(n, n);
    let mut dev = vec![0.0; n];
    for (idx, m) in members.iter().enumerate() {
        if m.dim() != n {
            return Err(Error::dims("sample_covariance", format!("member {idx} has dim {} not {n}", m.dim())));
        }
        for (d, (x, mu)) in dev.iter_mut().zip(m.iter().zip(mean)) {
            *d = x - mu;
        }
        for i in 0..n {
            for j in i..n {
                cov[(i, j)] += dev[i] * dev[j];
            }
        }
    }
    let inv = 1.0 / (members.len() - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let v = cov[(i, j)] * inv;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}
