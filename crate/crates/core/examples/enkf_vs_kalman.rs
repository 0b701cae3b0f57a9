//! One forecast/analysis cycle on a linear model: the ensemble statistics
//! approach the exact Kalman filter as the ensemble grows.

use enkf_lab::enkf::{enkf_analyze, enkf_predict, ensemble_from_gaussian, EnkfOptions, Perturbations};
use enkf_lab::kalman::{analyze, predict, GaussianState, LinearModel, ObservationModel};
use enkf_lab::linalg::{Matrix, Vector};
use enkf_lab::randomness::{GaussianSpec, RngStream};

fn main() -> enkf_lab::Result<()> {
    let psi = Matrix::from_rows(&[&[0.9, 0.2], &[-0.1, 0.95]])?;
    let sigma = Matrix::scaled_identity(2, 0.05);
    let prior = GaussianState::new(Vector::from_slice(&[1.0, -1.0])?, Matrix::from_rows(&[&[1.0, 0.3], &[0.3, 0.5]])?)?;
    let obs = ObservationModel::new(Matrix::from_rows(&[&[1.0, 0.5]])?, Matrix::diag(&[0.2]))?;
    let y = Vector::from_slice(&[0.7])?;

    let kf = analyze(&predict(&prior, &LinearModel::new(psi.clone(), sigma.clone())?)?, &y, &obs)?.state;
    println!("Kalman filter: mean {}  tr C {:.5}", kf.mean(), kf.covariance().trace()?);

    let spec = GaussianSpec::new(prior.mean().clone(), prior.covariance().clone())?;
    let root = RngStream::new(1);
    for size in [10, 100, 1_000, 10_000, 100_000] {
        let ensemble = ensemble_from_gaussian(&spec, size, &root.derive(0))?;
        let (forecast, _) = enkf_predict(&ensemble, &psi, &sigma, &root.derive(1))?;
        let a = enkf_analyze(&forecast, &y, &obs, Perturbations::Sampled(&root.derive(2)), &EnkfOptions::unregularized())?;
        let mean_err = a.stats.mean.sub(kf.mean())?.norm();
        let cov_err = a.stats.covariance.sub(kf.covariance())?.frobenius_norm() / kf.covariance().frobenius_norm();
        println!("N = {size:>6}: |mean − m| = {mean_err:.2e}, relative covariance error {cov_err:.2e}");
    }
    Ok(())
}
