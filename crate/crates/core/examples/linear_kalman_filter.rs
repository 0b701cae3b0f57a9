//! Tracking a noisy damped oscillator with the linear Kalman filter.

use enkf_lab::kalman::{analyze, predict, GaussianState, LinearModel, ObservationModel};
use enkf_lab::linalg::{Matrix, Vector};
use enkf_lab::randomness::{GaussianSpec, RngStream};

fn main() -> enkf_lab::Result<()> {
    let (w, damping) = (0.3f64, 0.98);
    let psi = Matrix::from_rows(&[&[damping * w.cos(), damping * w.sin()], &[-damping * w.sin(), damping * w.cos()]])?;
    let sigma = Matrix::scaled_identity(2, 0.01);
    let model = LinearModel::new(psi.clone(), sigma.clone())?;
    // Only the first component is observed.
    let obs = ObservationModel::new(Matrix::from_rows(&[&[1.0, 0.0]])?, Matrix::diag(&[0.25]))?;

    let mut rng = RngStream::new(2024);
    let process = GaussianSpec::centered(sigma)?.sampler()?;
    let noise = GaussianSpec::centered(obs.noise().clone())?.sampler()?;

    let mut truth = Vector::from_slice(&[3.0, 0.0])?;
    let mut belief = GaussianState::new(Vector::zeros(2), Matrix::scaled_identity(2, 4.0))?;
    println!("{:>4} {:>9} {:>9} {:>9} {:>9} {:>8}", "j", "truth_x", "truth_y", "mean_x", "mean_y", "tr C");
    for j in 1..=25 {
        truth = psi.mul_vec(&truth)?.add(&process.sample(&mut rng))?;
        let y = obs.operator().mul_vec(&truth)?.add(&noise.sample(&mut rng))?;
        belief = analyze(&predict(&belief, &model)?, &y, &obs)?.state;
        let m = belief.mean();
        println!(
            "{j:>4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8.4}",
            truth[0],
            truth[1],
            m[0],
            m[1],
            belief.covariance().trace()?
        );
    }
    Ok(())
}
