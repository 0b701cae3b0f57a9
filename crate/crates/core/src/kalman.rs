//! Linear Kalman filter: prediction, analysis and the gain that minimizes
//! the posterior error-variance trace.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Cholesky, Matrix, Vector};

const SYMMETRY_TOL: f64 = 1e-10;

fn check_symmetric(m: &Matrix, what: &str) -> Result<()> {
    if !m.is_symmetric(SYMMETRY_TOL * (1.0 + m.max_abs())) {
        return Err(Error::InvalidInput(format!("{what} must be symmetric")));
    }
    Ok(())
}

/// Mean and covariance of a Gaussian belief about the state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: Vector,
    covariance: Matrix,
}

impl GaussianState {
    pub fn new(mean: Vector, covariance: Matrix) -> Result<Self> {
        let n = mean.dim();
        if covariance.shape() != (n, n) {
            return Err(Error::dims(
                "gaussian state",
                format!("mean dim {n} with {}x{} covariance", covariance.rows(), covariance.cols()),
            ));
        }
        check_symmetric(&covariance, "state covariance")?;
        Ok(Self { mean, covariance })
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }
}

/// Linear dynamics `v_{j+1} = M v_j + ξ_j`, `ξ_j ~ N(0, Σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    transition: Matrix,
    process_noise: Matrix,
}

impl LinearModel {
    pub fn new(transition: Matrix, process_noise: Matrix) -> Result<Self> {
        let n = transition.rows();
        if !transition.is_square() || process_noise.shape() != (n, n) {
            return Err(Error::dims(
                "linear model",
                format!(
                    "transition {}x{} with process noise {}x{}",
                    transition.rows(),
                    transition.cols(),
                    process_noise.rows(),
                    process_noise.cols()
                ),
            ));
        }
        check_symmetric(&process_noise, "process noise")?;
        Ok(Self { transition, process_noise })
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    pub fn process_noise(&self) -> &Matrix {
        &self.process_noise
    }
}

/// Observation `y = H v + η`, `η ~ N(0, Γ)` with `Γ` positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationModel {
    operator: Matrix,
    noise: Matrix,
}

impl ObservationModel {
    pub fn new(operator: Matrix, noise: Matrix) -> Result<Self> {
        let m = operator.rows();
        if noise.shape() != (m, m) {
            return Err(Error::dims(
                "observation model",
                format!("operator has {m} rows but noise is {}x{}", noise.rows(), noise.cols()),
            ));
        }
        check_symmetric(&noise, "observation noise")?;
        Cholesky::new(&noise)
            .map_err(|_| Error::InvalidInput("observation noise must be positive definite".into()))?;
        Ok(Self { operator, noise })
    }

    /// `H = I_n`, `Γ = variance · I_n`.
    pub fn identity(n: usize, variance: f64) -> Result<Self> {
        Self::new(Matrix::identity(n), Matrix::scaled_identity(n, variance))
    }

    pub fn operator(&self) -> &Matrix {
        &self.operator
    }

    pub fn noise(&self) -> &Matrix {
        &self.noise
    }

    pub fn state_dim(&self) -> usize {
        self.operator.cols()
    }

    pub fn obs_dim(&self) -> usize {
        self.operator.rows()
    }

    fn check_state(&self, n: usize, op: &'static str) -> Result<()> {
        if self.state_dim() != n {
            return Err(Error::dims(op, format!("operator expects state dim {}, got {n}", self.state_dim())));
        }
        Ok(())
    }

    fn check_obs(&self, y: &Vector, op: &'static str) -> Result<()> {
        if y.dim() != self.obs_dim() {
            return Err(Error::dims(op, format!("observation dim {} for operator with {} rows", y.dim(), self.obs_dim())));
        }
        Ok(())
    }
}

/// `m̂ = M m`, `Ĉ = M C Mᵀ + Σ`.
pub fn predict(state: &GaussianState, model: &LinearModel) -> Result<GaussianState> {
    let m = model.transition();
    if m.cols() != state.dim() {
        return Err(Error::dims("predict", format!("transition {}x{} for state dim {}", m.rows(), m.cols(), state.dim())));
    }
    let mean = m.mul_vec(state.mean())?;
    let cov = m.matmul(state.covariance())?.matmul(&m.transpose())?.add(model.process_noise())?;
    Ok(GaussianState { mean, covariance: cov.symmetrize()? })
}

/// Innovation covariance `H Ĉ Hᵀ + Γ`.
pub fn innovation_covariance(predicted_cov: &Matrix, obs: &ObservationModel) -> Result<Matrix> {
    obs.check_state(predicted_cov.rows(), "innovation_covariance")?;
    let h = obs.operator();
    h.matmul(predicted_cov)?.matmul(&h.transpose())?.add(obs.noise())
}

/// `K = Ĉ Hᵀ (H Ĉ Hᵀ + Γ)⁻¹`.
///
/// Solved as `S Kᵀ = (Ĉ Hᵀ)ᵀ` with `S` the innovation covariance, which is
/// symmetric positive definite whenever `Γ` is.
pub fn kalman_gain(predicted_cov: &Matrix, obs: &ObservationModel) -> Result<Matrix> {
    let s = innovation_covariance(predicted_cov, obs)?;
    let cross = predicted_cov.matmul(&obs.operator().transpose())?;
    let gain_t = solve_spd(&s, &cross.transpose()).map_err(|_| Error::Singular { op: "kalman_gain" })?;
    Ok(gain_t.transpose())
}

/// Result of one analysis step.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub state: GaussianState,
    pub gain: Matrix,
    /// `y − H m̂`.
    pub innovation: Vector,
}

/// `m = m̂ + K (y − H m̂)`, `C = (I − K H) Ĉ`.
pub fn analyze(predicted: &GaussianState, y: &Vector, obs: &ObservationModel) -> Result<Analysis> {
    obs.check_state(predicted.dim(), "analyze")?;
    obs.check_obs(y, "analyze")?;
    let h = obs.operator();
    let gain = kalman_gain(predicted.covariance(), obs)?;
    let innovation = y.sub(&h.mul_vec(predicted.mean())?)?;
    let mean = predicted.mean().add(&gain.mul_vec(&innovation)?)?;
    let i_kh = Matrix::identity(predicted.dim()).sub(&gain.matmul(h)?)?;
    let cov = i_kh.matmul(predicted.covariance())?.symmetrize()?;
    Ok(Analysis { state: GaussianState { mean, covariance: cov }, gain, innovation })
}

/// The same posterior from the information (precision) form:
/// `C⁻¹ = Ĉ⁻¹ + Hᵀ Γ⁻¹ H` and `C⁻¹ m = Ĉ⁻¹ m̂ + Hᵀ Γ⁻¹ y`.
///
/// Requires an invertible prior covariance.
pub fn analyze_information_form(
    predicted: &GaussianState,
    y: &Vector,
    obs: &ObservationModel,
) -> Result<GaussianState> {
    let n = predicted.dim();
    obs.check_state(n, "analyze_information_form")?;
    obs.check_obs(y, "analyze_information_form")?;
    let singular = |_| Error::Singular { op: "analyze_information_form" };
    let prior = Cholesky::new(predicted.covariance()).map_err(singular)?;
    let noise = Cholesky::new(obs.noise()).map_err(singular)?;
    let h = obs.operator();
    let ht = h.transpose();

    let prior_precision = prior.solve(&Matrix::identity(n))?;
    let weighted_h = noise.solve(h)?;
    let precision = prior_precision.add(&ht.matmul(&weighted_h)?)?.symmetrize()?;

    let rhs = prior
        .solve(&Matrix::column(predicted.mean()))?
        .add(&ht.matmul(&noise.solve(&Matrix::column(y))?)?)?;
    let post = Cholesky::new(&precision).map_err(singular)?;
    let solved = post.solve(&rhs)?;
    let mean = Vector::from_fn(n, |i| solved[(i, 0)]);
    let covariance = post.solve(&Matrix::identity(n))?.symmetrize()?;
    Ok(GaussianState { mean, covariance })
}

/// Joseph-form posterior covariance `(I − K H) Ĉ (I − K H)ᵀ + K Γ Kᵀ`,
/// valid for any gain `K`.
pub fn joseph_covariance(predicted_cov: &Matrix, gain: &Matrix, obs: &ObservationModel) -> Result<Matrix> {
    let n = predicted_cov.rows();
    obs.check_state(n, "joseph_covariance")?;
    let i_kh = Matrix::identity(n).sub(&gain.matmul(obs.operator())?)?;
    let propagated = i_kh.matmul(predicted_cov)?.matmul(&i_kh.transpose())?;
    let injected = gain.matmul(obs.noise())?.matmul(&gain.transpose())?;
    propagated.add(&injected)
}

/// Expected squared analysis error `tr(joseph_covariance)` for gain `K`.
pub fn gain_objective(predicted_cov: &Matrix, gain: &Matrix, obs: &ObservationModel) -> Result<f64> {
    joseph_covariance(predicted_cov, gain, obs)?.trace()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> Matrix {
        Matrix::diag(&[x])
    }

    fn sv(x: f64) -> Vector {
        Vector::from_slice(&[x]).unwrap()
    }

    #[test]
    fn identity_model_is_noop() {
        let state = GaussianState::new(
            Vector::from_slice(&[1.0, 2.0]).unwrap(),
            Matrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]).unwrap(),
        )
        .unwrap();
        let model = LinearModel::new(Matrix::identity(2), Matrix::zeros(2, 2)).unwrap();
        assert_eq!(predict(&state, &model).unwrap(), state);
    }

    #[test]
    fn scalar_prediction() {
        let state = GaussianState::new(sv(2.0), scalar(1.0)).unwrap();
        let model = LinearModel::new(scalar(0.5), scalar(0.1)).unwrap();
        let p = predict(&state, &model).unwrap();
        assert_eq!(p.mean()[0], 1.0);
        assert!((p.covariance()[(0, 0)] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn scalar_gain_and_analysis() {
        let obs = ObservationModel::new(scalar(1.0), scalar(1.0)).unwrap();
        assert_eq!(kalman_gain(&scalar(1.0), &obs).unwrap()[(0, 0)], 0.5);
        let prior = GaussianState::new(sv(1.0), scalar(1.0)).unwrap();
        let a = analyze(&prior, &sv(2.0), &obs).unwrap();
        assert_eq!(a.gain[(0, 0)], 0.5);
        assert_eq!(a.state.mean()[0], 1.5);
        assert_eq!(a.state.covariance()[(0, 0)], 0.5);
        assert_eq!(a.innovation[0], 1.0);
    }

    #[test]
    fn perfect_observation_limit() {
        let obs = ObservationModel::identity(3, 1e-12).unwrap();
        let k = kalman_gain(&Matrix::identity(3), &obs).unwrap();
        assert!(k.sub(&Matrix::identity(3)).unwrap().max_abs() < 1e-9);

        let prior = GaussianState::new(Vector::from_slice(&[1.0, 2.0, 3.0]).unwrap(), Matrix::identity(3)).unwrap();
        let y = Vector::from_slice(&[-1.0, 0.5, 4.0]).unwrap();
        let a = analyze(&prior, &y, &obs).unwrap();
        assert!(a.state.mean().sub(&y).unwrap().max_abs() < 1e-6);
        assert!(a.state.covariance().max_abs() < 1e-9);
    }

    #[test]
    fn zero_innovation_keeps_mean() {
        let h = Matrix::from_rows(&[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
        let obs = ObservationModel::new(h.clone(), Matrix::scaled_identity(2, 0.3)).unwrap();
        let prior = GaussianState::new(
            Vector::from_slice(&[0.4, -1.2]).unwrap(),
            Matrix::from_rows(&[&[1.0, 0.2], &[0.2, 0.5]]).unwrap(),
        )
        .unwrap();
        let y = h.mul_vec(prior.mean()).unwrap();
        let a = analyze(&prior, &y, &obs).unwrap();
        assert_eq!(a.state.mean(), prior.mean());
    }

    #[test]
    fn information_form_scalar() {
        let obs = ObservationModel::new(scalar(1.0), scalar(1.0)).unwrap();
        let prior = GaussianState::new(sv(1.0), scalar(1.0)).unwrap();
        let info = analyze_information_form(&prior, &sv(2.0), &obs).unwrap();
        assert!((info.mean()[0] - 1.5).abs() < 1e-12);
        assert!((info.covariance()[(0, 0)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn information_form_without_information() {
        let obs = ObservationModel::new(Matrix::zeros(2, 2), Matrix::identity(2)).unwrap();
        let prior = GaussianState::new(
            Vector::from_slice(&[1.0, -1.0]).unwrap(),
            Matrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap(),
        )
        .unwrap();
        let y = Vector::from_slice(&[10.0, 10.0]).unwrap();
        let info = analyze_information_form(&prior, &y, &obs).unwrap();
        assert!(info.mean().sub(prior.mean()).unwrap().max_abs() < 1e-12);
        assert!(info.covariance().sub(prior.covariance()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn information_form_needs_full_rank_prior() {
        let obs = ObservationModel::identity(2, 1.0).unwrap();
        let prior = GaussianState::new(Vector::zeros(2), Matrix::diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            analyze_information_form(&prior, &Vector::zeros(2), &obs),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn noise_must_be_positive_definite() {
        assert!(ObservationModel::new(scalar(1.0), scalar(0.0)).is_err());
        assert!(ObservationModel::new(Matrix::identity(2), Matrix::identity(3)).is_err());
    }

    #[test]
    fn dimension_errors() {
        let obs = ObservationModel::identity(2, 1.0).unwrap();
        let prior = GaussianState::new(Vector::zeros(3), Matrix::identity(3)).unwrap();
        assert!(analyze(&prior, &Vector::zeros(2), &obs).is_err());
        let model = LinearModel::new(Matrix::identity(2), Matrix::zeros(2, 2)).unwrap();
        assert!(predict(&prior, &model).is_err());
    }
}
