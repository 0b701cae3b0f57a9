//! Ensemble Kalman filter with perturbed observations.
//!
//! Each member is pushed through the (possibly nonlinear) transition, the
//! gain is built from the sample covariance of the forecast ensemble, and
//! every member is then nudged toward its own noisy copy of the observation.
//! Random draws for member `n` always come from `base.derive(n)`, so results
//! do not depend on the order in which members are processed.

use crate::dynamics::Transition;
use crate::error::{Error, Result};
use crate::kalman::{kalman_gain, ObservationModel};
use crate::linalg::{sample_covariance, sample_mean, Matrix, Vector};
use crate::randomness::{GaussianSpec, RngStream};

/// `N ≥ 2` finite state vectors of equal dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<Vector>,
}

impl Ensemble {
    pub fn new(members: Vec<Vector>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidInput(format!("an ensemble needs at least 2 members, got {}", members.len())));
        }
        let n = members[0].dim();
        for (i, m) in members.iter().enumerate() {
            if m.dim() != n {
                return Err(Error::dims("ensemble", format!("member {i} has dim {} not {n}", m.dim())));
            }
            if !m.is_finite() {
                return Err(Error::InvalidInput(format!("member {i} is not finite")));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Vector] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Vector> {
        self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn stats(&self) -> EnsembleStats {
        let mean = sample_mean(&self.members).expect("ensemble is non-empty with uniform dims");
        let covariance = sample_covariance(&self.members, &mean).expect("ensemble has at least 2 members");
        EnsembleStats { mean, covariance }
    }
}

/// Sample mean and unbiased sample covariance of an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub mean: Vector,
    pub covariance: Matrix,
}

/// Covariance inflation applied to the forecast ensemble. Only the identity
/// is offered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Inflation {
    #[default]
    None,
}

impl Inflation {
    pub fn factor(&self) -> f64 {
        match self {
            Inflation::None => 1.0,
        }
    }
}

/// Analysis settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnkfOptions {
    /// `q` in `Ĉ + q I`, the covariance used to build the gain.
    pub regularization: f64,
    pub inflation: Inflation,
}

impl EnkfOptions {
    pub const DEFAULT_REGULARIZATION: f64 = 0.001;

    /// Gain from the raw sample covariance.
    pub fn unregularized() -> Self {
        Self { regularization: 0.0, inflation: Inflation::None }
    }
}

impl Default for EnkfOptions {
    fn default() -> Self {
        Self { regularization: Self::DEFAULT_REGULARIZATION, inflation: Inflation::None }
    }
}

/// Source of the observation perturbations `η⁽ⁿ⁾`.
#[derive(Clone, Copy, Debug)]
pub enum Perturbations<'a> {
    /// Draw `η⁽ⁿ⁾ ~ N(0, Γ)` from `base.derive(n)`.
    Sampled(&'a RngStream),
    /// Use exactly these, one per member.
    Given(&'a [Vector]),
    /// `η⁽ⁿ⁾ = 0`: every member assimilates the raw observation.
    Zero,
}

/// `center + spread · z⁽ⁿ⁾` with `z⁽ⁿ⁾` standard normal from `rng.derive(n)`.
pub fn init_ensemble(center: &Vector, spread: f64, size: usize, rng: &RngStream) -> Result<Ensemble> {
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::InvalidInput(format!("spread must be finite and non-negative, got {spread}")));
    }
    if size < 2 {
        return Err(Error::InvalidInput(format!("an ensemble needs at least 2 members, got {size}")));
    }
    let members = (0..size)
        .map(|n| {
            let z = rng.derive(n as u64).standard_normal(center.dim());
            center.add(&z.scale(spread))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// Members drawn from an arbitrary Gaussian, member `n` from `rng.derive(n)`.
pub fn ensemble_from_gaussian(spec: &GaussianSpec, size: usize, rng: &RngStream) -> Result<Ensemble> {
    let sampler = spec.sampler()?;
    let members = (0..size).map(|n| sampler.sample(&mut rng.derive(n as u64))).collect();
    Ensemble::new(members)
}

/// Forecast: `v̂⁽ⁿ⁾ = Ψ(v⁽ⁿ⁾) + ξ⁽ⁿ⁾`, `ξ⁽ⁿ⁾ ~ N(0, Σ)`, plus the forecast
/// sample statistics. Member order is preserved.
pub fn enkf_predict<T: Transition + ?Sized>(
    ensemble: &Ensemble,
    transition: &T,
    process_noise: &Matrix,
    rng: &RngStream,
) -> Result<(Ensemble, EnsembleStats)> {
    let n = ensemble.dim();
    if process_noise.shape() != (n, n) {
        return Err(Error::dims(
            "enkf_predict",
            format!("process noise {}x{} for state dim {n}", process_noise.rows(), process_noise.cols()),
        ));
    }
    let sampler = if process_noise.is_zero() {
        None
    } else {
        Some(GaussianSpec::centered(process_noise.clone())?.sampler()?)
    };
    let members = ensemble
        .members()
        .iter()
        .enumerate()
        .map(|(idx, member)| {
            let wrap = |source| Error::Member { member: idx, source: Box::new(source) };
            let mut next = transition.apply(member).map_err(wrap)?;
            if next.dim() != n {
                return Err(wrap(Error::dims("enkf_predict", "transition changed the state dimension")));
            }
            if let Some(s) = &sampler {
                next = next.add(&s.sample(&mut rng.derive(idx as u64)))?;
            }
            if !next.is_finite() {
                return Err(wrap(Error::NonFiniteState));
            }
            Ok(next)
        })
        .collect::<Result<Vec<_>>>()?;
    let forecast = Ensemble { members };
    let stats = forecast.stats();
    Ok((forecast, stats))
}

/// `K* = Ĉ Hᵀ (H Ĉ Hᵀ + Γ)⁻¹` with `Ĉ` the ensemble sample covariance.
pub fn enkf_gain(stats: &EnsembleStats, obs: &ObservationModel) -> Result<Matrix> {
    kalman_gain(&stats.covariance, obs)
}

/// Outcome of a perturbed-observation analysis.
#[derive(Clone, Debug)]
pub struct EnkfAnalysis {
    pub ensemble: Ensemble,
    /// Sample statistics of the analyzed ensemble.
    pub stats: EnsembleStats,
    pub gain: Matrix,
    /// `m̂ + K* (y − H m̂)`, the mean update without perturbations.
    pub mean_update: Vector,
    /// The realized `η⁽ⁿ⁾`, one per member.
    pub perturbations: Vec<Vector>,
}

/// Analysis: `v⁽ⁿ⁾ = v̂⁽ⁿ⁾ + K* (y + η⁽ⁿ⁾ − H v̂⁽ⁿ⁾)`.
pub fn enkf_analyze(
    predicted: &Ensemble,
    y: &Vector,
    obs: &ObservationModel,
    perturbations: Perturbations<'_>,
    options: &EnkfOptions,
) -> Result<EnkfAnalysis> {
    let n = predicted.dim();
    let m = obs.obs_dim();
    if obs.state_dim() != n {
        return Err(Error::dims("enkf_analyze", format!("operator expects dim {}, ensemble has {n}", obs.state_dim())));
    }
    if y.dim() != m {
        return Err(Error::dims("enkf_analyze", format!("observation dim {} for operator with {m} rows", y.dim())));
    }
    if !(options.regularization >= 0.0) {
        return Err(Error::InvalidInput("regularization must be non-negative".into()));
    }
    let forecast_stats = predicted.stats();
    let gain = if options.regularization > 0.0 {
        let regularized = EnsembleStats {
            mean: forecast_stats.mean.clone(),
            covariance: forecast_stats.covariance.add_diagonal(options.regularization),
        };
        enkf_gain(&regularized, obs)?
    } else {
        enkf_gain(&forecast_stats, obs)?
    };

    let size = predicted.size();
    let etas: Vec<Vector> = match perturbations {
        Perturbations::Zero => vec![Vector::zeros(m); size],
        Perturbations::Given(given) => {
            if given.len() != size || given.iter().any(|e| e.dim() != m) {
                return Err(Error::dims("enkf_analyze", format!("need {size} perturbations of dim {m}")));
            }
            given.to_vec()
        }
        Perturbations::Sampled(base) => {
            let sampler = GaussianSpec::centered(obs.noise().clone())?.sampler()?;
            (0..size).map(|i| sampler.sample(&mut base.derive(i as u64))).collect()
        }
    };

    let h = obs.operator();
    let members = predicted
        .members()
        .iter()
        .zip(&etas)
        .map(|(v, eta)| {
            let innovation = y.add(eta)?.sub(&h.mul_vec(v)?)?;
            v.add(&gain.mul_vec(&innovation)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let ensemble = Ensemble::new(members)?;
    let stats = ensemble.stats();
    let mean_update = forecast_stats
        .mean
        .add(&gain.mul_vec(&y.sub(&h.mul_vec(&forecast_stats.mean)?)?)?)?;
    Ok(EnkfAnalysis { ensemble, stats, gain, mean_update, perturbations: etas })
}

/// `(I − K* H) Ĉ (I − K* H)ᵀ`: the analysis covariance an unperturbed
/// update produces.
pub fn deterministic_analysis_covariance(
    stats: &EnsembleStats,
    gain: &Matrix,
    obs: &ObservationModel,
) -> Result<Matrix> {
    let n = stats.mean.dim();
    let i_kh = Matrix::identity(n).sub(&gain.matmul(obs.operator())?)?;
    i_kh.matmul(&stats.covariance)?.matmul(&i_kh.transpose())
}
