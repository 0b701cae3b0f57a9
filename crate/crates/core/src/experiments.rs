//! Lorenz 63 twin experiments.
//!
//! A truth trajectory is integrated from a known start, noisy observations
//! of every state are synthesized from it, and the ensemble filter, started
//! from a wrong guess, is scored against the truth step by step.

use crate::dynamics::{Lorenz63Params, Rk4Flow};
use crate::enkf::{enkf_analyze, enkf_predict, init_ensemble, EnkfOptions, Inflation, Perturbations};
use crate::error::{Error, Result};
use crate::kalman::ObservationModel;
use crate::linalg::{Matrix, Vector};
use crate::randomness::{GaussianSpec, RngStream};

// Substream labels under a seed's root stream.
const OBSERVATION_STREAM: u64 = 1;
const FILTER_STREAM: u64 = 2;
// Substream labels under a filter run's stream.
const INIT_STREAM: u64 = 0;
const FORECAST_STREAM: u64 = 1;
const PERTURBATION_STREAM: u64 = 2;

/// Everything that defines a twin experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct TwinExperimentConfig {
    pub truth_init: Vector,
    pub guess_init: Vector,
    /// Time between assimilations.
    pub dt: f64,
    /// Number of assimilation cycles.
    pub steps: usize,
    /// RK4 steps per assimilation interval.
    pub substeps: usize,
    /// Observation noise variance; `Γ = obs_noise_var · I`.
    pub obs_noise_var: f64,
    /// Model noise variance; `Σ = process_noise_var · I`.
    pub process_noise_var: f64,
    /// Standard deviation of the initial ensemble around the guess.
    pub init_spread: f64,
    /// `q` in `Ĉ + q I` when building the gain.
    pub q_jitter: f64,
    pub ensemble_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub lorenz: Lorenz63Params,
    /// Length of the standalone trajectory plot.
    pub trajectory_time: f64,
}

impl Default for TwinExperimentConfig {
    fn default() -> Self {
        Self {
            truth_init: Vector::from_vec_unchecked(vec![-10.0, -10.0, 20.0]),
            guess_init: Vector::from_vec_unchecked(vec![-11.0, -12.0, 10.0]),
            dt: 0.1,
            steps: 100,
            substeps: 10,
            obs_noise_var: 0.01,
            process_noise_var: 0.0,
            init_spread: 0.1,
            q_jitter: EnkfOptions::DEFAULT_REGULARIZATION,
            ensemble_sizes: vec![20, 50, 100],
            seeds: (0..20).collect(),
            lorenz: Lorenz63Params::default(),
            trajectory_time: 10.0,
        }
    }
}

impl TwinExperimentConfig {
    /// Returns the first violated invariant as `(key, message)`.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive = |key: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err((key, format!("must be positive and finite, got {v}")))
            }
        };
        let non_negative = |key: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err((key, format!("must be non-negative and finite, got {v}")))
            }
        };
        if self.truth_init.dim() != 3 {
            return Err(("truth_init", "must have 3 components".into()));
        }
        if self.guess_init.dim() != 3 {
            return Err(("guess_init", "must have 3 components".into()));
        }
        positive("dt", self.dt)?;
        if self.steps < 1 {
            return Err(("steps", "must be at least 1".into()));
        }
        if self.substeps < 1 {
            return Err(("substeps", "must be at least 1".into()));
        }
        positive("obs_noise_var", self.obs_noise_var)?;
        non_negative("process_noise_var", self.process_noise_var)?;
        non_negative("init_spread", self.init_spread)?;
        non_negative("q_jitter", self.q_jitter)?;
        if self.ensemble_sizes.is_empty() {
            return Err(("ensemble_sizes", "must list at least one size".into()));
        }
        if let Some(n) = self.ensemble_sizes.iter().find(|&&n| n < 2) {
            return Err(("ensemble_sizes", format!("every size must be at least 2, got {n}")));
        }
        if self.seeds.is_empty() {
            return Err(("seeds", "must list at least one seed".into()));
        }
        for (key, v) in [("sigma", self.lorenz.sigma), ("r", self.lorenz.r), ("b", self.lorenz.b)] {
            if !v.is_finite() {
                return Err((key, "must be finite".into()));
            }
        }
        positive("trajectory_time", self.trajectory_time)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(key, msg)| Error::InvalidInput(format!("{key} {msg}")))
    }

    /// The transition Ψ: one assimilation interval of RK4.
    pub fn flow(&self) -> Rk4Flow<Lorenz63Params> {
        Rk4Flow::new(self.lorenz, self.dt, self.substeps)
    }

    pub fn observation_model(&self) -> Result<ObservationModel> {
        ObservationModel::identity(3, self.obs_noise_var)
    }

    pub fn enkf_options(&self) -> EnkfOptions {
        EnkfOptions { regularization: self.q_jitter, inflation: Inflation::None }
    }
}

/// `steps + 1` true states, starting at `truth_init`, each one RK4
/// interval after the previous.
pub fn generate_truth(config: &TwinExperimentConfig) -> Result<Vec<Vector>> {
    let flow = config.flow();
    let mut states = Vec::with_capacity(config.steps + 1);
    states.push(config.truth_init.clone());
    for step in 1..=config.steps {
        let next = crate::dynamics::Transition::apply(&flow, &states[step - 1])
            .map_err(|e| Error::Step { step, source: Box::new(e) })?;
        states.push(next);
    }
    Ok(states)
}

/// `y_j = v_j + η_j`, `η_j ~ N(0, obs_noise_var · I)`, for every state after
/// the initial one. The draw for step `j` comes from `rng.derive(j)`.
pub fn synthesize_observations(
    truth: &[Vector],
    config: &TwinExperimentConfig,
    rng: &RngStream,
) -> Result<Vec<Vector>> {
    let Some(first) = truth.first() else {
        return Ok(Vec::new());
    };
    let n = first.dim();
    let noise = GaussianSpec::centered(Matrix::scaled_identity(n, config.obs_noise_var))?.sampler()?;
    truth
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, state)| state.add(&noise.sample(&mut rng.derive(j as u64))))
        .collect()
}

/// Truth and observations for one seed, shared by every ensemble size.
#[derive(Clone, Debug)]
pub struct TwinData {
    pub truth: Vec<Vector>,
    pub observations: Vec<Vector>,
}

pub fn prepare_twin(config: &TwinExperimentConfig, seed: u64) -> Result<TwinData> {
    let truth = generate_truth(config)?;
    let observations = synthesize_observations(&truth, config, &RngStream::new(seed).derive(OBSERVATION_STREAM))?;
    Ok(TwinData { truth, observations })
}

/// Metrics recorded at one assimilation step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMetrics {
    /// 1-based assimilation index.
    pub step: usize,
    pub truth: Vector,
    pub prediction_mean: Vector,
    pub analysis_mean: Vector,
    /// Sample covariance of the forecast ensemble (before regularization).
    pub prediction_covariance: Matrix,
    /// Sample covariance of the analyzed ensemble.
    pub analysis_covariance: Matrix,
    /// `(1/j) Σ_{i ≤ j} ‖v_i − m_i‖₂`.
    pub running_mean_error: f64,
}

impl StepMetrics {
    pub fn abs_prediction_error(&self) -> Vec<f64> {
        abs_diff(&self.prediction_mean, &self.truth)
    }

    pub fn abs_analysis_error(&self) -> Vec<f64> {
        abs_diff(&self.analysis_mean, &self.truth)
    }

    pub fn analysis_error_norm(&self) -> f64 {
        self.analysis_mean.sub(&self.truth).expect("same dimension").norm()
    }
}

fn abs_diff(a: &Vector, b: &Vector) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect()
}

/// Per-step metrics of one filter run.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSeries {
    pub ensemble_size: usize,
    pub seed: u64,
    pub steps: Vec<StepMetrics>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_running_mean_error(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.running_mean_error)
    }

    pub fn running_mean_errors(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.running_mean_error).collect()
    }
}

/// One full twin experiment for ensemble size `ensemble_size` and `seed`.
pub fn run_twin(config: &TwinExperimentConfig, ensemble_size: usize, seed: u64) -> Result<MetricSeries> {
    config.validate()?;
    let data = prepare_twin(config, seed)?;
    run_with_data(config, &data, ensemble_size, seed)
}

/// Runs the filter against already prepared truth and observations.
pub fn run_with_data(
    config: &TwinExperimentConfig,
    data: &TwinData,
    ensemble_size: usize,
    seed: u64,
) -> Result<MetricSeries> {
    config.validate()?;
    if data.observations.len() < config.steps || data.truth.len() < config.steps + 1 {
        return Err(Error::InvalidInput(format!(
            "twin data covers {} observations, config needs {}",
            data.observations.len(),
            config.steps
        )));
    }
    let flow = config.flow();
    let obs_model = config.observation_model()?;
    let options = config.enkf_options();
    let process_noise = Matrix::scaled_identity(3, config.process_noise_var);
    let run_rng = RngStream::new(seed).derive(FILTER_STREAM).derive(ensemble_size as u64);
    let forecast_rng = run_rng.derive(FORECAST_STREAM);
    let perturbation_rng = run_rng.derive(PERTURBATION_STREAM);

    let mut ensemble = init_ensemble(&config.guess_init, config.init_spread, ensemble_size, &run_rng.derive(INIT_STREAM))?;
    let mut error_sum = 0.0;
    let mut records = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let at_step = |e: Error| Error::Step { step, source: Box::new(e) };
        let (forecast, prediction) =
            enkf_predict(&ensemble, &flow, &process_noise, &forecast_rng.derive(step as u64)).map_err(at_step)?;
        let analysis = enkf_analyze(
            &forecast,
            &data.observations[step - 1],
            &obs_model,
            Perturbations::Sampled(&perturbation_rng.derive(step as u64)),
            &options,
        )
        .map_err(at_step)?;
        let truth = data.truth[step].clone();
        error_sum += analysis.stats.mean.sub(&truth)?.norm();
        records.push(StepMetrics {
            step,
            truth,
            prediction_mean: prediction.mean,
            analysis_mean: analysis.stats.mean.clone(),
            prediction_covariance: prediction.covariance,
            analysis_covariance: analysis.stats.covariance.clone(),
            running_mean_error: error_sum / step as f64,
        });
        ensemble = analysis.ensemble;
    }
    Ok(MetricSeries { ensemble_size, seed, steps: records })
}

/// One `(N, seed)` cell of a sweep.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub ensemble_size: usize,
    pub seed: u64,
    /// The run, or the rendered error if it failed.
    pub outcome: std::result::Result<MetricSeries, String>,
}

impl SweepCell {
    pub fn final_error(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(MetricSeries::final_running_mean_error)
    }
}

/// Aggregates over seeds for one ensemble size.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeSummary {
    pub ensemble_size: usize,
    pub completed: usize,
    /// Median final running mean error, `None` if every run failed.
    pub median: Option<f64>,
    pub iqr: Option<f64>,
    /// Per-step median of the running mean error across completed seeds.
    pub median_curve: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Ordered by ensemble size (as configured), then seed.
    pub cells: Vec<SweepCell>,
    pub summaries: Vec<SizeSummary>,
}

impl SweepResult {
    pub fn summary(&self, ensemble_size: usize) -> Option<&SizeSummary> {
        self.summaries.iter().find(|s| s.ensemble_size == ensemble_size)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.outcome.is_err())
    }
}

/// Runs every `(N, seed)` pair. Truth and observations are generated once
/// per seed and shared across sizes; a failing cell is recorded and the
/// sweep continues.
pub fn sweep_ensemble_sizes(config: &TwinExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let prepared: Vec<std::result::Result<TwinData, String>> = config
        .seeds
        .iter()
        .map(|&seed| prepare_twin(config, seed).map_err(|e| e.to_string()))
        .collect();

    let mut cells = Vec::with_capacity(config.ensemble_sizes.len() * config.seeds.len());
    for &n in &config.ensemble_sizes {
        for (&seed, data) in config.seeds.iter().zip(&prepared) {
            let outcome = match data {
                Ok(data) => run_with_data(config, data, n, seed).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            cells.push(SweepCell { ensemble_size: n, seed, outcome });
        }
    }

    let summaries = config
        .ensemble_sizes
        .iter()
        .map(|&n| summarize(n, cells.iter().filter(|c| c.ensemble_size == n), config.steps))
        .collect();
    Ok(SweepResult { cells, summaries })
}

fn summarize<'a>(ensemble_size: usize, cells: impl Iterator<Item = &'a SweepCell>, steps: usize) -> SizeSummary {
    let runs: Vec<&MetricSeries> = cells.filter_map(|c| c.outcome.as_ref().ok()).collect();
    let finals: Vec<f64> = runs.iter().map(|r| r.final_running_mean_error()).collect();
    let median_curve = if runs.is_empty() {
        Vec::new()
    } else {
        (0..steps)
            .map(|j| median(&runs.iter().map(|r| r.steps[j].running_mean_error).collect::<Vec<_>>()).unwrap_or(f64::NAN))
            .collect()
    };
    SizeSummary {
        ensemble_size,
        completed: runs.len(),
        median: median(&finals),
        iqr: interquartile_range(&finals),
        median_curve,
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linearly interpolated quantile (`p` in `[0, 1]`) of the sample.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values);
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

pub fn interquartile_range(values: &[f64]) -> Option<f64> {
    Some(quantile(values, 0.75)? - quantile(values, 0.25)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate_rk4;

    fn short(steps: usize) -> TwinExperimentConfig {
        TwinExperimentConfig { steps, ..Default::default() }
    }

    #[test]
    fn truth_with_no_steps() {
        let cfg = short(0);
        assert_eq!(generate_truth(&cfg).unwrap(), vec![cfg.truth_init.clone()]);
    }

    #[test]
    fn truth_from_equilibrium_stays() {
        let cfg = TwinExperimentConfig { truth_init: Vector::zeros(3), ..short(1) };
        assert_eq!(generate_truth(&cfg).unwrap()[1], Vector::zeros(3));
    }

    #[test]
    fn truth_first_step_matches_integrator() {
        let cfg = short(1);
        let truth = generate_truth(&cfg).unwrap();
        assert_eq!(truth[1], integrate_rk4(&cfg.lorenz, &cfg.truth_init, 0.1, 10).unwrap());
    }

    #[test]
    fn noiseless_observations_equal_truth() {
        let cfg = TwinExperimentConfig { obs_noise_var: 0.0, ..short(5) };
        let truth = generate_truth(&cfg).unwrap();
        let obs = synthesize_observations(&truth, &cfg, &RngStream::new(1)).unwrap();
        assert_eq!(obs.len(), 5);
        assert_eq!(obs, truth[1..].to_vec());
    }

    #[test]
    fn observations_are_seeded() {
        let cfg = short(5);
        let truth = generate_truth(&cfg).unwrap();
        let a = synthesize_observations(&truth, &cfg, &RngStream::new(1)).unwrap();
        let b = synthesize_observations(&truth, &cfg, &RngStream::new(1)).unwrap();
        let c = synthesize_observations(&truth, &cfg, &RngStream::new(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn single_step_smoke() {
        let s = run_twin(&short(1), 20, 0).unwrap();
        assert_eq!(s.len(), 1);
        let m = &s.steps[0];
        assert!(m.analysis_mean.is_finite() && m.prediction_mean.is_finite());
        assert!(m.running_mean_error.is_finite());
    }

    #[test]
    fn invalid_configs() {
        assert!(run_twin(&short(0), 20, 0).is_err());
        let cfg = TwinExperimentConfig { ensemble_sizes: vec![20, 1], ..short(2) };
        assert!(sweep_ensemble_sizes(&cfg).is_err());
        let cfg = TwinExperimentConfig { obs_noise_var: 0.0, ..short(2) };
        assert_eq!(cfg.check().unwrap_err().0, "obs_noise_var");
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(interquartile_range(&[1.0, 2.0, 3.0, 4.0, 5.0]), Some(2.0));
        assert_eq!(median(&[]), None);
    }
}
