//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, vectors and lists are comma
//! separated. Unknown or repeated keys are errors; absent keys keep their
//! defaults.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::TwinExperimentConfig;
use crate::linalg::Vector;

/// Every recognized key with a short description.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("truth_init", "starting point of the true trajectory"),
    ("guess_init", "center of the initial ensemble"),
    ("dt", "time between assimilations"),
    ("steps", "number of assimilation cycles"),
    ("substeps", "RK4 steps per assimilation interval"),
    ("obs_noise_var", "observation noise variance (Γ = var·I)"),
    ("process_noise_var", "model noise variance (Σ = var·I)"),
    ("init_spread", "standard deviation of the initial ensemble"),
    ("q_jitter", "q added to the forecast covariance diagonal before the gain"),
    ("ensemble_sizes", "ensemble sizes to run"),
    ("seeds", "random seeds to run"),
    ("sigma", "Lorenz 63 σ"),
    ("r", "Lorenz 63 r"),
    ("b", "Lorenz 63 b"),
    ("trajectory_time", "length of the trajectory command's integration"),
];

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn value_of(config: &TwinExperimentConfig, key: &str) -> String {
    match key {
        "truth_init" => join(config.truth_init.iter()),
        "guess_init" => join(config.guess_init.iter()),
        "dt" => config.dt.to_string(),
        "steps" => config.steps.to_string(),
        "substeps" => config.substeps.to_string(),
        "obs_noise_var" => config.obs_noise_var.to_string(),
        "process_noise_var" => config.process_noise_var.to_string(),
        "init_spread" => config.init_spread.to_string(),
        "q_jitter" => config.q_jitter.to_string(),
        "ensemble_sizes" => join(&config.ensemble_sizes),
        "seeds" => join(&config.seeds),
        "sigma" => config.lorenz.sigma.to_string(),
        "r" => config.lorenz.r.to_string(),
        "b" => config.lorenz.b.to_string(),
        "trajectory_time" => config.trajectory_time.to_string(),
        _ => unreachable!("unknown key {key}"),
    }
}

/// Renders a config that [`parse_config`] reads back unchanged.
pub fn serialize_config(config: &TwinExperimentConfig) -> String {
    let mut out = String::new();
    for (key, _) in CONFIG_KEYS {
        let _ = writeln!(out, "{key} = {}", value_of(config, key));
    }
    out
}

/// Table of keys with their default values, for `--help`.
pub fn config_reference() -> String {
    let defaults = TwinExperimentConfig::default();
    let mut out = String::from("Config keys (file given with --config; defaults shown):\n");
    for (key, doc) in CONFIG_KEYS {
        let _ = writeln!(out, "  {key:<18} = {:<24} {doc}", value_of(&defaults, key));
    }
    out
}

pub fn parse_config(text: &str) -> Result<TwinExperimentConfig> {
    let mut config = TwinExperimentConfig::default();
    let mut lines: HashMap<&'static str, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |key: &str, message: String| Error::Config { line: line_no, key: key.to_string(), message };
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(content, "expected `key = value`".into()));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&(known, _)) = CONFIG_KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(err(key, "unknown key".into()));
        };
        if lines.insert(known, line_no).is_some() {
            return Err(err(key, "key given more than once".into()));
        }
        apply(&mut config, known, value).map_err(|m| err(key, m))?;
    }
    config.check().map_err(|(key, message)| Error::Config {
        line: lines.get(key).copied().unwrap_or(0),
        key: key.to_string(),
        message,
    })?;
    Ok(config)
}

fn apply(config: &mut TwinExperimentConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "truth_init" => config.truth_init = parse_vector(value)?,
        "guess_init" => config.guess_init = parse_vector(value)?,
        "dt" => config.dt = parse_real(value)?,
        "steps" => config.steps = parse_count(value)?,
        "substeps" => config.substeps = parse_count(value)?,
        "obs_noise_var" => config.obs_noise_var = parse_real(value)?,
        "process_noise_var" => config.process_noise_var = parse_real(value)?,
        "init_spread" => config.init_spread = parse_real(value)?,
        "q_jitter" => config.q_jitter = parse_real(value)?,
        "ensemble_sizes" => config.ensemble_sizes = parse_list(value, parse_count)?,
        "seeds" => config.seeds = parse_list(value, parse_seed)?,
        "sigma" => config.lorenz.sigma = parse_real(value)?,
        "r" => config.lorenz.r = parse_real(value)?,
        "b" => config.lorenz.b = parse_real(value)?,
        "trajectory_time" => config.trajectory_time = parse_real(value)?,
        _ => unreachable!("unknown key {key}"),
    }
    Ok(())
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a 64-bit unsigned integer", s.trim()))
}

fn parse_list<T>(
    s: &str,
    item: impl Fn(&str) -> std::result::Result<T, String>,
) -> std::result::Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(item).collect()
}

fn parse_vector(s: &str) -> std::result::Result<Vector, String> {
    let values = parse_list(s, parse_real)?;
    Vector::new(values).map_err(|e| e.to_string())
}
