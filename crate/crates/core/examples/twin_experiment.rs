//! A single Lorenz 63 twin experiment with the default setup.
//!
//! `cargo run --release --example twin_experiment -- 50 3` runs 50 members
//! with seed 3.

use enkf_lab::experiments::{run_twin, TwinExperimentConfig};

fn main() -> enkf_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map_or(20, |s| s.parse().expect("ensemble size"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let config = TwinExperimentConfig::default();
    let series = run_twin(&config, size, seed)?;
    println!("{:>5} {:>10} {:>10} {:>12} {:>12}", "step", "|v − m̂|", "|v − m|", "tr Ĉ", "running");
    for m in series.steps.iter().filter(|m| m.step % 10 == 0 || m.step <= 3) {
        let pred = m.truth.sub(&m.prediction_mean)?.norm();
        println!(
            "{:>5} {:>10.4} {:>10.4} {:>12.4e} {:>12.4}",
            m.step,
            pred,
            m.analysis_error_norm(),
            m.prediction_covariance.trace()?,
            m.running_mean_error
        );
    }
    println!("final running mean error, N = {size}, seed {seed}: {:.4}", series.final_running_mean_error());
    Ok(())
}
