//! Reading an experiment description from `key = value` text.

use enkf_lab::config::{parse_config, serialize_config};
use enkf_lab::experiments::run_twin;

const TEXT: &str = "\
# noisier observations; model noise keeps the ensemble spread alive
steps = 40
obs_noise_var = 0.1
process_noise_var = 0.01
ensemble_sizes = 10, 40
seeds = 5, 6
";

fn main() -> enkf_lab::Result<()> {
    let config = parse_config(TEXT)?;
    print!("{}", serialize_config(&config));
    for &n in &config.ensemble_sizes {
        for &seed in &config.seeds {
            let series = run_twin(&config, n, seed)?;
            println!("N = {n}, seed {seed}: final running error {:.4}", series.final_running_mean_error());
        }
    }
    match parse_config("stpes = 10") {
        Err(e) => println!("typo rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
