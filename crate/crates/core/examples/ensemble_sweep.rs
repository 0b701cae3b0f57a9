//! Ensemble-size sweep over 20 seeds, written to a directory as CSV and SVG.
//!
//! `cargo run --release --example ensemble_sweep -- sweep_out`

use std::path::PathBuf;

use enkf_lab::commands::{write_sweep, OutputFormat};
use enkf_lab::experiments::{sweep_ensemble_sizes, TwinExperimentConfig};

fn main() -> enkf_lab::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep_out".into()));
    let result = sweep_ensemble_sizes(&TwinExperimentConfig::default())?;
    for s in &result.summaries {
        println!(
            "N = {:>3}: {} runs, median final running error {:.4}, IQR {:.4}",
            s.ensemble_size,
            s.completed,
            s.median.unwrap_or(f64::NAN),
            s.iqr.unwrap_or(f64::NAN)
        );
    }
    for path in write_sweep(&result, &out, OutputFormat::Both)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
