//! File-producing commands behind the `enkf-lab` binary.
//!
//! Every CSV is comma separated with LF line endings and a header row, and
//! reals are printed with 17 significant digits so a reread reproduces the
//! in-memory values.

use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::rk4_path;
use crate::error::{Error, Result};
use crate::experiments::{run_twin, sweep_ensemble_sizes, MetricSeries, SweepResult, TwinExperimentConfig};
use crate::svg::{emit_panels, emit_svg, Axes, Curve, Panel};

/// Which artifacts a command writes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Svg,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::Both)
    }
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "x", "y", "z"];

pub const RUN_HEADER: [&str; 17] = [
    "step",
    "truth_x",
    "truth_y",
    "truth_z",
    "pred_mean_x",
    "pred_mean_y",
    "pred_mean_z",
    "anal_mean_x",
    "anal_mean_y",
    "anal_mean_z",
    "abs_pred_err_x",
    "abs_pred_err_y",
    "abs_pred_err_z",
    "abs_anal_err_x",
    "abs_anal_err_y",
    "abs_anal_err_z",
    "running_mean_err",
];

pub const SWEEP_HEADER: [&str; 3] = ["N", "seed", "final_running_mean_err"];
pub const SUMMARY_HEADER: [&str; 3] = ["N", "median", "iqr"];

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const TRAJECTORY_SVG: &str = "trajectory.svg";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
/// Per-step median running mean error for each ensemble size.
pub const SWEEP_CURVES_CSV: &str = "sweep_curves.csv";
pub const SWEEP_SVG: &str = "sweep.svg";
pub const WARNINGS_TXT: &str = "warnings.txt";

/// Fixed 17-significant-digit rendering of a real.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn run_file_stem(ensemble_size: usize, seed: u64) -> String {
    format!("run_N{ensemble_size}_seed{seed}")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// A CSV file read back into named numeric columns. Empty cells become NaN.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(csv_err)?;
            let row = record
                .iter()
                .map(|cell| {
                    if cell.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        cell.parse::<f64>().map_err(|_| {
                            Error::InvalidInput(format!("{}: `{cell}` is not a number", path.display()))
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    fn require(&self, name: &str, path: &Path) -> Result<Vec<f64>> {
        self.column(name)
            .ok_or_else(|| Error::InvalidInput(format!("{}: missing column `{name}`", path.display())))
    }
}

pub fn trajectory_svg(xz: &[(f64, f64)]) -> Result<String> {
    emit_svg(&[Curve::new("Lorenz 63", xz.to_vec())], &Axes::new("Trajectory of Lorenz 63", "x", "z"))
}

/// Three stacked panels of absolute prediction and analysis error.
pub fn run_svg(title: &str, steps: &[f64], prediction: [&[f64]; 3], analysis: [&[f64]; 3]) -> Result<String> {
    let panels: Vec<Panel> = ["x", "y", "z"]
        .iter()
        .enumerate()
        .map(|(k, dim)| Panel {
            axes: Axes::new(if k == 0 { title.to_string() } else { String::new() }, "Steps", *dim),
            curves: vec![
                Curve::new("Prediction", steps.iter().copied().zip(prediction[k].iter().copied()).collect()),
                Curve::new("Analysis", steps.iter().copied().zip(analysis[k].iter().copied()).collect()),
            ],
        })
        .collect();
    emit_panels(&panels)
}

/// One median running-mean-error curve per ensemble size.
pub fn sweep_svg(curves: &[(usize, Vec<f64>)]) -> Result<String> {
    let curves: Vec<Curve> = curves.iter().map(|(n, ys)| Curve::indexed(format!("{n} Ensemble"), ys)).collect();
    emit_svg(&curves, &Axes::new("Mean difference between truth and analysis mean", "Steps", "Mean difference"))
}

/// Integrates the truth for `trajectory_time` and writes every RK4 state.
pub fn cmd_trajectory(config: &TwinExperimentConfig, out: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    config.validate()?;
    ensure_dir(out)?;
    let h = config.dt / config.substeps as f64;
    let n_steps = (config.trajectory_time / h).round() as usize;
    let path = rk4_path(&config.lorenz, &config.truth_init, h, n_steps)?;
    let mut written = Vec::new();
    if format.csv() {
        let file = out.join(TRAJECTORY_CSV);
        write_csv(
            &file,
            &TRAJECTORY_HEADER,
            path.iter().enumerate().map(|(k, s)| {
                let mut row = vec![format_number(k as f64 * h)];
                row.extend(s.iter().map(|&v| format_number(v)));
                row
            }),
        )?;
        written.push(file);
    }
    if format.svg() {
        let file = out.join(TRAJECTORY_SVG);
        let xz: Vec<(f64, f64)> = path.iter().map(|s| (s[0], s[2])).collect();
        write_text(&file, &trajectory_svg(&xz)?)?;
        written.push(file);
    }
    Ok(written)
}

fn run_rows(series: &MetricSeries) -> impl Iterator<Item = Vec<String>> + '_ {
    series.steps.iter().map(|m| {
        let mut row = vec![m.step.to_string()];
        for v in [&m.truth, &m.prediction_mean, &m.analysis_mean] {
            row.extend(v.iter().map(|&x| format_number(x)));
        }
        row.extend(m.abs_prediction_error().into_iter().map(format_number));
        row.extend(m.abs_analysis_error().into_iter().map(format_number));
        row.push(format_number(m.running_mean_error));
        row
    })
}

fn series_svg(series: &MetricSeries) -> Result<String> {
    let steps: Vec<f64> = series.steps.iter().map(|m| m.step as f64).collect();
    let pred: Vec<Vec<f64>> = series.steps.iter().map(|m| m.abs_prediction_error()).collect();
    let anal: Vec<Vec<f64>> = series.steps.iter().map(|m| m.abs_analysis_error()).collect();
    let column = |rows: &[Vec<f64>], k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let p = [column(&pred, 0), column(&pred, 1), column(&pred, 2)];
    let a = [column(&anal, 0), column(&anal, 1), column(&anal, 2)];
    run_svg(
        &run_title(series.ensemble_size, series.seed),
        &steps,
        [&p[0], &p[1], &p[2]],
        [&a[0], &a[1], &a[2]],
    )
}

fn run_title(ensemble_size: usize, seed: u64) -> String {
    format!("Absolute error in the ensemble mean, {ensemble_size} members (seed {seed})")
}

/// One twin experiment. On failure nothing is left behind at the output
/// paths and the error is returned.
pub fn cmd_run(
    config: &TwinExperimentConfig,
    ensemble_size: usize,
    seed: u64,
    out: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let stem = run_file_stem(ensemble_size, seed);
    let csv_path = out.join(format!("{stem}.csv"));
    let svg_path = out.join(format!("{stem}.svg"));
    let series = match run_twin(config, ensemble_size, seed) {
        Ok(s) => s,
        Err(e) => {
            for p in [&csv_path, &svg_path] {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
    };
    ensure_dir(out)?;
    let mut written = Vec::new();
    if format.csv() {
        write_csv(&csv_path, &RUN_HEADER, run_rows(&series))?;
        written.push(csv_path);
    }
    if format.svg() {
        write_text(&svg_path, &series_svg(&series)?)?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Writes the sweep tables and plot for an already computed sweep.
pub fn write_sweep(result: &SweepResult, out: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    if format.csv() {
        let sweep = out.join(SWEEP_CSV);
        write_csv(
            &sweep,
            &SWEEP_HEADER,
            result
                .cells
                .iter()
                .map(|c| vec![c.ensemble_size.to_string(), c.seed.to_string(), format_opt(c.final_error())]),
        )?;
        written.push(sweep);

        let summary = out.join(SUMMARY_CSV);
        write_csv(
            &summary,
            &SUMMARY_HEADER,
            result
                .summaries
                .iter()
                .map(|s| vec![s.ensemble_size.to_string(), format_opt(s.median), format_opt(s.iqr)]),
        )?;
        written.push(summary);

        let curves = out.join(SWEEP_CURVES_CSV);
        let mut header = vec!["step".to_string()];
        header.extend(result.summaries.iter().map(|s| format!("N{}", s.ensemble_size)));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let steps = result.summaries.iter().map(|s| s.median_curve.len()).max().unwrap_or(0);
        write_csv(
            &curves,
            &header_refs,
            (0..steps).map(|j| {
                let mut row = vec![(j + 1).to_string()];
                row.extend(result.summaries.iter().map(|s| format_opt(s.median_curve.get(j).copied())));
                row
            }),
        )?;
        written.push(curves);
    }
    if format.svg() {
        let curves: Vec<(usize, Vec<f64>)> = result
            .summaries
            .iter()
            .filter(|s| !s.median_curve.is_empty())
            .map(|s| (s.ensemble_size, s.median_curve.clone()))
            .collect();
        if !curves.is_empty() {
            let file = out.join(SWEEP_SVG);
            write_text(&file, &sweep_svg(&curves)?)?;
            written.push(file);
        }
    }
    let failures: Vec<String> = result
        .failures()
        .map(|c| format!("N={} seed={}: {}", c.ensemble_size, c.seed, c.outcome.as_ref().unwrap_err()))
        .collect();
    if !failures.is_empty() {
        let file = out.join(WARNINGS_TXT);
        write_text(&file, &(failures.join("\n") + "\n"))?;
        written.push(file);
    }
    Ok(written)
}

/// Runs every `(N, seed)` cell and writes `sweep.csv`, `summary.csv`,
/// `sweep_curves.csv` and `sweep.svg`.
pub fn cmd_sweep(config: &TwinExperimentConfig, out: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let result = sweep_ensemble_sizes(config)?;
    write_sweep(&result, out, format)
}

fn parse_run_stem(stem: &str) -> Option<(usize, u64)> {
    let rest = stem.strip_prefix("run_N")?;
    let (n, seed) = rest.split_once("_seed")?;
    Some((n.parse().ok()?, seed.parse().ok()?))
}

/// Re-renders every SVG from the CSVs found in `dir`.
pub fn cmd_plot(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort();
    let mut written = Vec::new();
    for path in entries {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let stem = name.trim_end_matches(".csv");
        if name == TRAJECTORY_CSV {
            let t = CsvTable::read(&path)?;
            let xz: Vec<(f64, f64)> =
                t.require("x", &path)?.into_iter().zip(t.require("z", &path)?).collect();
            let file = dir.join(TRAJECTORY_SVG);
            write_text(&file, &trajectory_svg(&xz)?)?;
            written.push(file);
        } else if name == SWEEP_CURVES_CSV {
            let t = CsvTable::read(&path)?;
            let curves: Vec<(usize, Vec<f64>)> = t
                .header
                .iter()
                .filter_map(|h| h.strip_prefix('N').and_then(|n| n.parse().ok()).map(|n| (n, h)))
                .filter_map(|(n, h)| {
                    let ys = t.column(h)?;
                    (!ys.iter().any(|y| y.is_nan())).then_some((n, ys))
                })
                .collect();
            if !curves.is_empty() {
                let file = dir.join(SWEEP_SVG);
                write_text(&file, &sweep_svg(&curves)?)?;
                written.push(file);
            }
        } else if let Some((n, seed)) = parse_run_stem(stem) {
            let t = CsvTable::read(&path)?;
            let steps = t.require("step", &path)?;
            let col = |c: &str| t.require(c, &path);
            let p = [col("abs_pred_err_x")?, col("abs_pred_err_y")?, col("abs_pred_err_z")?];
            let a = [col("abs_anal_err_x")?, col("abs_anal_err_y")?, col("abs_anal_err_z")?];
            let file = dir.join(format!("{stem}.svg"));
            write_text(
                &file,
                &run_svg(&run_title(n, seed), &steps, [&p[0], &p[1], &p[2]], [&a[0], &a[1], &a[2]])?,
            )?;
            written.push(file);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_17_significant_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-10.0), "-1.0000000000000000e1");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789, std::f64::consts::PI] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn run_stems() {
        assert_eq!(run_file_stem(20, 3), "run_N20_seed3");
        assert_eq!(parse_run_stem("run_N20_seed3"), Some((20, 3)));
        assert_eq!(parse_run_stem("sweep"), None);
    }

    #[test]
    fn format_flags() {
        assert!(OutputFormat::Both.csv() && OutputFormat::Both.svg());
        assert!(OutputFormat::Csv.csv() && !OutputFormat::Csv.svg());
        assert!(!OutputFormat::Svg.csv() && OutputFormat::Svg.svg());
    }
}
