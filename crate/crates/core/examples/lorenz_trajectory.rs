//! Integrates the Lorenz 63 system and writes the x–z projection as SVG.
//!
//! `cargo run --example lorenz_trajectory -- lorenz.svg`

use enkf_lab::dynamics::{rk4_path, Lorenz63Params};
use enkf_lab::linalg::Vector;
use enkf_lab::svg::{emit_svg, Axes, Curve};

fn main() -> enkf_lab::Result<()> {
    let target = std::env::args().nth(1).unwrap_or_else(|| "lorenz.svg".into());
    let start = Vector::from_slice(&[-10.0, -10.0, 20.0])?;
    let path = rk4_path(&Lorenz63Params::default(), &start, 0.01, 3000)?;

    let extent = path.iter().map(Vector::max_abs).fold(0.0, f64::max);
    println!("{} states, largest |component| {extent:.2}, final state {}", path.len(), path.last().unwrap());

    let xz = Curve::new("Lorenz", path.iter().map(|s| (s[0], s[2])).collect());
    let svg = emit_svg(&[xz], &Axes::new("Lorenz 63 attractor", "x", "z"))?;
    std::fs::write(&target, svg).map_err(|source| enkf_lab::Error::Io { path: target.clone().into(), source })?;
    println!("wrote {target}");
    Ok(())
}
