//! Stacked line charts with the built-in SVG emitter.

use enkf_lab::svg::{emit_panels, Axes, Curve, Panel};

fn main() -> enkf_lab::Result<()> {
    let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    let wave = |f: fn(f64) -> f64| xs.iter().map(|&x| (x, f(x))).collect::<Vec<_>>();
    let panels = [
        Panel { axes: Axes::new("Trigonometric", "x", "y"), curves: vec![Curve::new("sin", wave(f64::sin)), Curve::new("cos", wave(f64::cos))] },
        Panel { axes: Axes::new("Decay", "step", "value"), curves: vec![Curve::indexed("0.9^j", &(0..40).map(|j| 0.9f64.powi(j)).collect::<Vec<_>>())] },
    ];
    print!("{}", emit_panels(&panels)?);
    Ok(())
}
