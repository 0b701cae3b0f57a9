//! Static line charts rendered as standalone SVG 1.1 text.
//!
//! Output depends only on the input data, so identical input gives
//! byte-identical documents. Each curve is one `<polyline>`; axes, ticks and
//! legend swatches use other elements.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const WIDTH: f64 = 760.0;
const PANEL_HEIGHT: f64 = 280.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"];

/// A labeled sequence of `(x, y)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }

    /// Points `(1, y₀), (2, y₁), …`.
    pub fn indexed(label: impl Into<String>, ys: &[f64]) -> Self {
        Self::new(label, ys.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl Axes {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub axes: Axes,
    pub curves: Vec<Curve>,
}

/// One chart with every curve on shared linear axes.
pub fn emit_svg(curves: &[Curve], axes: &Axes) -> Result<String> {
    emit_panels(&[Panel { axes: axes.clone(), curves: curves.to_vec() }])
}

/// Charts stacked vertically in one document.
pub fn emit_panels(panels: &[Panel]) -> Result<String> {
    if panels.is_empty() {
        return Err(Error::InvalidInput("nothing to plot".into()));
    }
    for panel in panels {
        validate(&panel.curves)?;
    }
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, PANEL_HEIGHT * i as f64);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn validate(curves: &[Curve]) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("a chart needs at least one curve".into()));
    }
    for c in curves {
        if c.points.is_empty() {
            return Err(Error::InvalidInput(format!("curve `{}` has no points", c.label)));
        }
        if let Some(index) = c.points.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinitePlotValue { curve: c.label.clone(), index });
        }
    }
    Ok(())
}

struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

/// Tick positions at 1, 2 or 5 times a power of ten inside `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), step)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).clamp(0.0, 8.0) as usize;
    let s = format!("{v:.decimals$}");
    // avoid "-0" labels
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn render_panel(out: &mut String, panel: &Panel, top: f64) {
    let plot_left = MARGIN_LEFT;
    let plot_right = WIDTH - MARGIN_RIGHT;
    let plot_top = top + MARGIN_TOP;
    let plot_bottom = top + PANEL_HEIGHT - MARGIN_BOTTOM;

    let (x_lo, x_hi) = padded_range(panel.curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)));
    let (y_lo, y_hi) = padded_range(panel.curves.iter().flat_map(|c| c.points.iter().map(|p| p.1)));
    let xs = Scale { lo: x_lo, hi: x_hi, px_lo: plot_left, px_hi: plot_right };
    let ys = Scale { lo: y_lo, hi: y_hi, px_lo: plot_bottom, px_hi: plot_top };

    let _ = writeln!(out, "<g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14" font-weight="bold">{}</text>"#,
        (plot_left + plot_right) / 2.0,
        top + 22.0,
        escape(&panel.axes.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{plot_left:.2}" y="{plot_top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        plot_right - plot_left,
        plot_bottom - plot_top
    );

    let (x_ticks, x_step) = nice_ticks(x_lo, x_hi);
    for t in x_ticks {
        let px = xs.map(t);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{plot_bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            plot_bottom + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            plot_bottom + 18.0,
            tick_label(t, x_step)
        );
    }
    let (y_ticks, y_step) = nice_ticks(y_lo, y_hi);
    for t in y_ticks {
        let py = ys.map(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{plot_left:.2}" y2="{py:.2}" stroke="black"/>"#,
            plot_left - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            plot_left - 8.0,
            py + 4.0,
            tick_label(t, y_step)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (plot_left + plot_right) / 2.0,
        plot_bottom + 38.0,
        escape(&panel.axes.x_label)
    );
    let (lx, ly) = (plot_left - 58.0, (plot_top + plot_bottom) / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        escape(&panel.axes.y_label)
    );

    for (i, curve) in panel.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> =
            curve.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", xs.map(x), ys.map(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let legend_y = plot_top + 12.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{color}" stroke-width="2"/>"#,
            plot_right + 12.0,
            plot_right + 36.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            plot_right + 42.0,
            legend_y + 4.0,
            escape(&curve.label)
        );
    }
    let _ = writeln!(out, "</g>");
}
