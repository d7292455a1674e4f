//! SVG 1.1 rendering of sweep heatmaps and strategy time series.
//!
//! Output is a pure function of the input: coordinates are printed with fixed
//! precision and nothing depends on time or environment.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::{FrequencySeries, SweepRow};

/// Colour map for values in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ColorScale {
    #[default]
    Viridis,
    Grayscale,
    RedGreen,
}

const VIRIDIS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

impl ColorScale {
    pub fn as_str(self) -> &'static str {
        match self {
            ColorScale::Viridis => "viridis",
            ColorScale::Grayscale => "grayscale",
            ColorScale::RedGreen => "redgreen",
        }
    }

    /// Hex colour for `v`, clamped to `[0, 1]`. NaN maps to the low end.
    pub fn color(self, v: f64) -> String {
        let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        let rgb = match self {
            ColorScale::Grayscale => {
                let g = (v * 255.0).round() as u8;
                [g, g, g]
            }
            ColorScale::RedGreen => lerp([215, 48, 39], [26, 152, 80], v),
            ColorScale::Viridis => {
                let k = VIRIDIS
                    .windows(2)
                    .position(|w| v <= w[1].0)
                    .unwrap_or(VIRIDIS.len() - 2);
                let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
                lerp(a.1, b.1, (v - a.0) / (b.0 - a.0))
            }
        };
        format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
    }
}

fn lerp(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for i in 0..3 {
        out[i] = (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
    }
    out
}

impl FromStr for ColorScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "viridis" => Ok(ColorScale::Viridis),
            "grayscale" | "greyscale" | "gray" | "grey" => Ok(ColorScale::Grayscale),
            "redgreen" | "red-green" => Ok(ColorScale::RedGreen),
            _ => Err(Error::InvalidConfig(format!("unknown color scale `{s}`"))),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#);
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
        escape(s)
    );
}

/// Distinct values in first-appearance order, compared exactly.
fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|u| u.to_bits() == v.to_bits()) {
            out.push(v);
        }
    }
    out
}

fn short(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.into() }
}

/// Heatmap of `eta_mean` over a rectangular sweep. Invalid cells are hatched.
pub fn heatmap_svg(rows: &[SweepRow], scale: ColorScale) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::GridMismatch("sweep has no cells".into()));
    }
    let xs = distinct(rows.iter().map(|r| r.cell.x_value));
    let ys = distinct(rows.iter().map(|r| r.cell.y_value));
    if xs.len() * ys.len() != rows.len() {
        return Err(Error::GridMismatch(format!(
            "{} cells do not form a {}x{} grid",
            rows.len(),
            xs.len(),
            ys.len()
        )));
    }
    let mut grid: Vec<Option<&SweepRow>> = vec![None; rows.len()];
    for r in rows {
        let ix = xs.iter().position(|v| v.to_bits() == r.cell.x_value.to_bits()).unwrap();
        let iy = ys.iter().position(|v| v.to_bits() == r.cell.y_value.to_bits()).unwrap();
        let slot = &mut grid[ix * ys.len() + iy];
        if slot.is_some() {
            return Err(Error::GridMismatch(format!(
                "duplicate cell at ({}, {})",
                r.cell.x_value, r.cell.y_value
            )));
        }
        *slot = Some(r);
    }
    // Axes increase rightwards and upwards regardless of row order.
    let mut x_order: Vec<usize> = (0..xs.len()).collect();
    x_order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut y_order: Vec<usize> = (0..ys.len()).collect();
    y_order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));

    let (left, top, plot) = (70.0, 30.0, 400.0);
    let (cw, ch) = (plot / xs.len() as f64, plot / ys.len() as f64);
    let bar_x = left + plot + 30.0;
    let (width, height) = (bar_x + 70.0, top + plot + 60.0);

    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        r##"<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6"><rect width="6" height="6" fill="#dddddd"/><path d="M0,6 L6,0" stroke="#555555" stroke-width="1"/></pattern>"##
    );
    let _ = write!(out, r#"<linearGradient id="bar" x1="0" y1="1" x2="0" y2="0">"#);
    for k in 0..=10 {
        let v = k as f64 / 10.0;
        let _ = write!(out, r#"<stop offset="{v:.1}" stop-color="{}"/>"#, scale.color(v));
    }
    let _ = writeln!(out, "</linearGradient></defs>");

    for (px, &ix) in x_order.iter().enumerate() {
        for (py, &iy) in y_order.iter().enumerate() {
            let r = grid[ix * ys.len() + iy].unwrap();
            let fill = if r.cell.valid {
                scale.color(r.cell.eta_mean)
            } else {
                "url(#hatch)".to_string()
            };
            let x = left + px as f64 * cw;
            let y = top + plot - (py + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{fill}"><title>{}={}, {}={}: eta={}</title></rect>"#,
                escape(&r.x_param),
                r.cell.x_value,
                escape(&r.y_param),
                r.cell.y_value,
                r.cell.eta_mean
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{plot:.2}" height="{plot:.2}" fill="none" stroke="black"/>"#
    );

    let bottom = top + plot;
    text(&mut out, left, bottom + 16.0, "start", &short(xs[x_order[0]]));
    text(&mut out, left + plot, bottom + 16.0, "end", &short(xs[*x_order.last().unwrap()]));
    text(&mut out, left - 6.0, bottom, "end", &short(ys[y_order[0]]));
    text(&mut out, left - 6.0, top + 10.0, "end", &short(ys[*y_order.last().unwrap()]));
    text(&mut out, left + plot / 2.0, bottom + 40.0, "middle", &rows[0].x_param);
    let (lx, ly) = (left - 40.0, top + plot / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        escape(&rows[0].y_param)
    );

    let _ = writeln!(
        out,
        r#"<rect class="colorbar" x="{bar_x:.2}" y="{top:.2}" width="20" height="{plot:.2}" fill="url(#bar)" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        text(&mut out, bar_x + 26.0, top + plot - v * plot + 4.0, "start", &short(v));
    }
    text(&mut out, bar_x + 10.0, top - 10.0, "middle", "eta");
    out.push_str("</svg>\n");
    Ok(out)
}

/// Line colours for the user series, AllD / BMedia / GMedia / AllC.
pub const USER_COLORS: [&str; 4] = ["#d62728", "#e6b800", "#1f77b4", "#2ca02c"];
/// Line colours for the creator series, Unsafe / Safe.
pub const CREATOR_COLORS: [&str; 2] = ["#d62728", "#2ca02c"];
const USER_LABELS: [&str; 4] = ["AllD", "BMedia", "GMedia", "AllC"];
const CREATOR_LABELS: [&str; 2] = ["Unsafe", "Safe"];

/// Keeps at most `max` evenly spaced indices, always including the last.
fn thin(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..max).map(|k| k * (n - 1) / (max - 1)).collect();
    idx.dedup();
    idx
}

/// Three stacked panels: user frequencies, creator frequencies and eta.
pub fn timeseries_svg(series: &FrequencySeries) -> Result<String> {
    let n = series.times.len();
    if n == 0 {
        return Err(Error::Malformed("time series is empty".into()));
    }
    if series.users.len() != n || series.creators.len() != n || series.eta.len() != n {
        return Err(Error::Malformed(format!(
            "column lengths differ: {} times, {} user rows, {} creator rows, {} eta values",
            n,
            series.users.len(),
            series.creators.len(),
            series.eta.len()
        )));
    }
    let idx = thin(n, 2000);
    let t0 = series.times[0];
    let t1 = series.times[n - 1];
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };

    let (left, plot_w, panel_h, gap, top) = (60.0, 600.0, 140.0, 40.0, 20.0);
    let width = left + plot_w + 110.0;
    let height = top + 3.0 * (panel_h + gap) + 20.0;
    let mut out = String::new();
    header(&mut out, width, height);

    let panel = |out: &mut String, k: usize, title: &str, lines: Vec<(&str, &str, Vec<f64>)>| {
        let y0 = top + k as f64 * (panel_h + gap);
        let _ = writeln!(
            out,
            r#"<rect x="{left:.2}" y="{y0:.2}" width="{plot_w:.2}" height="{panel_h:.2}" fill="none" stroke="black"/>"#
        );
        text(out, left - 6.0, y0 + 10.0, "end", "1");
        text(out, left - 6.0, y0 + panel_h, "end", "0");
        text(out, left + plot_w / 2.0, y0 - 6.0, "middle", title);
        for (j, (label, color, values)) in lines.iter().enumerate() {
            let pts: Vec<String> = idx
                .iter()
                .map(|&i| {
                    let x = left + (series.times[i] - t0) / span * plot_w;
                    let v = if values[i].is_finite() { values[i].clamp(0.0, 1.0) } else { 0.0 };
                    format!("{x:.2},{:.2}", y0 + panel_h - v * panel_h)
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="series" data-series="{label}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            let ly = y0 + 12.0 + j as f64 * 16.0;
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#,
                left + plot_w + 10.0,
                left + plot_w + 28.0
            );
            text(out, left + plot_w + 32.0, ly + 4.0, "start", label);
        }
    };

    let users = (0..4)
        .map(|s| (USER_LABELS[s], USER_COLORS[s], series.users.iter().map(|u| u[s]).collect()))
        .collect();
    panel(&mut out, 0, "users", users);
    let creators = (0..2)
        .map(|s| {
            (CREATOR_LABELS[s], CREATOR_COLORS[s], series.creators.iter().map(|c| c[s]).collect())
        })
        .collect();
    panel(&mut out, 1, "creators", creators);
    panel(&mut out, 2, "cooperation", vec![("eta", "#000000", series.eta.clone())]);

    let axis_y = top + 3.0 * (panel_h + gap) - gap + 16.0;
    text(&mut out, left, axis_y, "start", &short(t0));
    text(&mut out, left + plot_w, axis_y, "end", &short(t1));
    text(&mut out, left + plot_w / 2.0, axis_y, "middle", series.time_label);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SweepCell;

    fn row(x: f64, y: f64, eta: f64, valid: bool) -> SweepRow {
        SweepRow {
            x_param: "c_i".into(),
            y_param: "c_c".into(),
            cell: SweepCell {
                x_value: x,
                y_value: y,
                eta_mean: eta,
                eta_std: 0.0,
                n_replicates: 1,
                valid,
            },
        }
    }

    #[test]
    fn two_by_two_heatmap() {
        let rows = vec![
            row(0.0, 0.0, 0.1, true),
            row(0.0, 1.0, 0.9, true),
            row(1.0, 0.0, 0.5, false),
            row(1.0, 1.0, 1.0, true),
        ];
        let svg = heatmap_svg(&rows, ColorScale::Viridis).unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 4);
        assert_eq!(svg.matches("url(#hatch)").count(), 1);
        assert!(svg.contains(r#"class="colorbar""#));
        assert!(svg.contains(">c_i</text>") && svg.contains(">c_c</text>"));
        assert_eq!(svg, heatmap_svg(&rows, ColorScale::Viridis).unwrap());
    }

    #[test]
    fn bad_grids() {
        assert!(matches!(heatmap_svg(&[], ColorScale::Viridis), Err(Error::GridMismatch(_))));
        let rows = vec![row(0.0, 0.0, 0.1, true), row(0.0, 1.0, 0.1, true), row(1.0, 0.0, 0.1, true)];
        assert!(heatmap_svg(&rows, ColorScale::Viridis).is_err());
        let rows = vec![row(0.0, 0.0, 0.1, true), row(0.0, 0.0, 0.1, true)];
        assert!(heatmap_svg(&rows, ColorScale::Viridis).is_err());
    }

    #[test]
    fn color_scales() {
        assert_eq!(ColorScale::Viridis.color(0.0), "#440154");
        assert_eq!(ColorScale::Viridis.color(1.0), "#fde725");
        assert_eq!(ColorScale::Viridis.color(7.0), "#fde725");
        assert_eq!(ColorScale::Grayscale.color(0.5), "#808080");
        assert_eq!("grey".parse::<ColorScale>().unwrap(), ColorScale::Grayscale);
        assert!("jet".parse::<ColorScale>().is_err());
    }

    #[test]
    fn timeseries_panels() {
        let s = FrequencySeries {
            time_label: "t",
            times: vec![0.0, 1.0, 2.0],
            users: vec![[0.25; 4]; 3],
            creators: vec![[0.5, 0.5]; 3],
            eta: vec![0.5, 0.6, 0.7],
        };
        let svg = timeseries_svg(&s).unwrap();
        assert_eq!(svg.matches(r#"class="series""#).count(), 7);
        assert!(svg.contains(r##"data-series="AllD" fill="none" stroke="#d62728""##));
        assert!(svg.contains(r##"data-series="Safe" fill="none" stroke="#2ca02c""##));

        let mut bad = s.clone();
        bad.eta.pop();
        assert!(timeseries_svg(&bad).is_err());
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let idx = thin(10_001, 2000);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), 10_000);
        assert!(idx.len() <= 2000);
        assert_eq!(thin(5, 2000), vec![0, 1, 2, 3, 4]);
    }
}
