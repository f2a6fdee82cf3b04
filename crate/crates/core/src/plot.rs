//! Minimal SVG emitters: line charts for traces and a marching-squares
//! contour of the safe set.

use std::fmt::Write;

use crate::integrator::SimulationTrace;
use crate::material::SafeSetGrid;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Tick positions at 1, 2 or 5 times a power of ten.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn axes(svg: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let (l, r) = (LEFT, WIDTH - RIGHT);
    let (t, b) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        r - l,
        b - t
    );
    for x in nice_ticks(frame.x0, frame.x1, 6) {
        let px = frame.px(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{t}" stroke="#ddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            b + 18.0,
            fmt_tick(x)
        );
    }
    for y in nice_ticks(frame.y0, frame.y1, 5) {
        let py = frame.py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{l}" y1="{py:.2}" x2="{r}" y2="{py:.2}" stroke="#ddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            l - 6.0,
            py + 4.0,
            fmt_tick(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Line chart. `hlines` are labelled horizontal reference lines.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], hlines: &[(f64, &str)]) -> String {
    let (x0, x1) = padded_range(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = padded_range(
        series
            .iter()
            .flat_map(|s| s.y.iter().copied())
            .chain(hlines.iter().map(|h| h.0)),
    );
    let frame = Frame { x0, x1, y0, y1 };
    let mut svg = header();
    axes(&mut svg, &frame, title, x_label, y_label);
    for &(y, label) in hlines {
        let py = frame.py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#c00" stroke-dasharray="2 3"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{:.2}" font-size="11" fill="#c00">{}</text>"##,
            WIDTH - RIGHT + 6.0,
            py + 4.0,
            escape(label)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut points = String::new();
        for (&x, &y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", frame.px(x), frame.py(y));
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.6"{dash} points="{}"/>"#,
            s.color,
            points.trim_end()
        );
        let ly = TOP + 14.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 22.0,
            s.color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The four trace panels as `(file name, svg)`.
pub fn trace_panels(trace: &SimulationTrace) -> Vec<(&'static str, String)> {
    let t = trace.column(|r| r.t);
    let col = |f: fn(&crate::integrator::TraceRow) -> f64| trace.column(f);
    let (lt, lz) = (col(|r| r.lambda_theta), col(|r| r.lambda_z));
    let (dt, dz) = (col(|r| r.dlambda_theta), col(|r| r.dlambda_z));
    let (un, us) = (col(|r| r.u_nom / 1000.0), col(|r| r.u_safe / 1000.0));
    let h = col(|r| r.h);
    let s = |label, y, color, dashed| Series {
        label,
        x: &t,
        y,
        color,
        dashed,
    };
    vec![
        (
            "stretches.svg",
            line_chart(
                "Principal stretches",
                "t [s]",
                "stretch [-]",
                &[s("λθ", &lt, "#1f77b4", false), s("λz", &lz, "#ff7f0e", false)],
                &[],
            ),
        ),
        (
            "stretch_rates.svg",
            line_chart(
                "Stretch rates",
                "t [s]",
                "rate [1/s]",
                &[s("dλθ/dt", &dt, "#1f77b4", false), s("dλz/dt", &dz, "#ff7f0e", false)],
                &[],
            ),
        ),
        (
            "pressure.svg",
            line_chart(
                "Applied pressure",
                "t [s]",
                "pressure [kPa]",
                &[s("nominal", &un, "#7f7f7f", true), s("safe", &us, "#2ca02c", false)],
                &[],
            ),
        ),
        (
            "barrier.svg",
            line_chart(
                "Safety function",
                "t [s]",
                "h [J/m³]",
                &[s("h", &h, "#9467bd", false)],
                &[(0.0, "h = 0")],
            ),
        ),
    ]
}

/// Segments of the `level` isoline of `values[i][j]` sampled at `(xs[i], ys[j])`.
///
/// Ambiguous saddle cells are split according to the cell-centre average.
pub fn marching_squares(xs: &[f64], ys: &[f64], values: &[Vec<f64>], level: f64) -> Vec<[(f64, f64); 2]> {
    let mut segments = Vec::new();
    let lerp = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        let w = (level - a.2) / (b.2 - a.2);
        (a.0 + w * (b.0 - a.0), a.1 + w * (b.1 - a.1))
    };
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            // Corners counter-clockwise from (i, j).
            let c = [
                (xs[i], ys[j], values[i][j]),
                (xs[i + 1], ys[j], values[i + 1][j]),
                (xs[i + 1], ys[j + 1], values[i + 1][j + 1]),
                (xs[i], ys[j + 1], values[i][j + 1]),
            ];
            if c.iter().any(|p| !p.2.is_finite()) {
                continue;
            }
            let above: Vec<bool> = c.iter().map(|p| p.2 >= level).collect();
            // Crossing points on edges k = (c[k], c[k+1]).
            let cross: Vec<Option<(f64, f64)>> = (0..4)
                .map(|k| {
                    let (a, b) = (c[k], c[(k + 1) % 4]);
                    (above[k] != above[(k + 1) % 4]).then(|| lerp(a, b))
                })
                .collect();
            let hits: Vec<usize> = (0..4).filter(|&k| cross[k].is_some()).collect();
            match hits.len() {
                2 => segments.push([cross[hits[0]].unwrap(), cross[hits[1]].unwrap()]),
                4 => {
                    let centre = c.iter().map(|p| p.2).sum::<f64>() / 4.0;
                    // Pair each edge with a neighbour so that the centre's side stays connected.
                    let pairs = if (centre >= level) == above[0] {
                        [(0, 1), (2, 3)]
                    } else {
                        [(3, 0), (1, 2)]
                    };
                    for (a, b) in pairs {
                        segments.push([cross[a].unwrap(), cross[b].unwrap()]);
                    }
                }
                _ => {}
            }
        }
    }
    segments
}

/// Safe-set map: shaded `h ≥ 0` nodes and the `h = 0` contour.
pub fn safeset_svg(grid: &SafeSetGrid) -> String {
    let xs = &grid.theta_axis;
    let ys = &grid.z_axis;
    let frame = Frame {
        x0: xs[0],
        x1: *xs.last().expect("grid axes are non-empty"),
        y0: ys[0],
        y1: *ys.last().expect("grid axes are non-empty"),
    };
    let mut svg = header();
    let cw = (frame.px(xs[1]) - frame.px(xs[0])).abs();
    let ch = (frame.py(ys[0]) - frame.py(ys[1])).abs();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            if grid.is_safe(i, j) {
                let _ = writeln!(
                    svg,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#cfe8cf"/>"##,
                    frame.px(x) - cw / 2.0,
                    frame.py(y) - ch / 2.0,
                    cw,
                    ch
                );
            }
        }
    }
    axes(&mut svg, &frame, "Safe set", "λθ [-]", "λz [-]");
    let mut path = String::new();
    for [a, b] in marching_squares(xs, ys, &grid.h_values, 0.0) {
        let _ = write!(
            path,
            "M{:.2} {:.2}L{:.2} {:.2}",
            frame.px(a.0),
            frame.py(a.1),
            frame.px(b.0),
            frame.py(b.1)
        );
    }
    let _ = writeln!(
        svg,
        r##"<path d="{path}" fill="none" stroke="#c00" stroke-width="1.8"/>"##
    );
    let lx = WIDTH - RIGHT + 12.0;
    let _ = writeln!(
        svg,
        r##"<rect x="{lx}" y="{}" width="22" height="12" fill="#cfe8cf"/>"##,
        TOP + 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">h ≥ 0</text>"#,
        lx + 28.0,
        TOP + 18.0
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="#c00" stroke-width="2"/>"##,
        TOP + 34.0,
        lx + 22.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">h = 0</text>"#,
        lx + 28.0,
        TOP + 38.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_numbers() {
        let t = nice_ticks(0.0, 1.0, 5);
        assert_eq!(t.len(), 6);
        for (k, v) in t.iter().enumerate() {
            assert!((v - 0.2 * k as f64).abs() < 1e-12);
        }
        assert_eq!(nice_ticks(-3.0, 12.0, 3), vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn circle_contour_lies_on_the_circle() {
        let axis: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let values: Vec<Vec<f64>> = axis
            .iter()
            .map(|&x| axis.iter().map(|&y| 1.0 - x * x - y * y).collect())
            .collect();
        let segs = marching_squares(&axis, &axis, &values, 0.0);
        assert!(segs.len() > 40);
        for s in &segs {
            for p in s {
                let r = (p.0 * p.0 + p.1 * p.1).sqrt();
                assert!((r - 1.0).abs() < 0.01, "r = {r}");
            }
        }
    }

    #[test]
    fn saddle_cell_gives_two_segments() {
        let values = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let segs = marching_squares(&[0.0, 1.0], &[0.0, 1.0], &values, 0.0);
        assert_eq!(segs.len(), 2);
    }

    #[test]
    fn chart_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, f64::NAN, 3.0];
        let svg = line_chart(
            "t<1",
            "x",
            "y",
            &[Series {
                label: "a&b",
                x: &x,
                y: &y,
                color: "red",
                dashed: true,
            }],
            &[(0.0, "zero")],
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("t&lt;1") && svg.contains("a&amp;b"));
        assert!(!svg.contains("NaN"));
    }
}
