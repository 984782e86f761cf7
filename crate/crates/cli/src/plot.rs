//! Hand-rolled SVG renderings for report tables: a grouped-bar histogram
//! and a multi-series line chart. Plain shapes, no external assets.

use std::fmt::Write as _;

use fabtest::io::HistRow;
use fabtest::Real;

pub const CLASSICAL_COLOR: &str = "#4878a8";
pub const FAB_COLOR: &str = "#e8a33d";
pub const ORACLE_COLOR: &str = "#555555";

const WIDTH: Real = 720.0;
const HEIGHT: Real = 440.0;
const LEFT: Real = 64.0;
const RIGHT: Real = 24.0;
const TOP: Real = 44.0;
const BOTTOM: Real = 52.0;

/// One polyline on a line chart.
pub struct Series {
    pub label: String,
    pub color: &'static str,
    /// SVG stroke-dasharray, empty for a solid line.
    pub dash: &'static str,
    pub points: Vec<(Real, Real)>,
}

fn tick_label(v: Real) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 100.0 {
        return format!("{v:.0}");
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

struct Frame {
    x_lo: Real,
    x_hi: Real,
    y_lo: Real,
    y_hi: Real,
}

impl Frame {
    fn x(&self, v: Real) -> Real {
        LEFT + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: Real) -> Real {
        HEIGHT - BOTTOM - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open_svg(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    );
}

fn draw_axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = frame.x(frame.x_lo);
    let x1 = frame.x(frame.x_hi);
    let y0 = frame.y(frame.y_lo);
    let y1 = frame.y(frame.y_hi);
    let _ = write!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );
    for k in 0..=4 {
        let fx = frame.x_lo + (frame.x_hi - frame.x_lo) * k as Real / 4.0;
        let px = frame.x(fx);
        let _ = write!(
            out,
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 5.0,
            y0 + 20.0,
            tick_label(fx)
        );
        let fy = frame.y_lo + (frame.y_hi - frame.y_lo) * k as Real / 4.0;
        let py = frame.y(fy);
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(fy)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn draw_legend(out: &mut String, entries: &[(&str, &str)]) {
    let mut y = TOP + 8.0;
    for (label, color) in entries {
        let _ = write!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\">{label}</text>\n",
            WIDTH - RIGHT - 150.0,
            y - 10.0,
            WIDTH - RIGHT - 132.0,
            y
        );
        y += 18.0;
    }
}

/// Grouped-bar chart of a pooled p-value histogram: classical on the left
/// half of each bin, FAB on the right.
pub fn histogram_svg(title: &str, rows: &[HistRow]) -> String {
    let y_max = rows
        .iter()
        .map(|r| r.count_classical.max(r.count_fab))
        .max()
        .unwrap_or(1)
        .max(1) as Real;
    let x_lo = rows.first().map(|r| r.bin_lo).unwrap_or(0.0);
    let x_hi = rows.last().map(|r| r.bin_hi).unwrap_or(1.0);
    let frame = Frame {
        x_lo,
        x_hi,
        y_lo: 0.0,
        y_hi: y_max * 1.05,
    };
    let mut out = String::new();
    open_svg(&mut out, title);
    for r in rows {
        let x0 = frame.x(r.bin_lo);
        let x1 = frame.x(r.bin_hi);
        let half = (x1 - x0) / 2.0;
        let base = frame.y(0.0);
        for (count, offset, color) in [
            (r.count_classical, 0.0, CLASSICAL_COLOR),
            (r.count_fab, half, FAB_COLOR),
        ] {
            let top = frame.y(count as Real);
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{top}\" width=\"{half}\" height=\"{}\" \
                 fill=\"{color}\" fill-opacity=\"0.9\"/>",
                x0 + offset,
                base - top
            );
        }
    }
    draw_axes(&mut out, &frame, "p-value", "count");
    draw_legend(&mut out, &[("classical", CLASSICAL_COLOR), ("fab", FAB_COLOR)]);
    out.push_str("</svg>\n");
    out
}

/// Multi-series line chart; the y axis starts at zero.
pub fn curves_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut x_lo = Real::INFINITY;
    let mut x_hi = Real::NEG_INFINITY;
    let mut y_max: Real = 0.0;
    for s in series {
        for &(x, y) in &s.points {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_max = y_max.max(y);
        }
    }
    if !x_lo.is_finite() || x_hi <= x_lo {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    let frame = Frame {
        x_lo,
        x_hi,
        y_lo: 0.0,
        y_hi: y_max.max(1e-12) * 1.05,
    };
    let mut out = String::new();
    open_svg(&mut out, title);
    for s in series {
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
            .collect();
        let dash = if s.dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{}\"", s.dash)
        };
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{dash}/>",
            coords.join(" "),
            s.color
        );
    }
    draw_axes(&mut out, &frame, x_label, y_label);
    let entries: Vec<(&str, &str)> = series
        .iter()
        .map(|s| (s.label.as_str(), s.color))
        .collect();
    draw_legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}
