//! Minimal static SVG rendering for plot data.
//!
//! The CSV files are the plot contract; these renderings exist so results
//! can be eyeballed without external tooling. Everything is plain string
//! building and fully deterministic.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Distinguishable fill colors, reused cyclically per class index.
const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
];

pub fn class_color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn open_svg(title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        title
    );
    out
}

fn frame_and_labels(out: &mut String, x_label: &str, y_label: &str, range: &Ranges) {
    let _ = writeln!(
        out,
        "<rect x=\"{M:.2}\" y=\"{M:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"none\" \
         stroke=\"#333\"/>",
        M = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN,
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 10.0,
        x_label
    );
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 14 {mid:.2})\">{}</text>",
        HEIGHT / 2.0,
        y_label,
        mid = HEIGHT / 2.0,
    );
    // numeric extent labels
    let _ = writeln!(
        out,
        "<text x=\"{M:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\">{:.3}</text>",
        HEIGHT - MARGIN + 14.0,
        range.x0,
        M = MARGIN
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
         text-anchor=\"end\">{:.3}</text>",
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 14.0,
        range.x1
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
         text-anchor=\"end\">{:.3}</text>",
        MARGIN - 4.0,
        HEIGHT - MARGIN,
        range.y0
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
         text-anchor=\"end\">{:.3}</text>",
        MARGIN - 4.0,
        MARGIN + 8.0,
        range.y1
    );
}

struct Ranges {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Ranges {
    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    }
}

/// Scatter plot of `(x, y, class index)` points, colored per class.
pub fn scatter(points: &[(f64, f64, usize)], title: &str, x_label: &str, y_label: &str) -> String {
    let (x0, x1) = axis_range(points.iter().map(|p| p.0));
    let (y0, y1) = axis_range(points.iter().map(|p| p.1));
    let range = Ranges { x0, x1, y0, y1 };
    let mut out = open_svg(title);
    frame_and_labels(&mut out, x_label, y_label, &range);
    for &(x, y, class) in points {
        let (px, py) = range.to_px(x, y);
        let _ = writeln!(
            out,
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.75\"/>",
            class_color(class)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Horizontal bar chart of labeled values (values expected in [0, 1]).
pub fn bars(rows: &[(String, f64)], title: &str, x_label: &str) -> String {
    let mut out = open_svg(title);
    let inner_w = WIDTH - 2.0 * MARGIN - 120.0;
    let n = rows.len().max(1) as f64;
    let slot = (HEIGHT - 2.0 * MARGIN) / n;
    let bar_h = (slot * 0.7).min(24.0);
    for (i, (label, value)) in rows.iter().enumerate() {
        let y = MARGIN + i as f64 * slot + (slot - bar_h) / 2.0;
        let w = inner_w * value.clamp(0.0, 1.0);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"end\">{}</text>",
            MARGIN + 112.0,
            y + bar_h / 2.0 + 3.0,
            label
        );
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{bar_h:.2}\" \
             fill=\"{}\"/>",
            MARGIN + 120.0,
            class_color(i)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\">{:.3}</text>",
            MARGIN + 124.0 + w,
            y + bar_h / 2.0 + 3.0,
            value
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 10.0,
        x_label
    );
    out.push_str("</svg>\n");
    out
}
