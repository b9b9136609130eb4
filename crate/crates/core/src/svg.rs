//! Minimal hand-written SVG charts.

use std::fmt::Write;

use crate::matrix::Matrix;

const FONT: &str = "font-family=\"sans-serif\"";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear ramp from blue at -1 through to red at +1.
fn ramp(v: f64) -> String {
    const LO: [f64; 3] = [59.0, 76.0, 192.0];
    const HI: [f64; 3] = [180.0, 4.0, 38.0];
    let t = ((v.clamp(-1.0, 1.0) + 1.0) / 2.0).clamp(0.0, 1.0);
    let c: Vec<u8> = LO.iter().zip(HI).map(|(a, b)| (a + (b - a) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Correlation heat map: one square per entry, colored on [-1, 1], labeled to two decimals.
pub fn heatmap(labels: &[String], values: &Matrix) -> String {
    let cell = 80.0;
    let margin = 120.0;
    let n = labels.len() as f64;
    let size = margin + n * cell + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    for (i, label) in labels.iter().enumerate() {
        let pos = margin + (i as f64 + 0.5) * cell;
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{pos}\" {FONT} font-size=\"13\" text-anchor=\"end\" dominant-baseline=\"middle\">{l}</text>",
            x = margin - 8.0,
            l = escape(label)
        );
        let _ = writeln!(
            s,
            "<text x=\"{pos}\" y=\"{y}\" {FONT} font-size=\"13\" text-anchor=\"middle\">{l}</text>",
            y = margin - 10.0,
            l = escape(label)
        );
    }
    for i in 0..values.rows() {
        for j in 0..values.cols() {
            let v = values[(i, j)];
            let x = margin + j as f64 * cell;
            let y = margin + i as f64 * cell;
            let text_color = if v.abs() > 0.5 { "white" } else { "black" };
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\" stroke=\"white\"/>",
                ramp(v)
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"14\" fill=\"{text_color}\" text-anchor=\"middle\" dominant-baseline=\"middle\">{v:.2}</text>",
                x + cell / 2.0,
                y + cell / 2.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Line chart of one or more named (x, y) series with a horizontal zero line.
pub fn line_chart(title: &str, x_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h) = (800.0, 450.0);
    let (left, right, top, bottom) = (70.0, 140.0, 40.0, 50.0);
    let points = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        x0 = 0.0;
        x1 = 1.0;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" {FONT} font-size=\"16\" text-anchor=\"middle\">{}</text>",
        (left + w - right) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>",
        sy(0.0),
        w - right,
        sy(0.0)
    );
    let _ = writeln!(
        s,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - left - right,
        h - top - bottom
    );
    for (label, y) in [(y1, top), (y0, h - bottom)] {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y}\" {FONT} font-size=\"11\" text-anchor=\"end\" dominant-baseline=\"middle\">{label:.4}</text>",
            left - 6.0
        );
    }
    for (label, x) in [(x0, left), (x1, w - right)] {
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{}\" {FONT} font-size=\"11\" text-anchor=\"middle\">{label}</text>",
            h - bottom + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"13\" text-anchor=\"middle\">{}</text>",
        (left + w - right) / 2.0,
        h - 10.0,
        escape(x_label)
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            path.join(" ")
        );
        let ly = top + 16.0 * k as f64 + 8.0;
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            w - right + 10.0,
            w - right + 30.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{ly}\" {FONT} font-size=\"12\" dominant-baseline=\"middle\">{}</text>",
            w - right + 35.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(-1.0), "#3b4cc0");
        assert_eq!(ramp(1.0), "#b40426");
    }

    #[test]
    fn heatmap_cells_and_text() {
        let m = Matrix::from_rows(&[vec![1.0, 0.957], vec![0.957, 1.0]]).unwrap();
        let svg = heatmap(&["NASDAQ".into(), "USD".into()], &m);
        assert_eq!(svg.matches("<rect x=").count(), 4);
        assert!(svg.contains(">0.96</text>"));
        assert!(svg.contains(">1.00</text>"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn line_chart_has_one_polyline_per_series() {
        let svg = line_chart(
            "t",
            "lag",
            &[("close".into(), vec![(1.0, 0.9), (2.0, -0.1)]), ("open".into(), vec![(1.0, 0.1)])],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
