//! Self-contained vector-graphics plots with the data embedded as comments.
//! No display dependency; every number is formatted deterministically.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\" stroke=\"none\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        title
    );
    s
}

fn axis_box(s: &mut String) {
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
}

/// Line plot; `log_y` plots log10 of the (positive, floored) values.
pub fn line_plot(title: &str, xlabel: &str, points: &[(f64, f64)], log_y: bool) -> String {
    let mut s = header(title);
    let _ = writeln!(s, "<!-- data: x,y");
    for (x, y) in points {
        let _ = writeln!(s, "{x},{y:.12e}");
    }
    let _ = writeln!(s, "-->");
    axis_box(&mut s);
    if !points.is_empty() {
        let ys: Vec<f64> = points
            .iter()
            .map(|&(_, y)| if log_y { y.max(1e-18).log10() } else { y })
            .collect();
        let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let xmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let ymin = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let ymax = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let xspan = (xmax - xmin).max(1e-12);
        let yspan = (ymax - ymin).max(1e-12);
        let px = |x: f64| MARGIN + (x - xmin) / xspan * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (y - ymin) / yspan * (H - 2.0 * MARGIN);
        let mut path = String::new();
        for (k, (x, _)) in points.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2} {:.2} ", px(*x), py(ys[k]));
        }
        let _ = writeln!(
            s,
            "<path d=\"{path}\" fill=\"none\" stroke=\"#1f5fa6\" stroke-width=\"1.5\"/>"
        );
        for (k, (x, _)) in points.iter().enumerate() {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f5fa6\"/>",
                px(*x),
                py(ys[k])
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{xlabel}</text>",
            W / 2.0,
            H - 16.0
        );
        let ylab = if log_y { "log10(value)" } else { "value" };
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{ylab}</text>",
            H / 2.0,
            H / 2.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{MARGIN}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\">{xmin:.0}</text>",
            H - MARGIN + 14.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{xmax:.0}</text>",
            W - MARGIN,
            H - MARGIN + 14.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{ymax:.3}</text>",
            MARGIN - 4.0,
            MARGIN + 4.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{ymin:.3}</text>",
            MARGIN - 4.0,
            H - MARGIN
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Eigenvalues of a defect projection, ascending, as vertical bars.
pub fn spectrum_plot(title: &str, values: &[f64]) -> String {
    let mut s = header(title);
    let _ = writeln!(s, "<!-- data: index,eigenvalue");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{i},{v:.12e}");
    }
    let _ = writeln!(s, "-->");
    axis_box(&mut s);
    let n = values.len().max(1);
    let bw = (W - 2.0 * MARGIN) / n as f64;
    for (i, v) in values.iter().enumerate() {
        let h = v.clamp(0.0, 1.0) * (H - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9a3b3b\"/>",
            MARGIN + i as f64 * bw,
            H - MARGIN - h,
            (bw * 0.9).max(0.5),
            h
        );
    }
    // Threshold line at 1/2.
    let ymid = H - MARGIN - 0.5 * (H - 2.0 * MARGIN);
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{ymid:.2}\" x2=\"{:.1}\" y2=\"{ymid:.2}\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>",
        W - MARGIN
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">defect-projection eigenvalues (threshold 1/2 dashed)</text>",
        W / 2.0,
        H - 16.0
    );
    s.push_str("</svg>\n");
    s
}

/// Unimodular spectra on the unit circle: requested angles as open circles,
/// measured ones as filled dots.
pub fn eigenvalue_ring(title: &str, requested: &[f64], measured: &[f64]) -> String {
    let mut s = header(title);
    let _ = writeln!(s, "<!-- data: requested-angle;measured-angle");
    let n = requested.len().max(measured.len());
    for i in 0..n {
        let r = requested.get(i).map(|v| format!("{v:.12e}")).unwrap_or_default();
        let m = measured.get(i).map(|v| format!("{v:.12e}")).unwrap_or_default();
        let _ = writeln!(s, "{r};{m}");
    }
    let _ = writeln!(s, "-->");
    let cx = W / 2.0;
    let cy = (H + 20.0) / 2.0;
    let radius = (H - 2.0 * MARGIN) / 2.0;
    let _ = writeln!(
        s,
        "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"{radius:.1}\" fill=\"none\" stroke=\"black\"/>"
    );
    for a in requested {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"7\" fill=\"none\" stroke=\"#1f5fa6\" stroke-width=\"1.5\"/>",
            cx + radius * a.cos(),
            cy - radius * a.sin()
        );
    }
    for a in measured {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#9a3b3b\"/>",
            cx + radius * a.cos(),
            cy - radius * a.sin()
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">requested (open) vs measured (filled) unitary-part eigenvalues</text>",
        W / 2.0,
        H - 8.0
    );
    s.push_str("</svg>\n");
    s
}
