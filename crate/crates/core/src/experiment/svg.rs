use std::fmt::Write;

use super::run::LossRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Loss against iteration for one or more runs, with an optional horizontal reference line.
pub fn loss_svg(runs: &[(String, Vec<LossRow>)], reference: Option<f64>) -> String {
    let finite = runs
        .iter()
        .flat_map(|(_, rows)| rows.iter())
        .filter(|r| r.loss.is_finite());
    let (mut x_max, mut y_min, mut y_max) = (1.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for r in finite {
        x_max = x_max.max(r.iteration as f64);
        y_min = y_min.min(r.loss);
        y_max = y_max.max(r.loss);
    }
    if let Some(v) = reference {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);
    let px = |it: f64| MARGIN + (it - 1.0).max(0.0) / (x_max - 1.0).max(1.0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
            l - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{l}" y="{}">1</text>"#, b + 18.0);
    let _ = writeln!(s, r#"<text x="{r}" y="{}" text-anchor="end">{x_max}</text>"#, b + 18.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    if let Some(v) = reference {
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{l}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#
        );
    }
    for (i, (label, rows)) in runs.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| r.loss.is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.iteration as f64), py(r.loss)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            r - 160.0,
            t + 16.0 * (i as f64 + 1.0),
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
