//! Plain-text SVG line chart of a bound sweep.

use std::fmt::Write;

use crate::bounds::CurveRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const Y_MAX: f64 = 1.05;

type Column = (&'static str, &'static str, fn(&CurveRow) -> Option<f64>);

const SERIES: [Column; 6] = [
    ("counting", "#1f77b4", |r| r.counting),
    ("quantization", "#e377c2", |r| r.quantization),
    ("individual", "#8c564b", |r| r.individual),
    ("main", "#d62728", |r| r.main),
    ("adaptive_rate", "#2ca02c", |r| r.adaptive_rate),
    ("best_lower", "#7f7f7f", |r| r.best_lower),
];

/// Renders one polyline per column over `δ` in the range of `rows`.
/// Missing values split a curve into separate polylines.
pub fn render_svg(rows: &[CurveRow]) -> String {
    let (x_min, x_max) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.delta), hi.max(r.delta))
        });
    let (x_min, x_max) = if !x_min.is_finite() {
        (0.0, 0.5)
    } else if x_max > x_min {
        (x_min, x_max)
    } else {
        (x_min - 0.005, x_max + 0.005)
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| TOP + (1.0 - y.clamp(0.0, Y_MAX) / Y_MAX) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // axes
    let (x0, x1, y0, y1) = (px(x_min), px(x_max), py(0.0), py(Y_MAX));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<line x1="{p:.2}" y1="{y0:.2}" x2="{p:.2}" y2="{t:.2}" stroke="black"/><text x="{p:.2}" y="{l:.2}" text-anchor="middle">{x:.3}</text>"#,
            p = px(x),
            t = y0 + 5.0,
            l = y0 + 20.0
        );
    }
    for i in 0..=5 {
        let y = 0.2 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{p:.2}" x2="{t:.2}" y2="{p:.2}" stroke="black"/><text x="{l:.2}" y="{q:.2}" text-anchor="end">{y:.1}</text>"#,
            p = py(y),
            t = x0 - 5.0,
            l = x0 - 8.0,
            q = py(y) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">delta</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">t/n</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (name, color, get) in SERIES {
        let _ = writeln!(
            s,
            r#"<g id="{name}" fill="none" stroke="{color}" stroke-width="1.5">"#
        );
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, s: &mut String| {
            if !segment.is_empty() {
                let _ = writeln!(s, r#"<polyline points="{}"/>"#, segment.join(" "));
                segment.clear();
            }
        };
        for r in rows {
            match get(r) {
                Some(v) if v.is_finite() => {
                    segment.push(format!("{:.2},{:.2}", px(r.delta), py(v)))
                }
                _ => flush(&mut segment, &mut s),
            }
        }
        flush(&mut segment, &mut s);
        s.push_str("</g>\n");
    }

    // legend
    let lx = WIDTH - RIGHT + 20.0;
    for (i, (name, color, _)) in SERIES.iter().enumerate() {
        let ly = TOP + 20.0 + 22.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
