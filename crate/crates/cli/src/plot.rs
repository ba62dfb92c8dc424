//! Static SVG rendering of BER curves read from CSV files.

use std::fmt::Write as _;

use crate::report::ParsedSeries;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
const MARKERS: [&str; 4] = ["circle", "square", "diamond", "triangle"];

fn axis_title(axis: &str) -> &str {
    match axis {
        "p_max_dbm" => "Transmit power P_max (dBm)",
        "cee_db" => "CEE variance (dBm)",
        "ris_elements" => "RIS elements L",
        other => other,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick spacing giving roughly `target` intervals over `span`.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 2.5 {
        2.5
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * mag
}

fn marker(svg: &mut String, kind: &str, x: f64, y: f64, color: &str) {
    let r = 4.0;
    let _ = match kind {
        "square" => writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="{color}" stroke-width="1.5"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        "diamond" => writeln!(
            svg,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="white" stroke="{color}" stroke-width="1.5"/>"#,
            x,
            y - r - 1.0,
            x + r + 1.0,
            y,
            x,
            y + r + 1.0,
            x - r - 1.0,
            y
        ),
        "triangle" => writeln!(
            svg,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="white" stroke="{color}" stroke-width="1.5"/>"#,
            x,
            y - r - 1.0,
            x + r + 1.0,
            y + r,
            x - r - 1.0,
            y + r
        ),
        _ => writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="white" stroke="{color}" stroke-width="1.5"/>"#
        ),
    };
}

/// Semilog BER plot of every series. Points with zero errors cannot be
/// placed on a log axis and are left out.
pub fn render_svg(title: &str, series: &[ParsedSeries]) -> String {
    let pts = || series.iter().flat_map(|s| s.rows.iter());
    let axis = pts().next().map_or("", |r| r.sweep_axis.as_str()).to_string();

    let (mut x_lo, mut x_hi) =
        pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.sweep_value), hi.max(r.sweep_value)));
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    if x_hi - x_lo < 1e-9 {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    let min_ber = pts().map(|r| r.ber).filter(|b| *b > 0.0).fold(1.0f64, f64::min);
    let y_lo = min_ber.log10().floor().clamp(-9.0, -1.0);
    let y_hi = 0.0;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |b: f64| TOP + (y_hi - b.log10()) / (y_hi - y_lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );

    // y decades with minor ticks
    for d in (y_lo as i32)..=(y_hi as i32) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc"/>"##, LEFT + pw);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
        if d < y_hi as i32 {
            for k in 2..10 {
                let y = sy(k as f64 * 10f64.powi(d));
                let _ = writeln!(
                    svg,
                    r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eee"/>"##,
                    LEFT + pw
                );
            }
        }
    }
    let step = nice_step(x_hi - x_lo, 8.0);
    let mut t = (x_lo / step).ceil() * step;
    while t <= x_hi + 1e-9 * step {
        let x = sx(t);
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, t);
        t += step;
    }
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(axis_title(&axis))
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(22 {:.1}) rotate(-90)" text-anchor="middle">BER</text>"#,
        TOP + ph / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let kind = MARKERS[i % MARKERS.len()];
        let visible: Vec<(f64, f64)> = s
            .rows
            .iter()
            .filter(|r| r.ber > 0.0)
            .map(|r| (sx(r.sweep_value), sy(r.ber.max(10f64.powf(y_lo)))))
            .collect();
        if visible.len() > 1 {
            let path: Vec<String> = visible.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in &visible {
            marker(&mut svg, kind, x, y, color);
        }
        let ly = TOP + 12.0 + 22.0 * i as f64;
        let lx = LEFT + pw + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="1.8"/>"#,
            lx + 28.0
        );
        marker(&mut svg, kind, lx + 14.0, ly, color);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 36.0, ly + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Row;

    fn row(x: f64, ber: f64) -> Row {
        Row {
            sweep_axis: "p_max_dbm".into(),
            sweep_value: x,
            l: 4,
            m: 4,
            phase_mode: "optimal".into(),
            cee_db: "off".into(),
            p_max_dbm: x,
            bits: 1000,
            errors: (ber * 1000.0) as u64,
            ber,
            dropped_rounds: 0,
        }
    }

    #[test]
    fn svg_contains_every_series() {
        let s = vec![
            ParsedSeries {
                run_name: "r".into(),
                label: "L=1 & M=4".into(),
                rows: vec![row(0.0, 0.2), row(10.0, 0.01), row(20.0, 0.0)],
            },
            ParsedSeries { run_name: "r".into(), label: "L=4".into(), rows: vec![row(0.0, 0.1), row(10.0, 1e-4)] },
        ];
        let svg = render_svg("demo", &s);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("L=1 &amp; M=4"));
        assert!(svg.contains(">1e-4<"));
        assert!(svg.contains("Transmit power"));
    }

    #[test]
    fn empty_and_degenerate_inputs_render() {
        assert!(render_svg("x", &[]).contains("</svg>"));
        let one = vec![ParsedSeries { run_name: String::new(), label: "a".into(), rows: vec![row(5.0, 0.5)] }];
        assert!(!render_svg("x", &one).contains("NaN"));
    }

    #[test]
    fn tick_steps() {
        assert_eq!(nice_step(100.0, 8.0), 20.0);
        assert_eq!(nice_step(10.0, 8.0), 2.0);
        assert_eq!(nice_step(255.0, 8.0), 50.0);
    }
}
