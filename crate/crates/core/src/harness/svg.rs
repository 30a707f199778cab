//! Minimal log-log line charts written as plain SVG.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Slope of a dashed reference line anchored at the first series' last point.
    pub reference_slope: Option<f64>,
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        let (lo, hi) = (lo.floor(), hi.ceil());
        if hi > lo {
            Self { lo, hi }
        } else {
            Self { lo, hi: lo + 1.0 }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.log10() - self.lo) / (self.hi - self.lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LogLogPlot {
    pub fn render(&self) -> String {
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let xs = Axis::fit(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let ys = Axis::fit(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let px = |x: f64| MARGIN_LEFT + xs.frac(x) * pw;
        let py = |y: f64| MARGIN_TOP + (1.0 - ys.frac(y)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&self.title)
        );

        // Decade grid and tick labels.
        for d in xs.lo as i32..=xs.hi as i32 {
            let x = px(10f64.powi(d));
            let _ = writeln!(
                s,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#dddddd"/>"##,
                MARGIN_TOP,
                MARGIN_TOP + ph
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{d}</text>"#,
                MARGIN_TOP + ph + 18.0
            );
        }
        for d in ys.lo as i32..=ys.hi as i32 {
            let y = py(10f64.powi(d));
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + pw
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{d}</text>"#,
                MARGIN_LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (cx, cy) = p.split_once(',').unwrap();
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
            }
            let ly = MARGIN_TOP + 16.0 + 18.0 * k as f64;
            let lx = MARGIN_LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"/>"#,
                lx + 20.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                escape(&series.label)
            );
        }

        if let (Some(slope), Some(anchor)) = (
            self.reference_slope,
            self.series.first().and_then(|s| s.points.last().copied()),
        ) {
            let (x_min, x_max) = self
                .series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            let at = |x: f64| anchor.1 * (x / anchor.0).powf(slope);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
                px(x_min),
                py(at(x_min)),
                px(x_max),
                py(at(x_max))
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> LogLogPlot {
        LogLogPlot {
            title: "error vs h".into(),
            x_label: "h".into(),
            y_label: "H1 error".into(),
            series: vec![Series {
                label: "gamma = 0".into(),
                points: vec![(0.07, 0.02), (0.035, 0.01), (0.0177, 0.005)],
            }],
            reference_slope: Some(1.0),
        }
    }

    #[test]
    fn renders_a_closed_document_with_dashed_reference() {
        let svg = plot().render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(plot().render(), plot().render());
    }

    #[test]
    fn no_reference_line_when_disabled() {
        let mut p = plot();
        p.reference_slope = None;
        assert!(!p.render().contains("stroke-dasharray"));
    }
}
