//! Accuracy-vs-K line chart as a standalone SVG 1.1 document.

use std::fmt::Write as _;

use crate::runner::{Cell, CellStatus};

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub root_seed: u64,
    /// Krawtchouk overflow degree, drawn as a dashed vertical line.
    pub overflow_degree: Option<usize>,
    /// One series per model, points in increasing K.
    pub series: Vec<(&'a str, Vec<&'a Cell>)>,
}

impl Chart<'_> {
    pub fn render(&self) -> String {
        let ks: Vec<usize> = self.series.iter().flat_map(|(_, c)| c.iter().map(|c| c.k)).collect();
        let kmin = ks.iter().copied().min().unwrap_or(0) as f64;
        let kmax = (ks.iter().copied().max().unwrap_or(1) as f64).max(kmin + 1.0);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let x = |k: f64| LEFT + (k - kmin) / (kmax - kmin) * pw;
        let y = |acc: f64| TOP + (1.0 - acc) * ph;

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(self.title));
        let _ = writeln!(s, "<desc>root_seed={}</desc>", self.root_seed);
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            escape(self.title)
        );

        // axes and grid
        let _ = writeln!(s, r##"<g font-family="sans-serif" font-size="11" stroke="#000">"##);
        for i in 0..=5 {
            let acc = i as f64 * 0.2;
            let yy = y(acc);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/>"##,
                LEFT + pw
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                yy + 4.0,
                i * 20
            );
        }
        let mut ticks = ks.clone();
        ticks.sort_unstable();
        ticks.dedup();
        for k in &ticks {
            let xx = x(*k as f64);
            let _ = writeln!(
                s,
                r#"<text x="{xx:.2}" y="{:.2}" stroke="none" text-anchor="middle">{k}</text>"#,
                TOP + ph + 16.0
            );
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{LEFT},{TOP} {LEFT},{:.2} {:.2},{:.2}" fill="none"/>"#,
            TOP + ph,
            LEFT + pw,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="middle">K (polynomial degree)</text>"#,
            LEFT + pw / 2.0,
            H - 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" stroke="none" text-anchor="middle" transform="rotate(-90 18 {:.2})">Test accuracy (%)</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0
        );
        let _ = writeln!(s, "</g>");

        if let Some(d) = self.overflow_degree.filter(|&d| (d as f64) >= kmin && (d as f64) <= kmax) {
            let xx = x(d as f64);
            let _ = writeln!(
                s,
                r##"<line x1="{xx:.2}" y1="{TOP}" x2="{xx:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="5,4"/>"##,
                TOP + ph
            );
            let _ = writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="#555">overflow K={d}</text>"##,
                xx + 3.0,
                TOP + 12.0
            );
        }

        for (i, (name, cells)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = cells
                .iter()
                .filter(|c| c.accuracy.mean.is_finite())
                .map(|c| format!("{:.2},{:.2}", x(c.k as f64), y(c.accuracy.mean)))
                .collect();
            let _ = writeln!(s, r#"<g id="series-{}">"#, escape(name));
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
            for c in cells.iter().filter(|c| c.accuracy.mean.is_finite()) {
                let (cx, cy) = (x(c.k as f64), y(c.accuracy.mean));
                if c.status == CellStatus::Collapsed || c.status == CellStatus::Partial {
                    let r = 5.0;
                    let _ = writeln!(
                        s,
                        r#"<path class="collapsed" d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="{color}" stroke-width="2"/>"#,
                        cx - r,
                        cy - r,
                        cx + r,
                        cy + r,
                        cx - r,
                        cy + r,
                        cx + r,
                        cy - r
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="9" fill="{color}" text-anchor="middle">{}</text>"#,
                        cx,
                        cy + 16.0 + 10.0 * i as f64,
                        c.status.name()
                    );
                } else {
                    let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}"/>"#);
                }
            }
            let ly = TOP + 10.0 + 20.0 * i as f64;
            let lx = LEFT + pw + 20.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(name)
            );
            let _ = writeln!(s, "</g>");
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_chart_is_still_a_document() {
        let chart = Chart { title: "a < b", root_seed: 9, overflow_degree: Some(3), series: Vec::new() };
        let svg = chart.render();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<desc>root_seed=9</desc>"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
