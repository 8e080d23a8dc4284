//! Minimal SVG emitter for line plots and heat maps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct HeatMap {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over `ys`, then `xs`.
    pub values: Vec<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            out,
            r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            r - l,
            b - t
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x0 + f * (self.x1 - self.x0);
            let yv = self.y0 + f * (self.y1 - self.y0);
            let (x, y) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
                b + 5.0,
                b + 18.0,
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
                l - 5.0,
                l - 8.0,
                y + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            H - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (t + b) / 2.0,
            (t + b) / 2.0,
            escape(y_label)
        );
    }
}

fn header() -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
"#
    )
}

impl LinePlot {
    pub fn render(&self) -> String {
        let (x0, x1) = finite_range(self.x.iter().copied());
        let (y0, y1) = finite_range(self.series.iter().flat_map(|(_, ys)| ys.iter().copied()));
        let frame = Frame { x0, x1, y0, y1 };
        let mut out = header();
        frame.axes(&mut out, &self.title, &self.x_label, &self.y_label);
        for (k, (label, ys)) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut pts = String::new();
            for (&x, &y) in self.x.iter().zip(ys) {
                if x.is_finite() && y.is_finite() {
                    let _ = write!(pts, "{:.2},{:.2} ", frame.px(x), frame.py(y));
                }
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.trim_end()
            );
            if self.series.len() > 1 {
                let y = TOP + 14.0 + 14.0 * k as f64;
                let _ = writeln!(
                    out,
                    r#"<text x="{:.1}" y="{y:.1}" font-size="11" fill="{color}" text-anchor="end">{}</text>"#,
                    W - RIGHT - 6.0,
                    escape(label)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn color(f: f64) -> String {
    // dark blue -> teal -> yellow
    let stops = [(0.0, [68.0, 1.0, 84.0]), (0.5, [33.0, 145.0, 140.0]), (1.0, [253.0, 231.0, 37.0])];
    let f = f.clamp(0.0, 1.0);
    let (a, b) = if f <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let t = (f - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + t * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn cell_edges(v: &[f64]) -> (f64, f64, Vec<f64>) {
    if v.len() == 1 {
        return (v[0] - 0.5, v[0] + 0.5, vec![v[0] - 0.5, v[0] + 0.5]);
    }
    let mut edges = Vec::with_capacity(v.len() + 1);
    edges.push(v[0] - 0.5 * (v[1] - v[0]));
    for w in v.windows(2) {
        edges.push(0.5 * (w[0] + w[1]));
    }
    let n = v.len();
    edges.push(v[n - 1] + 0.5 * (v[n - 1] - v[n - 2]));
    let lo = edges[0].min(edges[n]);
    let hi = edges[0].max(edges[n]);
    (lo, hi, edges)
}

impl HeatMap {
    pub fn render(&self) -> String {
        let (x0, x1, xe) = cell_edges(&self.xs);
        let (y0, y1, ye) = cell_edges(&self.ys);
        let frame = Frame { x0, x1, y0, y1 };
        let (v0, v1) = finite_range(self.values.iter().copied());
        let mut out = header();
        for (iy, _) in self.ys.iter().enumerate() {
            for (ix, _) in self.xs.iter().enumerate() {
                let v = self.values[iy * self.xs.len() + ix];
                let fill = if v.is_finite() { color((v - v0) / (v1 - v0)) } else { "#bbbbbb".into() };
                let (ax, bx) = (frame.px(xe[ix]), frame.px(xe[ix + 1]));
                let (ay, by) = (frame.py(ye[iy]), frame.py(ye[iy + 1]));
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    ax.min(bx),
                    ay.min(by),
                    (bx - ax).abs(),
                    (by - ay).abs()
                );
            }
        }
        frame.axes(&mut out, &self.title, &self.x_label, &self.y_label);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{} .. {}</text>"#,
            W - RIGHT,
            TOP - 6.0,
            tick_label(v0),
            tick_label(v1)
        );
        out.push_str("</svg>\n");
        out
    }
}
