//! Minimal SVG line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 4000;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub color: String,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, x: Vec<f64>, y: Vec<f64>, color: &str) -> Self {
        Self {
            name: name.into(),
            x,
            y,
            color: color.to_string(),
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub series: Vec<Series>,
    /// Labelled vertical guides.
    pub vlines: Vec<(f64, String)>,
    /// Labelled horizontal guides.
    pub hlines: Vec<(f64, String)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Keeps the first, min, max and last point of each bucket so spikes survive.
fn decimate(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    if n <= MAX_POINTS {
        return x.iter().copied().zip(y.iter().copied()).collect();
    }
    let buckets = MAX_POINTS / 4;
    let mut out = Vec::with_capacity(MAX_POINTS);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = ((b + 1) * n / buckets).max(lo + 1);
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if y[i] < y[imin] {
                imin = i;
            }
            if y[i] > y[imax] {
                imax = i;
            }
        }
        let mut idx = [lo, imin, imax, hi - 1];
        idx.sort_unstable();
        for (k, &i) in idx.iter().enumerate() {
            if k == 0 || i != idx[k - 1] {
                out.push((x[i], y[i]));
            }
        }
    }
    out
}

fn nice_ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
        let step = ((b - a) / 8).max(1);
        return (a..=b)
            .step_by(step as usize)
            .map(|e| 10f64.powi(e))
            .filter(|v| *v >= lo * (1.0 - 1e-9) && *v <= hi * (1.0 + 1e-9))
            .collect();
    }
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 8.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    fn extent(&self, pick: impl Fn(&Series) -> &[f64], log: bool) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.series {
            for &v in pick(s) {
                if v.is_finite() && (!log || v > 0.0) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if !lo.is_finite() {
            return if log { (1.0, 10.0) } else { (0.0, 1.0) };
        }
        if hi <= lo {
            return if log { (lo / 10.0, lo * 10.0) } else { (lo - 1.0, hi + 1.0) };
        }
        if log {
            (lo, hi)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    }

    pub fn render(&self) -> String {
        let (x0, x1) = self.x_range.unwrap_or_else(|| self.extent(|s| &s.x, self.x_log));
        let (y0, y1) = self.y_range.unwrap_or_else(|| self.extent(|s| &s.y, self.y_log));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let tx = |v: f64| -> f64 {
            let f = if self.x_log {
                (v.log10() - x0.log10()) / (x1.log10() - x0.log10())
            } else {
                (v - x0) / (x1 - x0)
            };
            LEFT + f * pw
        };
        let ty = |v: f64| -> f64 {
            let f = if self.y_log {
                (v.log10() - y0.log10()) / (y1.log10() - y0.log10())
            } else {
                (v - y0) / (y1 - y0)
            };
            TOP + (1.0 - f) * ph
        };

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            esc(&self.title)
        )
        .unwrap();

        for t in nice_ticks(x0, x1, self.x_log) {
            let x = tx(t);
            writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/>"##, TOP + ph).unwrap();
            writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph + 18.0,
                tick_label(t, self.x_log)
            )
            .unwrap();
        }
        for t in nice_ticks(y0, y1, self.y_log) {
            let y = ty(t);
            writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/>"##, LEFT + pw).unwrap();
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                tick_label(t, self.y_log)
            )
            .unwrap();
        }
        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 16.0,
            esc(&self.x_label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        )
        .unwrap();

        writeln!(s, r#"<g clip-path="url(#plot)">"#).unwrap();
        for (v, label) in &self.vlines {
            let x = tx(*v);
            writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##, TOP + ph).unwrap();
            writeln!(s, r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#555">{}</text>"##, x + 3.0, TOP + 12.0, esc(label)).unwrap();
        }
        for (v, label) in &self.hlines {
            let y = ty(*v);
            writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 3"/>"##, LEFT + pw).unwrap();
            writeln!(s, r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#555">{}</text>"##, LEFT + 4.0, y - 3.0, esc(label)).unwrap();
        }
        for series in &self.series {
            let mut d = String::new();
            let mut pen_down = false;
            for (x, y) in decimate(&series.x, &series.y) {
                let ok = x.is_finite() && y.is_finite() && (!self.x_log || x > 0.0) && (!self.y_log || y > 0.0);
                if !ok {
                    pen_down = false;
                    continue;
                }
                write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, tx(x), ty(y)).unwrap();
                pen_down = true;
            }
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.2"{dash}/>"#,
                d.trim_end(),
                series.color
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();

        for (i, series) in self.series.iter().enumerate() {
            let y = TOP + 10.0 + 18.0 * i as f64;
            let x = LEFT + pw + 12.0;
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"{dash}/>"#,
                x + 22.0,
                series.color
            )
            .unwrap();
            writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 28.0, y + 4.0, esc(&series.name)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}
