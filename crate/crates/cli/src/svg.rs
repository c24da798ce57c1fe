//! Minimal SVG line/bar chart writer.

use std::fmt::Write;

pub const SHADES: [&str; 5] = ["#000000", "#404040", "#707070", "#a0a0a0", "#d0d0d0"];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly five round tick values covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub struct Chart {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    legend: Vec<(String, String, bool)>,
    title: String,
    x_label: String,
    y_label: String,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Chart {
            x: widen(x),
            y: widen(y),
            body: String::new(),
            legend: Vec::new(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
        }
    }

    pub fn sx(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    pub fn sy(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], shade: &str, dashed: bool, name: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y)))
            .collect();
        let dash = if dashed { r#" stroke-dasharray="6 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{shade}" stroke-width="1.5"{dash} points="{}"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{shade}"/>"#,
                self.sx(x),
                self.sy(y)
            );
        }
        self.legend.push((name.into(), shade.into(), dashed));
    }

    /// Axis-aligned rectangle in data coordinates.
    pub fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, shade: &str) {
        let (px0, px1) = (self.sx(x0), self.sx(x1));
        let (py0, py1) = (self.sy(y1), self.sy(y0));
        let _ = writeln!(
            self.body,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{shade}" stroke="#ffffff" stroke-width="0.5"/>"##,
            px0,
            py0,
            (px1 - px0).max(0.0),
            (py1 - py0).max(0.0)
        );
    }

    pub fn legend_entry(&mut self, name: &str, shade: &str) {
        self.legend.push((name.into(), shade.into(), false));
    }

    pub fn x_text(&mut self, x: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            self.sx(x),
            HEIGHT - BOTTOM + 14.0,
            esc(text)
        );
    }

    fn axes(&self, x_ticks: bool) -> String {
        let mut s = String::new();
        let (x0, x1) = (self.sx(self.x.0), self.sx(self.x.1));
        let (y0, y1) = (self.sy(self.y.0), self.sy(self.y.1));
        let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="#000000"/>"##);
        let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="#000000"/>"##);
        for t in ticks(self.y.0, self.y.1) {
            let y = self.sy(t);
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"##,
                x0 - 4.0,
                x0 - 6.0,
                y + 3.0,
                label(t)
            );
        }
        if x_ticks {
            for t in ticks(self.x.0, self.x.1) {
                let x = self.sx(t);
                let _ = writeln!(
                    s,
                    r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000000"/><text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
                    y0 + 4.0,
                    y0 + 16.0,
                    label(t)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 10.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            esc(&self.y_label)
        );
        s
    }

    pub fn render(&self, x_ticks: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        );
        let _ = writeln!(s, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        s.push_str(&self.axes(x_ticks));
        s.push_str(&self.body);
        for (i, (name, shade, dashed)) in self.legend.iter().enumerate() {
            let y = TOP + 14.0 * i as f64;
            let x = WIDTH - RIGHT + 12.0;
            let dash = if *dashed { r#" stroke-dasharray="6 3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{shade}" stroke-width="6"{dash}/><text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
                x + 18.0,
                x + 24.0,
                y + 3.0,
                esc(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_spacing() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(ticks(3.0, 3.0), vec![3.0]);
        let t = ticks(-0.3, 0.3);
        assert_eq!(t.len(), 3);
        assert!(t.contains(&0.0));
    }

    #[test]
    fn chart_is_well_formed() {
        let mut c = Chart::new("t <1>", "x", "y", (0.0, 1.0), (0.0, 1.0));
        c.polyline(&[(0.0, 0.0), (1.0, 1.0)], SHADES[0], true, "a&b");
        c.rect(0.0, 0.5, 0.0, 0.5, SHADES[3]);
        let s = c.render(true);
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(s.contains("t &lt;1&gt;") && s.contains("a&amp;b"));
    }
}
