//! Minimal line-plot writer. A [`Figure`] is written twice from the same data:
//! as a long-format CSV (`series,t,value,lower,upper`) and as an SVG.

use std::fmt::Write as _;
use std::path::Path;

use super::output::sig12;
use super::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Solid,
    Dashed,
    /// Thin, translucent line for individual seeds.
    Faint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub t: Vec<f64>,
    pub value: Vec<f64>,
    /// Shaded band, e.g. mean minus and plus one standard deviation.
    pub band: Option<(Vec<f64>, Vec<f64>)>,
    pub style: Style,
    /// Index into the palette.
    pub color: usize,
}

impl Series {
    pub fn line(name: impl Into<String>, t: Vec<f64>, value: Vec<f64>, color: usize) -> Self {
        Series { name: name.into(), t, value, band: None, style: Style::Solid, color }
    }

    pub fn with_band(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.band = Some((lower, upper));
        self
    }

    pub fn styled(mut self, style: Style) -> Self {
        self.style = style;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"];
const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly `n` round tick positions covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.0e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

impl Figure {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Figure { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), log_y: false, series: Vec::new() }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn push(&mut self, s: Series) {
        self.series.push(s);
    }

    /// Writes `<stem>.csv` and `<stem>.svg` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
        w.write_record(["series", "t", "value", "lower", "upper"])?;
        for s in &self.series {
            for (i, (&t, &v)) in s.t.iter().zip(&s.value).enumerate() {
                let (lo, hi) = match &s.band {
                    Some((l, u)) => (sig12(l[i]), sig12(u[i])),
                    None => (String::new(), String::new()),
                };
                w.write_record([s.name.clone(), sig12(t), sig12(v), lo, hi])?;
            }
        }
        w.flush()?;
        std::fs::write(dir.join(format!("{stem}.svg")), self.to_svg())?;
        Ok(())
    }

    fn y_transform(&self, v: f64) -> Option<f64> {
        if self.log_y {
            (v > 0.0 && v.is_finite()).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    fn ranges(&self) -> ((f64, f64), (f64, f64)) {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for &t in &s.t {
                x = (x.0.min(t), x.1.max(t));
            }
            let mut ys: Vec<f64> = s.value.clone();
            if let Some((l, u)) = &s.band {
                ys.extend(l);
                ys.extend(u);
            }
            for v in ys.into_iter().filter_map(|v| self.y_transform(v)) {
                y = (y.0.min(v), y.1.max(v));
            }
        }
        if !x.0.is_finite() {
            x = (0.0, 1.0);
        }
        if !y.0.is_finite() {
            y = (0.0, 1.0);
        }
        if x.1 <= x.0 {
            x.1 = x.0 + 1.0;
        }
        if y.1 <= y.0 {
            y = (y.0 - 0.5, y.1 + 0.5);
        } else if !self.log_y {
            let pad = 0.04 * (y.1 - y.0);
            y = (y.0 - pad, y.1 + pad);
        }
        if self.log_y {
            y = (y.0.floor(), y.1.ceil().max(y.0.floor() + 1.0));
        }
        (x, y)
    }

    pub fn to_svg(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.ranges();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |t: f64| LEFT + (t - x0) / (x1 - x0) * pw;
        let sy = |v: f64| TOP + (1.0 - (v - y0) / (y1 - y0)) * ph;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));

        for t in linear_ticks(x0, x1, 6) {
            let x = sx(t);
            let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e6e6e6"/>"##, TOP + ph);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, tick_label(t));
        }
        let y_ticks: Vec<f64> = if self.log_y { (y0 as i64..=y1 as i64).map(|k| k as f64).collect() } else { linear_ticks(y0, y1, 6) };
        for v in y_ticks {
            let y = sy(v);
            let label = if self.log_y { tick_label(10f64.powf(v)) } else { tick_label(v) };
            let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e6e6e6"/>"##, LEFT + pw);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
        }
        let _ = writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 14.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for s in &self.series {
            let Some((lower, upper)) = &s.band else { continue };
            let mut pts = Vec::new();
            for (t, v) in s.t.iter().zip(upper) {
                if let Some(v) = self.y_transform(*v) {
                    pts.push(format!("{:.2},{:.2}", sx(*t), sy(v)));
                }
            }
            for (t, v) in s.t.iter().zip(lower).rev() {
                if let Some(v) = self.y_transform(*v) {
                    pts.push(format!("{:.2},{:.2}", sx(*t), sy(v)));
                }
            }
            let _ = writeln!(out, r#"<polygon points="{}" fill="{}" fill-opacity="0.18" stroke="none"/>"#, pts.join(" "), color(s.color));
        }
        for s in &self.series {
            let pts: Vec<String> = s
                .t
                .iter()
                .zip(&s.value)
                .filter_map(|(t, v)| self.y_transform(*v).map(|v| format!("{:.2},{:.2}", sx(*t), sy(v))))
                .collect();
            let style = match s.style {
                Style::Solid => r#"stroke-width="2""#,
                Style::Dashed => r#"stroke-width="1.6" stroke-dasharray="6 4""#,
                Style::Faint => r#"stroke-width="0.7" stroke-opacity="0.35""#,
            };
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" {style}/>"#, pts.join(" "), color(s.color));
        }

        let mut ly = TOP + 14.0;
        for s in self.series.iter().filter(|s| s.style != Style::Faint) {
            let lx = LEFT + 12.0;
            let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/>"#,
                lx + 24.0,
                color(s.color)
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.name));
            ly += 16.0;
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(linear_ticks(0.0, 10.0, 5), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(tick_label(2500.0), "2500");
        assert_eq!(tick_label(1e6), "1e6");
    }

    #[test]
    fn csv_holds_exactly_the_plotted_points() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = Figure::new("t", "x", "y").log_y();
        f.push(Series::line("a", vec![1.0, 2.0, 3.0], vec![0.0, 10.0, 100.0], 0).with_band(vec![0.0; 3], vec![1.0; 3]));
        f.write(dir.path(), "fig").unwrap();
        let text = std::fs::read_to_string(dir.path().join("fig.csv")).unwrap();
        assert_eq!(text.lines().count(), 4);
        let svg = std::fs::read_to_string(dir.path().join("fig.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("polyline"));
    }
}
