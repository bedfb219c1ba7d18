//! Minimal SVG writer for log-log plots of exclusion boundaries.
//!
//! Output is a pure function of the inputs: coordinates are printed with a
//! fixed number of decimals and elements are emitted in input order.

use std::fmt::Write;

use crate::exclusion::RegionSet;
use crate::physics::{ModelParams, ParameterPreset};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    /// (x, y) pairs; non-finite or non-positive y breaks the line.
    pub points: Vec<(f64, f64)>,
    /// Shade the area above the curve.
    pub fill_above: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub label: String,
    pub x: f64,
    pub y: f64,
    /// Half-length of a vertical bar, in decades of y.
    pub y_decades: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogPlot {
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
    pub markers: Vec<Marker>,
    /// Emitted as XML comments after the root element opens.
    pub comments: Vec<String>,
}

const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl LogLogPlot {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        LogLogPlot {
            width: 720.0,
            height: 480.0,
            x_range,
            y_range,
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            curves: Vec::new(),
            markers: Vec::new(),
            comments: Vec::new(),
        }
    }

    fn lx(&self) -> (f64, f64) {
        (self.x_range.0.log10(), self.x_range.1.log10())
    }

    fn ly(&self) -> (f64, f64) {
        (self.y_range.0.log10(), self.y_range.1.log10())
    }

    fn px(&self, x: f64) -> f64 {
        let (a, b) = self.lx();
        let t = ((x.log10() - a) / (b - a)).clamp(0.0, 1.0);
        MARGIN_L + t * (self.width - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b) = self.ly();
        let t = ((y.log10() - a) / (b - a)).clamp(0.0, 1.0);
        self.height - MARGIN_B - t * (self.height - MARGIN_T - MARGIN_B)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let (w, h) = (self.width, self.height);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
        );
        for c in &self.comments {
            let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
        }
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (x0, x1) = (MARGIN_L, w - MARGIN_R);
        let (y0, y1) = (MARGIN_T, h - MARGIN_B);

        for (k, c) in self.curves.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            for run in self.runs(&c.points) {
                if c.fill_above && run.len() > 1 {
                    let mut d = format!("M{:.2},{:.2}", self.px(run[0].0), y0);
                    for &(x, y) in &run {
                        let _ = write!(d, " L{:.2},{:.2}", self.px(x), self.py(y));
                    }
                    let _ = write!(d, " L{:.2},{:.2} Z", self.px(run[run.len() - 1].0), y0);
                    let _ = writeln!(s, r#"<path d="{d}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#);
                }
                let pts: Vec<String> = run
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
            let ly = y0 + 16.0 * k as f64 + 10.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{ly:.2}" font-size="11" fill="{color}">{}</text>"#,
                x1 + 10.0,
                escape(&c.label)
            );
        }

        for m in &self.markers {
            let (mx, my) = (self.px(m.x), self.py(m.y));
            if let Some(dec) = m.y_decades {
                let f = 10f64.powf(dec);
                let _ = writeln!(
                    s,
                    r#"<line x1="{mx:.2}" y1="{:.2}" x2="{mx:.2}" y2="{:.2}" stroke="black"/>"#,
                    self.py(m.y * f),
                    self.py(m.y / f)
                );
            }
            let _ = writeln!(s, r#"<circle cx="{mx:.2}" cy="{my:.2}" r="4" fill="black"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                mx + 6.0,
                my - 6.0,
                escape(&m.label)
            );
        }

        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        let (ax, bx) = self.lx();
        for d in (ax.ceil() as i32)..=(bx.floor() as i32) {
            let x = self.px(10f64.powi(d));
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y1 - 6.0);
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">1e{d}</text>"#,
                y1 + 18.0
            );
        }
        let (ay, by) = self.ly();
        for d in (ay.ceil() as i32)..=(by.floor() as i32) {
            let y = self.py(10f64.powi(d));
            let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#, x0 + 6.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{d}</text>"#,
                x0 - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            h - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            escape(&self.title)
        );
        s.push_str("</svg>\n");
        s
    }

    fn runs(&self, points: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
        let mut runs = Vec::new();
        let mut cur = Vec::new();
        for &(x, y) in points {
            if x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite() {
                cur.push((x, y));
            } else if !cur.is_empty() {
                runs.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            runs.push(cur);
        }
        runs
    }
}

/// λ–r_C plot of every region in the set plus CSL preset markers.
pub fn exclusion_plot(set: &RegionSet, presets: &[ParameterPreset], comments: Vec<String>) -> LogLogPlot {
    let x_range = match (set.rc_samples.first(), set.rc_samples.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => (1e-9, 1e-3),
    };
    let mut plot = LogLogPlot::new(x_range, (1e-20, 1e0));
    plot.title = "CSL exclusion".to_owned();
    plot.x_label = "rC (m)".to_owned();
    plot.y_label = "lambda (1/s)".to_owned();
    plot.comments = comments;
    plot.curves = set
        .regions
        .iter()
        .map(|r| Curve {
            label: r.source.clone(),
            points: r.rc_samples.iter().copied().zip(r.lambda_boundary.iter().copied()).collect(),
            fill_above: true,
        })
        .collect();
    plot.markers = presets
        .iter()
        .filter_map(|p| match p.params {
            ModelParams::Csl(c) => Some(Marker {
                label: p.name.to_owned(),
                x: c.r_c,
                y: c.lambda,
                y_decades: p.lambda_uncertainty_decades,
            }),
            ModelParams::Dp(_) => None,
        })
        .collect();
    plot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exclusion::{combine_on, default_rc_grid, ExclusionRegion};
    use crate::physics::presets;

    #[test]
    fn empty_set_renders_markers_only() {
        let set = RegionSet::empty(default_rc_grid());
        let svg = exclusion_plot(&set, &presets(), vec!["config_sha256: x".into()]).render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("<!-- config_sha256: x -->"));
        assert!(svg.contains(">1e-9<") && svg.contains(">1e-3<"));
    }

    #[test]
    fn infinite_samples_split_curves() {
        let grid = vec![1e-8, 1e-7, 1e-6, 1e-5];
        let r = ExclusionRegion {
            rc_samples: grid.clone(),
            lambda_boundary: vec![1e-10, 1e-9, f64::INFINITY, 1e-7],
            source: "a<b".into(),
        };
        let set = combine_on(grid, vec![r]).unwrap();
        let svg = exclusion_plot(&set, &[], vec![]).render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg, exclusion_plot(&set, &[], vec![]).render());
    }
}
