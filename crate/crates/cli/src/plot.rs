//! Static SVG plots: observed against counterfactual, and the point-effect
//! path with its pointwise interval band.

use std::fmt::Write;

use carima_core::CausalReport;
use statrs::distribution::{ContinuousCDF, Normal};

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 260.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 30.0;

struct Panel {
    top: f64,
    x_max: usize,
    lo: f64,
    hi: f64,
}

impl Panel {
    fn new(top: f64, x_max: usize, values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (-1.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            top,
            x_max,
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn x(&self, step: f64) -> f64 {
        let span = self.x_max as f64 + 0.5;
        LEFT + (step / span) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let inner = PANEL_HEIGHT - TOP - BOTTOM;
        self.top + TOP + (self.hi - v) / (self.hi - self.lo) * inner
    }

    fn frame(&self, out: &mut String, title: &str) {
        let inner = PANEL_HEIGHT - TOP - BOTTOM;
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            LEFT,
            self.top + TOP,
            WIDTH - LEFT - RIGHT,
            inner
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="14">{}</text>"#,
            LEFT,
            self.top + TOP - 10.0,
            escape(title)
        );
        for i in 0..=4 {
            let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
            let y = self.y(v);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
                LEFT,
                WIDTH - RIGHT
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                tick(v)
            );
        }
    }

    fn x_labels(&self, out: &mut String, first: &str, last: &str) {
        let y = self.top + PANEL_HEIGHT - BOTTOM + 16.0;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}" font-size="11" text-anchor="middle">{}</text>"#, self.x(1.0), escape(first));
        if self.x_max > 1 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                self.x(self.x_max as f64),
                escape(last)
            );
        }
    }

    fn vertical(&self, out: &mut String, step: f64, dash: bool) {
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#888"{}/>"##,
            self.top + TOP,
            self.top + PANEL_HEIGHT - BOTTOM,
            if dash { r#" stroke-dasharray="4 3""# } else { "" },
            x = self.x(step)
        );
    }

    fn horizontal(&self, out: &mut String, v: f64) {
        let y = self.y(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#222" stroke-width="0.8"/>"##,
            LEFT,
            WIDTH - RIGHT
        );
    }

    /// Polyline through observed points; gaps split the line and isolated
    /// points become dots.
    fn line(&self, out: &mut String, values: &[Option<f64>], color: &str, dash: bool) {
        let dash = if dash { r#" stroke-dasharray="6 3""# } else { "" };
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |segment: &mut Vec<(f64, f64)>, out: &mut String| {
            match segment.as_slice() {
                [] => {}
                [(x, y)] => {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
                }
                pts => {
                    let joined: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                        joined.join(" ")
                    );
                }
            }
            segment.clear();
        };
        for (i, v) in values.iter().enumerate() {
            match v {
                Some(v) if v.is_finite() => segment.push((self.x((i + 1) as f64), self.y(*v))),
                _ => flush(&mut segment, out),
            }
        }
        flush(&mut segment, out);
    }

    fn band(&self, out: &mut String, lower: &[f64], upper: &[f64], color: &str) {
        if lower.is_empty() {
            return;
        }
        let mut pts: Vec<String> = Vec::new();
        let n = lower.len();
        if n == 1 {
            for (dx, v) in [(-0.3, upper[0]), (0.3, upper[0]), (0.3, lower[0]), (-0.3, lower[0])] {
                pts.push(format!("{:.2},{:.2}", self.x(1.0 + dx), self.y(v)));
            }
        } else {
            for (i, v) in upper.iter().enumerate() {
                pts.push(format!("{:.2},{:.2}", self.x((i + 1) as f64), self.y(*v)));
            }
            for (i, v) in lower.iter().enumerate().rev() {
                pts.push(format!("{:.2},{:.2}", self.x((i + 1) as f64), self.y(*v)));
            }
        }
        let _ = writeln!(out, r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#, pts.join(" "));
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn critical(report: &CausalReport) -> f64 {
    let alpha = report.tests.first().map(|t| t.alpha).unwrap_or(0.05);
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(1.0 - alpha / 2.0)
}

/// Two stacked panels for the first `horizon` post-period steps: the
/// observed series against the counterfactual forecast band, and the point
/// effect with its interval band around zero. The intervention sits at
/// step 0.
pub fn render_effect_plot(report: &CausalReport, horizon: usize) -> String {
    let k = horizon.min(report.original.len()).min(report.counterfactual.len());
    let z = critical(report);
    let label = |i: usize| -> String {
        report
            .post_dates
            .as_ref()
            .and_then(|d| d.get(i))
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_else(|| format!("t*+{}", i + 1))
    };

    let observed: Vec<Option<f64>> = (0..k).map(|i| report.observed.get(i).copied().flatten()).collect();
    let fc: Vec<f64> = report.counterfactual[..k].to_vec();
    let fc_sd: Vec<f64> = (0..k).map(|i| report.counterfactual_variance.get(i).map_or(0.0, |v| v.max(0.0).sqrt())).collect();
    let fc_lo: Vec<f64> = fc.iter().zip(&fc_sd).map(|(m, s)| m - z * s).collect();
    let fc_hi: Vec<f64> = fc.iter().zip(&fc_sd).map(|(m, s)| m + z * s).collect();

    let tau: Vec<Option<f64>> = report.original.tau[..k].to_vec();
    let tau_sd: Vec<f64> = report.original.var_tau[..k].iter().map(|v| v.max(0.0).sqrt()).collect();
    let centre: Vec<f64> = tau.iter().map(|t| t.unwrap_or(0.0)).collect();
    let tau_lo: Vec<f64> = centre.iter().zip(&tau_sd).map(|(m, s)| m - z * s).collect();
    let tau_hi: Vec<f64> = centre.iter().zip(&tau_sd).map(|(m, s)| m + z * s).collect();

    let top = Panel::new(
        0.0,
        k.max(1),
        observed.iter().flatten().copied().chain(fc_lo.iter().copied()).chain(fc_hi.iter().copied()),
    );
    let bottom = Panel::new(
        PANEL_HEIGHT,
        k.max(1),
        tau.iter().flatten().copied().chain(tau_lo.iter().copied()).chain(tau_hi.iter().copied()).chain([0.0]),
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{}" viewBox="0 0 {WIDTH} {}">"#,
        2.0 * PANEL_HEIGHT,
        2.0 * PANEL_HEIGHT
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (first, last) = if k == 0 { (String::new(), String::new()) } else { (label(0), label(k - 1)) };

    top.frame(&mut out, &format!("{}: observed and counterfactual, {k} steps", report.series));
    top.band(&mut out, &fc_lo, &fc_hi, "#4a78b5");
    top.line(&mut out, &fc.iter().map(|v| Some(*v)).collect::<Vec<_>>(), "#2b5797", true);
    top.line(&mut out, &observed, "#111", false);
    top.vertical(&mut out, 0.5, true);
    top.x_labels(&mut out, &first, &last);

    bottom.frame(&mut out, &format!("point effect with {:.0}% interval", 100.0 * (1.0 - report.tests.first().map_or(0.05, |t| t.alpha))));
    bottom.band(&mut out, &tau_lo, &tau_hi, "#c0504d");
    bottom.horizontal(&mut out, 0.0);
    bottom.line(&mut out, &tau, "#8b1a1a", false);
    bottom.vertical(&mut out, 0.5, true);
    bottom.x_labels(&mut out, &first, &last);
    out.push_str("</svg>\n");
    out
}
