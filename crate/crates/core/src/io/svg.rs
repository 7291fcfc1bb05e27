//! SVG rendering of a surface: isoparameter net with optional cells colored
//! by a quality metric.

use std::fmt::Write as _;

use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::quality::{area_ratio, jacobian_sample};
use crate::splines::NurbsSurface;

/// Canvas size of the longer side in pixels.
const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;
/// Polyline samples per isoparameter curve.
const CURVE_SAMPLES: usize = 200;
/// Samples along each cell edge of a filled cell.
const CELL_EDGE_SAMPLES: usize = 8;

/// Cell coloring of [`plot_svg`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotMetric {
    ScaledJacobian,
    Uniformity,
    None,
}

impl PlotMetric {
    pub fn parse(s: &str) -> Option<PlotMetric> {
        match s {
            "sj" => Some(PlotMetric::ScaledJacobian),
            "unif" => Some(PlotMetric::Uniformity),
            "none" => Some(PlotMetric::None),
            _ => None,
        }
    }
}

/// Diverging scale on `[-1, 1]`: blue at 1, white at 0, red at −1.
fn color(value: f64) -> String {
    let t = value.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (1.0 - t, 1.0 - 0.6 * t, 1.0)
    } else {
        (1.0, 1.0 + t, 1.0 + t)
    };
    let c = |x: f64| (x * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(s: &NurbsSurface) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for q in s.control() {
            x0 = x0.min(q.x);
            x1 = x1.max(q.x);
            y0 = y0.min(q.y);
            y1 = y1.max(q.y);
        }
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        Frame {
            x0,
            y1,
            scale,
            width: (x1 - x0) * scale + 2.0 * MARGIN,
            height: (y1 - y0) * scale + 2.0 * MARGIN,
        }
    }

    /// Pixel coordinates with the y axis pointing up.
    fn map(&self, q: Point2<f64>) -> (f64, f64) {
        (MARGIN + (q.x - self.x0) * self.scale, MARGIN + (self.y1 - q.y) * self.scale)
    }
}

fn points_attr(frame: &Frame, pts: impl Iterator<Item = Point2<f64>>) -> String {
    let mut s = String::new();
    for (k, q) in pts.enumerate() {
        let (x, y) = frame.map(q);
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{x:.3},{y:.3}").unwrap();
    }
    s
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Render `n_iso × n_iso` isoparameter curves of `surface`. With a metric,
/// every cell between neighbouring isoparameter curves is filled with the
/// color of the metric at its center.
pub fn plot_svg(surface: &NurbsSurface, n_iso: usize, metric: PlotMetric) -> Result<String> {
    if n_iso < 2 {
        return Err(Error::InvalidGeometry(format!("need at least 2 isoparameter curves, got {n_iso}")));
    }
    let ((u0, u1), (v0, v1)) = surface.param_range();
    let frame = Frame::new(surface);
    let eval = |u: f64, v: f64| surface.eval_jacobian(u, v).0;
    let iso = |k: usize| k as f64 / (n_iso - 1) as f64;
    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        frame.width.ceil(),
        frame.height.ceil(),
        frame.width,
        frame.height
    )
    .unwrap();
    writeln!(svg, r##"<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>"##).unwrap();

    if metric != PlotMetric::None {
        let r = area_ratio(surface);
        writeln!(svg, r#"<g id="cells" stroke="none">"#).unwrap();
        for j in 0..n_iso - 1 {
            for i in 0..n_iso - 1 {
                let (ua, ub) = (lerp(u0, u1, iso(i)), lerp(u0, u1, iso(i + 1)));
                let (va, vb) = (lerp(v0, v1, iso(j)), lerp(v0, v1, iso(j + 1)));
                let sample = jacobian_sample(surface, 0.5 * (ua + ub), 0.5 * (va + vb))?;
                let value = match metric {
                    PlotMetric::ScaledJacobian => sample.scaled,
                    _ if r > 0.0 => 1.0 - (sample.det / r - 1.0).abs(),
                    _ => -1.0,
                };
                let m = CELL_EDGE_SAMPLES;
                let t = |k: usize| k as f64 / m as f64;
                let outline = (0..m)
                    .map(|k| eval(lerp(ua, ub, t(k)), va))
                    .chain((0..m).map(|k| eval(ub, lerp(va, vb, t(k)))))
                    .chain((0..m).map(|k| eval(lerp(ub, ua, t(k)), vb)))
                    .chain((0..m).map(|k| eval(ua, lerp(vb, va, t(k)))));
                writeln!(svg, r#"<polygon points="{}" fill="{}"/>"#, points_attr(&frame, outline), color(value)).unwrap();
            }
        }
        writeln!(svg, "</g>").unwrap();
    }

    let curve_t = |k: usize| k as f64 / CURVE_SAMPLES as f64;
    writeln!(svg, r##"<g id="net" fill="none" stroke="#303030" stroke-width="0.6">"##).unwrap();
    for k in 0..n_iso {
        let u = lerp(u0, u1, iso(k));
        let pts = (0..=CURVE_SAMPLES).map(|s| eval(u, lerp(v0, v1, curve_t(s))));
        writeln!(svg, r#"<polyline points="{}"/>"#, points_attr(&frame, pts)).unwrap();
        let v = lerp(v0, v1, iso(k));
        let pts = (0..=CURVE_SAMPLES).map(|s| eval(lerp(u0, u1, curve_t(s)), v));
        writeln!(svg, r#"<polyline points="{}"/>"#, points_attr(&frame, pts)).unwrap();
    }
    writeln!(svg, "</g>").unwrap();

    let boundary = (0..=CURVE_SAMPLES)
        .map(|s| eval(lerp(u0, u1, curve_t(s)), v0))
        .chain((0..=CURVE_SAMPLES).map(|s| eval(u1, lerp(v0, v1, curve_t(s)))))
        .chain((0..=CURVE_SAMPLES).map(|s| eval(lerp(u1, u0, curve_t(s)), v1)))
        .chain((0..=CURVE_SAMPLES).map(|s| eval(u0, lerp(v1, v0, curve_t(s)))));
    writeln!(
        svg,
        r##"<polygon id="boundary" points="{}" fill="none" stroke="#000000" stroke-width="1.5"/>"##,
        points_attr(&frame, boundary)
    )
    .unwrap();
    writeln!(svg, "</svg>").unwrap();
    Ok(svg)
}
