//! Deterministic synthetic geometry corpus.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};

use nalgebra::{Point2, Vector2};

use super::files::BrepFile;
use crate::brep::Brep;
use crate::error::Result;
use crate::splines::{KnotVector, NurbsCurve};

fn p(x: f64, y: f64) -> Point2<f64> {
    Point2::new(x, y)
}

fn line(a: Point2<f64>, b: Point2<f64>) -> NurbsCurve {
    NurbsCurve::line(a, b)
}

/// Axis-aligned `width × height` rectangle with the long sides vertical.
pub fn rectangle(width: f64, height: f64) -> Brep {
    Brep::new(
        line(p(0.0, 0.0), p(0.0, height)),
        line(p(width, 0.0), p(width, height)),
        line(p(0.0, 0.0), p(width, 0.0)),
        line(p(0.0, height), p(width, height)),
    )
    .expect("rectangle closes")
}

fn arc(r: f64) -> NurbsCurve {
    NurbsCurve::new(
        KnotVector::bezier(2, 0.0, 1.0),
        vec![p(r, 0.0), p(r, r), p(0.0, r)],
        vec![1.0, FRAC_1_SQRT_2, 1.0],
    )
    .expect("arc is valid")
}

/// Quarter annulus between radii 1 and 2; the arcs are the long sides.
pub fn quarter_annulus() -> Brep {
    Brep::new(arc(1.0), arc(2.0), line(p(1.0, 0.0), p(2.0, 0.0)), line(p(0.0, 1.0), p(0.0, 2.0)))
        .expect("annulus closes")
}

/// Channel of width 1 with one sharp 90° turn.
pub fn l_channel() -> Brep {
    let kv = || KnotVector::new(vec![0.0, 0.0, 0.5, 1.0, 1.0], 1).expect("valid knots");
    let west = NurbsCurve::bspline(kv(), vec![p(0.0, 0.0), p(0.0, 6.0), p(6.0, 6.0)]).expect("valid curve");
    let east = NurbsCurve::bspline(kv(), vec![p(1.0, 0.0), p(1.0, 5.0), p(6.0, 5.0)]).expect("valid curve");
    Brep::new(west, east, line(p(0.0, 0.0), p(1.0, 0.0)), line(p(6.0, 6.0), p(6.0, 5.0))).expect("L-channel closes")
}

/// S-shaped channel around the centerline `y = amplitude · sin(π x / 5)`,
/// `0 ≤ x ≤ 10`. Both long sides are cubic B-splines through offsets of the
/// centerline. East has chord-length knots over control points crowded
/// towards `x = 0`; West has uniform knots over control points crowded
/// towards `x = 10`. The two parameterizations disagree strongly in the
/// bends.
#[derive(Clone, Debug, PartialEq)]
pub struct SChannel {
    pub amplitude: f64,
    pub width: f64,
    /// Control points of the West (upper) side.
    pub west_points: usize,
    /// Control points of the East (lower) side.
    pub east_points: usize,
    /// Crowding exponent `k`: East samples sit at `x = 10 s^k` and West
    /// samples at `x = 10 (1 − (1 − s)^k)`; 1 is uniform.
    pub clustering: f64,
}

impl Default for SChannel {
    fn default() -> Self {
        SChannel {
            amplitude: 3.0,
            width: 1.0,
            west_points: 24,
            east_points: 24,
            clustering: 2.0,
        }
    }
}

/// Clamped cubic knots from the chord lengths of a control polygon,
/// averaged over `degree` consecutive parameters.
fn chord_length_knots(pts: &[Point2<f64>], degree: usize) -> KnotVector {
    let n = pts.len();
    let mut t = vec![0.0; n];
    for k in 1..n {
        t[k] = t[k - 1] + (pts[k] - pts[k - 1]).norm();
    }
    let total = t[n - 1];
    for v in &mut t {
        *v /= total;
    }
    let mut knots = vec![0.0; degree + 1];
    for j in 1..n - degree {
        knots.push(t[j..j + degree].iter().sum::<f64>() / degree as f64);
    }
    knots.extend(std::iter::repeat(1.0).take(degree + 1));
    KnotVector::new(knots, degree).expect("chord-length knots are valid")
}

impl SChannel {
    fn offset(&self, x: f64, side: f64) -> Point2<f64> {
        let k = PI / 5.0;
        let y = self.amplitude * (k * x).sin();
        let slope = self.amplitude * k * (k * x).cos();
        let n = Vector2::new(-slope, 1.0).normalize();
        p(x, y) + n * (side * 0.5 * self.width)
    }

    /// One offset side; a negative `clustering` crowds towards `x = 10`.
    fn side(&self, count: usize, clustering: f64, side: f64, chord_length: bool) -> NurbsCurve {
        let pts: Vec<Point2<f64>> = (0..count)
            .map(|k| {
                let s = k as f64 / (count - 1) as f64;
                let s = if clustering >= 0.0 { s.powf(clustering) } else { 1.0 - (1.0 - s).powf(-clustering) };
                self.offset(10.0 * s, side)
            })
            .collect();
        let knots = if chord_length {
            chord_length_knots(&pts, 3)
        } else {
            KnotVector::uniform(3, count - 3, 0.0, 1.0)
        };
        NurbsCurve::bspline(knots, pts).expect("valid channel side")
    }

    pub fn brep(&self) -> Brep {
        let west = self.side(self.west_points, -self.clustering, 1.0, false);
        let east = self.side(self.east_points, self.clustering, -1.0, true);
        let south = line(west.start_point(), east.start_point());
        let north = line(west.end_point(), east.end_point());
        Brep::new(west, east, south, north).expect("S-channel closes")
    }
}

/// The S-channel of the bundled corpus.
pub fn s_channel() -> Brep {
    SChannel::default().brep()
}

/// Named corpus geometries in a fixed order.
pub fn corpus() -> Vec<(&'static str, Brep)> {
    vec![
        ("square", rectangle(1.0, 1.0)),
        ("rect5", rectangle(1.0, 5.0)),
        ("rect20", rectangle(1.0, 20.0)),
        ("annulus", quarter_annulus()),
        ("s_channel", s_channel()),
        ("l_channel", l_channel()),
    ]
}

/// Write every corpus geometry to `<dir>/<name>.json`.
pub fn write_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, brep) in corpus() {
        let path = dir.join(format!("{name}.json"));
        BrepFile::from_brep(&brep).write(&path)?;
        out.push(path);
    }
    Ok(out)
}
