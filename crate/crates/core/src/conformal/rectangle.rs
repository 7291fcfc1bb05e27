//! Disk-to-rectangle map on the four corner prevertices and the paired
//! West/East markers it induces.

use nalgebra::Point2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::Integrator;
use super::prevertex::DiskPoint;
use super::scmap::ScDiskMap;
use crate::error::{Error, Result};

/// Required accuracy of a marker's rectangle ordinate.
pub const ORDINATE_TOL: f64 = 1e-10;

/// Corner prevertex indices, named after the long sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectCorners {
    /// South-West corner, `West(0)`.
    pub west_start: usize,
    /// North-West corner, `West(1)`.
    pub west_end: usize,
    /// North-East corner, `East(1)`.
    pub east_end: usize,
    /// South-East corner, `East(0)`.
    pub east_start: usize,
}

impl RectCorners {
    /// From polygon corner flags `[SW, SE, NE, NW]`.
    pub fn from_polygon_corners(c: [usize; 4]) -> Self {
        RectCorners {
            west_start: c[0],
            east_start: c[1],
            east_end: c[2],
            west_end: c[3],
        }
    }

    /// Counterclockwise order `[SW, SE, NE, NW]`.
    pub fn ccw(&self) -> [usize; 4] {
        [self.west_start, self.east_start, self.east_end, self.west_end]
    }
}

/// Schwarz–Christoffel map of the disk onto a rectangle whose corners are
/// the images of the four corner prevertices.
#[derive(Clone, Debug)]
pub struct RectMap {
    corners: RectCorners,
    integrator: Integrator,
    /// Side lengths `[South, East, North, West]` in the unscaled map.
    sides: [f64; 4],
    modulus: f64,
}

/// Paired physical markers on the West and East sides.
#[derive(Clone, Debug, PartialEq)]
pub struct Markers {
    pub ordinates: Vec<f64>,
    pub west: Vec<Point2<f64>>,
    pub east: Vec<Point2<f64>>,
    pub west_disk: Vec<DiskPoint>,
    pub east_disk: Vec<DiskPoint>,
}

fn cyclic_order(idx: [usize; 4]) -> bool {
    let mut wraps = 0;
    for k in 0..4 {
        let (a, b) = (idx[k], idx[(k + 1) % 4]);
        if a == b {
            return false;
        }
        if b < a {
            wraps += 1;
        }
    }
    wraps == 1
}

/// Build the rectangle map for the given corners of a solved disk map.
pub fn disk_to_rectangle(map: &ScDiskMap, corners: RectCorners) -> Result<RectMap> {
    let ccw = corners.ccw();
    if ccw.iter().any(|&k| k >= map.len()) || !cyclic_order(ccw) {
        return Err(Error::InvalidPolygon(format!(
            "rectangle corners {ccw:?} are not in counterclockwise cyclic order"
        )));
    }
    let sing: Vec<(usize, f64)> = ccw.iter().map(|&k| (k, -0.5)).collect();
    let integrator = Integrator::new(&sing, map.quad_points());
    let prev = map.prevertices();
    let mut sides = [0.0; 4];
    for k in 0..4 {
        let a = DiskPoint::prevertex(ccw[k]);
        let b = DiskPoint::prevertex(ccw[(k + 1) % 4]);
        sides[k] = integrator.integrate(prev, &a, &b)?.norm();
    }
    let modulus = (sides[1] + sides[3]) / (sides[0] + sides[2]);
    Ok(RectMap {
        corners,
        integrator,
        sides,
        modulus,
    })
}

impl RectMap {
    pub fn corners(&self) -> RectCorners {
        self.corners
    }

    /// Long-side to short-side ratio of the image rectangle.
    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// Side lengths `[South, East, North, West]` of the unscaled image.
    pub fn sides(&self) -> [f64; 4] {
        self.sides
    }

    /// Boundary point on the arc `start → end` at signed log-position `s`:
    /// `s ≤ 0` lies `(arc/2)·e^s` from `start`, `s > 0` lies `(arc/2)·e^{−s}`
    /// before `end`. Returns the point and its rectangle ordinate.
    fn arc_point(&self, map: &ScDiskMap, s: f64, start: usize, end: usize, dir: f64, half: f64, side_len: f64) -> Result<(DiskPoint, f64)> {
        let prev = map.prevertices();
        let (anchor, offset) = if s <= 0.0 { (start, dir * half * s.exp()) } else { (end, -dir * half * (-s).exp()) };
        let p = DiskPoint::Boundary { anchor, offset };
        let d = self.integrator.integrate(prev, &DiskPoint::prevertex(anchor), &p)?.norm() / side_len;
        Ok((p, if s <= 0.0 { d } else { 1.0 - d }))
    }

    /// Find the boundary point on a long side with rectangle ordinate `t`.
    /// `start`/`end` are the South and North corners of the side and `dir`
    /// the sign of the angular direction from `start` to `end`.
    fn locate(&self, map: &ScDiskMap, t: f64, start: usize, end: usize, dir: f64, side_len: f64) -> Result<DiskPoint> {
        let prev = map.prevertices();
        let arc = if dir > 0.0 { prev.arc(start, end) } else { prev.arc(end, start) };
        let half = 0.5 * arc;
        let g = |s: f64| -> Result<(DiskPoint, f64)> {
            let (p, o) = self.arc_point(map, s, start, end, dir, half, side_len)?;
            Ok((p, o - t))
        };
        let (mut lo, mut hi) = (-700.0, 700.0);
        let (mut glo, mut ghi) = (-t, 1.0 - t);
        if !(glo <= 0.0 && ghi >= 0.0) {
            return Err(Error::Bracket(format!("ordinate {t} lies outside [0, 1]")));
        }
        let mut best: Option<(DiskPoint, f64)> = None;
        let mut side = 0i32;
        for _ in 0..400 {
            // Illinois variant of regula falsi
            let mut s = (lo * ghi - hi * glo) / (ghi - glo);
            if !s.is_finite() || s <= lo || s >= hi {
                s = 0.5 * (lo + hi);
            }
            let (p, gs) = g(s)?;
            if best.is_none_or(|(_, b)| gs.abs() < b.abs()) {
                best = Some((p, gs));
            }
            if gs.abs() <= 0.25 * ORDINATE_TOL || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
                break;
            }
            if gs > 0.0 {
                hi = s;
                ghi = gs;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            } else {
                lo = s;
                glo = gs;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            }
        }
        let (p, resid) = best.expect("at least one iteration");
        if resid.abs() > ORDINATE_TOL {
            return Err(Error::Bracket(format!("ordinate {t} located only to {:e}", resid.abs())));
        }
        match p {
            DiskPoint::Boundary { anchor, offset } => Ok(prev.reanchor(anchor, offset)),
            other => Ok(other),
        }
    }

    /// `m` marker pairs at uniform rectangle ordinates `t_i = i/(m−1)`.
    pub fn boundary_markers(&self, map: &ScDiskMap, m: usize) -> Result<Markers> {
        if m < 2 {
            return Err(Error::Markers(format!("need at least 2 markers, got {m}")));
        }
        let c = self.corners;
        let west_len = self.sides[3];
        let east_len = self.sides[1];
        let mut out = Markers {
            ordinates: Vec::with_capacity(m),
            west: Vec::with_capacity(m),
            east: Vec::with_capacity(m),
            west_disk: Vec::with_capacity(m),
            east_disk: Vec::with_capacity(m),
        };
        for i in 0..m {
            let t = i as f64 / (m - 1) as f64;
            let (wd, ed) = if i == 0 {
                (DiskPoint::prevertex(c.west_start), DiskPoint::prevertex(c.east_start))
            } else if i == m - 1 {
                (DiskPoint::prevertex(c.west_end), DiskPoint::prevertex(c.east_end))
            } else {
                // West runs clockwise from SW to NW, East counterclockwise
                // from SE to NE
                (
                    self.locate(map, t, c.west_start, c.west_end, -1.0, west_len)?,
                    self.locate(map, t, c.east_start, c.east_end, 1.0, east_len)?,
                )
            };
            let wp = map.eval(&wd)?;
            let ep = map.eval(&ed)?;
            out.ordinates.push(t);
            out.west.push(to_point(wp));
            out.east.push(to_point(ep));
            out.west_disk.push(wd);
            out.east_disk.push(ed);
        }
        Ok(out)
    }
}

fn to_point(z: Complex64) -> Point2<f64> {
    Point2::new(z.re, z.im)
}

/// Paired markers for a solved map: builds the rectangle map on the
/// polygon corners and samples `m` ordinates.
pub fn boundary_markers(map: &ScDiskMap, rect: &RectMap, m: usize) -> Result<Markers> {
    rect.boundary_markers(map, m)
}
