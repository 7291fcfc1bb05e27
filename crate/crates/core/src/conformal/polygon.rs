use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::brep::{Brep, Side};
use crate::error::{Error, Result};

/// Default edge-splitting factor.
pub const DEFAULT_KAPPA: f64 = 1.5;

/// Simplified counterclockwise boundary polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    /// Vertices `ω_j` in counterclockwise order.
    pub vertices: Vec<Complex64>,
    /// Turning exponents `β_j = α_j/π − 1`.
    pub betas: Vec<f64>,
    /// Vertex indices of the corners `[SW, SE, NE, NW]`.
    pub corners: [usize; 4],
    /// Side label of edge `j`, which joins vertex `j` to vertex `j + 1`.
    pub side_labels: Vec<Side>,
}

impl Polygon {
    /// Build a polygon from counterclockwise vertices, computing the turning
    /// exponents and validating the shape.
    pub fn new(vertices: Vec<Complex64>, corners: [usize; 4], side_labels: Vec<Side>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices")));
        }
        if side_labels.len() != n {
            return Err(Error::InvalidPolygon("one side label per edge required".into()));
        }
        if !cyclic_increasing(&corners, n) {
            return Err(Error::InvalidPolygon(format!("corners {corners:?} not in cyclic order")));
        }
        for j in 0..n {
            if vertices[j] == vertices[(j + 1) % n] {
                return Err(Error::InvalidPolygon(format!("zero-length edge at vertex {j}")));
            }
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(Error::InvalidPolygon("boundary loop is clockwise".into()));
        }
        let betas = turning_exponents(&vertices);
        if let Some((j, b)) = betas.iter().enumerate().find(|(_, &b)| !(b > -1.0 && b <= 1.0)) {
            return Err(Error::InvalidPolygon(format!("vertex {j} has exponent {b} outside (-1, 1]")));
        }
        let p = Polygon {
            vertices,
            betas,
            corners,
            side_labels,
        };
        if let Some((a, b)) = p.find_self_intersection() {
            return Err(Error::InvalidPolygon(format!("edges {a} and {b} intersect")));
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn edge(&self, j: usize) -> (Complex64, Complex64) {
        (self.vertices[j], self.vertices[(j + 1) % self.len()])
    }

    /// Distance from `z` to the polygon boundary.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        (0..self.len())
            .map(|j| {
                let (a, b) = self.edge(j);
                point_segment_distance(z, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// First pair of intersecting edges, if any.
    pub fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let bbox = |j: usize| {
            let (a, b) = self.edge(j);
            (a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im))
        };
        let boxes: Vec<_> = (0..n).map(bbox).collect();
        // sweep over edges sorted by their left x
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| boxes[a].0.total_cmp(&boxes[b].0));
        let mut active: Vec<usize> = Vec::new();
        for &e in &order {
            active.retain(|&f| boxes[f].1 >= boxes[e].0);
            for &f in &active {
                let (i, j) = (e.min(f), e.max(f));
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if boxes[e].2 > boxes[f].3 || boxes[f].2 > boxes[e].3 {
                    continue;
                }
                let (a, b) = self.edge(i);
                let (c, d) = self.edge(j);
                if adjacent {
                    if overlapping_adjacent(a, b, c, d, i + 1 == j) {
                        return Some((i, j));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
            active.push(e);
        }
        None
    }
}

fn cyclic_increasing(idx: &[usize; 4], n: usize) -> bool {
    if idx.iter().any(|&i| i >= n) {
        return false;
    }
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

pub(crate) fn signed_area(v: &[Complex64]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|j| {
            let (a, b) = (v[j], v[(j + 1) % n]);
            a.re * b.im - a.im * b.re
        })
        .sum::<f64>()
}

/// `β_j = -τ_j/π` with `τ_j` the signed turning angle at vertex `j`.
fn turning_exponents(v: &[Complex64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            let din = v[j] - v[(j + n - 1) % n];
            let dout = v[(j + 1) % n] - v[j];
            let turn = (dout * din.conj()).arg();
            -turn / PI
        })
        .collect()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

pub(crate) fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Adjacent edges overlap only when they fold back onto each other.
fn overlapping_adjacent(a: Complex64, b: Complex64, c: Complex64, d: Complex64, forward: bool) -> bool {
    // shared vertex is b == c when `forward`, otherwise a == d
    let (shared, p, q) = if forward { (b, a, d) } else { (a, b, c) };
    let (u, w) = (p - shared, q - shared);
    cross(u, w) == 0.0 && (u.re * w.re + u.im * w.im) > 0.0
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Sample the four curves and assemble the counterclockwise polygon.
pub fn polygonize(brep: &Brep, chord_tol: f64) -> Result<Polygon> {
    if !(chord_tol > 0.0) {
        return Err(Error::InvalidGeometry(format!("chord tolerance must be positive, got {chord_tol}")));
    }
    brep.check_closure()?;
    let pieces: [(Side, bool); 4] = [
        (Side::South, false),
        (Side::East, false),
        (Side::North, true),
        (Side::West, true),
    ];
    let mut vertices = Vec::new();
    let mut labels = Vec::new();
    let mut corners = [0usize; 4];
    for (k, (side, reverse)) in pieces.into_iter().enumerate() {
        let poly = brep.curve(side).sample_adaptive(chord_tol);
        if poly.degenerate {
            return Err(Error::InvalidGeometry(format!("{side} curve has zero length")));
        }
        let mut pts: Vec<Complex64> = poly.points.iter().map(|p| Complex64::new(p.x, p.y)).collect();
        if reverse {
            pts.reverse();
        }
        corners[k] = vertices.len();
        // the last point is the next side's first point
        pts.pop();
        for p in pts {
            if vertices.last() == Some(&p) {
                continue;
            }
            vertices.push(p);
            labels.push(side);
        }
    }
    Polygon::new(vertices, corners, labels)
}

/// Bisect every edge longer than `kappa` times the distance from its
/// midpoint to the nearest non-adjacent vertex or edge, until none remain.
pub fn split_long_edges(poly: &Polygon, kappa: f64) -> Polygon {
    let diam = poly.diameter();
    let min_len = 1e-6 * diam;
    let mut verts = poly.vertices.clone();
    let mut betas = poly.betas.clone();
    let mut labels = poly.side_labels.clone();
    let mut is_corner: Vec<bool> = (0..verts.len()).map(|j| poly.corners.contains(&j)).collect();
    let max_passes = 64;
    for pass in 0..max_passes {
        let n = verts.len();
        let violating: Vec<bool> = (0..n)
            .map(|i| {
                let (a, b) = (verts[i], verts[(i + 1) % n]);
                let len = (b - a).norm();
                len > min_len && len > kappa * nonadjacent_distance(&verts, i)
            })
            .collect();
        if !violating.iter().any(|&v| v) {
            break;
        }
        if pass + 1 == max_passes {
            warn!("edge splitting stopped after {max_passes} passes with violations left");
            break;
        }
        let mut nv = Vec::with_capacity(2 * n);
        let mut nb = Vec::with_capacity(2 * n);
        let mut nl = Vec::with_capacity(2 * n);
        let mut nc = Vec::with_capacity(2 * n);
        for i in 0..n {
            nv.push(verts[i]);
            nb.push(betas[i]);
            nl.push(labels[i]);
            nc.push(is_corner[i]);
            if violating[i] {
                let b = verts[(i + 1) % n];
                nv.push(0.5 * (verts[i] + b));
                nb.push(0.0);
                nl.push(labels[i]);
                nc.push(false);
            }
        }
        verts = nv;
        betas = nb;
        labels = nl;
        is_corner = nc;
    }
    let mut corners = [0usize; 4];
    for (k, j) in is_corner.iter().enumerate().filter(|(_, &c)| c).map(|(j, _)| j).enumerate() {
        corners[k] = j;
    }
    Polygon {
        vertices: verts,
        betas,
        corners,
        side_labels: labels,
    }
}

/// Distance from the midpoint of edge `i` to the vertices not on it and the
/// edges not touching it.
pub(crate) fn nonadjacent_distance(verts: &[Complex64], i: usize) -> f64 {
    let n = verts.len();
    let m = 0.5 * (verts[i] + verts[(i + 1) % n]);
    let mut d = f64::INFINITY;
    for j in 0..n {
        if j != i && j != (i + 1) % n {
            d = d.min((verts[j] - m).norm());
        }
        let adjacent = j == i || j == (i + 1) % n || (j + 1) % n == i;
        if !adjacent {
            d = d.min(point_segment_distance(m, verts[j], verts[(j + 1) % n]));
        }
    }
    d
}
