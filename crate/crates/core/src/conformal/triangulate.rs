use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polygon::Polygon;
use crate::error::{Error, Result};

/// Cross-ratio `ρ(a,b,c,d) = (d−a)(b−c) / ((c−d)(a−b))`.
pub fn cross_ratio(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Complex64> {
    if a == b || c == d {
        return Err(Error::Degenerate("coincident points in a cross-ratio denominator".into()));
    }
    Ok((d - a) * (b - c) / ((c - d) * (a - b)))
}

/// Diagonals of a polygon triangulation and the quadrilaterals around them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSet {
    /// Interior diagonals as vertex index pairs.
    pub diagonals: Vec<(usize, usize)>,
    /// Counterclockwise quadrilaterals `(a, x, c, y)` whose diagonal is `a–c`.
    pub quads: Vec<[usize; 4]>,
    /// `c_i = log|ρ(ω_a, ω_x, ω_c, ω_y)|`.
    pub target_logs: Vec<f64>,
    /// Triangles (counterclockwise vertex triples).
    pub triangles: Vec<[usize; 3]>,
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `abc`.
fn in_circle(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> f64 {
    let (ad, bd, cd) = (a - d, b - d, c - d);
    let (a2, b2, c2) = (ad.norm_sqr(), bd.norm_sqr(), cd.norm_sqr());
    ad.re * (bd.im * c2 - b2 * cd.im) - ad.im * (bd.re * c2 - b2 * cd.re) + a2 * (bd.re * cd.im - bd.im * cd.re)
}

fn point_in_triangle(p: Complex64, a: Complex64, b: Complex64, c: Complex64) -> bool {
    orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
}

/// Ear clipping that always removes the ear with the largest minimum angle.
fn ear_clip(v: &[Complex64]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if orient(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| j != ia && j != ib && j != ic && point_in_triangle(v[j], a, b, c));
            if blocked {
                continue;
            }
            let q = min_angle(a, b, c);
            if best.map_or(true, |(_, bq)| q > bq) {
                best = Some((k, q));
            }
        }
        let (k, _) = best.ok_or_else(|| Error::Degenerate("polygon has no ear (collinear or invalid)".into()))?;
        tris.push([idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]]);
        idx.remove(k);
    }
    if orient(v[idx[0]], v[idx[1]], v[idx[2]]) <= 0.0 {
        return Err(Error::Degenerate("final triangle is degenerate".into()));
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

fn min_angle(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let ang = |p: Complex64, q: Complex64, r: Complex64| ((q - p) * (r - p).conj()).arg().abs();
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}

/// Constrained Delaunay triangulation of the polygon interior (Lawson flips
/// of an ear-clipping triangulation) and the induced quadrilaterals.
pub fn delaunay_quads(poly: &Polygon) -> Result<QuadSet> {
    let v = &poly.vertices;
    let n = v.len();
    if n < 4 {
        return Err(Error::InvalidPolygon(format!("need at least 4 vertices, got {n}")));
    }
    let mut tris = ear_clip(v)?;
    let is_boundary = |a: usize, b: usize| (a + 1) % n == b || (b + 1) % n == a;

    // Lawson flips until every interior edge is locally Delaunay
    let max_sweeps = 10 * n * n;
    let mut sweeps = 0;
    loop {
        let map = edge_map(&tris);
        let mut flipped = false;
        for (&(a, c), &(t1, t2)) in &sorted_edges(&map) {
            let (Some(t1), Some(t2)) = (t1, t2) else { continue };
            let y = opposite(&tris[t1], a, c);
            let x = opposite(&tris[t2], a, c);
            // tris[t1] contains a→c, tris[t2] contains c→a
            let (pa, px, pc, py) = (v[a], v[x], v[c], v[y]);
            // cocircular quadruples are left alone so that ties cannot cycle
            let l2 = [(pa - px).norm_sqr(), (pc - px).norm_sqr(), (py - px).norm_sqr()]
                .into_iter()
                .fold(0.0f64, f64::max);
            if in_circle(pa, pc, py, px) > 1e-12 * l2 * l2 && orient(px, py, pa) > 0.0 && orient(px, py, pc) < 0.0 {
                tris[t1] = [a, x, y];
                tris[t2] = [c, y, x];
                flipped = true;
                break;
            }
        }
        if !flipped {
            break;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::Degenerate("Delaunay flipping did not terminate".into()));
        }
    }

    let map = edge_map(&tris);
    let mut diagonals = Vec::new();
    let mut quads = Vec::new();
    let mut target_logs = Vec::new();
    for (&(a, c), &(t1, t2)) in &sorted_edges(&map) {
        if is_boundary(a, c) {
            continue;
        }
        let (Some(t1), Some(t2)) = (t1, t2) else {
            return Err(Error::Degenerate(format!("diagonal {a}-{c} has one triangle")));
        };
        let y = opposite(&tris[t1], a, c);
        let x = opposite(&tris[t2], a, c);
        let q = [a, x, c, y];
        let rho = cross_ratio(v[a], v[x], v[c], v[y])?;
        diagonals.push((a, c));
        quads.push(q);
        target_logs.push(rho.norm().ln());
    }
    if diagonals.len() != n - 3 {
        return Err(Error::Degenerate(format!("{} diagonals for {n} vertices", diagonals.len())));
    }
    Ok(QuadSet {
        diagonals,
        quads,
        target_logs,
        triangles: tris,
    })
}

type EdgeMap = HashMap<(usize, usize), (Option<usize>, Option<usize>)>;

/// Undirected edge `(min, max)` → (triangle holding `min→max`, triangle
/// holding `max→min`).
fn edge_map(tris: &[[usize; 3]]) -> EdgeMap {
    let mut map: EdgeMap = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for k in 0..3 {
            let (p, q) = (tri[k], tri[(k + 1) % 3]);
            let e = map.entry((p.min(q), p.max(q))).or_insert((None, None));
            if p < q {
                e.0 = Some(t);
            } else {
                e.1 = Some(t);
            }
        }
    }
    map
}

fn sorted_edges(map: &EdgeMap) -> Vec<(&(usize, usize), &(Option<usize>, Option<usize>))> {
    let mut v: Vec<_> = map.iter().collect();
    v.sort_by_key(|(k, _)| **k);
    v
}

fn opposite(tri: &[usize; 3], a: usize, c: usize) -> usize {
    *tri.iter().find(|&&k| k != a && k != c).expect("triangle has a third vertex")
}
