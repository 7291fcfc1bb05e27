//! Knot compatibility and the homogeneous bilinearly blended Coons patch.

use log::warn;
use nalgebra::Point2;

use crate::brep::Brep;
use crate::error::{Error, Result};
use crate::splines::{homogeneous::Hpoint, KnotVector, NurbsCurve, NurbsSurface, KNOT_TOL};

/// Relative tolerance for the consistency of corner weights.
const WEIGHT_TOL: f64 = 1e-12;

/// Samples per curve used to bound the error of the unit-weight fallback.
const FALLBACK_SAMPLES: usize = 200;

/// Bring two curves over the same parameter range to a common degree and
/// knot vector. Knots closer than `1e-10` times the range are identified
/// and take the value from `a`.
pub fn make_compatible(a: &NurbsCurve, b: &NurbsCurve) -> Result<(NurbsCurve, NurbsCurve)> {
    let (a0, a1) = a.range();
    let (b0, b1) = b.range();
    let tol = KNOT_TOL * (a1 - a0).abs();
    if (a0 - b0).abs() > tol || (a1 - b1).abs() > tol {
        return Err(Error::Incompatible(format!(
            "parameter ranges [{a0}, {a1}] and [{b0}, {b1}] differ"
        )));
    }
    let p = a.degree().max(b.degree());
    let a = a.elevate_degree(p)?;
    let b = b.elevate_degree(p)?;

    let da = a.knots().distinct_interior();
    let db = b.knots().distinct_interior();
    let (mut ta, mut tb) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < da.len() || j < db.len() {
        let next_a = da.get(i).copied();
        let next_b = db.get(j).copied();
        match (next_a, next_b) {
            (Some((u, mu)), Some((v, mv))) if (u - v).abs() <= tol => {
                let m = mu.max(mv);
                ta.push((u, m));
                tb.push((v, m));
                i += 1;
                j += 1;
            }
            (Some((u, mu)), Some((v, _))) if u < v => {
                ta.push((u, mu));
                tb.push((u, mu));
                i += 1;
            }
            (Some((u, mu)), None) => {
                ta.push((u, mu));
                tb.push((u, mu));
                i += 1;
            }
            (_, Some((v, mv))) => {
                ta.push((v, mv));
                tb.push((v, mv));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let a = a.refine(&ta)?;
    let b = b.refine(&tb)?;
    if a.knots().len() != b.knots().len() {
        return Err(Error::Incompatible("knot refinement produced different lengths".into()));
    }
    // identified knots share the value from `a`
    let b = NurbsCurve::new(a.knots().clone(), b.control_points().to_vec(), b.weights().to_vec())?;
    Ok((a, b))
}

fn scaled_weights(c: &NurbsCurve, s: f64) -> Result<NurbsCurve> {
    NurbsCurve::new(c.knots().clone(), c.control_points().to_vec(), c.weights().iter().map(|w| w * s).collect())
}

fn unit_weights(c: &NurbsCurve) -> Result<NurbsCurve> {
    NurbsCurve::new(c.knots().clone(), c.control_points().to_vec(), vec![1.0; c.weights().len()])
}

fn max_deviation(a: &NurbsCurve, b: &NurbsCurve) -> f64 {
    let (t0, t1) = a.range();
    (0..=FALLBACK_SAMPLES)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / FALLBACK_SAMPLES as f64;
            (a.point_at(t) - b.point_at(t)).norm()
        })
        .fold(0.0, f64::max)
}

/// Rescale whole curves so that adjacent curves carry the same homogeneous
/// corner point. Returns `None` when no such scaling exists.
fn harmonize_weights(b: &Brep) -> Result<Option<Brep>> {
    let first = |c: &NurbsCurve| c.weights()[0];
    let last = |c: &NurbsCurve| *c.weights().last().unwrap();
    let sw = first(&b.south) / first(&b.west);
    let se = last(&b.south) / first(&b.east);
    let sn = last(&b.east) * se / last(&b.north);
    let lhs = first(&b.north) * sn;
    let rhs = last(&b.west) * sw;
    if (lhs - rhs).abs() > WEIGHT_TOL * lhs.abs().max(rhs.abs()) {
        return Ok(None);
    }
    Ok(Some(Brep {
        west: scaled_weights(&b.west, sw)?,
        east: scaled_weights(&b.east, se)?,
        south: b.south.clone(),
        north: scaled_weights(&b.north, sn)?,
    }))
}

fn unit_fallback(b: &Brep) -> Result<Brep> {
    let out = Brep {
        west: unit_weights(&b.west)?,
        east: unit_weights(&b.east)?,
        south: unit_weights(&b.south)?,
        north: unit_weights(&b.north)?,
    };
    let err = [
        max_deviation(&b.west, &out.west),
        max_deviation(&b.east, &out.east),
        max_deviation(&b.south, &out.south),
        max_deviation(&b.north, &out.north),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    warn!("corner weights are inconsistent; using unit weights (boundary moves by up to {err:e})");
    Ok(out)
}

fn normalized_greville(kv: &KnotVector) -> Vec<f64> {
    let (a, b) = kv.range();
    let mut g: Vec<f64> = kv.greville().iter().map(|t| (t - a) / (b - a)).collect();
    let n = g.len();
    g[0] = 0.0;
    g[n - 1] = 1.0;
    g
}

/// Bilinearly blended Coons patch of a B-Rep whose opposite sides already
/// share degree and knots. The blend runs on homogeneous control points and
/// the boundary rows are copied from the input curves.
pub fn coons_patch(brep: &Brep) -> Result<NurbsSurface> {
    brep.check_closure()?;
    if brep.west.knots() != brep.east.knots() {
        return Err(Error::Incompatible("West and East need the same degree and knots".into()));
    }
    if brep.south.knots() != brep.north.knots() {
        return Err(Error::Incompatible("South and North need the same degree and knots".into()));
    }
    let b = match harmonize_weights(brep)? {
        Some(b) => b,
        None => unit_fallback(brep)?,
    };
    let ku = b.south.knots().clone();
    let kv = b.west.knots().clone();
    let (nu, nv) = (ku.num_basis(), kv.num_basis());
    let alpha = normalized_greville(&ku);
    let beta = normalized_greville(&kv);
    let (w, e, s, n) = (b.west.homogeneous(), b.east.homogeneous(), b.south.homogeneous(), b.north.homogeneous());
    let (c00, c10, c01, c11) = (s[0], s[nu - 1], n[0], n[nu - 1]);

    let mut control = vec![Point2::origin(); nu * nv];
    let mut weights = vec![0.0; nu * nv];
    for j in 0..nv {
        for i in 0..nu {
            let (a, bt) = (alpha[i], beta[j]);
            let h: Hpoint = w[j] * (1.0 - a) + e[j] * a + s[i] * (1.0 - bt) + n[i] * bt
                - (c00 * ((1.0 - a) * (1.0 - bt)) + c10 * (a * (1.0 - bt)) + c01 * ((1.0 - a) * bt) + c11 * (a * bt));
            if !(h.z > 0.0) {
                return Err(Error::InvalidGeometry(format!("Coons blend gives weight {} at ({i}, {j})", h.z)));
            }
            control[j * nu + i] = Point2::new(h.x / h.z, h.y / h.z);
            weights[j * nu + i] = h.z;
        }
    }
    let mut put = |idx: usize, c: &NurbsCurve, k: usize| {
        control[idx] = c.control_points()[k];
        weights[idx] = c.weights()[k];
    };
    for i in 0..nu {
        put(i, &b.south, i);
        put((nv - 1) * nu + i, &b.north, i);
    }
    for j in 0..nv {
        put(j * nu, &b.west, j);
        put(j * nu + nu - 1, &b.east, j);
    }
    NurbsSurface::new(ku, kv, control, weights)
}

/// Coons patch of an arbitrary B-Rep: opposite sides are first mapped to a
/// common parameter range and made knot compatible.
pub fn linear_only_pipeline(brep: &Brep) -> Result<NurbsSurface> {
    brep.check_closure()?;
    let (w0, w1) = brep.west.range();
    let (s0, s1) = brep.south.range();
    let east = if brep.east.range() == (w0, w1) { brep.east.clone() } else { brep.east.mapped_to(w0, w1)? };
    let north = if brep.north.range() == (s0, s1) { brep.north.clone() } else { brep.north.mapped_to(s0, s1)? };
    let (west, east) = make_compatible(&brep.west, &east)?;
    let (south, north) = make_compatible(&brep.south, &north)?;
    coons_patch(&Brep {
        west,
        east,
        south,
        north,
    })
}
