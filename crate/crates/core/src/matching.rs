//! Marker projection and the geometry-preserving reparameterization of one
//! long side against the other.

use log::{info, warn};
use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::brep::{Brep, Side};
use crate::conformal::{
    disk_to_rectangle, polygonize, solve_parameter_problem, split_long_edges, RectCorners, ScOptions, DEFAULT_KAPPA,
};
use crate::error::{Error, Result, StageExt};
use crate::splines::{merge_curves, NurbsCurve};

/// Uniform samples used to seed each projection.
pub const PROJECTION_SEEDS: usize = 512;

/// Marker pairs whose parameters are closer than this are merged.
pub const MIN_MARKER_GAP: f64 = 1e-8;

/// Default polygonization tolerance relative to the domain diameter.
pub const DEFAULT_RELATIVE_CHORD_TOL: f64 = 1e-3;

/// Paired markers on the two long sides and their curve parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerCorrespondence {
    pub west_params: Vec<f64>,
    pub east_params: Vec<f64>,
    pub west_points: Vec<[f64; 2]>,
    pub east_points: Vec<[f64; 2]>,
}

impl MarkerCorrespondence {
    pub fn len(&self) -> usize {
        self.west_params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.west_params.is_empty()
    }
}

/// Settings of [`match_boundaries`].
#[derive(Clone, Debug, PartialEq)]
pub struct MatchOptions {
    /// Number of marker pairs; `None` uses
    /// `max(8, control points of the longer long side)`.
    pub markers: Option<usize>,
    /// Polygonization tolerance; `None` uses
    /// [`DEFAULT_RELATIVE_CHORD_TOL`] times the domain diameter.
    pub chord_tol: Option<f64>,
    pub kappa: f64,
    pub sc: ScOptions,
    /// The side whose parameterization is kept.
    pub fixed_side: Side,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            markers: None,
            chord_tol: None,
            kappa: DEFAULT_KAPPA,
            sc: ScOptions::default(),
            fixed_side: Side::West,
        }
    }
}

/// Record of how a matched B-Rep was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub fixed_side: Side,
    pub chord_tol: f64,
    pub kappa: f64,
    pub quad_points: usize,
    pub solver_tol: f64,
    pub polygon_vertices: usize,
    pub sc_residual: f64,
    pub sc_iterations: usize,
    pub alignment_residual: f64,
    pub min_prevertex_gap: f64,
    pub conformal_modulus: f64,
    pub markers_requested: usize,
    pub markers_dropped: usize,
    pub markers: MarkerCorrespondence,
}

/// B-Rep whose free long side has been reparameterized.
#[derive(Clone, Debug)]
pub struct MatchedBrep {
    pub brep: Brep,
    pub provenance: Provenance,
}

fn seed_parameter(curve: &NurbsCurve, target: Point2<f64>) -> f64 {
    let (a, b) = curve.range();
    let mut best = (a, f64::INFINITY);
    for k in 0..PROJECTION_SEEDS {
        let t = a + (b - a) * k as f64 / (PROJECTION_SEEDS - 1) as f64;
        let d = (curve.point_at(t) - target).norm_squared();
        if d < best.1 {
            best = (t, d);
        }
    }
    best.0
}

/// Curve parameters of markers ordered along `curve`. The first and last
/// markers are taken as the curve ends. Projections farther than
/// `max_distance` from the curve are rejected.
pub fn marker_params(curve: &NurbsCurve, markers: &[Point2<f64>], max_distance: f64) -> Result<Vec<f64>> {
    let m = markers.len();
    if m < 2 {
        return Err(Error::Markers(format!("need at least 2 markers, got {m}")));
    }
    let (a, b) = curve.range();
    let tol = curve.knots().tol();
    let mut out = Vec::with_capacity(m);
    for (i, &q) in markers.iter().enumerate() {
        let t = if i == 0 {
            a
        } else if i == m - 1 {
            b
        } else {
            let t = curve.closest_point(q, seed_parameter(curve, q))?;
            curve.knots().snap(t, tol)
        };
        let d = (curve.point_at(t) - q).norm();
        if d > max_distance {
            return Err(Error::Markers(format!(
                "marker {i} lies {d:e} from the curve (limit {max_distance:e}); check the side labels"
            )));
        }
        if let Some(&prev) = out.last() {
            if t < prev - MIN_MARKER_GAP * (b - a) {
                return Err(Error::Markers(format!(
                    "marker parameters are not monotone at marker {i} ({t} after {prev}); check the curve orientation"
                )));
            }
        }
        out.push(t);
    }
    Ok(out)
}

fn check_params(name: &str, curve: &NurbsCurve, params: &[f64]) -> Result<()> {
    let (a, b) = curve.range();
    let tol = 1e-10 * (b - a).abs().max(1.0);
    if params.len() < 2 {
        return Err(Error::Markers(format!("{name}: need at least 2 parameters")));
    }
    if (params[0] - a).abs() > tol || (params[params.len() - 1] - b).abs() > tol {
        return Err(Error::Markers(format!(
            "{name}: parameters must start at {a} and end at {b}"
        )));
    }
    if params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Markers(format!("{name}: parameters must be strictly increasing")));
    }
    Ok(())
}

/// Reparameterize `east` so that `east_params[i]` moves to `west_params[i]`,
/// affinely on every segment between consecutive markers. The point set is
/// unchanged.
pub fn reparameterize_east(east: &NurbsCurve, east_params: &[f64], west_params: &[f64]) -> Result<NurbsCurve> {
    if east_params.len() != west_params.len() {
        return Err(Error::Markers(format!(
            "{} East parameters but {} West parameters",
            east_params.len(),
            west_params.len()
        )));
    }
    check_params("East", east, east_params)?;
    if west_params.len() < 2 || west_params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Markers("West parameters must be strictly increasing".into()));
    }
    let m = east_params.len();
    let mut segments = Vec::with_capacity(m - 1);
    let mut rest = east.clone();
    for &t in &east_params[1..m - 1] {
        let (left, right) = rest.split(t)?;
        segments.push(left);
        rest = right;
    }
    segments.push(rest);
    let mapped = segments
        .iter()
        .zip(west_params.windows(2))
        .map(|(seg, w)| seg.mapped_to(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    merge_curves(&mapped)
}

fn polyline_length(curve: &NurbsCurve, chord_tol: f64) -> f64 {
    let pl = curve.sample_adaptive(chord_tol);
    pl.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Full matching pipeline on a closed counterclockwise B-Rep.
pub fn match_boundaries(brep: &Brep, opts: &MatchOptions) -> Result<MatchedBrep> {
    match opts.fixed_side {
        Side::West => match_west_fixed(brep, opts),
        Side::East => {
            let mirrored = match_west_fixed(&brep.mirrored(), opts)?;
            let mut provenance = mirrored.provenance;
            provenance.fixed_side = Side::East;
            let m = &mut provenance.markers;
            std::mem::swap(&mut m.west_params, &mut m.east_params);
            std::mem::swap(&mut m.west_points, &mut m.east_points);
            let (a, b) = brep.west.range();
            // the mirrored run reversed both long sides
            m.west_params = m.west_params.iter().rev().map(|&t| a + b - t).collect();
            m.west_points.reverse();
            let (a, b) = brep.east.range();
            m.east_params = m.east_params.iter().rev().map(|&t| a + b - t).collect();
            m.east_points.reverse();
            Ok(MatchedBrep {
                brep: mirrored.brep.mirrored(),
                provenance,
            })
        }
        other => Err(Error::Markers(format!("fixed side must be West or East, got {other}"))),
    }
}

fn match_west_fixed(brep: &Brep, opts: &MatchOptions) -> Result<MatchedBrep> {
    brep.check_closure().stage("input")?;
    let diameter = brep.diameter();
    let chord_tol = opts.chord_tol.unwrap_or(DEFAULT_RELATIVE_CHORD_TOL * diameter);
    if !(chord_tol > 0.0) {
        return Err(Error::InvalidGeometry(format!("chord tolerance must be positive, got {chord_tol}")).in_stage("input"));
    }
    let poly = polygonize(brep, chord_tol).stage("polygonize")?;
    let poly = split_long_edges(&poly, opts.kappa);
    let map = solve_parameter_problem(&poly, &opts.sc).stage("sc_solve")?;
    let rect = disk_to_rectangle(&map, RectCorners::from_polygon_corners(poly.corners)).stage("rectangle")?;

    let m = opts.markers.unwrap_or_else(|| {
        let longer = if polyline_length(&brep.west, chord_tol) >= polyline_length(&brep.east, chord_tol) {
            &brep.west
        } else {
            &brep.east
        };
        longer.control_points().len().max(8)
    });
    let markers = rect.boundary_markers(&map, m).stage("markers")?;
    let max_distance = 10.0 * chord_tol;
    let west = marker_params(&brep.west, &markers.west, max_distance).stage("marker_params")?;
    let east = marker_params(&brep.east, &markers.east, max_distance).stage("marker_params")?;

    // merge pairs that are numerically coincident on either side
    let (wa, wb) = brep.west.range();
    let (ea, eb) = brep.east.range();
    let mut keep = vec![0usize];
    for i in 1..m {
        let last = *keep.last().unwrap();
        let close = west[i] - west[last] < MIN_MARKER_GAP * (wb - wa) || east[i] - east[last] < MIN_MARKER_GAP * (eb - ea);
        if !close {
            keep.push(i);
        } else if i == m - 1 {
            // the corner pair always survives
            keep.pop();
            keep.push(i);
        }
    }
    let dropped = m - keep.len();
    if dropped > 0 {
        warn!("dropped {dropped} near-coincident marker pairs");
    }
    let correspondence = MarkerCorrespondence {
        west_params: keep.iter().map(|&i| west[i]).collect(),
        east_params: keep.iter().map(|&i| east[i]).collect(),
        west_points: keep.iter().map(|&i| [markers.west[i].x, markers.west[i].y]).collect(),
        east_points: keep.iter().map(|&i| [markers.east[i].x, markers.east[i].y]).collect(),
    };
    let new_east = reparameterize_east(&brep.east, &correspondence.east_params, &correspondence.west_params)
        .stage("reparameterize")?;
    let matched = Brep {
        west: brep.west.clone(),
        east: new_east,
        south: brep.south.clone(),
        north: brep.north.clone(),
    };
    matched.check_closure().stage("reparameterize")?;
    let min_gap = map.prevertices().gaps().iter().copied().fold(f64::INFINITY, f64::min);
    info!(
        "matched with {} marker pairs, SC residual {:e}, modulus {:.6}",
        correspondence.len(),
        map.residual(),
        rect.modulus()
    );
    Ok(MatchedBrep {
        brep: matched,
        provenance: Provenance {
            fixed_side: Side::West,
            chord_tol,
            kappa: opts.kappa,
            quad_points: opts.sc.quad_points,
            solver_tol: opts.sc.solver.tol,
            polygon_vertices: poly.len(),
            sc_residual: map.residual(),
            sc_iterations: map.iterations(),
            alignment_residual: map.alignment_residual(),
            min_prevertex_gap: min_gap,
            conformal_modulus: rect.modulus(),
            markers_requested: m,
            markers_dropped: dropped,
            markers: correspondence,
        },
    })
}
