//! Schwarz–Christoffel map from the unit disk onto a polygon,
//! `f(z) = f(0) + C ∫_0^z ∏_j (1 − ζ/z_j)^{β_j} dζ`.

use std::f64::consts::TAU;

use log::{info, warn};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::Integrator;
use super::polygon::Polygon;
use super::prevertex::{DiskPoint, Prevertices};
use super::solver::{self, SolverOptions};
use super::triangulate::{cross_ratio, delaunay_quads, QuadSet};
use crate::error::{Error, Result};

/// Adjacent prevertex gaps below this trigger a crowding warning.
pub const CROWDING_GAP: f64 = 1e-12;

/// Settings for solving the parameter problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ScOptions {
    /// Gauss–Jacobi points per panel.
    pub quad_points: usize,
    pub solver: SolverOptions,
}

impl Default for ScOptions {
    fn default() -> Self {
        ScOptions {
            quad_points: 8,
            solver: SolverOptions::default(),
        }
    }
}

/// Solved disk map of a polygon.
#[derive(Clone, Debug)]
pub struct ScDiskMap {
    prev: Prevertices,
    betas: Vec<f64>,
    c: Complex64,
    f0: Complex64,
    quad_points: usize,
    integrator: Integrator,
    /// `∫_0^{z_k}` of the integrand, per prevertex.
    images: Vec<Complex64>,
    quads: QuadSet,
    residual: f64,
    alignment_residual: f64,
    iterations: usize,
}

/// Serializable snapshot of a solved map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScMapSummary {
    pub vertices: Vec<[f64; 2]>,
    pub betas: Vec<f64>,
    pub prevertex_arguments: Vec<f64>,
    pub prevertex_gaps: Vec<f64>,
    pub scale: [f64; 2],
    pub center_image: [f64; 2],
    pub quad_points: usize,
    pub residual_inf: f64,
    pub alignment_residual: f64,
    pub iterations: usize,
    pub quads: QuadSet,
}

/// Gauge: the last three prevertices sit at arguments `0, 2π/3, 4π/3`; the
/// other `n − 2` gaps share the remaining `2π/3` through a softmax of the
/// unknowns, with the gap after the last prevertex fixed at logit 0.
fn gauge_gaps(n: usize, logits: &DVector<f64>) -> Vec<f64> {
    let third = TAU / 3.0;
    let m = logits.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut denom = (-m).exp();
    for &l in logits.iter() {
        denom += (l - m).exp();
    }
    let mut gaps = vec![0.0; n];
    gaps[n - 1] = third * (-m).exp() / denom;
    for k in 0..n - 3 {
        gaps[k] = third * (logits[k] - m).exp() / denom;
    }
    gaps[n - 3] = third;
    gaps[n - 2] = third;
    gaps
}

fn gauge_prevertices(n: usize, logits: &DVector<f64>) -> Prevertices {
    Prevertices::from_gaps(gauge_gaps(n, logits), n - 3)
}

/// `log|ρ|` for four prevertices, from chord lengths `2|sin(Δθ/2)|`.
fn prevertex_log_cross_ratio(p: &Prevertices, q: &[usize; 4]) -> f64 {
    let chord = |a: usize, b: usize| (2.0 * (0.5 * p.rel(a, b)).sin().abs()).ln();
    let [a, b, c, d] = *q;
    chord(d, a) + chord(b, c) - chord(c, d) - chord(a, b)
}

fn quad_log_cross_ratio(z: &[Complex64], q: &[usize; 4]) -> Result<f64> {
    Ok(cross_ratio(z[q[0]], z[q[1]], z[q[2]], z[q[3]])?.norm().ln())
}

fn vertex_integrals(integrator: &Integrator, prev: &Prevertices) -> Result<Vec<Complex64>> {
    let origin = DiskPoint::origin();
    (0..prev.len())
        .map(|k| integrator.integrate(prev, &origin, &DiskPoint::prevertex(k)))
        .collect()
}

/// Least-squares similarity `ω ≈ C·I + f0`; returns `(C, f0, max residual)`.
fn align(images: &[Complex64], targets: &[Complex64]) -> (Complex64, Complex64, f64) {
    let n = images.len() as f64;
    let mi = images.iter().sum::<Complex64>() / n;
    let mw = targets.iter().sum::<Complex64>() / n;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (i, w) in images.iter().zip(targets) {
        num += (i - mi).conj() * (w - mw);
        den += (i - mi).norm_sqr();
    }
    let c = num / den;
    let f0 = mw - c * mi;
    let res = images
        .iter()
        .zip(targets)
        .map(|(i, w)| (c * i + f0 - w).norm())
        .fold(0.0, f64::max);
    (c, f0, res)
}

/// Solve the parameter problem for a polygon whose long edges have been
/// split.
pub fn solve_parameter_problem(poly: &Polygon, opts: &ScOptions) -> Result<ScDiskMap> {
    let n = poly.len();
    if n < 4 {
        return Err(Error::InvalidPolygon(format!("need at least 4 vertices, got {n}")));
    }
    let quads = delaunay_quads(poly)?;
    let sing: Vec<(usize, f64)> = poly.betas.iter().copied().enumerate().collect();
    let integrator = Integrator::new(&sing, opts.quad_points);

    // cross-ratios of the prevertices themselves approximate those of the
    // polygon, which gives a cheap starting point
    let guess_fn = |l: &DVector<f64>| -> Result<DVector<f64>> {
        let p = gauge_prevertices(n, l);
        Ok(DVector::from_iterator(
            quads.quads.len(),
            quads
                .quads
                .iter()
                .zip(&quads.target_logs)
                .map(|(q, c)| prevertex_log_cross_ratio(&p, q) - c),
        ))
    };
    let guess_opts = SolverOptions {
        tol: 1e-10,
        ..opts.solver.clone()
    };
    let x0 = match solver::solve(guess_fn, DVector::zeros(n - 3), &guess_opts) {
        Ok(r) => r.x,
        Err(e) => {
            warn!("prevertex initial guess did not converge ({e}); starting from uniform gaps");
            DVector::zeros(n - 3)
        }
    };

    let residual_fn = |l: &DVector<f64>| -> Result<DVector<f64>> {
        let p = gauge_prevertices(n, l);
        let z = vertex_integrals(&integrator, &p)?;
        let mut f = DVector::zeros(quads.quads.len());
        for (i, (q, c)) in quads.quads.iter().zip(&quads.target_logs).enumerate() {
            f[i] = quad_log_cross_ratio(&z, q)? - c;
        }
        Ok(f)
    };
    let report = solver::solve(residual_fn, x0, &opts.solver)?;
    let prev = gauge_prevertices(n, &report.x);
    let min_gap = prev.gaps().iter().copied().fold(f64::INFINITY, f64::min);
    if min_gap < CROWDING_GAP {
        warn!("prevertex crowding: smallest gap {min_gap:e}");
    }
    let images = vertex_integrals(&integrator, &prev)?;
    let (c, f0, alignment_residual) = align(&images, &poly.vertices);
    let residual = report.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    info!(
        "SC map: n = {n}, {} iterations, ‖F‖∞ = {residual:e}, alignment residual = {alignment_residual:e}, min gap = {min_gap:e}",
        report.iterations
    );
    Ok(ScDiskMap {
        prev,
        betas: poly.betas.clone(),
        c,
        f0,
        quad_points: opts.quad_points,
        integrator,
        images,
        quads,
        residual,
        alignment_residual,
        iterations: report.iterations,
    })
}

impl ScDiskMap {
    pub fn prevertices(&self) -> &Prevertices {
        &self.prev
    }

    pub fn len(&self) -> usize {
        self.prev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prev.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Scale constant `C`.
    pub fn scale(&self) -> Complex64 {
        self.c
    }

    /// Image of the disk center, `f(0)`.
    pub fn center_image(&self) -> Complex64 {
        self.f0
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    pub fn quads(&self) -> &QuadSet {
        &self.quads
    }

    /// `‖F‖_∞` at the solution.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Largest distance between an aligned vertex image and its polygon
    /// vertex.
    pub fn alignment_residual(&self) -> f64 {
        self.alignment_residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Aligned image of prevertex `k`.
    pub fn vertex_image(&self, k: usize) -> Complex64 {
        self.f0 + self.c * self.images[k]
    }

    /// `∫_a^b` of the integrand along the straight segment, without `C`.
    pub fn integral(&self, a: &DiskPoint, b: &DiskPoint) -> Result<Complex64> {
        self.integrator.integrate(&self.prev, a, b)
    }

    /// `f(p)`. Interior points integrate from the origin; boundary points
    /// integrate along the chord from their anchor prevertex.
    pub fn eval(&self, p: &DiskPoint) -> Result<Complex64> {
        match *p {
            DiskPoint::Interior(_) => Ok(self.f0 + self.c * self.integral(&DiskPoint::origin(), p)?),
            DiskPoint::Boundary { anchor, .. } => {
                let base = DiskPoint::prevertex(anchor);
                Ok(self.vertex_image(anchor) + self.c * self.integral(&base, p)?)
            }
        }
    }

    /// `f(to)` computed as `f(from)` plus the integral along `from → to`.
    pub fn eval_from(&self, from: &DiskPoint, to: &DiskPoint) -> Result<Complex64> {
        Ok(self.eval(from)? + self.c * self.integral(from, to)?)
    }

    /// Evaluate at an absolute disk position `|z| ≤ 1`.
    pub fn eval_at(&self, z: Complex64) -> Result<Complex64> {
        self.eval(&self.disk_point(z)?)
    }

    /// `f′(z) = C ∏ (1 − z/z_j)^{β_j}`.
    pub fn derivative(&self, p: &DiskPoint) -> Complex64 {
        self.c * self.integrator.integrand(&self.prev, p)
    }

    /// Classify an absolute position, anchoring unit-modulus points.
    pub fn disk_point(&self, z: Complex64) -> Result<DiskPoint> {
        let r = z.norm();
        if r > 1.0 + 1e-14 {
            return Err(Error::InvalidGeometry(format!("point {z} lies outside the unit disk")));
        }
        if r >= 1.0 - 1e-15 {
            Ok(self.prev.boundary_point(z.arg()))
        } else {
            Ok(DiskPoint::Interior(z))
        }
    }

    pub fn summary(&self, poly: &Polygon) -> ScMapSummary {
        ScMapSummary {
            vertices: poly.vertices.iter().map(|v| [v.re, v.im]).collect(),
            betas: self.betas.clone(),
            prevertex_arguments: self.prev.arguments(),
            prevertex_gaps: self.prev.gaps().to_vec(),
            scale: [self.c.re, self.c.im],
            center_image: [self.f0.re, self.f0.im],
            quad_points: self.quad_points,
            residual_inf: self.residual,
            alignment_residual: self.alignment_residual,
            iterations: self.iterations,
            quads: self.quads.clone(),
        }
    }
}
