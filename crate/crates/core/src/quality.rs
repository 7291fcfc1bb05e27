//! Parameterization quality: scaled Jacobian, uniformity and fold detection
//! on a uniform parametric grid.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::conformal::quadrature::GaussRule;
use crate::error::{Error, Result};
use crate::splines::NurbsSurface;

/// Tangent length below which a sample counts as degenerate.
pub const DEGENERATE_TANGENT: f64 = 1e-14;

/// Header of a quality CSV table.
pub const QUALITY_HEADER: &str = "geometry,method,grid,min_sj,avg_sj,max_unif,avg_unif,fold";

/// Jacobian data at one parametric point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianSample {
    pub det: f64,
    /// `|J| / (‖x_u‖ ‖x_v‖)`, or 0 at degenerate points.
    pub scaled: f64,
    pub degenerate: bool,
}

pub fn jacobian_sample(surface: &NurbsSurface, u: f64, v: f64) -> Result<JacobianSample> {
    surface.check_param(u, v)?;
    let (_, j) = surface.eval_jacobian(u, v);
    let det = j.determinant();
    let (lu, lv) = (j.column(0).norm(), j.column(1).norm());
    let degenerate = lu < DEGENERATE_TANGENT || lv < DEGENERATE_TANGENT;
    let scaled = if degenerate { 0.0 } else { det / (lu * lv) };
    Ok(JacobianSample { det, scaled, degenerate })
}

/// Scaled Jacobian `|J|_s` at `(u, v)`.
pub fn scaled_jacobian(surface: &NurbsSurface, u: f64, v: f64) -> Result<f64> {
    Ok(jacobian_sample(surface, u, v)?.scaled)
}

/// Uniformity `| |J| / r − 1 |` for the reference area ratio `r`.
pub fn uniformity(surface: &NurbsSurface, u: f64, v: f64, area_ratio: f64) -> Result<f64> {
    if !(area_ratio > 0.0) {
        return Err(Error::InvalidGeometry(format!("area ratio must be positive, got {area_ratio}")));
    }
    Ok((jacobian_sample(surface, u, v)?.det / area_ratio - 1.0).abs())
}

/// Relative tolerance of the adaptive area integral.
const AREA_TOL: f64 = 1e-13;
/// Maximal bisection depth of the adaptive area integral.
const AREA_MAX_DEPTH: usize = 10;

struct AreaRule<'a> {
    surface: &'a NurbsSurface,
    ru: GaussRule,
    rv: GaussRule,
}

impl AreaRule<'_> {
    /// Mean of the signed Jacobian over a parametric box, normalized by the
    /// quadrature weights so that a constant integrand is reproduced exactly.
    fn mean(&self, u0: f64, u1: f64, v0: f64, v1: f64) -> f64 {
        let (hu, hv) = (0.5 * (u1 - u0), 0.5 * (v1 - v0));
        let (mut sum, mut wsum) = (0.0, 0.0);
        for (yv, wv) in self.rv.nodes.iter().zip(&self.rv.weights) {
            for (xu, wu) in self.ru.nodes.iter().zip(&self.ru.weights) {
                let (_, j) = self.surface.eval_jacobian(0.5 * (u0 + u1) + hu * xu, 0.5 * (v0 + v1) + hv * yv);
                sum += wu * wv * j.determinant();
                wsum += wu * wv;
            }
        }
        sum / wsum
    }

    /// Mean over a box, bisected in both directions until the four halves
    /// agree with the whole.
    fn adaptive_mean(&self, u0: f64, u1: f64, v0: f64, v1: f64, whole: f64, depth: usize) -> f64 {
        let (um, vm) = (0.5 * (u0 + u1), 0.5 * (v0 + v1));
        let quads = [(u0, um, v0, vm), (um, u1, v0, vm), (u0, um, vm, v1), (um, u1, vm, v1)];
        let parts = quads.map(|(a, b, c, d)| self.mean(a, b, c, d));
        let split = 0.25 * parts.iter().sum::<f64>();
        if depth >= AREA_MAX_DEPTH || (split - whole).abs() <= AREA_TOL * split.abs().max(f64::MIN_POSITIVE) {
            return split;
        }
        0.25 * quads
            .iter()
            .zip(parts)
            .map(|(&(a, b, c, d), m)| self.adaptive_mean(a, b, c, d, m, depth + 1))
            .sum::<f64>()
    }
}

/// Physical area over parametric area. The signed Jacobian is integrated
/// with degree + 1 Gauss points per direction, which is exact for polynomial
/// surfaces. Rational elements are bisected adaptively.
pub fn area_ratio(surface: &NurbsSurface) -> f64 {
    let rule = AreaRule {
        surface,
        ru: GaussRule::legendre(surface.degree_u() + 1),
        rv: GaussRule::legendre(surface.degree_v() + 1),
    };
    let rational = surface.weights().iter().any(|&w| w != surface.weights()[0]);
    let (mut area, mut param) = (0.0, 0.0);
    for (u0, u1, v0, v1) in surface.elements() {
        let box_area = (u1 - u0) * (v1 - v0);
        let mut m = rule.mean(u0, u1, v0, v1);
        if rational {
            m = rule.adaptive_mean(u0, u1, v0, v1, m, 0);
        }
        area += m * box_area;
        param += box_area;
    }
    area / param
}

/// Quality statistics over an `nu × nv` grid of parameter values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub grid: (usize, usize),
    pub min_sj: f64,
    pub avg_sj: f64,
    /// `None` when the surface folds or the area ratio is not positive.
    pub max_unif: Option<f64>,
    pub avg_unif: Option<f64>,
    /// Some sample has `|J|_s ≤ 0`.
    pub fold: bool,
    pub area_ratio: f64,
    pub degenerate_points: usize,
}

fn grid_values(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect()
}

pub fn quality_report(surface: &NurbsSurface, nu: usize, nv: usize) -> Result<QualityReport> {
    if nu < 2 || nv < 2 {
        return Err(Error::InvalidGeometry(format!("quality grid must be at least 2x2, got {nu}x{nv}")));
    }
    let ((u0, u1), (v0, v1)) = surface.param_range();
    let us = grid_values(u0, u1, nu);
    let vs = grid_values(v0, v1, nv);
    let r = area_ratio(surface);
    let (mut min_sj, mut sum_sj) = (f64::INFINITY, 0.0);
    let (mut max_unif, mut sum_unif) = (0.0f64, 0.0);
    let mut degenerate = 0;
    for &v in &vs {
        for &u in &us {
            let s = jacobian_sample(surface, u, v)?;
            if s.degenerate {
                degenerate += 1;
            }
            min_sj = min_sj.min(s.scaled);
            sum_sj += s.scaled;
            if r > 0.0 {
                let m = (s.det / r - 1.0).abs();
                max_unif = max_unif.max(m);
                sum_unif += m;
            }
        }
    }
    let count = (nu * nv) as f64;
    let fold = min_sj <= 0.0;
    let unif = r > 0.0 && !fold;
    Ok(QualityReport {
        grid: (nu, nv),
        min_sj,
        avg_sj: sum_sj / count,
        max_unif: unif.then_some(max_unif),
        avg_unif: unif.then_some(sum_unif / count),
        fold,
        area_ratio: r,
        degenerate_points: degenerate,
    })
}

impl QualityReport {
    /// One CSV row matching [`QUALITY_HEADER`]. Uniformity columns are empty
    /// when the statistics are omitted.
    pub fn csv_row(&self, geometry: &str, method: &str) -> String {
        let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:?}"));
        let mut s = String::new();
        write!(
            s,
            "{geometry},{method},{}x{},{:?},{:?},{},{},{}",
            self.grid.0,
            self.grid.1,
            self.min_sj,
            self.avg_sj,
            opt(self.max_unif),
            opt(self.avg_unif),
            self.fold
        )
        .unwrap();
        s
    }
}
