use nalgebra::{Matrix2, Point2, Vector2};

use super::curve::NurbsCurve;
use super::homogeneous::{self, Hpoint};
use super::knots::KnotVector;
use crate::error::{Error, Result};

/// Parametric direction of a tensor-product surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    /// First parameter, running from the West side to the East side.
    U,
    /// Second parameter, running from the South side to the North side.
    V,
}

/// Tensor-product NURBS surface `x(u, v)` with control net stored
/// row-major, `u` fastest: index `j * n_u + i`.
///
/// Boundaries: `x(u0, ·)` is West, `x(u1, ·)` East, `x(·, v0)` South and
/// `x(·, v1)` North.
#[derive(Clone, Debug, PartialEq)]
pub struct NurbsSurface {
    knots_u: KnotVector,
    knots_v: KnotVector,
    control: Vec<Point2<f64>>,
    weights: Vec<f64>,
}

/// Nonzero rational basis functions at one parametric point.
#[derive(Clone, Debug)]
pub struct BasisSample {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl NurbsSurface {
    pub fn new(
        knots_u: KnotVector,
        knots_v: KnotVector,
        control: Vec<Point2<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = knots_u.num_basis() * knots_v.num_basis();
        if control.len() != n || weights.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "control net has {} points and {} weights, expected {n}",
                control.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGeometry("weights must be positive".into()));
        }
        if control.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite control point".into()));
        }
        Ok(NurbsSurface {
            knots_u,
            knots_v,
            control,
            weights,
        })
    }

    pub fn knots(&self, dir: Dir) -> &KnotVector {
        match dir {
            Dir::U => &self.knots_u,
            Dir::V => &self.knots_v,
        }
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.knots_u
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.knots_v
    }

    pub fn degree_u(&self) -> usize {
        self.knots_u.degree()
    }

    pub fn degree_v(&self) -> usize {
        self.knots_v.degree()
    }

    pub fn n_u(&self) -> usize {
        self.knots_u.num_basis()
    }

    pub fn n_v(&self) -> usize {
        self.knots_v.num_basis()
    }

    pub fn control(&self) -> &[Point2<f64>] {
        &self.control
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_u() + i
    }

    pub fn cp(&self, i: usize, j: usize) -> Point2<f64> {
        self.control[self.index(i, j)]
    }

    pub fn is_boundary_index(&self, idx: usize) -> bool {
        let (i, j) = (idx % self.n_u(), idx / self.n_u());
        i == 0 || j == 0 || i + 1 == self.n_u() || j + 1 == self.n_v()
    }

    /// Copy with replaced control points (weights and knots kept).
    pub fn with_control(&self, control: Vec<Point2<f64>>) -> Result<Self> {
        Self::new(self.knots_u.clone(), self.knots_v.clone(), control, self.weights.clone())
    }

    pub fn param_range(&self) -> ((f64, f64), (f64, f64)) {
        (self.knots_u.range(), self.knots_v.range())
    }

    /// Area of the parameter rectangle.
    pub fn param_area(&self) -> f64 {
        self.knots_u.span_length() * self.knots_v.span_length()
    }

    pub fn check_param(&self, u: f64, v: f64) -> Result<()> {
        self.knots_u.check_param(u)?;
        self.knots_v.check_param(v)
    }

    /// Rational basis functions with first derivatives at `(u, v)`.
    pub fn basis(&self, u: f64, v: f64) -> BasisSample {
        let (pu, pv) = (self.degree_u(), self.degree_v());
        let su = self.knots_u.find_span(u);
        let sv = self.knots_v.find_span(v);
        let bu = self.knots_u.ders_basis_funs(su, u, 1);
        let bv = self.knots_v.ders_basis_funs(sv, v, 1);
        let cap = (pu + 1) * (pv + 1);
        let mut indices = Vec::with_capacity(cap);
        let mut n = Vec::with_capacity(cap);
        let mut nu = Vec::with_capacity(cap);
        let mut nv = Vec::with_capacity(cap);
        let (mut w, mut wu, mut wv) = (0.0, 0.0, 0.0);
        for b in 0..=pv {
            for a in 0..=pu {
                let idx = self.index(su - pu + a, sv - pv + b);
                let wt = self.weights[idx];
                let val = bu[0][a] * bv[0][b] * wt;
                let du = bu[1][a] * bv[0][b] * wt;
                let dv = bu[0][a] * bv[1][b] * wt;
                w += val;
                wu += du;
                wv += dv;
                indices.push(idx);
                n.push(val);
                nu.push(du);
                nv.push(dv);
            }
        }
        let values: Vec<f64> = n.iter().map(|x| x / w).collect();
        let du = nu
            .iter()
            .zip(&values)
            .map(|(d, r)| (d - r * wu) / w)
            .collect();
        let dv = nv
            .iter()
            .zip(&values)
            .map(|(d, r)| (d - r * wv) / w)
            .collect();
        BasisSample {
            indices,
            values,
            du,
            dv,
        }
    }

    /// Point and parametric Jacobian `[x_u x_v]` (columns).
    pub fn eval_jacobian(&self, u: f64, v: f64) -> (Point2<f64>, Matrix2<f64>) {
        let (u0, u1) = self.knots_u.range();
        let (v0, v1) = self.knots_v.range();
        let b = self.basis(u.clamp(u0, u1), v.clamp(v0, v1));
        self.jacobian_from(&b, &self.control)
    }

    pub(crate) fn jacobian_from(&self, b: &BasisSample, control: &[Point2<f64>]) -> (Point2<f64>, Matrix2<f64>) {
        let mut x = Vector2::zeros();
        let mut xu = Vector2::zeros();
        let mut xv = Vector2::zeros();
        for (k, &idx) in b.indices.iter().enumerate() {
            let c = control[idx].coords;
            x += c * b.values[k];
            xu += c * b.du[k];
            xv += c * b.dv[k];
        }
        (Point2::from(x), Matrix2::from_columns(&[xu, xv]))
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<Point2<f64>> {
        self.check_param(u, v)?;
        Ok(self.eval_jacobian(u, v).0)
    }

    fn column(&self, i: usize) -> NurbsCurve {
        let pts = (0..self.n_v()).map(|j| self.cp(i, j)).collect();
        let ws = (0..self.n_v()).map(|j| self.weights[self.index(i, j)]).collect();
        NurbsCurve::new(self.knots_v.clone(), pts, ws).expect("surface column is a valid curve")
    }

    fn row(&self, j: usize) -> NurbsCurve {
        let pts = (0..self.n_u()).map(|i| self.cp(i, j)).collect();
        let ws = (0..self.n_u()).map(|i| self.weights[self.index(i, j)]).collect();
        NurbsCurve::new(self.knots_u.clone(), pts, ws).expect("surface row is a valid curve")
    }

    pub fn west(&self) -> NurbsCurve {
        self.column(0)
    }

    pub fn east(&self) -> NurbsCurve {
        self.column(self.n_u() - 1)
    }

    pub fn south(&self) -> NurbsCurve {
        self.row(0)
    }

    pub fn north(&self) -> NurbsCurve {
        self.row(self.n_v() - 1)
    }

    fn homogeneous_lines(&self, dir: Dir) -> Vec<Vec<Hpoint>> {
        let h = |idx: usize| {
            let w = self.weights[idx];
            Hpoint::new(self.control[idx].x * w, self.control[idx].y * w, w)
        };
        match dir {
            Dir::U => (0..self.n_v())
                .map(|j| (0..self.n_u()).map(|i| h(self.index(i, j))).collect())
                .collect(),
            Dir::V => (0..self.n_u())
                .map(|i| (0..self.n_v()).map(|j| h(self.index(i, j))).collect())
                .collect(),
        }
    }

    fn from_lines(&self, dir: Dir, kv: KnotVector, lines: Vec<Vec<Hpoint>>) -> Result<Self> {
        let (ku, kv2, nu, nv) = match dir {
            Dir::U => (kv.clone(), self.knots_v.clone(), kv.num_basis(), self.n_v()),
            Dir::V => (self.knots_u.clone(), kv.clone(), self.n_u(), kv.num_basis()),
        };
        let mut control = vec![Point2::origin(); nu * nv];
        let mut weights = vec![0.0; nu * nv];
        for (l, line) in lines.iter().enumerate() {
            for (k, h) in line.iter().enumerate() {
                let (i, j) = match dir {
                    Dir::U => (k, l),
                    Dir::V => (l, k),
                };
                control[j * nu + i] = Point2::new(h.x / h.z, h.y / h.z);
                weights[j * nu + i] = h.z;
            }
        }
        Self::new(ku, kv2, control, weights)
    }

    pub fn insert_knot(&self, dir: Dir, t: f64, times: usize) -> Result<Self> {
        let (kv, lines) = homogeneous::insert_knot(self.knots(dir), &self.homogeneous_lines(dir), t, times)?;
        self.from_lines(dir, kv, lines)
    }

    pub fn refine(&self, dir: Dir, targets: &[(f64, usize)]) -> Result<Self> {
        let (kv, lines) = homogeneous::refine_to(self.knots(dir), &self.homogeneous_lines(dir), targets)?;
        self.from_lines(dir, kv, lines)
    }

    pub fn elevate(&self, dir: Dir, target: usize) -> Result<Self> {
        let p = self.knots(dir).degree();
        if target < p {
            return Err(Error::DegreeLowering { from: p, to: target });
        }
        let before = self.clone();
        let (kv, lines) = homogeneous::elevate(self.knots(dir), &self.homogeneous_lines(dir), target - p)?;
        let mut out = self.from_lines(dir, kv, lines)?;
        // the first and last lines along `dir` interpolate the unrefined ones exactly
        out.pin_edges_from(&before, dir);
        Ok(out)
    }

    fn pin_edges_from(&mut self, before: &NurbsSurface, dir: Dir) {
        match dir {
            Dir::U => {
                let (nu, nu0) = (self.n_u(), before.n_u());
                for j in 0..self.n_v() {
                    for (i, i0) in [(0, 0), (nu - 1, nu0 - 1)] {
                        let (a, b) = (self.index(i, j), before.index(i0, j));
                        self.control[a] = before.control[b];
                        self.weights[a] = before.weights[b];
                    }
                }
            }
            Dir::V => {
                let (nv, nv0) = (self.n_v(), before.n_v());
                for i in 0..self.n_u() {
                    for (j, j0) in [(0, 0), (nv - 1, nv0 - 1)] {
                        let (a, b) = (self.index(i, j), before.index(i, j0));
                        self.control[a] = before.control[b];
                        self.weights[a] = before.weights[b];
                    }
                }
            }
        }
    }

    /// Uniform h-refinement: insert the midpoint of every nonempty span in
    /// both directions.
    pub fn refine_uniform(&self) -> Result<Self> {
        let mid = |kv: &KnotVector| -> Vec<(f64, usize)> {
            kv.breakpoints().windows(2).map(|w| (0.5 * (w[0] + w[1]), 1)).collect()
        };
        let s = self.refine(Dir::U, &mid(&self.knots_u))?;
        s.refine(Dir::V, &mid(&self.knots_v))
    }

    /// Nonempty knot spans `(u0, u1, v0, v1)` in `v`-major order.
    pub fn elements(&self) -> Vec<(f64, f64, f64, f64)> {
        let bu = self.knots_u.breakpoints();
        let bv = self.knots_v.breakpoints();
        let mut out = Vec::with_capacity((bu.len() - 1) * (bv.len() - 1));
        for wv in bv.windows(2) {
            for wu in bu.windows(2) {
                out.push((wu[0], wu[1], wv[0], wv[1]));
            }
        }
        out
    }
}
