//! Isogeometric Galerkin solve of `−Δu = f` with Dirichlet data and the
//! h-refinement convergence study.

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::info;
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::{Deserialize, Serialize};

use crate::conformal::quadrature::GaussRule;
use crate::error::{Error, Result};
use crate::quality::quality_report;
use crate::splines::{Dir, NurbsSurface};

/// Header of the convergence table.
pub const CONVERGENCE_HEADER: &str = "level,h,dofs,l2_error,h1_error";

/// Sampling grid of the fold check that precedes every solve.
const FOLD_CHECK_GRID: usize = 101;

/// One h-refinement level of the convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    /// Largest physical element diagonal.
    pub h: f64,
    /// Number of free coefficients.
    pub dofs: usize,
    pub l2_error: f64,
    /// Error in the `H¹` seminorm.
    pub h1_error: f64,
}

/// Convergence rows as CSV with [`CONVERGENCE_HEADER`].
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(s, "{},{:?},{},{:?},{:?}", r.level, r.h, r.dofs, r.l2_error, r.h1_error).unwrap();
    }
    s
}

/// Observed rates `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` of consecutive
/// rows as `(l2_rate, h1_rate)`.
pub fn convergence_rates(rows: &[ConvergenceRow]) -> Vec<(f64, f64)> {
    rows.windows(2)
        .map(|w| {
            let lh = (w[0].h / w[1].h).ln();
            ((w[0].l2_error / w[1].l2_error).ln() / lh, (w[0].h1_error / w[1].h1_error).ln() / lh)
        })
        .collect()
}

/// Settings of [`poisson_demo_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonOptions {
    pub levels: usize,
    /// Both directions are elevated to at least this degree.
    pub degree: usize,
    /// Uniform refinements applied before the first level.
    pub initial_refinements: usize,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        PoissonOptions {
            levels: 4,
            degree: 2,
            initial_refinements: 3,
        }
    }
}

/// Discrete solution: one coefficient per control point of `surface`.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub surface: NurbsSurface,
    pub coefficients: Vec<f64>,
    pub dofs: usize,
}

struct Sample {
    weight: f64,
    x: Vector2<f64>,
    indices: Vec<usize>,
    values: Vec<f64>,
    /// Physical gradients of the basis functions.
    grads: Vec<Vector2<f64>>,
}

fn samples(surface: &NurbsSurface) -> Result<Vec<Sample>> {
    let ru = GaussRule::legendre(surface.degree_u() + 1);
    let rv = GaussRule::legendre(surface.degree_v() + 1);
    let mut out = Vec::new();
    for (u0, u1, v0, v1) in surface.elements() {
        let (hu, hv) = (0.5 * (u1 - u0), 0.5 * (v1 - v0));
        for (yv, wv) in rv.nodes.iter().zip(&rv.weights) {
            for (xu, wu) in ru.nodes.iter().zip(&ru.weights) {
                let (u, v) = (0.5 * (u0 + u1) + hu * xu, 0.5 * (v0 + v1) + hv * yv);
                let b = surface.basis(u, v);
                let (x, jac) = surface.eval_jacobian(u, v);
                let det = jac.determinant();
                if !(det > 0.0) {
                    return Err(Error::Fold { min_sj: det });
                }
                let jinv_t: Matrix2<f64> = jac.try_inverse().unwrap().transpose();
                let grads = b.du.iter().zip(&b.dv).map(|(&a, &c)| jinv_t * Vector2::new(a, c)).collect();
                out.push(Sample {
                    weight: wu * wv * hu * hv * det,
                    x: x.coords,
                    indices: b.indices,
                    values: b.values,
                    grads,
                });
            }
        }
    }
    Ok(out)
}

fn boundary_coefficients(surface: &NurbsSurface, g: &dyn Fn(f64, f64) -> f64) -> Result<Vec<(usize, f64)>> {
    let ((u0, u1), (v0, v1)) = surface.param_range();
    let gu = surface.knots_u().greville();
    let gv = surface.knots_v().greville();
    let (nu, nv) = (surface.n_u(), surface.n_v());
    let mut out = Vec::new();
    // collocation at the Greville points of each side with the trace basis
    let sides: [(Vec<(f64, f64)>, Vec<usize>); 4] = [
        (gv.iter().map(|&v| (u0, v)).collect(), (0..nv).map(|j| surface.index(0, j)).collect()),
        (gv.iter().map(|&v| (u1, v)).collect(), (0..nv).map(|j| surface.index(nu - 1, j)).collect()),
        (gu.iter().map(|&u| (u, v0)).collect(), (0..nu).map(|i| surface.index(i, 0)).collect()),
        (gu.iter().map(|&u| (u, v1)).collect(), (0..nu).map(|i| surface.index(i, nv - 1)).collect()),
    ];
    for (points, idx) in sides {
        let n = idx.len();
        let mut m = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for (r, &(u, v)) in points.iter().enumerate() {
            let b = surface.basis(u, v);
            for (k, &i) in b.indices.iter().enumerate() {
                if let Some(c) = idx.iter().position(|&q| q == i) {
                    m[(r, c)] += b.values[k];
                }
            }
            let x = surface.eval(u, v)?;
            rhs[r] = g(x.x, x.y);
        }
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("boundary collocation matrix".into()))?;
        out.extend(idx.iter().copied().zip(sol.iter().copied()));
    }
    Ok(out)
}

/// Solve `−Δu = f` on the domain of `surface` with `u = g` on the whole
/// boundary, using the rational basis of `surface` for trial and test
/// functions.
pub fn solve_poisson(
    surface: &NurbsSurface,
    f: &dyn Fn(f64, f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
) -> Result<PoissonSolution> {
    let fold = quality_report(surface, FOLD_CHECK_GRID, FOLD_CHECK_GRID)?;
    if fold.fold {
        return Err(Error::Fold { min_sj: fold.min_sj });
    }
    let total = surface.control().len();
    let mut coefficients = vec![0.0; total];
    let mut fixed = vec![false; total];
    for (i, c) in boundary_coefficients(surface, g)? {
        coefficients[i] = c;
        fixed[i] = true;
    }
    let mut dof = vec![usize::MAX; total];
    let mut n = 0;
    for i in 0..total {
        if !fixed[i] {
            dof[i] = n;
            n += 1;
        }
    }
    let mut a = CooMatrix::new(n, n);
    let mut rhs = DVector::zeros(n);
    for q in samples(surface)? {
        let fq = f(q.x.x, q.x.y);
        for (k, &ik) in q.indices.iter().enumerate() {
            let dk = dof[ik];
            if dk == usize::MAX {
                continue;
            }
            rhs[dk] += q.weight * fq * q.values[k];
            for (l, &il) in q.indices.iter().enumerate() {
                let s = q.weight * q.grads[k].dot(&q.grads[l]);
                match dof[il] {
                    usize::MAX => rhs[dk] -= s * coefficients[il],
                    dl => a.push(dk, dl, s),
                }
            }
        }
    }
    if n > 0 {
        let sol = CscCholesky::factor(&CscMatrix::from(&a))
            .map_err(|e| Error::Singular(format!("Poisson stiffness matrix: {e}")))?
            .solve(&rhs);
        for i in 0..total {
            if dof[i] != usize::MAX {
                coefficients[i] = sol[dof[i]];
            }
        }
    }
    Ok(PoissonSolution {
        surface: surface.clone(),
        coefficients,
        dofs: n,
    })
}

impl PoissonSolution {
    /// `L²` error and `H¹` seminorm error against an exact solution and its
    /// gradient.
    pub fn errors(
        &self,
        exact: &dyn Fn(f64, f64) -> f64,
        grad: &dyn Fn(f64, f64) -> Vector2<f64>,
    ) -> Result<(f64, f64)> {
        let (mut l2, mut h1) = (0.0, 0.0);
        for q in samples(&self.surface)? {
            let mut uh = 0.0;
            let mut gh = Vector2::zeros();
            for (k, &i) in q.indices.iter().enumerate() {
                uh += self.coefficients[i] * q.values[k];
                gh += q.grads[k] * self.coefficients[i];
            }
            l2 += q.weight * (uh - exact(q.x.x, q.x.y)).powi(2);
            h1 += q.weight * (gh - grad(q.x.x, q.x.y)).norm_squared();
        }
        Ok((l2.sqrt(), h1.sqrt()))
    }
}

fn largest_element_diagonal(s: &NurbsSurface) -> Result<f64> {
    let mut h = 0.0f64;
    for (u0, u1, v0, v1) in s.elements() {
        let (a, b) = (s.eval(u0, v0)?, s.eval(u1, v1)?);
        let (c, d) = (s.eval(u1, v0)?, s.eval(u0, v1)?);
        h = h.max((a - b).norm()).max((c - d).norm());
    }
    Ok(h)
}

/// Manufactured solution `u = sin(2πx) sin(2πy)`.
pub fn manufactured_solution(x: f64, y: f64) -> f64 {
    (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
}

/// Source `f = 8π² sin(2πx) sin(2πy)` of the manufactured solution.
pub fn manufactured_source(x: f64, y: f64) -> f64 {
    8.0 * PI * PI * manufactured_solution(x, y)
}

fn manufactured_gradient(x: f64, y: f64) -> Vector2<f64> {
    let w = 2.0 * PI;
    Vector2::new(w * (w * x).cos() * (w * y).sin(), w * (w * x).sin() * (w * y).cos())
}

/// Convergence study of the manufactured problem with default options.
pub fn poisson_demo(surface: &NurbsSurface, levels: usize) -> Result<Vec<ConvergenceRow>> {
    poisson_demo_with(
        surface,
        &PoissonOptions {
            levels,
            ..Default::default()
        },
    )
}

/// Convergence study of the manufactured problem: the surface is elevated
/// to `opts.degree`, refined `opts.initial_refinements` times and then once
/// more per level.
pub fn poisson_demo_with(surface: &NurbsSurface, opts: &PoissonOptions) -> Result<Vec<ConvergenceRow>> {
    let mut s = surface.elevate(Dir::U, surface.degree_u().max(opts.degree))?;
    s = s.elevate(Dir::V, s.degree_v().max(opts.degree))?;
    for _ in 0..opts.initial_refinements {
        s = s.refine_uniform()?;
    }
    let mut rows = Vec::with_capacity(opts.levels);
    for level in 1..=opts.levels {
        if level > 1 {
            s = s.refine_uniform()?;
        }
        let sol = solve_poisson(&s, &manufactured_source, &manufactured_solution)?;
        let (l2, h1) = sol.errors(&manufactured_solution, &manufactured_gradient)?;
        let row = ConvergenceRow {
            level,
            h: largest_element_diagonal(&s)?,
            dofs: sol.dofs,
            l2_error: l2,
            h1_error: h1,
        };
        info!("level {level}: h = {:.4e}, L2 = {l2:.4e}, H1 = {h1:.4e}", row.h);
        rows.push(row);
    }
    Ok(rows)
}
