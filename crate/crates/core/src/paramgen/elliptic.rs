//! k-refinement and the elliptic (inverse harmonic) improvement of interior
//! control points.

use log::{info, warn};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::conformal::quadrature::GaussRule;
use crate::error::{Error, Result};
use crate::splines::{Dir, NurbsSurface};

/// Settings of [`k_refine`] and [`elliptic_improve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticOptions {
    /// Degree reached in the cross direction `u`, the η direction of the
    /// domain whose long sides run along `v`.
    pub target_degree_eta: usize,
    /// Uniform knots inserted in the cross direction.
    pub extra_knots_eta: usize,
    /// Uniform knots inserted along the long sides.
    pub extra_knots_xi: usize,
    pub max_picard_iters: usize,
    /// Stop when the largest control point move relative to the domain
    /// diameter falls below this value.
    pub update_tol: f64,
    /// Jacobian floor relative to the median `|J|` at the quadrature points.
    pub jacobian_floor: f64,
    /// Gauss points per direction; `None` uses degree + 1.
    pub quad_points: Option<usize>,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        EllipticOptions {
            target_degree_eta: 2,
            extra_knots_eta: 2,
            extra_knots_xi: 0,
            max_picard_iters: 20,
            update_tol: 1e-8,
            jacobian_floor: 1e-12,
            quad_points: None,
        }
    }
}

/// Outcome of [`elliptic_improve`].
#[derive(Clone, Debug)]
pub struct EllipticReport {
    pub surface: NurbsSurface,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after each accepted iterate, starting with the input.
    pub residual_history: Vec<f64>,
    /// Quadrature points where `|J|` was replaced by the floor in the last
    /// assembly.
    pub floored_points: usize,
}

impl EllipticReport {
    pub fn initial_residual(&self) -> f64 {
        self.residual_history[0]
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap()
    }
}

fn insert_uniform(s: NurbsSurface, dir: Dir, count: usize) -> Result<NurbsSurface> {
    if count == 0 {
        return Ok(s);
    }
    let kv = s.knots(dir);
    let (a, b) = kv.range();
    let targets: Vec<(f64, usize)> = (1..=count)
        .map(|k| a + (b - a) * k as f64 / (count + 1) as f64)
        .filter(|&t| kv.multiplicity(t, kv.tol()) == 0)
        .map(|t| (t, 1))
        .collect();
    if targets.is_empty() {
        return Ok(s);
    }
    s.refine(dir, &targets)
}

/// Raise the cross direction to `target_degree_eta` and insert uniform knots.
/// The geometry is unchanged; applying it twice changes nothing more.
pub fn k_refine(surface: &NurbsSurface, opts: &EllipticOptions) -> Result<NurbsSurface> {
    let p = surface.degree_u().max(opts.target_degree_eta);
    let s = surface.elevate(Dir::U, p)?;
    let s = insert_uniform(s, Dir::U, opts.extra_knots_eta)?;
    insert_uniform(s, Dir::V, opts.extra_knots_xi)
}

/// Discrete system of the inverse harmonic equations on the interior basis
/// functions `N_i`:
///
/// `R_i^(k) = ∫ ∇̂N_i · K e_k dξ`, `L_ij = ∫ ∇̂N_i · K ∇̂N_j dξ`,
///
/// with `K = adj(G) / max(|J|, ε)²` and `G = JᵀJ`, so that `K = G⁻¹` away
/// from the floor. Zero residual means `ξ` and `η` are harmonic functions
/// of the physical coordinates.
#[derive(Clone, Debug)]
pub struct EllipticSystem {
    /// Control net index of each unknown.
    pub interior: Vec<usize>,
    pub stiffness: DMatrix<f64>,
    pub residual: [DVector<f64>; 2],
    /// Derivative of `(R^(ξ), R^(η))` with respect to the interior control
    /// point coordinates `(x, y)`, both blocks ordered like `interior`.
    pub tangent: DMatrix<f64>,
    pub floored_points: usize,
}

impl EllipticSystem {
    pub fn residual_norm(&self) -> f64 {
        (self.residual[0].norm_squared() + self.residual[1].norm_squared()).sqrt()
    }
}

fn adj(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

struct QuadSample {
    weight: f64,
    indices: Vec<usize>,
    du: Vec<f64>,
    dv: Vec<f64>,
    jac: Matrix2<f64>,
}

fn quadrature(surface: &NurbsSurface, quad_points: Option<usize>) -> Vec<QuadSample> {
    let ru = GaussRule::legendre(quad_points.unwrap_or(surface.degree_u() + 1));
    let rv = GaussRule::legendre(quad_points.unwrap_or(surface.degree_v() + 1));
    let mut out = Vec::new();
    for (u0, u1, v0, v1) in surface.elements() {
        let (hu, hv) = (0.5 * (u1 - u0), 0.5 * (v1 - v0));
        for (yv, wv) in rv.nodes.iter().zip(&rv.weights) {
            for (xu, wu) in ru.nodes.iter().zip(&ru.weights) {
                let (u, v) = (0.5 * (u0 + u1) + hu * xu, 0.5 * (v0 + v1) + hv * yv);
                let b = surface.basis(u, v);
                let (_, jac) = surface.eval_jacobian(u, v);
                out.push(QuadSample {
                    weight: wu * wv * hu * hv,
                    indices: b.indices,
                    du: b.du,
                    dv: b.dv,
                    jac,
                });
            }
        }
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Assemble [`EllipticSystem`] for the current control net.
pub fn assemble_elliptic(surface: &NurbsSurface, opts: &EllipticOptions) -> EllipticSystem {
    let interior: Vec<usize> = (0..surface.control().len()).filter(|&k| !surface.is_boundary_index(k)).collect();
    let mut dof = vec![usize::MAX; surface.control().len()];
    for (d, &k) in interior.iter().enumerate() {
        dof[k] = d;
    }
    let n = interior.len();
    let mut stiffness = DMatrix::zeros(n, n);
    let mut residual = [DVector::zeros(n), DVector::zeros(n)];
    let samples = quadrature(surface, opts.quad_points);
    let floor = opts.jacobian_floor * median(samples.iter().map(|q| q.jac.determinant().abs()).collect());
    let mut tangent = DMatrix::zeros(2 * n, 2 * n);
    let mut floored = 0;
    for q in &samples {
        let det = q.jac.determinant();
        let active = det > floor;
        if !active {
            floored += 1;
        }
        let d = det.max(floor);
        let g = q.jac.transpose() * q.jac;
        let k = adj(&g) / (d * d);
        let adj_j = adj(&q.jac);
        // dK / dP_b^c for every interior basis function b and coordinate c
        let dks: Vec<Option<[Matrix2<f64>; 2]>> = q
            .indices
            .iter()
            .enumerate()
            .map(|(b, &ib)| {
                (dof[ib] != usize::MAX).then(|| {
                    [0, 1].map(|c| {
                        let mut dj = Matrix2::zeros();
                        dj[(c, 0)] = q.du[b];
                        dj[(c, 1)] = q.dv[b];
                        let dg = dj.transpose() * q.jac + q.jac.transpose() * dj;
                        let mut dk = adj(&dg) / (d * d);
                        if active {
                            let ddet = (adj_j * dj).trace();
                            dk -= adj(&g) * (2.0 * ddet / (d * d * d));
                        }
                        dk
                    })
                })
            })
            .collect();
        for (a, &ia) in q.indices.iter().enumerate() {
            let da = dof[ia];
            if da == usize::MAX {
                continue;
            }
            let grad_a = Vector2::new(q.du[a], q.dv[a]);
            let kg = k * grad_a;
            residual[0][da] += q.weight * kg[0];
            residual[1][da] += q.weight * kg[1];
            for (b, &ib) in q.indices.iter().enumerate() {
                let db = dof[ib];
                if db == usize::MAX {
                    continue;
                }
                stiffness[(da, db)] += q.weight * (kg[0] * q.du[b] + kg[1] * q.dv[b]);
                if let Some(dk) = &dks[b] {
                    for (c, dkc) in dk.iter().enumerate() {
                        let row = dkc.transpose() * grad_a;
                        tangent[(da, c * n + db)] += q.weight * row[0];
                        tangent[(n + da, c * n + db)] += q.weight * row[1];
                    }
                }
            }
        }
    }
    EllipticSystem {
        interior,
        stiffness,
        residual,
        tangent,
        floored_points: floored,
    }
}

fn diameter(s: &NurbsSurface) -> f64 {
    crate::splines::bbox_diagonal(s.control())
}

/// Move the interior control points until the discrete inverse harmonic
/// equations hold. Each step solves the linearized system
/// `T Δ = −(R^(ξ), R^(η))` for the interior control point coordinates and
/// halves the step until the residual norm decreases. Boundary control
/// points never change.
pub fn elliptic_improve(surface: &NurbsSurface, opts: &EllipticOptions) -> Result<EllipticReport> {
    let mut current = surface.clone();
    let first = assemble_elliptic(&current, opts);
    let mut history = vec![first.residual_norm()];
    if first.interior.is_empty() {
        return Ok(EllipticReport {
            surface: current,
            iterations: 0,
            converged: true,
            residual_history: history,
            floored_points: 0,
        });
    }
    let diam = diameter(&current);
    let n = first.interior.len();
    let mut system = first;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_picard_iters {
        iterations += 1;
        let mut rhs = DVector::zeros(2 * n);
        rhs.rows_mut(0, n).copy_from(&system.residual[0]);
        rhs.rows_mut(n, n).copy_from(&system.residual[1]);
        let delta = system
            .tangent
            .clone()
            .lu()
            .solve(&(-rhs))
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Singular("elliptic tangent matrix is singular".into()))?;
        let moves: Vec<Vector2<f64>> = (0..n).map(|d| Vector2::new(delta[d], delta[n + d])).collect();
        let largest = moves.iter().map(|m| m.norm()).fold(0.0, f64::max);
        if largest <= opts.update_tol * diam {
            converged = true;
            break;
        }
        let before = *history.last().unwrap();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let mut control = current.control().to_vec();
            for (m, &k) in moves.iter().zip(&system.interior) {
                control[k] += m * step;
            }
            let trial = current.with_control(control)?;
            let trial_system = assemble_elliptic(&trial, opts);
            let r = trial_system.residual_norm();
            if r.is_finite() && r < before {
                accepted = Some((trial, trial_system, r));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, trial_system, r)) = accepted else {
            warn!("elliptic step could not reduce the residual {before:e}; stopping");
            break;
        };
        current = trial;
        system = trial_system;
        history.push(r);
        if largest * step <= opts.update_tol * diam {
            converged = true;
            break;
        }
    }
    if system.floored_points > 0 {
        warn!("{} quadrature points hit the Jacobian floor", system.floored_points);
    }
    info!(
        "elliptic improvement: {iterations} iterations, residual {:e} -> {:e}",
        history[0],
        history.last().unwrap()
    );
    Ok(EllipticReport {
        surface: current,
        iterations,
        converged,
        residual_history: history,
        floored_points: system.floored_points,
    })
}
