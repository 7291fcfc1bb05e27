//! Gauss–Newton iteration with Broyden rank-one Jacobian updates.

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Settings of the nonlinear solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Target `‖F‖_∞`.
    pub tol: f64,
    pub max_iter: usize,
    /// Recompute the finite-difference Jacobian after this many Broyden
    /// updates.
    pub restart_every: usize,
    pub max_halvings: usize,
    /// Relative forward-difference step.
    pub fd_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 100,
            restart_every: 30,
            max_halvings: 10,
            fd_step: 1e-7,
        }
    }
}

/// Outcome of a converged solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x: DVector<f64>,
    pub residual: DVector<f64>,
    pub iterations: usize,
    pub evaluations: usize,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn fd_jacobian<F>(f: &mut F, x: &DVector<f64>, fx: &DVector<f64>, step: f64, evals: &mut usize) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let (m, n) = (fx.len(), x.len());
    let mut j = DMatrix::zeros(m, n);
    for k in 0..n {
        let h = step * x[k].abs().max(1.0);
        let mut xp = x.clone();
        xp[k] += h;
        let fp = f(&xp)?;
        *evals += 1;
        let col = (fp - fx) / h;
        j.set_column(k, &col);
    }
    Ok(j)
}

/// Least-squares Gauss–Newton step `J δ ≈ −F`.
fn gn_step(j: &DMatrix<f64>, fx: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let rhs = -fx;
    svd.solve(&rhs, 1e-14 * smax).ok()
}

/// Solve `F(x) = 0`.
pub fn solve<F>(mut f: F, x0: DVector<f64>, opts: &SolverOptions) -> Result<SolveReport>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut evals = 0;
    let mut x = x0;
    let mut fx = f(&x)?;
    evals += 1;
    let mut jac = fd_jacobian(&mut f, &x, &fx, opts.fd_step, &mut evals)?;
    let mut fresh = true;
    let mut since_restart = 0;
    for iter in 0..=opts.max_iter {
        let r = inf_norm(&fx);
        debug!("solver iteration {iter}: ‖F‖∞ = {r:e}");
        if r <= opts.tol {
            return Ok(SolveReport {
                x,
                residual: fx,
                iterations: iter,
                evaluations: evals,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let step = gn_step(&jac, &fx).filter(|s| s.iter().all(|v| v.is_finite()));
        let mut accepted = None;
        if let Some(step) = step {
            let f2 = fx.norm_squared();
            let mut lambda = 1.0;
            for _ in 0..=opts.max_halvings {
                let xn = &x + &step * lambda;
                if let Ok(fnew) = f(&xn) {
                    evals += 1;
                    if fnew.iter().all(|v| v.is_finite()) && fnew.norm_squared() < f2 {
                        accepted = Some((xn, fnew));
                        break;
                    }
                } else {
                    evals += 1;
                }
                lambda *= 0.5;
            }
        }
        match accepted {
            Some((xn, fnew)) => {
                let s = &xn - &x;
                let y = &fnew - &fx;
                let ss = s.norm_squared();
                x = xn;
                fx = fnew;
                since_restart += 1;
                if since_restart >= opts.restart_every {
                    jac = fd_jacobian(&mut f, &x, &fx, opts.fd_step, &mut evals)?;
                    fresh = true;
                    since_restart = 0;
                } else if ss > 0.0 {
                    let js = &jac * &s;
                    jac += (y - js) * s.transpose() / ss;
                    fresh = false;
                }
            }
            None => {
                if fresh {
                    break;
                }
                jac = fd_jacobian(&mut f, &x, &fx, opts.fd_step, &mut evals)?;
                fresh = true;
                since_restart = 0;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: inf_norm(&fx),
    })
}
