//! Surface parameterization from a B-Rep: Coons patch, k-refinement,
//! elliptic improvement and the Poisson analysis demo.

mod coons;
mod elliptic;
mod poisson;

pub use coons::{coons_patch, linear_only_pipeline, make_compatible};
pub use elliptic::{assemble_elliptic, elliptic_improve, k_refine, EllipticOptions, EllipticReport, EllipticSystem};
pub use poisson::{
    convergence_csv, convergence_rates, manufactured_solution, manufactured_source, poisson_demo, poisson_demo_with,
    solve_poisson, ConvergenceRow, PoissonOptions, PoissonSolution, CONVERGENCE_HEADER,
};
