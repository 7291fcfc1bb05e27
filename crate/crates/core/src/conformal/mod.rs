//! Schwarz–Christoffel disk map of the boundary polygon through
//! cross-ratios of a Delaunay triangulation, and the disk-to-rectangle map
//! that pairs markers on the two long sides.

mod integrator;
mod polygon;
mod prevertex;
pub mod quadrature;
mod rectangle;
mod scmap;
pub mod solver;
mod triangulate;

pub use integrator::Integrator;
pub use polygon::{polygonize, split_long_edges, Polygon, DEFAULT_KAPPA};
pub use prevertex::{DiskPoint, Prevertices};
pub use rectangle::{boundary_markers, disk_to_rectangle, Markers, RectCorners, RectMap, ORDINATE_TOL};
pub use scmap::{solve_parameter_problem, ScDiskMap, ScMapSummary, ScOptions, CROWDING_GAP};
pub use solver::SolverOptions;
pub use triangulate::{cross_ratio, delaunay_quads, QuadSet};
