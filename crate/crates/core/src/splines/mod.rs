//! NURBS/B-spline kernel: knot algebra, curves and tensor-product surfaces.

mod curve;
pub mod homogeneous;
mod knots;
mod surface;

pub use curve::{merge_curves, NurbsCurve, Polyline, JOIN_TOL};
pub use knots::{KnotVector, KNOT_TOL};
pub use surface::{BasisSample, Dir, NurbsSurface};

pub(crate) use curve::bbox_diagonal;
