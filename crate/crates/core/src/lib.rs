//! Conformal boundary parameter matching for planar four-sided domains.
//!
//! The crate takes four NURBS boundary curves, pairs points on the two long
//! sides through a Schwarz–Christoffel map of the domain, reparameterizes one
//! long side without changing its shape, and builds a tensor-product NURBS
//! parameterization whose quality can be measured and used for analysis.

pub mod brep;
pub mod conformal;
pub mod error;
pub mod io;
pub mod matching;
pub mod paramgen;
pub mod quality;
pub mod splines;

pub use brep::{Brep, Side};
pub use error::{Error, Result};
