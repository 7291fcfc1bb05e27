//! File formats, the synthetic corpus and SVG plots.

pub mod corpus;
mod files;
mod svg;

pub use files::{
    BrepFile, CurveRecord, EllipticRecord, StageTiming, SurfaceFile, SurfaceProvenance, BREP_FORMAT, FORMAT_VERSION,
    ORIENTATION, SURFACE_FORMAT,
};
pub use svg::{plot_svg, PlotMetric};
