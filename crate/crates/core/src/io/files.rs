//! JSON file formats for B-Reps and surfaces.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::brep::{Brep, Side};
use crate::error::{Error, Result};
use crate::matching::Provenance;
use crate::paramgen::EllipticOptions;
use crate::splines::{KnotVector, NurbsCurve, NurbsSurface};

pub const BREP_FORMAT: &str = "scmatch-brep";
pub const SURFACE_FORMAT: &str = "scmatch-surface";
pub const FORMAT_VERSION: u32 = 1;

/// Orientation convention stored in every B-Rep file.
pub const ORIENTATION: &str = "counterclockwise loop: South forward, East forward, North reversed, West reversed; \
West(0)=South(0), South(1)=East(0), East(1)=North(1), North(0)=West(1); West and East are the long sides";

/// One labelled boundary curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub label: String,
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl CurveRecord {
    pub fn from_curve(label: Side, c: &NurbsCurve) -> Self {
        CurveRecord {
            label: label.name().to_string(),
            degree: c.degree(),
            knots: c.knots().values().to_vec(),
            control_points: c.control_points().iter().map(|p| [p.x, p.y]).collect(),
            weights: c.weights().to_vec(),
        }
    }

    pub fn to_curve(&self) -> Result<NurbsCurve> {
        let knots = KnotVector::new(self.knots.clone(), self.degree)?;
        let pts = self.control_points.iter().map(|p| Point2::new(p[0], p[1])).collect();
        NurbsCurve::new(knots, pts, self.weights.clone())
    }
}

/// Wall time of one pipeline stage in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// B-Rep file, optionally carrying the record of a matching run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrepFile {
    pub format: String,
    pub version: u32,
    pub orientation: String,
    pub curves: Vec<CurveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<StageTiming>,
}

fn schema(e: Error) -> Error {
    match e {
        Error::Schema(_) => e,
        other => Error::Schema(other.to_string()),
    }
}

impl BrepFile {
    pub fn from_brep(brep: &Brep) -> Self {
        BrepFile {
            format: BREP_FORMAT.into(),
            version: FORMAT_VERSION,
            orientation: ORIENTATION.into(),
            curves: Side::ALL.iter().map(|&s| CurveRecord::from_curve(s, brep.curve(s))).collect(),
            provenance: None,
            timings: Vec::new(),
        }
    }

    /// Validate labels, curve invariants and loop closure.
    pub fn to_brep(&self) -> Result<Brep> {
        if self.format != BREP_FORMAT {
            return Err(Error::Schema(format!("format must be \"{BREP_FORMAT}\", got \"{}\"", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported version {}", self.version)));
        }
        let mut found: BTreeMap<Side, NurbsCurve> = BTreeMap::new();
        for rec in &self.curves {
            let side = Side::parse(&rec.label)
                .filter(|s| s.name() == rec.label)
                .ok_or_else(|| Error::Schema(format!("unknown curve label \"{}\"", rec.label)))?;
            let curve = rec
                .to_curve()
                .map_err(|e| Error::Schema(format!("curve {}: {e}", rec.label)))?;
            if found.insert(side, curve).is_some() {
                return Err(Error::Schema(format!("curve label {side} appears more than once")));
            }
        }
        for side in Side::ALL {
            if !found.contains_key(&side) {
                return Err(Error::Schema(format!("missing curve label {side}")));
            }
        }
        let mut take = |s: Side| found.remove(&s).unwrap();
        Brep::new(take(Side::West), take(Side::East), take(Side::South), take(Side::North)).map_err(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("B-Rep files serialize");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}

/// Summary of an elliptic improvement run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticRecord {
    pub options: EllipticOptions,
    pub iterations: usize,
    pub converged: bool,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub floored_points: usize,
}

/// How a surface was produced, with stages in execution order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceProvenance {
    pub method: String,
    pub stages: Vec<StageTiming>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticRecord>,
}

/// Tensor-product surface file; the control net is row-major, `u` fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub format: String,
    pub version: u32,
    pub degree_u: usize,
    pub degree_v: usize,
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<SurfaceProvenance>,
}

impl SurfaceFile {
    pub fn from_surface(s: &NurbsSurface, provenance: Option<SurfaceProvenance>) -> Self {
        SurfaceFile {
            format: SURFACE_FORMAT.into(),
            version: FORMAT_VERSION,
            degree_u: s.degree_u(),
            degree_v: s.degree_v(),
            knots_u: s.knots_u().values().to_vec(),
            knots_v: s.knots_v().values().to_vec(),
            control_points: s.control().iter().map(|p| [p.x, p.y]).collect(),
            weights: s.weights().to_vec(),
            provenance,
        }
    }

    pub fn to_surface(&self) -> Result<NurbsSurface> {
        if self.format != SURFACE_FORMAT {
            return Err(Error::Schema(format!("format must be \"{SURFACE_FORMAT}\", got \"{}\"", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported version {}", self.version)));
        }
        let ku = KnotVector::new(self.knots_u.clone(), self.degree_u).map_err(schema)?;
        let kv = KnotVector::new(self.knots_v.clone(), self.degree_v).map_err(schema)?;
        let pts = self.control_points.iter().map(|p| Point2::new(p[0], p[1])).collect();
        NurbsSurface::new(ku, kv, pts, self.weights.clone()).map_err(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("surface files serialize");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}
