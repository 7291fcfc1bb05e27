//! Four-sided boundary representation.

use std::fmt;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splines::NurbsCurve;

/// Loop-closure tolerance between adjacent curve endpoints.
pub const CLOSURE_TOL: f64 = 1e-8;

/// Label of a boundary curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    West,
    East,
    South,
    North,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::West, Side::East, Side::South, Side::North];

    pub fn name(self) -> &'static str {
        match self {
            Side::West => "West",
            Side::East => "East",
            Side::South => "South",
            Side::North => "North",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Four boundary curves of a planar domain.
///
/// Orientation: `West(0) = South(0)`, `South(1) = East(0)`,
/// `East(1) = North(1)`, `North(0) = West(1)`. The counterclockwise boundary
/// loop is South, East, reversed North, reversed West. West and East are the
/// long sides that get matched.
#[derive(Clone, Debug, PartialEq)]
pub struct Brep {
    pub west: NurbsCurve,
    pub east: NurbsCurve,
    pub south: NurbsCurve,
    pub north: NurbsCurve,
}

impl Brep {
    /// Build and check loop closure.
    pub fn new(west: NurbsCurve, east: NurbsCurve, south: NurbsCurve, north: NurbsCurve) -> Result<Self> {
        let b = Brep {
            west,
            east,
            south,
            north,
        };
        b.check_closure()?;
        Ok(b)
    }

    pub fn curve(&self, side: Side) -> &NurbsCurve {
        match side {
            Side::West => &self.west,
            Side::East => &self.east,
            Side::South => &self.south,
            Side::North => &self.north,
        }
    }

    pub fn curve_mut(&mut self, side: Side) -> &mut NurbsCurve {
        match side {
            Side::West => &mut self.west,
            Side::East => &mut self.east,
            Side::South => &mut self.south,
            Side::North => &mut self.north,
        }
    }

    /// Corner points `[SW, SE, NE, NW]`.
    pub fn corners(&self) -> [Point2<f64>; 4] {
        [
            self.south.start_point(),
            self.east.start_point(),
            self.east.end_point(),
            self.north.start_point(),
        ]
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point2<f64>> = Side::ALL
            .iter()
            .flat_map(|&s| self.curve(s).control_points().iter().copied())
            .collect();
        crate::splines::bbox_diagonal(&pts)
    }

    pub fn check_closure(&self) -> Result<()> {
        let tol = CLOSURE_TOL * self.diameter().max(1.0);
        let pairs = [
            ("West(0)", self.west.start_point(), "South(0)", self.south.start_point()),
            ("South(1)", self.south.end_point(), "East(0)", self.east.start_point()),
            ("East(1)", self.east.end_point(), "North(1)", self.north.end_point()),
            ("North(0)", self.north.start_point(), "West(1)", self.west.end_point()),
        ];
        for (na, a, nb, b) in pairs {
            let d = (a - b).norm();
            if !(d <= tol) {
                return Err(Error::InvalidGeometry(format!(
                    "open loop: {na} and {nb} are {d:e} apart"
                )));
            }
        }
        Ok(())
    }

    /// Copy with West/East and South/North relabelled so that the former
    /// East becomes the fixed side. The loop orientation is preserved by
    /// reversing curve directions.
    pub fn mirrored(&self) -> Brep {
        Brep {
            west: self.east.reversed(),
            east: self.west.reversed(),
            south: self.north.reversed(),
            north: self.south.reversed(),
        }
    }
}
