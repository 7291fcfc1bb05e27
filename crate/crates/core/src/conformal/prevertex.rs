//! Prevertices on the unit circle stored as arc gaps, so that angular
//! differences between crowded neighbours keep full relative precision.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Counterclockwise prevertices `z_k = exp(i θ_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prevertices {
    gaps: Vec<f64>,
    /// `fwd[j * n + k]`: counterclockwise arc from `z_j` to `z_k`, summed
    /// gap by gap.
    #[serde(skip)]
    fwd: Vec<f64>,
    origin: usize,
}

/// Point of the closed unit disk. Boundary points are kept relative to a
/// prevertex so that points very close to crowded prevertices stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DiskPoint {
    Interior(Complex64),
    Boundary { anchor: usize, offset: f64 },
}

impl DiskPoint {
    pub fn origin() -> Self {
        DiskPoint::Interior(Complex64::new(0.0, 0.0))
    }

    pub fn prevertex(k: usize) -> Self {
        DiskPoint::Boundary { anchor: k, offset: 0.0 }
    }
}

/// `1 − exp(iφ)` without cancellation for small `φ`.
pub(crate) fn one_minus_cis(phi: f64) -> Complex64 {
    let h = 0.5 * phi;
    Complex64::new(0.0, -2.0 * h.sin()) * Complex64::cis(h)
}

/// `exp(iψ) − 1` without cancellation for small `ψ`.
pub(crate) fn cis_minus_one(psi: f64) -> Complex64 {
    -one_minus_cis(psi)
}

impl Prevertices {
    /// Build from counterclockwise gaps `gaps[k]` = arc from `z_k` to
    /// `z_{k+1}`. `origin` is the prevertex placed at argument 0.
    pub fn from_gaps(gaps: Vec<f64>, origin: usize) -> Self {
        let n = gaps.len();
        let mut fwd = vec![0.0; n * n];
        for j in 0..n {
            let mut acc = 0.0;
            for step in 1..n {
                acc += gaps[(j + step - 1) % n];
                fwd[j * n + (j + step) % n] = acc;
            }
        }
        Prevertices { gaps, fwd, origin }
    }

    /// Evenly spaced prevertices.
    pub fn uniform(n: usize, origin: usize) -> Self {
        Self::from_gaps(vec![TAU / n as f64; n], origin)
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Counterclockwise arc from `z_j` to `z_k` in `[0, 2π)`.
    pub fn arc(&self, j: usize, k: usize) -> f64 {
        self.fwd[j * self.len() + k]
    }

    /// `θ_k − θ_j` reduced to `(−π, π]`, from the shorter arc.
    pub fn rel(&self, k: usize, j: usize) -> f64 {
        let a = self.arc(j, k);
        if a <= PI {
            a
        } else {
            -self.arc(k, j)
        }
    }

    /// Argument of `z_k` in `[0, 2π)`.
    pub fn theta(&self, k: usize) -> f64 {
        self.arc(self.origin, k)
    }

    pub fn z(&self, k: usize) -> Complex64 {
        Complex64::cis(self.theta(k))
    }

    pub fn arguments(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.theta(k)).collect()
    }

    /// Absolute position of a disk point.
    pub fn position(&self, p: &DiskPoint) -> Complex64 {
        match *p {
            DiskPoint::Interior(z) => z,
            DiskPoint::Boundary { anchor, offset } => Complex64::cis(self.theta(anchor) + offset),
        }
    }

    /// `arg(p) − θ_j` for a boundary point.
    fn rel_point(&self, anchor: usize, offset: f64, j: usize) -> f64 {
        self.rel(anchor, j) + offset
    }

    /// `1 − p / z_j`.
    pub fn one_minus(&self, p: &DiskPoint, j: usize) -> Complex64 {
        match *p {
            DiskPoint::Interior(z) => Complex64::new(1.0, 0.0) - z * self.z(j).conj(),
            DiskPoint::Boundary { anchor, offset } => {
                if anchor == j && offset == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    one_minus_cis(self.rel_point(anchor, offset, j))
                }
            }
        }
    }

    /// `(b − a) / z_j`.
    pub fn chord_over(&self, a: &DiskPoint, b: &DiskPoint, j: usize) -> Complex64 {
        match (*a, *b) {
            (
                DiskPoint::Boundary { anchor: ma, offset: da },
                DiskPoint::Boundary { anchor: mb, offset: db },
            ) => {
                let psi = self.rel(mb, ma) + db - da;
                Complex64::cis(self.rel_point(ma, da, j)) * cis_minus_one(psi)
            }
            (DiskPoint::Interior(za), DiskPoint::Boundary { anchor, offset }) => {
                Complex64::cis(self.rel_point(anchor, offset, j)) - za * self.z(j).conj()
            }
            (DiskPoint::Boundary { anchor, offset }, DiskPoint::Interior(zb)) => {
                zb * self.z(j).conj() - Complex64::cis(self.rel_point(anchor, offset, j))
            }
            (DiskPoint::Interior(za), DiskPoint::Interior(zb)) => (zb - za) * self.z(j).conj(),
        }
    }

    /// `b − a`.
    pub fn chord(&self, a: &DiskPoint, b: &DiskPoint) -> Complex64 {
        match (*a, *b) {
            (
                DiskPoint::Boundary { anchor: ma, offset: da },
                DiskPoint::Boundary { anchor: mb, offset: db },
            ) => {
                let psi = self.rel(mb, ma) + db - da;
                Complex64::cis(self.theta(ma) + da) * cis_minus_one(psi)
            }
            _ => self.position(b) - self.position(a),
        }
    }

    /// Boundary point at argument `theta`, anchored at the nearest
    /// prevertex.
    pub fn boundary_point(&self, theta: f64) -> DiskPoint {
        let t = theta.rem_euclid(TAU);
        let (mut best, mut best_off) = (0, f64::INFINITY);
        for k in 0..self.len() {
            let mut d = t - self.theta(k);
            if d > PI {
                d -= TAU;
            } else if d <= -PI {
                d += TAU;
            }
            if d.abs() < best_off.abs() {
                best = k;
                best_off = d;
            }
        }
        DiskPoint::Boundary {
            anchor: best,
            offset: best_off,
        }
    }

    /// Re-anchor a boundary point given relative to `anchor` at the
    /// nearest prevertex.
    pub fn reanchor(&self, anchor: usize, offset: f64) -> DiskPoint {
        let (mut best, mut best_off) = (anchor, offset);
        for k in 0..self.len() {
            let mut d = offset + self.rel(anchor, k);
            if d > PI {
                d -= TAU;
            } else if d <= -PI {
                d += TAU;
            }
            if d.abs() < best_off.abs() {
                best = k;
                best_off = d;
            }
        }
        DiskPoint::Boundary {
            anchor: best,
            offset: best_off,
        }
    }
}
