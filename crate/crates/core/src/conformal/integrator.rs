//! Compound Gauss–Jacobi quadrature of Schwarz–Christoffel integrands
//! `∏_j (1 − ζ/z_j)^{β_j}` along straight segments.

use num_complex::Complex64;

use super::prevertex::{DiskPoint, Prevertices};
use super::quadrature::GaussRule;
use crate::error::{Error, Result};

/// Panels shorter than `2^-MAX_DEPTH` of the segment are not resolved.
const MAX_DEPTH: usize = 180;

/// Integrator for a fixed set of singularities on the prevertex circle.
#[derive(Clone, Debug)]
pub struct Integrator {
    /// `(prevertex index, exponent)` of every singular factor.
    sing: Vec<(usize, f64)>,
    /// Gauss–Jacobi rule with weight `(1 + x)^{β}` per singularity.
    jacobi: Vec<GaussRule>,
    legendre: GaussRule,
}

/// Which end of the segment a panel is measured from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Frame {
    Start,
    End,
}

struct Segment {
    /// `1 − a/z_j` per singularity.
    ua: Vec<Complex64>,
    /// `1 − b/z_j`.
    ub: Vec<Complex64>,
    /// `(b − a)/z_j`.
    v: Vec<Complex64>,
    /// Local singularity sitting exactly at `a`, resp. `b`.
    at_a: Option<usize>,
    at_b: Option<usize>,
    len: f64,
}

impl Integrator {
    /// `singularities` lists `(prevertex index, β)`; zero exponents are
    /// dropped.
    pub fn new(singularities: &[(usize, f64)], points: usize) -> Self {
        let sing: Vec<(usize, f64)> = singularities.iter().copied().filter(|&(_, b)| b != 0.0).collect();
        let mut cache: Vec<(u64, GaussRule)> = Vec::new();
        let jacobi = sing
            .iter()
            .map(|&(_, b)| {
                if let Some((_, r)) = cache.iter().find(|(k, _)| *k == b.to_bits()) {
                    return r.clone();
                }
                let r = GaussRule::jacobi(points, 0.0, b);
                cache.push((b.to_bits(), r.clone()));
                r
            })
            .collect();
        Integrator {
            sing,
            jacobi,
            legendre: GaussRule::legendre(points),
        }
    }

    fn local_of(&self, p: &DiskPoint) -> Option<usize> {
        match *p {
            DiskPoint::Boundary { anchor, offset } if offset == 0.0 => {
                self.sing.iter().position(|&(k, _)| k == anchor)
            }
            _ => None,
        }
    }

    /// Integrand `∏ (1 − ζ/z_j)^{β_j}` at a disk point.
    pub fn integrand(&self, prev: &Prevertices, p: &DiskPoint) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &(k, b) in &self.sing {
            s += b * prev.one_minus(p, k).ln();
        }
        s.exp()
    }

    /// `∫_a^b ∏ (1 − ζ/z_j)^{β_j} dζ` along the straight segment.
    pub fn integrate(&self, prev: &Prevertices, a: &DiskPoint, b: &DiskPoint) -> Result<Complex64> {
        let chord = prev.chord(a, b);
        let len = chord.norm();
        if len == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let seg = Segment {
            ua: self.sing.iter().map(|&(k, _)| prev.one_minus(a, k)).collect(),
            ub: self.sing.iter().map(|&(k, _)| prev.one_minus(b, k)).collect(),
            v: self.sing.iter().map(|&(k, _)| prev.chord_over(a, b, k)).collect(),
            at_a: self.local_of(a),
            at_b: self.local_of(b),
            len,
        };
        let mut total = Complex64::new(0.0, 0.0);
        // panels as (frame, s0, s1, depth), s measured from the frame's end
        let mut stack = vec![(Frame::End, 0.0, 0.5, 1usize), (Frame::Start, 0.0, 0.5, 1usize)];
        while let Some((frame, s0, s1, depth)) = stack.pop() {
            let sing_here = match frame {
                Frame::Start if s0 == 0.0 => seg.at_a,
                Frame::End if s0 == 0.0 => seg.at_b,
                _ => None,
            };
            let plen = seg.len * (s1 - s0);
            let mut ok = true;
            for j in 0..self.sing.len() {
                if Some(j) == sing_here {
                    continue;
                }
                let d = panel_distance(&seg, frame, j, s0, s1);
                if d == 0.0 {
                    return Err(Error::Quadrature(format!(
                        "integration path passes through prevertex {}",
                        self.sing[j].0
                    )));
                }
                if d < plen {
                    ok = false;
                    break;
                }
            }
            if ok {
                total += self.panel(&seg, frame, s0, s1, sing_here);
            } else {
                if depth >= MAX_DEPTH {
                    return Err(Error::Quadrature("panel subdivision limit reached near a prevertex".into()));
                }
                let mid = 0.5 * (s0 + s1);
                stack.push((frame, mid, s1, depth + 1));
                stack.push((frame, s0, mid, depth + 1));
            }
        }
        Ok(chord * total)
    }

    /// `∫` over one panel in the segment parameter, with the factor of a
    /// singular panel endpoint absorbed into the Jacobi weight.
    fn panel(&self, seg: &Segment, frame: Frame, s0: f64, s1: f64, sing: Option<usize>) -> Complex64 {
        let (u, sign) = match frame {
            Frame::Start => (&seg.ua, -1.0),
            Frame::End => (&seg.ub, 1.0),
        };
        // factor_j(s) = u_j + sign·s·v_j
        let log_sum = |s: f64, skip: Option<usize>| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &(_, b)) in self.sing.iter().enumerate() {
                if Some(j) == skip {
                    continue;
                }
                acc += b * (u[j] + seg.v[j] * (sign * s)).ln();
            }
            acc
        };
        match sing {
            Some(js) => {
                let beta = self.sing[js].1;
                // factor = s · (sign·v), so the weight is s^β on [0, s1]
                let lead = beta * (seg.v[js] * sign).ln();
                let rule = &self.jacobi[js];
                let half = 0.5 * s1;
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let s = half * (1.0 + x);
                    acc += (log_sum(s, Some(js)) + lead).exp() * *w;
                }
                acc * half.powf(beta + 1.0)
            }
            None => {
                let half = 0.5 * (s1 - s0);
                let mid = 0.5 * (s1 + s0);
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, w) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                    acc += log_sum(mid + half * x, None).exp() * *w;
                }
                acc * half
            }
        }
    }
}

/// Distance from the panel `[s0, s1]` to the prevertex of local index `j`.
fn panel_distance(seg: &Segment, frame: Frame, j: usize, s0: f64, s1: f64) -> f64 {
    let (u, v) = match frame {
        Frame::Start => (seg.ua[j], -seg.v[j]),
        Frame::End => (seg.ub[j], seg.v[j]),
    };
    let vv = v.norm_sqr();
    let s = if vv > 0.0 {
        (-(u * v.conj()).re / vv).clamp(s0, s1)
    } else {
        s0
    };
    (u + v * s).norm()
}
