#![allow(dead_code)]

use nalgebra::Point2;
use scmatch::splines::{KnotVector, NurbsCurve};
use scmatch::Brep;

pub const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Deterministic uniform numbers in `[0, 1)`.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next()
    }
}

pub fn p(x: f64, y: f64) -> Point2<f64> {
    Point2::new(x, y)
}

pub fn line(a: (f64, f64), b: (f64, f64)) -> NurbsCurve {
    NurbsCurve::line(p(a.0, a.1), p(b.0, b.1))
}

/// Axis-aligned `w × h` rectangle with the long sides vertical.
pub fn rectangle(w: f64, h: f64) -> Brep {
    Brep::new(
        line((0.0, 0.0), (0.0, h)),
        line((w, 0.0), (w, h)),
        line((0.0, 0.0), (w, 0.0)),
        line((0.0, h), (w, h)),
    )
    .unwrap()
}

/// Rational quadratic quarter circle of radius `r` from `(r, 0)` to `(0, r)`.
pub fn arc(r: f64) -> NurbsCurve {
    NurbsCurve::new(KnotVector::bezier(2, 0.0, 1.0), vec![p(r, 0.0), p(r, r), p(0.0, r)], vec![1.0, S2, 1.0]).unwrap()
}

/// Quarter annulus between radii 1 and 2 with the arcs as long sides.
pub fn quarter_annulus() -> Brep {
    Brep::new(arc(1.0), arc(2.0), line((1.0, 0.0), (2.0, 0.0)), line((0.0, 1.0), (0.0, 2.0))).unwrap()
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let m = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = m;
    }
    a
}

/// Complete elliptic integral of the first kind, modulus `k`.
pub fn ellip_k(k: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / agm(1.0, (1.0 - k * k).sqrt())
}

/// Modulus `k` of the half-plane rectangle map whose image has aspect
/// `2K(k)/K'(k) = aspect`, found by bisection.
pub fn elliptic_modulus_for_aspect(aspect: f64) -> f64 {
    let f = |k: f64| 2.0 * ellip_k(k) / ellip_k((1.0 - k * k).sqrt()) - aspect;
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-16);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
