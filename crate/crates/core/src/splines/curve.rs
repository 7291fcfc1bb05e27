use nalgebra::{Point2, Vector2};

use super::homogeneous::{self, Hpoint};
use super::knots::KnotVector;
use crate::error::{Error, Result};

/// Geometric tolerance for joins between curve segments.
pub const JOIN_TOL: f64 = 1e-10;

/// Planar NURBS curve.
#[derive(Clone, Debug, PartialEq)]
pub struct NurbsCurve {
    knots: KnotVector,
    control_points: Vec<Point2<f64>>,
    weights: Vec<f64>,
}

/// Output of [`NurbsCurve::sample_adaptive`].
#[derive(Clone, Debug)]
pub struct Polyline {
    pub points: Vec<Point2<f64>>,
    pub params: Vec<f64>,
    /// Set when the curve has (numerically) zero length.
    pub degenerate: bool,
}

impl NurbsCurve {
    pub fn new(knots: KnotVector, control_points: Vec<Point2<f64>>, weights: Vec<f64>) -> Result<Self> {
        if control_points.len() != knots.num_basis() {
            return Err(Error::InvalidGeometry(format!(
                "{} control points for {} basis functions",
                control_points.len(),
                knots.num_basis()
            )));
        }
        if weights.len() != control_points.len() {
            return Err(Error::InvalidGeometry("weight count differs from control point count".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGeometry("weights must be positive".into()));
        }
        if control_points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite control point".into()));
        }
        Ok(NurbsCurve {
            knots,
            control_points,
            weights,
        })
    }

    /// Polynomial B-spline curve (unit weights).
    pub fn bspline(knots: KnotVector, control_points: Vec<Point2<f64>>) -> Result<Self> {
        let w = vec![1.0; control_points.len()];
        Self::new(knots, control_points, w)
    }

    /// Degree-1 segment from `a` to `b` over `[0, 1]`.
    pub fn line(a: Point2<f64>, b: Point2<f64>) -> Self {
        Self::bspline(KnotVector::bezier(1, 0.0, 1.0), vec![a, b]).expect("valid line")
    }

    pub fn from_homogeneous(knots: KnotVector, row: &[Hpoint]) -> Result<Self> {
        let weights: Vec<f64> = row.iter().map(|h| h.z).collect();
        let pts = row.iter().map(|h| Point2::new(h.x / h.z, h.y / h.z)).collect();
        Self::new(knots, pts, weights)
    }

    pub fn homogeneous(&self) -> Vec<Hpoint> {
        self.control_points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| Hpoint::new(p.x * w, p.y * w, w))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.knots.degree()
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn control_points(&self) -> &[Point2<f64>] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn range(&self) -> (f64, f64) {
        self.knots.range()
    }

    pub fn is_polynomial(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    pub fn start_point(&self) -> Point2<f64> {
        self.control_points[0]
    }

    pub fn end_point(&self) -> Point2<f64> {
        self.control_points[self.control_points.len() - 1]
    }

    /// Diagonal of the control-polygon bounding box.
    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.control_points)
    }

    pub fn eval(&self, t: f64) -> Result<Point2<f64>> {
        self.knots.check_param(t)?;
        Ok(self.point_at(t))
    }

    /// Evaluation without the range check; `t` is clamped to the knot range.
    pub fn point_at(&self, t: f64) -> Point2<f64> {
        let t = t.clamp(self.knots.start(), self.knots.end());
        let p = self.degree();
        let span = self.knots.find_span(t);
        let n = self.knots.basis_funs(span, t);
        let mut acc = Hpoint::zeros();
        for (j, nj) in n.iter().enumerate() {
            let i = span - p + j;
            let w = self.weights[i] * nj;
            acc += Hpoint::new(self.control_points[i].x * w, self.control_points[i].y * w, w);
        }
        Point2::new(acc.x / acc.z, acc.y / acc.z)
    }

    /// Point and derivatives `C, C', …, C^(nd)` at `t` (clamped to the range).
    pub fn derivatives_at(&self, t: f64, nd: usize) -> Vec<Vector2<f64>> {
        let t = t.clamp(self.knots.start(), self.knots.end());
        let p = self.degree();
        let span = self.knots.find_span(t);
        let ders = self.knots.ders_basis_funs(span, t, nd);
        let mut a = vec![Vector2::zeros(); nd + 1];
        let mut w = vec![0.0; nd + 1];
        for k in 0..=nd {
            for j in 0..=p {
                let i = span - p + j;
                let c = ders[k][j] * self.weights[i];
                a[k] += self.control_points[i].coords * c;
                w[k] += c;
            }
        }
        let mut ck = vec![Vector2::zeros(); nd + 1];
        for k in 0..=nd {
            let mut v = a[k];
            for i in 1..=k {
                v -= ck[k - i] * (binomial(k, i) * w[i]);
            }
            ck[k] = v / w[0];
        }
        ck
    }

    /// Exact first or second derivative.
    pub fn derivative(&self, t: f64, order: usize) -> Result<Vector2<f64>> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidGeometry(format!("derivative order {order} not supported")));
        }
        self.knots.check_param(t)?;
        Ok(self.derivatives_at(t, order)[order])
    }

    pub fn insert_knot(&self, t: f64, times: usize) -> Result<Self> {
        let (kv, rows) = homogeneous::insert_knot(&self.knots, &[self.homogeneous()], t, times)?;
        Self::from_homogeneous(kv, &rows[0])
    }

    /// Insert knots so that each `(t, m)` reaches multiplicity at least `m`.
    pub fn refine(&self, targets: &[(f64, usize)]) -> Result<Self> {
        let (kv, rows) = homogeneous::refine_to(&self.knots, &[self.homogeneous()], targets)?;
        Self::from_homogeneous(kv, &rows[0])
    }

    pub fn elevate_degree(&self, target: usize) -> Result<Self> {
        let p = self.degree();
        if target < p {
            return Err(Error::DegreeLowering { from: p, to: target });
        }
        if target == p {
            return Ok(self.clone());
        }
        let (kv, rows) = homogeneous::elevate(&self.knots, &[self.homogeneous()], target - p)?;
        let mut out = Self::from_homogeneous(kv, &rows[0])?;
        // collocation reproduces the clamped ends up to rounding; pin them
        let last = out.control_points.len() - 1;
        out.control_points[0] = self.start_point();
        out.control_points[last] = self.end_point();
        out.weights[0] = self.weights[0];
        out.weights[last] = self.weights[self.weights.len() - 1];
        Ok(out)
    }

    /// Knots `s·Ξ + t`; control data unchanged.
    pub fn affine_reparam(&self, s: f64, t: f64) -> Result<Self> {
        Ok(NurbsCurve {
            knots: self.knots.affine(s, t)?,
            control_points: self.control_points.clone(),
            weights: self.weights.clone(),
        })
    }

    /// Affine reparameterization onto `[a, b]` with the end knots set exactly.
    pub fn mapped_to(&self, a: f64, b: f64) -> Result<Self> {
        Ok(NurbsCurve {
            knots: self.knots.mapped_to(a, b)?,
            control_points: self.control_points.clone(),
            weights: self.weights.clone(),
        })
    }

    /// Same point set traversed in the opposite direction over the same range.
    pub fn reversed(&self) -> Self {
        let (a, b) = self.range();
        let mut vals: Vec<f64> = self.knots.values().iter().rev().map(|&v| a + b - v).collect();
        let p = self.degree();
        let n = vals.len();
        for v in vals[..=p].iter_mut() {
            *v = a;
        }
        for v in vals[n - p - 1..].iter_mut() {
            *v = b;
        }
        NurbsCurve {
            knots: KnotVector::from_raw(vals, p),
            control_points: self.control_points.iter().rev().copied().collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }

    /// Split at an interior parameter into two clamped curves.
    pub fn split(&self, t: f64) -> Result<(Self, Self)> {
        let (a, b) = self.range();
        if !(t > a && t < b) {
            return Err(Error::ParameterOutOfRange { t, start: a, end: b });
        }
        let p = self.degree();
        let t = self.knots.snap(t, self.knots.tol());
        if t <= a || t >= b {
            return Err(Error::ParameterOutOfRange { t, start: a, end: b });
        }
        let have = self.knots.values().iter().filter(|&&v| v == t).count();
        let refined = if have < p { self.insert_knot(t, p - have)? } else { self.clone() };
        let u = refined.knots.values();
        let k = u.iter().position(|&v| v == t).expect("inserted knot present");

        let mut left_u = u[..k].to_vec();
        left_u.extend(std::iter::repeat(t).take(p + 1));
        let mut right_u = vec![t; p + 1];
        right_u.extend_from_slice(&u[k + p..]);

        let left = NurbsCurve {
            knots: KnotVector::from_raw(left_u, p),
            control_points: refined.control_points[..k].to_vec(),
            weights: refined.weights[..k].to_vec(),
        };
        let right = NurbsCurve {
            knots: KnotVector::from_raw(right_u, p),
            control_points: refined.control_points[k - 1..].to_vec(),
            weights: refined.weights[k - 1..].to_vec(),
        };
        Ok((left, right))
    }

    /// Foot parameter of the closest point to `target`, starting Newton's
    /// method from `guess`.
    pub fn closest_point(&self, target: Point2<f64>, guess: f64) -> Result<f64> {
        self.knots.check_param(guess)?;
        let scale_len = self.bbox_diagonal().max(f64::MIN_POSITIVE);
        if let Some(t) = self.newton_projection(target, guess, scale_len, 50) {
            return Ok(t);
        }
        // Newton stalled: bracket the best of 256 samples and refine.
        let (a, b) = self.range();
        let n: usize = 256;
        let dist = |t: f64| (self.point_at(t) - target).norm_squared();
        let (mut best_k, mut best_d) = (0usize, f64::INFINITY);
        for k in 0..=n {
            let d = dist(a + (b - a) * k as f64 / n as f64);
            if d < best_d {
                best_d = d;
                best_k = k;
            }
        }
        let lo = a + (b - a) * best_k.saturating_sub(1) as f64 / n as f64;
        let hi = a + (b - a) * (best_k + 1).min(n) as f64 / n as f64;
        let t = golden_section(dist, lo, hi, 1e-15 * (b - a));
        if let Some(t) = self.newton_projection(target, t, scale_len, 20) {
            return Ok(t);
        }
        let residual = self.projection_residual(target, t, scale_len);
        if residual <= 1e-6 {
            // golden section is accurate to ~sqrt(eps); accept when Newton
            // cannot improve on a flat minimum
            return Ok(t);
        }
        Err(Error::ProjectionFailed { residual })
    }

    fn projection_residual(&self, target: Point2<f64>, t: f64, scale_len: f64) -> f64 {
        let d = self.derivatives_at(t, 1);
        let diff = d[0] - target.coords;
        let speed = d[1].norm();
        if speed == 0.0 {
            return 0.0;
        }
        (diff.dot(&d[1]) / (speed * scale_len)).abs()
    }

    fn newton_projection(&self, target: Point2<f64>, guess: f64, scale_len: f64, max_iter: usize) -> Option<f64> {
        let (a, b) = self.range();
        let mut t = guess;
        for _ in 0..max_iter {
            let d = self.derivatives_at(t, 2);
            let diff = d[0] - target.coords;
            let f = diff.dot(&d[1]);
            let speed = d[1].norm();
            if speed == 0.0 {
                return None;
            }
            if (f / (speed * scale_len)).abs() <= 1e-10 {
                return Some(t);
            }
            // clamped at an end with the distance still decreasing outward
            if (t == a && f > 0.0) || (t == b && f < 0.0) {
                return Some(t);
            }
            let df = d[1].norm_squared() + diff.dot(&d[2]);
            if !(df > 0.0) {
                return None;
            }
            let next = (t - f / df).clamp(a, b);
            if next == t {
                return None;
            }
            t = next;
        }
        None
    }

    /// Recursive bisection until every chord is within `chord_tol` of the curve.
    pub fn sample_adaptive(&self, chord_tol: f64) -> Polyline {
        let tol = chord_tol.max(f64::MIN_POSITIVE);
        let breaks = self.knots.breakpoints();
        let mut params = vec![breaks[0]];
        for w in breaks.windows(2) {
            self.bisect(w[0], w[1], tol, 0, &mut params);
        }
        let points: Vec<Point2<f64>> = params.iter().map(|&t| self.point_at(t)).collect();
        let length: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let degenerate = length <= 1e-14 * (1.0 + self.bbox_diagonal());
        if degenerate {
            let (a, b) = self.range();
            log::warn!("adaptive sampling of a zero-length curve");
            return Polyline {
                points: vec![self.point_at(a), self.point_at(b)],
                params: vec![a, b],
                degenerate: true,
            };
        }
        Polyline {
            points,
            params,
            degenerate: false,
        }
    }

    fn chord_deviation(&self, a: f64, b: f64) -> f64 {
        let pa = self.point_at(a);
        let pb = self.point_at(b);
        let chord = pb - pa;
        let len = chord.norm();
        let mut dev: f64 = 0.0;
        const PROBES: usize = 8;
        for k in 1..PROBES {
            let t = a + (b - a) * k as f64 / PROBES as f64;
            let q = self.point_at(t) - pa;
            let d = if len > 0.0 {
                let s = (q.dot(&chord) / (len * len)).clamp(0.0, 1.0);
                (q - chord * s).norm()
            } else {
                q.norm()
            };
            dev = dev.max(d);
        }
        dev
    }

    fn bisect(&self, a: f64, b: f64, tol: f64, depth: usize, out: &mut Vec<f64>) {
        if depth < 48 && self.chord_deviation(a, b) > tol {
            let m = 0.5 * (a + b);
            self.bisect(a, m, tol, depth + 1, out);
            self.bisect(m, b, tol, depth + 1, out);
        } else {
            out.push(b);
        }
    }
}

/// Join consecutive segments into one clamped curve with `C⁰` joins.
pub fn merge_curves(segments: &[NurbsCurve]) -> Result<NurbsCurve> {
    let first = segments
        .first()
        .ok_or_else(|| Error::Merge("no segments".into()))?;
    let p = first.degree();
    let mut knots: Vec<f64> = first.knots.values().to_vec();
    let mut cps = first.control_points.clone();
    let mut ws = first.weights.clone();
    for (idx, seg) in segments.iter().enumerate().skip(1) {
        if seg.degree() != p {
            return Err(Error::Merge(format!(
                "degree mismatch: segment {idx} has degree {} instead of {p}",
                seg.degree()
            )));
        }
        let prev_end = *knots.last().unwrap();
        let start = seg.knots.start();
        let scale = (seg.knots.end() - prev_end).abs().max(prev_end.abs()).max(1.0);
        if start > prev_end + 1e-13 * scale {
            return Err(Error::Merge(format!("parameter gap between {prev_end} and {start}")));
        }
        if start < prev_end - 1e-13 * scale {
            return Err(Error::Merge(format!("parameter overlap between {prev_end} and {start}")));
        }
        let a = cps[cps.len() - 1];
        let b = seg.control_points[0];
        let diag = bbox_diagonal(&cps).max(seg.bbox_diagonal()).max(1.0);
        if (a - b).norm() > JOIN_TOL * diag {
            return Err(Error::Merge(format!("endpoint mismatch at segment {idx}")));
        }
        let wa = ws[ws.len() - 1];
        let wb = seg.weights[0];
        if (wa - wb).abs() > JOIN_TOL * wa.max(wb) {
            return Err(Error::Merge(format!("end weight mismatch at segment {idx}")));
        }
        // p copies of the join parameter
        knots.pop();
        let join = *knots.last().unwrap();
        knots.extend(seg.knots.values()[p + 1..].iter().map(|&v| v.max(join)));
        cps.extend_from_slice(&seg.control_points[1..]);
        ws.extend_from_slice(&seg.weights[1..]);
    }
    NurbsCurve::new(KnotVector::new(knots, p)?, cps, ws)
}

pub(crate) fn bbox_diagonal(pts: &[Point2<f64>]) -> f64 {
    let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in pts {
        lo = lo.inf(&p.coords);
        hi = hi.sup(&p.coords);
    }
    (hi - lo).norm()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    0.5 * (lo + hi)
}
