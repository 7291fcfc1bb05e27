
use crate::error::{Error, Result};

/// Relative tolerance under which two knot values are treated as the same knot.
pub const KNOT_TOL: f64 = 1e-10;

/// Clamped (open) knot vector of a given degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    values: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(values: Vec<f64>, degree: usize) -> Result<Self> {
        if values.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots is too few for degree {degree}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be nondecreasing".into()));
        }
        let first = values[0];
        let last = values[values.len() - 1];
        if last <= first {
            return Err(Error::InvalidKnots("empty parameter range".into()));
        }
        let p = degree;
        if values[..=p].iter().any(|&v| v != first) || values[values.len() - p - 1..].iter().any(|&v| v != last)
        {
            return Err(Error::InvalidKnots(format!(
                "end knots must have multiplicity {}",
                p + 1
            )));
        }
        let kv = KnotVector { values, degree };
        for (u, m) in kv.distinct_interior() {
            if m > p {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {u} has multiplicity {m} > degree {p}"
                )));
            }
        }
        Ok(kv)
    }

    /// Clamped knot vector on `[a, b]` with `spans` equal knot spans.
    pub fn uniform(degree: usize, spans: usize, a: f64, b: f64) -> Self {
        let spans = spans.max(1);
        let mut values = vec![a; degree + 1];
        for k in 1..spans {
            values.push(a + (b - a) * k as f64 / spans as f64);
        }
        values.extend(std::iter::repeat(b).take(degree + 1));
        KnotVector { values, degree }
    }

    /// Bézier knot vector `{a,…,a,b,…,b}`.
    pub fn bezier(degree: usize, a: f64, b: f64) -> Self {
        Self::uniform(degree, 1, a, b)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of basis functions `n + 1`.
    pub fn num_basis(&self) -> usize {
        self.values.len() - self.degree - 1
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn end(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn range(&self) -> (f64, f64) {
        (self.start(), self.end())
    }

    pub fn span_length(&self) -> f64 {
        self.end() - self.start()
    }

    /// Absolute tolerance for knot identity on this vector.
    pub fn tol(&self) -> f64 {
        KNOT_TOL * self.span_length()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start() && t <= self.end()
    }

    pub(crate) fn check_param(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange {
                t,
                start: self.start(),
                end: self.end(),
            })
        }
    }

    /// Index `k` of the knot span `[u_k, u_{k+1})` containing `t`; the last
    /// nonempty span is closed on the right.
    pub fn find_span(&self, t: f64) -> usize {
        let p = self.degree;
        let n = self.num_basis() - 1;
        let u = &self.values;
        if t >= u[n + 1] {
            return n;
        }
        if t <= u[p] {
            return p;
        }
        // largest k with u[k] <= t, restricted to [p, n]
        let k = u.partition_point(|&x| x <= t) - 1;
        k.clamp(p, n)
    }

    /// The `p + 1` nonzero basis functions on span `span` at `t`.
    pub fn basis_funs(&self, span: usize, t: f64) -> Vec<f64> {
        let p = self.degree;
        let u = &self.values;
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Nonzero basis functions and their derivatives up to `nd` on `span`.
    /// Row `k` holds the k-th derivatives.
    pub fn ders_basis_funs(&self, span: usize, t: f64, nd: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let u = &self.values;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0; p + 1]; nd + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd.min(p) {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=nd.min(p) {
            for v in ders[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        ders
    }

    /// `N_{i,p}(t)` by the Cox–de Boor recurrence.
    pub fn basis_eval(&self, i: usize, t: f64) -> Result<f64> {
        let count = self.num_basis();
        if i >= count {
            return Err(Error::IndexOutOfRange { index: i, count });
        }
        self.check_param(t)?;
        Ok(self.cox_de_boor(i, self.degree, t))
    }

    fn cox_de_boor(&self, i: usize, p: usize, t: f64) -> f64 {
        let u = &self.values;
        if p == 0 {
            if u[i] <= t && t < u[i + 1] {
                return 1.0;
            }
            // closed last span: the span ending at the right end knot
            return if t == self.end() && u[i + 1] == t && u[i] < u[i + 1] {
                1.0
            } else {
                0.0
            };
        }
        let mut value = 0.0;
        let d1 = u[i + p] - u[i];
        if d1 > 0.0 {
            value += (t - u[i]) / d1 * self.cox_de_boor(i, p - 1, t);
        }
        let d2 = u[i + p + 1] - u[i + 1];
        if d2 > 0.0 {
            value += (u[i + p + 1] - t) / d2 * self.cox_de_boor(i + 1, p - 1, t);
        }
        value
    }

    /// Multiplicity of `t`, counting knots within `tol`.
    pub fn multiplicity(&self, t: f64, tol: f64) -> usize {
        self.values.iter().filter(|&&v| (v - t).abs() <= tol).count()
    }

    /// The stored knot closest to `t` when it lies within `tol`.
    pub fn snap(&self, t: f64, tol: f64) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| (v - t).abs() <= tol)
            .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
            .unwrap_or(t)
    }

    /// Distinct interior knots with their multiplicities.
    pub fn distinct_interior(&self) -> Vec<(f64, usize)> {
        let p = self.degree;
        let inner = &self.values[p + 1..self.values.len() - p - 1];
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in inner {
            match out.last_mut() {
                Some((u, m)) if *u == v => *m += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    /// Distinct knot values including the ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &v in &self.values {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Greville abscissae (knot averages).
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return self.values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        (0..self.num_basis())
            .map(|i| self.values[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// Knot vector `s·Ξ + t`.
    pub fn affine(&self, s: f64, t: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::NonPositiveScale(s));
        }
        Ok(KnotVector {
            values: self.values.iter().map(|&v| s * v + t).collect(),
            degree: self.degree,
        })
    }

    /// Affine image onto `[a, b]`, with the end knots set exactly.
    pub fn mapped_to(&self, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::NonPositiveScale(b - a));
        }
        let (u0, u1) = self.range();
        let s = (b - a) / (u1 - u0);
        let p = self.degree;
        let n = self.values.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if k <= p {
                    a
                } else if k >= n - p - 1 {
                    b
                } else {
                    (a + s * (v - u0)).clamp(a, b)
                }
            })
            .collect();
        Ok(KnotVector { values, degree: p })
    }

    /// Knots after elevating the degree by `r`: every distinct value gains `r`
    /// in multiplicity.
    pub fn elevated(&self, r: usize) -> Self {
        let mut values = Vec::with_capacity(self.values.len() + r * self.breakpoints().len());
        let mut k = 0;
        while k < self.values.len() {
            let v = self.values[k];
            let mut m = 0;
            while k < self.values.len() && self.values[k] == v {
                m += 1;
                k += 1;
            }
            values.extend(std::iter::repeat(v).take(m + r));
        }
        KnotVector {
            values,
            degree: self.degree + r,
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>, degree: usize) -> Self {
        KnotVector { values, degree }
    }
}
