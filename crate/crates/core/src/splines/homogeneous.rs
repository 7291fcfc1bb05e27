//! Knot insertion and degree elevation on rows of homogeneous control points
//! `(w·x, w·y, w)`. Curves operate on one row, surfaces on every row of the
//! control net in the refined direction.

use nalgebra::{DMatrix, Vector3};

use super::knots::KnotVector;
use crate::error::{Error, Result};

pub type Hpoint = Vector3<f64>;

/// Evaluate one row of homogeneous control points.
pub fn eval_row(kv: &KnotVector, row: &[Hpoint], t: f64) -> Hpoint {
    let p = kv.degree();
    let span = kv.find_span(t);
    let n = kv.basis_funs(span, t);
    let mut acc = Hpoint::zeros();
    for (j, nj) in n.iter().enumerate() {
        acc += row[span - p + j] * *nj;
    }
    acc
}

/// Insert `t` into `kv` `times` times, applying the same refinement to every
/// row.
pub fn insert_knot(
    kv: &KnotVector,
    rows: &[Vec<Hpoint>],
    t: f64,
    times: usize,
) -> Result<(KnotVector, Vec<Vec<Hpoint>>)> {
    kv.check_param(t)?;
    if times == 0 {
        return Ok((kv.clone(), rows.to_vec()));
    }
    let p = kv.degree();
    let u = kv.values();
    let s = u.iter().filter(|&&v| v == t).count();
    if t == kv.start() || t == kv.end() {
        return Err(Error::MultiplicityOverflow {
            t,
            multiplicity: s + times,
            degree: p,
        });
    }
    if s + times > p {
        return Err(Error::MultiplicityOverflow {
            t,
            multiplicity: s + times,
            degree: p,
        });
    }
    let k = kv.find_span(t);
    let np = kv.num_basis() - 1;
    let r = times;

    let mut new_u = Vec::with_capacity(u.len() + r);
    new_u.extend_from_slice(&u[..=k]);
    new_u.extend(std::iter::repeat(t).take(r));
    new_u.extend_from_slice(&u[k + 1..]);

    let mut out_rows = Vec::with_capacity(rows.len());
    for pw in rows {
        let mut qw = vec![Hpoint::zeros(); np + 1 + r];
        qw[..=(k - p)].copy_from_slice(&pw[..=(k - p)]);
        for i in (k - s)..=np {
            qw[i + r] = pw[i];
        }
        let mut rw: Vec<Hpoint> = (0..=(p - s)).map(|i| pw[k - p + i]).collect();
        let mut l = 0;
        for j in 1..=r {
            l = k - p + j;
            for i in 0..=(p - j - s) {
                let alpha = (t - u[l + i]) / (u[i + k + 1] - u[l + i]);
                rw[i] = rw[i + 1] * alpha + rw[i] * (1.0 - alpha);
            }
            qw[l] = rw[0];
            qw[k + r - j - s] = rw[p - j - s];
        }
        for i in (l + 1)..(k - s) {
            qw[i] = rw[i - l];
        }
        out_rows.push(qw);
    }
    Ok((KnotVector::from_raw(new_u, p), out_rows))
}

/// Raise every distinct knot of `kv` to at least the multiplicity listed in
/// `targets`; knots missing from `kv` are inserted.
pub fn refine_to(
    kv: &KnotVector,
    rows: &[Vec<Hpoint>],
    targets: &[(f64, usize)],
) -> Result<(KnotVector, Vec<Vec<Hpoint>>)> {
    let mut kv = kv.clone();
    let mut rows = rows.to_vec();
    for &(t, m) in targets {
        if t <= kv.start() || t >= kv.end() {
            continue;
        }
        let have = kv.values().iter().filter(|&&v| v == t).count();
        if m > have {
            let (k2, r2) = insert_knot(&kv, &rows, t, m - have)?;
            kv = k2;
            rows = r2;
        }
    }
    Ok((kv, rows))
}

/// Elevate the degree by `r`. The elevated rows are found by collocation at
/// the Greville abscissae of the elevated knot vector, which is exact because
/// the elevated space contains the original one.
pub fn elevate(
    kv: &KnotVector,
    rows: &[Vec<Hpoint>],
    r: usize,
) -> Result<(KnotVector, Vec<Vec<Hpoint>>)> {
    if r == 0 {
        return Ok((kv.clone(), rows.to_vec()));
    }
    let new_kv = kv.elevated(r);
    let q = new_kv.degree();
    let n = new_kv.num_basis();
    let g = new_kv.greville();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (a, &ga) in g.iter().enumerate() {
        let span = new_kv.find_span(ga);
        let b = new_kv.basis_funs(span, ga);
        for (j, bj) in b.iter().enumerate() {
            m[(a, span - q + j)] = *bj;
        }
    }
    let lu = m.lu();
    let mut rhs = DMatrix::<f64>::zeros(n, 3 * rows.len());
    for (ri, row) in rows.iter().enumerate() {
        for (a, &ga) in g.iter().enumerate() {
            let h = eval_row(kv, row, ga);
            for c in 0..3 {
                rhs[(a, 3 * ri + c)] = h[c];
            }
        }
    }
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("degree elevation collocation".into()))?;
    let out = (0..rows.len())
        .map(|ri| {
            (0..n)
                .map(|a| Hpoint::new(sol[(a, 3 * ri)], sol[(a, 3 * ri + 1)], sol[(a, 3 * ri + 2)]))
                .collect()
        })
        .collect();
    Ok((new_kv, out))
}
