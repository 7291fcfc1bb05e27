//! Gauss–Legendre and Gauss–Jacobi rules by the Golub–Welsch eigenvalue
//! method.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes on `[-1, 1]` and weights of a Gauss rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point Gauss–Legendre rule.
    pub fn legendre(n: usize) -> Self {
        Self::jacobi(n, 0.0, 0.0)
    }

    /// `n`-point Gauss–Jacobi rule for the weight `(1 - x)^a (1 + x)^b`,
    /// `a, b > -1`.
    pub fn jacobi(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
        let ab = a + b;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let s = 2.0 * kf + ab;
                (b * b - a * a) / (s * (s + 2.0))
            };
            m[(k, k)] = diag;
            if k + 1 < n {
                let j = kf + 1.0;
                let s = 2.0 * j + ab;
                let off = if k == 0 {
                    (4.0 * (1.0 + a) * (1.0 + b) / (s * s * (s + 1.0))).sqrt()
                } else {
                    let num = 4.0 * j * (j + a) * (j + b) * (j + ab);
                    (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
                };
                m[(k, k + 1)] = off;
                m[(k + 1, k)] = off;
            }
        }
        let mu0 = 2f64.powf(ab + 1.0) * beta_fn(a + 1.0, b + 1.0);
        let eig = SymmetricEigen::new(m);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let v0 = eig.eigenvectors[(0, k)];
                (eig.eigenvalues[k], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// `∫_lo^hi g` with this rule taken as plain Gauss–Legendre.
    pub fn integrate<T, F>(&self, lo: f64, hi: f64, mut g: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + g(mid + half * x) * (w * half);
        }
        acc
    }
}

/// Euler beta function `B(x, y)`, exact for the one-sided weights and via a
/// Lanczos log-gamma otherwise.
fn beta_fn(x: f64, y: f64) -> f64 {
    if x == 1.0 {
        return 1.0 / y;
    }
    if y == 1.0 {
        return 1.0 / x;
    }
    (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = GaussRule::legendre(8);
        for k in 0..16 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let q: f64 = r.integrate(-1.0, 1.0, |x| x.powi(k));
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_moments() {
        // ∫_{-1}^{1} (1+x)^b x^k dx against the binomial expansion
        for &b in &[-0.5, -0.25, 0.3, 0.9] {
            let r = GaussRule::jacobi(8, 0.0, b);
            for k in 0..10i32 {
                let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
                // substitute y = 1 + x: ∫_0^2 y^b (y-1)^k dy
                let mut exact = 0.0;
                for j in 0..=k {
                    let binom = binomial(k as u32, j as u32);
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let e = b + j as f64 + 1.0;
                    exact += sign * binom * 2f64.powf(e) / e;
                }
                assert!((q - exact).abs() < 1e-12 * (1.0 + exact.abs()), "b={b} k={k}");
            }
        }
    }

    fn binomial(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn general_beta_weight() {
        let r = GaussRule::jacobi(6, -0.5, -0.5);
        // Chebyshev first kind: ∫ (1-x²)^{-1/2} dx = π
        assert!((r.weights.iter().sum::<f64>() - std::f64::consts::PI).abs() < 1e-12);
    }
}
