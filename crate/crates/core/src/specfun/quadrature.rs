use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUADRATURE_ORDER: usize = 4096;

/// Default rule order; exact for polynomials of degree 511.
pub const DEFAULT_QUADRATURE_ORDER: usize = 256;

/// Gauss–Legendre nodes (values of x = cosθ) and weights on [-1, 1].
///
/// Nodes are strictly increasing. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫₋₁¹ f(x) dx
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// 𝒫_n(x) and 𝒫'_n(x).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    // 𝒫'_n = n (x 𝒫_n − 𝒫_{n−1}) / (x² − 1)
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of the given order via Newton iteration on 𝒫_order.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::InvalidInput(format!(
            "quadrature order {order} outside 1..={MAX_QUADRATURE_ORDER}"
        )));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];

    // Roots come in ± pairs; solve for the positive half.
    for i in 0..n.div_ceil(2) {
        // Tricomi asymptotic guess for the i-th largest root
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Odd orders: the middle root is exactly 0.
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::legendre_p;

    #[test]
    fn tiny_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert!((r1.weights()[0] - 2.0).abs() < 1e-15);

        let r2 = gauss_legendre(2).unwrap();
        let a = 1.0 / 3f64.sqrt();
        assert!((r2.nodes()[0] + a).abs() < 1e-15);
        assert!((r2.nodes()[1] - a).abs() < 1e-15);
        for w in r2.weights() {
            assert!((w - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn order_range() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(4097).is_err());
        assert!(gauss_legendre(4096).is_ok());
    }

    #[test]
    fn structure_and_weight_sum() {
        for n in [3, 7, 64, 255, 256, 1000, 4096] {
            let r = gauss_legendre(n).unwrap();
            assert!(r.nodes().windows(2).all(|p| p[0] < p[1]), "n={n}");
            assert!(r.nodes().iter().all(|x| x.abs() < 1.0));
            assert!(r.weights().iter().all(|&w| w > 0.0));
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    #[test]
    fn monomials_exact() {
        for n in [1usize, 2, 5, 16, 40] {
            let r = gauss_legendre(n).unwrap();
            for k in 0..(2 * n) {
                let got = r.integrate(|x| x.powi(k as i32));
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let scale = exact.abs().max(1e-300);
                if k % 2 == 1 {
                    assert!(got.abs() < 1e-14, "n={n} k={k}");
                } else {
                    assert!(((got - exact) / scale).abs() < 1e-12, "n={n} k={k}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn order_64_orthogonality() {
        let r = gauss_legendre(64).unwrap();
        for j in 0..64 {
            for k in j..64 {
                let s = r.integrate(|x| legendre_p(j, x).unwrap() * legendre_p(k, x).unwrap());
                let e = if j == k { 2.0 / (2 * j + 1) as f64 } else { 0.0 };
                assert!((s - e).abs() < 1e-12, "{j},{k}");
            }
        }
    }
}
