//! Dense univariate polynomials with exact derivative, shift and composition.

use serde::{Deserialize, Serialize};

/// `c[0] + c[1] x + c[2] x^2 + ...`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly1 { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly1::new(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_d1(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::constant(0.0);
        }
        Poly1::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    pub fn nth_derivative(&self, n: usize) -> Poly1 {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Coefficients of `u -> p(x0 + u)`.
    pub fn shift(&self, x0: f64) -> Poly1 {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                c[k] += x0 * c[k + 1];
            }
        }
        Poly1::new(c)
    }

    pub fn add(&self, other: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly1::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: f64) -> Poly1 {
        Poly1::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly1) -> Poly1 {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly1::new(out)
    }

    /// Product truncated to degree `order`.
    pub fn mul_trunc(&self, other: &Poly1, order: usize) -> Poly1 {
        let mut out = vec![0.0; order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > order {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Poly1::new(out)
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Poly1) -> Poly1 {
        let mut acc = Poly1::constant(0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Poly1::constant(c));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = Poly1::new(vec![1.0, -2.0, 0.5, 3.0]);
        let q = p.shift(0.7);
        for &u in &[-0.3, 0.0, 0.2, 1.1] {
            assert!((q.eval(u) - p.eval(0.7 + u)).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_matches_nested_evaluation() {
        let p = Poly1::new(vec![0.1, 2.0, 1.0]);
        let q = Poly1::new(vec![-0.2, 0.5, 0.0, 0.3]);
        let pq = p.compose(&q);
        assert_eq!(pq.degree(), 6);
        for &x in &[-1.0, 0.0, 0.4] {
            assert!((pq.eval(x) - p.eval(q.eval(x))).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_d1_agrees_with_derivative() {
        let p = Poly1::new(vec![0.0, 0.5, 1.0, -0.25]);
        let (v, d) = p.eval_d1(0.3);
        assert_eq!(v, p.eval(0.3));
        assert!((d - p.derivative().eval(0.3)).abs() < 1e-15);
    }
}
