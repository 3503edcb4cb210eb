//! Koenigs linearising coordinates near a hyperbolic fixed point.

use crate::error::{BcnfError, Result};
use crate::map_core::Side;
use crate::poly::Poly1;
use crate::roots::safeguarded_newton;

pub const TOL_SEED: f64 = 1e-12;
pub const N_MAX: usize = 10_000;
const SERIES_ORDER: usize = 16;
const SERIES_EPS: f64 = 1e-17;

/// Where a chart may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// `|x - center| < radius`
    Ball { radius: f64 },
    /// The closed half-line on `side` of a center at 0, out to `reach`.
    HalfLine { side: Side, reach: f64 },
}

/// Koenigs coordinate `phi` with `phi(F(x)) = lambda phi(x)`, `phi(x*) = 0`, `phi'(x*) = 1`,
/// and its inverse `psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedChart {
    center: f64,
    lambda: f64,
    // F(u) = P(x* + u) - x*
    shifted: Poly1,
    phi_series: Vec<f64>,
    psi_series: Vec<f64>,
    phi_trust: f64,
    psi_trust: f64,
    window: Window,
}

impl SeedChart {
    /// Chart for the smooth branch map `branch` at its fixed point `x_star`.
    pub fn new(branch: &Poly1, x_star: f64, window: Window) -> Result<Self> {
        let mut shifted = branch.shift(x_star);
        shifted.coeffs[0] = 0.0;
        let shifted = Poly1::new(shifted.coeffs);
        let lambda = shifted.coeff(1);
        if lambda == 0.0 || (lambda.abs() - 1.0).abs() < 1e-6 {
            return Err(BcnfError::NonHyperbolic(lambda));
        }
        let phi_series = koenigs_series(&shifted, lambda);
        let psi_series = poincare_series(&shifted, lambda);
        Ok(SeedChart {
            center: x_star,
            lambda,
            phi_trust: trusted_radius(&phi_series),
            psi_trust: trusted_radius(&psi_series),
            shifted,
            phi_series,
            psi_series,
            window,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn multiplier(&self) -> f64 {
        self.lambda
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.window {
            Window::Ball { radius } => (x - self.center).abs() < radius,
            Window::HalfLine { side, reach } => side.holds(x - self.center) && (x - self.center).abs() <= reach,
        }
    }

    fn inverse_step(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        let f = &self.shifted;
        let guess = u / self.lambda;
        let mut k = 2.0;
        for _ in 0..12 {
            let end = k * guess;
            if (f.eval(end) - u) * (-u) <= 0.0 {
                let tol = 64.0 * f64::EPSILON * u.abs();
                return safeguarded_newton(
                    |v| {
                        let (p, d) = f.eval_d1(v);
                        (p - u, d)
                    },
                    0.0,
                    end,
                    Some(guess),
                    tol,
                );
            }
            k *= 2.0;
        }
        Err(BcnfError::NoConvergence { what: "chart branch inverse", iterations: 12 })
    }

    fn attracting(&self) -> bool {
        self.lambda.abs() < 1.0
    }

    /// Koenigs coordinate of `x`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        let mut u = x - self.center;
        if u == 0.0 {
            return Ok(0.0);
        }
        // scale = lambda^{-n} (attracting) or lambda^{n} (repelling)
        let factor = if self.attracting() { 1.0 / self.lambda } else { self.lambda };
        let mut scale = 1.0;
        let mut prev: Option<f64> = None;
        let bound = 1e3 * (x - self.center).abs().max(self.phi_trust);
        for _ in 0..N_MAX {
            if u.abs() <= self.phi_trust {
                let est = scale * horner(&self.phi_series, u);
                if let Some(p) = prev {
                    if (est - p).abs() <= TOL_SEED * est.abs() {
                        return Ok(est);
                    }
                }
                prev = Some(est);
            }
            u = if self.attracting() { self.shifted.eval(u) } else { self.inverse_step(u)? };
            scale *= factor;
            if !u.is_finite() || u.abs() > bound {
                break;
            }
            if u == 0.0 {
                return Ok(prev.unwrap_or(0.0));
            }
        }
        Err(BcnfError::NoConvergence { what: "Koenigs iteration", iterations: N_MAX })
    }

    /// Inverse of `phi`.
    pub fn psi(&self, w: f64) -> Result<f64> {
        if w == 0.0 {
            return Ok(self.center);
        }
        let shrink = if self.attracting() { self.lambda } else { 1.0 / self.lambda };
        let mut v = w;
        let mut n = 0usize;
        while v.abs() > self.psi_trust {
            v *= shrink;
            n += 1;
            if n > N_MAX {
                return Err(BcnfError::NoConvergence { what: "inverse Koenigs scaling", iterations: N_MAX });
            }
        }
        let mut u = horner(&self.psi_series, v);
        for _ in 0..n {
            u = if self.attracting() { self.inverse_step(u)? } else { self.shifted.eval(u) };
        }
        Ok(self.center + u)
    }
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * u + v)
}

/// Coefficients of `phi` with `phi(F(u)) = lambda phi(u)`, `phi = u + ...`.
fn koenigs_series(f: &Poly1, lambda: f64) -> Vec<f64> {
    let k_max = SERIES_ORDER;
    let ftr = Poly1::new(f.coeffs.iter().take(k_max + 1).copied().collect());
    // powers[j] = F^j truncated
    let mut powers = vec![Poly1::constant(1.0), ftr.clone()];
    for j in 2..=k_max {
        let next = powers[j - 1].mul_trunc(&ftr, k_max);
        powers.push(next);
    }
    let mut b = vec![0.0; k_max + 1];
    b[1] = 1.0;
    for k in 2..=k_max {
        let s: f64 = (1..k).map(|j| b[j] * powers[j].coeff(k)).sum();
        b[k] = s / (lambda - lambda.powi(k as i32));
    }
    b
}

/// Coefficients of `psi` with `psi(lambda w) = F(psi(w))`, `psi = w + ...`.
fn poincare_series(f: &Poly1, lambda: f64) -> Vec<f64> {
    let k_max = SERIES_ORDER;
    let mut c = vec![0.0; k_max + 1];
    c[1] = 1.0;
    for k in 2..=k_max {
        let psi = Poly1::new(c[..k].to_vec());
        let mut power = psi.clone();
        let mut s = 0.0;
        for i in 2..=k {
            power = power.mul_trunc(&psi, k);
            s += f.coeff(i) * power.coeff(k);
        }
        c[k] = s / (lambda.powi(k as i32) - lambda);
    }
    c
}

/// Radius on which the truncated series is accurate to about `SERIES_EPS` relative.
fn trusted_radius(c: &[f64]) -> f64 {
    let k_max = c.len() - 1;
    let mut r = f64::INFINITY;
    for (k, &ck) in c.iter().enumerate().skip(k_max - 3) {
        if ck != 0.0 {
            r = r.min((SERIES_EPS / ck.abs()).powf(1.0 / (k as f64 - 1.0)));
        }
    }
    r
}
