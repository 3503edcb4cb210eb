//! Scalar and 2-D Newton solvers.

use crate::error::{BcnfError, Result};

pub const TOL_ROOT: f64 = 1e-12;
pub const MAX_NEWTON: usize = 60;

fn converged_step(step: f64, x: f64) -> bool {
    step.abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
}

/// Newton with a bisection safeguard on `[lo, hi]`. `fdf` returns `(f, f')`.
/// Iterates to machine precision; succeeds if the final residual is within `tol`.
pub fn safeguarded_newton<F>(fdf: F, lo: f64, hi: f64, guess: Option<f64>, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = fdf(a).0;
    let fb = fdf(b).0;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(BcnfError::NotBracketed { target: 0.0, lo: a, hi: b });
    }
    let a_negative = fa < 0.0;
    let mut x = guess.filter(|g| *g > a && *g < b).unwrap_or(0.5 * (a + b));
    // Bisection alone needs ~1075 halvings to exhaust f64; Newton normally ends in a handful.
    for _ in 0..(MAX_NEWTON + 1100) {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == a_negative {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton.is_finite() && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if converged_step(next - x, x) || converged_step(b - a, x) {
            x = next;
            break;
        }
        x = next;
    }
    let r = fdf(x).0;
    if r.abs() <= tol {
        Ok(x)
    } else {
        Err(BcnfError::NoConvergence { what: "safeguarded Newton", iterations: MAX_NEWTON })
    }
}

/// Plain Newton from `x0` with step length capped at `max_step`.
pub fn newton<F>(fdf: F, x0: f64, tol: f64, max_step: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = x0;
    for _ in 0..MAX_NEWTON {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let mut step = fx / dfx;
        if step.abs() > max_step {
            step = max_step.copysign(step);
        }
        x -= step;
        if !x.is_finite() {
            break;
        }
        if converged_step(step, x) {
            break;
        }
    }
    let r = fdf(x).0;
    if r.is_finite() && r.abs() <= tol {
        Ok(x)
    } else {
        Err(BcnfError::NoConvergence { what: "Newton", iterations: MAX_NEWTON })
    }
}

/// Newton for two equations in two unknowns. `fj` returns residual and Jacobian rows.
pub fn newton2<F>(fj: F, x0: [f64; 2], tol: f64) -> Result<[f64; 2]>
where
    F: Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
{
    let mut x = x0;
    for _ in 0..MAX_NEWTON {
        let (r, j) = fj(x);
        if r == [0.0, 0.0] {
            return Ok(x);
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let d0 = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let d1 = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        x = [x[0] - d0, x[1] - d1];
        if !(x[0].is_finite() && x[1].is_finite()) {
            break;
        }
        if converged_step(d0, x[0]) && converged_step(d1, x[1]) {
            break;
        }
    }
    let (r, _) = fj(x);
    if r[0].abs() <= tol && r[1].abs() <= tol {
        Ok(x)
    } else {
        Err(BcnfError::NoConvergence { what: "2-D Newton", iterations: MAX_NEWTON })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketed_root_of_cubic() {
        let x = safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, None, 1e-14).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn bisection_takes_over_from_flat_start() {
        // f'(0) = 0 at the initial midpoint of [-1, 1]
        let x = safeguarded_newton(|x| (x * x * x + 0.5, 3.0 * x * x), -1.0, 1.0, Some(0.0), 1e-14).unwrap();
        assert!((x + 0.5f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn unbracketed_reports_not_bracketed() {
        let e = safeguarded_newton(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, None, 1e-12).unwrap_err();
        assert_eq!(e.kind(), "NotBracketed");
    }

    #[test]
    fn tiny_roots_keep_relative_accuracy() {
        let c = 1e-13;
        let x = safeguarded_newton(|x| (0.5 * x + x * x - c, 0.5 + 2.0 * x), 0.0, 1e-10, None, 1e-30).unwrap();
        let exact = 2.0 * c / (0.5 + (0.25f64 + 4.0 * c).sqrt());
        assert!(((x - exact) / exact).abs() < 1e-14);
    }

    #[test]
    fn newton2_linear_system() {
        let x = newton2(|v| ([v[0] + v[1] - 1.0, v[0] - v[1]], [[1.0, 1.0], [1.0, -1.0]]), [0.0, 0.0], 1e-14).unwrap();
        assert_eq!(x, [0.5, 0.5]);
    }
}
