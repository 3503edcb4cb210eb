//! Monotone C^1 interpolant between two knots.

use crate::error::{BcnfError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub x: f64,
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    CubicHermite,
    /// Rational quadratic/quadratic Hermite form, monotone for any positive data.
    RationalHermite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpFunction {
    left: Knot,
    right: Knot,
    kind: JumpKind,
}

impl JumpFunction {
    pub fn kind(&self) -> JumpKind {
        self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (l, r) = (self.left, self.right);
        let h = r.x - l.x;
        let th = (x - l.x) / h;
        let delta = (r.value - l.value) / h;
        match self.kind {
            JumpKind::CubicHermite => {
                let t2 = th * th;
                let t3 = t2 * th;
                (2.0 * t3 - 3.0 * t2 + 1.0) * l.value
                    + (t3 - 2.0 * t2 + th) * h * l.slope
                    + (-2.0 * t3 + 3.0 * t2) * r.value
                    + (t3 - t2) * h * r.slope
            }
            JumpKind::RationalHermite => {
                let w = th * (1.0 - th);
                let num = delta * th * th + l.slope * w;
                let den = delta + (l.slope + r.slope - 2.0 * delta) * w;
                l.value + h * delta * num / den
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (l, r) = (self.left, self.right);
        let h = r.x - l.x;
        let th = (x - l.x) / h;
        let delta = (r.value - l.value) / h;
        match self.kind {
            JumpKind::CubicHermite => cubic_slope(th, delta, l.slope, r.slope),
            JumpKind::RationalHermite => {
                let w = th * (1.0 - th);
                let dw = 1.0 - 2.0 * th;
                let num = delta * th * th + l.slope * w;
                let dnum = 2.0 * delta * th + l.slope * dw;
                let den = delta + (l.slope + r.slope - 2.0 * delta) * w;
                let dden = (l.slope + r.slope - 2.0 * delta) * dw;
                delta * (dnum * den - num * dden) / (den * den)
            }
        }
    }
}

fn cubic_slope(th: f64, delta: f64, m0: f64, m1: f64) -> f64 {
    6.0 * delta * (th - th * th) + m0 * (1.0 - 4.0 * th + 3.0 * th * th) + m1 * (3.0 * th * th - 2.0 * th)
}

/// Smallest derivative of the cubic Hermite piece on the gap.
fn cubic_min_slope(delta: f64, m0: f64, m1: f64) -> f64 {
    // derivative is quadratic in th
    let a = -6.0 * delta + 3.0 * m0 + 3.0 * m1;
    let b = 6.0 * delta - 4.0 * m0 - 2.0 * m1;
    let mut best = m0.min(m1);
    if a != 0.0 {
        let th = -b / (2.0 * a);
        if th > 0.0 && th < 1.0 {
            best = best.min(cubic_slope(th, delta, m0, m1));
        }
    }
    best
}

pub fn build_jump_function(left: Knot, right: Knot) -> Result<JumpFunction> {
    if !(left.x < right.x) {
        return Err(BcnfError::NonMonotoneData(format!("knots out of order: {} >= {}", left.x, right.x)));
    }
    if !(left.value < right.value) {
        return Err(BcnfError::NonMonotoneData(format!("values {} >= {}", left.value, right.value)));
    }
    if !(left.slope > 0.0 && right.slope > 0.0) {
        return Err(BcnfError::NonMonotoneData(format!("slopes {} and {} must be positive", left.slope, right.slope)));
    }
    let delta = (right.value - left.value) / (right.x - left.x);
    let kind = if cubic_min_slope(delta, left.slope, right.slope) > 0.0 {
        JumpKind::CubicHermite
    } else {
        JumpKind::RationalHermite
    };
    Ok(JumpFunction { left, right, kind })
}
