//! A piecewise map at a fixed parameter, with branch inverses.

use crate::error::{BcnfError, Result};
use crate::map_core::{PiecewiseMap, Side};
use crate::normal_form_matcher::NormalFormMap;
use crate::poly::Poly1;
use crate::roots::safeguarded_newton;

/// How to choose a preimage when pushing forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPolicy {
    /// The map must have exactly one preimage.
    Unique,
    Side(Side),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenMap {
    left: Poly1,
    right: Poly1,
    // ends of the monotone branches adjacent to 0
    left_edge: f64,
    right_edge: f64,
}

impl FrozenMap {
    pub fn new(left: Poly1, right: Poly1, reach: f64) -> Self {
        let left_edge = monotone_edge(&left, -reach);
        let right_edge = monotone_edge(&right, reach);
        FrozenMap { left, right, left_edge, right_edge }
    }

    pub fn from_map(map: &PiecewiseMap, mu: f64, reach: f64) -> Self {
        Self::new(map.left().at_mu(mu), map.right().at_mu(mu), reach)
    }

    pub fn from_normal_form(g: &NormalFormMap, reach: f64) -> Self {
        Self::new(g.piece(Side::Left), g.piece(Side::Right), reach)
    }

    pub fn piece(&self, side: Side) -> &Poly1 {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece(Side::of(x)).eval(x)
    }

    pub fn deriv(&self, x: f64, side: Side) -> f64 {
        self.piece(side).eval_d1(x).1
    }

    pub fn value_at_switch(&self) -> f64 {
        self.left.coeff(0)
    }

    fn edge(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left_edge,
            Side::Right => self.right_edge,
        }
    }

    /// Range of the monotone branch on `side` as `(value at 0, value at edge)`.
    fn branch_range(&self, side: Side) -> (f64, f64) {
        (self.value_at_switch(), self.piece(side).eval(self.edge(side)))
    }

    fn in_branch(&self, y: f64, side: Side) -> bool {
        let (a, b) = self.branch_range(side);
        (a.min(b)..=a.max(b)).contains(&y)
    }

    /// Preimage of `y` on the monotone branch of `side` containing 0.
    pub fn inverse(&self, y: f64, side: Side) -> Result<f64> {
        let nu = self.value_at_switch();
        let (a, b) = self.branch_range(side);
        let slack = 1e-14 * nu.abs().max(y.abs()).max(1e-300);
        if !self.in_branch(y, side) {
            // just beyond the switching value: rounding, map to the switch
            if (y - nu).abs() <= slack {
                return Ok(0.0);
            }
            let beyond_switch = (y - a) * (b - a) < 0.0;
            return Err(if beyond_switch {
                BcnfError::ItineraryMismatch { x: f64::NAN, y, detail: "preimage lies on the other side of the switch" }
            } else {
                BcnfError::InverseUnbracketed { target: y, side: side.name() }
            });
        }
        let p = self.piece(side);
        let tol = 64.0 * f64::EPSILON * (y.abs() + nu.abs()).max(1e-300);
        safeguarded_newton(
            |x| {
                let (v, d) = p.eval_d1(x);
                (v - y, d)
            },
            0.0,
            self.edge(side),
            None,
            tol,
        )
        .map_err(|_| BcnfError::InverseUnbracketed { target: y, side: side.name() })
    }

    pub fn preimage(&self, y: f64, policy: BranchPolicy) -> Result<(Side, f64)> {
        match policy {
            BranchPolicy::Side(s) => self.inverse(y, s).map(|x| (s, x)),
            BranchPolicy::Unique => {
                let l = self.in_branch(y, Side::Left);
                let r = self.in_branch(y, Side::Right);
                match (l, r) {
                    (true, false) => self.inverse(y, Side::Left).map(|x| (Side::Left, x)),
                    (false, true) => self.inverse(y, Side::Right).map(|x| (Side::Right, x)),
                    (true, true) if y == self.value_at_switch() => Ok((Side::Left, 0.0)),
                    (true, true) => Err(BcnfError::ItineraryMismatch {
                        x: f64::NAN,
                        y,
                        detail: "two preimages where one was expected",
                    }),
                    (false, false) => {
                        // rounding at the switching value
                        let nu = self.value_at_switch();
                        if (y - nu).abs() <= 1e-14 * nu.abs().max(y.abs()) {
                            Ok((Side::Left, 0.0))
                        } else {
                            Err(BcnfError::InverseUnbracketed { target: y, side: "either" })
                        }
                    }
                }
            }
        }
    }
}

/// First critical point of `p` between 0 and `limit`, or `limit` if none.
fn monotone_edge(p: &Poly1, limit: f64) -> f64 {
    let dp = p.derivative();
    let s0 = dp.eval(0.0);
    if s0 == 0.0 {
        return 0.0;
    }
    let n = 512;
    let mut prev = 0.0;
    for k in 1..=n {
        let x = limit * k as f64 / n as f64;
        if dp.eval(x).signum() != s0.signum() {
            let d2 = dp.derivative();
            let root = safeguarded_newton(|v| (dp.eval(v), d2.eval(v)), prev, x, None, 1e-12).unwrap_or(prev);
            // stay strictly inside the monotone branch
            return root - 1e-12 * (root - prev).signum() * limit.abs();
        }
        prev = x;
    }
    limit
}
