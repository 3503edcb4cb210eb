//! Fixed points and period-two orbits of `f` and of the normal form.

use serde::Serialize;

use crate::error::{BcnfError, Result};
use crate::map_core::{extract_bifurcation_data, PiecewiseMap, Side};
use crate::normal_form_matcher::NormalFormParams;
use crate::poly::Poly1;
use crate::region_classifier::is_period_doubling;
use crate::roots::{newton, newton2, TOL_ROOT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub location: f64,
    pub side: Side,
    pub multiplier: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodTwoRecord {
    pub u_l: f64,
    pub u_r: f64,
    pub multiplier: f64,
}

pub fn find_fixed_point(map: &PiecewiseMap, mu: f64, side: Side) -> Result<FixedPointRecord> {
    let piece = map.piece(side);
    let a = piece.coeff(1, 0);
    let beta = piece.coeff(0, 1);
    if (1.0 - a).abs() < 1e-12 {
        return Err(BcnfError::SlopeOne(side.name()));
    }
    let seed = beta * mu / (1.0 - a);
    let solve = |m: f64, x0: f64| {
        let p = piece.at_mu(m);
        newton(
            |x| {
                let (v, d) = p.eval_d1(x);
                (v - x, d - 1.0)
            },
            x0,
            TOL_ROOT,
            map.half_width(),
        )
    };
    let x = match solve(mu, seed) {
        Ok(x) => x,
        Err(_) => {
            // continuation from mu = 0, where x = 0
            let steps = 64;
            let mut x = 0.0;
            for k in 1..=steps {
                x = solve(mu * k as f64 / steps as f64, x)?;
            }
            x
        }
    };
    Ok(FixedPointRecord {
        location: x,
        side,
        multiplier: piece.at_mu(mu).derivative().eval(x),
        admissible: side.holds(x),
    })
}

/// Newton for `L(u_l) = u_r`, `R(u_r) = u_l`.
pub(crate) fn solve_two_cycle(left: &Poly1, right: &Poly1, seed: [f64; 2]) -> Result<[f64; 2]> {
    newton2(
        |v| {
            let (fl, dl) = left.eval_d1(v[0]);
            let (fr, dr) = right.eval_d1(v[1]);
            ([fl - v[1], fr - v[0]], [[dl, -1.0], [-1.0, dr]])
        },
        seed,
        TOL_ROOT,
    )
}

/// Exact 2-cycle of the piecewise-linear map `nu + s y`.
pub fn linear_two_cycle(nu: f64, s_l: f64, s_r: f64) -> (f64, f64) {
    let den = 1.0 - s_l * s_r;
    (nu * (1.0 + s_r) / den, nu * (1.0 + s_l) / den)
}

pub fn find_period_two(map: &PiecewiseMap, mu: f64) -> Result<PeriodTwoRecord> {
    let data = extract_bifurcation_data(map)?;
    if !is_period_doubling(data.a_l, data.a_r) {
        return Err(BcnfError::PreconditionViolation(format!(
            "slopes ({}, {}) are not period-doubling-like",
            data.a_l, data.a_r
        )));
    }
    if !(mu > 0.0) {
        return Err(BcnfError::PreconditionViolation(format!("2-cycle requires mu > 0, got {mu}")));
    }
    let left = map.left().at_mu(mu);
    let right = map.right().at_mu(mu);
    let seed = linear_two_cycle(data.beta * mu, data.a_l, data.a_r);
    let [u_l, u_r] = solve_two_cycle(&left, &right, [seed.0, seed.1])?;
    if !(u_l < 0.0 && u_r > 0.0) {
        return Err(BcnfError::WrongSides { u_l, u_r });
    }
    Ok(PeriodTwoRecord { u_l, u_r, multiplier: left.derivative().eval(u_l) * right.derivative().eval(u_r) })
}

/// 2-cycle `{v_L, v_R}` of the normal form, located by Newton.
pub fn normal_form_cycle(params: &NormalFormParams) -> Result<PeriodTwoRecord> {
    if !(params.nu > 0.0) {
        return Err(BcnfError::PreconditionViolation(format!("normal-form cycle requires nu > 0, got {}", params.nu)));
    }
    let left = Poly1::new(vec![params.nu, params.s_l, params.t]);
    let right = Poly1::new(vec![params.nu, params.s_r]);
    let seed = linear_two_cycle(params.nu, params.s_l, params.s_r);
    let [v_l, v_r] = solve_two_cycle(&left, &right, [seed.0, seed.1])?;
    if !(v_l < 0.0 && v_r > 0.0) {
        return Err(BcnfError::WrongSides { u_l: v_l, u_r: v_r });
    }
    Ok(PeriodTwoRecord { u_l: v_l, u_r: v_r, multiplier: (params.s_l + 2.0 * params.t * v_l) * params.s_r })
}

pub fn multiplier_of_normal_form_cycle(params: &NormalFormParams) -> Result<f64> {
    normal_form_cycle(params).map(|c| c.multiplier)
}

/// Fixed points of the normal form on each side, admissible or not.
pub fn normal_form_fixed_point(params: &NormalFormParams, side: Side) -> Result<FixedPointRecord> {
    let (y, lambda) = match side {
        Side::Right => {
            if params.s_r == 1.0 {
                return Err(BcnfError::SlopeOne("right"));
            }
            (params.nu / (1.0 - params.s_r), params.s_r)
        }
        Side::Left => {
            let y = quadratic_small_root(params.t, params.s_l - 1.0, params.nu)?;
            (y, params.s_l + 2.0 * params.t * y)
        }
    };
    Ok(FixedPointRecord { location: y, side, multiplier: lambda, admissible: side.holds(y) })
}

/// Root of `t y^2 + b y + nu = 0` that tends to `-nu/b` as `nu -> 0`.
pub(crate) fn quadratic_small_root(t: f64, b: f64, nu: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(BcnfError::SlopeOne("left"));
    }
    if t == 0.0 {
        return Ok(-nu / b);
    }
    let disc = b * b - 4.0 * t * nu;
    if disc < 0.0 {
        return Err(BcnfError::DegenerateQuadratic(disc));
    }
    Ok(-2.0 * nu / (b + b.signum() * disc.sqrt()))
}

/// Region-specific sanity used by sweeps: counts of admissible fixed points.
pub fn admissible_fixed_points(map: &PiecewiseMap, mu: f64) -> Vec<FixedPointRecord> {
    [Side::Left, Side::Right]
        .iter()
        .filter_map(|&s| find_fixed_point(map, mu, s).ok())
        .filter(|r| r.admissible)
        .collect()
}
