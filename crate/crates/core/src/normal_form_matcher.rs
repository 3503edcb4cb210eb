//! Extended normal form `g(y) = nu + s_L y + t y^2 (y <= 0), nu + s_R y (y >= 0)`
//! and the matching of its parameters to a given map.

use serde::Serialize;

use crate::error::{BcnfError, Result};
use crate::invariant_sets::{find_fixed_point, find_period_two, multiplier_of_normal_form_cycle, quadratic_small_root};
use crate::map_core::{evaluate, BifurcationData, PiecewiseMap, Side};
use crate::poly::Poly1;
use crate::region_classifier::{is_period_doubling, is_saddle_node, Reduction, RegionClass, RegionKind};
use crate::roots::MAX_NEWTON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    Trivial,
    SaddleNode,
    PeriodDoubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormParams {
    pub nu: f64,
    pub s_l: f64,
    pub s_r: f64,
    pub t: f64,
    pub mu: f64,
    pub case_tag: CaseTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormMap {
    pub params: NormalFormParams,
}

impl NormalFormMap {
    pub fn new(params: NormalFormParams) -> Self {
        NormalFormMap { params }
    }

    pub fn piece(&self, side: Side) -> Poly1 {
        let p = &self.params;
        match side {
            Side::Left => Poly1::new(vec![p.nu, p.s_l, p.t]),
            Side::Right => Poly1::new(vec![p.nu, p.s_r]),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let p = &self.params;
        if y > 0.0 {
            p.nu + p.s_r * y
        } else {
            p.nu + y * (p.s_l + p.t * y)
        }
    }

    pub fn deriv(&self, y: f64, side: Side) -> f64 {
        match side {
            Side::Left => self.params.s_l + 2.0 * self.params.t * y,
            Side::Right => self.params.s_r,
        }
    }
}

fn switch_slopes(map: &PiecewiseMap, mu: f64) -> Result<(f64, f64)> {
    let dl = map.left().at_mu(mu).coeff(1);
    let dr = map.right().at_mu(mu).coeff(1);
    if dl == 0.0 || dr == 0.0 {
        return Err(BcnfError::ZeroDerivativeAtSwitch);
    }
    Ok((dl, dr))
}

/// Slopes matching the multiplier of the fixed point on `side` and the derivative ratio at 0.
pub fn match_slopes_on_side(map: &PiecewiseMap, mu: f64, side: Side) -> Result<(f64, f64)> {
    let (dl, dr) = switch_slopes(map, mu)?;
    let lambda = find_fixed_point(map, mu, side)?.multiplier;
    Ok(match side {
        Side::Right => (dl * lambda / dr, lambda),
        Side::Left => (lambda, dr * lambda / dl),
    })
}

pub fn match_slopes(data: &BifurcationData, map: &PiecewiseMap, mu: f64) -> Result<(f64, f64)> {
    if mu == 0.0 {
        if data.a_l == 0.0 || data.a_r == 0.0 {
            return Err(BcnfError::ZeroDerivativeAtSwitch);
        }
        return Ok((data.a_l, data.a_r));
    }
    match_slopes_on_side(map, mu, if mu > 0.0 { Side::Right } else { Side::Left })
}

/// `t(0)` for the saddle-node case.
pub fn t_saddle_node_limit(d: &BifurcationData) -> f64 {
    d.c_l - d.a_l * (1.0 - d.a_l) * d.c_r / (d.a_r * (1.0 - d.a_r))
}

/// `t(0)` for the period-doubling case.
pub fn t_period_doubling_limit(d: &BifurcationData) -> f64 {
    d.c_l + d.a_l * (1.0 + d.a_l) * d.c_r / (d.a_r * (1.0 + d.a_r))
        - 2.0 * (1.0 - d.a_l * d.a_r) * d.a_l * d.c_r / (d.a_r * (1.0 + d.a_r) * (1.0 - d.a_r))
}

const T_STEP_CAP: f64 = 10.0;
const T_TOL: f64 = 1e-13;

/// Multiplier of the left fixed point of `nu + s y + t y^2` and its t-derivative.
fn left_multiplier(nu: f64, s: f64, t: f64) -> Result<(f64, f64)> {
    let y = quadratic_small_root(t, s - 1.0, nu)?;
    let dy_dt = -y * y / (2.0 * t * y + s - 1.0);
    Ok((s + 2.0 * t * y, 2.0 * y + 2.0 * t * dy_dt))
}

fn solve_scalar<F>(mut residual: F, x0: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut x = x0;
    for _ in 0..MAX_NEWTON {
        let (r, dr) = residual(x)?;
        if r.abs() <= T_TOL {
            return Ok(x);
        }
        if dr == 0.0 || !dr.is_finite() {
            break;
        }
        let step = (r / dr).clamp(-T_STEP_CAP, T_STEP_CAP);
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            let (r, _) = residual(x)?;
            if r.abs() <= 1e3 * T_TOL {
                return Ok(x);
            }
            break;
        }
    }
    Err(BcnfError::NoConvergence { what, iterations: MAX_NEWTON })
}

pub fn match_t_saddle_node(data: &BifurcationData, map: &PiecewiseMap, mu: f64) -> Result<f64> {
    if !is_saddle_node(data.a_l, data.a_r) {
        return Err(BcnfError::PreconditionViolation("slopes are not saddle-node-like".into()));
    }
    let t0 = t_saddle_node_limit(data);
    if mu == 0.0 {
        return Ok(t0);
    }
    let lambda_l = find_fixed_point(map, mu, Side::Left)?.multiplier;
    let (s_l, _) = match_slopes_on_side(map, mu, Side::Right)?;
    let nu = evaluate(map, 0.0, mu);
    solve_scalar(
        |t| {
            let (m, dm) = left_multiplier(nu, s_l, t)?;
            Ok((m - lambda_l, dm))
        },
        t0,
        "saddle-node t matching",
    )
}

fn central_difference<F: FnMut(f64) -> Result<f64>>(f: &mut F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

pub fn match_t_period_doubling(data: &BifurcationData, map: &PiecewiseMap, mu: f64) -> Result<f64> {
    if !is_period_doubling(data.a_l, data.a_r) {
        return Err(BcnfError::PreconditionViolation("slopes are not period-doubling-like".into()));
    }
    let t0 = t_period_doubling_limit(data);
    if mu == 0.0 {
        return Ok(t0);
    }
    if mu < 0.0 {
        return Err(BcnfError::PreconditionViolation("t matching on the 2-cycle needs mu > 0".into()));
    }
    let xi = find_period_two(map, mu)?.multiplier;
    let (s_l, s_r) = match_slopes(data, map, mu)?;
    let nu = evaluate(map, 0.0, mu);
    let mut xi_hat = |t: f64| {
        multiplier_of_normal_form_cycle(&NormalFormParams { nu, s_l, s_r, t, mu, case_tag: CaseTag::PeriodDoubling })
    };
    solve_scalar(
        |t| {
            let r = xi_hat(t)? - xi;
            let d = central_difference(&mut xi_hat, t, 1e-4 * t.abs().max(1.0))?;
            Ok((r, d))
        },
        t0,
        "period-doubling t matching",
    )
}

/// Left slope for `mu < 0` in the period-doubling case: the multiplier of g's
/// left fixed point must equal `lambda_L` with `t` frozen at `t(0)`.
fn period_doubling_left_slope(nu: f64, t: f64, lambda_l: f64) -> Result<f64> {
    solve_scalar(
        |s| {
            let (m, _) = left_multiplier(nu, s, t)?;
            let h = 1e-7;
            let (mp, _) = left_multiplier(nu, s + h, t)?;
            let (mm, _) = left_multiplier(nu, s - h, t)?;
            Ok((m - lambda_l, (mp - mm) / (2.0 * h)))
        },
        lambda_l,
        "period-doubling left slope",
    )
}

pub fn build_normal_form(
    data: &BifurcationData,
    map: &PiecewiseMap,
    mu: f64,
    region: &RegionClass,
) -> Result<NormalFormMap> {
    if region.reduction != Reduction::Identity {
        return Err(BcnfError::PreconditionViolation(format!(
            "map must be reduced first (reduction {:?})",
            region.reduction
        )));
    }
    let nu = evaluate(map, 0.0, mu);
    let (s_l, s_r, t, case_tag) = match region.kind {
        RegionKind::OutOfScope => {
            return Err(BcnfError::RegionUnsupported("slopes outside every theorem region".into()))
        }
        RegionKind::Trivial => {
            let (s_l, s_r) = if mu == 0.0 {
                match_slopes(data, map, 0.0)?
            } else {
                let side = [Side::Left, Side::Right]
                    .into_iter()
                    .find(|&s| find_fixed_point(map, mu, s).map(|r| r.admissible).unwrap_or(false))
                    .ok_or_else(|| BcnfError::PreconditionViolation("no admissible fixed point".into()))?;
                match_slopes_on_side(map, mu, side)?
            };
            (s_l, s_r, 0.0, CaseTag::Trivial)
        }
        RegionKind::SaddleNodeLike => {
            let (s_l, s_r) = match_slopes(data, map, mu)?;
            (s_l, s_r, match_t_saddle_node(data, map, mu)?, CaseTag::SaddleNode)
        }
        RegionKind::PeriodDoublingLike => {
            if mu < 0.0 {
                let t = t_period_doubling_limit(data);
                let lambda_l = find_fixed_point(map, mu, Side::Left)?.multiplier;
                let (dl, dr) = switch_slopes(map, mu)?;
                let s_l = period_doubling_left_slope(nu, t, lambda_l)?;
                (s_l, dr * s_l / dl, t, CaseTag::PeriodDoubling)
            } else {
                let (s_l, s_r) = match_slopes(data, map, mu)?;
                (s_l, s_r, match_t_period_doubling(data, map, mu)?, CaseTag::PeriodDoubling)
            }
        }
    };
    Ok(NormalFormMap::new(NormalFormParams { nu, s_l, s_r, t, mu, case_tag }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_core::extract_bifurcation_data;
    use crate::region_classifier::classify;

    fn sn_map(c_l: f64, c_r: f64) -> PiecewiseMap {
        PiecewiseMap::from_terms(&[(1, 0, 2.0), (0, 1, 1.0), (2, 0, c_l)], &[(1, 0, 0.5), (0, 1, 1.0), (2, 0, c_r)])
            .unwrap()
    }

    #[test]
    fn slopes_at_zero_and_for_linear_maps() {
        let f = sn_map(0.0, 0.0);
        let d = extract_bifurcation_data(&f).unwrap();
        assert_eq!(match_slopes(&d, &f, 0.0).unwrap(), (2.0, 0.5));
        for &mu in &[-0.03, 0.02] {
            let (a, b) = match_slopes(&d, &f, mu).unwrap();
            assert!((a - 2.0).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn slopes_with_quadratic_right_piece() {
        let f =
            PiecewiseMap::from_terms(&[(1, 0, 2.0), (0, 1, 1.0)], &[(1, 0, 0.5), (0, 1, 1.0), (2, 0, 1.0)]).unwrap();
        let d = extract_bifurcation_data(&f).unwrap();
        let mu = 0.01;
        // x^2 - 0.5 x + mu = 0, small root
        let x_r = (0.5 - (0.25f64 - 4.0 * mu).sqrt()) / 2.0;
        let lam = 0.5 + 2.0 * x_r;
        let (s_l, s_r) = match_slopes(&d, &f, mu).unwrap();
        assert!((s_r - lam).abs() < 1e-14);
        assert!((s_l - 2.0 * lam / 0.5).abs() < 1e-13);
    }

    #[test]
    fn saddle_node_limits() {
        let d = extract_bifurcation_data(&sn_map(1.0, 1.0)).unwrap();
        let oracle = 1.0 - (2.0 * (1.0 - 2.0) * 1.0) / (0.5 * (1.0 - 0.5));
        assert_eq!(oracle, 9.0);
        assert!((t_saddle_node_limit(&d) - oracle).abs() < 1e-14);
        let d = extract_bifurcation_data(&sn_map(1.0, 0.0)).unwrap();
        assert_eq!(t_saddle_node_limit(&d), 1.0);
        let f = sn_map(0.0, 0.0);
        let d = extract_bifurcation_data(&f).unwrap();
        assert!(match_t_saddle_node(&d, &f, 0.01).unwrap().abs() < 1e-10);
    }

    #[test]
    fn saddle_node_t_converges_to_limit() {
        let f = sn_map(1.0, 1.0);
        let d = extract_bifurcation_data(&f).unwrap();
        let t1 = match_t_saddle_node(&d, &f, 1e-3).unwrap();
        let t2 = match_t_saddle_node(&d, &f, 1e-4).unwrap();
        let extrapolated = (10.0 * t2 - t1) / 9.0;
        assert!((extrapolated - 9.0).abs() < 1e-3, "{t1} {t2} {extrapolated}");
    }

    #[test]
    fn period_doubling_limits() {
        let f =
            PiecewiseMap::from_terms(&[(1, 0, -0.4), (0, 1, 1.0), (2, 0, 1.0)], &[(1, 0, -2.0), (0, 1, 1.0)]).unwrap();
        let d = extract_bifurcation_data(&f).unwrap();
        assert!((t_period_doubling_limit(&d) - 1.0).abs() < 1e-15);
        let lin = PiecewiseMap::from_terms(&[(1, 0, -0.4), (0, 1, 1.0)], &[(1, 0, -2.0), (0, 1, 1.0)]).unwrap();
        let dl = extract_bifurcation_data(&lin).unwrap();
        assert!(match_t_period_doubling(&dl, &lin, 0.02).unwrap().abs() < 1e-8);
    }

    #[test]
    fn period_doubling_t_with_right_curvature() {
        let f =
            PiecewiseMap::from_terms(&[(1, 0, -0.4), (0, 1, 1.0)], &[(1, 0, -2.0), (0, 1, 1.0), (2, 0, 1.0)]).unwrap();
        let d = extract_bifurcation_data(&f).unwrap();
        let (a_l, a_r) = (-0.4, -2.0);
        let oracle =
            a_l * (1.0 + a_l) / (a_r * (1.0 + a_r)) - 2.0 * (1.0 - a_l * a_r) * a_l / (a_r * (1.0 + a_r) * (1.0 - a_r));
        assert!((t_period_doubling_limit(&d) - oracle).abs() < 1e-14);
        let t1 = match_t_period_doubling(&d, &f, 2e-3).unwrap();
        let t2 = match_t_period_doubling(&d, &f, 1e-3).unwrap();
        assert!(((2.0 * t2 - t1) - oracle).abs() < 1e-4, "{t1} {t2} {oracle}");
    }

    #[test]
    fn limits_do_not_scale_with_beta() {
        // beta = 2: implicit solves still extrapolate to the beta-free limits
        let f = PiecewiseMap::from_terms(
            &[(1, 0, 2.0), (0, 1, 2.0), (2, 0, 1.0)],
            &[(1, 0, 0.5), (0, 1, 2.0), (2, 0, 1.0)],
        )
        .unwrap();
        let d = extract_bifurcation_data(&f).unwrap();
        let t1 = match_t_saddle_node(&d, &f, 2e-4).unwrap();
        let t2 = match_t_saddle_node(&d, &f, 1e-4).unwrap();
        assert!(((2.0 * t2 - t1) - 9.0).abs() < 1e-3);
        let g = PiecewiseMap::from_terms(
            &[(1, 0, -0.4), (0, 1, 2.0), (2, 0, 1.0)],
            &[(1, 0, -2.0), (0, 1, 2.0), (2, 0, 0.5)],
        )
        .unwrap();
        let d = extract_bifurcation_data(&g).unwrap();
        let t1 = match_t_period_doubling(&d, &g, 2e-4).unwrap();
        let t2 = match_t_period_doubling(&d, &g, 1e-4).unwrap();
        assert!(
            ((2.0 * t2 - t1) - t_period_doubling_limit(&d)).abs() < 1e-4,
            "{t1} {t2} {}",
            t_period_doubling_limit(&d)
        );
    }

    #[test]
    fn build_examples() {
        let f = PiecewiseMap::from_terms(&[(1, 0, 0.5), (0, 1, 1.0)], &[(1, 0, 0.8), (0, 1, 1.0)]).unwrap();
        let d = extract_bifurcation_data(&f).unwrap();
        let g = build_normal_form(&d, &f, 0.05, &classify(d.a_l, d.a_r)).unwrap();
        let p = g.params;
        assert_eq!((p.nu, p.t, p.case_tag), (0.05, 0.0, CaseTag::Trivial));
        assert!((p.s_l - 0.5).abs() < 1e-15 && (p.s_r - 0.8).abs() < 1e-15);

        let f = sn_map(1.0, 1.0);
        let d = extract_bifurcation_data(&f).unwrap();
        let g = build_normal_form(&d, &f, 0.0, &classify(d.a_l, d.a_r)).unwrap();
        assert_eq!(g.params.t, 9.0);
        for &mu in &[-0.01, 0.01] {
            let g = build_normal_form(&d, &f, mu, &classify(d.a_l, d.a_r)).unwrap();
            assert_eq!(g.params.nu.signum(), mu.signum());
        }
    }

    #[test]
    fn period_doubling_negative_mu_matches_left_multiplier() {
        let f = PiecewiseMap::from_terms(
            &[(1, 0, -0.4), (0, 1, 1.0), (2, 0, 1.0)],
            &[(1, 0, -2.0), (0, 1, 1.0), (2, 0, 0.3)],
        )
        .unwrap();
        let d = extract_bifurcation_data(&f).unwrap();
        let mu = -0.02;
        let g = build_normal_form(&d, &f, mu, &classify(d.a_l, d.a_r)).unwrap();
        let lam = find_fixed_point(&f, mu, Side::Left).unwrap().multiplier;
        let y = crate::invariant_sets::normal_form_fixed_point(&g.params, Side::Left).unwrap();
        assert!(y.admissible);
        assert!((y.multiplier - lam).abs() < 1e-9);
        let (dl, dr) = switch_slopes(&f, mu).unwrap();
        assert!((g.params.s_l / g.params.s_r - dl / dr).abs() < 1e-12);
    }

    #[test]
    fn reduced_orientation_required() {
        let f = sn_map(0.0, 0.0);
        let d = extract_bifurcation_data(&f).unwrap();
        let e = build_normal_form(&d, &f, 0.01, &classify(0.5, 2.0)).unwrap_err();
        assert_eq!(e.kind(), "PreconditionViolation");
    }
}
