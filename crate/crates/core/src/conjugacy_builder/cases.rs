//! Case dispatch: which seed and which transport rule for each region and sign of mu.

use super::{
    build_jump_function, match_endpoints, BranchPolicy, ChartPair, ConjugacyMap, Construction, FrozenMap,
    FundamentalSeed, Interval, Knot, Rule, Seed, SeedChart, Window, MAX_TRANSPORT,
};
use crate::error::{BcnfError, Result};
use crate::invariant_sets::{find_fixed_point, find_period_two, normal_form_cycle, normal_form_fixed_point};
use crate::map_core::{extract_bifurcation_data, PiecewiseMap, Side};
use crate::normal_form_matcher::NormalFormMap;
use crate::poly::Poly1;
use crate::region_classifier::{Reduction, RegionClass, RegionKind};

struct Ctx {
    f: FrozenMap,
    g: FrozenMap,
    p: f64,
    y_limit: f64,
}

impl Ctx {
    fn map(&self, construction: Construction, domain: Vec<Interval>, seed: Seed, rule: Rule) -> ConjugacyMap {
        ConjugacyMap::new(construction, domain, self.f.clone(), self.g.clone(), seed, rule, self.y_limit)
    }

    /// Moves `(x, y)` with the same itinerary until both sit inside the chart windows.
    fn anchor(&self, rule: Rule, fc: SeedChart, gc: SeedChart, x0: f64, y0: f64) -> Result<ChartPair> {
        let (mut x, mut y) = (x0, y0);
        for _ in 0..MAX_TRANSPORT {
            if fc.contains(x) && gc.contains(y) {
                return match_endpoints(&fc, &gc, x, y);
            }
            let push = match rule {
                Rule::PullBack => None,
                Rule::PushForward(p) => Some(p),
                Rule::PullAbovePushBelow(p) => {
                    if x > 0.0 {
                        None
                    } else {
                        Some(p)
                    }
                }
            };
            match push {
                None => {
                    let s = Side::of(x);
                    if !s.holds(y) && y.abs() > 1e-13 * self.y_limit {
                        return Err(BcnfError::ItineraryMismatch { x: x0, y, detail: "anchor orbits split" });
                    }
                    x = self.f.eval(x);
                    y = self.g.piece(s).eval(y);
                }
                Some(p) => {
                    let (s, w) = self.f.preimage(x, p)?;
                    x = w;
                    y = self.g.inverse(y, s)?;
                }
            }
            if !(x.is_finite() && y.is_finite()) {
                break;
            }
        }
        Err(BcnfError::NoConvergence { what: "anchor transport", iterations: MAX_TRANSPORT })
    }

    fn full(&self) -> Interval {
        Interval::new(-self.p, self.p)
    }

    fn image_or_nan(h: &ConjugacyMap, x: f64) -> f64 {
        h.eval(x).unwrap_or(f64::NAN)
    }
}

fn ball(branch: &Poly1, center: f64, radius: f64) -> Result<SeedChart> {
    SeedChart::new(branch, center, Window::Ball { radius })
}

fn rule_for(lambda: f64) -> Rule {
    if lambda.abs() < 1.0 {
        Rule::PullBack
    } else {
        Rule::PushForward(BranchPolicy::Unique)
    }
}

/// Builds the conjugacies between `f` and its matched normal form `g` at `mu`.
/// The map must already be in an identity-reduced region.
pub fn build_conjugacy(
    f: &PiecewiseMap,
    g: &NormalFormMap,
    mu: f64,
    region: &RegionClass,
) -> Result<Vec<ConjugacyMap>> {
    if region.kind == RegionKind::OutOfScope {
        return Err(BcnfError::RegionUnsupported("slopes outside every theorem region".into()));
    }
    if region.reduction != Reduction::Identity {
        return Err(BcnfError::PreconditionViolation(format!("map must be reduced first ({:?})", region.reduction)));
    }
    let data = extract_bifurcation_data(f)?;
    let p = f.half_width();
    let reach = 4.0 * p;
    let ctx = Ctx {
        f: FrozenMap::from_map(f, mu, reach),
        g: FrozenMap::from_normal_form(g, reach),
        p,
        y_limit: 2.0 * p * data.a_l.abs().max(data.a_r.abs()).max(1.0),
    };
    if mu == 0.0 {
        return at_switch(&ctx, data.a_l, data.a_r).map(|h| vec![h]);
    }
    match region.kind {
        RegionKind::Trivial => trivial(&ctx, f, g, mu, data.a_l, data.a_r).map(|h| vec![h]),
        RegionKind::SaddleNodeLike if mu > 0.0 => two_fixed_points(&ctx, f, g, mu, data.a_r),
        RegionKind::SaddleNodeLike => no_fixed_points(&ctx, data.a_r).map(|h| vec![h]),
        RegionKind::PeriodDoublingLike if mu > 0.0 => fixed_point_and_cycle(&ctx, f, g, mu),
        RegionKind::PeriodDoublingLike => stable_left(&ctx, f, g, mu).map(|h| vec![h]),
        RegionKind::OutOfScope => unreachable!(),
    }
}

fn at_switch(ctx: &Ctx, a_l: f64, a_r: f64) -> Result<ConjugacyMap> {
    let half = |branch: &Poly1, side: Side| SeedChart::new(branch, 0.0, Window::HalfLine { side, reach: 4.0 * ctx.p });
    let pair = |word: &[Side], side: Side| -> Result<ChartPair> {
        Ok(ChartPair {
            f: half(&super::branch_word(&ctx.f, word), side)?,
            g: half(&super::branch_word(&ctx.g, word), side)?,
            kappa: 1.0,
        })
    };
    let pairs = if a_l > 0.0 && a_r > 0.0 {
        vec![pair(&[Side::Left], Side::Left)?, pair(&[Side::Right], Side::Right)?]
    } else if a_l > 0.0 {
        vec![pair(&[Side::Left], Side::Left)?]
    } else if a_r > 0.0 {
        vec![pair(&[Side::Right], Side::Right)?]
    } else {
        vec![pair(&[Side::Left, Side::Right], Side::Left)?]
    };
    let dom = if pairs.iter().all(|c| c.f.multiplier().abs() < 1.0) {
        let near = |x: f64| x.abs() < 1e-3 * ctx.p;
        Interval::new(edge_where(ctx, &near, 0.0, -ctx.p), edge_where(ctx, &near, 0.0, ctx.p))
    } else {
        ctx.full()
    };
    let h = ctx.map(Construction::FixedPointAtSwitch, vec![dom], Seed::Charts(pairs), Rule::PullBack);
    let range = vec![Interval::new(Ctx::image_or_nan(&h, dom.lo), Ctx::image_or_nan(&h, dom.hi))];
    Ok(h.with_range(range))
}

fn trivial(ctx: &Ctx, f: &PiecewiseMap, g: &NormalFormMap, mu: f64, a_l: f64, a_r: f64) -> Result<ConjugacyMap> {
    let fp = [Side::Left, Side::Right]
        .into_iter()
        .filter_map(|s| find_fixed_point(f, mu, s).ok())
        .find(|r| r.admissible)
        .ok_or_else(|| BcnfError::PreconditionViolation("no admissible fixed point".into()))?;
    let side = fp.side;
    let gp = normal_form_fixed_point(&g.params, side)?;
    let construction = if a_l > 0.0 && a_r > 0.0 {
        Construction::OneFixedPointIncreasing
    } else if a_l < 0.0 && a_r < 0.0 {
        Construction::OneFixedPointDecreasing
    } else if if side == Side::Left { a_l } else { a_r } > 0.0 {
        Construction::OneFixedPointMixedIncreasingSide
    } else {
        Construction::OneFixedPointMixedDecreasingSide
    };
    let rule = rule_for(fp.multiplier);
    let fc = ball(ctx.f.piece(side), fp.location, 0.5 * fp.location.abs())?;
    let gc = ball(ctx.g.piece(side), gp.location, 0.5 * gp.location.abs())?;
    let dom = match rule {
        Rule::PullBack => attracted_part(ctx, &fc, fp.location),
        _ => ctx.full(),
    };
    let pair = ctx.anchor(rule, fc, gc, 0.0, 0.0)?;
    let h = ctx.map(construction, vec![dom], Seed::Charts(vec![pair]), rule);
    let range = vec![Interval::new(Ctx::image_or_nan(&h, dom.lo), Ctx::image_or_nan(&h, dom.hi))];
    Ok(h.with_range(range))
}

fn stable_left(ctx: &Ctx, f: &PiecewiseMap, g: &NormalFormMap, mu: f64) -> Result<ConjugacyMap> {
    let fp = find_fixed_point(f, mu, Side::Left)?;
    let gp = normal_form_fixed_point(&g.params, Side::Left)?;
    let fc = ball(ctx.f.piece(Side::Left), fp.location, 0.5 * fp.location.abs())?;
    let gc = ball(ctx.g.piece(Side::Left), gp.location, 0.5 * gp.location.abs())?;
    let dom = attracted_part(ctx, &fc, fp.location);
    let pair = ctx.anchor(Rule::PullBack, fc, gc, 0.0, 0.0)?;
    let h = ctx.map(Construction::OneFixedPointDecreasing, vec![dom], Seed::Charts(vec![pair]), Rule::PullBack);
    let range = vec![Interval::new(Ctx::image_or_nan(&h, dom.lo), Ctx::image_or_nan(&h, dom.hi))];
    Ok(h.with_range(range))
}

fn two_fixed_points(ctx: &Ctx, f: &PiecewiseMap, g: &NormalFormMap, mu: f64, a_r: f64) -> Result<Vec<ConjugacyMap>> {
    let xl = find_fixed_point(f, mu, Side::Left)?;
    let xr = find_fixed_point(f, mu, Side::Right)?;
    let yl = normal_form_fixed_point(&g.params, Side::Left)?;
    let yr = normal_form_fixed_point(&g.params, Side::Right)?;
    if !(xl.admissible && xr.admissible && yl.admissible && yr.admissible) {
        return Err(BcnfError::PreconditionViolation("expected two admissible fixed points".into()));
    }
    let chart_l = || -> Result<(SeedChart, SeedChart)> {
        Ok((
            ball(ctx.f.piece(Side::Left), xl.location, 0.5 * xl.location.abs())?,
            ball(ctx.g.piece(Side::Left), yl.location, 0.5 * yl.location.abs())?,
        ))
    };
    let chart_r = || -> Result<(SeedChart, SeedChart)> {
        Ok((
            ball(ctx.f.piece(Side::Right), xr.location, 0.5 * xr.location.abs())?,
            ball(ctx.g.piece(Side::Right), yr.location, 0.5 * yr.location.abs())?,
        ))
    };
    if a_r > 0.0 {
        let c = Construction::TwoFixedPointsMonotone;
        let (fc, gc) = chart_r()?;
        let pair = ctx.anchor(Rule::PullBack, fc, gc, 0.0, 0.0)?;
        let a = ctx.map(c, vec![Interval::new(xl.location, ctx.p)], Seed::Charts(vec![pair]), Rule::PullBack);
        let ra = vec![Interval::new(yl.location, Ctx::image_or_nan(&a, ctx.p))];
        let push = Rule::PushForward(BranchPolicy::Unique);
        let (fc, gc) = chart_l()?;
        let pair = ctx.anchor(push, fc, gc, 0.0, 0.0)?;
        let b = ctx.map(c, vec![Interval::new(-ctx.p, xr.location)], Seed::Charts(vec![pair]), push);
        let rb = vec![Interval::new(Ctx::image_or_nan(&b, -ctx.p), yr.location)];
        Ok(vec![a.with_range(ra), b.with_range(rb)])
    } else {
        let c = Construction::TwoFixedPointsNonMonotone;
        let push = Rule::PushForward(BranchPolicy::Side(Side::Left));
        let (fc, gc) = chart_l()?;
        let pair = ctx.anchor(push, fc, gc, 0.0, 0.0)?;
        let a = ctx.map(c, vec![Interval::new(-ctx.p, 0.0)], Seed::Charts(vec![pair]), push);
        let ra = vec![Interval::new(Ctx::image_or_nan(&a, -ctx.p), 0.0)];
        let (fc, gc) = chart_r()?;
        let pair = ctx.anchor(Rule::PullBack, fc, gc, 0.0, 0.0)?;
        let hi = ctx.f.inverse(xl.location, Side::Right)?.min(ctx.p);
        let hi_img = if hi < ctx.p { ctx.g.inverse(yl.location, Side::Right)? } else { f64::NAN };
        let b = ctx.map(c, vec![Interval::new(xl.location, hi)], Seed::Charts(vec![pair]), Rule::PullBack);
        let hi_img = if hi_img.is_nan() { Ctx::image_or_nan(&b, hi) } else { hi_img };
        let rb = vec![Interval::new(yl.location, hi_img)];
        Ok(vec![a.with_range(ra), b.with_range(rb)])
    }
}

fn no_fixed_points(ctx: &Ctx, a_r: f64) -> Result<ConjugacyMap> {
    let nu = ctx.f.value_at_switch();
    let nu_g = ctx.g.value_at_switch();
    if !(nu < 0.0) || (nu - nu_g).abs() > 1e-14 * nu.abs() {
        return Err(BcnfError::PreconditionViolation(format!(
            "switch values {nu} and {nu_g} must agree and be negative"
        )));
    }
    let z = 0.5 * nu;
    let fz = ctx.f.eval(z);
    let slope = ctx.g.deriv(0.0, Side::Left) / ctx.f.deriv(0.0, Side::Left);
    let jump = build_jump_function(Knot { x: nu, value: nu, slope }, Knot { x: z, value: z, slope: 1.0 })?;
    let construction =
        if a_r > 0.0 { Construction::NoFixedPointsMonotone } else { Construction::NoFixedPointsNonMonotone };
    let seed = Seed::Fundamental(FundamentalSeed { z, fz, nu, jump });
    let h = ctx.map(construction, vec![ctx.full()], seed, Rule::PullAbovePushBelow(BranchPolicy::Side(Side::Left)));
    let range = vec![Interval::new(Ctx::image_or_nan(&h, -ctx.p), Ctx::image_or_nan(&h, ctx.p))];
    Ok(h.with_range(range))
}

fn fixed_point_and_cycle(ctx: &Ctx, f: &PiecewiseMap, g: &NormalFormMap, mu: f64) -> Result<Vec<ConjugacyMap>> {
    let c = Construction::FixedPointAndTwoCycle;
    let xr = find_fixed_point(f, mu, Side::Right)?;
    let yr = normal_form_fixed_point(&g.params, Side::Right)?;
    let cyc = find_period_two(f, mu)?;
    let gcyc = normal_form_cycle(&g.params)?;

    let push = Rule::PushForward(BranchPolicy::Unique);
    let fc = ball(ctx.f.piece(Side::Right), xr.location, 0.5 * xr.location.abs())?;
    let gc = ball(ctx.g.piece(Side::Right), yr.location, 0.5 * yr.location.abs())?;
    let pair = ctx.anchor(push, fc, gc, 0.0, 0.0)?;
    let a = ctx
        .map(c, vec![Interval::new(cyc.u_l, cyc.u_r)], Seed::Charts(vec![pair]), push)
        .with_range(vec![Interval::new(gcyc.u_l, gcyc.u_r)]);

    let word = [Side::Left, Side::Right];
    let rf = 0.5 * cyc.u_l.abs().min(cyc.u_r.abs() / ctx.f.deriv(cyc.u_l, Side::Left).abs());
    let rg = 0.5 * gcyc.u_l.abs().min(gcyc.u_r.abs() / ctx.g.deriv(gcyc.u_l, Side::Left).abs());
    let fc = ball(&super::branch_word(&ctx.f, &word), cyc.u_l, rf)?;
    let gc = ball(&super::branch_word(&ctx.g, &word), gcyc.u_l, rg)?;
    let lo = basin_edge(ctx, &fc, cyc.u_l, -ctx.p);
    let hi = basin_edge(ctx, &fc, cyc.u_r, ctx.p);
    let pair = ctx.anchor(Rule::PullBack, fc, gc, 0.0, 0.0)?;
    let b = ctx.map(
        c,
        vec![Interval::new(lo, xr.location), Interval::new(xr.location, hi)],
        Seed::Charts(vec![pair]),
        Rule::PullBack,
    );
    let rb = vec![
        Interval::new(Ctx::image_or_nan(&b, lo), yr.location),
        Interval::new(yr.location, Ctx::image_or_nan(&b, hi)),
    ];
    Ok(vec![a, b.with_range(rb)])
}

/// Part of `(-p, p)` attracted to the chart around the stable point `x_star`.
fn attracted_part(ctx: &Ctx, window: &SeedChart, x_star: f64) -> Interval {
    Interval::new(basin_edge(ctx, window, x_star, -ctx.p), basin_edge(ctx, window, x_star, ctx.p))
}

/// Last point between `inside` and `end` whose forward orbit reaches `window`.
/// Returns `end` when the whole segment is attracted.
fn basin_edge(ctx: &Ctx, window: &SeedChart, inside: f64, end: f64) -> f64 {
    edge_where(ctx, &|x| window.contains(x), inside, end)
}

fn edge_where(ctx: &Ctx, target: &dyn Fn(f64) -> bool, inside: f64, end: f64) -> f64 {
    let reach = 4.0 * ctx.p;
    let attracted = |x0: f64| {
        let mut x = x0;
        for _ in 0..MAX_TRANSPORT {
            if target(x) {
                return true;
            }
            if !(x.abs() <= reach) {
                return false;
            }
            x = ctx.f.eval(x);
        }
        false
    };
    if attracted(end) {
        return end;
    }
    let (mut a, mut b) = (inside, end);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if attracted(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}
