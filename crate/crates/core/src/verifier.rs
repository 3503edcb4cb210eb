//! Numerical checks of conjugacy identities and of the a-priori bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conjugacy_builder::{
    build_seed_chart, match_endpoints, ChartPair, Conjugacy, ConjugacyMap, FrozenMap, Interval,
};
use crate::error::{BcnfError, Result};
use crate::invariant_sets::{find_fixed_point, find_period_two, normal_form_cycle, normal_form_fixed_point};
use crate::map_core::{PiecewiseMap, Side};
use crate::normal_form_matcher::NormalFormMap;
use crate::poly::Poly1;
use crate::roots::safeguarded_newton;

pub const TOL_CONJ: f64 = 1e-7;
pub const TOL_SWITCH: f64 = 1e-10;
pub const TOL_GAP: f64 = 1e-4;
pub const TOL_MULTIPLIER: f64 = 1e-9;
pub const TOL_TRANSPORT: f64 = 1e-6;
const K_SAMPLES: usize = 10_000;
const MAX_WITNESSES: usize = 10;

/// Evenly spaced interior points of each interval, `n` in total.
pub fn interior_samples(domain: &[Interval], n: usize) -> Vec<f64> {
    let total: f64 = domain.iter().map(|i| i.width()).sum();
    let mut xs = Vec::with_capacity(n);
    for iv in domain {
        let k = ((n as f64 * iv.width() / total).round() as usize).max(1);
        for j in 0..k {
            xs.push(iv.lo + iv.width() * (j as f64 + 0.5) / k as f64);
        }
    }
    xs
}

/// Uniform random interior points of each interval, proportional to width.
pub fn random_samples(domain: &[Interval], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = domain.iter().map(|i| i.width()).sum();
    let mut xs = Vec::with_capacity(n);
    for iv in domain {
        let k = ((n as f64 * iv.width() / total).round() as usize).max(1);
        for _ in 0..k {
            let x = iv.lo + iv.width() * rng.gen::<f64>();
            if iv.contains(x) {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs
}

/// `sup |h(f(x)) - g(h(x))|` over `xs` with `f(x)` in the domain of `h`.
pub fn residual_at(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, h: &dyn Conjugacy, xs: &[f64]) -> Result<f64> {
    let dom = h.domain();
    let mut sup: f64 = 0.0;
    for &x in xs {
        let fx = f(x);
        if !dom.iter().any(|i| i.contains(fx)) {
            continue;
        }
        let r = (h.eval(fx)? - g(h.eval(x)?)).abs();
        sup = sup.max(r);
    }
    Ok(sup)
}

pub fn conjugacy_residual(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    h: &dyn Conjugacy,
    samples: usize,
) -> Result<f64> {
    residual_at(f, g, h, &interior_samples(&h.domain(), samples))
}

/// Whether `h` is strictly increasing along the sorted points `xs`, interval by interval.
pub fn is_increasing(h: &dyn Conjugacy, xs: &[f64]) -> Result<bool> {
    for iv in h.domain() {
        let mut prev: Option<f64> = None;
        for &x in xs.iter().filter(|&&x| iv.contains(x)) {
            let y = h.eval(x)?;
            if prev.is_some_and(|p| y <= p) {
                return Ok(false);
            }
            prev = Some(y);
        }
    }
    Ok(true)
}

/// One-sided derivatives of `h` at `x0`, each Richardson-refined.
pub fn one_sided_derivatives(h: &dyn Conjugacy, x0: f64, step: f64) -> Result<(f64, f64)> {
    let h0 = h.eval(x0)?;
    let q = |s: f64| -> Result<f64> { Ok((h.eval(x0 + s)? - h0) / s) };
    let left = 2.0 * q(-0.5 * step)? - q(-step)?;
    let right = 2.0 * q(0.5 * step)? - q(step)?;
    Ok((left, right))
}

pub fn derivative_gap(h: &dyn Conjugacy, step: f64) -> Result<f64> {
    let (l, r) = one_sided_derivatives(h, 0.0, step)?;
    Ok((l - r).abs())
}

fn invert_increasing(h: &dyn Conjugacy, y: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (ylo, yhi) = (h.eval(lo)?, h.eval(hi)?);
    if !(ylo <= y && y <= yhi) {
        return Err(BcnfError::InverseUnbracketed { target: y, side: "conjugacy" });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h.eval(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Derivative of `h o F o h^{-1}` at `h(x_star)`, where `F` fixes `x_star`.
pub fn transported_multiplier(h: &dyn Conjugacy, map: &dyn Fn(f64) -> f64, x_star: f64) -> Result<f64> {
    let iv = h.domain().into_iter().find(|i| i.contains(x_star)).ok_or(BcnfError::AnchorOutsideDomain(x_star))?;
    let room = 0.25 * (x_star - iv.lo).min(iv.hi - x_star);
    let (lo, hi) = (x_star - room, x_star + room);
    let y_star = h.eval(x_star)?;
    let s = 1e-4 * (h.eval(hi)? - h.eval(lo)?);
    let conj = |y: f64| -> Result<f64> { h.eval(map(invert_increasing(h, y, lo, hi)?)) };
    let d = |s: f64| -> Result<f64> { Ok((conj(y_star + s)? - conj(y_star - s)?) / (2.0 * s)) };
    Ok((4.0 * d(0.5 * s)? - d(s)?) / 3.0)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Witness {
    pub x: f64,
    pub n: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub which: &'static str,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundReport {
    pub checked: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
    pub k: f64,
    pub r: f64,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
}

impl BoundReport {
    fn new(k: f64, r: f64) -> Self {
        BoundReport { checked: 0, violations: 0, witnesses: Vec::new(), k, r, worst_ratio: 0.0 }
    }

    fn record(&mut self, x: f64, n: Option<usize>, lhs: f64, rhs: f64, slack: f64, which: &'static str) {
        self.checked += 1;
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
        if lhs > rhs + slack {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(Witness { x, n, lhs, rhs, which });
            }
        }
    }
}

/// Dense estimate of `max |p''|` on `[lo, hi]`.
pub fn second_derivative_bound(p: &Poly1, lo: f64, hi: f64) -> f64 {
    let d2 = p.nth_derivative(2);
    (0..=K_SAMPLES).map(|k| d2.eval(lo + (hi - lo) * k as f64 / K_SAMPLES as f64).abs()).fold(0.0, f64::max)
}

fn resolve_k(measured: f64, given: Option<f64>) -> Result<f64> {
    match given {
        Some(k) if measured > k * (1.0 + 1e-12) => {
            Err(BcnfError::HypothesisViolation(format!("|f''| reaches {measured}, above K = {k}")))
        }
        Some(k) if !(k > 0.0) => Err(BcnfError::HypothesisViolation(format!("K = {k} must be positive"))),
        Some(k) => Ok(k),
        None => Ok((1.01 * measured).max(f64::MIN_POSITIVE)),
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(BcnfError::HypothesisViolation(format!("lambda = {lambda} is not in (0, 1)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixGrid {
    /// Grid covers `(-radius, radius)`.
    pub radius: f64,
    pub points: usize,
    pub n_max: usize,
}

/// Checks the iterate bounds for a map `f` with `f(0) = 0`, `f'(0) = lambda`.
/// `r_scale` multiplies `r` inside the inequalities only, for controls.
pub fn check_appendix_bounds(
    f: &Poly1,
    lambda: f64,
    k: Option<f64>,
    grid: &AppendixGrid,
    r_scale: f64,
) -> Result<BoundReport> {
    check_lambda(lambda)?;
    let (a, b) = (-grid.radius, grid.radius);
    if f.eval(0.0).abs() > 1e-14 || (f.coeff(1) - lambda).abs() > 1e-12 * lambda {
        return Err(BcnfError::HypothesisViolation("0 must be a fixed point with multiplier lambda".into()));
    }
    let df = f.derivative();
    if (0..=K_SAMPLES).any(|i| df.eval(a + (b - a) * i as f64 / K_SAMPLES as f64) <= 0.0) {
        return Err(BcnfError::HypothesisViolation("f' must be positive on the grid interval".into()));
    }
    let k = resolve_k(second_derivative_bound(f, a, b), k)?;
    let r = lambda * (1.0 - lambda) / (10.0 * k);
    if grid.radius > r {
        return Err(BcnfError::HypothesisViolation(format!("grid radius {} exceeds r = {r}", grid.radius)));
    }
    let rc = r * r_scale;
    let mut rep = BoundReport::new(k, r);
    let us: Vec<f64> = (0..grid.points).map(|i| a + (b - a) * (i as f64 + 0.5) / grid.points as f64).collect();
    for &u in &us {
        let mut x = u;
        let mut ln = 1.0;
        for n in 0..=grid.n_max {
            let lin = ln * u;
            let slack = 4.0 * (n + 1) as f64 * f64::EPSILON * x.abs().max(lin.abs());
            rep.record(u, Some(n), (x - lin).abs(), (1.0 - ln) * ln * u * u / (5.0 * rc), slack, "forward");
            x = f.eval(x);
            ln *= lambda;
        }
    }
    let (fa, fb) = (f.eval(a), f.eval(b));
    for &v in &us {
        let mut w = v;
        let mut ln = 1.0;
        for n in 0..=grid.n_max {
            let lin = v / ln;
            let slack = 4.0 * (n + 1) as f64 * f64::EPSILON * w.abs().max(lin.abs());
            rep.record(v, Some(n), (w - lin).abs(), 2.0 * (1.0 - ln) * v * v / (5.0 * ln * ln * rc), slack, "inverse");
            if !(fa < w && w < fb) {
                break;
            }
            let target = w;
            let tol = 64.0 * f64::EPSILON * target.abs().max(1e-300);
            w = safeguarded_newton(
                |x| {
                    let (p, d) = f.eval_d1(x);
                    (p - target, d)
                },
                a,
                b,
                Some(target / lambda),
                tol,
            )?;
            ln *= lambda;
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiConfig {
    pub x_star: f64,
    pub y_star: f64,
    pub a: f64,
    pub b: f64,
    pub k: Option<f64>,
    pub samples: usize,
}

/// Checks the difference-quotient bound for `h` matching `x_star -> y_star` and `b -> h(b)`.
pub fn check_chi_bound(f: &Poly1, g: &Poly1, h: &dyn Fn(f64) -> Result<f64>, cfg: &ChiConfig) -> Result<BoundReport> {
    let ChiConfig { x_star, y_star, a, b, .. } = *cfg;
    if !(a < x_star && x_star < b) {
        return Err(BcnfError::HypothesisViolation("x_star must lie inside (a, b)".into()));
    }
    let lambda = f.derivative().eval(x_star);
    check_lambda(lambda)?;
    let mu_g = g.derivative().eval(y_star);
    if (mu_g - lambda).abs() > 1e-9 {
        return Err(BcnfError::HypothesisViolation(format!("multipliers differ: {lambda} and {mu_g}")));
    }
    if (f.eval(x_star) - x_star).abs() > 1e-13 || (g.eval(y_star) - y_star).abs() > 1e-13 {
        return Err(BcnfError::HypothesisViolation("x_star and y_star must be fixed points".into()));
    }
    let (c, d) = (h(a)?, h(b)?);
    let measured = second_derivative_bound(f, a, b).max(second_derivative_bound(g, c, d));
    let k = resolve_k(measured, cfg.k)?;
    let r = lambda * (1.0 - lambda) / (10.0 * k);
    if (x_star - a).max(b - x_star) > r {
        return Err(BcnfError::HypothesisViolation(format!(
            "interval radius {} exceeds r = {r}",
            (x_star - a).max(b - x_star)
        )));
    }
    let chi = (d - y_star) / (b - x_star);
    if chi > 1.5 {
        return Err(BcnfError::HypothesisViolation(format!("chi = {chi} exceeds 3/2")));
    }
    let mut rep = BoundReport::new(k, r);
    for i in 0..cfg.samples {
        let x = a + (b - a) * (i as f64 + 0.5) / cfg.samples as f64;
        if x == x_star {
            continue;
        }
        let lhs = ((h(x)? - y_star) / (x - x_star) - chi).abs();
        let rhs = 1.5 / r * (4.0 * (x - x_star).abs() + b - x_star);
        rep.record(x, None, lhs, rhs, 1e-12 / (x - x_star).abs(), "chi");
    }
    Ok(rep)
}

/// A quadratic pair `f = lambda x + c_f x^2`, `g = lambda y + c_g y^2` with the
/// conjugacy through their Koenigs charts that sends `b` to `chi b`.
#[derive(Debug, Clone)]
pub struct ChiTriple {
    pub f: Poly1,
    pub g: Poly1,
    pub h: ChartPair,
    pub cfg: ChiConfig,
}

impl ChiTriple {
    pub fn check(&self) -> Result<BoundReport> {
        check_chi_bound(&self.f, &self.g, &|x| self.h.eval(x), &self.cfg)
    }
}

/// `radius_frac` is the interval radius as a fraction of `r`.
pub fn chi_triple(lambda: f64, c_f: f64, c_g: f64, chi: f64, radius_frac: f64, samples: usize) -> Result<ChiTriple> {
    check_lambda(lambda)?;
    let f = Poly1::new(vec![0.0, lambda, c_f]);
    let g = Poly1::new(vec![0.0, lambda, c_g]);
    let k = 2.0 * c_f.abs().max(c_g.abs()).max(1e-3);
    let r = lambda * (1.0 - lambda) / (10.0 * k);
    let b = radius_frac * r;
    let cf = build_seed_chart(&f, 0.0, lambda)?;
    let cg = build_seed_chart(&g, 0.0, lambda)?;
    let h = match_endpoints(&cf, &cg, b, chi * b)?;
    let cfg = ChiConfig { x_star: 0.0, y_star: 0.0, a: -b, b, k: Some(k), samples };
    Ok(ChiTriple { f, g, h, cfg })
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct NeighborhoodReport {
    pub q_minus: f64,
    pub q_plus: f64,
    pub ratio_minus: f64,
    pub ratio_plus: f64,
    pub delta: f64,
    pub pass: bool,
}

/// Polynomial extrapolation of samples `(s_k, v_k)` to `s = 0`.
fn neville_at_zero(s: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (s[i + m] * p[i] - s[i] * p[i + 1]) / (s[i + m] - s[i]);
        }
    }
    p[0]
}

/// One-sided limit of `h` at the end `x_end`, approached from `dir`.
fn endpoint_limit(h: &dyn Conjugacy, x_end: f64, dir: f64, scale: f64) -> Result<f64> {
    let s: Vec<f64> = (0..5).map(|k| 1e-3 * scale * 0.5f64.powi(k)).collect();
    let v = s.iter().map(|&e| h.eval(x_end + dir * e)).collect::<Result<Vec<_>>>()?;
    Ok(neville_at_zero(&s, &v))
}

pub fn check_neighborhood_ratio(h: &dyn Conjugacy, p: f64, delta: f64) -> Result<NeighborhoodReport> {
    let dom = h.domain();
    let lo = dom.iter().map(|i| i.lo).fold(f64::INFINITY, f64::min);
    let hi = dom.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * p;
    if lo > -p + tol || hi < p - tol {
        return Err(BcnfError::DomainTooSmall(format!("domain ({lo}, {hi}) does not reach (-{p}, {p})")));
    }
    let q_minus = endpoint_limit(h, -p, 1.0, p)?;
    let q_plus = endpoint_limit(h, p, -1.0, p)?;
    let (ratio_minus, ratio_plus) = (q_minus.abs() / p, q_plus.abs() / p);
    let inside = |r: f64| (1.0 - delta) < r && r < 1.0 + delta;
    Ok(NeighborhoodReport {
        q_minus,
        q_plus,
        ratio_minus,
        ratio_plus,
        delta,
        pass: inside(ratio_minus) && inside(ratio_plus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    /// Not hyperbolic, or stable from one side only.
    Marginal,
}

fn stability_of(multipliers: &[f64]) -> Stability {
    if multipliers.iter().all(|m| m.abs() < 1.0) {
        Stability::Stable
    } else if multipliers.iter().all(|m| m.abs() > 1.0) {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FixedPointCensus {
    pub locations: Vec<f64>,
    pub multipliers: Vec<Vec<f64>>,
    pub stability: Vec<Stability>,
}

impl FixedPointCensus {
    pub fn count(&self) -> usize {
        self.locations.len()
    }

    pub fn stable_count(&self) -> usize {
        self.stability.iter().filter(|s| **s == Stability::Stable).count()
    }

    fn pattern(&self) -> Vec<Stability> {
        let mut idx: Vec<usize> = (0..self.count()).collect();
        idx.sort_by(|&i, &j| self.locations[i].total_cmp(&self.locations[j]));
        idx.into_iter().map(|i| self.stability[i]).collect()
    }
}

fn census_piecewise(points: Vec<(f64, Vec<f64>)>) -> FixedPointCensus {
    let mut c = FixedPointCensus { locations: vec![], multipliers: vec![], stability: vec![] };
    for (x, m) in points {
        c.stability.push(stability_of(&m));
        c.locations.push(x);
        c.multipliers.push(m);
    }
    c
}

fn census_of_map(map: &PiecewiseMap, mu: f64) -> Result<FixedPointCensus> {
    if mu == 0.0 {
        let l = map.left().at_mu(0.0).coeff(1);
        let r = map.right().at_mu(0.0).coeff(1);
        return Ok(census_piecewise(vec![(0.0, vec![l, r])]));
    }
    let mut pts = Vec::new();
    for side in [Side::Left, Side::Right] {
        let fp = find_fixed_point(map, mu, side)?;
        if fp.admissible {
            pts.push((fp.location, vec![fp.multiplier]));
        }
    }
    Ok(census_piecewise(pts))
}

fn census_of_linear(nu: f64, s_l: f64, s_r: f64) -> FixedPointCensus {
    if nu == 0.0 {
        return census_piecewise(vec![(0.0, vec![s_l, s_r])]);
    }
    let mut pts = Vec::new();
    for (s, side) in [(s_l, Side::Left), (s_r, Side::Right)] {
        let x = nu / (1.0 - s);
        if side.holds(x) {
            pts.push((x, vec![s]));
        }
    }
    census_piecewise(pts)
}

fn census_of_quadratic(nu: f64) -> FixedPointCensus {
    // nu + y - y^2 = y
    if nu < 0.0 {
        census_piecewise(vec![])
    } else if nu == 0.0 {
        census_piecewise(vec![(0.0, vec![1.0])])
    } else {
        let r = nu.sqrt();
        census_piecewise(vec![(-r, vec![1.0 + 2.0 * r]), (r, vec![1.0 - 2.0 * r])])
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SlopeFreedomRow {
    pub mu: f64,
    pub map: FixedPointCensus,
    pub piecewise_linear: FixedPointCensus,
    pub quadratic: FixedPointCensus,
    pub counts_agree: bool,
    pub multipliers_differ: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SlopeFreedomReport {
    pub free_slopes: (f64, f64),
    pub rows: Vec<SlopeFreedomRow>,
    pub counts_agree: bool,
    pub multipliers_differ: bool,
}

fn same_multipliers(a: &FixedPointCensus, b: &FixedPointCensus) -> bool {
    let flat = |c: &FixedPointCensus| {
        let mut v: Vec<f64> = c.multipliers.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (x, y) = (flat(a), flat(b));
    x.len() == y.len() && x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= 1e-9)
}

/// Compares fixed points of `map`, of the piecewise-linear map with free slopes
/// and of the quadratic saddle-node map, all with `nu = beta mu`.
pub fn slope_freedom_report(
    map: &PiecewiseMap,
    free_slopes: (f64, f64),
    mu_grid: &[f64],
) -> Result<SlopeFreedomReport> {
    let data = crate::map_core::extract_bifurcation_data(map)?;
    if !(data.a_r > 0.0 && data.a_r < 1.0 && data.a_l > 1.0) {
        return Err(BcnfError::PreconditionViolation(format!(
            "needs 0 < a_R < 1 < a_L, got ({}, {})",
            data.a_l, data.a_r
        )));
    }
    let (s_l, s_r) = free_slopes;
    if !(s_r > 0.0 && s_r < 1.0 && s_l > 1.0) {
        return Err(BcnfError::PreconditionViolation(format!("free slopes ({s_l}, {s_r}) need 0 < s_R < 1 < s_L")));
    }
    let mut rows = Vec::new();
    for &mu in mu_grid {
        let nu = data.beta * mu;
        let m = census_of_map(map, mu)?;
        let l = census_of_linear(nu, s_l, s_r);
        let q = census_of_quadratic(nu);
        let counts_agree = m.count() == l.count()
            && l.count() == q.count()
            && m.pattern() == l.pattern()
            && l.pattern() == q.pattern();
        let multipliers_differ = !same_multipliers(&m, &l) && !same_multipliers(&m, &q) && !same_multipliers(&l, &q);
        rows.push(SlopeFreedomRow { mu, map: m, piecewise_linear: l, quadratic: q, counts_agree, multipliers_differ });
    }
    Ok(SlopeFreedomReport {
        free_slopes,
        counts_agree: rows.iter().all(|r| r.counts_agree),
        multipliers_differ: rows.iter().any(|r| r.multipliers_differ),
        rows,
    })
}

#[derive(Debug, Clone, Serialize, PartialEq, Default)]
pub struct BoundChecks {
    pub appendix: Option<BoundReport>,
    pub chi: Option<BoundReport>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerificationReport {
    pub residual_sup: f64,
    pub derivative_gap: Option<f64>,
    pub multiplier_gaps: Vec<f64>,
    pub transport_gaps: Vec<f64>,
    pub h_at_zero: Option<f64>,
    pub h_prime_at_zero: Option<f64>,
    pub monotone: bool,
    pub bound_checks: BoundChecks,
    /// Reported only; the ratio bound holds for small enough `p`, not for every `p`.
    pub neighborhood: Option<NeighborhoodReport>,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub delta: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: 1000, delta: 0.1, seed: 0 }
    }
}

fn fixed_point_gaps(f: &PiecewiseMap, g: &NormalFormMap, mu: f64) -> Result<Vec<(Side, f64, f64, f64)>> {
    let mut out = Vec::new();
    for side in [Side::Left, Side::Right] {
        let fp = find_fixed_point(f, mu, side)?;
        if !fp.admissible || fp.location.abs() >= f.half_width() {
            continue;
        }
        let gp = normal_form_fixed_point(&g.params, side)?;
        out.push((side, fp.location, fp.multiplier, gp.multiplier));
    }
    Ok(out)
}

/// Runs every applicable check on conjugacies built for `f`, `g` at `mu`.
pub fn verify(
    f: &PiecewiseMap,
    g: &NormalFormMap,
    mu: f64,
    hs: &[ConjugacyMap],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let p = f.half_width();
    let fz = FrozenMap::from_map(f, mu, 4.0 * p);
    let gz = FrozenMap::from_normal_form(g, 4.0 * p);
    let fe = |x: f64| fz.eval(x);
    let ge = |y: f64| gz.eval(y);
    let mut failures = Vec::new();
    let mut residual_sup: f64 = 0.0;
    let mut monotone = true;
    let mut gap: Option<f64> = None;
    let mut h0: Option<f64> = None;
    let mut h_prime0: Option<f64> = None;
    let mut neighborhood = None;
    for (k, h) in hs.iter().enumerate() {
        let xs = random_samples(h.domain(), opts.samples, opts.seed.wrapping_add(k as u64));
        residual_sup = residual_sup.max(residual_at(&fe, &ge, h, &xs)?);
        monotone &= is_increasing(h, &xs)?;
        if h.in_domain(0.0) {
            let v = h.eval(0.0)?;
            h0 = Some(h0.map_or(v.abs(), |a: f64| a.max(v.abs())));
            let (l, r) = one_sided_derivatives(h, 0.0, 1e-5)?;
            gap = Some(gap.map_or((l - r).abs(), |a: f64| a.max((l - r).abs())));
            if mu == 0.0 {
                h_prime0 = Some(0.5 * (l + r));
            }
        }
        if neighborhood.is_none() {
            neighborhood = check_neighborhood_ratio(h, p, opts.delta).ok();
        }
    }
    if residual_sup > TOL_CONJ {
        failures.push(format!("residual {residual_sup:e} > {TOL_CONJ:e}"));
    }
    if !monotone {
        failures.push("conjugacy not increasing".into());
    }
    if let Some(v) = h0.filter(|v| *v > TOL_SWITCH) {
        failures.push(format!("|h(0)| = {v:e}"));
    }
    if let Some(v) = gap.filter(|v| *v > TOL_GAP) {
        failures.push(format!("derivative gap at 0 = {v:e}"));
    }
    if let Some(v) = h_prime0.filter(|v| (v - 1.0).abs() > TOL_GAP) {
        failures.push(format!("h'(0) = {v}"));
    }

    let mut multiplier_gaps = Vec::new();
    let mut transport_gaps = Vec::new();
    let mut bound_checks = BoundChecks::default();
    if mu == 0.0 {
        multiplier_gaps.push((f.left().at_mu(0.0).coeff(1) - g.params.s_l).abs());
        multiplier_gaps.push((f.right().at_mu(0.0).coeff(1) - g.params.s_r).abs());
    } else {
        for (side, x, lf, lg) in fixed_point_gaps(f, g, mu)? {
            multiplier_gaps.push((lf - lg).abs());
            if let Some(h) = hs.iter().find(|h| h.in_domain(x)) {
                let t = transported_multiplier(h, &fe, x)?;
                transport_gaps.push((t - gz.deriv(h.eval(x)?, side)).abs());
                if lf > 0.0 && lf < 1.0 {
                    bound_checks = local_bounds(&fz, &gz, h, side, x, lf)?;
                }
            }
        }
        if g.params.nu > 0.0
            && crate::region_classifier::is_period_doubling(f.left().coeff(1, 0), f.right().coeff(1, 0))
        {
            if let (Ok(c), Ok(gc)) = (find_period_two(f, mu), normal_form_cycle(&g.params)) {
                multiplier_gaps.push((c.multiplier - gc.multiplier).abs());
                if let Some(h) = hs.iter().find(|h| h.in_domain(c.u_l)) {
                    let f2 = |x: f64| fz.eval(fz.eval(x));
                    let t = transported_multiplier(h, &f2, c.u_l)?;
                    transport_gaps.push((t - gc.multiplier).abs());
                }
            }
        }
    }
    if let Some(v) = multiplier_gaps.iter().copied().find(|v| *v > TOL_MULTIPLIER) {
        failures.push(format!("multiplier gap {v:e}"));
    }
    if let Some(v) = transport_gaps.iter().copied().find(|v| *v > TOL_TRANSPORT) {
        failures.push(format!("multiplier transport gap {v:e}"));
    }
    for (name, rep) in [("appendix", &bound_checks.appendix), ("chi", &bound_checks.chi)] {
        if let Some(r) = rep.as_ref().filter(|r| r.violations > 0) {
            failures.push(format!("{name} bound: {} violations", r.violations));
        }
    }
    Ok(VerificationReport {
        residual_sup,
        derivative_gap: gap,
        multiplier_gaps,
        transport_gaps,
        h_at_zero: h0,
        h_prime_at_zero: h_prime0,
        monotone,
        bound_checks,
        neighborhood,
        pass: failures.is_empty(),
        failures,
    })
}

/// Bound checks on the side piece around an attracting fixed point, shrunk to radius `r`.
fn local_bounds(
    fz: &FrozenMap,
    gz: &FrozenMap,
    h: &ConjugacyMap,
    side: Side,
    x: f64,
    lambda: f64,
) -> Result<BoundChecks> {
    let fp = fz.piece(side);
    let gp = gz.piece(side);
    let y = h.eval(x)?;
    let span = 0.5 * x.abs().min(y.abs());
    let k = 1.01 * second_derivative_bound(fp, x - span, x + span).max(second_derivative_bound(gp, y - span, y + span));
    let r = lambda * (1.0 - lambda) / (10.0 * k.max(f64::MIN_POSITIVE));
    let iv = h.domain().iter().copied().find(|i| i.contains(x)).unwrap_or(Interval::new(x, x));
    let rad = 0.5 * r.min(span).min(x - iv.lo).min(iv.hi - x);
    if !(rad > 0.0) {
        return Ok(BoundChecks::default());
    }
    let shifted = {
        let mut s = fp.shift(x);
        s.coeffs[0] = 0.0;
        Poly1::new(s.coeffs)
    };
    let appendix =
        check_appendix_bounds(&shifted, lambda, None, &AppendixGrid { radius: rad, points: 200, n_max: 40 }, 1.0).ok();
    let cfg = ChiConfig { x_star: x, y_star: y, a: x - rad, b: x + rad, k: None, samples: 1000 };
    let chi = check_chi_bound(fp, gp, &|t| h.eval(t), &cfg).ok();
    Ok(BoundChecks { appendix, chi })
}
