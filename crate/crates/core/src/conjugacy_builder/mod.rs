//! Differentiable conjugacies `h` with `h(f(x)) = g(h(x))`.
//!
//! A conjugacy is a seed (linearising charts near a hyperbolic invariant set,
//! or an explicit fundamental-domain function) plus a transport rule. To
//! evaluate `h(x)` the point is moved by `f` or by branch inverses of `f`
//! until it reaches the seed; the recorded itinerary is then unwound with
//! the same-side branches of `g`.

mod cases;
pub mod chart;
pub mod frozen;
pub mod jump;

use serde::Serialize;

pub use cases::build_conjugacy;
pub use chart::{SeedChart, Window, N_MAX, TOL_SEED};
pub use frozen::{BranchPolicy, FrozenMap};
pub use jump::{build_jump_function, JumpFunction, JumpKind, Knot};

use crate::error::{BcnfError, Result};
use crate::map_core::Side;
use crate::poly::Poly1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    OneFixedPointIncreasing,
    OneFixedPointDecreasing,
    OneFixedPointMixedIncreasingSide,
    OneFixedPointMixedDecreasingSide,
    TwoFixedPointsMonotone,
    TwoFixedPointsNonMonotone,
    NoFixedPointsMonotone,
    NoFixedPointsNonMonotone,
    FixedPointAndTwoCycle,
    FixedPointAtSwitch,
    /// Built directly through `extend_outward`.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Seed chart of `f` and of `g`, glued by `h = psi_g(kappa phi_f(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPair {
    pub f: SeedChart,
    pub g: SeedChart,
    pub kappa: f64,
}

impl ChartPair {
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.g.psi(self.kappa * self.f.phi(x)?)
    }
}

/// Composes two charts with the linear factor that sends `anchor` to `image`.
pub fn match_endpoints(h1: &SeedChart, h2: &SeedChart, anchor: f64, image: f64) -> Result<ChartPair> {
    if !h1.contains(anchor) {
        return Err(BcnfError::AnchorOutsideDomain(anchor));
    }
    if !h2.contains(image) {
        return Err(BcnfError::AnchorOutsideDomain(image));
    }
    let a = h1.phi(anchor)?;
    let b = h2.phi(image)?;
    let kappa = if a == 0.0 {
        if b != 0.0 {
            return Err(BcnfError::PreconditionViolation("fixed point must map to fixed point".into()));
        }
        1.0
    } else {
        b / a
    };
    if !(kappa > 0.0) {
        return Err(BcnfError::ItineraryMismatch {
            x: anchor,
            y: image,
            detail: "anchor and image on opposite sides of the fixed points",
        });
    }
    Ok(ChartPair { f: h1.clone(), g: h2.clone(), kappa })
}

/// Fundamental-domain seed for maps without fixed points near 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSeed {
    pub(crate) z: f64,
    pub(crate) fz: f64,
    pub(crate) nu: f64,
    pub(crate) jump: JumpFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Seed {
    Charts(Vec<ChartPair>),
    Fundamental(FundamentalSeed),
    /// `h(x) = slope * x` on `[lo, hi]`.
    Linear {
        lo: f64,
        hi: f64,
        slope: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// `h = g_s^{-1} o h o f`
    PullBack,
    /// `h = g o h o f_s^{-1}`
    PushForward(BranchPolicy),
    /// Pull back for `x > 0`, push forward otherwise.
    PullAbovePushBelow(BranchPolicy),
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Pull(Side),
    Push(Side),
}

const MAX_TRANSPORT: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyMap {
    construction: Construction,
    domain: Vec<Interval>,
    range: Vec<Interval>,
    f: FrozenMap,
    g: FrozenMap,
    seed: Seed,
    rule: Rule,
    y_limit: f64,
}

impl ConjugacyMap {
    pub fn new(
        construction: Construction,
        domain: Vec<Interval>,
        f: FrozenMap,
        g: FrozenMap,
        seed: Seed,
        rule: Rule,
        y_limit: f64,
    ) -> Self {
        let range = domain.iter().map(|_| Interval::new(f64::NAN, f64::NAN)).collect();
        ConjugacyMap { construction, domain, range, f, g, seed, rule, y_limit }
    }

    pub(crate) fn with_range(mut self, range: Vec<Interval>) -> Self {
        self.range = range;
        self
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn range(&self) -> &[Interval] {
        &self.range
    }

    pub fn f(&self) -> &FrozenMap {
        &self.f
    }

    pub fn g(&self) -> &FrozenMap {
        &self.g
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn in_domain(&self, x: f64) -> bool {
        self.domain.iter().any(|i| i.contains(x))
    }

    pub fn interval_of(&self, x: f64) -> Option<usize> {
        self.domain.iter().position(|i| i.contains(x))
    }

    fn seed_contains(&self, x: f64) -> bool {
        match &self.seed {
            Seed::Charts(pairs) => pairs.iter().any(|c| c.f.contains(x)),
            Seed::Fundamental(s) => s.fz < x && x <= 0.0,
            Seed::Linear { lo, hi, .. } => *lo <= x && x <= *hi,
        }
    }

    fn seed_eval(&self, x: f64) -> Result<f64> {
        match &self.seed {
            Seed::Charts(pairs) => {
                pairs.iter().find(|c| c.f.contains(x)).ok_or(BcnfError::AnchorOutsideDomain(x))?.eval(x)
            }
            Seed::Fundamental(s) => {
                if x > s.z {
                    Ok(x)
                } else if x >= s.nu {
                    Ok(s.jump.eval(x))
                } else {
                    let w = self.f.inverse(x, Side::Left)?;
                    Ok(self.g.piece(Side::Left).eval(w))
                }
            }
            Seed::Linear { slope, .. } => Ok(slope * x),
        }
    }

    fn step_at(&self, x: f64) -> Result<(Step, f64)> {
        let policy = match self.rule {
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
        match policy {
            None => Ok((Step::Pull(Side::of(x)), self.f.eval(x))),
            Some(p) => {
                let (s, w) = self.f.preimage(x, p).map_err(|e| with_x(e, x))?;
                Ok((Step::Push(s), w))
            }
        }
    }

    /// `h(x)`.
    pub fn eval(&self, x0: f64) -> Result<f64> {
        let mut x = x0;
        let mut stack = Vec::new();
        let mut reached = false;
        for _ in 0..MAX_TRANSPORT {
            if self.seed_contains(x) {
                reached = true;
                break;
            }
            let (step, next) = self.step_at(x)?;
            stack.push(step);
            x = next;
            if !x.is_finite() {
                break;
            }
        }
        if !reached {
            return Err(BcnfError::NoConvergence { what: "itinerary transport", iterations: MAX_TRANSPORT });
        }
        let mut y = self.seed_eval(x)?;
        self.check_range(y)?;
        for step in stack.iter().rev() {
            y = match *step {
                Step::Pull(s) => self.g.inverse(y, s).map_err(|e| with_x(e, x0))?,
                Step::Push(s) => {
                    if !s.holds(y) && y.abs() > 1e-13 * self.y_limit {
                        return Err(BcnfError::ItineraryMismatch { x: x0, y, detail: "g iterate on the wrong side" });
                    }
                    self.g.piece(s).eval(y)
                }
            };
            self.check_range(y)?;
        }
        Ok(y)
    }

    fn check_range(&self, y: f64) -> Result<()> {
        if y.abs() > self.y_limit || !y.is_finite() {
            Err(BcnfError::EscapedWorkingRange { y, limit: self.y_limit })
        } else {
            Ok(())
        }
    }

    /// `h'(x)` by Richardson-refined central differences, kept inside the domain interval.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let span = self.interval_of(x).map(|k| self.domain[k]).unwrap_or(Interval::new(x - 1.0, x + 1.0));
        let mut s = 1e-5 * span.width().min(1.0);
        let room = 0.5 * (x - span.lo).min(span.hi - x);
        if room > 0.0 {
            s = s.min(room);
        }
        let d = |h: f64| -> Result<f64> { Ok((self.eval(x + h)? - self.eval(x - h)?) / (2.0 * h)) };
        let d1 = d(s)?;
        let d2 = d(0.5 * s)?;
        Ok((4.0 * d2 - d1) / 3.0)
    }
}

/// Anything that can be evaluated as a candidate conjugacy.
pub trait Conjugacy {
    fn eval(&self, x: f64) -> Result<f64>;
    fn domain(&self) -> Vec<Interval>;
}

impl Conjugacy for ConjugacyMap {
    fn eval(&self, x: f64) -> Result<f64> {
        ConjugacyMap::eval(self, x)
    }

    fn domain(&self) -> Vec<Interval> {
        self.domain.clone()
    }
}

/// A closed-form candidate, used for controls and synthetic checks.
pub struct FnConjugacy<F> {
    pub func: F,
    pub domain: Vec<Interval>,
}

impl<F: Fn(f64) -> f64> Conjugacy for FnConjugacy<F> {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok((self.func)(x))
    }

    fn domain(&self) -> Vec<Interval> {
        self.domain.clone()
    }
}

fn with_x(e: BcnfError, x: f64) -> BcnfError {
    match e {
        BcnfError::ItineraryMismatch { y, detail, .. } => BcnfError::ItineraryMismatch { x, y, detail },
        other => other,
    }
}

/// Wraps a seed and a transport rule into a conjugacy on `target`, checking that
/// every probe point of `target` can be evaluated.
pub fn extend_outward(
    seed: Seed,
    f: FrozenMap,
    g: FrozenMap,
    rule: Rule,
    target: Interval,
    y_limit: f64,
) -> Result<ConjugacyMap> {
    let h = ConjugacyMap::new(Construction::Custom, vec![target], f, g, seed, rule, y_limit);
    let n = 16;
    let mut probes = Vec::with_capacity(n - 1);
    for k in 1..n {
        let x = target.lo + target.width() * k as f64 / n as f64;
        probes.push(h.eval(x)?);
    }
    if probes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BcnfError::ItineraryMismatch { x: target.lo, y: probes[0], detail: "extension is not increasing" });
    }
    let lo = h.eval(target.lo).unwrap_or(f64::NAN);
    let hi = h.eval(target.hi).unwrap_or(f64::NAN);
    Ok(h.with_range(vec![Interval::new(lo, hi)]))
}

/// Shifted branch polynomial for a word of sides applied left to right.
pub(crate) fn branch_word(f: &FrozenMap, word: &[Side]) -> Poly1 {
    let mut acc = Poly1::new(vec![0.0, 1.0]);
    for &s in word {
        acc = f.piece(s).compose(&acc);
    }
    acc
}

pub fn build_seed_chart(branch: &Poly1, x_star: f64, lambda: f64) -> Result<SeedChart> {
    if lambda == 0.0 || (lambda.abs() - 1.0).abs() < 1e-6 {
        return Err(BcnfError::NonHyperbolic(lambda));
    }
    let radius = if x_star == 0.0 { f64::INFINITY } else { 0.5 * x_star.abs() };
    let chart = SeedChart::new(branch, x_star, Window::Ball { radius })?;
    if (chart.multiplier() - lambda).abs() > 1e-8 * lambda.abs() {
        return Err(BcnfError::PreconditionViolation(format!(
            "stated multiplier {lambda} differs from the branch derivative {}",
            chart.multiplier()
        )));
    }
    Ok(chart)
}
