//! Piecewise-smooth maps with polynomial pieces in `(x, mu)`.

use serde::{Deserialize, Serialize};

use crate::error::{BcnfError, Result};
use crate::poly::Poly1;
use crate::roots::{safeguarded_newton, TOL_ROOT};

pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_HALF_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn of(x: f64) -> Side {
        if x <= 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    /// Whether `x` lies on this side, counting 0 as both.
    pub fn holds(self, x: f64) -> bool {
        match self {
            Side::Left => x <= 0.0,
            Side::Right => x >= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideSel {
    Left,
    Right,
    Auto,
}

/// Bivariate polynomial `sum c[i][j] x^i mu^j` with `i + j <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothPiece {
    degree: usize,
    c: Vec<Vec<f64>>,
}

impl SmoothPiece {
    /// Builds a piece from `(x_power, mu_power, value)` triples; repeated entries add.
    pub fn new(degree: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        if degree < DEFAULT_DEGREE {
            return Err(BcnfError::InvalidConfig(format!("degree {degree} < 3")));
        }
        let mut c = vec![vec![0.0; degree + 1]; degree + 1];
        for &(i, j, v) in terms {
            if i + j > degree {
                return Err(BcnfError::InvalidConfig(format!("term x^{i} mu^{j} exceeds total degree {degree}")));
            }
            if !v.is_finite() {
                return Err(BcnfError::InvalidConfig(format!("non-finite coefficient for x^{i} mu^{j}")));
            }
            c[i][j] += v;
        }
        Ok(SmoothPiece { degree, c })
    }

    /// Degree is the larger of 3 and the highest total degree present.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Result<Self> {
        let d = terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0).max(DEFAULT_DEGREE);
        Self::new(d, terms)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// The univariate polynomial in `x` at fixed `mu`.
    pub fn at_mu(&self, mu: f64) -> Poly1 {
        Poly1::new(self.c.iter().map(|row| row.iter().rev().fold(0.0, |acc, &v| acc * mu + v)).collect())
    }

    pub fn eval(&self, x: f64, mu: f64) -> f64 {
        self.at_mu(mu).eval(x)
    }

    pub fn deriv(&self, x: f64, mu: f64, order: usize) -> f64 {
        self.at_mu(mu).nth_derivative(order).eval(x)
    }

    /// Piece of the reflected map `x -> -P(-x; -mu)`.
    pub fn reflected(&self) -> SmoothPiece {
        let mut c = self.c.clone();
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let sign = if (i + j) % 2 == 0 { -1.0 } else { 1.0 };
                *v *= sign;
            }
        }
        SmoothPiece { degree: self.degree, c }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMap {
    left: SmoothPiece,
    right: SmoothPiece,
    p: f64,
    mu_range: (f64, f64),
}

impl PiecewiseMap {
    pub fn new(left: SmoothPiece, right: SmoothPiece, p: f64, mu_range: (f64, f64)) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(BcnfError::InvalidConfig(format!("half-width p = {p} must be positive")));
        }
        if !(mu_range.0 <= 0.0 && 0.0 <= mu_range.1) {
            return Err(BcnfError::InvalidConfig("mu_range must contain 0".into()));
        }
        let d = left.degree.max(right.degree);
        for j in 0..=d {
            let (l, r) = (left.coeff(0, j), right.coeff(0, j));
            if l != r {
                return Err(BcnfError::ContinuityViolation { power: j, left: l, right: r });
            }
        }
        let f00 = left.coeff(0, 0);
        if f00 != 0.0 {
            return Err(BcnfError::BorderCollisionViolation(f00));
        }
        Ok(PiecewiseMap { left, right, p, mu_range })
    }

    /// Skips the continuity and border-collision checks; `extract_bifurcation_data`
    /// still rejects inconsistent unfolding terms.
    pub fn new_unchecked(left: SmoothPiece, right: SmoothPiece, p: f64, mu_range: (f64, f64)) -> Self {
        PiecewiseMap { left, right, p, mu_range }
    }

    /// Shorthand with the default half-width and `mu_range = [-p, p]`.
    pub fn from_terms(left: &[(usize, usize, f64)], right: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            SmoothPiece::from_terms(left)?,
            SmoothPiece::from_terms(right)?,
            DEFAULT_HALF_WIDTH,
            (-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH),
        )
    }

    pub fn with_half_width(mut self, p: f64) -> Self {
        assert!(p > 0.0);
        self.p = p;
        self
    }

    pub fn left(&self) -> &SmoothPiece {
        &self.left
    }

    pub fn right(&self) -> &SmoothPiece {
        &self.right
    }

    pub fn piece(&self, side: Side) -> &SmoothPiece {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.p
    }

    pub fn mu_range(&self) -> (f64, f64) {
        self.mu_range
    }

    /// The map conjugated by `x -> -x`, `mu -> -mu`, pieces swapped.
    pub fn flipped(&self) -> PiecewiseMap {
        PiecewiseMap {
            left: self.right.reflected(),
            right: self.left.reflected(),
            p: self.p,
            mu_range: (-self.mu_range.1, -self.mu_range.0),
        }
    }
}

pub fn evaluate(map: &PiecewiseMap, x: f64, mu: f64) -> f64 {
    if x > 0.0 {
        map.right.eval(x, mu)
    } else {
        map.left.eval(x, mu)
    }
}

pub fn derivative(map: &PiecewiseMap, x: f64, mu: f64, order: usize, side: SideSel) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(BcnfError::InvalidOrder(order));
    }
    let s = match side {
        SideSel::Left => Side::Left,
        SideSel::Right => Side::Right,
        SideSel::Auto if x == 0.0 => return Err(BcnfError::AmbiguousSide),
        SideSel::Auto => Side::of(x),
    };
    Ok(map.piece(s).deriv(x, mu, order))
}

/// Taylor data of the pieces at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationData {
    pub a_l: f64,
    pub a_r: f64,
    pub beta: f64,
    pub c_l: f64,
    pub c_r: f64,
    pub d_l: f64,
    pub d_r: f64,
    pub e: f64,
}

impl BifurcationData {
    pub fn slope(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.a_l,
            Side::Right => self.a_r,
        }
    }
}

pub fn extract_bifurcation_data(map: &PiecewiseMap) -> Result<BifurcationData> {
    let (l, r) = (&map.left, &map.right);
    if l.coeff(0, 0) != r.coeff(0, 0) {
        return Err(BcnfError::ContinuityViolation { power: 0, left: l.coeff(0, 0), right: r.coeff(0, 0) });
    }
    if l.coeff(0, 1) != r.coeff(0, 1) {
        return Err(BcnfError::BetaMismatch { left: l.coeff(0, 1), right: r.coeff(0, 1) });
    }
    let beta = l.coeff(0, 1);
    if !(beta > 0.0) {
        return Err(BcnfError::BetaNotPositive(beta));
    }
    Ok(BifurcationData {
        a_l: l.coeff(1, 0),
        a_r: r.coeff(1, 0),
        beta,
        c_l: l.coeff(2, 0),
        c_r: r.coeff(2, 0),
        d_l: l.coeff(1, 1),
        d_r: r.coeff(1, 1),
        e: l.coeff(0, 2),
    })
}

/// Solves `piece(x; mu) = y` for `x` in `bracket`.
pub fn invert_piece(piece: &SmoothPiece, y: f64, mu: f64, bracket: (f64, f64)) -> Result<f64> {
    invert_poly(&piece.at_mu(mu), y, bracket)
}

pub(crate) fn invert_poly(p: &Poly1, y: f64, bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let (plo, phi) = (p.eval(lo), p.eval(hi));
    if (plo - y) * (phi - y) > 0.0 {
        return Err(BcnfError::NotBracketed { target: y, lo, hi });
    }
    let dp = p.derivative();
    let n = 64;
    let mut sign = 0.0;
    for k in 0..=n {
        let d = dp.eval(lo + (hi - lo) * k as f64 / n as f64);
        if d != 0.0 {
            if sign != 0.0 && d.signum() != sign {
                return Err(BcnfError::NotMonotoneOnBracket { lo, hi });
            }
            sign = d.signum();
        }
    }
    safeguarded_newton(
        |x| {
            let (v, d) = p.eval_d1(x);
            (v - y, d)
        },
        lo,
        hi,
        None,
        TOL_ROOT,
    )
    .map_err(|e| match e {
        BcnfError::NotBracketed { .. } => BcnfError::NotBracketed { target: y, lo, hi },
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orbit {
    pub points: Vec<f64>,
    pub escaped: bool,
}

/// `(x0, f(x0), ..., f^n(x0))`, cut at the first iterate outside `(-p, p)`.
pub fn iterate(map: &PiecewiseMap, x0: f64, mu: f64, n: usize) -> Orbit {
    let mut points = Vec::with_capacity(n + 1);
    let p = map.p;
    let mut x = x0;
    points.push(x);
    for _ in 0..n {
        if !(x.abs() < p) {
            return Orbit { points, escaped: true };
        }
        x = evaluate(map, x, mu);
        points.push(x);
    }
    let escaped = !(x.abs() < p);
    Orbit { points, escaped }
}

/// JSON map description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub left: Vec<(usize, usize, f64)>,
    pub right: Vec<(usize, usize, f64)>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub mu_range: Option<(f64, f64)>,
    #[serde(default)]
    pub degree: Option<usize>,
}

fn default_p() -> f64 {
    DEFAULT_HALF_WIDTH
}

impl MapConfig {
    pub fn build(&self) -> Result<PiecewiseMap> {
        let d = self.degree.unwrap_or_else(|| {
            self.left.iter().chain(self.right.iter()).map(|t| t.0 + t.1).max().unwrap_or(0).max(DEFAULT_DEGREE)
        });
        let mu_range = self.mu_range.unwrap_or((-self.p, self.p));
        PiecewiseMap::new(SmoothPiece::new(d, &self.left)?, SmoothPiece::new(d, &self.right)?, self.p, mu_range)
    }

    pub fn from_json(text: &str) -> Result<PiecewiseMap> {
        let cfg: MapConfig = serde_json::from_str(text).map_err(|e| BcnfError::InvalidConfig(e.to_string()))?;
        cfg.build()
    }

    pub fn of(map: &PiecewiseMap) -> MapConfig {
        MapConfig {
            left: map.left.terms(),
            right: map.right.terms(),
            p: map.p,
            mu_range: Some(map.mu_range),
            degree: Some(map.left.degree.max(map.right.degree)),
        }
    }
}
