use thiserror::Error;

pub type Result<T> = std::result::Result<T, BcnfError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BcnfError {
    #[error("pieces disagree at x = 0: (0,{power}) coefficients {left} vs {right}")]
    ContinuityViolation { power: usize, left: f64, right: f64 },
    #[error("f(0; 0) = {0}, expected 0")]
    BorderCollisionViolation(f64),
    #[error("d/dmu at the origin differs between pieces: {left} vs {right}")]
    BetaMismatch { left: f64, right: f64 },
    #[error("beta = {0} must be positive")]
    BetaNotPositive(f64),
    #[error("x = 0 requires an explicit side")]
    AmbiguousSide,
    #[error("derivative order {0} outside 1..=3")]
    InvalidOrder(usize),
    #[error("target {target} not bracketed by [{lo}, {hi}]")]
    NotBracketed { target: f64, lo: f64, hi: f64 },
    #[error("piece is not monotone on [{lo}, {hi}]")]
    NotMonotoneOnBracket { lo: f64, hi: f64 },
    #[error("{what}: no convergence after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("slope at the origin equals 1 on the {0} side")]
    SlopeOne(&'static str),
    #[error("2-cycle does not straddle 0: u_L = {u_l}, u_R = {u_r}")]
    WrongSides { u_l: f64, u_r: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("quadratic fixed-point equation has no real root (discriminant {0})")]
    DegenerateQuadratic(f64),
    #[error("a piece has zero derivative at the switching point")]
    ZeroDerivativeAtSwitch,
    #[error("multiplier {0} is too close to modulus 1")]
    NonHyperbolic(f64),
    #[error("itinerary mismatch at x = {x}, y = {y}: {detail}")]
    ItineraryMismatch { x: f64, y: f64, detail: &'static str },
    #[error("inverse of target {target} not available on the {side} branch")]
    InverseUnbracketed { target: f64, side: &'static str },
    #[error("anchor {0} lies outside the chart domain")]
    AnchorOutsideDomain(f64),
    #[error("region unsupported: {0}")]
    RegionUnsupported(String),
    #[error("jump-function data not monotone: {0}")]
    NonMonotoneData(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("recursion left the working range |y| <= {limit} at y = {y}")]
    EscapedWorkingRange { y: f64, limit: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl BcnfError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        use BcnfError::*;
        match self {
            ContinuityViolation { .. } => "ContinuityViolation",
            BorderCollisionViolation(_) => "BorderCollisionViolation",
            BetaMismatch { .. } => "BetaMismatch",
            BetaNotPositive(_) => "BetaNotPositive",
            AmbiguousSide => "AmbiguousSide",
            InvalidOrder(_) => "InvalidOrder",
            NotBracketed { .. } => "NotBracketed",
            NotMonotoneOnBracket { .. } => "NotMonotoneOnBracket",
            NoConvergence { .. } => "NoConvergence",
            SlopeOne(_) => "SlopeOne",
            WrongSides { .. } => "WrongSides",
            PreconditionViolation(_) => "PreconditionViolation",
            DegenerateQuadratic(_) => "DegenerateQuadratic",
            ZeroDerivativeAtSwitch => "ZeroDerivativeAtSwitch",
            NonHyperbolic(_) => "NonHyperbolic",
            ItineraryMismatch { .. } => "ItineraryMismatch",
            InverseUnbracketed { .. } => "InverseUnbracketed",
            AnchorOutsideDomain(_) => "AnchorOutsideDomain",
            RegionUnsupported(_) => "RegionUnsupported",
            NonMonotoneData(_) => "NonMonotoneData",
            HypothesisViolation(_) => "HypothesisViolation",
            DomainTooSmall(_) => "DomainTooSmall",
            EscapedWorkingRange { .. } => "EscapedWorkingRange",
            InvalidConfig(_) => "InvalidConfig",
        }
    }
}
