//! Which theorem, if any, covers a slope pair `(a_L, a_R)`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    Trivial,
    SaddleNodeLike,
    PeriodDoublingLike,
    OutOfScope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reduction {
    Identity,
    FlipX,
    InverseMap,
    FlipXAndInverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    /// Smooth conjugacy to the piecewise-linear form.
    LinearForm,
    /// Conjugacy to the form with a quadratic term, saddle-node type.
    SaddleNodeForm,
    /// Conjugacy to the form with a quadratic term, period-doubling type.
    PeriodDoublingForm,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionClass {
    pub kind: RegionKind,
    pub reduction: Reduction,
    pub theorem: TheoremTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl RegionClass {
    fn new(kind: RegionKind, reduction: Reduction) -> Self {
        let theorem = match kind {
            RegionKind::Trivial => TheoremTag::LinearForm,
            RegionKind::SaddleNodeLike => TheoremTag::SaddleNodeForm,
            RegionKind::PeriodDoublingLike => TheoremTag::PeriodDoublingForm,
            RegionKind::OutOfScope => TheoremTag::None,
        };
        RegionClass { kind, reduction, theorem, warning: None }
    }

    pub fn is_supported(&self) -> bool {
        self.kind != RegionKind::OutOfScope
    }
}

pub fn is_trivial(a_l: f64, a_r: f64) -> bool {
    (a_l - 1.0) * (a_r - 1.0) > 0.0 && (a_l + 1.0) * (a_r + 1.0) > 0.0 && a_l != 0.0 && a_r != 0.0
}

pub fn is_saddle_node(a_l: f64, a_r: f64) -> bool {
    a_l > 1.0 && a_r != 0.0 && a_r.abs() < 1.0
}

pub fn is_period_doubling(a_l: f64, a_r: f64) -> bool {
    a_r < -1.0 && 1.0 / a_r < a_l && a_l < 0.0
}

pub fn classify(a_l: f64, a_r: f64) -> RegionClass {
    use Reduction::*;
    use RegionKind::*;
    let mut class = if !(a_l.is_finite() && a_r.is_finite()) {
        RegionClass::new(OutOfScope, Identity)
    } else if is_trivial(a_l, a_r) {
        RegionClass::new(Trivial, Identity)
    } else if is_saddle_node(a_l, a_r) {
        RegionClass::new(SaddleNodeLike, Identity)
    } else if is_saddle_node(a_r, a_l) {
        RegionClass::new(SaddleNodeLike, FlipX)
    } else if is_period_doubling(a_l, a_r) {
        RegionClass::new(PeriodDoublingLike, Identity)
    } else if is_period_doubling(a_r, a_l) {
        RegionClass::new(PeriodDoublingLike, FlipX)
    } else if is_inverse_period_doubling(a_l, a_r) {
        RegionClass::new(PeriodDoublingLike, InverseMap)
    } else if is_inverse_period_doubling(a_r, a_l) {
        RegionClass::new(PeriodDoublingLike, FlipXAndInverse)
    } else {
        RegionClass::new(OutOfScope, Identity)
    };
    if class.is_supported() && a_l < 0.0 && a_r < 0.0 && a_l * a_r >= 1.0 {
        class.warning = Some(format!(
            "third-quadrant slopes with a_L*a_R = {} >= 1; classified by the strict theorem hypotheses",
            a_l * a_r
        ));
    }
    class
}

// Inverse of a map with slopes (a_L, a_R) has slopes (1/a_L, 1/a_R); flip the
// pieces as well so the result lands in the a_R < -1 < 1/a_R < a_L < 0 wedge.
fn is_inverse_period_doubling(a_l: f64, a_r: f64) -> bool {
    a_l > -1.0 && a_l < 0.0 && a_r < -1.0 && a_l * a_r > 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use RegionKind::*;

    #[test]
    fn examples() {
        assert_eq!((classify(0.5, 0.8).kind, classify(0.5, 0.8).reduction), (Trivial, Reduction::Identity));
        assert_eq!(classify(0.5, 0.8).theorem, TheoremTag::LinearForm);
        assert_eq!((classify(2.0, 0.5).kind, classify(2.0, 0.5).reduction), (SaddleNodeLike, Reduction::Identity));
        assert_eq!(
            (classify(-0.4, -2.0).kind, classify(-0.4, -2.0).reduction),
            (PeriodDoublingLike, Reduction::Identity)
        );
        assert_eq!((classify(0.5, 2.0).kind, classify(0.5, 2.0).reduction), (SaddleNodeLike, Reduction::FlipX));
        assert_eq!(classify(3.0, -2.0).kind, OutOfScope);
        assert_eq!(classify(3.0, -2.0).theorem, TheoremTag::None);
    }

    #[test]
    fn boundaries_are_out_of_scope() {
        for &(l, r) in
            &[(1.0, 0.5), (0.5, 1.0), (-1.0, 0.5), (0.0, 0.5), (2.0, 0.0), (2.0, -1.0), (-0.5, -2.0), (-2.0, -0.5)]
        {
            assert_eq!(classify(l, r).kind, OutOfScope, "({l}, {r})");
        }
    }

    #[test]
    fn inverse_reductions() {
        let c = classify(-0.8, -2.0);
        assert_eq!((c.kind, c.reduction), (PeriodDoublingLike, Reduction::InverseMap));
        assert!(c.warning.is_some());
        let c = classify(-2.0, -0.8);
        assert_eq!((c.kind, c.reduction), (PeriodDoublingLike, Reduction::FlipXAndInverse));
    }

    #[test]
    fn flipx_region3() {
        let c = classify(-2.0, -0.4);
        assert_eq!((c.kind, c.reduction), (PeriodDoublingLike, Reduction::FlipX));
    }

    #[test]
    fn predicates_mutually_exclusive_on_grid() {
        let n = 400;
        for i in 0..n {
            for j in 0..n {
                let a = -3.0 + 6.0 * (i as f64 + 0.5) / n as f64;
                let b = -3.0 + 6.0 * (j as f64 + 0.5) / n as f64;
                let hits =
                    [is_trivial(a, b), is_saddle_node(a, b), is_period_doubling(a, b)].iter().filter(|&&h| h).count();
                assert!(hits <= 1, "({a}, {b})");
            }
        }
    }
}
