//! Classify, reduce, match and conjugate in one call.
//!
//! Maps whose slopes fall in a mirrored region are analysed through the
//! reflection `x -> -x`, `mu -> -mu`. Everything stored here lives in the
//! reduced coordinates; `conjugacy_value` and `sample_conjugacy` map back.

use serde::Serialize;

use crate::conjugacy_builder::{build_conjugacy, ConjugacyMap, Interval};
use crate::error::{BcnfError, Result};
use crate::map_core::{extract_bifurcation_data, BifurcationData, PiecewiseMap};
use crate::normal_form_matcher::{build_normal_form, NormalFormMap, NormalFormParams};
use crate::region_classifier::{classify, Reduction, RegionClass};
use crate::verifier::{verify, VerificationReport, VerifyOptions};

#[derive(Debug, Clone)]
pub struct Reduced {
    pub region: RegionClass,
    pub flipped: bool,
    pub map: PiecewiseMap,
    pub mu: f64,
    pub data: BifurcationData,
}

/// Classifies `map` and applies the reflection when needed.
pub fn reduce(map: &PiecewiseMap, mu: f64) -> Result<Reduced> {
    let data = extract_bifurcation_data(map)?;
    let region = classify(data.a_l, data.a_r);
    if !region.is_supported() {
        return Err(BcnfError::RegionUnsupported(format!(
            "slopes ({}, {}) are outside every theorem region",
            data.a_l, data.a_r
        )));
    }
    match region.reduction {
        Reduction::Identity => Ok(Reduced { region, flipped: false, map: map.clone(), mu, data }),
        Reduction::FlipX => {
            let m = map.flipped();
            let data = extract_bifurcation_data(&m)?;
            let mut inner = classify(data.a_l, data.a_r);
            inner.warning = region.warning.clone();
            Ok(Reduced { region: inner, flipped: true, map: m, mu: -mu, data })
        }
        Reduction::InverseMap | Reduction::FlipXAndInverse => Err(BcnfError::RegionUnsupported(format!(
            "slopes ({}, {}) need the inverse map; pass the inverse of f instead",
            data.a_l, data.a_r
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormReport {
    pub region: RegionClass,
    /// True when `g` is written for the reflected map; the original map is
    /// then conjugate to `y -> -g(-y)`.
    pub reflected: bool,
    pub params: NormalFormParams,
}

pub fn match_normal_form(map: &PiecewiseMap, mu: f64) -> Result<(Reduced, NormalFormMap)> {
    let r = reduce(map, mu)?;
    let g = build_normal_form(&r.data, &r.map, r.mu, &r.region)?;
    Ok((r, g))
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub reduced: Reduced,
    pub normal_form: NormalFormMap,
    pub conjugacies: Vec<ConjugacyMap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugacySample {
    pub x: f64,
    pub h: f64,
    pub dh: f64,
    pub interval_id: usize,
}

impl Analysis {
    pub fn normal_form_report(&self) -> NormalFormReport {
        NormalFormReport {
            region: self.reduced.region.clone(),
            reflected: self.reduced.flipped,
            params: self.normal_form.params,
        }
    }

    pub fn verify(&self, opts: &VerifyOptions) -> Result<VerificationReport> {
        verify(&self.reduced.map, &self.normal_form, self.reduced.mu, &self.conjugacies, opts)
    }

    fn sign(&self) -> f64 {
        if self.reduced.flipped {
            -1.0
        } else {
            1.0
        }
    }

    /// Domain of conjugacy `k` in the caller's coordinates.
    pub fn domain(&self, k: usize) -> Vec<Interval> {
        let d = self.conjugacies[k].domain();
        if self.reduced.flipped {
            d.iter().rev().map(|i| Interval::new(-i.hi, -i.lo)).collect()
        } else {
            d.to_vec()
        }
    }

    pub fn conjugacy_value(&self, k: usize, x: f64) -> Result<f64> {
        let s = self.sign();
        Ok(s * self.conjugacies[k].eval(s * x)?)
    }

    /// `n` evenly spaced samples of `h` and `h'` over the domain of conjugacy `k`.
    pub fn sample_conjugacy(&self, k: usize, n: usize) -> Result<Vec<ConjugacySample>> {
        let h = &self.conjugacies[k];
        let s = self.sign();
        let dom = self.domain(k);
        let mut out = Vec::new();
        for (id, iv) in dom.iter().enumerate() {
            let m = (n / dom.len()).max(2);
            for j in 0..m {
                let x = iv.lo + iv.width() * (j as f64 + 0.5) / m as f64;
                out.push(ConjugacySample { x, h: s * h.eval(s * x)?, dh: h.derivative(s * x)?, interval_id: id });
            }
        }
        Ok(out)
    }
}

pub fn analyze(map: &PiecewiseMap, mu: f64) -> Result<Analysis> {
    let (reduced, g) = match_normal_form(map, mu)?;
    let conjugacies = build_conjugacy(&reduced.map, &g, reduced.mu, &reduced.region)?;
    Ok(Analysis { reduced, normal_form: g, conjugacies })
}
