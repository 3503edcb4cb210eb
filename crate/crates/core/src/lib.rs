//! Border-collision normal forms for one-dimensional piecewise-smooth maps.
//!
//! A map `f(x; mu)` with polynomial pieces on either side of `x = 0` is
//! classified by its slopes at the bifurcation, matched to the extended
//! normal form `g`, and linked to it by a numerically constructed
//! differentiable conjugacy `h` with `h(f(x)) = g(h(x))`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conjugacy_builder;
pub mod error;
pub mod invariant_sets;
pub mod map_core;
pub mod normal_form_matcher;
pub mod pipeline;
pub mod poly;
pub mod region_classifier;
pub mod roots;
pub mod verifier;

pub use error::{BcnfError, Result};
