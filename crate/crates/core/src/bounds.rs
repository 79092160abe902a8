//! Closed-form bound calculators.
//!
//! * the branching mean `2 * lambda * E[(2N + 1)^d]` that dominates the
//!   number of secondary infections in the subcritical contact process, and
//!   the rate `lambda_0 = 1 / (2 E[(2N + 1)^d])` at which it equals one;
//! * the block probability `rho_L = (1 - e^-1) e^-3 P(N >= 7L)` and the
//!   horizontal block-bond probability `1 - (1 - (1 - e^-lambda) rho_L)^L`
//!   used by the supercritical renormalization.
//!
//! The neighbour bound `1 - (1 - q)^l + c(p)` used for the anisotropic
//! model is not computable: `c(p)` has no closed form, so it is omitted.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::distributions::RangeDistribution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("E[N^{d}] is infinite; the subcritical bound needs a finite moment")]
    InfiniteMoment { d: u32 },
}

/// One evaluated bound together with the inputs that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    /// Serialized as `null` when infinite.
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
    pub inputs: serde_json::Value,
    pub finite: bool,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

impl BoundReport {
    pub fn new(name: &str, value: f64, inputs: serde_json::Value) -> Self {
        BoundReport {
            name: name.to_string(),
            value,
            inputs,
            finite: value.is_finite(),
        }
    }
}

/// `E[(2N + 1)^d]` via the binomial expansion over the moments of `N`.
pub fn odd_ball_moment(dist: &RangeDistribution, d: u32) -> f64 {
    let mut total = 1.0;
    let mut binom = 1.0;
    for k in 1..=d {
        binom = binom * (d - k + 1) as f64 / k as f64;
        let m = dist.moment(k);
        if m.is_infinite() {
            return f64::INFINITY;
        }
        total += binom * 2f64.powi(k as i32) * m;
    }
    total
}

pub fn lambda0_bound(dist: &RangeDistribution, d: u32) -> Result<BoundReport, BoundsError> {
    let m = odd_ball_moment(dist, d);
    if m.is_infinite() {
        return Err(BoundsError::InfiniteMoment { d });
    }
    Ok(BoundReport::new(
        "lambda0_bound",
        1.0 / (2.0 * m),
        serde_json::json!({ "dist": dist, "d": d }),
    ))
}

pub fn branching_mean(dist: &RangeDistribution, d: u32, lambda: f64) -> BoundReport {
    let value = if lambda == 0.0 {
        0.0
    } else {
        odd_ball_moment(dist, d) * 2.0 * lambda
    };
    BoundReport::new(
        "branching_mean",
        value,
        serde_json::json!({ "dist": dist, "d": d, "lambda": lambda }),
    )
}

pub fn rho_l(dist: &RangeDistribution, l: u64) -> f64 {
    assert!(l >= 1, "block size must be positive");
    let e1 = (-1f64).exp();
    (1.0 - e1) * e1.powi(3) * dist.tail(7 * l)
}

pub fn horizontal_block_open_prob(lambda: f64, rho: f64, l: u64) -> f64 {
    assert!(l >= 1, "block size must be positive");
    let per_site = -(-lambda).exp_m1() * rho;
    1.0 - (1.0 - per_site).powf(l as f64)
}
