//! Laws for the range variable `N`.
//!
//! Every variant is described by its tail function `P(N >= n)`; sampling is
//! inverse-CDF on a single uniform variate (deterministic variants consume
//! none). Moments `E[N^d]` use the tail-sum identity
//!
//! ```text
//! E[N^d] = sum_{n >= 1} (n^d - (n-1)^d) * P(N >= n)
//! ```
//!
//! and whether that sum diverges is decided from the variant's parameters,
//! never from a truncated partial sum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
}

/// The law of the range variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawDistribution")]
pub enum RangeDistribution {
    /// Point mass at `k`.
    Constant { k: u64 },
    /// `P(N >= n) = 1 - exp(-beta / n)` for `n >= 1`.
    BetaExp { beta: f64 },
    /// `P(N >= n) = min(1, c * n^-s)` for `n >= 1`.
    ParetoTail { c: f64, s: f64 },
    /// `P(N >= n) = rho^n`.
    Geometric { rho: f64 },
    /// Explicit tail table; `tail[n] = P(N >= n)` and zero past the end.
    Empirical { tail: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawDistribution {
    Constant { k: u64 },
    BetaExp { beta: f64 },
    ParetoTail { c: f64, s: f64 },
    Geometric { rho: f64 },
    Empirical { tail: Vec<f64> },
}

impl TryFrom<RawDistribution> for RangeDistribution {
    type Error = DistError;

    fn try_from(raw: RawDistribution) -> Result<Self, DistError> {
        match raw {
            RawDistribution::Constant { k } => Ok(Self::Constant { k }),
            RawDistribution::BetaExp { beta } => Self::beta_exp(beta),
            RawDistribution::ParetoTail { c, s } => Self::pareto_tail(c, s),
            RawDistribution::Geometric { rho } => Self::geometric(rho),
            RawDistribution::Empirical { tail } => Self::empirical(tail),
        }
    }
}

fn invalid(msg: impl Into<String>) -> DistError {
    DistError::InvalidParameter(msg.into())
}

impl RangeDistribution {
    pub fn constant(k: u64) -> Self {
        Self::Constant { k }
    }

    pub fn beta_exp(beta: f64) -> Result<Self, DistError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid(format!("betaexp needs beta > 0, got {beta}")));
        }
        Ok(Self::BetaExp { beta })
    }

    pub fn pareto_tail(c: f64, s: f64) -> Result<Self, DistError> {
        if !(c > 0.0 && c.is_finite() && s > 0.0 && s.is_finite()) {
            return Err(invalid(format!("paretotail needs c, s > 0, got c={c}, s={s}")));
        }
        Ok(Self::ParetoTail { c, s })
    }

    pub fn geometric(rho: f64) -> Result<Self, DistError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(invalid(format!("geometric needs 0 < rho < 1, got {rho}")));
        }
        Ok(Self::Geometric { rho })
    }

    pub fn empirical(tail: Vec<f64>) -> Result<Self, DistError> {
        if tail.first() != Some(&1.0) {
            return Err(invalid("empirical tail table must start with 1"));
        }
        if tail.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(invalid("empirical tail entries must lie in [0, 1]"));
        }
        if tail.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("empirical tail table must be nonincreasing"));
        }
        Ok(Self::Empirical { tail })
    }

    /// `P(N >= n)`.
    pub fn tail(&self, n: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        match self {
            Self::Constant { k } => {
                if n <= *k {
                    1.0
                } else {
                    0.0
                }
            }
            Self::BetaExp { beta } => -(-beta / n as f64).exp_m1(),
            Self::ParetoTail { c, s } => (c * (n as f64).powf(-s)).min(1.0),
            Self::Geometric { rho } => rho.powf(n as f64),
            Self::Empirical { tail } => tail.get(n as usize).copied().unwrap_or(0.0),
        }
    }

    /// One draw of `N`.
    pub fn sample(&self, rng: &mut Rng) -> u64 {
        match self {
            Self::Constant { k } => *k,
            Self::BetaExp { beta } => {
                let u = rng.uniform();
                beta_exp_from_uniform(*beta, u)
            }
            Self::ParetoTail { c, s } => {
                // N >= n  iff  U <= c n^-s  iff  n <= (c/U)^(1/s)
                let u = rng.uniform();
                (c / u).powf(1.0 / s).floor() as u64
            }
            Self::Geometric { rho } => {
                // N >= n  iff  U <= rho^n
                let u = rng.uniform();
                (u.ln() / rho.ln()).floor() as u64
            }
            Self::Empirical { tail } => {
                let u = rng.uniform();
                // Largest n with tail[n] >= u; tail[0] = 1 > u.
                (tail.partition_point(|&t| t >= u) - 1) as u64
            }
        }
    }

    /// `E[N^d]`, or `f64::INFINITY` when the tail sum diverges.
    pub fn moment(&self, d: u32) -> f64 {
        assert!(d >= 1, "moment order must be positive");
        match self {
            Self::Constant { k } => (*k as f64).powi(d as i32),
            Self::BetaExp { .. } => f64::INFINITY,
            Self::ParetoTail { c, s } => {
                if *s <= d as f64 {
                    return f64::INFINITY;
                }
                pareto_moment(*c, *s, d)
            }
            Self::Geometric { rho } => geometric_moment(*rho, d),
            Self::Empirical { tail } => tail
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, t)| increment(n as f64, d) * t)
                .sum(),
        }
    }

    /// Whether `limsup_n n * P(N^d >= n) > 0`.
    pub fn is_heavy_tail(&self, d: u32) -> bool {
        assert!(d >= 1, "dimension must be positive");
        match self {
            Self::BetaExp { .. } => true,
            // n * c * n^(-s/d) stays bounded away from zero iff s <= d.
            Self::ParetoTail { s, .. } => *s <= d as f64,
            Self::Constant { .. } | Self::Geometric { .. } | Self::Empirical { .. } => false,
        }
    }
}

/// Inverse-CDF map for the `BetaExp` law: `max(0, ceil(beta / -ln u) - 1)`.
pub fn beta_exp_from_uniform(beta: f64, u: f64) -> u64 {
    let x = (beta / -u.ln()).ceil() - 1.0;
    // `as` saturates at u64::MAX for astronomically large draws.
    if x <= 0.0 {
        0
    } else {
        x as u64
    }
}

/// `n^d - (n-1)^d`.
fn increment(n: f64, d: u32) -> f64 {
    n.powi(d as i32) - (n - 1.0).powi(d as i32)
}

fn geometric_moment(rho: f64, d: u32) -> f64 {
    // Terms are poly(n) * rho^n; once past the mode they shrink at least
    // geometrically, so stop when a term is negligible against the sum.
    let mode = d as f64 / -rho.ln();
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut n = 1u64;
    loop {
        pow *= rho;
        let term = increment(n as f64, d) * pow;
        sum += term;
        if n as f64 > mode + 1.0 && term <= sum * 1e-17 {
            return sum;
        }
        n += 1;
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pareto_moment(c: f64, s: f64, d: u32) -> f64 {
    // tail(n) = 1 for n <= n0, where n0 is the last n with c n^-s >= 1.
    let mut n0 = c.powf(1.0 / s).floor().max(0.0);
    while n0 >= 1.0 && c * n0.powf(-s) < 1.0 {
        n0 -= 1.0;
    }
    while c * (n0 + 1.0).powf(-s) >= 1.0 {
        n0 += 1.0;
    }
    // The flat part telescopes to n0^d. Past it, expand
    // n^d - (n-1)^d = sum_k C(d,k) (-1)^(d-k+1) n^k and sum each power
    // with a Hurwitz zeta; every exponent s - k exceeds 1 because s > d.
    let head = n0.powi(d as i32);
    let rest: f64 = (0..d)
        .map(|k| {
            let sign = if (d - k) % 2 == 1 { 1.0 } else { -1.0 };
            sign * binomial(d, k) * hurwitz_zeta(s - k as f64, n0 + 1.0)
        })
        .sum();
    head + c * rest
}

/// Hurwitz zeta `sum_{n >= 0} (n + q)^-a` for `a > 1`, `q > 0`, by
/// Euler-Maclaurin summation.
pub(crate) fn hurwitz_zeta(a: f64, q: f64) -> f64 {
    debug_assert!(a > 1.0 && q > 0.0);
    // B_{2j} / (2j)!
    const B2J_OVER_FACT: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let shift = if q < 30.0 { (30.0 - q).ceil() as u64 } else { 0 };
    let mut sum: f64 = (0..shift).map(|n| (n as f64 + q).powf(-a)).sum();
    let x = q + shift as f64;
    sum += x.powf(1.0 - a) / (a - 1.0) + 0.5 * x.powf(-a);
    // Rising factorial a (a+1) ... (a+2j-2) times x^(-a-2j+1).
    let mut rising = a;
    let mut xpow = x.powf(-a - 1.0);
    for (j, b) in B2J_OVER_FACT.iter().enumerate() {
        sum += b * rising * xpow;
        let m = (2 * j + 1) as f64;
        rising *= (a + m) * (a + m + 1.0);
        xpow /= x * x;
    }
    sum
}
