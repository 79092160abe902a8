//! Anisotropic oriented percolation with random ranges.
//!
//! On `Z^d`, `d >= 2`, every vertex `x` draws a range `N_x`; the long bonds
//! `x -> x + n e_1` with `1 <= n <= N_x` are open with probability `p` and
//! the unit bonds `x -> x + e_i`, `i >= 2`, with probability `q`. The
//! cluster of the origin is explored breadth-first and the environment is
//! drawn lazily as vertices are expanded, so the lattice is unbounded and
//! only the two caps stop a run:
//!
//! * the size cap (visited set reaches `size_cap`), and
//! * the distance cap (some reached vertex has `x_1 >= reach_cap`).
//!
//! Hitting either cap is the finite-volume stand-in for `o -> infinity`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::distributions::RangeDistribution;
use crate::harness::{derive_run_seed, map_runs, wilson_interval, Parallelism, DEFAULT_Z};
use crate::rng::Rng;

/// A lattice vertex.
pub type Site = SmallVec<[i64; 4]>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AprrError {
    #[error("invalid percolation config: {0}")]
    InvalidConfig(String),
    #[error("cannot classify q = {level} (theta in [{theta_lo:.4}, {theta_hi:.4}]); bracket [{lo}, {hi}]")]
    Inconclusive {
        lo: f64,
        hi: f64,
        level: f64,
        theta_lo: f64,
        theta_hi: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprrConfig {
    pub dimension: usize,
    pub p: f64,
    pub q: f64,
    pub dist: RangeDistribution,
    #[serde(default = "default_size_cap")]
    pub size_cap: u64,
    #[serde(default = "default_reach_cap")]
    pub reach_cap: u64,
    #[serde(default = "default_runs")]
    pub runs: u64,
}

fn default_size_cap() -> u64 {
    100_000
}

fn default_reach_cap() -> u64 {
    10_000
}

fn default_runs() -> u64 {
    1
}

impl AprrConfig {
    pub fn new(dimension: usize, p: f64, q: f64, dist: RangeDistribution) -> Self {
        AprrConfig {
            dimension,
            p,
            q,
            dist,
            size_cap: default_size_cap(),
            reach_cap: default_reach_cap(),
            runs: default_runs(),
        }
    }

    pub fn validate(&self) -> Result<(), AprrError> {
        let bad = |m: String| Err(AprrError::InvalidConfig(m));
        if self.dimension < 2 {
            return bad(format!("dimension must be at least 2, got {}", self.dimension));
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) {
            return bad(format!("p and q must lie in [0, 1], got p={}, q={}", self.p, self.q));
        }
        if self.size_cap == 0 || self.reach_cap == 0 {
            return bad("caps must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        Ok(())
    }
}

/// Source of ranges and bond states for [`explore_with`].
///
/// Every method is called at most once per vertex (or per vertex and
/// axis), in exploration order.
pub trait AprrEnvironment {
    fn range(&mut self, x: &Site) -> u64;
    /// Smallest `n` in `(after, range]` whose bond `x -> x + n e_1` is open.
    /// Successive calls for the same `x` pass the previous answer as `after`.
    fn next_open_horizontal(&mut self, x: &Site, after: u64, range: u64) -> Option<u64>;
    /// Whether `x -> x + e_axis` is open, `axis` counted from 0 with `axis >= 1`.
    fn vertical_open(&mut self, x: &Site, axis: usize) -> bool;
}

/// Independent bonds drawn on demand. Open horizontal lengths form a
/// Bernoulli(`p`) sequence, so they are visited by geometric gaps.
pub struct SampledEnvironment<'a> {
    pub p: f64,
    pub q: f64,
    pub dist: &'a RangeDistribution,
    pub rng: Rng,
}

impl AprrEnvironment for SampledEnvironment<'_> {
    fn range(&mut self, _x: &Site) -> u64 {
        self.dist.sample(&mut self.rng)
    }

    fn next_open_horizontal(&mut self, _x: &Site, after: u64, range: u64) -> Option<u64> {
        if after >= range {
            return None;
        }
        let gap = self.rng.geometric_trials(self.p)?;
        let n = after.saturating_add(gap);
        (n <= range).then_some(n)
    }

    fn vertical_open(&mut self, _x: &Site, _axis: usize) -> bool {
        self.rng.bernoulli(self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterVerdict {
    Died,
    ReachedSizeCap,
    ReachedDistanceCap,
}

impl ClusterVerdict {
    pub fn percolated(self) -> bool {
        !matches!(self, ClusterVerdict::Died)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterOutcome {
    pub verdict: ClusterVerdict,
    pub size: u64,
    pub max_coord1: i64,
}

/// Exploration state. Each vertex enters `queue` once and is expanded once.
#[derive(Clone, Debug, Default)]
pub struct ClusterFrontier {
    pub visited: HashSet<Site>,
    pub queue: VecDeque<Site>,
    /// Range drawn for each expanded vertex.
    pub env: HashMap<Site, u64>,
    pub max_coord1: i64,
    pub max_l1: i64,
}

impl ClusterFrontier {
    fn new(d: usize) -> Self {
        let origin: Site = smallvec![0; d];
        let mut f = ClusterFrontier::default();
        f.visited.insert(origin.clone());
        f.queue.push_back(origin);
        f
    }

    /// Adds `y` if new; returns a cap verdict if that stops the run.
    fn discover(&mut self, y: Site, cfg: &AprrConfig) -> Option<ClusterVerdict> {
        if self.visited.contains(&y) {
            return None;
        }
        self.max_coord1 = self.max_coord1.max(y[0]);
        self.max_l1 = self.max_l1.max(y.iter().map(|c| c.abs()).sum());
        let far = y[0] >= cfg.reach_cap as i64;
        self.visited.insert(y.clone());
        if far {
            return Some(ClusterVerdict::ReachedDistanceCap);
        }
        if self.visited.len() as u64 >= cfg.size_cap {
            return Some(ClusterVerdict::ReachedSizeCap);
        }
        self.queue.push_back(y);
        None
    }

    fn outcome(&self, verdict: ClusterVerdict) -> ClusterOutcome {
        ClusterOutcome {
            verdict,
            size: self.visited.len() as u64,
            max_coord1: self.max_coord1,
        }
    }
}

/// Explores the cluster of the origin with a freshly sampled environment.
pub fn explore_cluster(config: &AprrConfig, seed: u64) -> Result<ClusterOutcome, AprrError> {
    config.validate()?;
    let mut env = SampledEnvironment {
        p: config.p,
        q: config.q,
        dist: &config.dist,
        rng: Rng::new(seed),
    };
    Ok(explore_with(config, &mut env).0)
}

/// Breadth-first exploration against any environment. `config` must be valid.
pub fn explore_with<E: AprrEnvironment>(
    config: &AprrConfig,
    env: &mut E,
) -> (ClusterOutcome, ClusterFrontier) {
    let mut fr = ClusterFrontier::new(config.dimension);
    if config.size_cap <= 1 {
        let out = fr.outcome(ClusterVerdict::ReachedSizeCap);
        return (out, fr);
    }
    while let Some(x) = fr.queue.pop_front() {
        let range = env.range(&x);
        fr.env.insert(x.clone(), range);
        let mut after = 0;
        while let Some(n) = env.next_open_horizontal(&x, after, range) {
            after = n;
            let mut y = x.clone();
            y[0] = y[0].saturating_add(n.min(i64::MAX as u64) as i64);
            if let Some(v) = fr.discover(y, config) {
                let out = fr.outcome(v);
                return (out, fr);
            }
        }
        for axis in 1..config.dimension {
            if env.vertical_open(&x, axis) {
                let mut y = x.clone();
                y[axis] += 1;
                if let Some(v) = fr.discover(y, config) {
                    let out = fr.outcome(v);
                    return (out, fr);
                }
            }
        }
    }
    let out = fr.outcome(ClusterVerdict::Died);
    (out, fr)
}

/// Fraction of runs that hit a cap, with its Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaEstimate {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub successes: u64,
    pub runs: u64,
}

/// Estimates `theta(p, q)` from `config.runs` explorations on seeds derived
/// from `master_seed`, with a 99% Wilson interval.
pub fn estimate_theta(
    config: &AprrConfig,
    master_seed: u64,
    par: Parallelism,
) -> Result<ThetaEstimate, AprrError> {
    config.validate()?;
    let hits = map_runs(config.runs, par, |i| {
        let seed = derive_run_seed(master_seed, i);
        explore_cluster(config, seed)
            .map(|o| o.verdict.percolated())
            .unwrap_or(false)
    });
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let (lo, hi) = wilson_interval(successes, config.runs, DEFAULT_Z);
    Ok(ThetaEstimate {
        estimate: successes as f64 / config.runs as f64,
        lo,
        hi,
        successes,
        runs: config.runs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcParams {
    pub dimension: usize,
    pub p: f64,
    pub dist: RangeDistribution,
    pub size_cap: u64,
    pub reach_cap: u64,
    pub runs: u64,
    pub q_resolution: f64,
    #[serde(default = "default_threshold")]
    pub survival_threshold: f64,
}

fn default_threshold() -> f64 {
    0.05
}

/// One bisection level and how it was classified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QcLevel {
    pub q: f64,
    pub theta: ThetaEstimate,
    pub supercritical: bool,
}

/// Final bracket `[lo, hi]`: `lo` was judged subcritical (or is 0) and
/// `hi` supercritical (or is 1).
#[derive(Clone, Debug, PartialEq)]
pub struct QcEstimate {
    pub q_c: f64,
    pub lo: f64,
    pub hi: f64,
    pub levels: Vec<QcLevel>,
}

/// Bisection for the finite-volume critical `q` at fixed `p`.
///
/// A level is supercritical when the lower Wilson bound of `theta` exceeds
/// `survival_threshold` and subcritical when the upper bound falls below
/// it. Level `k` uses master seed `derive_run_seed(master_seed, k)`.
pub fn estimate_qc(params: &QcParams, master_seed: u64, par: Parallelism) -> Result<QcEstimate, AprrError> {
    if !(params.q_resolution > 0.0 && params.q_resolution < 1.0) {
        return Err(AprrError::InvalidConfig(format!(
            "q_resolution must lie in (0, 1), got {}",
            params.q_resolution
        )));
    }
    let mut cfg = AprrConfig {
        dimension: params.dimension,
        p: params.p,
        q: 0.0,
        dist: params.dist.clone(),
        size_cap: params.size_cap,
        reach_cap: params.reach_cap,
        runs: params.runs,
    };
    cfg.validate()?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut levels = Vec::new();
    let mut k = 0u64;
    while hi - lo > params.q_resolution {
        let mid = 0.5 * (lo + hi);
        cfg.q = mid;
        let theta = estimate_theta(&cfg, derive_run_seed(master_seed, k), par)?;
        k += 1;
        if theta.lo > params.survival_threshold {
            hi = mid;
            levels.push(QcLevel { q: mid, theta, supercritical: true });
        } else if theta.hi < params.survival_threshold {
            lo = mid;
            levels.push(QcLevel { q: mid, theta, supercritical: false });
        } else {
            return Err(AprrError::Inconclusive {
                lo,
                hi,
                level: mid,
                theta_lo: theta.lo,
                theta_hi: theta.hi,
            });
        }
    }
    Ok(QcEstimate {
        q_c: 0.5 * (lo + hi),
        lo,
        hi,
        levels,
    })
}
