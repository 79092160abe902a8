//! One-dimensional oriented percolation with random ranges.
//!
//! Vertex `i >= 0` has bonds to `i + 1, ..., i + N_i`. With every bond
//! open the cluster of the origin is an interval whose right end is tracked
//! by the front recursion
//!
//! ```text
//! i_0 = -1, i_1 = 0,  i_{n+1} = max { i + N_i : i_{n-1} < i <= i_n }
//! ```
//!
//! and the cluster is infinite iff every increment `X_n = i_{n+1} - i_n`
//! is nonzero. Each `N_i` is read exactly once, when the front passes it.
//!
//! When each bond is open independently with probability `p`, the cluster
//! is no longer an interval. [`run_front_thinned`] sweeps vertices left to
//! right keeping the set of reached vertices whose range still covers the
//! sweep position; a vertex is reached iff one of the bonds from those
//! coverers into it is open. The sweep dies as soon as nothing covers the
//! next position.
//!
//! The remaining functions are exact analytics for the `BetaExp` law:
//! cutting-point probabilities, the conditional law of the ratio
//! `W_n = X_{n+1} / X_n` given `X_n = m`, and its large-`m` limit.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::distributions::RangeDistribution;
use crate::rng::Rng;

/// Supplies `N_i`. Each index is requested at most once, in increasing order.
pub trait RangeSource {
    fn range(&mut self, i: u64) -> u64;
}

/// Fresh i.i.d. draws from a distribution.
pub struct SampledRanges<'a> {
    pub dist: &'a RangeDistribution,
    pub rng: &'a mut Rng,
}

impl RangeSource for SampledRanges<'_> {
    fn range(&mut self, _i: u64) -> u64 {
        self.dist.sample(self.rng)
    }
}

/// An explicit environment; vertices past the end have range 0.
pub struct FixedRanges<'a>(pub &'a [u64]);

impl RangeSource for FixedRanges<'_> {
    fn range(&mut self, i: u64) -> u64 {
        self.0.get(i as usize).copied().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontVerdict {
    Died,
    Alive,
}

/// `step` is the step at which the run died, or the step reached when it
/// was stopped alive; `rightmost` is the rightmost vertex known reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrontOutcome {
    pub verdict: FrontVerdict,
    pub step: u64,
    pub rightmost: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontOptions {
    /// Stop alive after this many steps.
    pub step_cap: u64,
    /// Stop alive once the rightmost reached vertex is at least this.
    pub reach_target: u64,
    /// Record `W_n` samples (front recursion only).
    #[serde(default)]
    pub collect_w: bool,
    /// Only record `W_n` when `X_n >= w_min_m`.
    #[serde(default = "default_w_min_m")]
    pub w_min_m: u64,
}

fn default_w_min_m() -> u64 {
    10_000
}

impl FrontOptions {
    pub fn to_target(reach_target: u64) -> Self {
        FrontOptions {
            step_cap: u64::MAX,
            reach_target,
            collect_w: false,
            w_min_m: default_w_min_m(),
        }
    }
}

/// One observation of `W_n = X_{n+1} / X_n` with its conditioning value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WSample {
    pub step: u64,
    pub m: u64,
    pub w: f64,
}

/// State of the front recursion between steps.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontState {
    pub prev_front: i64,
    pub front: i64,
    pub step: u64,
    /// When `Some`, every `X_n` is appended.
    pub x_history: Option<Vec<u64>>,
}

impl FrontState {
    /// `i_0 = -1`, `i_1 = 0`.
    pub fn origin() -> Self {
        FrontState {
            prev_front: -1,
            front: 0,
            step: 1,
            x_history: None,
        }
    }

    /// A state whose current interval `(prev_front, front]` has length `m`.
    /// By the Markov property of `X_n`, the law of everything after is the
    /// same as for a run that arrived there from the origin.
    pub fn with_interval(front: i64, m: u64, step: u64) -> Self {
        FrontState {
            prev_front: front - m as i64,
            front,
            step,
            x_history: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontRun {
    pub outcome: FrontOutcome,
    pub w_samples: Vec<WSample>,
    /// The `X_n` sequence, when the starting state asked for it.
    pub x_history: Option<Vec<u64>>,
}

/// Front recursion from the origin with `N_i` drawn from `dist`.
pub fn run_front_p1(dist: &RangeDistribution, opts: &FrontOptions, rng: &mut Rng) -> FrontRun {
    let mut source = SampledRanges { dist, rng };
    run_front_from(&mut source, FrontState::origin(), opts)
}

/// Front recursion from an arbitrary state.
pub fn run_front_from<S: RangeSource>(
    source: &mut S,
    mut state: FrontState,
    opts: &FrontOptions,
) -> FrontRun {
    // The starting interval is the previous increment: X_0 = 1 at the origin.
    let mut last_x = (state.front - state.prev_front) as u64;
    let mut samples = Vec::new();
    loop {
        let n = state.step;
        if state.front >= 0 && state.front as u64 >= opts.reach_target {
            return alive(n, state, samples);
        }
        if n > opts.step_cap {
            return alive(opts.step_cap, state, samples);
        }
        // The current front itself contributes front + N >= front.
        let mut next = state.front;
        for i in (state.prev_front + 1)..=state.front {
            let reach = i.saturating_add(source.range(i as u64).min(i64::MAX as u64) as i64);
            next = next.max(reach);
        }
        let x = (next - state.front) as u64;
        if opts.collect_w && last_x >= opts.w_min_m.max(1) {
            samples.push(WSample {
                step: n - 1,
                m: last_x,
                w: x as f64 / last_x as f64,
            });
        }
        if let Some(h) = state.x_history.as_mut() {
            h.push(x);
        }
        if x == 0 {
            return FrontRun {
                outcome: FrontOutcome {
                    verdict: FrontVerdict::Died,
                    step: n,
                    rightmost: state.front as u64,
                },
                w_samples: samples,
                x_history: state.x_history,
            };
        }
        last_x = x;
        state.prev_front = state.front;
        state.front = next;
        state.step = n + 1;
    }
}

fn alive(step: u64, state: FrontState, w_samples: Vec<WSample>) -> FrontRun {
    FrontRun {
        outcome: FrontOutcome {
            verdict: FrontVerdict::Alive,
            step,
            rightmost: state.front.max(0) as u64,
        },
        w_samples,
        x_history: state.x_history,
    }
}

/// Environment for the thinned sweep.
pub trait ThinnedSource: RangeSource {
    /// Whether any bond from one of `coverers` (reached vertices whose
    /// range reaches `target`) into `target` is open. `count` is the number
    /// of coverers. Called at most once per target.
    fn enters(&mut self, target: u64, coverers: &mut dyn Iterator<Item = u64>, count: usize) -> bool;
}

/// Fresh ranges and bonds open independently with probability `p`.
///
/// Bonds into distinct targets are disjoint sets of independent bonds, so
/// drawing "some bond into `target` is open" as a single Bernoulli with
/// probability `1 - (1 - p)^count` has exactly the law of the bond-by-bond
/// construction.
pub struct SampledThinned<'a> {
    pub p: f64,
    pub dist: &'a RangeDistribution,
    pub rng: &'a mut Rng,
}

impl RangeSource for SampledThinned<'_> {
    fn range(&mut self, _i: u64) -> u64 {
        self.dist.sample(self.rng)
    }
}

impl ThinnedSource for SampledThinned<'_> {
    fn enters(&mut self, _target: u64, _coverers: &mut dyn Iterator<Item = u64>, count: usize) -> bool {
        let closed = (1.0 - self.p).powi(count.min(i32::MAX as usize) as i32);
        self.rng.bernoulli(1.0 - closed)
    }
}

/// Sweep state of the thinned model.
#[derive(Clone, Debug, Default)]
pub struct ThinnedFrontState {
    /// Next position to decide.
    pub position: u64,
    pub rightmost: u64,
    /// `max { j + N_j : j reached, j < position }`.
    pub max_reach: u64,
    /// Reached vertices `u > 0` with `max { j + N_j : j reached, j < u } = u`:
    /// every path from the origin beyond `u` passes through `u`.
    pub cutting_points: Vec<u64>,
    coverers: BinaryHeap<Reverse<(u64, u64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThinnedRun {
    pub outcome: FrontOutcome,
    pub cutting_points: Vec<u64>,
}

/// Thinned model from the origin; `step` in the outcome counts swept vertices.
pub fn run_front_thinned(
    p: f64,
    dist: &RangeDistribution,
    opts: &FrontOptions,
    rng: &mut Rng,
) -> ThinnedRun {
    assert!(p > 0.0 && p <= 1.0, "bond probability must lie in (0, 1]");
    let mut source = SampledThinned { p, dist, rng };
    run_thinned_with(&mut source, opts)
}

pub fn run_thinned_with<S: ThinnedSource>(source: &mut S, opts: &FrontOptions) -> ThinnedRun {
    let mut st = ThinnedFrontState::default();
    let finish = |st: ThinnedFrontState, verdict, step| ThinnedRun {
        outcome: FrontOutcome {
            verdict,
            step,
            rightmost: st.rightmost,
        },
        cutting_points: st.cutting_points,
    };
    loop {
        let w = st.position;
        let reached = if w == 0 {
            true
        } else {
            while st.coverers.peek().is_some_and(|Reverse((end, _))| *end < w) {
                st.coverers.pop();
            }
            if st.coverers.is_empty() {
                return finish(st, FrontVerdict::Died, w);
            }
            let count = st.coverers.len();
            let mut ids = st.coverers.iter().map(|Reverse((_, v))| *v);
            source.enters(w, &mut ids, count)
        };
        if reached {
            if w > 0 && st.max_reach == w {
                st.cutting_points.push(w);
            }
            st.rightmost = w;
            let n = source.range(w);
            let end = w.saturating_add(n);
            st.max_reach = st.max_reach.max(end);
            if n > 0 {
                st.coverers.push(Reverse((end, w)));
            }
            if w >= opts.reach_target {
                return finish(st, FrontVerdict::Alive, w + 1);
            }
        }
        st.position = w + 1;
        if st.position >= opts.step_cap {
            return finish(st, FrontVerdict::Alive, opts.step_cap);
        }
    }
}

/// Rightmost vertex reachable from 0 by forward search over open bonds
/// `(i, i + k)`, `1 <= k <= N_i`. Ranges past the end of `env` are 0.
/// Independent of the recursions above; intended as a test oracle.
pub fn brute_force_rightmost(env: &[u64], bond_open: impl Fn(u64, u64) -> bool) -> u64 {
    let horizon = env
        .iter()
        .enumerate()
        .map(|(i, &n)| i as u64 + n)
        .max()
        .unwrap_or(0)
        .max(env.len() as u64) as usize;
    let mut seen = vec![false; horizon + 1];
    seen[0] = true;
    let mut stack = vec![0u64];
    let mut best = 0;
    while let Some(i) = stack.pop() {
        best = best.max(i);
        let n = env.get(i as usize).copied().unwrap_or(0);
        for j in (i + 1)..=(i + n) {
            if !seen[j as usize] && bond_open(i, j) {
                seen[j as usize] = true;
                stack.push(j);
            }
        }
    }
    best
}

/// `P(vertex i is a cutting point) = exp(-beta H_i)` under `BetaExp(beta)`.
pub fn cutting_prob_exact(beta: f64, i: u64) -> f64 {
    assert!(i >= 1);
    let harmonic: f64 = (1..=i).map(|l| 1.0 / l as f64).sum();
    (-beta * harmonic).exp()
}

/// Limit law `F_Y(t) = (t / (t + 1))^beta` for `t > 0`, zero otherwise.
pub fn limit_cdf_fy(t: f64, beta: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (t / (t + 1.0)).powf(beta)
    }
}

/// `P(W_n <= t | X_n = m) = exp(-beta sum_{j<m} 1 / (f(mt) + j))`
/// with `f(s) = floor(s + 1)`.
pub fn wn_conditional_cdf(m: u64, t: f64, beta: f64) -> f64 {
    assert!(m >= 1 && t > 0.0);
    let f = (m as f64 * t + 1.0).floor();
    let sum: f64 = (0..m).map(|j| 1.0 / (f + j as f64)).sum();
    (-beta * sum).exp()
}

/// `E[log Y]` under `F_Y`, by quadrature of
/// `P(log Y >= s) - P(log Y <= -s)` over `s >= 0`.
pub fn mean_log_limit(beta: f64) -> f64 {
    let g = |s: f64| {
        let es = s.exp();
        let upper = 1.0 - (es / (1.0 + es)).powf(beta);
        let lower = (1.0 + es).powf(-beta);
        upper - lower
    };
    // The integrand decays like e^-s (beta < 1 side like e^(-beta s)).
    let hi = 60.0 / beta.min(1.0);
    let n = 200_000;
    let h = hi / n as f64;
    let mut acc = g(0.0) + g(hi);
    for k in 1..n {
        acc += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}
