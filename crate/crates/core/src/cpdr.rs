//! Contact process with dynamical range.
//!
//! Every infected vertex `x` carries a current range `r_x`. It recovers at
//! rate 1, redraws its range from `N` at rate 1, and infects each vertex
//! `y != x` with `|y - x|_inf <= r_x` at rate `lambda`. The process is
//! simulated exactly with a single aggregate-rate clock (Gillespie direct
//! method) on the window `[-R, R]^d`, starting from the origin alone.
//!
//! Ranges of healthy vertices are not simulated. A vertex's range clock
//! runs whether or not it is infected, so when a healthy vertex is
//! infected its range is resolved lazily from the last value seen: it is
//! kept with probability `exp(-elapsed)` (no update in between) and
//! otherwise replaced by a fresh draw, which is exact because updates are
//! i.i.d. and independent of the infection dynamics.
//!
//! Infection attempts are aggregated per infected vertex with weight equal
//! to the number of in-window targets. Attempts that leave the window are
//! no-ops under [`BoundaryPolicy::Ignore`] and are therefore not simulated;
//! under [`BoundaryPolicy::AbortRun`] their total rate is tracked and the
//! first one ends the run.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::distributions::RangeDistribution;
use crate::rng::Rng;

/// Per-vertex cap on the out-of-window ball count. A rate this large fires
/// before any other event with overwhelming probability either way.
const BALL_CAP: u128 = 1 << 96;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpdrError {
    #[error("invalid contact-process config: {0}")]
    InvalidConfig(String),
    #[error("range of vertex {vertex} queried at {t} before its last query at {last}")]
    QueryInPast { vertex: u64, t: f64, last: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Attempts leaving the window are no-ops.
    #[default]
    Ignore,
    /// The first attempt leaving the window ends the run.
    AbortRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpdrConfig {
    pub dimension: u32,
    pub lambda: f64,
    pub dist: RangeDistribution,
    pub window_radius: u64,
    pub horizon: f64,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
    #[serde(default)]
    pub boundary_policy: BoundaryPolicy,
}

fn default_max_events() -> u64 {
    100_000_000
}

impl CpdrConfig {
    pub fn new(dimension: u32, lambda: f64, dist: RangeDistribution, window_radius: u64, horizon: f64) -> Self {
        CpdrConfig {
            dimension,
            lambda,
            dist,
            window_radius,
            horizon,
            max_events: default_max_events(),
            boundary_policy: BoundaryPolicy::Ignore,
        }
    }

    pub fn validate(&self) -> Result<(), CpdrError> {
        let bad = |m: String| Err(CpdrError::InvalidConfig(m));
        if self.dimension == 0 {
            return bad("dimension must be positive".into());
        }
        if self.window_radius == 0 {
            return bad("window_radius must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if self.max_events == 0 {
            return bad("max_events must be positive".into());
        }
        let side = 2 * self.window_radius as u128 + 1;
        if side.checked_pow(self.dimension).is_none_or(|v| v > 1 << 62) {
            return bad("window has too many vertices".into());
        }
        Ok(())
    }
}

/// `(2r + 1)^d - 1`, the number of `y != x` with `|y - x|_inf <= r`.
/// Saturates at `u128::MAX`.
pub fn ball_size(d: u32, r: u64) -> u128 {
    (2 * r as u128 + 1)
        .checked_pow(d)
        .map_or(u128::MAX, |v| v - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CpdrVerdict {
    Extinct { time: f64 },
    SurvivedToHorizon,
    BoundaryAborted { time: f64 },
    EventCapHit { time: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpdrOutcome {
    pub verdict: CpdrVerdict,
    pub max_infected: u64,
    pub events_processed: u64,
    pub final_time: f64,
}

type Coords = SmallVec<[i64; 4]>;

/// Vertex indexing for the window `[-R, R]^d`.
#[derive(Clone, Debug)]
struct Window {
    d: usize,
    radius: i64,
    side: u64,
}

impl Window {
    fn encode(&self, x: &[i64]) -> u64 {
        x.iter()
            .rev()
            .fold(0, |acc, &c| acc * self.side + (c + self.radius) as u64)
    }

    fn decode(&self, mut v: u64) -> Coords {
        (0..self.d)
            .map(|_| {
                let c = (v % self.side) as i64 - self.radius;
                v /= self.side;
                c
            })
            .collect()
    }

    /// Per-axis bounds of the radius-`r` ball around `x` clipped to the window.
    fn clipped_box(&self, x: &[i64], r: u64) -> Coords {
        let r = r.min(2 * self.radius as u64) as i64;
        x.iter()
            .map(|&c| (c + r).min(self.radius) - (c - r).max(-self.radius) + 1)
            .collect()
    }

    fn ball_in(&self, x: &[i64], r: u64) -> u64 {
        self.clipped_box(x, r).iter().map(|&l| l as u64).product::<u64>() - 1
    }
}

/// Fenwick tree over slot weights with prefix-sum search.
#[derive(Clone, Debug, Default)]
struct RateTree {
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl RateTree {
    fn with_capacity(cap: usize) -> Self {
        let cap = cap.next_power_of_two().max(16);
        RateTree {
            tree: vec![0; cap + 1],
            weights: vec![0; cap],
            total: 0,
        }
    }

    fn set(&mut self, slot: usize, w: u64) {
        if slot >= self.weights.len() {
            let mut grown = RateTree::with_capacity(2 * (slot + 1));
            for (i, &old) in self.weights.iter().enumerate() {
                if old > 0 {
                    grown.set(i, old);
                }
            }
            *self = grown;
        }
        let old = self.weights[slot];
        self.weights[slot] = w;
        self.total = self.total - old + w;
        let mut i = slot + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i] - old + w;
            i += i & i.wrapping_neg();
        }
    }

    /// Slot `s` with `prefix(s) <= target < prefix(s + 1)`; `target < total`.
    fn find(&self, mut target: u64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n;
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

#[derive(Clone, Debug)]
struct Infected {
    vertex: u64,
    range: u64,
    ball_in: u64,
    ball_out: u128,
}

/// Mutable simulation state of one run.
#[derive(Clone, Debug)]
pub struct CpdrState {
    config: CpdrConfig,
    window: Window,
    time: f64,
    slots: Vec<Infected>,
    slot_of: HashMap<u64, usize>,
    rates: RateTree,
    ball_out_total: u128,
    /// Last known `(range, query time)` for healthy vertices.
    lazy_memory: HashMap<u64, (u64, f64)>,
    rng: Rng,
    events: u64,
    max_infected: u64,
}

impl CpdrState {
    /// State at time 0: only the origin infected, its range freshly drawn.
    pub fn new(config: &CpdrConfig, seed: u64) -> Result<Self, CpdrError> {
        config.validate()?;
        let window = Window {
            d: config.dimension as usize,
            radius: config.window_radius as i64,
            side: 2 * config.window_radius + 1,
        };
        let mut st = CpdrState {
            config: config.clone(),
            window,
            time: 0.0,
            slots: Vec::new(),
            slot_of: HashMap::new(),
            rates: RateTree::with_capacity(16),
            ball_out_total: 0,
            lazy_memory: HashMap::new(),
            rng: Rng::new(seed),
            events: 0,
            max_infected: 0,
        };
        let origin = st.origin();
        let r = st.lazy_range_query(origin, 0.0)?;
        st.infect(origin, r);
        Ok(st)
    }

    pub fn origin(&self) -> u64 {
        self.window.encode(&vec![0; self.window.d])
    }

    pub fn vertex_index(&self, coords: &[i64]) -> u64 {
        self.window.encode(coords)
    }

    pub fn coords(&self, vertex: u64) -> Vec<i64> {
        self.window.decode(vertex).to_vec()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn infected_count(&self) -> usize {
        self.slots.len()
    }

    pub fn is_infected(&self, vertex: u64) -> bool {
        self.slot_of.contains_key(&vertex)
    }

    pub fn infected(&self) -> impl Iterator<Item = u64> + '_ {
        self.slots.iter().map(|s| s.vertex)
    }

    pub fn active_range(&self, vertex: u64) -> Option<u64> {
        self.slot_of.get(&vertex).map(|&s| self.slots[s].range)
    }

    pub fn events_processed(&self) -> u64 {
        self.events
    }

    /// The incrementally maintained total event rate.
    pub fn total_rate(&self) -> f64 {
        let abort = match self.config.boundary_policy {
            BoundaryPolicy::Ignore => 0.0,
            BoundaryPolicy::AbortRun => self.ball_out_total as f64,
        };
        2.0 * self.slots.len() as f64 + self.config.lambda * (self.rates.total as f64 + abort)
    }

    /// The total rate recomputed from the active ranges alone.
    pub fn recompute_total_rate(&self) -> f64 {
        let mut ball_in = 0u64;
        let mut ball_out = 0u128;
        for s in &self.slots {
            let (bi, bo) = self.balls(s.vertex, s.range);
            ball_in += bi;
            ball_out += bo;
        }
        let abort = match self.config.boundary_policy {
            BoundaryPolicy::Ignore => 0.0,
            BoundaryPolicy::AbortRun => ball_out as f64,
        };
        2.0 * self.slots.len() as f64 + self.config.lambda * (ball_in as f64 + abort)
    }

    /// Range of a healthy vertex at time `t`, given every earlier query.
    pub fn lazy_range_query(&mut self, vertex: u64, t: f64) -> Result<u64, CpdrError> {
        debug_assert!(!self.is_infected(vertex));
        let value = match self.lazy_memory.get(&vertex) {
            None => self.config.dist.sample(&mut self.rng),
            Some(&(v, last)) => {
                if t < last {
                    return Err(CpdrError::QueryInPast { vertex, t, last });
                }
                if self.rng.bernoulli((last - t).exp()) {
                    v
                } else {
                    self.config.dist.sample(&mut self.rng)
                }
            }
        };
        self.lazy_memory.insert(vertex, (value, t));
        Ok(value)
    }

    fn balls(&self, vertex: u64, range: u64) -> (u64, u128) {
        let x = self.window.decode(vertex);
        let inside = self.window.ball_in(&x, range);
        let outside = match self.config.boundary_policy {
            BoundaryPolicy::Ignore => 0,
            BoundaryPolicy::AbortRun => ball_size(self.config.dimension, range).min(BALL_CAP) - inside as u128,
        };
        (inside, outside)
    }

    fn infect(&mut self, vertex: u64, range: u64) {
        self.lazy_memory.remove(&vertex);
        let (ball_in, ball_out) = self.balls(vertex, range);
        let slot = self.slots.len();
        self.slots.push(Infected { vertex, range, ball_in, ball_out });
        self.slot_of.insert(vertex, slot);
        self.rates.set(slot, ball_in);
        self.ball_out_total += ball_out;
        self.max_infected = self.max_infected.max(self.slots.len() as u64);
    }

    fn recover(&mut self, slot: usize) {
        let last = self.slots.len() - 1;
        let gone = self.slots.swap_remove(slot);
        self.slot_of.remove(&gone.vertex);
        self.ball_out_total -= gone.ball_out;
        if slot != last {
            let moved = &self.slots[slot];
            self.slot_of.insert(moved.vertex, slot);
            let w = moved.ball_in;
            self.rates.set(slot, w);
        }
        self.rates.set(last, 0);
        self.lazy_memory.insert(gone.vertex, (gone.range, self.time));
    }

    fn update_range(&mut self, slot: usize) {
        let range = self.config.dist.sample(&mut self.rng);
        let (ball_in, ball_out) = self.balls(self.slots[slot].vertex, range);
        let s = &mut self.slots[slot];
        self.ball_out_total = self.ball_out_total - s.ball_out + ball_out;
        s.range = range;
        s.ball_in = ball_in;
        s.ball_out = ball_out;
        self.rates.set(slot, ball_in);
    }

    /// Uniform target in the clipped punctured ball around the vertex in `slot`.
    fn pick_target(&mut self, slot: usize) -> u64 {
        let s = &self.slots[slot];
        let x = self.window.decode(s.vertex);
        let lens = self.window.clipped_box(&x, s.range);
        let r = s.range.min(2 * self.window.radius as u64) as i64;
        let lows: Coords = x.iter().map(|&c| (c - r).max(-self.window.radius)).collect();
        // Index of x itself inside the box, in the same mixed radix.
        let mut self_idx = 0u64;
        for i in (0..x.len()).rev() {
            self_idx = self_idx * lens[i] as u64 + (x[i] - lows[i]) as u64;
        }
        let mut k = self.rng.below(s.ball_in);
        if k >= self_idx {
            k += 1;
        }
        let y: Coords = (0..x.len())
            .map(|i| {
                let c = lows[i] + (k % lens[i] as u64) as i64;
                k /= lens[i] as u64;
                c
            })
            .collect();
        self.window.encode(&y)
    }

    /// Processes one event. Returns the verdict once the run has ended.
    pub fn step(&mut self) -> Result<Option<CpdrVerdict>, CpdrError> {
        let k = self.slots.len() as u64;
        if k == 0 {
            return Ok(Some(CpdrVerdict::Extinct { time: self.time }));
        }
        if self.events >= self.config.max_events {
            return Ok(Some(CpdrVerdict::EventCapHit { time: self.time }));
        }
        let total = self.total_rate();
        let t = self.time + self.rng.exponential(total);
        if t > self.config.horizon {
            self.time = self.config.horizon;
            return Ok(Some(CpdrVerdict::SurvivedToHorizon));
        }
        self.time = t;
        self.events += 1;
        let u = self.rng.uniform() * total;
        let kf = k as f64;
        let infect_rate = self.config.lambda * self.rates.total as f64;
        if u < kf {
            let slot = self.rng.below(k) as usize;
            self.recover(slot);
            if self.slots.is_empty() {
                return Ok(Some(CpdrVerdict::Extinct { time: t }));
            }
        } else if u < 2.0 * kf {
            let slot = self.rng.below(k) as usize;
            self.update_range(slot);
        } else if u < 2.0 * kf + infect_rate || self.ball_out_total == 0 {
            if self.rates.total == 0 {
                return Ok(None);
            }
            let slot = self.rates.find(self.rng.below(self.rates.total));
            let y = self.pick_target(slot);
            if !self.is_infected(y) {
                let r = self.lazy_range_query(y, t)?;
                self.infect(y, r);
            }
        } else {
            return Ok(Some(CpdrVerdict::BoundaryAborted { time: t }));
        }
        Ok(None)
    }

    pub fn outcome(&self, verdict: CpdrVerdict) -> CpdrOutcome {
        CpdrOutcome {
            verdict,
            max_infected: self.max_infected,
            events_processed: self.events,
            final_time: self.time,
        }
    }
}

/// Simulates one run from the origin until extinction, the horizon, a
/// boundary abort, or the event cap.
pub fn run_cpdr(config: &CpdrConfig, seed: u64) -> Result<CpdrOutcome, CpdrError> {
    let mut st = CpdrState::new(config, seed)?;
    loop {
        if let Some(v) = st.step()? {
            return Ok(st.outcome(v));
        }
    }
}
