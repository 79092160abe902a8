//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rangeperc::aprr::{AprrEnvironment, Site};
use rangeperc::rng::mix64;
use rangeperc::{RangeDistribution, Rng};

/// Contact process with dynamical range on `[-radius, radius]` driven by one
/// clock per ordered bond, one recovery clock and one update clock per
/// vertex. Every vertex carries a range at all times. Returns whether the
/// infection is alive at `horizon`.
pub fn per_bond_survives(radius: i64, lambda: f64, dist: &RangeDistribution, horizon: f64, seed: u64) -> bool {
    let n = (2 * radius + 1) as usize;
    let mut rng = Rng::new(seed);
    let mut range: Vec<u64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let mut infected = vec![false; n];
    infected[radius as usize] = true;
    let mut alive = 1usize;
    let bonds = (n * (n - 1)) as f64;
    let total = 2.0 * n as f64 + lambda * bonds;
    let mut t = 0.0;
    loop {
        t += rng.exponential(total);
        if t > horizon {
            return true;
        }
        let u = rng.uniform() * total;
        if u < n as f64 {
            let x = u as usize;
            if infected[x] {
                infected[x] = false;
                alive -= 1;
                if alive == 0 {
                    return false;
                }
            }
        } else if u < 2.0 * n as f64 {
            range[(u - n as f64) as usize] = dist.sample(&mut rng);
        } else {
            let b = (((u - 2.0 * n as f64) / lambda) as usize).min(n * (n - 1) - 1);
            let x = b / (n - 1);
            let mut y = b % (n - 1);
            if y >= x {
                y += 1;
            }
            if infected[x] && !infected[y] && x.abs_diff(y) as u64 <= range[x] {
                infected[y] = true;
                alive += 1;
            }
        }
    }
}

/// Fully pre-sampled APRR environment on the box `[0, side)^2`: ranges,
/// every horizontal bond `(x, x + n e_1)` and every vertical bond, each
/// driven by its own uniform. Bonds leaving the box are closed.
pub struct DenseAprr {
    pub side: i64,
    pub p: f64,
    pub q: f64,
    pub range: Vec<u64>,
    /// `h[(site, n)]`, uniform for the bond of length `n`.
    pub h: HashMap<(usize, u64), f64>,
    pub v: Vec<f64>,
}

impl DenseAprr {
    pub fn new(side: i64, p: f64, q: f64, dist: &RangeDistribution, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let cells = (side * side) as usize;
        let range: Vec<u64> = (0..cells).map(|_| dist.sample(&mut rng)).collect();
        let mut h = HashMap::new();
        for (idx, &r) in range.iter().enumerate() {
            let x1 = idx as i64 % side;
            for n in 1..=r.min((side - 1 - x1).max(0) as u64) {
                h.insert((idx, n), rng.uniform());
            }
        }
        let v = (0..cells).map(|_| rng.uniform()).collect();
        DenseAprr { side, p, q, range, h, v }
    }

    pub fn index(&self, x1: i64, x2: i64) -> usize {
        (x2 * self.side + x1) as usize
    }

    pub fn horizontal_open(&self, idx: usize, n: u64) -> bool {
        self.h.get(&(idx, n)).is_some_and(|&u| u < self.p)
    }

    pub fn vertical_open_at(&self, idx: usize) -> bool {
        let x2 = idx as i64 / self.side;
        x2 + 1 < self.side && self.v[idx] < self.q
    }

    /// Reachable set from the origin by repeated frontier expansion over a
    /// dense boolean adjacency matrix.
    pub fn reachable(&self) -> Vec<bool> {
        let cells = (self.side * self.side) as usize;
        let mut adj = vec![false; cells * cells];
        for a in 0..cells {
            for n in 1..=self.range[a].min(self.side as u64) {
                if self.horizontal_open(a, n) {
                    adj[a * cells + a + n as usize] = true;
                }
            }
            if self.vertical_open_at(a) {
                adj[a * cells + a + self.side as usize] = true;
            }
        }
        let mut seen = vec![false; cells];
        seen[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..cells {
                if !seen[a] {
                    continue;
                }
                for b in 0..cells {
                    if adj[a * cells + b] && !seen[b] {
                        seen[b] = true;
                        changed = true;
                    }
                }
            }
        }
        seen
    }
}

impl AprrEnvironment for &DenseAprr {
    fn range(&mut self, x: &Site) -> u64 {
        self.range[self.index(x[0], x[1])]
    }

    fn next_open_horizontal(&mut self, x: &Site, after: u64, range: u64) -> Option<u64> {
        let idx = self.index(x[0], x[1]);
        ((after + 1)..=range.min(self.side as u64)).find(|&n| self.horizontal_open(idx, n))
    }

    fn vertical_open(&mut self, x: &Site, axis: usize) -> bool {
        assert_eq!(axis, 1);
        self.vertical_open_at(self.index(x[0], x[1]))
    }
}

/// Bond `(i, j)` of the 1D model is open iff a hash of `(seed, i, j)` falls
/// below `p`.
pub fn hashed_bond(seed: u64, p: f64) -> impl Fn(u64, u64) -> bool {
    move |i, j| {
        let h = mix64(seed ^ mix64(i.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ j));
        ((h >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p
    }
}

/// An explicit 1D environment of `len` ranges drawn from `dist` and clipped
/// at `clip` so that scans stay finite.
pub fn environment(len: usize, dist: &RangeDistribution, clip: u64, seed: u64) -> Vec<u64> {
    let mut rng = Rng::new(seed);
    (0..len).map(|_| dist.sample(&mut rng).min(clip)).collect()
}

/// Standard error of a binomial proportion estimated from `n` trials.
pub fn binom_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
