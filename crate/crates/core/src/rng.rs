//! Deterministic pseudo-random number generation.
//!
//! The generator is xoshiro256** whose 256-bit state is filled from the
//! 64-bit seed by four successive splitmix64 outputs. Both algorithms are
//! fully specified integer recurrences, so a given seed produces the same
//! stream on every platform and build.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Advances a splitmix64 state and returns the next output.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    mix64(*state)
}

/// `k + 0.5` is not representable for `k >= 2^52` and rounds to `2^53` at the
/// very top, so the result is clamped to the largest double below one.
#[inline]
fn unit_from_bits(x: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (((x >> 11) as f64 + 0.5) * SCALE).min(1.0 - SCALE)
}

/// xoshiro256** seeded through splitmix64.
///
/// A generator is owned by exactly one simulation run and is never shared
/// between threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rng {
    s: [u64; 4],
    seed: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s, seed }
    }

    /// The seed this generator was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform variate in the open interval (0, 1).
    ///
    /// The top 53 bits `k` map to `(k + 0.5) * 2^-53`, so neither endpoint
    /// can be produced and `ln(u)` is always finite.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit_from_bits(self.next_u64())
    }

    /// Exponential variate with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform().ln() / rate
    }

    /// `true` with probability `p`; `p <= 0` is never and `p >= 1` always.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `[0, n)` without modulo bias. `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Lemire's multiply-shift with rejection.
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform integer in `[0, n)` for 128-bit bounds.
    pub fn below_u128(&mut self, n: u128) -> u128 {
        debug_assert!(n > 0);
        if n <= u64::MAX as u128 {
            return self.below(n as u64) as u128;
        }
        let zone = u128::MAX - (u128::MAX % n);
        loop {
            let x = ((self.next_u64() as u128) << 64) | self.next_u64() as u128;
            if x < zone {
                return x % n;
            }
        }
    }

    /// Number of Bernoulli(`p`) trials up to and including the first success.
    /// Returns `None` when `p <= 0`.
    #[inline]
    pub fn geometric_trials(&mut self, p: f64) -> Option<u64> {
        if p <= 0.0 {
            return None;
        }
        if p >= 1.0 {
            return Some(1);
        }
        let g = (self.uniform().ln() / (-p).ln_1p()).ceil();
        Some(if g < 1.0 { 1 } else { g as u64 })
    }
}
