use crate::rng::mix64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for run `run_index` of an experiment with master seed `master`:
/// the splitmix64 finalizer of `master ^ (GOLDEN * (run_index + 1))`.
pub fn derive_run_seed(master: u64, run_index: u64) -> u64 {
    mix64(master ^ GOLDEN.wrapping_mul(run_index.wrapping_add(1)))
}
