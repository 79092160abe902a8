mod common;

use common::{binom_se, environment, hashed_bond};
use rangeperc::oned::{
    brute_force_rightmost, cutting_prob_exact, limit_cdf_fy, run_front_from, run_thinned_with,
    wn_conditional_cdf, FixedRanges, FrontOptions, FrontState, FrontVerdict, RangeSource, ThinnedSource,
};
use rangeperc::{RangeDistribution, Rng};

fn dists() -> [RangeDistribution; 4] {
    [
        RangeDistribution::beta_exp(2.0).unwrap(),
        RangeDistribution::beta_exp(0.8).unwrap(),
        RangeDistribution::geometric(0.8).unwrap(),
        RangeDistribution::pareto_tail(3.0, 1.2).unwrap(),
    ]
}

#[test]
fn recursion_matches_bfs() {
    let opts = FrontOptions::to_target(u64::MAX);
    let mut long = 0;
    for seed in 0..100u64 {
        let dist = &dists()[seed as usize % 4];
        let env = environment(10_001, dist, 20_000, seed);
        let run = run_front_from(&mut FixedRanges(&env), FrontState::origin(), &opts);
        assert_eq!(run.outcome.verdict, FrontVerdict::Died);
        assert_eq!(run.outcome.rightmost, brute_force_rightmost(&env, |_, _| true), "seed {seed}");
        long += (run.outcome.rightmost > 1000) as usize;
    }
    assert!(long >= 10, "only {long} environments reached past 1000");
}

#[test]
fn death_step_has_zero_increment() {
    let dist = RangeDistribution::beta_exp(1.0).unwrap();
    for seed in 0..200u64 {
        let env = environment(5000, &dist, 5000, seed);
        let state = FrontState { x_history: Some(Vec::new()), ..FrontState::origin() };
        let run = run_front_from(&mut FixedRanges(&env), state, &FrontOptions::to_target(u64::MAX));
        let xs = run.x_history.unwrap();
        assert_eq!(xs.len() as u64, run.outcome.step);
        assert_eq!(*xs.last().unwrap(), 0);
        assert!(xs[..xs.len() - 1].iter().all(|&x| x > 0));
        assert_eq!(xs.iter().sum::<u64>(), run.outcome.rightmost);
    }
}

/// Explicit environment with bonds decided by a fixed oracle.
struct Explicit<'a, F> {
    env: &'a [u64],
    open: F,
}

impl<F: Fn(u64, u64) -> bool> RangeSource for Explicit<'_, F> {
    fn range(&mut self, i: u64) -> u64 {
        self.env.get(i as usize).copied().unwrap_or(0)
    }
}

impl<F: Fn(u64, u64) -> bool> ThinnedSource for Explicit<'_, F> {
    fn enters(&mut self, target: u64, coverers: &mut dyn Iterator<Item = u64>, _count: usize) -> bool {
        for c in coverers {
            if (self.open)(c, target) {
                return true;
            }
        }
        false
    }
}

#[test]
fn thinned_sweep_matches_bfs() {
    let opts = FrontOptions::to_target(u64::MAX);
    for seed in 0..100u64 {
        let dist = &dists()[seed as usize % 4];
        let p = [0.3, 0.6, 0.9, 1.0][(seed / 4) as usize % 4];
        let env = environment(3000, dist, 3000, 1000 + seed);
        let open = hashed_bond(seed, p);
        let expect = brute_force_rightmost(&env, &open);
        let run = run_thinned_with(&mut Explicit { env: &env, open: &open }, &opts);
        assert_eq!(run.outcome.verdict, FrontVerdict::Died);
        assert_eq!(run.outcome.rightmost, expect, "seed {seed} p {p}");
    }
}

#[test]
fn thinned_with_all_bonds_open_has_the_same_cutting_points() {
    for seed in 0..100u64 {
        let env = environment(2000, &RangeDistribution::beta_exp(1.5).unwrap(), 2000, seed);
        let run = run_thinned_with(&mut Explicit { env: &env, open: |_, _| true }, &FrontOptions::to_target(u64::MAX));
        let front = run_front_from(&mut FixedRanges(&env), FrontState::origin(), &FrontOptions::to_target(u64::MAX));
        assert_eq!(run.outcome.rightmost, front.outcome.rightmost);
        // A reached w > 0 is recorded when no earlier vertex reaches past it.
        let mut reach = 0u64;
        let mut expect = Vec::new();
        for w in 1..=front.outcome.rightmost {
            reach = reach.max(w - 1 + env.get(w as usize - 1).copied().unwrap_or(0));
            if reach == w {
                expect.push(w);
            }
        }
        assert_eq!(run.cutting_points, expect, "seed {seed}");
    }
}

#[test]
fn cutting_frequency_matches_exact() {
    for (beta, i, seed) in [(1.5, 10u64, 3u64), (2.0, 5, 4)] {
        let dist = RangeDistribution::beta_exp(beta).unwrap();
        let mut rng = Rng::new(seed);
        let trials = 100_000u64;
        let hits = (0..trials)
            .filter(|_| (0..i).all(|j| j + dist.sample(&mut rng) < i))
            .count();
        let exact = cutting_prob_exact(beta, i);
        let freq = hits as f64 / trials as f64;
        assert!((freq - exact).abs() <= 4.0 * binom_se(exact, trials), "beta {beta} i {i}: {freq} vs {exact}");
    }
}

#[test]
fn conditional_law_converges() {
    for t in [0.5, 1.0, 2.0] {
        let errs: Vec<f64> = [100u64, 1000, 10_000]
            .iter()
            .map(|&m| (wn_conditional_cdf(m, t, 1.2) - limit_cdf_fy(t, 1.2)).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "t {t}: {errs:?}");
    }
}

#[test]
fn conditional_law_matches_one_step_simulation() {
    // Starting from an interval of length m, X_{n+1} / m has the exact law
    // wn_conditional_cdf(m, ., beta).
    let (m, beta) = (50u64, 1.2);
    let dist = RangeDistribution::beta_exp(beta).unwrap();
    let opts = FrontOptions { collect_w: true, w_min_m: m, step_cap: 1, ..FrontOptions::to_target(u64::MAX) };
    let trials = 100_000u64;
    let mut rng = Rng::new(8);
    let ws: Vec<f64> = (0..trials)
        .map(|_| {
            let mut src = rangeperc::oned::SampledRanges { dist: &dist, rng: &mut rng };
            run_front_from(&mut src, FrontState::with_interval(m as i64, m, 1), &opts).w_samples[0].w
        })
        .collect();
    for t in [0.5, 1.0, 2.0] {
        let exact = wn_conditional_cdf(m, t, beta);
        let freq = ws.iter().filter(|&&w| w <= t).count() as f64 / trials as f64;
        assert!((freq - exact).abs() <= 4.0 * binom_se(exact, trials), "t {t}: {freq} vs {exact}");
    }
}
