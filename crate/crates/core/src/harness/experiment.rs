use std::time::Instant;

use serde_json::json;

use super::config::{BoundsConfig, ExperimentConfig, ModelParams};
use super::exec::{map_runs, Parallelism};
use super::output::{RunRecord, SummaryRow};
use super::seeds::derive_run_seed;
use super::stats::{wilson_interval, DEFAULT_Z};
use super::HarnessError;
use crate::aprr::explore_cluster;
use crate::bounds::{
    branching_mean, horizontal_block_open_prob, lambda0_bound, odd_ball_moment, rho_l, BoundReport,
};
use crate::cpdr::{run_cpdr, CpdrVerdict};
use crate::oned::{cutting_prob_exact, run_front_p1, run_front_thinned, FrontVerdict, WSample};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    /// One row per sweep value, in sweep order.
    pub summary: Vec<SummaryRow>,
    /// `W_n` samples from `oned_p1` runs with `collect_w` set, in run order.
    pub w_samples: Vec<WSample>,
    /// `(i, exp(-beta H_i))` when a cutting table was requested.
    pub cutting_table: Vec<(u64, f64)>,
}

struct RunResult {
    record: RunRecord,
    success: bool,
    w_samples: Vec<WSample>,
}

fn run_one(params: &ModelParams, seed: u64) -> Result<(String, f64, f64, bool, Vec<WSample>), HarnessError> {
    let err = |e: &dyn std::fmt::Display| HarnessError::InvalidConfig(e.to_string());
    Ok(match params {
        ModelParams::Cpdr(c) => {
            let o = run_cpdr(c, seed).map_err(|e| err(&e))?;
            let verdict = match o.verdict {
                CpdrVerdict::Extinct { .. } => "extinct",
                CpdrVerdict::SurvivedToHorizon => "survived",
                CpdrVerdict::BoundaryAborted { .. } => "boundary_aborted",
                CpdrVerdict::EventCapHit { .. } => "event_cap",
            };
            let survived = o.verdict == CpdrVerdict::SurvivedToHorizon;
            (verdict.into(), o.final_time, o.max_infected as f64, survived, Vec::new())
        }
        ModelParams::Aprr(c) => {
            let o = explore_cluster(c, seed).map_err(|e| err(&e))?;
            let verdict = match o.verdict {
                crate::aprr::ClusterVerdict::Died => "died",
                crate::aprr::ClusterVerdict::ReachedSizeCap => "size_cap",
                crate::aprr::ClusterVerdict::ReachedDistanceCap => "distance_cap",
            };
            (verdict.into(), o.size as f64, o.max_coord1 as f64, o.verdict.percolated(), Vec::new())
        }
        ModelParams::OnedP1(c) => {
            let mut rng = Rng::new(seed);
            let r = run_front_p1(&c.dist, &c.options, &mut rng);
            let alive = r.outcome.verdict == FrontVerdict::Alive;
            let v = if alive { "alive" } else { "died" };
            (v.into(), r.outcome.rightmost as f64, r.outcome.step as f64, alive, r.w_samples)
        }
        ModelParams::OnedThinned(c) => {
            let mut rng = Rng::new(seed);
            let r = run_front_thinned(c.p, &c.dist, &c.options, &mut rng);
            let alive = r.outcome.verdict == FrontVerdict::Alive;
            let v = if alive { "alive" } else { "died" };
            (v.into(), r.outcome.rightmost as f64, r.outcome.step as f64, alive, Vec::new())
        }
    })
}

/// Runs every sweep value `runs` times. Run `r` of sweep value `s` has global
/// index `s * runs + r` and seed `derive_run_seed(master_seed, index)`, so
/// the output does not depend on `par`.
pub fn run_experiment(cfg: &ExperimentConfig, par: Parallelism) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let model = cfg.model.name();
    let mut records = Vec::new();
    let mut summary = Vec::new();
    let mut w_samples = Vec::new();
    for (s, value) in cfg.sweep_values().into_iter().enumerate() {
        let params = cfg.resolve(value)?;
        let base = s as u64 * cfg.runs;
        let results = map_runs(cfg.runs, par, |r| -> Result<RunResult, HarnessError> {
            let index = base + r;
            let seed = derive_run_seed(cfg.master_seed, index);
            let start = Instant::now();
            let (verdict, value1, value2, success, ws) = run_one(&params, seed)?;
            let wall_ms = cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            Ok(RunResult {
                record: RunRecord {
                    model: model.to_string(),
                    sweep_param: cfg.sweep_param().to_string(),
                    sweep_value: value,
                    run_index: index,
                    seed,
                    verdict,
                    value1,
                    value2,
                    wall_ms,
                },
                success,
                w_samples: ws,
            })
        });
        let mut successes = 0u64;
        for r in results {
            let r = r?;
            successes += r.success as u64;
            records.push(r.record);
            w_samples.extend(r.w_samples);
        }
        let (lo, hi) = wilson_interval(successes, cfg.runs, DEFAULT_Z);
        summary.push(SummaryRow {
            sweep_value: value,
            runs: cfg.runs,
            successes,
            fraction: successes as f64 / cfg.runs as f64,
            wilson_lo: lo,
            wilson_hi: hi,
        });
    }
    let cutting_table = cfg
        .cutting_table
        .as_ref()
        .map(|t| (1..=t.max_i).map(|i| (i, cutting_prob_exact(t.beta, i))).collect())
        .unwrap_or_default();
    Ok(ExperimentResult { records, summary, w_samples, cutting_table })
}

/// Every bound the `bounds` subcommand reports, in a fixed order.
pub fn bound_reports(cfg: &BoundsConfig) -> Vec<BoundReport> {
    let d = cfg.dimension;
    let dist = &cfg.dist;
    let mut out = vec![BoundReport::new(
        "odd_ball_moment",
        odd_ball_moment(dist, d),
        json!({ "dist": dist, "d": d }),
    )];
    out.push(lambda0_bound(dist, d).unwrap_or_else(|_| {
        BoundReport::new("lambda0_bound", f64::INFINITY, json!({ "dist": dist, "d": d }))
    }));
    for &lambda in &cfg.lambdas {
        out.push(branching_mean(dist, d, lambda));
    }
    for &l in &cfg.block_sizes {
        out.push(BoundReport::new("rho_l", rho_l(dist, l), json!({ "dist": dist, "l": l })));
    }
    for &lambda in &cfg.lambdas {
        for &l in &cfg.block_sizes {
            let rho = rho_l(dist, l);
            out.push(BoundReport::new(
                "horizontal_block_open_prob",
                horizontal_block_open_prob(lambda, rho, l),
                json!({ "dist": dist, "lambda": lambda, "rho": rho, "l": l }),
            ));
        }
    }
    out
}
