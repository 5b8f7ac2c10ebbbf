//! Shifted-Weibull completion times and Monte Carlo deadline-failure
//! estimates.
//!
//! A task convolving two length-`s` pieces never finishes before its
//! deterministic cost `τ(s) = 2Cs·log(2s)`; beyond that the normalized excess
//! `μ(t/τ − 1)` is Weibull with shape `α` (exponential for `α = 1`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv::CostModel;
use crate::error::{invalid, Result};
use crate::planner::ExecutionPlan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeModel {
    pub mu: f64,
    pub alpha: f64,
    pub cost: CostModel,
}

impl TimeModel {
    pub fn new(mu: f64, alpha: f64, cost: CostModel) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return invalid(format!("straggling parameter mu must be positive, got {mu}"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(format!("shape alpha must be positive, got {alpha}"));
        }
        Ok(Self { mu, alpha, cost })
    }

    /// Shifted exponential with `C = 1`, log base 2.
    pub fn exponential(mu: f64) -> Result<Self> {
        Self::new(mu, 1.0, CostModel::default())
    }
}

/// Deterministic shift `τ(s) = 2Cs·log(2s)`.
pub fn task_shift(s: u64, model: &TimeModel) -> f64 {
    task_shift_at(s as f64, model)
}

pub(crate) fn task_shift_at(s: f64, model: &TimeModel) -> f64 {
    2.0 * model.cost.c * s * model.cost.log(2.0 * s)
}

/// `P(T ≤ t)` for one task at piece length `s`.
pub fn cdf(s: u64, t: f64, model: &TimeModel) -> f64 {
    let tau = task_shift(s, model);
    if t <= tau {
        return 0.0;
    }
    1.0 - (-(model.mu * (t / tau - 1.0)).powf(model.alpha)).exp()
}

/// Inverse-transform sample for `u ∈ [0, 1)`.
pub fn sample_time(s: u64, model: &TimeModel, u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return invalid(format!("uniform draw must lie in [0, 1), got {u}"));
    }
    Ok(sample_unchecked(task_shift(s, model), model, u))
}

fn sample_unchecked(tau: f64, model: &TimeModel, u: f64) -> f64 {
    tau * (1.0 + (-(-u).ln_1p()).powf(1.0 / model.alpha) / model.mu)
}

/// Sampled finish time of every task of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionTrace {
    pub finish_times: Vec<f64>,
    pub seed: u64,
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn fill_times(rng: &mut ChaCha8Rng, tau: f64, model: &TimeModel, out: &mut [f64]) {
    for t in out.iter_mut() {
        *t = sample_unchecked(tau, model, rng.gen::<f64>());
    }
}

/// One independent draw per task at the plan's piece length.
pub fn simulate_trace(plan: &ExecutionPlan, model: &TimeModel, seed: u64) -> CompletionTrace {
    let mut rng = trial_rng(seed, 0);
    let mut finish_times = vec![0.0; plan.tasks.len()];
    fill_times(&mut rng, task_shift(plan.piece_len, model), model, &mut finish_times);
    CompletionTrace { finish_times, seed }
}

/// Time at which the last group reaches quorum: the maximum over groups of
/// the quorum-th smallest member finish time.
pub fn strategy_finish_time(plan: &ExecutionPlan, trace: &CompletionTrace) -> f64 {
    finish_time(plan, &trace.finish_times, &mut Vec::new())
}

fn finish_time(plan: &ExecutionPlan, times: &[f64], scratch: &mut Vec<f64>) -> f64 {
    plan.groups
        .iter()
        .map(|g| {
            scratch.clear();
            scratch.extend(g.members.iter().map(|&m| times[m]));
            let (_, kth, _) = scratch.select_nth_unstable_by(g.quorum - 1, f64::total_cmp);
            *kth
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Empirical survival `P(finish > deadline)` at one deadline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub deadline: f64,
    pub trials: u64,
    pub failures: u64,
    pub survival: f64,
}

/// Sampled strategy finish times, one per trial. Trial `i` draws from its
/// own ChaCha stream `i` under `seed`, so the result does not depend on how
/// trials are scheduled across threads.
pub fn sample_finish_times(plan: &ExecutionPlan, model: &TimeModel, trials: u64, seed: u64) -> Vec<f64> {
    let tau = task_shift(plan.piece_len, model);
    let p = plan.tasks.len();
    (0..trials)
        .into_par_iter()
        .map_init(
            || (vec![0.0; p], Vec::with_capacity(p)),
            |(times, scratch), trial| {
                let mut rng = trial_rng(seed, trial);
                fill_times(&mut rng, tau, model, times);
                finish_time(plan, times, scratch)
            },
        )
        .collect()
}

/// Monte Carlo estimate of `P(strategy finish time > t)` at each deadline.
pub fn monte_carlo_tail(
    plan: &ExecutionPlan,
    model: &TimeModel,
    deadlines: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<TailPoint>> {
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let mut finish = sample_finish_times(plan, model, trials, seed);
    finish.sort_unstable_by(f64::total_cmp);
    Ok(deadlines
        .iter()
        .map(|&deadline| {
            let on_time = finish.partition_point(|&f| f <= deadline) as u64;
            let failures = trials - on_time;
            TailPoint {
                deadline,
                trials,
                failures,
                survival: failures as f64 / trials as f64,
            }
        })
        .collect())
}
