use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use codedconv::analytics::{
    alpha_threshold, best_piece_len, coding_gain, complexity_ratio, epsilon, epsilon_replication,
    fit_tail_slope, log_exponent,
};
use codedconv::conv::{convolve_direct, max_relative_error};
use codedconv::planner::{brute_force_worst_case_k, feasible_coded_lens, ExecutionPlan, EXHAUSTIVE_MAX_P};
use codedconv::sim::monte_carlo_tail;
use codedconv::{CompletionOrder, Engine, RealVector, Strategy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{replication_factor, Experiment};

pub const CSV_HEADER: &str = "strategy,s,r,deadline,trials,failures,survival,log10_survival";

/// Correctness tolerance for verified executions.
pub const VERIFY_TOLERANCE: f64 = 1e-8;
pub const VERIFY_ORDERS: usize = 20;
/// Largest n1·n2 for which the direct oracle is run.
pub const VERIFY_MAX_WORK: u64 = 1 << 24;

#[derive(Debug, Serialize)]
pub struct PlanGroup {
    pub group_id: usize,
    pub members: Vec<usize>,
    pub quorum: usize,
}

#[derive(Debug, Serialize)]
pub struct PlanSummary {
    pub strategy: &'static str,
    pub s: u64,
    pub r: Option<u64>,
    pub groups: Vec<PlanGroup>,
    pub worst_k: usize,
    /// Worst case found by enumerating completion orders (p ≤ 16).
    pub brute_force_k: Option<usize>,
    pub brute_force_method: Option<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct PlanReport {
    pub n1: u64,
    pub n2: u64,
    pub p: u64,
    pub size_assumption_holds: bool,
    pub plans: Vec<PlanSummary>,
}

pub fn plan(exp: &Experiment) -> Result<(String, PlanReport)> {
    let mut text = String::new();
    let spec = exp.spec;
    writeln!(text, "problem: n1={} n2={} p={}", spec.n1, spec.n2, spec.p)?;
    if !spec.satisfies_size_assumption() {
        writeln!(text, "note: 2*sqrt(n1*n2/p) > min(n1, n2); doubling the uncoded piece length does not fit")?;
    }
    let mut plans = Vec::new();
    for plan in &exp.plans {
        let (brute, method) = match brute_force_worst_case_k(plan) {
            Ok(k) if plan.tasks.len() <= EXHAUSTIVE_MAX_P => (Some(k), Some("exhaustive")),
            Ok(k) => (Some(k), Some("adversarial")),
            Err(_) => (None, None),
        };
        write!(text, "{}: s={} groups={}", label(plan), plan.piece_len, plan.groups.len())?;
        let g = &plan.groups[0];
        write!(text, " (size {} quorum {}) worst_k={}", g.members.len(), g.quorum, plan.worst_k)?;
        match (brute, method) {
            (Some(k), Some(m)) => {
                let verdict = if k == plan.worst_k { "matches" } else { "DIFFERS" };
                writeln!(text, " brute_force_k={k} ({m}, {verdict})")?
            }
            _ => writeln!(text, " brute_force_k=skipped")?,
        }
        plans.push(PlanSummary {
            strategy: plan.strategy.name(),
            s: plan.piece_len,
            r: replication_factor(plan),
            groups: plan
                .groups
                .iter()
                .map(|g| PlanGroup {
                    group_id: g.group_id,
                    members: g.members.clone(),
                    quorum: g.quorum,
                })
                .collect(),
            worst_k: plan.worst_k,
            brute_force_k: brute,
            brute_force_method: method,
        });
    }
    Ok((
        text,
        PlanReport {
            n1: spec.n1,
            n2: spec.n2,
            p: spec.p,
            size_assumption_holds: spec.satisfies_size_assumption(),
            plans,
        },
    ))
}

fn label(plan: &ExecutionPlan) -> String {
    match plan.strategy {
        Strategy::Uncoded => "uncoded".into(),
        Strategy::Replication { r } => format!("replication r={r}"),
        Strategy::Coded { s } => format!("coded s={s}"),
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyOutcome {
    pub strategy: String,
    pub orders: usize,
    pub max_relative_error: f64,
    pub max_tasks_used: usize,
    pub worst_k: usize,
    pub passed: bool,
    pub failing_order: Option<Vec<usize>>,
}

/// Executes every strategy under [`VERIFY_ORDERS`] random completion orders
/// and compares against the direct convolution.
pub fn verify(exp: &Experiment, seed: u64, decoder_fault: Option<f64>) -> Result<Vec<VerifyOutcome>> {
    let spec = exp.spec;
    if spec.n1 * spec.n2 > VERIFY_MAX_WORK {
        bail!(
            "n1*n2 = {} exceeds the verification limit {VERIFY_MAX_WORK}",
            spec.n1 * spec.n2
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |len: u64| RealVector::new((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let a = draw(spec.n1)?;
    let x = draw(spec.n2)?;
    let truth = convolve_direct(&a, &x)?;

    let mut engine = Engine::new(exp.config.node_scheme);
    if let Some(delta) = decoder_fault {
        engine = engine.with_decoder_fault(delta);
    }
    let mut order_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut outcomes = Vec::new();
    for plan in &exp.plans {
        let mut worst = 0.0f64;
        let mut max_used = 0;
        let mut failing = None;
        for _ in 0..VERIFY_ORDERS {
            let mut order: Vec<usize> = (0..plan.tasks.len()).collect();
            order.shuffle(&mut order_rng);
            let res = engine
                .execute(plan, &a, &x, &CompletionOrder::Sequence(order.clone()))
                .with_context(|| format!("executing {}", label(plan)))?;
            let err = max_relative_error(&res.output, &truth);
            max_used = max_used.max(res.tasks_used);
            if err > worst {
                worst = err;
            }
            if !(err <= VERIFY_TOLERANCE) && failing.is_none() {
                failing = Some(order);
            }
        }
        outcomes.push(VerifyOutcome {
            strategy: label(plan),
            orders: VERIFY_ORDERS,
            max_relative_error: worst,
            max_tasks_used: max_used,
            worst_k: plan.worst_k,
            passed: failing.is_none() && max_used <= plan.worst_k,
            failing_order: failing,
        });
    }
    Ok(outcomes)
}

fn fmt_opt(v: Option<u64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Monte Carlo survival table, one row per (strategy, deadline).
pub fn simulate(exp: &Experiment, trials: u64, seed: u64) -> Result<String> {
    let deadlines = exp.deadlines()?;
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}")?;
    for (idx, plan) in exp.plans.iter().enumerate() {
        // Strategies draw from independent seeds derived from the base seed.
        let strategy_seed = seed.wrapping_add((idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        for pt in monte_carlo_tail(plan, &exp.model, &deadlines, trials, strategy_seed)? {
            let log10 = if pt.survival > 0.0 {
                pt.survival.log10().to_string()
            } else {
                String::new()
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                plan.strategy.name(),
                plan.piece_len,
                fmt_opt(replication_factor(plan)),
                pt.deadline,
                pt.trials,
                pt.failures,
                pt.survival,
                log10
            )?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRow {
    pub strategy: String,
    pub s: u64,
    pub r: Option<u64>,
    pub deadline: f64,
    pub survival: f64,
}

pub fn parse_simulation_csv(text: &str) -> Result<Vec<SurvivalRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => bail!("unexpected simulation CSV header: {other:?}"),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                bail!("row {} has {} columns, expected 8", i + 1, cols.len());
            }
            Ok(SurvivalRow {
                strategy: cols[0].to_string(),
                s: cols[1].parse().with_context(|| format!("row {}: s", i + 1))?,
                r: if cols[2].is_empty() {
                    None
                } else {
                    Some(cols[2].parse().with_context(|| format!("row {}: r", i + 1))?)
                },
                deadline: cols[3].parse().with_context(|| format!("row {}: deadline", i + 1))?,
                survival: cols[6].parse().with_context(|| format!("row {}: survival", i + 1))?,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct StrategyAnalysis {
    pub strategy: &'static str,
    pub s: u64,
    pub r: Option<u64>,
    pub worst_k: usize,
    pub epsilon: f64,
    pub is_upper_bound: bool,
    pub complexity_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CodingGainReport {
    pub ratio: f64,
    pub lower_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct LogExponentPoint {
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct DoublingComparison {
    pub uncoded: LogExponentPoint,
    pub coded: LogExponentPoint,
    pub coding_outperforms: bool,
}

#[derive(Debug, Serialize)]
pub struct SlopeComparison {
    pub strategy: String,
    pub s: u64,
    pub r: Option<u64>,
    pub fitted: f64,
    pub theory: f64,
    pub relative_error: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub n1: u64,
    pub n2: u64,
    pub p: u64,
    pub mu: f64,
    pub alpha: f64,
    pub c: f64,
    pub size_assumption_holds: bool,
    pub strategies: Vec<StrategyAnalysis>,
    pub coding_gain: Option<CodingGainReport>,
    pub alpha_threshold: f64,
    pub regime: &'static str,
    pub best_s: Option<u64>,
    pub doubling: Option<DoublingComparison>,
    pub log_exponent_curve: Vec<LogExponentPoint>,
    pub fitted_slopes: Option<Vec<SlopeComparison>>,
}

fn theory_epsilon(exp: &Experiment, plan: &ExecutionPlan) -> Result<f64> {
    Ok(match plan.strategy {
        Strategy::Replication { r } => epsilon_replication(&exp.spec, r, &exp.model)?.epsilon,
        _ => epsilon(&exp.spec, plan.piece_len, &exp.model)?.epsilon,
    })
}

pub fn analyze(exp: &Experiment, simulation_csv: Option<&str>) -> Result<AnalysisReport> {
    let spec = exp.spec;
    let model = exp.model;

    let strategies = exp
        .plans
        .iter()
        .map(|plan| {
            let is_upper_bound = matches!(plan.strategy, Strategy::Coded { .. });
            Ok(StrategyAnalysis {
                strategy: plan.strategy.name(),
                s: plan.piece_len,
                r: replication_factor(plan),
                worst_k: plan.worst_k,
                epsilon: theory_epsilon(exp, plan)?,
                is_upper_bound,
                complexity_ratio: match plan.strategy {
                    Strategy::Coded { s } => Some(complexity_ratio(&spec, s, &model.cost)?),
                    _ => None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let gain = coding_gain(&spec, &model).ok().map(|g| CodingGainReport {
        ratio: g.ratio,
        lower_bound: g.lower_bound,
        holds: g.ratio > g.lower_bound,
    });

    let threshold = alpha_threshold(&spec, &model.cost);
    let regime = if model.alpha < threshold {
        "coded-favorable"
    } else {
        "uncoded-favorable"
    };

    let s0 = spec.uncoded_piece_len();
    let doubling = if 2.0 * s0 <= spec.min_len() as f64 {
        let e0 = log_exponent(&spec, s0, &model)?;
        let e1 = log_exponent(&spec, 2.0 * s0, &model)?;
        Some(DoublingComparison {
            uncoded: LogExponentPoint { s: s0, value: e0 },
            coded: LogExponentPoint { s: 2.0 * s0, value: e1 },
            coding_outperforms: e1 > e0,
        })
    } else {
        None
    };

    let log_exponent_curve = std::iter::once(s0)
        .chain(feasible_coded_lens(&spec).into_iter().map(|s| s as f64))
        .map(|s| {
            Ok(LogExponentPoint {
                s,
                value: log_exponent(&spec, s, &model)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fitted_slopes = simulation_csv
        .map(|csv| fit_slopes(exp, csv))
        .transpose()?;

    Ok(AnalysisReport {
        n1: spec.n1,
        n2: spec.n2,
        p: spec.p,
        mu: model.mu,
        alpha: model.alpha,
        c: model.cost.c,
        size_assumption_holds: spec.satisfies_size_assumption(),
        strategies,
        coding_gain: gain,
        alpha_threshold: threshold,
        regime,
        best_s: best_piece_len(&spec, &model).ok(),
        doubling,
        log_exponent_curve,
        fitted_slopes,
    })
}

fn fit_slopes(exp: &Experiment, csv: &str) -> Result<Vec<SlopeComparison>> {
    let rows = parse_simulation_csv(csv)?;
    let mut series: BTreeMap<(String, u64, Option<u64>), Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        series
            .entry((row.strategy, row.s, row.r))
            .or_default()
            .push((row.deadline, row.survival));
    }
    let mut out = Vec::new();
    for plan in &exp.plans {
        let key = (plan.strategy.name().to_string(), plan.piece_len, replication_factor(plan));
        let Some(points) = series.get(&key) else {
            continue;
        };
        let fitted = fit_tail_slope(points, exp.model.alpha)
            .with_context(|| format!("fitting {}", label(plan)))?;
        let theory = theory_epsilon(exp, plan)?;
        out.push(SlopeComparison {
            strategy: key.0,
            s: key.1,
            r: key.2,
            fitted,
            theory,
            relative_error: ((fitted - theory) / theory).abs(),
        });
    }
    Ok(out)
}
