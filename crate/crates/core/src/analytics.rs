//! Closed-form failure exponents and the comparisons built on them.
//!
//! For a strategy that must wait for `K` of `p` tasks at piece length `s`,
//! `log P(miss deadline t) / t^α → −(p − K + 1)·μ^α / τ(s)^α` as `t → ∞`
//! (an upper bound for coded plans, exact for uncoded and replicated ones).

use serde::Serialize;

use crate::conv::CostModel;
use crate::error::{invalid, Error, Result};
use crate::planner::{feasible_coded_lens, plan_replication, validate_coded, ProblemSpec};
use crate::sim::{task_shift_at, TimeModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentReport {
    /// Leading coefficient of the failure exponent in `t^α`; negative.
    pub epsilon: f64,
    /// Worst-case completions `K` (integral for feasible plans).
    pub worst_k: f64,
    pub s: u64,
    /// True when `epsilon` only bounds the exponent (coded regime).
    pub is_upper_bound: bool,
}

/// `p·s/n2 − n1/s + 1`, i.e. `p − K + 1` for the coded worst case.
fn slack(spec: &ProblemSpec, s: f64) -> f64 {
    spec.p as f64 * s / spec.n2 as f64 - spec.n1 as f64 / s + 1.0
}

pub(crate) fn epsilon_at(spec: &ProblemSpec, s: f64, model: &TimeModel) -> f64 {
    -slack(spec, s) * model.mu.powf(model.alpha) / task_shift_at(s, model).powf(model.alpha)
}

/// Failure-exponent coefficient at piece length `s`, for `s` between the
/// uncoded length `√(n1·n2/p)` and `min(n1, n2)`.
pub fn epsilon(spec: &ProblemSpec, s: u64, model: &TimeModel) -> Result<ExponentReport> {
    let prod = spec.n1 as u128 * spec.n2 as u128;
    let s2p = s as u128 * s as u128 * spec.p as u128;
    if s2p < prod || s > spec.min_len() {
        return invalid(format!(
            "s={s} must lie in [sqrt(n1*n2/p), min(n1, n2)] = [{:.3}, {}]",
            spec.uncoded_piece_len(),
            spec.min_len()
        ));
    }
    let sf = s as f64;
    Ok(ExponentReport {
        epsilon: epsilon_at(spec, sf, model),
        worst_k: spec.p as f64 - spec.p as f64 * sf / spec.n2 as f64 + spec.n1 as f64 / sf,
        s,
        is_upper_bound: s2p > prod,
    })
}

/// Exact exponent coefficient of a `(p, r)` replication strategy.
pub fn epsilon_replication(spec: &ProblemSpec, r: u64, model: &TimeModel) -> Result<ExponentReport> {
    let plan = plan_replication(*spec, r)?;
    let s = plan.piece_len;
    let k = plan.worst_k as f64;
    let p = spec.p as f64;
    Ok(ExponentReport {
        epsilon: -(p - k + 1.0) * model.mu.powf(model.alpha)
            / task_shift_at(s as f64, model).powf(model.alpha),
        worst_k: k,
        s,
        is_upper_bound: false,
    })
}

/// How much faster the coded tail at `2√(n1·n2/p)` decays than the uncoded
/// one, together with the guaranteed lower bound `3√(p·n1/n2) / (2·4^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodingGain {
    pub ratio: f64,
    pub lower_bound: f64,
}

pub fn coding_gain(spec: &ProblemSpec, model: &TimeModel) -> Result<CodingGain> {
    let s0 = spec.uncoded_piece_len();
    if 2.0 * s0 > spec.min_len() as f64 {
        return invalid(format!(
            "doubled uncoded piece length {:.3} exceeds min(n1, n2) = {}",
            2.0 * s0,
            spec.min_len()
        ));
    }
    let ratio = epsilon_at(spec, 2.0 * s0, model) / epsilon_at(spec, s0, model);
    let lower_bound = 3.0 * (spec.p as f64 * spec.n1 as f64 / spec.n2 as f64).sqrt()
        / (2.0 * 4f64.powf(model.alpha));
    Ok(CodingGain { ratio, lower_bound })
}

/// `ln |ε(s)|` as a function of a real piece length; larger means faster
/// tail decay.
pub fn log_exponent(spec: &ProblemSpec, s: f64, model: &TimeModel) -> Result<f64> {
    let f = slack(spec, s);
    if !(f > 0.0) {
        return invalid(format!("p*s/n2 - n1/s + 1 = {f} is not positive at s={s}"));
    }
    let work = 2.0 * s * model.cost.log(2.0 * s);
    if !(work > 0.0) {
        return invalid(format!("2s*log(2s) = {work} is not positive at s={s}"));
    }
    Ok(f.ln() - model.alpha * work.ln() + model.alpha * (model.mu / model.cost.c).ln())
}

/// Derivative of [`log_exponent`] with respect to `s`.
pub fn log_exponent_slope(spec: &ProblemSpec, s: f64, model: &TimeModel) -> Result<f64> {
    let f = slack(spec, s);
    if !(f > 0.0) || !(2.0 * s > 1.0) {
        return invalid(format!("log argument is not positive at s={s}"));
    }
    let df = spec.p as f64 / spec.n2 as f64 + spec.n1 as f64 / (s * s);
    Ok(df / f - model.alpha / s - model.alpha / (s * (2.0 * s).ln()))
}

/// Shape `α` below which moving past the uncoded piece length into the coded
/// regime increases the exponent: `2√(p·n1/n2) / (1 + 1/log(2√(n1·n2/p)))`.
pub fn alpha_threshold(spec: &ProblemSpec, cost: &CostModel) -> f64 {
    let s0 = spec.uncoded_piece_len();
    2.0 * (spec.p as f64 * spec.n1 as f64 / spec.n2 as f64).sqrt()
        / (1.0 + 1.0 / cost.log(2.0 * s0))
}

/// Feasible coded piece length with the largest `|ε|`, smallest on ties.
pub fn best_piece_len(spec: &ProblemSpec, model: &TimeModel) -> Result<u64> {
    let mut best: Option<(u64, f64)> = None;
    for s in feasible_coded_lens(spec) {
        let mag = epsilon_at(spec, s as f64, model).abs();
        if best.is_none_or(|(_, m)| mag > m) {
            best = Some((s, mag));
        }
    }
    best.map(|(s, _)| s).ok_or_else(|| {
        Error::Infeasible(format!(
            "no s in (sqrt(n1*n2/p), min(n1,n2)] divides n1={} and n2={} with n2 | p*s and \
             p*s/n2 >= n1/s (p={})",
            spec.n1, spec.n2, spec.p
        ))
    })
}

/// Operation-count model of encoding, decoding and the final additions,
/// against the per-processor convolution cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityBreakdown {
    /// `s·n·(log n)²` for evaluating at `n = p·s/n2` nodes, `s` times.
    pub encode: f64,
    /// `2s·(n1·n2/s²)·(log k)²` for interpolating from `k = n1/s` values.
    pub decode: f64,
    /// `2s·(n1·n2/s²)` for the shifted additions.
    pub add: f64,
    /// `2C·s·log(2s)`.
    pub per_processor: f64,
}

impl ComplexityBreakdown {
    pub fn ratio(&self) -> f64 {
        (self.encode + self.decode + self.add) / self.per_processor
    }
}

pub fn complexity_breakdown(spec: &ProblemSpec, s: u64, cost: &CostModel) -> Result<ComplexityBreakdown> {
    validate_coded(spec, s)?;
    let sf = s as f64;
    let n = (spec.p * s / spec.n2) as f64;
    let k = (spec.n1 / s) as f64;
    let products = spec.n1 as f64 * spec.n2 as f64 / (sf * sf);
    Ok(ComplexityBreakdown {
        encode: sf * n * cost.log(n).powi(2),
        decode: 2.0 * sf * products * cost.log(k).powi(2),
        add: 2.0 * sf * products,
        per_processor: 2.0 * cost.c * sf * cost.log(2.0 * sf),
    })
}

pub fn complexity_ratio(spec: &ProblemSpec, s: u64, cost: &CostModel) -> Result<f64> {
    complexity_breakdown(spec, s, cost).map(|b| b.ratio())
}

/// Default share of usable points (largest deadlines) used by the fit.
pub const TAIL_FIT_FRACTION: f64 = 0.5;

/// Least-squares slope of `ln(survival)` against `deadline^α` over the
/// largest-deadline half of the points with survival strictly inside (0, 1).
pub fn fit_tail_slope(points: &[(f64, f64)], alpha: f64) -> Result<f64> {
    fit_tail_slope_with_fraction(points, alpha, TAIL_FIT_FRACTION)
}

pub fn fit_tail_slope_with_fraction(points: &[(f64, f64)], alpha: f64, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return invalid(format!("fit fraction must be in (0, 1], got {fraction}"));
    }
    let mut usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, surv)| surv > 0.0 && surv < 1.0)
        .collect();
    if usable.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "need at least 5 points with survival in (0, 1), got {}",
            usable.len()
        )));
    }
    usable.sort_by(|a, b| a.0.total_cmp(&b.0));
    let take = ((usable.len() as f64 * fraction).ceil() as usize).max(2);
    let tail = &usable[usable.len() - take..];

    let xs: Vec<f64> = tail.iter().map(|(t, _)| t.powf(alpha)).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, surv)| surv.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("fit points share one deadline".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::LogBase;
    use crate::planner::{coded_worst_k, plan_coded};

    fn spec(n1: u64, n2: u64, p: u64) -> ProblemSpec {
        ProblemSpec::new(n1, n2, p).unwrap()
    }

    fn exp1() -> TimeModel {
        TimeModel::exponential(1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn epsilon_reference_values() {
        let sp = spec(4096, 2048, 8);
        let unc = epsilon(&sp, 1024, &exp1()).unwrap();
        assert!(rel(unc.epsilon, -1.0 / 22528.0) < 1e-12);
        assert!(!unc.is_upper_bound);
        assert_eq!(unc.worst_k, 8.0);
        assert!((unc.epsilon + 4.4389e-5).abs() < 1e-9);

        let coded = epsilon(&sp, 2048, &exp1()).unwrap();
        assert!(rel(coded.epsilon, -7.0 / 49152.0) < 1e-12);
        assert!(coded.is_upper_bound);
        assert_eq!(coded.worst_k, 2.0);

        assert!(epsilon(&sp, 1000, &exp1()).is_err());
        assert!(epsilon(&sp, 4096, &exp1()).is_err());
    }

    #[test]
    fn epsilon_alpha_two() {
        let sp = spec(4096, 2048, 8);
        let m = TimeModel::new(0.7, 2.0, CostModel::default()).unwrap();
        let tau: f64 = 2.0 * 2048.0 * 12.0;
        let direct = -7.0 * 0.7f64.powi(2) / tau.powi(2);
        assert!(rel(epsilon(&sp, 2048, &m).unwrap().epsilon, direct) < 1e-12);
    }

    #[test]
    fn replication_values() {
        let sp = spec(4096, 2048, 8);
        let rep = epsilon_replication(&sp, 4, &exp1()).unwrap();
        assert!(rel(rep.epsilon, -4.0 / 49152.0) < 1e-12);
        assert_eq!(rep.worst_k, 5.0);
        let one = epsilon_replication(&sp, 1, &exp1()).unwrap();
        assert!(rel(one.epsilon, epsilon(&sp, 1024, &exp1()).unwrap().epsilon) < 1e-12);
        assert!(epsilon_replication(&sp, 3, &exp1()).is_err());

        let coded = epsilon(&sp, 2048, &exp1()).unwrap().epsilon.abs();
        let unc = one.epsilon.abs();
        assert!(coded > rep.epsilon.abs() && rep.epsilon.abs() > unc);
    }

    #[test]
    fn epsilon_matches_planner_k() {
        let m = TimeModel::new(1.3, 1.7, CostModel::new(2.0, LogBase::E).unwrap()).unwrap();
        for (n1, n2, p) in [(64, 32, 8), (4096, 2048, 8), (256, 256, 16), (1024, 256, 16)] {
            let sp = spec(n1, n2, p);
            for s in feasible_coded_lens(&sp) {
                let k = plan_coded(sp, s).unwrap().worst_k;
                assert_eq!(k, coded_worst_k(&sp, s));
                let via_k = -((p as usize - k + 1) as f64) * m.mu.powf(m.alpha)
                    / task_shift_at(s as f64, &m).powf(m.alpha);
                assert!(rel(epsilon(&sp, s, &m).unwrap().epsilon, via_k) < 1e-12);
            }
        }
    }

    #[test]
    fn coding_gain_reference() {
        let sp = spec(1 << 20, 1 << 20, 16);
        let gain = coding_gain(&sp, &exp1()).unwrap();
        assert!(rel(gain.ratio, 3.325) < 1e-12);
        assert!(rel(gain.lower_bound, 1.5) < 1e-12);
        assert!(coding_gain(&spec(4, 2, 4), &exp1()).is_err());
    }

    #[test]
    fn log_exponent_is_log_of_epsilon() {
        let m = TimeModel::new(0.6, 1.4, CostModel::new(1.7, LogBase::Two).unwrap()).unwrap();
        let sp = spec(4096, 2048, 8);
        for s in [1024u64, 1200, 1500, 2048] {
            let e = log_exponent(&sp, s as f64, &m).unwrap();
            let eps = epsilon(&sp, s, &m).unwrap().epsilon;
            assert!(rel(e.exp(), eps.abs()) < 1e-10);
        }
        assert!(log_exponent(&sp, 1.0, &m).is_err());
    }

    #[test]
    fn alpha_threshold_reference() {
        let sp = spec(4 << 10, 1 << 10, 16);
        let th = alpha_threshold(&sp, &CostModel::default());
        assert!(rel(th, 16.0 / 1.1) < 1e-12);
    }

    #[test]
    fn best_piece_len_examples() {
        assert_eq!(best_piece_len(&spec(4096, 2048, 8), &exp1()).unwrap(), 2048);
        let sp = spec(64, 32, 8);
        let e16 = epsilon(&sp, 16, &exp1()).unwrap().epsilon.abs();
        let e32 = epsilon(&sp, 32, &exp1()).unwrap().epsilon.abs();
        let want = if e32 > e16 { 32 } else { 16 };
        assert_eq!(best_piece_len(&sp, &exp1()).unwrap(), want);
        assert!(matches!(best_piece_len(&spec(9, 8, 2), &exp1()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn complexity_terms_respect_bounds() {
        let cost = CostModel::default();
        for (n1, n2, p) in [(4096, 2048, 8), (64, 32, 8), (1 << 16, 1 << 16, 16)] {
            let sp = spec(n1, n2, p);
            for s in feasible_coded_lens(&sp) {
                let b = complexity_breakdown(&sp, s, &cost).unwrap();
                let (sf, pf) = (s as f64, p as f64);
                let logp2 = cost.log(pf).powi(2);
                assert!(b.encode <= sf * pf * logp2 + 1e-9);
                assert!(b.decode <= 2.0 * sf * pf * logp2 + 1e-9);
                assert!(b.add <= 2.0 * sf * pf + 1e-9);
            }
        }
        assert!(complexity_ratio(&spec(4096, 2048, 8), 512, &cost).is_err());
    }

    #[test]
    fn per_processor_cost_superlinear() {
        let cost = CostModel::default();
        let a = complexity_breakdown(&spec(1 << 12, 1 << 12, 4), 1 << 12, &cost).unwrap();
        let b = complexity_breakdown(&spec(1 << 13, 1 << 13, 4), 1 << 13, &cost).unwrap();
        assert!(b.per_processor > 2.0 * a.per_processor);
    }

    #[test]
    fn fit_recovers_exact_slope() {
        let c = 3.5e-4;
        let pts: Vec<(f64, f64)> = (1..=20).map(|i| {
            let t = 1000.0 * i as f64;
            (t, (-c * t).exp())
        }).collect();
        assert!((fit_tail_slope(&pts, 1.0).unwrap() + c).abs() < 1e-6 * c);

        let pts2: Vec<(f64, f64)> = (1..=20).map(|i| {
            let t = 10.0 * i as f64;
            (t, 0.5 * (-c * t * t).exp())
        }).collect();
        assert!(rel(fit_tail_slope(&pts2, 2.0).unwrap(), -c) < 1e-6);
    }

    #[test]
    fn fit_rejects_sparse_data() {
        let pts = vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.2), (4.0, 0.1), (5.0, 0.0), (6.0, 0.05)];
        assert!(matches!(fit_tail_slope(&pts, 1.0), Err(Error::InsufficientData(_))));
        assert!(fit_tail_slope_with_fraction(&pts, 1.0, 0.0).is_err());
    }
}
