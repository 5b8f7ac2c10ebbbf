//! Execution plans for the uncoded, replicated and coded strategies.
//!
//! A plan assigns every one of the `p` processors a task: convolve one piece
//! of `a` (plain or coded) with one piece of `x`. Tasks are grouped; a group
//! is satisfied once `quorum` of its members finish, and the whole
//! convolution is available once every group is satisfied. `worst_k` is the
//! largest number of completions that can be needed for that to happen.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::conv::{cost_scenario1, CostModel};
use crate::error::{invalid, Error, Result};

/// Problem instance: convolve `a` (length `n1`) with `x` (length `n2`) on
/// `p` processors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n1: u64,
    pub n2: u64,
    pub p: u64,
}

impl ProblemSpec {
    pub fn new(n1: u64, n2: u64, p: u64) -> Result<Self> {
        if n1 == 0 || n2 == 0 || p == 0 {
            return invalid(format!("n1, n2 and p must be positive (got {n1}, {n2}, {p})"));
        }
        Ok(Self { n1, n2, p })
    }

    /// Real-valued uncoded piece length √(n1·n2/p).
    pub fn uncoded_piece_len(&self) -> f64 {
        (self.n1 as f64 * self.n2 as f64 / self.p as f64).sqrt()
    }

    pub fn min_len(&self) -> u64 {
        self.n1.min(self.n2)
    }

    /// Whether `2·√(n1·n2/p) ≤ min(n1, n2)`, i.e. doubling the uncoded piece
    /// length still fits inside both vectors.
    pub fn satisfies_size_assumption(&self) -> bool {
        // 4·n1·n2/p ≤ m² ⇔ 4·n1·n2 ≤ p·m²
        let m = self.min_len() as u128;
        4 * self.n1 as u128 * self.n2 as u128 <= self.p as u128 * m * m
    }

    fn product(&self) -> u128 {
        self.n1 as u128 * self.n2 as u128
    }

    /// True when `s` is strictly larger than the uncoded piece length.
    pub fn in_coded_regime(&self, s: u64) -> bool {
        (s as u128) * (s as u128) * self.p as u128 > self.product()
    }

    /// True when `s` is at least the uncoded piece length.
    pub fn at_least_uncoded(&self, s: u64) -> bool {
        (s as u128) * (s as u128) * self.p as u128 >= self.product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Uncoded,
    Replication { r: u64 },
    Coded { s: u64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Uncoded => "uncoded",
            Strategy::Replication { .. } => "replication",
            Strategy::Coded { .. } => "coded",
        }
    }
}

/// Which piece of `a` a task convolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskInput {
    APiece(usize),
    Coded(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: usize,
    pub group_id: usize,
    pub input: TaskInput,
    pub x_piece: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub group_id: usize,
    pub members: Vec<usize>,
    pub quorum: usize,
    pub x_piece: usize,
    /// For uncoded and replicated groups, the single `a` piece they compute.
    pub a_piece: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub spec: ProblemSpec,
    pub strategy: Strategy,
    pub piece_len: u64,
    pub tasks: Vec<TaskSpec>,
    pub groups: Vec<Group>,
    pub worst_k: usize,
}

impl ExecutionPlan {
    pub fn a_pieces(&self) -> usize {
        (self.spec.n1 / self.piece_len) as usize
    }

    pub fn x_pieces(&self) -> usize {
        (self.spec.n2 / self.piece_len) as usize
    }

    /// (n, k) of the MDS code for coded plans.
    pub fn code_shape(&self) -> Option<(usize, usize)> {
        match self.strategy {
            Strategy::Coded { .. } => Some((self.groups[0].members.len(), self.groups[0].quorum)),
            _ => None,
        }
    }
}

pub(crate) fn exact_sqrt(v: u128) -> Option<u64> {
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    (r * r == v).then_some(r as u64)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Every common divisor of n1 and n2, ascending.
pub fn common_divisors(n1: u64, n2: u64) -> Vec<u64> {
    let g = gcd(n1, n2);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= g {
        if g.is_multiple_of(d) {
            small.push(d);
            if d * d != g {
                large.push(g / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Processor counts for which the uncoded split has integral geometry.
fn valid_uncoded_processor_counts(n1: u64, n2: u64) -> Vec<u64> {
    let mut counts: Vec<u64> = common_divisors(n1, n2)
        .into_iter()
        .filter_map(|s| u64::try_from(n1 as u128 * n2 as u128 / (s as u128 * s as u128)).ok())
        .collect();
    counts.sort_unstable();
    counts
}

/// Uncoded split into `s × s` piece pairs with `s = √(n1·n2/p)`.
pub fn plan_uncoded(spec: ProblemSpec) -> Result<ExecutionPlan> {
    let s = uncoded_len(&spec).ok_or_else(|| {
        let valid = valid_uncoded_processor_counts(spec.n1, spec.n2);
        let below = valid.iter().rev().find(|&&v| v < spec.p);
        let above = valid.iter().find(|&&v| v > spec.p);
        let nearest: Vec<String> = below.into_iter().chain(above).map(u64::to_string).collect();
        Error::InvalidArgument(format!(
            "uncoded split needs sqrt(n1*n2/p) to be an integer dividing n1 and n2 \
             (n1={}, n2={}, p={}); nearest valid p: {}",
            spec.n1,
            spec.n2,
            spec.p,
            if nearest.is_empty() { "none".into() } else { nearest.join(", ") }
        ))
    })?;
    Ok(split_plan(spec, Strategy::Uncoded, s, 1))
}

fn uncoded_len(spec: &ProblemSpec) -> Option<u64> {
    let prod = spec.product();
    if !prod.is_multiple_of(spec.p as u128) {
        return None;
    }
    exact_sqrt(prod / spec.p as u128).filter(|&s| spec.n1.is_multiple_of(s) && spec.n2.is_multiple_of(s))
}

/// Worst-case completions for a (p, r) replication strategy.
pub fn replication_worst_k(p: u64, r: u64) -> usize {
    ((p / r - 1) * r + 1) as usize
}

/// Worst-case completions for coded piece length `s`: p − p·s/n2 + n1/s.
pub fn coded_worst_k(spec: &ProblemSpec, s: u64) -> usize {
    (spec.p - spec.p * s / spec.n2 + spec.n1 / s) as usize
}

/// `(p, r)` replication: the uncoded split at piece length `√(n1·n2·r/p)`
/// computed by `p/r` distinct tasks, each replicated `r` times.
pub fn plan_replication(spec: ProblemSpec, r: u64) -> Result<ExecutionPlan> {
    if r == 0 || !spec.p.is_multiple_of(r) {
        return invalid(format!("replication factor r={r} must divide p={}", spec.p));
    }
    if r == 1 {
        return plan_uncoded(spec);
    }
    let scaled = spec.product() * r as u128;
    let s = scaled.is_multiple_of(spec.p as u128)
        .then(|| exact_sqrt(scaled / spec.p as u128))
        .flatten()
        .filter(|&s| spec.n1.is_multiple_of(s) && spec.n2.is_multiple_of(s))
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "replication r={r} needs sqrt(n1*n2*r/p) to be an integer dividing n1 and n2 \
                 (n1={}, n2={}, p={})",
                spec.n1, spec.n2, spec.p
            ))
        })?;
    Ok(split_plan(spec, Strategy::Replication { r }, s, r as usize))
}

fn split_plan(spec: ProblemSpec, strategy: Strategy, s: u64, replicas: usize) -> ExecutionPlan {
    let a_pieces = (spec.n1 / s) as usize;
    let x_pieces = (spec.n2 / s) as usize;
    let mut tasks = Vec::with_capacity(spec.p as usize);
    let mut groups = Vec::with_capacity(a_pieces * x_pieces);
    for j in 0..x_pieces {
        for i in 0..a_pieces {
            let group_id = groups.len();
            let members: Vec<usize> = (0..replicas).map(|c| group_id * replicas + c).collect();
            for &task_id in &members {
                tasks.push(TaskSpec {
                    task_id,
                    group_id,
                    input: TaskInput::APiece(i),
                    x_piece: j,
                });
            }
            groups.push(Group {
                group_id,
                members,
                quorum: 1,
                x_piece: j,
                a_piece: Some(i),
            });
        }
    }
    let worst_k = match strategy {
        Strategy::Replication { r } => replication_worst_k(spec.p, r),
        _ => spec.p as usize,
    };
    ExecutionPlan {
        spec,
        strategy,
        piece_len: s,
        tasks,
        groups,
        worst_k,
    }
}

/// Checks every constraint a coded piece length must satisfy.
///
/// `s` equal to the uncoded piece length is accepted: the code then has no
/// redundancy (`n = k`) and the plan needs every task, like the uncoded one.
pub fn validate_coded(spec: &ProblemSpec, s: u64) -> Result<()> {
    if s == 0 || !spec.at_least_uncoded(s) {
        return invalid(format!(
            "s={s} is not in the coded regime: it must be at least sqrt(n1*n2/p) = {:.3}",
            spec.uncoded_piece_len()
        ));
    }
    if s > spec.min_len() {
        return invalid(format!("s={s} exceeds min(n1, n2) = {}", spec.min_len()));
    }
    if !spec.n1.is_multiple_of(s) || !spec.n2.is_multiple_of(s) {
        return invalid(format!("s={s} must divide n1={} and n2={}", spec.n1, spec.n2));
    }
    if !(spec.p * s).is_multiple_of(spec.n2) {
        return invalid(format!("n2={} must divide p*s={}", spec.n2, spec.p * s));
    }
    if spec.p * s / spec.n2 < spec.n1 / s {
        return invalid(format!(
            "code length p*s/n2={} is smaller than the number of source pieces n1/s={}",
            spec.p * s / spec.n2,
            spec.n1 / s
        ));
    }
    Ok(())
}

/// Coded strategy: `n2/s` groups, one per piece of `x`, each holding the
/// `p·s/n2` coded pieces of `a`, any `n1/s` of which suffice.
pub fn plan_coded(spec: ProblemSpec, s: u64) -> Result<ExecutionPlan> {
    validate_coded(&spec, s)?;
    let x_pieces = (spec.n2 / s) as usize;
    let code_len = (spec.p * s / spec.n2) as usize;
    let quorum = (spec.n1 / s) as usize;
    let mut tasks = Vec::with_capacity(spec.p as usize);
    let mut groups = Vec::with_capacity(x_pieces);
    for j in 0..x_pieces {
        let members: Vec<usize> = (0..code_len).map(|c| j * code_len + c).collect();
        for (c, &task_id) in members.iter().enumerate() {
            tasks.push(TaskSpec {
                task_id,
                group_id: j,
                input: TaskInput::Coded(c),
                x_piece: j,
            });
        }
        groups.push(Group {
            group_id: j,
            members,
            quorum,
            x_piece: j,
            a_piece: None,
        });
    }
    Ok(ExecutionPlan {
        spec,
        strategy: Strategy::Coded { s },
        piece_len: s,
        tasks,
        groups,
        worst_k: coded_worst_k(&spec, s),
    })
}

pub fn plan(spec: ProblemSpec, strategy: Strategy) -> Result<ExecutionPlan> {
    match strategy {
        Strategy::Uncoded => plan_uncoded(spec),
        Strategy::Replication { r } => plan_replication(spec, r),
        Strategy::Coded { s } => plan_coded(spec, s),
    }
}

/// Piece lengths strictly above the uncoded one for which [`plan_coded`]
/// succeeds, ascending.
pub fn feasible_coded_lens(spec: &ProblemSpec) -> Vec<u64> {
    common_divisors(spec.n1, spec.n2)
        .into_iter()
        .filter(|&s| spec.in_coded_regime(s) && validate_coded(spec, s).is_ok())
        .collect()
}

/// All r > 1 for which [`plan_replication`] succeeds, ascending.
pub fn feasible_replication_factors(spec: &ProblemSpec) -> Vec<u64> {
    (2..=spec.p)
        .filter(|&r| plan_replication(*spec, r).is_ok())
        .collect()
}

/// Tracks per-group quorum progress over a stream of task completions.
#[derive(Debug, Clone)]
pub struct QuorumTracker<'a> {
    plan: &'a ExecutionPlan,
    finished: Vec<usize>,
    seen: Vec<bool>,
    satisfied_groups: usize,
    completions: usize,
}

impl<'a> QuorumTracker<'a> {
    pub fn new(plan: &'a ExecutionPlan) -> Self {
        Self {
            plan,
            finished: vec![0; plan.groups.len()],
            seen: vec![false; plan.tasks.len()],
            satisfied_groups: 0,
            completions: 0,
        }
    }

    /// Record a completion. Returns true if this completion brought its group
    /// to quorum.
    pub fn complete(&mut self, task_id: usize) -> bool {
        if self.seen[task_id] {
            return false;
        }
        self.seen[task_id] = true;
        self.completions += 1;
        let g = self.plan.tasks[task_id].group_id;
        self.finished[g] += 1;
        if self.finished[g] == self.plan.groups[g].quorum {
            self.satisfied_groups += 1;
            return true;
        }
        false
    }

    pub fn group_satisfied(&self, group_id: usize) -> bool {
        self.finished[group_id] >= self.plan.groups[group_id].quorum
    }

    pub fn done(&self) -> bool {
        self.satisfied_groups == self.plan.groups.len()
    }

    pub fn completions(&self) -> usize {
        self.completions
    }
}

/// Number of completions consumed before every group reaches quorum, or
/// `None` if the order never gets there.
pub fn completions_until_done(plan: &ExecutionPlan, order: &[usize]) -> Option<usize> {
    let mut tracker = QuorumTracker::new(plan);
    for &task in order {
        tracker.complete(task);
        if tracker.done() {
            return Some(tracker.completions());
        }
    }
    None
}

/// Full permutation enumeration is used up to this many processors.
pub const EXHAUSTIVE_MAX_P: usize = 8;
/// The adversarial construction is used up to this many processors.
pub const ADVERSARIAL_MAX_P: usize = 16;

/// Completion order that finishes every other group entirely before feeding
/// the group that leaves the most completions outstanding.
pub fn adversarial_order(plan: &ExecutionPlan) -> Vec<usize> {
    let p = plan.tasks.len();
    let last = plan
        .groups
        .iter()
        .max_by_key(|g| (p - g.members.len() + g.quorum, std::cmp::Reverse(g.group_id)))
        .expect("plans have at least one group");
    plan.groups
        .iter()
        .filter(|g| g.group_id != last.group_id)
        .flat_map(|g| g.members.iter().copied())
        .chain(last.members.iter().copied())
        .collect()
}

/// Maximum, over completion orders, of the completions needed to finish.
///
/// Exhaustive for `p ≤ 8`. For `8 < p ≤ 16` it evaluates the adversarial
/// order, which is a constructive lower bound.
pub fn brute_force_worst_case_k(plan: &ExecutionPlan) -> Result<usize> {
    let p = plan.tasks.len();
    if p <= EXHAUSTIVE_MAX_P {
        return Ok((0..p)
            .permutations(p)
            .filter_map(|order| completions_until_done(plan, &order))
            .max()
            .unwrap_or(0));
    }
    if p <= ADVERSARIAL_MAX_P {
        let order = adversarial_order(plan);
        debug_assert!(order.iter().copied().sorted().eq(0..p));
        return completions_until_done(plan, &order)
            .ok_or_else(|| Error::InvalidArgument("adversarial order did not finish the plan".into()));
    }
    Err(Error::TooLarge(format!(
        "worst-case enumeration supports at most {ADVERSARIAL_MAX_P} processors, plan has {p}"
    )))
}

/// Per-processor cost of the alternatives to the single-shot uncoded split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostComparison {
    spec: ProblemSpec,
    model: CostModel,
}

pub fn cost_comparison(spec: ProblemSpec, model: CostModel) -> CostComparison {
    CostComparison { spec, model }
}

impl CostComparison {
    fn work(&self) -> f64 {
        self.spec.n1 as f64 * self.spec.n2 as f64 / self.spec.p as f64
    }

    /// Single-shot FFT cost at the optimal split `s = √(n1·n2/p)`.
    pub fn scenario1_opt(&self) -> f64 {
        let s = self.spec.uncoded_piece_len();
        let m = 2.0 * s;
        self.model.c * m * self.model.log(m)
    }

    /// Overlap-method cost when `a` is split into pieces of length `s1`:
    /// `2C·s1·(log(2·n1·n2/(p·s1)) + 1)`.
    pub fn scenario2_at(&self, s1: f64) -> f64 {
        2.0 * self.model.c * s1 * (self.model.log(2.0 * self.work() / s1) + 1.0)
    }

    /// Cost of `r` serial uses of the `p` processors, each at piece length
    /// `√(n1·n2/(r·p))`.
    pub fn serial_cost(&self, r: u64) -> f64 {
        let s = (self.work() / r as f64).sqrt();
        r as f64 * 2.0 * self.model.c * s * self.model.log(2.0 * s)
    }

    /// `scenario1_opt` through the generic FFT cost formula, when the split is
    /// integral.
    pub fn scenario1_opt_integral(&self) -> Option<f64> {
        let s = uncoded_len(&self.spec)?;
        cost_scenario1(s, s, &self.model).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n1: u64, n2: u64, p: u64) -> ProblemSpec {
        ProblemSpec::new(n1, n2, p).unwrap()
    }

    fn check_shape(plan: &ExecutionPlan) {
        assert_eq!(plan.tasks.len() as u64, plan.spec.p);
        for (id, t) in plan.tasks.iter().enumerate() {
            assert_eq!(t.task_id, id);
            assert!(plan.groups[t.group_id].members.contains(&id));
        }
        let members: usize = plan.groups.iter().map(|g| g.members.len()).sum();
        assert_eq!(members as u64, plan.spec.p);
    }

    #[test]
    fn uncoded_examples() {
        let plan = plan_uncoded(spec(4096, 2048, 8)).unwrap();
        assert_eq!(plan.piece_len, 1024);
        assert_eq!(plan.worst_k, 8);
        assert_eq!((plan.a_pieces(), plan.x_pieces()), (4, 2));
        assert!(plan.groups.iter().all(|g| g.quorum == 1 && g.members.len() == 1));
        check_shape(&plan);

        let plan = plan_uncoded(spec(4, 4, 4)).unwrap();
        assert_eq!((plan.piece_len, plan.worst_k), (2, 4));

        let plan = plan_uncoded(spec(64, 64, 1)).unwrap();
        assert_eq!((plan.piece_len, plan.tasks.len()), (64, 1));
    }

    #[test]
    fn uncoded_rejection_names_nearest_p() {
        let err = plan_uncoded(spec(4096, 2048, 6)).unwrap_err().to_string();
        assert!(err.contains("nearest valid p: 2, 8"), "{err}");
        assert!(plan_uncoded(spec(64, 32, 3)).is_err());
    }

    #[test]
    fn replication_examples() {
        let plan = plan_replication(spec(4096, 2048, 8), 4).unwrap();
        assert_eq!((plan.piece_len, plan.worst_k), (2048, 5));
        assert_eq!(plan.groups.len(), 2);
        assert!(plan.groups.iter().all(|g| g.quorum == 1 && g.members.len() == 4));
        check_shape(&plan);

        let one = plan_replication(spec(4096, 2048, 8), 1).unwrap();
        assert_eq!(one, plan_uncoded(spec(4096, 2048, 8)).unwrap());
        assert_eq!(one.worst_k, 8);

        assert!(plan_replication(spec(16, 16, 4), 2).is_err());
        assert!(plan_replication(spec(16, 16, 4), 3).is_err());
        assert!(plan_replication(spec(16, 16, 4), 0).is_err());
    }

    #[test]
    fn coded_examples() {
        let plan = plan_coded(spec(4096, 2048, 8), 2048).unwrap();
        assert_eq!(plan.groups.len(), 1);
        assert_eq!((plan.groups[0].members.len(), plan.groups[0].quorum), (8, 2));
        assert_eq!(plan.worst_k, 2);

        let plan = plan_coded(spec(4, 2, 4), 2).unwrap();
        assert_eq!((plan.groups.len(), plan.groups[0].quorum, plan.worst_k), (1, 2, 2));

        let plan = plan_coded(spec(64, 32, 8), 16).unwrap();
        assert_eq!(plan.groups.len(), 2);
        assert!(plan.groups.iter().all(|g| g.members.len() == 4 && g.quorum == 4));
        assert_eq!(plan.worst_k, 8);
        assert_eq!(plan.code_shape(), Some((4, 4)));
        check_shape(&plan);
    }

    #[test]
    fn coded_rejections() {
        let err = plan_coded(spec(4096, 2048, 8), 512).unwrap_err().to_string();
        assert!(err.contains("not in the coded regime"), "{err}");
        // The boundary s = sqrt(n1*n2/p) is a zero-redundancy code.
        let edge = plan_coded(spec(4096, 2048, 8), 1024).unwrap();
        assert_eq!(edge.code_shape(), Some((4, 4)));
        assert_eq!(edge.worst_k, 8);
        assert!(plan_coded(spec(4096, 2048, 8), 4096).is_err());
        assert!(plan_coded(spec(4096, 2048, 8), 1536).is_err());
        // n2 ∤ p·s
        assert!(plan_coded(spec(64, 64, 5), 32).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let coded = plan_coded(spec(4, 2, 4), 2).unwrap();
        assert_eq!(brute_force_worst_case_k(&coded).unwrap(), 2);
        let rep = plan_replication(spec(4, 4, 4), 2);
        // (4,4,4) r=2 gives s=√8, so use a spec where it is integral.
        assert!(rep.is_err());
        let rep = plan_replication(spec(8, 4, 4), 2).unwrap();
        assert_eq!(rep.piece_len, 4);
        assert_eq!(brute_force_worst_case_k(&rep).unwrap(), 3);
        let unc = plan_uncoded(spec(4, 4, 4)).unwrap();
        assert_eq!(brute_force_worst_case_k(&unc).unwrap(), 4);
    }

    #[test]
    fn brute_force_caps_and_adversarial_range() {
        let big = plan_uncoded(spec(64, 64, 16)).unwrap();
        assert_eq!(brute_force_worst_case_k(&big).unwrap(), 16);
        let coded = plan_coded(spec(64, 64, 16), 32).unwrap();
        assert_eq!(brute_force_worst_case_k(&coded).unwrap(), coded.worst_k);
        let huge = plan_uncoded(spec(64, 64, 64)).unwrap();
        assert!(matches!(brute_force_worst_case_k(&huge), Err(Error::TooLarge(_))));
    }

    #[test]
    fn tracker_ignores_duplicates() {
        let plan = plan_coded(spec(4, 2, 4), 2).unwrap();
        assert_eq!(completions_until_done(&plan, &[0, 0, 0, 3]), Some(2));
        assert_eq!(completions_until_done(&plan, &[1]), None);
    }

    #[test]
    fn cost_comparison_examples() {
        let m = CostModel::default();
        let cmp = cost_comparison(spec(4096, 2048, 8), m);
        assert_eq!(cmp.scenario1_opt(), 22528.0);
        assert_eq!(cmp.scenario1_opt_integral(), Some(22528.0));
        assert!((cmp.serial_cost(1) - cmp.scenario1_opt()).abs() < 1e-9);
        assert!(cmp.serial_cost(4) > cmp.serial_cost(1));
        assert!(cmp.scenario2_at(1024.0) >= cmp.scenario1_opt());
    }

    #[test]
    fn size_assumption() {
        assert!(spec(4096, 2048, 8).satisfies_size_assumption());
        assert!(spec(64, 32, 8).satisfies_size_assumption());
        assert!(!spec(4, 2, 4).satisfies_size_assumption());
        assert!(!spec(64, 64, 1).satisfies_size_assumption());
    }

    #[test]
    fn feasible_sets() {
        assert_eq!(feasible_coded_lens(&spec(4096, 2048, 8)), vec![2048]);
        assert_eq!(feasible_coded_lens(&spec(64, 32, 8)), vec![32]);
        assert_eq!(feasible_replication_factors(&spec(4096, 2048, 8)), vec![4]);
        assert_eq!(common_divisors(12, 18), vec![1, 2, 3, 6]);
        assert_eq!(exact_sqrt(1 << 40), Some(1 << 20));
        assert_eq!(exact_sqrt(8), None);
    }
}
