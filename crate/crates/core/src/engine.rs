//! End-to-end execution of a plan on real data.
//!
//! Tasks complete in some order (injected, or whatever the thread pool
//! produces). Each group is decoded the moment its quorum arrives, from
//! exactly those first finishers; later results for that group are dropped.
//! Once every group is decoded the piece convolutions are shifted and summed
//! into `a ∗ x`.

use std::collections::HashMap;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::conv::{convolve_fft, shift_add_combine, RealVector};
use crate::error::{invalid, Result};
use crate::mds::{make_code, DecoderMatrix, NodeScheme, VandermondeCode};
use crate::planner::{ExecutionPlan, QuorumTracker, Strategy, TaskInput};

/// The order in which tasks finish.
#[derive(Debug, Clone, PartialEq)]
pub enum CompletionOrder {
    /// A permutation of all task ids.
    Sequence(Vec<usize>),
    /// Per-task finish times; ties go to the lower task id.
    FinishTimes(Vec<f64>),
}

impl CompletionOrder {
    fn resolve(&self, task_count: usize) -> Result<Vec<usize>> {
        match self {
            CompletionOrder::Sequence(order) => {
                let mut seen = vec![false; task_count];
                for &t in order {
                    if t >= task_count || std::mem::replace(&mut seen[t], true) {
                        return invalid(format!("completion order has an invalid or repeated task id {t}"));
                    }
                }
                if order.len() != task_count {
                    return invalid(format!(
                        "completion order covers {} of {task_count} tasks",
                        order.len()
                    ));
                }
                Ok(order.clone())
            }
            CompletionOrder::FinishTimes(times) => {
                if times.len() != task_count {
                    return invalid(format!(
                        "finish times cover {} of {task_count} tasks",
                        times.len()
                    ));
                }
                if let Some(t) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                    return invalid(format!("finish times must be positive and finite, got {t}"));
                }
                let mut order: Vec<usize> = (0..task_count).collect();
                order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
                Ok(order)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionResult {
    /// `a ∗ x`, length `n1 + n2 − 1`.
    pub output: Vec<f64>,
    /// Completions consumed before the last group reached quorum.
    pub tasks_used: usize,
    /// For each group, the positions within `Group::members` that were
    /// decoded from (the coded indices L for coded plans), sorted.
    pub per_group_indices: Vec<Vec<usize>>,
}

/// Executes plans. Holds the node placement for coded plans.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    scheme: NodeScheme,
    decoder_fault: Option<f64>,
}

impl Engine {
    pub fn new(scheme: NodeScheme) -> Self {
        Self {
            scheme,
            decoder_fault: None,
        }
    }

    /// Perturb every decoder matrix by `delta` in its top-left entry, so
    /// that verification runs can be checked against a known-bad decode.
    #[doc(hidden)]
    pub fn with_decoder_fault(mut self, delta: f64) -> Self {
        self.decoder_fault = Some(delta);
        self
    }

    /// Deterministic, single-threaded execution under an injected order.
    pub fn execute(
        &self,
        plan: &ExecutionPlan,
        a: &RealVector,
        x: &RealVector,
        order: &CompletionOrder,
    ) -> Result<ExecutionResult> {
        let order = order.resolve(plan.tasks.len())?;
        let inputs = TaskInputs::prepare(self, plan, a, x)?;
        let mut collector = Collector::new(self, plan, &inputs);
        for task in order {
            if collector.done() {
                break;
            }
            if collector.wants(task) {
                let out = inputs.run(plan, task)?;
                collector.accept(task, out)?;
            }
        }
        collector.finish()
    }

    /// Runs all tasks on the rayon pool and consumes completions in arrival
    /// order.
    pub fn execute_concurrent(
        &self,
        plan: &ExecutionPlan,
        a: &RealVector,
        x: &RealVector,
    ) -> Result<ExecutionResult> {
        let inputs = TaskInputs::prepare(self, plan, a, x)?;
        let (tx, rx) = mpsc::channel::<(usize, Result<Vec<f64>>)>();
        std::thread::scope(|scope| {
            let inputs = &inputs;
            scope.spawn(move || {
                (0..plan.tasks.len())
                    .into_par_iter()
                    .for_each_with(tx, |tx, task| {
                        // The collector may hang up early once every group is decoded.
                        let _ = tx.send((task, inputs.run(plan, task)));
                    });
            });
            let mut collector = Collector::new(self, plan, inputs);
            for (task, out) in rx {
                collector.accept(task, out?)?;
                if collector.done() {
                    break;
                }
            }
            collector.finish()
        })
    }
}

/// Convenience wrapper over [`Engine::execute`] with default settings.
pub fn execute(
    plan: &ExecutionPlan,
    a: &RealVector,
    x: &RealVector,
    order: &CompletionOrder,
) -> Result<ExecutionResult> {
    Engine::default().execute(plan, a, x, order)
}

/// Split (and, for coded plans, encoded) inputs shared by all tasks.
struct TaskInputs {
    a_pieces: Vec<Vec<f64>>,
    coded: Vec<Vec<f64>>,
    x_pieces: Vec<Vec<f64>>,
    code: Option<VandermondeCode>,
}

impl TaskInputs {
    fn prepare(engine: &Engine, plan: &ExecutionPlan, a: &RealVector, x: &RealVector) -> Result<Self> {
        if a.len() as u64 != plan.spec.n1 || x.len() as u64 != plan.spec.n2 {
            return invalid(format!(
                "input lengths ({}, {}) do not match the plan ({}, {})",
                a.len(),
                x.len(),
                plan.spec.n1,
                plan.spec.n2
            ));
        }
        let s = plan.piece_len as usize;
        let a_pieces: Vec<Vec<f64>> = a.chunks(s).map(<[f64]>::to_vec).collect();
        let x_pieces: Vec<Vec<f64>> = x.chunks(s).map(<[f64]>::to_vec).collect();
        let (code, coded) = match plan.code_shape() {
            Some((n, k)) => {
                let code = make_code(n, k, engine.scheme)?;
                let coded = code.encode(&a_pieces)?;
                (Some(code), coded)
            }
            None => (None, Vec::new()),
        };
        Ok(Self {
            a_pieces,
            coded,
            x_pieces,
            code,
        })
    }

    fn run(&self, plan: &ExecutionPlan, task: usize) -> Result<Vec<f64>> {
        let spec = &plan.tasks[task];
        let left = match spec.input {
            TaskInput::APiece(i) => &self.a_pieces[i],
            TaskInput::Coded(c) => &self.coded[c],
        };
        convolve_fft(left, &self.x_pieces[spec.x_piece])
    }
}

/// Receives task outputs in arbitrary order and decodes groups eagerly.
struct Collector<'a> {
    engine: &'a Engine,
    plan: &'a ExecutionPlan,
    inputs: &'a TaskInputs,
    tracker: QuorumTracker<'a>,
    pending: Vec<Vec<(usize, Vec<f64>)>>,
    /// piece_convs[j][i] = a_i ∗ x_j
    piece_convs: Vec<Vec<Option<Vec<f64>>>>,
    used: Vec<Vec<usize>>,
    decoders: HashMap<Vec<usize>, DecoderMatrix>,
    tasks_used: usize,
}

impl<'a> Collector<'a> {
    fn new(engine: &'a Engine, plan: &'a ExecutionPlan, inputs: &'a TaskInputs) -> Self {
        Self {
            engine,
            plan,
            inputs,
            tracker: QuorumTracker::new(plan),
            pending: vec![Vec::new(); plan.groups.len()],
            piece_convs: vec![vec![None; plan.a_pieces()]; plan.x_pieces()],
            used: vec![Vec::new(); plan.groups.len()],
            decoders: HashMap::new(),
            tasks_used: 0,
        }
    }

    fn done(&self) -> bool {
        self.tracker.done()
    }

    fn wants(&self, task: usize) -> bool {
        !self.tracker.group_satisfied(self.plan.tasks[task].group_id)
    }

    fn accept(&mut self, task: usize, output: Vec<f64>) -> Result<()> {
        let g = self.plan.tasks[task].group_id;
        if self.tracker.group_satisfied(g) {
            return Ok(());
        }
        let local = self.plan.groups[g]
            .members
            .iter()
            .position(|&m| m == task)
            .expect("task belongs to its group");
        self.pending[g].push((local, output));
        if self.tracker.complete(task) {
            self.decode_group(g)?;
            if self.tracker.done() {
                self.tasks_used = self.tracker.completions();
            }
        }
        Ok(())
    }

    fn decode_group(&mut self, g: usize) -> Result<()> {
        let group = &self.plan.groups[g];
        let mut arrived = std::mem::take(&mut self.pending[g]);
        arrived.sort_by_key(|(local, _)| *local);
        self.used[g] = arrived.iter().map(|(local, _)| *local).collect();

        match (self.plan.strategy, group.a_piece) {
            (Strategy::Coded { .. }, _) => {
                let indices = self.used[g].clone();
                let decoder = match self.decoders.get(&indices) {
                    Some(d) => d,
                    None => {
                        let code = self.inputs.code.as_ref().expect("coded plans carry a code");
                        let mut d = code.make_decoder(&indices)?;
                        if let Some(delta) = self.engine.decoder_fault {
                            d = d.perturbed(delta);
                        }
                        self.decoders.entry(indices).or_insert(d)
                    }
                };
                let outputs: Vec<Vec<f64>> = arrived.into_iter().map(|(_, o)| o).collect();
                for (i, conv) in decoder.decode_group(&outputs)?.into_iter().enumerate() {
                    self.piece_convs[group.x_piece][i] = Some(conv);
                }
            }
            (_, Some(i)) => {
                let (_, out) = arrived.into_iter().next().expect("quorum of one");
                self.piece_convs[group.x_piece][i] = Some(out);
            }
            (_, None) => unreachable!("split plans record their a piece"),
        }
        Ok(())
    }

    fn finish(self) -> Result<ExecutionResult> {
        if !self.tracker.done() {
            return invalid("execution ended before every group reached quorum");
        }
        let s = self.plan.piece_len as usize;
        let n1 = self.plan.spec.n1 as usize;
        let per_x_piece = self
            .piece_convs
            .into_iter()
            .map(|convs| {
                let convs: Vec<Vec<f64>> = convs.into_iter().map(|c| c.expect("decoded")).collect();
                shift_add_combine(&convs, s, n1 + s - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExecutionResult {
            output: reconstruct(self.plan, &per_x_piece)?,
            tasks_used: self.tasks_used,
            per_group_indices: self.used,
        })
    }
}

/// Combine the per-`x`-piece outputs `a ∗ x_j` (each of length `n1 + s − 1`)
/// into `a ∗ x` by shifting piece `j` right by `j·s`.
pub fn reconstruct<P: AsRef<[f64]>>(plan: &ExecutionPlan, x_piece_outputs: &[P]) -> Result<Vec<f64>> {
    let s = plan.piece_len as usize;
    let n1 = plan.spec.n1 as usize;
    let n2 = plan.spec.n2 as usize;
    if x_piece_outputs.len() != plan.x_pieces() {
        return invalid(format!(
            "expected {} x-piece outputs, got {}",
            plan.x_pieces(),
            x_piece_outputs.len()
        ));
    }
    if let Some(bad) = x_piece_outputs.iter().find(|o| o.as_ref().len() != n1 + s - 1) {
        return invalid(format!(
            "x-piece outputs must have length {}, got {}",
            n1 + s - 1,
            bad.as_ref().len()
        ));
    }
    shift_add_combine(x_piece_outputs, s, n1 + n2 - 1)
}
