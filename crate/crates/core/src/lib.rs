//! Coded distributed convolution under straggling workers.
//!
//! Convolving a long vector `a` with `x` on `p` processors splits both into
//! pieces and assigns one piece-pair convolution to each processor. The
//! uncoded split must wait for every processor; replication waits for one
//! copy of each piece-pair; the coded split encodes the pieces of `a` with a
//! real-field MDS code so that any `n1/s` of the coded tasks for a piece of
//! `x` are enough.
//!
//! - [`conv`]: convolution kernels, shift-and-add assembly, FFT cost model
//! - [`mds`]: Vandermonde encoder and any-k decoder
//! - [`planner`]: execution plans, worst-case completions, cost comparisons
//! - [`engine`]: runs a plan on real data under a completion order
//! - [`sim`]: shifted-Weibull task times and Monte Carlo deadline tails
//! - [`analytics`]: failure exponents and related closed forms

pub mod analytics;
pub mod conv;
pub mod engine;
mod error;
pub mod mds;
pub mod planner;
pub mod sim;

pub use conv::{CostModel, LogBase, RealVector};
pub use engine::{CompletionOrder, Engine, ExecutionResult};
pub use error::{Error, Result};
pub use mds::{make_code, DecoderMatrix, NodeScheme, VandermondeCode};
pub use planner::{ExecutionPlan, ProblemSpec, Strategy};
pub use sim::{CompletionTrace, TailPoint, TimeModel};
