//! Experiment configuration (JSON). Unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use codedconv::planner::{self, ExecutionPlan};
use codedconv::{CostModel, LogBase, NodeScheme, ProblemSpec, Strategy, TimeModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    Uncoded {},
    Replication { r: u64 },
    Coded { s: u64 },
}

impl From<StrategyConfig> for Strategy {
    fn from(c: StrategyConfig) -> Self {
        match c {
            StrategyConfig::Uncoded {} => Strategy::Uncoded,
            StrategyConfig::Replication { r } => Strategy::Replication { r },
            StrategyConfig::Coded { s } => Strategy::Coded { s },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default)]
    pub log_base: LogBase,
}

fn one() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 1.0,
            c: 1.0,
            log_base: LogBase::Two,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeadlineConfig {
    List(Vec<f64>),
    Range(DeadlineRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeadlineRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl DeadlineConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match self {
            DeadlineConfig::List(v) => v.clone(),
            DeadlineConfig::Range(r) => {
                if r.count == 0 || !(r.min <= r.max) {
                    bail!("deadline range needs count >= 1 and min <= max");
                }
                if r.spacing == Spacing::Log && !(r.min > 0.0) {
                    bail!("log-spaced deadlines need min > 0");
                }
                let steps = (r.count.max(2) - 1) as f64;
                (0..r.count)
                    .map(|i| {
                        let f = if r.count == 1 { 0.0 } else { i as f64 / steps };
                        match r.spacing {
                            Spacing::Linear => r.min + f * (r.max - r.min),
                            Spacing::Log => r.min * (r.max / r.min).powf(f),
                        }
                    })
                    .collect()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            bail!("deadlines must be finite");
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n1: u64,
    pub n2: u64,
    pub p: u64,
    pub strategies: Vec<StrategyConfig>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub deadlines: Option<DeadlineConfig>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub node_scheme: NodeScheme,
}

fn default_trials() -> u64 {
    100_000
}

/// A configuration whose problem, model and plans have all been validated.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: ProblemSpec,
    pub model: TimeModel,
    pub plans: Vec<ExecutionPlan>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid experiment config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(self) -> Result<Experiment> {
        let spec = ProblemSpec::new(self.n1, self.n2, self.p)?;
        let cost = CostModel::new(self.model.c, self.model.log_base)?;
        let model = TimeModel::new(self.model.mu, self.model.alpha, cost)?;
        if self.strategies.is_empty() {
            bail!("config lists no strategies");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        let plans = self
            .strategies
            .iter()
            .map(|&st| {
                planner::plan(spec, st.into())
                    .with_context(|| format!("strategy {st:?} is not valid for (n1={}, n2={}, p={})", spec.n1, spec.n2, spec.p))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(d) = &self.deadlines {
            d.values()?;
        }
        Ok(Experiment {
            config: self,
            spec,
            model,
            plans,
        })
    }
}

impl Experiment {
    pub fn deadlines(&self) -> Result<Vec<f64>> {
        match &self.config.deadlines {
            Some(d) => d.values(),
            None => bail!("config has no deadlines"),
        }
    }
}

/// Replication factor of a plan, if it is a replication plan.
pub fn replication_factor(plan: &ExecutionPlan) -> Option<u64> {
    match plan.strategy {
        Strategy::Replication { r } => Some(r),
        _ => None,
    }
}
