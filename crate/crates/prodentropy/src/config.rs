//! JSON experiment configuration: strict parsing, explicit defaults, and
//! construction of process models from declarative specs.
//!
//! Unknown keys are rejected, and every run echoes the fully resolved config
//! (defaults filled in) so the output re-runs to identical results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Alphabet, MarkovChain, ProcessModel, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TheoremA,
    MarkovFormula,
    Exchangeable,
    C4,
    TheoremB,
    OracleCompare,
    Determinism,
    Beta,
    ReturnsChecks,
    DemoDependentZero,
    DemoSurvivorsVictims,
    DemoBfree,
}

/// Declarative process model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// i.i.d. over `{0, ..., probs.len()-1}`.
    Iid { probs: Vec<f64> },
    /// i.i.d. `{0,1}` with `P(1) = theta`.
    Bernoulli { theta: f64 },
    /// Stationary Markov chain over `{0, ..., k-1}`.
    Markov { transition: Vec<Vec<f64>> },
    /// Sliding-window relabeling of a hidden chain.
    FunctionOfMarkov {
        transition: Vec<Vec<f64>>,
        window: usize,
        relabel: Vec<Symbol>,
        alphabet_size: usize,
    },
    /// de Finetti mixture of i.i.d. components.
    Exchangeable {
        weights: Vec<f64>,
        components: Vec<Vec<f64>>,
    },
    /// Uniform-phase periodic orbit of a `{0,1}` word like "0110".
    Periodic { word: String },
    /// Four-symbol sliding-pair fixture: bijective relabeling of adjacent
    /// fair-bit pairs, the canonical upper-bound-attaining example.
    SlidingPair,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ProcessModel> {
        match self {
            ModelSpec::Iid { probs } => {
                ProcessModel::iid(Alphabet::integers(probs.len())?, probs.clone())
            }
            ModelSpec::Bernoulli { theta } => {
                if *theta <= 0.0 || *theta > 1.0 {
                    return Err(Error::InvalidTheta);
                }
                ProcessModel::iid_bernoulli(*theta)
            }
            ModelSpec::Markov { transition } => {
                let chain =
                    MarkovChain::from_transition(Alphabet::integers(transition.len())?, transition.clone())?;
                Ok(ProcessModel::markov(chain))
            }
            ModelSpec::FunctionOfMarkov { transition, window, relabel, alphabet_size } => {
                let base =
                    MarkovChain::from_transition(Alphabet::integers(transition.len())?, transition.clone())?;
                ProcessModel::function_of_markov(
                    base,
                    *window,
                    relabel.clone(),
                    Alphabet::integers(*alphabet_size)?,
                )
            }
            ModelSpec::Exchangeable { weights, components } => {
                let k = components
                    .first()
                    .map(|c| c.len())
                    .ok_or_else(|| Error::InvalidModel("empty mixture".into()))?;
                ProcessModel::exchangeable(Alphabet::integers(k)?, weights.clone(), components.clone())
            }
            ModelSpec::Periodic { word } => ProcessModel::periodic_binary(word),
            ModelSpec::SlidingPair => Ok(crate::presets::sliding_pair_model()),
        }
    }
}

fn d_n() -> usize {
    12
}
fn d_k_cap() -> usize {
    64
}
fn d_m_returns() -> usize {
    crate::formulas::DEFAULT_M_RETURNS
}
fn d_n_samples() -> usize {
    crate::formulas::DEFAULT_N_SAMPLES
}
fn d_marginal_budget() -> usize {
    crate::models::DEFAULT_MARGINAL_BUDGET
}
fn d_oracle_budget() -> usize {
    crate::oracle::DEFAULT_ORACLE_BUDGET
}
fn d_k_max() -> usize {
    4
}
fn d_m_max() -> usize {
    3
}
fn d_window_len() -> usize {
    3
}
fn d_horizon() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_model: Option<ModelSpec>,
    /// Oracle block length.
    #[serde(default = "d_n")]
    pub n: usize,
    /// Truncation for empirical first-return laws.
    #[serde(default = "d_k_cap")]
    pub k_cap: usize,
    /// Past arrivals kept in the truncated conditioning.
    #[serde(default = "d_m_returns")]
    pub m_returns: usize,
    #[serde(default = "d_n_samples")]
    pub n_samples: usize,
    #[serde(default = "d_marginal_budget")]
    pub marginal_budget: usize,
    #[serde(default = "d_oracle_budget")]
    pub oracle_budget: usize,
    #[serde(default)]
    pub seed: u64,
    /// Determinism profile extents.
    #[serde(default = "d_k_max")]
    pub k_max: usize,
    #[serde(default = "d_m_max")]
    pub m_max: usize,
    /// Window length for the induced-invariance check.
    #[serde(default = "d_window_len")]
    pub window_len: usize,
    /// Horizon for the recurrence check.
    #[serde(default = "d_horizon")]
    pub horizon: usize,
    /// Divisor set for the divisor-free indicator demo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisors: Option<Vec<u64>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("config parse error: {e}")))
    }

    pub fn x(&self) -> Result<ProcessModel> {
        self.x_model
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("experiment needs x_model".into()))?
            .build()
    }

    pub fn y(&self) -> Result<crate::models::ZeroOneView> {
        let model = self
            .y_model
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("experiment needs y_model".into()))?
            .build()?;
        crate::models::ZeroOneView::new(model)
    }
}
