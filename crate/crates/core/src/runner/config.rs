use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, PolicyParams};
use crate::graph::GraphKind;
use crate::learner::LearnerConfig;
use crate::metrics::ConvergenceMode;

/// Declarative description of one population-training experiment. A config
/// covers one graph kind and any number of seeds; each seed is one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "defaults::population_size")]
    pub population_size: usize,
    pub graph: GraphKind,
    #[serde(default = "defaults::updates_per_period")]
    pub updates_per_period: u32,
    #[serde(default = "defaults::total_periods")]
    pub total_periods: u32,
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<u64>,
    /// Rollouts per entry of the matrix that drives adaptive graphs.
    #[serde(default = "defaults::mc_samples")]
    pub mc_samples: u32,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    /// Periods averaged by convergence, coverage and summaries.
    #[serde(default = "defaults::metric_window")]
    pub metric_window: usize,
    /// Defaults to the game's mode stddev.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_radius: Option<f64>,
    #[serde(default)]
    pub convergence_mode: ConvergenceMode,
    #[serde(default = "defaults::nash_tol")]
    pub nash_tol: f64,
    /// Stddev of the initial parameter draw; defaults per game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_stddev: Option<f64>,
    pub game: GameSpec,
    /// Defaults per game when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluators: Vec<EvaluatorSet>,
}

mod defaults {
    use std::path::PathBuf;

    pub fn population_size() -> usize {
        4
    }
    pub fn updates_per_period() -> u32 {
        200
    }
    pub fn total_periods() -> u32 {
        500
    }
    pub fn seeds() -> Vec<u64> {
        (0..15).collect()
    }
    pub fn mc_samples() -> u32 {
        32
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("runs")
    }
    pub fn metric_window() -> usize {
        50
    }
    pub fn nash_tol() -> f64 {
        crate::metagame::DEFAULT_TOL
    }
}

/// A named evaluator population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorSet {
    pub name: String,
    #[serde(flatten)]
    pub rule: EvaluatorRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EvaluatorRule {
    /// Every mode center of a GMM-RPS game.
    GroundTruthModes,
    /// Final agents of an earlier run, loaded from its log.
    FromRun { run_id: String },
    /// Explicit strategies.
    Frozen { params: Vec<PolicyParams> },
}

impl EvaluatorRule {
    /// Parses `ground_truth_modes` or `from_run:<run-id>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "ground_truth_modes" => Ok(EvaluatorRule::GroundTruthModes),
            Some(("from_run", id)) if !id.is_empty() => Ok(EvaluatorRule::FromRun { run_id: id.to_string() }),
            _ => Err(Error::Parse(format!(
                "unknown evaluator rule '{s}' (expected ground_truth_modes or from_run:<run-id>)"
            ))),
        }
    }
}

impl ExperimentConfig {
    /// A config with every default filled in.
    pub fn new(name: impl Into<String>, game: GameSpec, graph: GraphKind) -> Self {
        Self {
            name: name.into(),
            population_size: defaults::population_size(),
            graph,
            updates_per_period: defaults::updates_per_period(),
            total_periods: defaults::total_periods(),
            seeds: defaults::seeds(),
            mc_samples: defaults::mc_samples(),
            output_dir: defaults::output_dir(),
            metric_window: defaults::metric_window(),
            coverage_radius: None,
            convergence_mode: ConvergenceMode::default(),
            nash_tol: defaults::nash_tol(),
            init_stddev: None,
            game,
            learner: None,
            evaluators: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn learner(&self) -> LearnerConfig {
        self.learner.clone().unwrap_or_else(|| LearnerConfig::default_for(&self.game))
    }

    pub fn coverage_radius(&self) -> f64 {
        self.coverage_radius.or_else(|| self.game.as_gmm().map(|g| g.mode_stddev())).unwrap_or(1.0)
    }

    pub fn init_stddev(&self) -> f64 {
        self.init_stddev.unwrap_or(match self.game {
            GameSpec::Blotto(_) => 0.1,
            _ => 0.3,
        })
    }

    pub fn run_id(&self, seed: u64) -> String {
        format!("{}-{}-s{}", self.name, self.graph, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config(format!("invalid experiment name '{}'", self.name)));
        }
        if self.population_size < 2 {
            return Err(Error::config(format!("population_size must be >= 2, got {}", self.population_size)));
        }
        if self.total_periods < 1 {
            return Err(Error::config("total_periods must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must be nonempty"));
        }
        if self.metric_window < 2 {
            return Err(Error::config("metric_window must be >= 2"));
        }
        if self.nash_tol.is_nan() || self.nash_tol <= 0.0 {
            return Err(Error::config("nash_tol must be positive"));
        }
        if let Some(r) = self.coverage_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!("coverage_radius must be positive, got {r}")));
            }
        }
        if let Some(s) = self.init_stddev {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config(format!("init_stddev must be >= 0, got {s}")));
            }
        }
        self.game.validate()?;
        self.learner().validate()?;
        let mut names: Vec<&str> = self.evaluators.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("evaluator set names must be unique"));
        }
        Ok(())
    }
}
