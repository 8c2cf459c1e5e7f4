//! TOML experiment configuration.
//!
//! ```toml
//! scenario = "paper1"        # or "paper2", or an inline [scenario] table
//! episodes = 10
//! steps = 200
//! mc_samples = 300
//! seed = 7
//! policies = ["avg_opt", "maf", "mse_opt", "var_opt", "mc_max", "mc_cnt"]
//! statistics = ["mse", "avg", "var", "max", "cnt"]
//! count_interval = [-5.0, 5.0]
//! out = "results"
//! ```
//!
//! An inline scenario gives row-major matrices:
//!
//! ```toml
//! [scenario]
//! transition = [0.5, 0.1, 0.0, 0.6]
//! process_noise = [1.0, 0.0, 0.0, 1.0]
//! meas_noise = [1.0, 0.0, 0.0, 1.0]
//! erasure = [0.0, 0.1]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, SystemModel};
use crate::schedulers::{McEstimator, SchedulerPolicy};
use crate::simulator::ExperimentConfig;
use crate::statistics::{SummaryStatistic, TrackedMetric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    Preset(String),
    Custom(CustomScenario),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    pub transition: Vec<f64>,
    pub process_noise: Vec<f64>,
    pub meas_noise: Vec<f64>,
    pub erasure: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    #[default]
    Nested,
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioSpec,
    pub episodes: usize,
    pub steps: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub policies: Vec<String>,
    pub statistics: Vec<String>,
    #[serde(default = "default_interval")]
    pub count_interval: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub mc_estimator: EstimatorName,
    /// Inner draws per simulated outcome for the nested estimator.
    #[serde(default = "default_inner")]
    pub mc_inner: usize,
}

fn default_interval() -> [f64; 2] {
    [-5.0, 5.0]
}

fn default_inner() -> usize {
    match McEstimator::default() {
        McEstimator::Nested { inner } => inner,
        McEstimator::Pooled => 2,
    }
}

/// Command-line overrides applied on top of a file (or of the defaults).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub episodes: Option<usize>,
    pub steps: Option<usize>,
    pub mc_samples: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    /// Desk-scale run of the six standard policies on a preset.
    pub fn preset_defaults(preset: &str) -> Self {
        ConfigFile {
            scenario: ScenarioSpec::Preset(preset.to_string()),
            episodes: 10,
            steps: 200,
            mc_samples: 300,
            seed: 1,
            policies: ["avg_opt", "maf", "mse_opt", "var_opt", "mc_max", "mc_cnt"]
                .map(String::from)
                .to_vec(),
            statistics: ["mse", "avg", "var", "max", "cnt"].map(String::from).to_vec(),
            count_interval: default_interval(),
            out: None,
            mc_estimator: EstimatorName::Nested,
            mc_inner: default_inner(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.preset {
            self.scenario = ScenarioSpec::Preset(p.clone());
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.episodes {
            self.episodes = v;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.mc_samples {
            self.mc_samples = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
    }

    pub fn scenario_name(&self) -> String {
        match &self.scenario {
            ScenarioSpec::Preset(p) => p.clone(),
            ScenarioSpec::Custom(_) => "custom".into(),
        }
    }

    /// Build the model without running numerical validation.
    pub fn model(&self) -> Result<SystemModel> {
        match &self.scenario {
            ScenarioSpec::Preset(p) => match p.as_str() {
                "paper1" => Ok(model::build_scenario_1()),
                "paper2" => Ok(model::build_scenario_2()),
                other => Err(Error::Config(format!(
                    "unknown preset '{other}' (expected paper1 or paper2)"
                ))),
            },
            ScenarioSpec::Custom(c) => {
                let n = c.erasure.len();
                let square = |name: &str, v: &[f64]| {
                    if v.len() != n * n {
                        return Err(Error::Config(format!(
                            "scenario.{name} has {} entries, expected {n}x{n}",
                            v.len()
                        )));
                    }
                    Ok(DMatrix::from_row_slice(n, n, v))
                };
                SystemModel::new(
                    square("transition", &c.transition)?,
                    square("process_noise", &c.process_noise)?,
                    square("meas_noise", &c.meas_noise)?,
                    DVector::from_row_slice(&c.erasure),
                )
                .map_err(|e| Error::Config(e.to_string()))
            }
        }
    }

    fn count_statistic(&self) -> Result<SummaryStatistic> {
        let [a, b] = self.count_interval;
        SummaryStatistic::count(a, b).map_err(|e| Error::Config(e.to_string()))
    }

    fn statistic(&self, name: &str) -> Result<SummaryStatistic> {
        match name {
            "avg" => Ok(SummaryStatistic::Avg),
            "var" => Ok(SummaryStatistic::Var),
            "max" => Ok(SummaryStatistic::Max),
            "cnt" => self.count_statistic(),
            other => Err(Error::Config(format!("unknown statistic '{other}'"))),
        }
    }

    pub fn metric(&self, name: &str) -> Result<TrackedMetric> {
        if name == "mse" {
            return Ok(TrackedMetric::StateMse);
        }
        self.statistic(name).map(TrackedMetric::Statistic)
    }

    pub fn policy(&self, name: &str) -> Result<SchedulerPolicy> {
        let estimator = match self.mc_estimator {
            EstimatorName::Nested => McEstimator::Nested { inner: self.mc_inner },
            EstimatorName::Pooled => McEstimator::Pooled,
        };
        match name {
            "mse_opt" => Ok(SchedulerPolicy::MseOpt),
            "avg_opt" => Ok(SchedulerPolicy::AvgOpt),
            "var_opt" => Ok(SchedulerPolicy::VarOpt),
            "maf" => Ok(SchedulerPolicy::Maf),
            "round_robin" => Ok(SchedulerPolicy::RoundRobin),
            other => match other.strip_prefix("mc_") {
                Some(stat) => Ok(SchedulerPolicy::MonteCarlo {
                    target: self.statistic(stat)?,
                    samples: self.mc_samples,
                    estimator,
                }),
                None => Err(Error::Config(format!("unknown policy '{other}'"))),
            },
        }
    }

    /// Resolve names and build the experiment; runs full validation.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        if self.mc_estimator == EstimatorName::Nested && self.mc_inner < 2 {
            return Err(Error::Config("mc_inner must be at least 2".into()));
        }
        if self.policies.iter().any(|p| p.starts_with("mc_")) && self.mc_samples < 2 {
            return Err(Error::Config("Monte Carlo policies need mc_samples >= 2".into()));
        }
        let cfg = ExperimentConfig {
            scenario: self.scenario_name(),
            model: self.model()?,
            episodes: self.episodes,
            steps_per_episode: self.steps,
            mc_samples: self.mc_samples,
            seed: self.seed,
            policies: self
                .policies
                .iter()
                .map(|p| self.policy(p))
                .collect::<Result<_>>()?,
            tracked: self
                .statistics
                .iter()
                .map(|s| self.metric(s))
                .collect::<Result<_>>()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
