//! Episode and experiment orchestration.
//!
//! All randomness of an episode that is external to the policy (process
//! noise, full measurement-noise vectors and one channel uniform per sensor
//! and slot) is generated up front from the episode seed. Every policy run
//! with the same episode seed therefore sees the same world and differs only
//! in its decisions.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{self, BeliefState};
use crate::linalg;
use crate::model::{self, AgeVector, ChannelOutcome, GroundTruth, SensorId, SystemModel};
use crate::rng;
use crate::schedulers::SchedulerPolicy;
use crate::statistics::{SummaryStatistic, TrackedMetric};

const TAPE_STREAM: u64 = 1;
const SCHEDULER_STREAM: u64 = 2;
const ESTIMATE_STREAM: u64 = 3;

/// Pre-drawn exogenous randomness for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTape {
    pub process: Vec<DVector<f64>>,
    pub measurement: Vec<DVector<f64>>,
    pub channel: Vec<DVector<f64>>,
}

impl NoiseTape {
    pub fn generate(model: &SystemModel, steps: usize, seed: u64) -> Result<Self> {
        let n = model.n_sensors();
        let v_factor = model.process_noise_factor()?;
        let w_factor = linalg::psd_sqrt(model.meas_noise_cov()).ok_or(Error::NotPositiveDefinite {
            what: "measurement noise covariance",
        })?;
        let mut r = rng::substream(seed, &[TAPE_STREAM]);
        let mut tape = NoiseTape {
            process: Vec::with_capacity(steps),
            measurement: Vec::with_capacity(steps),
            channel: Vec::with_capacity(steps),
        };
        for _ in 0..steps {
            tape.process.push(linalg::colored_normal(v_factor, &mut r));
            tape.measurement.push(linalg::colored_normal(&w_factor, &mut r));
            tape.channel.push(DVector::from_fn(n, |_, _| r.random::<f64>()));
        }
        Ok(tape)
    }

    pub fn len(&self) -> usize {
        self.process.len()
    }

    pub fn is_empty(&self) -> bool {
        self.process.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub t: u64,
    pub action: SensorId,
    pub success: bool,
    /// Realized squared error per tracked metric, in tracking order.
    pub errors: Vec<f64>,
    /// Ages after the slot's bookkeeping.
    pub ages: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub policy: String,
    pub episode: usize,
    pub seed: u64,
    pub records: Vec<SlotRecord>,
}

/// Run one episode from `x(0) = x̂(0) = 0`, `ψ(0) = I`.
///
/// `estimate_samples` is the number of draws used to estimate statistics
/// that have no closed-form MMSE estimate (e.g. the maximum).
pub fn run_episode(
    model: &SystemModel,
    policy: &SchedulerPolicy,
    tracked: &[TrackedMetric],
    steps: usize,
    seed: u64,
    estimate_samples: usize,
) -> Result<EpisodeLog> {
    let tape = NoiseTape::generate(model, steps, seed)?;
    run_episode_on_tape(model, policy, tracked, &tape, seed, estimate_samples)
}

/// Run one episode against a given noise tape.
pub fn run_episode_on_tape(
    model: &SystemModel,
    policy: &SchedulerPolicy,
    tracked: &[TrackedMetric],
    tape: &NoiseTape,
    seed: u64,
    estimate_samples: usize,
) -> Result<EpisodeLog> {
    let n = model.n_sensors();
    let mut truth = GroundTruth::zero(n);
    let mut belief = BeliefState::initial(n);
    let mut ages = AgeVector::zeros(n);
    let mut records = Vec::with_capacity(tape.len());

    for step in 0..tape.len() {
        let t = step as u64 + 1;
        truth = model::step_process_with_noise(&truth, model, &tape.process[step])?;

        let mut sched_rng = rng::substream(seed, &[SCHEDULER_STREAM, t]);
        let action = policy.decide(&belief, &ages, model, &mut sched_rng)?;
        let a = action.zero_based();

        let success = model::channel_succeeds(model, action, tape.channel[step][a]);
        let outcome = if success {
            ChannelOutcome::Received(truth.state[a] + tape.measurement[step][a])
        } else {
            ChannelOutcome::Erased
        };
        belief = kalman::filter_step(&belief, model, action, outcome)?;
        if !linalg::all_finite(&belief.mean) || belief.covariance.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("belief at t={t} under policy {}", policy.name()),
            });
        }
        ages.record(action, success);

        let mut est_rng = rng::substream(seed, &[ESTIMATE_STREAM, t]);
        let errors = tracked
            .iter()
            .map(|m| m.realized_error(&truth.state, &belief, estimate_samples, &mut est_rng))
            .collect::<Result<Vec<_>>>()?;

        records.push(SlotRecord {
            t,
            action,
            success,
            errors,
            ages: ages.ages().to_vec(),
        });
    }

    Ok(EpisodeLog {
        policy: policy.name(),
        episode: 0,
        seed,
        records,
    })
}

/// Everything needed to run a batch of episodes.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Label of the scenario (preset name or "custom").
    pub scenario: String,
    pub model: SystemModel,
    pub episodes: usize,
    pub steps_per_episode: usize,
    /// Draws used for Monte Carlo statistic estimates.
    pub mc_samples: usize,
    pub seed: u64,
    pub policies: Vec<SchedulerPolicy>,
    pub tracked: Vec<TrackedMetric>,
}

impl ExperimentConfig {
    /// Scenario-scale defaults for quick runs: 10 episodes of 200 slots,
    /// 300 Monte Carlo samples.
    pub fn desk_scale(scenario: impl Into<String>, model: SystemModel, seed: u64) -> Self {
        let mc = 300;
        ExperimentConfig {
            scenario: scenario.into(),
            model,
            episodes: 10,
            steps_per_episode: 200,
            mc_samples: mc,
            seed,
            policies: standard_policies(mc),
            tracked: standard_metrics(),
        }
    }

    /// 100 episodes of 1000 slots, 1000 Monte Carlo samples.
    pub fn paper_scale(scenario: impl Into<String>, model: SystemModel, seed: u64) -> Self {
        let mc = 1000;
        ExperimentConfig {
            episodes: 100,
            steps_per_episode: 1000,
            mc_samples: mc,
            policies: standard_policies(mc),
            ..Self::desk_scale(scenario, model, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        if self.tracked.is_empty() {
            return Err(Error::Config("at least one statistic is required".into()));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be positive".into()));
        }
        if self.steps_per_episode == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.mc_samples == 0 {
            return Err(Error::Config("mc_samples must be positive".into()));
        }
        let names: Vec<String> = self.policies.iter().map(SchedulerPolicy::name).collect();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::Config(format!("policy '{name}' listed twice")));
            }
        }
        let report = model::validate_model(&self.model);
        if !report.passed() {
            return Err(Error::InvalidModel(report.to_string()));
        }
        Ok(())
    }

    pub fn episode_seed(&self, episode: usize) -> u64 {
        rng::derive_seed(self.seed, &[episode as u64])
    }
}

/// `[avg_opt, maf, mse_opt, var_opt, mc_max, mc_cnt]` with count interval
/// `[-5, 5]`.
pub fn standard_policies(mc_samples: usize) -> Vec<SchedulerPolicy> {
    vec![
        SchedulerPolicy::AvgOpt,
        SchedulerPolicy::Maf,
        SchedulerPolicy::MseOpt,
        SchedulerPolicy::VarOpt,
        SchedulerPolicy::monte_carlo(SummaryStatistic::Max, mc_samples),
        SchedulerPolicy::monte_carlo(SummaryStatistic::Count { lower: -5.0, upper: 5.0 }, mc_samples),
    ]
}

/// `[mse, avg, var, max, cnt]` with count interval `[-5, 5]`.
pub fn standard_metrics() -> Vec<TrackedMetric> {
    vec![
        TrackedMetric::StateMse,
        SummaryStatistic::Avg.into(),
        SummaryStatistic::Var.into(),
        SummaryStatistic::Max.into(),
        SummaryStatistic::Count { lower: -5.0, upper: 5.0 }.into(),
    ]
}

/// Empirical distribution of one (policy, metric) error sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCdf {
    pub policy: String,
    pub metric: String,
    /// Sorted errors.
    pub errors: Vec<f64>,
}

impl ErrorCdf {
    pub fn from_errors(policy: String, metric: String, mut errors: Vec<f64>) -> Self {
        errors.sort_by(f64::total_cmp);
        ErrorCdf { policy, metric, errors }
    }

    /// `(error, cumulative fraction)` pairs, one per observation.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.errors.len() as f64;
        self.errors
            .iter()
            .enumerate()
            .map(move |(i, &e)| (e, (i + 1) as f64 / n))
    }

    pub fn mean(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.errors.len() as f64
    }

    pub fn median(&self) -> f64 {
        let n = self.errors.len();
        if n == 0 {
            return f64::NAN;
        }
        if n % 2 == 1 {
            self.errors[n / 2]
        } else {
            0.5 * (self.errors[n / 2 - 1] + self.errors[n / 2])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResults {
    pub n_sensors: usize,
    pub policies: Vec<String>,
    pub metrics: Vec<String>,
    pub episodes: usize,
    /// Ordered by policy, then episode.
    pub logs: Vec<EpisodeLog>,
    /// `selection[p][n]`: slots in which policy `p` polled sensor `n + 1`.
    pub selection: Vec<Vec<u64>>,
    /// One CDF per (policy, metric), policy-major.
    pub cdfs: Vec<ErrorCdf>,
}

impl ExperimentResults {
    pub fn from_logs(n_sensors: usize, policies: Vec<String>, metrics: Vec<String>, logs: Vec<EpisodeLog>) -> Self {
        let episodes = if policies.is_empty() { 0 } else { logs.len() / policies.len() };
        let mut selection = vec![vec![0u64; n_sensors]; policies.len()];
        let mut cdfs = Vec::with_capacity(policies.len() * metrics.len());
        for (p, name) in policies.iter().enumerate() {
            let mine: Vec<&EpisodeLog> = logs.iter().filter(|l| &l.policy == name).collect();
            for log in &mine {
                for r in &log.records {
                    selection[p][r.action.zero_based()] += 1;
                }
            }
            for (m, metric) in metrics.iter().enumerate() {
                let errors = mine
                    .iter()
                    .flat_map(|l| l.records.iter().map(move |r| r.errors[m]))
                    .collect();
                cdfs.push(ErrorCdf::from_errors(name.clone(), metric.clone(), errors));
            }
        }
        ExperimentResults {
            n_sensors,
            policies,
            metrics,
            episodes,
            logs,
            selection,
            cdfs,
        }
    }

    pub fn policy_index(&self, name: &str) -> Option<usize> {
        self.policies.iter().position(|p| p == name)
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == name)
    }

    pub fn cdf(&self, policy: usize, metric: usize) -> &ErrorCdf {
        &self.cdfs[policy * self.metrics.len() + metric]
    }

    pub fn mean_error(&self, policy: usize, metric: usize) -> f64 {
        self.cdf(policy, metric).mean()
    }

    /// Mean error of each episode, ordered by episode id.
    pub fn episode_means(&self, policy: usize, metric: usize) -> Vec<f64> {
        let name = &self.policies[policy];
        self.logs
            .iter()
            .filter(|l| &l.policy == name)
            .map(|l| l.records.iter().map(|r| r.errors[metric]).sum::<f64>() / l.records.len() as f64)
            .collect()
    }

    pub fn log(&self, policy: usize, episode: usize) -> &EpisodeLog {
        &self.logs[policy * self.episodes + episode]
    }

    pub fn total_slots(&self, policy: usize) -> u64 {
        self.selection[policy].iter().sum()
    }
}

/// Run every (policy, episode) pair under common random numbers.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.policies.len())
        .flat_map(|p| (0..config.episodes).map(move |e| (p, e)))
        .collect();
    let logs = jobs
        .par_iter()
        .map(|&(p, e)| {
            let mut log = run_episode(
                &config.model,
                &config.policies[p],
                &config.tracked,
                config.steps_per_episode,
                config.episode_seed(e),
                config.mc_samples,
            )?;
            log.episode = e;
            Ok(log)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResults::from_logs(
        config.model.n_sensors(),
        config.policies.iter().map(SchedulerPolicy::name).collect(),
        config.tracked.iter().map(|m| m.name().to_string()).collect(),
        logs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn small_model(eps: f64) -> SystemModel {
        let n = 3;
        SystemModel::new(
            DMatrix::from_row_slice(n, n, &[0.5, 0.1, 0.0, 0.0, 0.6, 0.1, 0.1, 0.0, 0.4]),
            DMatrix::identity(n, n),
            DMatrix::identity(n, n),
            DVector::from_element(n, eps),
        )
        .unwrap()
    }

    #[test]
    fn zero_steps_gives_empty_log() {
        let log = run_episode(&small_model(0.1), &SchedulerPolicy::Maf, &standard_metrics(), 0, 1, 10).unwrap();
        assert!(log.records.is_empty());
    }

    #[test]
    fn full_erasure_follows_lyapunov_recursion() {
        let model = small_model(1.0);
        let log = run_episode(&model, &SchedulerPolicy::MseOpt, &[TrackedMetric::StateMse], 30, 5, 10).unwrap();
        assert!(log.records.iter().all(|r| !r.success));
        // ages never reset
        assert_eq!(log.records.last().unwrap().ages, vec![30, 30, 30]);
    }

    #[test]
    fn same_seed_same_log() {
        let model = small_model(0.2);
        let policy = SchedulerPolicy::monte_carlo(SummaryStatistic::Max, 20);
        let a = run_episode(&model, &policy, &standard_metrics(), 25, 11, 50).unwrap();
        let b = run_episode(&model, &policy, &standard_metrics(), 25, 11, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn age_bookkeeping_matches_successes() {
        let model = small_model(0.3);
        let log = run_episode(&model, &SchedulerPolicy::Maf, &[TrackedMetric::StateMse], 200, 3, 10).unwrap();
        let mut prev = vec![0u64; 3];
        let mut resets = 0;
        for r in &log.records {
            for i in 0..3 {
                if r.ages[i] == 0 {
                    resets += 1;
                    assert!(r.success && r.action.zero_based() == i);
                } else {
                    assert_eq!(r.ages[i], prev[i] + 1);
                }
            }
            prev = r.ages.clone();
        }
        assert_eq!(resets, log.records.iter().filter(|r| r.success).count());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::desk_scale("small", small_model(0.1), 1);
        assert!(cfg.validate().is_ok());
        cfg.policies.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::desk_scale("small", small_model(0.1), 1);
        cfg.policies.push(SchedulerPolicy::Maf);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cdf_points_and_median() {
        let cdf = ErrorCdf::from_errors("p".into(), "m".into(), vec![3.0, 1.0, 2.0]);
        let pts: Vec<_> = cdf.points().collect();
        assert_eq!(pts, vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]);
        assert_eq!(cdf.median(), 2.0);
        assert_eq!(cdf.mean(), 2.0);
    }
}
