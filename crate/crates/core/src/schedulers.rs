//! Per-slot polling decisions.
//!
//! The one-step schedulers pick `argmin_n E[ν | a = n]`, where the expected
//! error of polling sensor `n` mixes the two channel outcomes:
//!
//! ```text
//! E[ν | a = n] = (1 − ε_n) · err(x̂_F, ψ_{S,n}) + ε_n · err(x̂_F, ψ_F)
//! ```
//!
//! Covariances never depend on the unreceived reading, so the closed-form
//! objectives are exact. For a generic statistic the expectation is
//! estimated by simulating the channel, the reading and the state.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{self, BeliefState};
use crate::linalg;
use crate::model::{AgeVector, SensorId, SystemModel};
use crate::rng::{self, RandomStream};
use crate::statistics::{self, SummaryStatistic, VarErrorForm};

/// Closed-form one-step error functions of the belief moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorObjective {
    /// `tr(ψ)`
    Mse,
    /// `Σ ψ / N²`
    Avg,
    /// Variance of the sample variance.
    Var(VarErrorForm),
}

impl ErrorObjective {
    pub fn eval(&self, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
        match *self {
            ErrorObjective::Mse => statistics::mse_from_cov(cov),
            ErrorObjective::Avg => statistics::avg_from_cov(cov),
            ErrorObjective::Var(form) => statistics::var_from_moments(mean, cov, form),
        }
    }
}

/// How the Monte Carlo scheduler turns simulated query values into an
/// expected error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum McEstimator {
    /// For each simulated outcome (erasure or reading `y`), draw `inner`
    /// states from the resulting posterior and take their sample variance;
    /// average over outcomes. Estimates `E_y[Var(z | y)]`.
    Nested { inner: usize },
    /// One state per simulated outcome and the sample variance across all
    /// of them. This is the variance of `z` under the predictive mixture,
    /// which for a linear `z` equals its prior variance regardless of the
    /// polled sensor.
    Pooled,
}

impl Default for McEstimator {
    fn default() -> Self {
        McEstimator::Nested { inner: 8 }
    }
}

/// A decision rule from (belief, ages) to the sensor polled next.
#[derive(Debug, Clone, PartialEq)]
pub enum SchedulerPolicy {
    MseOpt,
    AvgOpt,
    VarOpt,
    MonteCarlo {
        target: SummaryStatistic,
        samples: usize,
        estimator: McEstimator,
    },
    /// Maximum age first.
    Maf,
    RoundRobin,
}

impl SchedulerPolicy {
    pub fn monte_carlo(target: SummaryStatistic, samples: usize) -> Self {
        SchedulerPolicy::MonteCarlo {
            target,
            samples,
            estimator: McEstimator::default(),
        }
    }

    /// Stable identifier used in output files.
    pub fn name(&self) -> String {
        match self {
            SchedulerPolicy::MseOpt => "mse_opt".into(),
            SchedulerPolicy::AvgOpt => "avg_opt".into(),
            SchedulerPolicy::VarOpt => "var_opt".into(),
            SchedulerPolicy::MonteCarlo { target, .. } => format!("mc_{}", target.name()),
            SchedulerPolicy::Maf => "maf".into(),
            SchedulerPolicy::RoundRobin => "round_robin".into(),
        }
    }

    pub fn objective(&self) -> Option<ErrorObjective> {
        match self {
            SchedulerPolicy::MseOpt => Some(ErrorObjective::Mse),
            SchedulerPolicy::AvgOpt => Some(ErrorObjective::Avg),
            SchedulerPolicy::VarOpt => Some(ErrorObjective::Var(VarErrorForm::Standard)),
            _ => None,
        }
    }

    /// Choose the sensor for the next slot from the end-of-slot belief.
    pub fn decide(
        &self,
        belief: &BeliefState,
        ages: &AgeVector,
        model: &SystemModel,
        rng: &mut RandomStream,
    ) -> Result<SensorId> {
        match self {
            SchedulerPolicy::MseOpt | SchedulerPolicy::AvgOpt | SchedulerPolicy::VarOpt => {
                let objective = self.objective().expect("closed-form policy");
                schedule_closed_form(objective, belief, model)
            }
            SchedulerPolicy::MonteCarlo {
                target,
                samples,
                estimator,
            } => schedule_monte_carlo(target, *samples, *estimator, belief, model, rng),
            SchedulerPolicy::Maf => {
                if ages.len() != model.n_sensors() {
                    return Err(Error::DimensionMismatch {
                        what: "age vector",
                        expected: model.n_sensors(),
                        got: ages.len(),
                    });
                }
                Ok(schedule_maf(ages))
            }
            SchedulerPolicy::RoundRobin => {
                let n = model.n_sensors() as u64;
                Ok(SensorId::from_zero_based((belief.time % n) as usize))
            }
        }
    }
}

/// Expected one-step error of polling one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionEvaluation {
    pub sensor: SensorId,
    pub expected_error: f64,
    /// Monte Carlo standard error of `expected_error`; zero when exact.
    pub std_error: f64,
}

/// `(1 − ε_n) err(x̂_F, ψ_{S,n}) + ε_n err(x̂_F, ψ_F)` for one sensor.
///
/// `belief` is the end-of-slot belief of the previous slot. The success
/// branch uses `x̂_F`, the expectation of the posterior mean over the
/// unreceived reading.
pub fn expected_error_for_action<F>(
    err: F,
    belief: &BeliefState,
    model: &SystemModel,
    sensor: SensorId,
) -> Result<f64>
where
    F: Fn(&DVector<f64>, &DMatrix<f64>) -> f64,
{
    let prior = kalman::prior_update(belief, model)?;
    let fail = err(&prior.mean, &prior.covariance);
    mixed_error(&err, &prior, fail, model, sensor)
}

fn mixed_error<F>(
    err: &F,
    prior: &BeliefState,
    fail: f64,
    model: &SystemModel,
    sensor: SensorId,
) -> Result<f64>
where
    F: Fn(&DVector<f64>, &DMatrix<f64>) -> f64,
{
    let (_, cov_s) = kalman::posterior_covariance(prior, model, sensor)?;
    let success = err(&prior.mean, &cov_s);
    let eps = model.erasure_prob(sensor);
    Ok((1.0 - eps) * success + eps * fail)
}

/// Expected errors of every action under an arbitrary error function.
pub fn evaluate_with<F>(err: F, belief: &BeliefState, model: &SystemModel) -> Result<Vec<ActionEvaluation>>
where
    F: Fn(&DVector<f64>, &DMatrix<f64>) -> f64,
{
    let prior = kalman::prior_update(belief, model)?;
    let fail = err(&prior.mean, &prior.covariance);
    model
        .sensors()
        .map(|sensor| {
            Ok(ActionEvaluation {
                sensor,
                expected_error: mixed_error(&err, &prior, fail, model, sensor)?,
                std_error: 0.0,
            })
        })
        .collect()
}

pub fn evaluate_closed_form(
    objective: ErrorObjective,
    belief: &BeliefState,
    model: &SystemModel,
) -> Result<Vec<ActionEvaluation>> {
    evaluate_with(|m, c| objective.eval(m, c), belief, model)
}

/// One-step optimal sensor for a closed-form objective.
pub fn schedule_closed_form(
    objective: ErrorObjective,
    belief: &BeliefState,
    model: &SystemModel,
) -> Result<SensorId> {
    Ok(argmin(&evaluate_closed_form(objective, belief, model)?))
}

/// Lowest expected error; ties go to the lowest sensor index.
pub fn argmin(evals: &[ActionEvaluation]) -> SensorId {
    let mut best = evals[0];
    for e in &evals[1..] {
        if e.expected_error < best.expected_error {
            best = *e;
        }
    }
    best.sensor
}

/// Monte Carlo estimate of every action's expected error for `target`.
///
/// One slot seed is drawn from `rng` and every sensor replays the same
/// stream from it. Candidates are thus compared on common draws, which
/// cancels most of the sampling noise in their differences.
pub fn evaluate_monte_carlo(
    target: &SummaryStatistic,
    samples: usize,
    estimator: McEstimator,
    belief: &BeliefState,
    model: &SystemModel,
    rng: &mut RandomStream,
) -> Result<Vec<ActionEvaluation>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo scheduler needs at least 2 samples, got {samples}"
        )));
    }
    if let McEstimator::Nested { inner } = estimator {
        if inner < 2 {
            return Err(Error::InvalidArgument(format!(
                "nested estimator needs at least 2 inner draws, got {inner}"
            )));
        }
    }
    let slot_seed: u64 = rng.random();
    let prior = kalman::prior_update(belief, model)?;
    let prior_factor = linalg::psd_sqrt(&prior.covariance).ok_or(Error::NotPositiveDefinite {
        what: "prior covariance",
    })?;
    model
        .sensors()
        .map(|sensor| {
            let mut stream = rng::stream(slot_seed);
            let sim = OutcomeSimulator::new(&prior, &prior_factor, model, sensor)?;
            let (expected_error, std_error) = match estimator {
                McEstimator::Nested { inner } => sim.nested(target, samples, inner, &mut stream),
                McEstimator::Pooled => sim.pooled(target, samples, &mut stream),
            };
            Ok(ActionEvaluation {
                sensor,
                expected_error,
                std_error,
            })
        })
        .collect()
}

pub fn schedule_monte_carlo(
    target: &SummaryStatistic,
    samples: usize,
    estimator: McEstimator,
    belief: &BeliefState,
    model: &SystemModel,
    rng: &mut RandomStream,
) -> Result<SensorId> {
    if model.n_sensors() == 1 {
        return Ok(SensorId::from_zero_based(0));
    }
    Ok(argmin(&evaluate_monte_carlo(
        target, samples, estimator, belief, model, rng,
    )?))
}

/// Simulates one slot after polling a fixed sensor: erasure draw, reading
/// draw from the predictive distribution, posterior, state draws.
struct OutcomeSimulator<'a> {
    prior: &'a BeliefState,
    prior_factor: &'a DMatrix<f64>,
    erasure: f64,
    innovation_sd: f64,
    gain: DVector<f64>,
    posterior_factor: DMatrix<f64>,
}

impl<'a> OutcomeSimulator<'a> {
    fn new(
        prior: &'a BeliefState,
        prior_factor: &'a DMatrix<f64>,
        model: &SystemModel,
        sensor: SensorId,
    ) -> Result<Self> {
        let s = kalman::innovation_covariance(prior, model, sensor)?;
        let (gain, cov_s) = kalman::posterior_covariance(prior, model, sensor)?;
        let posterior_factor = linalg::psd_sqrt(&cov_s).ok_or(Error::NotPositiveDefinite {
            what: "posterior covariance",
        })?;
        Ok(OutcomeSimulator {
            prior,
            prior_factor,
            erasure: model.erasure_prob(sensor),
            innovation_sd: s.sqrt(),
            gain,
            posterior_factor,
        })
    }

    /// Draw the channel outcome and return the resulting belief mean and
    /// covariance factor.
    fn outcome(&self, mean: &mut DVector<f64>, rng: &mut RandomStream) -> &DMatrix<f64> {
        mean.copy_from(&self.prior.mean);
        let u: f64 = rng.random();
        if u >= self.erasure {
            let z: f64 = rng.sample(StandardNormal);
            // y − x̂_F(n) ~ N(0, s)
            mean.axpy(self.innovation_sd * z, &self.gain, 1.0);
            &self.posterior_factor
        } else {
            self.prior_factor
        }
    }

    fn nested(
        &self,
        target: &SummaryStatistic,
        outer: usize,
        inner: usize,
        rng: &mut RandomStream,
    ) -> (f64, f64) {
        let n = self.prior.dim();
        let mut mean = DVector::zeros(n);
        let mut draw = StateDraw::new(n);
        let mut values = vec![0.0; inner];
        let mut per_outcome = Vec::with_capacity(outer);
        for _ in 0..outer {
            let factor = self.outcome(&mut mean, rng);
            for v in values.iter_mut() {
                *v = target.eval(draw.sample(&mean, factor, rng));
            }
            per_outcome.push(sample_variance(&values));
        }
        mean_and_std_error(&per_outcome)
    }

    fn pooled(&self, target: &SummaryStatistic, samples: usize, rng: &mut RandomStream) -> (f64, f64) {
        let n = self.prior.dim();
        let mut mean = DVector::zeros(n);
        let mut draw = StateDraw::new(n);
        let values: Vec<f64> = (0..samples)
            .map(|_| {
                let factor = self.outcome(&mut mean, rng);
                target.eval(draw.sample(&mean, factor, rng))
            })
            .collect();
        let m = values.len() as f64;
        let mu = values.iter().sum::<f64>() / m;
        let var = sample_variance(&values);
        let m4 = values.iter().map(|u| (u - mu).powi(4)).sum::<f64>() / m;
        let se = ((m4 - var * var).max(0.0) / m).sqrt();
        (var, se)
    }
}

struct StateDraw {
    z: DVector<f64>,
    x: DVector<f64>,
}

impl StateDraw {
    fn new(n: usize) -> Self {
        StateDraw {
            z: DVector::zeros(n),
            x: DVector::zeros(n),
        }
    }

    fn sample(&mut self, mean: &DVector<f64>, factor: &DMatrix<f64>, rng: &mut RandomStream) -> &[f64] {
        for z in self.z.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        self.x.copy_from(mean);
        self.x.gemv(1.0, factor, &self.z, 1.0);
        self.x.as_slice()
    }
}

fn sample_variance(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mu = values.iter().sum::<f64>() / m;
    values.iter().map(|u| (u - mu).powi(2)).sum::<f64>() / (m - 1.0)
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mu = values.iter().sum::<f64>() / m;
    (mu, (sample_variance(values) / m).sqrt())
}

/// Oldest sensor first; ties go to the lowest index.
pub fn schedule_maf(ages: &AgeVector) -> SensorId {
    let mut best = 0;
    for (i, &a) in ages.ages().iter().enumerate() {
        if a > ages.ages()[best] {
            best = i;
        }
    }
    SensorId::from_zero_based(best)
}
