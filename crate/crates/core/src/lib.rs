//! Value-of-information scheduling of sensor polls.
//!
//! A base station tracks an `N`-dimensional linear-Gaussian process with a
//! Kalman filter. Each slot it polls one of `N` noisy sensors over an erasure
//! channel. The schedulers here pick the sensor whose update minimizes the
//! expected next-slot squared error of a chosen summary statistic of the
//! state (mean, sample variance, maximum, interval count) or of the whole
//! state.
//!
//! Modules, bottom-up:
//!
//! - [`model`]: dynamics, noise, erasure channel, the two reference scenarios.
//! - [`kalman`]: prior/posterior recursions for scalar observations.
//! - [`statistics`]: summary statistics, MMSE estimates, closed-form errors.
//! - [`schedulers`]: one-step optimal, Monte Carlo, max-age-first policies.
//! - [`simulator`]: episodes and experiments under common random numbers.
//! - [`io`]: TOML configuration and CSV/JSON result files.

pub mod error;
pub mod io;
pub mod kalman;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod schedulers;
pub mod simulator;
pub mod statistics;

pub use error::{Error, Result};
pub use kalman::{BeliefState, Phase};
pub use model::{AgeVector, ChannelOutcome, GroundTruth, SensorId, SystemModel, ValidationReport};
pub use rng::RandomStream;
pub use schedulers::{ActionEvaluation, ErrorObjective, McEstimator, SchedulerPolicy};
pub use simulator::{EpisodeLog, ExperimentConfig, ExperimentResults};
pub use statistics::{CenteringMatrix, CustomStatistic, SummaryStatistic, TrackedMetric, VarErrorForm};
