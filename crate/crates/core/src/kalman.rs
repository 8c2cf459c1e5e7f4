//! Base-station belief `N(x̂, ψ)` maintained by a Kalman filter that
//! receives at most one scalar sensor reading per slot.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ChannelOutcome, SensorId, SystemModel};

/// Innovation variances at or below this are treated as degenerate.
pub const INNOVATION_FLOOR: f64 = 1e-300;

/// Which half of the slot a belief was produced by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// After the prediction step, before any observation of this slot.
    Prior,
    /// End of slot (or the initial belief).
    Posterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub time: u64,
    pub phase: Phase,
}

impl BeliefState {
    /// `x̂(0) = 0`, `ψ(0) = I`.
    pub fn initial(n: usize) -> Self {
        Self::with_moments(DVector::zeros(n), DMatrix::identity(n, n))
    }

    /// An end-of-slot belief at time 0 with the given moments.
    pub fn with_moments(mean: DVector<f64>, covariance: DMatrix<f64>) -> Self {
        BeliefState {
            mean,
            covariance,
            time: 0,
            phase: Phase::Posterior,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn expect_phase(&self, expected: Phase) -> Result<()> {
        if self.phase != expected {
            return Err(Error::WrongPhase {
                expected,
                got: self.phase,
            });
        }
        Ok(())
    }

    fn check_dims(&self, model: &SystemModel) -> Result<()> {
        let n = model.n_sensors();
        if self.mean.len() != n {
            return Err(Error::DimensionMismatch {
                what: "belief mean",
                expected: n,
                got: self.mean.len(),
            });
        }
        if self.covariance.nrows() != n || self.covariance.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "belief covariance",
                expected: n,
                got: self.covariance.nrows(),
            });
        }
        Ok(())
    }
}

/// Prediction: `x̂_F = A x̂`, `ψ_F = A ψ Aᵀ + Σ_v`.
pub fn prior_update(belief: &BeliefState, model: &SystemModel) -> Result<BeliefState> {
    belief.expect_phase(Phase::Posterior)?;
    belief.check_dims(model)?;
    let a = model.transition();
    let mean = a * &belief.mean;
    let covariance = linalg::symmetrized(&(a * &belief.covariance * a.transpose() + model.process_noise_cov()));
    Ok(BeliefState {
        mean,
        covariance,
        time: belief.time + 1,
        phase: Phase::Prior,
    })
}

/// `s = ψ_F(n,n) + Σ_w(n,n)`, the variance of the predicted reading.
pub fn innovation_covariance(
    belief_f: &BeliefState,
    model: &SystemModel,
    sensor: SensorId,
) -> Result<f64> {
    belief_f.expect_phase(Phase::Prior)?;
    belief_f.check_dims(model)?;
    let i = checked_index(model, sensor)?;
    let s = belief_f.covariance[(i, i)] + model.meas_noise_var(sensor);
    if !(s > INNOVATION_FLOOR) {
        return Err(Error::DegenerateInnovation {
            sensor: sensor.get(),
            value: s,
        });
    }
    Ok(s)
}

/// `k = ψ_F 1_nᵀ / s`: column `n` of the prior covariance scaled by `1/s`.
pub fn kalman_gain(
    belief_f: &BeliefState,
    model: &SystemModel,
    sensor: SensorId,
) -> Result<DVector<f64>> {
    let s = innovation_covariance(belief_f, model, sensor)?;
    Ok(belief_f.covariance.column(sensor.zero_based()) / s)
}

/// Correction with reading `y` from `sensor`.
///
/// `x̂_S = x̂_F + k (y − x̂_F(n))`, `ψ_S = (I − k 1_n) ψ_F`, followed by
/// re-symmetrization of `ψ_S`.
pub fn posterior_update(
    belief_f: &BeliefState,
    model: &SystemModel,
    sensor: SensorId,
    y: f64,
) -> Result<BeliefState> {
    if !y.is_finite() {
        return Err(Error::NonFinite {
            what: format!("observation from sensor {sensor}"),
        });
    }
    let (gain, covariance) = posterior_covariance(belief_f, model, sensor)?;
    let i = sensor.zero_based();
    let mean = &belief_f.mean + &gain * (y - belief_f.mean[i]);
    Ok(BeliefState {
        mean,
        covariance,
        time: belief_f.time,
        phase: Phase::Posterior,
    })
}

/// Gain and posterior covariance for `sensor`; neither depends on the reading.
pub fn posterior_covariance(
    belief_f: &BeliefState,
    model: &SystemModel,
    sensor: SensorId,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let gain = kalman_gain(belief_f, model, sensor)?;
    let i = sensor.zero_based();
    // (I − k 1_n) ψ_F = ψ_F − k · (row n of ψ_F)
    let row = belief_f.covariance.row(i).clone_owned();
    let mut cov = &belief_f.covariance - &gain * row;
    cov = linalg::symmetrized(&cov);
    Ok((gain, cov))
}

/// One full slot: predict, then correct if the update arrived.
pub fn filter_step(
    belief: &BeliefState,
    model: &SystemModel,
    action: SensorId,
    outcome: ChannelOutcome,
) -> Result<BeliefState> {
    let prior = prior_update(belief, model)?;
    match outcome {
        ChannelOutcome::Erased => Ok(BeliefState {
            phase: Phase::Posterior,
            ..prior
        }),
        ChannelOutcome::Received(y) => posterior_update(&prior, model, action, y),
    }
}

fn checked_index(model: &SystemModel, sensor: SensorId) -> Result<usize> {
    model.sensor(sensor.get()).map(SensorId::zero_based)
}
