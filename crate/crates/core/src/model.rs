//! Linear-Gaussian process model, ground truth, erasure channel and the two
//! reference scenarios.
//!
//! The process evolves as `x(t) = A x(t-1) + v(t)` with `v ~ N(0, Σ_v)`, and
//! sensor `n` observes `y_n = x_n + w_n` with `w ~ N(0, Σ_w)`. A polled
//! sensor's update is lost with probability `ε_n`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::RandomStream;

/// A 1-based sensor index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorId(usize);

impl SensorId {
    /// Checked constructor from a 1-based index.
    pub fn new(index: usize, n_sensors: usize) -> Result<Self> {
        if index == 0 || index > n_sensors {
            return Err(Error::SensorOutOfRange { index, n_sensors });
        }
        Ok(SensorId(index))
    }

    pub(crate) fn from_zero_based(i: usize) -> Self {
        SensorId(i + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Dynamics, noise covariances and per-sensor erasure probabilities.
///
/// Construction only checks shapes; call [`validate_model`] for the
/// numerical checks. Square-root factors of both noise covariances are
/// computed once here and reused for every draw.
#[derive(Debug, Clone)]
pub struct SystemModel {
    transition: DMatrix<f64>,
    process_noise_cov: DMatrix<f64>,
    meas_noise_cov: DMatrix<f64>,
    erasure_prob: DVector<f64>,
    process_noise_factor: Option<DMatrix<f64>>,
}

impl SystemModel {
    pub fn new(
        transition: DMatrix<f64>,
        process_noise_cov: DMatrix<f64>,
        meas_noise_cov: DMatrix<f64>,
        erasure_prob: DVector<f64>,
    ) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("model needs at least one sensor".into()));
        }
        check_square("transition", &transition, n)?;
        check_square("process_noise_cov", &process_noise_cov, n)?;
        check_square("meas_noise_cov", &meas_noise_cov, n)?;
        if erasure_prob.len() != n {
            return Err(Error::DimensionMismatch {
                what: "erasure_prob",
                expected: n,
                got: erasure_prob.len(),
            });
        }
        let process_noise_factor = linalg::psd_sqrt(&process_noise_cov);
        Ok(SystemModel {
            transition,
            process_noise_cov,
            meas_noise_cov,
            erasure_prob,
            process_noise_factor,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn process_noise_cov(&self) -> &DMatrix<f64> {
        &self.process_noise_cov
    }

    pub fn meas_noise_cov(&self) -> &DMatrix<f64> {
        &self.meas_noise_cov
    }

    pub fn erasure_probs(&self) -> &DVector<f64> {
        &self.erasure_prob
    }

    pub fn erasure_prob(&self, sensor: SensorId) -> f64 {
        self.erasure_prob[sensor.zero_based()]
    }

    pub fn meas_noise_var(&self, sensor: SensorId) -> f64 {
        let i = sensor.zero_based();
        self.meas_noise_cov[(i, i)]
    }

    pub fn sensor(&self, index: usize) -> Result<SensorId> {
        SensorId::new(index, self.n_sensors())
    }

    pub fn sensors(&self) -> impl Iterator<Item = SensorId> {
        (0..self.n_sensors()).map(SensorId::from_zero_based)
    }

    /// Square-root factor of Σ_v, or an error when Σ_v is not PSD.
    pub fn process_noise_factor(&self) -> Result<&DMatrix<f64>> {
        self.process_noise_factor
            .as_ref()
            .ok_or(Error::NotPositiveDefinite {
                what: "process noise covariance",
            })
    }

    /// Replace the erasure probabilities, keeping everything else.
    pub fn with_erasure_probs(mut self, erasure_prob: DVector<f64>) -> Result<Self> {
        if erasure_prob.len() != self.n_sensors() {
            return Err(Error::DimensionMismatch {
                what: "erasure_prob",
                expected: self.n_sensors(),
                got: erasure_prob.len(),
            });
        }
        self.erasure_prob = erasure_prob;
        Ok(self)
    }
}

fn check_square(what: &'static str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            got: m.nrows(),
        });
    }
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            got: m.ncols(),
        });
    }
    Ok(())
}

/// Number of sensors in both reference scenarios.
pub const SCENARIO_SENSORS: usize = 20;

/// Reference scenario 1: diagonal 3/4, −1/8 wherever `7 | (i − 2j)`.
pub fn build_scenario_1() -> SystemModel {
    let n = SCENARIO_SENSORS;
    let a = DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r as i64 + 1, c as i64 + 1);
        if i == j {
            0.75
        } else if (i - 2 * j) % 7 == 0 {
            -0.125
        } else {
            0.0
        }
    });
    scenario_with_transition(a)
}

/// Reference scenario 2: diagonal 4/5, −1/9 wherever `7 | ⌈i − 2.3j⌉`.
pub fn build_scenario_2() -> SystemModel {
    let n = SCENARIO_SENSORS;
    let a = DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r as i64 + 1, c as i64 + 1);
        if i == j {
            0.8
        } else if ceil_tenths(10 * i - 23 * j) % 7 == 0 {
            -1.0 / 9.0
        } else {
            0.0
        }
    });
    scenario_with_transition(a)
}

// ⌈num / 10⌉ in exact integer arithmetic; 2.3·j is not representable in f64.
fn ceil_tenths(num: i64) -> i64 {
    num.div_euclid(10) + i64::from(num.rem_euclid(10) != 0)
}

fn scenario_with_transition(a: DMatrix<f64>) -> SystemModel {
    let n = a.nrows();
    let sigma_v = DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r as i64 + 1, c as i64 + 1);
        if i == j {
            (11 + i % 10) as f64 / 5.0
        } else if (i - j) % 6 == 0 {
            1.0
        } else {
            0.0
        }
    });
    let eps = DVector::from_fn(n, |r, _| {
        let k = r as i64; // n - 1
        0.02 * ((k + 9) / 10) as f64
    });
    SystemModel::new(a, sigma_v, DMatrix::identity(n, n), eps)
        .expect("reference scenario has consistent shapes")
}

/// Result of [`validate_model`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_sensors: usize,
    pub process_noise_symmetric: bool,
    pub meas_noise_symmetric: bool,
    pub process_noise_positive_definite: bool,
    pub meas_noise_psd_positive_diagonal: bool,
    pub spectral_radius: f64,
    pub stable: bool,
    pub erasure_in_range: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.process_noise_symmetric
            && self.meas_noise_symmetric
            && self.process_noise_positive_definite
            && self.meas_noise_psd_positive_diagonal
            && self.stable
            && self.erasure_in_range
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "sensors:                       {}", self.n_sensors)?;
        writeln!(
            f,
            "spectral radius of A:          {:.9} [{}]",
            self.spectral_radius,
            mark(self.stable)
        )?;
        writeln!(f, "process noise symmetric:       {}", mark(self.process_noise_symmetric))?;
        writeln!(
            f,
            "process noise pos. definite:   {}",
            mark(self.process_noise_positive_definite)
        )?;
        writeln!(f, "meas. noise symmetric:         {}", mark(self.meas_noise_symmetric))?;
        writeln!(
            f,
            "meas. noise PSD, diag > 0:     {}",
            mark(self.meas_noise_psd_positive_diagonal)
        )?;
        write!(f, "erasure probs in [0, 1]:       {}", mark(self.erasure_in_range))
    }
}

/// Run every numerical check on a model. Never fails; inspect the report.
pub fn validate_model(model: &SystemModel) -> ValidationReport {
    let sv = model.process_noise_cov();
    let sw = model.meas_noise_cov();
    let spectral_radius = linalg::spectral_radius(model.transition());
    let sw_ok = linalg::is_symmetric(sw)
        && sw.diagonal().iter().all(|&d| d > 0.0)
        && linalg::psd_sqrt(sw).is_some();
    ValidationReport {
        n_sensors: model.n_sensors(),
        process_noise_symmetric: linalg::is_symmetric(sv),
        meas_noise_symmetric: linalg::is_symmetric(sw),
        process_noise_positive_definite: linalg::cholesky_strict(sv).is_some(),
        meas_noise_psd_positive_diagonal: sw_ok,
        spectral_radius,
        stable: spectral_radius < 1.0,
        erasure_in_range: model
            .erasure_probs()
            .iter()
            .all(|&e| (0.0..=1.0).contains(&e)),
    }
}

/// The true process state at slot `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub state: DVector<f64>,
    pub time: u64,
}

impl GroundTruth {
    /// `x(0) = 0`.
    pub fn zero(n: usize) -> Self {
        GroundTruth {
            state: DVector::zeros(n),
            time: 0,
        }
    }
}

/// Advance the process one slot with a fresh noise draw.
pub fn step_process(
    truth: &GroundTruth,
    model: &SystemModel,
    rng: &mut RandomStream,
) -> Result<GroundTruth> {
    let v = linalg::colored_normal(model.process_noise_factor()?, rng);
    step_process_with_noise(truth, model, &v)
}

/// Advance the process one slot with a given process-noise vector.
pub fn step_process_with_noise(
    truth: &GroundTruth,
    model: &SystemModel,
    noise: &DVector<f64>,
) -> Result<GroundTruth> {
    let n = model.n_sensors();
    if truth.state.len() != n {
        return Err(Error::DimensionMismatch {
            what: "ground truth state",
            expected: n,
            got: truth.state.len(),
        });
    }
    if noise.len() != n {
        return Err(Error::DimensionMismatch {
            what: "process noise",
            expected: n,
            got: noise.len(),
        });
    }
    let state = model.transition() * &truth.state + noise;
    if !linalg::all_finite(&state) {
        return Err(Error::NonFinite {
            what: format!("ground truth at t={}", truth.time + 1),
        });
    }
    Ok(GroundTruth {
        state,
        time: truth.time + 1,
    })
}

/// Noisy reading `y_n = x_n + w_n` of one sensor, `w_n ~ N(0, Σ_w(n,n))`.
pub fn observe(
    truth: &GroundTruth,
    model: &SystemModel,
    sensor: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    let id = model.sensor(sensor)?;
    let sd = model.meas_noise_var(id).max(0.0).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    Ok(truth.state[id.zero_based()] + sd * z)
}

/// Slots since the last successful update from each sensor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgeVector {
    ages: Vec<u64>,
}

impl AgeVector {
    pub fn zeros(n: usize) -> Self {
        AgeVector { ages: vec![0; n] }
    }

    pub fn from_ages(ages: Vec<u64>) -> Self {
        AgeVector { ages }
    }

    pub fn ages(&self) -> &[u64] {
        &self.ages
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    pub fn age(&self, sensor: SensorId) -> u64 {
        self.ages[sensor.zero_based()]
    }

    /// End-of-slot bookkeeping: every age increments, the polled sensor is
    /// reset to zero if its update arrived.
    pub fn record(&mut self, polled: SensorId, success: bool) {
        for a in &mut self.ages {
            *a += 1;
        }
        if success {
            self.ages[polled.zero_based()] = 0;
        }
    }
}

/// Result of one uplink attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelOutcome {
    Erased,
    Received(f64),
}

impl ChannelOutcome {
    pub fn success(&self) -> bool {
        matches!(self, ChannelOutcome::Received(_))
    }

    pub fn observation(&self) -> Option<f64> {
        match *self {
            ChannelOutcome::Received(y) => Some(y),
            ChannelOutcome::Erased => None,
        }
    }
}

/// Bernoulli erasure: the update survives iff `uniform >= ε_n`.
pub fn channel_succeeds(model: &SystemModel, sensor: SensorId, uniform: f64) -> bool {
    uniform >= model.erasure_prob(sensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn tiny(a: &[f64], sv: &[f64], sw: &[f64]) -> SystemModel {
        let n = (a.len() as f64).sqrt() as usize;
        SystemModel::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, n, sv),
            DMatrix::from_row_slice(n, n, sw),
            DVector::zeros(n),
        )
        .unwrap()
    }

    #[test]
    fn scenario_1_reference_entries() {
        let m = build_scenario_1();
        let a = m.transition();
        assert_eq!(a[(0, 0)], 0.75);
        assert_eq!(a[(8, 0)], -0.125);
        assert_eq!(m.process_noise_cov()[(0, 0)], 2.4);
        assert_eq!(m.process_noise_cov()[(6, 0)], 1.0);
        let id = |i| m.sensor(i).unwrap();
        assert_eq!(m.erasure_prob(id(1)), 0.0);
        assert_eq!(m.erasure_prob(id(11)), 0.02);
        assert_eq!(m.erasure_prob(id(20)), 0.04);
        assert_eq!(m.meas_noise_cov(), &DMatrix::identity(20, 20));
    }

    #[test]
    fn scenario_2_shares_everything_but_dynamics() {
        let (m1, m2) = (build_scenario_1(), build_scenario_2());
        assert_eq!(m2.transition()[(0, 0)], 0.8);
        assert_eq!(m1.process_noise_cov(), m2.process_noise_cov());
        assert_eq!(m1.meas_noise_cov(), m2.meas_noise_cov());
        assert_eq!(m1.erasure_probs(), m2.erasure_probs());
    }

    #[test]
    fn ceil_tenths_matches_real_ceiling() {
        for num in -300..300 {
            assert_eq!(ceil_tenths(num), (num as f64 / 10.0).ceil() as i64, "{num}");
        }
    }

    #[test]
    fn reference_scenarios_validate() {
        for m in [build_scenario_1(), build_scenario_2()] {
            let r = validate_model(&m);
            assert!(r.passed(), "{r}");
            assert!(r.spectral_radius < 1.0);
        }
    }

    #[test]
    fn zero_process_noise_fails_pd() {
        let m = tiny(&[1.0], &[0.0], &[1.0]);
        let r = validate_model(&m);
        assert!(!r.process_noise_positive_definite);
        assert!(!r.passed());
    }

    #[test]
    fn out_of_range_erasure_fails() {
        let m = build_scenario_1();
        let mut eps = m.erasure_probs().clone();
        eps[0] = 1.5;
        let m = m.with_erasure_probs(eps).unwrap();
        let r = validate_model(&m);
        assert!(!r.erasure_in_range);
        assert!(!r.passed());
    }

    #[test]
    fn shape_errors_are_reported() {
        let err = SystemModel::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(3, 3),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn identity_dynamics_without_noise_is_fixed() {
        let m = tiny(&[1.0, 0.0, 0.0, 1.0], &[0.0; 4], &[1.0, 0.0, 0.0, 1.0]);
        let truth = GroundTruth {
            state: DVector::from_vec(vec![1.0, 2.0]),
            time: 3,
        };
        let next = step_process(&truth, &m, &mut rng::stream(1)).unwrap();
        assert_eq!(next.state, truth.state);
        assert_eq!(next.time, 4);
    }

    #[test]
    fn indefinite_process_noise_cannot_be_sampled() {
        let m = tiny(&[1.0, 0.0, 0.0, 1.0], &[1.0, 2.0, 2.0, 1.0], &[1.0, 0.0, 0.0, 1.0]);
        let err = step_process(&GroundTruth::zero(2), &m, &mut rng::stream(1)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn noiseless_observation_reads_the_state() {
        let m = tiny(&[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0], &[0.0; 4]);
        let truth = GroundTruth {
            state: DVector::from_vec(vec![3.0, -1.0]),
            time: 0,
        };
        let y = observe(&truth, &m, 2, &mut rng::stream(1)).unwrap();
        assert_eq!(y, -1.0);
    }

    #[test]
    fn observation_index_is_bounds_checked() {
        let m = build_scenario_1();
        let truth = GroundTruth::zero(20);
        let mut r = rng::stream(1);
        assert!(observe(&truth, &m, 0, &mut r).is_err());
        assert!(observe(&truth, &m, 21, &mut r).is_err());
        assert!(observe(&truth, &m, 20, &mut r).is_ok());
    }

    #[test]
    fn ages_reset_only_on_success() {
        let mut ages = AgeVector::zeros(3);
        let s2 = SensorId::new(2, 3).unwrap();
        ages.record(s2, false);
        assert_eq!(ages.ages(), &[1, 1, 1]);
        ages.record(s2, true);
        assert_eq!(ages.ages(), &[2, 0, 2]);
    }

    #[test]
    fn channel_outcome_carries_observation_iff_success() {
        assert_eq!(ChannelOutcome::Received(1.5).observation(), Some(1.5));
        assert!(ChannelOutcome::Received(1.5).success());
        assert_eq!(ChannelOutcome::Erased.observation(), None);
        assert!(!ChannelOutcome::Erased.success());
    }
}
