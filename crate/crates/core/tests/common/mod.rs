//! Independent oracles shared by the integration tests. Nothing here calls
//! into the filter, the closed-form errors or the crate's linear algebra.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use voi_sched::{BeliefState, ChannelOutcome, SensorId, SystemModel};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut TestRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_matrix(n: usize, rng: &mut TestRng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| normal(rng))
}

/// `BBᵀ / n + floor·I` for a Gaussian `B`.
pub fn random_spd(n: usize, floor: f64, rng: &mut TestRng) -> DMatrix<f64> {
    let b = random_matrix(n, rng);
    &b * b.transpose() / n as f64 + DMatrix::identity(n, n) * floor
}

/// Random model with spectral norm of `A` below `rho`.
pub fn random_model(n: usize, rho: f64, rng: &mut TestRng) -> SystemModel {
    let a = random_matrix(n, rng);
    let norm = a.clone().svd(false, false).singular_values.max();
    let a = a * (rho / norm);
    let sv = random_spd(n, 0.2, rng);
    let sw = random_spd(n, 0.2, rng);
    let eps = DVector::from_fn(n, |_, _| rng.random_range(0.0..0.5));
    SystemModel::new(a, sv, sw, eps).unwrap()
}

pub fn random_belief(n: usize, rng: &mut TestRng) -> BeliefState {
    let mean = DVector::from_fn(n, |_, _| 2.0 * normal(rng));
    let cov = random_spd(n, 0.05, rng) * rng.random_range(0.3..3.0);
    BeliefState::with_moments(mean, cov)
}

/// Distribution of `x(T)` given the received readings, by writing the whole
/// trajectory and the readings as one linear map of independent standard
/// normals and conditioning the joint Gaussian directly.
///
/// `x(0) ~ N(0, I)`, `x(t) = A x(t−1) + v(t)`, and slot `t` carries
/// `y = x_{a(t)}(t) + w` when received.
pub fn condition_joint(
    model: &SystemModel,
    actions: &[SensorId],
    outcomes: &[ChannelOutcome],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = model.n_sensors();
    let steps = actions.len();
    let received: Vec<(usize, f64)> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(t, o)| o.observation().map(|y| (t, y)))
        .collect();
    // Noise layout: x(0) block, one v block per slot, one scalar w per reading.
    let dim = n * (steps + 1) + received.len();
    let lv = model.process_noise_cov().clone().cholesky().unwrap().l();
    let a = model.transition();

    // Rows of the map for x(t), advanced one slot at a time.
    let mut x_map = DMatrix::<f64>::zeros(n, dim);
    x_map.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
    let mut y_rows: Vec<DVector<f64>> = Vec::new();
    let mut y_vals = Vec::new();
    let mut next_reading = received.iter().peekable();
    for t in 0..steps {
        let mut next = a * &x_map;
        let off = n * (t + 1);
        let mut block = next.view_mut((0, off), (n, n));
        block += &lv;
        x_map = next;
        if let Some(&&(rt, y)) = next_reading.peek() {
            if rt == t {
                next_reading.next();
                let s = actions[t].zero_based();
                let mut row = x_map.row(s).transpose();
                let w_col = n * (steps + 1) + y_rows.len();
                row[w_col] = model.meas_noise_cov()[(s, s)].sqrt();
                y_rows.push(row);
                y_vals.push(y);
            }
        }
    }
    if y_rows.is_empty() {
        return (DVector::zeros(n), &x_map * x_map.transpose());
    }
    let g_y = DMatrix::from_fn(y_rows.len(), dim, |i, j| y_rows[i][j]);
    let c_xx = &x_map * x_map.transpose();
    let c_xy = &x_map * g_y.transpose();
    let c_yy = &g_y * g_y.transpose();
    let y = DVector::from_vec(y_vals);
    let lu = c_yy.lu();
    let mean = &c_xy * lu.solve(&y).unwrap();
    let cov = c_xx - &c_xy * lu.solve(&c_xy.transpose()).unwrap();
    (mean, cov)
}

/// Solution of `P = A P Aᵀ + Q` from `(I − A⊗A) vec P = vec Q`.
pub fn lyapunov_fixed_point(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let kron = a.kronecker(a);
    let lhs = DMatrix::identity(n * n, n * n) - kron;
    let rhs = DVector::from_column_slice(q.as_slice());
    let p = lhs.lu().solve(&rhs).unwrap();
    DMatrix::from_column_slice(n, n, p.as_slice())
}

/// Spectral radius from Gelfand's formula `‖A^k‖^{1/k}`, Frobenius norm,
/// evaluated at `k = 2^doublings`.
pub fn gelfand_radius(a: &DMatrix<f64>, doublings: u32) -> f64 {
    let mut p = a.clone();
    let mut log_scale = 0.0;
    for _ in 0..doublings {
        p = &p * &p;
        log_scale *= 2.0;
        let s = p.norm();
        p /= s;
        log_scale += s.ln();
    }
    let k = 2f64.powi(doublings as i32);
    ((log_scale + p.norm().ln()) / k).exp()
}

/// Running mean and standard error.
#[derive(Debug, Default, Clone, Copy)]
pub struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_error(&self) -> f64 {
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Draws from `N(mean, cov)` via nalgebra's Cholesky.
pub struct GaussianSampler {
    mean: DVector<f64>,
    l: DMatrix<f64>,
    z: DVector<f64>,
    x: DVector<f64>,
}

impl GaussianSampler {
    pub fn new(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Self {
        let n = mean.len();
        GaussianSampler {
            mean: mean.clone(),
            l: cov.clone().cholesky().expect("positive definite").l(),
            z: DVector::zeros(n),
            x: DVector::zeros(n),
        }
    }

    pub fn draw(&mut self, rng: &mut TestRng) -> &DVector<f64> {
        for z in self.z.iter_mut() {
            *z = normal(rng);
        }
        self.x.copy_from(&self.mean);
        self.x.gemv(1.0, &self.l, &self.z, 1.0);
        &self.x
    }
}

pub fn sample_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn sample_var(x: &[f64]) -> f64 {
    let m = sample_mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn count_in(x: &[f64], lower: f64, upper: f64) -> f64 {
    x.iter().filter(|&&v| v >= lower && v <= upper).count() as f64
}
