//! Summary statistics of the state, their MMSE estimates under a Gaussian
//! belief, and closed-form expected squared errors.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::kalman::BeliefState;
use crate::linalg;
use crate::rng::RandomStream;

/// Monte Carlo draws used for statistics without a closed-form estimate.
pub const DEFAULT_MC_SAMPLES: usize = 1000;

/// A user-supplied scalar function of the state.
#[derive(Clone)]
pub struct CustomStatistic {
    name: String,
    func: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl CustomStatistic {
    pub fn new(name: impl Into<String>, func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        CustomStatistic {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomStatistic")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomStatistic {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.func, &other.func)
    }
}

/// A scalar function `z: ℝᴺ → ℝ` of the state.
#[derive(Debug, Clone, PartialEq)]
pub enum SummaryStatistic {
    /// Sample mean.
    Avg,
    /// Unbiased sample variance (normalized by `N − 1`).
    Var,
    /// Largest component.
    Max,
    /// Number of components inside `[lower, upper]`, both bounds inclusive.
    Count { lower: f64, upper: f64 },
    Custom(CustomStatistic),
}

impl SummaryStatistic {
    pub fn count(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::InvalidArgument(format!(
                "count interval [{lower}, {upper}] is empty"
            )));
        }
        Ok(SummaryStatistic::Count { lower, upper })
    }

    /// Short identifier used in file headers and policy names.
    pub fn name(&self) -> &str {
        match self {
            SummaryStatistic::Avg => "avg",
            SummaryStatistic::Var => "var",
            SummaryStatistic::Max => "max",
            SummaryStatistic::Count { .. } => "cnt",
            SummaryStatistic::Custom(c) => c.name(),
        }
    }

    /// Unchecked evaluation; see [`eval_statistic`] for the checked form.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SummaryStatistic::Avg => x.iter().sum::<f64>() / x.len() as f64,
            SummaryStatistic::Var => {
                let n = x.len() as f64;
                let mean = x.iter().sum::<f64>() / n;
                x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            }
            SummaryStatistic::Max => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            SummaryStatistic::Count { lower, upper } => x
                .iter()
                .filter(|&&v| v - lower >= 0.0 && upper - v >= 0.0)
                .count() as f64,
            SummaryStatistic::Custom(c) => (c.func)(x),
        }
    }

    fn min_dim(&self) -> usize {
        match self {
            SummaryStatistic::Var => 2,
            _ => 1,
        }
    }
}

/// `z(x)`.
pub fn eval_statistic(z: &SummaryStatistic, x: &DVector<f64>) -> Result<f64> {
    if x.len() < z.min_dim() {
        return Err(Error::DimensionMismatch {
            what: "state for statistic",
            expected: z.min_dim(),
            got: x.len(),
        });
    }
    Ok(z.eval(x.as_slice()))
}

/// `M = I − J/N`, the projector that removes the sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CenteringMatrix {
    n: usize,
}

impl CenteringMatrix {
    pub fn new(n: usize) -> Self {
        CenteringMatrix { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
    }

    /// `M v` without forming `M`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mean = v.mean();
        v.map(|x| x - mean)
    }

    /// `M B`: subtract each column's mean.
    pub fn apply_left(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = b.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        out
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ẑ = E[z(x)]` with `x ~ N(x̂, ψ)`.
///
/// Avg, Var and Count are closed-form; Max and custom statistics average
/// `mc_samples` draws from the belief.
pub fn estimate_statistic(
    z: &SummaryStatistic,
    belief: &BeliefState,
    mc_samples: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    let n = belief.dim();
    if n < z.min_dim() {
        return Err(Error::DimensionMismatch {
            what: "belief for statistic",
            expected: z.min_dim(),
            got: n,
        });
    }
    let mean = &belief.mean;
    let cov = &belief.covariance;
    match z {
        SummaryStatistic::Avg => Ok(mean.mean()),
        SummaryStatistic::Var => {
            let m = CenteringMatrix::new(n);
            let centered = m.apply(mean);
            let tr_m_psi = m.apply_left(cov).trace();
            Ok((tr_m_psi + centered.norm_squared()) / (n as f64 - 1.0))
        }
        SummaryStatistic::Count { lower, upper } => Ok((0..n)
            .map(|i| marginal_interval_prob(mean[i], cov[(i, i)], *lower, *upper))
            .sum()),
        SummaryStatistic::Max | SummaryStatistic::Custom(_) => {
            if mc_samples == 0 {
                return Err(Error::InvalidArgument(format!(
                    "statistic '{}' needs at least one Monte Carlo sample",
                    z.name()
                )));
            }
            if n == 1 && matches!(z, SummaryStatistic::Max) {
                return Ok(mean[0]);
            }
            let factor = linalg::psd_sqrt(cov).ok_or(Error::NotPositiveDefinite {
                what: "belief covariance",
            })?;
            let mut acc = 0.0;
            for _ in 0..mc_samples {
                let x = mean + linalg::colored_normal(&factor, rng);
                acc += z.eval(x.as_slice());
            }
            Ok(acc / mc_samples as f64)
        }
    }
}

/// `P(lower ≤ x ≤ upper)` for `x ~ N(mean, var)`.
fn marginal_interval_prob(mean: f64, var: f64, lower: f64, upper: f64) -> f64 {
    if var <= 0.0 {
        return f64::from(mean >= lower && mean <= upper);
    }
    let sd = var.sqrt();
    (normal_cdf((upper - mean) / sd) - normal_cdf((lower - mean) / sd)).max(0.0)
}

/// Which algebraic form of the sample-variance error to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarErrorForm {
    /// `[2 tr(MψMψ) + 4 x̂ᵀMψMx̂] / (N−1)²`, the variance of a Gaussian
    /// quadratic form.
    #[default]
    Standard,
    /// `[2 tr(Mψ²) + 4 x̂ᵀMψx̂] / (N−1)²`. Agrees with `Standard` only when
    /// ψ commutes with M (e.g. ψ = cI); kept for comparison.
    Printed,
}

/// `E‖x − x̂‖² = tr(ψ)`.
pub fn expected_err_mse(belief: &BeliefState) -> f64 {
    mse_from_cov(&belief.covariance)
}

/// `E[(mean(x) − mean(x̂))²] = Σᵢⱼ ψᵢⱼ / N²`.
pub fn expected_err_avg(belief: &BeliefState) -> f64 {
    avg_from_cov(&belief.covariance)
}

/// Variance of the sample variance under the belief (standard form).
pub fn expected_err_var(belief: &BeliefState) -> f64 {
    var_from_moments(&belief.mean, &belief.covariance, VarErrorForm::Standard)
}

pub fn expected_err_var_with(belief: &BeliefState, form: VarErrorForm) -> f64 {
    var_from_moments(&belief.mean, &belief.covariance, form)
}

pub(crate) fn mse_from_cov(cov: &DMatrix<f64>) -> f64 {
    cov.trace()
}

pub(crate) fn avg_from_cov(cov: &DMatrix<f64>) -> f64 {
    let n = cov.nrows() as f64;
    cov.sum() / (n * n)
}

pub(crate) fn var_from_moments(mean: &DVector<f64>, cov: &DMatrix<f64>, form: VarErrorForm) -> f64 {
    let n = mean.len();
    let m = CenteringMatrix::new(n);
    let m_psi = m.apply_left(cov);
    let centered = m.apply(mean);
    let (trace_term, mean_term) = match form {
        VarErrorForm::Standard => {
            // tr(MψMψ) = Σᵢⱼ (Mψ)ᵢⱼ (Mψ)ⱼᵢ
            let tr = m_psi.component_mul(&m_psi.transpose()).sum();
            (tr, centered.dot(&(cov * &centered)))
        }
        VarErrorForm::Printed => {
            let tr = (&m_psi * cov).trace();
            (tr, centered.dot(&(cov * mean)))
        }
    };
    let d = (n as f64 - 1.0).powi(2);
    (2.0 * trace_term + 4.0 * mean_term) / d
}

/// `ν_z = (z(x) − ẑ)²`.
pub fn realized_error(z: &SummaryStatistic, x_true: &DVector<f64>, z_hat: f64) -> Result<f64> {
    Ok((eval_statistic(z, x_true)? - z_hat).powi(2))
}

/// A quantity whose realized squared error is logged each slot: either the
/// full state error `‖x − x̂‖²` or a summary statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackedMetric {
    StateMse,
    Statistic(SummaryStatistic),
}

impl TrackedMetric {
    pub fn name(&self) -> &str {
        match self {
            TrackedMetric::StateMse => "mse",
            TrackedMetric::Statistic(z) => z.name(),
        }
    }

    /// Realized squared error of the belief's estimate against the truth.
    pub fn realized_error(
        &self,
        x_true: &DVector<f64>,
        belief: &BeliefState,
        mc_samples: usize,
        rng: &mut RandomStream,
    ) -> Result<f64> {
        match self {
            TrackedMetric::StateMse => Ok((x_true - &belief.mean).norm_squared()),
            TrackedMetric::Statistic(z) => {
                let z_hat = estimate_statistic(z, belief, mc_samples, rng)?;
                realized_error(z, x_true, z_hat)
            }
        }
    }
}

impl From<SummaryStatistic> for TrackedMetric {
    fn from(z: SummaryStatistic) -> Self {
        TrackedMetric::Statistic(z)
    }
}
