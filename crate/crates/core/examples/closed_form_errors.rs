//! Closed-form expected errors of a belief next to their sampled values,
//! including both algebraic forms of the sample-variance error.
//!
//! ```text
//! cargo run --release --example closed_form_errors -- [draws]
//! ```

use nalgebra::{DMatrix, DVector};
use voi_sched::linalg::{colored_normal, psd_sqrt};
use voi_sched::statistics::{self, estimate_statistic};
use voi_sched::{rng, BeliefState, SummaryStatistic, VarErrorForm};

fn main() -> voi_sched::Result<()> {
    let draws: usize = std::env::args().nth(1).map_or(200_000, |a| a.parse().expect("integer"));
    let belief = BeliefState::with_moments(
        DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0]),
        DMatrix::from_row_slice(4, 4, &[
            2.0, 0.8, 0.1, 0.0, //
            0.8, 1.0, 0.3, 0.2, //
            0.1, 0.3, 1.5, -0.4, //
            0.0, 0.2, -0.4, 0.7,
        ]),
    );
    let mut r = rng::stream(3);
    let var_hat = estimate_statistic(&SummaryStatistic::Var, &belief, 1, &mut r)?;
    let avg_hat = belief.mean.mean();

    let factor = psd_sqrt(&belief.covariance).expect("covariance is PSD");
    let (mut mse, mut avg, mut var) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let x = &belief.mean + colored_normal(&factor, &mut r);
        mse += (&x - &belief.mean).norm_squared();
        avg += (x.mean() - avg_hat).powi(2);
        var += (SummaryStatistic::Var.eval(x.as_slice()) - var_hat).powi(2);
    }
    let k = draws as f64;
    println!("{:<22} {:>12} {:>12}", "", "closed form", "sampled");
    println!("{:<22} {:>12.5} {:>12.5}", "mse error", statistics::expected_err_mse(&belief), mse / k);
    println!("{:<22} {:>12.5} {:>12.5}", "avg error", statistics::expected_err_avg(&belief), avg / k);
    println!(
        "{:<22} {:>12.5} {:>12.5}",
        "var error (standard)",
        statistics::expected_err_var_with(&belief, VarErrorForm::Standard),
        var / k
    );
    println!(
        "{:<22} {:>12.5}",
        "var error (printed)",
        statistics::expected_err_var_with(&belief, VarErrorForm::Printed)
    );
    Ok(())
}
