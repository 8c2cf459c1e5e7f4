//! Per-sensor expected errors from the Monte Carlo scheduler against the
//! exact closed form, for the nested and pooled estimators.
//!
//! ```text
//! cargo run --release --example monte_carlo_scheduler -- [samples]
//! ```

use voi_sched::model::build_scenario_1;
use voi_sched::schedulers::{argmin, evaluate_closed_form, evaluate_monte_carlo};
use voi_sched::{kalman, rng, BeliefState, ChannelOutcome, ErrorObjective, McEstimator, SummaryStatistic};

fn main() -> voi_sched::Result<()> {
    let samples: usize = std::env::args().nth(1).map_or(2000, |a| a.parse().expect("integer"));
    let model = build_scenario_1();

    // Run a few erased slots so the belief is away from ψ = I.
    let mut belief = BeliefState::initial(20);
    for _ in 0..3 {
        belief = kalman::filter_step(&belief, &model, model.sensor(1)?, ChannelOutcome::Erased)?;
    }

    let exact = evaluate_closed_form(ErrorObjective::Avg, &belief, &model)?;
    let nested = evaluate_monte_carlo(
        &SummaryStatistic::Avg,
        samples,
        McEstimator::default(),
        &belief,
        &model,
        &mut rng::stream(1),
    )?;
    let pooled = evaluate_monte_carlo(&SummaryStatistic::Avg, samples, McEstimator::Pooled, &belief, &model, &mut rng::stream(1))?;

    println!("{:>6} {:>10} {:>18} {:>18}", "sensor", "exact", "nested (se)", "pooled (se)");
    for ((e, n), p) in exact.iter().zip(&nested).zip(&pooled) {
        println!(
            "{:>6} {:>10.5} {:>10.5} ({:.4}) {:>10.5} ({:.4})",
            e.sensor, e.expected_error, n.expected_error, n.std_error, p.expected_error, p.std_error
        );
    }
    println!(
        "argmin: exact {}, nested {}, pooled {}",
        argmin(&exact),
        argmin(&nested),
        argmin(&pooled)
    );
    Ok(())
}
