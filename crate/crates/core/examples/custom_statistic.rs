//! Schedule for a user-defined statistic: the spread `max − min` of the
//! state, on scenario 1.
//!
//! ```text
//! cargo run --release --example custom_statistic -- [steps]
//! ```

use voi_sched::model::build_scenario_1;
use voi_sched::simulator::run_episode;
use voi_sched::{CustomStatistic, SchedulerPolicy, SummaryStatistic, TrackedMetric};

fn main() -> voi_sched::Result<()> {
    let steps: usize = std::env::args().nth(1).map_or(100, |a| a.parse().expect("integer"));
    let spread = SummaryStatistic::Custom(CustomStatistic::new("spread", |x| {
        let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }));
    let model = build_scenario_1();
    let tracked = [TrackedMetric::Statistic(spread.clone()), TrackedMetric::StateMse];

    for policy in [SchedulerPolicy::monte_carlo(spread, 200), SchedulerPolicy::Maf] {
        let log = run_episode(&model, &policy, &tracked, steps, 42, 200)?;
        let k = log.records.len() as f64;
        let mean = |m: usize| log.records.iter().map(|r| r.errors[m]).sum::<f64>() / k;
        let mut counts = [0u32; 20];
        for r in &log.records {
            counts[r.action.zero_based()] += 1;
        }
        println!(
            "{:<12} mean nu_spread {:>8.3}  mean nu_mse {:>8.3}  selections {:?}",
            log.policy,
            mean(0),
            mean(1),
            counts
        );
    }
    Ok(())
}
