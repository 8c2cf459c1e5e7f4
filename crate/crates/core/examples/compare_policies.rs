//! Mean realized error per policy and statistic on scenario 1, with a
//! paired comparison of MseOpt against MAF.
//!
//! ```text
//! cargo run --release --example compare_policies -- [episodes] [steps]
//! ```

use voi_sched::io::compare_table;
use voi_sched::model::build_scenario_1;
use voi_sched::simulator::{run_experiment, ExperimentConfig};
use voi_sched::SchedulerPolicy;

fn main() -> voi_sched::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let mut cfg = ExperimentConfig::desk_scale("paper1", build_scenario_1(), 11);
    cfg.episodes = args.next().unwrap_or(5);
    cfg.steps_per_episode = args.next().unwrap_or(200);
    cfg.policies = vec![
        SchedulerPolicy::MseOpt,
        SchedulerPolicy::AvgOpt,
        SchedulerPolicy::VarOpt,
        SchedulerPolicy::Maf,
        SchedulerPolicy::RoundRobin,
    ];
    let res = run_experiment(&cfg)?;
    print!("{}", compare_table(&res));

    // Common random numbers make per-episode differences far less noisy
    // than the raw means.
    let m = res.metric_index("mse").expect("tracked");
    let a = res.episode_means(res.policy_index("mse_opt").expect("listed"), m);
    let b = res.episode_means(res.policy_index("maf").expect("listed"), m);
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let k = d.len() as f64;
    let mean = d.iter().sum::<f64>() / k;
    let se = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
    println!("\nmse_opt - maf on nu_mse: {mean:.4} (paired se {se:.4})");
    Ok(())
}
