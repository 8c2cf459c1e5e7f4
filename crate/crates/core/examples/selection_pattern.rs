//! Sensor selection frequencies of the standard policies on both reference
//! scenarios.
//!
//! ```text
//! cargo run --release --example selection_pattern -- [episodes] [steps]
//! ```

use voi_sched::model::{build_scenario_1, build_scenario_2};
use voi_sched::simulator::{run_experiment, ExperimentConfig};

fn main() -> voi_sched::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let episodes = args.next().unwrap_or(3);
    let steps = args.next().unwrap_or(200);

    for (name, model) in [("paper1", build_scenario_1()), ("paper2", build_scenario_2())] {
        let mut cfg = ExperimentConfig::desk_scale(name, model, 2024);
        cfg.episodes = episodes;
        cfg.steps_per_episode = steps;
        let results = run_experiment(&cfg)?;

        println!("== {name}: selection fraction per sensor ==");
        print!("{:<10}", "sensor");
        for n in 1..=results.n_sensors {
            print!("{n:>5}");
        }
        println!();
        for (p, policy) in results.policies.iter().enumerate() {
            let total = results.total_slots(p) as f64;
            print!("{policy:<10}");
            for &c in &results.selection[p] {
                let pct = 100.0 * c as f64 / total;
                if c == 0 {
                    print!("{:>5}", ".");
                } else {
                    print!("{pct:>5.0}");
                }
            }
            println!();
        }
        println!();
    }
    Ok(())
}
