//! Build the two reference scenarios and print their validation reports.
//!
//! ```text
//! cargo run --example validate_scenarios
//! ```

use voi_sched::model::{build_scenario_1, build_scenario_2, validate_model};
use voi_sched::SensorId;

fn main() {
    for (name, model) in [("paper1", build_scenario_1()), ("paper2", build_scenario_2())] {
        println!("== {name} ==");
        println!("{}", validate_model(&model));
        let a = model.transition();
        let off_diag: Vec<String> = (0..20)
            .flat_map(|i| (0..20).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && a[(i, j)] != 0.0)
            .map(|(i, j)| format!("({},{})", i + 1, j + 1))
            .collect();
        println!("nonzero off-diagonal entries of A: {}", off_diag.join(" "));
        let eps: Vec<String> = [1, 11, 20]
            .into_iter()
            .map(|n| format!("eps_{n}={}", model.erasure_prob(SensorId::new(n, 20).unwrap())))
            .collect();
        println!("{}\n", eps.join(" "));
    }
}
