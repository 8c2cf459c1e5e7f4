//! Write, parse and resolve a TOML configuration with a custom scenario.
//!
//! ```text
//! cargo run --example config_file
//! ```

use voi_sched::io::ConfigFile;
use voi_sched::model::validate_model;

const CONFIG: &str = r#"
episodes = 4
steps = 50
mc_samples = 100
seed = 9
policies = ["mse_opt", "avg_opt", "mc_cnt", "maf"]
statistics = ["mse", "avg", "cnt"]
count_interval = [-1.0, 1.0]
mc_estimator = "nested"
mc_inner = 4

[scenario]
transition = [0.9, 0.1, 0.0,
              0.0, 0.8, 0.1,
              0.1, 0.0, 0.7]
process_noise = [1.0, 0.5, 0.0,
                 0.5, 1.0, 0.5,
                 0.0, 0.5, 1.0]
meas_noise = [1.0, 0.0, 0.0,
              0.0, 1.0, 0.0,
              0.0, 0.0, 1.0]
erasure = [0.0, 0.1, 0.5]
"#;

fn main() -> voi_sched::Result<()> {
    let file = ConfigFile::parse(CONFIG)?;
    println!("{}", validate_model(&file.model()?));
    let cfg = file.to_experiment()?;
    let names: Vec<String> = cfg.policies.iter().map(|p| p.name()).collect();
    let stats: Vec<&str> = cfg.tracked.iter().map(|m| m.name()).collect();
    println!("policies {names:?}, statistics {stats:?}");

    // Serializing and parsing again gives the same configuration.
    let again = ConfigFile::parse(&file.to_toml())?;
    println!("round trip lossless: {}", again == file);

    match ConfigFile::parse(&("typo_key = 1\n".to_string() + CONFIG)) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("unknown key rejected: {e}"),
    }
    Ok(())
}
