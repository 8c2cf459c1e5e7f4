use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use voi_sched::io::{self, ConfigFile, Overrides};
use voi_sched::{model, simulator, Error};

#[derive(Parser)]
#[command(name = "voi-sched", version, about = "Value-of-information sensor scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the scenario's model and print the validation report.
    Validate(Common),
    /// Run the experiment and write steps.csv, selection.csv, cdf.csv, summary.json.
    Run(Common),
    /// Run the experiment and print mean errors per policy and statistic.
    Compare(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Paper1,
    Paper2,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (run only).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Reference scenario; replaces the config's scenario.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

impl Common {
    fn load(&self) -> Result<ConfigFile, Error> {
        let preset = self.preset.map(|p| match p {
            Preset::Paper1 => "paper1".to_string(),
            Preset::Paper2 => "paper2".to_string(),
        });
        let mut cfg = match (&self.config, &preset) {
            (Some(path), _) => ConfigFile::load(path)?,
            (None, Some(p)) => ConfigFile::preset_defaults(p),
            (None, None) => return Err(Error::Config("either --config or --preset is required".into())),
        };
        cfg.apply(&Overrides {
            preset,
            seed: self.seed,
            episodes: self.episodes,
            steps: self.steps,
            mc_samples: self.mc_samples,
            out: self.out.clone(),
        });
        Ok(cfg)
    }
}

fn validate(args: &Common) -> Result<bool, Error> {
    let cfg = args.load()?;
    let report = model::validate_model(&cfg.model()?);
    println!("scenario: {}", cfg.scenario_name());
    println!("{report}");
    Ok(report.passed())
}

fn run(args: &Common) -> Result<(), Error> {
    let cfg = args.load()?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("no output directory (use --out or `out` in the config)".into()))?;
    let exp = cfg.to_experiment()?;
    let results = simulator::run_experiment(&exp)?;
    io::write_outputs(&exp, &results, &out)?;
    println!("wrote results to {}", out.display());
    Ok(())
}

fn compare(args: &Common) -> Result<(), Error> {
    let cfg = args.load()?;
    let exp = cfg.to_experiment()?;
    if exp.policies.len() < 2 {
        return Err(Error::Config("compare needs at least two policies".into()));
    }
    let results = simulator::run_experiment(&exp)?;
    print!("{}", io::compare_table(&results));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Validate(a) => validate(a).map(|ok| if ok { 0 } else { 1 }),
        Command::Run(a) => run(a).map(|_| 0),
        Command::Compare(a) => compare(a).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
