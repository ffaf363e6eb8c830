//! Command-line front end: generate scenarios, run one algorithm on one
//! scenario, sweep experiments to CSV, and compare the pairwise greedy
//! against its exact optimum.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rsnc::baselines::{run_algorithm, Algorithm, BaselineConfig};
use rsnc::harness::{
    generate_scenario, run_experiment, run_pairwise_experiment, GeneratorConfig,
};
use rsnc::model::{schedule_doc, validate_scenario, Scenario};
use rsnc::pairwise::DEFAULT_EXACT_CLIQUE_LIMIT;

#[derive(Parser)]
#[command(
    name = "rsnc",
    version,
    about = "Deadline-constrained wireless broadcast with joint rate selection and XOR coding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate scenario JSON files from a config
    Generate {
        /// Generator config JSON file
        #[arg(long)]
        config: PathBuf,
        /// Output directory for scenario files
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on a scenario and print the schedule as JSON
    Run {
        /// Scenario JSON file
        #[arg(long)]
        scenario: PathBuf,
        /// One of: rsnc, dsf, sin1, rlnc, index
        #[arg(long)]
        algorithm: Algorithm,
        /// RNG seed (rlnc)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coefficient field size (rlnc), a power of two in 2..=256
        #[arg(long, default_value_t = 256)]
        field_size: u16,
        /// Send SIN-1 packets at the global minimum rate
        #[arg(long, default_value_t = false)]
        sin1_global_min: bool,
    },
    /// Sweep experiments over generated scenarios, writing CSV
    Experiment {
        /// Generator config JSON file (may contain a sweep section)
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated algorithm tags
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<Algorithm>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Coefficient field size (rlnc)
        #[arg(long, default_value_t = 256)]
        field_size: u16,
        /// Send SIN-1 packets at the global minimum rate
        #[arg(long, default_value_t = false)]
        sin1_global_min: bool,
    },
    /// Compare the pairwise greedy against the exact optimum, writing CSV
    Pairwise {
        /// Generator config JSON file
        #[arg(long)]
        config: PathBuf,
        /// Common reception deadline (also the cost budget), seconds
        #[arg(long)]
        deadline: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Largest clique count the exact search accepts
        #[arg(long, default_value_t = DEFAULT_EXACT_CLIQUE_LIMIT)]
        max_cliques: usize,
    },
}

fn load_config(path: &PathBuf) -> Result<GeneratorConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: GeneratorConfig =
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_scenario(path: &PathBuf) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario {}", path.display()))?;
    let scenario = Scenario::from_json(&text)
        .with_context(|| format!("invalid scenario {}", path.display()))?;
    let report = validate_scenario(&scenario);
    if !report.is_ok() {
        bail!(
            "scenario {} violates invariants:\n  {}",
            path.display(),
            report.violations.join("\n  ")
        );
    }
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(scenario)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { config, out } => {
            let cfg = load_config(&config)?;
            fs::create_dir_all(&out)
                .with_context(|| format!("cannot create {}", out.display()))?;
            for sample in 0..cfg.samples {
                let s = generate_scenario(&cfg, sample);
                let path = out.join(format!("scenario_{sample:03}.json"));
                fs::write(&path, s.to_json())
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            eprintln!("wrote {} scenarios to {}", cfg.samples, out.display());
        }
        Command::Run {
            scenario,
            algorithm,
            seed,
            field_size,
            sin1_global_min,
        } => {
            let s = load_scenario(&scenario)?;
            let cfg = BaselineConfig {
                seed,
                field_size,
                sin1_global_min_rate: sin1_global_min,
            };
            let sched = run_algorithm(&s, algorithm, &cfg)?;
            let doc = schedule_doc(&s, &sched);
            let text = serde_json::to_string_pretty(&doc)?;
            // tolerate downstream pipes closing early (e.g. `| head`)
            if let Err(err) = writeln!(io::stdout().lock(), "{text}") {
                if err.kind() != io::ErrorKind::BrokenPipe {
                    return Err(err.into());
                }
            }
        }
        Command::Experiment {
            config,
            algorithms,
            out,
            field_size,
            sin1_global_min,
        } => {
            if algorithms.is_empty() {
                bail!("no algorithms given");
            }
            let cfg = load_config(&config)?;
            let baseline = BaselineConfig {
                seed: 0,
                field_size,
                sin1_global_min_rate: sin1_global_min,
            };
            let result = run_experiment(&cfg, &algorithms, &baseline)?;
            fs::write(&out, result.to_csv())
                .with_context(|| format!("cannot write {}", out.display()))?;
            eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
        }
        Command::Pairwise {
            config,
            deadline,
            out,
            max_cliques,
        } => {
            let cfg = load_config(&config)?;
            let result = run_pairwise_experiment(&cfg, deadline, max_cliques)?;
            fs::write(&out, result.to_csv())
                .with_context(|| format!("cannot write {}", out.display()))?;
            eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
        }
    }
    Ok(())
}
