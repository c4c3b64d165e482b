use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};

use hetnet::association::Trace;
use hetnet::harness::{
    self, csv_row, link_seed, parse_csv, solve_strategies, trial_seed, validate_instances,
    ExperimentConfig, CSV_HEADER,
};
use hetnet::metrics::MetricsReport;
use hetnet::{build_link_table, generate_topology, Error, Result, Strategy, Topology};

#[derive(Parser)]
#[command(name = "hetnet", version, about = "Uplink user association experiments for two-tier cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a Monte-Carlo sweep and write CSV results.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run one trial and print per-strategy metrics.
    Trial {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        pick: TrialPick,
        /// Write the generated topology as TSV.
        #[arg(long)]
        topology_out: Option<PathBuf>,
        /// Replay a topology TSV instead of generating one.
        #[arg(long)]
        topology_in: Option<PathBuf>,
        /// Write the link table text dump.
        #[arg(long)]
        links_out: Option<PathBuf>,
    },
    /// Print the convergence trace of an iterative strategy for one trial.
    Trace {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        pick: TrialPick,
        #[arg(long, default_value = "AMWEE")]
        strategy: Strategy,
    },
    /// Run the invariant suite on random small instances, or schema-check a sweep CSV.
    Validate {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Check an existing sweep CSV instead.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct TrialPick {
    /// Sweep value of the trial (defaults to the first configured value).
    #[arg(long)]
    sweep_value: Option<usize>,
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

/// `--config FILE` plus one `--kebab-case` flag per experiment key. Flags
/// win over the file.
struct ConfigArgs {
    file: Option<PathBuf>,
    overrides: Vec<(&'static str, String)>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.file {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for (key, value) in &self.overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromArgMatches for ConfigArgs {
    fn from_arg_matches(m: &ArgMatches) -> std::result::Result<Self, clap::Error> {
        let overrides = ExperimentConfig::KEYS
            .iter()
            .filter_map(|&k| m.get_one::<String>(k).map(|v| (k, v.clone())))
            .collect();
        Ok(Self {
            file: m.get_one::<PathBuf>("config").cloned(),
            overrides,
        })
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> std::result::Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for ConfigArgs {
    fn augment_args(cmd: Command) -> Command {
        let cmd = cmd.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key = value experiment file"),
        );
        ExperimentConfig::KEYS.iter().fold(cmd, |cmd, &key| {
            cmd.arg(
                Arg::new(key)
                    .long(key.replace('_', "-"))
                    .value_name("VALUE")
                    .help_heading("Experiment overrides"),
            )
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print_reports<'a>(
    cfg: &ExperimentConfig,
    seed: u64,
    value: usize,
    trial: usize,
    reports: impl IntoIterator<Item = (&'a Strategy, &'a MetricsReport)>,
) {
    println!("{CSV_HEADER}");
    for (&s, r) in reports {
        println!("{}", csv_row(s, seed, cfg.sweep_variable, value, trial, r));
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Cmd::Sweep { config } => {
            let cfg = config.resolve()?;
            let out = harness::run_sweep(&cfg)?;
            println!("wrote {} rows to {}", out.rows, out.csv_path.display());
            println!("summary: {}", out.summary_path.display());
            for p in &out.trace_paths {
                println!("trace: {}", p.display());
            }
            println!("\n{:>6} {:>7} {:>10} {:>10} {:>8} {:>9}", cfg.sweep_variable.name().split('_').next().unwrap_or(""), "strat", "avg_rate", "whole_ee", "jain", "supported");
            for ((value, strategy), stats) in &out.summary {
                println!(
                    "{value:>6} {:>7} {:>10.4} {:>10.6} {:>8.4} {:>9.4}",
                    strategy.name(),
                    stats[0].0,
                    stats[3].0,
                    stats[4].0,
                    stats[5].0
                );
            }
            Ok(true)
        }
        Cmd::Trial {
            config,
            pick,
            topology_out,
            topology_in,
            links_out,
        } => {
            let cfg = config.resolve()?;
            let value = pick.sweep_value.unwrap_or(cfg.sweep_values[0]);
            let seed = trial_seed(cfg.base_seed, value, pick.trial);
            let topology = match &topology_in {
                Some(path) => Topology::from_text(
                    &fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
                )?,
                None => generate_topology(&cfg.deployment_for(value, seed))?,
            };
            let links = build_link_table(&topology, &cfg.radio, link_seed(seed))?;
            if let Some(path) = &topology_out {
                write(path, &topology.to_text())?;
            }
            if let Some(path) = &links_out {
                write(path, &links.to_text())?;
            }
            let (_, reports) = solve_strategies(&cfg, &links)?;
            print_reports(&cfg, seed, value, pick.trial, &reports);
            Ok(true)
        }
        Cmd::Trace {
            config,
            pick,
            strategy,
        } => {
            let mut cfg = config.resolve()?;
            cfg.strategies = vec![strategy];
            let value = pick.sweep_value.unwrap_or(cfg.sweep_values[0]);
            let outcome = harness::run_trial_detailed(&cfg, value, pick.trial)?;
            match &outcome.solutions[&strategy].trace {
                Some(Trace::Dinkelbach(t)) => print!("{}", t.to_columns()),
                Some(Trace::Dual(t)) => print!("{}", t.to_columns()),
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "{strategy} is a one-shot rule and has no trace"
                    )))
                }
            }
            Ok(true)
        }
        Cmd::Validate {
            instances,
            seed,
            csv,
            config,
        } => {
            let cfg = config.resolve()?;
            if let Some(path) = csv {
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                if text.lines().any(|l| l.starts_with("# PARTIAL OUTPUT")) {
                    println!("FAIL {} is marked partial", path.display());
                    return Ok(false);
                }
                let records = parse_csv(&text)?;
                let mut bad = 0;
                for (i, rec) in records.iter().enumerate() {
                    if let Err(msg) = rec.report.check(cfg.num_bs_for(rec.sweep_value)) {
                        println!("row {}: {msg}", i + 1);
                        bad += 1;
                    }
                }
                println!("{} rows checked, {bad} invalid", records.len());
                return Ok(bad == 0);
            }
            let report = validate_instances(instances, seed, &cfg.solver)?;
            for f in &report.failures {
                println!("FAIL {f}");
            }
            println!(
                "{} instances, {} checks, {} failures",
                report.instances,
                report.checks,
                report.failures.len()
            );
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
