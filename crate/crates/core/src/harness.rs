//! Monte-Carlo experiment driver.
//!
//! A sweep walks one deployment axis (users or PBSs per macrocell). Every
//! `(sweep value, trial)` pair gets its own seed, one topology and one link
//! table, and every enabled strategy runs on that same table. Rows are
//! written in `(sweep value, trial, strategy)` order whatever the worker
//! count.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::association::{
    self, brute_force, evaluate_whole_ee, f_value, solve, solve_eeauf, Objective, Solution,
    SolverConfig, Strategy, Trace,
};
use crate::channel::{build_link_table, mix64, short_hash, LinkTable, RadioParams};
use crate::error::{Error, Result};
use crate::metrics::{mean_std, summarize, MetricsReport, DEFAULT_TARGET_RATE};
use crate::topology::{generate_topology, DeploymentConfig, Topology};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "HETNET_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    UsersPerMacrocell,
    PbsPerMacrocell,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::UsersPerMacrocell => "users_per_macrocell",
            SweepVariable::PbsPerMacrocell => "pbs_per_macrocell",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "users_per_macrocell" | "users" => Ok(SweepVariable::UsersPerMacrocell),
            "pbs_per_macrocell" | "pbs" => Ok(SweepVariable::PbsPerMacrocell),
            other => Err(format!("unknown sweep variable `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub deployment: DeploymentConfig,
    pub radio: RadioParams,
    pub solver: SolverConfig,
    pub strategies: Vec<Strategy>,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub target_rate: f64,
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            deployment: DeploymentConfig::default(),
            radio: RadioParams::default(),
            solver: SolverConfig::default(),
            strategies: Strategy::ALL.to_vec(),
            sweep_variable: SweepVariable::UsersPerMacrocell,
            sweep_values: vec![10, 20, 30, 40, 50, 60],
            trials: 100,
            base_seed: 1,
            target_rate: DEFAULT_TARGET_RATE,
            output_path: PathBuf::from("results.csv"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::InvalidConfig(format!("{key} = `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Every configurable key, in canonical order.
    pub const KEYS: [&'static str; 36] = [
        "num_macrocells",
        "pbs_per_macrocell",
        "users_per_macrocell",
        "inter_site_distance",
        "min_pbs_pbs",
        "min_pbs_mbs",
        "min_user_mbs",
        "min_user_pbs",
        "region_shape",
        "wrap_around",
        "processing_gain",
        "target_snr_db",
        "max_tx_power_dbm",
        "circuit_power_mw",
        "noise_density_dbm_hz",
        "bandwidth_hz",
        "shadowing_std_db",
        "macro_pl_intercept",
        "macro_pl_slope",
        "pico_pl_intercept",
        "pico_pl_slope",
        "power_control_uses_shadowing",
        "gamma_init",
        "max_iter_amwee",
        "max_iter_eeauf",
        "stepsize",
        "convergence_tol",
        "mu_init",
        "primal_recovery",
        "strategies",
        "sweep_variable",
        "sweep_values",
        "trials",
        "base_seed",
        "target_rate",
        "output_path",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let d = &mut self.deployment;
        let r = &mut self.radio;
        let s = &mut self.solver;
        match key.trim() {
            "num_macrocells" => d.num_macrocells = parse(key, value)?,
            "pbs_per_macrocell" => d.pbs_per_macrocell = parse(key, value)?,
            "users_per_macrocell" => d.users_per_macrocell = parse(key, value)?,
            "inter_site_distance" => d.inter_site_distance = parse(key, value)?,
            "min_pbs_pbs" => d.min_pbs_pbs = parse(key, value)?,
            "min_pbs_mbs" => d.min_pbs_mbs = parse(key, value)?,
            "min_user_mbs" => d.min_user_mbs = parse(key, value)?,
            "min_user_pbs" => d.min_user_pbs = parse(key, value)?,
            "region_shape" => d.region_shape = parse(key, value)?,
            "wrap_around" => d.wrap_around = parse(key, value)?,
            "processing_gain" => r.processing_gain = parse(key, value)?,
            "target_snr_db" => r.target_snr_db = parse(key, value)?,
            "max_tx_power_dbm" => r.max_tx_power_dbm = parse(key, value)?,
            "circuit_power_mw" => r.circuit_power_mw = parse(key, value)?,
            "noise_density_dbm_hz" => r.noise_density_dbm_hz = parse(key, value)?,
            "bandwidth_hz" => r.bandwidth_hz = parse(key, value)?,
            "shadowing_std_db" => r.shadowing_std_db = parse(key, value)?,
            "macro_pl_intercept" => r.macro_pl.intercept_db = parse(key, value)?,
            "macro_pl_slope" => r.macro_pl.slope_db = parse(key, value)?,
            "pico_pl_intercept" => r.pico_pl.intercept_db = parse(key, value)?,
            "pico_pl_slope" => r.pico_pl.slope_db = parse(key, value)?,
            "power_control_uses_shadowing" => r.power_control_uses_shadowing = parse(key, value)?,
            "gamma_init" => s.gamma_init = parse(key, value)?,
            "max_iter_amwee" => s.max_iter_amwee = parse(key, value)?,
            "max_iter_eeauf" => s.max_iter_eeauf = parse(key, value)?,
            "stepsize" => s.stepsize = parse(key, value)?,
            "convergence_tol" => s.convergence_tol = parse(key, value)?,
            "mu_init" => s.mu_init = parse(key, value)?,
            "primal_recovery" => s.primal_recovery = parse(key, value)?,
            "strategies" => self.strategies = parse_list(key, value)?,
            "sweep_variable" => self.sweep_variable = parse(key, value)?,
            "sweep_values" => self.sweep_values = parse_list(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "base_seed" => self.base_seed = parse(key, value)?,
            "target_rate" => self.target_rate = parse(key, value)?,
            "output_path" => self.output_path = PathBuf::from(value.trim()),
            other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let d = &self.deployment;
        let r = &self.radio;
        let s = &self.solver;
        Some(match key {
            "num_macrocells" => d.num_macrocells.to_string(),
            "pbs_per_macrocell" => d.pbs_per_macrocell.to_string(),
            "users_per_macrocell" => d.users_per_macrocell.to_string(),
            "inter_site_distance" => d.inter_site_distance.to_string(),
            "min_pbs_pbs" => d.min_pbs_pbs.to_string(),
            "min_pbs_mbs" => d.min_pbs_mbs.to_string(),
            "min_user_mbs" => d.min_user_mbs.to_string(),
            "min_user_pbs" => d.min_user_pbs.to_string(),
            "region_shape" => d.region_shape.to_string(),
            "wrap_around" => d.wrap_around.to_string(),
            "processing_gain" => r.processing_gain.to_string(),
            "target_snr_db" => r.target_snr_db.to_string(),
            "max_tx_power_dbm" => r.max_tx_power_dbm.to_string(),
            "circuit_power_mw" => r.circuit_power_mw.to_string(),
            "noise_density_dbm_hz" => r.noise_density_dbm_hz.to_string(),
            "bandwidth_hz" => r.bandwidth_hz.to_string(),
            "shadowing_std_db" => r.shadowing_std_db.to_string(),
            "macro_pl_intercept" => r.macro_pl.intercept_db.to_string(),
            "macro_pl_slope" => r.macro_pl.slope_db.to_string(),
            "pico_pl_intercept" => r.pico_pl.intercept_db.to_string(),
            "pico_pl_slope" => r.pico_pl.slope_db.to_string(),
            "power_control_uses_shadowing" => r.power_control_uses_shadowing.to_string(),
            "gamma_init" => s.gamma_init.to_string(),
            "max_iter_amwee" => s.max_iter_amwee.to_string(),
            "max_iter_eeauf" => s.max_iter_eeauf.to_string(),
            "stepsize" => s.stepsize.to_string(),
            "convergence_tol" => s.convergence_tol.to_string(),
            "mu_init" => s.mu_init.to_string(),
            "primal_recovery" => s.primal_recovery.to_string(),
            "strategies" => join(&self.strategies),
            "sweep_variable" => self.sweep_variable.to_string(),
            "sweep_values" => join(&self.sweep_values),
            "trials" => self.trials.to_string(),
            "base_seed" => self.base_seed.to_string(),
            "target_rate" => self.target_rate.to_string(),
            "output_path" => self.output_path.display().to_string(),
            _ => return None,
        })
    }

    /// Applies a `key = value` text (blank lines and `#` comments ignored).
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_kv_text(&text)?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("every key renders"));
        }
        out
    }

    /// Hash over everything that affects results (the output path excluded).
    pub fn config_hash(&self) -> String {
        let text: String = self
            .to_kv()
            .lines()
            .filter(|l| !l.starts_with("output_path"))
            .map(|l| format!("{l}\n"))
            .collect();
        short_hash(text.as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        self.deployment.validate()?;
        self.radio.validate()?;
        self.solver.validate()?;
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("no strategies enabled".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::InvalidConfig("sweep_values is empty".into()));
        }
        if self.sweep_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("sweep_values must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.target_rate >= 0.0) {
            return Err(Error::InvalidConfig("target_rate must be >= 0".into()));
        }
        Ok(())
    }

    /// Deployment for one sweep point with the given topology seed.
    pub fn deployment_for(&self, sweep_value: usize, seed: u64) -> DeploymentConfig {
        let mut d = self.deployment.clone();
        match self.sweep_variable {
            SweepVariable::UsersPerMacrocell => d.users_per_macrocell = sweep_value,
            SweepVariable::PbsPerMacrocell => d.pbs_per_macrocell = sweep_value,
        }
        d.seed = seed;
        d
    }

    pub fn num_bs_for(&self, sweep_value: usize) -> usize {
        let d = self.deployment_for(sweep_value, 0);
        d.num_macrocells * (1 + d.pbs_per_macrocell)
    }
}

/// Stable per-trial seed; adding sweep points never changes existing trials.
pub fn trial_seed(base_seed: u64, sweep_value: usize, trial_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"hetnet-trial");
    h.update(base_seed.to_le_bytes());
    h.update((sweep_value as u64).to_le_bytes());
    h.update((trial_index as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Shadowing seed for a trial, derived from its trial seed.
pub fn link_seed(trial_seed: u64) -> u64 {
    mix64(trial_seed ^ 0x5eed_1157)
}

pub type StrategyResults = (BTreeMap<Strategy, Solution>, BTreeMap<Strategy, MetricsReport>);

/// Runs every enabled strategy on one link table.
pub fn solve_strategies(cfg: &ExperimentConfig, links: &LinkTable) -> Result<StrategyResults> {
    let p_c = cfg.radio.circuit_power_mw;
    let mut solutions = BTreeMap::new();
    let mut reports = BTreeMap::new();
    for &strategy in &cfg.strategies {
        let sol = solve(strategy, links, p_c, &cfg.solver)?;
        let report = summarize(&sol.association, links, p_c, cfg.target_rate)?;
        solutions.insert(strategy, sol);
        reports.insert(strategy, report);
    }
    Ok((solutions, reports))
}

/// Everything one trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub sweep_value: usize,
    pub trial: usize,
    pub seed: u64,
    pub topology: Topology,
    pub links: LinkTable,
    pub solutions: BTreeMap<Strategy, Solution>,
    pub reports: BTreeMap<Strategy, MetricsReport>,
}

pub fn run_trial_detailed(
    cfg: &ExperimentConfig,
    sweep_value: usize,
    trial_index: usize,
) -> Result<TrialOutcome> {
    let tag = |e: Error| Error::Trial {
        sweep_value,
        trial: trial_index,
        source: Box::new(e),
    };
    let seed = trial_seed(cfg.base_seed, sweep_value, trial_index);
    let topology = generate_topology(&cfg.deployment_for(sweep_value, seed)).map_err(tag)?;
    let links = build_link_table(&topology, &cfg.radio, link_seed(seed)).map_err(tag)?;
    let (solutions, reports) = solve_strategies(cfg, &links).map_err(tag)?;
    Ok(TrialOutcome {
        sweep_value,
        trial: trial_index,
        seed,
        topology,
        links,
        solutions,
        reports,
    })
}

pub fn run_trial(
    cfg: &ExperimentConfig,
    sweep_value: usize,
    trial_index: usize,
) -> Result<BTreeMap<Strategy, MetricsReport>> {
    run_trial_detailed(cfg, sweep_value, trial_index).map(|o| o.reports)
}

pub const CSV_HEADER: &str = "strategy,trial_seed,sweep_variable,sweep_value,trial,\
avg_rate,avg_effective_rate,avg_user_ee,whole_ee,jain_index,supported_ratio";

pub fn csv_row(
    strategy: Strategy,
    seed: u64,
    variable: SweepVariable,
    sweep_value: usize,
    trial: usize,
    r: &MetricsReport,
) -> String {
    let mut row = format!("{strategy},{seed},{variable},{sweep_value},{trial}");
    for v in r.values() {
        let _ = write!(row, ",{v}");
    }
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub strategy: Strategy,
    pub trial_seed: u64,
    pub sweep_variable: SweepVariable,
    pub sweep_value: usize,
    pub trial: usize,
    pub report: MetricsReport,
}

/// Parses the data rows of a sweep CSV, skipping comment and header lines.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() || line == CSV_HEADER {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(err(format!("expected 11 columns, got {}", f.len())));
        }
        let mut values = [0.0; 6];
        for (slot, s) in values.iter_mut().zip(&f[5..]) {
            *slot = s.parse().map_err(|e| err(format!("{e}")))?;
        }
        out.push(CsvRecord {
            strategy: f[0].parse().map_err(err)?,
            trial_seed: f[1].parse().map_err(|e| err(format!("{e}")))?,
            sweep_variable: f[2].parse().map_err(err)?,
            sweep_value: f[3].parse().map_err(|e| err(format!("{e}")))?,
            trial: f[4].parse().map_err(|e| err(format!("{e}")))?,
            report: MetricsReport::from_values(values),
        });
    }
    Ok(out)
}

/// Files a sweep wrote, plus per-(sweep value, strategy) aggregates.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub trace_paths: Vec<PathBuf>,
    pub rows: usize,
    /// `(sweep value, strategy) -> [(mean, std); 6]`
    pub summary: BTreeMap<(usize, Strategy), [(f64, f64); 6]>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn header_block(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# hetnet sweep");
    let _ = writeln!(out, "# config_hash = {}", cfg.config_hash());
    let _ = writeln!(
        out,
        "# note: target_rate = {} bits/s/Hz is an artifact default, not a published value",
        cfg.target_rate
    );
    for line in cfg.to_kv().lines() {
        if !line.starts_with("output_path") {
            let _ = writeln!(out, "# {line}");
        }
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs trials on `HETNET_WORKERS` threads when set, otherwise on rayon's default pool.
fn run_all(cfg: &ExperimentConfig) -> Vec<Result<TrialOutcome>> {
    let jobs: Vec<(usize, usize)> = cfg
        .sweep_values
        .iter()
        .flat_map(|&v| (0..cfg.trials).map(move |t| (v, t)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(v, t)| run_trial_detailed(cfg, v, t))
            .collect::<Vec<_>>()
    };
    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match workers.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let csv_path = cfg.output_path.clone();
    let summary_path = sibling(&csv_path, "_summary.csv");
    let results = run_all(cfg);

    let mut csv = header_block(cfg);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    let mut rows = 0;
    let mut samples: BTreeMap<(usize, Strategy), Vec<[f64; 6]>> = BTreeMap::new();
    let mut first: Option<&TrialOutcome> = None;
    for result in &results {
        let outcome = match result {
            Ok(o) => o,
            Err(e) => {
                let _ = writeln!(csv, "# PARTIAL OUTPUT: sweep aborted: {e}");
                write_file(&csv_path, &csv)?;
                return Err(clone_error(e));
            }
        };
        first.get_or_insert(outcome);
        for (&strategy, report) in &outcome.reports {
            csv.push_str(&csv_row(
                strategy,
                outcome.seed,
                cfg.sweep_variable,
                outcome.sweep_value,
                outcome.trial,
                report,
            ));
            csv.push('\n');
            rows += 1;
            samples
                .entry((outcome.sweep_value, strategy))
                .or_default()
                .push(report.values());
        }
    }
    write_file(&csv_path, &csv)?;

    // re-read and range-check what was written
    let written = fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    for rec in parse_csv(&written)? {
        rec.report
            .check(cfg.num_bs_for(rec.sweep_value))
            .map_err(|msg| Error::InvalidConfig(format!("schema check failed: {msg}")))?;
    }

    let mut summary = BTreeMap::new();
    let mut text = header_block(cfg);
    text.push_str("sweep_variable,sweep_value,strategy,trials");
    for f in MetricsReport::FIELDS {
        let _ = write!(text, ",{f}_mean,{f}_std");
    }
    text.push('\n');
    for (&(value, strategy), rows) in &samples {
        let mut stats = [(0.0, 0.0); 6];
        for (i, slot) in stats.iter_mut().enumerate() {
            let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            *slot = mean_std(&column);
        }
        let _ = write!(text, "{},{value},{strategy},{}", cfg.sweep_variable, rows.len());
        for (m, s) in stats {
            let _ = write!(text, ",{m},{s}");
        }
        text.push('\n');
        summary.insert((value, strategy), stats);
    }
    write_file(&summary_path, &text)?;

    let mut trace_paths = Vec::new();
    if let Some(outcome) = first {
        for (strategy, sol) in &outcome.solutions {
            let Some(trace) = &sol.trace else { continue };
            let path = sibling(
                &csv_path,
                &format!("_trace_{}.csv", strategy.name().to_lowercase()),
            );
            let body = match trace {
                Trace::Dinkelbach(t) => t.to_columns(),
                Trace::Dual(t) => t.to_columns(),
            };
            write_file(&path, &body)?;
            trace_paths.push(path);
        }
    }

    Ok(SweepOutput {
        csv_path,
        summary_path,
        trace_paths,
        rows,
        summary,
    })
}

// Errors hold io::Error, which is not Clone; rebuild an equivalent value.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::Trial {
            sweep_value,
            trial,
            source,
        } => Error::Trial {
            sweep_value: *sweep_value,
            trial: *trial,
            source: Box::new(clone_error(source)),
        },
        Error::Io { path, source } => Error::io(path, std::io::Error::new(source.kind(), source.to_string())),
        Error::InvalidConfig(s) => Error::InvalidConfig(s.clone()),
        Error::PlacementInfeasible {
            kind,
            index,
            cell,
            attempts,
        } => Error::PlacementInfeasible {
            kind,
            index: *index,
            cell: *cell,
            attempts: *attempts,
        },
        other => Error::InvalidConfig(other.to_string()),
    }
}

/// Link table from the full channel model: one macrocell with
/// `num_bs - 1` PBSs and `num_users` users.
pub fn small_instance(num_bs: usize, num_users: usize, seed: u64) -> Result<LinkTable> {
    if num_bs == 0 {
        return Err(Error::InvalidConfig("need at least one BS".into()));
    }
    let topo = generate_topology(&DeploymentConfig {
        pbs_per_macrocell: num_bs - 1,
        users_per_macrocell: num_users,
        seed,
        ..Default::default()
    })?;
    build_link_table(&topo, &RadioParams::default(), mix64(seed ^ 0x11))
}

#[derive(Debug, Default, Clone)]
pub struct ValidationReport {
    pub instances: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Invariant suite over random small instances: oracle agreement for the
/// separable solvers, Dinkelbach monotonicity and fixed point, dual
/// feasibility and weak duality for EEAUF, and per-instance dominance.
pub fn validate_instances(count: usize, seed: u64, solver: &SolverConfig) -> Result<ValidationReport> {
    let p_c = RadioParams::default().circuit_power_mw;
    let mut report = ValidationReport::default();
    for i in 0..count {
        let inst_seed = mix64(seed.wrapping_add(i as u64));
        let n = 2 + (inst_seed % 3) as usize;
        let k = 2 + ((inst_seed >> 8) % 7) as usize;
        let links = small_instance(n, k, inst_seed)?;
        report.instances += 1;
        let mut check = |ok: bool, what: String| {
            report.checks += 1;
            if !ok {
                report.failures.push(format!("instance {i} (N={n}, K={k}): {what}"));
            }
        };

        let mara = association::solve_mara(&links);
        let (_, best_rate) = brute_force(&links, Objective::SumRate, p_c)?;
        let got = association::sum_rate(&mara, &links);
        check(got == best_rate, format!("MARA sum rate {got} != oracle {best_rate}"));

        let amsee = association::solve_amsee(&links, p_c);
        let (_, best_ee) = brute_force(&links, Objective::SumEe, p_c)?;
        let got = association::sum_ee(&amsee, &links, p_c);
        check(got == best_ee, format!("AMSEE sum EE {got} != oracle {best_ee}"));

        let (amwee, trace) = association::solve_amwee(&links, p_c, solver)?;
        let (_, best_whole) = brute_force(&links, Objective::WholeEe, p_c)?;
        let e = evaluate_whole_ee(&amwee, &links, p_c)?;
        check(
            (e - best_whole).abs() <= solver.convergence_tol * best_whole,
            format!("AMWEE whole EE {e} vs oracle {best_whole}"),
        );
        check(
            trace.gamma_sequence.windows(2).all(|w| w[1] >= w[0] - 1e-9),
            "gamma sequence decreased".into(),
        );
        check(
            trace.f_values.iter().all(|&f| f >= -1e-9),
            "negative F(gamma)".into(),
        );
        check(
            (e - trace.final_gamma()).abs() <= solver.convergence_tol * e,
            "final gamma is not a fixed point".into(),
        );
        let (fa, _) = f_value(&links, p_c, 0.5 * best_whole);
        let (fb, _) = f_value(&links, p_c, 1.5 * best_whole);
        check(fa > fb, format!("F not decreasing: {fa} <= {fb}"));

        let (_, dual) = solve_eeauf(&links, p_c, solver)?;
        let (_, best_g) = brute_force(&links, Objective::EeaufUtility, p_c)?;
        check(
            dual.mu_history
                .iter()
                .zip(&dual.y_history)
                .all(|(mu, y)| mu.iter().zip(y).all(|(m, v)| *v == (m - 1.0).exp())),
            "supply differs from exp(mu - 1)".into(),
        );
        check(
            dual.dual_values.iter().all(|&d| d >= best_g - 1e-9),
            "dual value below primal optimum".into(),
        );

        for s in Strategy::ALL {
            let other = solve(s, &links, p_c, solver)?.association;
            let slack = |v: f64| 1e-12 * v.abs();
            check(
                e + solver.convergence_tol * e >= evaluate_whole_ee(&other, &links, p_c)?,
                format!("{s} beats AMWEE on whole EE"),
            );
            let se = association::sum_ee(&other, &links, p_c);
            check(best_ee + slack(best_ee) >= se, format!("{s} beats AMSEE on sum EE"));
            let sr = association::sum_rate(&other, &links);
            check(best_rate + slack(best_rate) >= sr, format!("{s} beats MARA on sum rate"));
        }
    }
    Ok(report)
}
