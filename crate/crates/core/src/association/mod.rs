//! User-association strategies. Every solver maps a [`LinkTable`] to one
//! serving BS per user; the iterative ones also return a convergence trace.

mod brute;
mod dinkelbach;
mod dual;

pub use brute::{brute_force, Objective, MAX_ENUMERATION};
pub use dinkelbach::{dinkelbach_inner, f_value, solve_amwee, DinkelbachTrace};
pub use dual::{auf_utilities, dual_value, eeauf_utilities, solve_auf, solve_dual, solve_eeauf, DualTrace};

use std::fmt;
use std::str::FromStr;

use crate::channel::LinkTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub serving_bs: Vec<usize>,
    /// Number of users served by each BS.
    pub loads: Vec<usize>,
}

impl Association {
    pub fn new(serving_bs: Vec<usize>, num_bs: usize) -> Self {
        let mut loads = vec![0; num_bs];
        for &n in &serving_bs {
            loads[n] += 1;
        }
        Self { serving_bs, loads }
    }

    pub fn num_users(&self) -> usize {
        self.serving_bs.len()
    }

    pub fn num_bs(&self) -> usize {
        self.loads.len()
    }

    /// `(user, serving BS)` pairs.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.serving_bs.iter().copied().enumerate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Mara,
    Auf,
    Amsee,
    Amwee,
    Eeauf,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Mara,
        Strategy::Auf,
        Strategy::Amsee,
        Strategy::Amwee,
        Strategy::Eeauf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Mara => "MARA",
            Strategy::Auf => "AUF",
            Strategy::Amsee => "AMSEE",
            Strategy::Amwee => "AMWEE",
            Strategy::Eeauf => "EEAUF",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown strategy `{s}` (expected MARA, AUF, AMSEE, AMWEE or EEAUF)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuInit {
    /// Every multiplier starts at `ln K`.
    LogK,
    Zeros,
}

impl FromStr for MuInit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "log_k" | "logk" => Ok(MuInit::LogK),
            "zeros" | "zero" => Ok(MuInit::Zeros),
            other => Err(format!("unknown mu init rule `{other}`")),
        }
    }
}

impl fmt::Display for MuInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuInit::LogK => "log_k",
            MuInit::Zeros => "zeros",
        })
    }
}

/// Which user-step association the dual solvers hand back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimalRecovery {
    /// The iterate with the highest primal objective.
    BestIterate,
    /// The final iterate.
    LastIterate,
}

impl FromStr for PrimalRecovery {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "best" | "best_iterate" => Ok(PrimalRecovery::BestIterate),
            "last" | "last_iterate" => Ok(PrimalRecovery::LastIterate),
            other => Err(format!("unknown primal recovery rule `{other}`")),
        }
    }
}

impl fmt::Display for PrimalRecovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimalRecovery::BestIterate => "best_iterate",
            PrimalRecovery::LastIterate => "last_iterate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub gamma_init: f64,
    pub max_iter_amwee: usize,
    pub max_iter_eeauf: usize,
    pub stepsize: f64,
    pub convergence_tol: f64,
    pub mu_init: MuInit,
    pub primal_recovery: PrimalRecovery,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma_init: 0.0,
            max_iter_amwee: 50,
            max_iter_eeauf: 500,
            stepsize: 0.01,
            convergence_tol: 1e-6,
            mu_init: MuInit::LogK,
            primal_recovery: PrimalRecovery::BestIterate,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.stepsize > 0.0 && self.stepsize.is_finite()) {
            return Err(Error::InvalidConfig("stepsize must be positive".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig("convergence_tol must be positive".into()));
        }
        if self.max_iter_amwee == 0 || self.max_iter_eeauf == 0 {
            return Err(Error::InvalidConfig("iteration caps must be at least 1".into()));
        }
        if !(self.gamma_init >= 0.0 && self.gamma_init.is_finite()) {
            return Err(Error::InvalidConfig("gamma_init must be a finite ratio >= 0".into()));
        }
        Ok(())
    }
}

/// Index of the largest score; the lowest index wins ties.
pub(crate) fn argmax(n: usize, score: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_score = score(0);
    for i in 1..n {
        let s = score(i);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

fn per_user_argmax(links: &LinkTable, score: impl Fn(usize, usize) -> f64) -> Association {
    let n_bs = links.num_bs();
    let serving = (0..links.num_users())
        .map(|k| argmax(n_bs, |n| score(n, k)))
        .collect();
    Association::new(serving, n_bs)
}

/// Each user picks the BS with the highest achievable rate.
pub fn solve_mara(links: &LinkTable) -> Association {
    per_user_argmax(links, |n, k| links.rate.get(n, k))
}

/// Each user picks the BS maximising its own `r / (p + p_c)`.
pub fn solve_amsee(links: &LinkTable, circuit_power_mw: f64) -> Association {
    per_user_argmax(links, |n, k| user_ee(links, n, k, circuit_power_mw))
}

#[inline]
pub fn user_ee(links: &LinkTable, n: usize, k: usize, circuit_power_mw: f64) -> f64 {
    links.rate.get(n, k) / (links.tx_power_mw.get(n, k) + circuit_power_mw)
}

/// Numerator and denominator of the whole energy efficiency.
pub fn whole_ee_parts(assoc: &Association, links: &LinkTable, circuit_power_mw: f64) -> (f64, f64) {
    let (rate, power) = assoc.links().fold((0.0, 0.0), |(r, p), (k, n)| {
        (r + links.rate.get(n, k), p + links.tx_power_mw.get(n, k))
    });
    (rate, power + assoc.num_users() as f64 * circuit_power_mw)
}

/// Sum rate over total consumed power, in (bits/s/Hz)/mW.
pub fn evaluate_whole_ee(assoc: &Association, links: &LinkTable, circuit_power_mw: f64) -> Result<f64> {
    let (num, den) = whole_ee_parts(assoc, links, circuit_power_mw);
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

pub fn sum_rate(assoc: &Association, links: &LinkTable) -> f64 {
    assoc.links().map(|(k, n)| links.rate.get(n, k)).sum()
}

pub fn sum_ee(assoc: &Association, links: &LinkTable, circuit_power_mw: f64) -> f64 {
    assoc
        .links()
        .map(|(k, n)| user_ee(links, n, k, circuit_power_mw))
        .sum()
}

/// `sum_k u[s(k)][k] - sum_n y_n ln y_n` with `0 ln 0 = 0`.
pub(crate) fn load_penalised(assoc: &Association, utilities: &crate::channel::Matrix) -> f64 {
    let gain: f64 = assoc.links().map(|(k, n)| utilities.get(n, k)).sum();
    let penalty: f64 = assoc
        .loads
        .iter()
        .filter(|&&y| y > 0)
        .map(|&y| {
            let y = y as f64;
            y * y.ln()
        })
        .sum();
    gain - penalty
}

/// Fairness-aware energy-efficiency utility with integral loads.
pub fn eeauf_utility(assoc: &Association, links: &LinkTable, circuit_power_mw: f64) -> Result<f64> {
    Ok(load_penalised(assoc, &eeauf_utilities(links, circuit_power_mw)?))
}

/// Log effective-rate utility with integral loads.
pub fn auf_utility(assoc: &Association, links: &LinkTable) -> Result<f64> {
    Ok(load_penalised(assoc, &auf_utilities(links)?))
}

#[derive(Debug, Clone)]
pub enum Trace {
    Dinkelbach(DinkelbachTrace),
    Dual(DualTrace),
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub association: Association,
    pub trace: Option<Trace>,
}

/// Uniform dispatch over the five strategies.
pub fn solve(
    strategy: Strategy,
    links: &LinkTable,
    circuit_power_mw: f64,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let plain = |association| Solution {
        association,
        trace: None,
    };
    Ok(match strategy {
        Strategy::Mara => plain(solve_mara(links)),
        Strategy::Amsee => plain(solve_amsee(links, circuit_power_mw)),
        Strategy::Amwee => {
            let (association, trace) = solve_amwee(links, circuit_power_mw, cfg)?;
            Solution {
                association,
                trace: Some(Trace::Dinkelbach(trace)),
            }
        }
        Strategy::Eeauf => {
            let (association, trace) = solve_eeauf(links, circuit_power_mw, cfg)?;
            Solution {
                association,
                trace: Some(Trace::Dual(trace)),
            }
        }
        Strategy::Auf => {
            let (association, trace) = solve_auf(links, cfg)?;
            Solution {
                association,
                trace: Some(Trace::Dual(trace)),
            }
        }
    })
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::channel::{build_link_table, LinkTable, Matrix, RadioParams};
    use crate::topology::{generate_topology, DeploymentConfig};

    pub fn table(rates: &[&[f64]], powers: &[&[f64]]) -> LinkTable {
        let m = |rows: &[&[f64]]| Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        LinkTable::from_rate_power(m(rates), m(powers))
    }

    /// Link table drawn from the full channel model: one macrocell with
    /// `n - 1` PBSs and `k` users.
    pub fn channel_instance(n: usize, k: usize, seed: u64) -> LinkTable {
        let topo = generate_topology(&DeploymentConfig {
            pbs_per_macrocell: n - 1,
            users_per_macrocell: k,
            seed,
            ..Default::default()
        })
        .unwrap();
        build_link_table(&topo, &RadioParams::default(), seed ^ 0xabcd).unwrap()
    }

    /// Uniform random rates in [0.1, 8] and powers in [0.01, 200] mW.
    pub fn random_instance(n: usize, k: usize, seed: u64) -> LinkTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: f64, hi: f64| {
            (0..n)
                .map(|_| (0..k).map(|_| rng.random_range(lo..hi)).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        let rates = draw(0.1, 8.0);
        let powers = draw(0.01, 200.0);
        LinkTable::from_rate_power(Matrix::from_rows(&rates), Matrix::from_rows(&powers))
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn mara_picks_highest_rate() {
        let t = table(&[&[2.0], &[3.0], &[1.0]], &[&[1.0], &[1.0], &[1.0]]);
        assert_eq!(solve_mara(&t).serving_bs, vec![1]);
    }

    #[test]
    fn mara_ties_go_to_lowest_index() {
        let t = table(&[&[1.5, 2.0], &[1.5, 2.0], &[1.5, 2.0]], &[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let a = solve_mara(&t);
        assert_eq!(a.serving_bs, vec![0, 0]);
        assert_eq!(a.loads, vec![2, 0, 0]);
    }

    #[test]
    fn amsee_hand_example() {
        let t = table(&[&[2.0], &[2.0]], &[&[100.0], &[50.0]]);
        assert!((user_ee(&t, 0, 0, 100.0) - 0.01).abs() < 1e-15);
        assert!((user_ee(&t, 1, 0, 100.0) - 2.0 / 150.0).abs() < 1e-15);
        assert_eq!(solve_amsee(&t, 100.0).serving_bs, vec![1]);
    }

    #[test]
    fn amsee_with_equal_powers_matches_mara() {
        for seed in 0..20 {
            let mut t = random_instance(4, 7, seed);
            t.tx_power_mw = t.tx_power_mw.map(|_| 37.0);
            assert_eq!(solve_amsee(&t, 100.0), solve_mara(&t));
        }
    }

    #[test]
    fn whole_ee_hand_example() {
        let t = table(&[&[2.0]], &[&[100.0]]);
        let a = Association::new(vec![0], 1);
        assert!((evaluate_whole_ee(&a, &t, 100.0).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn whole_ee_homogeneity() {
        let t = random_instance(3, 6, 11);
        let a = solve_mara(&t);
        let base = evaluate_whole_ee(&a, &t, 100.0).unwrap();
        let mut doubled_rates = t.clone();
        doubled_rates.rate = t.rate.map(|r| 2.0 * r);
        assert!((evaluate_whole_ee(&a, &doubled_rates, 100.0).unwrap() / base - 2.0).abs() < 1e-14);
        let mut doubled_power = t.clone();
        doubled_power.tx_power_mw = t.tx_power_mw.map(|p| 2.0 * p);
        assert!(
            (evaluate_whole_ee(&a, &doubled_power, 200.0).unwrap() / base - 0.5).abs() < 1e-14
        );
    }

    #[test]
    fn whole_ee_zero_denominator_guarded() {
        let t = table(&[&[1.0]], &[&[0.0]]);
        let a = Association::new(vec![0], 1);
        assert!(matches!(evaluate_whole_ee(&a, &t, 0.0), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn association_loads_sum_to_users() {
        let a = Association::new(vec![2, 0, 2, 1, 2], 4);
        assert_eq!(a.loads, vec![1, 1, 3, 0]);
        assert_eq!(a.loads.iter().sum::<usize>(), a.num_users());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
            assert_eq!(s.name().to_lowercase().parse::<Strategy>().unwrap(), s);
        }
        assert!("bogus".parse::<Strategy>().is_err());
    }

    #[test]
    fn solver_config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            stepsize: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iter_eeauf: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn dispatch_attaches_traces_only_to_iterative_solvers() {
        let t = channel_instance(3, 6, 1);
        let cfg = SolverConfig::default();
        for s in Strategy::ALL {
            let sol = solve(s, &t, 100.0, &cfg).unwrap();
            assert_eq!(sol.association.num_users(), 6);
            let iterative = matches!(s, Strategy::Amwee | Strategy::Eeauf | Strategy::Auf);
            assert_eq!(sol.trace.is_some(), iterative, "{s}");
        }
    }

    #[test]
    fn eeauf_utility_uses_zero_log_zero() {
        let t = table(&[&[1.0, 1.0], &[1.0, 1.0]], &[&[0.0, 0.0], &[0.0, 0.0]]);
        // h = ln 1 - ln 1 = 0 everywhere
        let stacked = Association::new(vec![0, 0], 2);
        let split = Association::new(vec![0, 1], 2);
        assert!((eeauf_utility(&stacked, &t, 1.0).unwrap() + 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(eeauf_utility(&split, &t, 1.0).unwrap(), 0.0);
    }
}
