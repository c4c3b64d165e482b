//! Load-aware association by dual decomposition.
//!
//! The coupling constraint `y_n = sum_k x_nk` is priced by a multiplier
//! `mu_n`. Users pick `argmax_n (h_nk - mu_n)`, BSs set the supply
//! `y_n = exp(mu_n - 1)`, and the price follows the supply/demand residual
//! with a fixed step.

use super::{load_penalised, Association, MuInit, PrimalRecovery, SolverConfig};
use crate::channel::{LinkTable, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DualTrace {
    /// Multipliers used in the last user step.
    pub mu: Vec<f64>,
    /// `exp(mu - 1)` for those multipliers.
    pub y_cont: Vec<f64>,
    pub mu_history: Vec<Vec<f64>>,
    pub y_history: Vec<Vec<f64>>,
    /// `|y_n - sum_k x_nk|` per BS, one entry per iteration.
    pub residuals: Vec<Vec<f64>>,
    /// Dual function value at each iterate's multipliers.
    pub dual_values: Vec<f64>,
    /// Primal objective of each iterate's integral association.
    pub primal_values: Vec<f64>,
    /// Iteration whose association was returned.
    pub returned_iteration: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl DualTrace {
    pub fn max_residual(&self, t: usize) -> f64 {
        self.residuals[t].iter().cloned().fold(0.0, f64::max)
    }

    pub fn final_max_residual(&self) -> f64 {
        self.residuals.last().map_or(0.0, |r| r.iter().cloned().fold(0.0, f64::max))
    }

    /// Largest Euclidean norm of the residual (the dual subgradient) seen so far.
    pub fn max_residual_norm(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `iteration,max_residual,dual_value,primal_value` columns.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("iteration,max_residual,dual_value,primal_value\n");
        for t in 0..self.residuals.len() {
            out.push_str(&format!(
                "{t},{},{},{}\n",
                self.max_residual(t),
                self.dual_values[t],
                self.primal_values[t]
            ));
        }
        out
    }

    /// Running minimum of the dual values.
    pub fn best_dual_values(&self) -> Vec<f64> {
        self.dual_values
            .iter()
            .scan(f64::INFINITY, |best, &v| {
                *best = best.min(v);
                Some(*best)
            })
            .collect()
    }
}

fn checked_ln(value: f64, bs: usize, user: usize) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value.ln())
    } else {
        Err(Error::LogDomain { bs, user, value })
    }
}

/// `h_nk = ln r_nk - ln(p_nk + p_c)`.
pub fn eeauf_utilities(links: &LinkTable, circuit_power_mw: f64) -> Result<Matrix> {
    let (n_bs, k_users) = (links.num_bs(), links.num_users());
    let mut h = Matrix::zeros(n_bs, k_users);
    for n in 0..n_bs {
        for k in 0..k_users {
            let r = checked_ln(links.rate.get(n, k), n, k)?;
            let p = checked_ln(links.tx_power_mw.get(n, k) + circuit_power_mw, n, k)?;
            h.set(n, k, r - p);
        }
    }
    Ok(h)
}

/// `h_nk = ln r_nk`.
pub fn auf_utilities(links: &LinkTable) -> Result<Matrix> {
    let (n_bs, k_users) = (links.num_bs(), links.num_users());
    let mut h = Matrix::zeros(n_bs, k_users);
    for n in 0..n_bs {
        for k in 0..k_users {
            h.set(n, k, checked_ln(links.rate.get(n, k), n, k)?);
        }
    }
    Ok(h)
}

/// User step. Exact ties rotate over the tied BSs by user index so that
/// indistinguishable users spread out instead of piling onto one BS.
fn user_step(h: &Matrix, mu: &[f64]) -> Vec<usize> {
    let n_bs = h.rows();
    let mut tied = Vec::with_capacity(n_bs);
    (0..h.cols())
        .map(|k| {
            let best = (0..n_bs)
                .map(|n| h.get(n, k) - mu[n])
                .fold(f64::NEG_INFINITY, f64::max);
            tied.clear();
            tied.extend((0..n_bs).filter(|&n| h.get(n, k) - mu[n] == best));
            tied[k % tied.len()]
        })
        .collect()
}

/// `sum_k max_n (h_nk - mu_n) + sum_n exp(mu_n - 1)`.
pub fn dual_value(h: &Matrix, mu: &[f64]) -> f64 {
    let users: f64 = (0..h.cols())
        .map(|k| {
            (0..h.rows())
                .map(|n| h.get(n, k) - mu[n])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    users + mu.iter().map(|m| (m - 1.0).exp()).sum::<f64>()
}

/// Subgradient iteration on the multipliers for an arbitrary utility matrix.
///
/// Every iterate's user step is a feasible integral association; which one
/// is returned is governed by `cfg.primal_recovery`.
pub fn solve_dual(h: &Matrix, cfg: &SolverConfig) -> Result<(Association, DualTrace)> {
    cfg.validate()?;
    let (n_bs, k_users) = (h.rows(), h.cols());
    let mut mu = match cfg.mu_init {
        MuInit::LogK => vec![(k_users.max(1) as f64).ln(); n_bs],
        MuInit::Zeros => vec![0.0; n_bs],
    };
    let mut trace = DualTrace::default();
    let mut kept: Option<(Association, f64)> = None;
    for t in 0..cfg.max_iter_eeauf {
        let x = Association::new(user_step(h, &mu), n_bs);
        let supply: Vec<f64> = mu.iter().map(|m| (m - 1.0).exp()).collect();
        let residual: Vec<f64> = supply
            .iter()
            .zip(&x.loads)
            .map(|(&y, &d)| y - d as f64)
            .collect();
        let primal = load_penalised(&x, h);
        trace.dual_values.push(dual_value(h, &mu));
        trace.primal_values.push(primal);
        trace.residuals.push(residual.iter().map(|r| r.abs()).collect());
        trace.mu_history.push(mu.clone());
        trace.y_history.push(supply.clone());
        trace.iterations += 1;
        trace.mu = mu.clone();
        trace.y_cont = supply;

        let replace = match (&kept, cfg.primal_recovery) {
            (None, _) | (_, PrimalRecovery::LastIterate) => true,
            (Some((_, best)), PrimalRecovery::BestIterate) => primal > *best,
        };
        if replace {
            kept = Some((x, primal));
            trace.returned_iteration = t;
        }

        let worst = residual.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
        if worst <= cfg.convergence_tol * k_users as f64 {
            trace.converged = true;
            break;
        }
        for (m, r) in mu.iter_mut().zip(&residual) {
            *m -= cfg.stepsize * r;
        }
    }
    let (x, _) = kept.expect("at least one iteration runs");
    Ok((x, trace))
}

/// Fairness-aware energy-efficient association.
pub fn solve_eeauf(
    links: &LinkTable,
    circuit_power_mw: f64,
    cfg: &SolverConfig,
) -> Result<(Association, DualTrace)> {
    solve_dual(&eeauf_utilities(links, circuit_power_mw)?, cfg)
}

/// Log effective-rate association (the power term dropped).
pub fn solve_auf(links: &LinkTable, cfg: &SolverConfig) -> Result<(Association, DualTrace)> {
    solve_dual(&auf_utilities(links)?, cfg)
}
