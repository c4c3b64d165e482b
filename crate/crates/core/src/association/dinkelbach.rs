//! Whole energy-efficiency maximisation by parametric (Dinkelbach) iteration.
//!
//! For a fixed ratio `gamma` the subtractive problem
//! `max_x E1(x) - gamma * E2(x)` separates over users, so each user picks the
//! BS maximising `r_nk - gamma * p_nk`. The ratio is then reset to the
//! whole EE of that association until it stops moving.

use super::{per_user_argmax, whole_ee_parts, Association, SolverConfig};
use crate::channel::LinkTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DinkelbachTrace {
    /// `gamma^0, gamma^1, ...`; one longer than `f_values`.
    pub gamma_sequence: Vec<f64>,
    /// `F(gamma^t)` evaluated at the exact inner maximiser.
    pub f_values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl DinkelbachTrace {
    pub fn final_gamma(&self) -> f64 {
        *self.gamma_sequence.last().expect("trace holds the initial gamma")
    }

    /// `iteration,gamma,f_value` columns; the last row has no F entry.
    pub fn to_columns(&self) -> String {
        let mut out = String::from("iteration,gamma,f_value\n");
        for (t, g) in self.gamma_sequence.iter().enumerate() {
            match self.f_values.get(t) {
                Some(f) => out.push_str(&format!("{t},{g},{f}\n")),
                None => out.push_str(&format!("{t},{g},\n")),
            }
        }
        out
    }
}

/// Exact maximiser of `sum_k (r_nk - gamma p_nk)` over single-BS associations.
pub fn dinkelbach_inner(links: &LinkTable, gamma: f64) -> Association {
    per_user_argmax(links, |n, k| links.rate.get(n, k) - gamma * links.tx_power_mw.get(n, k))
}

/// `F(gamma) = max_x E1(x) - gamma E2(x)`, together with its maximiser.
pub fn f_value(links: &LinkTable, circuit_power_mw: f64, gamma: f64) -> (f64, Association) {
    let x = dinkelbach_inner(links, gamma);
    let (e1, e2) = whole_ee_parts(&x, links, circuit_power_mw);
    (e1 - gamma * e2, x)
}

/// Stops once `|gamma^{t+1} - gamma^t| <= tol * gamma^{t+1}` or after
/// `max_iter_amwee` inner solves. Hitting the cap is reported through
/// `trace.converged`, not as an error.
pub fn solve_amwee(
    links: &LinkTable,
    circuit_power_mw: f64,
    cfg: &SolverConfig,
) -> Result<(Association, DinkelbachTrace)> {
    cfg.validate()?;
    let mut gamma = cfg.gamma_init;
    let mut trace = DinkelbachTrace {
        gamma_sequence: vec![gamma],
        ..Default::default()
    };
    let mut current = None;
    for _ in 0..cfg.max_iter_amwee {
        let x = dinkelbach_inner(links, gamma);
        let (e1, e2) = whole_ee_parts(&x, links, circuit_power_mw);
        if e2 == 0.0 {
            return Err(Error::ZeroDenominator);
        }
        let next = e1 / e2;
        trace.f_values.push(e1 - gamma * e2);
        trace.gamma_sequence.push(next);
        trace.iterations += 1;
        current = Some(x);
        let step = (next - gamma).abs();
        gamma = next;
        if step <= cfg.convergence_tol * next.abs() {
            trace.converged = true;
            break;
        }
    }
    let x = current.expect("at least one iteration runs");
    Ok((x, trace))
}
