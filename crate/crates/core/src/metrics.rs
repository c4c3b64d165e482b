//! Per-trial performance indices and their Monte-Carlo aggregation.

use crate::association::{evaluate_whole_ee, user_ee, Association};
use crate::channel::LinkTable;
use crate::error::{Error, Result};

pub const DEFAULT_TARGET_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// Mean achievable rate at the serving BS, bits/s/Hz.
    pub avg_rate: f64,
    /// Mean of `r / y_serving`.
    pub avg_effective_rate: f64,
    /// Mean per-user `r / (p + p_c)`.
    pub avg_user_ee: f64,
    pub whole_ee: f64,
    pub jain_index: f64,
    pub supported_ratio: f64,
}

impl MetricsReport {
    pub const FIELDS: [&'static str; 6] = [
        "avg_rate",
        "avg_effective_rate",
        "avg_user_ee",
        "whole_ee",
        "jain_index",
        "supported_ratio",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.avg_rate,
            self.avg_effective_rate,
            self.avg_user_ee,
            self.whole_ee,
            self.jain_index,
            self.supported_ratio,
        ]
    }

    pub fn from_values(v: [f64; 6]) -> Self {
        Self {
            avg_rate: v[0],
            avg_effective_rate: v[1],
            avg_user_ee: v[2],
            whole_ee: v[3],
            jain_index: v[4],
            supported_ratio: v[5],
        }
    }

    /// Range checks on every field; `num_bs` bounds the Jain index from below.
    pub fn check(&self, num_bs: usize) -> std::result::Result<(), String> {
        let eps = 1e-12;
        let lower = 1.0 / num_bs as f64;
        if !(self.jain_index >= lower - eps && self.jain_index <= 1.0 + eps) {
            return Err(format!("jain_index {} outside [{lower}, 1]", self.jain_index));
        }
        if !(0.0..=1.0).contains(&self.supported_ratio) {
            return Err(format!("supported_ratio {} outside [0, 1]", self.supported_ratio));
        }
        for (name, v) in Self::FIELDS.iter().zip(self.values()) {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} = {v} is not a finite non-negative value"));
            }
        }
        if self.avg_effective_rate > self.avg_rate * (1.0 + eps) {
            return Err("avg_effective_rate exceeds avg_rate".into());
        }
        Ok(())
    }
}

/// `(sum y)^2 / (N sum y^2)`.
pub fn jain_index(loads: &[f64]) -> Result<f64> {
    let sum: f64 = loads.iter().sum();
    let sum_sq: f64 = loads.iter().map(|y| y * y).sum();
    if sum_sq == 0.0 {
        return Err(Error::ZeroLoads);
    }
    Ok(sum * sum / (loads.len() as f64 * sum_sq))
}

/// Fraction of users whose serving-BS rate strictly exceeds `target_rate`.
pub fn supported_ratio(assoc: &Association, links: &LinkTable, target_rate: f64) -> f64 {
    let k = assoc.num_users();
    if k == 0 {
        return 0.0;
    }
    let supported = assoc
        .links()
        .filter(|&(user, n)| links.rate.get(n, user) > target_rate)
        .count();
    supported as f64 / k as f64
}

pub fn summarize(
    assoc: &Association,
    links: &LinkTable,
    circuit_power_mw: f64,
    target_rate: f64,
) -> Result<MetricsReport> {
    let k = assoc.num_users() as f64;
    let mut rate = 0.0;
    let mut effective = 0.0;
    let mut ee = 0.0;
    for (user, n) in assoc.links() {
        let r = links.rate.get(n, user);
        rate += r;
        effective += r / assoc.loads[n] as f64;
        ee += user_ee(links, n, user, circuit_power_mw);
    }
    let loads: Vec<f64> = assoc.loads.iter().map(|&y| y as f64).collect();
    Ok(MetricsReport {
        avg_rate: rate / k,
        avg_effective_rate: effective / k,
        avg_user_ee: ee / k,
        whole_ee: evaluate_whole_ee(assoc, links, circuit_power_mw)?,
        jain_index: jain_index(&loads)?,
        supported_ratio: supported_ratio(assoc, links, target_rate),
    })
}

/// Sample mean and (n - 1) standard deviation.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
