//! Exhaustive search over all `N^K` single-BS associations. Used as the
//! reference optimum for the other solvers on small instances.

use super::{load_penalised, user_ee, Association};
use crate::channel::{LinkTable, Matrix};
use crate::error::{Error, Result};

/// Largest `N^K` the enumeration accepts.
pub const MAX_ENUMERATION: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    WholeEe,
    SumEe,
    SumRate,
    EeaufUtility,
    AufUtility,
}

/// Returns a maximiser (the lexicographically smallest on ties) and its value.
pub fn brute_force(
    links: &LinkTable,
    objective: Objective,
    circuit_power_mw: f64,
) -> Result<(Association, f64)> {
    let (n_bs, k_users) = (links.num_bs(), links.num_users());
    let too_large = Error::InstanceTooLarge {
        bs: n_bs,
        users: k_users,
    };
    let count = (n_bs as u64)
        .checked_pow(k_users as u32)
        .ok_or(too_large)?;
    if count > MAX_ENUMERATION {
        return Err(Error::InstanceTooLarge {
            bs: n_bs,
            users: k_users,
        });
    }

    let utilities: Option<Matrix> = match objective {
        Objective::EeaufUtility => Some(super::eeauf_utilities(links, circuit_power_mw)?),
        Objective::AufUtility => Some(super::auf_utilities(links)?),
        _ => None,
    };
    let evaluate = |assoc: &Association| -> f64 {
        match objective {
            Objective::WholeEe => {
                let (num, den) = super::whole_ee_parts(assoc, links, circuit_power_mw);
                num / den
            }
            Objective::SumEe => assoc
                .links()
                .map(|(k, n)| user_ee(links, n, k, circuit_power_mw))
                .sum(),
            Objective::SumRate => assoc.links().map(|(k, n)| links.rate.get(n, k)).sum(),
            Objective::EeaufUtility | Objective::AufUtility => {
                load_penalised(assoc, utilities.as_ref().expect("utilities computed above"))
            }
        }
    };

    // odometer with user 0 as the most significant digit: lexicographic order
    let mut digits = vec![0usize; k_users];
    let mut best: Option<(Association, f64)> = None;
    loop {
        let candidate = Association::new(digits.clone(), n_bs);
        let value = evaluate(&candidate);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((candidate, value));
        }
        let mut pos = k_users;
        loop {
            if pos == 0 {
                return Ok(best.expect("at least one assignment enumerated"));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < n_bs {
                break;
            }
            digits[pos] = 0;
        }
    }
}
