use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{propagate, GameParams, PropagationResult, StrategyProfile};
use crate::network::DirectedNetwork;

/// Largest profile space `enumerate_equilibria` walks by default.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Which maximiser a best response reports when several exit rounds tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    Smallest,
    Largest,
}

/// Starting point of iterated best response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveFrom {
    /// All agents exit immediately.
    Bottom,
    /// All agents wait as long as the network allows.
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    IteratedBrFromBottom,
    IteratedBrFromTop,
    BruteForce,
}

/// A pure Nash equilibrium together with what each agent ends up knowing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    pub counts: Vec<usize>,
    pub method: SolveMethod,
    pub payoff_nonnegative: Vec<bool>,
}

impl EquilibriumResult {
    fn build(params: &GameParams, net: &DirectedNetwork, profile: StrategyProfile, method: SolveMethod) -> Result<Self> {
        let prop = propagate(net, &profile)?;
        if !nash_on(params, net, &prop) {
            return Err(Error::internal(format!("profile {:?} is not a fixed point of best response", profile.exits())));
        }
        Ok(EquilibriumResult { counts: prop.counts().to_vec(), payoff_nonnegative: nonnegative_flags(params, net, &prop), profile, method })
    }

    /// Whether the regularity condition holds for every agent.
    pub fn payoff_nonnegative_all(&self) -> bool {
        self.payoff_nonnegative.iter().all(|&b| b)
    }
}

/// Picks an exit round for the 0-based agent `idx` from the arrival column
/// of a propagation in which only the other agents' exits matter.
fn best_from_column(params: &GameParams, prop: &PropagationResult, idx: usize, max_exit: usize, tie: TieBreak) -> usize {
    let mut per_round = vec![0usize; max_exit + 1];
    for t in prop.column(idx) {
        if (t as usize) <= max_exit {
            per_round[t as usize] += 1;
        }
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    let mut k = 0;
    for (l, fresh) in per_round.into_iter().enumerate() {
        k += fresh;
        let value = params.payoff_value(l, k);
        let better = match tie {
            TieBreak::Smallest => value > best_value,
            TieBreak::Largest => value >= best_value,
        };
        if better {
            best = l;
            best_value = value;
        }
    }
    best
}

/// Smallest exit round maximising agent `i`'s payoff against the other
/// entries of `profile` (its own entry is ignored).
pub fn best_response(params: &GameParams, net: &DirectedNetwork, i: usize, profile: &StrategyProfile) -> Result<usize> {
    best_response_with(params, net, i, profile, TieBreak::Smallest)
}

pub(crate) fn best_response_with(
    params: &GameParams,
    net: &DirectedNetwork,
    i: usize,
    profile: &StrategyProfile,
    tie: TieBreak,
) -> Result<usize> {
    let idx = net.check_agent(i)?;
    let prop = propagate(net, profile)?;
    Ok(best_from_column(params, &prop, idx, net.max_path_length_idx(idx), tie))
}

/// Nash check from one propagation: arrival columns do not depend on the
/// receiver's own exit, so every unilateral deviation can be scored from `prop`.
fn nash_on(params: &GameParams, net: &DirectedNetwork, prop: &PropagationResult) -> bool {
    let maxima = net.max_path_lengths();
    (0..net.n()).all(|idx| {
        let current = params.payoff_value(prop.exits()[idx], prop.counts()[idx]);
        (0..=maxima[idx]).all(|l| params.payoff_value(l, prop.count_if_exit_at(idx, l)) <= current)
    })
}

/// True when no agent can strictly gain by changing her exit round alone.
pub fn is_equilibrium(params: &GameParams, net: &DirectedNetwork, profile: &StrategyProfile) -> Result<bool> {
    let prop = propagate(net, profile)?;
    Ok(nash_on(params, net, &prop))
}

/// Iterated best response in ascending agent order until a sweep changes
/// nothing. From the bottom the smallest maximiser is used and iterates
/// only move up; from the top the largest maximiser is used and iterates
/// only move down. Either direction reaching the wrong way is reported as
/// an internal error, as is exceeding `sum (L_i)_max + 1` sweeps.
pub fn solve_equilibrium(params: &GameParams, net: &DirectedNetwork, from: SolveFrom) -> Result<EquilibriumResult> {
    let maxima = net.max_path_lengths();
    let (mut profile, tie, method) = match from {
        SolveFrom::Bottom => (StrategyProfile::zeros(net), TieBreak::Smallest, SolveMethod::IteratedBrFromBottom),
        SolveFrom::Top => (StrategyProfile::maximal(net), TieBreak::Largest, SolveMethod::IteratedBrFromTop),
    };
    let max_sweeps = maxima.iter().sum::<usize>() + 1;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::internal(format!("iterated best response did not settle within {max_sweeps} sweeps")));
        }
        let mut changed = false;
        for idx in 0..net.n() {
            if maxima[idx] == 0 {
                continue;
            }
            let prop = propagate(net, &profile)?;
            let next = best_from_column(params, &prop, idx, maxima[idx], tie);
            let current = profile.exits()[idx];
            let wrong_way = match from {
                SolveFrom::Bottom => next < current,
                SolveFrom::Top => next > current,
            };
            if wrong_way {
                return Err(Error::internal(format!(
                    "best response of agent {} moved from {current} to {next} against the sweep direction",
                    idx + 1
                )));
            }
            if next != current {
                profile.set(idx, next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    EquilibriumResult::build(params, net, profile, method)
}

/// Every pure equilibrium, by scanning the whole profile space. Refuses
/// with [`Error::Budget`] when `prod (1 + (L_i)_max)` exceeds `budget`.
pub fn enumerate_equilibria(params: &GameParams, net: &DirectedNetwork, budget: u128) -> Result<Vec<EquilibriumResult>> {
    let maxima = net.max_path_lengths();
    let mut size: u128 = 1;
    for &m in &maxima {
        size = size.saturating_mul(m as u128 + 1);
    }
    if size > budget {
        return Err(Error::Budget { size, budget });
    }

    let mut found = Vec::new();
    let mut exits = vec![0usize; net.n()];
    loop {
        let profile = StrategyProfile::from_vec_unchecked(exits.clone());
        let prop = propagate(net, &profile)?;
        if nash_on(params, net, &prop) {
            found.push(EquilibriumResult {
                counts: prop.counts().to_vec(),
                payoff_nonnegative: nonnegative_flags(params, net, &prop),
                profile,
                method: SolveMethod::BruteForce,
            });
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == exits.len() {
                return Ok(found);
            }
            if exits[pos] < maxima[pos] {
                exits[pos] += 1;
                break;
            }
            exits[pos] = 0;
            pos += 1;
        }
    }
}

fn nonnegative_flags(params: &GameParams, net: &DirectedNetwork, prop: &PropagationResult) -> Vec<bool> {
    (0..net.n())
        .map(|idx| {
            let k_max = prop.count_if_exit_at(idx, net.max_path_length_idx(idx));
            params.psi() * params.posterior_precision(k_max) >= 1.0
        })
        .collect()
}

/// Per agent: does `psi * (rho + rhobar * (k_i)_max) >= 1` hold, where
/// `(k_i)_max` is what agent `i` collects by waiting as long as possible
/// while everyone else plays `profile`.
pub fn check_nonnegative_payoff(params: &GameParams, net: &DirectedNetwork, profile: &StrategyProfile) -> Result<Vec<bool>> {
    let prop = propagate(net, profile)?;
    Ok(nonnegative_flags(params, net, &prop))
}
