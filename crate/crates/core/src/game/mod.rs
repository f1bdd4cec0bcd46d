//! The information exchange game played on a [`DirectedNetwork`].
//!
//! Each agent picks an exit round `l_i`. Until she exits she absorbs whatever
//! her in-neighbours hold; afterwards she keeps relaying but stops listening.
//! Her payoff is `rbar^l_i * (psi - 1 / (rho + rhobar * k_i))`, where `k_i` is
//! the number of distinct signals she holds at exit.

mod equilibrium;
mod propagation;
mod regime;

pub use equilibrium::{
    best_response, check_nonnegative_payoff, enumerate_equilibria, is_equilibrium, solve_equilibrium, EquilibriumResult, SolveFrom,
    SolveMethod, TieBreak, DEFAULT_ENUMERATION_BUDGET,
};
pub use propagation::{propagate, PropagationResult, NEVER};
pub use regime::{exit_regime, round_bound, ExitRegime, RoundBound};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::DirectedNetwork;

/// Game scalars: prior precision `rho`, signal precision `rhobar`,
/// information sensitiveness `psi`, Poisson rate `lambda` and discount rate `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GameParams {
    rho: f64,
    rhobar: f64,
    psi: f64,
    lambda: f64,
    r: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RawParams {
    pub rho: f64,
    pub rhobar: f64,
    pub psi: f64,
    pub lambda: f64,
    pub r: f64,
}

impl TryFrom<RawParams> for GameParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        GameParams::new(raw.rho, raw.rhobar, raw.psi, raw.lambda, raw.r)
    }
}

impl From<GameParams> for RawParams {
    fn from(p: GameParams) -> Self {
        RawParams { rho: p.rho, rhobar: p.rhobar, psi: p.psi, lambda: p.lambda, r: p.r }
    }
}

impl GameParams {
    pub fn new(rho: f64, rhobar: f64, psi: f64, lambda: f64, r: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("rhobar", rhobar), ("lambda", lambda), ("r", r)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if !psi.is_finite() {
            return Err(Error::input(format!("psi must be finite, got {psi}")));
        }
        Ok(GameParams { rho, rhobar, psi, lambda, r })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rhobar(&self) -> f64 {
        self.rhobar
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Per-round discount factor `lambda / (lambda + r)`.
    pub fn rbar(&self) -> f64 {
        self.lambda / (self.lambda + self.r)
    }

    /// Same parameters with a different `psi`.
    pub fn with_psi(&self, psi: f64) -> Result<Self> {
        GameParams::new(self.rho, self.rhobar, psi, self.lambda, self.r)
    }

    /// Posterior precision after observing `k` distinct signals.
    pub fn posterior_precision(&self, k: usize) -> f64 {
        self.rho + self.rhobar * k as f64
    }

    /// Payoff of exiting after `rounds` rounds holding `signals` signals.
    pub fn payoff_value(&self, rounds: usize, signals: usize) -> f64 {
        self.rbar().powi(rounds as i32) * (self.psi - 1.0 / self.posterior_precision(signals))
    }
}

/// Exit round for every agent, in agent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<usize>);

impl StrategyProfile {
    /// Checks length and `0 <= l_i <= (L_i)_max` against `net`.
    pub fn new(net: &DirectedNetwork, exits: Vec<usize>) -> Result<Self> {
        if exits.len() != net.n() {
            return Err(Error::input(format!("profile has {} entries but the network has {} agents", exits.len(), net.n())));
        }
        let maxima = net.max_path_lengths();
        if let Some((idx, (&l, &max))) = exits.iter().zip(&maxima).enumerate().find(|(_, (l, max))| l > max) {
            return Err(Error::input(format!("agent {} exits at round {l} but can wait at most {max} rounds", idx + 1)));
        }
        Ok(StrategyProfile(exits))
    }

    /// Everybody exits immediately.
    pub fn zeros(net: &DirectedNetwork) -> Self {
        StrategyProfile(vec![0; net.n()])
    }

    /// Everybody waits as long as the network allows.
    pub fn maximal(net: &DirectedNetwork) -> Self {
        StrategyProfile(net.max_path_lengths())
    }

    pub(crate) fn from_vec_unchecked(exits: Vec<usize>) -> Self {
        StrategyProfile(exits)
    }

    pub fn exits(&self) -> &[usize] {
        &self.0
    }

    /// Exit round of the 1-based agent `i`.
    pub fn exit_of(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &StrategyProfile) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub(crate) fn set(&mut self, idx: usize, l: usize) {
        self.0[idx] = l;
    }
}

impl From<StrategyProfile> for Vec<usize> {
    fn from(p: StrategyProfile) -> Self {
        p.0
    }
}

/// `U_i` for the 1-based agent `i` under `profile`, given its propagation.
pub fn payoff(params: &GameParams, i: usize, profile: &StrategyProfile, prop: &PropagationResult) -> Result<f64> {
    if i == 0 || i > profile.len() || profile.len() != prop.n() {
        return Err(Error::input(format!("agent {i} is not part of this profile")));
    }
    Ok(params.payoff_value(profile.exit_of(i), prop.counts()[i - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::four_agent_example;

    fn example_params() -> GameParams {
        GameParams::new(0.5, 0.5, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn params_validate_and_derive_rbar() {
        assert!(GameParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GameParams::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GameParams::new(1.0, 1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(GameParams::new(1.0, 1.0, -3.0, 1.0, 1.0).is_ok());
        let p = GameParams::new(1.0, 1.0, 1.0, 3.0, 1.0).unwrap();
        assert_eq!(p.rbar(), 0.75);
        let json = serde_json::to_string(&p).unwrap();
        let back: GameParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<GameParams>(r#"{"rho":1,"rhobar":1,"psi":1,"lambda":0,"r":1}"#).is_err());
    }

    #[test]
    fn payoff_matrix_cells() {
        let net = four_agent_example();
        let params = example_params();
        let cell = |l1: usize, l3: usize| {
            let profile = StrategyProfile::new(&net, vec![l1, 0, l3, 0]).unwrap();
            let prop = propagate(&net, &profile).unwrap();
            (payoff(&params, 1, &profile, &prop).unwrap(), payoff(&params, 3, &profile, &prop).unwrap())
        };
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        let (u1, u3) = cell(1, 1);
        assert!(close(u1, 0.25) && close(u3, 1.0 / 6.0));
        let (u1, _) = cell(2, 1);
        assert!(close(u1, 3.0 / 20.0));
        let (u1, u3) = cell(0, 0);
        assert!(close(u1, 0.0) && close(u3, 0.0));
    }

    #[test]
    fn immediate_exit_payoff() {
        let p = GameParams::new(0.7, 1.3, 2.0, 1.0, 0.5).unwrap();
        assert_eq!(p.payoff_value(0, 1), 2.0 - 1.0 / 2.0);
    }

    #[test]
    fn profile_validation() {
        let net = four_agent_example();
        assert!(StrategyProfile::new(&net, vec![2, 0, 1, 0]).is_ok());
        assert!(StrategyProfile::new(&net, vec![3, 0, 1, 0]).is_err());
        assert!(StrategyProfile::new(&net, vec![0, 1, 0, 0]).is_err());
        assert!(StrategyProfile::new(&net, vec![0, 0, 0]).is_err());
        assert_eq!(StrategyProfile::maximal(&net).exits(), &[2, 0, 1, 0]);
    }
}
