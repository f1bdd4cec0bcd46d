//! Simulation of the Gaussian world under a fixed equilibrium.
//!
//! Trial `t` draws from a ChaCha8 stream keyed on `(master_seed, t)`: first
//! the state, then one noise term per agent in agent order. Trials are
//! grouped in fixed-size blocks whose tallies are merged in block order, so
//! a report does not depend on how many threads ran it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::game::{propagate, EquilibriumResult, GameParams};
use crate::learning::Tolerances;
use crate::network::DirectedNetwork;

const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSimulationConfig", into = "RawSimulationConfig")]
pub struct SimulationConfig {
    trials: u64,
    master_seed: u64,
    confidence_z: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RawSimulationConfig {
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default = "default_z")]
    pub confidence_z: f64,
}

fn default_z() -> f64 {
    3.0
}

impl TryFrom<RawSimulationConfig> for SimulationConfig {
    type Error = Error;

    fn try_from(raw: RawSimulationConfig) -> Result<Self> {
        SimulationConfig::new(raw.trials, raw.master_seed, raw.confidence_z)
    }
}

impl From<SimulationConfig> for RawSimulationConfig {
    fn from(c: SimulationConfig) -> Self {
        RawSimulationConfig { trials: c.trials, master_seed: c.master_seed, confidence_z: c.confidence_z }
    }
}

impl SimulationConfig {
    pub fn new(trials: u64, master_seed: u64, confidence_z: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if !(confidence_z > 0.0 && confidence_z.is_finite()) {
            return Err(Error::input(format!("confidence_z must be positive, got {confidence_z}")));
        }
        Ok(SimulationConfig { trials, master_seed, confidence_z })
    }

    pub fn with_defaults(trials: u64, master_seed: u64) -> Result<Self> {
        SimulationConfig::new(trials, master_seed, default_z())
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn confidence_z(&self) -> f64 {
        self.confidence_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Normal,
    ClopperPearson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub master_seed: u64,
    /// Share of trials in which at least a fraction `epsbar` of agents
    /// missed the state by more than `eps`.
    pub p_hat: f64,
    pub ci_halfwidth: f64,
    pub ci_method: CiMethod,
    /// Share of trials in which agent `i` landed within `eps` of the state.
    pub per_agent_accuracy: Vec<f64>,
    /// Mean of `(x_i - theta)^2` per agent.
    pub per_agent_mse: Vec<f64>,
}

/// One row of the optional per-trial trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub trial: u64,
    pub theta: f64,
    pub wrong_fraction: f64,
    pub failed: bool,
}

/// Generator for trial `trial` of a run seeded with `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}

fn draw_world(params: &GameParams, rng: &mut ChaCha8Rng, signals: &mut [f64]) -> f64 {
    let theta_sd = params.rho().sqrt().recip();
    let noise_sd = params.rhobar().sqrt().recip();
    let theta = theta_sd * rng.sample::<f64, _>(StandardNormal);
    for s in signals.iter_mut() {
        *s = theta + noise_sd * rng.sample::<f64, _>(StandardNormal);
    }
    theta
}

/// State `theta ~ N(0, 1/rho)` and signals `s_i = theta + z_i` with
/// `z_i ~ N(0, 1/rhobar)`, determined by `seed`.
pub fn sample_world(params: &GameParams, n: usize, seed: u64) -> (f64, Vec<f64>) {
    let mut signals = vec![0.0; n];
    let theta = draw_world(params, &mut trial_rng(seed, 0), &mut signals);
    (theta, signals)
}

/// Posterior mean of the state given the listed signal values:
/// `rhobar * sum(s) / (rho + k rhobar)`.
pub fn posterior_action(params: &GameParams, signals: &[f64]) -> Result<f64> {
    if signals.is_empty() {
        return Err(Error::input("posterior needs at least one signal"));
    }
    Ok(params.rhobar() * signals.iter().sum::<f64>() / params.posterior_precision(signals.len()))
}

/// Information sets (0-based sources) each agent holds at her equilibrium exit.
fn information_sets(net: &DirectedNetwork, eq: &EquilibriumResult) -> Result<Vec<Vec<usize>>> {
    let prop = propagate(net, &eq.profile)?;
    if prop.counts() != eq.counts.as_slice() {
        return Err(Error::input("equilibrium counts do not match the network"));
    }
    Ok((1..=net.n()).map(|i| prop.information_set(i).into_iter().map(|j| j - 1).collect()).collect())
}

#[derive(Clone)]
struct Tally {
    failures: u64,
    hits: Vec<u64>,
    sq_err: Vec<f64>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally { failures: 0, hits: vec![0; n], sq_err: vec![0.0; n] }
    }

    fn merge(&mut self, other: &Tally) {
        self.failures += other.failures;
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        for (a, b) in self.sq_err.iter_mut().zip(&other.sq_err) {
            *a += b;
        }
    }
}

struct Simulator<'a> {
    params: &'a GameParams,
    sets: Vec<Vec<usize>>,
    eps: f64,
    epsbar: f64,
    master_seed: u64,
}

impl Simulator<'_> {
    /// Runs one trial, returning `(theta, wrong_fraction, failed)`.
    fn trial(&self, t: u64, signals: &mut [f64], tally: &mut Tally) -> (f64, f64, bool) {
        let mut rng = trial_rng(self.master_seed, t);
        let theta = draw_world(self.params, &mut rng, signals);
        let mut wrong = 0usize;
        for (i, set) in self.sets.iter().enumerate() {
            let sum: f64 = set.iter().map(|&j| signals[j]).sum();
            let x = self.params.rhobar() * sum / self.params.posterior_precision(set.len());
            let err = x - theta;
            tally.sq_err[i] += err * err;
            if err.abs() <= self.eps {
                tally.hits[i] += 1;
            } else {
                wrong += 1;
            }
        }
        let fraction = wrong as f64 / self.sets.len() as f64;
        let failed = fraction >= self.epsbar;
        tally.failures += failed as u64;
        (theta, fraction, failed)
    }

    fn block(&self, start: u64, end: u64) -> Tally {
        let n = self.sets.len();
        let mut tally = Tally::new(n);
        let mut signals = vec![0.0; n];
        for t in start..end {
            self.trial(t, &mut signals, &mut tally);
        }
        tally
    }
}

/// Half-width of the confidence interval around `p_hat`. Falls back to the
/// exact binomial interval at the same coverage when fewer than ten
/// failures are expected.
pub fn confidence_halfwidth(failures: u64, trials: u64, z: f64) -> (f64, CiMethod) {
    let p = failures as f64 / trials as f64;
    if p * trials as f64 >= 10.0 && failures < trials {
        return ((z * (p * (1.0 - p) / trials as f64).sqrt()), CiMethod::Normal);
    }
    let tail = Normal::standard().sf(z);
    let (x, t) = (failures as f64, trials as f64);
    let lower = if failures == 0 { 0.0 } else { Beta::new(x, t - x + 1.0).map(|b| b.inverse_cdf(tail)).unwrap_or(0.0) };
    let upper = if failures == trials { 1.0 } else { Beta::new(x + 1.0, t - x).map(|b| b.inverse_cdf(1.0 - tail)).unwrap_or(1.0) };
    ((p - lower).max(upper - p), CiMethod::ClopperPearson)
}

/// Estimates the probability that at least a fraction `epsbar` of agents
/// misses the state by more than `eps`, with every agent acting on exactly
/// the signals she holds in `eq`.
pub fn estimate_learning(
    params: &GameParams,
    net: &DirectedNetwork,
    eq: &EquilibriumResult,
    tol: &Tolerances,
    cfg: &SimulationConfig,
) -> Result<SimulationReport> {
    let sim = Simulator { params, sets: information_sets(net, eq)?, eps: tol.eps(), epsbar: tol.epsbar(), master_seed: cfg.master_seed };
    let blocks = cfg.trials.div_ceil(BLOCK);
    let tallies: Vec<Tally> = (0..blocks).into_par_iter().map(|b| sim.block(b * BLOCK, ((b + 1) * BLOCK).min(cfg.trials))).collect();
    let mut total = Tally::new(net.n());
    for t in &tallies {
        total.merge(t);
    }
    let trials = cfg.trials as f64;
    let (ci_halfwidth, ci_method) = confidence_halfwidth(total.failures, cfg.trials, cfg.confidence_z);
    Ok(SimulationReport {
        trials: cfg.trials,
        master_seed: cfg.master_seed,
        p_hat: total.failures as f64 / trials,
        ci_halfwidth,
        ci_method,
        per_agent_accuracy: total.hits.iter().map(|&h| h as f64 / trials).collect(),
        per_agent_mse: total.sq_err.iter().map(|&s| s / trials).collect(),
    })
}

/// Replays the first `count` trials of the run described by `cfg`.
pub fn trace_trials(
    params: &GameParams,
    net: &DirectedNetwork,
    eq: &EquilibriumResult,
    tol: &Tolerances,
    cfg: &SimulationConfig,
    count: u64,
) -> Result<Vec<TraceRow>> {
    let sim = Simulator { params, sets: information_sets(net, eq)?, eps: tol.eps(), epsbar: tol.epsbar(), master_seed: cfg.master_seed };
    let mut tally = Tally::new(net.n());
    let mut signals = vec![0.0; net.n()];
    Ok((0..count.min(cfg.trials))
        .map(|trial| {
            let (theta, wrong_fraction, failed) = sim.trial(trial, &mut signals, &mut tally);
            TraceRow { trial, theta, wrong_fraction, failed }
        })
        .collect())
}
