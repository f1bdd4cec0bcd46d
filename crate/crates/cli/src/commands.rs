use netlearn::asymptotics::{equilibrium_informed, layered_rate, member_rate_rows, socially_informed};
use netlearn::game::{enumerate_equilibria, exit_regime, propagate, round_bound, solve_equilibrium, ExitRegime, RoundBound};
use netlearn::learning::{classify, classify_multi, learning_score, network_free_bounds, NetworkFreeVerdict};
use netlearn::montecarlo::{estimate_learning, trace_trials, SimulationConfig, SimulationReport};
use netlearn::{DirectedNetwork, EquilibriumResult, GameParams, LearningVerdict, SolveFrom, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Loaded, SolverChoice, SolverConfig};
use crate::output::Artifacts;
use crate::CliError;

pub fn equilibria(params: &GameParams, net: &DirectedNetwork, solver: &SolverConfig) -> netlearn::Result<Vec<EquilibriumResult>> {
    Ok(match solver.method {
        SolverChoice::Bottom => vec![solve_equilibrium(params, net, SolveFrom::Bottom)?],
        SolverChoice::Top => vec![solve_equilibrium(params, net, SolveFrom::Top)?],
        SolverChoice::Both => {
            let low = solve_equilibrium(params, net, SolveFrom::Bottom)?;
            let high = solve_equilibrium(params, net, SolveFrom::Top)?;
            if low.profile == high.profile {
                vec![low]
            } else {
                vec![low, high]
            }
        }
        SolverChoice::Enumerate => enumerate_equilibria(params, net, solver.budget)?,
    })
}

/// Equilibria of every member, solved in parallel.
fn solve_members(loaded: &Loaded) -> Result<Vec<(GameParams, Vec<EquilibriumResult>)>, CliError> {
    let solved: netlearn::Result<Vec<_>> = loaded
        .society
        .networks()
        .par_iter()
        .map(|net| {
            let params = loaded.schedule.at(net.n())?;
            let eqs = equilibria(&params, net, &loaded.config.solver)?;
            if eqs.is_empty() {
                return Err(netlearn::Error::Internal(format!("no pure equilibrium found for n={}", net.n())));
            }
            Ok((params, eqs))
        })
        .collect();
    Ok(solved?)
}

/// The equilibrium with the lowest learning score.
fn worst<'a>(params: &GameParams, eqs: &'a [EquilibriumResult], eps: f64) -> netlearn::Result<&'a EquilibriumResult> {
    let mut best = (&eqs[0], f64::INFINITY);
    for eq in eqs {
        let s = learning_score(params, &eq.counts, eps)?;
        if s < best.1 {
            best = (eq, s);
        }
    }
    Ok(best.0)
}

#[derive(Serialize)]
struct SolvedMember<'a> {
    n: usize,
    params: GameParams,
    round_bound: RoundBound,
    equilibria: &'a [EquilibriumResult],
}

#[derive(Serialize)]
struct PayoffRow {
    n: usize,
    equilibrium: usize,
    agent: usize,
    exit: usize,
    signals: usize,
    payoff: f64,
    chosen: bool,
}

pub fn solve(loaded: &Loaded, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let solved = solve_members(loaded)?;
    let mut members = Vec::new();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (net, (params, eqs)) in loaded.society.networks().iter().zip(&solved) {
        for (e, eq) in eqs.iter().enumerate() {
            let prop = propagate(net, &eq.profile)?;
            for agent in 1..=net.n() {
                let max = net.max_path_length(agent)?;
                for exit in 0..=max {
                    let signals = (1..=net.n()).filter(|&j| prop.arrival(j, agent).is_some_and(|t| t <= exit)).count();
                    rows.push(PayoffRow {
                        n: net.n(),
                        equilibrium: e,
                        agent,
                        exit,
                        signals,
                        payoff: params.payoff_value(exit, signals),
                        chosen: exit == eq.profile.exit_of(agent),
                    });
                }
            }
            summary.push(format!("n={}: {:?} exits {:?} counts {:?}", net.n(), eq.method, eq.profile.exits(), eq.counts));
        }
        members.push(SolvedMember { n: net.n(), params: *params, round_bound: round_bound(params), equilibria: eqs });
    }
    out.json("equilibria.json", &members)?;
    out.csv("payoffs.csv", &rows)?;
    Ok(summary)
}

#[derive(Serialize)]
struct MemberVerdict {
    n: usize,
    equilibria: usize,
    #[serde(flatten)]
    verdict: LearningVerdict,
    network_free: NetworkFreeVerdict,
}

pub fn learn(loaded: &Loaded, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let tol = loaded.tolerances()?;
    let solved = solve_members(loaded)?;
    let mut verdicts = Vec::new();
    let mut summary = Vec::new();
    for (net, (params, eqs)) in loaded.society.networks().iter().zip(&solved) {
        let verdict = classify_multi(params, &tol, eqs)?;
        let network_free = network_free_bounds(params, net.n(), &tol)?;
        summary.push(format!("n={}: {} (score {:.12})", net.n(), verdict.verdict.as_str(), verdict.score));
        verdicts.push(MemberVerdict { n: net.n(), equilibria: eqs.len(), verdict, network_free });
    }
    out.json("verdicts.json", &verdicts)?;
    Ok(summary)
}

#[derive(Serialize)]
struct LayeredRow {
    n: usize,
    r_n: f64,
}

pub fn rates(loaded: &Loaded, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    loaded.require_society("rates")?;
    let tol = loaded.tolerances()?;
    let solved = solve_members(loaded)?;
    let mut counts = Vec::new();
    for (net, (params, eqs)) in loaded.society.networks().iter().zip(&solved) {
        counts.push((net.n(), *params, worst(params, eqs, tol.eps())?.counts.clone()));
    }
    let rows = member_rate_rows(&counts, tol.eps(), tol.epsbar())?;
    out.csv("rates.csv", &rows)?;
    let mut summary: Vec<String> =
        rows.iter().map(|r| format!("n={}: delta_exact {:.12e}, delta_minilower {:.12e}", r.n, r.delta_exact, r.delta_minilower)).collect();
    if let Some(layers) = &loaded.config.layers {
        let layered: Vec<LayeredRow> =
            layered_rate(&loaded.config.params, layers, tol.eps()).into_iter().map(|(n, r_n)| LayeredRow { n, r_n }).collect();
        out.csv("layered.csv", &layered)?;
        summary.push(format!("layered rate at {} sizes", layered.len()));
    }
    Ok(summary)
}

#[derive(Serialize)]
struct MemberSimulation {
    n: usize,
    score: f64,
    /// `1 - S/(1 - epsbar)` and `(1 - S)/epsbar`
    markov_bounds: (f64, f64),
    verdict: LearningVerdict,
    report: SimulationReport,
}

#[derive(Serialize)]
struct TraceLine {
    n: usize,
    trial: u64,
    theta: f64,
    wrong_fraction: f64,
    failed: bool,
}

pub fn mc(loaded: &Loaded, cfg: &SimulationConfig, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let tol: Tolerances = loaded.tolerances()?;
    let solved = solve_members(loaded)?;
    let mut sims = Vec::new();
    let mut trace = Vec::new();
    let mut summary = Vec::new();
    for (net, (params, eqs)) in loaded.society.networks().iter().zip(&solved) {
        let eq = worst(params, eqs, tol.eps())?;
        let report = estimate_learning(params, net, eq, &tol, cfg)?;
        let score = learning_score(params, &eq.counts, tol.eps())?;
        let verdict = classify(score, &tol);
        summary.push(format!(
            "n={}: p_hat {:.6} +/- {:.6} ({}), verdict {}",
            net.n(),
            report.p_hat,
            report.ci_halfwidth,
            cfg.trials(),
            verdict.verdict.as_str()
        ));
        if loaded.config.output.trace_trials > 0 {
            for row in trace_trials(params, net, eq, &tol, cfg, loaded.config.output.trace_trials)? {
                trace.push(TraceLine {
                    n: net.n(),
                    trial: row.trial,
                    theta: row.theta,
                    wrong_fraction: row.wrong_fraction,
                    failed: row.failed,
                });
            }
        }
        sims.push(MemberSimulation {
            n: net.n(),
            score,
            markov_bounds: (1.0 - score / (1.0 - tol.epsbar()), (1.0 - score) / tol.epsbar()),
            verdict,
            report,
        });
    }
    out.json("mc_report.json", &sims)?;
    if !trace.is_empty() {
        out.csv("trace.csv", &trace)?;
    }
    Ok(summary)
}

#[derive(Serialize)]
struct SocietyRow {
    n: usize,
    ei_fraction: f64,
    si_fraction: f64,
}

#[derive(Serialize)]
struct AgentRegime {
    agent: usize,
    regime: ExitRegime,
}

pub fn society(loaded: &Loaded, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    loaded.require_society("society")?;
    let from = match loaded.config.solver.method {
        SolverChoice::Top => SolveFrom::Top,
        _ => SolveFrom::Bottom,
    };
    let proxy = &loaded.config.proxy;
    let ei = equilibrium_informed(&loaded.society, &loaded.schedule, proxy, from)?;
    let si = socially_informed(&loaded.society, &loaded.schedule, proxy)?;
    let largest = loaded.society.largest();
    let params = loaded.schedule.at(largest.n())?;
    let regimes = (1..=largest.n())
        .map(|agent| Ok(AgentRegime { agent, regime: exit_regime(&params, &loaded.society, agent, proxy)? }))
        .collect::<netlearn::Result<Vec<_>>>()?;
    let rows: Vec<SocietyRow> =
        ei.members.iter().zip(&si.fractions).map(|(m, &(n, si_fraction))| SocietyRow { n, ei_fraction: m.fraction, si_fraction }).collect();
    let summary = rows.iter().map(|r| format!("n={}: EI {:.4}, SI {:.4}", r.n, r.ei_fraction, r.si_fraction)).collect();
    out.csv("society.csv", &rows)?;
    out.json(
        "society.json",
        &serde_json::json!({
            "equilibrium_informed": ei,
            "socially_informed": si,
            "regimes": regimes,
        }),
    )?;
    Ok(summary)
}
