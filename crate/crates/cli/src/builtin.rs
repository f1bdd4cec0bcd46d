//! Fixed worked examples with byte-stable text outputs. Values are printed
//! with 12 significant digits, well inside the accuracy of the error
//! function, so the text files are identical across runs and platforms.

use std::fmt::Write as _;

use netlearn::asymptotics::{binomial_monotonicity_check, member_rate_rows, RateRow};
use netlearn::game::{enumerate_equilibria, payoff, propagate, solve_equilibrium, DEFAULT_ENUMERATION_BUDGET};
use netlearn::learning::{classify, learning_score};
use netlearn::network::{four_agent_example, make_society, tree_layers};
use netlearn::{DirectedNetwork, EquilibriumResult, GameParams, Society, SocietyKind, SolveFrom, StrategyProfile, Tolerances};
use serde::Serialize;

use crate::output::Artifacts;
use crate::CliError;

fn params(rho: f64, rhobar: f64, psi: f64) -> netlearn::Result<GameParams> {
    GameParams::new(rho, rhobar, psi, 1.0, 1.0)
}

fn fixed(x: f64) -> String {
    format!("{x:.12}")
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// The 3x2 payoff table of agents 1 and 3 on the four-agent network.
pub fn payoff_matrix() -> netlearn::Result<String> {
    let p = params(0.5, 0.5, 1.0)?;
    let net = four_agent_example();
    let mut s = String::new();
    writeln!(s, "four-agent network, lambda = r, psi = 1, rho = rhobar = 1/2").unwrap();
    writeln!(s, "rows: agent 1 waits 0/1/2 rounds; columns: agent 3 waits 0/1 rounds").unwrap();
    writeln!(s, "cells: (payoff of agent 1, payoff of agent 3)").unwrap();
    writeln!(s, "{:<6}{:<34}l3=1", "", "l3=0").unwrap();
    for l1 in 0..=2 {
        write!(s, "{:<6}", format!("l1={l1}")).unwrap();
        for l3 in 0..=1 {
            let profile = StrategyProfile::new(&net, vec![l1, 0, l3, 0])?;
            let prop = propagate(&net, &profile)?;
            let cell = format!("({}, {})", fixed(payoff(&p, 1, &profile, &prop)?), fixed(payoff(&p, 3, &profile, &prop)?));
            if l3 == 0 {
                write!(s, "{cell:<34}").unwrap();
            } else {
                writeln!(s, "{cell}").unwrap();
            }
        }
    }
    Ok(s)
}

/// Comma-separated values with runs collapsed: `[0,0,0,1]` -> `0x3,1`.
fn join(v: &[usize]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let run = v[i..].iter().take_while(|&&x| x == v[i]).count();
        parts.push(if run == 1 { v[i].to_string() } else { format!("{}x{run}", v[i]) });
        i += run;
    }
    parts.join(",")
}

/// Disjoint complete groups of `n / groups` agents; aligned blocks nest as
/// `n` doubles, so the sequence keeps its links.
fn cliques(n: usize, groups: usize) -> netlearn::Result<DirectedNetwork> {
    let size = n / groups;
    let arcs = (0..groups).flat_map(|g| {
        let block = g * size + 1..=(g + 1) * size;
        block.clone().flat_map(move |j| block.clone().filter(move |&i| i != j).map(move |i| (j, i)))
    });
    DirectedNetwork::new(n, arcs)
}

struct Section {
    title: String,
    lines: Vec<String>,
}

#[derive(Serialize)]
struct MemberEquilibrium {
    n: usize,
    psi: f64,
    least: EquilibriumResult,
    greatest: EquilibriumResult,
}

fn solve_both(p: &GameParams, net: &DirectedNetwork) -> netlearn::Result<(EquilibriumResult, EquilibriumResult)> {
    Ok((solve_equilibrium(p, net, SolveFrom::Bottom)?, solve_equilibrium(p, net, SolveFrom::Top)?))
}

/// Solves every member with its own `psi`, records rates and returns text.
fn society_section(
    title: &str,
    society: &Society,
    psi_of: impl Fn(usize) -> f64,
    base: (f64, f64),
    tol: &Tolerances,
    csv_name: &str,
    out: &mut Artifacts,
    equilibria: &mut Vec<(String, Vec<MemberEquilibrium>)>,
) -> netlearn::Result<Section> {
    let mut lines = Vec::new();
    let mut solved = Vec::new();
    let mut members = Vec::new();
    for net in society.networks() {
        let n = net.n();
        let p = params(base.0, base.1, psi_of(n))?;
        let (least, greatest) = solve_both(&p, net)?;
        let score = learning_score(&p, &least.counts, tol.eps())?;
        let verdict = classify(score, tol);
        lines.push(format!(
            "n={n} psi={} exits=[{}] counts=[{}] extremal_equal={} score={} verdict={}",
            fixed(p.psi()),
            join(least.profile.exits()),
            join(&least.counts),
            least.profile == greatest.profile,
            fixed(score),
            verdict.verdict.as_str()
        ));
        solved.push((n, p, least.counts.clone()));
        members.push(MemberEquilibrium { n, psi: p.psi(), least, greatest });
    }
    let rows: Vec<RateRow> = member_rate_rows(&solved, tol.eps(), tol.epsbar())?;
    for r in &rows {
        lines.push(format!(
            "n={} delta_exact={} delta_minilower={} envelope={}",
            r.n,
            sci(r.delta_exact),
            sci(r.delta_minilower),
            sci(r.envelope)
        ));
    }
    out.csv(csv_name, &rows).map_err(|e| netlearn::Error::Internal(e.to_string()))?;
    equilibria.push((title.to_string(), members));
    Ok(Section { title: title.to_string(), lines })
}

pub fn run(out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let matrix = payoff_matrix()?;
    out.text("payoff_matrix.txt", matrix);

    let mut sections = Vec::new();
    let mut equilibria = Vec::new();

    let p = params(0.5, 0.5, 1.0)?;
    let net = four_agent_example();
    let all = enumerate_equilibria(&p, &net, DEFAULT_ENUMERATION_BUDGET)?;
    let (least, greatest) = solve_both(&p, &net)?;
    sections.push(Section {
        title: "four-agent network".into(),
        lines: vec![
            format!("equilibria found by enumeration: {}", all.len()),
            format!(
                "least=[{}] greatest=[{}] counts=[{}]",
                join(least.profile.exits()),
                join(greatest.profile.exits()),
                join(&least.counts)
            ),
        ],
    });
    equilibria.push(("four-agent network".into(), vec![MemberEquilibrium { n: 4, psi: 1.0, least, greatest }]));

    let strict = Tolerances::new(0.1, 0.1, 0.1)?;
    let rates_tol = Tolerances::new(1.0, 0.1, 0.1)?;
    let powers: Vec<usize> = (2..=8).map(|k| 1usize << k).collect();

    let iso = make_society(SocietyKind::Isolated, &powers[..5])?;
    sections.push(society_section("isolated agents", &iso, |_| 1.0, (1.0, 1.0), &strict, "isolated_rates.csv", out, &mut equilibria)?);

    let complete = make_society(SocietyKind::Complete, &powers)?;
    sections.push(society_section(
        "complete graphs",
        &complete,
        |_| 0.5,
        (1.0, 1.0),
        &rates_tol,
        "complete_rates.csv",
        out,
        &mut equilibria,
    )?);

    let quarter =
        Society::from_networks(SocietyKind::Custom, powers[1..].iter().map(|&n| cliques(n, 4)).collect::<netlearn::Result<Vec<_>>>()?)?;
    sections.push(society_section(
        "four disjoint cliques, k = n/4",
        &quarter,
        |_| 0.5,
        (1.0, 1.0),
        &rates_tol,
        "cliques_rates.csv",
        out,
        &mut equilibria,
    )?);

    let tree_sizes: Vec<usize> = (3..=7).map(|m| (1usize << m) - 1).collect();
    let layers = |n: usize| tree_layers(n).expect("tree size") as f64;
    let down = make_society(SocietyKind::BinomialRootToLeaf, &tree_sizes)?;
    let up = make_society(SocietyKind::BinomialLeafToRoot, &tree_sizes)?;
    let tree_tol = Tolerances::new(0.1, 0.1, 0.1)?;

    sections.push(society_section(
        "root-to-leaf trees, psi = rho = rhobar = 1",
        &down,
        |_| 1.0,
        (1.0, 1.0),
        &tree_tol,
        "root_to_leaf_i_rates.csv",
        out,
        &mut equilibria,
    )?);

    // psi_n at 0.9 of 2/(rho + (m-1) rhobar) - 1/(rho + m rhobar)
    let down_psi = |n: usize| {
        let m = layers(n);
        0.9 * (2.0 / (1.0 + (m - 1.0)) - 1.0 / (1.0 + m))
    };
    let mut s = society_section(
        "root-to-leaf trees, psi below the waiting threshold",
        &down,
        down_psi,
        (1.0, 1.0),
        &tree_tol,
        "root_to_leaf_ii_rates.csv",
        out,
        &mut equilibria,
    )?;
    let check = binomial_monotonicity_check(&params(1.0, 1.0, 1.0)?, tree_tol.eps(), 7)?;
    s.lines.push(format!("eps condition holds={} h increasing={}", check.eps_condition, check.h_increasing));
    sections.push(s);

    sections.push(society_section(
        "leaf-to-root trees, psi = rho = rhobar = 1",
        &up,
        |_| 1.0,
        (1.0, 1.0),
        &tree_tol,
        "leaf_to_root_i_rates.csv",
        out,
        &mut equilibria,
    )?);

    // psi_n at 0.9 of 2/(rho + 2^(m-1) rhobar) - 1/(rho + 2^m rhobar)
    let up_psi = |n: usize| {
        let m = layers(n);
        0.9 * (2.0 / (1.0 + 2f64.powf(m - 1.0)) - 1.0 / (1.0 + 2f64.powf(m)))
    };
    sections.push(society_section(
        "leaf-to-root trees, psi below the waiting threshold",
        &up,
        up_psi,
        (1.0, 1.0),
        &tree_tol,
        "leaf_to_root_ii_rates.csv",
        out,
        &mut equilibria,
    )?);

    let mut text = String::new();
    for sec in &sections {
        writeln!(text, "[{}]", sec.title).unwrap();
        for line in &sec.lines {
            writeln!(text, "{line}").unwrap();
        }
        writeln!(text).unwrap();
    }
    out.text("examples.txt", text);
    let eq_json: Vec<_> = equilibria.iter().map(|(t, m)| serde_json::json!({ "example": t, "members": m })).collect();
    out.json("equilibria.json", &eq_json)?;
    Ok(sections.iter().map(|s| format!("{}: {} lines", s.title, s.lines.len())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cliques_persist_links() {
        let nets: Vec<_> = [8, 16, 32].iter().map(|&n| cliques(n, 4).unwrap()).collect();
        assert!(Society::from_networks(SocietyKind::Custom, nets.clone()).is_ok());
        assert_eq!(nets[0].arc_count(), 4 * 2);
        assert!(nets[1].has_arc(1, 4) && !nets[1].has_arc(4, 5));
    }

    #[test]
    fn run_length_join() {
        assert_eq!(join(&[0, 0, 0, 1]), "0x3,1");
        assert_eq!(join(&[1, 0, 1, 0]), "1,0,1,0");
        assert_eq!(join(&[]), "");
    }

    #[test]
    fn matrix_layout() {
        let m = payoff_matrix().unwrap();
        assert_eq!(m.lines().count(), 7);
        assert!(m.contains("(0.150000000000, 0.166666666667)"));
    }
}
