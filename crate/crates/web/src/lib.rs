//! Browser front end for `netlearn`. Each exported function takes plain
//! numbers or JSON text and returns JSON text for `www/index.html` to draw.
//! The same functions are plain Rust underneath, so they are tested natively.

use netlearn::asymptotics::{member_rate_rows, RateRow};
use netlearn::game::{payoff, propagate, solve_equilibrium};
use netlearn::network::{make_society, TreeFlow};
use netlearn::{DirectedNetwork, GameParams, SocietyKind, SolveFrom, StrategyProfile};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest network the page will solve; iterated best response is cheap
/// but the drawn tables grow as `n * (L_max + 1)`.
pub const MAX_AGENTS: usize = 64;

fn params(rho: f64, rhobar: f64, psi: f64, lambda: f64, r: f64) -> Result<GameParams, String> {
    GameParams::new(rho, rhobar, psi, lambda, r).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct AgentRow {
    agent: usize,
    exit: usize,
    signals: usize,
    /// Payoff for each exit round against the others' equilibrium play.
    payoffs: Vec<f64>,
}

#[derive(Serialize)]
struct PayoffTable {
    n: usize,
    arcs: Vec<(usize, usize)>,
    least: Vec<usize>,
    greatest: Vec<usize>,
    agents: Vec<AgentRow>,
}

/// Extremal equilibria of a network given as `{"n": .., "arcs": [[from, to], ..]}`
/// and every agent's payoff row against the least one.
pub fn payoff_table_json(network: &str, p: &GameParams) -> Result<String, String> {
    let net: DirectedNetwork = serde_json::from_str(network).map_err(|e| format!("bad network: {e}"))?;
    if net.n() > MAX_AGENTS {
        return Err(format!("at most {MAX_AGENTS} agents"));
    }
    let least = solve_equilibrium(p, &net, SolveFrom::Bottom).map_err(|e| e.to_string())?;
    let greatest = solve_equilibrium(p, &net, SolveFrom::Top).map_err(|e| e.to_string())?;
    let mut agents = Vec::with_capacity(net.n());
    for agent in 1..=net.n() {
        let max = net.max_path_length(agent).map_err(|e| e.to_string())?;
        let payoffs = (0..=max)
            .map(|l| {
                let mut exits = least.profile.exits().to_vec();
                exits[agent - 1] = l;
                let profile = StrategyProfile::new(&net, exits)?;
                let prop = propagate(&net, &profile)?;
                payoff(p, agent, &profile, &prop)
            })
            .collect::<netlearn::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        agents.push(AgentRow { agent, exit: least.profile.exit_of(agent), signals: least.counts[agent - 1], payoffs });
    }
    to_json(&PayoffTable {
        n: net.n(),
        arcs: net.arcs().collect(),
        least: least.profile.exits().to_vec(),
        greatest: greatest.profile.exits().to_vec(),
        agents,
    })
}

#[derive(Serialize)]
struct TreeView {
    n: usize,
    layers: u32,
    /// Depth of each agent, root at 1; agent `i` sits at `floor(log2 i) + 1`.
    depth: Vec<u32>,
    arcs: Vec<(usize, usize)>,
    exits: Vec<usize>,
    counts: Vec<usize>,
}

/// Least equilibrium on the full binary tree with `layers` layers.
pub fn tree_equilibrium_json(layers: u32, root_to_leaf: bool, p: &GameParams) -> Result<String, String> {
    if !(1..=6).contains(&layers) {
        return Err("layers must be between 1 and 6".into());
    }
    let flow = if root_to_leaf { TreeFlow::RootToLeaf } else { TreeFlow::LeafToRoot };
    let net = DirectedNetwork::binary_tree(layers, flow).map_err(|e| e.to_string())?;
    let eq = solve_equilibrium(p, &net, SolveFrom::Bottom).map_err(|e| e.to_string())?;
    to_json(&TreeView {
        n: net.n(),
        layers,
        depth: (1..=net.n()).map(|i| i.ilog2() + 1).collect(),
        arcs: net.arcs().collect(),
        exits: eq.profile.exits().to_vec(),
        counts: eq.counts,
    })
}

/// Rate rows over the society `kind` at sizes `2^2 ..= 2^max_power`
/// (`2^m - 1` for trees).
pub fn rate_curve_json(kind: &str, max_power: u32, p: &GameParams, eps: f64, epsbar: f64) -> Result<String, String> {
    let kind: SocietyKind =
        serde_json::from_value(serde_json::Value::String(kind.into())).map_err(|_| format!("unknown society kind {kind:?}"))?;
    if !(2..=8).contains(&max_power) {
        return Err("max_power must be between 2 and 8".into());
    }
    let tree = matches!(kind, SocietyKind::BinomialRootToLeaf | SocietyKind::BinomialLeafToRoot);
    let sizes: Vec<usize> = (2..=max_power).map(|m| if tree { (1 << m) - 1 } else { 1 << m }).collect();
    let society = make_society(kind, &sizes).map_err(|e| e.to_string())?;
    let mut solved = Vec::with_capacity(sizes.len());
    for net in society.networks() {
        let eq = solve_equilibrium(p, net, SolveFrom::Bottom).map_err(|e| e.to_string())?;
        solved.push((net.n(), *p, eq.counts));
    }
    let rows: Vec<RateRow> = member_rate_rows(&solved, eps, epsbar).map_err(|e| e.to_string())?;
    to_json(&rows)
}

#[wasm_bindgen]
pub fn payoff_table(network: &str, rho: f64, rhobar: f64, psi: f64, lambda: f64, r: f64) -> Result<String, JsValue> {
    params(rho, rhobar, psi, lambda, r).and_then(|p| payoff_table_json(network, &p)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tree_equilibrium(layers: u32, root_to_leaf: bool, rho: f64, rhobar: f64, psi: f64) -> Result<String, JsValue> {
    params(rho, rhobar, psi, 1.0, 1.0).and_then(|p| tree_equilibrium_json(layers, root_to_leaf, &p)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rate_curve(kind: &str, max_power: u32, rho: f64, rhobar: f64, psi: f64, eps: f64, epsbar: f64) -> Result<String, JsValue> {
    params(rho, rhobar, psi, 1.0, 1.0).and_then(|p| rate_curve_json(kind, max_power, &p, eps, epsbar)).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn p(psi: f64) -> GameParams {
        GameParams::new(0.5, 0.5, psi, 1.0, 1.0).unwrap()
    }

    #[test]
    fn four_agent_table() {
        let net = r#"{"n": 4, "arcs": [[2,1],[3,1],[4,3]]}"#;
        let v: Value = serde_json::from_str(&payoff_table_json(net, &p(1.0)).unwrap()).unwrap();
        assert_eq!(v["least"], serde_json::json!([1, 0, 1, 0]));
        assert_eq!(v["least"], v["greatest"]);
        let agent1 = &v["agents"][0]["payoffs"];
        assert_eq!(agent1.as_array().unwrap().len(), 3);
        assert!((agent1[2].as_f64().unwrap() - 0.15).abs() < 1e-15);
        assert!((agent1[1].as_f64().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(payoff_table_json("{", &p(1.0)).is_err());
        assert!(payoff_table_json(r#"{"n": 2, "arcs": [[1,1]]}"#, &p(1.0)).is_err());
        assert!(tree_equilibrium_json(0, true, &p(1.0)).is_err());
        assert!(rate_curve_json("ring", 4, &p(1.0), 1.0, 0.1).is_err());
        assert!(rate_curve_json("complete", 9, &p(1.0), 1.0, 0.1).is_err());
    }

    #[test]
    fn tree_depths_and_sizes() {
        let v: Value = serde_json::from_str(&tree_equilibrium_json(3, false, &p(1.0)).unwrap()).unwrap();
        assert_eq!(v["n"], 7);
        assert_eq!(v["depth"], serde_json::json!([1, 2, 2, 3, 3, 3, 3]));
        assert_eq!(v["arcs"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn complete_rates_fall() {
        let pr = GameParams::new(1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let rows: Vec<Value> = serde_json::from_str(&rate_curve_json("complete", 6, &pr, 1.0, 0.1).unwrap()).unwrap();
        let d: Vec<f64> = rows.iter().map(|r| r["delta_exact"].as_f64().unwrap()).collect();
        assert_eq!(d.len(), 5);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert!((d[0] - 0.253473186774682639).abs() < 1e-14);
    }
}
