//! Learning along growing societies: which agents become informed, and how
//! fast the failure probability `delta_n` can shrink with the population.
//!
//! Limits over `n` cannot be observed from a finite prefix of a society.
//! Wherever a definition asks for something to diverge, a
//! [`DivergenceProxy`] threshold stands in for it, and every report names
//! the proxy it used.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{solve_equilibrium, GameParams, SolveFrom};
use crate::learning::{erfc, learning_shortfall, miss_probability};
use crate::network::Society;

/// Finite stand-in for "grows without bound": a quantity observed at
/// population `n` counts as divergent once it reaches `coef * ln(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProxy {
    pub coef: f64,
}

impl Default for DivergenceProxy {
    fn default() -> Self {
        DivergenceProxy { coef: 2.0 }
    }
}

impl DivergenceProxy {
    pub fn new(coef: f64) -> Result<Self> {
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(Error::input(format!("divergence proxy coefficient must be positive, got {coef}")));
        }
        Ok(DivergenceProxy { coef })
    }

    pub fn threshold(&self, n: usize) -> f64 {
        self.coef * (n as f64).ln()
    }

    pub fn description(&self) -> String {
        format!("diverges at n when value >= {} * ln(n)", self.coef)
    }
}

/// Game parameters along a society, with optional per-size `psi` overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub base: GameParams,
    #[serde(default)]
    pub psi_by_n: BTreeMap<usize, f64>,
}

impl ParamSchedule {
    pub fn constant(base: GameParams) -> Self {
        ParamSchedule { base, psi_by_n: BTreeMap::new() }
    }

    pub fn at(&self, n: usize) -> Result<GameParams> {
        match self.psi_by_n.get(&n) {
            Some(&psi) => self.base.with_psi(psi),
            None => Ok(self.base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformedAtSize {
    pub n: usize,
    pub threshold: f64,
    pub counts: Vec<usize>,
    /// Share of agents whose count reaches the threshold at this size.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumInformedReport {
    pub proxy: String,
    pub equilibrium: SolveFrom,
    pub members: Vec<InformedAtSize>,
    /// Per agent of the largest member: count reaches the threshold there.
    pub informed: Vec<bool>,
}

impl EquilibriumInformedReport {
    /// Share of informed agents in the largest member.
    pub fn final_fraction(&self) -> f64 {
        self.members.last().map_or(0.0, |m| m.fraction)
    }
}

/// Solves each society member (least equilibrium unless told otherwise) and
/// flags agents whose equilibrium signal count clears the proxy threshold.
pub fn equilibrium_informed(
    society: &Society,
    schedule: &ParamSchedule,
    proxy: &DivergenceProxy,
    from: SolveFrom,
) -> Result<EquilibriumInformedReport> {
    let mut members = Vec::with_capacity(society.len());
    for net in society.networks() {
        let params = schedule.at(net.n())?;
        let eq = solve_equilibrium(&params, net, from)?;
        let threshold = proxy.threshold(net.n());
        let informed = eq.counts.iter().filter(|&&k| k as f64 >= threshold).count();
        members.push(InformedAtSize { n: net.n(), threshold, fraction: informed as f64 / net.n() as f64, counts: eq.counts });
    }
    let last = members.last().expect("society is nonempty");
    let informed = last.counts.iter().map(|&k| k as f64 >= last.threshold).collect();
    Ok(EquilibriumInformedReport { proxy: proxy.description(), equilibrium: from, members, informed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialAgent {
    pub agent: usize,
    /// Least `l` whose ball clears the proxy threshold in the largest member.
    pub social_round: Option<usize>,
    /// First society size from which the positivity and incentive
    /// conditions hold through the end of the prefix.
    pub from_n: Option<usize>,
    pub socially_informed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SociallyInformedReport {
    pub proxy: String,
    pub agents: Vec<SocialAgent>,
    /// `(n, |SI^n| / n)` where an agent counts from her `from_n` onwards.
    pub fractions: Vec<(usize, f64)>,
}

/// Checks, for the member at hand, that waiting `round` rounds with every
/// other agent waiting maximally pays positively and strictly beats every
/// earlier exit.
fn social_conditions_hold(params: &GameParams, balls: &[usize], round: usize) -> bool {
    let ball_at = |l: usize| balls[l.min(balls.len() - 1)];
    let target = params.payoff_value(round, ball_at(round));
    let positive = params.psi() - 1.0 / params.posterior_precision(ball_at(round)) > 0.0;
    positive && (0..round).all(|l| target > params.payoff_value(l, ball_at(l)))
}

/// Classifies agents of the largest society member as socially informed.
pub fn socially_informed(society: &Society, schedule: &ParamSchedule, proxy: &DivergenceProxy) -> Result<SociallyInformedReport> {
    let largest = society.largest();
    let threshold = proxy.threshold(largest.n());
    let mut agents = Vec::with_capacity(largest.n());
    for idx in 0..largest.n() {
        let balls = largest.ball_sizes_idx(idx);
        let social_round = (1..balls.len()).find(|&l| balls[l] as f64 >= threshold);
        let mut from_n = None;
        if let Some(round) = social_round {
            for net in society.networks().iter().rev() {
                if idx >= net.n() {
                    break;
                }
                let params = schedule.at(net.n())?;
                if social_conditions_hold(&params, &net.ball_sizes_idx(idx), round) {
                    from_n = Some(net.n());
                } else {
                    break;
                }
            }
        }
        agents.push(SocialAgent { agent: idx + 1, social_round, from_n, socially_informed: from_n.is_some() });
    }
    let fractions = society
        .networks()
        .iter()
        .map(|net| {
            let n = net.n();
            let count = agents.iter().filter(|a| a.agent <= n && a.from_n.is_some_and(|m| m <= n)).count();
            (n, count as f64 / n as f64)
        })
        .collect();
    Ok(SociallyInformedReport { proxy: proxy.description(), agents, fractions })
}

/// Smallest admissible `delta_n` per population size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSequence {
    pub ns: Vec<usize>,
    pub deltas: Vec<f64>,
}

impl RateSequence {
    fn new(ns: Vec<usize>, deltas: Vec<f64>) -> Self {
        debug_assert_eq!(ns.len(), deltas.len());
        RateSequence { ns, deltas }
    }
}

/// `delta_n = (1/epsbar) (1 - S_n)`: the smallest `delta` the sufficient
/// condition certifies for each `(n, counts)` pair.
pub fn rate_bound_from_counts(params: &GameParams, counts_by_n: &[(usize, Vec<usize>)], eps: f64, epsbar: f64) -> Result<RateSequence> {
    let mut ns = Vec::with_capacity(counts_by_n.len());
    let mut deltas = Vec::with_capacity(counts_by_n.len());
    for (n, counts) in counts_by_n {
        ns.push(*n);
        deltas.push(learning_shortfall(params, counts, eps)? / epsbar);
    }
    Ok(RateSequence::new(ns, deltas))
}

/// `(1/sqrt(2 pi)) (1/x) exp(-x^2/2)`, an upper bound on `1 - erf(x)`.
pub fn erf_tail_bound(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::input(format!("tail bound needs x > 0, got {x}")));
    }
    Ok((-x * x / 2.0).exp() / (x * (2.0 * PI).sqrt()))
}

/// Transparent sufficient rate and its order envelope when every agent
/// holds at least `f(n)` signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateOrder {
    pub ns: Vec<usize>,
    /// `(1/(sqrt(pi) epsbar)) (1/(eps sqrt(rho + rhobar f))) exp(-eps^2 (rho + rhobar f)/4)`
    pub minilower: Vec<f64>,
    /// `exp(-rhobar eps^2 f / 5)`
    pub envelope: Vec<f64>,
}

pub fn minilower_bound(params: &GameParams, eps: f64, epsbar: f64, f: f64) -> f64 {
    let precision = params.rho() + params.rhobar() * f;
    (-eps * eps * precision / 4.0).exp() / (PI.sqrt() * epsbar * eps * precision.sqrt())
}

pub fn rate_order(params: &GameParams, eps: f64, epsbar: f64, f: impl Fn(usize) -> f64, ns: &[usize]) -> Result<RateOrder> {
    let values: Vec<f64> = ns.iter().map(|&n| f(n)).collect();
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input("f must be non-decreasing over the given sizes"));
    }
    Ok(RateOrder {
        ns: ns.to_vec(),
        minilower: values.iter().map(|&v| minilower_bound(params, eps, epsbar, v)).collect(),
        envelope: values.iter().map(|&v| (-params.rhobar() * eps * eps * v / 5.0).exp()).collect(),
    })
}

/// One row of a rate CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub delta_exact: f64,
    pub delta_minilower: f64,
    pub envelope: f64,
}

pub fn rate_rows(exact: &RateSequence, order: &RateOrder) -> Result<Vec<RateRow>> {
    if exact.ns != order.ns {
        return Err(Error::input("exact and order sequences cover different sizes"));
    }
    Ok(exact
        .ns
        .iter()
        .enumerate()
        .map(|(i, &n)| RateRow { n, delta_exact: exact.deltas[i], delta_minilower: order.minilower[i], envelope: order.envelope[i] })
        .collect())
}

/// Rate rows for members solved with their own parameters. The transparent
/// rate and the envelope use `f(n) = min_i k_i`.
pub fn member_rate_rows(solved: &[(usize, GameParams, Vec<usize>)], eps: f64, epsbar: f64) -> Result<Vec<RateRow>> {
    let mut rows = Vec::with_capacity(solved.len());
    for (n, params, counts) in solved {
        let exact = rate_bound_from_counts(params, &[(*n, counts.clone())], eps, epsbar)?;
        let f = *counts.iter().min().ok_or_else(|| Error::input("empty signal counts"))? as f64;
        rows.push(RateRow {
            n: *n,
            delta_exact: exact.deltas[0],
            delta_minilower: minilower_bound(params, eps, epsbar, f),
            envelope: (-params.rhobar() * eps * eps * f / 5.0).exp(),
        });
    }
    Ok(rows)
}

/// Layer thresholds `f_1(n) >= ... >= f_J(n)` and the share `b_n^j` of
/// agents holding at least `f_j(n)` (and fewer than `f_{j-1}(n)`) signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPoint {
    pub n: usize,
    pub f: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LayerPoint>", into = "Vec<LayerPoint>")]
pub struct LayeredProfile {
    points: Vec<LayerPoint>,
}

impl TryFrom<Vec<LayerPoint>> for LayeredProfile {
    type Error = Error;

    fn try_from(points: Vec<LayerPoint>) -> Result<Self> {
        LayeredProfile::new(points)
    }
}

impl From<LayeredProfile> for Vec<LayerPoint> {
    fn from(p: LayeredProfile) -> Self {
        p.points
    }
}

impl LayeredProfile {
    pub fn new(points: Vec<LayerPoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::input("layered profile has no points"));
        };
        let layers = first.f.len();
        if layers == 0 {
            return Err(Error::input("layered profile needs at least one layer"));
        }
        for p in &points {
            if p.f.len() != layers || p.b.len() != layers {
                return Err(Error::input(format!("point n={} does not have {layers} layers", p.n)));
            }
            if p.b.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
                return Err(Error::input(format!("layer shares at n={} must lie in (0, 1]", p.n)));
            }
            if p.b.iter().sum::<f64>() > 1.0 + 1e-12 {
                return Err(Error::input(format!("layer shares at n={} add up to more than one", p.n)));
            }
            if p.f.windows(2).any(|w| w[1] > w[0]) || p.f.iter().any(|&f| f < 1.0) {
                return Err(Error::input(format!("layer thresholds at n={} must be non-increasing and >= 1", p.n)));
            }
        }
        for w in points.windows(2) {
            if w[1].n <= w[0].n {
                return Err(Error::input("layer points must have increasing n"));
            }
            if w[0].f.iter().zip(&w[1].f).any(|(a, b)| b < a) {
                return Err(Error::input(format!("layer thresholds decrease between n={} and n={}", w[0].n, w[1].n)));
            }
        }
        Ok(LayeredProfile { points })
    }

    pub fn points(&self) -> &[LayerPoint] {
        &self.points
    }
}

/// `R_n = sum_j b_n^j (1 - erf(eps sqrt((rho + rhobar f_j)/2))) + (1 - sum_j b_n^j)(1 - erf(eps sqrt((rho + rhobar)/2)))`.
/// Any `(delta_n, epsbar_n)` with `delta_n * epsbar_n >= R_n` is sufficient.
pub fn layered_rate(params: &GameParams, layers: &LayeredProfile, eps: f64) -> Vec<(usize, f64)> {
    let miss = |f: f64| erfc(eps * ((params.rho() + params.rhobar() * f) / 2.0).sqrt());
    layers
        .points()
        .iter()
        .map(|p| {
            let covered: f64 = p.b.iter().sum();
            let layered: f64 = p.f.iter().zip(&p.b).map(|(&f, &b)| b * miss(f)).sum();
            let rest = (1.0 - covered).max(0.0) * miss_probability(params, 1, eps);
            (p.n, layered + rest)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    /// `h(1) < h(2) < ... < h(m)`
    pub h_increasing: bool,
    /// `eps^2 < -(4/rhobar) ln((1/2) sqrt((rho + 2 rhobar)/(rho + rhobar)))`
    pub eps_condition: bool,
    pub h: Vec<f64>,
}

/// `h(x) = 2^(x-1) (rho + rhobar x)^(-1/2) exp(-eps^2 (rho + rhobar x)/4)` on
/// `x = 1..=m`, the per-layer term of the root-to-leaf tree rate.
pub fn binomial_monotonicity_check(params: &GameParams, eps: f64, m: u32) -> Result<MonotonicityCheck> {
    if m < 2 {
        return Err(Error::input("need at least two layers"));
    }
    let (rho, rhobar) = (params.rho(), params.rhobar());
    let h: Vec<f64> = (1..=m)
        .map(|x| {
            let p = rho + rhobar * x as f64;
            2f64.powi(x as i32 - 1) / p.sqrt() * (-eps * eps * p / 4.0).exp()
        })
        .collect();
    let limit = -(4.0 / rhobar) * (0.5 * ((rho + 2.0 * rhobar) / (rho + rhobar)).sqrt()).ln();
    Ok(MonotonicityCheck { h_increasing: h.windows(2).all(|w| w[1] > w[0]), eps_condition: eps * eps < limit, h })
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `ln(delta)` against `ln(n)`: the fitted polynomial decay exponent.
pub fn loglog_slope(rates: &RateSequence) -> f64 {
    let x: Vec<f64> = rates.ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = rates.deltas.iter().map(|d| d.ln()).collect();
    ls_slope(&x, &y)
}

/// Per-agent equilibrium counts of a perfect binary tree where each agent
/// of layer `j` (root is layer 1) holds `count(j)` signals.
pub fn tree_layer_counts(layers: u32, count: impl Fn(u32) -> usize) -> Vec<usize> {
    (1..=layers).flat_map(|j| std::iter::repeat_n(count(j), 1usize << (j - 1))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::erf;
    use crate::network::{make_society, DirectedNetwork, SocietyKind};

    fn params(rho: f64, rhobar: f64, psi: f64) -> GameParams {
        GameParams::new(rho, rhobar, psi, 1.0, 1.0).unwrap()
    }

    #[test]
    fn proxy_threshold() {
        let p = DivergenceProxy::default();
        assert_eq!(p.threshold(1), 0.0);
        assert!((p.threshold(100) - 2.0 * 100f64.ln()).abs() < 1e-12);
        assert!(DivergenceProxy::new(0.0).is_err());
    }

    #[test]
    fn schedule_overrides() {
        let mut s = ParamSchedule::constant(params(1.0, 1.0, 1.0));
        s.psi_by_n.insert(7, 0.2);
        assert_eq!(s.at(7).unwrap().psi(), 0.2);
        assert_eq!(s.at(15).unwrap().psi(), 1.0);
    }

    #[test]
    fn complete_society_everyone_informed() {
        // one wait step pays: rbar (psi - 1/(rho + rhobar n)) > psi - 1/(rho + rhobar)
        let soc = make_society(SocietyKind::Complete, &[4, 8, 16, 32]).unwrap();
        let sched = ParamSchedule::constant(params(0.5, 0.5, 1.02));
        let report = equilibrium_informed(&soc, &sched, &DivergenceProxy::default(), SolveFrom::Bottom).unwrap();
        assert!(report.members.iter().all(|m| m.fraction == 1.0));
        assert!(report.informed.iter().all(|&b| b));
        assert_eq!(report.members[1].counts, vec![8; 8]);
    }

    #[test]
    fn isolated_and_top_down_tree_uninformed() {
        let sched = ParamSchedule::constant(params(1.0, 1.0, 1.0));
        let proxy = DivergenceProxy::default();
        let iso = make_society(SocietyKind::Isolated, &[4, 8, 16]).unwrap();
        let r = equilibrium_informed(&iso, &sched, &proxy, SolveFrom::Bottom).unwrap();
        assert!(r.informed.iter().all(|&b| !b));
        assert!(r.members.iter().all(|m| m.counts.iter().all(|&k| k == 1)));

        let tree = make_society(SocietyKind::BinomialRootToLeaf, &[7, 15, 31, 63]).unwrap();
        let r = equilibrium_informed(&tree, &sched, &proxy, SolveFrom::Bottom).unwrap();
        assert_eq!(r.final_fraction(), 0.0);
    }

    #[test]
    fn complete_society_socially_informed() {
        let soc = make_society(SocietyKind::Complete, &[2, 4, 8, 16, 32]).unwrap();
        let sched = ParamSchedule::constant(params(0.5, 0.5, 1.02));
        let r = socially_informed(&soc, &sched, &DivergenceProxy::default()).unwrap();
        assert!(r.agents.iter().all(|a| a.socially_informed && a.social_round == Some(1)));
        assert_eq!(r.agents[0].from_n, Some(2));
        assert!(r.fractions.iter().all(|&(_, f)| f == 1.0));
    }

    #[test]
    fn bounded_balls_never_socially_informed() {
        let sched = ParamSchedule::constant(params(0.5, 0.5, 1.02));
        let proxy = DivergenceProxy::default();
        let iso = make_society(SocietyKind::Isolated, &[4, 8, 16]).unwrap();
        let r = socially_informed(&iso, &sched, &proxy).unwrap();
        assert!(r.agents.iter().all(|a| !a.socially_informed && a.social_round.is_none()));

        // disjoint copies of the four-agent network: balls never exceed 4
        let copies = |c: usize| {
            let arcs = (0..c).flat_map(|b| [(2, 1), (3, 1), (4, 3)].map(|(j, i)| (j + 4 * b, i + 4 * b)));
            DirectedNetwork::new(4 * c, arcs).unwrap()
        };
        let soc = Society::from_networks(SocietyKind::Custom, (1..=6).map(copies).collect()).unwrap();
        let r = socially_informed(&soc, &sched, &proxy).unwrap();
        assert!(r.agents.iter().all(|a| !a.socially_informed));
    }

    #[test]
    fn rate_from_counts_matches_closed_forms() {
        let p = params(1.0, 2.0, 1.0);
        let (eps, epsbar) = (0.3, 0.2);
        let counts: Vec<(usize, Vec<usize>)> = [4usize, 8, 16].iter().map(|&n| (n, vec![n; n])).collect();
        let seq = rate_bound_from_counts(&p, &counts, eps, epsbar).unwrap();
        for (i, &n) in seq.ns.iter().enumerate() {
            let nlower = (1.0 - erf(eps * ((1.0 + 2.0 * n as f64) / 2.0).sqrt())) / epsbar;
            assert!((seq.deltas[i] - nlower).abs() < 1e-12);
        }
        let ones: Vec<(usize, Vec<usize>)> = [4usize, 8, 16].iter().map(|&n| (n, vec![1; n])).collect();
        let flat = rate_bound_from_counts(&p, &ones, eps, epsbar).unwrap();
        let c = (1.0 - erf(eps * (3.0f64 / 2.0).sqrt())) / epsbar;
        assert!(flat.deltas.iter().all(|d| (d - c).abs() < 1e-12));
    }

    #[test]
    fn tail_bound_values() {
        assert!((erf_tail_bound(1.0).unwrap() - 0.241970724519143).abs() < 1e-14);
        assert!(1.0 - erf(1.0) < erf_tail_bound(1.0).unwrap());
        assert!(erf_tail_bound(40.0).unwrap() < 1e-300);
        assert!(erf_tail_bound(0.0).is_err());
        assert!(erf_tail_bound(-1.0).is_err());
    }

    #[test]
    fn rate_order_shapes() {
        let p = params(1.0, 1.0, 1.0);
        let ns = [10usize, 20, 40];
        let o = rate_order(&p, 0.5, 0.1, |n| 0.5 * n as f64, &ns).unwrap();
        for (i, &n) in ns.iter().enumerate() {
            assert!((o.envelope[i] - (-0.25 * n as f64 / 10.0).exp()).abs() < 1e-15);
        }
        let flat = rate_order(&p, 0.5, 0.1, |_| 3.0, &ns).unwrap();
        assert!(flat.minilower.windows(2).all(|w| w[0] == w[1]));
        assert!(rate_order(&p, 0.5, 0.1, |n| 100.0 - n as f64, &ns).is_err());
    }

    #[test]
    fn minilower_dominates_exact_on_complete_graphs() {
        let p = params(0.7, 1.3, 1.0);
        let (eps, epsbar) = (0.4, 0.25);
        let ns: Vec<usize> = (1..=40).map(|i| 3 * i).collect();
        let counts: Vec<(usize, Vec<usize>)> = ns.iter().map(|&n| (n, vec![n; n])).collect();
        let exact = rate_bound_from_counts(&p, &counts, eps, epsbar).unwrap();
        let order = rate_order(&p, eps, epsbar, |n| n as f64, &ns).unwrap();
        for (e, m) in exact.deltas.iter().zip(&order.minilower) {
            assert!(e <= m);
        }
        let rows = rate_rows(&exact, &order).unwrap();
        assert_eq!(rows.len(), ns.len());
    }

    #[test]
    fn single_layer_reduces_to_uniform_counts() {
        let p = params(1.0, 1.0, 1.0);
        let (eps, epsbar) = (0.3, 0.1);
        let ns = [8usize, 16, 32];
        let layers = LayeredProfile::new(ns.iter().map(|&n| LayerPoint { n, f: vec![n as f64], b: vec![1.0] }).collect()).unwrap();
        let r = layered_rate(&p, &layers, eps);
        let counts: Vec<(usize, Vec<usize>)> = ns.iter().map(|&n| (n, vec![n; n])).collect();
        let exact = rate_bound_from_counts(&p, &counts, eps, epsbar).unwrap();
        for ((_, rn), d) in r.iter().zip(&exact.deltas) {
            assert!((rn - epsbar * d).abs() < 1e-15);
        }
    }

    #[test]
    fn layered_rate_vanishes_when_all_layers_grow() {
        let p = params(1.0, 1.0, 1.0);
        let pts =
            [10usize, 100, 1000, 10000].iter().map(|&n| LayerPoint { n, f: vec![n as f64, n as f64 / 2.0], b: vec![0.5, 0.5] }).collect();
        let r = layered_rate(&p, &LayeredProfile::new(pts).unwrap(), 0.3);
        assert!(r.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(r.last().unwrap().1 < 1e-90);
    }

    #[test]
    fn layer_validation() {
        let bad_sum = vec![LayerPoint { n: 4, f: vec![3.0, 2.0], b: vec![0.7, 0.7] }];
        assert!(LayeredProfile::new(bad_sum).is_err());
        let bad_order = vec![LayerPoint { n: 4, f: vec![2.0, 3.0], b: vec![0.5, 0.5] }];
        assert!(LayeredProfile::new(bad_order).is_err());
        let shrinking = vec![LayerPoint { n: 4, f: vec![3.0], b: vec![0.5] }, LayerPoint { n: 8, f: vec![2.0], b: vec![0.5] }];
        assert!(LayeredProfile::new(shrinking).is_err());
        assert!(LayeredProfile::new(vec![]).is_err());
    }

    #[test]
    fn monotonicity_check_flags() {
        let p = params(1.0, 1.0, 1.0);
        let c = binomial_monotonicity_check(&p, 0.1, 10).unwrap();
        assert!(c.eps_condition && c.h_increasing);
        // eps^2 far above the limit (about 1.96 here): h eventually decreases
        let c = binomial_monotonicity_check(&p, 2.0, 10).unwrap();
        assert!(!c.eps_condition && !c.h_increasing);
        let c = binomial_monotonicity_check(&p, 0.1, 2).unwrap();
        assert_eq!(c.h.len(), 2);
        assert!(c.h_increasing);
        assert!(binomial_monotonicity_check(&p, 0.1, 1).is_err());
    }

    #[test]
    fn layer_counts_helper() {
        assert_eq!(tree_layer_counts(3, |j| j as usize), vec![1, 2, 2, 3, 3, 3, 3]);
    }

    #[test]
    fn fitted_slopes() {
        let seq = RateSequence::new(vec![10, 100, 1000], vec![1e-1, 1e-2, 1e-3]);
        assert!((loglog_slope(&seq) + 1.0).abs() < 1e-12);
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn member_rows_on_complete_graph() {
        let p = GameParams::new(1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let rows = member_rate_rows(&[(4, p, vec![4; 4])], 1.0, 0.1).unwrap();
        let r = rows[0];
        assert!((r.delta_exact - 0.253473186774682639).abs() < 1e-14);
        assert!((r.delta_minilower - 0.722889570672725080).abs() < 1e-14);
        assert!((r.envelope - 0.449328964117221591).abs() < 1e-15);
        assert!(member_rate_rows(&[(4, p, vec![])], 1.0, 0.1).is_err());
    }
}
