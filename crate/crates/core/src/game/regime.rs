use serde::{Deserialize, Serialize};

use crate::asymptotics::DivergenceProxy;
use crate::error::{Error, Result};
use crate::game::GameParams;
use crate::network::Society;

/// Upper bound on equilibrium exit rounds that holds for every network size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum RoundBound {
    /// Exit rounds are strictly below this value.
    Bounded(f64),
    /// Exiting never pays a positive amount; agents wait as long as allowed.
    MaxStep,
}

impl RoundBound {
    /// Whether an exit after `rounds` rounds respects the bound.
    pub fn admits(&self, rounds: usize) -> bool {
        match *self {
            RoundBound::Bounded(b) => (rounds as f64) < b,
            RoundBound::MaxStep => true,
        }
    }
}

/// `ln(1 - 1/((rho + rhobar) psi)) / ln(rbar)` when `(rho + rhobar) psi > 1`.
pub fn round_bound(params: &GameParams) -> RoundBound {
    let scale = (params.rho() + params.rhobar()) * params.psi();
    if scale > 1.0 {
        RoundBound::Bounded((1.0 - 1.0 / scale).ln() / params.rbar().ln())
    } else {
        RoundBound::MaxStep
    }
}

/// Exit behaviour of one agent along a society, by the sign and size of
/// `(rho + rhobar) psi` and the (proxied) limit of her reachable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum ExitRegime {
    /// `(rho + rhobar) psi > 1`: exit rounds stay below `bound`.
    A { bound: f64 },
    /// `psi <= 0`: every exit pays a negative amount, so she waits maximally.
    B,
    /// `0 < (rho + rhobar) psi <= 1` and the reachable set stays below
    /// `(1 - rho psi) / (rhobar psi)`: she waits maximally.
    C1 { reach_limit: usize, threshold: f64 },
    /// `0 < (rho + rhobar) psi <= 1` with a large enough reachable set: she
    /// either exits by `round_cap` or waits maximally.
    C2 { reach_diverges: bool, reach_limit: usize, threshold: f64, round_cap: usize },
}

impl ExitRegime {
    pub fn tag(&self) -> &'static str {
        match self {
            ExitRegime::A { .. } => "a",
            ExitRegime::B => "b",
            ExitRegime::C1 { .. } => "c1",
            ExitRegime::C2 { .. } => "c2",
        }
    }
}

/// Classifies agent `i` (1-based, present in the largest society member).
///
/// The limit of `|B_i^n|` is read off the largest member: it counts as
/// divergent when it reaches `proxy.threshold(n)`, otherwise its last value
/// stands in for the limit. In case C2 the round cap is, over all members
/// containing `i`, the largest round at which her ball first reaches
/// `(lambda + r - rho r psi) / (rhobar r psi)` signals (or her maximal path
/// length if it never does); waiting beyond that round cannot pay even if
/// infinitely many signals were still to come.
pub fn exit_regime(params: &GameParams, society: &Society, i: usize, proxy: &DivergenceProxy) -> Result<ExitRegime> {
    let largest = society.largest();
    let idx = largest.check_agent(i).map_err(|_| Error::input(format!("agent {i} is not in the largest society member")))?;
    let (rho, rhobar, psi) = (params.rho(), params.rhobar(), params.psi());
    let scale = (rho + rhobar) * psi;
    if scale > 1.0 {
        let RoundBound::Bounded(bound) = round_bound(params) else { unreachable!("scale > 1 gives a bound") };
        return Ok(ExitRegime::A { bound });
    }
    if psi <= 0.0 {
        return Ok(ExitRegime::B);
    }

    let threshold = (1.0 - rho * psi) / (rhobar * psi);
    let reach_limit = *largest.ball_sizes_idx(idx).last().unwrap_or(&1);
    let reach_diverges = reach_limit as f64 >= proxy.threshold(largest.n());
    if !reach_diverges && (reach_limit as f64) < threshold {
        return Ok(ExitRegime::C1 { reach_limit, threshold });
    }

    let discount_ball = (params.lambda() + params.r() - rho * params.r() * psi) / (rhobar * params.r() * psi);
    let round_cap = society
        .networks()
        .iter()
        .filter(|net| idx < net.n())
        .map(|net| {
            let sizes = net.ball_sizes_idx(idx);
            sizes.iter().position(|&b| b as f64 >= discount_ball).unwrap_or(sizes.len() - 1)
        })
        .max()
        .unwrap_or(0);
    Ok(ExitRegime::C2 { reach_diverges, reach_limit, threshold, round_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve_equilibrium, SolveFrom};
    use crate::network::{make_society, SocietyKind};

    #[test]
    fn bounds() {
        let p = GameParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(round_bound(&p), RoundBound::Bounded(1.0));
        let p = GameParams::new(0.5, 0.5, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(round_bound(&p), RoundBound::Bounded(1.0));
        let p = GameParams::new(0.5, 0.5, -1.0, 1.0, 1.0).unwrap();
        assert_eq!(round_bound(&p), RoundBound::MaxStep);
        let p = GameParams::new(0.5, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(round_bound(&p), RoundBound::MaxStep);
        assert!(RoundBound::Bounded(1.0).admits(0));
        assert!(!RoundBound::Bounded(1.0).admits(1));
    }

    #[test]
    fn regimes() {
        let proxy = DivergenceProxy::default();
        let complete = make_society(SocietyKind::Complete, &[4, 8, 16, 32]).unwrap();

        let boundary = GameParams::new(0.5, 0.5, 1.0, 1.0, 1.0).unwrap();
        let regime = exit_regime(&boundary, &complete, 1, &proxy).unwrap();
        assert_eq!(regime.tag(), "c2");
        assert!(matches!(regime, ExitRegime::C2 { reach_diverges: true, .. }));

        let negative = GameParams::new(0.5, 0.5, -1.0, 1.0, 1.0).unwrap();
        assert_eq!(exit_regime(&negative, &complete, 3, &proxy).unwrap(), ExitRegime::B);

        let strong = GameParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(exit_regime(&strong, &complete, 1, &proxy).unwrap(), ExitRegime::A { bound: 1.0 });

        // (rho + rhobar) psi = 0.4 and (1 - rho psi) / (rhobar psi) = 4 > 1
        let weak = GameParams::new(1.0, 1.0, 0.2, 1.0, 1.0).unwrap();
        let iso = make_society(SocietyKind::Isolated, &[4, 8, 16]).unwrap();
        let regime = exit_regime(&weak, &iso, 2, &proxy).unwrap();
        assert_eq!(regime.tag(), "c1");

        assert!(exit_regime(&weak, &iso, 17, &proxy).is_err());
    }

    #[test]
    fn c2_cap_bounds_least_equilibrium() {
        let params = GameParams::new(0.5, 0.5, 0.9, 1.0, 1.0).unwrap();
        let soc = make_society(SocietyKind::BinomialLeafToRoot, &[7, 15, 31]).unwrap();
        let proxy = DivergenceProxy::default();
        for net in soc.networks() {
            let eq = solve_equilibrium(&params, net, SolveFrom::Bottom).unwrap();
            let maxima = net.max_path_lengths();
            for i in 1..=net.n() {
                if let ExitRegime::C2 { round_cap, .. } = exit_regime(&params, &soc, i, &proxy).unwrap() {
                    let l = eq.profile.exit_of(i);
                    assert!(l <= round_cap || l == maxima[i - 1], "agent {i}: l={l} cap={round_cap}");
                }
            }
        }
    }
}
