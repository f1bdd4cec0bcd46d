//! Finite-population learning tests.
//!
//! An agent holding `k` signals misses the state by at most `eps` with
//! probability `erf(eps * sqrt((rho + rhobar k) / 2))`. Averaging that over
//! agents gives the learning score `S`; Markov's inequality turns `S` into a
//! necessary and a sufficient condition for `(eps, epsbar, delta)`-learning.

mod special;

pub use special::{erf, erfc};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{EquilibriumResult, GameParams};

/// Individual precision `eps`, aggregate fraction `epsbar` and probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTolerances", into = "RawTolerances")]
pub struct Tolerances {
    eps: f64,
    epsbar: f64,
    delta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RawTolerances {
    pub eps: f64,
    pub epsbar: f64,
    pub delta: f64,
}

impl TryFrom<RawTolerances> for Tolerances {
    type Error = Error;

    fn try_from(raw: RawTolerances) -> Result<Self> {
        Tolerances::new(raw.eps, raw.epsbar, raw.delta)
    }
}

impl From<Tolerances> for RawTolerances {
    fn from(t: Tolerances) -> Self {
        RawTolerances { eps: t.eps, epsbar: t.epsbar, delta: t.delta }
    }
}

impl Tolerances {
    pub fn new(eps: f64, epsbar: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::input(format!("eps must be positive, got {eps}")));
        }
        for (name, v) in [("epsbar", epsbar), ("delta", delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::input(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(Tolerances { eps, epsbar, delta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn epsbar(&self) -> f64 {
        self.epsbar
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Below this score learning fails: `(1 - epsbar)(1 - delta)`.
    pub fn necessary_threshold(&self) -> f64 {
        (1.0 - self.epsbar) * (1.0 - self.delta)
    }

    /// At or above this score learning holds: `1 - epsbar delta`.
    pub fn sufficient_threshold(&self) -> f64 {
        1.0 - self.epsbar * self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Learning,
    NotLearning,
    /// The score falls between the necessary and the sufficient threshold.
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Learning => "Learning",
            Verdict::NotLearning => "NotLearning",
            Verdict::Indeterminate => "Indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningVerdict {
    pub score: f64,
    pub verdict: Verdict,
    /// `((1 - epsbar)(1 - delta), 1 - epsbar delta)`
    pub thresholds: (f64, f64),
}

/// Probability that an agent with `k` signals is within `eps` of the state.
pub fn accuracy_probability(params: &GameParams, k: usize, eps: f64) -> f64 {
    erf(eps * (params.posterior_precision(k) / 2.0).sqrt())
}

/// Probability that an agent with `k` signals misses by more than `eps`,
/// kept accurate when it is tiny.
pub fn miss_probability(params: &GameParams, k: usize, eps: f64) -> f64 {
    erfc(eps * (params.posterior_precision(k) / 2.0).sqrt())
}

fn check_counts(counts: &[usize]) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::input("no signal counts given"));
    }
    if counts.contains(&0) {
        return Err(Error::input("every agent holds at least her own signal (k_i >= 1)"));
    }
    Ok(())
}

/// `S = (1/n) sum_i erf(eps sqrt((rho + rhobar k_i) / 2))`.
pub fn learning_score(params: &GameParams, counts: &[usize], eps: f64) -> Result<f64> {
    check_counts(counts)?;
    let total: f64 = counts.iter().map(|&k| accuracy_probability(params, k, eps)).sum();
    Ok(total / counts.len() as f64)
}

/// `1 - S`, summed from the complementary terms.
pub fn learning_shortfall(params: &GameParams, counts: &[usize], eps: f64) -> Result<f64> {
    check_counts(counts)?;
    let total: f64 = counts.iter().map(|&k| miss_probability(params, k, eps)).sum();
    Ok(total / counts.len() as f64)
}

/// Places a score against the two thresholds.
pub fn classify(score: f64, tol: &Tolerances) -> LearningVerdict {
    let thresholds = (tol.necessary_threshold(), tol.sufficient_threshold());
    let verdict = if score < thresholds.0 {
        Verdict::NotLearning
    } else if score >= thresholds.1 {
        Verdict::Learning
    } else {
        Verdict::Indeterminate
    };
    LearningVerdict { score, verdict, thresholds }
}

/// Verdict that needs neither the network nor the equilibrium, from
/// `1 <= k_i <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkFreeVerdict {
    /// Score if every agent held all `n` signals.
    pub best_case_score: f64,
    /// Score if every agent held only her own signal.
    pub worst_case_score: f64,
    pub verdict: Verdict,
    pub thresholds: (f64, f64),
}

pub fn network_free_bounds(params: &GameParams, n: usize, tol: &Tolerances) -> Result<NetworkFreeVerdict> {
    if n == 0 {
        return Err(Error::input("population must be positive"));
    }
    let best_case_score = accuracy_probability(params, n, tol.eps());
    let worst_case_score = accuracy_probability(params, 1, tol.eps());
    let thresholds = (tol.necessary_threshold(), tol.sufficient_threshold());
    let verdict = if best_case_score < thresholds.0 {
        Verdict::NotLearning
    } else if worst_case_score >= thresholds.1 {
        Verdict::Learning
    } else {
        Verdict::Indeterminate
    };
    Ok(NetworkFreeVerdict { best_case_score, worst_case_score, verdict, thresholds })
}

/// Classifies the least favourable of several equilibria (minimum score).
pub fn classify_multi(params: &GameParams, tol: &Tolerances, equilibria: &[EquilibriumResult]) -> Result<LearningVerdict> {
    if equilibria.is_empty() {
        return Err(Error::input("no equilibria supplied"));
    }
    let mut worst = f64::INFINITY;
    for eq in equilibria {
        worst = worst.min(learning_score(params, &eq.counts, tol.eps())?);
    }
    Ok(classify(worst, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{enumerate_equilibria, SolveMethod, StrategyProfile, DEFAULT_ENUMERATION_BUDGET};
    use crate::network::DirectedNetwork;
    use proptest::prelude::*;

    fn half() -> GameParams {
        GameParams::new(0.5, 0.5, 1.0, 1.0, 1.0).unwrap()
    }

    fn fake_eq(counts: Vec<usize>) -> EquilibriumResult {
        EquilibriumResult {
            profile: StrategyProfile::from_vec_unchecked(vec![0; counts.len()]),
            payoff_nonnegative: vec![true; counts.len()],
            counts,
            method: SolveMethod::BruteForce,
        }
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerances::new(0.0, 0.5, 0.5).is_err());
        assert!(Tolerances::new(0.1, 1.0, 0.5).is_err());
        assert!(Tolerances::new(0.1, 0.5, 0.0).is_err());
        assert!(Tolerances::new(0.1, 0.5, 0.5).is_ok());
    }

    #[test]
    fn score_of_example_counts() {
        // erf(0.2 * sqrt(x)) for x = 1, 0.5, 0.75, 0.5, by quadrature
        let oracle = [0.222702589210478, 0.158519418878206, 0.193504059492660, 0.158519418878206];
        let expected = oracle.iter().sum::<f64>() / 4.0;
        let s = learning_score(&half(), &[3, 1, 2, 1], 0.2).unwrap();
        assert!((s - expected).abs() < 1e-14, "{s} vs {expected}");
    }

    #[test]
    fn constant_counts_and_limits() {
        let p = GameParams::new(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let s = learning_score(&p, &[5, 5, 5], 0.3).unwrap();
        assert!((s - erf(0.3 * (11.0f64 / 2.0).sqrt())).abs() < 1e-15);
        let s = learning_score(&p, &[1_000_000; 4], 0.3).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(learning_score(&p, &[1, 0], 0.3).is_err());
        assert!(learning_score(&p, &[], 0.3).is_err());
    }

    #[test]
    fn classify_thresholds() {
        let tol = Tolerances::new(0.1, 0.5, 0.5).unwrap();
        assert_eq!(classify(1.0, &tol).verdict, Verdict::Learning);
        assert_eq!(classify(0.0, &tol).verdict, Verdict::NotLearning);
        let v = classify(0.4, &tol);
        assert_eq!(v.verdict, Verdict::Indeterminate);
        assert_eq!(v.thresholds, (0.25, 0.75));
    }

    #[test]
    fn structure_free_bounds() {
        let p = GameParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let tol = Tolerances::new(50.0, 0.1, 0.1).unwrap();
        assert_eq!(network_free_bounds(&p, 10, &tol).unwrap().verdict, Verdict::Learning);
        let tol = Tolerances::new(1e-4, 0.1, 0.1).unwrap();
        assert_eq!(network_free_bounds(&p, 3, &tol).unwrap().verdict, Verdict::NotLearning);

        // quadrature: erf(0.3 sqrt(5.5)) = 0.6802576..., erf(0.3) = 0.3286267...
        let tol = Tolerances::new(0.3, 0.1, 0.1).unwrap();
        let v = network_free_bounds(&p, 10, &tol).unwrap();
        assert!((v.best_case_score - 0.680257625507727).abs() < 1e-13);
        assert!((v.worst_case_score - 0.328626759459127).abs() < 1e-13);
        assert!((v.thresholds.0 - 0.81).abs() < 1e-15 && (v.thresholds.1 - 0.99).abs() < 1e-15);
        assert_eq!(v.verdict, Verdict::NotLearning);
        assert!(network_free_bounds(&p, 0, &tol).is_err());
    }

    #[test]
    fn multi_uses_minimum() {
        let p = half();
        let tol = Tolerances::new(0.4, 0.3, 0.2).unwrap();
        let low = fake_eq(vec![1, 1, 1]);
        let high = fake_eq(vec![3, 3, 3]);
        let v = classify_multi(&p, &tol, &[high.clone(), low.clone()]).unwrap();
        assert_eq!(v.score, learning_score(&p, &[1, 1, 1], 0.4).unwrap());
        let single = classify_multi(&p, &tol, std::slice::from_ref(&high)).unwrap();
        assert_eq!(single, classify(learning_score(&p, &high.counts, 0.4).unwrap(), &tol));
        assert!(classify_multi(&p, &tol, &[]).is_err());
    }

    #[test]
    fn multi_over_enumerated_equilibria() {
        // mutual pair with low psi has several equilibria
        let net = DirectedNetwork::new(3, [(1, 2), (2, 1), (2, 3), (3, 2)]).unwrap();
        let p = GameParams::new(1.0, 1.0, 0.55, 1.0, 0.2).unwrap();
        let tol = Tolerances::new(0.5, 0.3, 0.3).unwrap();
        let eqs = enumerate_equilibria(&p, &net, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let brute = eqs.iter().map(|e| learning_score(&p, &e.counts, 0.5).unwrap()).fold(f64::INFINITY, f64::min);
        assert_eq!(classify_multi(&p, &tol, &eqs).unwrap().score, brute);
    }

    proptest! {
        #[test]
        fn score_monotone(k in proptest::collection::vec(1usize..50, 1..8), pos in 0usize..8,
                          eps in 0.01f64..2.0, rho in 0.1f64..3.0, rhobar in 0.1f64..3.0) {
            let p = GameParams::new(rho, rhobar, 1.0, 1.0, 1.0).unwrap();
            let base = learning_score(&p, &k, eps).unwrap();
            let mut bigger = k.clone();
            let idx = pos % k.len();
            bigger[idx] += 1;
            prop_assert!(learning_score(&p, &bigger, eps).unwrap() >= base);
            prop_assert!(learning_score(&p, &k, eps * 1.1).unwrap() >= base);
            let p2 = GameParams::new(rho * 1.1, rhobar, 1.0, 1.0, 1.0).unwrap();
            prop_assert!(learning_score(&p2, &k, eps).unwrap() >= base);
            let p3 = GameParams::new(rho, rhobar * 1.1, 1.0, 1.0, 1.0).unwrap();
            prop_assert!(learning_score(&p3, &k, eps).unwrap() >= base);
            prop_assert!((0.0..=1.0).contains(&base));
        }

        #[test]
        fn classify_symmetric_and_monotone(score in 0.0f64..=1.0, a in 0.01f64..0.99, b in 0.01f64..0.99, grow in 0.0f64..0.5) {
            let t1 = Tolerances::new(0.1, a, b).unwrap();
            let t2 = Tolerances::new(0.1, b, a).unwrap();
            prop_assert_eq!(classify(score, &t1).verdict, classify(score, &t2).verdict);
            let t3 = Tolerances::new(0.1, (a + grow).min(0.99), b).unwrap();
            if classify(score, &t1).verdict == Verdict::Learning {
                prop_assert_eq!(classify(score, &t3).verdict, Verdict::Learning);
            }
        }
    }
}
