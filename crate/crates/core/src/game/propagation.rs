use crate::error::{Error, Result};
use crate::game::StrategyProfile;
use crate::network::DirectedNetwork;

/// Arrival-table entry for a signal that never reaches an agent.
pub const NEVER: u32 = u32::MAX;

/// Outcome of running the communication rounds under a fixed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    n: usize,
    exits: Vec<usize>,
    // arrival[j * n + i]: first round s_j is offered to agent i (0-based j, i)
    arrival: Vec<u32>,
    counts: Vec<usize>,
}

impl PropagationResult {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `k_i` for every agent, in agent order.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn exits(&self) -> &[usize] {
        &self.exits
    }

    /// Round at which signal `source` first reaches `receiver` (1-based),
    /// or `None` if it never does. The receiver's own exit round does not
    /// affect this value.
    pub fn arrival(&self, source: usize, receiver: usize) -> Option<usize> {
        match self.arrival[(source - 1) * self.n + (receiver - 1)] {
            NEVER => None,
            t => Some(t as usize),
        }
    }

    pub(crate) fn arrival_raw(&self, source: usize, receiver: usize) -> u32 {
        self.arrival[source * self.n + receiver]
    }

    /// Arrival column of the 0-based receiver, indexed by source.
    pub(crate) fn column(&self, receiver: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).map(move |j| self.arrival_raw(j, receiver))
    }

    /// Signals receiver `idx` (0-based) would hold after exiting at round `l`,
    /// holding every other agent's exit fixed.
    pub(crate) fn count_if_exit_at(&self, idx: usize, l: usize) -> usize {
        self.column(idx).filter(|&t| t != NEVER && t as usize <= l).count()
    }

    /// 1-based sources in agent `i`'s information set at her exit.
    pub fn information_set(&self, i: usize) -> Vec<usize> {
        let l = self.exits[i - 1];
        (0..self.n)
            .filter(|&j| {
                let t = self.arrival_raw(j, i - 1);
                t != NEVER && t as usize <= l
            })
            .map(|j| j + 1)
            .collect()
    }
}

/// Fixed-width bit rows, one per agent.
struct BitRows {
    words: usize,
    bits: Vec<u64>,
}

impl BitRows {
    fn identity(n: usize) -> Self {
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for v in 0..n {
            bits[v * words + v / 64] |= 1u64 << (v % 64);
        }
        BitRows { words, bits }
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    fn row_mut(&mut self, v: usize) -> &mut [u64] {
        &mut self.bits[v * self.words..(v + 1) * self.words]
    }
}

/// Runs the rounds: at round `t` every agent sends her whole current set to
/// her out-neighbours; an agent with `t <= l_i` merges what she receives,
/// later ones ignore it but keep forwarding what they already hold.
pub fn propagate(net: &DirectedNetwork, profile: &StrategyProfile) -> Result<PropagationResult> {
    let n = net.n();
    if profile.len() != n {
        return Err(Error::input(format!("profile has {} entries but the network has {n} agents", profile.len())));
    }
    let exits = profile.exits().to_vec();
    let mut arrival = vec![NEVER; n * n];
    for v in 0..n {
        arrival[v * n + v] = 0;
    }
    // `held` is what each agent forwards; `seen` is everything ever offered to it.
    let mut held = BitRows::identity(n);
    let mut seen = BitRows::identity(n);
    let mut next = BitRows::identity(n);
    let words = held.words;
    let mut incoming = vec![0u64; words];

    let mut round: u32 = 0;
    loop {
        round += 1;
        next.bits.copy_from_slice(&held.bits);
        let mut changed = false;
        for v in 0..n {
            incoming.iter_mut().for_each(|w| *w = 0);
            for &u in net.preds(v) {
                for (acc, w) in incoming.iter_mut().zip(held.row(u)) {
                    *acc |= w;
                }
            }
            let seen_row = seen.row_mut(v);
            for (w, (inc, s)) in incoming.iter().zip(seen_row.iter_mut()).enumerate() {
                let mut fresh = inc & !*s;
                if fresh != 0 {
                    changed = true;
                    *s |= fresh;
                    while fresh != 0 {
                        let bit = fresh.trailing_zeros() as usize;
                        arrival[(w * 64 + bit) * n + v] = round;
                        fresh &= fresh - 1;
                    }
                }
            }
            if round as usize <= exits[v] {
                for (dst, inc) in next.row_mut(v).iter_mut().zip(&incoming) {
                    *dst |= inc;
                }
            }
        }
        std::mem::swap(&mut held, &mut next);
        if !changed {
            break;
        }
    }

    let counts = (0..n).map(|v| held.row(v).iter().map(|w| w.count_ones() as usize).sum()).collect();
    Ok(PropagationResult { n, exits, arrival, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::four_agent_example;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Plain set-union simulation of the rounds, with arrivals recorded as
    /// "first round the signal sits in an in-neighbour's forwarded set".
    pub(crate) fn naive(net: &DirectedNetwork, exits: &[usize]) -> (Vec<Vec<Option<usize>>>, Vec<usize>) {
        let n = net.n();
        let mut sets: Vec<BTreeSet<usize>> = (0..n).map(|v| BTreeSet::from([v])).collect();
        let mut arrival = vec![vec![None; n]; n];
        for v in 0..n {
            arrival[v][v] = Some(0);
        }
        for t in 1..=n + 1 {
            let prev = sets.clone();
            for (j, i) in net.arcs() {
                let (src, dst) = (j - 1, i - 1);
                for &s in &prev[src] {
                    if arrival[s][dst].is_none() {
                        arrival[s][dst] = Some(t);
                    }
                    if t <= exits[dst] {
                        sets[dst].insert(s);
                    }
                }
            }
        }
        (arrival, sets.iter().map(BTreeSet::len).collect())
    }

    fn random_instance() -> impl Strategy<Value = (DirectedNetwork, StrategyProfile)> {
        (1usize..=8)
            .prop_flat_map(|n| proptest::collection::vec((1..=n, 1..=n), 0..=3 * n).prop_map(move |p| (n, p)))
            .prop_flat_map(|(n, pairs)| {
                let net = DirectedNetwork::new(n, pairs.into_iter().filter(|(a, b)| a != b)).unwrap();
                let maxima = net.max_path_lengths();
                let exits = maxima.into_iter().map(|m| 0..=m).collect::<Vec<_>>();
                (Just(net), exits)
            })
            .prop_map(|(net, exits)| {
                let profile = StrategyProfile::new(&net, exits).unwrap();
                (net, profile)
            })
    }

    #[test]
    fn four_agent_cases() {
        let net = four_agent_example();
        let waiting = StrategyProfile::new(&net, vec![2, 0, 1, 0]).unwrap();
        let prop = propagate(&net, &waiting).unwrap();
        assert_eq!(prop.counts()[0], 4);
        assert_eq!(prop.information_set(1), vec![1, 2, 3, 4]);
        assert_eq!(prop.arrival(4, 1), Some(2));

        let early3 = StrategyProfile::new(&net, vec![2, 0, 0, 0]).unwrap();
        let prop = propagate(&net, &early3).unwrap();
        assert_eq!(prop.counts(), &[3, 1, 1, 1]);
        assert_eq!(prop.information_set(1), vec![1, 2, 3]);
        assert_eq!(prop.arrival(4, 1), None);
        assert_eq!(prop.arrival(4, 3), Some(1));
    }

    #[test]
    fn no_communication_gives_single_signals() {
        let net = crate::network::DirectedNetwork::complete(6).unwrap();
        let prop = propagate(&net, &StrategyProfile::zeros(&net)).unwrap();
        assert!(prop.counts().iter().all(|&k| k == 1));
    }

    #[test]
    fn long_network_uses_many_words() {
        let net = crate::network::DirectedNetwork::new(130, (1..130).map(|v| (v, v + 1))).unwrap();
        let prop = propagate(&net, &StrategyProfile::maximal(&net)).unwrap();
        assert_eq!(prop.counts()[129], 130);
        assert_eq!(prop.arrival(1, 130), Some(129));
    }

    #[test]
    fn length_mismatch_is_input_error() {
        let net = four_agent_example();
        let other = crate::network::DirectedNetwork::isolated(3).unwrap();
        let profile = StrategyProfile::zeros(&other);
        assert!(matches!(propagate(&net, &profile), Err(Error::Input(_))));
    }

    proptest! {
        #[test]
        fn matches_naive_simulation((net, profile) in random_instance()) {
            let prop = propagate(&net, &profile).unwrap();
            let (arrival, counts) = naive(&net, profile.exits());
            prop_assert_eq!(prop.counts(), &counts[..]);
            for j in 1..=net.n() {
                for i in 1..=net.n() {
                    prop_assert_eq!(prop.arrival(j, i), arrival[j - 1][i - 1]);
                }
            }
            for i in 1..=net.n() {
                let k = prop.counts()[i - 1];
                prop_assert!(k >= 1);
                prop_assert!(k <= net.ball(i, profile.exit_of(i)).unwrap().len());
            }
        }
    }
}
