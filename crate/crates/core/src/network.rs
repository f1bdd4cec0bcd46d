//! Directed communication networks and growing societies.
//!
//! Agent ids are 1-based everywhere in the public API. An arc `(j, i)` means
//! agent `j` can send information to agent `i` directly.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Agents `1..=n` and a set of directed arcs between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetworkFile", into = "NetworkFile")]
pub struct DirectedNetwork {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
    // 0-based adjacency, derived from `arcs`
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

/// On-disk form: `{"n": 4, "arcs": [[2, 1], [3, 1], [4, 3]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
}

impl TryFrom<NetworkFile> for DirectedNetwork {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        DirectedNetwork::new(file.n, file.arcs.into_iter().map(|[j, i]| (j, i)))
    }
}

impl From<DirectedNetwork> for NetworkFile {
    fn from(net: DirectedNetwork) -> Self {
        NetworkFile { n: net.n, arcs: net.arcs.iter().map(|&(j, i)| [j, i]).collect() }
    }
}

/// Which way the edges of a binary tree point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFlow {
    RootToLeaf,
    LeafToRoot,
}

impl DirectedNetwork {
    /// Builds a network, rejecting self-arcs and out-of-range endpoints.
    /// Repeated arcs collapse to one; antiparallel pairs are kept.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("a network needs at least one agent"));
        }
        let mut set = BTreeSet::new();
        for (j, i) in arcs {
            if j == 0 || i == 0 || j > n || i > n {
                return Err(Error::input(format!("arc ({j}, {i}) has an endpoint outside 1..={n}")));
            }
            if j == i {
                return Err(Error::input(format!("self-arc ({j}, {j}) is not allowed")));
            }
            set.insert((j, i));
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(j, i) in &set {
            preds[i - 1].push(j - 1);
            succs[j - 1].push(i - 1);
        }
        Ok(DirectedNetwork { n, arcs: set, preds, succs })
    }

    pub fn isolated(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    /// Both arcs between every pair of agents.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).flat_map(|j| (1..=n).filter(move |&i| i != j).map(move |i| (j, i))))
    }

    /// Perfect binary tree with `layers` layers (`2^layers - 1` agents).
    /// Agent `k` has children `2k` and `2k + 1`, so agent 1 is the root.
    pub fn binary_tree(layers: u32, flow: TreeFlow) -> Result<Self> {
        if layers == 0 || layers > 30 {
            return Err(Error::input(format!("tree depth {layers} outside 1..=30")));
        }
        let n = (1usize << layers) - 1;
        let edges = (2..=n).map(|child| {
            let parent = child / 2;
            match flow {
                TreeFlow::RootToLeaf => (parent, child),
                TreeFlow::LeafToRoot => (child, parent),
            }
        });
        Self::new(n, edges)
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs.contains(&(from, to))
    }

    /// 0-based in-neighbours of the 0-based agent `idx`.
    pub(crate) fn preds(&self, idx: usize) -> &[usize] {
        &self.preds[idx]
    }

    #[allow(dead_code)]
    pub(crate) fn succs(&self, idx: usize) -> &[usize] {
        &self.succs[idx]
    }

    pub(crate) fn check_agent(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.n {
            Err(Error::input(format!("unknown agent {i}; agents are 1..={}", self.n)))
        } else {
            Ok(i - 1)
        }
    }

    /// Directed shortest-path distance from every agent to `i`, by reverse
    /// breadth-first search. Entry `j - 1` is `None` when `j` cannot reach `i`.
    pub fn distances_to(&self, i: usize) -> Result<Vec<Option<usize>>> {
        let target = self.check_agent(i)?;
        Ok(self.distances_to_idx(target))
    }

    pub(crate) fn distances_to_idx(&self, target: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or_default();
            for &u in &self.preds[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// `B_{i,l}`: agents whose shortest path to `i` has length at most `l`.
    pub fn ball(&self, i: usize, l: usize) -> Result<BTreeSet<usize>> {
        let dist = self.distances_to(i)?;
        Ok(dist.iter().enumerate().filter(|(_, d)| d.is_some_and(|d| d <= l)).map(|(j, _)| j + 1).collect())
    }

    /// `|B_{i,l}|` for `l = 0..=max_path_length(i)`. Balls are constant
    /// beyond the last entry.
    pub fn ball_sizes(&self, i: usize) -> Result<Vec<usize>> {
        let target = self.check_agent(i)?;
        Ok(self.ball_sizes_idx(target))
    }

    pub(crate) fn ball_sizes_idx(&self, target: usize) -> Vec<usize> {
        let dist = self.distances_to_idx(target);
        let max = dist.iter().flatten().copied().max().unwrap_or(0);
        let mut sizes = vec![0usize; max + 1];
        for d in dist.into_iter().flatten() {
            sizes[d] += 1;
        }
        for l in 1..sizes.len() {
            sizes[l] += sizes[l - 1];
        }
        sizes
    }

    /// Largest shortest-path distance from any agent that can reach `i`;
    /// zero when nobody reaches `i`.
    pub fn max_path_length(&self, i: usize) -> Result<usize> {
        let target = self.check_agent(i)?;
        Ok(self.max_path_length_idx(target))
    }

    pub(crate) fn max_path_length_idx(&self, target: usize) -> usize {
        self.distances_to_idx(target).into_iter().flatten().max().unwrap_or(0)
    }

    /// `(L_i)_max` for every agent, in agent order.
    pub fn max_path_lengths(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.max_path_length_idx(v)).collect()
    }
}

/// Generator that produced a society.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocietyKind {
    Isolated,
    Complete,
    BinomialRootToLeaf,
    BinomialLeafToRoot,
    Custom,
}

impl SocietyKind {
    pub fn name(self) -> &'static str {
        match self {
            SocietyKind::Isolated => "isolated",
            SocietyKind::Complete => "complete",
            SocietyKind::BinomialRootToLeaf => "binomial_root_to_leaf",
            SocietyKind::BinomialLeafToRoot => "binomial_leaf_to_root",
            SocietyKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for SocietyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "isolated" => SocietyKind::Isolated,
            "complete" => SocietyKind::Complete,
            "binomial_root_to_leaf" => SocietyKind::BinomialRootToLeaf,
            "binomial_leaf_to_root" => SocietyKind::BinomialLeafToRoot,
            "custom" => SocietyKind::Custom,
            other => return Err(Error::input(format!("unknown society kind '{other}'"))),
        })
    }
}

/// A sequence of growing networks in which existing links are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Society {
    kind: SocietyKind,
    networks: Vec<DirectedNetwork>,
}

impl Society {
    /// Wraps an explicit sequence, checking growth and link persistence.
    pub fn from_networks(kind: SocietyKind, networks: Vec<DirectedNetwork>) -> Result<Self> {
        if networks.is_empty() {
            return Err(Error::input("a society needs at least one network"));
        }
        for pair in networks.windows(2) {
            let (small, large) = (&pair[0], &pair[1]);
            if large.n() <= small.n() {
                return Err(Error::input(format!("society sizes must strictly increase, got {} then {}", small.n(), large.n())));
            }
            if let Some((j, i)) = small.arcs().find(|&(j, i)| !large.has_arc(j, i)) {
                return Err(Error::input(format!(
                    "arc ({j}, {i}) of the {}-agent network is missing from the {}-agent network",
                    small.n(),
                    large.n()
                )));
            }
        }
        Ok(Society { kind, networks })
    }

    pub fn kind(&self) -> SocietyKind {
        self.kind
    }

    pub fn networks(&self) -> &[DirectedNetwork] {
        &self.networks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.networks.iter().map(DirectedNetwork::n).collect()
    }

    pub fn largest(&self) -> &DirectedNetwork {
        self.networks.last().expect("society is nonempty")
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }
}

impl Serialize for Society {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.networks.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Society {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let networks = Vec::<DirectedNetwork>::deserialize(deserializer)?;
        Society::from_networks(SocietyKind::Custom, networks).map_err(serde::de::Error::custom)
    }
}

/// Number of layers of a perfect binary tree with `n` agents, if any.
pub fn tree_layers(n: usize) -> Option<u32> {
    let m = (n + 1).trailing_zeros();
    (n >= 1 && (n + 1).is_power_of_two()).then_some(m)
}

/// Builds one of the standard societies at the given population sizes.
/// Binary-tree kinds require every size to be `2^m - 1`.
pub fn make_society(kind: SocietyKind, sizes: &[usize]) -> Result<Society> {
    if sizes.is_empty() {
        return Err(Error::input("no society sizes given"));
    }
    if let Some(w) = sizes.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::input(format!("society sizes must strictly increase, got {} then {}", w[0], w[1])));
    }
    let networks = sizes
        .iter()
        .map(|&n| match kind {
            SocietyKind::Isolated => DirectedNetwork::isolated(n),
            SocietyKind::Complete => DirectedNetwork::complete(n),
            SocietyKind::BinomialRootToLeaf | SocietyKind::BinomialLeafToRoot => {
                let m = tree_layers(n).ok_or_else(|| Error::input(format!("binary-tree society size {n} is not of the form 2^m - 1")))?;
                let flow = if kind == SocietyKind::BinomialRootToLeaf { TreeFlow::RootToLeaf } else { TreeFlow::LeafToRoot };
                DirectedNetwork::binary_tree(m, flow)
            }
            SocietyKind::Custom => Err(Error::input("custom societies are loaded from files, not generated")),
        })
        .collect::<Result<Vec<_>>>()?;
    Society::from_networks(kind, networks)
}

/// The four-agent network used as the running example: `2 -> 1`, `3 -> 1`, `4 -> 3`.
pub fn four_agent_example() -> DirectedNetwork {
    DirectedNetwork::new(4, [(2, 1), (3, 1), (4, 3)]).expect("static example is valid")
}
