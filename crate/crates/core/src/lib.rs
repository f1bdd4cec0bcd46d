//! Bayesian information exchange on directed communication networks.
//!
//! Agents hold one Gaussian signal each about a common state, talk to their
//! out-neighbours in synchronous rounds and choose when to stop listening and
//! act. Waiting buys more signals at the cost of a per-round discount. The
//! crate covers:
//!
//! * [`network`]: directed graphs, shortest-path balls and growing societies;
//! * [`game`]: round-by-round signal propagation under exit strategies,
//!   payoffs, best responses and pure Nash equilibria;
//! * [`learning`]: the error function and finite-population learning tests;
//! * [`asymptotics`]: informed-agent classification over societies and
//!   learning-rate sequences;
//! * [`montecarlo`]: simulation of the Gaussian world that checks the analytic
//!   conditions empirically.

pub mod asymptotics;
pub mod error;
pub mod game;
pub mod learning;
pub mod montecarlo;
pub mod network;

pub use error::{Error, Result};
pub use game::{EquilibriumResult, GameParams, PropagationResult, SolveFrom, StrategyProfile};
pub use learning::{LearningVerdict, Tolerances, Verdict};
pub use network::{DirectedNetwork, Society, SocietyKind};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
