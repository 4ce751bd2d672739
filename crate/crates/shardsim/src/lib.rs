//! Strategic behavior of rational processors in shard-based committee consensus.
//!
//! Processors assigned to per-shard committees choose between cooperating
//! (verifying transactions and voting in consensus, at a cost) and defecting
//! (paying only the mandatory organization cost). A block is committed only if
//! every shard reaches its consensus threshold. The crate models this as an
//! N-player static game and provides:
//!
//! - [`game`]: parameters, strategy profiles, success predicates, and payoff
//!   functions for uniform and fair reward sharing;
//! - [`equilibrium`]: cooperation thresholds, unilateral-deviation analysis,
//!   Nash verification, and brute-force equilibrium enumeration on small games;
//! - [`protocol`]: the coordinator protocol that estimates the consensus-capable
//!   cooperator set from view digests, recommends strategies, and settles
//!   rewards with punishment for non-compliant cooperators;
//! - [`sim`]: randomized epoch generation, strategy dynamics, and parameter
//!   sweeps aggregating cooperation ratios and utilities.

pub mod equilibrium;
pub mod game;
pub mod protocol;
pub mod sim;
