//! Coordinator protocol: view-digest submission, per-shard coordination,
//! participation decisions, and reward settlement with punishment.
//!
//! Each shard's coordinator groups the submitted view digests, takes the
//! largest group as the consensus-capable cooperative set, announces it along
//! with the cooperation thresholds, and after the epoch settles rewards among
//! the cooperators that followed their recommendation. A recommended
//! cooperator that defected is paid nothing.
//!
//! Coordination for different shards is independent; all types here are
//! immutable after construction.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::equilibrium::{cooperation_surplus, Thresholds};
use crate::game::{
    self, total_cost, CostParams, EpochInstance, RewardParams, Strategy, StrategyProfile,
};

/// Name of the digest function, recorded in run metadata.
pub const DIGEST_ALGORITHM: &str = "SHA-256";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("shard {0} produced no digest submissions")]
    EmptyShard(usize),
}

/// Identity of a processor's transaction view. Two processors hold the same
/// view iff both fields match; `content_tag` distinguishes views that happen
/// to share a transaction count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ViewKey {
    pub tx_count: u64,
    pub content_tag: u64,
}

/// A processor's hashed view as received by the coordinator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewDigest {
    pub processor: usize,
    pub digest: [u8; 32],
}

/// Digest plus the reported transaction count, which the coordinator needs to
/// estimate the shard's consensus volume before consensus runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigestSubmission {
    pub view: ViewDigest,
    pub tx_count: u64,
}

/// Hash a processor's view under a canonical length-prefixed encoding. An
/// empty view (zero transactions) encodes like any other count, so it has a
/// stable digest across runs.
pub fn submit_view_digest(processor: usize, view: &ViewKey) -> ViewDigest {
    let mut hasher = Sha256::new();
    hasher.update(16u64.to_le_bytes()); // payload length prefix
    hasher.update(view.tx_count.to_le_bytes());
    hasher.update(view.content_tag.to_le_bytes());
    ViewDigest { processor, digest: hasher.finalize().into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The largest view group is below the consensus threshold; everyone is
    /// told to defect.
    AllDefect,
    /// A consensus-capable cooperative set exists.
    Proceed,
}

/// The coordinator's per-shard announcement.
#[derive(Debug, Clone, PartialEq)]
pub struct Announcement {
    pub shard: usize,
    pub verdict: Verdict,
    /// Processors recommended to cooperate; empty under [`Verdict::AllDefect`].
    pub cooperative_set: Vec<usize>,
    /// Size of the cooperative set.
    pub cooperators: usize,
    /// Size of the largest view group; thresholds are evaluated at this count.
    pub majority_size: usize,
    /// Estimated consensus volume: the majority group's reported count.
    pub estimated_consensus_tx: u64,
    pub thresholds: Thresholds,
}

/// Group the shard's digests, take the largest group (ties broken toward the
/// lexicographically smallest digest) as the cooperative set, and compute the
/// announcement.
///
/// With `recruit_divergent`, processors outside the majority group whose
/// reported volume keeps divergent cooperation profitable (evaluated at the
/// majority size) are added to the cooperative set.
pub fn coordinate(
    shard: usize,
    submissions: &[DigestSubmission],
    tau: usize,
    num_shards: usize,
    costs: &CostParams,
    rewards: &RewardParams,
    recruit_divergent: bool,
) -> Result<Announcement, ProtocolError> {
    if submissions.is_empty() {
        return Err(ProtocolError::EmptyShard(shard));
    }

    // Group by digest; the grouping is a function of the multiset of
    // submissions, independent of arrival order.
    let mut groups: std::collections::BTreeMap<[u8; 32], Vec<&DigestSubmission>> =
        std::collections::BTreeMap::new();
    for sub in submissions {
        groups.entry(sub.view.digest).or_default().push(sub);
    }
    // BTreeMap iterates digests in lexicographic order, so the first group of
    // maximal size is the tie-break winner.
    let (_, majority) = groups
        .iter()
        .max_by(|(da, ga), (db, gb)| ga.len().cmp(&gb.len()).then(db.cmp(da)))
        .expect("nonempty submissions");

    let majority_size = majority.len();
    let estimated_consensus_tx = majority[0].tx_count;

    if majority_size < tau {
        return Ok(Announcement {
            shard,
            verdict: Verdict::AllDefect,
            cooperative_set: Vec::new(),
            cooperators: 0,
            majority_size,
            estimated_consensus_tx,
            thresholds: Thresholds::compute(costs, rewards, num_shards, majority_size.max(1), estimated_consensus_tx),
        });
    }

    let mut cooperative_set: Vec<usize> = majority.iter().map(|sub| sub.view.processor).collect();
    if recruit_divergent {
        let member: std::collections::BTreeSet<usize> = cooperative_set.iter().copied().collect();
        for sub in submissions {
            if !member.contains(&sub.view.processor)
                && cooperation_surplus(
                    costs,
                    rewards,
                    num_shards,
                    majority_size,
                    estimated_consensus_tx,
                    sub.tx_count,
                ) > 0.0
            {
                cooperative_set.push(sub.view.processor);
            }
        }
    }
    cooperative_set.sort_unstable();

    Ok(Announcement {
        shard,
        verdict: Verdict::Proceed,
        cooperators: cooperative_set.len(),
        majority_size,
        estimated_consensus_tx,
        thresholds: Thresholds::compute(costs, rewards, num_shards, majority_size, estimated_consensus_tx),
        cooperative_set,
    })
}

/// Why a participation decision came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionReason {
    /// Cooperative-set member whose volume is too low for aligned cooperation
    /// to pay off.
    BelowAlignedThreshold,
    /// Outside the cooperative set with a volume above the divergent ceiling.
    AboveDivergentCeiling,
    /// The shard's verdict was all-defect.
    AllDefectVerdict,
    /// Recommended cooperator.
    InCooperativeSet,
    /// Outside the cooperative set; never recruited.
    NotSelected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParticipationDecision {
    pub processor: usize,
    pub decision: Strategy,
    pub reason: DecisionReason,
}

/// Decide a processor's recommended strategy from its shard's announcement.
///
/// Cooperative-set members cooperate iff cooperation is profitable at the
/// majority size (the inequality behind the announced thresholds, valid for
/// every denominator sign; exact break-even defects). Everyone else defects;
/// the reason distinguishes volumes at or above the divergent ceiling.
pub fn participate(
    processor: usize,
    announcement: &Announcement,
    tx_count: u64,
    costs: &CostParams,
    rewards: &RewardParams,
    num_shards: usize,
) -> ParticipationDecision {
    if announcement.verdict == Verdict::AllDefect {
        return ParticipationDecision {
            processor,
            decision: Strategy::Defect,
            reason: DecisionReason::AllDefectVerdict,
        };
    }
    let member = announcement.cooperative_set.binary_search(&processor).is_ok();
    if member {
        let surplus = cooperation_surplus(
            costs,
            rewards,
            num_shards,
            announcement.majority_size,
            announcement.estimated_consensus_tx,
            tx_count,
        );
        if surplus > 0.0 {
            ParticipationDecision {
                processor,
                decision: Strategy::Cooperate,
                reason: DecisionReason::InCooperativeSet,
            }
        } else {
            ParticipationDecision {
                processor,
                decision: Strategy::Defect,
                reason: DecisionReason::BelowAlignedThreshold,
            }
        }
    } else {
        let above_ceiling = match announcement.thresholds.divergent_max_tx {
            Some(ceiling) => tx_count as f64 >= ceiling,
            // Free verification: the ceiling degenerates; flag only when even
            // a zero-volume divergent cooperator would lose.
            None => cooperation_surplus(
                costs,
                rewards,
                num_shards,
                announcement.majority_size,
                announcement.estimated_consensus_tx,
                0,
            ) < 0.0,
        };
        ParticipationDecision {
            processor,
            decision: Strategy::Defect,
            reason: if above_ceiling {
                DecisionReason::AboveDivergentCeiling
            } else {
                DecisionReason::NotSelected
            },
        }
    }
}

/// Settled rewards for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardLedger {
    /// Disbursed reward per processor (zero for defectors and punished
    /// processors).
    pub rewards: Vec<f64>,
    /// Whether each processor's actual strategy matched its recommendation.
    pub followed_recommendation: Vec<bool>,
    pub block_committed: bool,
}

impl RewardLedger {
    pub fn total_disbursed(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Recompute block success from the actual strategies and distribute rewards.
///
/// Only cooperative-set members that both were recommended to cooperate and
/// actually cooperated share a shard's rewards; the split is evaluated at the
/// compliant cooperator count. A recommended cooperator that defected is paid
/// nothing. Nothing is disbursed unless the block commits.
pub fn settle(
    instance: &EpochInstance,
    announcements: &[Announcement],
    decisions: &[ParticipationDecision],
    actual: &StrategyProfile,
    rewards: &RewardParams,
) -> RewardLedger {
    let shape = instance.shape();
    let n = instance.num_processors();
    debug_assert_eq!(decisions.len(), n);
    debug_assert_eq!(announcements.len(), shape.num_shards());

    let block_committed = game::block_committed(instance, actual);
    let followed_recommendation: Vec<bool> =
        (0..n).map(|i| actual.strategy(i) == decisions[i].decision).collect();

    let mut disbursed = vec![0.0; n];
    if block_committed {
        let k = shape.num_shards() as f64;
        for j in shape.shards() {
            let announcement = &announcements[j];
            let compliant: Vec<usize> = announcement
                .cooperative_set
                .iter()
                .copied()
                .filter(|&i| {
                    decisions[i].decision == Strategy::Cooperate
                        && actual.strategy(i) == Strategy::Cooperate
                })
                .collect();
            if compliant.is_empty() {
                continue;
            }
            let l = compliant.len() as f64;
            let share = rewards.block_reward / (k * l)
                + rewards.per_tx_fee * instance.consensus_tx_count(j) as f64 / l;
            for i in compliant {
                disbursed[i] = share;
            }
        }
    }

    RewardLedger { rewards: disbursed, followed_recommendation, block_committed }
}

/// Net utility implied by a ledger entry: disbursed reward minus the cost of
/// the strategy actually played.
pub fn settled_utility(
    ledger: &RewardLedger,
    instance: &EpochInstance,
    actual: &StrategyProfile,
    costs: &CostParams,
    processor: usize,
) -> f64 {
    ledger.rewards[processor] - total_cost(costs, instance.tx_count(processor), actual.strategy(processor))
}
