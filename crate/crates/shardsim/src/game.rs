//! Core game model: parameters, strategy profiles, success predicates, and
//! payoff functions.
//!
//! All operations here are pure functions over immutable values. Money
//! quantities are real-valued `f64`; transaction quantities are counts.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("cost parameters must be nonnegative")]
    NegativeCost,
    #[error("reward parameters must be nonnegative")]
    NegativeReward,
    #[error("invalid network shape: {0}")]
    InvalidShape(String),
    #[error("invalid epoch instance: {0}")]
    InvalidInstance(String),
}

/// A processor's move in the committee-participation phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Verify all received transactions and take part in consensus.
    Cooperate,
    /// Skip all optional work; pay only the mandatory cost.
    Defect,
}

impl Strategy {
    pub fn flipped(self) -> Self {
        match self {
            Strategy::Cooperate => Strategy::Defect,
            Strategy::Defect => Strategy::Cooperate,
        }
    }
}

/// Which payoff function settles a committed block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardScheme {
    /// Everyone splits the total reward equally, regardless of strategy.
    Uniform,
    /// Only cooperators are paid; the block reward is split across shards and
    /// then across each shard's cooperators, fees per shard likewise.
    Fair,
}

/// Per-processor cost constants, in currency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Cost of the organization phase (identity creation, committee
    /// assignment); sunk regardless of strategy.
    pub mandatory: f64,
    /// Fixed overhead of taking part in intra-committee consensus.
    pub fixed_optional: f64,
    /// Cost of validating a single transaction.
    pub per_tx_verification: f64,
}

impl CostParams {
    pub fn new(mandatory: f64, fixed_optional: f64, per_tx_verification: f64) -> Result<Self, GameError> {
        if mandatory < 0.0 || fixed_optional < 0.0 || per_tx_verification < 0.0 {
            return Err(GameError::NegativeCost);
        }
        Ok(Self { mandatory, fixed_optional, per_tx_verification })
    }
}

/// Reward constants, in currency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Fixed payout for appending a block.
    pub block_reward: f64,
    /// Benefit per accepted transaction.
    pub per_tx_fee: f64,
}

impl RewardParams {
    pub fn new(block_reward: f64, per_tx_fee: f64) -> Result<Self, GameError> {
        if block_reward < 0.0 || per_tx_fee < 0.0 {
            return Err(GameError::NegativeReward);
        }
        Ok(Self { block_reward, per_tx_fee })
    }
}

/// Committee layout: processors `0..N` are assigned to shards in contiguous
/// index ranges, shard by shard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkShape {
    committee_sizes: Vec<usize>,
    consensus_thresholds: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl NetworkShape {
    /// One committee size and one consensus threshold per shard. Thresholds
    /// must satisfy `1 <= tau <= committee size`.
    pub fn new(committee_sizes: Vec<usize>, consensus_thresholds: Vec<usize>) -> Result<Self, GameError> {
        if committee_sizes.is_empty() {
            return Err(GameError::InvalidShape("no shards".into()));
        }
        if committee_sizes.len() != consensus_thresholds.len() {
            return Err(GameError::InvalidShape("one threshold required per shard".into()));
        }
        for (j, (&n, &tau)) in committee_sizes.iter().zip(&consensus_thresholds).enumerate() {
            if n == 0 {
                return Err(GameError::InvalidShape(format!("shard {j} has an empty committee")));
            }
            if tau == 0 || tau > n {
                return Err(GameError::InvalidShape(format!(
                    "shard {j}: threshold {tau} outside 1..={n}"
                )));
            }
        }
        let mut offsets = Vec::with_capacity(committee_sizes.len());
        let mut total = 0;
        for &n in &committee_sizes {
            offsets.push(total);
            total += n;
        }
        Ok(Self { committee_sizes, consensus_thresholds, offsets, total })
    }

    /// Equal committees of size `n` with a common threshold.
    pub fn regular(num_shards: usize, committee_size: usize, tau: usize) -> Result<Self, GameError> {
        Self::new(vec![committee_size; num_shards], vec![tau; num_shards])
    }

    pub fn num_processors(&self) -> usize {
        self.total
    }

    pub fn num_shards(&self) -> usize {
        self.committee_sizes.len()
    }

    pub fn committee_size(&self, shard: usize) -> usize {
        self.committee_sizes[shard]
    }

    pub fn consensus_threshold(&self, shard: usize) -> usize {
        self.consensus_thresholds[shard]
    }

    /// Processor indices belonging to `shard`.
    pub fn members(&self, shard: usize) -> std::ops::Range<usize> {
        let start = self.offsets[shard];
        start..start + self.committee_sizes[shard]
    }

    pub fn shard_of(&self, processor: usize) -> usize {
        debug_assert!(processor < self.total);
        match self.offsets.binary_search(&processor) {
            Ok(j) => j,
            Err(j) => j - 1,
        }
    }

    pub fn shards(&self) -> std::ops::Range<usize> {
        0..self.num_shards()
    }
}

/// One epoch's randomness made concrete: who sees how many transactions, what
/// each shard's consensus output would be, and whose view matches it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochInstance {
    shape: NetworkShape,
    tx_counts: Vec<u64>,
    consensus_tx_counts: Vec<u64>,
    view_aligned: Vec<bool>,
}

impl EpochInstance {
    /// `tx_counts` and `view_aligned` are per processor; `consensus_tx_counts`
    /// per shard. An aligned processor's view equals its shard's consensus
    /// output, so its transaction count must match.
    pub fn new(
        shape: NetworkShape,
        tx_counts: Vec<u64>,
        consensus_tx_counts: Vec<u64>,
        view_aligned: Vec<bool>,
    ) -> Result<Self, GameError> {
        let n = shape.num_processors();
        if tx_counts.len() != n || view_aligned.len() != n {
            return Err(GameError::InvalidInstance("per-processor data must cover all processors".into()));
        }
        if consensus_tx_counts.len() != shape.num_shards() {
            return Err(GameError::InvalidInstance("consensus output required for every shard".into()));
        }
        for i in 0..n {
            let j = shape.shard_of(i);
            if view_aligned[i] && tx_counts[i] != consensus_tx_counts[j] {
                return Err(GameError::InvalidInstance(format!(
                    "processor {i} is aligned but its transaction count differs from shard {j}'s output"
                )));
            }
        }
        Ok(Self { shape, tx_counts, consensus_tx_counts, view_aligned })
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn num_processors(&self) -> usize {
        self.shape.num_processors()
    }

    pub fn tx_count(&self, processor: usize) -> u64 {
        self.tx_counts[processor]
    }

    pub fn consensus_tx_count(&self, shard: usize) -> u64 {
        self.consensus_tx_counts[shard]
    }

    pub fn is_aligned(&self, processor: usize) -> bool {
        self.view_aligned[processor]
    }

    /// Number of aligned processors in `shard`, regardless of strategy.
    pub fn aligned_count(&self, shard: usize) -> usize {
        self.shape.members(shard).filter(|&i| self.view_aligned[i]).count()
    }
}

/// A Cooperate/Defect choice for every processor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    strategies: Vec<Strategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        Self { strategies }
    }

    pub fn all_defect(n: usize) -> Self {
        Self { strategies: vec![Strategy::Defect; n] }
    }

    pub fn all_cooperate(n: usize) -> Self {
        Self { strategies: vec![Strategy::Cooperate; n] }
    }

    /// Bit `i` of `mask` set means processor `i` cooperates.
    pub fn from_bitmask(n: usize, mask: u64) -> Self {
        let strategies = (0..n)
            .map(|i| if mask >> i & 1 == 1 { Strategy::Cooperate } else { Strategy::Defect })
            .collect();
        Self { strategies }
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn strategy(&self, processor: usize) -> Strategy {
        self.strategies[processor]
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    /// Copy of this profile with only `processor`'s strategy flipped.
    pub fn with_flipped(&self, processor: usize) -> Self {
        let mut strategies = self.strategies.clone();
        strategies[processor] = strategies[processor].flipped();
        Self { strategies }
    }

    /// Cooperator count in `shard` (aligned or not).
    pub fn cooperators_in(&self, shape: &NetworkShape, shard: usize) -> usize {
        shape
            .members(shard)
            .filter(|&i| self.strategies[i] == Strategy::Cooperate)
            .count()
    }

    /// Total cooperator count over all shards.
    pub fn total_cooperators(&self) -> usize {
        self.strategies.iter().filter(|&&s| s == Strategy::Cooperate).count()
    }
}

/// Everything observable at the end of an epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutcome {
    pub shard_success: Vec<bool>,
    pub block_committed: bool,
    pub utilities: Vec<f64>,
    pub total_fees: f64,
    pub cooperation_ratio: f64,
}

/// Cost of the optional committee-participation phase: fixed overhead plus
/// per-transaction verification.
pub fn optional_cost(costs: &CostParams, tx_count: u64) -> f64 {
    costs.fixed_optional + tx_count as f64 * costs.per_tx_verification
}

/// Total cost incurred for the epoch: cooperators pay mandatory plus optional,
/// defectors only mandatory.
pub fn total_cost(costs: &CostParams, tx_count: u64, strategy: Strategy) -> f64 {
    match strategy {
        Strategy::Cooperate => costs.mandatory + optional_cost(costs, tx_count),
        Strategy::Defect => costs.mandatory,
    }
}

/// A shard reaches consensus iff at least `tau` of its cooperators agree on
/// the consensus output, i.e. cooperate with an aligned view. Cooperators with
/// divergent views pay their costs but do not count toward the threshold.
pub fn shard_success(instance: &EpochInstance, profile: &StrategyProfile, shard: usize) -> bool {
    let agreeing = instance
        .shape()
        .members(shard)
        .filter(|&i| profile.strategy(i) == Strategy::Cooperate && instance.is_aligned(i))
        .count();
    agreeing >= instance.shape().consensus_threshold(shard)
}

/// A block exists only when every shard reached consensus.
pub fn block_committed(instance: &EpochInstance, profile: &StrategyProfile) -> bool {
    instance.shape().shards().all(|j| shard_success(instance, profile, j))
}

/// Total fee income over all shard outputs.
pub fn total_fees(instance: &EpochInstance, rewards: &RewardParams) -> f64 {
    let tx: u64 = instance.shape().shards().map(|j| instance.consensus_tx_count(j)).sum();
    rewards.per_tx_fee * tx as f64
}

/// Uniform sharing: every processor receives an equal split of block reward
/// plus total fees if the block commits, nothing otherwise; costs are sunk
/// either way.
pub fn payoff_uniform(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
    processor: usize,
) -> f64 {
    let benefit = if block_committed(instance, profile) {
        (rewards.block_reward + total_fees(instance, rewards)) / instance.num_processors() as f64
    } else {
        0.0
    };
    benefit - total_cost(costs, instance.tx_count(processor), profile.strategy(processor))
}

/// Fair sharing: defectors never receive a benefit. If the block commits, each
/// of a shard's cooperators receives an equal split of the shard's slice of the
/// block reward and of the shard's fee income; divergent-view cooperators are
/// included in the split.
pub fn payoff_fair(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
    processor: usize,
) -> f64 {
    let strategy = profile.strategy(processor);
    let cost = total_cost(costs, instance.tx_count(processor), strategy);
    match strategy {
        Strategy::Defect => -cost,
        Strategy::Cooperate => {
            if block_committed(instance, profile) {
                let shard = instance.shape().shard_of(processor);
                // A committed block implies every shard has at least tau >= 1
                // aligned cooperators, so the cooperator count is nonzero.
                let l = profile.cooperators_in(instance.shape(), shard) as f64;
                let k = instance.shape().num_shards() as f64;
                let fees = rewards.per_tx_fee * instance.consensus_tx_count(shard) as f64;
                rewards.block_reward / (k * l) + fees / l - cost
            } else {
                -cost
            }
        }
    }
}

/// Payoff under the selected scheme.
pub fn payoff(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
    scheme: RewardScheme,
    processor: usize,
) -> f64 {
    match scheme {
        RewardScheme::Uniform => payoff_uniform(instance, profile, costs, rewards, processor),
        RewardScheme::Fair => payoff_fair(instance, profile, costs, rewards, processor),
    }
}

/// Evaluate a full epoch under a fixed profile.
pub fn evaluate_epoch(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
    scheme: RewardScheme,
) -> EpochOutcome {
    let shard_success: Vec<bool> =
        instance.shape().shards().map(|j| shard_success(instance, profile, j)).collect();
    let block_committed = shard_success.iter().all(|&s| s);
    let utilities = (0..instance.num_processors())
        .map(|i| payoff(instance, profile, costs, rewards, scheme, i))
        .collect();
    EpochOutcome {
        shard_success,
        block_committed,
        utilities,
        total_fees: total_fees(instance, rewards),
        cooperation_ratio: profile.total_cooperators() as f64 / instance.num_processors() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn costs(m: f64, f: f64, v: f64) -> CostParams {
        CostParams::new(m, f, v).unwrap()
    }

    fn rewards(br: f64, r: f64) -> RewardParams {
        RewardParams::new(br, r).unwrap()
    }

    #[test]
    fn optional_cost_examples() {
        assert_eq!(optional_cost(&costs(0.0, 0.0, 0.0), 100), 0.0);
        assert!((optional_cost(&costs(0.0, 5.0, 0.05), 1000) - 55.0).abs() < TOL);
        assert!((optional_cost(&costs(0.0, 5.0, 0.05), 0) - 5.0).abs() < TOL);
    }

    #[test]
    fn total_cost_examples() {
        assert!((total_cost(&costs(10.0, 5.0, 0.05), 1000, Strategy::Cooperate) - 65.0).abs() < TOL);
        assert_eq!(total_cost(&costs(10.0, 123.0, 4.5), 99, Strategy::Defect), 10.0);
        assert_eq!(total_cost(&costs(0.0, 0.0, 0.0), 777, Strategy::Cooperate), 0.0);
    }

    #[test]
    fn negative_params_rejected() {
        assert_eq!(CostParams::new(-1.0, 0.0, 0.0), Err(GameError::NegativeCost));
        assert_eq!(RewardParams::new(0.0, -0.5), Err(GameError::NegativeReward));
    }

    #[test]
    fn shape_validation() {
        assert!(NetworkShape::new(vec![], vec![]).is_err());
        assert!(NetworkShape::new(vec![3], vec![4]).is_err());
        assert!(NetworkShape::new(vec![3], vec![0]).is_err());
        let shape = NetworkShape::new(vec![2, 3], vec![2, 2]).unwrap();
        assert_eq!(shape.num_processors(), 5);
        assert_eq!(shape.shard_of(0), 0);
        assert_eq!(shape.shard_of(1), 0);
        assert_eq!(shape.shard_of(2), 1);
        assert_eq!(shape.shard_of(4), 1);
        assert_eq!(shape.members(1), 2..5);
    }

    fn single_shard_instance(n: usize, tau: usize, tx: u64, y: u64, aligned: Vec<bool>) -> EpochInstance {
        let shape = NetworkShape::regular(1, n, tau).unwrap();
        let tx_counts = aligned.iter().map(|&a| if a { y } else { tx }).collect();
        EpochInstance::new(shape, tx_counts, vec![y], aligned).unwrap()
    }

    #[test]
    fn shard_success_examples() {
        // n=3, tau=2, two aligned cooperators.
        let inst = single_shard_instance(3, 2, 10, 10, vec![true, true, true]);
        let two = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]);
        assert!(shard_success(&inst, &two, 0));
        let one = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Defect, Strategy::Defect]);
        assert!(!shard_success(&inst, &one, 0));
    }

    #[test]
    fn shard_success_counts_only_aligned_cooperators() {
        // n=100, tau=51, 51 cooperators of which 8 hold divergent views.
        let mut aligned = vec![true; 100];
        for a in aligned.iter_mut().take(8) {
            *a = false;
        }
        let inst = single_shard_instance(100, 51, 30, 30, aligned);
        let mut strategies = vec![Strategy::Defect; 100];
        for s in strategies.iter_mut().take(51) {
            *s = Strategy::Cooperate;
        }
        let profile = StrategyProfile::new(strategies);
        assert_eq!(profile.cooperators_in(inst.shape(), 0), 51);
        assert!(!shard_success(&inst, &profile, 0)); // only 43 aligned cooperators
    }

    #[test]
    fn uniform_all_defect_pays_mandatory_only() {
        let inst = single_shard_instance(4, 2, 500, 500, vec![true; 4]);
        let profile = StrategyProfile::all_defect(4);
        for i in 0..4 {
            let u = payoff_uniform(&inst, &profile, &costs(10.0, 5.0, 0.1), &rewards(1000.0, 2.0), i);
            assert!((u + 10.0).abs() < TOL);
        }
    }

    #[test]
    fn uniform_lone_processor_degenerate_game() {
        let inst = single_shard_instance(1, 1, 0, 0, vec![true]);
        let profile = StrategyProfile::all_cooperate(1);
        let u = payoff_uniform(&inst, &profile, &costs(10.0, 5.0, 0.0), &rewards(100.0, 7.0), 0);
        assert!((u - 85.0).abs() < TOL);
    }

    #[test]
    fn uniform_three_processor_example() {
        let inst = single_shard_instance(3, 2, 30, 30, vec![true, true, true]);
        let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]);
        let c = costs(10.0, 5.0, 0.1);
        let r = rewards(30.0, 1.0);
        assert!((payoff_uniform(&inst, &profile, &c, &r, 0) - 2.0).abs() < TOL);
        assert!((payoff_uniform(&inst, &profile, &c, &r, 1) - 2.0).abs() < TOL);
        assert!((payoff_uniform(&inst, &profile, &c, &r, 2) - 10.0).abs() < TOL);
    }

    #[test]
    fn fair_defector_always_pays_mandatory() {
        let inst = single_shard_instance(3, 2, 30, 30, vec![true, true, true]);
        let c = costs(10.0, 5.0, 0.1);
        let r = rewards(30.0, 1.0);
        for profile in [
            StrategyProfile::all_defect(3),
            StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]),
        ] {
            assert!((payoff_fair(&inst, &profile, &c, &r, 2) + 10.0).abs() < TOL);
        }
    }

    #[test]
    fn fair_cooperator_example() {
        let inst = single_shard_instance(3, 2, 30, 30, vec![true, true, true]);
        let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]);
        let u = payoff_fair(&inst, &profile, &costs(10.0, 5.0, 0.1), &rewards(30.0, 1.0), 0);
        assert!((u - 12.0).abs() < TOL); // 30/2 + 30/2 - 18
    }

    #[test]
    fn fair_failed_block_sinks_costs() {
        // Lone cooperator below tau: block fails, costs are sunk.
        let inst = single_shard_instance(3, 2, 30, 30, vec![true, true, true]);
        let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Defect, Strategy::Defect]);
        let u = payoff_fair(&inst, &profile, &costs(10.0, 5.0, 0.1), &rewards(30.0, 1.0), 0);
        assert!((u + 18.0).abs() < TOL);
    }

    #[test]
    fn total_fees_examples() {
        let shape = NetworkShape::new(vec![1, 1, 1], vec![1, 1, 1]).unwrap();
        let inst = EpochInstance::new(shape, vec![10, 20, 30], vec![10, 20, 30], vec![true; 3]).unwrap();
        assert_eq!(total_fees(&inst, &rewards(0.0, 0.0)), 0.0);
        assert!((total_fees(&inst, &rewards(0.0, 1.0)) - 60.0).abs() < TOL);

        let single = single_shard_instance(2, 1, 0, 0, vec![true, true]);
        assert_eq!(total_fees(&single, &rewards(5.0, 2.0)), 0.0);
    }

    #[test]
    fn aligned_view_must_match_consensus_count() {
        let shape = NetworkShape::regular(1, 2, 1).unwrap();
        let err = EpochInstance::new(shape, vec![5, 7], vec![5], vec![true, true]);
        assert!(matches!(err, Err(GameError::InvalidInstance(_))));
    }

    #[test]
    fn evaluate_epoch_consistency() {
        let inst = single_shard_instance(3, 2, 30, 30, vec![true, true, true]);
        let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]);
        let out = evaluate_epoch(&inst, &profile, &costs(10.0, 5.0, 0.1), &rewards(30.0, 1.0), RewardScheme::Fair);
        assert!(out.block_committed);
        assert_eq!(out.shard_success, vec![true]);
        assert!((out.cooperation_ratio - 2.0 / 3.0).abs() < TOL);
        assert!((out.utilities[0] - 12.0).abs() < TOL);
        assert!((out.utilities[2] + 10.0).abs() < TOL);
    }

    mod properties {
        use super::*;
        use crate::game::Strategy;
        use proptest::prelude::*;
        use proptest::strategy::Strategy as _;

        fn arb_money() -> impl proptest::strategy::Strategy<Value = f64> {
            // Log-uniform over several orders of magnitude.
            (-3.0f64..4.0).prop_map(|e| 10f64.powf(e))
        }

        proptest! {
            /// With a committed block under uniform sharing, a defector's edge over a
            /// same-shard cooperator with the same view is exactly the optional cost.
            #[test]
            fn uniform_defector_edge_is_optional_cost(
                cm in arb_money(), cf in arb_money(), cv in arb_money(),
                br in arb_money(), fee in arb_money(), tx in 0u64..10_000
            ) {
                let shape = NetworkShape::regular(1, 3, 2).unwrap();
                let inst = EpochInstance::new(shape, vec![tx; 3], vec![tx], vec![true; 3]).unwrap();
                let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]);
                let c = CostParams::new(cm, cf, cv).unwrap();
                let r = RewardParams::new(br, fee).unwrap();
                prop_assert!(block_committed(&inst, &profile));
                let gap = payoff_uniform(&inst, &profile, &c, &r, 2) - payoff_uniform(&inst, &profile, &c, &r, 0);
                let expected = cf + tx as f64 * cv;
                prop_assert!((gap - expected).abs() <= 1e-9 * expected.max(1.0));
            }

            /// Under all-defect, every processor nets the negated mandatory cost under
            /// both schemes.
            #[test]
            fn all_defect_utilities(
                cm in arb_money(), cf in arb_money(), cv in arb_money(),
                br in arb_money(), fee in arb_money(),
                n in 1usize..8, tx in 0u64..10_000
            ) {
                let shape = NetworkShape::regular(1, n, n.max(1)).unwrap();
                let inst = EpochInstance::new(shape, vec![tx; n], vec![tx], vec![true; n]).unwrap();
                let profile = StrategyProfile::all_defect(n);
                let c = CostParams::new(cm, cf, cv).unwrap();
                let r = RewardParams::new(br, fee).unwrap();
                for i in 0..n {
                    prop_assert_eq!(payoff_uniform(&inst, &profile, &c, &r, i), -cm);
                    prop_assert_eq!(payoff_fair(&inst, &profile, &c, &r, i), -cm);
                }
            }

            /// Flipping any processor to an (aligned) cooperation never un-commits a
            /// committed block.
            #[test]
            fn commit_monotone_in_cooperation(mask in 0u64..256, flip in 0usize..8) {
                let shape = NetworkShape::new(vec![4, 4], vec![2, 3]).unwrap();
                let inst = EpochInstance::new(shape, vec![10; 8], vec![10, 10], vec![true; 8]).unwrap();
                let profile = StrategyProfile::from_bitmask(8, mask);
                if profile.strategy(flip) == Strategy::Defect {
                    let flipped = profile.with_flipped(flip);
                    if block_committed(&inst, &profile) {
                        prop_assert!(block_committed(&inst, &flipped));
                    }
                }
            }

            /// Total fair-scheme benefit (rewards before costs) over a committed block
            /// is exactly the block reward plus total fees.
            #[test]
            fn fair_benefits_sum_to_total_reward(
                br in arb_money(), fee in arb_money(), mask in 0u64..256
            ) {
                let shape = NetworkShape::new(vec![4, 4], vec![2, 2]).unwrap();
                let inst = EpochInstance::new(shape, vec![25; 8], vec![25, 25], vec![true; 8]).unwrap();
                let profile = StrategyProfile::from_bitmask(8, mask);
                prop_assume!(block_committed(&inst, &profile));
                let c = CostParams::new(0.0, 0.0, 0.0).unwrap();
                let r = RewardParams::new(br, fee).unwrap();
                let paid: f64 = (0..8)
                    .filter(|&i| profile.strategy(i) == Strategy::Cooperate)
                    .map(|i| payoff_fair(&inst, &profile, &c, &r, i))
                    .sum();
                let expected = br + total_fees(&inst, &r);
                prop_assert!((paid - expected).abs() <= 1e-9 * expected.max(1.0));
            }

            /// Payoffs are pure: identical inputs give bitwise-identical outputs.
            #[test]
            fn payoffs_pure(mask in 0u64..64, i in 0usize..6) {
                let shape = NetworkShape::regular(2, 3, 2).unwrap();
                let inst = EpochInstance::new(shape, vec![7; 6], vec![7, 7], vec![true; 6]).unwrap();
                let profile = StrategyProfile::from_bitmask(6, mask);
                let c = CostParams::new(1.5, 0.25, 0.125).unwrap();
                let r = RewardParams::new(10.0, 0.5).unwrap();
                for scheme in [RewardScheme::Uniform, RewardScheme::Fair] {
                    let a = payoff(&inst, &profile, &c, &r, scheme, i);
                    let b = payoff(&inst, &profile, &c, &r, scheme, i);
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }
}
