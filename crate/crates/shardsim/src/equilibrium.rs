//! Cooperation thresholds, unilateral-deviation analysis, Nash verification,
//! and exhaustive equilibrium enumeration on small instances.
//!
//! The enumeration path doubles as the brute-force oracle for the analytical
//! threshold conditions: `is_nash` is ground truth, the structural checks in
//! [`check_cooperative_equilibrium`] are predicates under test.

use thiserror::Error;

use crate::game::{
    self, payoff, CostParams, EpochInstance, RewardParams, RewardScheme, Strategy, StrategyProfile,
};

/// Exhaustive enumeration is capped to keep the 2^N profile scan tractable.
pub const MAX_ENUMERATION_PROCESSORS: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquilibriumError {
    #[error("instance has {0} processors; exhaustive enumeration is limited to {MAX_ENUMERATION_PROCESSORS}")]
    SizeGuard(usize),
    #[error("divergent-view threshold is undefined when the per-transaction verification cost is zero")]
    UndefinedThreshold,
}

/// Sign of the denominator `r/l - c^v` in the aligned cooperation threshold.
/// When it is not positive, the rearranged threshold form flips or degenerates
/// and only the underlying profitability inequality is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenominatorSign {
    Positive,
    Zero,
    Negative,
}

/// The two transaction-count thresholds governing cooperation under fair
/// sharing, for reporting. Decision procedures evaluate the underlying
/// profitability inequalities directly (valid for every denominator sign).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Minimum transaction count above which an aligned cooperator profits;
    /// `±inf` when the denominator vanishes.
    pub aligned_min_tx: f64,
    /// Maximum transaction count below which a divergent-view cooperator
    /// profits; `None` when verification is free.
    pub divergent_max_tx: Option<f64>,
    pub aligned_denominator: DenominatorSign,
}

impl Thresholds {
    pub fn compute(
        costs: &CostParams,
        rewards: &RewardParams,
        num_shards: usize,
        cooperators: usize,
        consensus_tx_count: u64,
    ) -> Self {
        Self {
            aligned_min_tx: aligned_tx_threshold(costs, rewards, num_shards, cooperators),
            divergent_max_tx: divergent_tx_threshold(costs, rewards, num_shards, cooperators, consensus_tx_count)
                .ok(),
            aligned_denominator: aligned_denominator_sign(costs, rewards, cooperators),
        }
    }
}

pub fn aligned_denominator_sign(costs: &CostParams, rewards: &RewardParams, cooperators: usize) -> DenominatorSign {
    let d = rewards.per_tx_fee / cooperators as f64 - costs.per_tx_verification;
    if d > 0.0 {
        DenominatorSign::Positive
    } else if d < 0.0 {
        DenominatorSign::Negative
    } else {
        DenominatorSign::Zero
    }
}

/// Transaction-count threshold for an aligned cooperator in a shard with
/// `cooperators` cooperating members:
/// `(c^f - BR/(k*l)) / (r/l - c^v)`.
///
/// With a vanishing denominator the threshold is `+inf` for a positive
/// numerator (cooperation never profitable through volume) and `-inf`
/// otherwise.
pub fn aligned_tx_threshold(
    costs: &CostParams,
    rewards: &RewardParams,
    num_shards: usize,
    cooperators: usize,
) -> f64 {
    debug_assert!(num_shards >= 1 && cooperators >= 1);
    let l = cooperators as f64;
    let numerator = costs.fixed_optional - rewards.block_reward / (num_shards as f64 * l);
    let denominator = rewards.per_tx_fee / l - costs.per_tx_verification;
    if denominator != 0.0 {
        numerator / denominator
    } else if numerator > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Transaction-count ceiling for a divergent-view cooperator:
/// `(BR/(k*l) + r*|y|/l - c^f) / c^v`.
///
/// Undefined when verification is free; divergent cooperation is then
/// profitable iff the numerator is nonnegative, independent of volume.
pub fn divergent_tx_threshold(
    costs: &CostParams,
    rewards: &RewardParams,
    num_shards: usize,
    cooperators: usize,
    consensus_tx_count: u64,
) -> Result<f64, EquilibriumError> {
    debug_assert!(num_shards >= 1 && cooperators >= 1);
    if costs.per_tx_verification == 0.0 {
        return Err(EquilibriumError::UndefinedThreshold);
    }
    let l = cooperators as f64;
    let numerator = rewards.block_reward / (num_shards as f64 * l)
        + rewards.per_tx_fee * consensus_tx_count as f64 / l
        - costs.fixed_optional;
    Ok(numerator / costs.per_tx_verification)
}

/// Net gain of cooperating (relative to paying only the mandatory cost) for a
/// shard member, assuming the block commits and the shard ends with
/// `cooperators` cooperators splitting its rewards. This is the inequality
/// behind both thresholds; it is valid for every denominator sign.
pub fn cooperation_surplus(
    costs: &CostParams,
    rewards: &RewardParams,
    num_shards: usize,
    cooperators: usize,
    consensus_tx_count: u64,
    own_tx_count: u64,
) -> f64 {
    let l = cooperators as f64;
    rewards.block_reward / (num_shards as f64 * l)
        + rewards.per_tx_fee * consensus_tx_count as f64 / l
        - costs.fixed_optional
        - own_tx_count as f64 * costs.per_tx_verification
}

/// Outcome of flipping one processor's strategy while all others stand pat.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub processor: usize,
    pub current_strategy: Strategy,
    pub current_utility: f64,
    pub deviation_utility: f64,
    /// Strict improvement only; ties keep the current strategy.
    pub profitable: bool,
}

/// Result of a full single-flip scan over all processors.
#[derive(Debug, Clone, PartialEq)]
pub struct NashCertificate {
    pub profile: StrategyProfile,
    pub is_nash: bool,
    /// Every profitable deviation found; empty iff `is_nash`.
    pub witnesses: Vec<DeviationReport>,
}

/// Compare a processor's utility under the profile against the profile with
/// only that processor's strategy flipped.
pub fn unilateral_deviation(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
    scheme: RewardScheme,
    processor: usize,
) -> DeviationReport {
    let current_utility = payoff(instance, profile, costs, rewards, scheme, processor);
    let flipped = profile.with_flipped(processor);
    let deviation_utility = payoff(instance, &flipped, costs, rewards, scheme, processor);
    DeviationReport {
        processor,
        current_strategy: profile.strategy(processor),
        current_utility,
        deviation_utility,
        profitable: deviation_utility > current_utility,
    }
}

/// Scan all processors for profitable unilateral deviations.
pub fn is_nash(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
    scheme: RewardScheme,
) -> NashCertificate {
    let witnesses: Vec<DeviationReport> = (0..instance.num_processors())
        .map(|i| unilateral_deviation(instance, profile, costs, rewards, scheme, i))
        .filter(|report| report.profitable)
        .collect();
    NashCertificate { profile: profile.clone(), is_nash: witnesses.is_empty(), witnesses }
}

/// Brute-force scan of all `2^N` strategy profiles, returning every Nash
/// equilibrium in bitmask order.
pub fn enumerate_nash(
    instance: &EpochInstance,
    costs: &CostParams,
    rewards: &RewardParams,
    scheme: RewardScheme,
) -> Result<Vec<NashCertificate>, EquilibriumError> {
    let n = instance.num_processors();
    if n > MAX_ENUMERATION_PROCESSORS {
        return Err(EquilibriumError::SizeGuard(n));
    }
    let mut equilibria = Vec::new();
    for mask in 0..1u64 << n {
        let profile = StrategyProfile::from_bitmask(n, mask);
        let certificate = is_nash(instance, &profile, costs, rewards, scheme);
        if certificate.is_nash {
            equilibria.push(certificate);
        }
    }
    Ok(equilibria)
}

/// Structural conditions under which a fair-sharing profile is a cooperative
/// equilibrium candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumConditions {
    /// Every shard reaches its consensus threshold with aligned cooperators.
    pub quorum_met: bool,
    /// Per processor: cooperators must not profit from leaving (evaluated at
    /// the shard's current cooperator count); defectors must not profit from
    /// joining (evaluated at the post-join count). Always true where vacuous.
    pub per_processor: Vec<bool>,
    pub overall: bool,
}

/// Evaluate the fair-scheme cooperative-equilibrium conditions for a profile:
///
/// 1. every shard's consensus quorum is met;
/// 2. every aligned cooperator's volume keeps cooperation profitable
///    (the inequality behind [`aligned_tx_threshold`]);
/// 3. every divergent-view cooperator's volume stays below the ceiling behind
///    [`divergent_tx_threshold`];
/// 4. the cooperative set is maximal: no defector would strictly profit by
///    joining, with the split evaluated at the enlarged cooperator count.
///
/// Conditions 2 and 3 are evaluated as profitability inequalities rather than
/// rearranged threshold comparisons, so degenerate denominators need no
/// special casing. Nonstrict comparisons are used for cooperators (ties keep
/// the current strategy) and strict for the joining defector.
pub fn check_cooperative_equilibrium(
    instance: &EpochInstance,
    profile: &StrategyProfile,
    costs: &CostParams,
    rewards: &RewardParams,
) -> EquilibriumConditions {
    let shape = instance.shape();
    let k = shape.num_shards();
    let quorum_met = shape.shards().all(|j| game::shard_success(instance, profile, j));

    let mut per_processor = vec![true; instance.num_processors()];
    for j in shape.shards() {
        let l = profile.cooperators_in(shape, j);
        let y = instance.consensus_tx_count(j);
        for i in shape.members(j) {
            let tx = instance.tx_count(i);
            per_processor[i] = match profile.strategy(i) {
                Strategy::Cooperate => {
                    // l >= 1 whenever this branch is reached.
                    cooperation_surplus(costs, rewards, k, l, y, tx) >= 0.0
                }
                Strategy::Defect => {
                    !(cooperation_surplus(costs, rewards, k, l + 1, y, tx) > 0.0)
                }
            };
        }
    }

    let overall = quorum_met && per_processor.iter().all(|&ok| ok);
    EquilibriumConditions { quorum_met, per_processor, overall }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::NetworkShape;

    const TOL: f64 = 1e-9;

    fn costs(m: f64, f: f64, v: f64) -> CostParams {
        CostParams::new(m, f, v).unwrap()
    }

    fn rewards(br: f64, r: f64) -> RewardParams {
        RewardParams::new(br, r).unwrap()
    }

    fn uniform_instance(n: usize, tau: usize, tx: u64) -> EpochInstance {
        let shape = NetworkShape::regular(1, n, tau).unwrap();
        EpochInstance::new(shape, vec![tx; n], vec![tx], vec![true; n]).unwrap()
    }

    #[test]
    fn aligned_threshold_examples() {
        let t = aligned_tx_threshold(&costs(0.0, 5.0, 0.05), &rewards(1000.0, 1.0), 1, 10);
        assert!((t + 1900.0).abs() < TOL);

        let t = aligned_tx_threshold(&costs(0.0, 5.0, 0.0), &rewards(0.0, 1.0), 1, 1);
        assert!((t - 5.0).abs() < TOL);

        // Vanishing denominator, positive numerator.
        let t = aligned_tx_threshold(&costs(0.0, 5.0, 0.1), &rewards(0.0, 1.0), 1, 10);
        assert_eq!(t, f64::INFINITY);
        assert_eq!(
            aligned_denominator_sign(&costs(0.0, 5.0, 0.1), &rewards(0.0, 1.0), 10),
            DenominatorSign::Zero
        );
    }

    #[test]
    fn divergent_threshold_examples() {
        let t = divergent_tx_threshold(&costs(0.0, 5.0, 0.1), &rewards(100.0, 1.0), 1, 10, 50).unwrap();
        assert!((t - 100.0).abs() < TOL);

        let t = divergent_tx_threshold(&costs(0.0, 0.0, 1.0), &rewards(0.0, 0.0), 1, 3, 123).unwrap();
        assert_eq!(t, 0.0);

        assert_eq!(
            divergent_tx_threshold(&costs(0.0, 5.0, 0.0), &rewards(100.0, 1.0), 1, 10, 50),
            Err(EquilibriumError::UndefinedThreshold)
        );
    }

    #[test]
    fn thresholds_scale_invariant() {
        // Both thresholds are homogeneous of degree zero in the money unit.
        for factor in [0.01, 3.0, 1e4] {
            let c1 = costs(10.0, 5.0, 0.05);
            let r1 = rewards(1000.0, 1.0);
            let c2 = costs(10.0 * factor, 5.0 * factor, 0.05 * factor);
            let r2 = rewards(1000.0 * factor, 1.0 * factor);
            let a1 = aligned_tx_threshold(&c1, &r1, 2, 4);
            let a2 = aligned_tx_threshold(&c2, &r2, 2, 4);
            assert!((a1 - a2).abs() <= 1e-9 * a1.abs().max(1.0));
            let d1 = divergent_tx_threshold(&c1, &r1, 2, 4, 77).unwrap();
            let d2 = divergent_tx_threshold(&c2, &r2, 2, 4, 77).unwrap();
            assert!((d1 - d2).abs() <= 1e-9 * d1.abs().max(1.0));
        }
    }

    #[test]
    fn all_defect_deviation_never_profitable() {
        let inst = uniform_instance(5, 3, 100);
        let profile = StrategyProfile::all_defect(5);
        let c = costs(10.0, 5.0, 0.1);
        let r = rewards(500.0, 1.0);
        for scheme in [RewardScheme::Uniform, RewardScheme::Fair] {
            for i in 0..5 {
                let report = unilateral_deviation(&inst, &profile, &c, &r, scheme, i);
                assert!(!report.profitable);
                assert!((report.current_utility + 10.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn all_cooperate_uniform_deviation_profitable_with_slack() {
        // Every shard has slack above tau, so a lone defector still sees the
        // block committed and pockets the optional cost.
        let inst = uniform_instance(5, 3, 100);
        let profile = StrategyProfile::all_cooperate(5);
        let c = costs(10.0, 5.0, 0.1);
        let r = rewards(500.0, 1.0);
        let report = unilateral_deviation(&inst, &profile, &c, &r, RewardScheme::Uniform, 0);
        assert!(report.profitable);
        let gain = report.deviation_utility - report.current_utility;
        assert!((gain - 15.0).abs() < TOL); // c^f + |x| c^v
    }

    #[test]
    fn fair_aligned_cooperator_stays_when_profitable() {
        // Cooperation surplus is positive and the shard has slack, so leaving
        // only forfeits the share.
        let inst = uniform_instance(5, 3, 1000);
        let profile = StrategyProfile::new(vec![
            Strategy::Cooperate,
            Strategy::Cooperate,
            Strategy::Cooperate,
            Strategy::Cooperate,
            Strategy::Defect,
        ]);
        let c = costs(10.0, 5.0, 0.05);
        let r = rewards(1000.0, 1.0);
        assert!(cooperation_surplus(&c, &r, 1, 4, 1000, 1000) > 0.0);
        let report = unilateral_deviation(&inst, &profile, &c, &r, RewardScheme::Fair, 0);
        assert!(!report.profitable);
    }

    #[test]
    fn is_nash_examples() {
        let c = costs(10.0, 5.0, 0.1);
        let r = rewards(500.0, 1.0);
        let inst = uniform_instance(5, 3, 100);

        for scheme in [RewardScheme::Uniform, RewardScheme::Fair] {
            let cert = is_nash(&inst, &StrategyProfile::all_defect(5), &c, &r, scheme);
            assert!(cert.is_nash);
            assert!(cert.witnesses.is_empty());
        }

        let cert = is_nash(&inst, &StrategyProfile::all_cooperate(5), &c, &r, RewardScheme::Uniform);
        assert!(!cert.is_nash);
        assert!(!cert.witnesses.is_empty());
    }

    #[test]
    fn uniform_exact_quorum_is_nash_when_share_covers_optional_cost() {
        // Exactly tau cooperators per shard: a leaving cooperator kills the
        // block, a joining defector gains nothing under uniform sharing.
        let inst = uniform_instance(3, 2, 30);
        let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Cooperate, Strategy::Defect]);
        let c = costs(10.0, 5.0, 0.1);
        let r = rewards(300.0, 1.0); // share = (300+30)/3 = 110 >> c^o = 8
        let cert = is_nash(&inst, &profile, &c, &r, RewardScheme::Uniform);
        assert!(cert.is_nash);
    }

    #[test]
    fn enumerate_small_games() {
        // Costs dominate rewards: the only equilibrium is all-defect.
        let inst = uniform_instance(2, 2, 10);
        let c = costs(10.0, 50.0, 1.0);
        let r = rewards(1.0, 0.0);
        let found = enumerate_nash(&inst, &c, &r, RewardScheme::Fair).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].profile, StrategyProfile::all_defect(2));

        // Profitable cooperation: all-defect plus every 2-of-3 cooperator set.
        let inst = uniform_instance(3, 2, 100);
        let c = costs(10.0, 5.0, 0.01);
        let r = rewards(100.0, 1.0);
        assert!(cooperation_surplus(&c, &r, 1, 2, 100, 100) > 0.0);
        // Three cooperators must not be stable for this check to be sharp.
        assert!(cooperation_surplus(&c, &r, 1, 3, 100, 100) > 0.0);
        let found = enumerate_nash(&inst, &c, &r, RewardScheme::Fair).unwrap();
        let masks: Vec<u64> = found
            .iter()
            .map(|cert| {
                (0..3).fold(0u64, |m, i| {
                    if cert.profile.strategy(i) == Strategy::Cooperate { m | 1 << i } else { m }
                })
            })
            .collect();
        assert!(masks.contains(&0)); // all-defect always present
        for two_coop in [0b011, 0b101, 0b110] {
            // With surplus positive even at l=3, the 2-sets are not Nash (a
            // defector would join); the full set is.
            assert!(!masks.contains(&two_coop));
        }
        assert!(masks.contains(&0b111));
    }

    #[test]
    fn enumerate_two_cooperator_equilibria_without_join_incentive() {
        // Surplus positive at l=2 but negative at l=3: exactly the 2-sets and
        // all-defect are equilibria.
        let inst = uniform_instance(3, 2, 100);
        let c = costs(10.0, 80.0, 0.01);
        let r = rewards(100.0, 1.0);
        assert!(cooperation_surplus(&c, &r, 1, 2, 100, 100) > 0.0);
        assert!(cooperation_surplus(&c, &r, 1, 3, 100, 100) < 0.0);
        let found = enumerate_nash(&inst, &c, &r, RewardScheme::Fair).unwrap();
        assert_eq!(found.len(), 4); // all-defect + three 2-cooperator sets
        assert_eq!(found[0].profile, StrategyProfile::all_defect(3));
    }

    #[test]
    fn enumeration_size_guard() {
        let shape = NetworkShape::regular(1, 21, 11).unwrap();
        let inst = EpochInstance::new(shape, vec![1; 21], vec![1], vec![true; 21]).unwrap();
        let err = enumerate_nash(&inst, &costs(1.0, 1.0, 1.0), &rewards(1.0, 1.0), RewardScheme::Fair);
        assert_eq!(err, Err(EquilibriumError::SizeGuard(21)));
    }

    #[test]
    fn cooperative_conditions_examples() {
        let c = costs(10.0, 5.0, 0.01);
        let r = rewards(100.0, 1.0);

        // Below quorum.
        let inst = uniform_instance(3, 2, 100);
        let profile = StrategyProfile::new(vec![Strategy::Cooperate, Strategy::Defect, Strategy::Defect]);
        let report = check_cooperative_equilibrium(&inst, &profile, &c, &r);
        assert!(!report.quorum_met);
        assert!(!report.overall);

        // All aligned cooperators, quorum met, cooperation profitable at the
        // full set, so the maximal set passes.
        let profile = StrategyProfile::all_cooperate(3);
        let report = check_cooperative_equilibrium(&inst, &profile, &c, &r);
        assert!(report.quorum_met);
        assert!(report.overall);

        // A divergent-view cooperator whose volume exceeds the ceiling.
        let shape = NetworkShape::regular(1, 3, 2).unwrap();
        let heavy = 100_000;
        let inst = EpochInstance::new(shape, vec![100, 100, heavy], vec![100], vec![true, true, false]).unwrap();
        let ceiling = divergent_tx_threshold(&c, &r, 1, 3, 100).unwrap();
        assert!((heavy as f64) > ceiling);
        let profile = StrategyProfile::all_cooperate(3);
        let report = check_cooperative_equilibrium(&inst, &profile, &c, &r);
        assert!(!report.per_processor[2]);
        assert!(!report.overall);
    }
}
