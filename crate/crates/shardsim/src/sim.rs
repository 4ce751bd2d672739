//! Monte Carlo harness: randomized epoch generation, strategy dynamics, and
//! parameter sweeps.
//!
//! Every run is driven by a single master seed. Per-epoch seeds are derived
//! from (master, sweep index, iteration index), so results are reproducible
//! bit-for-bit regardless of thread scheduling; iterations within a sweep
//! point run in parallel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::game::{
    self, CostParams, EpochInstance, NetworkShape, RewardParams, RewardScheme, Strategy,
    StrategyProfile,
};
use crate::equilibrium::cooperation_surplus;
use crate::protocol::{
    self, Announcement, DigestSubmission, ParticipationDecision, ViewKey,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("epoch generation failed: {0}")]
    Epoch(String),
    #[error("coordination failed: {0}")]
    Protocol(String),
}

/// Reward scheme under simulation. The first two fix the scheme and let the
/// configured dynamics pick strategies; under the coordinated scheme every
/// processor follows the coordinator protocol and is settled through it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Uniform,
    Fair,
    Coordinated,
}

impl Scheme {
    /// Stable label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Uniform => "uniform",
            Scheme::Fair => "fair",
            Scheme::Coordinated => "coordinated",
        }
    }
}

/// How processors choose strategies under the uniform and fair schemes.
/// Ignored under [`Scheme::Coordinated`], where the protocol decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// Nonatomic reasoning: each processor treats the cooperator count as
    /// fixed and cooperates iff that makes cooperation strictly profitable;
    /// the count is iterated to a consistent fixed point, and an oscillation
    /// collapses to all-defect.
    ThresholdRule,
    /// Synchronous best response from all-cooperate, ties resolved to defect,
    /// capped at [`MAX_BEST_RESPONSE_ROUNDS`] rounds.
    BestResponse,
}

/// Round cap for [`Dynamics::BestResponse`].
pub const MAX_BEST_RESPONSE_ROUNDS: usize = 1000;

/// How each shard's consensus threshold is derived from its committee size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    /// Strict majority: `size/2 + 1`.
    Majority,
    /// `ceil(fraction * size)`, clamped to `[1, size]`.
    Fraction(f64),
    /// A fixed count, clamped to `[1, size]`.
    Absolute(usize),
}

impl TauRule {
    pub fn threshold(self, committee_size: usize) -> usize {
        match self {
            TauRule::Majority => committee_size / 2 + 1,
            TauRule::Fraction(f) => {
                ((f * committee_size as f64).ceil() as usize).clamp(1, committee_size)
            }
            TauRule::Absolute(a) => a.clamp(1, committee_size),
        }
    }

    pub fn validate(self) -> Result<(), SimError> {
        match self {
            TauRule::Majority => Ok(()),
            TauRule::Fraction(f) => {
                if f.is_finite() && f > 0.0 && f <= 1.0 {
                    Ok(())
                } else {
                    Err(SimError::InvalidConfig(format!(
                        "consensus fraction must be in (0, 1], got {f}"
                    )))
                }
            }
            TauRule::Absolute(a) => {
                if a >= 1 {
                    Ok(())
                } else {
                    Err(SimError::InvalidConfig("absolute consensus threshold must be >= 1".into()))
                }
            }
        }
    }
}

/// Full configuration of one simulation point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_processors: usize,
    pub committee_size: usize,
    pub tau_rule: TauRule,
    /// Probability that a processor's transaction view diverges from the
    /// shard's consensus view.
    pub divergence: f64,
    /// Expected consensus transaction volume per shard.
    pub avg_tx_per_shard: f64,
    pub costs: CostParams,
    pub rewards: RewardParams,
    pub scheme: Scheme,
    pub dynamics: Dynamics,
    /// Under [`Scheme::Coordinated`], also recruit divergent-view processors
    /// whose reported volume keeps cooperation profitable.
    pub recruit_divergent: bool,
    /// Epochs per sweep point.
    pub iterations: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_processors == 0 {
            return Err(SimError::InvalidConfig("num_processors must be >= 1".into()));
        }
        if self.committee_size == 0 {
            return Err(SimError::InvalidConfig("committee_size must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.divergence) {
            return Err(SimError::InvalidConfig(format!(
                "divergence must be in [0, 1], got {}",
                self.divergence
            )));
        }
        if !self.avg_tx_per_shard.is_finite() || self.avg_tx_per_shard < 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "avg_tx_per_shard must be finite and nonnegative, got {}",
                self.avg_tx_per_shard
            )));
        }
        if self.iterations == 0 {
            return Err(SimError::InvalidConfig("iterations must be >= 1".into()));
        }
        self.tau_rule.validate()
    }
}

/// Parameter swept across sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    AvgTxPerShard,
    BlockReward,
    NumProcessors,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::AvgTxPerShard => "avg_tx_per_shard",
            SweepVariable::BlockReward => "block_reward",
            SweepVariable::NumProcessors => "num_processors",
        }
    }

    pub fn apply(self, config: &mut SimConfig, value: f64) -> Result<(), SimError> {
        match self {
            SweepVariable::AvgTxPerShard => {
                config.avg_tx_per_shard = value;
            }
            SweepVariable::BlockReward => {
                config.rewards = RewardParams::new(value, config.rewards.per_tx_fee)
                    .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
            }
            SweepVariable::NumProcessors => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(SimError::InvalidConfig(format!(
                        "num_processors sweep values must be positive integers, got {value}"
                    )));
                }
                config.num_processors = value as usize;
            }
        }
        config.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Aggregated statistics for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub sweep_value: f64,
    /// Mean over epochs of the per-epoch cooperator fraction.
    pub mean_coop_ratio: f64,
    pub mean_defect_ratio: f64,
    /// Mean over epochs of the per-epoch mean cooperator utility (an epoch
    /// without cooperators contributes zero).
    pub mean_util_coop: f64,
    pub mean_util_defect: f64,
    /// `mean_coop_ratio * mean_util_coop + mean_defect_ratio * mean_util_defect`.
    pub weighted_mean_util: f64,
    pub block_commit_rate: f64,
    pub iterations: usize,
}

/// One sweep point: the swept value and its result, so a failed point does not
/// abort the rest of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub result: Result<AggregateResult, SimError>,
}

/// Derive the epoch seed for one iteration of one sweep point. Splitmix64
/// finalizer over a weighted index combination; changing any input changes
/// the stream.
pub fn derive_seed(master: u64, sweep_idx: u64, iter_idx: u64) -> u64 {
    let mut z = master
        .wrapping_add(sweep_idx.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(iter_idx.wrapping_mul(0xd1b5_4a32_d192_ed03))
        .wrapping_add(0x2545_f491_4f6c_dd1d);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn jitter(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.99..=1.01)
}

/// A generated epoch: the game instance plus each processor's view identity
/// for the coordinator protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedEpoch {
    pub instance: EpochInstance,
    pub views: Vec<ViewKey>,
}

/// Draw one epoch. Processor count and per-shard consensus volume receive a
/// uniform +/-1% jitter; the shard count is the processor count divided by the
/// committee size, rounded, at least one. Aligned processors hold exactly the
/// consensus view; divergent processors hold a unique view with a volume
/// jittered around the consensus volume.
pub fn generate_epoch(config: &SimConfig, rng: &mut impl Rng) -> Result<GeneratedEpoch, SimError> {
    let n = ((config.num_processors as f64 * jitter(rng)).round() as usize).max(1);
    let k = ((n as f64 / config.committee_size as f64).round() as usize).max(1);
    let base = n / k;
    let remainder = n % k;
    if base == 0 {
        return Err(SimError::Epoch(format!("{n} processors cannot fill {k} committees")));
    }
    let committee_sizes: Vec<usize> =
        (0..k).map(|j| base + usize::from(j < remainder)).collect();
    let thresholds: Vec<usize> =
        committee_sizes.iter().map(|&s| config.tau_rule.threshold(s)).collect();
    let shape = NetworkShape::new(committee_sizes, thresholds)
        .map_err(|e| SimError::Epoch(e.to_string()))?;

    let consensus_tx_counts: Vec<u64> = (0..k)
        .map(|_| (config.avg_tx_per_shard * jitter(rng)).round().max(0.0) as u64)
        .collect();

    let mut tx_counts = Vec::with_capacity(n);
    let mut view_aligned = Vec::with_capacity(n);
    let mut views = Vec::with_capacity(n);
    for j in shape.shards() {
        let y = consensus_tx_counts[j];
        for i in shape.members(j) {
            let aligned = rng.gen::<f64>() >= config.divergence;
            if aligned {
                tx_counts.push(y);
                view_aligned.push(true);
                views.push(ViewKey { tx_count: y, content_tag: 0 });
            } else {
                let tx = (y as f64 * jitter(rng)).round().max(0.0) as u64;
                tx_counts.push(tx);
                view_aligned.push(false);
                views.push(ViewKey { tx_count: tx, content_tag: i as u64 + 1 });
            }
        }
    }

    let instance = EpochInstance::new(shape, tx_counts, consensus_tx_counts, view_aligned)
        .map_err(|e| SimError::Epoch(e.to_string()))?;
    Ok(GeneratedEpoch { instance, views })
}

/// Draw the epoch an iteration would see, from an explicit derived seed (see
/// [`derive_seed`]).
pub fn generate_epoch_seeded(config: &SimConfig, seed: u64) -> Result<GeneratedEpoch, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_epoch(config, &mut rng)
}

/// Threshold-rule profile for the fair scheme.
///
/// Per shard, the candidate cooperator count starts at the aligned count and
/// is iterated: given count `l`, the next candidate set holds every member for
/// whom cooperating is strictly profitable with `l` cooperators splitting the
/// shard's rewards. A fixed point yields that set; a cycle or an empty set
/// yields all-defect, as does any fixed point that cannot reach the consensus
/// threshold.
pub fn fair_threshold_profile(
    instance: &EpochInstance,
    costs: &CostParams,
    rewards: &RewardParams,
) -> StrategyProfile {
    let shape = instance.shape();
    let k = shape.num_shards();
    let mut strategies = vec![Strategy::Defect; instance.num_processors()];
    for j in shape.shards() {
        let y = instance.consensus_tx_count(j);
        let tau = shape.consensus_threshold(j);
        let set_at = |l: usize| -> Vec<usize> {
            shape
                .members(j)
                .filter(|&i| {
                    cooperation_surplus(costs, rewards, k, l, y, instance.tx_count(i)) > 0.0
                })
                .collect()
        };
        let mut l = instance.aligned_count(j);
        let mut seen = std::collections::BTreeSet::new();
        let stable = loop {
            if l == 0 || !seen.insert(l) {
                break None;
            }
            let next = set_at(l);
            if next.len() == l {
                break Some(next);
            }
            l = next.len();
        };
        if let Some(set) = stable {
            let aligned_in_set = set.iter().filter(|&&i| instance.is_aligned(i)).count();
            if aligned_in_set >= tau {
                for i in set {
                    strategies[i] = Strategy::Cooperate;
                }
            }
        }
    }
    StrategyProfile::new(strategies)
}

/// Outcome of a best-response iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsResult {
    pub profile: StrategyProfile,
    pub converged: bool,
    pub rounds: usize,
}

/// Synchronous best response from all-cooperate: each round every processor
/// picks the strategy with the strictly higher payoff against the current
/// profile, defecting on ties. Stops at a fixed point or after
/// [`MAX_BEST_RESPONSE_ROUNDS`] rounds.
pub fn best_response_dynamics(
    instance: &EpochInstance,
    costs: &CostParams,
    rewards: &RewardParams,
    scheme: RewardScheme,
) -> DynamicsResult {
    let n = instance.num_processors();
    let mut profile = StrategyProfile::all_cooperate(n);
    for round in 1..=MAX_BEST_RESPONSE_ROUNDS {
        let next = StrategyProfile::new(
            (0..n)
                .map(|i| {
                    let as_is = game::payoff(instance, &profile, costs, rewards, scheme, i);
                    let flipped =
                        game::payoff(instance, &profile.with_flipped(i), costs, rewards, scheme, i);
                    let (coop, defect) = match profile.strategy(i) {
                        Strategy::Cooperate => (as_is, flipped),
                        Strategy::Defect => (flipped, as_is),
                    };
                    if coop > defect { Strategy::Cooperate } else { Strategy::Defect }
                })
                .collect(),
        );
        if next == profile {
            return DynamicsResult { profile, converged: true, rounds: round };
        }
        profile = next;
    }
    DynamicsResult { profile, converged: false, rounds: MAX_BEST_RESPONSE_ROUNDS }
}

/// Per-epoch statistics feeding the aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub cooperation_ratio: f64,
    pub block_committed: bool,
    /// Mean utility over cooperators, zero if there are none.
    pub mean_util_coop: f64,
    /// Mean utility over defectors, zero if there are none.
    pub mean_util_defect: f64,
}

fn stats_from(
    profile: &StrategyProfile,
    utilities: &[f64],
    block_committed: bool,
) -> EpochStats {
    let n = profile.len();
    let mut coop_sum = 0.0;
    let mut coop_n = 0usize;
    let mut defect_sum = 0.0;
    let mut defect_n = 0usize;
    for i in 0..n {
        match profile.strategy(i) {
            Strategy::Cooperate => {
                coop_sum += utilities[i];
                coop_n += 1;
            }
            Strategy::Defect => {
                defect_sum += utilities[i];
                defect_n += 1;
            }
        }
    }
    EpochStats {
        cooperation_ratio: coop_n as f64 / n as f64,
        block_committed,
        mean_util_coop: if coop_n > 0 { coop_sum / coop_n as f64 } else { 0.0 },
        mean_util_defect: if defect_n > 0 { defect_sum / defect_n as f64 } else { 0.0 },
    }
}

/// Run the coordinator protocol end to end on one epoch: digest submission,
/// per-shard coordination, participation decisions (followed exactly), and
/// settlement. Returns the played profile, the per-shard announcements, the
/// decisions, and the settled per-processor net utilities.
pub fn run_coordinated_epoch(
    epoch: &GeneratedEpoch,
    costs: &CostParams,
    rewards: &RewardParams,
    recruit_divergent: bool,
) -> Result<(StrategyProfile, Vec<Announcement>, Vec<ParticipationDecision>, Vec<f64>), SimError> {
    let instance = &epoch.instance;
    let shape = instance.shape();
    let k = shape.num_shards();

    let mut announcements = Vec::with_capacity(k);
    let mut decisions = Vec::with_capacity(instance.num_processors());
    for j in shape.shards() {
        let submissions: Vec<DigestSubmission> = shape
            .members(j)
            .map(|i| DigestSubmission {
                view: protocol::submit_view_digest(i, &epoch.views[i]),
                tx_count: epoch.views[i].tx_count,
            })
            .collect();
        let announcement = protocol::coordinate(
            j,
            &submissions,
            shape.consensus_threshold(j),
            k,
            costs,
            rewards,
            recruit_divergent,
        )
        .map_err(|e| SimError::Protocol(e.to_string()))?;
        for i in shape.members(j) {
            decisions.push(protocol::participate(
                i,
                &announcement,
                epoch.views[i].tx_count,
                costs,
                rewards,
                k,
            ));
        }
        announcements.push(announcement);
    }

    let profile =
        StrategyProfile::new(decisions.iter().map(|d| d.decision).collect());
    let ledger = protocol::settle(instance, &announcements, &decisions, &profile, rewards);
    let utilities: Vec<f64> = (0..instance.num_processors())
        .map(|i| protocol::settled_utility(&ledger, instance, &profile, costs, i))
        .collect();
    Ok((profile, announcements, decisions, utilities))
}

/// Simulate one epoch under the configured scheme and dynamics.
pub fn run_epoch(config: &SimConfig, rng: &mut impl Rng) -> Result<EpochStats, SimError> {
    let epoch = generate_epoch(config, rng)?;
    let instance = &epoch.instance;
    match config.scheme {
        Scheme::Uniform | Scheme::Fair => {
            let scheme = match config.scheme {
                Scheme::Uniform => RewardScheme::Uniform,
                _ => RewardScheme::Fair,
            };
            let profile = match (config.scheme, config.dynamics) {
                // Under uniform sharing the reward is independent of one's own
                // strategy whenever the committee is not pivotal, so the
                // nonatomic rule is to defect.
                (Scheme::Uniform, Dynamics::ThresholdRule) => {
                    StrategyProfile::all_defect(instance.num_processors())
                }
                (Scheme::Fair, Dynamics::ThresholdRule) => {
                    fair_threshold_profile(instance, &config.costs, &config.rewards)
                }
                (_, Dynamics::BestResponse) => {
                    best_response_dynamics(instance, &config.costs, &config.rewards, scheme).profile
                }
                (Scheme::Coordinated, _) => unreachable!(),
            };
            let outcome =
                game::evaluate_epoch(instance, &profile, &config.costs, &config.rewards, scheme);
            Ok(stats_from(&profile, &outcome.utilities, outcome.block_committed))
        }
        Scheme::Coordinated => {
            let (profile, _, _, utilities) = run_coordinated_epoch(
                &epoch,
                &config.costs,
                &config.rewards,
                config.recruit_divergent,
            )?;
            let committed = game::block_committed(instance, &profile);
            Ok(stats_from(&profile, &utilities, committed))
        }
    }
}

/// Run all iterations of one sweep point in parallel and aggregate.
pub fn run_point(config: &SimConfig, sweep_idx: u64, sweep_value: f64) -> Result<AggregateResult, SimError> {
    config.validate()?;
    let per_iter: Vec<Result<EpochStats, SimError>> = (0..config.iterations as u64)
        .into_par_iter()
        .map(|it| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, sweep_idx, it));
            run_epoch(config, &mut rng)
        })
        .collect();

    let mut coop = 0.0;
    let mut util_coop = 0.0;
    let mut util_defect = 0.0;
    let mut commits = 0usize;
    for stats in &per_iter {
        let stats = stats.as_ref().map_err(Clone::clone)?;
        coop += stats.cooperation_ratio;
        util_coop += stats.mean_util_coop;
        util_defect += stats.mean_util_defect;
        commits += usize::from(stats.block_committed);
    }
    let iters = config.iterations as f64;
    let mean_coop_ratio = coop / iters;
    let mean_util_coop = util_coop / iters;
    let mean_util_defect = util_defect / iters;
    Ok(AggregateResult {
        sweep_value,
        mean_coop_ratio,
        mean_defect_ratio: 1.0 - mean_coop_ratio,
        mean_util_coop,
        mean_util_defect,
        weighted_mean_util: mean_coop_ratio * mean_util_coop
            + (1.0 - mean_coop_ratio) * mean_util_defect,
        block_commit_rate: commits as f64 / iters,
        iterations: config.iterations,
    })
}

/// Run a sweep. A point whose configuration or simulation fails is reported as
/// failed without aborting the remaining points.
pub fn run_sweep(base: &SimConfig, spec: &SweepSpec) -> Vec<SweepPoint> {
    spec.values
        .iter()
        .enumerate()
        .map(|(idx, &value)| {
            let mut config = base.clone();
            let result = spec
                .variable
                .apply(&mut config, value)
                .and_then(|()| run_point(&config, idx as u64, value));
            SweepPoint { value, result }
        })
        .collect()
}
