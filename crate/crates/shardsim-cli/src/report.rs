//! Human-readable reports: equilibrium analysis of a small explicit game, and
//! a full coordinator-protocol trace of one epoch.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use shardsim::equilibrium::{
    self, check_cooperative_equilibrium, enumerate_nash, EquilibriumError, Thresholds,
};
use shardsim::game::{
    CostParams, EpochInstance, NetworkShape, RewardParams, RewardScheme, Strategy, StrategyProfile,
};
use shardsim::protocol::{self, DigestSubmission, Verdict};
use shardsim::sim::{self, derive_seed, Scheme, SimConfig};

use crate::config::{parse_scheme, ConfigFile, CostsSection, RewardsSection};
use crate::error::CliError;

/// Explicit small-game description for `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub game: GameSection,
    pub costs: CostsSection,
    pub rewards: RewardsSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub committee_sizes: Vec<usize>,
    pub consensus_thresholds: Vec<usize>,
    pub tx_counts: Vec<u64>,
    pub consensus_tx_counts: Vec<u64>,
    pub aligned: Vec<bool>,
    /// `"uniform"` or `"fair"`.
    pub scheme: String,
}

impl GameFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn profile_string(profile: &StrategyProfile) -> String {
    profile
        .strategies()
        .iter()
        .map(|s| match s {
            Strategy::Cooperate => 'C',
            Strategy::Defect => 'D',
        })
        .collect()
}

/// Equilibrium report: per-shard cooperation thresholds, the complete list of
/// pure Nash equilibria, and deviation witnesses for all-cooperate.
pub fn analyze_report(file: &GameFile) -> Result<String, CliError> {
    let costs = CostParams::new(
        file.costs.mandatory,
        file.costs.fixed_optional,
        file.costs.per_tx_verification,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let rewards = RewardParams::new(file.rewards.block_reward, file.rewards.per_tx_fee)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let scheme = match file.game.scheme.as_str() {
        "uniform" => RewardScheme::Uniform,
        "fair" => RewardScheme::Fair,
        other => {
            return Err(CliError::Config(format!(
                "unknown scheme {other:?}; analyze supports uniform or fair"
            )))
        }
    };
    let shape = NetworkShape::new(
        file.game.committee_sizes.clone(),
        file.game.consensus_thresholds.clone(),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let instance = EpochInstance::new(
        shape,
        file.game.tx_counts.clone(),
        file.game.consensus_tx_counts.clone(),
        file.game.aligned.clone(),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    let n = instance.num_processors();
    let k = instance.shape().num_shards();
    let mut out = String::new();
    writeln!(out, "game: {n} processors, {k} shard(s), scheme {}", file.game.scheme).unwrap();

    for j in instance.shape().shards() {
        let l = instance.aligned_count(j).max(1);
        let thresholds =
            Thresholds::compute(&costs, &rewards, k, l, instance.consensus_tx_count(j));
        write!(
            out,
            "shard {j}: size {}, tau {}, aligned {}, y {}; at l={l}: aligned_min_tx {}",
            instance.shape().committee_size(j),
            instance.shape().consensus_threshold(j),
            instance.aligned_count(j),
            instance.consensus_tx_count(j),
            thresholds.aligned_min_tx,
        )
        .unwrap();
        match thresholds.divergent_max_tx {
            Some(ceiling) => writeln!(out, ", divergent_max_tx {ceiling}").unwrap(),
            None => writeln!(out, ", divergent_max_tx undefined (free verification)").unwrap(),
        }
    }

    let equilibria = enumerate_nash(&instance, &costs, &rewards, scheme).map_err(|e| match e {
        EquilibriumError::SizeGuard(n) => {
            CliError::SizeGuard(format!("game has {n} processors, enumeration caps at {}",
                equilibrium::MAX_ENUMERATION_PROCESSORS))
        }
        other => CliError::Config(other.to_string()),
    })?;

    writeln!(out, "pure Nash equilibria: {}", equilibria.len()).unwrap();
    for cert in &equilibria {
        write!(
            out,
            "  {}  cooperators {}",
            profile_string(&cert.profile),
            cert.profile.total_cooperators()
        )
        .unwrap();
        if scheme == RewardScheme::Fair {
            let conditions = check_cooperative_equilibrium(&instance, &cert.profile, &costs, &rewards);
            write!(out, "  cooperative-equilibrium conditions: {}", conditions.overall).unwrap();
        }
        writeln!(out).unwrap();
    }

    let all_cooperate = StrategyProfile::all_cooperate(n);
    let cert = equilibrium::is_nash(&instance, &all_cooperate, &costs, &rewards, scheme);
    if cert.is_nash {
        writeln!(out, "all-cooperate: Nash equilibrium").unwrap();
    } else {
        writeln!(out, "all-cooperate: not a Nash equilibrium; profitable deviations:").unwrap();
        for w in &cert.witnesses {
            writeln!(
                out,
                "  processor {} gains {} by defecting",
                w.processor,
                w.deviation_utility - w.current_utility
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn hex_prefix(digest: &[u8; 32]) -> String {
    digest[..4].iter().map(|b| format!("{b:02x}")).collect()
}

/// Full coordinator-protocol trace for one epoch of a coordinated-scheme
/// config: digest groups, verdicts, thresholds, every participation decision
/// with its reason, and the settlement ledger. `deviate` flips one processor's
/// played strategy away from its recommendation.
pub fn trace_report(
    file: &ConfigFile,
    seed_override: Option<u64>,
    deviate: Option<usize>,
) -> Result<String, CliError> {
    let (mut config, _) = file.resolve()?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if parse_scheme(&file.run.scheme)? != Scheme::Coordinated {
        return Err(CliError::Config(
            "epoch-trace requires scheme = \"ic\" (the coordinated protocol)".into(),
        ));
    }
    trace_epoch(&config, deviate)
}

pub fn trace_epoch(config: &SimConfig, deviate: Option<usize>) -> Result<String, CliError> {
    let epoch = sim::generate_epoch_seeded(config, derive_seed(config.seed, 0, 0))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let instance = &epoch.instance;
    let shape = instance.shape();
    let n = instance.num_processors();
    let k = shape.num_shards();
    if let Some(i) = deviate {
        if i >= n {
            return Err(CliError::Config(format!(
                "deviating processor {i} out of range (epoch has {n} processors)"
            )));
        }
    }

    let mut out = String::new();
    writeln!(out, "epoch from seed {}: {n} processors in {k} shard(s)", config.seed).unwrap();

    let mut announcements = Vec::with_capacity(k);
    let mut decisions = Vec::with_capacity(n);
    for j in shape.shards() {
        let submissions: Vec<DigestSubmission> = shape
            .members(j)
            .map(|i| DigestSubmission {
                view: protocol::submit_view_digest(i, &epoch.views[i]),
                tx_count: epoch.views[i].tx_count,
            })
            .collect();
        let mut groups: BTreeMap<[u8; 32], usize> = BTreeMap::new();
        for sub in &submissions {
            *groups.entry(sub.view.digest).or_default() += 1;
        }
        let announcement = protocol::coordinate(
            j,
            &submissions,
            shape.consensus_threshold(j),
            k,
            &config.costs,
            &config.rewards,
            config.recruit_divergent,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;

        writeln!(
            out,
            "shard {j}: tau {}, {} view group(s): {}",
            shape.consensus_threshold(j),
            groups.len(),
            groups
                .iter()
                .map(|(d, c)| format!("{}x{c}", hex_prefix(d)))
                .collect::<Vec<_>>()
                .join(" "),
        )
        .unwrap();
        match announcement.verdict {
            Verdict::AllDefect => writeln!(
                out,
                "  verdict: All-D (largest group {} < tau)",
                announcement.majority_size
            )
            .unwrap(),
            Verdict::Proceed => {
                write!(
                    out,
                    "  verdict: proceed; majority {} , cooperative set {}, y estimate {}, aligned_min_tx {}",
                    announcement.majority_size,
                    announcement.cooperators,
                    announcement.estimated_consensus_tx,
                    announcement.thresholds.aligned_min_tx,
                )
                .unwrap();
                match announcement.thresholds.divergent_max_tx {
                    Some(c) => writeln!(out, ", divergent_max_tx {c}").unwrap(),
                    None => writeln!(out, ", divergent_max_tx undefined").unwrap(),
                }
            }
        }

        for i in shape.members(j) {
            let decision = protocol::participate(
                i,
                &announcement,
                epoch.views[i].tx_count,
                &config.costs,
                &config.rewards,
                k,
            );
            writeln!(
                out,
                "  processor {i}: tx {} -> {:?} ({:?})",
                epoch.views[i].tx_count, decision.decision, decision.reason
            )
            .unwrap();
            decisions.push(decision);
        }
        announcements.push(announcement);
    }

    let mut profile = StrategyProfile::new(decisions.iter().map(|d| d.decision).collect());
    if let Some(i) = deviate {
        profile = profile.with_flipped(i);
        writeln!(
            out,
            "injected deviation: processor {i} plays {:?} against recommendation {:?}",
            profile.strategy(i),
            decisions[i].decision
        )
        .unwrap();
    }

    let ledger = protocol::settle(instance, &announcements, &decisions, &profile, &config.rewards);
    let total_pool = config.rewards.block_reward + shardsim::game::total_fees(instance, &config.rewards);
    writeln!(
        out,
        "settlement: block committed {}, disbursed {} of {} (block reward + fees)",
        ledger.block_committed,
        ledger.total_disbursed(),
        total_pool
    )
    .unwrap();
    for i in 0..n {
        if !ledger.followed_recommendation[i] {
            writeln!(out, "  processor {i}: non-compliant, reward {}", ledger.rewards[i]).unwrap();
        }
    }
    let punished = (0..n)
        .filter(|&i| {
            !ledger.followed_recommendation[i] && decisions[i].decision == Strategy::Cooperate
        })
        .count();
    writeln!(out, "punished recommended cooperators: {punished}").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConsensusRule;
    use crate::presets;

    fn small_game(scheme: &str) -> GameFile {
        GameFile {
            game: GameSection {
                committee_sizes: vec![3],
                consensus_thresholds: vec![2],
                tx_counts: vec![100, 100, 100],
                consensus_tx_counts: vec![100],
                aligned: vec![true, true, true],
                scheme: scheme.into(),
            },
            costs: CostsSection { mandatory: 10.0, fixed_optional: 80.0, per_tx_verification: 0.01 },
            rewards: RewardsSection { block_reward: 100.0, per_tx_fee: 1.0 },
        }
    }

    #[test]
    fn analyze_lists_all_defect_and_tau_equilibrium() {
        let report = analyze_report(&small_game("fair")).unwrap();
        assert!(report.contains("DDD"), "{report}");
        // profitable cooperation at l = tau = 2
        assert!(report.contains("CCD") || report.contains("CDC") || report.contains("DCC"),
            "{report}");
    }

    #[test]
    fn analyze_uniform_all_cooperate_rejected_with_witnesses() {
        let report = analyze_report(&small_game("uniform")).unwrap();
        assert!(report.contains("not a Nash equilibrium"), "{report}");
        assert!(report.contains("by defecting"), "{report}");
    }

    #[test]
    fn analyze_size_guard() {
        let mut file = small_game("fair");
        file.game.committee_sizes = vec![21];
        file.game.consensus_thresholds = vec![11];
        file.game.tx_counts = vec![100; 21];
        file.game.aligned = vec![true; 21];
        let err = analyze_report(&file).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    fn trace_config() -> ConfigFile {
        let mut file = presets::by_name("fig3").unwrap().config;
        file.network.num_processors = 12;
        file.network.committee_size = 6;
        file.network.consensus = ConsensusRule::Number(4.0);
        file.run.scheme = "ic".into();
        file.run.avg_tx_per_shard = 9000.0;
        file.sweep = None;
        file
    }

    #[test]
    fn trace_shows_decisions_and_conserved_settlement() {
        let report = trace_report(&trace_config(), Some(5), None).unwrap();
        assert!(report.contains("verdict"), "{report}");
        assert!(report.contains("processor 0:"), "{report}");
        assert!(report.contains("settlement: block committed"), "{report}");
    }

    #[test]
    fn trace_requires_coordinated_scheme() {
        let mut file = trace_config();
        file.run.scheme = "fair".into();
        let err = trace_report(&file, None, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn trace_deviation_is_reported() {
        let report = trace_report(&trace_config(), Some(5), Some(0)).unwrap();
        assert!(report.contains("injected deviation: processor 0"), "{report}");
    }

    #[test]
    fn trace_all_defect_verdict_line() {
        let mut file = trace_config();
        file.network.divergence = 1.0;
        let report = trace_report(&file, Some(5), None).unwrap();
        assert!(report.contains("All-D"), "{report}");
    }
}
