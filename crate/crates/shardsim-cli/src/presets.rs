//! Built-in sweep presets. Sweep ranges and the mandatory cost are fixed
//! design points; the remaining defaults are artifact choices tuned so that
//! the fair-scheme cooperation flip lands inside the swept range. A preset is
//! run once per reward scheme.

use crate::chart::ChartKind;
use crate::config::{
    ConfigFile, ConsensusRule, CostsSection, NetworkSection, RewardsSection, RunSection,
    SweepSection,
};

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ConfigFile,
    pub chart: ChartKind,
}

fn base_network() -> NetworkSection {
    NetworkSection {
        num_processors: 1000,
        committee_size: 100,
        consensus: ConsensusRule::Named("majority".into()),
        divergence: 0.15,
    }
}

fn run_section(avg_tx_per_shard: f64) -> RunSection {
    RunSection {
        scheme: "fair".into(),
        dynamics: "threshold".into(),
        recruit_divergent: true,
        iterations: 100,
        seed: 42,
        avg_tx_per_shard,
    }
}

fn fig3() -> Preset {
    Preset {
        name: "fig3",
        description: "cooperation vs. per-shard transaction volume (500..15000), three schemes",
        chart: ChartKind::Ratios,
        config: ConfigFile {
            network: base_network(),
            costs: CostsSection { mandatory: 10.0, fixed_optional: 30.0, per_tx_verification: 0.005 },
            rewards: RewardsSection { block_reward: 4000.0, per_tx_fee: 1.0 },
            run: run_section(5000.0),
            sweep: Some(SweepSection {
                variable: "avg_tx_per_shard".into(),
                values: None,
                start: Some(500.0),
                stop: Some(15000.0),
                step: Some(500.0),
            }),
        },
    }
}

fn fig4() -> Preset {
    let mut preset = fig3();
    preset.name = "fig4";
    preset.description = "cooperation vs. block reward (1000..7000), three schemes";
    preset.config.sweep = Some(SweepSection {
        variable: "block_reward".into(),
        values: None,
        start: Some(1000.0),
        stop: Some(7000.0),
        step: Some(250.0),
    });
    preset
}

fn network_scaling_config() -> ConfigFile {
    ConfigFile {
        network: base_network(),
        costs: CostsSection { mandatory: 10.0, fixed_optional: 2.0, per_tx_verification: 0.0001 },
        rewards: RewardsSection { block_reward: 4000.0, per_tx_fee: 0.01 },
        run: run_section(5000.0),
        sweep: Some(SweepSection {
            variable: "num_processors".into(),
            values: Some(vec![
                100.0, 250.0, 500.0, 750.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0,
                4000.0, 5000.0, 6000.0,
            ]),
            start: None,
            stop: None,
            step: None,
        }),
    }
}

fn fig5() -> Preset {
    Preset {
        name: "fig5",
        description: "cooperation ratio vs. network size (100..6000), three schemes",
        chart: ChartKind::Ratios,
        config: network_scaling_config(),
    }
}

fn fig6() -> Preset {
    Preset {
        name: "fig6",
        description: "mean utilities vs. network size (100..6000), three schemes",
        chart: ChartKind::Utilities,
        config: network_scaling_config(),
    }
}

pub fn all() -> Vec<Preset> {
    vec![fig3(), fig4(), fig5(), fig6()]
}

pub fn by_name(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}
