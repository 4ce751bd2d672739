//! TOML run configuration. Unknown keys are hard errors; the same structs are
//! embedded verbatim in run manifests so a manifest can reproduce its run.

use serde::{Deserialize, Serialize};
use shardsim::game::{CostParams, RewardParams};
use shardsim::sim::{Dynamics, Scheme, SimConfig, SweepSpec, SweepVariable, TauRule};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub costs: CostsSection,
    pub rewards: RewardsSection,
    pub run: RunSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub num_processors: usize,
    pub committee_size: usize,
    /// `"majority"`, a fraction in (0, 1), or an absolute integer count.
    pub consensus: ConsensusRule,
    pub divergence: f64,
}

/// Serialized form of the consensus-threshold rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConsensusRule {
    Named(String),
    Number(f64),
}

impl ConsensusRule {
    pub fn to_tau_rule(&self) -> Result<TauRule, CliError> {
        match self {
            ConsensusRule::Named(s) if s == "majority" => Ok(TauRule::Majority),
            ConsensusRule::Named(s) => Err(CliError::Config(format!(
                "unknown consensus rule {s:?}; expected \"majority\", a fraction in (0, 1), or an integer count"
            ))),
            ConsensusRule::Number(x) if *x > 0.0 && *x < 1.0 => Ok(TauRule::Fraction(*x)),
            ConsensusRule::Number(x) if *x >= 1.0 && x.fract() == 0.0 => {
                Ok(TauRule::Absolute(*x as usize))
            }
            ConsensusRule::Number(x) => Err(CliError::Config(format!(
                "consensus must be a fraction in (0, 1) or an integer count >= 1, got {x}"
            ))),
        }
    }

    pub fn from_tau_rule(rule: TauRule) -> Self {
        match rule {
            TauRule::Majority => ConsensusRule::Named("majority".into()),
            TauRule::Fraction(f) => ConsensusRule::Number(f),
            TauRule::Absolute(a) => ConsensusRule::Number(a as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsSection {
    pub mandatory: f64,
    pub fixed_optional: f64,
    pub per_tx_verification: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardsSection {
    pub block_reward: f64,
    pub per_tx_fee: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// `"uniform"`, `"fair"`, or `"ic"`.
    pub scheme: String,
    /// `"threshold"` (default) or `"best-response"`.
    #[serde(default = "default_dynamics")]
    pub dynamics: String,
    #[serde(default)]
    pub recruit_divergent: bool,
    pub iterations: usize,
    pub seed: u64,
    pub avg_tx_per_shard: f64,
}

fn default_dynamics() -> String {
    "threshold".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `"avg_tx_per_shard"`, `"block_reward"`, or `"num_processors"`.
    pub variable: String,
    /// Explicit list of swept values; mutually exclusive with start/stop/step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

pub fn parse_scheme(s: &str) -> Result<Scheme, CliError> {
    match s {
        "uniform" => Ok(Scheme::Uniform),
        "fair" => Ok(Scheme::Fair),
        "ic" | "coordinated" => Ok(Scheme::Coordinated),
        other => Err(CliError::Config(format!(
            "unknown scheme {other:?}; expected uniform, fair, or ic"
        ))),
    }
}

pub fn scheme_config_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Uniform => "uniform",
        Scheme::Fair => "fair",
        Scheme::Coordinated => "ic",
    }
}

pub fn parse_dynamics(s: &str) -> Result<Dynamics, CliError> {
    match s {
        "threshold" => Ok(Dynamics::ThresholdRule),
        "best-response" => Ok(Dynamics::BestResponse),
        other => Err(CliError::Config(format!(
            "unknown dynamics {other:?}; expected threshold or best-response"
        ))),
    }
}

pub fn parse_sweep_variable(s: &str) -> Result<SweepVariable, CliError> {
    match s {
        "avg_tx_per_shard" => Ok(SweepVariable::AvgTxPerShard),
        "block_reward" => Ok(SweepVariable::BlockReward),
        "num_processors" => Ok(SweepVariable::NumProcessors),
        other => Err(CliError::Config(format!(
            "unknown sweep variable {other:?}; expected avg_tx_per_shard, block_reward, or num_processors"
        ))),
    }
}

impl SweepSection {
    pub fn to_spec(&self) -> Result<SweepSpec, CliError> {
        let variable = parse_sweep_variable(&self.variable)?;
        let values = match (&self.values, self.start, self.stop, self.step) {
            (Some(values), None, None, None) => values.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || stop < start {
                    return Err(CliError::Config(
                        "sweep range requires step > 0 and stop >= start".into(),
                    ));
                }
                let count = ((stop - start) / step).floor() as usize + 1;
                (0..count).map(|i| start + step * i as f64).collect()
            }
            _ => {
                return Err(CliError::Config(
                    "sweep must set either `values` or all of `start`, `stop`, `step`".into(),
                ))
            }
        };
        if values.is_empty() {
            return Err(CliError::Config("sweep values must be nonempty".into()));
        }
        Ok(SweepSpec { variable, values })
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolve into the simulator configuration, validating every field and
    /// every sweep value.
    pub fn resolve(&self) -> Result<(SimConfig, Option<SweepSpec>), CliError> {
        let costs = CostParams::new(
            self.costs.mandatory,
            self.costs.fixed_optional,
            self.costs.per_tx_verification,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let rewards = RewardParams::new(self.rewards.block_reward, self.rewards.per_tx_fee)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let config = SimConfig {
            num_processors: self.network.num_processors,
            committee_size: self.network.committee_size,
            tau_rule: self.network.consensus.to_tau_rule()?,
            divergence: self.network.divergence,
            avg_tx_per_shard: self.run.avg_tx_per_shard,
            costs,
            rewards,
            scheme: parse_scheme(&self.run.scheme)?,
            dynamics: parse_dynamics(&self.run.dynamics)?,
            recruit_divergent: self.run.recruit_divergent,
            iterations: self.run.iterations,
            seed: self.run.seed,
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let sweep = match &self.sweep {
            None => None,
            Some(section) => {
                let spec = section.to_spec()?;
                // Reject bad sweep values up front so a sweep never fails
                // midway.
                for &value in &spec.values {
                    let mut probe = config.clone();
                    spec.variable
                        .apply(&mut probe, value)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                }
                Some(spec)
            }
        };
        Ok((config, sweep))
    }
}
