//! Result serialization: CSV tables, run manifests, and atomic file writes.

use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use shardsim::protocol::DIGEST_ALGORITHM;
use shardsim::sim::{SweepPoint, SweepVariable};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const CSV_HEADER: &str = "sweep_variable,sweep_value,scheme,mean_coop_ratio,mean_defect_ratio,mean_util_coop,mean_util_defect,weighted_mean_util,block_commit_rate,iterations";

/// Render sweep results as CSV. Failed points are skipped and reported back as
/// warnings; all numbers use `.` decimals via the shortest round-trip float
/// format, so output is deterministic.
pub fn render_csv(
    variable: SweepVariable,
    scheme_label: &str,
    points: &[SweepPoint],
) -> (String, Vec<String>) {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut warnings = Vec::new();
    for point in points {
        match &point.result {
            Ok(agg) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    variable.label(),
                    point.value,
                    scheme_label,
                    agg.mean_coop_ratio,
                    agg.mean_defect_ratio,
                    agg.mean_util_coop,
                    agg.mean_util_defect,
                    agg.weighted_mean_util,
                    agg.block_commit_rate,
                    agg.iterations
                ));
            }
            Err(e) => warnings.push(format!("sweep point {} skipped: {e}", point.value)),
        }
    }
    (out, warnings)
}

/// Write a file atomically: write to a sibling temp file, then rename over the
/// final path.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot rename into {}: {e}", path.display())))
}

/// Run metadata written alongside every result file. Re-running `sweep` from a
/// manifest reproduces the CSV byte for byte: the embedded config snapshot is
/// complete and the seed is explicit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub digest_algorithm: String,
    pub seed: u64,
    pub scheme: String,
    pub started_at: String,
    pub finished_at: String,
    /// Full resolved configuration, in the config-file schema.
    pub config: ConfigFile,
}

impl RunManifest {
    pub fn new(config: ConfigFile, scheme: String, started_at: String) -> Self {
        Self {
            tool: "shardsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            digest_algorithm: DIGEST_ALGORITHM.into(),
            seed: config.run.seed,
            scheme,
            started_at,
            finished_at: now_rfc3339(),
            config,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}
