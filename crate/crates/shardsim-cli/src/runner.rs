//! Sweep execution: resolve a config, run the sweep for one scheme, and write
//! CSV + manifest (+ optional SVG) atomically.

use std::path::{Path, PathBuf};

use shardsim::sim::{self, Scheme};

use crate::chart::{render_chart, ChartKind};
use crate::config::{scheme_config_name, ConfigFile};
use crate::error::CliError;
use crate::output::{now_rfc3339, render_csv, write_atomic, RunManifest};

#[derive(Debug)]
pub struct SweepOutput {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub svg_path: Option<PathBuf>,
    pub warnings: Vec<String>,
}

/// Produce the sweep CSV text for one scheme without touching the filesystem.
pub fn sweep_csv(file: &ConfigFile, scheme: Scheme) -> Result<(String, Vec<String>), CliError> {
    let (mut config, sweep) = file.resolve()?;
    let sweep = sweep.ok_or_else(|| {
        CliError::Config("this command needs a [sweep] section in the config".into())
    })?;
    config.scheme = scheme;
    let points = sim::run_sweep(&config, &sweep);
    Ok(render_csv(sweep.variable, scheme.label(), &points))
}

/// Run one scheme of a sweep and write `<stem>_<scheme>.csv` plus its
/// manifest (and chart, when requested) under `out_dir`.
pub fn execute_sweep(
    file: &ConfigFile,
    scheme: Scheme,
    out_dir: &Path,
    stem: &str,
    plot: Option<ChartKind>,
) -> Result<SweepOutput, CliError> {
    let started_at = now_rfc3339();
    let (csv, warnings) = sweep_csv(file, scheme)?;

    let base = format!("{stem}_{}", scheme.label());
    let csv_path = out_dir.join(format!("{base}.csv"));
    write_atomic(&csv_path, &csv)?;

    let mut snapshot = file.clone();
    snapshot.run.scheme = scheme_config_name(scheme).to_string();
    let manifest = RunManifest::new(snapshot, scheme.label().to_string(), started_at);
    let manifest_path = out_dir.join(format!("{base}.manifest.json"));
    write_atomic(&manifest_path, &manifest.to_json()?)?;

    let svg_path = match plot {
        None => None,
        Some(kind) => {
            // Chart from the CSV on disk, not from in-memory results.
            let csv_text = std::fs::read_to_string(&csv_path)
                .map_err(|e| CliError::Io(format!("cannot re-read {}: {e}", csv_path.display())))?;
            let svg = render_chart(&csv_text, kind, &base)?;
            let path = out_dir.join(format!("{base}.svg"));
            write_atomic(&path, &svg)?;
            Some(path)
        }
    };

    Ok(SweepOutput { csv_path, manifest_path, svg_path, warnings })
}
