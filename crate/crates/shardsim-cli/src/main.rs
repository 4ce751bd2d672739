use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shardsim_cli::chart::ChartKind;
use shardsim_cli::config::{parse_dynamics, parse_scheme, ConfigFile};
use shardsim_cli::error::CliError;
use shardsim_cli::output::RunManifest;
use shardsim_cli::presets;
use shardsim_cli::report::{analyze_report, trace_report, GameFile};
use shardsim_cli::runner::execute_sweep;

/// Simulator for strategic cooperation in shard-based committee consensus.
#[derive(Parser)]
#[command(name = "shardsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV + manifest (+ SVG with --plot).
    Sweep {
        /// TOML config file with a [sweep] section.
        #[arg(long, conflicts_with_all = ["preset", "manifest"])]
        config: Option<PathBuf>,
        /// Built-in preset name (see `presets list`); runs all three schemes
        /// unless --scheme narrows it.
        #[arg(long, conflicts_with = "manifest")]
        preset: Option<String>,
        /// Re-run from a previously emitted manifest; reproduces its CSV.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Override the reward scheme: uniform, fair, or ic.
        #[arg(long)]
        scheme: Option<String>,
        /// Override the strategy dynamics: threshold or best-response.
        #[arg(long)]
        dynamics: Option<String>,
        /// Override the per-point iteration count.
        #[arg(long)]
        iterations: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also render an SVG chart from the emitted CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Enumerate and certify pure Nash equilibria of a small explicit game.
    Analyze {
        /// TOML game description file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the full coordinator-protocol trace of one epoch.
    EpochTrace {
        /// TOML config file with scheme = "ic".
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Flip this processor's played strategy against its recommendation.
        #[arg(long)]
        deviate: Option<usize>,
    },
    /// Inspect built-in presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List preset names and descriptions.
    List,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            config,
            preset,
            manifest,
            scheme,
            dynamics,
            iterations,
            seed,
            out,
            plot,
        } => {
            let (mut file, stem, chart, preset_run) = match (&config, &preset, &manifest) {
                (Some(path), None, None) => {
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "run".into());
                    (ConfigFile::load(path)?, stem, ChartKind::Ratios, false)
                }
                (None, Some(name), None) => {
                    let preset = presets::by_name(name).ok_or_else(|| {
                        CliError::Config(format!(
                            "unknown preset {name:?}; run `shardsim presets list`"
                        ))
                    })?;
                    (preset.config, preset.name.to_string(), preset.chart, true)
                }
                (None, None, Some(path)) => {
                    let manifest = RunManifest::load(path)?;
                    (manifest.config, "rerun".into(), ChartKind::Ratios, false)
                }
                _ => {
                    return Err(CliError::Config(
                        "pass exactly one of --config, --preset, --manifest".into(),
                    ))
                }
            };

            if let Some(d) = &dynamics {
                parse_dynamics(d)?;
                file.run.dynamics = d.clone();
            }
            if let Some(n) = iterations {
                file.run.iterations = n;
            }
            if let Some(s) = seed {
                file.run.seed = s;
            }
            let schemes = match &scheme {
                Some(s) => vec![parse_scheme(s)?],
                None if preset_run => vec![
                    shardsim::sim::Scheme::Uniform,
                    shardsim::sim::Scheme::Fair,
                    shardsim::sim::Scheme::Coordinated,
                ],
                None => vec![parse_scheme(&file.run.scheme)?],
            };

            let plot = plot.then_some(chart);
            for scheme in schemes {
                let result = execute_sweep(&file, scheme, &out, &stem, plot)?;
                for warning in &result.warnings {
                    eprintln!("warning: {warning}");
                }
                println!("wrote {}", result.csv_path.display());
                println!("wrote {}", result.manifest_path.display());
                if let Some(svg) = result.svg_path {
                    println!("wrote {}", svg.display());
                }
            }
            Ok(())
        }
        Command::Analyze { config } => {
            let file = GameFile::load(&config)?;
            print!("{}", analyze_report(&file)?);
            Ok(())
        }
        Command::EpochTrace { config, seed, deviate } => {
            let file = ConfigFile::load(&config)?;
            print!("{}", trace_report(&file, seed, deviate)?);
            Ok(())
        }
        Command::Presets { action: PresetsAction::List } => {
            for preset in presets::all() {
                println!("{:6} {}", preset.name, preset.description);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
