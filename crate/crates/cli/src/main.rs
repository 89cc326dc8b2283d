//! `exterior-wave-lab <command> [--config path] [--key value ...]`
//!
//! Every run reads one JSON document, applies the command-line overrides,
//! validates the result against the command's schema and only then computes.
//! Outputs go to `out_dir` together with `manifest.json`.

mod commands;
mod config;
mod run;
mod verify;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{load, parse, split_overrides, CliError, CliResult};
use run::Run;

#[derive(Parser)]
#[command(name = "exterior-wave-lab", version, about = "Radial energy-critical wave experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Trailing `--config path` and `--key value` pairs.
#[derive(clap::Args)]
struct Overrides {
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--key value")]
    args: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve data (whole space or exterior) and record energies.
    Evolve(Overrides),
    /// Radiation profiles.
    Profile {
        #[command(subcommand)]
        action: ProfileAction,
    },
    /// Region-restricted space-time norms and dyadic channel norms.
    Norms(Overrides),
    /// Non-radiative static branches for a list of alpha.
    Nonradiative(Overrides),
    /// Characteristic number of u with respect to v.
    Charnum(Overrides),
    /// Exterior solutions by fixed-point iteration.
    Construct {
        #[command(subcommand)]
        family: ConstructFamily,
    },
    /// Long-time run with a scattering verdict.
    ScatterExperiment(Overrides),
    /// Property suites; exit 4 when a check fails.
    Verify {
        #[command(subcommand)]
        suite: VerifySuite,
    },
}

#[derive(Subcommand)]
enum ProfileAction {
    /// Profile of a state, or of a trajectory at late times.
    Extract(Overrides),
    /// Free-wave data from a profile.
    Synthesize(Overrides),
}

#[derive(Subcommand)]
enum ConstructFamily {
    /// Small-data exterior solution from a free-wave profile.
    Primary(Overrides),
    /// Solution with a prescribed characteristic number.
    Alpha(Overrides),
}

#[derive(Subcommand)]
enum VerifySuite {
    Decay(Overrides),
    Isometry(Overrides),
    Conservation(Overrides),
    All(Overrides),
}

trait OutDir {
    fn out_dir(&self) -> &Path;
}

macro_rules! out_dir {
    ($($t:ty),*) => {$(
        impl OutDir for $t {
            fn out_dir(&self) -> &Path {
                &self.out_dir
            }
        }
    )*};
}

out_dir!(
    commands::EvolveConfig,
    commands::ExtractConfig,
    commands::SynthesizeConfig,
    commands::NormsConfig,
    commands::NonradiativeConfig,
    commands::CharnumConfig,
    commands::PrimaryCommandConfig,
    commands::AlphaCommandConfig,
    commands::ScatterCommandConfig,
    verify::VerifyConfig
);

/// Validates the whole configuration, runs `body` and writes the manifest.
fn execute<C>(name: &str, raw: &[String], body: impl FnOnce(&C, &mut Run) -> CliResult<()>) -> CliResult<()>
where
    C: DeserializeOwned + Serialize + OutDir,
{
    let (path, overrides) = split_overrides(raw)?;
    let cfg: C = parse(load(path.as_deref(), &overrides)?)?;
    let resolved = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let mut run = Run::new(cfg.out_dir(), name, resolved)?;
    log::info!("{name}: writing to {}", cfg.out_dir().display());
    let outcome = body(&cfg, &mut run);
    let code = outcome.as_ref().err().map_or(0, CliError::exit_code);
    if let Err(e) = &outcome {
        run.result("error", e.to_string());
    }
    run.finish(code)?;
    outcome
}

fn dispatch(command: Command) -> CliResult<()> {
    use verify::Suite;
    match command {
        Command::Evolve(o) => execute("evolve", &o.args, commands::evolve),
        Command::Profile { action } => match action {
            ProfileAction::Extract(o) => execute("profile extract", &o.args, commands::profile_extract),
            ProfileAction::Synthesize(o) => execute("profile synthesize", &o.args, commands::profile_synthesize),
        },
        Command::Norms(o) => execute("norms", &o.args, commands::norms),
        Command::Nonradiative(o) => execute("nonradiative", &o.args, commands::nonradiative),
        Command::Charnum(o) => execute("charnum", &o.args, commands::charnum),
        Command::Construct { family } => match family {
            ConstructFamily::Primary(o) => execute("construct primary", &o.args, commands::construct_primary_cmd),
            ConstructFamily::Alpha(o) => execute("construct alpha", &o.args, commands::construct_alpha_cmd),
        },
        Command::ScatterExperiment(o) => execute("scatter-experiment", &o.args, commands::scatter_experiment),
        Command::Verify { suite } => {
            let (name, suites, o) = match suite {
                VerifySuite::Decay(o) => ("verify decay", vec![Suite::Decay], o),
                VerifySuite::Isometry(o) => ("verify isometry", vec![Suite::Isometry], o),
                VerifySuite::Conservation(o) => ("verify conservation", vec![Suite::Conservation], o),
                VerifySuite::All(o) => ("verify all", vec![Suite::Isometry, Suite::Conservation, Suite::Decay], o),
            };
            execute(name, &o.args, |cfg, run| verify::verify(&suites, cfg, run))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("exterior-wave-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
