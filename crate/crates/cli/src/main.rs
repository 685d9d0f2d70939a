mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use config::{SteeringName, WalkingName};

/// Stability control of a transformable wheel-legged vehicle through a
/// movable center-of-mass slider: steering regulation, ZMP walking control
/// and grader training.
#[derive(Debug, Parser)]
#[command(name = "comstab", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML configuration file; see the key reference below.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for traces, tables and models.
    #[arg(long, global = true, env = "COMSTAB_OUT", default_value = "comstab-out")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Runs variant comparisons on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// More log output (repeat for more).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state steering: regulate the stability factor with the X slider.
    Steer(SteerArgs),
    /// Humanoid walking: track the desired ZMP with both sliders.
    Walk(WalkArgs),
    /// Generate walking data and cluster it into a five-level grader model.
    TrainGrader(TrainArgs),
    /// Print observer and feedback gains for the given bandwidths.
    Gains(GainsArgs),
    /// Write auxiliary artifacts: gait plan, rule tables, default config, yaw-rate gain.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SteerArgs {
    /// Controller variant(s) to run; repeat for several.
    #[arg(long, value_enum)]
    pub controller: Vec<SteeringName>,
    /// Simulated time (s).
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Controller variant(s) to run; repeat for several.
    #[arg(long, value_enum)]
    pub controller: Vec<WalkingName>,
    /// Simulated time (s).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Grader model file written by `train-grader`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Multiplies every disturbance magnitude.
    #[arg(long)]
    pub disturbance_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training samples per axis.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Perturbed walking runs feeding the dataset.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Model file to write (default: grader_model.txt in the output directory).
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisPreset {
    X,
    Y,
}

#[derive(Debug, Args)]
pub struct GainsArgs {
    /// Observer bandwidth ωo (rad/s).
    pub wo: Option<f64>,
    /// Controller bandwidth ωc (rad/s).
    pub wc: Option<f64>,
    /// Take both bandwidths from the configured axis.
    #[arg(long, value_enum, conflicts_with_all = ["wo", "wc"])]
    pub axis: Option<AxisPreset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportWhat {
    /// Planned hip, ankle, joint-angle and desired-ZMP trajectories.
    Gait,
    /// The built-in fuzzy rule tables.
    Tables,
    /// The full default configuration.
    Config,
    /// Steady-state yaw-rate gain against speed.
    YawGain,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(value_enum)]
    pub what: ExportWhat,
    /// Simulated time for the gait plan (s).
    #[arg(long, default_value_t = 6.0)]
    pub duration: f64,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A slider hit its travel stop or the vehicle tipped.
    PhysicalLimit,
}

fn main() -> ExitCode {
    let parsed = Cli::command()
        .after_long_help(config::key_reference())
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::PhysicalLimit) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
