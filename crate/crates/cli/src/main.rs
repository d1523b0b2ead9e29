use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbatm_cli::{presets, run, Analysis, CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "mbatm",
    version,
    about = "Measurement-assisted adiabatic refrigerator scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed for stochastic trajectories
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Phase nodes per drive period
    #[arg(long)]
    grid: Option<usize>,
    /// Override any config key, e.g. --set measurement.gamma_m=0.1
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            grid: self.grid,
            set: self.set.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named preset, or print it with --emit-config
    Preset {
        name: String,
        #[arg(long)]
        emit_config: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a config as a 1-D sweep over one key
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run a static config as a transient with stochastic trajectories
    Trajectory {
        config: PathBuf,
        /// Number of trajectories written next to the averaged curve
        #[arg(long)]
        trajectories: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match cli.command {
        Command::Run { config, common } => common.overrides().apply(&RunConfig::load(&config)?)?,
        Command::Preset {
            name,
            emit_config,
            common,
        } => {
            let cfg = common.overrides().apply(&presets::preset(&name)?)?;
            if emit_config {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            cfg
        }
        Command::Sweep {
            config,
            param,
            from,
            to,
            points,
            common,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.sweep = Some(mbatm_cli::config::SweepBlock {
                parameter: param,
                start: from,
                stop: to,
                points,
            });
            common.overrides().apply(&cfg)?
        }
        Command::Trajectory {
            config,
            trajectories,
            common,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.analysis = Analysis::Transient;
            cfg.sweep = None;
            if let Some(k) = trajectories {
                cfg.solver.n_trajectories = k;
            }
            common.overrides().apply(&cfg)?
        }
    };
    eprintln!("{}", run(&cfg)?);
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbatm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
