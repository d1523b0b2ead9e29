//! Configuration-driven front end for the measurement-assisted refrigerator
//! models: single points, 1-D sweeps, drive-cycle averages and stochastic
//! transients, all written as CSV.

pub mod config;
pub mod presets;
pub mod run;

use std::io::Write;
use std::path::PathBuf;

pub use config::{Analysis, Model, RunConfig};
pub use run::{execute, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] mbatm_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Config(_) | CliError::Output(_) => 2,
        }
    }
}

/// Runs the config and writes its CSV to the configured output (stdout when
/// unset). Returns a one-line summary.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let table = execute(cfg)?;
    if !table.regime_ok {
        eprintln!(
            "warning: some points violate coupling >= bath width or |E_L - E_R| >= coupling \
             (see regime_ok)"
        );
    }
    let target = match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))?;
            table.write_csv(std::io::BufWriter::new(file))?;
            path.display().to_string()
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock)?;
            lock.flush()?;
            "stdout".to_string()
        }
    };
    Ok(format!(
        "{:?} run: {} rows x {} columns -> {target}",
        cfg.analysis,
        table.rows.len(),
        table.header.len()
    )
    .to_lowercase())
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
    pub set: Vec<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &RunConfig) -> Result<RunConfig, CliError> {
        let mut cfg = cfg.clone();
        for a in &self.set {
            cfg = cfg.with_assignment(a)?;
        }
        if let Some(seed) = self.seed {
            cfg.solver.base_seed = seed;
        }
        if let Some(grid) = self.grid {
            cfg.solver.n_grid = grid;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
