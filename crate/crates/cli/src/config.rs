//! Run configuration: a TOML document with nested sections.
//!
//! ```toml
//! model = "dots_fermionic"    # or "qubits_bosonic"
//! mode = "diagonal"           # or "coherent"
//! analysis = "steady"         # "steady", "cycle" or "transient"
//! output = "out.csv"          # optional, CSV goes to stdout otherwise
//!
//! [bath.left]                 # and [bath.right]
//! temperature = 1.0
//! strength = 0.2              # Gamma (flat) or Upsilon (ohmic)
//! cutoff = 100.0              # ohmic cutoff, qubits_bosonic only
//! nonlinearity = "linear"     # "quadratic" allowed on the right bath only
//!
//! [system]                    # static parameters, or instead:
//! e_l = 2.0
//! e_r = 3.0
//! coupling = 0.1
//!
//! [drive]                     # E(t) = offset + amplitude cos(omega t + phase)
//! coupling = 0.15
//! omega = 0.005
//! e_l = { offset = 1.5, amplitude = 0.2, phase = 0.0 }
//! e_r = { offset = 0.3, amplitude = 1.0, phase = 1.5707963267948966 }
//!
//! [measurement]
//! gamma_m = 0.01
//!
//! [solver]                    # every key optional
//! dt = 0.005
//! t_end = 100.0
//! sample_every = 20           # transient output stride in steps
//! n_grid = 128                # phase nodes per drive period
//! base_seed = 0
//! n_trajectories = 3
//! initial = [1.0, 0.0, 0.0]   # (rho_00, rho_++, rho_--)
//!
//! [sweep]                     # optional 1-D scan over any numeric key
//! parameter = "measurement.gamma_m"
//! start = 0.0
//! stop = 1.0
//! points = 21
//! ```

use std::path::{Path, PathBuf};

use mbatm_core::baths::BathSpec;
use mbatm_core::system::Drive;
use mbatm_core::{DriveProtocol, Machine, Mode, Nonlinearity, Side, SystemParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    DotsFermionic,
    QubitsBosonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    /// Steady state and currents at frozen parameters.
    Steady,
    /// Instantaneous plus adiabatic averages over one drive period.
    Cycle,
    /// Record-discarded evolution with stochastic trajectories alongside.
    Transient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathBlock {
    pub temperature: f64,
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baths {
    pub left: BathBlock,
    pub right: BathBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub e_l: f64,
    pub e_r: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveComponent {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub coupling: f64,
    pub omega: f64,
    pub e_l: DriveComponent,
    pub e_r: DriveComponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementBlock {
    pub gamma_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub n_grid: usize,
    pub base_seed: u64,
    pub n_trajectories: usize,
    pub initial: [f64; 3],
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            dt: 0.005,
            t_end: 100.0,
            sample_every: 20,
            n_grid: mbatm_core::thermo::DEFAULT_GRID,
            base_seed: 0,
            n_trajectories: 3,
            initial: [1.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepBlock {
    /// Evenly spaced values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    #[serde(default)]
    pub mode: Mode,
    pub analysis: Analysis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub bath: Baths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveBlock>,
    pub measurement: MeasurementBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.system, &self.drive) {
            (Some(_), Some(_)) => {
                return Err(config_err("give either [system] or [drive], not both"))
            }
            (None, None) => return Err(config_err("one of [system] or [drive] is required")),
            _ => {}
        }
        match self.analysis {
            Analysis::Cycle if self.drive.is_none() => {
                return Err(config_err("analysis \"cycle\" needs a [drive] section"))
            }
            Analysis::Steady | Analysis::Transient if self.system.is_none() => {
                return Err(config_err(
                    "analyses \"steady\" and \"transient\" need a [system] section",
                ))
            }
            _ => {}
        }
        if self.analysis == Analysis::Transient && self.sweep.is_some() {
            return Err(config_err("transient runs do not take a [sweep]"));
        }
        for (name, b) in [("left", &self.bath.left), ("right", &self.bath.right)] {
            match (self.model, b.cutoff) {
                (Model::DotsFermionic, Some(_)) => {
                    return Err(config_err(format!(
                        "bath.{name}.cutoff is only meaningful for qubits_bosonic"
                    )))
                }
                (Model::QubitsBosonic, None) => {
                    return Err(config_err(format!("bath.{name}.cutoff is required")))
                }
                _ => {}
            }
        }
        let s = &self.solver;
        if s.sample_every == 0 || s.n_trajectories == 0 {
            return Err(config_err(
                "solver.sample_every and solver.n_trajectories must be positive",
            ));
        }
        if let Some(sw) = &self.sweep {
            if sw.points == 0 || !sw.start.is_finite() || !sw.stop.is_finite() {
                return Err(config_err(format!(
                    "invalid sweep range {}..{} with {} points",
                    sw.start, sw.stop, sw.points
                )));
            }
            // Probing the path also rejects non-numeric targets.
            self.with_value(&sw.parameter, toml::Value::Float(sw.start))?;
        }
        self.machine()?;
        if let Some(d) = self.protocol() {
            d.validate().map_err(|e| config_err(e.to_string()))?;
        }
        if let Some(p) = self.params() {
            p.validate().map_err(|e| config_err(e.to_string()))?;
        }
        Ok(())
    }

    fn bath_spec(&self, side: Side, b: &BathBlock) -> Result<BathSpec, CliError> {
        let spec = match self.model {
            Model::DotsFermionic => {
                if b.nonlinearity != Nonlinearity::Linear {
                    return Err(config_err("fermionic leads couple linearly"));
                }
                BathSpec::fermionic_flat(side, b.temperature, b.strength)
            }
            Model::QubitsBosonic => BathSpec::bosonic_ohmic(
                side,
                b.temperature,
                b.strength,
                b.cutoff.unwrap_or(f64::NAN),
                b.nonlinearity,
            ),
        };
        spec.map_err(|e| config_err(e.to_string()))
    }

    pub fn machine(&self) -> Result<Machine, CliError> {
        Machine::new(
            self.bath_spec(Side::L, &self.bath.left)?,
            self.bath_spec(Side::R, &self.bath.right)?,
            self.measurement.gamma_m,
            self.mode,
        )
        .map_err(|e| config_err(e.to_string()))
    }

    pub fn params(&self) -> Option<SystemParams> {
        self.system.map(|s| SystemParams {
            e_l: s.e_l,
            e_r: s.e_r,
            coupling: s.coupling,
        })
    }

    pub fn protocol(&self) -> Option<DriveProtocol> {
        let part = |c: DriveComponent| Drive {
            offset: c.offset,
            amplitude: c.amplitude,
            phase: c.phase,
        };
        self.drive.map(|d| DriveProtocol {
            e_l: part(d.e_l),
            e_r: part(d.e_r),
            coupling: d.coupling,
            omega: d.omega,
        })
    }

    /// Copy of the config with the dotted `path` set to `value`. The key must
    /// already exist and keep its type (integers accept integral floats).
    pub fn with_value(&self, path: &str, value: toml::Value) -> Result<Self, CliError> {
        let mut doc = toml::Value::try_from(self).expect("config always serializes");
        let mut node = &mut doc;
        for key in path.split('.') {
            node = node
                .get_mut(key)
                .ok_or_else(|| config_err(format!("no such field: {path}")))?;
        }
        *node = coerce(node, value)
            .ok_or_else(|| config_err(format!("field {path} has type {}", node.type_str())))?;
        let text = toml::to_string(&doc).expect("edited config serializes");
        toml::from_str(&text).map_err(|e| config_err(format!("{path}: {e}")))
    }

    /// Applies a `path=value` override from the command line.
    pub fn with_assignment(&self, assignment: &str) -> Result<Self, CliError> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| config_err(format!("expected path=value, got {assignment}")))?;
        let value = raw
            .trim()
            .parse::<f64>()
            .map(toml::Value::Float)
            .unwrap_or_else(|_| toml::Value::String(raw.trim().to_string()));
        let cfg = self.with_value(path.trim(), value)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn coerce(old: &toml::Value, new: toml::Value) -> Option<toml::Value> {
    use toml::Value::*;
    match (old, new) {
        (Float(_), Float(x)) => Some(Float(x)),
        (Float(_), Integer(i)) => Some(Float(i as f64)),
        (Integer(_), Float(x)) if x.fract() == 0.0 && x.abs() < 9e15 => Some(Integer(x as i64)),
        (Integer(_), Integer(i)) => Some(Integer(i)),
        (String(_), String(s)) => Some(String(s)),
        _ => None,
    }
}
