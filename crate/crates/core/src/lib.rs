//! Simulator for continuously measured, adiabatically driven three-level
//! thermal machines (coupled quantum dots or coupled qubits between two baths).
//!
//! Units: `hbar = k_B = 1`. The state is tracked in the eigenbasis
//! `{|0>, |+>, |->}` of the system Hamiltonian as
//! `(rho_00, rho_++, rho_--, Re rho_+-, Im rho_+-)`.

pub mod baths;
pub mod error;
pub mod generators;
pub mod machine;
pub mod solvers;
pub mod system;
pub mod thermo;

pub use baths::{BathSpec, Nonlinearity, RateSet, Side, SpectralDensity, Statistics};
pub use error::{Error, Result};
pub use generators::{Mode, StateVector, Superoperator};
pub use machine::{Machine, Snapshot};
pub use solvers::Trajectory;
pub use system::{Drive, DriveProtocol, EigenBasis, ParamRates, SystemParams};
pub use thermo::{Cop, CycleSummary, Ratio, ThermoRecord};
