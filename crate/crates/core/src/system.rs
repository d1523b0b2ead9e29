//! System Hamiltonian, its eigenbasis, and periodic driving protocols.
//!
//! The two sites `|L>`, `|R>` share a ground state `|0>` pinned at zero
//! energy. The same parameterization covers coupled dots `(E_L, E_R, G)` and
//! coupled qubits `(eps_L, eps_R, g)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Excited eigenlevel label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Plus,
    Minus,
}

impl Level {
    pub const BOTH: [Level; 2] = [Level::Plus, Level::Minus];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub e_l: f64,
    pub e_r: f64,
    pub coupling: f64,
}

impl SystemParams {
    pub fn new(e_l: f64, e_r: f64, coupling: f64) -> Result<Self> {
        let p = SystemParams { e_l, e_r, coupling };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be non-negative, got {}",
                self.coupling
            )));
        }
        if !(self.e_l.is_finite() && self.e_r.is_finite() && self.coupling.is_finite()) {
            return Err(Error::InvalidParameter("non-finite system energy".into()));
        }
        Ok(())
    }

    /// Copy with one of the driven energies shifted.
    pub fn shifted(&self, axis: usize, by: f64) -> Self {
        let mut p = *self;
        match axis {
            0 => p.e_l += by,
            1 => p.e_r += by,
            _ => panic!("parameter axis {axis} out of range"),
        }
        p
    }
}

/// Diagonal form `H_S = eps_+ |+><+| + eps_- |-><-|` with
/// `|L> = cos(theta)|+> - sin(theta)|->` and `|R> = sin(theta)|+> + cos(theta)|->`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBasis {
    /// `e_L - e_R`
    pub delta: f64,
    /// `sqrt(4 coupling^2 + delta^2)`
    pub h: f64,
    pub theta: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
    pub e_plus: f64,
    pub e_minus: f64,
}

impl EigenBasis {
    /// Energy of the level above the common ground state.
    pub fn gap(&self, level: Level) -> f64 {
        match level {
            Level::Plus => self.e_plus,
            Level::Minus => self.e_minus,
        }
    }

    pub fn sin_2theta(&self) -> f64 {
        2.0 * self.sin_theta * self.cos_theta
    }

    pub fn cos_2theta(&self) -> f64 {
        self.cos_theta * self.cos_theta - self.sin_theta * self.sin_theta
    }

    /// `eps_+ - eps_-`
    pub fn splitting(&self) -> f64 {
        self.e_plus - self.e_minus
    }

    /// `(d eps_m / d e_L, d eps_m / d e_R)`.
    pub fn level_gradient(&self, level: Level) -> [f64; 2] {
        let r = 0.5 * self.delta / self.h;
        match level {
            Level::Plus => [0.5 + r, 0.5 - r],
            Level::Minus => [0.5 - r, 0.5 + r],
        }
    }

    /// Site-basis Hamiltonian block `[[H_LL, H_LR], [H_RL, H_RR]]` rebuilt from
    /// the eigen-decomposition.
    pub fn site_hamiltonian(&self) -> [[f64; 2]; 2] {
        let (s, c) = (self.sin_theta, self.cos_theta);
        let (ep, em) = (self.e_plus, self.e_minus);
        [
            [c * c * ep + s * s * em, c * s * ep - s * c * em],
            [s * c * ep - c * s * em, s * s * ep + c * c * em],
        ]
    }
}

/// Eigen-decomposition from the square-root closed forms, which keep
/// `theta` in `[0, pi/2]` for either sign of `delta`.
pub fn diagonalize(params: &SystemParams) -> Result<EigenBasis> {
    params.validate()?;
    let delta = params.e_l - params.e_r;
    let g = params.coupling;
    if g == 0.0 && delta == 0.0 {
        return Err(Error::DegenerateBasis);
    }
    let h = (4.0 * g * g + delta * delta).sqrt();
    let sin_theta = ((h - delta) / (2.0 * h)).max(0.0).sqrt();
    let cos_theta = ((h + delta) / (2.0 * h)).max(0.0).sqrt();
    let theta = sin_theta.atan2(cos_theta);
    let mean = 0.5 * (params.e_l + params.e_r);
    Ok(EigenBasis {
        delta,
        h,
        theta,
        sin_theta,
        cos_theta,
        e_plus: mean + 0.5 * h,
        e_minus: mean - 0.5 * h,
    })
}

/// `offset + amplitude * cos(omega * tau + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Drive {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Drive {
    pub fn constant(offset: f64) -> Self {
        Drive {
            offset,
            amplitude: 0.0,
            phase: 0.0,
        }
    }

    fn value(&self, omega: f64, tau: f64) -> f64 {
        self.offset + self.amplitude * (omega * tau + self.phase).cos()
    }

    fn rate(&self, omega: f64, tau: f64) -> f64 {
        -self.amplitude * omega * (omega * tau + self.phase).sin()
    }
}

/// Time derivatives of the driven energies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamRates {
    pub d_e_l: f64,
    pub d_e_r: f64,
}

impl ParamRates {
    pub fn as_array(&self) -> [f64; 2] {
        [self.d_e_l, self.d_e_r]
    }
}

/// Sinusoidal drive of both site energies at a common frequency; the
/// coupling is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveProtocol {
    pub e_l: Drive,
    pub e_r: Drive,
    pub coupling: f64,
    pub omega: f64,
}

impl DriveProtocol {
    pub fn new(e_l: Drive, e_r: Drive, coupling: f64, omega: f64) -> Result<Self> {
        let p = DriveProtocol {
            e_l,
            e_r,
            coupling,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "drive frequency must be positive, got {}",
                self.omega
            )));
        }
        if !(self.coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be non-negative, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn is_static(&self) -> bool {
        self.e_l.amplitude == 0.0 && self.e_r.amplitude == 0.0
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        DriveProtocol { omega, ..*self }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        DriveProtocol { coupling, ..*self }
    }

    /// Parameters and their time derivatives at `tau`.
    pub fn drive_at(&self, tau: f64) -> (SystemParams, ParamRates) {
        let w = self.omega;
        (
            SystemParams {
                e_l: self.e_l.value(w, tau),
                e_r: self.e_r.value(w, tau),
                coupling: self.coupling,
            },
            ParamRates {
                d_e_l: self.e_l.rate(w, tau),
                d_e_r: self.e_r.rate(w, tau),
            },
        )
    }
}

pub fn drive_at(protocol: &DriveProtocol, tau: f64) -> (SystemParams, ParamRates) {
    protocol.drive_at(tau)
}
