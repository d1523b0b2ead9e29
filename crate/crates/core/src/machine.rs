//! A configured machine: two baths, a measurement strength and a mode.

use serde::{Deserialize, Serialize};

use crate::baths::{rates, BathSpec, Nonlinearity, RateSet, Side};
use crate::error::{Error, Result};
use crate::generators::{
    bath_generator, measurement_generator, total_generator, unitary_generator, Mode, Superoperator,
};
use crate::system::{diagonalize, EigenBasis, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub left: BathSpec,
    pub right: BathSpec,
    pub gamma_m: f64,
    pub mode: Mode,
}

/// Everything derived from the machine at one parameter point.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub params: SystemParams,
    pub eigen: EigenBasis,
    pub rates_l: RateSet,
    pub rates_r: RateSet,
    pub baths: Superoperator,
    pub measurement: Superoperator,
    pub unitary: Superoperator,
    pub total: Superoperator,
}

impl Machine {
    pub fn new(left: BathSpec, right: BathSpec, gamma_m: f64, mode: Mode) -> Result<Self> {
        let m = Machine {
            left,
            right,
            gamma_m,
            mode,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if self.left.side != Side::L || self.right.side != Side::R {
            return Err(Error::InvalidParameter(
                "baths must be ordered (L, R)".into(),
            ));
        }
        if self.left.nonlinearity != Nonlinearity::Linear {
            return Err(Error::InvalidParameter(
                "quadratic coupling is only supported on the right bath".into(),
            ));
        }
        if !(self.gamma_m >= 0.0 && self.gamma_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "measurement strength must be non-negative, got {}",
                self.gamma_m
            )));
        }
        Ok(())
    }

    pub fn with_gamma_m(&self, gamma_m: f64) -> Self {
        Machine { gamma_m, ..*self }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Machine { mode, ..*self }
    }

    pub fn equal_temperatures(&self) -> bool {
        self.left.temperature == self.right.temperature
    }

    pub fn snapshot(&self, params: &SystemParams) -> Result<Snapshot> {
        let eigen = diagonalize(params)?;
        let rates_l = rates(&self.left, &eigen)?;
        let rates_r = rates(&self.right, &eigen)?;
        let baths = bath_generator(&rates_l, &rates_r, &eigen, self.mode);
        let measurement = measurement_generator(&eigen, self.gamma_m, self.mode);
        let unitary = unitary_generator(&eigen, self.mode);
        let total = total_generator(&[&baths, &measurement, &unitary])?;
        Ok(Snapshot {
            params: *params,
            eigen,
            rates_l,
            rates_r,
            baths,
            measurement,
            unitary,
            total,
        })
    }

    /// Whether the global (eigenbasis) description is appropriate: bath
    /// widths not above the inter-site coupling and the detuning not below it.
    pub fn regime_valid(&self, params: &SystemParams) -> Result<bool> {
        let eigen = diagonalize(params)?;
        let width = [&self.left, &self.right]
            .iter()
            .flat_map(|b| [eigen.e_plus, eigen.e_minus].map(|w| b.density.eval(w.abs())))
            .fold(0.0f64, f64::max);
        Ok(width <= params.coupling && eigen.delta.abs() >= params.coupling)
    }
}

impl Snapshot {
    pub fn rates(&self, side: Side) -> &RateSet {
        match side {
            Side::L => &self.rates_l,
            Side::R => &self.rates_r,
        }
    }
}
