//! Bath statistics, spectral densities and transition rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{EigenBasis, Level};

/// Beyond this value of `energy / temperature` the occupation factors are
/// replaced by their asymptotic limits.
const EXP_CUTOFF: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermionic,
    Bosonic,
}

/// System-bath coupling order. `Quadratic` exchanges two bath quanta per
/// system transition and is only meaningful for a bosonic bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    #[default]
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpectralDensity {
    /// Energy-independent coupling `Gamma_alpha`.
    Flat { strength: f64 },
    /// `Upsilon * w * exp(-w / cutoff)`.
    Ohmic { strength: f64, cutoff: f64 },
}

impl SpectralDensity {
    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::Flat { strength } => strength,
            SpectralDensity::Ohmic { strength, cutoff } => {
                strength * omega * (-omega / cutoff).exp()
            }
        }
    }

    pub fn strength(&self) -> f64 {
        match *self {
            SpectralDensity::Flat { strength } | SpectralDensity::Ohmic { strength, .. } => {
                strength
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub side: Side,
    pub statistics: Statistics,
    pub temperature: f64,
    pub density: SpectralDensity,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
}

impl BathSpec {
    pub fn new(
        side: Side,
        statistics: Statistics,
        temperature: f64,
        density: SpectralDensity,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        let bath = BathSpec {
            side,
            statistics,
            temperature,
            density,
            nonlinearity,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// Flat fermionic lead, the coupled-dot setting.
    pub fn fermionic_flat(side: Side, temperature: f64, strength: f64) -> Result<Self> {
        Self::new(
            side,
            Statistics::Fermionic,
            temperature,
            SpectralDensity::Flat { strength },
            Nonlinearity::Linear,
        )
    }

    /// Ohmic bosonic bath, the coupled-qubit setting.
    pub fn bosonic_ohmic(
        side: Side,
        temperature: f64,
        strength: f64,
        cutoff: f64,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        Self::new(
            side,
            Statistics::Bosonic,
            temperature,
            SpectralDensity::Ohmic { strength, cutoff },
            nonlinearity,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bath temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.density.strength() >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling strength must be non-negative, got {}",
                self.density.strength()
            )));
        }
        if let SpectralDensity::Ohmic { cutoff, .. } = self.density {
            if !(cutoff > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "ohmic cutoff must be positive, got {cutoff}"
                )));
            }
        }
        if self.nonlinearity == Nonlinearity::Quadratic && self.statistics != Statistics::Bosonic {
            return Err(Error::InvalidParameter(
                "quadratic coupling requires a bosonic bath".into(),
            ));
        }
        Ok(())
    }
}

/// Fermi-Dirac or Bose-Einstein occupation at zero chemical potential.
pub fn occupation(statistics: Statistics, energy: f64, temperature: f64) -> Result<f64> {
    let x = energy / temperature;
    match statistics {
        Statistics::Fermionic => Ok(fermi(x)),
        Statistics::Bosonic => {
            if !(energy > 0.0) {
                return Err(Error::BosonicDomain { energy });
            }
            Ok(bose(x))
        }
    }
}

fn fermi(x: f64) -> f64 {
    if x > EXP_CUTOFF {
        0.0
    } else if x < -EXP_CUTOFF {
        1.0
    } else {
        1.0 / (x.exp() + 1.0)
    }
}

/// `1 / (e^x - 1)` for `x > 0`.
fn bose(x: f64) -> f64 {
    if x > EXP_CUTOFF {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

/// `1 + n(x) = 1 / (1 - e^-x)` for `x > 0`.
fn bose_emission(x: f64) -> f64 {
    if x > EXP_CUTOFF {
        1.0
    } else {
        -1.0 / (-x).exp_m1()
    }
}

pub fn spectral_density(bath: &BathSpec, omega: f64) -> f64 {
    bath.density.eval(omega)
}

/// Downward (`m -> 0`) and upward (`0 -> m`) rates for one transition.
///
/// `down`/`up` include the overlap weight; the `*_bare` variants do not.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Channel {
    pub up: f64,
    pub down: f64,
    pub up_bare: f64,
    pub down_bare: f64,
}

impl Channel {
    fn weighted(up_bare: f64, down_bare: f64, weight: f64) -> Self {
        Channel {
            up: weight * up_bare,
            down: weight * down_bare,
            up_bare,
            down_bare,
        }
    }
}

/// Rates of one bath for the `+` and `-` transitions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateSet {
    pub plus: Channel,
    pub minus: Channel,
}

impl RateSet {
    pub fn channel(&self, level: Level) -> &Channel {
        match level {
            Level::Plus => &self.plus,
            Level::Minus => &self.minus,
        }
    }

    pub fn all_nonnegative(&self) -> bool {
        [self.plus, self.minus]
            .iter()
            .all(|c| c.up >= 0.0 && c.down >= 0.0 && c.up_bare >= 0.0 && c.down_bare >= 0.0)
    }
}

/// Overlap weight `|<m|alpha>|^2` of the eigenstate with the site the bath
/// touches.
pub fn overlap_weight(side: Side, level: Level, eigen: &EigenBasis) -> f64 {
    let (s2, c2) = (eigen.sin_theta.powi(2), eigen.cos_theta.powi(2));
    match (side, level) {
        (Side::L, Level::Plus) | (Side::R, Level::Minus) => c2,
        (Side::L, Level::Minus) | (Side::R, Level::Plus) => s2,
    }
}

/// Rates for the coupling order configured on the bath.
pub fn rates(bath: &BathSpec, eigen: &EigenBasis) -> Result<RateSet> {
    match bath.nonlinearity {
        Nonlinearity::Linear => rates_linear(bath, eigen),
        Nonlinearity::Quadratic => rates_nonlinear(bath, eigen),
    }
}

pub fn rates_linear(bath: &BathSpec, eigen: &EigenBasis) -> Result<RateSet> {
    if bath.nonlinearity != Nonlinearity::Linear {
        return Err(Error::Contract(
            "rates_linear called on a quadratic bath".into(),
        ));
    }
    let channel = |level| -> Result<Channel> {
        let (up, down) = bare_linear(bath, eigen.gap(level))?;
        Ok(Channel::weighted(
            up,
            down,
            overlap_weight(bath.side, level, eigen),
        ))
    };
    Ok(RateSet {
        plus: channel(Level::Plus)?,
        minus: channel(Level::Minus)?,
    })
}

/// Returns `(up, down)` without the overlap weight.
fn bare_linear(bath: &BathSpec, gap: f64) -> Result<(f64, f64)> {
    let t = bath.temperature;
    match bath.statistics {
        Statistics::Fermionic => {
            let g = bath.density.eval(gap);
            if g < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "spectral density negative at transition energy {gap}"
                )));
            }
            let x = gap / t;
            Ok((g * fermi(x), g * fermi(-x)))
        }
        Statistics::Bosonic => {
            if gap > 0.0 {
                let g = bath.density.eval(gap);
                let x = gap / t;
                Ok((g * bose(x), g * bose_emission(x)))
            } else if gap < 0.0 {
                // The level sits below |0>: relaxing to |0> absorbs a quantum.
                let w = -gap;
                let g = bath.density.eval(w);
                let x = w / t;
                Ok((g * bose_emission(x), g * bose(x)))
            } else {
                match bath.density {
                    // omega * n(omega) -> T as omega -> 0
                    SpectralDensity::Ohmic { strength, .. } => Ok((strength * t, strength * t)),
                    SpectralDensity::Flat { .. } => Err(Error::BosonicDomain { energy: gap }),
                }
            }
        }
    }
}

/// Rates for a bosonic bath coupled through two-quantum exchange, evaluated
/// at half the transition energy.
pub fn rates_nonlinear(bath: &BathSpec, eigen: &EigenBasis) -> Result<RateSet> {
    if bath.statistics != Statistics::Bosonic
        || bath.side != Side::R
        || bath.nonlinearity != Nonlinearity::Quadratic
    {
        return Err(Error::Contract(
            "non-linear rates require the right bath, bosonic, quadratic coupling".into(),
        ));
    }
    let t = bath.temperature;
    let channel = |level| -> Result<Channel> {
        let gap = eigen.gap(level);
        if gap == 0.0 {
            return Err(Error::BosonicDomain { energy: gap });
        }
        let w = 0.5 * gap.abs();
        let g = bath.density.eval(w);
        let x = w / t;
        let (absorb, emit) = (g * bose(x).powi(2), g * bose_emission(x).powi(2));
        let (up, down) = if gap > 0.0 {
            (absorb, emit)
        } else {
            (emit, absorb)
        };
        Ok(Channel::weighted(
            up,
            down,
            overlap_weight(bath.side, level, eigen),
        ))
    };
    Ok(RateSet {
        plus: channel(Level::Plus)?,
        minus: channel(Level::Minus)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{diagonalize, SystemParams};
    use approx::assert_relative_eq;

    fn eigen_with_gap_plus(gap: f64, cos2: f64) -> EigenBasis {
        let mut e = diagonalize(&SystemParams::new(gap, 0.5, 0.0).unwrap()).unwrap();
        e.cos_theta = cos2.sqrt();
        e.sin_theta = (1.0 - cos2).sqrt();
        e
    }

    #[test]
    fn occupation_values() {
        assert_eq!(occupation(Statistics::Fermionic, 0.0, 1.0).unwrap(), 0.5);
        assert_relative_eq!(
            occupation(Statistics::Fermionic, 1.0, 1.0).unwrap(),
            0.268_941_421_369_995_12,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            occupation(Statistics::Bosonic, 1.0, 1.0).unwrap(),
            0.581_976_706_869_326_42,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bosonic_occupation_rejects_nonpositive_energy() {
        assert!(matches!(
            occupation(Statistics::Bosonic, 0.0, 1.0),
            Err(Error::BosonicDomain { .. })
        ));
        assert!(occupation(Statistics::Bosonic, -1.0, 1.0).is_err());
    }

    #[test]
    fn overflow_guard() {
        assert_eq!(occupation(Statistics::Fermionic, 1e4, 1.0).unwrap(), 0.0);
        assert_eq!(occupation(Statistics::Fermionic, -1e4, 1.0).unwrap(), 1.0);
        assert_eq!(occupation(Statistics::Bosonic, 1e4, 1.0).unwrap(), 0.0);
        assert_eq!(bose_emission(1e4), 1.0);
    }

    #[test]
    fn spectral_density_values() {
        let flat = BathSpec::fermionic_flat(Side::L, 1.0, 0.2).unwrap();
        assert_eq!(spectral_density(&flat, 5.0), 0.2);
        let ohm = BathSpec::bosonic_ohmic(Side::L, 1.0, 0.1, 100.0, Nonlinearity::Linear).unwrap();
        assert_eq!(spectral_density(&ohm, 0.0), 0.0);
        assert_relative_eq!(
            spectral_density(&ohm, 2.0),
            0.196_039_734_661_351_06,
            epsilon = 1e-15
        );
    }

    #[test]
    fn linear_fermionic_rates() {
        let bath = BathSpec::fermionic_flat(Side::L, 1.0, 0.2).unwrap();
        let eigen = eigen_with_gap_plus(3.0, 1.0);
        let r = rates_linear(&bath, &eigen).unwrap();
        assert_relative_eq!(r.plus.up, 0.009_485_174_635_513_356, epsilon = 1e-15);
        assert_relative_eq!(r.plus.down, 0.190_514_825_364_486_64, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_mixing_gives_equal_weights() {
        let eigen = diagonalize(&SystemParams::new(1.0, 1.0, 0.3).unwrap()).unwrap();
        for side in [Side::L, Side::R] {
            for level in [Level::Plus, Level::Minus] {
                assert_relative_eq!(overlap_weight(side, level, &eigen), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn cold_fermionic_bath_only_absorbs() {
        let bath = BathSpec::fermionic_flat(Side::R, 1e-3, 0.2).unwrap();
        let eigen = eigen_with_gap_plus(1.0, 0.5);
        let r = rates_linear(&bath, &eigen).unwrap();
        assert_eq!(r.plus.up, 0.0);
        assert!(r.plus.down > 0.0);
    }

    #[test]
    fn nonlinear_rates_closed_form() {
        let bath =
            BathSpec::bosonic_ohmic(Side::R, 1.0, 0.1, 100.0, Nonlinearity::Quadratic).unwrap();
        // sin^2 theta = 1 puts the full R weight on the + level.
        let eigen = eigen_with_gap_plus(6.0, 0.0);
        let r = rates_nonlinear(&bath, &eigen).unwrap();
        assert_relative_eq!(r.plus.down, 0.322_441_213_707_137_51, epsilon = 1e-14);
        assert_relative_eq!(r.plus.up, 0.000_799_251_860_323_509_55, epsilon = 1e-16);
        let n = 1.0 / 3f64.exp_m1();
        assert_relative_eq!(
            r.plus.up / r.plus.down,
            (n / (1.0 + n)).powi(2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn nonlinear_requires_bosonic_right_bath() {
        let eigen = eigen_with_gap_plus(2.0, 0.5);
        let left =
            BathSpec::bosonic_ohmic(Side::L, 1.0, 0.1, 10.0, Nonlinearity::Quadratic).unwrap();
        assert!(matches!(
            rates_nonlinear(&left, &eigen),
            Err(Error::Contract(_))
        ));
        assert!(BathSpec::new(
            Side::R,
            Statistics::Fermionic,
            1.0,
            SpectralDensity::Flat { strength: 0.1 },
            Nonlinearity::Quadratic
        )
        .is_err());
    }

    #[test]
    fn cold_nonlinear_bath_no_absorption() {
        let bath =
            BathSpec::bosonic_ohmic(Side::R, 1e-3, 0.1, 100.0, Nonlinearity::Quadratic).unwrap();
        let eigen = eigen_with_gap_plus(2.0, 0.5);
        assert_eq!(rates_nonlinear(&bath, &eigen).unwrap().plus.up, 0.0);
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::fermionic_flat(Side::L, 0.0, 0.1).is_err());
        assert!(BathSpec::fermionic_flat(Side::L, 1.0, -0.1).is_err());
        assert!(BathSpec::bosonic_ohmic(Side::L, 1.0, 0.1, 0.0, Nonlinearity::Linear).is_err());
    }

    #[test]
    fn bosonic_level_below_ground_reverses_roles() {
        let bath = BathSpec::bosonic_ohmic(Side::L, 1.0, 0.1, 10.0, Nonlinearity::Linear).unwrap();
        let below = bare_linear(&bath, -0.7).unwrap();
        let above = bare_linear(&bath, 0.7).unwrap();
        assert_relative_eq!(below.0, above.1, epsilon = 1e-15);
        assert_relative_eq!(below.1, above.0, epsilon = 1e-15);
        // continuous through zero for the ohmic density
        let near = bare_linear(&bath, 1e-7).unwrap();
        let zero = bare_linear(&bath, 0.0).unwrap();
        assert_relative_eq!(near.0, zero.0, epsilon = 1e-6);
        assert_relative_eq!(near.1, zero.1, epsilon = 1e-6);
    }
}
