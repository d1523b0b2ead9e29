//! Heat currents, powers, coefficients of performance, cycle averages and
//! the geometric (pumped) part of the measurement work.
//!
//! Sign convention: a current `J_alpha > 0` flows out of bath `alpha` into
//! the system, so cooling of the cold bath R reads `J_R > 0`. `J_M` and `P_D`
//! are the powers delivered to the system by the probe and by the drive.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baths::{RateSet, Side};
use crate::error::{Error, Result};
use crate::generators::{bath_generator, measurement_generator, Mode, StateVector};
use crate::machine::{Machine, Snapshot};
use crate::solvers::{adiabatic_correction, steady_state_derivative, DEFAULT_FD_STEP};
use crate::system::{EigenBasis, Level, ParamRates, SystemParams};

/// Default number of quadrature nodes per drive period.
pub const DEFAULT_GRID: usize = 128;

/// A ratio that is only meaningful for a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ratio {
    Value(f64),
    /// Denominator not positive: the machine is not operating in the regime
    /// the ratio describes.
    Undefined,
}

pub type Cop = Ratio;

impl Ratio {
    fn of(num: f64, den: f64) -> Self {
        if den > 0.0 && num.is_finite() {
            Ratio::Value(num / den)
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Ratio::Value(v) => Some(v),
            Ratio::Undefined => None,
        }
    }

    /// `NaN` stands in for the undefined case.
    pub fn or_nan(&self) -> f64 {
        self.value().unwrap_or(f64::NAN)
    }
}

/// Energy `Tr[H_S d rho]` of a state increment.
fn energy(eigen: &EigenBasis, d: &StateVector) -> f64 {
    eigen.e_plus * d.rhopp + eigen.e_minus * d.rhomm
}

/// Heat current out of one bath.
///
/// Populations contribute `sum_m eps_m0 (gamma_0m rho_00 - gamma_m0 rho_mm)`;
/// in coherent mode `Re rho_+-` adds the energy it feeds into the
/// populations through the bath's coherence couplings.
pub fn heat_current(
    rates: &RateSet,
    side: Side,
    eigen: &EigenBasis,
    state: &StateVector,
    mode: Mode,
) -> f64 {
    let mut j = 0.0;
    for level in Level::BOTH {
        let c = rates.channel(level);
        j += eigen.gap(level) * (c.up * state.rho00 - c.down * state.population(level));
    }
    if mode == Mode::Coherent {
        let sign = match side {
            Side::L => -1.0,
            Side::R => 1.0,
        };
        j -= sign
            * 0.25
            * eigen.sin_2theta()
            * (eigen.e_plus * rates.minus.down_bare + eigen.e_minus * rates.plus.down_bare)
            * 2.0
            * state.c_re;
    }
    j
}

/// `Tr[H_S L_alpha rho]` from the bath generator itself.
pub fn heat_current_from_generator(
    rates: &RateSet,
    side: Side,
    eigen: &EigenBasis,
    state: &StateVector,
    mode: Mode,
) -> f64 {
    let none = RateSet::default();
    let gen = match side {
        Side::L => bath_generator(rates, &none, eigen, mode),
        Side::R => bath_generator(&none, rates, eigen, mode),
    };
    energy(eigen, &gen.apply(state))
}

/// Power delivered by the measurement probe, `Tr[H_S L_M rho]`.
pub fn measurement_power(state: &StateVector, eigen: &EigenBasis, gamma_m: f64, mode: Mode) -> f64 {
    if gamma_m == 0.0 {
        return 0.0;
    }
    energy(
        eigen,
        &measurement_generator(eigen, gamma_m, mode).apply(state),
    )
}

/// `(d eps_+ / d tau, d eps_- / d tau)` from the drive rates.
pub fn level_rates(eigen: &EigenBasis, rates: &ParamRates) -> [f64; 2] {
    let r = rates.as_array();
    Level::BOTH.map(|level| {
        let g = eigen.level_gradient(level);
        g[0] * r[0] + g[1] * r[1]
    })
}

/// `sum_m (d eps_m / d tau) rho_mm`
pub fn driving_power(state: &StateVector, level_rates: [f64; 2]) -> f64 {
    level_rates[0] * state.rhopp + level_rates[1] * state.rhomm
}

/// `J_R / (P_D + J_M)`
pub fn cop(j_r: f64, p_d: f64, j_m: f64) -> Cop {
    Ratio::of(j_r, p_d + j_m)
}

/// `J_R^(i) / J_M^(i)`
pub fn cop_instantaneous(j_r_inst: f64, j_m_inst: f64) -> Cop {
    Ratio::of(j_r_inst, j_m_inst)
}

/// Instantaneous and adiabatic parts of one observable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Split {
    pub inst: f64,
    pub adia: f64,
}

impl Split {
    pub fn total(&self) -> f64 {
        self.inst + self.adia
    }

    fn mean(items: &[Split]) -> Split {
        Split {
            inst: periodic_mean(items.iter().map(|s| s.inst)),
            adia: periodic_mean(items.iter().map(|s| s.adia)),
        }
    }
}

/// Observables at one drive phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRecord {
    pub tau: f64,
    pub params: SystemParams,
    pub state_inst: StateVector,
    pub state_adia: StateVector,
    pub j_l: Split,
    pub j_r: Split,
    pub j_m: Split,
    pub p_d: Split,
}

/// Observables of a static steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticRecord {
    pub state: StateVector,
    pub j_l: f64,
    pub j_r: f64,
    pub j_m: f64,
}

impl StaticRecord {
    pub fn cop(&self) -> Cop {
        cop_instantaneous(self.j_r, self.j_m)
    }
}

/// Currents evaluated on an arbitrary state of a snapshot.
pub fn currents(snap: &Snapshot, machine: &Machine, state: &StateVector) -> (f64, f64, f64) {
    let mode = machine.mode;
    (
        heat_current(&snap.rates_l, Side::L, &snap.eigen, state, mode),
        heat_current(&snap.rates_r, Side::R, &snap.eigen, state, mode),
        measurement_power(state, &snap.eigen, machine.gamma_m, mode),
    )
}

/// Steady state and currents with the parameters frozen.
pub fn static_point(machine: &Machine, params: &SystemParams) -> Result<StaticRecord> {
    let snap = machine.snapshot(params)?;
    let state = crate::solvers::steady_state(&snap.total)?;
    let (j_l, j_r, j_m) = currents(&snap, machine, &state);
    Ok(StaticRecord {
        state,
        j_l,
        j_r,
        j_m,
    })
}

/// Instantaneous steady state, adiabatic correction and all currents at
/// phase `tau` of the protocol.
pub fn record_at(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    tau: f64,
) -> Result<ThermoRecord> {
    let (params, rates) = protocol.drive_at(tau);
    let snap = machine.snapshot(&params)?;
    let deriv = steady_state_derivative(machine, protocol, tau, DEFAULT_FD_STEP)?;
    let state_inst = deriv.state;
    let state_adia = adiabatic_correction(&snap.total, &deriv.d_tau)?;
    let (l_i, r_i, m_i) = currents(&snap, machine, &state_inst);
    let (l_a, r_a, m_a) = currents(&snap, machine, &state_adia);
    let lr = level_rates(&snap.eigen, &rates);
    Ok(ThermoRecord {
        tau,
        params,
        state_inst,
        state_adia,
        j_l: Split {
            inst: l_i,
            adia: l_a,
        },
        j_r: Split {
            inst: r_i,
            adia: r_a,
        },
        j_m: Split {
            inst: m_i,
            adia: m_a,
        },
        p_d: Split {
            inst: driving_power(&state_inst, lr),
            adia: driving_power(&state_adia, lr),
        },
    })
}

/// Uniform phase grid `tau_j = j T / n` over one period.
pub fn phase_grid(protocol: &crate::system::DriveProtocol, n_grid: usize) -> Vec<f64> {
    let period = protocol.period();
    (0..n_grid)
        .map(|j| period * j as f64 / n_grid as f64)
        .collect()
}

pub fn cycle_records(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    n_grid: usize,
) -> Result<Vec<ThermoRecord>> {
    check_grid(n_grid)?;
    protocol.validate()?;
    phase_grid(protocol, n_grid)
        .par_iter()
        .map(|&tau| record_at(machine, protocol, tau))
        .collect()
}

fn check_grid(n_grid: usize) -> Result<()> {
    if n_grid < 16 {
        return Err(Error::InvalidParameter(format!(
            "cycle grid needs at least 16 nodes, got {n_grid}"
        )));
    }
    Ok(())
}

/// Periodic trapezoid rule on uniform nodes: the arithmetic mean.
pub fn periodic_mean(samples: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = samples
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Time averages over one drive period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub n_grid: usize,
    pub omega: f64,
    pub j_l: Split,
    pub j_r: Split,
    pub j_m: Split,
    pub p_d: Split,
    /// Adiabatic part of `J_R` for the same drive without measurement.
    pub j_r_adia_unmeasured: f64,
    /// `J_R^(a) - J_R^(a)[Gamma_M = 0]`
    pub j_r_interplay: f64,
    /// Adiabatic measurement work per cycle, `(2 pi / Omega) J_M^(a)`.
    pub w_m_adia: f64,
    pub cop: Cop,
    pub cop_inst: Cop,
    /// Geometric-to-dissipative work ratio; `None` unless `T_L = T_R`.
    pub kappa: Option<Ratio>,
}

impl CycleSummary {
    /// `P_D + J_L + J_R + J_M`, zero up to `O(Omega^2)`.
    pub fn energy_balance(&self) -> f64 {
        self.p_d.total() + self.j_l.total() + self.j_r.total() + self.j_m.total()
    }
}

fn summarize(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    records: &[ThermoRecord],
    j_r_adia_unmeasured: f64,
) -> CycleSummary {
    let pick =
        |f: fn(&ThermoRecord) -> Split| Split::mean(&records.iter().map(f).collect::<Vec<_>>());
    let j_l = pick(|r| r.j_l);
    let j_r = pick(|r| r.j_r);
    let j_m = pick(|r| r.j_m);
    let p_d = pick(|r| r.p_d);
    let kappa = machine
        .equal_temperatures()
        .then(|| kappa_from(protocol, &j_m, &p_d));
    CycleSummary {
        n_grid: records.len(),
        omega: protocol.omega,
        j_l,
        j_r,
        j_m,
        p_d,
        j_r_adia_unmeasured,
        j_r_interplay: j_r.adia - j_r_adia_unmeasured,
        w_m_adia: 2.0 * PI / protocol.omega * j_m.adia,
        cop: cop(j_r.total(), p_d.total(), j_m.total()),
        cop_inst: cop_instantaneous(j_r.inst, j_m.inst),
        kappa,
    }
}

fn kappa_from(protocol: &crate::system::DriveProtocol, j_m: &Split, p_d: &Split) -> Ratio {
    if protocol.is_static() {
        return Ratio::Undefined;
    }
    Ratio::of(j_m.adia, j_m.inst + p_d.total())
}

pub fn cycle_average(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    n_grid: usize,
) -> Result<CycleSummary> {
    let records = cycle_records(machine, protocol, n_grid)?;
    let unmeasured = if machine.gamma_m == 0.0 {
        periodic_mean(records.iter().map(|r| r.j_r.adia))
    } else {
        let bare = cycle_records(&machine.with_gamma_m(0.0), protocol, n_grid)?;
        periodic_mean(bare.iter().map(|r| r.j_r.adia))
    };
    Ok(summarize(machine, protocol, &records, unmeasured))
}

/// Extra heat drawn from bath R by driving and measuring together, beyond
/// what driving alone pumps.
pub fn interplay_current(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    n_grid: usize,
) -> Result<f64> {
    Ok(cycle_average(machine, protocol, n_grid)?.j_r_interplay)
}

/// `J_M^(a) / (J_M^(i) + P_D)`, defined for equal bath temperatures.
pub fn kappa(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    n_grid: usize,
) -> Result<Ratio> {
    if !machine.equal_temperatures() {
        return Err(Error::Contract(
            "kappa is defined only for equal bath temperatures".into(),
        ));
    }
    if protocol.is_static() {
        return Ok(Ratio::Undefined);
    }
    let s = cycle_average(machine, protocol, n_grid)?;
    Ok(kappa_from(protocol, &s.j_m, &s.p_d))
}

/// Connection `Lambda_k(U) = Tr[H_S L_M v_k]` with `G v_k = d rho_i / d U_k`.
pub fn connection(machine: &Machine, params: &SystemParams) -> Result<[f64; 2]> {
    let snap = machine.snapshot(params)?;
    let grad = crate::solvers::steady_state_gradient(machine, params, DEFAULT_FD_STEP)?;
    let mut out = [0.0; 2];
    for k in 0..2 {
        let v = adiabatic_correction(&snap.total, &grad[k])?;
        out[k] = measurement_power(&v, &snap.eigen, machine.gamma_m, machine.mode);
    }
    Ok(out)
}

/// Spectral derivative of periodic samples with respect to a phase
/// `s in [0, 2 pi)`.
fn periodic_derivative(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let w = 2.0 * PI / n as f64;
    let half = n / 2;
    let coeffs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .fold((0.0, 0.0), |(re, im), (j, x)| {
                    let a = w * (k * j % n) as f64;
                    (re + x * a.cos(), im - x * a.sin())
                })
        })
        .collect();
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (k, &(re, im)) in coeffs.iter().enumerate() {
                if n.is_multiple_of(2) && k == half {
                    continue;
                }
                let wave = if k <= half {
                    k as f64
                } else {
                    k as f64 - n as f64
                };
                // d/ds of (re + i im) e^{i wave s}: i wave (re + i im) e^{i wave s}
                let a = w * (k * j % n) as f64;
                let (c, s) = (a.cos(), a.sin());
                acc += wave * (-im * c - re * s);
            }
            acc / n as f64
        })
        .collect()
}

/// Work per cycle computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricWork {
    /// `contour integral of Lambda . dU`
    pub line_integral: f64,
    /// `(2 pi / Omega) * mean J_M^(a)`
    pub from_current: f64,
}

/// Line integral of the connection around a closed contour given as
/// `n + 1` samples with the last equal to the first, uniformly spaced in
/// some phase.
pub fn geometric_work_contour(machine: &Machine, contour: &[SystemParams]) -> Result<f64> {
    if contour.len() < 17 {
        return Err(Error::InvalidParameter(
            "contour needs at least 16 distinct samples".into(),
        ));
    }
    let (first, last) = (contour[0], contour[contour.len() - 1]);
    let scale = contour
        .iter()
        .map(|p| p.e_l.abs().max(p.e_r.abs()))
        .fold(1.0, f64::max);
    let gap = (first.e_l - last.e_l)
        .abs()
        .max((first.e_r - last.e_r).abs());
    if gap > 1e-12 * scale {
        return Err(Error::OpenContour(gap));
    }
    if contour.iter().any(|p| p.coupling != first.coupling) {
        return Err(Error::Contract(
            "contour must hold the coupling fixed".into(),
        ));
    }
    let nodes = &contour[..contour.len() - 1];
    let d_el = periodic_derivative(&nodes.iter().map(|p| p.e_l).collect::<Vec<_>>());
    let d_er = periodic_derivative(&nodes.iter().map(|p| p.e_r).collect::<Vec<_>>());
    let lambdas: Vec<[f64; 2]> = nodes
        .par_iter()
        .map(|p| connection(machine, p))
        .collect::<Result<_>>()?;
    let n = nodes.len() as f64;
    let sum: f64 = lambdas
        .iter()
        .zip(d_el.iter().zip(&d_er))
        .map(|(l, (a, b))| l[0] * a + l[1] * b)
        .sum();
    Ok(2.0 * PI / n * sum)
}

/// Samples the protocol's contour on the phase grid, closed.
pub fn protocol_contour(
    protocol: &crate::system::DriveProtocol,
    n_grid: usize,
) -> Vec<SystemParams> {
    let period = protocol.period();
    (0..=n_grid)
        .map(|j| {
            protocol
                .drive_at(period * (j % n_grid) as f64 / n_grid as f64)
                .0
        })
        .collect()
}

pub fn geometric_work(
    machine: &Machine,
    protocol: &crate::system::DriveProtocol,
    n_grid: usize,
) -> Result<GeometricWork> {
    check_grid(n_grid)?;
    if protocol.is_static() {
        return Ok(GeometricWork {
            line_integral: 0.0,
            from_current: 0.0,
        });
    }
    let line_integral = geometric_work_contour(machine, &protocol_contour(protocol, n_grid))?;
    let records = cycle_records(machine, protocol, n_grid)?;
    let from_current =
        2.0 * PI / protocol.omega * periodic_mean(records.iter().map(|r| r.j_m.adia));
    Ok(GeometricWork {
        line_integral,
        from_current,
    })
}
