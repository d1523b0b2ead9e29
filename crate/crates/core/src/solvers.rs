//! Time evolution, steady states, the first-order adiabatic correction and
//! finite-difference derivatives of the steady state.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{measurement_stochastic_increment, Mode, StateVector, Superoperator};
use crate::machine::Machine;
use crate::system::{DriveProtocol, EigenBasis, SystemParams};

/// `dt * spectral_radius` must stay below this for the RK4 integrator.
pub const RK4_STABILITY_LIMIT: f64 = 0.5;

/// Populations may overshoot `[0, 1]` by this much in a stochastic run.
pub const GUARD_BAND: f64 = 0.01;

/// Default finite-difference step for steady-state derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Relative disagreement allowed between step `h` and `h / 2` derivatives.
const RICHARDSON_TOL: f64 = 1e-4;

/// Trajectories per work unit in ensemble runs. Fixed so that floating-point
/// reduction order does not depend on the thread count.
const ENSEMBLE_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub dt: f64,
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn last(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Number of steps of size `dt` needed to reach `t_end`; a final partial
/// step counts as one.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    let ratio = t_end / dt;
    let n = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round()
    } else {
        ratio.ceil()
    };
    Ok(n as usize)
}

/// One classical RK4 step of `dx/dt = G x` written as the degree-4 Taylor
/// polynomial of `exp(G h)`.
fn rk4_propagator(g: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let n = g.nrows();
    let gh = g * h;
    let mut term = DMatrix::identity(n, n);
    let mut out = DMatrix::identity(n, n);
    for k in 1..=4 {
        term = &term * &gh / k as f64;
        out += &term;
    }
    out
}

fn as_vector(state: &StateVector, mode: Mode) -> DVector<f64> {
    DVector::from_column_slice(&state.to_array()[..mode.dim()])
}

fn from_vector(v: &DVector<f64>) -> StateVector {
    let mut a = [0.0; 5];
    a[..v.len()].copy_from_slice(v.as_slice());
    StateVector::from_array(a)
}

/// Fixed-step RK4 integration of `d rho / dt = G rho`.
pub fn evolve_deterministic(
    generator: &Superoperator,
    state0: StateVector,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = step_count(t_end, dt)?;
    let product = dt * generator.spectral_radius();
    if product >= RK4_STABILITY_LIMIT {
        return Err(Error::StepSize {
            dt,
            product,
            limit: RK4_STABILITY_LIMIT,
        });
    }
    let mode = generator.mode();
    let full = rk4_propagator(generator.matrix(), dt);
    let mut x = as_vector(&state0, mode);
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(from_vector(&x));
    for i in 1..=n {
        let t_prev = (i - 1) as f64 * dt;
        let h = (t_end - t_prev).min(dt);
        x = if h == dt {
            &full * &x
        } else {
            rk4_propagator(generator.matrix(), h) * &x
        };
        times.push(t_prev + h);
        states.push(from_vector(&x));
    }
    Ok(Trajectory {
        times,
        states,
        dt,
        seed: None,
    })
}

/// Seeded generator for trajectory `index` of an ensemble started from
/// `base_seed` (ChaCha8 seeded through `seed_from_u64(base_seed + index)`).
pub fn trajectory_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(index))
}

/// Parameters of an Euler-Maruyama run with the measurement record kept.
#[derive(Debug, Clone, Copy)]
pub struct StochasticSetup<'a> {
    pub generator: &'a Superoperator,
    pub eigen: &'a EigenBasis,
    pub gamma_m: f64,
    pub dt: f64,
}

impl StochasticSetup<'_> {
    /// Runs `n_steps` steps, calling `observe(step, state)` for the initial
    /// state and after every step.
    pub fn run(
        &self,
        state0: StateVector,
        n_steps: usize,
        seed: u64,
        mut observe: impl FnMut(usize, &StateVector),
    ) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        let mode = self.generator.mode();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sqrt_dt = self.dt.sqrt();
        let mut state = state0;
        observe(0, &state);
        for step in 1..=n_steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let drift = self.generator.apply(&state) * self.dt;
            let kick = measurement_stochastic_increment(
                &state,
                self.eigen,
                self.gamma_m,
                z * sqrt_dt,
                mode,
            );
            state = state + drift + kick;
            for p in [state.rho00, state.rhopp, state.rhomm] {
                if !(-GUARD_BAND..=1.0 + GUARD_BAND).contains(&p) {
                    return Err(Error::GuardBand { step, value: p });
                }
            }
            observe(step, &state);
        }
        Ok(())
    }
}

/// Euler-Maruyama evolution with the stochastic measurement innovation.
/// Bit-reproducible for a fixed `seed`.
pub fn evolve_stochastic(
    generator: &Superoperator,
    eigen: &EigenBasis,
    gamma_m: f64,
    state0: StateVector,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    let n = step_count(t_end, dt)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let setup = StochasticSetup {
        generator,
        eigen,
        gamma_m,
        dt,
    };
    setup.run(state0, n, seed, |i, s| {
        times.push(i as f64 * dt);
        states.push(*s);
    })?;
    Ok(Trajectory {
        times,
        states,
        dt,
        seed: Some(seed),
    })
}

/// Mean and standard error of an observable over a stochastic ensemble,
/// sampled every `sample_every` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_trajectories: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn ensemble_statistics<F>(
    setup: &StochasticSetup<'_>,
    state0: StateVector,
    t_end: f64,
    sample_every: usize,
    base_seed: u64,
    n_trajectories: usize,
    observable: F,
) -> Result<EnsembleStats>
where
    F: Fn(&StateVector) -> f64 + Sync,
{
    if n_trajectories < 2 || sample_every == 0 {
        return Err(Error::InvalidParameter(
            "ensemble needs >= 2 trajectories and a positive sampling stride".into(),
        ));
    }
    let n_steps = step_count(t_end, setup.dt)?;
    let n_samples = n_steps / sample_every + 1;
    let chunks: Vec<(usize, usize)> = (0..n_trajectories)
        .step_by(ENSEMBLE_CHUNK)
        .map(|lo| (lo, (lo + ENSEMBLE_CHUNK).min(n_trajectories)))
        .collect();
    let partial: Vec<Result<(Vec<f64>, Vec<f64>)>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut sum = vec![0.0; n_samples];
            let mut sum_sq = vec![0.0; n_samples];
            for i in lo..hi {
                setup.run(
                    state0,
                    n_steps,
                    base_seed.wrapping_add(i as u64),
                    |step, s| {
                        if step % sample_every == 0 {
                            let v = observable(s);
                            sum[step / sample_every] += v;
                            sum_sq[step / sample_every] += v * v;
                        }
                    },
                )?;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let mut sum = vec![0.0; n_samples];
    let mut sum_sq = vec![0.0; n_samples];
    for chunk in partial {
        let (s, q) = chunk?;
        for k in 0..n_samples {
            sum[k] += s[k];
            sum_sq[k] += q[k];
        }
    }
    let n = n_trajectories as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_err = sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    Ok(EnsembleStats {
        times: (0..n_samples)
            .map(|k| (k * sample_every) as f64 * setup.dt)
            .collect(),
        mean,
        std_err,
        n_trajectories,
    })
}

/// `G` with its first row replaced by the population-trace functional.
fn constrained_system(generator: &Superoperator) -> Result<DMatrix<f64>> {
    let mut a = generator.matrix().clone();
    let n = a.ncols();
    for c in 0..n {
        a[(0, c)] = if c < 3 { 1.0 } else { 0.0 };
    }
    let sv = a.clone().svd(false, false).singular_values;
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
        (lo.min(*s), hi.max(*s))
    });
    if !(hi > 0.0) || lo <= 1e-13 * hi {
        return Err(Error::DegenerateSteadyState);
    }
    Ok(a)
}

fn solve_refined(a: &DMatrix<f64>, g: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.clone().lu();
    let mut x = lu.solve(b).ok_or(Error::DegenerateSteadyState)?;
    // One step of iterative refinement.
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    debug_assert_eq!(g.ncols(), x.len());
    Ok(x)
}

/// Unique state with `G rho = 0` and unit population trace.
pub fn steady_state(generator: &Superoperator) -> Result<StateVector> {
    let a = constrained_system(generator)?;
    let mut b = DVector::zeros(a.nrows());
    b[0] = 1.0;
    let x = solve_refined(&a, generator.matrix(), &b)?;
    Ok(from_vector(&x))
}

/// Traceless solution of `G rho_a = rhs`.
pub fn adiabatic_correction(generator: &Superoperator, rhs: &StateVector) -> Result<StateVector> {
    let tr = rhs.trace();
    if tr.abs() > 1e-10 {
        return Err(Error::NotTraceless(tr));
    }
    let a = constrained_system(generator)?;
    let mut b = as_vector(rhs, generator.mode());
    b[0] = 0.0;
    let x = solve_refined(&a, generator.matrix(), &b)?;
    Ok(from_vector(&x))
}

fn steady_at(machine: &Machine, params: &SystemParams) -> Result<StateVector> {
    steady_state(&machine.snapshot(params)?.total)
}

/// Central differences of the steady state with respect to `(e_L, e_R)`.
pub fn central_difference(
    machine: &Machine,
    params: &SystemParams,
    h: f64,
) -> Result<[StateVector; 2]> {
    let mut out = [StateVector::ZERO; 2];
    for (axis, slot) in out.iter_mut().enumerate() {
        let up = steady_at(machine, &params.shifted(axis, h))?;
        let down = steady_at(machine, &params.shifted(axis, -h))?;
        *slot = (up - down) * (0.5 / h);
    }
    Ok(out)
}

/// Steady-state gradient with respect to `(e_L, e_R)`.
///
/// Central differences at `h` and `h / 2` must agree to a relative `1e-4`;
/// the Richardson combination of the two is returned.
pub fn steady_state_gradient(
    machine: &Machine,
    params: &SystemParams,
    h: f64,
) -> Result<[StateVector; 2]> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let coarse = central_difference(machine, params, h)?;
    let fine = central_difference(machine, params, 0.5 * h)?;
    let mut out = [StateVector::ZERO; 2];
    for k in 0..2 {
        let change = coarse[k].max_abs_diff(&fine[k]);
        let scale = fine[k].norm_inf();
        if change > RICHARDSON_TOL * scale + 1e-9 {
            return Err(Error::FiniteDifference(
                change / scale.max(f64::MIN_POSITIVE),
            ));
        }
        out[k] = fine[k] + (fine[k] - coarse[k]) * (1.0 / 3.0);
    }
    Ok(out)
}

/// Steady state and its derivatives at one point of a drive cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyDerivative {
    pub state: StateVector,
    /// `d rho_i / d tau`
    pub d_tau: StateVector,
    /// `d rho_i / d e_L`, `d rho_i / d e_R`
    pub d_params: [StateVector; 2],
}

pub fn steady_state_derivative(
    machine: &Machine,
    protocol: &DriveProtocol,
    tau: f64,
    h_fd: f64,
) -> Result<SteadyDerivative> {
    let (params, rates) = protocol.drive_at(tau);
    let state = steady_at(machine, &params)?;
    if protocol.is_static() {
        return Ok(SteadyDerivative {
            state,
            d_tau: StateVector::ZERO,
            d_params: steady_state_gradient(machine, &params, h_fd)?,
        });
    }
    let d_params = steady_state_gradient(machine, &params, h_fd)?;
    let r = rates.as_array();
    let d_tau = d_params[0] * r[0] + d_params[1] * r[1];
    Ok(SteadyDerivative {
        state,
        d_tau,
        d_params,
    })
}
