use std::io::Write;

use mbatm_core::solvers::{evolve_deterministic, step_count, StochasticSetup};
use mbatm_core::thermo::{self, currents, phase_grid, static_point, Ratio};
use mbatm_core::{DriveProtocol, Machine, StateVector, SystemParams};
use rayon::prelude::*;

use crate::config::{Analysis, RunConfig};
use crate::CliError;

/// CSV-ready output: a header and rows of formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// False when any evaluated point lies outside the global-master-equation
    /// window.
    pub regime_ok: bool,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[i].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits; `NaN` for undefined ratios.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn flag(ok: bool) -> String {
    (if ok { "1" } else { "0" }).to_string()
}

const STEADY_COLUMNS: [&str; 14] = [
    "e_l",
    "e_r",
    "coupling",
    "gamma_m",
    "rho_00",
    "rho_pp",
    "rho_mm",
    "re_rho_pm",
    "im_rho_pm",
    "J_L",
    "J_R",
    "J_M",
    "COP",
    "regime_ok",
];

const CYCLE_COLUMNS: [&str; 17] = [
    "coupling",
    "gamma_m",
    "omega",
    "J_L",
    "J_R",
    "J_R_inst",
    "J_R_adia",
    "J_R_int",
    "J_M",
    "J_M_inst",
    "J_M_adia",
    "P_D",
    "COP",
    "COP_inst",
    "kappa",
    "W_M_adia",
    "regime_ok",
];

fn numeric(e: mbatm_core::Error) -> CliError {
    CliError::Numerical(e)
}

fn steady_row(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let machine = cfg.machine()?;
    let params = cfg.params().expect("validated");
    let rec = static_point(&machine, &params).map_err(numeric)?;
    let s = rec.state;
    let mut row: Vec<String> = [
        params.e_l,
        params.e_r,
        params.coupling,
        machine.gamma_m,
        s.rho00,
        s.rhopp,
        s.rhomm,
        s.c_re,
        s.c_im,
        rec.j_l,
        rec.j_r,
        rec.j_m,
        rec.cop().or_nan(),
    ]
    .map(num)
    .to_vec();
    row.push(flag(machine.regime_valid(&params).map_err(numeric)?));
    Ok(row)
}

fn cycle_regime(
    machine: &Machine,
    protocol: &DriveProtocol,
    n_grid: usize,
) -> Result<bool, CliError> {
    for tau in phase_grid(protocol, n_grid) {
        if !machine
            .regime_valid(&protocol.drive_at(tau).0)
            .map_err(numeric)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

fn cycle_row(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let machine = cfg.machine()?;
    let protocol = cfg.protocol().expect("validated");
    let n_grid = cfg.solver.n_grid;
    let s = thermo::cycle_average(&machine, &protocol, n_grid).map_err(numeric)?;
    let mut row: Vec<String> = [
        protocol.coupling,
        machine.gamma_m,
        protocol.omega,
        s.j_l.total(),
        s.j_r.total(),
        s.j_r.inst,
        s.j_r.adia,
        s.j_r_interplay,
        s.j_m.total(),
        s.j_m.inst,
        s.j_m.adia,
        s.p_d.total(),
        s.cop.or_nan(),
        s.cop_inst.or_nan(),
        s.kappa.unwrap_or(Ratio::Undefined).or_nan(),
        s.w_m_adia,
    ]
    .map(num)
    .to_vec();
    row.push(flag(cycle_regime(&machine, &protocol, n_grid)?));
    Ok(row)
}

fn point_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let (columns, row_fn): (&[&str], fn(&RunConfig) -> Result<Vec<String>, CliError>) =
        match cfg.analysis {
            Analysis::Steady => (&STEADY_COLUMNS, steady_row),
            Analysis::Cycle => (&CYCLE_COLUMNS, cycle_row),
            Analysis::Transient => unreachable!(),
        };
    let mut header: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
    let rows = match &cfg.sweep {
        None => vec![row_fn(cfg)?],
        Some(sw) => {
            header.insert(0, sw.parameter.clone());
            let points: Vec<(f64, RunConfig)> = sw
                .values()
                .into_iter()
                .map(|v| {
                    let c = cfg.with_value(&sw.parameter, toml::Value::Float(v))?;
                    c.validate()?;
                    Ok((v, c))
                })
                .collect::<Result<_, CliError>>()?;
            points
                .par_iter()
                .map(|(v, c)| {
                    let mut row = row_fn(c)?;
                    row.insert(0, num(*v));
                    Ok(row)
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let regime_ok = rows
        .iter()
        .all(|r: &Vec<String>| r.last().is_some_and(|f| f == "1"));
    Ok(Table {
        header,
        rows,
        regime_ok,
    })
}

fn transient_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let machine = cfg.machine()?;
    let params: SystemParams = cfg.params().expect("validated");
    let snap = machine.snapshot(&params).map_err(numeric)?;
    let sol = &cfg.solver;
    let [a, b, c] = sol.initial;
    let rho0 = StateVector::populations(a, b, c);
    let n_steps = step_count(sol.t_end, sol.dt).map_err(numeric)?;
    let every = sol.sample_every;
    let j_r = |s: &StateVector| currents(&snap, &machine, s).1;

    let avg = evolve_deterministic(&snap.total, rho0, n_steps as f64 * sol.dt, sol.dt)
        .map_err(numeric)?;
    let setup = StochasticSetup {
        generator: &snap.total,
        eigen: &snap.eigen,
        gamma_m: machine.gamma_m,
        dt: sol.dt,
    };
    let trajectories: Vec<Vec<f64>> = (0..sol.n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let mut samples = Vec::with_capacity(n_steps / every + 1);
            setup.run(rho0, n_steps, sol.base_seed.wrapping_add(i), |step, s| {
                if step % every == 0 {
                    samples.push(j_r(s));
                }
            })?;
            Ok(samples)
        })
        .collect::<Result<_, mbatm_core::Error>>()
        .map_err(numeric)?;

    let mut header = vec!["t".to_string(), "J_R_avg".to_string()];
    header.extend((1..=sol.n_trajectories).map(|k| format!("J_R_traj_{k}")));
    let rows = (0..=n_steps / every)
        .map(|k| {
            let step = k * every;
            let mut row = vec![num(step as f64 * sol.dt), num(j_r(&avg.states[step]))];
            row.extend(trajectories.iter().map(|t| num(t[k])));
            row
        })
        .collect();
    Ok(Table {
        header,
        rows,
        regime_ok: machine.regime_valid(&params).map_err(numeric)?,
    })
}

/// Evaluates a validated config.
pub fn execute(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.analysis {
        Analysis::Transient => transient_table(cfg),
        _ => point_table(cfg),
    }
}
