use mbatm_core::solvers::{
    ensemble_statistics, evolve_deterministic, steady_state, StochasticSetup,
};
use mbatm_core::thermo::{cycle_average, cycle_records, heat_current, kappa, static_point};
use mbatm_core::{
    BathSpec, Drive, DriveProtocol, Machine, Mode, Nonlinearity, Ratio, Side, StateVector,
    SystemParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(
    rng: &mut ChaCha8Rng,
    bosonic: bool,
    gamma_m: f64,
    mode: Mode,
) -> (Machine, SystemParams) {
    let (tl, tr) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
    let (sl, sr) = (rng.random_range(0.01..0.3), rng.random_range(0.01..0.3));
    let (left, right) = if bosonic {
        let nl = if rng.random_bool(0.5) {
            Nonlinearity::Quadratic
        } else {
            Nonlinearity::Linear
        };
        (
            BathSpec::bosonic_ohmic(Side::L, tl, sl, 20.0, Nonlinearity::Linear).unwrap(),
            BathSpec::bosonic_ohmic(Side::R, tr, sr, 20.0, nl).unwrap(),
        )
    } else {
        (
            BathSpec::fermionic_flat(Side::L, tl, sl).unwrap(),
            BathSpec::fermionic_flat(Side::R, tr, sr).unwrap(),
        )
    };
    let params = SystemParams::new(
        rng.random_range(0.1..4.0),
        rng.random_range(0.1..4.0),
        rng.random_range(0.01..2.0),
    )
    .unwrap();
    (Machine::new(left, right, gamma_m, mode).unwrap(), params)
}

fn fig4_machine(gamma_m: f64, t_l: f64, t_r: f64) -> (Machine, DriveProtocol) {
    let m = Machine::new(
        BathSpec::fermionic_flat(Side::L, t_l, 0.05).unwrap(),
        BathSpec::fermionic_flat(Side::R, t_r, 0.05).unwrap(),
        gamma_m,
        Mode::Diagonal,
    )
    .unwrap();
    let p = DriveProtocol::new(
        Drive {
            offset: 1.5,
            amplitude: 0.2,
            phase: 0.0,
        },
        Drive {
            offset: 0.3,
            amplitude: 1.0,
            phase: std::f64::consts::FRAC_PI_2,
        },
        0.15,
        0.005,
    )
    .unwrap();
    (m, p)
}

#[test]
fn unmeasured_machine_produces_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..100 {
        let mode = if i % 3 == 0 {
            Mode::Coherent
        } else {
            Mode::Diagonal
        };
        let (m, p) = random_point(&mut rng, i % 2 == 0, 0.0, mode);
        let r = static_point(&m, &p).unwrap();
        let sigma = -r.j_l / m.left.temperature - r.j_r / m.right.temperature;
        assert!(sigma >= -1e-14, "point {i}: entropy production {sigma:e}");
        assert!((r.j_l + r.j_r).abs() < 1e-13);
        assert_eq!(r.j_m, 0.0);
    }
}

#[test]
fn heat_flows_from_hot_to_cold_without_measurement() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..50 {
        let (m, p) = random_point(&mut rng, i % 2 == 0, 0.0, Mode::Diagonal);
        let r = static_point(&m, &p).unwrap();
        let hot_l = m.left.temperature > m.right.temperature;
        assert!(
            r.j_l * if hot_l { 1.0 } else { -1.0 } >= -1e-15,
            "point {i}"
        );
    }
}

#[test]
fn measurement_power_follows_population_ordering() {
    // Dephasing feeds energy in unless the levels are inverted.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for i in 0..50 {
        let gamma_m = rng.random_range(0.01..1.0);
        let (m, p) = random_point(&mut rng, i % 2 == 0, gamma_m, Mode::Diagonal);
        let r = static_point(&m, &p).unwrap();
        let e = m.snapshot(&p).unwrap().eigen;
        let inversion = (r.state.rhopp - r.state.rhomm) * (e.e_plus - e.e_minus);
        assert!(r.j_m * inversion <= 1e-15, "point {i}: J_M = {:e}", r.j_m);
        assert!((r.j_l + r.j_r + r.j_m).abs() < 1e-12);
    }
}

#[test]
fn instantaneous_currents_balance_at_every_phase() {
    let (m, p) = fig4_machine(0.08, 1.025, 0.975);
    for r in cycle_records(&m, &p, 64).unwrap() {
        assert!((r.j_l.inst + r.j_r.inst + r.j_m.inst).abs() < 1e-14);
    }
}

#[test]
fn driven_balance_residual_is_the_adiabatic_drive_power() {
    let (m, p) = fig4_machine(0.08, 1.025, 0.975);
    let s = cycle_average(&m, &p, 128).unwrap();
    let rel = (s.energy_balance() - s.p_d.adia).abs() / s.p_d.adia.abs();
    assert!(rel < 1e-6, "{rel:e}");
}

#[test]
fn cycle_averages_converge_with_the_grid() {
    let (m, p) = fig4_machine(0.05, 1.0, 1.0);
    let coarse = cycle_average(&m, &p, 32).unwrap();
    let fine = cycle_average(&m, &p, 128).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(coarse.j_r.total(), fine.j_r.total()) < 1e-9);
    let (Ratio::Value(k1), Ratio::Value(k2)) =
        (kappa(&m, &p, 32).unwrap(), kappa(&m, &p, 128).unwrap())
    else {
        panic!("kappa undefined for a driven protocol");
    };
    assert!(rel(k1, k2) < 1e-9, "{k1} vs {k2}");
}

#[test]
fn long_integration_reaches_steady_state_in_both_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for mode in [Mode::Diagonal, Mode::Coherent] {
        let (m, p) = random_point(&mut rng, false, 0.3, mode);
        let snap = m.snapshot(&p).unwrap();
        let target = steady_state(&snap.total).unwrap();
        let traj = evolve_deterministic(
            &snap.total,
            StateVector::populations(0.0, 0.0, 1.0),
            4000.0,
            0.05,
        )
        .unwrap();
        assert!(traj.last().max_abs_diff(&target) < 1e-10);
    }
}

#[test]
fn ensemble_mean_tracks_the_discarded_record() {
    let m = Machine::new(
        BathSpec::fermionic_flat(Side::L, 1.0, 0.2).unwrap(),
        BathSpec::fermionic_flat(Side::R, 1.0, 0.2).unwrap(),
        0.05,
        Mode::Diagonal,
    )
    .unwrap();
    let p = SystemParams::new(2.0, 3.0, 0.1).unwrap();
    let snap = m.snapshot(&p).unwrap();
    let setup = StochasticSetup {
        generator: &snap.total,
        eigen: &snap.eigen,
        gamma_m: m.gamma_m,
        dt: 0.01,
    };
    let rho0 = StateVector::populations(0.5, 0.2, 0.3);
    let j_r = |s: &StateVector| heat_current(&snap.rates_r, Side::R, &snap.eigen, s, m.mode);
    let stats = ensemble_statistics(&setup, rho0, 10.0, 100, 7, 2000, j_r).unwrap();
    let det = evolve_deterministic(&snap.total, rho0, 10.0, 0.01).unwrap();
    for (k, (mean, se)) in stats.mean.iter().zip(&stats.std_err).enumerate() {
        let reference = j_r(&det.states[k * 100]);
        assert!(
            (mean - reference).abs() <= 4.0 * se.max(1e-15),
            "sample {k}"
        );
    }
}
