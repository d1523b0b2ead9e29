use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::process::Command;

use mbatm_cli::config::Model;
use mbatm_cli::{execute, presets, Analysis, CliError, RunConfig};
use mbatm_core::{Mode, Nonlinearity};

fn mbatm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mbatm"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn fig3_preset_values() {
    let c = presets::preset("fig3").unwrap();
    let s = c.system.unwrap();
    assert_eq!((s.e_l, s.e_r, s.coupling), (4.0, 0.15, 0.5));
    assert_eq!((c.bath.left.strength, c.bath.right.strength), (0.2, 0.2));
    assert_eq!(c.model, Model::DotsFermionic);
}

#[test]
fn fig4_top_preset_values() {
    let c = presets::preset("fig4_top").unwrap();
    let d = c.drive.unwrap();
    assert_eq!(
        (d.e_l.offset, d.e_l.amplitude, d.e_l.phase),
        (1.5, 0.2, 0.0)
    );
    assert_eq!(
        (d.e_r.offset, d.e_r.amplitude, d.e_r.phase),
        (0.3, 1.0, FRAC_PI_2)
    );
    assert_eq!((d.omega, d.coupling), (0.005, 0.15));
    let (tl, tr) = (c.bath.left.temperature, c.bath.right.temperature);
    assert!((tl - tr - 0.05).abs() < 1e-15 && ((tl + tr) / 2.0 - 1.0).abs() < 1e-15);
}

#[test]
fn fig7_preset_values() {
    let c = presets::preset("fig7").unwrap();
    assert_eq!(c.measurement.gamma_m, 0.2);
    let s = c.system.unwrap();
    assert_eq!((s.e_r, s.coupling), (3.0, 2.0));
    assert_eq!(c.bath.right.cutoff, Some(100.0));
    assert_eq!(c.bath.left.strength, 0.1);
    assert_eq!(c.bath.right.nonlinearity, Nonlinearity::Linear);
    assert_eq!(c.model, Model::QubitsBosonic);
}

#[test]
fn fig5_uses_equal_temperatures() {
    let c = presets::preset("fig5").unwrap();
    assert_eq!(c.bath.left.temperature, c.bath.right.temperature);
    assert_eq!(c.measurement.gamma_m, 0.05);
}

#[test]
fn unknown_preset_lists_valid_names() {
    let e = presets::preset("fig6").unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("fig4_bottom") && msg.contains("fig8"), "{msg}");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn every_preset_round_trips() {
    for name in presets::names() {
        let c = presets::preset(name).unwrap();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, back, "{name}");
    }
}

#[test]
fn sweep_over_missing_field_names_it() {
    let mut text = presets::source("fig3").unwrap().to_string();
    text = text.replace("measurement.gamma_m", "measurement.gamma_x");
    match RunConfig::from_toml(&text) {
        Err(CliError::Config(msg)) => assert!(msg.contains("measurement.gamma_x"), "{msg}"),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn unknown_key_rejected() {
    let text = presets::source("fig3")
        .unwrap()
        .replace("gamma_m = 0.0", "gamma_m = 0.0\nstrenght = 1.0");
    assert!(matches!(
        RunConfig::from_toml(&text),
        Err(CliError::Config(_))
    ));
}

#[test]
fn system_and_drive_are_exclusive() {
    let drive = presets::preset("fig4_top").unwrap();
    let mut both = presets::preset("fig3").unwrap();
    both.drive = drive.drive;
    assert!(both.validate().is_err());
    both.system = None;
    both.drive = None;
    assert!(both.validate().is_err());
}

#[test]
fn invalid_sweep_range() {
    let mut c = presets::preset("fig3").unwrap();
    c.sweep.as_mut().unwrap().points = 0;
    assert!(c.validate().is_err());
}

#[test]
fn row_counts_follow_the_grid() {
    let mut c = presets::preset("fig3").unwrap();
    c.sweep.as_mut().unwrap().points = 7;
    let t = execute(&c).unwrap();
    assert_eq!(t.rows.len(), 7);
    assert!(t.rows.iter().all(|r| r.len() == t.header.len()));

    let mut tr = presets::preset("fig2").unwrap();
    tr.solver.t_end = 2.0;
    tr.solver.sample_every = 40;
    tr.solver.n_trajectories = 2;
    let t = execute(&tr).unwrap();
    assert_eq!(t.rows.len(), 2.0f64.div_euclid(0.005) as usize / 40 + 1);
    assert_eq!(t.header, ["t", "J_R_avg", "J_R_traj_1", "J_R_traj_2"]);
}

#[test]
fn transient_starts_from_the_same_state() {
    let mut c = presets::preset("fig2").unwrap();
    c.solver.t_end = 0.5;
    let t = execute(&c).unwrap();
    let first = &t.rows[0];
    assert!(first[1..].iter().all(|v| v == &first[1]));
}

#[test]
fn regime_flag_marks_weak_coupling() {
    // coupling 0.1 below the lead width 0.2
    let mut c = presets::preset("fig2").unwrap();
    c.solver.t_end = 0.1;
    assert!(!execute(&c).unwrap().regime_ok);
    let mut f3 = presets::preset("fig3").unwrap();
    f3.sweep.as_mut().unwrap().points = 2;
    assert!(execute(&f3).unwrap().regime_ok);
}

#[test]
fn assignment_overrides() {
    let c = presets::preset("fig7").unwrap();
    let q = c
        .with_assignment("bath.right.nonlinearity=quadratic")
        .unwrap();
    assert_eq!(q.bath.right.nonlinearity, Nonlinearity::Quadratic);
    let m = c.with_assignment("mode=coherent").unwrap();
    assert_eq!(m.mode, Mode::Coherent);
    assert!(c
        .with_assignment("bath.left.nonlinearity=quadratic")
        .is_err());
    assert!(c.with_assignment("system.e_l=abc").is_err());
    let g = c.with_assignment("solver.n_grid=64").unwrap();
    assert_eq!(g.solver.n_grid, 64);
}

#[test]
fn cli_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let st = mbatm()
            .args(["preset", "fig2", "--seed", "11", "--set", "solver.t_end=3"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    let c = dir.path().join("c.csv");
    mbatm()
        .args(["preset", "fig2", "--seed", "12", "--set", "solver.t_end=3"])
        .arg("--out")
        .arg(&c)
        .status()
        .unwrap();
    assert_ne!(x, std::fs::read(&c).unwrap());
}

#[test]
fn emitted_config_runs_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let out = mbatm()
        .args(["preset", "fig3", "--emit-config"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cfg = write(
        dir.path(),
        "fig3.toml",
        std::str::from_utf8(&out.stdout).unwrap(),
    );
    let via_run = mbatm().arg("run").arg(&cfg).output().unwrap();
    let via_preset = mbatm().args(["preset", "fig3"]).output().unwrap();
    assert!(via_run.status.success());
    assert_eq!(via_run.stdout, via_preset.stdout);
    let header = std::str::from_utf8(&via_run.stdout)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(header.starts_with("measurement.gamma_m,e_l,"));
}

#[test]
fn sweep_and_trajectory_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f.toml", presets::source("fig3").unwrap());
    let out = mbatm()
        .arg("sweep")
        .arg(&cfg)
        .args([
            "--param",
            "system.coupling",
            "--from",
            "0.3",
            "--to",
            "0.6",
            "--points",
            "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::str::from_utf8(&out.stdout).unwrap().lines().count(), 5);

    let out = mbatm()
        .arg("trajectory")
        .arg(&cfg)
        .args([
            "--trajectories",
            "2",
            "--set",
            "solver.t_end=1",
            "--set",
            "measurement.gamma_m=0.1",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,J_R_avg,J_R_traj_1,J_R_traj_2\n"));
    assert_eq!(text.lines().count(), 1 + 200 / 20 + 1);
}

#[test]
fn csv_cells_carry_17_significant_digits() {
    let out = mbatm().args(["preset", "fig3"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(2).unwrap();
    let cell = row.split(',').nth(1).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{cell}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let st = mbatm().args(["preset", "nope"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let bad = write(dir.path(), "bad.toml", "model = \"dots_fermionic\"\n");
    assert_eq!(
        mbatm().arg("run").arg(&bad).status().unwrap().code(),
        Some(2)
    );
    // A step far beyond the RK4 stability limit is a numerical failure.
    let st = mbatm()
        .args([
            "preset",
            "fig2",
            "--set",
            "solver.dt=5",
            "--set",
            "solver.t_end=10",
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn analysis_needs_matching_system_block() {
    let mut c = presets::preset("fig3").unwrap();
    c.analysis = Analysis::Cycle;
    assert!(c.validate().is_err());
}
