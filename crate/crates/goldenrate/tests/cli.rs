use std::path::Path;
use std::process::{Command, Output};

use goldenrate::commands;
use goldenrate::config::{self, Sources};
use goldenrate::ensemble::parallel_ensemble;
use goldenrate::output::{read_csv, write_csv};
use goldenrate_core::params::ModelKind;
use goldenrate_core::stochastic::{ensemble_mean, JumpMicrostate};

fn goldenrate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goldenrate")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&goldenrate(&["presets"], d)), 0);
    assert_eq!(code(&goldenrate(&["simulate"], d)), 2);
    assert_eq!(code(&goldenrate(&["simulate", "--preset", "fig9"], d)), 2);
    assert_eq!(code(&goldenrate(&["simulate", "--preset", "fig4", "--set", "rates.gamma_0=-1"], d)), 2);
    assert_eq!(code(&goldenrate(&["simulate", "--preset", "fig4", "--set", "typo=1"], d)), 2);
    assert_eq!(code(&goldenrate(&["simulate", "--config", "missing.toml"], d)), 4);
    let bad_dir = d.join("no/such/dir/out.csv");
    assert_eq!(code(&goldenrate(&["simulate", "--preset", "fig4", "-o", bad_dir.to_str().unwrap()], d)), 4);
    assert_eq!(
        code(&goldenrate(&["stochastic", "--preset", "blackbody-equilibration", "--set", "stochastic.n_traj=0"], d)),
        2
    );
    assert_eq!(code(&goldenrate(&["scan-m", "--preset", "fig4", "--m-list", ""], d)), 2);
    assert_eq!(code(&goldenrate(&["scan-m", "--preset", "fig6", "--m-list", "10"], d)), 2);
    // a step cap far too small for the run
    assert_eq!(code(&goldenrate(&["simulate", "--preset", "fig4", "--set", "integrator.max_step_s=1e-19"], d)), 3);
}

#[test]
fn small_systems_disagree_with_mean_field() {
    let dir = tempfile::tempdir().unwrap();
    // one TLS and one mode: fluctuations are not negligible
    let out = goldenrate(
        &[
            "stochastic",
            "--preset",
            "blackbody-equilibration",
            "--set",
            "M=1",
            "--set",
            "N_modes=1",
            "--set",
            "stochastic.n_traj=20000",
            "-o",
            "st.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 5, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("st.csv").exists());
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = goldenrate(&["simulate", "--preset", "fig2", "--emit-relative-T", "-o", "fig2.csv"], dir.path());
    assert_eq!(code(&out), 0);
    let text = std::fs::read(dir.path().join("fig2.csv")).unwrap();
    assert!(!text.contains(&b'\r'));
    let table = read_csv(text.as_slice()).unwrap();
    assert_eq!(table.rows.len(), 5001);
    assert_eq!(table.columns[..18], goldenrate::output::SIMULATION_COLUMNS.map(String::from));
    let mut again = Vec::new();
    write_csv(&mut again, &table).unwrap();
    assert_eq!(again, text);
}

#[test]
fn fig4_entropy_production_changes_sign_once() {
    let cfg = config::load(Sources { preset: Some("fig4"), ..Sources::default() }).unwrap();
    let run = commands::simulate(&cfg, false).unwrap();
    let sigma: Vec<f64> = run.table.column("sigma_total").unwrap().into_iter().map(Option::unwrap).collect();
    assert!(sigma[0].abs() < 1e-6, "{}", sigma[0]);
    assert!(sigma[1] < 0.0);
    let t_prime = run.summary.sigma_crossings_us.as_slice();
    assert_eq!(t_prime.len(), 1);
    assert!((0.4..1.2).contains(&t_prime[0]), "{t_prime:?}");
    let times = run.table.column("t_s").unwrap();
    for (t, s) in times.iter().zip(&sigma).skip(1) {
        assert_eq!(*s > 0.0, t.unwrap() * 1e6 > t_prime[0], "t = {t:?}, sigma = {s}");
    }
}

#[test]
fn fig6_reservoir_and_channel_one_drain() {
    let cfg = config::load(Sources { preset: Some("fig6"), ..Sources::default() }).unwrap();
    let run = commands::simulate(&cfg, false).unwrap();
    let (first, last) = (run.trajectory.first(), run.trajectory.last());
    assert!(last.n_a < 0.05 * first.n_a);
    assert!(last.n_1 < 0.05 * first.n_1);
    assert!(last.n_b > first.n_b);
    assert!(run.summary.excitation_drift.unwrap() < 1e-8);
    assert!(run.table.column("n_C").unwrap().iter().all(Option::is_none));
}

#[test]
fn zero_rates_give_constant_columns() {
    let cfg = config::from_table("model = \"closed\"\nM = 20\nt_end_s = 1e-6\n[grid]\npoints = 11".parse().unwrap()).unwrap();
    let run = commands::simulate(&cfg, false).unwrap();
    for (i, name) in run.table.columns.iter().enumerate() {
        if name == "t_s" {
            continue;
        }
        let first = run.table.rows[0][i];
        assert!(run.table.rows.iter().all(|r| r[i] == first), "{name}");
    }
}

#[test]
fn stochastic_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |file: &'static str| {
        vec!["stochastic", "--preset", "blackbody-equilibration", "--set", "stochastic.n_traj=200", "-o", file]
    };
    assert_eq!(code(&goldenrate(&args("a.csv"), dir.path())), 0);
    assert_eq!(code(&goldenrate(&args("b.csv"), dir.path())), 0);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parallel_ensemble_matches_serial_bit_for_bit() {
    let cfg = config::load(Sources { preset: Some("blackbody-equilibration"), ..Sources::default() }).unwrap();
    let p = cfg.params();
    let s0 = JumpMicrostate::from_state(&cfg.initial_state().unwrap(), &p, ModelKind::BlackBody);
    let times: Vec<f64> = (1..=5).map(|k| k as f64 * 2e-7).collect();
    let serial = ensemble_mean(ModelKind::BlackBody, &p, s0, &times, 300, 7).unwrap();
    let parallel = parallel_ensemble(ModelKind::BlackBody, &p, s0, &times, 300, 7).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn single_trajectory_has_no_z_score() {
    let overrides = ["stochastic.n_traj=1".to_string()];
    let cfg = config::load(Sources { preset: Some("blackbody-equilibration"), overrides: &overrides, ..Sources::default() })
        .unwrap();
    let run = commands::stochastic(&cfg).unwrap();
    assert_eq!(run.summary.max_abs_z, None);
    assert!(!run.disagrees());
    assert!(run.table.column("m_se").unwrap().iter().all(Option::is_none));
}

#[test]
fn balance_verdicts_by_model() {
    let dir = tempfile::tempdir().unwrap();
    let verdict = |args: &[&str]| {
        let out = goldenrate(args, dir.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["report"]["verdict"].as_str().unwrap().to_string()
    };
    assert_eq!(verdict(&["balance", "--model", "embedded", "--json"]), "DetailedBalanced");
    assert_eq!(verdict(&["balance", "--model", "closed-chiral", "--state", "thermal", "--json"]), "Broken");
    assert_eq!(verdict(&["balance", "--model", "open-chiral", "--json"]), "NotApplicable");
    assert_eq!(verdict(&["balance", "--model", "blackbody", "--json"]), "DetailedBalanced");
}
