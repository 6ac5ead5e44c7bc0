use goldenrate::config::{self, GridKind, Sources};
use goldenrate::presets::PRESETS;
use goldenrate_core::params::{ModelKind, ModelParams};

fn preset(name: &str) -> goldenrate::config::RunConfig {
    config::load(Sources { preset: Some(name), ..Sources::default() }).unwrap()
}

#[test]
fn open_presets_use_reference_rates() {
    let expected = ModelParams {
        gamma_dec: 1e4,
        gamma_0: 1e4,
        gamma_t1: 1e7,
        gamma_t11: 1e7,
        n_modes: 100.0,
        tls_count: 100,
        x0: 1.0,
        ..ModelParams::default()
    };
    for name in ["fig2", "fig3", "fig4"] {
        let cfg = preset(name);
        assert_eq!(cfg.model, ModelKind::OpenChiral, "{name}");
        let v = cfg.validated().unwrap();
        assert_eq!(v.params, expected, "{name}");
        assert_eq!(v.derived.gamma_1, 1e5);
        assert_eq!(v.derived.gamma_11, 1e5);
        assert_eq!(v.derived.gamma_2, 0.0);
        assert_eq!(v.derived.gamma_12, 0.0);
    }
    assert_eq!(preset("fig2").t_end_s, 5e-6);
    assert_eq!(preset("fig4").t_end_s, 5e-6);
    assert_eq!(preset("fig3").t_end_s, 1e-3);
    assert_eq!(preset("fig3").grid.kind, GridKind::Log);
}

#[test]
fn closed_presets_use_reference_rates() {
    let expected = ModelParams {
        gamma_dec: 1e4,
        gamma_dec_prime: 1e4,
        gamma_0: 1e4,
        gamma_3: 1e4,
        gamma_t1: 1e7,
        gamma_t11: 1e7,
        n_modes: 100.0,
        n_modes_wg: 100.0,
        tls_count: 100,
        x0: 1.0,
        ..ModelParams::default()
    };
    for name in ["fig5", "fig6", "fig7"] {
        let cfg = preset(name);
        assert_eq!(cfg.model, ModelKind::ClosedChiral, "{name}");
        let v = cfg.validated().unwrap();
        assert_eq!(v.params, expected, "{name}");
        assert_eq!(v.derived.gamma_1, 1e5);
        assert_eq!(v.derived.gamma_11, 1e5);
        assert!(v.warnings.is_empty(), "{:?}", v.warnings);
    }
    assert_eq!(preset("fig6").t_end_s, 1e-5);
    assert_eq!(preset("fig7").t_end_s, 1e-3);
}

#[test]
fn every_preset_builds_a_runnable_config() {
    for p in PRESETS {
        let cfg = preset(p.name);
        cfg.integrator_config().unwrap();
        cfg.initial_state().unwrap();
    }
}

#[test]
fn preset_overrides_file_and_set_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "model = \"blackbody\"\nM = 7\nt_end_s = 1.0\n[rates]\ngamma_3 = \"5 kHz\"\n").unwrap();
    let overrides = ["t_end_s=2e-6".to_string()];
    let cfg = config::load(Sources { file: Some(&path), preset: Some("fig4"), overrides: &overrides }).unwrap();
    assert_eq!(cfg.model, ModelKind::OpenChiral);
    assert_eq!(cfg.tls_count, 100);
    assert_eq!(cfg.t_end_s, 2e-6);
    // keys the preset leaves alone come from the file
    assert_eq!(cfg.rates.gamma_3.0, 5e3);
}
