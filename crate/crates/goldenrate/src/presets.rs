//! Built-in scenarios, stored as TOML so they merge like any other config layer.

use toml::Table;

use crate::error::ConfigError;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

const OPEN_RATES: &str = r#"
model = "open-chiral"
M = 100
N_modes = 100
x0 = 1.0

[rates]
gamma_dec = "10 kHz"
gamma_0 = "10 kHz"
gamma_t1 = "10 MHz"
gamma_t11 = "10 MHz"
gamma_t2 = 0.0
gamma_t12 = 0.0
"#;

const CLOSED_RATES: &str = r#"
model = "closed-chiral"
M = 100
N_modes = 100
N_modes_wg = 100
x0 = 1.0

[rates]
gamma_dec = "10 kHz"
gamma_dec_prime = "10 kHz"
gamma_0 = "10 kHz"
gamma_3 = "10 kHz"
gamma_t1 = "10 MHz"
gamma_t11 = "10 MHz"
gamma_t2 = 0.0
gamma_t12 = 0.0
"#;

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        summary: "open chiral waveguide: occupations and temperatures over 5 us",
        toml: r#"
t_end_s = 5e-6

[grid]
kind = "linear"
points = 5001

[integrator]
rel_tol = 1e-12
abs_tol = 1e-14
"#,
    },
    Preset {
        name: "fig3",
        summary: "open chiral waveguide: slow decay to 1 ms on a log grid",
        toml: r#"
t_end_s = 1e-3

[grid]
kind = "log"
points = 400
first_s = 1e-9

[integrator]
rel_tol = 1e-10
abs_tol = 1e-30
"#,
    },
    Preset {
        name: "fig4",
        summary: "open chiral waveguide: entropy production over 5 us",
        toml: r#"
t_end_s = 5e-6

[grid]
kind = "linear"
points = 5001

[integrator]
rel_tol = 1e-12
abs_tol = 1e-14
"#,
    },
    Preset {
        name: "fig5",
        summary: "closed chiral loop: total entropy over 10 us",
        toml: r#"
t_end_s = 1e-5

[grid]
kind = "linear"
points = 1001

[integrator]
rel_tol = 1e-10
abs_tol = 1e-14
"#,
    },
    Preset {
        name: "fig6",
        summary: "closed chiral loop: occupations over 10 us",
        toml: r#"
t_end_s = 1e-5

[grid]
kind = "linear"
points = 1001

[integrator]
rel_tol = 1e-10
abs_tol = 1e-14
"#,
    },
    Preset {
        name: "fig7",
        summary: "closed chiral loop: approach to the steady state over 1 ms",
        toml: r#"
t_end_s = 1e-3

[grid]
kind = "log"
points = 400
first_s = 1e-9

[integrator]
rel_tol = 1e-10
abs_tol = 1e-14
"#,
    },
    Preset {
        name: "blackbody-equilibration",
        summary: "black-body baseline: hot TLS ensemble relaxing against a cold field",
        toml: r#"
model = "blackbody"
M = 100
N_modes = 100
x0 = 1.0
t_end_s = 2e-5

[rates]
gamma_prime = "1 MHz"

[initial]
x_rad = 0.5
x_tls = 2.0

[grid]
kind = "linear"
points = 2001

[integrator]
rel_tol = 1e-12
abs_tol = 1e-14

[stochastic]
n_traj = 1000
seed = 42
checkpoints = 10
t_end_s = 2e-6
"#,
    },
    Preset {
        name: "embedded-equilibrium",
        summary: "embedded cavity: relaxation from a perturbed state to the common temperature",
        toml: r#"
model = "embedded"
M = 100
N_modes = 100
N_modes_wg = 100
x0 = 1.0
t_end_s = 1e-2

[rates]
gamma_4 = "10 kHz"
gamma_4_prime = "10 kHz"
gamma_5 = "100 kHz"
gamma_6 = "1 kHz"

[initial.scale]
n_A = 1.5
n_C = 0.8

[grid]
kind = "log"
points = 400
first_s = 1e-9

[integrator]
rel_tol = 1e-12
abs_tol = 1e-14
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Full TOML table of a preset, including the shared rate block of the fig scenarios.
pub fn table(name: &str) -> Result<Table, ConfigError> {
    let preset = find(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    let base = match name {
        "fig2" | "fig3" | "fig4" => OPEN_RATES,
        "fig5" | "fig6" | "fig7" => CLOSED_RATES,
        _ => "",
    };
    let mut t: Table = base.parse().map_err(|e| ConfigError::Parse(format!("preset {name}: {e}")))?;
    let own: Table = preset.toml.parse().map_err(|e| ConfigError::Parse(format!("preset {name}: {e}")))?;
    crate::config::merge(&mut t, own);
    Ok(t)
}

/// Preset used by `balance --model <kind>` when nothing else is given.
pub fn default_for(kind: goldenrate_core::params::ModelKind) -> &'static str {
    use goldenrate_core::params::ModelKind;
    match kind {
        ModelKind::BlackBody => "blackbody-equilibration",
        ModelKind::OpenChiral => "fig2",
        ModelKind::ClosedChiral => "fig6",
        ModelKind::EmbeddedCavity => "embedded-equilibrium",
    }
}
