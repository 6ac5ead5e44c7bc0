//! TOML run configuration.
//!
//! A config is assembled from three layers: an optional file, an optional
//! named preset merged over it, and `--set key=value` overrides applied last.

use std::path::{Path, PathBuf};

use goldenrate_core::integrator::{IntegratorConfig, SampleGrid};
use goldenrate_core::params::{validate_params, ModelKind, ModelParams, ValidatedParams};
use goldenrate_core::state::{thermal_state_split, State};
use serde::{Deserialize, Deserializer, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, ConfigError};
use crate::presets;

/// Parses `"10 kHz"`, `"1e7"`, `"2.5MHz"` and friends into Hz.
pub fn parse_rate(text: &str) -> Result<f64, ConfigError> {
    let t = text.trim();
    let (number, scale) = [("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)]
        .iter()
        .find_map(|(suffix, scale)| t.strip_suffix(suffix).map(|n| (n, *scale)))
        .unwrap_or((t, 1.0));
    let value: f64 = number.trim().parse().map_err(|_| ConfigError::BadRate(text.to_string()))?;
    if !value.is_finite() {
        return Err(ConfigError::BadRate(text.to_string()));
    }
    Ok(value * scale)
}

/// A rate given either as a bare number or as a string with an SI suffix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Rate(pub f64);

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Float(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Float(v) => Ok(Rate(v)),
            Raw::Int(v) => Ok(Rate(v as f64)),
            Raw::Text(s) => parse_rate(&s).map(Rate).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rates {
    pub gamma_prime: Rate,
    pub gamma_dec: Rate,
    pub gamma_dec_prime: Rate,
    pub gamma_0: Rate,
    pub gamma_3: Rate,
    pub gamma_t1: Rate,
    pub gamma_t2: Rate,
    pub gamma_t11: Rate,
    pub gamma_t12: Rate,
    pub gamma_4: Rate,
    pub gamma_4_prime: Rate,
    pub gamma_5: Rate,
    pub gamma_6: Rate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub kind: GridKind,
    pub points: usize,
    /// First nonzero sample time of a log grid [s].
    pub first_s: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { kind: GridKind::Linear, points: 501, first_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step_s: Option<f64>,
    pub initial_step_s: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10, max_step_s: None, initial_step_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StochasticSection {
    pub n_traj: usize,
    pub seed: u64,
    /// Number of equally spaced comparison times after t = 0.
    pub checkpoints: usize,
    /// Ensemble horizon; defaults to the run's `t_end_s`.
    pub t_end_s: Option<f64>,
}

impl Default for StochasticSection {
    fn default() -> Self {
        Self { n_traj: 1000, seed: 42, checkpoints: 10, t_end_s: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Multipliers applied to the initial state after it is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scale {
    #[serde(rename = "n_A")]
    pub n_a: f64,
    #[serde(rename = "n_B")]
    pub n_b: f64,
    pub n_1: f64,
    pub n_2: f64,
    #[serde(rename = "n_C")]
    pub n_c: f64,
    pub m: f64,
}

impl Default for Scale {
    fn default() -> Self {
        Self { n_a: 1.0, n_b: 1.0, n_1: 1.0, n_2: 1.0, n_c: 1.0, m: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// Inverse temperature of all photon fields; defaults to `x0`.
    pub x_rad: Option<f64>,
    /// Inverse temperature of the TLS ensemble; defaults to `x0`.
    pub x_tls: Option<f64>,
    pub scale: Scale,
}

fn model_from_name<'de, D: Deserializer<'de>>(d: D) -> Result<ModelKind, D::Error> {
    let name = String::deserialize(d)?;
    ModelKind::from_name(&name).ok_or_else(|| serde::de::Error::custom(ConfigError::UnknownModel(name)))
}

fn model_to_name<S: serde::Serializer>(kind: &ModelKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

fn default_m() -> u32 {
    10
}
fn default_modes() -> f64 {
    100.0
}
fn default_x0() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    5e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(deserialize_with = "model_from_name", serialize_with = "model_to_name")]
    pub model: ModelKind,
    #[serde(default)]
    pub rates: Rates,
    #[serde(rename = "M", default = "default_m")]
    pub tls_count: u32,
    #[serde(rename = "N_modes", default = "default_modes")]
    pub n_modes: f64,
    #[serde(rename = "N_modes_wg", default = "default_modes")]
    pub n_modes_wg: f64,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_t_end")]
    pub t_end_s: f64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub stochastic: Option<StochasticSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub initial: InitialSection,
}

impl RunConfig {
    pub fn params(&self) -> ModelParams {
        let r = &self.rates;
        ModelParams {
            gamma_prime: r.gamma_prime.0,
            gamma_dec: r.gamma_dec.0,
            gamma_dec_prime: r.gamma_dec_prime.0,
            gamma_0: r.gamma_0.0,
            gamma_3: r.gamma_3.0,
            gamma_t1: r.gamma_t1.0,
            gamma_t2: r.gamma_t2.0,
            gamma_t11: r.gamma_t11.0,
            gamma_t12: r.gamma_t12.0,
            gamma_4: r.gamma_4.0,
            gamma_4_prime: r.gamma_4_prime.0,
            gamma_5: r.gamma_5.0,
            gamma_6: r.gamma_6.0,
            n_modes: self.n_modes,
            n_modes_wg: self.n_modes_wg,
            tls_count: self.tls_count,
            x0: self.x0,
        }
    }

    pub fn validated(&self) -> Result<ValidatedParams, ConfigError> {
        validate_params(&self.params(), self.model).map_err(ConfigError::Params)
    }

    pub fn sample_grid(&self) -> Result<SampleGrid, ConfigError> {
        let points = self.grid.points;
        Ok(match self.grid.kind {
            GridKind::Linear => SampleGrid::Uniform { points },
            GridKind::Log => {
                let first = self.grid.first_s.unwrap_or(self.t_end_s * 1e-6);
                SampleGrid::Log { points, first }
            }
        })
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig, ConfigError> {
        let mut cfg = IntegratorConfig::new(self.t_end_s, self.sample_grid()?)
            .with_tolerances(self.integrator.rel_tol, self.integrator.abs_tol);
        cfg.max_step = self.integrator.max_step_s;
        cfg.initial_step = self.integrator.initial_step_s;
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.grid.times(cfg.t_end).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    /// Thermal state at `x_rad`/`x_tls` with the configured scale factors applied.
    pub fn initial_state(&self) -> Result<State, ConfigError> {
        let p = self.params();
        let x_rad = self.initial.x_rad.unwrap_or(self.x0);
        let x_tls = self.initial.x_tls.unwrap_or(self.x0);
        let mut s =
            thermal_state_split(&p, self.model, x_rad, x_tls).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let k = &self.initial.scale;
        s.n_a *= k.n_a;
        s.n_b *= k.n_b;
        s.n_1 *= k.n_1;
        s.n_2 *= k.n_2;
        s.n_c *= k.n_c;
        s.m *= k.m;
        s.validate(self.model, &p).map_err(|e| ConfigError::Invalid(format!("initial state: {e}")))?;
        Ok(s)
    }

    pub fn stochastic(&self) -> Result<&StochasticSection, ConfigError> {
        let st = self.stochastic.as_ref().ok_or_else(|| ConfigError::Invalid("missing [stochastic] section".into()))?;
        if st.n_traj == 0 {
            return Err(ConfigError::Invalid("stochastic.n_traj must be at least 1".into()));
        }
        if st.checkpoints == 0 {
            return Err(ConfigError::Invalid("stochastic.checkpoints must be at least 1".into()));
        }
        if st.t_end_s.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(ConfigError::Invalid("stochastic.t_end_s must be positive".into()));
        }
        Ok(st)
    }
}

/// Recursively merges `over` into `base`; tables merge, everything else replaces.
pub fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Applies `a.b.c=value`. The value is read as TOML, falling back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::BadOverride(assignment.to_string());
    let (key, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|k| k.is_empty()) {
        return Err(bad());
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));

    let mut cursor = table;
    for k in &path[..path.len() - 1] {
        let entry = cursor.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(bad)?;
    }
    cursor.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

/// Where a run's configuration comes from.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sources<'a> {
    pub file: Option<&'a Path>,
    pub preset: Option<&'a str>,
    pub overrides: &'a [String],
}

pub fn load_table(src: Sources<'_>) -> Result<Table, CliError> {
    let mut table = match src.file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            text.parse::<Table>().map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?
        }
        None => Table::new(),
    };
    if let Some(name) = src.preset {
        merge(&mut table, presets::table(name)?);
    }
    for assignment in src.overrides {
        apply_override(&mut table, assignment)?;
    }
    Ok(table)
}

pub fn from_table(table: Table) -> Result<RunConfig, ConfigError> {
    RunConfig::deserialize(Value::Table(table)).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Builds and validates the effective configuration.
pub fn load(src: Sources<'_>) -> Result<RunConfig, CliError> {
    let cfg = from_table(load_table(src)?)?;
    cfg.validated()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_accept_suffixes() {
        assert_eq!(parse_rate("10 kHz").unwrap(), 1e4);
        assert_eq!(parse_rate("10MHz").unwrap(), 1e7);
        assert_eq!(parse_rate("1.5 GHz").unwrap(), 1.5e9);
        assert_eq!(parse_rate("250 Hz").unwrap(), 250.0);
        assert_eq!(parse_rate("3e4").unwrap(), 3e4);
        assert!(parse_rate("10 kHZ").is_err());
        assert!(parse_rate("fast").is_err());
        assert!(parse_rate("inf").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t: Table = "model = \"open\"\ngama_0 = 1.0".parse().unwrap();
        assert!(from_table(t).is_err());
        let t: Table = "model = \"open\"\n[rates]\ngamma_00 = 1.0".parse().unwrap();
        assert!(from_table(t).is_err());
        let t: Table = "model = \"sideways\"".parse().unwrap();
        assert!(from_table(t).unwrap_err().to_string().contains("sideways"));
    }

    #[test]
    fn overrides_land_in_nested_tables() {
        let mut t: Table = "model = \"open\"\n[rates]\ngamma_0 = \"1 kHz\"".parse().unwrap();
        apply_override(&mut t, "rates.gamma_0=20 kHz").unwrap();
        apply_override(&mut t, "M=7").unwrap();
        apply_override(&mut t, "grid.kind=log").unwrap();
        let cfg = from_table(t).unwrap();
        assert_eq!(cfg.rates.gamma_0.0, 2e4);
        assert_eq!(cfg.tls_count, 7);
        assert_eq!(cfg.grid.kind, GridKind::Log);
        assert!(apply_override(&mut Table::new(), "novalue").is_err());
        assert!(apply_override(&mut Table::new(), "a..b=1").is_err());
    }

    #[test]
    fn merge_is_deep() {
        let mut base: Table = "[rates]\ngamma_0 = 1.0\ngamma_3 = 2.0".parse().unwrap();
        merge(&mut base, "[rates]\ngamma_0 = 5.0".parse().unwrap());
        assert_eq!(base["rates"]["gamma_0"].as_float(), Some(5.0));
        assert_eq!(base["rates"]["gamma_3"].as_float(), Some(2.0));
    }
}
