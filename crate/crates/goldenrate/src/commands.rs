//! The work behind each subcommand, free of argument parsing and printing.

use goldenrate_core::balance::{check_balance, pair_channels, BalanceError, BalanceReport};
use goldenrate_core::integrator::{find_steady_state, integrate, sign_changes, IntegratorConfig, SampleGrid};
use goldenrate_core::models::{conserved_excitation, VectorField};
use goldenrate_core::params::{ModelKind, ModelParams};
use goldenrate_core::state::{thermal_state, State, Trajectory};
use goldenrate_core::stochastic::{aggregate, JumpMicrostate};
use goldenrate_core::thermo::entropy_production;
use serde::Serialize;

use crate::config::RunConfig;
use crate::ensemble::parallel_samples;
use crate::error::{CliError, ConfigError};
use crate::output::{simulation_table, Table};

/// |z| above this is reported as a disagreement.
pub const Z_LIMIT: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub model: &'static str,
    pub t_end_s: f64,
    pub t_end_us: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_state: State,
    /// Max-norm of the vector field at the final state [1/s].
    pub steady_residual: f64,
    /// `steady_residual` divided by the fastest rate times the state size.
    pub steady_residual_relative: f64,
    /// Largest relative change of the conserved excitation number over the samples.
    pub excitation_drift: Option<f64>,
    /// Zero crossings of the total entropy production [us].
    pub sigma_crossings_us: Vec<f64>,
    pub warnings: Vec<String>,
}

pub struct SimulationRun {
    pub trajectory: Trajectory,
    pub table: Table,
    pub summary: SimulationSummary,
}

fn sigma_floor(s: &State, p: &ModelParams) -> (f64, f64) {
    let e = entropy_production(s, p);
    (e.total, 1e-12 * e.scale)
}

pub fn simulate(cfg: &RunConfig, relative_t: bool) -> Result<SimulationRun, CliError> {
    let validated = cfg.validated()?;
    let (p, kind) = (validated.params, cfg.model);
    let field = VectorField::new(kind, p);
    let traj = integrate(&field, &cfg.initial_state()?, &cfg.integrator_config()?)?;

    let end = *traj.last();
    let steady_residual = field.residual(&end);
    let excitation_drift = conserved_excitation(traj.first(), &p, kind).ok().map(|e0| {
        traj.samples
            .iter()
            .map(|s| {
                let e = conserved_excitation(&s.state, &p, kind).unwrap_or(e0);
                (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    });
    let sigma_crossings_us = if kind == ModelKind::OpenChiral {
        sign_changes(&traj, |s| sigma_floor(s, &p)).iter().map(|c| c.t * 1e6).collect()
    } else {
        Vec::new()
    };
    let summary = SimulationSummary {
        model: kind.name(),
        t_end_s: cfg.t_end_s,
        t_end_us: cfg.t_end_s * 1e6,
        samples: traj.samples.len(),
        accepted_steps: traj.stats.accepted,
        rejected_steps: traj.stats.rejected,
        final_state: end,
        steady_residual,
        steady_residual_relative: steady_residual / (p.rate_scale() * end.max_norm(kind).max(1.0)).max(f64::MIN_POSITIVE),
        excitation_drift,
        sigma_crossings_us,
        warnings: validated.warnings.iter().map(|w| w.to_string()).collect(),
    };
    let table = simulation_table(&traj, relative_t);
    Ok(SimulationRun { trajectory: traj, table, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct StochasticSummary {
    pub model: &'static str,
    pub n_traj: usize,
    pub seed: u64,
    pub initial: JumpMicrostate,
    /// `None` when a single trajectory leaves the standard error undefined.
    pub max_abs_z: Option<f64>,
    /// Whether every sampled microstate kept the initial integer excitation; `None` for open models.
    pub excitation_conserved: Option<bool>,
}

pub struct StochasticRun {
    pub table: Table,
    pub summary: StochasticSummary,
}

impl StochasticRun {
    pub fn disagrees(&self) -> bool {
        self.summary.max_abs_z.is_some_and(|z| !(z <= Z_LIMIT))
    }
}

fn z_score(mean: f64, ode: f64, se: f64) -> f64 {
    let diff = mean - ode;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * ode.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Jump-process ensemble against the rate equations started from the same integer state.
pub fn stochastic(cfg: &RunConfig) -> Result<StochasticRun, CliError> {
    let p = cfg.validated()?.params;
    let kind = cfg.model;
    let st = cfg.stochastic()?;
    let t_end = st.t_end_s.unwrap_or(cfg.t_end_s);
    let times: Vec<f64> = (1..=st.checkpoints).map(|k| t_end * k as f64 / st.checkpoints as f64).collect();

    let s0 = JumpMicrostate::from_state(&cfg.initial_state()?, &p, kind);
    s0.validate(&p).map_err(|e| ConfigError::Invalid(format!("initial microstate: {e}")))?;
    let samples =
        parallel_samples(kind, &p, s0, &times, st.n_traj, st.seed).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let stats = aggregate(kind, &p, &times, &samples).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let excitation_conserved =
        kind.is_conservative().then(|| samples.iter().flatten().all(|s| s.excitation() == s0.excitation()));

    let mut icfg = IntegratorConfig::new(t_end, SampleGrid::Explicit(times.clone()))
        .with_tolerances(cfg.integrator.rel_tol, cfg.integrator.abs_tol);
    icfg.max_step = cfg.integrator.max_step_s;
    let ode = integrate(&VectorField::new(kind, p), &s0.to_state(&p, kind), &icfg)?;

    let mut columns = vec!["t_s".to_string()];
    for f in kind.fields() {
        for suffix in ["ode", "mean", "se", "z"] {
            columns.push(format!("{}_{suffix}", f.label()));
        }
    }
    let mut max_abs_z: Option<f64> = None;
    let rows = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let expected = ode.samples[k + 1].state;
            let mut row = vec![Some(t)];
            for &f in kind.fields() {
                let (o, m) = (expected.get(f), stats.mean[k].get(f));
                let se = stats.std_err.as_ref().map(|se| se[k].get(f));
                let z = se.map(|se| z_score(m, o, se));
                if let Some(z) = z {
                    max_abs_z = Some(max_abs_z.map_or(z.abs(), |a: f64| a.max(z.abs())));
                }
                row.extend([Some(o), Some(m), se, z]);
            }
            row
        })
        .collect();

    Ok(StochasticRun {
        table: Table { columns, rows },
        summary: StochasticSummary {
            model: kind.name(),
            n_traj: st.n_traj,
            seed: st.seed,
            initial: s0,
            max_abs_z,
            excitation_conserved,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StateChoice {
    /// Global thermal state at x0.
    Thermal,
    /// Steady state reached from the configured initial state.
    Steady,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceRun {
    pub model: &'static str,
    pub state_kind: &'static str,
    pub state: State,
    pub report: BalanceReport,
    /// Set when every pair balances but the state is not stationary, so no verdict is given.
    pub not_steady: Option<NotSteady>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NotSteady {
    pub residual: f64,
    pub threshold: f64,
}

pub fn balance(cfg: &RunConfig, choice: StateChoice) -> Result<BalanceRun, CliError> {
    let p = cfg.validated()?.params;
    let kind = cfg.model;
    let state = match choice {
        StateChoice::Thermal => thermal_state(&p, kind, cfg.x0).map_err(|e| ConfigError::Invalid(e.to_string()))?,
        StateChoice::Steady => find_steady_state(&VectorField::new(kind, p), &cfg.initial_state()?)?,
    };
    let pairing = pair_channels(goldenrate_core::stochastic::build_channels(kind, &p))
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let (report, not_steady) = match check_balance(&state, &pairing, &p, kind) {
        Ok(r) => (r, None),
        Err(BalanceError::NotSteady { residual, threshold, report }) => (*report, Some(NotSteady { residual, threshold })),
        Err(e) => return Err(ConfigError::Invalid(e.to_string()).into()),
    };
    let state_kind = match choice {
        StateChoice::Thermal => "thermal",
        StateChoice::Steady => "steady",
    };
    Ok(BalanceRun { model: kind.name(), state_kind, state, report, not_steady })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(rename = "M")]
    pub m: u32,
    /// σ_total(0) divided by its natural scale.
    pub sigma0_scaled: f64,
    pub sign_changes: usize,
    /// End of the initial negative-σ interval [s], if there is one.
    pub t_prime_s: Option<f64>,
}

pub fn parse_m_list(text: &str) -> Result<Vec<u32>, ConfigError> {
    let list: Vec<u32> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().ok().filter(|&m| m > 0).ok_or_else(|| ConfigError::Invalid(format!("bad M `{s}`"))))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(ConfigError::Invalid("M list is empty".into()));
    }
    Ok(list)
}

/// Locates the end of the initial negative entropy-production interval for each M.
pub fn scan_m(cfg: &RunConfig, m_list: &[u32]) -> Result<Vec<ScanRow>, CliError> {
    if cfg.model != ModelKind::OpenChiral {
        return Err(ConfigError::Invalid(format!("scan-m needs the open-chiral model, not {}", cfg.model.name())).into());
    }
    if m_list.is_empty() {
        return Err(ConfigError::Invalid("M list is empty".into()).into());
    }
    let icfg = cfg.integrator_config()?;
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut run = cfg.clone();
        run.tls_count = m;
        let p = run.validated()?.params;
        let traj = integrate(&VectorField::new(run.model, p), &run.initial_state()?, &icfg)?;
        let crossings = sign_changes(&traj, |s| sigma_floor(s, &p));
        let e0 = entropy_production(traj.first(), &p);
        let sigma0_scaled = if e0.scale > 0.0 { e0.total / e0.scale } else { 0.0 };
        // σ starts negative when the first sample clear of the noise floor is below it
        let starts_negative = traj
            .samples
            .iter()
            .map(|s| sigma_floor(&s.state, &p))
            .find(|(v, floor)| v.abs() > *floor)
            .is_some_and(|(v, _)| v < 0.0);
        let t_prime_s = if starts_negative { crossings.iter().find(|c| c.rising).map(|c| c.t) } else { None };
        rows.push(ScanRow { m, sigma0_scaled, sign_changes: crossings.len(), t_prime_s });
    }
    Ok(rows)
}
