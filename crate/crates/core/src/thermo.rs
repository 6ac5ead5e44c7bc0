//! Temperatures, entropies, heat flows and entropy production.
//!
//! Temperatures are dimensionless inverse temperatures `x = ħΩ/k_BT`,
//! entropies are in units of `k_B` and heat flows in `ħΩ/s`.

use alloc::vec::Vec;

use crate::params::{Field, ModelKind, ModelParams};
use crate::state::{State, Trajectory};

/// Occupancies are floored at this value inside logarithms.
pub const LOG_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThermoError {
    #[error("occupancy {0} is not positive")]
    NonPositiveOccupancy(f64),
    /// `x` is the limiting value, ±∞.
    #[error("m = {m} outside (0, {big_m}); inverse temperature is {x}")]
    OutOfRangeM { m: f64, big_m: f64, x: f64 },
    #[error("{0:?} has no external bath")]
    NoBath(ModelKind),
    #[error("{0:?} is not supported here")]
    UnsupportedModel(ModelKind),
    #[error("state at t = {t:e} s lies on the boundary of the state space")]
    BoundaryState { t: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// `x = ln((n+1)/n)`.
pub fn inverse_temperature_photon(n: f64) -> Result<f64, ThermoError> {
    if !(n > 0.0) {
        return Err(ThermoError::NonPositiveOccupancy(n));
    }
    Ok(libm::log1p(1.0 / n))
}

/// `x = ln((M−m)/m)`; negative for population inversion.
pub fn inverse_temperature_tls(m: f64, big_m: f64) -> Result<f64, ThermoError> {
    if !(m > 0.0) {
        return Err(ThermoError::OutOfRangeM { m, big_m, x: f64::INFINITY });
    }
    if !(m < big_m) {
        return Err(ThermoError::OutOfRangeM { m, big_m, x: f64::NEG_INFINITY });
    }
    Ok(libm::log((big_m - m) / m))
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log(x)
    }
}

/// Gibbs entropy of `M` independent two-level systems with `m` excited.
pub fn entropy_tls(m: f64, big_m: f64) -> f64 {
    if !(big_m > 0.0) {
        return 0.0;
    }
    let p = (m / big_m).clamp(0.0, 1.0);
    -big_m * (xlnx(p) + xlnx(1.0 - p))
}

/// Entropy of one Bose mode with mean occupancy `n`.
pub fn entropy_photon_mode(n: f64) -> f64 {
    if !(n > 0.0) {
        return 0.0;
    }
    n * libm::log1p(1.0 / n) + libm::log1p(n)
}

/// Entropy of the compound system, each mode weighted by its mode count.
pub fn entropy_total(s: &State, p: &ModelParams, kind: ModelKind) -> f64 {
    let mut total = entropy_tls(s.m, p.m_total());
    for &f in kind.fields() {
        if f.is_photon() {
            total += p.mode_count(f) * entropy_photon_mode(s.get(f));
        }
    }
    total
}

/// Outflows to the zero-temperature bath [ħΩ/s].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeatFlow {
    pub a: f64,
    pub b: f64,
    pub tls: f64,
}

impl HeatFlow {
    pub fn total(&self) -> f64 {
        self.a + self.b + self.tls
    }
}

pub fn heat_flow_external(s: &State, p: &ModelParams, kind: ModelKind) -> Result<HeatFlow, ThermoError> {
    if kind != ModelKind::OpenChiral {
        return Err(ThermoError::NoBath(kind));
    }
    let per_photon = 2.0 * p.n_modes * p.gamma_dec;
    Ok(HeatFlow { a: per_photon * s.n_a, b: per_photon * s.n_b, tls: (p.gamma_t11 + p.gamma_t12) * s.m })
}

/// Entropy production of the open chiral model [k_B/s].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyProduction {
    pub ab: f64,
    pub a_tls: f64,
    pub b_tls: f64,
    pub total: f64,
    /// Sum of the flux magnitudes; rounding in `total` is a small multiple
    /// of `scale · ε`.
    pub scale: f64,
}

fn log_ratio(num: f64, den: f64) -> f64 {
    libm::log(num / den)
}

pub fn entropy_production(s: &State, p: &ModelParams) -> EntropyProduction {
    let big_m = p.m_total();
    let (na, nb, m) = (s.n_a, s.n_b, s.m);
    let ground = big_m - m;
    let fl = |v: f64| v.max(LOG_FLOOR);

    let flux_ab = p.n_modes * p.gamma_0 * (nb - na);
    let ab = if flux_ab == 0.0 { 0.0 } else { flux_ab * log_ratio(fl(nb) * (fl(na) + 1.0), fl(na) * (fl(nb) + 1.0)) };

    let flux_a = p.gamma_t2 * m * (na + 1.0) - p.gamma_t1 * na * ground;
    let a_tls = if flux_a == 0.0 { 0.0 } else { flux_a * log_ratio(fl(m) * (fl(na) + 1.0), fl(ground) * fl(na)) };

    let flux_b = p.gamma_t1 * m * (nb + 1.0) - p.gamma_t2 * nb * ground;
    let b_tls = if flux_b == 0.0 { 0.0 } else { flux_b * log_ratio(fl(m) * (fl(nb) + 1.0), fl(ground) * fl(nb)) };

    let scale = flux_ab.abs()
        + p.gamma_t2 * m * (na + 1.0)
        + p.gamma_t1 * na * ground
        + p.gamma_t1 * m * (nb + 1.0)
        + p.gamma_t2 * nb * ground;
    EntropyProduction { ab, a_tls, b_tls, total: ab + a_tls + b_tls, scale }
}

/// Result of comparing `dS/dt` with heat flows plus entropy production.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceResidual {
    /// Largest `|dS/dt − J − σ|` over the samples [k_B/s].
    pub max_residual: f64,
    /// Largest `|dS/dt|` over the samples [k_B/s].
    pub max_ds_dt: f64,
    /// Time of the largest residual.
    pub t_worst: f64,
}

impl BalanceResidual {
    pub fn relative(&self) -> f64 {
        if self.max_ds_dt == 0.0 {
            self.max_residual
        } else {
            self.max_residual / self.max_ds_dt
        }
    }
}

/// Finite-difference weights for the first derivative at `z` (Fornberg).
pub fn fd_weights(z: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // c[j][k]: weight of node j for derivative order k
    let mut c = alloc::vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Checks `dS/dt = −Σ_q Q_q x_q + σ` along an open chiral trajectory.
///
/// `dS/dt` comes from five-point finite differences of the sampled entropy,
/// centred in the interior and one-sided at the ends.
pub fn entropy_balance_residual(traj: &Trajectory) -> Result<BalanceResidual, ThermoError> {
    let kind = traj.kind;
    if kind != ModelKind::OpenChiral {
        return Err(ThermoError::UnsupportedModel(kind));
    }
    let n = traj.samples.len();
    if n < 5 {
        return Err(ThermoError::TooFewSamples { needed: 5, got: n });
    }
    let p = &traj.params;
    let big_m = p.m_total();
    for sample in &traj.samples {
        let s = &sample.state;
        if !(s.n_a > 0.0 && s.n_b > 0.0 && s.m > 0.0 && s.m < big_m) {
            return Err(ThermoError::BoundaryState { t: sample.t });
        }
    }
    let times: Vec<f64> = traj.times().collect();
    let entropy: Vec<f64> = traj.samples.iter().map(|x| entropy_total(&x.state, p, kind)).collect();

    let mut out = BalanceResidual { max_residual: 0.0, max_ds_dt: 0.0, t_worst: times[0] };
    for i in 0..n {
        let start = i.saturating_sub(2).min(n - 5);
        let w = fd_weights(times[i], &times[start..start + 5]);
        let ds_dt: f64 = (0..5).map(|j| w[j] * (entropy[start + j] - entropy[i])).sum();

        let s = &traj.samples[i].state;
        let q = heat_flow_external(s, p, kind)?;
        let x_a = inverse_temperature_photon(s.n_a)?;
        let x_b = inverse_temperature_photon(s.n_b)?;
        let x_tls = inverse_temperature_tls(s.m, big_m)?;
        let flow = -(q.a * x_a + q.b * x_b + q.tls * x_tls);
        let sigma = entropy_production(s, p).total;

        let r = (ds_dt - flow - sigma).abs();
        if r > out.max_residual {
            out.max_residual = r;
            out.t_worst = times[i];
        }
        out.max_ds_dt = out.max_ds_dt.max(ds_dt.abs());
    }
    Ok(out)
}

/// Thermodynamic summary of one state. Quantities that do not exist for the
/// model are `None`; temperatures at the boundary are reported as ±∞.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThermoReport {
    pub t: f64,
    pub x_a: Option<f64>,
    pub x_b: Option<f64>,
    pub x_1: Option<f64>,
    pub x_2: Option<f64>,
    pub x_c: Option<f64>,
    pub x_tls: f64,
    pub s_tls: f64,
    pub s_a: Option<f64>,
    pub s_b: Option<f64>,
    pub s_wg: Option<f64>,
    pub s_c: Option<f64>,
    pub s_total: f64,
    pub q_ext_total: Option<f64>,
    pub j_entropy: Option<f64>,
    pub sigma_ab: Option<f64>,
    pub sigma_atls: Option<f64>,
    pub sigma_btls: Option<f64>,
    pub sigma_total: Option<f64>,
}

fn photon_x(n: f64) -> f64 {
    inverse_temperature_photon(n).unwrap_or(f64::INFINITY)
}

fn tls_x(m: f64, big_m: f64) -> f64 {
    match inverse_temperature_tls(m, big_m) {
        Ok(x) => x,
        Err(ThermoError::OutOfRangeM { x, .. }) => x,
        Err(_) => f64::NAN,
    }
}

pub fn thermo_report(t: f64, s: &State, p: &ModelParams, kind: ModelKind) -> ThermoReport {
    let big_m = p.m_total();
    let active = |f: Field| kind.is_active(f);
    let x_of = |f: Field| active(f).then(|| photon_x(s.get(f)));
    let s_of = |f: Field| active(f).then(|| p.mode_count(f) * entropy_photon_mode(s.get(f)));
    let x_tls = tls_x(s.m, big_m);

    let mut r = ThermoReport {
        t,
        x_a: x_of(Field::NA),
        x_b: x_of(Field::NB),
        x_1: x_of(Field::N1),
        x_2: x_of(Field::N2),
        x_c: x_of(Field::NC),
        x_tls,
        s_tls: entropy_tls(s.m, big_m),
        s_a: s_of(Field::NA),
        s_b: s_of(Field::NB),
        s_wg: (active(Field::N1)).then(|| s_of(Field::N1).unwrap_or(0.0) + s_of(Field::N2).unwrap_or(0.0)),
        s_c: s_of(Field::NC),
        s_total: entropy_total(s, p, kind),
        ..ThermoReport::default()
    };
    if let Ok(q) = heat_flow_external(s, p, kind) {
        let xa = photon_x(s.n_a);
        let xb = photon_x(s.n_b);
        // 0·∞ is 0 here: no flow, no entropy carried
        let carried = |q: f64, x: f64| if q == 0.0 { 0.0 } else { q * x };
        r.q_ext_total = Some(q.total());
        r.j_entropy = Some(-(carried(q.a, xa) + carried(q.b, xb) + carried(q.tls, x_tls)));
        let sigma = entropy_production(s, p);
        r.sigma_ab = Some(sigma.ab);
        r.sigma_atls = Some(sigma.a_tls);
        r.sigma_btls = Some(sigma.b_tls);
        r.sigma_total = Some(sigma.total);
    }
    r
}
