//! Exact-jump simulation of the microstate process behind the rate equations.
//!
//! Each photon subsystem is an integer photon total over its modes; the
//! per-mode occupancy entering propensities is `total / mode_count`. Every
//! term of the rate equations maps to one event channel, so the mean drift of
//! the jump process equals the vector field.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::params::{Field, ModelKind, ModelParams};
use crate::state::State;

/// Integer microstate: photon totals per subsystem and excited TLS count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpMicrostate {
    pub m: i64,
    /// Indexed by [`Field::index`]; inactive subsystems stay zero.
    pub photon_totals: [i64; 5],
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StochasticError {
    #[error("{field} total {value} is negative")]
    NegativeCount { field: &'static str, value: i64 },
    #[error("m = {m} outside [0, {max}]")]
    ExcitationOutOfRange { m: i64, max: i64 },
    #[error("ensemble needs at least one trajectory")]
    EmptyEnsemble,
    #[error("sample times must be non-negative and non-decreasing")]
    InvalidGrid,
}

impl JumpMicrostate {
    /// Rounds `mode_count · n` for each active photon field and `m`.
    pub fn from_state(s: &State, p: &ModelParams, kind: ModelKind) -> Self {
        let mut micro = Self { m: libm::round(s.m) as i64, ..Self::default() };
        for &f in kind.fields() {
            if f.is_photon() {
                micro.photon_totals[f.index()] = libm::round(p.mode_count(f) * s.get(f)) as i64;
            }
        }
        micro
    }

    /// Per-mode occupancies and `m` as a real-valued state.
    pub fn to_state(&self, p: &ModelParams, kind: ModelKind) -> State {
        let mut s = State { m: self.m as f64, ..State::default() };
        for &f in kind.fields() {
            if f.is_photon() {
                s.set(f, self.photon_totals[f.index()] as f64 / p.mode_count(f));
            }
        }
        s
    }

    pub fn get(&self, f: Field) -> i64 {
        match f {
            Field::M => self.m,
            _ => self.photon_totals[f.index()],
        }
    }

    /// `m` plus all photon totals.
    pub fn excitation(&self) -> i64 {
        self.m + self.photon_totals.iter().sum::<i64>()
    }

    pub fn validate(&self, p: &ModelParams) -> Result<(), StochasticError> {
        for f in [Field::NA, Field::NB, Field::N1, Field::N2, Field::NC] {
            let value = self.photon_totals[f.index()];
            if value < 0 {
                return Err(StochasticError::NegativeCount { field: f.label(), value });
            }
        }
        let max = p.tls_count as i64;
        if self.m < 0 || self.m > max {
            return Err(StochasticError::ExcitationOutOfRange { m: self.m, max });
        }
        Ok(())
    }

    fn apply(&mut self, delta: &[i8; 6]) {
        for (i, d) in delta.iter().take(5).enumerate() {
            self.photon_totals[i] += *d as i64;
        }
        self.m += delta[5] as i64;
    }
}

/// One multiplicative factor of a propensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// Occupancy `n` of a photon field.
    Occ(Field),
    /// `n + 1`.
    OccPlusOne(Field),
    /// Excited count `m`.
    Excited,
    /// Ground count `M − m`.
    Ground,
    /// `n_A + n_B + 2`.
    PairSumPlusTwo,
}

impl Factor {
    fn eval(self, s: &State, big_m: f64) -> f64 {
        match self {
            Factor::Occ(f) => s.get(f),
            Factor::OccPlusOne(f) => s.get(f) + 1.0,
            Factor::Excited => s.m,
            Factor::Ground => big_m - s.m,
            Factor::PairSumPlusTwo => s.n_a + s.n_b + 2.0,
        }
    }
}

/// An elementary event: propensity `coefficient · Π factors`, effect `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventChannel {
    pub name: &'static str,
    pub coefficient: f64,
    pub factors: &'static [Factor],
    /// Change of the photon totals (by [`Field::index`]) and of `m` (last).
    pub delta: [i8; 6],
}

impl EventChannel {
    pub fn propensity(&self, s: &State, big_m: f64) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        self.factors.iter().fold(self.coefficient, |acc, f| acc * f.eval(s, big_m))
    }

    pub fn delta_of(&self, f: Field) -> i8 {
        self.delta[f.index()]
    }
}

const fn delta(pairs: &[(Field, i8)]) -> [i8; 6] {
    let mut d = [0i8; 6];
    let mut i = 0;
    while i < pairs.len() {
        d[pairs[i].0.index()] = pairs[i].1;
        i += 1;
    }
    d
}

use Factor::{Excited, Ground, Occ, OccPlusOne, PairSumPlusTwo};
use Field::{M, N1, N2, NA, NB, NC};

fn hop(name: &'static str, coefficient: f64, factors: &'static [Factor], from: Field, to: Field) -> EventChannel {
    EventChannel { name, coefficient, factors, delta: delta(&[(from, -1), (to, 1)]) }
}

fn absorb(name: &'static str, coefficient: f64, factors: &'static [Factor], from: Field) -> EventChannel {
    EventChannel { name, coefficient, factors, delta: delta(&[(from, -1), (M, 1)]) }
}

fn emit(name: &'static str, coefficient: f64, factors: &'static [Factor], to: Field) -> EventChannel {
    EventChannel { name, coefficient, factors, delta: delta(&[(to, 1), (M, -1)]) }
}

/// All event channels of a model, including those whose rate is zero.
pub fn build_channels(kind: ModelKind, p: &ModelParams) -> Vec<EventChannel> {
    let n = p.n_modes;
    let nw = p.n_modes_wg;
    match kind {
        ModelKind::BlackBody => vec![
            absorb("absorption", p.gamma_prime, &[Ground, Occ(NA)], NA),
            emit("emission", p.gamma_prime, &[Excited, OccPlusOne(NA)], NA),
        ],
        ModelKind::OpenChiral => vec![
            EventChannel { name: "loss-A", coefficient: 2.0 * n * p.gamma_dec, factors: &[Occ(NA)], delta: delta(&[(NA, -1)]) },
            EventChannel { name: "loss-B", coefficient: 2.0 * n * p.gamma_dec, factors: &[Occ(NB)], delta: delta(&[(NB, -1)]) },
            hop("transfer-A-B", n * p.gamma_0, &[Occ(NA), OccPlusOne(NB)], NA, NB),
            hop("transfer-B-A", n * p.gamma_0, &[Occ(NB), OccPlusOne(NA)], NB, NA),
            EventChannel { name: "tls-loss-1", coefficient: p.gamma_t11, factors: &[Excited], delta: delta(&[(M, -1)]) },
            EventChannel { name: "tls-loss-2", coefficient: p.gamma_t12, factors: &[Excited], delta: delta(&[(M, -1)]) },
            absorb("absorb-A", p.gamma_t1, &[Ground, Occ(NA)], NA),
            emit("emit-B", p.gamma_t1, &[Excited, OccPlusOne(NB)], NB),
            absorb("absorb-B", p.gamma_t2, &[Ground, Occ(NB)], NB),
            emit("emit-A", p.gamma_t2, &[Excited, OccPlusOne(NA)], NA),
        ],
        ModelKind::ClosedChiral => vec![
            hop("hop-A-1", n * p.gamma_dec, &[Occ(NA), OccPlusOne(N1)], NA, N1),
            hop("hop-1-A", n * p.gamma_dec, &[Occ(N1), OccPlusOne(NA)], N1, NA),
            hop("hop-A-2", n * p.gamma_dec, &[Occ(NA), OccPlusOne(N2)], NA, N2),
            hop("hop-2-A", n * p.gamma_dec, &[Occ(N2), OccPlusOne(NA)], N2, NA),
            hop("hop-B-1", n * p.gamma_dec, &[Occ(NB), OccPlusOne(N1)], NB, N1),
            hop("hop-1-B", n * p.gamma_dec, &[Occ(N1), OccPlusOne(NB)], N1, NB),
            hop("hop-B-2", n * p.gamma_dec, &[Occ(NB), OccPlusOne(N2)], NB, N2),
            hop("hop-2-B", n * p.gamma_dec, &[Occ(N2), OccPlusOne(NB)], N2, NB),
            hop("transfer-A-B", n * p.gamma_0, &[Occ(NA), OccPlusOne(NB), OccPlusOne(N1)], NA, NB),
            hop("transfer-B-A", n * p.gamma_0, &[Occ(NB), OccPlusOne(NA), OccPlusOne(N2)], NB, NA),
            hop("mix-1-2", nw * p.gamma_3, &[PairSumPlusTwo, Occ(N1), OccPlusOne(N2)], N1, N2),
            hop("mix-2-1", nw * p.gamma_3, &[PairSumPlusTwo, Occ(N2), OccPlusOne(N1)], N2, N1),
            absorb("absorb-A-via-1", p.gamma_t1, &[Ground, Occ(NA), OccPlusOne(N1)], NA),
            emit("emit-B-via-1", p.gamma_t1, &[Excited, OccPlusOne(NB), OccPlusOne(N1)], NB),
            absorb("absorb-B-via-2", p.gamma_t2, &[Ground, Occ(NB), OccPlusOne(N2)], NB),
            emit("emit-A-via-2", p.gamma_t2, &[Excited, OccPlusOne(NA), OccPlusOne(N2)], NA),
            absorb("absorb-1", p.gamma_t11, &[Ground, Occ(N1)], N1),
            emit("emit-1", p.gamma_t11, &[Excited, OccPlusOne(N1)], N1),
            absorb("absorb-2", p.gamma_t12, &[Ground, Occ(N2)], N2),
            emit("emit-2", p.gamma_t12, &[Excited, OccPlusOne(N2)], N2),
        ],
        ModelKind::EmbeddedCavity => vec![
            hop("hop-A-C", n * p.gamma_4, &[Occ(NA), OccPlusOne(NC)], NA, NC),
            hop("hop-C-A", n * p.gamma_4, &[Occ(NC), OccPlusOne(NA)], NC, NA),
            absorb("absorb-A", n * p.gamma_6, &[Ground, Occ(NA), OccPlusOne(NC), OccPlusOne(NC)], NA),
            emit("emit-A", n * p.gamma_6, &[Excited, OccPlusOne(NA), OccPlusOne(NC), OccPlusOne(NC)], NA),
            absorb("absorb-C", nw * p.gamma_5, &[Ground, Occ(NC)], NC),
            emit("emit-C", nw * p.gamma_5, &[Excited, OccPlusOne(NC)], NC),
        ],
    }
}

/// Channels with a non-zero rate constant.
pub fn active_channels(kind: ModelKind, p: &ModelParams) -> Vec<EventChannel> {
    build_channels(kind, p).into_iter().filter(|c| c.coefficient != 0.0).collect()
}

/// `Σ propensity · delta`, with photon components per mode.
pub fn mean_drift(channels: &[EventChannel], s: &State, p: &ModelParams, kind: ModelKind) -> State {
    let big_m = p.m_total();
    let mut totals = [0.0_f64; 6];
    for c in channels {
        let a = c.propensity(s, big_m);
        for (t, d) in totals.iter_mut().zip(c.delta) {
            *t += a * d as f64;
        }
    }
    let mut out = State { m: totals[5], ..State::default() };
    for &f in kind.fields() {
        if f.is_photon() {
            out.set(f, totals[f.index()] / p.mode_count(f));
        }
    }
    out
}

/// Per-trajectory generator: stream `index` of the base seed.
pub fn trajectory_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

/// Uniform in the open interval (0, 1).
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: usize,
}

/// Gillespie simulator over a fixed channel list.
pub struct JumpSimulator<'a> {
    channels: &'a [EventChannel],
    params: ModelParams,
    kind: ModelKind,
    state: JumpMicrostate,
    t: f64,
    rng: ChaCha8Rng,
    propensities: Vec<f64>,
    absorbed: bool,
    events: u64,
}

impl<'a> JumpSimulator<'a> {
    pub fn new(
        channels: &'a [EventChannel],
        params: ModelParams,
        kind: ModelKind,
        s0: JumpMicrostate,
        rng: ChaCha8Rng,
    ) -> Result<Self, StochasticError> {
        s0.validate(&params)?;
        Ok(Self { channels, params, kind, state: s0, t: 0.0, rng, propensities: vec![0.0; channels.len()], absorbed: false, events: 0 })
    }

    pub fn state(&self) -> &JumpMicrostate {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// True once every propensity has vanished.
    pub fn absorbed(&self) -> bool {
        self.absorbed
    }

    /// Fires the next event if it happens no later than `horizon`; otherwise
    /// moves the clock to `horizon` and returns `None`. Waiting times are
    /// memoryless, so discarding an overshooting draw is exact.
    pub fn next_event(&mut self, horizon: f64) -> Option<JumpEvent> {
        let occ = self.state.to_state(&self.params, self.kind);
        let big_m = self.params.m_total();
        let mut total = 0.0;
        for (slot, c) in self.propensities.iter_mut().zip(self.channels) {
            *slot = c.propensity(&occ, big_m);
            total += *slot;
        }
        if !(total > 0.0) {
            self.absorbed = true;
            self.t = self.t.max(horizon);
            return None;
        }
        let tau = -libm::log(unit_open(&mut self.rng)) / total;
        let pick = unit_open(&mut self.rng) * total;
        if self.t + tau > horizon {
            self.t = horizon;
            return None;
        }
        self.t += tau;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, a) in self.propensities.iter().enumerate() {
            if *a > 0.0 {
                acc += a;
                chosen = Some(i);
                if pick < acc {
                    break;
                }
            }
        }
        let channel = chosen.expect("positive total propensity");
        self.state.apply(&self.channels[channel].delta);
        self.events += 1;
        Some(JumpEvent { t: self.t, channel })
    }

    /// Runs until `t`, leaving the clock at `t`.
    pub fn advance_to(&mut self, t: f64) {
        while self.next_event(t).is_some() {}
    }
}

/// Event record of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub initial: JumpMicrostate,
    pub events: Vec<JumpEvent>,
    pub final_state: JumpMicrostate,
    /// The run stopped early in a state with no possible event.
    pub absorbed: bool,
}

pub fn simulate_jump(
    kind: ModelKind,
    p: &ModelParams,
    s0: JumpMicrostate,
    t_end: f64,
    seed: u64,
) -> Result<JumpPath, StochasticError> {
    let channels = build_channels(kind, p);
    let mut sim = JumpSimulator::new(&channels, *p, kind, s0, trajectory_rng(seed, 0))?;
    let mut events = Vec::new();
    while let Some(e) = sim.next_event(t_end) {
        events.push(e);
    }
    Ok(JumpPath { initial: s0, events, final_state: sim.state, absorbed: sim.absorbed })
}

/// States of trajectory `index` at each of `times`.
pub fn sample_trajectory(
    kind: ModelKind,
    p: &ModelParams,
    channels: &[EventChannel],
    s0: JumpMicrostate,
    times: &[f64],
    base_seed: u64,
    index: u64,
) -> Result<Vec<JumpMicrostate>, StochasticError> {
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(StochasticError::InvalidGrid);
    }
    let mut sim = JumpSimulator::new(channels, *p, kind, s0, trajectory_rng(base_seed, index))?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        sim.advance_to(t);
        out.push(sim.state);
    }
    Ok(out)
}

/// Mean and standard error per component on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<State>,
    /// `None` for a single trajectory, where it is undefined.
    pub std_err: Option<Vec<State>>,
    pub n_traj: usize,
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Aggregates per-trajectory samples in trajectory order.
///
/// The result depends only on the samples, never on how they were produced,
/// so serial and parallel runs agree bit for bit.
pub fn aggregate(
    kind: ModelKind,
    p: &ModelParams,
    times: &[f64],
    samples: &[Vec<JumpMicrostate>],
) -> Result<EnsembleStats, StochasticError> {
    let n = samples.len();
    if n == 0 {
        return Err(StochasticError::EmptyEnsemble);
    }
    let mut mean = Vec::with_capacity(times.len());
    let mut std_err = Vec::with_capacity(times.len());
    let mut column = vec![0.0; n];
    for k in 0..times.len() {
        let states: Vec<State> = samples.iter().map(|s| s[k].to_state(p, kind)).collect();
        let mut mu = State::default();
        let mut se = State::default();
        for &f in kind.fields() {
            for (slot, s) in column.iter_mut().zip(&states) {
                *slot = s.get(f);
            }
            let m = pairwise_sum(&column) / n as f64;
            mu.set(f, m);
            if n > 1 {
                for v in column.iter_mut() {
                    *v = (*v - m) * (*v - m);
                }
                let var = pairwise_sum(&column) / (n - 1) as f64;
                se.set(f, libm::sqrt(var / n as f64));
            }
        }
        mean.push(mu);
        std_err.push(se);
    }
    Ok(EnsembleStats { times: times.to_vec(), mean, std_err: (n > 1).then_some(std_err), n_traj: n })
}

/// Serial ensemble average over `n_traj` trajectories.
pub fn ensemble_mean(
    kind: ModelKind,
    p: &ModelParams,
    s0: JumpMicrostate,
    times: &[f64],
    n_traj: usize,
    base_seed: u64,
) -> Result<EnsembleStats, StochasticError> {
    if n_traj == 0 {
        return Err(StochasticError::EmptyEnsemble);
    }
    let channels = build_channels(kind, p);
    let samples = (0..n_traj as u64)
        .map(|i| sample_trajectory(kind, p, &channels, s0, times, base_seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(kind, p, times, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::rhs;

    fn blackbody() -> ModelParams {
        ModelParams { gamma_prime: 1e6, n_modes: 100.0, tls_count: 100, ..ModelParams::default() }
    }

    fn open_fig2() -> ModelParams {
        ModelParams { gamma_dec: 1e4, gamma_0: 1e4, gamma_t1: 1e7, gamma_t11: 1e7, n_modes: 100.0, tls_count: 100, ..ModelParams::default() }
    }

    #[test]
    fn channel_counts() {
        assert_eq!(build_channels(ModelKind::BlackBody, &blackbody()).len(), 2);
        assert_eq!(build_channels(ModelKind::OpenChiral, &open_fig2()).len(), 10);
        assert_eq!(active_channels(ModelKind::OpenChiral, &open_fig2()).len(), 7);
        assert_eq!(build_channels(ModelKind::ClosedChiral, &open_fig2()).len(), 20);
        assert_eq!(build_channels(ModelKind::EmbeddedCavity, &open_fig2()).len(), 6);
    }

    #[test]
    fn zero_rates_give_zero_propensities() {
        let p = ModelParams::default();
        let s = State { n_a: 1.0, n_b: 2.0, n_1: 3.0, n_2: 4.0, n_c: 5.0, m: 3.0 };
        for kind in ModelKind::ALL {
            for c in build_channels(kind, &p) {
                assert_eq!(c.propensity(&s, p.m_total()), 0.0, "{}", c.name);
            }
        }
    }

    #[test]
    fn drift_matches_vector_field() {
        let p = ModelParams {
            gamma_prime: 2e6,
            gamma_dec: 1e4,
            gamma_dec_prime: 2e4,
            gamma_0: 3e4,
            gamma_3: 5e3,
            gamma_t1: 1e7,
            gamma_t2: 4e6,
            gamma_t11: 2e6,
            gamma_t12: 3e6,
            gamma_4: 1e4,
            gamma_4_prime: 2e4,
            gamma_5: 1e5,
            gamma_6: 1e3,
            n_modes: 100.0,
            n_modes_wg: 50.0,
            tls_count: 40,
            x0: 1.0,
        };
        let s = State { n_a: 0.37, n_b: 1.2, n_1: 0.05, n_2: 2.5, n_c: 0.8, m: 13.0 };
        for kind in ModelKind::ALL {
            let d = mean_drift(&build_channels(kind, &p), &s, &p, kind);
            let f = rhs(kind, &s, &p);
            for &fld in kind.fields() {
                let scale = 1e-12 * (1.0 + f.get(fld).abs()) * p.rate_scale();
                assert!((d.get(fld) - f.get(fld)).abs() <= scale, "{kind:?} {fld:?}: {} vs {}", d.get(fld), f.get(fld));
            }
        }
    }

    #[test]
    fn conservative_channels_conserve_excitation() {
        for kind in ModelKind::ALL.into_iter().filter(|k| k.is_conservative()) {
            for c in build_channels(kind, &open_fig2()) {
                assert_eq!(c.delta.iter().map(|&d| d as i32).sum::<i32>(), 0, "{}", c.name);
            }
        }
    }

    #[test]
    fn blackbody_run_conserves_and_repeats() {
        let p = blackbody();
        let s0 = JumpMicrostate { m: 12, photon_totals: [154, 0, 0, 0, 0] };
        let a = simulate_jump(ModelKind::BlackBody, &p, s0, 2e-6, 7).unwrap();
        let b = simulate_jump(ModelKind::BlackBody, &p, s0, 2e-6, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.events.len() > 50);
        assert_eq!(a.final_state.excitation(), s0.excitation());
        let c = simulate_jump(ModelKind::BlackBody, &p, s0, 2e-6, 8).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn zero_rates_never_jump() {
        let s0 = JumpMicrostate { m: 3, photon_totals: [10, 0, 0, 0, 0] };
        let path = simulate_jump(ModelKind::BlackBody, &ModelParams::default(), s0, 1.0, 1).unwrap();
        assert!(path.events.is_empty());
        assert!(path.absorbed);
        assert_eq!(path.final_state, s0);
    }

    #[test]
    fn invalid_microstate_is_rejected() {
        let s0 = JumpMicrostate { m: 101, photon_totals: [0; 5] };
        assert!(simulate_jump(ModelKind::BlackBody, &blackbody(), s0, 1.0, 1).is_err());
    }

    #[test]
    fn single_trajectory_has_no_standard_error() {
        let s0 = JumpMicrostate { m: 12, photon_totals: [154, 0, 0, 0, 0] };
        let stats = ensemble_mean(ModelKind::BlackBody, &blackbody(), s0, &[0.0, 1e-7], 1, 3).unwrap();
        assert!(stats.std_err.is_none());
        assert_eq!(stats.mean[0].m, 12.0);
        assert_eq!(
            ensemble_mean(ModelKind::BlackBody, &blackbody(), s0, &[0.0], 0, 3),
            Err(StochasticError::EmptyEnsemble)
        );
    }

    #[test]
    fn microstate_roundtrip() {
        let p = open_fig2();
        let s = State { n_a: 0.25, n_b: 1.5, m: 7.0, ..State::default() };
        let micro = JumpMicrostate::from_state(&s, &p, ModelKind::OpenChiral);
        assert_eq!(micro.photon_totals[..2], [25, 150]);
        assert_eq!(micro.to_state(&p, ModelKind::OpenChiral), s);
    }
}
