//! Detailed-balance analysis over event-channel pairs.
//!
//! Channels with opposite effects are paired and their fluxes compared at a
//! state. Stationarity only needs the fluxes to cancel in total; detailed
//! balance needs every pair to cancel on its own.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::models::VectorField;
use crate::params::{ModelKind, ModelParams};
use crate::state::{State, StateError};
use crate::stochastic::EventChannel;

/// Pair residuals below this count as balanced.
pub const PAIR_TOLERANCE: f64 = 1e-8;
/// Relative vector-field norm below which a state counts as steady.
pub const STEADY_TOLERANCE: f64 = 1e-8;
const FLUX_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    DetailedBalanced,
    Broken,
    /// Some channel with a non-zero rate has no reverse.
    NotApplicable,
}

/// Channels grouped into forward/reverse pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub channels: Vec<EventChannel>,
    /// Indices into `channels`, forward first.
    pub pairs: Vec<(usize, usize)>,
    pub unpaired: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BalanceError {
    #[error("channels {first} and {second} share an effect that has a reverse")]
    AmbiguousPairing { first: &'static str, second: &'static str },
    #[error("invalid state: {0}")]
    InvalidState(#[from] StateError),
    #[error("state is not steady (vector-field norm {residual:e} above {threshold:e})")]
    NotSteady { residual: f64, threshold: f64, report: Box<BalanceReport> },
}

fn negated(d: &[i8; 6]) -> [i8; 6] {
    let mut out = *d;
    for v in out.iter_mut() {
        *v = -*v;
    }
    out
}

pub fn pair_channels(channels: Vec<EventChannel>) -> Result<Pairing, BalanceError> {
    let same = |d: [i8; 6]| -> Vec<usize> { (0..channels.len()).filter(|&i| channels[i].delta == d).collect() };
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    for (i, c) in channels.iter().enumerate() {
        let reverse = negated(&c.delta);
        let forward_group = same(c.delta);
        let reverse_group = same(reverse);
        if reverse_group.is_empty() {
            unpaired.push(i);
            continue;
        }
        if forward_group.len() > 1 || reverse_group.len() > 1 {
            let (a, b) = if forward_group.len() > 1 {
                (forward_group[0], forward_group[1])
            } else {
                (reverse_group[0], reverse_group[1])
            };
            return Err(BalanceError::AmbiguousPairing { first: channels[a].name, second: channels[b].name });
        }
        let j = reverse_group[0];
        if i < j {
            pairs.push((i, j));
        }
    }
    Ok(Pairing { channels, pairs, unpaired })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PairReport {
    pub forward: &'static str,
    pub reverse: &'static str,
    pub forward_flux: f64,
    pub reverse_flux: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UnpairedReport {
    pub channel: &'static str,
    pub flux: f64,
    /// The channel's rate constant is non-zero.
    pub active: bool,
}

/// `P^e·P_{e→g}` against `P^g·P_{g→e}` for a single TLS.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbabilityBalance {
    pub p_excited: f64,
    pub p_ground: f64,
    pub rate_down: f64,
    pub rate_up: f64,
    pub downward: f64,
    pub upward: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BalanceReport {
    pub pairs: Vec<PairReport>,
    pub unpaired: Vec<UnpairedReport>,
    pub verdict: Verdict,
    /// Max-norm of the vector field at the state.
    pub steady_residual: f64,
    pub probability: Option<ProbabilityBalance>,
}

impl BalanceReport {
    pub fn max_pair_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn pair_residual(f: f64, r: f64) -> f64 {
    (f - r).abs() / f.max(r).max(FLUX_FLOOR)
}

/// Classifies a state.
///
/// Active unpaired channels give `NotApplicable`; otherwise any pair residual
/// at or above [`PAIR_TOLERANCE`] gives `Broken`. A state passing both but not
/// steady is returned as [`BalanceError::NotSteady`] with the report attached.
pub fn check_balance(
    state: &State,
    pairing: &Pairing,
    p: &ModelParams,
    kind: ModelKind,
) -> Result<BalanceReport, BalanceError> {
    state.validate(kind, p)?;
    let big_m = p.m_total();
    let flux = |i: usize| pairing.channels[i].propensity(state, big_m);

    let pairs: Vec<PairReport> = pairing
        .pairs
        .iter()
        .map(|&(i, j)| {
            let (f, r) = (flux(i), flux(j));
            PairReport {
                forward: pairing.channels[i].name,
                reverse: pairing.channels[j].name,
                forward_flux: f,
                reverse_flux: r,
                residual: pair_residual(f, r),
            }
        })
        .collect();
    let unpaired: Vec<UnpairedReport> = pairing
        .unpaired
        .iter()
        .map(|&i| UnpairedReport { channel: pairing.channels[i].name, flux: flux(i), active: pairing.channels[i].coefficient != 0.0 })
        .collect();

    let field = VectorField::new(kind, *p);
    let steady_residual = field.residual(state);
    let threshold = STEADY_TOLERANCE * p.rate_scale() * state.max_norm(kind).max(1.0);

    let probability = (kind == ModelKind::BlackBody && big_m > 0.0).then(|| {
        let p_excited = state.m / big_m;
        let p_ground = 1.0 - p_excited;
        let rate_down = p.gamma_prime * (state.n_a + 1.0);
        let rate_up = p.gamma_prime * state.n_a;
        ProbabilityBalance { p_excited, p_ground, rate_down, rate_up, downward: p_excited * rate_down, upward: p_ground * rate_up }
    });

    let verdict = if unpaired.iter().any(|u| u.active) {
        Verdict::NotApplicable
    } else if pairs.iter().any(|p| !(p.residual < PAIR_TOLERANCE)) {
        Verdict::Broken
    } else {
        Verdict::DetailedBalanced
    };
    let report = BalanceReport { pairs, unpaired, verdict, steady_residual, probability };
    if verdict == Verdict::DetailedBalanced && steady_residual > threshold {
        return Err(BalanceError::NotSteady { residual: steady_residual, threshold, report: Box::new(report) });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::thermal_state;
    use crate::stochastic::build_channels;

    fn pairing(kind: ModelKind, p: &ModelParams) -> Pairing {
        pair_channels(build_channels(kind, p)).unwrap()
    }

    #[test]
    fn pair_structure() {
        let p = ModelParams { gamma_prime: 1e6, ..ModelParams::default() };
        let bb = pairing(ModelKind::BlackBody, &p);
        assert_eq!((bb.pairs.len(), bb.unpaired.len()), (1, 0));
        let open = pairing(ModelKind::OpenChiral, &p);
        let names: Vec<_> = open.unpaired.iter().map(|&i| open.channels[i].name).collect();
        assert_eq!(names, ["loss-A", "loss-B", "tls-loss-1", "tls-loss-2"]);
        assert_eq!(open.pairs.len(), 3);
        let closed = pairing(ModelKind::ClosedChiral, &p);
        assert_eq!((closed.pairs.len(), closed.unpaired.len()), (10, 0));
        let embedded = pairing(ModelKind::EmbeddedCavity, &p);
        assert_eq!((embedded.pairs.len(), embedded.unpaired.len()), (3, 0));
    }

    #[test]
    fn ambiguous_pairing_is_an_error() {
        let p = ModelParams { gamma_prime: 1e6, ..ModelParams::default() };
        let mut channels = build_channels(ModelKind::BlackBody, &p);
        channels.push(channels[0].clone());
        assert!(matches!(pair_channels(channels), Err(BalanceError::AmbiguousPairing { .. })));
    }

    #[test]
    fn blackbody_fixed_point_is_balanced() {
        let p = ModelParams { gamma_prime: 1e6, n_modes: 100.0, tls_count: 99, ..ModelParams::default() };
        // m(n+1) = (M−m)n with n = 1
        let s = State { n_a: 1.0, m: 33.0, ..State::default() };
        let r = check_balance(&s, &pairing(ModelKind::BlackBody, &p), &p, ModelKind::BlackBody).unwrap();
        assert_eq!(r.verdict, Verdict::DetailedBalanced);
        let prob = r.probability.unwrap();
        assert!((prob.downward - prob.upward).abs() < 1e-15 * prob.upward);
    }

    #[test]
    fn blackbody_off_equilibrium_is_broken() {
        let p = ModelParams { gamma_prime: 1e6, n_modes: 100.0, tls_count: 100, ..ModelParams::default() };
        let s = State { n_a: 1.0, m: 10.0, ..State::default() };
        let r = check_balance(&s, &pairing(ModelKind::BlackBody, &p), &p, ModelKind::BlackBody).unwrap();
        assert_eq!(r.verdict, Verdict::Broken);
    }

    #[test]
    fn closed_chiral_thermal_state_is_broken() {
        let p = ModelParams {
            gamma_dec: 1e4,
            gamma_dec_prime: 1e4,
            gamma_0: 1e4,
            gamma_3: 1e4,
            gamma_t1: 1e7,
            gamma_t11: 1e7,
            n_modes: 100.0,
            n_modes_wg: 100.0,
            tls_count: 100,
            ..ModelParams::default()
        };
        let s = thermal_state(&p, ModelKind::ClosedChiral, 1.0).unwrap();
        let r = check_balance(&s, &pairing(ModelKind::ClosedChiral, &p), &p, ModelKind::ClosedChiral).unwrap();
        assert_eq!(r.verdict, Verdict::Broken);
        let broken: Vec<_> = r.pairs.iter().filter(|p| p.residual >= PAIR_TOLERANCE).map(|p| p.forward).collect();
        assert_eq!(broken, ["absorb-A-via-1", "emit-B-via-1"]);
    }

    #[test]
    fn open_chiral_with_losses_is_not_applicable() {
        let p = ModelParams { gamma_dec: 1e4, gamma_0: 1e4, gamma_t1: 1e7, gamma_t11: 1e7, tls_count: 100, ..ModelParams::default() };
        let r = check_balance(&State::default(), &pairing(ModelKind::OpenChiral, &p), &p, ModelKind::OpenChiral).unwrap();
        assert_eq!(r.verdict, Verdict::NotApplicable);
        assert_eq!(r.pairs.len(), 3);
    }

    #[test]
    fn symmetric_lossless_open_chiral_is_balanced() {
        let p = ModelParams { gamma_0: 1e4, gamma_t1: 1e7, gamma_t2: 1e7, tls_count: 100, ..ModelParams::default() };
        let s = thermal_state(&p, ModelKind::OpenChiral, 0.7).unwrap();
        let r = check_balance(&s, &pairing(ModelKind::OpenChiral, &p), &p, ModelKind::OpenChiral).unwrap();
        assert_eq!(r.verdict, Verdict::DetailedBalanced);
        let chiral = ModelParams { gamma_t2: 5e6, ..p };
        let r = check_balance(&s, &pairing(ModelKind::OpenChiral, &chiral), &chiral, ModelKind::OpenChiral).unwrap();
        assert_eq!(r.verdict, Verdict::Broken);
    }

    #[test]
    fn embedded_thermal_state_is_balanced() {
        let p = ModelParams { gamma_4: 1e4, gamma_4_prime: 1e4, gamma_5: 1e5, gamma_6: 1e3, tls_count: 100, ..ModelParams::default() };
        let s = thermal_state(&p, ModelKind::EmbeddedCavity, 1.3).unwrap();
        let r = check_balance(&s, &pairing(ModelKind::EmbeddedCavity, &p), &p, ModelKind::EmbeddedCavity).unwrap();
        assert_eq!(r.verdict, Verdict::DetailedBalanced);
        assert!(r.max_pair_residual() < 1e-12);
    }

    #[test]
    fn residual_floor() {
        assert_eq!(pair_residual(0.0, 0.0), 0.0);
        assert_eq!(pair_residual(2.0, 1.0), 0.5);
    }
}
