//! Right-hand sides of the four rate-equation systems.
//!
//! All functions are pure. Inactive state fields are returned as zero.

use crate::integrator::OdeSystem;
use crate::params::{Field, ModelKind, ModelParams};
use crate::state::State;

/// Black-body radiation exchanging photons with `M` two-level systems.
pub fn rhs_blackbody(s: &State, p: &ModelParams) -> State {
    let big_m = p.m_total();
    let n = s.n_a;
    let m = s.m;
    let net_emission = m * (n + 1.0) - (big_m - m) * n;
    State { n_a: p.gamma_bb() * net_emission, m: -p.gamma_prime * net_emission, ..State::default() }
}

/// Reservoirs A and B coupled through an open chiral waveguide.
pub fn rhs_open_chiral(s: &State, p: &ModelParams) -> State {
    let big_m = p.m_total();
    let (na, nb, m) = (s.n_a, s.n_b, s.m);
    let ground = big_m - m;
    let (g1, g2) = (p.gamma_1(), p.gamma_2());

    let dna = -2.0 * p.gamma_dec * na + p.gamma_0 * (nb - na) - g1 * ground * na + g2 * m * (na + 1.0);
    let dnb = -2.0 * p.gamma_dec * nb + p.gamma_0 * (na - nb) - g2 * ground * nb + g1 * m * (nb + 1.0);
    let dm = -(p.gamma_t11 + p.gamma_t12) * m
        + p.gamma_t1 * (na * ground - (nb + 1.0) * m)
        + p.gamma_t2 * (nb * ground - (na + 1.0) * m);
    State { n_a: dna, n_b: dnb, m: dm, ..State::default() }
}

/// The chiral waveguide closed into a loop; channels 1 and 2 carry photons.
pub fn rhs_closed_chiral(s: &State, p: &ModelParams) -> State {
    let big_m = p.m_total();
    let (na, nb, n1, n2, m) = (s.n_a, s.n_b, s.n_1, s.n_2, s.m);
    let ground = big_m - m;
    let (g1, g2) = (p.gamma_1(), p.gamma_2());
    let (g11, g12) = (p.gamma_11(), p.gamma_12());

    // γ₀ transfer A→B goes through channel 1, B→A through channel 2.
    let a_to_b = (n1 + 1.0) * (nb + 1.0) * na;
    let b_to_a = (n2 + 1.0) * (na + 1.0) * nb;
    let channel_mix = p.gamma_3 * (na + nb + 2.0) * (n2 - n1);

    let dna = p.gamma_dec * (n1 + n2 - 2.0 * na) - g1 * ground * na * (n1 + 1.0)
        + g2 * m * (na + 1.0) * (n2 + 1.0)
        + p.gamma_0 * (b_to_a - a_to_b);
    let dnb = p.gamma_dec * (n1 + n2 - 2.0 * nb) - g2 * ground * nb * (n2 + 1.0)
        + g1 * m * (nb + 1.0) * (n1 + 1.0)
        + p.gamma_0 * (a_to_b - b_to_a);
    let dn1 = p.gamma_dec_prime * (na + nb - 2.0 * n1) - g11 * (ground * n1 - m * (n1 + 1.0)) + channel_mix;
    let dn2 = p.gamma_dec_prime * (na + nb - 2.0 * n2) - g12 * (ground * n2 - m * (n2 + 1.0)) - channel_mix;
    let dm = p.gamma_t11 * (ground * n1 - m * (n1 + 1.0)) + p.gamma_t12 * (ground * n2 - m * (n2 + 1.0))
        - m * (p.gamma_t1 * (nb + 1.0) * (n1 + 1.0) + p.gamma_t2 * (na + 1.0) * (n2 + 1.0))
        + ground * (p.gamma_t1 * na * (n1 + 1.0) + p.gamma_t2 * nb * (n2 + 1.0));
    State { n_a: dna, n_b: dnb, n_1: dn1, n_2: dn2, m: dm, ..State::default() }
}

/// Cavity A inside cavity C; the TLS sit in C.
///
/// The TLS equation is the excitation-conserving counterpart of the two
/// photon equations, with weights 𝒩_A = `n_modes` and 𝒩_C = `n_modes_wg`.
pub fn rhs_embedded(s: &State, p: &ModelParams) -> State {
    let big_m = p.m_total();
    let (na, nc, m) = (s.n_a, s.n_c, s.m);
    let ground = big_m - m;
    let stim = (nc + 1.0) * (nc + 1.0);
    // Net TLS excitation out of A (second order, via C) and out of C (first order).
    let from_a = p.gamma_6 * stim * (na * ground - (na + 1.0) * m);
    let from_c = p.gamma_5 * (nc * ground - (nc + 1.0) * m);

    let dna = p.gamma_4 * (nc - na) - from_a;
    let dnc = p.gamma_4_prime * (na - nc) - from_c;
    let dm = p.n_modes_wg * from_c + p.n_modes * from_a;
    State { n_a: dna, n_c: dnc, m: dm, ..State::default() }
}

pub fn rhs(kind: ModelKind, s: &State, p: &ModelParams) -> State {
    match kind {
        ModelKind::BlackBody => rhs_blackbody(s, p),
        ModelKind::OpenChiral => rhs_open_chiral(s, p),
        ModelKind::ClosedChiral => rhs_closed_chiral(s, p),
        ModelKind::EmbeddedCavity => rhs_embedded(s, p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("{0} loses excitations to the bath; no conserved total")]
    NotConservative(ModelKind),
}

/// Weights `w` such that `w · state` is the total excitation number.
pub fn excitation_weights(kind: ModelKind, p: &ModelParams) -> Result<State, ModelError> {
    let w = match kind {
        ModelKind::BlackBody => State { n_a: p.n_modes, m: 1.0, ..State::default() },
        ModelKind::ClosedChiral => State {
            n_a: p.n_modes,
            n_b: p.n_modes,
            n_1: p.n_modes_wg,
            n_2: p.n_modes_wg,
            m: 1.0,
            ..State::default()
        },
        ModelKind::EmbeddedCavity => State { n_a: p.n_modes, n_c: p.n_modes_wg, m: 1.0, ..State::default() },
        ModelKind::OpenChiral => return Err(ModelError::NotConservative(kind)),
    };
    Ok(w)
}

/// Total excitation number (TLS excitations plus photons over all modes).
pub fn conserved_excitation(s: &State, p: &ModelParams, kind: ModelKind) -> Result<f64, ModelError> {
    let w = excitation_weights(kind, p)?;
    Ok(Field::ALL.iter().map(|&f| w.get(f) * s.get(f)).sum())
}

/// A model kind bound to its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorField {
    pub kind: ModelKind,
    pub params: ModelParams,
}

impl VectorField {
    pub fn new(kind: ModelKind, params: ModelParams) -> Self {
        Self { kind, params }
    }

    pub fn eval(&self, s: &State) -> State {
        rhs(self.kind, s, &self.params)
    }

    /// Max-norm of the field over the active components.
    pub fn residual(&self, s: &State) -> f64 {
        self.eval(s).max_norm(self.kind)
    }
}

impl OdeSystem for VectorField {
    fn dim(&self) -> usize {
        self.kind.fields().len()
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let s = State::unpack(self.kind, y);
        self.eval(&s).pack_into(self.kind, dy);
    }

    fn nonnegative(&self) -> bool {
        true
    }
}
