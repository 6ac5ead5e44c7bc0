//! Ensemble-mean state and sampled trajectories.

use alloc::vec::Vec;

use crate::integrator::DenseOutput;
use crate::params::{Field, ModelKind, ModelParams};

/// Mean occupancies per mode and mean number of excited TLS.
///
/// Which fields are meaningful depends on the [`ModelKind`]; the others are
/// carried as zero and ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct State {
    pub n_a: f64,
    pub n_b: f64,
    pub n_1: f64,
    pub n_2: f64,
    pub n_c: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("inverse temperature must be positive, got {0}")]
    NonPositiveX(f64),
    #[error("{field} = {value} is negative or not finite")]
    NegativeOccupancy { field: &'static str, value: f64 },
    #[error("m = {m} outside [0, {max}]")]
    ExcitationOutOfRange { m: f64, max: f64 },
}

/// Bose occupancy 1/(eˣ − 1).
pub fn bose_occupancy(x: f64) -> f64 {
    1.0 / libm::expm1(x)
}

/// Excited fraction 1/(eˣ + 1) of a two-level ensemble.
pub fn excited_fraction(x: f64) -> f64 {
    if x > 700.0 {
        return libm::exp(-x);
    }
    1.0 / (libm::exp(x) + 1.0)
}

impl State {
    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::NA => self.n_a,
            Field::NB => self.n_b,
            Field::N1 => self.n_1,
            Field::N2 => self.n_2,
            Field::NC => self.n_c,
            Field::M => self.m,
        }
    }

    pub fn set(&mut self, field: Field, value: f64) {
        match field {
            Field::NA => self.n_a = value,
            Field::NB => self.n_b = value,
            Field::N1 => self.n_1 = value,
            Field::N2 => self.n_2 = value,
            Field::NC => self.n_c = value,
            Field::M => self.m = value,
        }
    }

    /// Active components in the order of [`ModelKind::fields`].
    pub fn pack(&self, kind: ModelKind) -> Vec<f64> {
        kind.fields().iter().map(|&f| self.get(f)).collect()
    }

    pub fn pack_into(&self, kind: ModelKind, out: &mut [f64]) {
        for (slot, &f) in out.iter_mut().zip(kind.fields()) {
            *slot = self.get(f);
        }
    }

    pub fn unpack(kind: ModelKind, values: &[f64]) -> Self {
        let mut s = State::default();
        for (&f, &v) in kind.fields().iter().zip(values) {
            s.set(f, v);
        }
        s
    }

    /// Zeroes the fields that `kind` does not use.
    pub fn restricted_to(&self, kind: ModelKind) -> Self {
        let mut s = State::default();
        for &f in kind.fields() {
            s.set(f, self.get(f));
        }
        s
    }

    pub fn validate(&self, kind: ModelKind, p: &ModelParams) -> Result<(), StateError> {
        for &f in kind.fields() {
            let v = self.get(f);
            if f == Field::M {
                if !(v >= 0.0 && v <= p.m_total()) {
                    return Err(StateError::ExcitationOutOfRange { m: v, max: p.m_total() });
                }
            } else if !(v >= 0.0) || !v.is_finite() {
                return Err(StateError::NegativeOccupancy { field: f.label(), value: v });
            }
        }
        Ok(())
    }

    /// Max-norm over the active fields.
    pub fn max_norm(&self, kind: ModelKind) -> f64 {
        kind.fields().iter().map(|&f| self.get(f).abs()).fold(0.0, f64::max)
    }
}

/// Every subsystem in equilibrium at inverse temperature `x`.
pub fn thermal_state(p: &ModelParams, kind: ModelKind, x: f64) -> Result<State, StateError> {
    thermal_state_split(p, kind, x, x)
}

/// Radiation at `x_rad` and TLS at `x_tls`, each in its own equilibrium.
pub fn thermal_state_split(p: &ModelParams, kind: ModelKind, x_rad: f64, x_tls: f64) -> Result<State, StateError> {
    for x in [x_rad, x_tls] {
        if !(x > 0.0) {
            return Err(StateError::NonPositiveX(x));
        }
    }
    let n = bose_occupancy(x_rad);
    let mut s = State::default();
    for &f in kind.fields() {
        if f.is_photon() {
            s.set(f, n);
        }
    }
    s.m = p.m_total() * excited_fraction(x_tls);
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
}

/// Step statistics of the integration that produced a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub negativity_rejections: usize,
    pub evaluations: usize,
}

/// Time series of states on a sample grid, plus the continuous solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub samples: Vec<Sample>,
    pub stats: IntegrationStats,
    pub dense: DenseOutput,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn first(&self) -> &State {
        &self.samples[0].state
    }

    pub fn last(&self) -> &State {
        &self.samples[self.samples.len() - 1].state
    }

    /// State at any time in `[0, t_end]` from the dense output.
    pub fn state_at(&self, t: f64) -> State {
        let mut buf = alloc::vec![0.0; self.kind.fields().len()];
        self.dense.eval(t, &mut buf);
        State::unpack(self.kind, &buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(m: u32) -> ModelParams {
        ModelParams { tls_count: m, ..ModelParams::default() }
    }

    #[test]
    fn thermal_state_at_unit_inverse_temperature() {
        let s = thermal_state(&params(100), ModelKind::ClosedChiral, 1.0).unwrap();
        // 1/(e-1) and 100/(e+1)
        assert_relative_eq!(s.n_a, 0.581_976_706_869_326_4, max_relative = 1e-15);
        assert_relative_eq!(s.m, 26.894_142_136_999_51, max_relative = 1e-15);
        assert_eq!([s.n_a, s.n_b, s.n_1, s.n_2], [s.n_a; 4]);
        assert_eq!(s.n_c, 0.0);
    }

    #[test]
    fn thermal_state_at_ln2_is_exact() {
        let s = thermal_state(&params(3), ModelKind::BlackBody, core::f64::consts::LN_2).unwrap();
        assert_eq!(s.n_a, 1.0);
        assert_eq!(s.m, 1.0);
    }

    #[test]
    fn zero_temperature_limit() {
        let s = thermal_state(&params(100), ModelKind::OpenChiral, 1e4).unwrap();
        assert_eq!(s.n_a, 0.0);
        assert_eq!(s.m, 0.0);
    }

    #[test]
    fn rejects_non_positive_x() {
        assert_eq!(thermal_state(&params(1), ModelKind::BlackBody, 0.0), Err(StateError::NonPositiveX(0.0)));
        assert!(thermal_state(&params(1), ModelKind::BlackBody, -2.0).is_err());
    }

    #[test]
    fn pack_roundtrip_keeps_active_fields() {
        let s = State { n_a: 1.0, n_b: 2.0, n_1: 3.0, n_2: 4.0, n_c: 5.0, m: 6.0 };
        for kind in ModelKind::ALL {
            let packed = s.pack(kind);
            assert_eq!(packed.len(), kind.fields().len());
            assert_eq!(State::unpack(kind, &packed), s.restricted_to(kind));
        }
    }

    #[test]
    fn validate_catches_bad_components() {
        let p = params(10);
        let s = State { n_a: -1e-3, m: 1.0, ..State::default() };
        assert!(s.validate(ModelKind::BlackBody, &p).is_err());
        let s = State { n_a: 1.0, m: 11.0, ..State::default() };
        assert!(s.validate(ModelKind::BlackBody, &p).is_err());
        // inactive fields are ignored
        let s = State { n_a: 1.0, n_b: -5.0, m: 1.0, ..State::default() };
        assert!(s.validate(ModelKind::BlackBody, &p).is_ok());
    }
}
