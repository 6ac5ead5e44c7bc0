//! Model kinds, rate constants and parameter validation.
//!
//! Time is measured in seconds and every rate in Hz. Energies are in units of
//! the transition quantum and entropies in units of the Boltzmann constant, so
//! the dynamics only ever sees rate ratios and the dimensionless inverse
//! temperature `x = ħΩ / k_B T`.

use alloc::vec::Vec;
use core::fmt;

/// The four rate-equation systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ModelKind {
    /// `M` two-level systems exchanging photons with one radiation continuum.
    BlackBody,
    /// Two reservoirs coupled to the TLS through an open, non-reciprocal waveguide.
    OpenChiral,
    /// The same geometry with the waveguide closed into a loop.
    ClosedChiral,
    /// A small cavity embedded in a larger one that contains the TLS.
    EmbeddedCavity,
}

/// A component of [`crate::State`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    NA,
    NB,
    N1,
    N2,
    NC,
    M,
}

impl Field {
    pub const ALL: [Field; 6] = [Field::NA, Field::NB, Field::N1, Field::N2, Field::NC, Field::M];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn is_photon(self) -> bool {
        !matches!(self, Field::M)
    }

    pub const fn label(self) -> &'static str {
        match self {
            Field::NA => "n_A",
            Field::NB => "n_B",
            Field::N1 => "n_1",
            Field::N2 => "n_2",
            Field::NC => "n_C",
            Field::M => "m",
        }
    }
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::BlackBody,
        ModelKind::OpenChiral,
        ModelKind::ClosedChiral,
        ModelKind::EmbeddedCavity,
    ];

    /// Active state components, in packing order.
    ///
    /// The single black-body radiation occupancy is carried in the `n_A` slot.
    pub const fn fields(self) -> &'static [Field] {
        match self {
            ModelKind::BlackBody => &[Field::NA, Field::M],
            ModelKind::OpenChiral => &[Field::NA, Field::NB, Field::M],
            ModelKind::ClosedChiral => &[Field::NA, Field::NB, Field::N1, Field::N2, Field::M],
            ModelKind::EmbeddedCavity => &[Field::NA, Field::NC, Field::M],
        }
    }

    pub fn is_active(self, field: Field) -> bool {
        self.fields().contains(&field)
    }

    /// Whether the total excitation number is conserved (no bath).
    pub const fn is_conservative(self) -> bool {
        !matches!(self, ModelKind::OpenChiral)
    }

    pub const fn name(self) -> &'static str {
        match self {
            ModelKind::BlackBody => "blackbody",
            ModelKind::OpenChiral => "open-chiral",
            ModelKind::ClosedChiral => "closed-chiral",
            ModelKind::EmbeddedCavity => "embedded",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "blackbody" | "black-body" => Some(ModelKind::BlackBody),
            "open-chiral" | "open" => Some(ModelKind::OpenChiral),
            "closed-chiral" | "closed" => Some(ModelKind::ClosedChiral),
            "embedded" | "embedded-cavity" => Some(ModelKind::EmbeddedCavity),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rate constants, mode counts and the initial inverse temperature.
///
/// Tilded rates (`gamma_t*`) are per-TLS rates; the per-mode rates seen by the
/// photon occupancies are derived from them by dividing by the mode count and
/// are never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// Black-body TLS-side emission/absorption rate γ′.
    pub gamma_prime: f64,
    /// Waveguide end loss per channel.
    pub gamma_dec: f64,
    /// Reservoir to channel equilibration in the closed loop.
    pub gamma_dec_prime: f64,
    /// Second-order A↔B transfer.
    pub gamma_0: f64,
    /// Channel 1↔2 coupling via a reservoir.
    pub gamma_3: f64,
    pub gamma_t1: f64,
    pub gamma_t2: f64,
    pub gamma_t11: f64,
    pub gamma_t12: f64,
    pub gamma_4: f64,
    pub gamma_4_prime: f64,
    pub gamma_5: f64,
    pub gamma_6: f64,
    /// Reservoir mode count 𝒩 (also 𝒩_A for the embedded cavity).
    #[cfg_attr(feature = "serde", serde(rename = "N_modes"))]
    pub n_modes: f64,
    /// Waveguide mode count 𝒩′ (also 𝒩_C for the embedded cavity).
    #[cfg_attr(feature = "serde", serde(rename = "N_modes_wg"))]
    pub n_modes_wg: f64,
    /// Number of two-level systems.
    #[cfg_attr(feature = "serde", serde(rename = "M"))]
    pub tls_count: u32,
    /// Initial inverse temperature ħΩ/k_B T(0).
    pub x0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            gamma_prime: 0.0,
            gamma_dec: 0.0,
            gamma_dec_prime: 0.0,
            gamma_0: 0.0,
            gamma_3: 0.0,
            gamma_t1: 0.0,
            gamma_t2: 0.0,
            gamma_t11: 0.0,
            gamma_t12: 0.0,
            gamma_4: 0.0,
            gamma_4_prime: 0.0,
            gamma_5: 0.0,
            gamma_6: 0.0,
            n_modes: 100.0,
            n_modes_wg: 100.0,
            tls_count: 10,
            x0: 1.0,
        }
    }
}

impl ModelParams {
    /// Named rate fields, in declaration order.
    pub fn rates(&self) -> [(&'static str, f64); 13] {
        [
            ("gamma_prime", self.gamma_prime),
            ("gamma_dec", self.gamma_dec),
            ("gamma_dec_prime", self.gamma_dec_prime),
            ("gamma_0", self.gamma_0),
            ("gamma_3", self.gamma_3),
            ("gamma_t1", self.gamma_t1),
            ("gamma_t2", self.gamma_t2),
            ("gamma_t11", self.gamma_t11),
            ("gamma_t12", self.gamma_t12),
            ("gamma_4", self.gamma_4),
            ("gamma_4_prime", self.gamma_4_prime),
            ("gamma_5", self.gamma_5),
            ("gamma_6", self.gamma_6),
        ]
    }

    #[inline]
    pub fn m_total(&self) -> f64 {
        f64::from(self.tls_count)
    }

    /// Per-mode reservoir rate γ₁ = γ̃₁/𝒩.
    #[inline]
    pub fn gamma_1(&self) -> f64 {
        self.gamma_t1 / self.n_modes
    }

    #[inline]
    pub fn gamma_2(&self) -> f64 {
        self.gamma_t2 / self.n_modes
    }

    /// Per-mode channel rate γ₁₁ = γ̃₁₁/𝒩′.
    #[inline]
    pub fn gamma_11(&self) -> f64 {
        self.gamma_t11 / self.n_modes_wg
    }

    #[inline]
    pub fn gamma_12(&self) -> f64 {
        self.gamma_t12 / self.n_modes_wg
    }

    /// Per-mode black-body rate γ = γ′/𝒩.
    #[inline]
    pub fn gamma_bb(&self) -> f64 {
        self.gamma_prime / self.n_modes
    }

    /// Mode count of the photon subsystem carried in `field`.
    pub fn mode_count(&self, field: Field) -> f64 {
        match field {
            Field::NA | Field::NB => self.n_modes,
            Field::N1 | Field::N2 | Field::NC => self.n_modes_wg,
            Field::M => 1.0,
        }
    }

    /// Largest rate a state component can change with, per unit occupancy.
    pub fn rate_scale(&self) -> f64 {
        let m = self.m_total().max(1.0);
        let mut scale = 0.0_f64;
        for (_, r) in self.rates() {
            scale = scale.max(r);
        }
        scale = scale.max(self.gamma_prime * m);
        scale = scale.max(self.gamma_t1 * m).max(self.gamma_t2 * m);
        scale = scale.max(self.gamma_t11 * m).max(self.gamma_t12 * m);
        scale.max(self.n_modes_wg * self.gamma_5 * m).max(self.n_modes * self.gamma_6 * m)
    }

    /// Mode count implied by a tilded rate and its per-mode counterpart.
    pub fn mode_count_from_rates(gamma_tilde: f64, gamma_per_mode: f64) -> f64 {
        gamma_tilde / gamma_per_mode
    }
}

/// A rejected parameter set, naming the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("rate {0} is negative")]
    NegativeRate(&'static str),
    #[error("mode count {0} must be at least 1")]
    NonPositiveModeCount(&'static str),
    #[error("TLS count M must be positive")]
    NonPositiveM,
    #[error("initial inverse temperature x0 must be positive")]
    NonPositiveX0,
}

/// Non-fatal observations about a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// γ₀/γ_dec exceeds 𝒩, outside the perturbative second-order regime.
    NonPerturbativeRatio { ratio: f64, n_modes: f64 },
    /// 𝒩·γ_dec ≠ 𝒩′·γ_dec′, so the closed loop does not conserve excitations.
    ClosedLoopImbalance { reservoir_side: f64, channel_side: f64 },
    /// 𝒩_A·γ₄ ≠ 𝒩_C·γ₄′, so the embedded cavity does not conserve excitations.
    EmbeddedImbalance { inner_side: f64, outer_side: f64 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::NonPerturbativeRatio { ratio, n_modes } => write!(
                f,
                "gamma_0/gamma_dec = {ratio} exceeds N_modes = {n_modes}; second-order rates may not be perturbative"
            ),
            ParamWarning::ClosedLoopImbalance { reservoir_side, channel_side } => write!(
                f,
                "N_modes*gamma_dec = {reservoir_side} differs from N_modes_wg*gamma_dec_prime = {channel_side}; excitation number is not conserved"
            ),
            ParamWarning::EmbeddedImbalance { inner_side, outer_side } => write!(
                f,
                "N_modes*gamma_4 = {inner_side} differs from N_modes_wg*gamma_4_prime = {outer_side}; excitation number is not conserved"
            ),
        }
    }
}

/// Per-mode rates computed from the tilded ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub gamma_11: f64,
    pub gamma_12: f64,
    pub gamma_bb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    pub params: ModelParams,
    pub kind: ModelKind,
    pub derived: DerivedRates,
    pub warnings: Vec<ParamWarning>,
}

fn relative_mismatch(a: f64, b: f64) -> bool {
    (a - b).abs() > 1e-12 * a.abs().max(b.abs())
}

/// Checks a parameter set and computes the derived per-mode rates.
///
/// Every violated constraint is reported. Consistency problems that do not
/// make the equations ill-posed come back as warnings.
pub fn validate_params(p: &ModelParams, kind: ModelKind) -> Result<ValidatedParams, Vec<ParamError>> {
    let mut errors = Vec::new();
    for (name, rate) in p.rates() {
        // NaN fails the comparison as well.
        if !(rate >= 0.0) || !rate.is_finite() {
            errors.push(ParamError::NegativeRate(name));
        }
    }
    if !(p.n_modes >= 1.0) || !p.n_modes.is_finite() {
        errors.push(ParamError::NonPositiveModeCount("N_modes"));
    }
    if !(p.n_modes_wg >= 1.0) || !p.n_modes_wg.is_finite() {
        errors.push(ParamError::NonPositiveModeCount("N_modes_wg"));
    }
    if p.tls_count == 0 {
        errors.push(ParamError::NonPositiveM);
    }
    if !(p.x0 > 0.0) || !p.x0.is_finite() {
        errors.push(ParamError::NonPositiveX0);
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut warnings = Vec::new();
    if matches!(kind, ModelKind::OpenChiral | ModelKind::ClosedChiral) && p.gamma_dec > 0.0 {
        let ratio = p.gamma_0 / p.gamma_dec;
        if ratio > p.n_modes {
            warnings.push(ParamWarning::NonPerturbativeRatio { ratio, n_modes: p.n_modes });
        }
    }
    if kind == ModelKind::ClosedChiral {
        let reservoir_side = p.n_modes * p.gamma_dec;
        let channel_side = p.n_modes_wg * p.gamma_dec_prime;
        if relative_mismatch(reservoir_side, channel_side) {
            warnings.push(ParamWarning::ClosedLoopImbalance { reservoir_side, channel_side });
        }
    }
    if kind == ModelKind::EmbeddedCavity {
        let inner_side = p.n_modes * p.gamma_4;
        let outer_side = p.n_modes_wg * p.gamma_4_prime;
        if relative_mismatch(inner_side, outer_side) {
            warnings.push(ParamWarning::EmbeddedImbalance { inner_side, outer_side });
        }
    }

    Ok(ValidatedParams {
        params: *p,
        kind,
        derived: DerivedRates {
            gamma_1: p.gamma_1(),
            gamma_2: p.gamma_2(),
            gamma_11: p.gamma_11(),
            gamma_12: p.gamma_12(),
            gamma_bb: p.gamma_bb(),
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> ModelParams {
        ModelParams {
            gamma_dec: 1e4,
            gamma_0: 1e4,
            gamma_t11: 1e7,
            gamma_t1: 1e7,
            n_modes: ModelParams::mode_count_from_rates(1e7, 1e5),
            x0: 1.0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn fig2_parameters_are_valid() {
        let v = validate_params(&fig2(), ModelKind::OpenChiral).unwrap();
        assert_eq!(v.params.n_modes, 100.0);
        assert_eq!(v.derived.gamma_1, 1e5);
        assert_eq!(v.derived.gamma_2, 0.0);
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn static_system_is_valid() {
        let p = ModelParams { n_modes: 1.0, n_modes_wg: 1.0, tls_count: 1, x0: 1.0, ..Default::default() };
        for kind in ModelKind::ALL {
            assert!(validate_params(&p, kind).is_ok());
        }
    }

    #[test]
    fn negative_rate_names_field() {
        let p = ModelParams { gamma_0: -1.0, ..fig2() };
        let errs = validate_params(&p, ModelKind::OpenChiral).unwrap_err();
        assert_eq!(errs, [ParamError::NegativeRate("gamma_0")]);
    }

    #[test]
    fn all_errors_are_collected() {
        let p = ModelParams { gamma_5: -2.0, n_modes: 0.5, n_modes_wg: 0.0, tls_count: 0, x0: 0.0, ..fig2() };
        let errs = validate_params(&p, ModelKind::EmbeddedCavity).unwrap_err();
        assert_eq!(
            errs,
            [
                ParamError::NegativeRate("gamma_5"),
                ParamError::NonPositiveModeCount("N_modes"),
                ParamError::NonPositiveModeCount("N_modes_wg"),
                ParamError::NonPositiveM,
                ParamError::NonPositiveX0,
            ]
        );
    }

    #[test]
    fn large_second_order_ratio_warns_without_rejecting() {
        let p = ModelParams { gamma_0: 1e7, gamma_dec: 1e4, ..fig2() };
        let v = validate_params(&p, ModelKind::OpenChiral).unwrap();
        assert!(matches!(v.warnings[0], ParamWarning::NonPerturbativeRatio { .. }));
    }

    #[test]
    fn conservation_imbalance_warns() {
        let p = ModelParams { gamma_dec: 1e4, gamma_dec_prime: 2e4, ..Default::default() };
        let v = validate_params(&p, ModelKind::ClosedChiral).unwrap();
        assert!(matches!(v.warnings[0], ParamWarning::ClosedLoopImbalance { .. }));
        let p = ModelParams { gamma_4: 1e4, gamma_4_prime: 1e4, ..Default::default() };
        assert!(validate_params(&p, ModelKind::EmbeddedCavity).unwrap().warnings.is_empty());
    }

    #[test]
    fn validation_is_idempotent() {
        for kind in ModelKind::ALL {
            let once = validate_params(&fig2(), kind).unwrap();
            let twice = validate_params(&once.params, kind).unwrap();
            assert_eq!(once, twice);
        }
    }
}
