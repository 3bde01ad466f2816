//! Source and channel parameterization shared by the simulator and the
//! analytic models.

use crate::CoreError;

/// Which protocol a parameter set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Prepare-and-measure decoy-state BB84.
    Bb84,
    /// Measurement-device-independent QKD with a central measurement relay.
    Mdi,
}

impl Protocol {
    /// Lower-case name used in CLI flags and CSV metadata.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bb84 => "bb84",
            Protocol::Mdi => "mdi",
        }
    }
}

/// Source intensities, fiber loss, and detector parameters.
///
/// Distance semantics: for BB84, `distance_km` is the Alice→Bob fiber length
/// and the total transmittance is `eta_d · 10^(−α·L/10)`. For MDI,
/// `distance_km` is the length of EACH party's fiber to the measurement relay
/// (the symmetric half of the total separation, which is `2·distance_km`);
/// each arm's transmittance is `10^(−α·L/10)` with the detector efficiency
/// folded into the loss budget rather than applied separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Signal mean photon number μ.
    pub mu: f64,
    /// Weak-decoy mean photon number ν₁.
    pub nu1: f64,
    /// Vacuum(-like) decoy mean photon number ν₂ (weak but nonzero).
    pub nu2: f64,
    /// Fiber attenuation α in dB/km.
    pub alpha_db_per_km: f64,
    /// Fiber length in km (see distance semantics above).
    pub distance_km: f64,
    /// Dark-count probability per detection gate.
    pub dark_rate: f64,
    /// Detector efficiency η_d (BB84 only; MDI folds it into the loss budget).
    pub det_eff: f64,
    /// Intrinsic misalignment error probability for signal-driven detections.
    pub e_det: f64,
    /// Polarization misalignment of Alice's arm, radians (MDI only).
    pub theta_a: f64,
    /// Polarization misalignment of Bob's arm, radians (MDI only).
    pub theta_b: f64,
}

impl ChannelParams {
    /// Reference decoy-BB84 parameter set used by the bundled studies:
    /// μ=0.4, ν₁=0.1, ν₂=0.0007, α=0.20 dB/km, d=10⁻⁵, η_d=0.2, e_det=0.033.
    pub fn bb84_defaults() -> Self {
        ChannelParams {
            mu: 0.4,
            nu1: 0.1,
            nu2: 0.0007,
            alpha_db_per_km: 0.20,
            distance_km: 0.0,
            dark_rate: 1e-5,
            det_eff: 0.2,
            e_det: 0.033,
            theta_a: 0.0,
            theta_b: 0.0,
        }
    }

    /// Reference MDI parameter set used by the bundled studies:
    /// μ=0.4, ν₁=0.1, ν₂=0.0007, α=0.20 dB/km, d=10⁻⁶ per relay detector
    /// gate, θ_A=0.091, θ_B=−0.091 (misalignment error sin²(θ_A−θ_B)≈0.033).
    pub fn mdi_defaults() -> Self {
        ChannelParams {
            mu: 0.4,
            nu1: 0.1,
            nu2: 0.0007,
            alpha_db_per_km: 0.20,
            distance_km: 0.0,
            dark_rate: 1e-6,
            det_eff: 1.0,
            e_det: 0.033,
            theta_a: 0.091,
            theta_b: -0.091,
        }
    }

    /// Returns the same parameters at a different distance.
    pub fn at_distance(mut self, distance_km: f64) -> Self {
        self.distance_km = distance_km;
        self
    }

    /// Total BB84 transmittance η = η_d · 10^(−α·L/10).
    pub fn eta_bb84(&self) -> f64 {
        self.det_eff * 10f64.powf(-self.alpha_db_per_km * self.distance_km / 10.0)
    }

    /// Per-arm MDI transmittance 10^(−α·L/10); detector efficiency is part of
    /// the loss budget.
    pub fn eta_mdi_arm(&self) -> f64 {
        10f64.powf(-self.alpha_db_per_km * self.distance_km / 10.0)
    }

    /// MDI misalignment error probability sin²(θ_A − θ_B).
    pub fn e_align(&self) -> f64 {
        (self.theta_a - self.theta_b).sin().powi(2)
    }

    /// Validates physical ranges and the weak+vacuum intensity ordering
    /// ν₂ < ν₁ < μ.
    pub fn validate(&self) -> Result<(), CoreError> {
        let field = |f: &str, reason: &str| CoreError::InvalidConfig {
            field: f.into(),
            reason: reason.into(),
        };
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(field("mu", "must be positive and finite"));
        }
        if !(self.nu2 >= 0.0 && self.nu2 < self.nu1 && self.nu1 < self.mu) {
            return Err(field("nu1/nu2", "intensities must satisfy 0 <= nu2 < nu1 < mu"));
        }
        if !(self.alpha_db_per_km >= 0.0 && self.alpha_db_per_km.is_finite()) {
            return Err(field("alpha_db_per_km", "must be nonnegative and finite"));
        }
        if !(self.distance_km >= 0.0 && self.distance_km.is_finite()) {
            return Err(field("distance_km", "must be nonnegative and finite"));
        }
        for (name, p) in [
            ("dark_rate", self.dark_rate),
            ("det_eff", self.det_eff),
            ("e_det", self.e_det),
        ] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(field(name, "must be a probability in [0,1]"));
            }
        }
        if self.det_eff == 0.0 {
            return Err(field("det_eff", "must be positive"));
        }
        Ok(())
    }
}
