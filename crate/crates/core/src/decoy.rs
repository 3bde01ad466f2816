//! Weak+vacuum decoy-state analysis for prepare-and-measure BB84: analytic
//! channel observables and the photon-number-fraction bounds Δ₀^max, Δ₁^max,
//! Δ_M^min.
//!
//! Channel model: total transmittance `η = η_d·10^(−αL/10)`; background
//! yield `Y₀ = d`; gain `Q_ι = Y₀ + 1 − e^(−η·ι)` per intensity `ι`; error
//! gain `E_μ·Q_μ = ½Y₀ + e_det(1 − e^(−ημ))` (background errors are random,
//! photon detections err at the misalignment rate).
//!
//! Bounds (two-decoy standard forms, ν₁ > ν₂):
//! `Y₁^max = (Q_{ν₁}e^{ν₁} − Q_{ν₂}e^{ν₂})/(ν₁−ν₂)`,
//! `Y₀^L = max((ν₁Q_{ν₂}e^{ν₂} − ν₂Q_{ν₁}e^{ν₁})/(ν₁−ν₂), 0)`,
//! `Y₁^L = μ/(μν₁−μν₂−ν₁²+ν₂²)·[Q_{ν₁}e^{ν₁} − Q_{ν₂}e^{ν₂}
//!          − (ν₁²−ν₂²)/μ²·(Q_μe^{μ} − Y₀^L)]`,
//! `Y₀^max = Q_{ν₂}e^{ν₂} − Y₁^min·ν₂`, then
//! `Δ₁^max = Y₁^max·μe^{−μ}/Q_μ`, `Δ₀^max = Y₀^max·e^{−μ}/Q_μ`, and
//! `Δ_M^min = clamp(1 − Δ₀^max − Δ₁^max, 0, 1)`.
//!
//! Every bound is clamped to [0,1]; clamps outside the formulas' own
//! `max(·,0)` terms are recorded as [`ClampEvent`]s since they indicate the
//! finite-precision regime near the cutoff distance.

use crate::channel::ChannelParams;
use crate::real::Real;
use crate::CoreError;

/// Record of a bound forced back into physical range.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampEvent {
    /// Name of the clamped quantity.
    pub quantity: &'static str,
    /// Raw (out-of-range) value before clamping.
    pub raw_value: f64,
}

/// Clamp to [0,1], logging when the raw value was outside.
pub(crate) fn clamp01_logged<T: Real>(
    raw: T,
    quantity: &'static str,
    events: &mut Vec<ClampEvent>,
) -> T {
    if raw < T::zero() || raw > T::one() {
        events.push(ClampEvent { quantity, raw_value: raw.to_f64_lossy() });
    }
    raw.max(T::zero()).min(T::one())
}

/// Analytic channel observables at a fixed distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bb84Observables<T> {
    /// Signal gain Q_μ.
    pub q_mu: T,
    /// Decoy gain Q_{ν₁}.
    pub q_nu1: T,
    /// Weak-decoy gain Q_{ν₂}.
    pub q_nu2: T,
    /// Signal error rate E_μ.
    pub e_mu: T,
    /// Total transmittance (detector efficiency included).
    pub eta: T,
}

/// Yield and photon-number-fraction bounds from the decoy observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Bb84YieldBounds<T> {
    /// Upper bound on the single-photon yield.
    pub y1_max: T,
    /// Lower bound on the single-photon yield.
    pub y1_min: T,
    /// Lower bound on the background yield (formula-intrinsic ≥ 0).
    pub y0_min: T,
    /// Upper bound on the background yield.
    pub y0_max: T,
    /// Upper bound on the single-photon fraction of sifted bits.
    pub delta1_max: T,
    /// Upper bound on the vacuum fraction of sifted bits.
    pub delta0_max: T,
    /// Lower bound on the multi-photon fraction: clamp(1 − Δ₀^max − Δ₁^max).
    pub delta_m_min: T,
    /// Out-of-range clamps encountered while forming the bounds.
    pub clamp_events: Vec<ClampEvent>,
}

/// Evaluates the analytic channel model at the params' distance.
pub fn channel_observables<T: Real>(
    params: &ChannelParams,
) -> Result<Bb84Observables<T>, CoreError> {
    params.validate()?;
    let r = T::real;
    let ten = r(10.0);
    let eta = r(params.det_eff)
        * ten.powf(-(r(params.alpha_db_per_km) * r(params.distance_km)) / ten);
    let y0 = r(params.dark_rate);
    let gain = |i: T| y0 + T::one() - (-eta * i).exp();
    let q_mu = gain(r(params.mu));
    let eq = y0 / r(2.0) + r(params.e_det) * (T::one() - (-eta * r(params.mu)).exp());
    Ok(Bb84Observables {
        q_mu,
        q_nu1: gain(r(params.nu1)),
        q_nu2: gain(r(params.nu2)),
        e_mu: eq / q_mu,
        eta,
    })
}

fn decoy_intensities<T: Real>(params: &ChannelParams) -> Result<(T, T, T), CoreError> {
    if params.nu1 <= params.nu2 {
        return Err(CoreError::domain(format!(
            "decoy intensities must satisfy nu1 > nu2, got {} <= {}",
            params.nu1, params.nu2
        )));
    }
    Ok((T::real(params.mu), T::real(params.nu1), T::real(params.nu2)))
}

fn y1_upper_raw<T: Real>(obs: &Bb84Observables<T>, nu1: T, nu2: T) -> T {
    (obs.q_nu1 * nu1.exp() - obs.q_nu2 * nu2.exp()) / (nu1 - nu2)
}

/// Upper bound on the single-photon yield, clamped to [0,1].
pub fn y1_upper<T: Real>(
    obs: &Bb84Observables<T>,
    params: &ChannelParams,
) -> Result<T, CoreError> {
    let (_, nu1, nu2) = decoy_intensities::<T>(params)?;
    Ok(y1_upper_raw(obs, nu1, nu2).max(T::zero()).min(T::one()))
}

fn y0_upper_raw<T: Real>(obs: &Bb84Observables<T>, nu2: T, y1_min: T) -> T {
    obs.q_nu2 * nu2.exp() - y1_min * nu2
}

/// Upper bound on the background yield given a single-photon lower bound,
/// clamped to [0,1].
pub fn y0_upper<T: Real>(obs: &Bb84Observables<T>, params: &ChannelParams, y1_min: T) -> T {
    y0_upper_raw(obs, T::real(params.nu2), y1_min)
        .max(T::zero())
        .min(T::one())
}

/// Lower bound on the background yield. The `max(·,0)` is part of the bound's
/// formula (not a logged clamp).
pub fn y0_lower<T: Real>(obs: &Bb84Observables<T>, params: &ChannelParams) -> Result<T, CoreError> {
    let (_, nu1, nu2) = decoy_intensities::<T>(params)?;
    let raw = (nu1 * obs.q_nu2 * nu2.exp() - nu2 * obs.q_nu1 * nu1.exp()) / (nu1 - nu2);
    Ok(raw.max(T::zero()))
}

fn y1_lower_raw<T: Real>(obs: &Bb84Observables<T>, mu: T, nu1: T, nu2: T, y0_min: T) -> T {
    let lead = mu / (mu * nu1 - mu * nu2 - nu1 * nu1 + nu2 * nu2);
    lead * (obs.q_nu1 * nu1.exp()
        - obs.q_nu2 * nu2.exp()
        - ((nu1 * nu1 - nu2 * nu2) / (mu * mu)) * (obs.q_mu * mu.exp() - y0_min))
}

/// All yield and fraction bounds from one set of observables.
///
/// # Errors
/// [`CoreError::Domain`] for Q_μ ≤ 0 or a non-increasing decoy pair.
pub fn yield_bounds<T: Real>(
    obs: &Bb84Observables<T>,
    params: &ChannelParams,
) -> Result<Bb84YieldBounds<T>, CoreError> {
    if obs.q_mu <= T::zero() {
        return Err(CoreError::domain("signal gain Q_mu must be positive"));
    }
    let (mu, nu1, nu2) = decoy_intensities::<T>(params)?;
    let mut events = Vec::new();

    let y1_max = clamp01_logged(y1_upper_raw(obs, nu1, nu2), "y1_max", &mut events);
    let y0_min = y0_lower(obs, params)?;
    let y1_min = clamp01_logged(y1_lower_raw(obs, mu, nu1, nu2, y0_min), "y1_min", &mut events);
    let y0_max = clamp01_logged(y0_upper_raw(obs, nu2, y1_min), "y0_max", &mut events);

    let exp_neg_mu = (-mu).exp();
    let delta1_max =
        clamp01_logged(y1_max * mu * exp_neg_mu / obs.q_mu, "delta1_max", &mut events);
    let delta0_max = clamp01_logged(y0_max * exp_neg_mu / obs.q_mu, "delta0_max", &mut events);
    // The identity defining the multi-photon floor carries its own clamp.
    let delta_m_min =
        (T::one() - delta0_max - delta1_max).max(T::zero()).min(T::one());

    Ok(Bb84YieldBounds {
        y1_max,
        y1_min,
        y0_min,
        y0_max,
        delta1_max,
        delta0_max,
        delta_m_min,
        clamp_events: events,
    })
}

/// Ground-truth photon-number fractions `(Δ₀, Δ₁, Δ_M)` of the analytic
/// model itself, for soundness comparisons.
///
/// Per-photon-number yields `Y_n = Y₀ + 1 − (1−η)ⁿ` reproduce every analytic
/// gain exactly under the Poisson mixture, so the three fractions sum to 1
/// by construction.
pub fn true_fractions<T: Real>(params: &ChannelParams) -> Result<(T, T, T), CoreError> {
    let obs = channel_observables::<T>(params)?;
    let r = T::real;
    let mu = r(params.mu);
    let y0 = r(params.dark_rate);
    let p0 = (-mu).exp();
    let p1 = mu * p0;
    let yield_n = |n: i32| y0 + T::one() - (T::one() - obs.eta).powi(n);
    let d0 = p0 * yield_n(0) / obs.q_mu;
    let d1 = p1 * yield_n(1) / obs.q_mu;
    Ok((d0, d1, T::one() - d0 - d1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig_params(l_km: f64) -> ChannelParams {
        ChannelParams::bb84_defaults().at_distance(l_km)
    }

    #[test]
    fn test_observables_frozen_values_at_zero_km() {
        let obs = channel_observables::<f64>(&fig_params(0.0)).unwrap();
        assert_relative_eq!(obs.q_mu, 0.07689365361336431, epsilon = 1e-15);
        assert_relative_eq!(obs.q_nu1, 0.019811326693244813, epsilon = 1e-15);
        assert_relative_eq!(obs.q_nu2, 0.00014999020045736167, epsilon = 1e-15);
        assert_relative_eq!(obs.e_mu, 0.033060733230644491, epsilon = 1e-13);
        assert_relative_eq!(obs.eta, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn test_gains_ordered_by_intensity() {
        for l in [0.0, 50.0, 100.0, 150.0] {
            let obs = channel_observables::<f64>(&fig_params(l)).unwrap();
            assert!(obs.q_nu2 <= obs.q_nu1 && obs.q_nu1 <= obs.q_mu, "at {l} km");
        }
    }

    #[test]
    fn test_vanishing_source_gives_vanishing_gain() {
        let mut p = fig_params(0.0);
        p.mu = 1e-12;
        p.nu1 = 5e-13;
        p.nu2 = 1e-13;
        p.dark_rate = 0.0;
        let obs = channel_observables::<f64>(&p).unwrap();
        assert!(obs.q_mu < 1e-11);
    }

    #[test]
    fn test_no_noise_sources_no_errors() {
        let mut p = fig_params(0.0);
        p.e_det = 0.0;
        p.dark_rate = 0.0;
        let obs = channel_observables::<f64>(&p).unwrap();
        assert_eq!(obs.e_mu, 0.0);
    }

    #[test]
    fn test_y1_upper_tight_on_single_photon_channel() {
        // If only single photons ever arrive with yield 0.1, the gains are
        // Q_ν = 0.1·ν·e^{−ν} and the bound recovers 0.1 exactly.
        let p = fig_params(0.0);
        let y1 = 0.1f64;
        let obs = Bb84Observables {
            q_mu: y1 * p.mu * (-p.mu).exp(),
            q_nu1: y1 * p.nu1 * (-p.nu1).exp(),
            q_nu2: y1 * p.nu2 * (-p.nu2).exp(),
            e_mu: 0.0,
            eta: 0.0,
        };
        assert_relative_eq!(y1_upper(&obs, &p).unwrap(), y1, epsilon = 1e-12);
    }

    #[test]
    fn test_y1_upper_zero_gains() {
        let p = fig_params(0.0);
        let obs = Bb84Observables { q_mu: 0.0, q_nu1: 0.0, q_nu2: 0.0, e_mu: 0.0, eta: 0.0 };
        assert_eq!(y1_upper(&obs, &p).unwrap(), 0.0);
    }

    #[test]
    fn test_y1_upper_rejects_equal_decoys() {
        let mut p = fig_params(0.0);
        let obs = channel_observables::<f64>(&p).unwrap();
        p.nu2 = p.nu1;
        assert!(y1_upper(&obs, &p).is_err());
    }

    #[test]
    fn test_y0_upper_weakest_and_tight_cases() {
        let p = fig_params(0.0);
        let obs = channel_observables::<f64>(&p).unwrap();
        // Y₁^min = 0: weakest bound.
        assert_relative_eq!(
            y0_upper(&obs, &p, 0.0),
            obs.q_nu2 * p.nu2.exp(),
            epsilon = 1e-15
        );
        // Vacuum-only channel: gains Y₀e^{−ι} recover Y₀ exactly.
        let y0 = 3e-4f64;
        let vac = Bb84Observables {
            q_mu: y0 * (-p.mu).exp(),
            q_nu1: y0 * (-p.nu1).exp(),
            q_nu2: y0 * (-p.nu2).exp(),
            e_mu: 0.5,
            eta: 0.0,
        };
        assert_relative_eq!(y0_upper(&vac, &p, 0.0), y0, epsilon = 1e-12);
        // Negative intermediate clamps to 0.
        assert_eq!(y0_upper(&vac, &p, 1.0), 0.0);
    }

    #[test]
    fn test_yield_bounds_frozen_values_at_zero_km() {
        let p = fig_params(0.0);
        let obs = channel_observables::<f64>(&p).unwrap();
        let b = yield_bounds(&obs, &p).unwrap();
        assert_relative_eq!(b.y1_max, 0.21898093534255889, epsilon = 1e-13);
        assert_eq!(b.y0_min, 0.0); // raw value negative; intrinsic max(·,0)
        assert_relative_eq!(b.y1_min, 0.19616994824167927, epsilon = 1e-13);
        assert_relative_eq!(b.y0_max, 1.27762665846814e-05, epsilon = 1e-12);
        assert_relative_eq!(b.delta1_max, 0.763586089420724, epsilon = 1e-13);
        assert_relative_eq!(b.delta0_max, 1.1137704092290343e-04, epsilon = 1e-12);
        assert_relative_eq!(b.delta_m_min, 0.23630253353835307, epsilon = 1e-13);
        assert!(b.clamp_events.is_empty());
    }

    #[test]
    fn test_yield_bounds_frozen_multi_floor_along_sweep() {
        for (l, expected) in [(50.0, 0.25617716377302779), (100.0, 0.25583313694831578), (150.0, 0.23518606839239453)] {
            let p = fig_params(l);
            let obs = channel_observables::<f64>(&p).unwrap();
            let b = yield_bounds(&obs, &p).unwrap();
            assert_relative_eq!(b.delta_m_min, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn test_true_fractions_frozen_and_normalized() {
        let p = fig_params(0.0);
        let (d0, d1, dm) = true_fractions::<f64>(&p).unwrap();
        assert_relative_eq!(d0, 8.717495066764877e-05, epsilon = 1e-12);
        assert_relative_eq!(d1, 0.6974344753168885, epsilon = 1e-13);
        assert_relative_eq!(dm, 0.3024783497324438, epsilon = 1e-12);
        assert_relative_eq!(d0 + d1 + dm, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn test_bounds_sound_against_model_truth() {
        for l in [0.0, 25.0, 50.0, 100.0, 150.0] {
            let p = fig_params(l);
            let obs = channel_observables::<f64>(&p).unwrap();
            let b = yield_bounds(&obs, &p).unwrap();
            let (d0t, d1t, dmt) = true_fractions::<f64>(&p).unwrap();
            assert!(b.delta0_max >= d0t, "Δ₀ bound unsound at {l} km");
            assert!(b.delta1_max >= d1t, "Δ₁ bound unsound at {l} km");
            assert!(b.delta_m_min <= dmt, "Δ_M floor unsound at {l} km");
        }
    }

    #[test]
    fn test_no_clamp_events_below_cutoff() {
        for l in [0.0, 50.0, 100.0, 140.0] {
            let p = fig_params(l);
            let obs = channel_observables::<f64>(&p).unwrap();
            let b = yield_bounds(&obs, &p).unwrap();
            assert!(b.clamp_events.is_empty(), "unexpected clamp at {l} km: {:?}", b.clamp_events);
        }
    }

    #[test]
    fn test_vanishing_intensity_floor_vanishes() {
        let mut p = fig_params(0.0);
        p.mu = 1e-4;
        p.nu1 = 5e-5;
        p.nu2 = 1e-9;
        p.dark_rate = 1e-9;
        let obs = channel_observables::<f64>(&p).unwrap();
        let b = yield_bounds(&obs, &p).unwrap();
        assert!(b.delta_m_min < 1e-3, "Δ_M^min = {}", b.delta_m_min);
    }

    #[test]
    fn test_zero_gain_rejected() {
        let p = fig_params(0.0);
        let obs = Bb84Observables { q_mu: 0.0, q_nu1: 0.0, q_nu2: 0.0, e_mu: 0.0, eta: 0.0 };
        assert!(yield_bounds(&obs, &p).is_err());
    }

    #[test]
    fn test_f32_observables_agree_with_f64() {
        let p = fig_params(0.0);
        let o32 = channel_observables::<f32>(&p).unwrap();
        let o64 = channel_observables::<f64>(&p).unwrap();
        assert_relative_eq!(o32.q_mu as f64, o64.q_mu, epsilon = 1e-6);
        assert_relative_eq!(o32.e_mu as f64, o64.e_mu, epsilon = 1e-5);
    }
}
