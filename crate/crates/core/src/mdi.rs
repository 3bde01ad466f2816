//! Photon-number-fraction bounds for the two-arm relay protocol.
//!
//! Both parties send phase-randomized weak coherent pulses over their own
//! fiber to a central measurement relay. Coincidence gains for each intensity
//! pair are Poisson mixtures of per-photon-pair yields `Y(nA, nB)`:
//!
//! `Q_{ab} = Σ_{nA,nB} P(nA; ι_a) P(nB; ι_b) Y(nA, nB)`.
//!
//! With three intensities per side there are nine observable gains. Bounding
//! any single yield — and through it the sifted-key fraction coming from each
//! small photon-number pair — is a linear program over the truncated yield
//! table `nA, nB ≤ N_cut`, with each gain constrained to a two-sided window
//! that accounts for the truncated Poisson tail. The multi-photon fraction of
//! the signal gain is then bounded below by one minus the maximized vacuum and
//! single-photon fractions.
//!
//! The channel model used for the gains themselves: each arm clicks with
//! probability `1 − (1−d)(1−η)ⁿ` for `n` photons (`d` the relay dark rate per
//! gate, `η` the arm transmittance), a coincidence requires both arms to
//! click, and the signal-pair error rate mixes the aligned-detection error
//! `sin²(θ_A − θ_B)` with a random half on dark-assisted coincidences.

use crate::channel::ChannelParams;
use crate::decoy::{clamp01_logged, ClampEvent};
use crate::poisson::poisson_pmf;
use crate::simplex::{solve_max, LpProblem, LpRow, LpSolution};
use crate::CoreError;

/// Feasibility margin added on both sides of each gain window: keeps
/// knife-edge instances (model-exact gains) strictly feasible in floating
/// point without materially loosening the bounds.
fn gain_window_margin(gain: f64) -> f64 {
    1e-12 + 1e-9 * gain
}

/// Coincidence observables of the two-arm channel at a fixed distance.
#[derive(Debug, Clone, PartialEq)]
pub struct MdiObservables {
    /// Per-side intensities `[μ, ν₁, ν₂]`, identical for both parties.
    pub intensities: [f64; 3],
    /// Coincidence gains `Q_{ab}` indexed by (Alice intensity, Bob intensity).
    pub gains: [[f64; 3]; 3],
    /// Signal-signal gain `Q_{μμ}` (same as `gains[0][0]`).
    pub q_mumu: f64,
    /// Signal-signal error rate `E_{μμ}`.
    pub e_mumu: f64,
    /// Per-arm transmittance.
    pub eta_arm: f64,
    /// Relay dark-count probability per gate.
    pub dark: f64,
}

/// Per-arm click probability for an `n`-photon pulse.
fn arm_click(n: usize, eta: f64, dark: f64) -> f64 {
    1.0 - (1.0 - dark) * (1.0 - eta).powi(n as i32)
}

/// Evaluates the two-arm channel model at the params' distance.
///
/// `params.distance_km` is each party's fiber length to the relay.
pub fn mdi_observables(params: &ChannelParams) -> Result<MdiObservables, CoreError> {
    params.validate()?;
    let eta = params.eta_mdi_arm();
    let d = params.dark_rate;
    let intensities = [params.mu, params.nu1, params.nu2];
    // Poisson mixture of the per-photon click probability in closed form:
    // Σ_n P(n;ι)(1−η)ⁿ = e^{−ηι}, so K(ι) = 1 − (1−d)e^{−ηι}.
    let k = |i: f64| 1.0 - (1.0 - d) * (-eta * i).exp();
    let mut gains = [[0.0; 3]; 3];
    for (a, &ia) in intensities.iter().enumerate() {
        for (b, &ib) in intensities.iter().enumerate() {
            gains[a][b] = k(ia) * k(ib);
        }
    }
    let q_mumu = gains[0][0];
    if q_mumu <= 0.0 {
        return Err(CoreError::domain(
            "signal-signal gain vanished; no coincidences at these parameters",
        ));
    }
    // Signal-driven double clicks happen with probability T², where
    // T = 1 − e^{−ημ} is one arm's signal click probability; those suffer the
    // alignment error, while dark-assisted coincidences are random.
    let t = 1.0 - (-eta * params.mu).exp();
    let e_mumu = (params.e_align() * t * t + 0.5 * (q_mumu - t * t)) / q_mumu;
    Ok(MdiObservables { intensities, gains, q_mumu, e_mumu, eta_arm: eta, dark: d })
}

/// Variable index of `Y(nA, nB)` in the truncated yield table.
fn yield_var(na: usize, nb: usize, n_cut: usize) -> usize {
    na * (n_cut + 1) + nb
}

/// Builds the truncated-yield LP shared by all four objectives.
///
/// Variables are `Y(nA, nB) ∈ [0,1]` for `nA, nB ≤ n_cut`; each of the nine
/// intensity pairs contributes one row
///
/// `Q − tail − w ≤ Σ P(nA;ι_a)P(nB;ι_b) Y(nA,nB) ≤ Q + w`,
///
/// where `tail` is the truncated Poisson mass (the dropped terms contribute
/// between 0 and `tail` to the untruncated gain) and `w` a small feasibility
/// margin. Rows are scaled by `1/Q` so every row is O(1) regardless of how
/// deep into the loss budget the instance sits.
pub fn build_yield_lp(obs: &MdiObservables, n_cut: usize) -> Result<LpProblem, CoreError> {
    if n_cut == 0 {
        return Err(CoreError::domain("yield table cutoff must be at least 1"));
    }
    let side = n_cut + 1;
    let nvars = side * side;
    let mut rows = Vec::with_capacity(9);
    for (a, &ia) in obs.intensities.iter().enumerate() {
        // Per-side pmf values are shared across the row's columns.
        let pa: Vec<f64> =
            (0..side).map(|n| poisson_pmf::<f64>(ia, n)).collect::<Result<_, _>>()?;
        for (b, &ib) in obs.intensities.iter().enumerate() {
            let pb: Vec<f64> =
                (0..side).map(|n| poisson_pmf::<f64>(ib, n)).collect::<Result<_, _>>()?;
            let q = obs.gains[a][b];
            if q <= 0.0 {
                return Err(CoreError::domain(format!(
                    "gain for intensity pair ({ia}, {ib}) is not positive"
                )));
            }
            let mut coeffs = vec![0.0; nvars];
            let mut head = 0.0;
            for na in 0..side {
                for nb in 0..side {
                    let p = pa[na] * pb[nb];
                    coeffs[yield_var(na, nb, n_cut)] = p / q;
                    head += p;
                }
            }
            let tail = (1.0 - head).max(0.0);
            let w = gain_window_margin(q);
            rows.push(LpRow {
                coeffs,
                lower: (q - tail - w) / q,
                upper: (q + w) / q,
            });
        }
    }
    Ok(LpProblem {
        objective: vec![0.0; nvars],
        col_lower: vec![0.0; nvars],
        col_upper: vec![1.0; nvars],
        rows,
    })
}

/// Maximizes one entry of the truncated yield table over the gain windows.
pub fn solve_yield_max(
    obs: &MdiObservables,
    target: (usize, usize),
    n_cut: usize,
) -> Result<LpSolution, CoreError> {
    if target.0 > n_cut || target.1 > n_cut {
        return Err(CoreError::domain(format!(
            "target yield ({}, {}) outside table cutoff {n_cut}",
            target.0, target.1
        )));
    }
    let mut lp = build_yield_lp(obs, n_cut)?;
    lp.objective[yield_var(target.0, target.1, n_cut)] = 1.0;
    solve_max(&lp)
}

/// LP-certified photon-number-fraction bounds for the signal-signal gain.
#[derive(Debug, Clone, PartialEq)]
pub struct MdiYieldBounds {
    /// Maximized yields for the four low-photon-number pairs.
    pub y00_max: f64,
    pub y01_max: f64,
    pub y10_max: f64,
    pub y11_max: f64,
    /// Upper bounds on the sifted fractions from those pairs.
    pub delta00_max: f64,
    pub delta01_max: f64,
    pub delta10_max: f64,
    pub delta11_max: f64,
    /// Lower bound on the multi-photon fraction:
    /// `clamp(1 − Δ₀₀ − Δ₀₁ − Δ₁₀ − Δ₁₁, 0, 1)`.
    pub delta_mm_min: f64,
    /// Worst duality gap across the four solves (optimality certificate).
    pub duality_gap_max: f64,
    /// Out-of-range clamps hit while forming the fraction bounds.
    pub clamp_events: Vec<ClampEvent>,
}

/// Runs the four yield maximizations and assembles the fraction bounds.
pub fn mdi_yield_bounds(obs: &MdiObservables, n_cut: usize) -> Result<MdiYieldBounds, CoreError> {
    let mu = obs.intensities[0];
    let q = obs.q_mumu;
    let mut gap: f64 = 0.0;
    let mut solve = |t: (usize, usize)| -> Result<f64, CoreError> {
        let s = solve_yield_max(obs, t, n_cut)?;
        gap = gap.max(s.duality_gap);
        Ok(s.objective)
    };
    let y00_max = solve((0, 0))?;
    let y01_max = solve((0, 1))?;
    let y10_max = solve((1, 0))?;
    let y11_max = solve((1, 1))?;

    // Signal-side Poisson weights of the four pairs.
    let p0 = (-mu).exp();
    let p1 = mu * (-mu).exp();
    let mut clamp_events = Vec::new();
    let mut frac = |name: &'static str, weight: f64, y: f64| {
        clamp01_logged(weight * y / q, name, &mut clamp_events)
    };
    let delta00_max = frac("delta00_max", p0 * p0, y00_max);
    let delta01_max = frac("delta01_max", p0 * p1, y01_max);
    let delta10_max = frac("delta10_max", p1 * p0, y10_max);
    let delta11_max = frac("delta11_max", p1 * p1, y11_max);
    // The residual is a fraction by construction; the clamp is part of the
    // bound's definition, not an anomaly, so it is not logged.
    let delta_mm_min =
        (1.0 - delta00_max - delta01_max - delta10_max - delta11_max).clamp(0.0, 1.0);

    Ok(MdiYieldBounds {
        y00_max,
        y01_max,
        y10_max,
        y11_max,
        delta00_max,
        delta01_max,
        delta10_max,
        delta11_max,
        delta_mm_min,
        duality_gap_max: gap,
        clamp_events,
    })
}

/// Model-true sifted fractions of the signal-signal gain:
/// `(Δ₀₀, Δ₀₁, Δ₁₀, Δ₁₁, Δ_MM)`, summing to one.
pub fn mdi_true_fractions(params: &ChannelParams) -> Result<(f64, f64, f64, f64, f64), CoreError> {
    let obs = mdi_observables(params)?;
    let eta = obs.eta_arm;
    let d = obs.dark;
    let mu = params.mu;
    let mut low = [[0.0; 2]; 2];
    for (na, row) in low.iter_mut().enumerate() {
        for (nb, v) in row.iter_mut().enumerate() {
            let y = arm_click(na, eta, d) * arm_click(nb, eta, d);
            *v = poisson_pmf::<f64>(mu, na)? * poisson_pmf::<f64>(mu, nb)? * y / obs.q_mumu;
        }
    }
    let d_mm = 1.0 - low[0][0] - low[0][1] - low[1][0] - low[1][1];
    Ok((low[0][0], low[0][1], low[1][0], low[1][1], d_mm))
}

/// Single-photon-pair yield and error rate of the channel model, used for the
/// privacy-amplification term: `Y₁₁ = (η + d(1−η))²` and
/// `e₁₁ = (e_align·η² + ½(Y₁₁ − η²)) / Y₁₁`.
pub fn single_pair_yield_and_error(params: &ChannelParams) -> Result<(f64, f64), CoreError> {
    params.validate()?;
    let eta = params.eta_mdi_arm();
    let d = params.dark_rate;
    let y_arm = eta + d * (1.0 - eta);
    let y11 = y_arm * y_arm;
    if y11 <= 0.0 {
        return Err(CoreError::domain(
            "single-photon-pair yield vanished; error rate undefined",
        ));
    }
    let e11 = (params.e_align() * eta * eta + 0.5 * (y11 - eta * eta)) / y11;
    Ok((y11, e11))
}

/// Plain-text dump of the yield LP: a header plus one line per gain row.
/// Intended for `--dump-lp` style diagnostics.
pub fn lp_dump(obs: &MdiObservables, n_cut: usize) -> Result<String, CoreError> {
    use std::fmt::Write as _;
    let lp = build_yield_lp(obs, n_cut)?;
    let side = n_cut + 1;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "yield LP: {} variables Y(nA,nB), nA,nB <= {n_cut}, bounds [0,1]; {} gain rows (scaled by 1/Q)",
        side * side,
        lp.rows.len()
    );
    let _ = writeln!(out, "variable order: v = nA*{side} + nB");
    for (idx, row) in lp.rows.iter().enumerate() {
        let ia = obs.intensities[idx / 3];
        let ib = obs.intensities[idx % 3];
        let _ = write!(
            out,
            "pair a={ia:.6} b={ib:.6} lo={:.12e} hi={:.12e} coeffs=",
            row.lower, row.upper
        );
        for (v, c) in row.coeffs.iter().enumerate() {
            if v > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{c:.12e}");
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const N_CUT: usize = 7;

    fn mdi_at(km: f64) -> MdiObservables {
        mdi_observables(&ChannelParams::mdi_defaults().at_distance(km)).unwrap()
    }

    #[test]
    fn test_observables_at_zero_distance() {
        let obs = mdi_at(0.0);
        assert_relative_eq!(obs.q_mumu, 0.10868931402855612, max_relative = 1e-12);
        assert_relative_eq!(obs.e_mumu, 0.0327617783523751, max_relative = 1e-12);
        assert_abs_diff_eq!(obs.eta_arm, 1.0, epsilon = 1e-15);
        assert_eq!(obs.q_mumu, obs.gains[0][0]);
    }

    #[test]
    fn test_error_rate_vanishes_without_misalignment_or_darks() {
        let mut p = ChannelParams::mdi_defaults().at_distance(10.0);
        p.theta_b = p.theta_a; // perfectly aligned arms
        p.dark_rate = 0.0;
        let obs = mdi_observables(&p).unwrap();
        assert_abs_diff_eq!(obs.e_mumu, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn test_far_distance_gain_approaches_dark_floor() {
        let p = ChannelParams::mdi_defaults().at_distance(300.0);
        let obs = mdi_observables(&p).unwrap();
        let eta = p.eta_mdi_arm();
        // K(μ) ≈ d + ημ when both are tiny.
        let approx_gain = (p.dark_rate + eta * p.mu).powi(2);
        assert_relative_eq!(obs.gains[0][0], approx_gain, max_relative = 1e-2);
    }

    #[test]
    fn test_lossless_single_pair_yield_hits_box_cap() {
        // At zero distance every single-photon pair is detected, so the LP
        // can only certify the trivial cap Y(1,1) ≤ 1.
        let s = solve_yield_max(&mdi_at(0.0), (1, 1), N_CUT).unwrap();
        assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-9);
        assert!(s.duality_gap < 1e-8);
    }

    #[test]
    fn test_known_yield_table_is_recovered() {
        // Gains synthesized from a known truncated yield table (no tail mass):
        // the table is feasible, so each maximized entry must sit at or just
        // above its true value — the nine windows pin four unknowns tightly.
        let truth = [[0.2, 0.5], [0.4, 0.8]];
        let intensities = [0.4, 0.1, 0.0007];
        let mut gains = [[0.0; 3]; 3];
        for (a, &ia) in intensities.iter().enumerate() {
            for (b, &ib) in intensities.iter().enumerate() {
                let mut q = 0.0;
                for na in 0..2 {
                    for nb in 0..2 {
                        q += poisson_pmf::<f64>(ia, na).unwrap()
                            * poisson_pmf::<f64>(ib, nb).unwrap()
                            * truth[na][nb];
                    }
                }
                gains[a][b] = q;
            }
        }
        let obs = MdiObservables {
            intensities,
            gains,
            q_mumu: gains[0][0],
            e_mumu: 0.0,
            eta_arm: 0.0,
            dark: 0.0,
        };
        for (na, nb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = solve_yield_max(&obs, (na, nb), 1).unwrap();
            let t = truth[na][nb];
            assert!(
                s.objective >= t - 1e-9 && s.objective <= t + 1e-3,
                "Y({na},{nb}) recovered as {} vs true {t}",
                s.objective
            );
        }
    }

    #[test]
    fn test_multi_pair_fraction_bound_frozen_values() {
        let b0 = mdi_yield_bounds(&mdi_at(0.0), N_CUT).unwrap();
        assert_relative_eq!(b0.delta_mm_min, 0.3385458525645868, max_relative = 1e-6);
        let b50 = mdi_yield_bounds(&mdi_at(50.0), N_CUT).unwrap();
        assert_relative_eq!(b50.delta_mm_min, 0.51867593763267261, max_relative = 1e-5);
    }

    #[test]
    fn test_bounds_are_sound_against_model_truth() {
        for km in [0.0, 25.0, 50.0, 100.0] {
            let p = ChannelParams::mdi_defaults().at_distance(km);
            let b = mdi_yield_bounds(&mdi_observables(&p).unwrap(), N_CUT).unwrap();
            let (d00, d01, d10, d11, dmm) = mdi_true_fractions(&p).unwrap();
            assert!(b.delta00_max >= d00 - 1e-12, "{km} km vacuum-pair fraction");
            assert!(b.delta01_max >= d01 - 1e-12, "{km} km (0,1) fraction");
            assert!(b.delta10_max >= d10 - 1e-12, "{km} km (1,0) fraction");
            assert!(b.delta11_max >= d11 - 1e-12, "{km} km (1,1) fraction");
            assert!(b.delta_mm_min <= dmm + 1e-12, "{km} km multi-pair fraction");
        }
    }

    #[test]
    fn test_true_fractions_sum_to_one() {
        let (d00, d01, d10, d11, dmm) =
            mdi_true_fractions(&ChannelParams::mdi_defaults().at_distance(30.0)).unwrap();
        assert_abs_diff_eq!(d00 + d01 + d10 + d11 + dmm, 1.0, epsilon = 1e-12);
        assert!(dmm > 0.0 && dmm < 1.0);
    }

    #[test]
    fn test_duality_gap_certificates() {
        for km in [0.0, 50.0, 100.0] {
            let b = mdi_yield_bounds(&mdi_at(km), N_CUT).unwrap();
            assert!(b.duality_gap_max < 1e-8, "{km} km gap {}", b.duality_gap_max);
        }
    }

    #[test]
    fn test_deeper_truncation_only_tightens() {
        // A larger table cutoff shrinks the Poisson tail, narrowing every
        // window: the certified multi-pair fraction can only grow.
        let obs = mdi_at(50.0);
        let mut last = 0.0;
        for cut in 2..=7 {
            let b = mdi_yield_bounds(&obs, cut).unwrap();
            assert!(
                b.delta_mm_min >= last - 1e-9,
                "cutoff {cut} loosened the bound: {} < {last}",
                b.delta_mm_min
            );
            last = b.delta_mm_min;
        }
    }

    #[test]
    fn test_single_pair_yield_and_error() {
        let p = ChannelParams::mdi_defaults();
        let (y11, e11) = single_pair_yield_and_error(&p).unwrap();
        assert_abs_diff_eq!(y11, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e11, 0.032759878331091605, max_relative = 1e-12);
        // At distance, dark-assisted coincidences push the error above the
        // pure alignment value.
        let far = p.at_distance(150.0);
        let (y11_far, e11_far) = single_pair_yield_and_error(&far).unwrap();
        assert!(y11_far < 1e-5);
        assert!(e11_far > far.e_align());
        assert!(e11_far < 0.5);
    }

    #[test]
    fn test_lp_dump_shape() {
        let dump = lp_dump(&mdi_at(10.0), 3).unwrap();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 2 + 9);
        assert!(lines[0].contains("16 variables"));
        assert!(lines[2].starts_with("pair a=0.4"));
    }

    #[test]
    fn test_rejects_out_of_range_target() {
        let obs = mdi_at(0.0);
        assert!(solve_yield_max(&obs, (2, 0), 2).is_ok());
        assert!(solve_yield_max(&obs, (3, 0), 2).is_err());
        assert!(solve_yield_max(&obs, (8, 0), 7).is_err());
    }
}
