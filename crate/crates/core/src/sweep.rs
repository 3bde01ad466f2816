//! Distance sweeps and reconciliation campaigns.
//!
//! A sweep walks a distance grid, evaluates the channel model, the
//! photon-number bounds, and the privacy-amplification term at each point,
//! and assembles the baseline and improved secure rates into
//! [`SweepRecord`]s. A campaign runs the reconciliation engine on simulated
//! frames at one distance, collecting per-run leakage reports and aggregate
//! disclosure statistics.
//!
//! Determinism: every random stream is derived from the master seed and a
//! stable index (seed number, or quantized QBER for the empirical
//! error-correction table), never from thread identity — results are
//! byte-identical for any worker count.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cascade::{count_residual_errors, run_cascade, CascadeSchedule};
use crate::channel::{ChannelParams, Protocol};
use crate::decoy::{channel_observables, yield_bounds};
use crate::leakage::{self, BlockHistogram, LeakageReport};
use crate::mdi::{mdi_observables, mdi_yield_bounds};
use crate::permute::derive_seed;
use crate::sim::{simulate_frames, simulate_mdi_pairs, BitFrame, ProvenanceTag};
use crate::skr::{
    analytic_leak_terms, growth_pct, pa_term_bb84, pa_term_mdi, secure_rate, shannon_leak,
    EcMode, SweepRecord,
};
use crate::CoreError;

/// Seed-derivation domains (arbitrary distinct constants).
const EC_FRAME_DOMAIN: u64 = 0x4546_5246;
const CAMPAIGN_SIM_DOMAIN: u64 = 0x434d_5349;
const CAMPAIGN_CASCADE_DOMAIN: u64 = 0x434d_4341;

/// Default truncation depth of the yield-table LP.
pub const DEFAULT_N_CUT: usize = 7;

/// Full specification of a rate-vs-distance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocol: Protocol,
    /// Channel parameters; `distance_km` is overridden by the grid.
    pub params: ChannelParams,
    pub start_km: f64,
    pub end_km: f64,
    pub step_km: f64,
    /// How the improved reconciliation cost is obtained.
    pub ec_mode: EcMode,
    /// Error-correction efficiency f ≥ 1.
    pub f_ec: f64,
    /// Analytic-mode override for the length-one disclosure weight; `None`
    /// uses the full Shannon budget.
    pub frac1: Option<f64>,
    /// Longest block length whose disclosures get the multi-photon discount;
    /// `None` discounts every length.
    pub l_cap: Option<usize>,
    /// Reconciliation runs averaged per QBER point (empirical mode).
    pub seeds: u64,
    /// Frame length for empirical reconciliation runs.
    pub frame_size: usize,
    /// Master seed for every derived random stream.
    pub master_seed: u64,
    /// Yield-table truncation depth for the two-arm bounds.
    pub n_cut: usize,
    /// Worker threads; `None` uses the global thread pool.
    pub workers: Option<usize>,
}

impl SweepConfig {
    /// Reference sweep for a protocol: 0–150 km in 1 km steps, analytic
    /// reconciliation cost at f = 1.
    pub fn new(protocol: Protocol) -> Self {
        let params = match protocol {
            Protocol::Bb84 => ChannelParams::bb84_defaults(),
            Protocol::Mdi => ChannelParams::mdi_defaults(),
        };
        SweepConfig {
            protocol,
            params,
            start_km: 0.0,
            end_km: 150.0,
            step_km: 1.0,
            ec_mode: EcMode::Analytic,
            f_ec: 1.0,
            frac1: None,
            l_cap: Some(1),
            seeds: 16,
            frame_size: 10_000,
            master_seed: 7,
            n_cut: DEFAULT_N_CUT,
            workers: None,
        }
    }

    /// The distance grid: `start, start+step, …` up to (and including) `end`.
    pub fn distances(&self) -> Vec<f64> {
        let count = ((self.end_km - self.start_km) / self.step_km + 1e-9).floor() as usize;
        (0..=count).map(|i| self.start_km + i as f64 * self.step_km).collect()
    }

    /// Validates grid, EC, and channel parameters.
    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |field: &str, reason: String| CoreError::InvalidConfig {
            field: field.into(),
            reason,
        };
        if !(self.step_km > 0.0 && self.step_km.is_finite()) {
            return Err(bad("step_km", format!("must be positive, got {}", self.step_km)));
        }
        if !(self.end_km >= self.start_km && self.start_km >= 0.0) {
            return Err(bad(
                "distance_km",
                format!("need 0 <= start <= end, got {}..{}", self.start_km, self.end_km),
            ));
        }
        if self.f_ec < 1.0 {
            return Err(bad("f", format!("efficiency must be >= 1, got {}", self.f_ec)));
        }
        if self.seeds == 0 {
            return Err(bad("seeds", "must be >= 1".into()));
        }
        if self.frame_size < 2 {
            return Err(bad("frame_size", "must be >= 2".into()));
        }
        if self.n_cut == 0 {
            return Err(bad("n_cut", "must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(bad("workers", "must be >= 1 when given".into()));
        }
        self.params.validate()
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or inline on the
/// global pool.
fn with_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CoreError> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CoreError::Numerical(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Empirical-mode QBER grid: one reconciliation measurement per 10⁻⁴ of QBER.
fn quantize_qber(qber: f64) -> u32 {
    (qber * 1e4).round() as u32
}

/// Averaged disclosure weights measured by running reconciliation at one
/// QBER: `weights[l]` is the mean number of length-`l` disclosed index sets
/// per sifted bit.
#[derive(Debug, Clone, PartialEq)]
struct EcMeasurement {
    weights: BTreeMap<usize, f64>,
    frac1: f64,
    leak_all: f64,
}

/// Synthesizes a frame pair of length `n` with exactly `errors` disagreeing
/// positions, uniformly placed.
fn synthetic_pair(
    n: usize,
    errors: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(BitFrame, BitFrame), CoreError> {
    let alice_bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut positions: Vec<u32> = (0..n as u32).collect();
    for i in 0..errors.min(n) {
        let j = rng.random_range(i..n);
        positions.swap(i, j);
    }
    let mut bob_bits = alice_bits.clone();
    for &p in &positions[..errors.min(n)] {
        bob_bits[p as usize] = !bob_bits[p as usize];
    }
    // Provenance is irrelevant here: only the disclosure geometry is
    // measured, and it depends on error positions alone.
    let tags = vec![ProvenanceTag::Single; n];
    Ok((
        BitFrame::new(alice_bits, tags.clone())?,
        BitFrame::new(bob_bits, tags)?,
    ))
}

/// Measures the disclosed-block weights at one quantized QBER by averaging
/// reconciliation runs on synthetic exact-error-count frames.
fn measure_ec(cfg: &SweepConfig, key: u32) -> Result<EcMeasurement, CoreError> {
    let qber = f64::from(key) / 1e4;
    let n = cfg.frame_size;
    let errors = (qber * n as f64).round() as usize;
    let schedule = CascadeSchedule::from_qber(qber, n);
    let mut totals: BTreeMap<usize, usize> = BTreeMap::new();
    for s in 0..cfg.seeds {
        let seed = derive_seed(cfg.master_seed, EC_FRAME_DOMAIN, (u64::from(key) << 32) | s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (alice, bob) = synthetic_pair(n, errors, &mut rng)?;
        let outcome = run_cascade(&alice, &bob, &schedule, seed)?;
        for (l, c) in leakage::histogram(&outcome.ledger).counts {
            *totals.entry(l).or_insert(0) += c;
        }
    }
    let norm = (cfg.seeds as f64) * (n as f64);
    let weights: BTreeMap<usize, f64> =
        totals.into_iter().map(|(l, c)| (l, c as f64 / norm)).collect();
    let frac1 = weights.get(&1).copied().unwrap_or(0.0);
    let leak_all = weights.values().sum();
    Ok(EcMeasurement { weights, frac1, leak_all })
}

/// Improved reconciliation cost from measured weights: each length-`l` weight
/// is discounted by `1 − Δ^l` up to `l_cap`; longer blocks count in full.
fn discounted_leak(weights: &BTreeMap<usize, f64>, delta: f64, l_cap: Option<usize>) -> f64 {
    weights
        .iter()
        .map(|(&l, &w)| {
            let discount = match l_cap {
                Some(cap) if l > cap => 1.0,
                _ => 1.0 - delta.powi(l as i32),
            };
            w * discount
        })
        .sum()
}

/// The per-distance physics: gain, QBER, fraction bounds, and the PA term.
struct PointModel {
    gain: f64,
    qber: f64,
    delta0_max: f64,
    delta1_max: f64,
    delta_m_min: f64,
    pa_s: f64,
}

fn point_model(cfg: &SweepConfig, distance_km: f64) -> Result<PointModel, CoreError> {
    let p = cfg.params.at_distance(distance_km);
    match cfg.protocol {
        Protocol::Bb84 => {
            let obs = channel_observables::<f64>(&p)?;
            let bounds = yield_bounds(&obs, &p)?;
            let pa = pa_term_bb84(&obs, &bounds, p.mu)?;
            Ok(PointModel {
                gain: obs.q_mu,
                qber: obs.e_mu,
                delta0_max: bounds.delta0_max,
                delta1_max: bounds.delta1_max,
                delta_m_min: bounds.delta_m_min,
                pa_s: pa.pa_s,
            })
        }
        Protocol::Mdi => {
            let obs = mdi_observables(&p)?;
            let bounds = mdi_yield_bounds(&obs, cfg.n_cut)?;
            let pa = pa_term_mdi(&p, &obs)?;
            Ok(PointModel {
                gain: obs.q_mumu,
                qber: obs.e_mumu,
                // Everything with a vacuum component goes in the vacuum
                // column, so Δ_M^min = clamp(1 − Δ₀ − Δ₁) holds for both
                // protocols.
                delta0_max: bounds.delta00_max + bounds.delta01_max + bounds.delta10_max,
                delta1_max: bounds.delta11_max,
                delta_m_min: bounds.delta_mm_min,
                pa_s: pa.pa_s,
            })
        }
    }
}

fn sweep_point(
    cfg: &SweepConfig,
    distance_km: f64,
    ec_table: Option<&BTreeMap<u32, EcMeasurement>>,
) -> Result<SweepRecord, CoreError> {
    let m = point_model(cfg, distance_km)?;
    let (leak_orig, leak_improved) = match cfg.ec_mode {
        EcMode::Analytic => analytic_leak_terms(m.qber, cfg.f_ec, cfg.frac1, m.delta_m_min)?,
        EcMode::Empirical => {
            let table = ec_table.ok_or_else(|| {
                CoreError::Numerical("empirical sweep without an EC table".into())
            })?;
            let meas = table.get(&quantize_qber(m.qber)).ok_or_else(|| {
                CoreError::Numerical(format!(
                    "no EC measurement for QBER {:.4} at {distance_km} km",
                    m.qber
                ))
            })?;
            (
                shannon_leak(m.qber, cfg.f_ec)?,
                discounted_leak(&meas.weights, m.delta_m_min, cfg.l_cap),
            )
        }
    };
    let r_original = secure_rate(m.gain, m.pa_s, leak_orig);
    let r_improved = secure_rate(m.gain, m.pa_s, leak_improved);
    Ok(SweepRecord {
        distance_km,
        gain: m.gain,
        qber: m.qber,
        delta0_max: m.delta0_max,
        delta1_max: m.delta1_max,
        delta_m_min: m.delta_m_min,
        leak_all_rate: leak_orig,
        leak_actual_rate: leak_improved,
        r_original,
        r_improved,
        growth_pct: growth_pct(r_original, r_improved),
    })
}

/// Runs the full sweep. Records come back in distance order regardless of
/// scheduling; identical configs produce identical records.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, CoreError> {
    cfg.validate()?;
    let distances = cfg.distances();

    // Empirical mode measures reconciliation once per distinct QBER value;
    // keying the seeds by the quantized QBER (not the distance index) keeps
    // the table stable under grid changes.
    let ec_table: Option<BTreeMap<u32, EcMeasurement>> = match cfg.ec_mode {
        EcMode::Analytic => None,
        EcMode::Empirical => {
            let mut keys: BTreeSet<u32> = BTreeSet::new();
            for &d in &distances {
                keys.insert(quantize_qber(point_model(cfg, d)?.qber));
            }
            let keys: Vec<u32> = keys.into_iter().collect();
            let entries: Result<Vec<(u32, EcMeasurement)>, CoreError> =
                with_pool(cfg.workers, || {
                    keys.par_iter().map(|&k| Ok((k, measure_ec(cfg, k)?))).collect()
                })?;
            Some(entries?.into_iter().collect())
        }
    };

    with_pool(cfg.workers, || {
        distances
            .par_iter()
            .map(|&d| sweep_point(cfg, d, ec_table.as_ref()))
            .collect::<Result<Vec<_>, _>>()
    })?
}

/// One-distance reconciliation campaign on simulated frames.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub protocol: Protocol,
    /// Channel parameters at the campaign distance.
    pub params: ChannelParams,
    /// Sifted bits per run.
    pub frame_size: usize,
    /// Number of independent runs.
    pub seeds: u64,
    pub master_seed: u64,
    /// Discount cap for the leakage estimate (see [`SweepConfig::l_cap`]).
    pub l_cap: Option<usize>,
    /// Override for the multi-photon fraction bound; `None` derives it from
    /// the channel model at the campaign distance.
    pub delta_override: Option<f64>,
    /// Yield-table truncation depth (two-arm protocol only).
    pub n_cut: usize,
    pub workers: Option<usize>,
}

impl CampaignConfig {
    /// Reference campaign: 10⁴-bit frames at the protocol's default channel.
    pub fn new(protocol: Protocol) -> Self {
        let params = match protocol {
            Protocol::Bb84 => ChannelParams::bb84_defaults(),
            Protocol::Mdi => ChannelParams::mdi_defaults(),
        };
        CampaignConfig {
            protocol,
            params,
            frame_size: 10_000,
            seeds: 100,
            master_seed: 7,
            l_cap: Some(1),
            delta_override: None,
            n_cut: DEFAULT_N_CUT,
            workers: None,
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        if self.frame_size < 2 {
            return Err(CoreError::InvalidConfig {
                field: "frame_size".into(),
                reason: "must be >= 2".into(),
            });
        }
        if self.seeds == 0 {
            return Err(CoreError::InvalidConfig {
                field: "seeds".into(),
                reason: "must be >= 1".into(),
            });
        }
        if self.workers == Some(0) {
            return Err(CoreError::InvalidConfig {
                field: "workers".into(),
                reason: "must be >= 1 when given".into(),
            });
        }
        self.params.validate()
    }
}

/// One reconciliation run within a campaign.
#[derive(Debug, Clone)]
pub struct CampaignRun {
    /// Run number (0-based).
    pub seed_index: u64,
    /// Derived seed the frames were simulated from.
    pub sim_seed: u64,
    /// Leakage accounting for this run.
    pub report: LeakageReport,
    /// Fraction of disagreeing positions in the simulated frames.
    pub measured_qber: f64,
    /// Fraction of sifted bits tagged multi-photon.
    pub measured_delta_m: f64,
    /// Errors left after reconciliation.
    pub residual_errors: usize,
    /// Bit corrections applied.
    pub corrections: usize,
}

/// Campaign output: per-run rows plus pooled disclosure statistics.
#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub runs: Vec<CampaignRun>,
    /// Pooled length histogram of all disclosed blocks (`n` = total sifted
    /// bits across runs).
    pub aggregate: BlockHistogram,
    /// Pooled per-length counts of disclosed blocks lying entirely in the
    /// multi-photon set.
    pub aggregate_multi: BTreeMap<usize, usize>,
    /// Multi-photon fraction bound used in every run's leakage estimate.
    pub delta_m_min: f64,
    /// Channel-model QBER the schedule was sized for.
    pub model_qber: f64,
    /// Mean measured multi-photon tag fraction across runs.
    pub mean_measured_delta_m: f64,
}

fn campaign_run(
    cfg: &CampaignConfig,
    s: u64,
    schedule: &CascadeSchedule,
    delta: f64,
) -> Result<(CampaignRun, BlockHistogram, BTreeMap<usize, usize>), CoreError> {
    let sim_seed = derive_seed(cfg.master_seed, CAMPAIGN_SIM_DOMAIN, s);
    let (alice, bob, measured_qber, measured_delta_m) = match cfg.protocol {
        Protocol::Bb84 => {
            let run = simulate_frames(&cfg.params, cfg.frame_size, sim_seed)?;
            (run.alice, run.bob, run.measured_qber, run.measured_delta_m)
        }
        Protocol::Mdi => {
            let run = simulate_mdi_pairs(&cfg.params, cfg.frame_size, sim_seed)?;
            (run.alice, run.bob, run.measured_qber, run.measured_delta_mm)
        }
    };
    let cascade_seed = derive_seed(cfg.master_seed, CAMPAIGN_CASCADE_DOMAIN, s);
    let outcome = run_cascade(&alice, &bob, schedule, cascade_seed)?;
    let residual_errors = count_residual_errors(&alice, &outcome.corrected_bob);
    let report = leakage::report(&outcome.ledger, &alice.tags, delta, cfg.l_cap)?;
    let hist = leakage::histogram(&outcome.ledger);
    let multi = leakage::multi_histogram(&outcome.ledger, &alice.tags)?;
    Ok((
        CampaignRun {
            seed_index: s,
            sim_seed,
            report,
            measured_qber,
            measured_delta_m,
            residual_errors,
            corrections: outcome.corrections,
        },
        hist,
        multi,
    ))
}

/// Runs the campaign; run `i` is fully determined by `master_seed` and `i`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult, CoreError> {
    cfg.validate()?;
    let (model_qber, delta_bound) = match cfg.protocol {
        Protocol::Bb84 => {
            let obs = channel_observables::<f64>(&cfg.params)?;
            let bounds = yield_bounds(&obs, &cfg.params)?;
            (obs.e_mu, bounds.delta_m_min)
        }
        Protocol::Mdi => {
            let obs = mdi_observables(&cfg.params)?;
            let bounds = mdi_yield_bounds(&obs, cfg.n_cut)?;
            (obs.e_mumu, bounds.delta_mm_min)
        }
    };
    let delta = cfg.delta_override.unwrap_or(delta_bound);
    let schedule = CascadeSchedule::from_qber(model_qber, cfg.frame_size);

    let per_run: Result<Vec<_>, CoreError> = with_pool(cfg.workers, || {
        (0..cfg.seeds)
            .into_par_iter()
            .map(|s| campaign_run(cfg, s, &schedule, delta))
            .collect()
    })?;
    let per_run = per_run?;

    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut aggregate_multi: BTreeMap<usize, usize> = BTreeMap::new();
    let mut runs = Vec::with_capacity(per_run.len());
    let mut delta_m_sum = 0.0;
    for (run, hist, multi) in per_run {
        for (l, c) in hist.counts {
            *counts.entry(l).or_insert(0) += c;
        }
        for (l, c) in multi {
            *aggregate_multi.entry(l).or_insert(0) += c;
        }
        delta_m_sum += run.measured_delta_m;
        runs.push(run);
    }
    let aggregate = BlockHistogram { counts, n: cfg.frame_size * cfg.seeds as usize };
    let mean_measured_delta_m = delta_m_sum / runs.len() as f64;
    Ok(CampaignResult {
        runs,
        aggregate,
        aggregate_multi,
        delta_m_min: delta,
        model_qber,
        mean_measured_delta_m,
    })
}
