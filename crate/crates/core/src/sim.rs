//! Monte-Carlo simulation of the source–channel–detector chain.
//!
//! Every sifted bit is tagged with its originating pulse's photon class, so
//! downstream accounting can compute exactly which disclosed parity blocks
//! fell entirely inside the multi-photon set — the ground truth that the
//! decoy and MDI bounds are tested against.
//!
//! Basis sifting is not simulated bit-by-bit: it is i.i.d. thinning and does
//! not affect per-sifted-bit leakage accounting, so the sifting factor enters
//! only the key-rate formula. Eavesdropper behavior is likewise not
//! simulated; MULTI tags stand in for "fully known to the eavesdropper via a
//! photon-number-splitting attack".

use crate::channel::ChannelParams;
use crate::permute::derive_seed;
use crate::poisson::sample_poisson;
use crate::CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::io::{self, Read, Write};

/// Photon-class provenance of one sifted bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProvenanceTag {
    /// Source emitted zero photons; the detection was dark-count-driven.
    Vacuum,
    /// Exactly one photon left the source.
    Single,
    /// Two or more photons left the source (eavesdropper-readable).
    Multi,
}

impl ProvenanceTag {
    fn from_photon_number(n: u32) -> Self {
        match n {
            0 => ProvenanceTag::Vacuum,
            1 => ProvenanceTag::Single,
            _ => ProvenanceTag::Multi,
        }
    }

    fn to_bits(self) -> u64 {
        match self {
            ProvenanceTag::Vacuum => 0,
            ProvenanceTag::Single => 1,
            ProvenanceTag::Multi => 2,
        }
    }

    fn from_bits(b: u64) -> Result<Self, CoreError> {
        match b {
            0 => Ok(ProvenanceTag::Vacuum),
            1 => Ok(ProvenanceTag::Single),
            2 => Ok(ProvenanceTag::Multi),
            _ => Err(CoreError::domain(format!("invalid tag encoding {b}"))),
        }
    }
}

/// A sifted key with per-bit provenance tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFrame {
    /// Key bits.
    pub bits: Vec<bool>,
    /// Photon-class tag of the pulse each bit came from.
    pub tags: Vec<ProvenanceTag>,
}

impl BitFrame {
    /// Builds a frame, enforcing equal bit/tag lengths.
    pub fn new(bits: Vec<bool>, tags: Vec<ProvenanceTag>) -> Result<Self, CoreError> {
        if bits.len() != tags.len() {
            return Err(CoreError::LengthMismatch {
                left: bits.len(),
                right: tags.len(),
            });
        }
        Ok(BitFrame { bits, tags })
    }

    /// Frame length.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Whether the frame is empty.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Parity (XOR) of the bits at `indices`.
    pub fn parity_of(&self, indices: &[u32]) -> bool {
        indices.iter().fold(false, |p, &i| p ^ self.bits[i as usize])
    }
}

/// One simulated sifted-key exchange.
#[derive(Debug, Clone)]
pub struct SimulatedRun {
    /// Alice's sifted key with tags.
    pub alice: BitFrame,
    /// Bob's sifted key; tags are shared with Alice's (provenance is a
    /// property of the pulse).
    pub bob: BitFrame,
    /// Number of sifted bit pairs (frame length).
    pub sifted_count: usize,
    /// Total pulses emitted to reach the target (for the empirical gain).
    pub pulses: u64,
    /// Fraction of sifted bits tagged MULTI.
    pub measured_delta_m: f64,
    /// Fraction of positions where the two frames disagree.
    pub measured_qber: f64,
    /// Seed the run was generated from.
    pub seed: u64,
}

/// Empirical observables of a run: gain `Q` (detections per pulse), QBER `E`,
/// and the MULTI-tag fraction `Δ_M`.
///
/// # Errors
/// Returns [`CoreError::EmptyInput`] for a run with no sifted bits.
pub fn measured_observables(run: &SimulatedRun) -> Result<(f64, f64, f64), CoreError> {
    if run.sifted_count == 0 {
        return Err(CoreError::EmptyInput("run has no sifted bits".into()));
    }
    let q = run.sifted_count as f64 / run.pulses as f64;
    Ok((q, run.measured_qber, run.measured_delta_m))
}

/// Simulates pulses until `target_n` sifted bits are collected.
///
/// Per pulse: photon number `n ~ Poisson(μ)`; a detection occurs with
/// probability `1 − (1−η)ⁿ(1−d)` where `η` is the total transmittance and `d`
/// the dark-count rate; detected bits are tagged by `n`. Bob's bit differs
/// from Alice's with probability ½ for VACUUM detections (dark-count origin)
/// and `e_det` otherwise. Pulses without detection are discarded.
///
/// # Errors
/// Returns [`CoreError::IterationCap`] when the pulse budget is exhausted
/// before `target_n` sifted bits arrive (degenerate parameters, e.g.
/// `η = d = 0`), and [`CoreError::EmptyInput`] for `target_n = 0`.
pub fn simulate_frames(
    params: &ChannelParams,
    target_n: usize,
    seed: u64,
) -> Result<SimulatedRun, CoreError> {
    if target_n == 0 {
        return Err(CoreError::EmptyInput("target_n must be >= 1".into()));
    }
    params.validate()?;
    let eta = params.eta_bb84();
    let d = params.dark_rate;
    let mu = params.mu;
    let one_minus_eta = 1.0 - eta;
    let one_minus_d = 1.0 - d;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alice_bits = Vec::with_capacity(target_n);
    let mut bob_bits = Vec::with_capacity(target_n);
    let mut tags = Vec::with_capacity(target_n);
    let mut errors = 0usize;
    let mut multi = 0usize;

    // Budget: generous for any gain down to ~1e−4 detections/pulse at the
    // default frame sizes; degenerate parameter sets fail fast instead of
    // spinning forever.
    let pulse_cap: u64 = (target_n as u64).saturating_mul(20_000).max(100_000_000);
    let mut pulses: u64 = 0;

    while alice_bits.len() < target_n {
        if pulses >= pulse_cap {
            return Err(CoreError::IterationCap {
                pulses,
                sifted: alice_bits.len(),
                target: target_n,
            });
        }
        pulses += 1;
        let n = sample_poisson(&mut rng, mu);
        let p_detect = 1.0 - one_minus_eta.powi(n as i32) * one_minus_d;
        if rng.random::<f64>() >= p_detect {
            continue;
        }
        let tag = ProvenanceTag::from_photon_number(n);
        let a = rng.random::<bool>();
        let flip_prob = if tag == ProvenanceTag::Vacuum { 0.5 } else { params.e_det };
        let flip = rng.random::<f64>() < flip_prob;
        alice_bits.push(a);
        bob_bits.push(a ^ flip);
        tags.push(tag);
        if flip {
            errors += 1;
        }
        if tag == ProvenanceTag::Multi {
            multi += 1;
        }
    }

    let n = alice_bits.len();
    Ok(SimulatedRun {
        alice: BitFrame::new(alice_bits, tags.clone())?,
        bob: BitFrame::new(bob_bits, tags)?,
        sifted_count: n,
        pulses,
        measured_delta_m: multi as f64 / n as f64,
        measured_qber: errors as f64 / n as f64,
        seed,
    })
}

/// One simulated MDI coincidence run: joint photon-number pairs per sifted
/// bit, with the pair-level multi-photon class.
#[derive(Debug, Clone)]
pub struct MdiPairRun {
    /// Alice's sifted key (pair-level tags, see below).
    pub alice: BitFrame,
    /// Bob's sifted key.
    pub bob: BitFrame,
    /// Photon-number pair (n_A, n_B) per sifted bit, each capped at 255.
    pub pairs: Vec<(u8, u8)>,
    /// Pulse pairs emitted.
    pub pulses: u64,
    /// Fraction of sifted bits whose pair has max(n_A, n_B) ≥ 2.
    pub measured_delta_mm: f64,
    /// Fraction of disagreeing positions.
    pub measured_qber: f64,
}

/// Simulates MDI coincidences until `target_n` sifted pairs are collected.
///
/// Both sources emit at intensity μ; each arm clicks with probability
/// `1 − (1−η_arm)ⁿ(1−d)` and a sifted bit requires both arms to click. The
/// pair tag is MULTI when either arm carried ≥ 2 photons — those bits are
/// eavesdropper-readable — VACUUM when both arms were empty, and SINGLE for
/// the remaining (0,1), (1,0), (1,1) pairs. Bob's bit differs with the
/// misalignment probability `sin²(θ_A−θ_B)` when both arms' clicks are
/// photon-driven and ½ when a dark count was involved.
pub fn simulate_mdi_pairs(
    params: &ChannelParams,
    target_n: usize,
    seed: u64,
) -> Result<MdiPairRun, CoreError> {
    if target_n == 0 {
        return Err(CoreError::EmptyInput("target_n must be >= 1".into()));
    }
    params.validate()?;
    let eta = params.eta_mdi_arm();
    let d = params.dark_rate;
    let e_align = params.e_align();
    let one_minus_eta = 1.0 - eta;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x4d44_49, 0));
    let mut alice_bits = Vec::with_capacity(target_n);
    let mut bob_bits = Vec::with_capacity(target_n);
    let mut tags = Vec::with_capacity(target_n);
    let mut pairs = Vec::with_capacity(target_n);
    let mut errors = 0usize;
    let mut multi = 0usize;
    let pulse_cap: u64 = (target_n as u64).saturating_mul(20_000).max(100_000_000);
    let mut pulses: u64 = 0;

    while alice_bits.len() < target_n {
        if pulses >= pulse_cap {
            return Err(CoreError::IterationCap {
                pulses,
                sifted: alice_bits.len(),
                target: target_n,
            });
        }
        pulses += 1;
        let na = sample_poisson(&mut rng, params.mu);
        let nb = sample_poisson(&mut rng, params.mu);
        // Per-arm click: photons survive independently, darks fill in.
        let pa_sig = 1.0 - one_minus_eta.powi(na as i32);
        let pb_sig = 1.0 - one_minus_eta.powi(nb as i32);
        let a_sig = rng.random::<f64>() < pa_sig;
        let b_sig = rng.random::<f64>() < pb_sig;
        let a_click = a_sig || rng.random::<f64>() < d;
        let b_click = b_sig || rng.random::<f64>() < d;
        if !(a_click && b_click) {
            continue;
        }
        let is_multi = na >= 2 || nb >= 2;
        let tag = if is_multi {
            ProvenanceTag::Multi
        } else if na == 0 && nb == 0 {
            ProvenanceTag::Vacuum
        } else {
            ProvenanceTag::Single
        };
        let a = rng.random::<bool>();
        let flip_prob = if a_sig && b_sig { e_align } else { 0.5 };
        let flip = rng.random::<f64>() < flip_prob;
        alice_bits.push(a);
        bob_bits.push(a ^ flip);
        tags.push(tag);
        pairs.push((na.min(255) as u8, nb.min(255) as u8));
        if flip {
            errors += 1;
        }
        if is_multi {
            multi += 1;
        }
    }

    let n = alice_bits.len();
    Ok(MdiPairRun {
        alice: BitFrame::new(alice_bits, tags.clone())?,
        bob: BitFrame::new(bob_bits, tags)?,
        pairs,
        pulses,
        measured_delta_mm: multi as f64 / n as f64,
        measured_qber: errors as f64 / n as f64,
    })
}

/// SHA-256 of the channel parameters in a canonical text form; stored in
/// frame dumps so a loaded dump can be matched to its generating config.
pub fn params_digest(params: &ChannelParams) -> [u8; 32] {
    let text = format!(
        "mu={:.17e};nu1={:.17e};nu2={:.17e};alpha={:.17e};L={:.17e};d={:.17e};eta_d={:.17e};e_det={:.17e};ta={:.17e};tb={:.17e}",
        params.mu,
        params.nu1,
        params.nu2,
        params.alpha_db_per_km,
        params.distance_km,
        params.dark_rate,
        params.det_eff,
        params.e_det,
        params.theta_a,
        params.theta_b,
    );
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.finalize().into()
}

const DUMP_MAGIC: &[u8; 4] = b"QKDF";
const DUMP_VERSION: u16 = 1;

fn pack_bits(bits: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            words[i >> 6] |= 1u64 << (i & 63);
        }
    }
    words
}

fn unpack_bits(words: &[u64], n: usize) -> Vec<bool> {
    (0..n).map(|i| (words[i >> 6] >> (i & 63)) & 1 == 1).collect()
}

fn write_words<W: Write>(w: &mut W, words: &[u64]) -> io::Result<()> {
    for &word in words {
        w.write_all(&word.to_le_bytes())?;
    }
    Ok(())
}

fn read_words<R: Read>(r: &mut R, count: usize) -> io::Result<Vec<u64>> {
    let mut buf = [0u8; 8];
    let mut words = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        words.push(u64::from_le_bytes(buf));
    }
    Ok(words)
}

/// Writes a run to the binary frame-dump format.
///
/// Layout (all words little-endian):
/// `"QKDF"` magic, `u16` version, `u64` N, `u64` seed, 32-byte parameter
/// digest, then `⌈N/64⌉` words of Alice bits, the same of Bob bits, and
/// `⌈N/32⌉` words of 2-bit tags (packed 32 per word, VACUUM=0, SINGLE=1,
/// MULTI=2).
pub fn dump_frames<W: Write>(
    run: &SimulatedRun,
    params: &ChannelParams,
    w: &mut W,
) -> io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(run.sifted_count as u64).to_le_bytes())?;
    w.write_all(&run.seed.to_le_bytes())?;
    w.write_all(&params_digest(params))?;
    write_words(w, &pack_bits(&run.alice.bits))?;
    write_words(w, &pack_bits(&run.bob.bits))?;
    let mut tag_words = vec![0u64; run.sifted_count.div_ceil(32)];
    for (i, tag) in run.alice.tags.iter().enumerate() {
        tag_words[i >> 5] |= tag.to_bits() << ((i & 31) * 2);
    }
    write_words(w, &tag_words)?;
    Ok(())
}

/// Reads a frame dump written by [`dump_frames`]. Returns the frames, the
/// seed, and the parameter digest. The empirical-count fields of the returned
/// run are not stored in the dump and are reconstructed from the frames
/// (`pulses` is set to 0).
pub fn load_frames<R: Read>(r: &mut R) -> Result<(SimulatedRun, [u8; 32]), CoreError> {
    let io_err = |e: io::Error| CoreError::domain(format!("frame dump read: {e}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != DUMP_MAGIC {
        return Err(CoreError::domain("frame dump: bad magic"));
    }
    let mut v = [0u8; 2];
    r.read_exact(&mut v).map_err(io_err)?;
    if u16::from_le_bytes(v) != DUMP_VERSION {
        return Err(CoreError::domain("frame dump: unsupported version"));
    }
    let mut u = [0u8; 8];
    r.read_exact(&mut u).map_err(io_err)?;
    let n = u64::from_le_bytes(u) as usize;
    r.read_exact(&mut u).map_err(io_err)?;
    let seed = u64::from_le_bytes(u);
    let mut digest = [0u8; 32];
    r.read_exact(&mut digest).map_err(io_err)?;
    let bit_words = n.div_ceil(64);
    let alice_bits = unpack_bits(&read_words(r, bit_words).map_err(io_err)?, n);
    let bob_bits = unpack_bits(&read_words(r, bit_words).map_err(io_err)?, n);
    let tag_words = read_words(r, n.div_ceil(32)).map_err(io_err)?;
    let mut tags = Vec::with_capacity(n);
    for i in 0..n {
        tags.push(ProvenanceTag::from_bits((tag_words[i >> 5] >> ((i & 31) * 2)) & 3)?);
    }
    let errors = alice_bits
        .iter()
        .zip(&bob_bits)
        .filter(|(a, b)| a != b)
        .count();
    let multi = tags.iter().filter(|t| **t == ProvenanceTag::Multi).count();
    let run = SimulatedRun {
        alice: BitFrame::new(alice_bits, tags.clone())?,
        bob: BitFrame::new(bob_bits, tags)?,
        sifted_count: n,
        pulses: 0,
        measured_delta_m: if n > 0 { multi as f64 / n as f64 } else { 0.0 },
        measured_qber: if n > 0 { errors as f64 / n as f64 } else { 0.0 },
        seed,
    };
    Ok((run, digest))
}
