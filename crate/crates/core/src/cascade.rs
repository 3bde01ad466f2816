//! Interactive parity-based reconciliation (Cascade) with a complete
//! disclosure ledger.
//!
//! Alice's frame is the reference key; Bob's frame is corrected toward it.
//! Every parity Alice sends is recorded in a [`DisclosureLedger`] with its
//! index set in ORIGINAL (pre-shuffle) coordinates, so downstream accounting
//! can intersect disclosed blocks with per-bit provenance tags. Only Alice's
//! parities are counted: under direct reconciliation Bob's replies reveal
//! information about Bob's string, not about the reference key.

use crate::permute::{derive_seed, seeded_permutation};
use crate::sim::BitFrame;
use crate::CoreError;
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Domain separator for per-pass shuffle seeds.
const PASS_SEED_DOMAIN: u64 = 0x4341_5343;

/// One disclosed parity: the index set it covers and Alice's parity over it.
///
/// `pass_index`/`block_id` identify the top-level partition block this
/// disclosure descends from (1-based pass, 0-based block), so BISECT halves
/// and backtracking disclosures carry the coordinates of their ancestor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityBlock {
    /// Pass whose partition this block descends from (1-based).
    pub pass_index: usize,
    /// Top-level block id within that pass's partition (0-based).
    pub block_id: usize,
    /// Original-coordinate bit positions, ascending.
    pub indices: Vec<u32>,
    /// Alice's parity over `indices`.
    pub parity_alice: bool,
}

impl ParityBlock {
    /// Block length.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// Never true for a ledgered block (empty blocks are rejected).
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Ordered record of every parity disclosed during a reconciliation run.
#[derive(Debug, Clone)]
pub struct DisclosureLedger {
    /// Frame length the index sets live in.
    pub n: usize,
    /// Disclosed blocks, in disclosure order. Never shrinks.
    pub blocks: Vec<ParityBlock>,
}

impl DisclosureLedger {
    /// Creates an empty ledger for frames of length `n ≥ 1`.
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::EmptyInput("ledger frame length".into()));
        }
        Ok(DisclosureLedger { n, blocks: Vec::new() })
    }

    /// Number of disclosed parities.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Whether nothing has been disclosed yet.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn disclose(
        &mut self,
        pass_index: usize,
        block_id: usize,
        indices: &[u32],
        parity_alice: bool,
    ) -> Result<(), CoreError> {
        if indices.is_empty() {
            return Err(CoreError::EmptyInput("disclosed block".into()));
        }
        for &i in indices {
            if i as usize >= self.n {
                return Err(CoreError::IndexOutOfRange { index: i as usize, len: self.n });
            }
        }
        self.blocks.push(ParityBlock {
            pass_index,
            block_id,
            indices: indices.to_vec(),
            parity_alice,
        });
        Ok(())
    }

    /// Serializes the ledger as CSV with columns
    /// `pass,block_id,length,parity,index_set`; the index set uses the
    /// run-length encoding of [`encode_index_set`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pass,block_id,length,parity,index_set\n");
        for b in &self.blocks {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                b.pass_index,
                b.block_id,
                b.indices.len(),
                u8::from(b.parity_alice),
                encode_index_set(&b.indices),
            );
        }
        out
    }
}

/// Encodes an ascending index set as runs of consecutive positions, each run
/// written `start:length` in lowercase hex and runs joined with `+`
/// (e.g. `{4,5,6,12}` → `"4:3+c:1"`). Compact for the contiguous sets BISECT
/// produces while staying exact for arbitrary sets.
pub fn encode_index_set(indices: &[u32]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < indices.len() {
        let start = indices[i];
        let mut len = 1u32;
        while i + (len as usize) < indices.len() && indices[i + len as usize] == start + len {
            len += 1;
        }
        if !out.is_empty() {
            out.push('+');
        }
        let _ = write!(out, "{start:x};{len:x}");
        i += len as usize;
    }
    // Use ':' as the separator; replace the placeholder used above.
    out.replace(';', ":")
}

/// Decodes the run-length encoding produced by [`encode_index_set`].
pub fn decode_index_set(s: &str) -> Result<Vec<u32>, CoreError> {
    let mut out = Vec::new();
    if s.is_empty() {
        return Err(CoreError::EmptyInput("index set string".into()));
    }
    for run in s.split('+') {
        let (start, len) = run
            .split_once(':')
            .ok_or_else(|| CoreError::domain(format!("malformed index run {run:?}")))?;
        let start = u32::from_str_radix(start, 16)
            .map_err(|e| CoreError::domain(format!("bad run start {start:?}: {e}")))?;
        let len = u32::from_str_radix(len, 16)
            .map_err(|e| CoreError::domain(format!("bad run length {len:?}: {e}")))?;
        if len == 0 {
            return Err(CoreError::domain("zero-length index run"));
        }
        out.extend(start..start + len);
    }
    Ok(out)
}

/// Block-size schedule: `k₁` for the first pass, doubling each pass, for
/// `t_max` passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeSchedule {
    /// First-pass block size.
    pub k1: usize,
    /// Number of passes.
    pub t_max: usize,
}

impl CascadeSchedule {
    /// Standard schedule for an error rate `e`: `k₁ = ⌈0.73/e⌉` clamped to
    /// `[1, n]`, doubling block sizes, four passes. A vanishing or invalid
    /// `e` clamps `k₁` to the frame length.
    pub fn from_qber(e: f64, n: usize) -> Self {
        let k1 = if e.is_finite() && e > 0.0 {
            let raw = (0.73 / e).ceil();
            if raw >= n as f64 {
                n.max(1)
            } else {
                (raw as usize).max(1)
            }
        } else {
            n.max(1)
        };
        CascadeSchedule { k1, t_max: 4 }
    }

    /// Block size for pass `t` (1-based), capped at the frame length.
    pub fn block_size(&self, t: usize, n: usize) -> usize {
        debug_assert!(t >= 1);
        self.k1.saturating_mul(1usize << (t - 1).min(62)).min(n)
    }
}

/// One pass's partition of the frame into blocks of original-coordinate
/// indices.
#[derive(Debug, Clone)]
pub struct PassPartition {
    /// Pass index, 1-based.
    pub pass_index: usize,
    /// Block id → ascending original indices.
    pub blocks: Vec<Vec<u32>>,
}

/// Builds the partition for one pass: the shuffled order `perm` is cut into
/// consecutive chunks of `k`, and each chunk's original indices form one
/// block (stored ascending).
pub fn partition_from_perm(
    perm: &[u32],
    k: usize,
    pass_index: usize,
) -> Result<PassPartition, CoreError> {
    if k == 0 {
        return Err(CoreError::InvalidConfig { field: "block size".into(), reason: "must be >= 1".into() });
    }
    if perm.is_empty() {
        return Err(CoreError::EmptyInput("permutation".into()));
    }
    let mut blocks = Vec::with_capacity(perm.len().div_ceil(k));
    for chunk in perm.chunks(k) {
        let mut ids: Vec<u32> = chunk.to_vec();
        ids.sort_unstable();
        blocks.push(ids);
    }
    Ok(PassPartition { pass_index, blocks })
}

/// Discloses Alice's parity for every block of `part` and returns the ids of
/// blocks where Bob's parity disagrees (odd error count).
pub fn top_level_pass(
    alice: &BitFrame,
    bob: &BitFrame,
    part: &PassPartition,
    ledger: &mut DisclosureLedger,
) -> Result<Vec<usize>, CoreError> {
    if alice.len() != bob.len() {
        return Err(CoreError::LengthMismatch { left: alice.len(), right: bob.len() });
    }
    let mut mismatched = Vec::new();
    for (id, indices) in part.blocks.iter().enumerate() {
        let pa = alice.parity_of(indices);
        ledger.disclose(part.pass_index, id, indices, pa)?;
        if pa != bob.parity_of(indices) {
            mismatched.push(id);
        }
    }
    Ok(mismatched)
}

/// Binary-searches one error inside a block known to hold an odd number of
/// errors, flips Bob's bit there, and returns the corrected position.
///
/// Each halving step splits the block into a first half of `⌊l/2⌋` and the
/// remainder, and discloses ONLY the first half's parity — the second half's
/// parity is inferred from the parent's, so it costs nothing. `(pass_index,
/// block_id)` are the partition coordinates of the block's top-level
/// ancestor, stamped onto every disclosure.
pub fn bisect(
    alice: &BitFrame,
    bob: &mut BitFrame,
    indices: &[u32],
    pass_index: usize,
    block_id: usize,
    ledger: &mut DisclosureLedger,
) -> Result<u32, CoreError> {
    if indices.is_empty() {
        return Err(CoreError::EmptyInput("bisect block".into()));
    }
    debug_assert_ne!(
        alice.parity_of(indices),
        bob.parity_of(indices),
        "bisect requires an odd-error block"
    );
    let mut lo = 0usize;
    let mut hi = indices.len();
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let first = &indices[lo..mid];
        let pa = alice.parity_of(first);
        ledger.disclose(pass_index, block_id, first, pa)?;
        if pa != bob.parity_of(first) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let pos = indices[lo];
    bob.bits[pos as usize] ^= true;
    Ok(pos)
}

/// Entry of the odd-parity working set during backtracking, ordered so that
/// `BTreeSet::first` yields the shortest block, ties broken by ascending
/// (pass, block id).
type OddBlockKey = (usize, usize, usize);

/// Cross-pass backtracking after a correction at `error_pos` in the current
/// pass: every earlier-pass block containing the position now holds an odd
/// number of errors. The working set starts there; each iteration bisects
/// the shortest member, and the newly corrected position's earlier-pass
/// blocks are folded in by symmetric difference (a block already in the set
/// returns to even parity and drops out; a new one becomes odd and joins).
/// Returns the number of extra corrected positions.
pub fn backtrack(
    alice: &BitFrame,
    bob: &mut BitFrame,
    error_pos: u32,
    history: &[PassPartition],
    ledger: &mut DisclosureLedger,
) -> Result<usize, CoreError> {
    let mut odd: BTreeSet<OddBlockKey> = BTreeSet::new();
    let fold = |odd: &mut BTreeSet<OddBlockKey>, pos: u32, history: &[PassPartition]| {
        for part in history {
            for (id, indices) in part.blocks.iter().enumerate() {
                if indices.binary_search(&pos).is_ok() {
                    let key = (indices.len(), part.pass_index, id);
                    if !odd.remove(&key) {
                        odd.insert(key);
                    }
                    break; // one block per pass contains the position
                }
            }
        }
    };
    fold(&mut odd, error_pos, history);

    let mut corrections = 0usize;
    while let Some(&(_, pass, id)) = odd.first() {
        let part = history
            .iter()
            .find(|p| p.pass_index == pass)
            .ok_or_else(|| CoreError::domain(format!("pass {pass} missing from history")))?;
        let indices = part.blocks[id].clone();
        let pos = bisect(alice, bob, &indices, pass, id, ledger)?;
        corrections += 1;
        // The bisected block itself contains `pos`, so the fold removes it.
        fold(&mut odd, pos, history);
    }
    Ok(corrections)
}

/// Outcome of a full reconciliation run.
#[derive(Debug, Clone)]
pub struct CascadeOutcome {
    /// Bob's frame after all corrections.
    pub corrected_bob: BitFrame,
    /// Every parity disclosed, in order.
    pub ledger: DisclosureLedger,
    /// Total corrected positions.
    pub corrections: usize,
}

/// Runs the full multi-pass protocol: per pass, a seeded shuffle partitions
/// the frame into doubling-size blocks; mismatched blocks are bisected; from
/// pass 2 on, every correction triggers backtracking through earlier passes.
/// Deterministic for fixed inputs and seed.
pub fn run_cascade(
    alice: &BitFrame,
    bob: &BitFrame,
    schedule: &CascadeSchedule,
    seed: u64,
) -> Result<CascadeOutcome, CoreError> {
    let n = alice.len();
    if n == 0 {
        return Err(CoreError::EmptyInput("frames".into()));
    }
    if alice.len() != bob.len() {
        return Err(CoreError::LengthMismatch { left: alice.len(), right: bob.len() });
    }
    if schedule.k1 == 0 || schedule.k1 > n {
        return Err(CoreError::InvalidConfig {
            field: "k1".into(),
            reason: format!("must lie in [1, {n}], got {}", schedule.k1),
        });
    }
    if schedule.t_max == 0 {
        return Err(CoreError::InvalidConfig {
            field: "t_max".into(),
            reason: "must be >= 1".into(),
        });
    }

    let mut bob_work = bob.clone();
    let mut ledger = DisclosureLedger::new(n)?;
    let mut history: Vec<PassPartition> = Vec::with_capacity(schedule.t_max);
    let mut corrections = 0usize;

    for t in 1..=schedule.t_max {
        let k = schedule.block_size(t, n);
        let perm = seeded_permutation(derive_seed(seed, PASS_SEED_DOMAIN, t as u64), n)?;
        let part = partition_from_perm(&perm, k, t)?;
        let mismatched = top_level_pass(alice, &bob_work, &part, &mut ledger)?;
        for id in mismatched {
            let indices = part.blocks[id].clone();
            // A backtrack triggered by an earlier block of this pass may have
            // already fixed this block's odd error; its disclosed parity is
            // unchanged, so re-checking costs no extra disclosure.
            if alice.parity_of(&indices) == bob_work.parity_of(&indices) {
                continue;
            }
            let pos = bisect(alice, &mut bob_work, &indices, t, id, &mut ledger)?;
            corrections += 1;
            corrections += backtrack(alice, &mut bob_work, pos, &history, &mut ledger)?;
        }
        history.push(part);
    }

    Ok(CascadeOutcome { corrected_bob: bob_work, ledger, corrections })
}

/// Number of positions where the two frames disagree.
pub fn count_residual_errors(a: &BitFrame, b: &BitFrame) -> usize {
    a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count()
}
