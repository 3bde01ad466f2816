//! Reconciliation-leakage accounting over a disclosure ledger.
//!
//! Counting convention: every disclosed parity costs one bit, so the gross
//! leakage is `|C|/N` for `|C|` disclosed blocks over an `N`-bit frame. A
//! disclosed block whose bits all originate from multi-photon pulses leaks
//! nothing new — an eavesdropper holding those pulses already knows the bits,
//! hence the parity — so the net figure subtracts such blocks. When only the
//! multi-photon FRACTION is known (not the tags), the subtraction is
//! estimated distributionally: a random length-`l` block lands entirely in
//! the multi-photon set with probability `Δ_M^l` under uniform shuffling, so
//! each length class contributes `(|Cˡ|/N)·min(1 − Δ_M^l, 1)`.

use crate::cascade::DisclosureLedger;
use crate::gf2::{gf2_rank, ParityVector};
use crate::sim::ProvenanceTag;
use crate::CoreError;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Count of disclosed blocks per block length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHistogram {
    /// length → number of disclosed blocks of that length.
    pub counts: BTreeMap<usize, usize>,
    /// Frame length.
    pub n: usize,
}

impl BlockHistogram {
    /// Total number of disclosed blocks.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// All leakage figures for one run, in bits per key bit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    /// Gross disclosure count rate `|C|/N`.
    pub leak_all: f64,
    /// Rate of disclosed blocks lying entirely in the multi-photon set.
    pub leak_m_exact: f64,
    /// Net leakage with exact tags: `leak_all − leak_m_exact`.
    pub leak_actual_exact: f64,
    /// Distribution-based upper estimate of the net leakage.
    pub leak_actual_bound: f64,
    /// GF(2) rank of the disclosed parity system over `N`.
    pub rank_leak: f64,
    /// Whether this run's exact net leakage exceeded the estimate. The
    /// estimate holds in expectation, not per run; aggregate tests count
    /// these flags rather than asserting per-run.
    pub bound_violated: bool,
}

impl LeakageReport {
    /// CSV header matching [`LeakageReport::to_csv_row`].
    pub fn csv_header() -> &'static str {
        "leak_all,leak_m_exact,leak_actual_exact,leak_actual_bound,rank_leak,bound_violated"
    }

    /// Serializes the report as one CSV row.
    pub fn to_csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            self.leak_all,
            self.leak_m_exact,
            self.leak_actual_exact,
            self.leak_actual_bound,
            self.rank_leak,
            u8::from(self.bound_violated),
        );
        s
    }
}

/// Exact length histogram of the disclosed blocks.
pub fn histogram(ledger: &DisclosureLedger) -> BlockHistogram {
    let mut counts = BTreeMap::new();
    for b in &ledger.blocks {
        *counts.entry(b.indices.len()).or_insert(0) += 1;
    }
    BlockHistogram { counts, n: ledger.n }
}

/// Gross leakage rate `|C|/N`.
pub fn leak_all(ledger: &DisclosureLedger) -> f64 {
    ledger.len() as f64 / ledger.n as f64
}

/// Rate of disclosed blocks whose every index is MULTI-tagged.
///
/// # Errors
/// [`CoreError::LengthMismatch`] when `tags` does not cover the frame.
pub fn leak_m_exact(ledger: &DisclosureLedger, tags: &[ProvenanceTag]) -> Result<f64, CoreError> {
    Ok(count_multi_blocks(ledger, tags)? as f64 / ledger.n as f64)
}

fn block_is_all_multi(indices: &[u32], tags: &[ProvenanceTag]) -> bool {
    indices.iter().all(|&i| tags[i as usize] == ProvenanceTag::Multi)
}

/// Number of disclosed blocks lying entirely in the multi-photon set.
pub fn count_multi_blocks(
    ledger: &DisclosureLedger,
    tags: &[ProvenanceTag],
) -> Result<usize, CoreError> {
    if tags.len() != ledger.n {
        return Err(CoreError::LengthMismatch { left: tags.len(), right: ledger.n });
    }
    Ok(ledger
        .blocks
        .iter()
        .filter(|b| block_is_all_multi(&b.indices, tags))
        .count())
}

/// Per-length counts of disclosed blocks entirely in the multi-photon set
/// (the tagged counterpart of [`histogram`], for ratio tests).
pub fn multi_histogram(
    ledger: &DisclosureLedger,
    tags: &[ProvenanceTag],
) -> Result<BTreeMap<usize, usize>, CoreError> {
    if tags.len() != ledger.n {
        return Err(CoreError::LengthMismatch { left: tags.len(), right: ledger.n });
    }
    let mut counts = BTreeMap::new();
    for b in &ledger.blocks {
        if block_is_all_multi(&b.indices, tags) {
            *counts.entry(b.indices.len()).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Distribution-based upper estimate of the net leakage:
/// `Σ_l (|Cˡ|/N) · min(1 − δ^l, 1)` over lengths `l ≤ l_cap`, with lengths
/// beyond the cap contributing their full `|Cˡ|/N` (no reduction credit).
/// `l_cap = None` applies the reduction at every length.
///
/// # Errors
/// [`CoreError::Domain`] unless `0 ≤ delta_m_min ≤ 1`.
pub fn leak_actual_bound(
    hist: &BlockHistogram,
    delta_m_min: f64,
    l_cap: Option<usize>,
) -> Result<f64, CoreError> {
    if !(0.0..=1.0).contains(&delta_m_min) {
        return Err(CoreError::domain(format!(
            "multi-photon fraction must lie in [0,1], got {delta_m_min}"
        )));
    }
    let n = hist.n as f64;
    let mut total = 0.0;
    for (&l, &count) in &hist.counts {
        let weight = count as f64 / n;
        let reduction = match l_cap {
            Some(cap) if l > cap => 1.0,
            _ => (1.0 - delta_m_min.powi(l as i32)).min(1.0),
        };
        total += weight * reduction;
    }
    Ok(total)
}

/// Assembles every leakage figure for one run.
pub fn report(
    ledger: &DisclosureLedger,
    tags: &[ProvenanceTag],
    delta_m_min: f64,
    l_cap: Option<usize>,
) -> Result<LeakageReport, CoreError> {
    let all = leak_all(ledger);
    let m_exact = leak_m_exact(ledger, tags)?;
    let actual_exact = all - m_exact;
    let bound = leak_actual_bound(&histogram(ledger), delta_m_min, l_cap)?;
    let vectors: Vec<ParityVector> = ledger
        .blocks
        .iter()
        .map(|b| ParityVector::new(b.indices.clone(), b.parity_alice, ledger.n))
        .collect::<Result<_, _>>()?;
    let rank = gf2_rank(&vectors, ledger.n)? as f64 / ledger.n as f64;
    Ok(LeakageReport {
        leak_all: all,
        leak_m_exact: m_exact,
        leak_actual_exact: actual_exact,
        leak_actual_bound: bound,
        rank_leak: rank,
        bound_violated: actual_exact > bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Ledger with one disclosed block per entry of `blocks`.
    fn ledger_of(n: usize, blocks: &[&[u32]]) -> DisclosureLedger {
        let mut ledger = DisclosureLedger::new(n).unwrap();
        for (id, idx) in blocks.iter().enumerate() {
            // Parity value is irrelevant for counting; use false.
            let pb = crate::cascade::ParityBlock {
                pass_index: 1,
                block_id: id,
                indices: idx.to_vec(),
                parity_alice: false,
            };
            ledger.blocks.push(pb);
        }
        ledger
    }

    fn tags(n: usize, multi: &[usize]) -> Vec<ProvenanceTag> {
        let mut t = vec![ProvenanceTag::Single; n];
        for &i in multi {
            t[i] = ProvenanceTag::Multi;
        }
        t
    }

    #[test]
    fn test_histogram_counts_lengths() {
        let ledger = ledger_of(
            100,
            &[&[0, 1, 2, 3, 4, 5, 6, 7], &[8, 9, 10, 11], &[12, 13], &[14], &[16, 17, 18, 19, 20, 21, 22, 23]],
        );
        let h = histogram(&ledger);
        let expected: BTreeMap<usize, usize> = [(8, 2), (4, 1), (2, 1), (1, 1)].into();
        assert_eq!(h.counts, expected);
        assert_eq!(h.total(), 5);
    }

    #[test]
    fn test_empty_ledger() {
        let ledger = DisclosureLedger::new(10).unwrap();
        assert!(histogram(&ledger).counts.is_empty());
        assert_eq!(leak_all(&ledger), 0.0);
        let r = report(&ledger, &tags(10, &[]), 0.3, None).unwrap();
        assert_eq!(r.leak_all, 0.0);
        assert_eq!(r.leak_actual_bound, 0.0);
        assert_eq!(r.rank_leak, 0.0);
        assert!(!r.bound_violated);
    }

    #[test]
    fn test_leak_all_is_count_over_n() {
        let ledger = ledger_of(100, &[&[0], &[1], &[2], &[3], &[4]]);
        assert_relative_eq!(leak_all(&ledger), 0.05);
    }

    #[test]
    fn test_leak_m_all_single_tags_is_zero() {
        let ledger = ledger_of(16, &[&[0, 1], &[2, 3]]);
        assert_eq!(leak_m_exact(&ledger, &tags(16, &[])).unwrap(), 0.0);
    }

    #[test]
    fn test_leak_m_all_multi_tags_equals_leak_all() {
        let ledger = ledger_of(16, &[&[0, 1], &[2, 3], &[4]]);
        let all_multi = tags(16, &(0..16).collect::<Vec<_>>());
        assert_eq!(leak_m_exact(&ledger, &all_multi).unwrap(), leak_all(&ledger));
    }

    #[test]
    fn test_leak_m_requires_full_containment() {
        // {4,5} fully multi-tagged counts; {4,6} (one single bit) does not.
        let t = tags(16, &[4, 5]);
        let ledger = ledger_of(16, &[&[4, 5], &[4, 6], &[5]]);
        assert_relative_eq!(leak_m_exact(&ledger, &t).unwrap(), 2.0 / 16.0);
        let mh = multi_histogram(&ledger, &t).unwrap();
        assert_eq!(mh.get(&2), Some(&1));
        assert_eq!(mh.get(&1), Some(&1));
    }

    #[test]
    fn test_tag_length_mismatch_rejected() {
        let ledger = ledger_of(16, &[&[0]]);
        assert!(leak_m_exact(&ledger, &tags(15, &[])).is_err());
    }

    #[test]
    fn test_bound_hand_case() {
        // {1: 30, 2: 10}, N=1000, δ=0.1 → 0.03·0.9 + 0.01·0.99 = 0.0369.
        let hist = BlockHistogram { counts: [(1, 30), (2, 10)].into(), n: 1000 };
        let b = leak_actual_bound(&hist, 0.1, None).unwrap();
        assert_relative_eq!(b, 0.0369, epsilon = 1e-15);
    }

    #[test]
    fn test_bound_zero_delta_is_gross_leakage() {
        let ledger = ledger_of(50, &[&[0, 1, 2], &[3], &[4, 5]]);
        let b = leak_actual_bound(&histogram(&ledger), 0.0, None).unwrap();
        assert_relative_eq!(b, leak_all(&ledger), epsilon = 1e-15);
    }

    #[test]
    fn test_bound_full_delta_singletons_vanish() {
        let hist = BlockHistogram { counts: [(1, 7)].into(), n: 100 };
        assert_eq!(leak_actual_bound(&hist, 1.0, None).unwrap(), 0.0);
    }

    #[test]
    fn test_bound_cap_restricts_reduction_to_short_blocks() {
        let hist = BlockHistogram { counts: [(1, 30), (2, 10)].into(), n: 1000 };
        // Cap 1: only singletons get the reduction → 0.03·0.9 + 0.01.
        let b1 = leak_actual_bound(&hist, 0.1, Some(1)).unwrap();
        assert_relative_eq!(b1, 0.03 * 0.9 + 0.01, epsilon = 1e-15);
        // Cap 0: no reduction anywhere → gross rate.
        let b0 = leak_actual_bound(&hist, 0.1, Some(0)).unwrap();
        assert_relative_eq!(b0, 0.04, epsilon = 1e-15);
    }

    #[test]
    fn test_bound_nonincreasing_in_cap() {
        let hist =
            BlockHistogram { counts: [(1, 10), (2, 8), (3, 6), (5, 4), (9, 2)].into(), n: 500 };
        let mut prev = f64::INFINITY;
        for cap in 0..=10 {
            let b = leak_actual_bound(&hist, 0.25, Some(cap)).unwrap();
            assert!(b <= prev + 1e-15, "cap {cap}: {b} > {prev}");
            prev = b;
        }
        let uncapped = leak_actual_bound(&hist, 0.25, None).unwrap();
        assert_relative_eq!(prev, uncapped, epsilon = 1e-15);
    }

    #[test]
    fn test_bound_rejects_bad_delta() {
        let hist = BlockHistogram { counts: [(1, 1)].into(), n: 10 };
        assert!(leak_actual_bound(&hist, -0.1, None).is_err());
        assert!(leak_actual_bound(&hist, 1.1, None).is_err());
    }

    #[test]
    fn test_report_figure_shaped_trace() {
        // Two top-level 8-blocks plus a {4,2,1} search chain; the length-2
        // block {4,5} is entirely multi-photon: gross 5 parities, net 4.
        let ledger = ledger_of(
            16,
            &[
                &[0, 1, 2, 3, 4, 5, 6, 7],
                &[8, 9, 10, 11, 12, 13, 14, 15],
                &[0, 1, 2, 3],
                &[4, 5],
                &[6],
            ],
        );
        let t = tags(16, &[4, 5]);
        let r = report(&ledger, &t, 0.2, None).unwrap();
        assert_relative_eq!(r.leak_all, 5.0 / 16.0);
        assert_relative_eq!(r.leak_m_exact, 1.0 / 16.0);
        assert_relative_eq!(r.leak_actual_exact, 4.0 / 16.0);
        assert!(r.rank_leak <= r.leak_all);
        // These five parity sets are linearly independent.
        assert_relative_eq!(r.rank_leak, 5.0 / 16.0);
    }

    #[test]
    fn test_report_rank_detects_dependence() {
        // Third block is the XOR of the first two: rank 2, count 3.
        let ledger = ledger_of(8, &[&[0, 1], &[1, 2], &[0, 2]]);
        let r = report(&ledger, &tags(8, &[]), 0.0, None).unwrap();
        assert_relative_eq!(r.leak_all, 3.0 / 8.0);
        assert_relative_eq!(r.rank_leak, 2.0 / 8.0);
    }

    #[test]
    fn test_csv_row_shape() {
        let ledger = ledger_of(16, &[&[0, 1]]);
        let r = report(&ledger, &tags(16, &[]), 0.1, Some(1)).unwrap();
        let row = r.to_csv_row();
        assert_eq!(row.split(',').count(), LeakageReport::csv_header().split(',').count());
    }
}
