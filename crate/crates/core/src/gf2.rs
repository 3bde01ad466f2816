//! GF(2) linear algebra over parity index sets.
//!
//! A disclosed parity is a linear functional over the key bits; the rank of
//! the disclosed set measures how many of the parities carry independent
//! information. Vectors are packed 64 positions per machine word and
//! eliminated word-parallel, since ledgers reach ~10⁵ rows over ~10⁶-bit
//! frames at desk scale.

use crate::CoreError;

/// One parity observation: a non-empty set of bit positions and the parity of
/// those bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityVector {
    /// Bit positions, in `[0, N)` for the owning frame.
    pub indices: Vec<u32>,
    /// Parity (sum modulo 2) of the referenced bits.
    pub parity: bool,
}

impl ParityVector {
    /// Builds a parity vector, validating the index range.
    pub fn new(indices: Vec<u32>, parity: bool, n: usize) -> Result<Self, CoreError> {
        if indices.is_empty() {
            return Err(CoreError::EmptyInput("parity vector index set".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i as usize >= n) {
            return Err(CoreError::IndexOutOfRange {
                index: bad as usize,
                len: n,
            });
        }
        Ok(ParityVector { indices, parity })
    }
}

/// Bit-packed row used during elimination.
fn pack_row(indices: &[u32], words: usize) -> Vec<u64> {
    let mut row = vec![0u64; words];
    for &i in indices {
        row[(i as usize) >> 6] ^= 1u64 << (i & 63);
    }
    row
}

/// Index of the lowest set bit across the packed row, if any.
fn leading_bit(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| (i << 6) + w.trailing_zeros() as usize)
}

/// Rank over GF(2) of the indicator vectors of `vectors`' index sets.
///
/// Gaussian elimination with pivots keyed by leading bit position: each row is
/// reduced against the stored pivot rows and either becomes a new pivot or
/// vanishes (linearly dependent). Duplicate indices within one vector cancel,
/// matching GF(2) semantics.
///
/// # Errors
/// Returns [`CoreError::IndexOutOfRange`] if any index is `≥ n`.
pub fn gf2_rank(vectors: &[ParityVector], n: usize) -> Result<usize, CoreError> {
    for v in vectors {
        if let Some(&bad) = v.indices.iter().find(|&&i| i as usize >= n) {
            return Err(CoreError::IndexOutOfRange {
                index: bad as usize,
                len: n,
            });
        }
    }
    let words = n.div_ceil(64).max(1);
    // pivot_for[b] = index into `pivots` of the row whose leading bit is b.
    let mut pivot_of_bit: Vec<Option<usize>> = Vec::new();
    let mut pivots: Vec<Vec<u64>> = Vec::new();
    let mut rank = 0usize;

    for v in vectors {
        let mut row = pack_row(&v.indices, words);
        while let Some(bit) = leading_bit(&row) {
            if bit >= pivot_of_bit.len() {
                pivot_of_bit.resize(bit + 1, None);
            }
            match pivot_of_bit[bit] {
                Some(p) => {
                    let (pr, r) = (&pivots[p], &mut row);
                    for (w, pw) in r.iter_mut().zip(pr.iter()) {
                        *w ^= *pw;
                    }
                }
                None => {
                    pivot_of_bit[bit] = Some(pivots.len());
                    pivots.push(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(indices: &[u32], n: usize) -> ParityVector {
        ParityVector::new(indices.to_vec(), false, n).unwrap()
    }

    #[test]
    fn test_rank_disjoint_singletons() {
        let vs = vec![pv(&[0], 4), pv(&[1], 4)];
        assert_eq!(gf2_rank(&vs, 4).unwrap(), 2);
    }

    #[test]
    fn test_rank_empty_set() {
        assert_eq!(gf2_rank(&[], 4).unwrap(), 0);
    }

    #[test]
    fn test_rank_dependent_triple() {
        // Third vector is the GF(2) sum of the first two.
        let vs = vec![pv(&[0, 1], 4), pv(&[1, 2], 4), pv(&[0, 2], 4)];
        assert_eq!(gf2_rank(&vs, 4).unwrap(), 2);
    }

    #[test]
    fn test_rank_bounded_by_rows_and_columns() {
        let vs = vec![pv(&[0, 1, 2], 3), pv(&[0], 3), pv(&[1], 3), pv(&[2], 3)];
        assert_eq!(gf2_rank(&vs, 3).unwrap(), 3);
    }

    #[test]
    fn test_rank_crosses_word_boundaries() {
        let n = 200;
        let vs = vec![pv(&[0, 64, 128, 199], n), pv(&[64], n), pv(&[0, 128, 199], n)];
        // Third = first ⊕ second.
        assert_eq!(gf2_rank(&vs, n).unwrap(), 2);
    }

    #[test]
    fn test_rank_rejects_out_of_range() {
        let v = ParityVector {
            indices: vec![5],
            parity: false,
        };
        assert!(gf2_rank(&[v], 4).is_err());
    }

    #[test]
    fn test_parity_vector_validation() {
        assert!(ParityVector::new(vec![], false, 4).is_err());
        assert!(ParityVector::new(vec![4], false, 4).is_err());
        assert!(ParityVector::new(vec![3], true, 4).is_ok());
    }
}
